"""Lift lengths of level curves in the unit circle bundle.

The metric family on the bundle is r^2 g on the vertical (fibre)
direction plus g horizontally.  A level curve lifted together with its
unit normal picks up the vertical speed (H_f w, w)/|grad f| along the
way, so its lift length is the line integral of
sqrt(1 + r^2 (H_f w, w)^2 / |grad f|^2).

Discretely the vertical part of each contour segment is taken as the
wrapped angle swept by the analytic unit normal between the segment
endpoints (plus the chart connection term), and the lift length is the
chordal polygon length sum sqrt(|segment|^2 + r^2 |angle|^2).  This
approximates the integral from below and keeps the winding lower bound
of closed loops exactly, so the systole inequality L(c) >= kappa(r)
beta(c) survives discretization even for contours smaller than a grid
cell.

Systoles of the bundle are known in closed form for the flat models
only; bound evaluations that need them reject the sphere.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .grid import GridField, gradient_l2, laplacian_l2
from .levelsets import (IrregularLevelError, _clamp_sphere_u, _DualGrid,
                        _segment_soup, compose_norm, grad_floor)
from .surfaces import (DISC, RECTANGLE, SPHERE, TORUS, TWO_PI,
                       chart_partials, covariant_from_partials)


class UnsupportedModelError(ValueError):
    """The operation needs a closed-form systole or a flat chart."""


def systole(model, r: float) -> float:
    """Systole of the unit circle bundle under the r-weighted metric.

    Flat simply connected domains: the fibre, length 2*pi*r.  Flat torus:
    the shorter of the fibre and a horizontal closed geodesic.
    """
    if r <= 0:
        raise ValueError("the metric parameter r must be positive")
    kind = model.kind
    if kind in (RECTANGLE, DISC):
        return TWO_PI * r
    if kind == TORUS:
        return min(TWO_PI, TWO_PI * r)
    raise UnsupportedModelError("no closed-form systole for the round sphere")


def _segment_arrays_from_polyline(gf: GridField, polyline: np.ndarray):
    """Unwrapped polyline, segment midpoints and Riemannian lengths."""
    p = np.asarray(polyline, dtype=float).copy()
    # wrapped output coordinates can jump by a full period along a loop;
    # rebuild continuous coordinates from minimum-image deltas
    for ax, periodic, span in ((0, gf.periodic_u,
                                gf.model.u_range[1] - gf.model.u_range[0]),
                               (1, gf.periodic_v,
                                gf.model.v_range[1] - gf.model.v_range[0])):
        if periodic:
            dd = np.diff(p[:, ax])
            dd[dd > span / 2] -= span
            dd[dd < -span / 2] += span
            p[1:, ax] = p[0, ax] + np.cumsum(dd)
    du = np.diff(p[:, 0])
    dv = np.diff(p[:, 1])
    mid_u = _clamp_sphere_u(gf, p[:-1, 0] + du / 2)
    mid_v = p[:-1, 1] + dv / 2
    kind = gf.model.kind
    if kind == SPHERE:
        gvv = np.sin(mid_u) ** 2
    elif kind == DISC:
        gvv = mid_u ** 2
    else:
        gvv = np.ones_like(mid_u)
    length = np.sqrt(du ** 2 + gvv * dv ** 2)
    return p, mid_u, mid_v, length


def lift_length(contour: np.ndarray, gf: GridField, r: float) -> float:
    """Length of the contour's normal lift for metric parameter r.

    contour is a closed polyline in chart coordinates; the fibre angles
    come from the analytic field expression at the polyline vertices.
    Raises IrregularLevelError naming the first segment whose midpoint
    gradient drops below the regularity floor.
    """
    from .levelsets import segment_vertical_increments

    p, mid_u, mid_v, length = _segment_arrays_from_polyline(gf, contour)
    if length.size == 0:
        return 0.0
    parts = chart_partials(gf.expr, mid_u, mid_v)
    cov = covariant_from_partials(gf.model, mid_u, mid_v, parts, gf.expr.builtin)
    gnorm = np.asarray(cov["grad_norm"])
    floor = grad_floor(gf)
    if np.any(gnorm < floor):
        k = int(np.argmin(gnorm))
        raise IrregularLevelError(
            f"near-critical segment {k} at ({mid_u[k]:.6g}, {mid_v[k]:.6g}): "
            f"|grad f| = {gnorm[k]:.3g} < floor {floor:.3g}")
    vert = segment_vertical_increments(gf, p[:-1, 0], p[:-1, 1],
                                       p[1:, 0], p[1:, 1], mid_u)
    return float(np.sum(np.hypot(length, r * vert)))


def level_lift_length(gf: GridField, c: float, r: float,
                      dual: Optional[_DualGrid] = None) -> float:
    """Total lift length over all contours of the level f = c."""
    from .levelsets import soup_lift_lengths

    lo, hi = gf.value_range()
    if not (lo < c < hi):
        return 0.0
    soup = _segment_soup(gf, dual or _DualGrid(gf), c)
    if soup.n == 0:
        return 0.0
    return soup_lift_lengths(gf, soup, (r,))[0]


def co_area_bound(gf: GridField, u, r: float) -> float:
    """Indicatrix upper bound through the bundle systole and energy norms.

    Evaluates kappa(r)^-1 * ||u o f|| * sqrt(r^2 ||Delta f||^2
    + (1 - r^2 K_min / 2) ||grad f||^2); flat models only, since the
    sphere systole has no closed form here.
    """
    kappa = systole(gf.model, r)
    k3 = 1.0 - 0.5 * r * r * gf.model.curvature_K
    value = math.sqrt(r * r * laplacian_l2(gf) ** 2
                      + k3 * gradient_l2(gf) ** 2)
    return compose_norm(gf, u) * value / kappa


def hessian_mass_bound(gf: GridField) -> dict:
    """Sup bound through the L1 norm of the Hessian on flat bounded charts.

    Returns {"lhs": max |f|, "rhs": (1/2pi) * integral of |H_f| dsigma}.
    Supported on the rectangle and the disc.
    """
    if gf.model.kind not in (RECTANGLE, DISC):
        raise UnsupportedModelError(
            "the Hessian-mass bound needs a flat simply connected chart")
    rhs = gf.quad_sum(gf.hess_norm, [c.hess_norm for c in gf.caps()]) / TWO_PI
    return {"lhs": gf.max_abs(), "rhs": rhs}
