"""Level curves, component counts and indicatrix integrals.

Contours are extracted by marching squares on the dual grid whose
corners are the sample cell centres, with linear interpolation along
dual edges.  Saddle cells (cases 5/10) are disambiguated by evaluating
the source expression at the dual-cell centre.  On the sphere and the
disc the polar caps are covered by triangle fans with the cap cell as
apex, so contours encircling a pole close through the cap.

A level sweep evaluates, per level c: the component count beta(c), the
Leray length (integral of ds/|grad f|), and Sasaki lift lengths for a
list of metric parameters r.  Levels where |grad f| drops below the
regularity floor along the contour are flagged irregular and excluded
from indicatrix quadrature; their total c-measure is reported.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import GridField
from .surfaces import (DISC, RECTANGLE, SPHERE, ConfigError, chart_partials,
                       covariant_from_partials)

MIN_LEVELS = 64
DEFAULT_LEVELS = 512


class IrregularLevelError(ValueError):
    """The requested level fails the |grad f| regularity floor (or range)."""


class DegenerateFieldError(RuntimeError):
    """No regular level found in the whole sweep."""


# ---------------------------------------------------------------------------
# weight functions u(c)


def resolve_weight(u) -> Callable[[np.ndarray], np.ndarray]:
    """Accept a named weight, a callable, or a (2, N) interpolation table."""
    if callable(u):
        return u
    if isinstance(u, str):
        named = {
            "one": lambda t: np.ones_like(np.asarray(t, dtype=float)),
            "abs": lambda t: np.abs(t),
            "square": lambda t: np.asarray(t, dtype=float) ** 2,
            "zero": lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        }
        if u not in named:
            raise ConfigError(f"unknown weight function {u!r}")
        return named[u]
    table = np.asarray(u, dtype=float)
    if table.ndim != 2 or table.shape[0] != 2:
        raise ConfigError("custom weight tables must have shape (2, N)")
    return lambda t: np.interp(t, table[0], table[1])


def compose_norm(gf: GridField, u) -> float:
    """Quadrature L2 norm of u(f) over the surface."""
    w = resolve_weight(u)
    return math.sqrt(gf.quad_sum(w(gf.f) ** 2, [w(c.f) ** 2 for c in gf.caps()]))


def grad_floor(gf: GridField) -> float:
    """Regularity floor for |grad f| along contours."""
    fmax = gf.max_abs()
    if gf.lambda_hint:
        return 1e-3 * fmax * math.sqrt(gf.lambda_hint)
    return 1e-6 * fmax


# ---------------------------------------------------------------------------
# dual-grid marching squares

# segment table: per case, pairs of local edges (0=bottom, 1=right, 2=top,
# 3=left); corner bits A=1 (iu,iv), B=2 (iu+1,iv), C=4 (iu+1,iv+1), D=8
_SEGMENTS = {
    1: ((0, 3),), 2: ((0, 1),), 3: ((3, 1),), 4: ((1, 2),),
    6: ((0, 2),), 7: ((3, 2),), 8: ((2, 3),), 9: ((0, 2),),
    11: ((1, 2),), 12: ((3, 1),), 13: ((0, 1),), 14: ((0, 3),),
}
_CASE5_CONNECT = ((0, 1), (2, 3))     # centre above: loops around B and D
_CASE5_SPLIT = ((0, 3), (1, 2))       # centre below: loops around A and C
_CASE10_CONNECT = ((0, 3), (1, 2))    # centre above: loops around A and C
_CASE10_SPLIT = ((0, 1), (2, 3))      # centre below: loops around B and D


class _DualGrid:
    """Corner values and coordinates of all dual cells, built once per field.

    Corners are the sample cell centres, extended by analytic boundary
    rings on real chart edges (all four rectangle sides, the outer disc
    circle) so contours close up to the boundary instead of stopping at
    the outermost samples.  Sphere poles and the disc centre are covered
    by cap triangle fans instead.
    """

    def __init__(self, gf: GridField):
        self.gf = gf
        model = gf.model
        span_u = model.u_range[1] - model.u_range[0]
        span_v = model.v_range[1] - model.v_range[0]
        uc, vc = gf.us, gf.vs
        Fc = gf.f
        kind = model.kind
        if kind == RECTANGLE:
            a, b = model.u_range[1], model.v_range[1]
            uc = np.concatenate([[0.0], uc, [a]])
            vc = np.concatenate([[0.0], vc, [b]])
            Fc = np.zeros((uc.size, vc.size))
            Fc[1:-1, 1:-1] = gf.f
            Fc[0, :] = chart_partials(gf.expr, 0.0, vc, False)["f"]
            Fc[-1, :] = chart_partials(gf.expr, a, vc, False)["f"]
            Fc[:, 0] = chart_partials(gf.expr, uc, 0.0, False)["f"]
            Fc[:, -1] = chart_partials(gf.expr, uc, b, False)["f"]
        elif kind == DISC:
            uc = np.concatenate([uc, [1.0]])
            ring = chart_partials(gf.expr, 1.0, vc, False)["f"]
            Fc = np.vstack([gf.f, ring[None, :]])
        mu, mv = Fc.shape
        self.Fc, self.uc, self.vc = Fc, uc, vc
        self.mu, self.mv = mu, mv
        self.NU = mu if gf.periodic_u else mu - 1
        self.NV = mv if gf.periodic_v else mv - 1
        iu = np.arange(self.NU)
        iv = np.arange(self.NV)
        iup = (iu + 1) % mu
        ivp = (iv + 1) % mv
        # flattened per-dual-cell corner data; only cells straddling a
        # level are gathered during a sweep
        self.FA = Fc[np.ix_(iu, iv)].ravel()
        self.FB = Fc[np.ix_(iup, iv)].ravel()
        self.FC = Fc[np.ix_(iup, ivp)].ravel()
        self.FD = Fc[np.ix_(iu, ivp)].ravel()
        self.Fmin = np.minimum.reduce([self.FA, self.FB, self.FC, self.FD])
        self.Fmax = np.maximum.reduce([self.FA, self.FB, self.FC, self.FD])
        u_ext = np.concatenate([uc, [uc[0] + span_u]]) if gf.periodic_u else uc
        v_ext = np.concatenate([vc, [vc[0] + span_v]]) if gf.periodic_v else vc
        ones_v = np.ones(self.NV)
        ones_u = np.ones(self.NU)
        self.U0 = np.outer(u_ext[iu], ones_v).ravel()
        self.U1 = np.outer(u_ext[iu + 1], ones_v).ravel()
        self.V0 = np.outer(ones_u, v_ext[iv]).ravel()
        self.V1 = np.outer(ones_u, v_ext[iv + 1]).ravel()
        self.IU = np.outer(iu, ones_v).astype(np.int64).ravel()
        self.IV = np.outer(ones_u, iv).astype(np.int64).ravel()
        self.IUP = np.outer(iup, ones_v).astype(np.int64).ravel()
        self.IVP = np.outer(ones_u, ivp).astype(np.int64).ravel()
        # edge id layout: u-edges, then v-edges, then cap-fan spokes
        self.n_uedges = self.NU * mv
        self.n_vedges = mu * self.NV
        self.spoke_base = self.n_uedges + self.n_vedges

    def edge_u(self, iu, iv):
        return iu * self.mv + iv

    def edge_v(self, iu, iv):
        return self.n_uedges + iu * self.NV + iv


@dataclass
class SegmentSoup:
    """Unordered contour segments of one level with per-segment geometry.

    vert holds the unsigned fibre-angle increment of the unit normal
    between the segment endpoints (frame angle difference plus the
    chart connection term), so that lift lengths assembled from it keep
    the winding lower bound of closed loops at any resolution.
    """

    id1: np.ndarray
    id2: np.ndarray
    x1: np.ndarray
    y1: np.ndarray
    x2: np.ndarray
    y2: np.ndarray
    length: np.ndarray
    mid_u: np.ndarray
    mid_v: np.ndarray
    w_frame: np.ndarray      # (n, 2) unit tangent in the orthonormal frame
    grad_norm: np.ndarray
    hess_ww: np.ndarray      # (H_f w, w) at segment midpoints
    vert: np.ndarray         # |Delta angle| of the normal along the segment

    @property
    def n(self) -> int:
        return self.id1.size

    def loop_labels(self) -> np.ndarray:
        """Connected-component label per segment (loops of the 2-regular
        contour graph), computed by union-find over edge endpoints."""
        if self.n == 0:
            return np.zeros(0, dtype=int)
        ids = np.concatenate([self.id1, self.id2])
        uniq, inv = np.unique(ids, return_inverse=True)
        parent = np.arange(uniq.size)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        a = inv[: self.n]
        b = inv[self.n:]
        for x, y in zip(a, b):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
        return np.array([find(x) for x in a])

    def beta(self) -> int:
        if self.n == 0:
            return 0
        return np.unique(self.loop_labels()).size


def _interp(c, f0, f1, a0, a1):
    t = (c - f0) / (f1 - f0)
    return a0 + t * (a1 - a0)


def _project_to_level(gf: GridField, u, v, c: float, steps: int = 2):
    """Newton-project points onto the analytic level set {f = c}.

    Linear interpolation along dual edges is only O(h^2) accurate, and a
    contour loop around a near-extremal sample can miss the actual
    critical point entirely; pulling the vertices onto the true curve
    restores both the geometry and the winding of the lifted normal.
    Steps are capped at one cell and the points stay inside the chart.
    """
    u = np.asarray(u, dtype=float).copy()
    v = np.asarray(v, dtype=float).copy()
    model = gf.model
    hu = float(np.max(np.diff(gf.us))) if gf.us.size > 1 else 1.0
    hv = gf.vs[1] - gf.vs[0]
    for _ in range(steps):
        ue = _clamp_sphere_u(gf, u)
        parts = chart_partials(gf.expr, ue, v)
        gvv = _metric_gvv(gf, ue)
        fu, fv = parts["fu"], parts["fv"]
        g2 = fu ** 2 + fv ** 2 / gvv
        ok = g2 > 1e-30
        safe = np.where(ok, g2, 1.0)
        resid = parts["f"] - c
        du = np.where(ok, -resid * fu / safe, 0.0)
        dv = np.where(ok, -resid * (fv / gvv) / safe, 0.0)
        u = u + np.clip(du, -hu, hu)
        v = v + np.clip(dv, -hv, hv)
        if not model.periodic_u:
            lo, hi = model.u_range
            if model.kind == SPHERE:
                lo, hi = lo + 1e-9, hi - 1e-9
            u = np.clip(u, lo, hi)
        if not model.periodic_v:
            v = np.clip(v, model.v_range[0], model.v_range[1])
    return u, v


def _metric_gvv(gf: GridField, u):
    kind = gf.model.kind
    if kind == SPHERE:
        return np.sin(u) ** 2
    if kind == DISC:
        return u ** 2
    return np.ones_like(u)


def _clamp_sphere_u(gf: GridField, u):
    if gf.model.kind == SPHERE:
        eps = 1e-9
        return np.clip(u, eps, math.pi - eps)
    return u


def normal_frame_angle(gf: GridField, u, v):
    """Angle of the unit normal grad f / |grad f| in the orthonormal frame."""
    u = _clamp_sphere_u(gf, np.asarray(u, dtype=float))
    parts = chart_partials(gf.expr, u, v)
    cov = covariant_from_partials(gf.model, u, np.asarray(v, dtype=float),
                                  parts, gf.expr.builtin)
    gvv = _metric_gvv(gf, u)
    return np.arctan2(cov["grad_v"] / np.sqrt(gvv), cov["grad_u"])


def _connection_coefficient(gf: GridField, u):
    """Rotation rate of the chart frame against parallel transport, per
    unit v: 1 on the polar disc chart, cos(theta) on the sphere, 0 on
    Cartesian charts."""
    kind = gf.model.kind
    if kind == DISC:
        return np.ones_like(u)
    if kind == SPHERE:
        return np.cos(u)
    return np.zeros_like(u)


def _wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def segment_vertical_increments(gf: GridField, x1, y1, x2, y2, mid_u):
    """Unsigned fibre-angle increments of the normal along straight
    segments, assembled so closed-loop sums keep the winding bound."""
    a1 = normal_frame_angle(gf, x1, y1)
    a2 = normal_frame_angle(gf, x2, y2)
    conn = _connection_coefficient(gf, mid_u)
    return np.abs(_wrap_angle(a2 - a1) + conn * (np.asarray(y2) - np.asarray(y1)))


def _segment_soup(gf: GridField, dual: _DualGrid, c: float) -> SegmentSoup:
    """All contour segments of the level f = c (dual cells plus cap fans)."""
    act = np.flatnonzero((dual.Fmin <= c) & (dual.Fmax > c))
    FA, FB = dual.FA[act], dual.FB[act]
    FC, FD = dual.FC[act], dual.FD[act]
    U0, U1 = dual.U0[act], dual.U1[act]
    V0, V1 = dual.V0[act], dual.V1[act]
    IU, IV = dual.IU[act], dual.IV[act]
    IUP, IVP = dual.IUP[act], dual.IVP[act]
    case = ((FA > c).astype(np.int8) + 2 * (FB > c).astype(np.int8)
            + 4 * (FC > c).astype(np.int8) + 8 * (FD > c).astype(np.int8))

    id1_parts, id2_parts = [], []
    p1u, p1v, p2u, p2v = [], [], [], []

    def crossing(local_edge, sel):
        """Crossing point and canonical id on a local edge of selected cells."""
        iu = IU[sel]
        iv = IV[sel]
        if local_edge == 0:    # bottom: A-B, u varies
            pu = _interp(c, FA[sel], FB[sel], U0[sel], U1[sel])
            pv = V0[sel]
            eid = dual.edge_u(iu, iv)
        elif local_edge == 2:  # top: D-C
            pu = _interp(c, FD[sel], FC[sel], U0[sel], U1[sel])
            pv = V1[sel]
            eid = dual.edge_u(iu, IVP[sel])
        elif local_edge == 3:  # left: A-D, v varies
            pu = U0[sel]
            pv = _interp(c, FA[sel], FD[sel], V0[sel], V1[sel])
            eid = dual.edge_v(iu, iv)
        else:                  # right: B-C
            pu = U1[sel]
            pv = _interp(c, FB[sel], FC[sel], V0[sel], V1[sel])
            eid = dual.edge_v(IUP[sel], iv)
        return pu, pv, eid

    def emit(sel, pairs):
        for e1, e2 in pairs:
            u1, v1, i1 = crossing(e1, sel)
            u2, v2, i2 = crossing(e2, sel)
            id1_parts.append(i1)
            id2_parts.append(i2)
            p1u.append(u1)
            p1v.append(v1)
            p2u.append(u2)
            p2v.append(v2)

    for case_id, pairs in _SEGMENTS.items():
        sel = case == case_id
        if np.any(sel):
            emit(sel, pairs)

    for case_id, connect, split in ((5, _CASE5_CONNECT, _CASE5_SPLIT),
                                    (10, _CASE10_CONNECT, _CASE10_SPLIT)):
        sel = case == case_id
        if not np.any(sel):
            continue
        uc = 0.5 * (U0[sel] + U1[sel])
        vc = 0.5 * (V0[sel] + V1[sel])
        centre = chart_partials(gf.expr, uc, vc, derivatives=False)["f"]
        above_c = centre > c
        for sub, pairs in ((above_c, connect), (~above_c, split)):
            if np.any(sub):
                subsel = np.zeros_like(sel)
                subsel[sel] = sub
                emit(subsel, pairs)

    # polar cap fans
    spoke_base = dual.spoke_base
    nv_caps = dual.mv
    caps = []
    if gf.cap_lo is not None:
        caps.append((gf.cap_lo, 0, gf.model.u_range[0], spoke_base))
    if gf.cap_hi is not None:
        caps.append((gf.cap_hi, dual.mu - 1, gf.model.u_range[1],
                     spoke_base + nv_caps))
    for cap, row, apex_u, sp_base in caps:
        fP = cap.f
        j = np.arange(nv_caps)
        jp = (j + 1) % nv_caps
        fQ = dual.Fc[row, j]
        fR = dual.Fc[row, jp]
        uQ = dual.uc[row]
        vs = dual.vc
        span_v = gf.model.v_range[1] - gf.model.v_range[0]
        vQ = vs
        vR = np.where(jp == 0, vs[0] + span_v, vs[jp])
        bP = fP > c
        bQ = fQ > c
        bR = fR > c

        # P isolated: segment spoke_j x spoke_{j+1}
        sel = bP != bQ
        sel &= bQ == bR
        if np.any(sel):
            jj = j[sel]
            u1 = _interp(c, fQ[sel], fP, uQ, apex_u)
            u2 = _interp(c, fR[sel], fP, uQ, apex_u)
            id1_parts.append(sp_base + jj)
            id2_parts.append(sp_base + (jj + 1) % nv_caps)
            p1u.append(u1)
            p1v.append(vQ[sel])
            p2u.append(u2)
            p2v.append(vR[sel])
        # Q isolated: spoke_j x ring_j
        sel = (bQ != bP) & (bQ != bR)
        if np.any(sel):
            jj = j[sel]
            u1 = _interp(c, fQ[sel], fP, uQ, apex_u)
            v2 = _interp(c, fQ[sel], fR[sel], vQ[sel], vR[sel])
            id1_parts.append(sp_base + jj)
            id2_parts.append(dual.edge_v(np.full(jj.size, row), jj))
            p1u.append(u1)
            p1v.append(vQ[sel])
            p2u.append(np.full(jj.size, uQ))
            p2v.append(v2)
        # R isolated: spoke_{j+1} x ring_j
        sel = (bR != bP) & (bR != bQ)
        if np.any(sel):
            jj = j[sel]
            u1 = _interp(c, fR[sel], fP, uQ, apex_u)
            v2 = _interp(c, fQ[sel], fR[sel], vQ[sel], vR[sel])
            id1_parts.append(sp_base + (jj + 1) % nv_caps)
            id2_parts.append(dual.edge_v(np.full(jj.size, row), jj))
            p1u.append(u1)
            p1v.append(vR[sel])
            p2u.append(np.full(jj.size, uQ))
            p2v.append(v2)

    if not id1_parts:
        z = np.zeros(0)
        return SegmentSoup(z.astype(np.int64), z.astype(np.int64), z, z, z, z,
                           z, z, z, np.zeros((0, 2)), z, z, z)

    id1 = np.concatenate(id1_parts).astype(np.int64)
    id2 = np.concatenate(id2_parts).astype(np.int64)
    x1 = np.concatenate(p1u)
    y1 = np.concatenate(p1v)
    x2 = np.concatenate(p2u)
    y2 = np.concatenate(p2v)
    x1, y1 = _project_to_level(gf, x1, y1, c)
    x2, y2 = _project_to_level(gf, x2, y2, c)

    mid_u = _clamp_sphere_u(gf, 0.5 * (x1 + x2))
    mid_v = 0.5 * (y1 + y2)
    du = x2 - x1
    dv = y2 - y1
    gvv = _metric_gvv(gf, mid_u)
    length = np.sqrt(du ** 2 + gvv * dv ** 2)
    ok = length > 0
    w = np.zeros((length.size, 2))
    w[ok, 0] = du[ok] / length[ok]
    w[ok, 1] = np.sqrt(gvv[ok]) * dv[ok] / length[ok]

    parts = chart_partials(gf.expr, mid_u, mid_v)
    cov = covariant_from_partials(gf.model, mid_u, mid_v, parts, gf.expr.builtin)
    hww = (cov["h11"] * w[:, 0] ** 2 + 2.0 * cov["h12"] * w[:, 0] * w[:, 1]
           + cov["h22"] * w[:, 1] ** 2)
    vert = segment_vertical_increments(gf, x1, y1, x2, y2, mid_u)
    return SegmentSoup(id1, id2, x1, y1, x2, y2, length, mid_u, mid_v, w,
                       np.asarray(cov["grad_norm"]), hww, vert)


RESAMPLE_RAYS = 48


def _resample_small_loops(gf: GridField, c: float, su, sv, rs):
    """Ray-resampled lift lengths for under-resolved contour loops.

    A marching polygon around a critical point that sits between grid
    samples can fail to encircle it, losing the winding of the lifted
    normal.  For each seed (one vertex per failing loop) this locates
    the enclosed critical point by a Newton solve on grad f, then places
    RESAMPLE_RAYS points of the true level curve by radial root solves,
    giving a closed polygon that provably surrounds the critical point.
    Everything is vectorized over (loops, rays).

    Returns (lift (n_loops, n_rs) with nan rows for failed solves).
    """
    su = np.asarray(su, dtype=float)
    sv = np.asarray(sv, dtype=float)
    k = su.size
    h = float(np.max(np.diff(gf.us))) if gf.us.size > 1 else 1.0
    scale = gf.max_abs()

    # Newton for the enclosed critical point, in chart coordinates
    u, v = su.copy(), sv.copy()
    for _ in range(8):
        parts = chart_partials(gf.expr, _clamp_sphere_u(gf, u), v)
        fu, fv = parts["fu"], parts["fv"]
        fuu, fuv, fvv = parts["fuu"], parts["fuv"], parts["fvv"]
        det = fuu * fvv - fuv ** 2
        ok = np.abs(det) > 1e-30
        safe = np.where(ok, det, 1.0)
        du = np.where(ok, -(fvv * fu - fuv * fv) / safe, 0.0)
        dv = np.where(ok, -(-fuv * fu + fuu * fv) / safe, 0.0)
        u = u + np.clip(du, -h, h)
        v = v + np.clip(dv, -h, h)
    parts = chart_partials(gf.expr, _clamp_sphere_u(gf, u), v)
    grad_res = np.hypot(parts["fu"], parts["fv"])
    drift = np.hypot(u - su, v - sv)
    good = (grad_res < 1e-8 * scale) & (drift < 4 * h)

    # radial solves for the level curve around each critical point
    gvv_star = _metric_gvv(gf, _clamp_sphere_u(gf, u))
    phi = (np.arange(RESAMPLE_RAYS) + 0.5) * (2 * math.pi / RESAMPLE_RAYS)
    dir_u = np.cos(phi)[None, :] + 0.0 * u[:, None]
    dir_v = (np.sin(phi)[None, :] / np.sqrt(gvv_star)[:, None])
    rho = np.maximum(np.hypot(su - u, sv - v), 1e-12)[:, None] \
        * np.ones((1, RESAMPLE_RAYS))
    for _ in range(6):
        pu = u[:, None] + rho * dir_u
        pv = v[:, None] + rho * dir_v
        parts = chart_partials(gf.expr, _clamp_sphere_u(gf, pu), pv)
        g = parts["f"] - c
        gp = parts["fu"] * dir_u + parts["fv"] * dir_v
        ok = np.abs(gp) > 1e-30
        step = np.where(ok, -g / np.where(ok, gp, 1.0), 0.0)
        rho = np.clip(rho + np.clip(step, -h, h), 1e-12, 6 * h)
    pu = u[:, None] + rho * dir_u
    pv = v[:, None] + rho * dir_v
    resid = np.abs(chart_partials(gf.expr, _clamp_sphere_u(gf, pu), pv,
                                  False)["f"] - c)
    good &= np.max(resid, axis=1) < 1e-6 * scale

    # chordal lift lengths over the closed ray polygons
    pu_c = np.concatenate([pu, pu[:, :1]], axis=1)
    pv_c = np.concatenate([pv, pv[:, :1]], axis=1)
    du = np.diff(pu_c, axis=1)
    dv = np.diff(pv_c, axis=1)
    mid_u = _clamp_sphere_u(gf, pu_c[:, :-1] + du / 2)
    gvv = _metric_gvv(gf, mid_u)
    length = np.sqrt(du ** 2 + gvv * dv ** 2)
    vert = segment_vertical_increments(gf, pu_c[:, :-1], pv_c[:, :-1],
                                       pu_c[:, 1:], pv_c[:, 1:], mid_u)
    out = np.full((k, len(rs)), np.nan)
    for j, r in enumerate(rs):
        out[:, j] = np.sum(np.hypot(length, r * vert), axis=1)
    out[~good, :] = np.nan
    return out


def soup_lift_lengths(gf: GridField, soup: SegmentSoup, rs) -> tuple:
    """Total lift length over all loops of a level, per metric parameter.

    Loops certified by their marching polygon (normal winding reaching a
    full turn, or base length reaching the flat-torus girth) use the
    chordal segment sum; the remaining under-resolved loops are
    ray-resampled on the analytic level curve.
    """
    rs = tuple(rs)
    if not rs or soup.n == 0:
        return tuple(0.0 for _ in rs)
    labels = soup.loop_labels()
    uniq, inv = np.unique(labels, return_inverse=True)
    n_loops = uniq.size
    len_sum = np.zeros(n_loops)
    vert_sum = np.zeros(n_loops)
    np.add.at(len_sum, inv, soup.length)
    np.add.at(vert_sum, inv, soup.vert)
    two_pi = 2 * math.pi
    fails = np.flatnonzero((vert_sum < two_pi - 1e-6)
                           & (len_sum < two_pi - 1e-6))
    totals = [float(np.sum(np.hypot(soup.length, r * soup.vert))) for r in rs]
    if fails.size == 0:
        return tuple(totals)

    first_seg = np.zeros(n_loops, dtype=int)
    first_seg[inv[::-1]] = np.arange(soup.n)[::-1]
    seeds = first_seg[fails]
    # the projected vertex sits on the analytic level curve; recover c
    c = float(chart_partials(gf.expr, _clamp_sphere_u(gf, soup.x1[seeds[0]]),
                             soup.y1[seeds[0]], False)["f"])
    res = _resample_small_loops(gf, c, soup.x1[seeds], soup.y1[seeds], rs)
    for j, r in enumerate(rs):
        for kk, lab_idx in enumerate(fails):
            if math.isnan(res[kk, j]):
                continue  # keep the polygon contribution
            seg_sel = inv == lab_idx
            poly = float(np.sum(np.hypot(soup.length[seg_sel],
                                         r * soup.vert[seg_sel])))
            totals[j] += res[kk, j] - poly
    return tuple(float(t) for t in totals)


def _wrap_coords(gf: GridField, u, v):
    span_u = gf.model.u_range[1] - gf.model.u_range[0]
    span_v = gf.model.v_range[1] - gf.model.v_range[0]
    if gf.periodic_u:
        u = np.mod(u - gf.model.u_range[0], span_u) + gf.model.u_range[0]
    if gf.periodic_v:
        v = np.mod(v - gf.model.v_range[0], span_v) + gf.model.v_range[0]
    return u, v


def stitch_loops(gf: GridField, soup: SegmentSoup) -> list[np.ndarray]:
    """Order segments into closed polylines (first point == last point).

    Each polyline vertex is the canonical (wrapped) crossing point of one
    dual edge, so loops close exactly.
    """
    if soup.n == 0:
        return []
    coords = {}
    for eid, uu, vv in zip(np.concatenate([soup.id1, soup.id2]),
                           np.concatenate([soup.x1, soup.x2]),
                           np.concatenate([soup.y1, soup.y2])):
        if eid not in coords:
            wu, wv = _wrap_coords(gf, uu, vv)
            coords[int(eid)] = (float(wu), float(wv))
    adjacency: dict[int, list[int]] = {}
    for k in range(soup.n):
        adjacency.setdefault(int(soup.id1[k]), []).append(k)
        adjacency.setdefault(int(soup.id2[k]), []).append(k)
    seen = np.zeros(soup.n, dtype=bool)
    loops = []
    for start in range(soup.n):
        if seen[start]:
            continue
        seen[start] = True
        first = int(soup.id1[start])
        vertex = int(soup.id2[start])
        path = [first, vertex]
        while vertex != first:
            nxt = None
            for k in adjacency[vertex]:
                if not seen[k]:
                    nxt = k
                    break
            if nxt is None:
                break  # open chain: should not happen on valid grids
            seen[nxt] = True
            vertex = int(soup.id2[nxt]) if int(soup.id1[nxt]) == vertex \
                else int(soup.id1[nxt])
            path.append(vertex)
        loops.append(np.array([coords[v] for v in path]))
    return loops


# ---------------------------------------------------------------------------
# public level operations


@dataclass
class LevelContours:
    c: float
    beta: int
    loops: list[np.ndarray]
    soup: SegmentSoup


def extract_level(gf: GridField, c: float, dual: Optional[_DualGrid] = None) -> LevelContours:
    """Extract the level set f = c as closed polylines plus its beta count.

    Levels outside the sampled range yield an empty contour set.
    """
    lo, hi = gf.value_range()
    if not (lo < c < hi):
        empty = _segment_soup(gf, dual or _DualGrid(gf), math.inf)
        return LevelContours(c=c, beta=0, loops=[], soup=empty)
    soup = _segment_soup(gf, dual or _DualGrid(gf), c)
    return LevelContours(c=c, beta=soup.beta(), loops=stitch_loops(gf, soup),
                         soup=soup)


@dataclass
class SweepSpec:
    c_min: Optional[float] = None
    c_max: Optional[float] = None
    n_levels: int = DEFAULT_LEVELS


@dataclass
class LevelRecord:
    c: float
    panel: float              # c-measure represented by this level
    beta: int
    leray: float
    sasaki: tuple[float, ...]
    regular: bool
    min_grad: float


@dataclass
class LevelSweep:
    records: list[LevelRecord]
    rs: tuple[float, ...]
    grad_floor: float
    irregular_measure: float
    c_range: tuple[float, float]

    def regular_records(self) -> list[LevelRecord]:
        return [r for r in self.records if r.regular]


def chebyshev_levels(c_min: float, c_max: float, n: int):
    """Chebyshev-spaced levels (dense near the range ends) and panel widths."""
    k = np.arange(n)
    mid = 0.5 * (c_min + c_max)
    half = 0.5 * (c_max - c_min)
    cs = mid - half * np.cos((k + 0.5) * math.pi / n)
    bounds = np.empty(n + 1)
    bounds[0] = c_min
    bounds[-1] = c_max
    bounds[1:-1] = 0.5 * (cs[:-1] + cs[1:])
    return cs, np.diff(bounds)


def run_sweep(gf: GridField, spec: Optional[SweepSpec] = None,
              rs: Sequence[float] = ()) -> LevelSweep:
    """Evaluate beta, Leray length and Sasaki lengths over a level sweep."""
    spec = spec or SweepSpec()
    if spec.n_levels < MIN_LEVELS:
        raise ConfigError(f"sweep needs at least {MIN_LEVELS} levels")
    lo, hi = gf.value_range()
    c_min = lo if spec.c_min is None else spec.c_min
    c_max = hi if spec.c_max is None else spec.c_max
    if not c_min < c_max:
        raise ConfigError("empty sweep range")
    cs, panels = chebyshev_levels(c_min, c_max, spec.n_levels)
    floor = grad_floor(gf)
    dual = _DualGrid(gf)
    records = []
    irregular = 0.0
    for c, panel in zip(cs, panels):
        if not (lo < c < hi):
            records.append(LevelRecord(c=float(c), panel=float(panel), beta=0,
                                       leray=0.0, sasaki=tuple(0.0 for _ in rs),
                                       regular=True, min_grad=math.inf))
            continue
        soup = _segment_soup(gf, dual, float(c))
        if soup.n == 0:
            records.append(LevelRecord(c=float(c), panel=float(panel), beta=0,
                                       leray=0.0, sasaki=tuple(0.0 for _ in rs),
                                       regular=True, min_grad=math.inf))
            continue
        min_grad = float(soup.grad_norm.min())
        regular = min_grad >= floor
        with np.errstate(divide="ignore", invalid="ignore"):
            leray = float(np.sum(soup.length / soup.grad_norm))
        sasaki = soup_lift_lengths(gf, soup, rs)
        records.append(LevelRecord(c=float(c), panel=float(panel),
                                   beta=soup.beta(), leray=leray,
                                   sasaki=sasaki, regular=regular,
                                   min_grad=min_grad))
        if not regular:
            irregular += float(panel)
    return LevelSweep(records=records, rs=tuple(rs), grad_floor=floor,
                      irregular_measure=irregular, c_range=(c_min, c_max))


def banach_indicatrix(gf: GridField, u="one", spec: Optional[SweepSpec] = None,
                      sweep: Optional[LevelSweep] = None) -> float:
    """Generalized Banach indicatrix: integral of u(c) * beta(c) dc.

    Midpoint quadrature over the sweep levels; irregular levels are
    skipped (their measure is available on the sweep object).
    """
    if sweep is None:
        sweep = run_sweep(gf, spec)
    weight = resolve_weight(u)
    regs = sweep.regular_records()
    if not regs:
        raise DegenerateFieldError("field too degenerate: no regular level")
    cs = np.array([r.c for r in regs])
    panels = np.array([r.panel for r in regs])
    betas = np.array([r.beta for r in regs], dtype=float)
    return float(np.sum(weight(cs) * betas * panels))


def leray_length(gf: GridField, c: float, dual: Optional[_DualGrid] = None) -> float:
    """Leray length of the level line {f = c}: integral of ds / |grad f|."""
    lo, hi = gf.value_range()
    if not (lo < c < hi):
        raise IrregularLevelError(f"level {c} outside the field range ({lo}, {hi})")
    soup = _segment_soup(gf, dual or _DualGrid(gf), c)
    if soup.n == 0:
        raise IrregularLevelError(f"level {c} has no contour on the grid")
    if float(soup.grad_norm.min()) < grad_floor(gf):
        raise IrregularLevelError(f"level {c} is not regular "
                                  f"(min |grad f| = {soup.grad_norm.min():.3g})")
    return float(np.sum(soup.length / soup.grad_norm))


def leray_form_check(gf: GridField, spec: Optional[SweepSpec] = None,
                     sweep: Optional[LevelSweep] = None):
    """Integral of beta^2/leray over regular levels, with its comparison norm.

    Returns (integral, comparison) where comparison = ||f|| + ||Delta f||.
    """
    from .grid import l2_norm, laplacian_l2

    if sweep is None:
        sweep = run_sweep(gf, spec)
    regs = sweep.regular_records()
    if not regs:
        raise DegenerateFieldError("field too degenerate: no regular level")
    total = 0.0
    for r in regs:
        if r.beta > 0 and r.leray > 0:
            total += (r.beta ** 2 / r.leray) * r.panel
    return total, l2_norm(gf) + laplacian_l2(gf)


# ---------------------------------------------------------------------------
# export


def sweep_to_csv(sweep: LevelSweep, path) -> None:
    """Sweep CSV: c, beta, one L_sasaki column per r, leray, regular."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["c", "beta"]
        header += [f"L_sasaki_r={r:g}" for r in sweep.rs]
        header += ["leray", "regular"]
        writer.writerow(header)
        for rec in sweep.records:
            row = [f"{rec.c:.12g}", rec.beta]
            row += [f"{L:.12g}" for L in rec.sasaki]
            row += [f"{rec.leray:.12g}" if rec.regular else "nan",
                    int(rec.regular)]
            writer.writerow(row)


def contours_to_csv(contours: LevelContours, path) -> None:
    """Polyline CSV: loop index, vertex index, x, y."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["loop", "vertex", "x", "y"])
        for li, loop in enumerate(contours.loops):
            for vi, (x, y) in enumerate(loop):
                writer.writerow([li, vi, f"{x:.12g}", f"{y:.12g}"])
