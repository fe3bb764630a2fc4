"""Inequality and identity harness over the model-surface fields.

Every check pairs a computed left-hand side with the growth scale the
bound compares against (a power of lambda or a norm combination), never
with an explicit constant: the theory only guarantees existence of a
metric constant.  Boundedness is asserted against caps frozen from a
calibration run over the canonical sharp families (see FROZEN_CAPS);
a ratio above its cap yields the verdict "violated-scaling".

Lambda for a sampled field is its quadrature ||Delta f|| — the smallest
admissible bound for membership in the unit-norm test class.  For the
diagonal torus family sin(nx) sin(ny) this is the spectral value 2 n^2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import nodal
from .grid import (GridField, gradient_l2, l2_norm, laplacian_l2, lp_norm,
                   mean_value, sample)
from .levelsets import SweepSpec, banach_indicatrix, compose_norm
from .surfaces import (RECTANGLE, TORUS, ConfigError, FieldExpr, rect_mode,
                       torus_mode, zonal_mode)

BOUNDED = "bounded-in-family"
EQUALITY = "equality-case"
VIOLATED = "violated-scaling"

# Ratio caps frozen from the calibration run over the canonical families
# (diagonal torus n = 1..8, zonal l = 2..40, rectangle Dirichlet m, n <= 8,
# and 100 seeded random 3-mode torus combinations), with a 1.25x margin on
# the observed maximum.  Random combinations are additionally gated at 5x
# the pure-family cap by the property suite.
FROZEN_CAPS = {
    "extrema_sum_q1": 0.80,        # observed peak 0.6351 (torus, ~2/pi)
    "extrema_sum_q2": 0.26,        # observed peak 0.2017 (torus, ~2/pi^2)
    "indicatrix_bound": 0.13,      # observed peak 0.0996, limit 1/pi^2
    "sixth_moment": 0.011,         # observed peak 0.00861 (zonal)
    "high_extrema_count": 0.012,   # observed peak 0.0086 = 2 (0.403)^6
    "sup_norm": 0.50,              # observed peak 0.4028 (zonal)
    "eighth_moment_dirichlet": 0.0085,  # observed peak 0.00671 (rect (1,1))
    "courant_count": 0.80,         # family sup 2/pi as the threshold -> m_A
}

EQUALITY_TOLERANCE = 1e-4


@dataclass
class InequalityReport:
    name: str
    model: str
    mode: str
    lam: float
    lhs: float
    rhs_scale: float
    ratio: float
    verdict: str
    note: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "model": self.model, "mode": self.mode,
               "lambda": _round12(self.lam), "lhs": _round12(self.lhs),
               "rhs_scale": _round12(self.rhs_scale),
               "ratio": _round12(self.ratio), "verdict": self.verdict}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class ScalingFit:
    quantity: str
    family: list[tuple[float, float]]   # (lambda, value)
    fitted_exponent: float
    expected_exponent: float
    tolerance: float
    residual: float
    intercept: float

    @property
    def within_tolerance(self) -> bool:
        return abs(self.fitted_exponent - self.expected_exponent) <= self.tolerance


def _round12(x: float) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


def _verdict(name: str, ratio: float, equality: bool = False) -> str:
    if equality and abs(ratio - 1.0) <= EQUALITY_TOLERANCE:
        return EQUALITY
    cap = FROZEN_CAPS.get(name)
    if cap is not None and ratio > cap:
        return VIOLATED
    return BOUNDED


def _mode_label(expr: FieldExpr) -> str:
    if expr.builtin:
        return expr.builtin
    parts = []
    for coef, mode in expr.terms:
        m, n = mode.indices
        tag = f"{mode.branch}:{m},{n}" if mode.model.kind == TORUS else f"{m},{n}"
        parts.append(tag if len(expr.terms) == 1 else f"{coef:.4g}*{tag}")
    return "+".join(parts)


# ---------------------------------------------------------------------------
# membership gates


def require_normalized(gf: GridField, tol: float = 1e-6) -> float:
    """Gate for the unit-norm test class; returns lambda = ||Delta f||."""
    nrm = l2_norm(gf)
    if abs(nrm - 1.0) > tol:
        raise ConfigError(f"field must be normalized: ||f|| = {nrm:.8g}")
    if gf.model.closed and abs(mean_value(gf)) > tol:
        raise ConfigError("field must have zero mean on a closed surface")
    return laplacian_l2(gf)


def _require_eigenmode(gf: GridField) -> float:
    lam = gf.expr.pure_eigenvalue
    if lam is None:
        raise ConfigError("this check applies to eigenfunctions only")
    return lam


# ---------------------------------------------------------------------------
# individual checks


def check_extrema_sums(gf: GridField,
                       nds: Optional[nodal.NodalDomainSet] = None) -> list[InequalityReport]:
    """sum m_A and sum m_A^2 against lambda (first-moment bounds)."""
    lam = require_normalized(gf)
    if nds is None:
        nds = nodal.extract_domains(gf)
    reports = []
    for q, name in ((1, "extrema_sum_q1"), (2, "extrema_sum_q2")):
        lhs = nodal.extrema_moments(nds, q)
        ratio = lhs / lam
        reports.append(InequalityReport(
            name=name, model=gf.model.kind, mode=_mode_label(gf.expr),
            lam=lam, lhs=lhs, rhs_scale=lam, ratio=ratio,
            verdict=_verdict(name, ratio)))
    return reports


def check_indicatrix_bound(gf: GridField, u="one",
                           spec: Optional[SweepSpec] = None) -> InequalityReport:
    """B(u, f) against ||u o f|| (||f|| + ||Delta f||)."""
    require_normalized(gf)
    B = banach_indicatrix(gf, u, spec)
    rhs = compose_norm(gf, u) * (l2_norm(gf) + laplacian_l2(gf))
    ratio = B / rhs
    name = "indicatrix_bound"
    return InequalityReport(name=name, model=gf.model.kind,
                            mode=_mode_label(gf.expr), lam=laplacian_l2(gf),
                            lhs=B, rhs_scale=rhs, ratio=ratio,
                            verdict=_verdict(name, ratio),
                            note=f"u={u if isinstance(u, str) else 'custom'}")


def check_sixth_moment(gf: GridField,
                       nds: Optional[nodal.NodalDomainSet] = None) -> InequalityReport:
    """sum m_A^6 against lambda^{3/2} for eigenfunctions on closed surfaces."""
    if not gf.model.closed:
        raise ConfigError("the sixth-moment bound is stated on closed surfaces")
    _require_eigenmode(gf)
    lam = require_normalized(gf)
    if nds is None:
        nds = nodal.extract_domains(gf)
    lhs = nodal.extrema_moments(nds, 6)
    rhs = lam ** 1.5
    ratio = lhs / rhs
    name = "sixth_moment"
    return InequalityReport(name=name, model=gf.model.kind,
                            mode=_mode_label(gf.expr), lam=lam, lhs=lhs,
                            rhs_scale=rhs, ratio=ratio,
                            verdict=_verdict(name, ratio))


def check_high_extrema_count(gf: GridField, a: float,
                             nds: Optional[nodal.NodalDomainSet] = None) -> InequalityReport:
    """Number of domains with m_A >= a lambda^{1/4} against a^-6."""
    _require_eigenmode(gf)
    lam = require_normalized(gf)
    if nds is None:
        nds = nodal.extract_domains(gf)
    threshold = a * lam ** 0.25
    lhs = float(nodal.count_above(nds, threshold))
    rhs = a ** -6
    ratio = lhs / rhs
    name = "high_extrema_count"
    return InequalityReport(name=name, model=gf.model.kind,
                            mode=_mode_label(gf.expr), lam=lam, lhs=lhs,
                            rhs_scale=rhs, ratio=ratio,
                            verdict=_verdict(name, ratio),
                            note=f"a={a:g}")


def check_courant_count(gf: GridField, a: float,
                        nds: Optional[nodal.NodalDomainSet] = None) -> InequalityReport:
    """Number of domains with m_A >= a against min(1/a, 1/a^2) * lambda."""
    lam = require_normalized(gf)
    if nds is None:
        nds = nodal.extract_domains(gf)
    lhs = float(nodal.count_above(nds, a))
    rhs = min(1.0 / a, 1.0 / a ** 2) * lam
    ratio = lhs / rhs
    name = "courant_count"
    return InequalityReport(name=name, model=gf.model.kind,
                            mode=_mode_label(gf.expr), lam=lam, lhs=lhs,
                            rhs_scale=rhs, ratio=ratio,
                            verdict=_verdict(name, ratio),
                            note=f"a={a:g}")


def check_sup_norm(gf: GridField) -> InequalityReport:
    """max |f| against lambda^{1/4} for eigenfunctions."""
    _require_eigenmode(gf)
    lam = require_normalized(gf)
    lhs = gf.max_abs()
    rhs = lam ** 0.25
    ratio = lhs / rhs
    name = "sup_norm"
    return InequalityReport(name=name, model=gf.model.kind,
                            mode=_mode_label(gf.expr), lam=lam, lhs=lhs,
                            rhs_scale=rhs, ratio=ratio,
                            verdict=_verdict(name, ratio))


def check_bochner_identity(gf: GridField) -> float:
    """Relative residual of the integrated Bochner-Lichnerowicz identity.

    integral tr(H_f^2) dsigma = ||Delta f||^2
    - (1/2) integral K |grad f|^2 dsigma on closed surfaces.
    """
    if not gf.model.closed:
        raise ConfigError("the Bochner identity check integrates over a "
                          "closed surface")
    tr_h2 = gf.h11 ** 2 + 2.0 * gf.h12 ** 2 + gf.h22 ** 2
    lhs = gf.quad_sum(tr_h2, [c.h11 ** 2 + 2 * c.h12 ** 2 + c.h22 ** 2
                              for c in gf.caps()])
    # the identity involves the scalar curvature, which on a surface is
    # twice the Gauss curvature stored on the model
    K_scalar = 2.0 * gf.model.curvature_K
    rhs = laplacian_l2(gf) ** 2 - 0.5 * K_scalar * gradient_l2(gf) ** 2
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return abs(lhs - rhs) / abs(rhs)


def check_eighth_moment(gf: GridField,
                        nds: Optional[nodal.NodalDomainSet] = None) -> InequalityReport:
    """sum m_A^8 against lambda^2 for rectangle Dirichlet eigenmodes."""
    if gf.model.kind != RECTANGLE:
        raise ConfigError("the eighth-moment bound applies to Dirichlet "
                          "modes on the rectangle")
    _require_eigenmode(gf)
    lam = require_normalized(gf)
    if nds is None:
        nds = nodal.extract_domains(gf)
    lhs = nodal.extrema_moments(nds, 8)
    rhs = lam ** 2
    ratio = lhs / rhs
    name = "eighth_moment_dirichlet"
    return InequalityReport(name=name, model=gf.model.kind,
                            mode=_mode_label(gf.expr), lam=lam, lhs=lhs,
                            rhs_scale=rhs, ratio=ratio,
                            verdict=_verdict(name, ratio))


# ---------------------------------------------------------------------------
# families and scaling studies


def torus_diag_family(ns: Sequence[int]) -> list[FieldExpr]:
    return [torus_mode(n, n) for n in ns]


def zonal_family(ls: Sequence[int]) -> list[FieldExpr]:
    return [zonal_mode(l) for l in ls]


def rect_dirichlet_family(max_index: int, a: float = math.pi,
                          b: float = math.pi) -> list[FieldExpr]:
    return [rect_mode(m, n, a, b)
            for m in range(1, max_index + 1) for n in range(1, max_index + 1)]


def random_torus_combo(rng: np.random.Generator, n_modes: int = 3,
                       max_index: int = 4) -> FieldExpr:
    """A seeded random normalized combination of distinct torus modes."""
    pool = [(m, n, br)
            for m in range(max_index + 1) for n in range(max_index + 1)
            for br in ("ss", "sc", "cs", "cc")
            if not ((br[0] == "s" and m == 0) or (br[1] == "s" and n == 0)
                    or (m == 0 and n == 0))]
    picks = rng.choice(len(pool), size=n_modes, replace=False)
    coefs = rng.normal(size=n_modes)
    # avoid vanishing-coefficient degeneracies
    coefs = np.where(np.abs(coefs) < 0.1, 0.1 * np.sign(coefs) + (coefs == 0) * 0.1,
                     coefs)
    model_terms = []
    from .surfaces import ModeSpec, flat_torus
    model = flat_torus()
    for c, k in zip(coefs, picks):
        m, n, br = pool[k]
        model_terms.append((float(c), ModeSpec(model, (m, n), br)))
    return FieldExpr(model, tuple(model_terms), normalize=True)


QUANTITIES: dict[str, tuple[Callable, float]] = {}


def _quantity(name: str, expected: float):
    def wrap(fn):
        QUANTITIES[name] = (fn, expected)
        return fn
    return wrap


@_quantity("sum_mA", 1.0)
def _q_sum_ma(gf: GridField) -> float:
    return nodal.extrema_moments(nodal.extract_domains(gf), 1)


@_quantity("sum_mA2", 1.0)
def _q_sum_ma2(gf: GridField) -> float:
    return nodal.extrema_moments(nodal.extract_domains(gf), 2)


@_quantity("sum_mA6", 1.5)
def _q_sum_ma6(gf: GridField) -> float:
    return nodal.extrema_moments(nodal.extract_domains(gf), 6)


@_quantity("sum_mA8", 2.0)
def _q_sum_ma8(gf: GridField) -> float:
    return nodal.extrema_moments(nodal.extract_domains(gf), 8)


@_quantity("sup_norm", 0.25)
def _q_sup(gf: GridField) -> float:
    return gf.max_abs()


@_quantity("l6_norm", 1.0 / 12.0)
def _q_l6(gf: GridField) -> float:
    return lp_norm(gf, 6)


@_quantity("inradius", -0.5)
def _q_inradius(gf: GridField) -> float:
    nds = nodal.extract_domains(gf)
    return max(nodal.inradius(d, gf) for d in nds.domains)


@_quantity("domain_count", 1.0)
def _q_count(gf: GridField) -> float:
    return float(len(nodal.extract_domains(gf)))


def scaling_study(family: Sequence[FieldExpr], quantity: str,
                  expected_exponent: Optional[float] = None,
                  tolerance: float = 0.1,
                  resolution=None) -> ScalingFit:
    """Least-squares log-log growth exponent of a quantity over a family.

    The two smallest-lambda members are excluded from the fit to suppress
    preasymptotic bias; at least 5 members are required.  resolution may
    be None (per-field default), an int, or a callable expr -> int so a
    family can keep a fixed number of samples per nodal cell.
    """
    if len(family) < 5:
        raise ConfigError("scaling studies need at least 5 family members")
    if quantity not in QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}; "
                          f"known: {sorted(QUANTITIES)}")
    fn, default_expected = QUANTITIES[quantity]
    expected = default_expected if expected_exponent is None else expected_exponent
    pairs = []
    for expr in family:
        res = resolution(expr) if callable(resolution) else resolution
        gf = sample(expr, res)
        lam = require_normalized(gf)
        pairs.append((lam, fn(gf)))
    pairs.sort(key=lambda t: t[0])
    lams = np.array([p[0] for p in pairs])
    vals = np.array([p[1] for p in pairs])
    if np.any(vals <= 0):
        raise ConfigError("scaling quantities must be positive for a log fit")
    keep = slice(2, None)
    slope, intercept = np.polyfit(np.log(lams[keep]), np.log(vals[keep]), 1)
    pred = slope * np.log(lams[keep]) + intercept
    residual = float(np.sqrt(np.mean((np.log(vals[keep]) - pred) ** 2)))
    return ScalingFit(quantity=quantity,
                      family=[(float(l), float(v)) for l, v in pairs],
                      fitted_exponent=float(slope),
                      expected_exponent=float(expected), tolerance=tolerance,
                      residual=residual, intercept=float(intercept))


# ---------------------------------------------------------------------------
# JSON report emission


def reports_to_json(reports: Sequence[InequalityReport], path=None,
                    notes: Optional[list[str]] = None) -> str:
    """Serialize reports to the documented JSON schema (array of objects)."""
    payload = [r.to_dict() for r in reports]
    doc = {"reports": payload}
    if notes:
        doc["notes"] = notes
    text = json.dumps(doc, indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


LAMBDA_CONVENTION_NOTE = (
    "lambda is the quadrature norm of Delta f; the diagonal torus mode "
    "sin(nx) sin(ny) therefore reports lambda = 2 n^2")
