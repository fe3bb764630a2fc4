"""Model surfaces and their closed-form fields.

Four geometries are supported: the flat square torus, the unit round
sphere, a Euclidean rectangle with Dirichlet modes, and the unit disc
(which carries analytic test fields instead of eigenmodes).  Every
field is a finite linear combination of separable closed-form modes,
so values, chart partials, covariant Hessians and Laplacians are all
evaluated analytically and vectorize over numpy arrays of chart points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

TWO_PI = 2.0 * math.pi

TORUS = "flat_torus"
SPHERE = "round_sphere"
RECTANGLE = "euclidean_rectangle"
DISC = "unit_disc"

TORUS_BRANCHES = ("ss", "sc", "cs", "cc")

PARABOLOID = "disc_paraboloid"


class ChartDomainError(ValueError):
    """A chart point lies outside the parameter domain of its surface."""


class PoleSingularityError(ValueError):
    """Derivative data requested at a coordinate singularity (sphere pole, disc centre)."""


class ConfigError(ValueError):
    """Invalid mode indices, field description or run parameters."""


# ---------------------------------------------------------------------------
# surface models


@dataclass(frozen=True)
class SurfaceModel:
    """One of the four model geometries.

    ``a``/``b`` are the rectangle side lengths and are ignored by the
    other kinds.  Charts use coordinates (u, v): (x, y) on flat models,
    (theta, phi) on the sphere, (rho, phi) on the disc.
    """

    kind: str
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in (TORUS, SPHERE, RECTANGLE, DISC):
            raise ConfigError(f"unknown surface kind {self.kind!r}")
        if self.kind == RECTANGLE and (self.a <= 0 or self.b <= 0):
            raise ConfigError("rectangle sides must be positive")

    @property
    def u_range(self) -> tuple[float, float]:
        return {
            TORUS: (0.0, TWO_PI),
            SPHERE: (0.0, math.pi),
            RECTANGLE: (0.0, self.a),
            DISC: (0.0, 1.0),
        }[self.kind]

    @property
    def v_range(self) -> tuple[float, float]:
        return {
            TORUS: (0.0, TWO_PI),
            SPHERE: (0.0, TWO_PI),
            RECTANGLE: (0.0, self.b),
            DISC: (0.0, TWO_PI),
        }[self.kind]

    @property
    def periodic_u(self) -> bool:
        return self.kind == TORUS

    @property
    def periodic_v(self) -> bool:
        return self.kind != RECTANGLE

    @property
    def closed(self) -> bool:
        """True for boundaryless surfaces (torus, sphere)."""
        return self.kind in (TORUS, SPHERE)

    @property
    def curvature_K(self) -> float:
        return 1.0 if self.kind == SPHERE else 0.0

    @property
    def total_area(self) -> float:
        return {
            TORUS: 4.0 * math.pi ** 2,
            SPHERE: 4.0 * math.pi,
            RECTANGLE: self.a * self.b,
            DISC: math.pi,
        }[self.kind]

    def metric_diag(self, u, v):
        """Diagonal metric coefficients (g_uu, g_vv) at chart points."""
        u = np.asarray(u, dtype=float)
        one = np.ones_like(u)
        if self.kind in (TORUS, RECTANGLE):
            return one, np.ones_like(np.asarray(v, dtype=float)) * one
        if self.kind == SPHERE:
            return one, np.sin(u) ** 2
        return one, u ** 2  # disc

    def wrap_point(self, u, v):
        """Wrap periodic coordinates into the chart; validate the rest."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.periodic_u:
            u = np.mod(u, TWO_PI)
        if self.periodic_v:
            v = np.mod(v, TWO_PI)
        ulo, uhi = self.u_range
        tol = 1e-12 * max(1.0, uhi)
        if not self.periodic_u and (np.any(u < ulo - tol) or np.any(u > uhi + tol)):
            raise ChartDomainError(
                f"coordinate u outside [{ulo}, {uhi}] for {self.kind}")
        if not self.periodic_v:
            vlo, vhi = self.v_range
            if np.any(v < vlo - tol) or np.any(v > vhi + tol):
                raise ChartDomainError(
                    f"coordinate v outside [{vlo}, {vhi}] for {self.kind}")
        return u, v


def flat_torus() -> SurfaceModel:
    return SurfaceModel(TORUS)


def round_sphere() -> SurfaceModel:
    return SurfaceModel(SPHERE)


def euclidean_rectangle(a: float, b: float) -> SurfaceModel:
    return SurfaceModel(RECTANGLE, a=a, b=b)


def unit_disc() -> SurfaceModel:
    return SurfaceModel(DISC)


# ---------------------------------------------------------------------------
# modes


@dataclass(frozen=True)
class ModeSpec:
    """A single closed-form eigenmode on a surface.

    Torus: indices (m, n) with a sin/cos branch per axis, lambda = m^2+n^2.
    Sphere: indices (l, m) real spherical harmonic, lambda = l(l+1).
    Rectangle: Dirichlet indices (m, n) >= 1, lambda = pi^2(m^2/a^2+n^2/b^2).
    """

    model: SurfaceModel
    indices: tuple[int, int]
    branch: str = "ss"

    def __post_init__(self):
        kind = self.model.kind
        m, n = self.indices
        if kind == TORUS:
            if self.branch not in TORUS_BRANCHES:
                raise ConfigError(f"torus branch must be one of {TORUS_BRANCHES}")
            if m < 0 or n < 0:
                raise ConfigError("torus indices must be nonnegative")
            if (self.branch[0] == "s" and m == 0) or (self.branch[1] == "s" and n == 0):
                raise ConfigError("sin factor with index 0 is identically zero")
            if m == 0 and n == 0:
                raise ConfigError("constant (0,0) mode is excluded")
        elif kind == SPHERE:
            l, mm = m, n
            if l < 1:
                raise ConfigError("sphere degree l must be >= 1 (constants excluded)")
            if abs(mm) > l:
                raise ConfigError("sphere order must satisfy |m| <= l")
        elif kind == RECTANGLE:
            if m < 1 or n < 1:
                raise ConfigError("Dirichlet indices must be >= 1")
        else:
            raise ConfigError("the unit disc carries builtin fields only, no eigenmodes")

    @property
    def eigenvalue(self) -> float:
        m, n = self.indices
        kind = self.model.kind
        if kind == TORUS:
            return float(m * m + n * n)
        if kind == SPHERE:
            return float(m * (m + 1))
        return math.pi ** 2 * (m ** 2 / self.model.a ** 2 + n ** 2 / self.model.b ** 2)

    @property
    def max_index(self) -> int:
        return max(abs(self.indices[0]), abs(self.indices[1]))


@dataclass(frozen=True)
class FieldExpr:
    """A function on a surface: mode combination or a named builtin field."""

    model: SurfaceModel
    terms: tuple[tuple[float, ModeSpec], ...] = ()
    builtin: Optional[str] = None
    normalize: bool = False

    def __post_init__(self):
        if self.builtin is not None:
            if self.builtin != PARABOLOID:
                raise ConfigError(f"unknown builtin field {self.builtin!r}")
            if self.model.kind != DISC:
                raise ConfigError("disc_paraboloid lives on the unit disc")
            if self.terms:
                raise ConfigError("a field is either a mode combination or a builtin")
        else:
            if not self.terms:
                raise ConfigError("empty field expression")
            for _, mode in self.terms:
                if mode.model != self.model:
                    raise ConfigError("all modes must share the field's surface")

    @property
    def max_index(self) -> int:
        if self.builtin is not None:
            return 1
        return max(mode.max_index for _, mode in self.terms)

    @property
    def pure_eigenvalue(self) -> Optional[float]:
        """The common eigenvalue if the field is an eigenfunction, else None."""
        if self.builtin is not None:
            return None
        lams = {mode.eigenvalue for _, mode in self.terms}
        return lams.pop() if len(lams) == 1 else None

    def rescaled(self, factor: float) -> "FieldExpr":
        return replace(self, terms=tuple((c * factor, m) for c, m in self.terms))


def torus_mode(m: int, n: int, branch: str = "ss", coefficient: float = 1.0,
               normalize: bool = True) -> FieldExpr:
    model = flat_torus()
    return FieldExpr(model, ((coefficient, ModeSpec(model, (m, n), branch)),),
                     normalize=normalize)


def sphere_mode(l: int, m: int, coefficient: float = 1.0,
                normalize: bool = True) -> FieldExpr:
    model = round_sphere()
    return FieldExpr(model, ((coefficient, ModeSpec(model, (l, m))),),
                     normalize=normalize)


def zonal_mode(l: int, normalize: bool = True) -> FieldExpr:
    return sphere_mode(l, 0, normalize=normalize)


def rect_mode(m: int, n: int, a: float = math.pi, b: float = math.pi,
              normalize: bool = True) -> FieldExpr:
    model = euclidean_rectangle(a, b)
    return FieldExpr(model, ((1.0, ModeSpec(model, (m, n))),), normalize=normalize)


def disc_paraboloid() -> FieldExpr:
    return FieldExpr(unit_disc(), builtin=PARABOLOID)


def combination(modes: list[tuple[float, ModeSpec]], normalize: bool = True) -> FieldExpr:
    model = modes[0][1].model
    return FieldExpr(model, tuple(modes), normalize=normalize)


# ---------------------------------------------------------------------------
# normalized associated Legendre recurrence
#
# pbar_l^m are the fully normalized functions with
# int_{S^2} (pbar_l^m(cos theta) * sqrt(2) cos(m phi))^2 dsigma = 1;
# the forward recurrence in l is stable up to degrees far beyond the
# l ~ 40 used here.


def _amm(m: int) -> float:
    a = 1.0
    for k in range(1, m + 1):
        a *= (2 * k + 1) / (2 * k)
    return math.sqrt(a / (4.0 * math.pi))


def _alm(l: int, m: int) -> float:
    return math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))


def _blm(l: int, m: int) -> float:
    return -math.sqrt((2.0 * l + 1.0) * ((l - 1.0) ** 2 - m * m)
                      / ((2.0 * l - 3.0) * (l * l - m * m)))


def _legendre_pair(l: int, m: int, x: np.ndarray):
    """Return (pbar_l^m(x), pbar_{l-1}^m(x)); the latter is 0 for l == m."""
    s2 = np.clip(1.0 - x * x, 0.0, None)
    p_prev = np.zeros_like(x)
    p = _amm(m) * s2 ** (0.5 * m)
    for k in range(m + 1, l + 1):
        p_prev, p = p, _alm(k, m) * x * p + (_blm(k, m) * p_prev if k > m + 1 else 0.0)
    return p, p_prev


def _theta_profile(l: int, m: int, theta: np.ndarray, derivatives: bool):
    """Zonal profile T(theta) = pbar_l^{|m|}(cos theta) and its theta-derivatives.

    T'' comes from the associated Legendre ODE, which avoids a second
    recurrence; both derivative formulas require sin(theta) != 0.
    """
    m = abs(m)
    x = np.cos(theta)
    t, t_lower = _legendre_pair(l, m, x)
    if not derivatives:
        return t, None, None
    s = np.sin(theta)
    if np.any(s == 0.0):
        raise PoleSingularityError("derivatives of spherical harmonics at a pole")
    c_lm = math.sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0)) if l > m else 0.0
    dt = (l * x * t - c_lm * t_lower) / s
    ddt = -(x / s) * dt - (l * (l + 1) - m * m / s ** 2) * t
    return t, dt, ddt


def _trig_profile(index: int, char: str, coord: np.ndarray, derivatives: bool):
    arg = index * coord
    if char == "s":
        val = np.sin(arg)
        if not derivatives:
            return val, None, None
        return val, index * np.cos(arg), -(index ** 2) * val
    val = np.cos(arg)
    if not derivatives:
        return val, None, None
    return val, -index * np.sin(arg), -(index ** 2) * val


def _scaled_sin_profile(k: float, coord: np.ndarray, derivatives: bool):
    val = np.sin(k * coord)
    if not derivatives:
        return val, None, None
    return val, k * np.cos(k * coord), -(k * k) * val


def _phi_profile(m: int, phi: np.ndarray, derivatives: bool):
    if m == 0:
        one = np.ones_like(phi)
        zero = np.zeros_like(phi)
        return one, (zero if derivatives else None), (zero if derivatives else None)
    root2 = math.sqrt(2.0)
    arg = abs(m) * phi
    if m > 0:
        val = root2 * np.cos(arg)
        if not derivatives:
            return val, None, None
        return val, -root2 * m * np.sin(arg), -(m ** 2) * val
    val = root2 * np.sin(arg)
    if not derivatives:
        return val, None, None
    mm = abs(m)
    return val, root2 * mm * np.cos(arg), -(mm ** 2) * val


def _mode_profiles(mode: ModeSpec, u: np.ndarray, v: np.ndarray, derivatives: bool):
    """Separable axis profiles (U, U', U'', V, V', V'') for one mode."""
    kind = mode.model.kind
    m, n = mode.indices
    if kind == TORUS:
        pu = _trig_profile(m, mode.branch[0], u, derivatives)
        pv = _trig_profile(n, mode.branch[1], v, derivatives)
    elif kind == RECTANGLE:
        pu = _scaled_sin_profile(m * math.pi / mode.model.a, u, derivatives)
        pv = _scaled_sin_profile(n * math.pi / mode.model.b, v, derivatives)
    else:  # sphere
        pu = _theta_profile(m, n, u, derivatives)
        pv = _phi_profile(n, v, derivatives)
    return pu, pv


# ---------------------------------------------------------------------------
# chart partials and covariant assembly


def chart_partials(expr: FieldExpr, u, v, derivatives: bool = True):
    """Evaluate f and (optionally) its chart partials at broadcast points.

    Returns a dict with keys f, fu, fv, fuu, fuv, fvv (partials None when
    derivatives=False).  Points are wrapped/validated against the chart.
    """
    u, v = expr.model.wrap_point(u, v)
    u, v = np.broadcast_arrays(u, v)
    u = u.astype(float)
    v = v.astype(float)
    if expr.builtin == PARABOLOID:
        out = {"f": 1.0 - u ** 2}
        if derivatives:
            out.update(fu=-2.0 * u, fv=np.zeros_like(u),
                       fuu=np.full_like(u, -2.0), fuv=np.zeros_like(u),
                       fvv=np.zeros_like(u))
        else:
            out.update(fu=None, fv=None, fuu=None, fuv=None, fvv=None)
        return out

    acc = {k: np.zeros_like(u) for k in ("f", "fu", "fv", "fuu", "fuv", "fvv")}
    for coef, mode in expr.terms:
        (U, dU, ddU), (V, dV, ddV) = _mode_profiles(mode, u, v, derivatives)
        acc["f"] += coef * U * V
        if derivatives:
            acc["fu"] += coef * dU * V
            acc["fv"] += coef * U * dV
            acc["fuu"] += coef * ddU * V
            acc["fuv"] += coef * dU * dV
            acc["fvv"] += coef * U * ddV
    if not derivatives:
        acc = {"f": acc["f"], "fu": None, "fv": None,
               "fuu": None, "fuv": None, "fvv": None}
    return acc


def tensor_partials(expr: FieldExpr, us: np.ndarray, vs: np.ndarray):
    """Chart partials on the tensor grid us x vs via separable outer products."""
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    shape = (us.size, vs.size)
    if expr.builtin == PARABOLOID:
        u = us[:, None] * np.ones((1, vs.size))
        return {"f": 1.0 - u ** 2, "fu": -2.0 * u, "fv": np.zeros(shape),
                "fuu": np.full(shape, -2.0), "fuv": np.zeros(shape),
                "fvv": np.zeros(shape)}
    acc = {k: np.zeros(shape) for k in ("f", "fu", "fv", "fuu", "fuv", "fvv")}
    for coef, mode in expr.terms:
        (U, dU, ddU), (V, dV, ddV) = _mode_profiles(mode, us, vs, True)
        acc["f"] += coef * np.outer(U, V)
        acc["fu"] += coef * np.outer(dU, V)
        acc["fv"] += coef * np.outer(U, dV)
        acc["fuu"] += coef * np.outer(ddU, V)
        acc["fuv"] += coef * np.outer(dU, dV)
        acc["fvv"] += coef * np.outer(U, ddV)
    return acc


def _check_pole_free(expr: FieldExpr, u: np.ndarray):
    kind = expr.model.kind
    if kind == SPHERE and np.any((u <= 0.0) | (u >= math.pi)):
        raise PoleSingularityError("sphere poles are coordinate singularities; "
                                   "use interior points")
    if kind == DISC and expr.builtin is None and np.any(u == 0.0):
        raise PoleSingularityError("disc centre is a polar-coordinate singularity")


def covariant_from_partials(model: SurfaceModel, u, v, parts: dict,
                            builtin: Optional[str] = None):
    """Assemble |grad f|_g, orthonormal-frame Hessian and Laplacian.

    The frame is (e_u, e_v / sqrt(g_vv)); on flat models this reduces to
    plain partials, on the sphere the mixed and vv components pick up the
    round-metric Christoffel corrections.
    """
    fu, fv = parts["fu"], parts["fv"]
    fuu, fuv, fvv = parts["fuu"], parts["fuv"], parts["fvv"]
    kind = model.kind
    if kind in (TORUS, RECTANGLE):
        gnorm = np.hypot(fu, fv)
        h11, h12, h22 = fuu, fuv, fvv
    elif kind == SPHERE:
        s = np.sin(u)
        c = np.cos(u)
        gnorm = np.hypot(fu, fv / s)
        h11 = fuu
        h12 = (fuv - (c / s) * fv) / s
        h22 = fvv / s ** 2 + (c / s) * fu
    else:  # disc
        if builtin == PARABOLOID:
            # radial quadratic: frame Hessian is -2 I even at the centre
            gnorm = np.abs(fu)
            h11 = fuu
            h12 = np.zeros_like(fuu)
            h22 = np.full_like(fuu, -2.0)
        else:
            gnorm = np.hypot(fu, fv / u)
            h11 = fuu
            h12 = (fuv - fv / u) / u
            h22 = fvv / u ** 2 + fu / u
    mean = 0.5 * (h11 + h22)
    radius = np.hypot(0.5 * (h11 - h22), h12)
    hnorm = np.abs(mean) + radius
    lap = h11 + h22
    return {"grad_u": fu, "grad_v": fv, "grad_norm": gnorm,
            "h11": h11, "h12": h12, "h22": h22,
            "hess_norm": hnorm, "lap": lap}


# ---------------------------------------------------------------------------
# pointwise operations (the public chart-point API)


def eval(expr: FieldExpr, p) -> float:  # noqa: A001 - spec operation name
    """Field value at a chart point (u, v)."""
    u, v = p
    parts = chart_partials(expr, u, v, derivatives=False)
    out = parts["f"]
    return float(out) if np.ndim(out) == 0 else out


def eval_gradient(expr: FieldExpr, p):
    """Chart-component gradient and Riemannian norm at p.

    Returns (components, norm) with components = (df/du, df/dv).
    """
    u, v = expr.model.wrap_point(*p)
    _check_pole_free(expr, np.asarray(u, dtype=float))
    parts = chart_partials(expr, u, v)
    cov = covariant_from_partials(expr.model, np.asarray(u, float),
                                  np.asarray(v, float), parts, expr.builtin)
    comps = np.stack([cov["grad_u"], cov["grad_v"]], axis=-1)
    norm = cov["grad_norm"]
    return comps, (float(norm) if np.ndim(norm) == 0 else norm)


def eval_hessian(expr: FieldExpr, p):
    """Covariant Hessian in the orthonormal frame plus its operator norm.

    Returns (H, opnorm) with H the symmetric 2x2 matrix; raises
    PoleSingularityError at sphere poles.
    """
    u, v = expr.model.wrap_point(*p)
    _check_pole_free(expr, np.asarray(u, dtype=float))
    parts = chart_partials(expr, u, v)
    cov = covariant_from_partials(expr.model, np.asarray(u, float),
                                  np.asarray(v, float), parts, expr.builtin)
    h = np.stack([np.stack([cov["h11"], cov["h12"]], axis=-1),
                  np.stack([cov["h12"], cov["h22"]], axis=-1)], axis=-2)
    opn = cov["hess_norm"]
    return h, (float(opn) if np.ndim(opn) == 0 else opn)


def laplacian(expr: FieldExpr, p) -> float:
    """Laplace-Beltrami value at p (analytic; -lambda*f for pure modes)."""
    if expr.builtin == PARABOLOID:
        expr.model.wrap_point(*p)
        out = np.full(np.broadcast(np.asarray(p[0]), np.asarray(p[1])).shape, -4.0)
        return float(out) if out.ndim == 0 else out
    u, v = expr.model.wrap_point(*p)
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    out = np.zeros_like(u)
    for coef, mode in expr.terms:
        (U, _, _), (V, _, _) = _mode_profiles(mode, u, v, False)
        out -= coef * mode.eigenvalue * U * V
    return float(out) if out.ndim == 0 else out
