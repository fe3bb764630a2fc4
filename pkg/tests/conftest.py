"""Shared sampled fields, cached per session to keep the suite fast."""

import math

import numpy as np
import pytest

from nodalgeo import grid, nodal, surfaces


def torus_resolution(n: int) -> int:
    """32 samples per period of the diagonal mode: exact counts and a
    grid peak offset that is constant across the family."""
    return max(64, 32 * n)


@pytest.fixture(scope="session")
def torus_grid():
    cache = {}

    def get(n: int, branch: str = "ss"):
        key = (n, branch)
        if key not in cache:
            expr = surfaces.torus_mode(n, n, branch)
            cache[key] = grid.sample(expr, torus_resolution(n))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def zonal_grid():
    cache = {}

    def get(l: int):
        if l not in cache:
            cache[l] = grid.sample(surfaces.zonal_mode(l))
        return cache[l]

    return get


@pytest.fixture(scope="session")
def rect_grid():
    cache = {}

    def get(m: int, n: int):
        if (m, n) not in cache:
            expr = surfaces.rect_mode(m, n)
            cache[(m, n)] = grid.sample(expr, max(64, 16 * max(m, n)))
        return cache[(m, n)]

    return get


@pytest.fixture(scope="session")
def disc_grid():
    return grid.sample(surfaces.disc_paraboloid(), 128)


@pytest.fixture(scope="session")
def domains_of():
    cache = {}

    def get(gf):
        key = id(gf)
        if key not in cache:
            cache[key] = nodal.extract_domains(gf)
        return cache[key]

    return get


def fd_gradient(expr, u, v, h):
    """Central-difference chart partials of the field value."""
    e = surfaces.eval
    fu = (e(expr, (u + h, v)) - e(expr, (u - h, v))) / (2 * h)
    fv = (e(expr, (u, v + h)) - e(expr, (u, v - h))) / (2 * h)
    return fu, fv


def fd_second_partials(expr, u, v, h):
    e = surfaces.eval
    f0 = e(expr, (u, v))
    fuu = (e(expr, (u + h, v)) - 2 * f0 + e(expr, (u - h, v))) / h ** 2
    fvv = (e(expr, (u, v + h)) - 2 * f0 + e(expr, (u, v - h))) / h ** 2
    fuv = (e(expr, (u + h, v + h)) - e(expr, (u + h, v - h))
           - e(expr, (u - h, v + h)) + e(expr, (u - h, v - h))) / (4 * h ** 2)
    return fuu, fuv, fvv


def fd_covariant(expr, u, v, h):
    """Covariant gradient norm and frame Hessian assembled from FD partials.

    Uses the same Christoffel algebra as the analytic path but feeds it
    finite-difference chart partials, so the full covariant object is
    validated end to end.
    """
    fu, fv = fd_gradient(expr, u, v, h)
    fuu, fuv, fvv = fd_second_partials(expr, u, v, h)
    parts = {"f": None, "fu": fu, "fv": fv, "fuu": fuu, "fuv": fuv, "fvv": fvv}
    return surfaces.covariant_from_partials(expr.model, np.asarray(u, float),
                                            np.asarray(v, float), parts,
                                            expr.builtin)


def interior_points(model, rng, count):
    """Random chart points clear of poles, centre and boundaries."""
    kind = model.kind
    if kind == surfaces.SPHERE:
        u = rng.uniform(0.2, math.pi - 0.2, count)
    elif kind == surfaces.DISC:
        u = rng.uniform(0.05, 0.95, count)
    elif kind == surfaces.RECTANGLE:
        u = rng.uniform(0.05 * model.a, 0.95 * model.a, count)
    else:
        u = rng.uniform(0, 2 * math.pi, count)
    if kind == surfaces.RECTANGLE:
        v = rng.uniform(0.05 * model.b, 0.95 * model.b, count)
    else:
        v = rng.uniform(0, 2 * math.pi, count)
    return u, v
