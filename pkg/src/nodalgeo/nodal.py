"""Nodal domains of a sampled field: labeling, extrema, areas, inradii.

Cells are signed by their centre value; connected components of each
sign are found with scipy.ndimage.label and merged across periodic
seams and polar caps by a small union-find, so torus domains wrap and
sphere caps attach to all adjacent top-row cells.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .grid import GridField
from .surfaces import DISC, RECTANGLE, SPHERE, ConfigError

DUST_FACTOR = 10.0  # domains with m_A <= DUST_FACTOR * tol are numerical noise


class UnionFind:
    """Array-based union-find; ties resolve to the smallest member label."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx


@dataclass
class NodalDomain:
    label: int
    sign: int
    cell_count: int
    m_A: float
    area: float
    cells: np.ndarray           # flat indices into the (nu, nv) grid
    has_cap_lo: bool = False
    has_cap_hi: bool = False
    inradius: Optional[float] = None


@dataclass
class NodalDomainSet:
    domains: list[NodalDomain]
    zero_tolerance: float
    resolution: tuple[int, int]
    labels: np.ndarray          # (nu, nv) int array, 0 = unlabeled band
    cap_labels: tuple[int, int]  # 0 when absent / unlabeled

    def __len__(self) -> int:
        return len(self.domains)

    def count(self) -> int:
        return len(self.domains)


def _merge_seam(uf: UnionFind, la, lb, sa, sb):
    same = (la > 0) & (lb > 0) & (sa == sb)
    if not np.any(same):
        return
    pairs = np.unique(np.stack([la[same], lb[same]]), axis=1)
    for x, y in pairs.T:
        uf.union(int(x), int(y))


def extract_domains(gf: GridField, zero_tolerance: Optional[float] = None) -> NodalDomainSet:
    """Label connected components of {f != 0} on the sampled grid.

    zero_tolerance defaults to 1e-9 * max|f|; cells inside the tolerance
    band stay unlabeled, and domains whose extremum is below
    10 * tolerance are dropped as numerical dust.  An all-zero field
    yields an empty set.
    """
    fmax = gf.max_abs()
    if zero_tolerance is None:
        zero_tolerance = 1e-9 * fmax
    if zero_tolerance < 0:
        raise ConfigError("zero_tolerance must be >= 0")
    nu, nv = gf.shape
    if fmax <= zero_tolerance:
        return NodalDomainSet([], zero_tolerance, gf.shape,
                              np.zeros((nu, nv), dtype=int), (0, 0))

    pos = gf.f > zero_tolerance
    neg = gf.f < -zero_tolerance
    sign = np.where(pos, 1, np.where(neg, -1, 0))
    lab_pos, n_pos = ndimage.label(pos)
    lab_neg, n_neg = ndimage.label(neg)
    labels = lab_pos + np.where(lab_neg > 0, lab_neg + n_pos, 0)
    n_labels = n_pos + n_neg

    caps = gf.caps()
    cap_ids = []
    for cap in caps:
        if abs(cap.f) > zero_tolerance:
            n_labels += 1
            cap_ids.append(n_labels)
        else:
            cap_ids.append(0)

    uf = UnionFind(n_labels + 1)
    if gf.periodic_u:
        _merge_seam(uf, labels[0, :], labels[-1, :], sign[0, :], sign[-1, :])
    if gf.periodic_v:
        _merge_seam(uf, labels[:, 0], labels[:, -1], sign[:, 0], sign[:, -1])

    if caps:
        edge_rows = [(labels[0, :], sign[0, :])]
        if gf.model.kind == SPHERE:
            edge_rows.append((labels[-1, :], sign[-1, :]))
        for cap, cid, (row, srow) in zip(caps, cap_ids, edge_rows):
            if cid == 0:
                continue
            cap_sign = 1 if cap.f > 0 else -1
            for lab in np.unique(row[(row > 0) & (srow == cap_sign)]):
                uf.union(cid, int(lab))

    root = np.array([uf.find(i) for i in range(n_labels + 1)])
    flat = root[labels]
    cap_roots = [int(root[cid]) if cid else 0 for cid in cap_ids]

    used = set(np.unique(flat[flat > 0]).tolist()) | {r for r in cap_roots if r > 0}

    domains = []
    final_labels = np.zeros_like(flat)
    final_cap = [0, 0]
    next_label = 0
    absf_flat = np.abs(gf.f).ravel()
    w_flat = gf.weight.ravel()
    f_flat = gf.f.ravel()
    for r in sorted(used):
        cells = np.flatnonzero((flat == r).ravel())
        m_a = float(absf_flat[cells].max()) if cells.size else 0.0
        area = float(w_flat[cells].sum()) if cells.size else 0.0
        count = int(cells.size)
        has_lo = has_hi = False
        for k, (cap, cr) in enumerate(zip(caps, cap_roots)):
            if cr == r:
                m_a = max(m_a, abs(cap.f))
                area += cap.weight
                count += 1
                has_lo |= k == 0
                has_hi |= k == 1
        if m_a <= DUST_FACTOR * zero_tolerance:
            continue
        next_label += 1
        if cells.size:
            dsign = 1 if f_flat[cells[0]] > 0 else -1
        else:
            cap_vals = [cap.f for k, (cap, cr) in enumerate(zip(caps, cap_roots)) if cr == r]
            dsign = 1 if cap_vals[0] > 0 else -1
        domains.append(NodalDomain(label=next_label, sign=dsign,
                                   cell_count=count, m_A=m_a, area=area,
                                   cells=cells, has_cap_lo=has_lo,
                                   has_cap_hi=has_hi))
        final_labels.ravel()[cells] = next_label
        if has_lo:
            final_cap[0] = next_label
        if has_hi:
            final_cap[1] = next_label

    return NodalDomainSet(domains=domains, zero_tolerance=zero_tolerance,
                          resolution=gf.shape, labels=final_labels,
                          cap_labels=(final_cap[0], final_cap[1]))


def extrema_moments(nds: NodalDomainSet, q) -> float:
    """Sum of m_A^q over all nodal domains (q in {1, 2, 6, 8})."""
    if q not in (1, 2, 6, 8):
        raise ConfigError("extrema moments support q in {1, 2, 6, 8}")
    return float(sum(d.m_A ** q for d in nds.domains))


def count_above(nds: NodalDomainSet, a: float) -> int:
    """Number of nodal domains with m_A >= a."""
    if a <= 0:
        raise ConfigError("threshold must be positive")
    return sum(1 for d in nds.domains if d.m_A >= a)


# ---------------------------------------------------------------------------
# inradius via an iterated chamfer relaxation
#
# Distances propagate over the 8-neighbourhood with Riemannian step costs
# (phi steps scale with sin(theta) on the sphere, with rho on the disc).
# Cells outside the domain are distance-0 seeds; non-periodic chart edges
# and differently-signed polar caps act as background one step away.  The
# relaxation runs to a fixed point, which also resolves periodic wrap.


def _crop_axis(mask: np.ndarray, axis: int, periodic: bool):
    """Tight index range along axis, rolling periodic masks off the seam.

    Returns (roll, lo, hi) with hi exclusive, or None when the axis cannot
    be cropped (fully occupied, or periodic without two consecutive free
    slots to serve as background margins at both ends).
    """
    occupied = mask.any(axis=1 - axis)
    n = occupied.size
    if occupied.all():
        return None
    if periodic:
        # roll a consecutive background pair to the two ends so the wrap
        # adjacency of seam-touching domains survives the crop
        free = ~occupied
        pair = np.flatnonzero(free & np.roll(free, -1))
        if pair.size == 0:
            return None
        g = int(pair[0])                 # free at g and g+1 (mod n)
        roll = (-(g + 1)) % n            # g+1 -> index 0, g -> index n-1
        occupied = np.roll(occupied, roll)
    else:
        roll = 0
    idx = np.flatnonzero(occupied)
    lo = max(int(idx[0]) - 1, 0)
    hi = min(int(idx[-1]) + 2, n)
    return roll, lo, hi


def inradius(domain: NodalDomain, gf: GridField) -> float:
    """Largest Riemannian distance from a domain cell to its complement."""
    if domain.cell_count == 0:
        raise ConfigError("empty domain")
    nu, nv = gf.shape
    mask = np.zeros(nu * nv, dtype=bool)
    mask[domain.cells] = True
    mask = mask.reshape(nu, nv)

    us = gf.us.copy()
    hv_full = {SPHERE: np.sin(us), DISC: us}.get(gf.model.kind,
                                                 np.ones_like(us))
    dv = gf.vs[1] - gf.vs[0]
    hv = hv_full * dv

    # edge seed distances at the four chart ends (np.inf = interior/periodic)
    ulo, uhi = gf.model.u_range
    seed_lo = seed_hi = np.inf
    if not gf.periodic_u:
        if gf.model.kind == RECTANGLE:
            seed_lo, seed_hi = us[0] - ulo, uhi - us[-1]
        elif gf.model.kind == SPHERE:
            seed_lo = np.inf if domain.has_cap_lo else us[0]
            seed_hi = np.inf if domain.has_cap_hi else (uhi - us[-1])
        else:  # disc: centre cap at the low end, real boundary at rho = 1
            seed_lo = np.inf if domain.has_cap_lo else us[0]
            seed_hi = uhi - us[-1]
    seed_v = (gf.vs[0], (gf.model.v_range[1] - gf.vs[-1])) \
        if not gf.periodic_v else (np.inf, np.inf)

    periodic_u, periodic_v = gf.periodic_u, gf.periodic_v
    span = (gf.model.u_range[1] - gf.model.u_range[0])

    crop_u = _crop_axis(mask, 0, periodic_u)
    if crop_u is not None:
        roll, lo, hi = crop_u
        mask = np.roll(mask, roll, axis=0)[lo:hi]
        us_idx = np.roll(np.arange(nu), roll)[lo:hi]
        us_c = gf.us[us_idx]
        # unwrap rolled coordinates so diffs stay positive
        brk = np.flatnonzero(np.diff(us_c) < 0)
        if brk.size:
            us_c = us_c.copy()
            us_c[brk[0] + 1:] += span
        hv = hv[us_idx]
        if lo > 0 or roll != 0:
            seed_lo = np.inf
        if hi < nu or roll != 0:
            seed_hi = np.inf
        periodic_u = False
        us = us_c
    crop_v = _crop_axis(mask, 1, periodic_v)
    if crop_v is not None:
        roll, lo, hi = crop_v
        mask = np.roll(mask, roll, axis=1)[:, lo:hi]
        if lo > 0 or roll != 0:
            seed_v = (np.inf, seed_v[1])
        if hi < nv or roll != 0:
            seed_v = (seed_v[0], np.inf)
        periodic_v = False

    m, k = mask.shape
    step = np.diff(us)
    wrap_step = (us[0] - ulo) + (uhi - us[-1]) if periodic_u else np.inf
    cost_up = np.concatenate([[wrap_step], step])          # from row i-1 to i
    cost_dn = np.concatenate([step, [wrap_step]])          # from row i+1 to i
    hv_col = hv[:, None]

    inf = np.inf
    d = np.where(mask, inf, 0.0)
    for _ in range(4 * max(m, k) + 8):
        prev = d
        d = d.copy()
        d[0, :] = np.minimum(d[0, :], seed_lo)
        d[-1, :] = np.minimum(d[-1, :], seed_hi)
        d[:, 0] = np.minimum(d[:, 0], seed_v[0])
        d[:, -1] = np.minimum(d[:, -1], seed_v[1])
        for su in (1, -1):
            cost_u = cost_up if su == 1 else cost_dn
            up = np.roll(d, su, axis=0)
            if not periodic_u:
                if su == 1:
                    up[0, :] = inf
                else:
                    up[-1, :] = inf
            d = np.minimum(d, up + cost_u[:, None])
            diag = np.hypot(cost_u[:, None], hv_col)
            for sv in (1, -1):
                cand = np.roll(up, sv, axis=1)
                if not periodic_v:
                    if sv == 1:
                        cand[:, 0] = inf
                    else:
                        cand[:, -1] = inf
                d = np.minimum(d, cand + diag)
        for sv in (1, -1):
            cand = np.roll(d, sv, axis=1)
            if not periodic_v:
                if sv == 1:
                    cand[:, 0] = inf
                else:
                    cand[:, -1] = inf
            d = np.minimum(d, cand + hv_col)
        d = np.where(mask, d, 0.0)
        if np.array_equal(d, prev):
            break
    return float(d[mask].max())


def fill_inradii(nds: NodalDomainSet, gf: GridField) -> None:
    for dom in nds.domains:
        dom.inradius = inradius(dom, gf)


def domains_to_csv(nds: NodalDomainSet, path) -> None:
    """Domain table CSV: label, sign, m_A, area, inradius, cell_count."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "sign", "m_A", "area", "inradius", "cell_count"])
        for d in nds.domains:
            rad = "" if d.inradius is None else f"{d.inradius:.12g}"
            writer.writerow([d.label, d.sign, f"{d.m_A:.12g}",
                             f"{d.area:.12g}", rad, d.cell_count])
