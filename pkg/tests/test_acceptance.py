"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines.
"""

import math
import time

import numpy as np
import pytest

from conftest import fd_covariant, interior_points
from nodalgeo import grid as gd
from nodalgeo import levelsets as lv
from nodalgeo import nodal as nd
from nodalgeo import sasaki as sk
from nodalgeo import surfaces as sf
from nodalgeo import verify as vf

PI = math.pi


def report(num, text):
    print(f"\nACCEPTANCE {num:>2} PASS: {text}")


def test_criterion_1_exact_nodal_counts(torus_grid, zonal_grid, rect_grid,
                                        domains_of):
    t0 = time.time()
    for n in range(1, 7):
        assert len(domains_of(torus_grid(n))) == 4 * n * n
    for l in range(2, 21):
        assert len(domains_of(zonal_grid(l))) == l + 1
    for m in range(1, 9):
        for n in range(1, 9):
            assert len(domains_of(rect_grid(m, n))) == m * n
    elapsed = time.time() - t0
    assert elapsed < 30.0
    report(1, f"exact domain counts: torus 4n^2 (n=1..6), zonal l+1 "
              f"(l=2..20), rectangle mn (m,n<=8) in {elapsed:.1f}s")


def test_criterion_2_extrema_sum_sharpness(torus_grid, domains_of):
    for n in range(1, 7):
        gf = torus_grid(n)
        r1, r2 = vf.check_extrema_sums(gf, domains_of(gf))
        assert r1.ratio == pytest.approx(2 / PI, rel=0.02)
        assert r2.ratio == pytest.approx(2 / PI ** 2, rel=0.03)
    report(2, "diagonal torus family: sum m_A / lambda = 2/pi +- 2%, "
              "sum m_A^2 / lambda = 2/pi^2 +- 3% for n = 1..6")


def test_criterion_3_indicatrix_consistency(torus_grid, zonal_grid, rect_grid,
                                            disc_grid, domains_of):
    for n in range(1, 7):
        gf = torus_grid(n)
        B = lv.banach_indicatrix(gf, "one")
        S = nd.extrema_moments(domains_of(gf), 1)
        assert B == pytest.approx(S, rel=0.03)
    roster = [(torus_grid(2), 512), (torus_grid(5), 512),
              (zonal_grid(6), 2048), (zonal_grid(10), 2048),
              (rect_grid(2, 3), 512), (disc_grid, 512)]
    for seed in (3, 11):
        rng = np.random.default_rng(seed)
        roster.append((gd.sample(vf.random_torus_combo(rng), 64), 2048))
    for gf, levels in roster:
        B = lv.banach_indicatrix(gf, "one", lv.SweepSpec(n_levels=levels))
        S = nd.extrema_moments(nd.extract_domains(gf), 1)
        assert B >= 0.99 * S
    report(3, "B(1,f) = sum m_A within 3% on the torus family and "
              "B(1,f) >= sum m_A with 1% slack on every test field")


def test_criterion_4_sixth_moment_and_sup_fits():
    t0 = time.time()
    family = vf.zonal_family(range(4, 31))
    fit6 = vf.scaling_study(family, "sum_mA6")
    assert abs(fit6.fitted_exponent - 1.5) <= 0.10
    fit_sup = vf.scaling_study(family, "sup_norm")
    assert abs(fit_sup.fitted_exponent - 0.25) <= 0.03
    elapsed = time.time() - t0
    assert elapsed < 180.0
    report(4, f"zonal l=4..30: sum m_A^6 exponent {fit6.fitted_exponent:.3f} "
              f"(1.5 +- 0.1), sup-norm exponent {fit_sup.fitted_exponent:.3f} "
              f"(0.25 +- 0.03) in {elapsed:.1f}s")


def test_criterion_5_hessian_mass_equality(disc_grid):
    out = sk.hessian_mass_bound(disc_grid)
    assert out["lhs"] / out["rhs"] == pytest.approx(1.0, abs=1e-4)
    report(5, f"paraboloid equality case: max|f| / ((1/2pi) int |H_f|) = "
              f"{out['lhs'] / out['rhs']:.8f} within 1e-4")


def test_criterion_6_lift_length_closed_form(disc_grid):
    lc = lv.extract_level(disc_grid, 0.75)  # circle of radius 0.5
    L = sum(sk.lift_length(lp, disc_grid, 1.0) for lp in lc.loops)
    assert L == pytest.approx(2 * PI * math.sqrt(1.25), rel=1e-3)
    Ls = [sum(sk.lift_length(lp, disc_grid, r) for lp in lc.loops)
          for r in (0.0, 0.1, 1.0, 10.0)]
    assert all(a <= b for a, b in zip(Ls, Ls[1:]))
    report(6, f"lift of the radius-0.5 level circle at r=1: {L:.6f} vs "
              f"2 pi sqrt(1.25) = {2 * PI * math.sqrt(1.25):.6f}; "
              f"monotone in r over {{0, 0.1, 1, 10}}")


def test_criterion_7_systole_inequality(torus_grid, rect_grid, disc_grid):
    fields = [torus_grid(n) for n in range(1, 7)]
    fields += [rect_grid(2, 3), rect_grid(3, 3), disc_grid]
    for seed in (3, 11):
        rng = np.random.default_rng(seed)
        fields.append(gd.sample(vf.random_torus_combo(rng), 64))
    violations = 0
    levels = 0
    for gf in fields:
        for r in (0.5, 1.0):
            kappa = sk.systole(gf.model, r)
            sweep = lv.run_sweep(gf, lv.SweepSpec(n_levels=512), rs=(r,))
            for rec in sweep.records:
                levels += 1
                if rec.sasaki[0] < kappa * rec.beta - 1e-12:
                    violations += 1
    assert violations == 0
    report(7, f"L(c) >= kappa(r) beta(c) at all {levels} sweep levels "
              f"({len(fields)} flat fields x 512 levels x r in {{0.5, 1}}), "
              f"zero violations")


def test_criterion_8_bochner_identity(torus_grid):
    res_t = vf.check_bochner_identity(gd.sample(sf.torus_mode(3, 3)))
    res_z = vf.check_bochner_identity(gd.sample(sf.zonal_mode(10)))
    assert res_t <= 1e-3
    assert res_z <= 1e-3
    report(8, f"Bochner identity residuals: torus(3,3) {res_t:.2e}, "
              f"zonal l=10 {res_z:.2e} (both <= 1e-3)")


def test_criterion_9_derivative_validation():
    cases = [
        (sf.torus_mode(2, 3, "sc", normalize=False), 1e-5),
        (sf.sphere_mode(5, 2, normalize=False), 1e-4),
        (sf.rect_mode(3, 2, normalize=False), 1e-5),
        (sf.disc_paraboloid(), 1e-5),
    ]
    for expr, h in cases:
        rng = np.random.default_rng(42)
        u, v = interior_points(expr.model, rng, 1000)
        parts = sf.chart_partials(expr, u, v)
        cov = sf.covariant_from_partials(expr.model, u, v, parts, expr.builtin)
        fd = fd_covariant(expr, u, v, h)
        g_scale = np.max(np.abs(cov["grad_norm"])) + 1e-30
        h_scale = np.max(np.abs(cov["hess_norm"])) + 1e-30
        assert np.max(np.abs(cov["grad_norm"] - fd["grad_norm"])) <= 1e-5 * g_scale
        for comp in ("h11", "h12", "h22"):
            assert np.max(np.abs(cov[comp] - fd[comp])) <= 1e-5 * h_scale
    report(9, "analytic gradient and frame Hessian match central finite "
              "differences within 1e-5 relative at 1000 random interior "
              "points on each model")


def test_criterion_10_random_combination_properties():
    t0 = time.time()
    cap_b = vf.FROZEN_CAPS["indicatrix_bound"]
    cap_c = vf.FROZEN_CAPS["courant_count"]
    for seed in range(100):
        rng = np.random.default_rng(20260809 + seed)
        expr = vf.random_torus_combo(rng)
        gf = gd.sample(expr, 64)
        lam = vf.require_normalized(gf)   # unit-norm, mean-zero gate
        assert lam > 0
        nds = nd.extract_domains(gf)
        rep = vf.check_indicatrix_bound(gf)
        assert rep.ratio <= cap_b
        for a in (0.1, 0.5, 1.0):
            count = nd.count_above(nds, a)
            assert count <= cap_c * min(1 / a, 1 / a ** 2) * lam
    elapsed = time.time() - t0
    assert elapsed < 120.0
    report(10, f"100 seeded random 3-mode torus combinations pass the "
               f"membership gate, the indicatrix-bound cap and the "
               f"count-above caps in {elapsed:.1f}s")


def test_criterion_11_eighth_moment_family(rect_grid, domains_of):
    worst = 0.0
    for m in range(1, 9):
        for n in range(1, 9):
            gf = rect_grid(m, n)
            rep = vf.check_eighth_moment(gf, domains_of(gf))
            assert rep.verdict == vf.BOUNDED
            worst = max(worst, rep.ratio)
    assert worst <= vf.FROZEN_CAPS["eighth_moment_dirichlet"]
    report(11, f"Dirichlet rectangle family m,n<=8: sum m_A^8 / lambda^2 "
               f"bounded (worst ratio {worst:.6f} <= frozen cap "
               f"{vf.FROZEN_CAPS['eighth_moment_dirichlet']})")
