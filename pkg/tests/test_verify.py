"""Inequality checks, scaling fits and the frozen-cap protocol."""

import json
import math

import numpy as np
import pytest

from conftest import torus_resolution
from nodalgeo import grid as gd
from nodalgeo import nodal as nd
from nodalgeo import surfaces as sf
from nodalgeo import verify as vf

PI = math.pi


def test_extrema_sums_torus_family(torus_grid, domains_of):
    for n in (1, 2, 3):
        r1, r2 = vf.check_extrema_sums(torus_grid(n), domains_of(torus_grid(n)))
        assert r1.ratio == pytest.approx(2 / PI, rel=0.02)
        assert r2.ratio == pytest.approx(2 / PI ** 2, rel=0.03)
        assert r1.verdict == vf.BOUNDED and r2.verdict == vf.BOUNDED


def test_extrema_sums_single_stripe_mode():
    # the (1,0)-type stripe mode sin(x): two domains, ratio below the cap
    gf = gd.sample(sf.torus_mode(1, 0, "sc"), 64)
    r1, r2 = vf.check_extrema_sums(gf)
    assert 0 < r1.ratio <= vf.FROZEN_CAPS["extrema_sum_q1"]
    assert 0 < r2.ratio <= vf.FROZEN_CAPS["extrema_sum_q2"]


def test_ratio_stable_under_refinement():
    vals = []
    for res in (64, 128):
        gf = gd.sample(sf.torus_mode(2, 2), res)
        r1, _ = vf.check_extrema_sums(gf)
        vals.append(r1.ratio)
    assert vals[0] == pytest.approx(vals[1], rel=0.02)


def test_gate_rejects_unnormalized():
    gf = gd.sample(sf.torus_mode(1, 1, normalize=False), 64)
    with pytest.raises(sf.ConfigError, match="normalized"):
        vf.check_extrema_sums(gf)


def test_gate_accepts_single_modes(torus_grid, zonal_grid):
    for gf in (torus_grid(1), zonal_grid(4)):
        lam = vf.require_normalized(gf)
        assert lam > 0
        # variational chain: ||grad f||^2 <= ||f|| ||Delta f||
        assert gd.gradient_l2(gf) ** 2 <= lam * (1 + 1e-3)


def test_indicatrix_family_ratio_settles(torus_grid):
    ratios = []
    for n in (3, 4, 5, 6):
        rep = vf.check_indicatrix_bound(torus_grid(n))
        assert rep.verdict == vf.BOUNDED
        ratios.append(rep.ratio)
    assert max(ratios) / min(ratios) < 1.15  # constant past the smallest n


def test_indicatrix_abs_weight(torus_grid):
    rep = vf.check_indicatrix_bound(torus_grid(3), "abs")
    assert rep.verdict == vf.BOUNDED
    # oracle: B(|t|, f) = 2 n^2 / pi^2 for the diagonal mode
    assert rep.lhs == pytest.approx(2 * 9 / PI ** 2, rel=0.03)


def test_sixth_moment_smoke(zonal_grid, domains_of):
    rep = vf.check_sixth_moment(zonal_grid(2), domains_of(zonal_grid(2)))
    assert rep.ratio > 0
    assert rep.verdict == vf.BOUNDED


def test_sixth_moment_rejects_combo():
    model = sf.flat_torus()
    expr = sf.FieldExpr(model, ((0.7, sf.ModeSpec(model, (1, 1))),
                                (0.7, sf.ModeSpec(model, (2, 2))),),
                        normalize=True)
    gf = gd.sample(expr, 64)
    with pytest.raises(sf.ConfigError):
        vf.check_sixth_moment(gf)


def test_sixth_moment_rejects_boundary_model(rect_grid):
    with pytest.raises(sf.ConfigError):
        vf.check_sixth_moment(rect_grid(2, 2))


def test_high_extrema_count_zonal(zonal_grid, domains_of):
    for l in (4, 12, 20, 30):
        gf = zonal_grid(l)
        lam = gd.laplacian_l2(gf)
        a = 0.9 * gf.max_abs() / lam ** 0.25
        rep = vf.check_high_extrema_count(gf, a, domains_of(gf))
        assert rep.lhs == 2  # the two polar caps
        assert rep.verdict == vf.BOUNDED


def test_high_extrema_count_trivial_cases(zonal_grid, torus_grid, domains_of):
    rep = vf.check_high_extrema_count(zonal_grid(6), 50.0,
                                      domains_of(zonal_grid(6)))
    assert rep.lhs == 0
    # torus maxima stay at 1/pi, lambda^{1/4} grows: count drops to zero
    rep = vf.check_high_extrema_count(torus_grid(5), 0.3,
                                      domains_of(torus_grid(5)))
    assert rep.lhs == 0


def test_sup_norm_fits():
    fit = vf.scaling_study(vf.zonal_family(range(4, 21)), "sup_norm")
    assert abs(fit.fitted_exponent - 0.25) <= 0.03
    fam = vf.torus_diag_family(range(1, 7))
    fit = vf.scaling_study(fam, "sup_norm", expected_exponent=0.0,
                           tolerance=0.03,
                           resolution=lambda e: torus_resolution(e.max_index))
    assert abs(fit.fitted_exponent) <= 0.03


def test_sup_norm_report(zonal_grid):
    rep = vf.check_sup_norm(zonal_grid(10))
    assert rep.ratio == pytest.approx(0.3987, rel=0.01)
    assert rep.verdict == vf.BOUNDED


def test_degenerate_constant_rejected():
    with pytest.raises(sf.ConfigError):
        sf.zonal_mode(0)


def test_bochner_residuals(torus_grid, zonal_grid):
    assert vf.check_bochner_identity(torus_grid(3)) <= 1e-3
    assert vf.check_bochner_identity(zonal_grid(10)) <= 1e-3


def test_bochner_zero_field():
    model = sf.flat_torus()
    expr = sf.FieldExpr(model, ((0.0, sf.ModeSpec(model, (1, 1))),),
                        normalize=False)
    assert vf.check_bochner_identity(gd.sample(expr, 32)) == 0.0


def test_bochner_rejects_boundary_models(rect_grid, disc_grid):
    with pytest.raises(sf.ConfigError):
        vf.check_bochner_identity(rect_grid(1, 1))
    with pytest.raises(sf.ConfigError):
        vf.check_bochner_identity(disc_grid)


def test_eighth_moment_rect_family(rect_grid, domains_of):
    for m, n in ((1, 1), (3, 3), (8, 1), (5, 2)):
        gf = rect_grid(m, n)
        nds = domains_of(gf)
        assert len(nds) == m * n
        rep = vf.check_eighth_moment(gf, nds)
        assert rep.verdict == vf.BOUNDED
        # normalized modes on [0, pi]^2 have m_A = 2/pi in every cell
        assert rep.lhs == pytest.approx(m * n * (2 / PI) ** 8, rel=0.05)


def test_eighth_moment_rejects_other_models(torus_grid):
    with pytest.raises(sf.ConfigError):
        vf.check_eighth_moment(torus_grid(1))


def test_scaling_study_torus():
    fam = vf.torus_diag_family(range(1, 7))
    res = lambda e: torus_resolution(e.max_index)
    fit = vf.scaling_study(fam, "sum_mA", tolerance=0.05, resolution=res)
    assert abs(fit.fitted_exponent - 1.0) <= 0.05
    fit = vf.scaling_study(fam, "inradius", tolerance=0.05, resolution=res)
    assert abs(fit.fitted_exponent + 0.5) <= 0.05


def test_scaling_study_zonal_l6():
    fit = vf.scaling_study(vf.zonal_family(range(4, 41, 3)), "l6_norm")
    assert 0.08 <= fit.fitted_exponent <= 0.18
    assert fit.fitted_exponent <= 1 / 12 + 0.1


def test_scaling_study_needs_five_members():
    with pytest.raises(sf.ConfigError):
        vf.scaling_study(vf.torus_diag_family([1, 2, 3]), "sum_mA")
    with pytest.raises(sf.ConfigError):
        vf.scaling_study(vf.torus_diag_family(range(1, 7)), "bogus")


def test_random_combo_property_sample():
    # 15-seed slice of the acceptance property run
    for seed in range(15):
        rng = np.random.default_rng(20260809 + seed)
        expr = vf.random_torus_combo(rng)
        gf = gd.sample(expr, 64)
        lam = vf.require_normalized(gf)
        assert lam >= gd.gradient_l2(gf) ** 2 * (1 - 1e-6)
        nds = nd.extract_domains(gf)
        r1, r2 = vf.check_extrema_sums(gf, nds)
        assert r1.ratio <= 5 * vf.FROZEN_CAPS["extrema_sum_q1"]
        assert r2.ratio <= 5 * vf.FROZEN_CAPS["extrema_sum_q2"]
        for a in (0.1, 0.5, 1.0):
            rep = vf.check_courant_count(gf, a, nds)
            assert rep.ratio <= vf.FROZEN_CAPS["courant_count"]


def test_report_json_schema(tmp_path, torus_grid, domains_of):
    import jsonschema

    reports = vf.check_extrema_sums(torus_grid(2), domains_of(torus_grid(2)))
    path = tmp_path / "verify.json"
    vf.reports_to_json(reports, path, notes=[vf.LAMBDA_CONVENTION_NOTE])
    doc = json.loads(path.read_text())
    schema = json.loads(open("docs/report_schema.json").read())
    jsonschema.validate(doc, schema)
    assert len(doc["reports"]) == 2
    assert doc["reports"][0]["verdict"] == "bounded-in-family"


def test_violated_scaling_verdict(torus_grid, domains_of, monkeypatch):
    monkeypatch.setitem(vf.FROZEN_CAPS, "extrema_sum_q1", 0.01)
    r1, _ = vf.check_extrema_sums(torus_grid(1), domains_of(torus_grid(1)))
    assert r1.verdict == vf.VIOLATED


def test_ratios_positive_and_finite(torus_grid, zonal_grid, domains_of):
    reports = []
    reports += vf.check_extrema_sums(torus_grid(2), domains_of(torus_grid(2)))
    reports.append(vf.check_sup_norm(zonal_grid(6)))
    reports.append(vf.check_sixth_moment(zonal_grid(6),
                                         domains_of(zonal_grid(6))))
    for r in reports:
        assert math.isfinite(r.ratio) and r.ratio > 0
        assert r.lhs > 0 and r.rhs_scale > 0
