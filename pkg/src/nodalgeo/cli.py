"""Command-line front end: analyze / sweep / scaling / verify / all.

Run configurations come either from a JSON document (--config, schema in
docs/config_schema.json) or from a small mirror set of flags.  Reports
are CSV (RFC-4180, 12 significant digits) and JSON; figures are PNG
rendered next to the delimited output unless --no-figures is given.

Exit codes: 0 all checks passed, 1 error, 2 a ratio exceeded its frozen
family cap (verdict "violated-scaling").
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import figures, nodal, verify
from .grid import grid_to_csv, l2_norm, laplacian_l2, sample
from .levelsets import SweepSpec, extract_level, run_sweep, sweep_to_csv
from .surfaces import (ConfigError, FieldExpr, ModeSpec, disc_paraboloid,
                       euclidean_rectangle, flat_torus, round_sphere,
                       unit_disc)
from .verify import (LAMBDA_CONVENTION_NOTE, InequalityReport, ScalingFit,
                     reports_to_json)

MODEL_NAMES = ("torus", "sphere", "rectangle", "disc")

COMMANDS = ("analyze", "sweep", "scaling", "verify", "all")

CHECK_NAMES = ("extrema_sums", "indicatrix", "sixth_moment", "sup_norm",
               "eighth_moment", "bochner", "courant", "high_extrema",
               "random_combos", "all")


@dataclass
class RunConfig:
    command: str = "analyze"
    model: str = "torus"
    modes: list = field(default_factory=list)      # "ss:1,1" or [coef, spec]
    family: Optional[str] = None                   # "nn:1..6" etc.
    builtin: Optional[str] = None
    normalize: bool = True
    resolution: Optional[int] = None
    rect_sides: tuple[float, float] = (math.pi, math.pi)
    sweep: dict = field(default_factory=dict)      # c_min, c_max, n_levels
    sasaki_r: list = field(default_factory=lambda: [1.0])
    weight: str = "one"
    quantity: Optional[str] = None
    expected_exponent: Optional[float] = None
    tolerance: float = 0.1
    thresholds: list = field(default_factory=lambda: [0.1, 0.5, 1.0])
    checks: list = field(default_factory=lambda: ["extrema_sums"])
    n_random: int = 20
    seed: int = 0
    outdir: str = "."
    prefix: Optional[str] = None
    figures: bool = True
    contours: bool = False

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{exc.lineno}: invalid JSON "
                                  f"({exc.msg})") from exc
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {unknown}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}")
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"model must be one of {MODEL_NAMES}")
        for c in self.checks:
            if c not in CHECK_NAMES:
                raise ConfigError(f"unknown check {c!r}; known: {CHECK_NAMES}")
        bad = set(self.sweep) - {"c_min", "c_max", "n_levels"}
        if bad:
            raise ConfigError(f"unknown sweep keys {sorted(bad)}")
        if not self.modes and not self.family and not self.builtin:
            raise ConfigError("empty config: provide modes, a family, "
                              "or a builtin field")

    def surface(self):
        return {"torus": flat_torus, "sphere": round_sphere,
                "disc": unit_disc,
                "rectangle": lambda: euclidean_rectangle(*self.rect_sides),
                }[self.model]()

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(c_min=self.sweep.get("c_min"),
                         c_max=self.sweep.get("c_max"),
                         n_levels=int(self.sweep.get("n_levels", 512)))


# ---------------------------------------------------------------------------
# mode / family string parsing


def parse_mode(model, spec: str) -> ModeSpec:
    """Mode strings: torus 'ss:1,1' (branch:indices), sphere 'zonal:5' or
    'sph:5,3', rectangle 'dir:2,3'."""
    try:
        tag, idx = spec.split(":")
        nums = [int(s) for s in idx.split(",")]
    except ValueError as exc:
        raise ConfigError(f"malformed mode spec {spec!r}") from exc
    kind = model.kind
    if tag in ("ss", "sc", "cs", "cc"):
        if kind != "flat_torus":
            raise ConfigError(f"branch mode {spec!r} needs the torus")
        return ModeSpec(model, (nums[0], nums[1]), tag)
    if tag == "zonal":
        if kind != "round_sphere":
            raise ConfigError("zonal modes live on the sphere")
        return ModeSpec(model, (nums[0], 0))
    if tag == "sph":
        if kind != "round_sphere":
            raise ConfigError("spherical harmonics live on the sphere")
        return ModeSpec(model, (nums[0], nums[1]))
    if tag == "dir":
        if kind != "euclidean_rectangle":
            raise ConfigError("Dirichlet modes live on the rectangle")
        return ModeSpec(model, (nums[0], nums[1]))
    raise ConfigError(f"unknown mode tag {tag!r} in {spec!r}")


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def parse_family(cfg: RunConfig) -> list[FieldExpr]:
    """Family strings: 'nn:1..6' (diagonal torus), 'zonal:4..30',
    'dirichlet:8' (all m, n up to the bound)."""
    tag, _, arg = cfg.family.partition(":")
    if tag == "nn":
        return [verify.torus_mode(n, n) for n in _parse_range(arg)]
    if tag == "zonal":
        return [verify.zonal_mode(l) for l in _parse_range(arg)]
    if tag == "dirichlet":
        return verify.rect_dirichlet_family(int(arg), *cfg.rect_sides)
    raise ConfigError(f"unknown family {cfg.family!r}")


def build_field(cfg: RunConfig) -> FieldExpr:
    if cfg.builtin:
        return disc_paraboloid() if cfg.builtin == "disc_paraboloid" else \
            FieldExpr(cfg.surface(), builtin=cfg.builtin)
    model = cfg.surface()
    terms = []
    for entry in cfg.modes:
        if isinstance(entry, str):
            coef, spec = 1.0, entry
        else:
            coef, spec = float(entry[0]), entry[1]
        terms.append((coef, parse_mode(model, spec)))
    return FieldExpr(model, tuple(terms), normalize=cfg.normalize)


def build_fields(cfg: RunConfig) -> list[FieldExpr]:
    if cfg.family:
        return parse_family(cfg)
    return [build_field(cfg)]


# ---------------------------------------------------------------------------
# plot-data CSV


def emit_plotdata(fit: ScalingFit, path) -> None:
    """Scaling-fit CSV; the header names the quantity and expected exponent."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["log_lambda", f"log_value[{fit.quantity}]",
                         f"fit_prediction[expected_exponent={fit.expected_exponent:g}]"])
        for lam, val in fit.family:
            ll = math.log(lam)
            writer.writerow([f"{ll:.12g}", f"{math.log(val):.12g}",
                             f"{fit.intercept + fit.fitted_exponent * ll:.12g}"])


# ---------------------------------------------------------------------------
# command runners


def _outpath(cfg: RunConfig, name: str) -> str:
    outdir = os.environ.get("NODALGEO_OUTDIR", cfg.outdir)
    os.makedirs(outdir, exist_ok=True)
    return os.path.join(outdir, f"{cfg.prefix}_{name}" if cfg.prefix else name)


def run_analyze(cfg: RunConfig) -> int:
    for k, expr in enumerate(build_fields(cfg)):
        gf = sample(expr, cfg.resolution)
        nds = nodal.extract_domains(gf)
        nodal.fill_inradii(nds, gf)
        tag = f"{k}_" if cfg.family else ""
        grid_to_csv(gf, _outpath(cfg, f"{tag}field.csv"))
        nodal.domains_to_csv(nds, _outpath(cfg, f"{tag}domains.csv"))
        if cfg.figures:
            figures.domain_map(gf, nds, _outpath(cfg, f"{tag}domains.png"))
        print(f"{cfg.model} {verify._mode_label(expr)}: {len(nds)} domains, "
              f"||f|| = {l2_norm(gf):.6g}, ||Delta f|| = {laplacian_l2(gf):.6g}")
    return 0


def run_sweep_cmd(cfg: RunConfig) -> int:
    expr = build_fields(cfg)[0]
    gf = sample(expr, cfg.resolution)
    sweep = run_sweep(gf, cfg.sweep_spec(), rs=cfg.sasaki_r)
    sweep_to_csv(sweep, _outpath(cfg, "sweep.csv"))
    if cfg.contours:
        _export_contours(cfg, gf, sweep)
    if cfg.figures:
        figures.sweep_plot(sweep, _outpath(cfg, "sweep.png"))
    print(f"sweep of {len(sweep.records)} levels on ({sweep.c_range[0]:.6g}, "
          f"{sweep.c_range[1]:.6g}); irregular measure "
          f"{sweep.irregular_measure:.6g}")
    return 0


def _export_contours(cfg: RunConfig, gf, sweep) -> None:
    regs = [r for r in sweep.regular_records() if r.beta > 0]
    picks = regs[:: max(1, len(regs) // 4)][:4]
    path = _outpath(cfg, "contours.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["c", "loop", "vertex", "x", "y"])
        for rec in picks:
            contours = extract_level(gf, rec.c)
            for li, loop in enumerate(contours.loops):
                for vi, (x, y) in enumerate(loop):
                    writer.writerow([f"{rec.c:.12g}", li, vi,
                                     f"{x:.12g}", f"{y:.12g}"])


def run_scaling(cfg: RunConfig) -> int:
    if not cfg.quantity:
        raise ConfigError("scaling runs need a quantity")
    family = build_fields(cfg)
    fit = verify.scaling_study(family, cfg.quantity,
                               expected_exponent=cfg.expected_exponent,
                               tolerance=cfg.tolerance,
                               resolution=cfg.resolution)
    emit_plotdata(fit, _outpath(cfg, f"scaling_{cfg.quantity}.csv"))
    if cfg.figures:
        figures.scaling_plot(fit, _outpath(cfg, f"scaling_{cfg.quantity}.png"))
    ok = fit.within_tolerance
    print(f"{cfg.quantity}: fitted exponent {fit.fitted_exponent:.4f} "
          f"(expected {fit.expected_exponent:g} +- {fit.tolerance:g}), "
          f"residual {fit.residual:.3g} -> {'ok' if ok else 'OFF-SCALE'}")
    return 0 if ok else 2


def _checks_for(expr: FieldExpr, cfg: RunConfig) -> list[str]:
    wanted = cfg.checks
    if "all" not in wanted:
        return list(wanted)
    out = ["extrema_sums", "indicatrix"]
    gf_kind = expr.model.kind
    if expr.pure_eigenvalue is not None and expr.model.closed:
        out += ["sixth_moment", "sup_norm"]
    if gf_kind == "euclidean_rectangle":
        out.append("eighth_moment")
    if expr.model.closed:
        out.append("bochner")
    return out


def run_verify(cfg: RunConfig) -> int:
    reports: list[InequalityReport] = []
    for expr in build_fields(cfg):
        gf = sample(expr, cfg.resolution)
        nds = nodal.extract_domains(gf)
        for check in _checks_for(expr, cfg):
            if check == "extrema_sums":
                reports.extend(verify.check_extrema_sums(gf, nds))
            elif check == "indicatrix":
                reports.append(verify.check_indicatrix_bound(
                    gf, cfg.weight, cfg.sweep_spec()))
            elif check == "sixth_moment":
                reports.append(verify.check_sixth_moment(gf, nds))
            elif check == "sup_norm":
                reports.append(verify.check_sup_norm(gf))
            elif check == "eighth_moment":
                reports.append(verify.check_eighth_moment(gf, nds))
            elif check == "bochner":
                reports.append(_bochner_report(gf))
            elif check == "courant":
                for a in cfg.thresholds:
                    reports.append(verify.check_courant_count(gf, a, nds))
            elif check == "high_extrema":
                for a in cfg.thresholds:
                    reports.append(verify.check_high_extrema_count(gf, a, nds))
            elif check == "random_combos":
                reports.extend(_random_combo_reports(cfg))
    reports.sort(key=lambda r: (r.lam, r.name))
    path = _outpath(cfg, "verify.json")
    reports_to_json(reports, path, notes=[LAMBDA_CONVENTION_NOTE])
    if cfg.figures and reports:
        figures.ratios_plot(reports, _outpath(cfg, "ratios.png"))
    n_violated = sum(r.verdict == verify.VIOLATED for r in reports)
    for r in reports:
        print(f"{r.name:26s} {r.mode:18s} lambda={r.lam:<10.6g} "
              f"ratio={r.ratio:<12.6g} {r.verdict}")
    print(f"{len(reports)} reports -> {path}"
          + (f"; {n_violated} VIOLATED" if n_violated else ""))
    return 2 if n_violated else 0


def _bochner_report(gf) -> InequalityReport:
    residual = verify.check_bochner_identity(gf)
    verdict = verify.EQUALITY if residual <= 1e-3 else verify.VIOLATED
    return InequalityReport(name="bochner_identity", model=gf.model.kind,
                            mode=verify._mode_label(gf.expr),
                            lam=laplacian_l2(gf), lhs=residual, rhs_scale=1e-3,
                            ratio=residual, verdict=verdict,
                            note="relative residual against 1e-3")


def _random_combo_reports(cfg: RunConfig) -> list[InequalityReport]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for _ in range(cfg.n_random):
        expr = verify.random_torus_combo(rng)
        gf = sample(expr, cfg.resolution or 64)
        nds = nodal.extract_domains(gf)
        out.extend(verify.check_extrema_sums(gf, nds))
        for a in cfg.thresholds:
            out.append(verify.check_courant_count(gf, a, nds))
    return out


def run_all(cfg: RunConfig) -> int:
    code = run_analyze(cfg)
    code = max(code, run_sweep_cmd(cfg))
    if cfg.quantity:
        code = max(code, run_scaling(cfg))
    code = max(code, run_verify(cfg))
    return code


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodalgeo",
        description="nodal domains, level-set indicatrices and Sasaki lift "
                    "lengths on model surfaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--model", choices=MODEL_NAMES)
        p.add_argument("--modes", help="comma-separated mode specs, "
                                       "e.g. ss:1,1 is torus sin*sin")
        p.add_argument("--zonal", type=int, help="shorthand for a zonal "
                                                 "sphere mode of degree L")
        p.add_argument("--builtin", help="named analytic field "
                                         "(disc_paraboloid)")
        p.add_argument("--family", help="family spec: nn:1..6, zonal:4..30, "
                                        "dirichlet:8")
        p.add_argument("--resolution", type=int)
        p.add_argument("--levels", type=int, help="sweep level count")
        p.add_argument("--r", help="comma-separated Sasaki r values")
        p.add_argument("--weight", choices=("one", "abs", "square", "zero"))
        p.add_argument("--quantity")
        p.add_argument("--checks", help="comma-separated check names")
        p.add_argument("--outdir")
        p.add_argument("--prefix")
        p.add_argument("--seed", type=int)
        p.add_argument("--rect-sides", help="a,b")
        p.add_argument("--no-normalize", action="store_true")
        p.add_argument("--no-figures", action="store_true")
        p.add_argument("--contours", action="store_true")
    return parser


def config_from_args(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_json(args.config)
        cfg.command = args.command
    else:
        cfg = RunConfig(command=args.command)
        if args.model:
            cfg.model = args.model
        if args.zonal is not None:
            cfg.model = "sphere"
            cfg.modes = [f"zonal:{args.zonal}"]
        if args.modes:
            cfg.modes = args.modes.split("+")
        if args.builtin:
            cfg.builtin = args.builtin
            if args.builtin == "disc_paraboloid":
                cfg.model = "disc"
        if args.family:
            cfg.family = args.family
            tag = args.family.split(":")[0]
            cfg.model = {"nn": "torus", "zonal": "sphere",
                         "dirichlet": "rectangle"}.get(tag, cfg.model)
    # flag overrides that apply in both paths
    if args.resolution is not None:
        cfg.resolution = args.resolution
    if args.levels is not None:
        cfg.sweep = dict(cfg.sweep, n_levels=args.levels)
    if args.r:
        cfg.sasaki_r = [float(s) for s in args.r.split(",")]
    if args.weight:
        cfg.weight = args.weight
    if args.quantity:
        cfg.quantity = args.quantity
    if args.checks:
        cfg.checks = args.checks.split(",")
    if args.outdir:
        cfg.outdir = args.outdir
    if args.prefix:
        cfg.prefix = args.prefix
    if args.seed is not None:
        cfg.seed = args.seed
    if args.rect_sides:
        a, b = (float(s) for s in args.rect_sides.split(","))
        cfg.rect_sides = (a, b)
    if args.no_normalize:
        cfg.normalize = False
    if args.no_figures:
        cfg.figures = False
    if args.contours:
        cfg.contours = True
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> int:
    runner = {"analyze": run_analyze, "sweep": run_sweep_cmd,
              "scaling": run_scaling, "verify": run_verify, "all": run_all}
    return runner[cfg.command](cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
