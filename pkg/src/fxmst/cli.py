"""Command line entry point: ``fxmst run`` and ``fxmst gen``."""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corrnet import SPECTRUM_HEADER, RegimeConfig, dumps_spectra, spectrum_row
from .currencies import METALS, Group, GroupTable
from .errors import FxMstError
from .mstgraph import dumps_edges, dumps_multiplicities, export_dot
from .nullmodel import FIC_CODE, MarketModel, fictitious_currency, generate_market
from .pipeline import analyse_base
from .scaling import FitConfig, GroupRow, dumps_cumulative, dumps_fit_line, group_fit
from .timeseries import CleaningConfig, load_panel, write_panel

log = logging.getLogger("fxmst")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunConfig:
    input: Path
    out: Path
    base: str | None = None
    all_bases: bool = False
    tau: int = 1
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    regime: RegimeConfig = field(default_factory=RegimeConfig)
    shuffle_seed: int | None = None
    fict: bool = False
    fict_sigma: float | None = None
    fict_seed: int = 0
    fict_anchor: str | None = None
    fict_mode: str = "walk"
    groups: Path | None = None
    workers: int = 1

    def __post_init__(self):
        if (self.base is None) == (not self.all_bases):
            raise FxMstError("select exactly one of --base or --all-bases")
        if self.tau < 1:
            raise FxMstError("--tau must be >= 1")


@dataclass
class RunReport:
    results: list
    failures: dict
    groups: GroupTable
    table: str
    warnings: list

    @property
    def exit_code(self):
        return EXIT_PARTIAL if self.failures else EXIT_OK


# ---------------------------------------------------------------------------
# Table 1


TABLE_HEADER = "row,alpha,delta_alpha,relative_error,lambda_max,count"


def _group_of(code, groups):
    return groups.get(code) if groups is not None else None


def make_table1(results, groups, warnings=None):
    """Table-1 shaped text: metals, A*, A, B, C, averages, r.m. and fict rows.

    Only bases with a successful fit contribute.  Rows with no contributing
    base are left out and noted in ``warnings``.
    """
    warnings = warnings if warnings is not None else []
    fitted = [r for r in results if r.fit is not None]
    real = [r for r in fitted if r.variant == "real"]

    def row(label, members):
        if not members:
            msg = f"Table 1 row {label!r} omitted: no fitted base currency"
            warnings.append(msg)
            log.warning(msg)
            return None
        return group_fit([(r.fit, r.lambda_max) for r in members], label)

    rows = []
    rows.append(row("metals", [r for r in real if r.base in METALS or _group_of(r.base, groups) is Group.METAL]))
    group_rows = []
    for label, group in (("A*", Group.A_STAR), ("A", Group.A), ("B", Group.B), ("C", Group.C)):
        g = row(label, [r for r in real if _group_of(r.base, groups) is group])
        rows.append(g)
        if g is not None:
            group_rows.append(g)
    if group_rows:
        rows.append(_mean_row("average", group_rows))
    else:
        warnings.append("Table 1 row 'average' omitted: no group rows")
    rows.append(row("average (all)", real))
    rows.append(row("r.m.", [r for r in fitted if r.variant == "rm"]))
    rows.append(row("fict.", [r for r in fitted if r.variant == "fict"]))

    buf = io.StringIO()
    buf.write(TABLE_HEADER + "\n")
    for g in rows:
        if g is None:
            continue
        lam = "" if g.lambda_max is None or np.isnan(g.lambda_max) else f"{g.lambda_max:.4f}"
        buf.write(f"{g.label},{g.alpha:.4f},{g.delta_alpha:.4f},{g.relative_error:.4f},{lam},{g.count}\n")
    return buf.getvalue()


def _mean_row(label, rows):
    return GroupRow(
        label=label,
        alpha=float(np.mean([r.alpha for r in rows])),
        delta_alpha=float(np.mean([r.delta_alpha for r in rows])),
        relative_error=float(np.mean([r.relative_error for r in rows])),
        lambda_max=float(np.mean([r.lambda_max for r in rows])),
        count=sum(r.count for r in rows),
    )


def parse_table1(text):
    """Rows of a Table-1 file as ``{label: {column: value}}``."""
    out = {}
    lines = text.strip().splitlines()
    cols = lines[0].split(",")
    for line in lines[1:]:
        cells = line.split(",")
        out[cells[0]] = {c: (float(v) if v else None) for c, v in zip(cols[1:], cells[1:])}
    return out


# ---------------------------------------------------------------------------
# Pipeline


FIT_HEADER = (
    "base,variant,group,N,alpha,delta_alpha,relative_error,amplitude,amplitude_F,quality,lambda_max,regime"
)


def _fit_row(r, groups):
    group = _group_of(r.base, groups)
    g = group.value if group is not None else ""
    spec_cols = f"{r.spectrum.lambda_max!r},{r.spectrum.regime.value}"
    if r.fit is None:
        return f"{r.base},{r.variant},{g},{r.N},,,,,,NO_FIT,{spec_cols}"
    f = r.fit
    return (
        f"{r.base},{r.variant},{g},{r.N},{f.alpha!r},{f.delta_alpha!r},{f.relative_error!r},"
        f"{f.amplitude!r},{f.amplitude_F!r},{f.quality_flag},{spec_cols}"
    )


def _task(args):
    panel, base, variant, tau, regime, fit, seed = args
    try:
        shuffle = seed if variant == "rm" else None
        return analyse_base(panel, base, tau, regime, fit, shuffle_seed=shuffle, variant=variant), None
    except (FxMstError, ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _write(out, rel, text, artifacts):
    path = out / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    artifacts.append(str(rel).replace(os.sep, "/"))


def _write_base(out, rel_dir, r, groups, artifacts):
    d = Path(rel_dir)
    eig = "index,eigenvalue\n" + "".join(f"{i},{float(v)!r}\n" for i, v in enumerate(r.spectrum.eigenvalues, 1))
    _write(out, d / "spectrum.csv", SPECTRUM_HEADER + "\n" + spectrum_row(r.spectrum) + "\n", artifacts)
    _write(out, d / "eigenvalues.csv", eig, artifacts)
    _write(out, d / "tree.dot", export_dot(r.tree, groups), artifacts)
    _write(out, d / "edges.csv", dumps_edges(r.tree), artifacts)
    _write(out, d / "multiplicity.csv", dumps_multiplicities(r.tree), artifacts)
    _write(out, d / "cumulative.csv", dumps_cumulative(r.dist, r.fit), artifacts)
    _write(out, d / "fit.csv", FIT_HEADER + "\n" + _fit_row(r, groups) + "\n", artifacts)
    if r.fit is not None:
        _write(out, d / "fit_line.csv", dumps_fit_line(r.fit, r.dist.K_max), artifacts)


def run_pipeline(config):
    """Analyse every requested base, write all artifacts and return a RunReport."""
    groups = GroupTable.load(config.groups) if config.groups else GroupTable.default()
    panel = load_panel(config.input, config.cleaning)
    codes = panel.all_codes
    if config.all_bases:
        bases = sorted(codes)
    else:
        if config.base not in codes:
            raise FxMstError(f"base currency {config.base} not in input")
        bases = [config.base]

    tasks = [(panel, b, "real", config.tau, config.regime, config.fit, None) for b in bases]
    if config.shuffle_seed is not None:
        tasks += [(panel, b, "rm", config.tau, config.regime, config.fit, config.shuffle_seed) for b in bases]
    if config.fict:
        anchor = config.fict_anchor or ("USD" if "USD" in codes else panel.base)
        fpanel = fictitious_currency(panel, anchor, config.fict_sigma, config.fict_seed, config.fict_mode)
        tasks.append((fpanel, FIC_CODE, "fict", config.tau, config.regime, config.fit, None))

    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []
    results, failures = [], {}
    for task, (res, err) in zip(tasks, outcomes):
        base, variant = task[1], task[2]
        key = base if variant == "real" else f"{base}/{variant}"
        if err is not None:
            failures[key] = err
            log.error("base %s (%s) failed: %s", base, variant, err)
            continue
        if res.fit is None:
            log.warning("base %s (%s): %s", base, variant, res.fit_error)
        results.append(res)
        rel = base if variant == "real" else (f"{base}/rm" if variant == "rm" else FIC_CODE)
        _write_base(out, rel, res, groups, artifacts)

    warnings = []
    table = make_table1(results, groups, warnings)
    real = [r for r in results if r.variant == "real"]
    _write(out, "spectrum.csv", dumps_spectra([r.spectrum for r in real]), artifacts)
    rm = [r for r in results if r.variant == "rm"]
    if rm:
        _write(out, "spectrum_rm.csv", dumps_spectra([r.spectrum for r in rm]), artifacts)
    _write(out, "fits.csv", FIT_HEADER + "\n" + "".join(_fit_row(r, groups) + "\n" for r in results), artifacts)
    _write(out, "table1.csv", table, artifacts)

    manifest = {
        "input": Path(config.input).name,
        "reference": panel.base,
        "n_currencies": panel.n,
        "timestamps": len(panel.timestamps),
        "tau": config.tau,
        "bases": bases,
        "shuffle_seed": config.shuffle_seed,
        "fict": config.fict,
        "failures": failures,
        "warnings": warnings,
        "artifacts": sorted(artifacts) + ["manifest.json"],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return RunReport(results, failures, groups, table, warnings)


# ---------------------------------------------------------------------------
# argparse


def build_parser():
    parser = argparse.ArgumentParser(prog="fxmst", description="FX correlation MST analysis")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="analyse a rate file")
    run.add_argument("input", type=Path)
    which = run.add_mutually_exclusive_group(required=True)
    which.add_argument("--base", help="single base currency")
    which.add_argument("--all-bases", action="store_true", help="sweep every currency as base")
    run.add_argument("--tau", type=int, default=1)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--threshold", type=float, default=5.0, help="jump filter, in sigmas")
    run.add_argument("--policy", choices=["drop-day", "clip", "interpolate"], default="drop-day")
    run.add_argument("--min-length", type=int, default=30)
    run.add_argument("--groups", type=Path, help="group table (CODE GROUP per line)")
    run.add_argument("--low-frac", type=float, default=0.4)
    run.add_argument("--high-frac", type=float, default=0.65)
    run.add_argument("--poor-threshold", type=float, default=0.09)
    run.add_argument("--shuffle-seed", type=int, help="also run the shuffled null model")
    run.add_argument("--fict", action="store_true", help="also run the fictitious Gaussian currency")
    run.add_argument("--fict-sigma", type=float)
    run.add_argument("--fict-seed", type=int, default=0)
    run.add_argument("--fict-anchor")
    run.add_argument("--fict-mode", choices=["walk", "level"], default="walk")
    run.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    gen = sub.add_parser("gen", help="generate a synthetic market rate file")
    gen.add_argument("model", type=Path, help="JSON market model")
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", type=Path, required=True)
    return parser


def _cmd_run(args):
    config = RunConfig(
        input=args.input,
        out=args.out,
        base=args.base,
        all_bases=args.all_bases,
        tau=args.tau,
        cleaning=CleaningConfig(threshold=args.threshold, policy=args.policy, min_length=args.min_length),
        fit=FitConfig(poor_threshold=args.poor_threshold),
        regime=RegimeConfig(args.low_frac, args.high_frac),
        shuffle_seed=args.shuffle_seed,
        fict=args.fict,
        fict_sigma=args.fict_sigma,
        fict_seed=args.fict_seed,
        fict_anchor=args.fict_anchor,
        fict_mode=args.fict_mode,
        groups=args.groups,
        workers=max(1, args.workers),
    )
    report = run_pipeline(config)
    sys.stdout.write(report.table)
    for key, err in report.failures.items():
        sys.stderr.write(f"FAILED {key}: {err}\n")
    return report.exit_code


def _cmd_gen(args):
    data = json.loads(args.model.read_text(encoding="utf-8"))
    model = MarketModel.from_dict(data)
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    panel = generate_market(model, seed)
    write_panel(panel, args.out)
    groups_path = args.out.with_name(args.out.stem + ".groups.txt")
    groups_path.write_text(model.groups().dumps(), encoding="utf-8")
    sys.stdout.write(f"wrote {args.out} ({panel.n} currencies, {len(panel.timestamps)} days) and {groups_path}\n")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_gen(args)
    except (FxMstError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
