"""Command-line entry point.

Exit status: 0 on success, 2 on bad input or usage, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import mpi
from .core import MPI_CATALOG, AttributeCatalog, ModelSpec
from .dataset import _read_table, _write_table, load_dataset, load_design, save_dataset, save_design
from .design import block_design, d_criterion, generate_design, is_dominated, prune_dominated
from .errors import InputError, NumericalError, ParseError
from .estimator import FitSettings, backward_eliminate, run_pipeline
from .reporter import build_report, emit_interaction_graph, render_bootstrap, render_fit, render_pipeline, render_report
from .resampler import DEFAULT_REPLICATES, block_bootstrap
from .segments import CELLS, SURVEY_CELL_COUNTS, SegmentFilter, filter_dataset
from .simulate import simulate_population

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    g.add_argument("--B", type=int, default=DEFAULT_REPLICATES, help=f"bootstrap replicates (default {DEFAULT_REPLICATES})")
    g.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    g.add_argument("--format", choices=("fixed", "delimited"), default="fixed", help="table layout")
    return p


def _data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", type=Path, help="directory holding design.tsv, respondents.tsv, choices.tsv")
    p.add_argument("--design", type=Path)
    p.add_argument("--respondents", type=Path)
    p.add_argument("--choices", type=Path)
    p.add_argument("--segment", default="", help="e.g. gender=F,age=le40,edu=Below10")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="pairconjoint", description="Paired-comparison conjoint workbench.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    design = sub.add_parser("design", help="evaluate, generate, prune or block designs")
    dsub = design.add_subparsers(dest="action", parser_class=_Parser)
    ev = dsub.add_parser("eval", parents=[common], help="D-criterion of a design")
    ev.add_argument("--design", type=Path, required=True)
    ev.add_argument("--mains", default="", help="comma-separated attribute codes (default all)")
    ev.add_argument("--interactions", action="store_true", help="add all two-factor interactions")
    ev.add_argument("--theta", type=Path, help="coefficient file (default theta = 0)")
    gen = dsub.add_parser("generate", parents=[common], help="coordinate-exchange design search")
    gen.add_argument("--p", type=int, help="number of generic attributes (default: MPI catalog)")
    gen.add_argument("--t", type=int, default=4, help="profile strength")
    gen.add_argument("--n", type=int, default=120, help="number of pairs")
    gen.add_argument("--mains", default="")
    gen.add_argument("--interactions", action="store_true")
    gen.add_argument("--iterations", type=int, default=20)
    gen.add_argument("--restarts", type=int, default=1)
    pr = dsub.add_parser("prune", parents=[common], help="drop dominated pairs")
    pr.add_argument("--design", type=Path, required=True)
    bl = dsub.add_parser("block", parents=[common], help="split into questionnaire blocks")
    bl.add_argument("--design", type=Path, required=True)
    bl.add_argument("--k", type=int, default=5)

    fit = sub.add_parser("fit", help="maximum-likelihood fits")
    fsub = fit.add_subparsers(dest="action", parser_class=_Parser)
    for name in ("linear", "interactions"):
        _data_args(fsub.add_parser(name, parents=[common]))

    boot = sub.add_parser("bootstrap", parents=[common], help="stratified respondent bootstrap")
    _data_args(boot)
    boot.add_argument("--ci", choices=("basic", "percentile"), default="basic")
    boot.add_argument("--jobs", type=int, default=1)

    rep = sub.add_parser("report", parents=[common], help="complement/substitute report and graph")
    _data_args(rep)

    sim = sub.add_parser("simulate", parents=[common], help="simulate survey answers")
    sim.add_argument("--design", type=Path, required=True)
    sim.add_argument("--theta", type=Path, help="coefficient file (default: MPI survey interaction model)")
    sim.add_argument("--cells", default="", help="8 comma-separated cell counts (default: MPI survey)")
    sim.add_argument("--k", type=int, default=5, help="blocks to create when the design has none")
    return parser


# ---------------------------------------------------------------------------


def _ext(fmt: str) -> str:
    return "tsv" if fmt == "delimited" else "txt"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _spec_from(catalog: AttributeCatalog, mains: str, interactions: bool) -> ModelSpec:
    idx = [catalog.index(c.strip()) for c in mains.split(",") if c.strip()] or list(range(catalog.p))
    return ModelSpec.with_all_interactions(idx) if interactions else ModelSpec.linear(idx)


def load_theta(path: Path, catalog: AttributeCatalog) -> tuple[ModelSpec, np.ndarray]:
    header, rows, _ = _read_table(path, "theta")
    if header != ["term", "value"]:
        raise ParseError("theta header must be: term, value")
    try:
        values = {r[0]: float(r[1]) for r in rows}
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad theta row: {exc}") from None
    spec = ModelSpec.from_term_names(values, catalog)
    return spec, np.array([values[t] for t in spec.term_names(catalog)])


def save_theta(spec: ModelSpec, theta, catalog: AttributeCatalog, path: Path) -> None:
    rows = [[t, repr(float(v))] for t, v in zip(spec.term_names(catalog), theta)]
    _write_table(path, "theta", ["term", "value"], rows)


def _dataset(args):
    paths = {}
    for key in ("design", "respondents", "choices"):
        given = getattr(args, key)
        if given is None and args.data is not None:
            given = args.data / f"{key}.tsv"
        if given is None:
            raise ParseError(f"--{key} (or --data) is required")
        paths[key] = given
    data = load_dataset(paths["design"], paths["respondents"], paths["choices"])
    seg = SegmentFilter.parse(args.segment)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        data = filter_dataset(data, seg)
    if not data.observations:
        raise ParseError(f"segment {seg.label()} has no observations")
    return data, seg


def _settings(args) -> FitSettings:
    return FitSettings(max_iterations=args.max_iter, tol=args.tol)


def _cmd_design(args) -> int:
    if args.action == "eval":
        design = load_design(args.design)
        if args.theta:
            spec, theta = load_theta(args.theta, design.catalog)
        else:
            spec, theta = _spec_from(design.catalog, args.mains, args.interactions), None
        crit = d_criterion(design, theta, spec)
        n_dom = sum(is_dominated(pr) for pr in design.pairs)
        print(f"pairs\t{len(design)}\nstrength\t{design.strength}\nterms\t{spec.n_terms}\ndominated\t{n_dom}\nd_criterion\t{crit:.10g}")
        return EXIT_OK
    if args.action == "generate":
        catalog = MPI_CATALOG if args.p is None else None
        p = MPI_CATALOG.p if args.p is None else args.p
        if catalog is not None:
            spec = _spec_from(catalog, args.mains, args.interactions)
        else:
            idx = [int(i) for i in args.mains.split(",") if i.strip()] or list(range(p))
            spec = ModelSpec.with_all_interactions(idx) if args.interactions else ModelSpec.linear(idx)
        design = generate_design(p, args.t, args.n, spec, np.random.default_rng(args.seed), args.iterations, args.restarts, catalog)
        path = args.out / "design.tsv"
        save_design(design, path)
        print(f"d_criterion\t{d_criterion(design, None, spec):.10g}\nwrote\t{path}")
        return EXIT_OK
    if args.action == "prune":
        design = load_design(args.design)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pruned = prune_dominated(design)
        if not pruned.pairs:
            raise ParseError("every pair in the design is dominated")
        path = args.out / "design_pruned.tsv"
        save_design(pruned, path)
        print(f"kept\t{len(pruned)}\nremoved\t{len(design) - len(pruned)}\nwrote\t{path}")
        return EXIT_OK
    if args.action == "block":
        design = load_design(args.design)
        blocked = block_design(design, args.k, np.random.default_rng(args.seed))
        path = args.out / "design_blocked.tsv"
        save_design(design.with_blocks(blocked), path)
        print("\n".join(f"{lab}\t{len(ids)}" for lab, ids in blocked.blocks) + f"\nwrote\t{path}")
        return EXIT_OK
    raise ParseError("design needs one of: eval, generate, prune, block")


def _cmd_fit(args) -> int:
    if args.action not in ("linear", "interactions"):
        raise ParseError("fit needs one of: linear, interactions")
    data, seg = _dataset(args)
    if args.action == "interactions":
        result = run_pipeline(data, data.catalog, args.alpha, _settings(args))
    else:
        result = backward_eliminate(data, data.catalog, args.alpha, _settings(args))
    ext = _ext(args.format)
    _write(args.out, f"linear_full.{ext}", render_fit(result.linear_full, args.format, args.alpha))
    _write(args.out, f"linear_reduced.{ext}", render_fit(result.linear_reduced, args.format, args.alpha))
    if result.interaction_fit is not None:
        _write(args.out, f"interactions.{ext}", render_fit(result.interaction_fit, args.format, args.alpha))
    print(f"# segment: {seg.label()}")
    print(render_pipeline(result, args.format, args.alpha), end="")
    return EXIT_OK


def _cmd_bootstrap(args) -> int:
    data, seg = _dataset(args)
    result = run_pipeline(data, data.catalog, args.alpha, _settings(args))
    spec = result.interaction_fit.spec
    summary = block_bootstrap(
        data, spec, B=args.B, seed=args.seed, alpha=args.alpha, settings=_settings(args),
        require_all_cells=seg.is_empty, n_jobs=args.jobs,
    )
    text = render_bootstrap(summary, args.format, args.ci)
    _write(args.out, f"bootstrap.{_ext(args.format)}", text)
    print(f"# segment: {seg.label()}  B={summary.B}  failed={summary.failed_replicates}")
    print(text, end="")
    return EXIT_OK


def _cmd_report(args) -> int:
    data, seg = _dataset(args)
    result = run_pipeline(data, data.catalog, args.alpha, _settings(args))
    report = build_report(result.interaction_fit, data.catalog, args.alpha)
    text = render_report(report, args.format)
    args.out.mkdir(parents=True, exist_ok=True)
    _write(args.out, f"interaction_report.{_ext(args.format)}", text)
    emit_interaction_graph(report, args.out / "interaction_graph.txt")
    counts = report.counts()
    print(f"# segment: {seg.label()}  " + "  ".join(f"{k}={v}" for k, v in counts.items()))
    print(text, end="")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    design = load_design(args.design)
    if args.theta:
        spec, theta = load_theta(args.theta, design.catalog)
    else:
        if design.catalog.codes != MPI_CATALOG.codes:
            raise ParseError("default coefficients need the MPI catalog; pass --theta")
        spec, theta = mpi.planted_theta()
    if args.cells:
        try:
            counts = [int(c) for c in args.cells.split(",")]
        except ValueError:
            raise ParseError(f"bad --cells {args.cells!r}") from None
    else:
        counts = [SURVEY_CELL_COUNTS[c] for c in CELLS]
    blocks = design.blocks() or block_design(design, args.k, np.random.default_rng(args.seed))
    data = simulate_population(design.catalog, design, blocks, theta, spec, counts, args.seed)
    paths = save_dataset(data, args.out)
    save_theta(spec, theta, design.catalog, args.out / "theta.tsv")
    print(f"respondents\t{len(data.respondents)}\nobservations\t{len(data.observations)}")
    for key, path in paths.items():
        print(f"wrote\t{path}")
    return EXIT_OK


_COMMANDS = {
    "design": _cmd_design,
    "fit": _cmd_fit,
    "bootstrap": _cmd_bootstrap,
    "report": _cmd_report,
    "simulate": _cmd_simulate,
}


def cli_dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INPUT
    try:
        return _COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"pairconjoint: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError) as exc:
        print(f"pairconjoint: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
