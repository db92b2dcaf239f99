"""Complement/substitute reading of interactions, tables and the interaction graph."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import AttributeCatalog
from .errors import ContractViolation
from .estimator import FitResult, PipelineResult, wald_significance
from .resampler import BootstrapSummary, bootstrap_significance

GRAPH_FORMAT_LINE = "# pairconjoint interaction-graph v1"


class Relation(str, enum.Enum):
    COMPLEMENT = "Complement"
    SUBSTITUTE = "Substitute"
    NONE = "None"


class Scope(str, enum.Enum):
    WITHIN = "WithinHead"
    BETWEEN = "BetweenHead"


@dataclass(frozen=True)
class InteractionEdge:
    codes: tuple[str, str]
    gamma: float
    z: float
    significant: bool
    relation: Relation
    scope: Scope
    heads: tuple[str, ...]
    separated: bool = False


@dataclass(frozen=True)
class InteractionReport:
    nodes: tuple[tuple[str, str], ...]  # (code, head)
    edges: tuple[InteractionEdge, ...]

    @property
    def n_significant(self) -> int:
        return sum(e.significant for e in self.edges)

    def counts(self) -> dict[str, int]:
        out = {"edges": len(self.edges), "significant": self.n_significant}
        for rel in (Relation.COMPLEMENT, Relation.SUBSTITUTE):
            out[rel.value] = sum(e.relation is rel for e in self.edges)
        out["separated"] = sum(e.separated for e in self.edges)
        return out


def classify_interaction(gamma: float, significant: bool) -> Relation:
    """Positive significant interaction = complements, negative = substitutes."""
    if not significant:
        return Relation.NONE
    if gamma > 0:
        return Relation.COMPLEMENT
    if gamma < 0:
        return Relation.SUBSTITUTE
    raise ContractViolation("an interaction of exactly zero cannot be significant")


def build_report(fit: FitResult, catalog: AttributeCatalog, alpha: float = 0.05) -> InteractionReport:
    """One edge per interaction term; separation-flagged terms are never significant."""
    n_main = len(fit.spec.mains)
    sig = wald_significance(fit, alpha)
    edges = []
    for k, (i, j) in enumerate(fit.spec.interactions, start=n_main):
        separated = bool(fit.separation_flags[k])
        significant = bool(sig[k]) and not separated
        heads = (catalog.head(i), catalog.head(j))
        edges.append(
            InteractionEdge(
                codes=(catalog.codes[i], catalog.codes[j]),
                gamma=float(fit.estimates[k]),
                z=float(fit.z[k]),
                significant=significant,
                relation=classify_interaction(float(fit.estimates[k]), significant),
                scope=Scope.WITHIN if heads[0] == heads[1] else Scope.BETWEEN,
                heads=tuple(sorted(set(heads))),
                separated=separated,
            )
        )
    nodes = tuple((catalog.codes[m], catalog.head(m)) for m in fit.spec.mains)
    return InteractionReport(nodes, tuple(edges))


def graph_text(report: InteractionReport) -> str:
    """Plain-text graph: one ``node`` or ``edge`` record per line, tab separated.

    node <code> <head>
    edge <code> <code> <sign +/-> <gamma> <relation> <scope>

    Only significant interactions become edges.
    """
    lines = [GRAPH_FORMAT_LINE]
    for code, head in report.nodes:
        lines.append(f"node\t{code}\t{head}")
    for e in report.edges:
        if e.significant:
            sign = "+" if e.gamma > 0 else "-"
            lines.append(f"edge\t{e.codes[0]}\t{e.codes[1]}\t{sign}\t{e.gamma:.5f}\t{e.relation.value}\t{e.scope.value}")
    return "\n".join(lines) + "\n"


def emit_interaction_graph(report: InteractionReport, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(graph_text(report))
    return path


def read_interaction_graph(path) -> tuple[list[tuple[str, str]], list[tuple[str, str, str, float, str, str]]]:
    nodes, edges = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        kind, *rest = line.split("\t")
        if kind == "node":
            nodes.append((rest[0], rest[1]))
        elif kind == "edge":
            edges.append((rest[0], rest[1], rest[2], float(rest[3]), rest[4], rest[5]))
    return nodes, edges


# ---------------------------------------------------------------------------
# tables


def _num(x: float, digits: int) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    return f"{x:.{digits}f}"


def _layout(header: Sequence[str], rows: Sequence[Sequence[str]], fmt: str) -> str:
    if fmt == "delimited":
        return "\n".join("\t".join(r) for r in [header, *rows]) + "\n"
    if fmt != "fixed":
        raise ValueError(f"unknown table format {fmt!r}")
    widths = [max(len(r[c]) for r in [header, *rows]) for c in range(len(header))]
    out = []
    for r in [header, *rows]:
        cells = [r[0].ljust(widths[0])] + [r[c].rjust(widths[c]) for c in range(1, len(r) - 1)]
        cells.append(r[-1].ljust(widths[-1]))
        out.append("  ".join(cells).rstrip())
    return "\n".join(out) + "\n"


def coefficient_rows(fit: FitResult, alpha: float = 0.05) -> list[list[str]]:
    sig = wald_significance(fit, alpha)
    rows = []
    for k, term in enumerate(fit.terms):
        mark = "*" if sig[k] else ""
        if fit.separation_flags[k]:
            mark = (mark + " !").strip()
        rows.append([term, _num(fit.estimates[k], 5), _num(fit.z[k], 3), mark])
    return rows


def render_fit(fit: FitResult | None, fmt: str = "fixed", alpha: float = 0.05) -> str:
    """Coefficient table: term, estimate (5 dp), z (3 dp), star if significant.

    A ``!`` marks terms flagged for quasi-separation.
    """
    header = ["term", "estimate", "z", "sig"]
    rows = coefficient_rows(fit, alpha) if fit is not None else []
    return _layout(header, rows, fmt)


def render_pipeline(result: PipelineResult, fmt: str = "fixed", alpha: float = 0.05) -> str:
    parts = [
        f"# linear model, all attributes (n={result.linear_full.n_obs}, logLik={result.linear_full.log_lik:.3f}, AIC={result.linear_full.aic:.3f})",
        render_fit(result.linear_full, fmt, alpha),
        f"# dropped: {', '.join(result.dropped) or 'none'}",
        f"# linear model, retained attributes (logLik={result.linear_reduced.log_lik:.3f}, AIC={result.linear_reduced.aic:.3f})",
        render_fit(result.linear_reduced, fmt, alpha),
    ]
    if result.interaction_fit is not None:
        f = result.interaction_fit
        parts += [f"# interaction model (logLik={f.log_lik:.3f}, AIC={f.aic:.3f}, converged={f.converged})", render_fit(f, fmt, alpha)]
    return "\n".join(parts)


def render_bootstrap(summary: BootstrapSummary, fmt: str = "fixed", ci: str = "basic") -> str:
    """Six value columns per term: observed, bootstrap mean, SE, z, p, interval.

    Stars on the observed value and the interval mark bootstrap significance.
    """
    header = ["term", "observed", "boot_mean", "boot_se", "z", "p", "ci"]
    sig = bootstrap_significance(summary, ci) if summary.rows else np.zeros(0, dtype=bool)
    rows = []
    for r, s in zip(summary.rows, sig):
        lo, hi = r.ci_basic if ci == "basic" else r.ci_percentile
        star = "*" if s else ""
        rows.append(
            [
                r.term,
                _num(r.observed, 5) + star,
                _num(r.boot_mean, 5),
                _num(r.boot_se, 5),
                _num(r.z, 3),
                _num(r.p_value, 4),
                f"({_num(lo, 5)}, {_num(hi, 5)}){star}",
            ]
        )
    return _layout(header, rows, fmt)


def render_report(report: InteractionReport, fmt: str = "fixed") -> str:
    header = ["pair", "gamma", "z", "relation", "scope", "heads"]
    rows = []
    for e in report.edges:
        rel = "separated" if e.separated else e.relation.value
        rows.append(["*".join(e.codes), _num(e.gamma, 5), _num(e.z, 3), rel, e.scope.value, "/".join(e.heads)])
    return _layout(header, rows, fmt)


def render_tables(obj, fmt: str = "fixed", alpha: float = 0.05) -> str:
    """Render a FitResult, PipelineResult or BootstrapSummary."""
    if obj is None or isinstance(obj, FitResult):
        return render_fit(obj, fmt, alpha)
    if isinstance(obj, PipelineResult):
        return render_pipeline(obj, fmt, alpha)
    if isinstance(obj, BootstrapSummary):
        return render_bootstrap(obj, fmt)
    raise TypeError(f"cannot render {type(obj).__name__}")
