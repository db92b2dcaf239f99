"""Stratified respondent bootstrap over the eight demographic cells."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from .core import ModelSpec
from .dataset import Dataset
from .errors import DomainError, ReliabilityError, StratificationError
from .estimator import FitSettings, fit_counts, fit_mnl

DEFAULT_REPLICATES = 10000
MAX_FAILED_FRACTION = 0.2


@dataclass(frozen=True)
class TermSummary:
    term: str
    observed: float
    boot_mean: float
    boot_se: float
    z: float
    p_value: float
    ci_percentile: tuple[float, float]
    ci_basic: tuple[float, float]

    @property
    def degenerate(self) -> bool:
        return not self.boot_se > 0


@dataclass(frozen=True)
class BootstrapSummary:
    rows: tuple[TermSummary, ...]
    B: int
    failed_replicates: int
    alpha: float
    replicates: NDArray[np.float64]

    @property
    def terms(self) -> tuple[str, ...]:
        return tuple(r.term for r in self.rows)


def summarize_term(observed: float, replicate_values, alpha: float = 0.05, term: str = "") -> TermSummary:
    """Mean, SD as SE, Wald z and p, and percentile and basic intervals.

    A zero SE leaves z and p as NaN (the row is degenerate).
    """
    vals = np.asarray(replicate_values, dtype=float)
    if vals.size < 2:
        raise DomainError("need at least two replicate values")
    mean = float(np.mean(vals))
    # identical replicates: np.std can leave ~1e-16 of rounding noise
    se = 0.0 if np.all(vals == vals[0]) else float(np.std(vals, ddof=1))
    if se > 0:
        z = observed / se
        p = float(2.0 * norm.sf(abs(z)))
    else:
        z = p = float("nan")
    lo, hi = (float(v) for v in np.quantile(vals, [alpha / 2.0, 1.0 - alpha / 2.0]))
    basic = (2.0 * observed - hi, 2.0 * observed - lo)
    return TermSummary(term, float(observed), mean, se, float(z), p, (lo, hi), basic)


def ci_excludes_zero(ci: tuple[float, float]) -> bool:
    lo, hi = ci
    return lo > 0 or hi < 0


def bootstrap_significance(summary: BootstrapSummary, ci: str = "basic") -> NDArray[np.bool_]:
    """Significant when the chosen interval excludes zero; degenerate rows never are."""
    if ci not in ("basic", "percentile"):
        raise DomainError(f"unknown interval flavour {ci!r}")
    attr = "ci_basic" if ci == "basic" else "ci_percentile"
    return np.array([not r.degenerate and ci_excludes_zero(getattr(r, attr)) for r in summary.rows], dtype=bool)


def _strata(dataset: Dataset, require_all_cells: bool) -> list[np.ndarray]:
    strata = []
    for cell, members in dataset.cell_members().items():
        if not members:
            if require_all_cells:
                raise StratificationError(f"cell {'/'.join(cell)} has no respondents")
            continue
        strata.append(np.array(members))
    if not strata:
        raise StratificationError("dataset has no respondents")
    return strata


def _draw(strata: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    """Respondent positions of one stratified resample, cell by cell."""
    return np.concatenate([members[rng.integers(0, len(members), size=len(members))] for members in strata])


def stratified_resample(dataset: Dataset, rng: np.random.Generator, require_all_cells: bool = True) -> Dataset:
    """Draw each cell's respondents with replacement, keeping cell sizes.

    Every drawn respondent brings all of their answers. Repeat draws of the
    same person get ids ``<id>~2``, ``<id>~3`` and so on.
    """
    picks = _draw(_strata(dataset, require_all_cells), rng)
    copies: dict[int, int] = {}
    people, observations = [], []
    by_resp: dict[str, list] = {}
    for o in dataset.observations:
        by_resp.setdefault(o.respondent, []).append(o)
    for k in picks:
        copies[k] = copies.get(k, 0) + 1
        src = dataset.respondents[k]
        rid = src.id if copies[k] == 1 else f"{src.id}~{copies[k]}"
        people.append(type(src)(rid, src.gender, src.age, src.education))
        observations.extend(o._replace(respondent=rid) for o in by_resp.get(src.id, ()))
    return Dataset(dataset.catalog, dataset.design, tuple(people), tuple(observations), dataset.blocks)


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))


def _run_replicates(args):
    diff, chose_a, shown, strata, spec, settings, seed, indices = args
    out = np.full((len(indices), spec.n_terms), np.nan)
    ok = np.zeros(len(indices), dtype=bool)
    n_resp = chose_a.shape[0]
    for row, r in enumerate(indices):
        picks = _draw(strata, replicate_rng(seed, r))
        weight = np.bincount(picks, minlength=n_resp).astype(float)
        fit = fit_counts(diff, weight @ chose_a, weight @ shown, spec, settings)
        if fit.converged:
            out[row] = fit.estimates
            ok[row] = True
    return out, ok


def block_bootstrap(
    dataset: Dataset,
    fixed_spec: ModelSpec,
    B: int = DEFAULT_REPLICATES,
    seed: int = 0,
    alpha: float = 0.05,
    settings: FitSettings | None = None,
    require_all_cells: bool = True,
    n_jobs: int = 1,
) -> BootstrapSummary:
    """Refit ``fixed_spec`` on ``B`` stratified resamples and summarise each term.

    Replicate ``r`` draws from a generator seeded by ``(seed, r)``, so results
    do not depend on ``n_jobs``. Replicates that fail to converge are dropped
    from the summaries and counted; above 20% failures a ReliabilityError is
    raised carrying the partial summary.
    """
    if B < 2:
        raise DomainError("need at least two bootstrap replicates")
    settings = settings or FitSettings()
    strata = _strata(dataset, require_all_cells)
    observed = fit_mnl(dataset, fixed_spec, settings)
    diff, _, _ = dataset.tally(fixed_spec)
    chose_a, shown = dataset.response_matrices()

    chunks = [list(c) for c in np.array_split(np.arange(B), max(1, n_jobs)) if len(c)]
    jobs = [(diff, chose_a, shown, strata, fixed_spec, settings, seed, c) for c in chunks]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_replicates, jobs))
    else:
        results = [_run_replicates(j) for j in jobs]
    values = np.vstack([r[0] for r in results])
    ok = np.concatenate([r[1] for r in results])
    good = values[ok]
    failed = int(B - ok.sum())

    rows = []
    if len(good) >= 2:
        for j, term in enumerate(observed.terms):
            rows.append(summarize_term(float(observed.estimates[j]), good[:, j], alpha, term))
    summary = BootstrapSummary(tuple(rows), B, failed, alpha, good)
    if failed > MAX_FAILED_FRACTION * B or len(good) < 2:
        raise ReliabilityError(f"{failed} of {B} bootstrap replicates failed to converge", partial=summary)
    return summary


def summary_from_columns(
    terms: Sequence[str], observed: Sequence[float], replicates: NDArray[np.float64], alpha: float = 0.05
) -> BootstrapSummary:
    """Build a summary from an observed vector and a replicates x terms matrix."""
    replicates = np.asarray(replicates, dtype=float)
    rows = tuple(summarize_term(float(o), replicates[:, j], alpha, t) for j, (t, o) in enumerate(zip(terms, observed)))
    return BootstrapSummary(rows, replicates.shape[0], 0, alpha, replicates)
