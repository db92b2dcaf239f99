"""Maximum-likelihood fitting of the paired logit and the two-stage pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from .core import (
    AttributeCatalog,
    ModelSpec,
    _is_a,
    difference_matrix,
    loglik_counts,
    score_hessian_counts,
)
from .errors import DomainError, EmptyModelError, NumericalError, SpecificationError


@dataclass(frozen=True)
class FitSettings:
    max_iterations: int = 100
    tol: float = 1e-8
    max_halvings: int = 60
    ridge: float = 1e-8


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    terms: tuple[str, ...]
    estimates: NDArray[np.float64]
    covariance: NDArray[np.float64]
    z: NDArray[np.float64]
    p_values: NDArray[np.float64]
    log_lik: float
    aic: float
    converged: bool
    separation_flags: NDArray[np.bool_]
    iterations: int
    n_obs: int
    singular: bool = False

    @property
    def se(self) -> NDArray[np.float64]:
        d = np.diag(self.covariance)
        return np.sqrt(np.where(d > 0, d, np.nan))

    def coef(self, term: str) -> float:
        return float(self.estimates[self.terms.index(term)])


@dataclass(frozen=True)
class PipelineResult:
    linear_full: FitResult
    dropped: tuple[str, ...]
    linear_reduced: FitResult
    interaction_fit: FitResult | None = field(default=None)


def tally(data, spec: ModelSpec):
    """Aggregate observations to ``(diff, n_a, total)`` arrays.

    ``data`` is either an object with a ``tally(spec)`` method (a Dataset) or a
    sequence of ``(ChoicePair, choice)`` records. Records sharing the same
    profiles are merged; the likelihood is unchanged by this.
    """
    if hasattr(data, "tally"):
        return data.tally(spec)
    data = list(data)
    if not data:
        raise DomainError("no observations")
    keys: dict[tuple, int] = {}
    pairs, n_a, total = [], [], []
    for pair, choice in data:
        key = (pair.a.levels, pair.b.levels, pair.active)
        k = keys.setdefault(key, len(pairs))
        if k == len(pairs):
            pairs.append(pair)
            n_a.append(0.0)
            total.append(0.0)
        n_a[k] += float(_is_a(choice))
        total[k] += 1.0
    return difference_matrix(pairs, spec), np.array(n_a), np.array(total)


def _newton_direction(grad, hess, ridge):
    neg = -hess
    for extra in (0.0, ridge):
        try:
            chol = np.linalg.cholesky(neg + extra * np.eye(len(grad)))
        except np.linalg.LinAlgError:
            continue
        y = np.linalg.solve(chol, grad)
        return np.linalg.solve(chol.T, y)
    return np.linalg.lstsq(neg, grad, rcond=None)[0]


def _covariance(hess) -> tuple[NDArray[np.float64], bool]:
    neg = -hess
    eig = np.linalg.eigvalsh(neg)
    top = eig.max() if eig.size else 0.0
    if eig.size == 0:
        return neg, False
    if top <= 0 or eig.min() <= 1e-12 * top:
        return np.linalg.pinv(neg, hermitian=True), True
    cov = np.linalg.inv(neg)
    return 0.5 * (cov + cov.T), False


def separation_mask(estimates, z, magnitude_threshold: float = 10.0, z_threshold: float = 0.5) -> NDArray[np.bool_]:
    """Huge estimate with a near-zero Wald z: the footprint of quasi-separation."""
    est = np.abs(np.asarray(estimates, dtype=float))
    z = np.abs(np.asarray(z, dtype=float))
    return (est > magnitude_threshold) & ~(z >= z_threshold)


def detect_separation(fit: FitResult, magnitude_threshold: float = 10.0, z_threshold: float = 0.5) -> NDArray[np.bool_]:
    return separation_mask(fit.estimates, fit.z, magnitude_threshold, z_threshold)


def fit_counts(
    diff: NDArray[np.float64],
    n_a: NDArray[np.float64],
    total: NDArray[np.float64],
    spec: ModelSpec,
    settings: FitSettings | None = None,
    terms: Sequence[str] | None = None,
) -> FitResult:
    """Newton ascent with step halving on aggregated choice counts."""
    settings = settings or FitSettings()
    q = spec.n_terms
    if q == 0:
        raise SpecificationError("cannot fit a model with no terms")
    if total.sum() <= 0:
        raise DomainError("no observations")
    theta = np.zeros(q)
    ll = loglik_counts(diff, n_a, total, theta)
    grad, hess = score_hessian_counts(diff, n_a, total, theta)
    iterations = 0
    while iterations < settings.max_iterations and np.max(np.abs(grad)) >= settings.tol:
        step = _newton_direction(grad, hess, settings.ridge)
        scale = 1.0
        for _ in range(settings.max_halvings):
            cand = theta + scale * step
            ll_cand = loglik_counts(diff, n_a, total, cand)
            if not np.isfinite(ll_cand):
                raise NumericalError("log-likelihood became non-finite")
            if ll_cand >= ll:
                break
            scale *= 0.5
        else:
            break  # no ascent possible at working precision
        theta, ll = cand, ll_cand
        grad, hess = score_hessian_counts(diff, n_a, total, theta)
        iterations += 1
    converged = bool(np.max(np.abs(grad)) < settings.tol)

    cov, singular = _covariance(hess)
    var = np.diag(cov)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, theta / np.sqrt(np.where(var > 0, var, 1.0)), np.nan)
    p_values = 2.0 * norm.sf(np.abs(z))
    names = tuple(terms) if terms is not None else tuple(f"t{i}" for i in range(q))
    return FitResult(
        spec=spec,
        terms=names,
        estimates=theta,
        covariance=cov,
        z=z,
        p_values=p_values,
        log_lik=float(ll),
        aic=2.0 * q - 2.0 * float(ll),
        converged=converged,
        separation_flags=separation_mask(theta, z),
        iterations=iterations,
        n_obs=int(round(total.sum())),
        singular=singular,
    )


def fit_mnl(data, spec: ModelSpec, settings: FitSettings | None = None, catalog: AttributeCatalog | None = None) -> FitResult:
    """Fit the paired logit by maximum likelihood, starting from theta = 0.

    Non-convergence is reported through ``converged=False`` rather than raised.
    """
    catalog = catalog or getattr(data, "catalog", None)
    terms = spec.term_names(catalog) if catalog is not None else None
    diff, n_a, total = tally(data, spec)
    return fit_counts(diff, n_a, total, spec, settings, terms)


def critical_value(alpha: float) -> float:
    return float(norm.ppf(1.0 - alpha / 2.0))


def wald_significance(fit_or_z, alpha: float = 0.05) -> NDArray[np.bool_]:
    """``|z| >= z_(1 - alpha/2)``; the boundary counts as significant."""
    z = fit_or_z.z if isinstance(fit_or_z, FitResult) else fit_or_z
    z = np.abs(np.asarray(z, dtype=float))
    return z >= critical_value(alpha)


def compute_aic(fit: FitResult) -> float:
    return 2.0 * fit.spec.n_terms - 2.0 * fit.log_lik


def insignificant_mains(fit: FitResult, alpha: float = 0.05) -> list[int]:
    """Attribute indices of main-effect terms that fail the Wald test."""
    sig = wald_significance(fit, alpha)
    return [m for m, s in zip(fit.spec.mains, sig) if not s]


def backward_eliminate(
    data,
    catalog: AttributeCatalog,
    alpha: float = 0.05,
    settings: FitSettings | None = None,
) -> PipelineResult:
    """Fit all mains, drop every insignificant one in one batch, refit."""
    full_spec = ModelSpec.linear(range(catalog.p))
    full = fit_mnl(data, full_spec, settings, catalog)
    drop = insignificant_mains(full, alpha)
    kept = [m for m in full_spec.mains if m not in drop]
    if not kept:
        raise EmptyModelError("every attribute is insignificant")
    reduced = full if not drop else fit_mnl(data, ModelSpec.linear(kept), settings, catalog)
    return PipelineResult(full, tuple(catalog.codes[m] for m in drop), reduced)


def fit_interactions(
    data,
    retained_mains: Sequence[int],
    settings: FitSettings | None = None,
    catalog: AttributeCatalog | None = None,
) -> FitResult:
    if len(set(retained_mains)) < 2:
        raise SpecificationError("interactions need at least two retained attributes")
    return fit_mnl(data, ModelSpec.with_all_interactions(retained_mains), settings, catalog)


def run_pipeline(
    data,
    catalog: AttributeCatalog,
    alpha: float = 0.05,
    settings: FitSettings | None = None,
) -> PipelineResult:
    """Linear fit, backward elimination, then mains plus all their pairwise interactions."""
    stage = backward_eliminate(data, catalog, alpha, settings)
    inter = fit_interactions(data, stage.linear_reduced.spec.mains, settings, catalog)
    return PipelineResult(stage.linear_full, stage.dropped, stage.linear_reduced, inter)
