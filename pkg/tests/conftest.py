from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from pairconjoint import MPI_CATALOG, block_design, generate_design, simulate_population
from pairconjoint import mpi
from pairconjoint.core import Attribute, AttributeCatalog, ChoicePair, ModelSpec, Profile
from pairconjoint.design import Design
from pairconjoint.estimator import FitResult, separation_mask
from pairconjoint.segments import SURVEY_CELL_COUNTS

DESIGN_SEED = 2023


@pytest.fixture(scope="session")
def mpi_design():
    """60 non-dominated strength-4 pairs over the MPI catalog, in five blocks of 12."""
    spec = mpi.interaction_spec()
    design = generate_design(11, 4, 60, spec, np.random.default_rng(DESIGN_SEED), catalog=MPI_CATALOG)
    blocks = block_design(design, 5, np.random.default_rng(DESIGN_SEED))
    return design.with_blocks(blocks)


@pytest.fixture(scope="session")
def survey_data(mpi_design):
    spec, theta = mpi.planted_theta()
    return simulate_population(MPI_CATALOG, mpi_design, None, theta, spec, SURVEY_CELL_COUNTS, seed=7)


@pytest.fixture
def small_catalog():
    return AttributeCatalog(
        (Attribute("X", "Health"), Attribute("Y", "Education"), Attribute("Z", "StandardOfLiving"))
    )


def pair(a, b, id="p", block=None):
    return ChoicePair.from_levels(a, b, id, block)


def random_records(rng, p, n, q_spec, strength=None):
    """Random full- or partial-profile records with random choices."""
    out = []
    for k in range(n):
        on = np.ones(p, dtype=bool)
        if strength is not None:
            on[:] = False
            on[rng.choice(p, strength, replace=False)] = True
        a = [int(v) if s else None for v, s in zip(rng.integers(0, 2, p), on)]
        b = [int(v) if s else None for v, s in zip(rng.integers(0, 2, p), on)]
        out.append((pair(a, b, f"r{k}"), "A" if rng.random() < 0.5 else "B"))
    return out


def published_fit(table, catalog=None):
    """FitResult carrying printed (estimate, z) rows, with SE = estimate / z."""
    catalog = catalog or MPI_CATALOG
    spec = ModelSpec.from_term_names(list(table), catalog)
    names = spec.term_names(catalog)
    est = np.array([table[n][0] for n in names])
    z = np.array([table[n][1] for n in names])
    se = est / z
    return FitResult(
        spec=spec,
        terms=tuple(names),
        estimates=est,
        covariance=np.diag(se**2),
        z=z,
        p_values=2 * norm.sf(np.abs(z)),
        log_lik=float("nan"),
        aic=float("nan"),
        converged=True,
        separation_flags=separation_mask(est, z),
        iterations=0,
        n_obs=0,
    )


def alternating_design(n=120, seed=0):
    """Strength-4 MPI design in which every other row (P001, P003, ...) is dominated."""
    rng = np.random.default_rng(seed)
    prs = []
    for k in range(n):
        on = np.zeros(11, dtype=bool)
        on[rng.choice(11, 4, replace=False)] = True
        while True:
            a = rng.integers(0, 2, 11) * on
            b = rng.integers(0, 2, 11) * on
            dom = bool(np.all(a[on] >= b[on]) or np.all(b[on] >= a[on]))
            if dom == (k % 2 == 0):
                break
        prs.append(ChoicePair(f"P{k + 1:03d}", Profile(tuple(a), tuple(on)), Profile(tuple(b), tuple(on))))
    return Design(tuple(prs), 4, MPI_CATALOG)
