import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairconjoint import MPI_CATALOG, mpi
from pairconjoint.core import Attribute, AttributeCatalog, ChoicePair, ModelSpec, choice_probability
from pairconjoint.design import (
    Design,
    block_design,
    d_criterion,
    feature_difference,
    generate_design,
    information_matrix,
    is_dominated,
    prune_dominated,
    relative_efficiency,
)
from pairconjoint.errors import DomainError, EmptyDesignWarning, SpecificationError, UndefinedBenchmarkError

from conftest import alternating_design, pair


def catalog(p):
    heads = ("Health", "Education", "StandardOfLiving")
    return AttributeCatalog(tuple(Attribute(f"X{i}", heads[i % 3]) for i in range(p)))


def full_design(pairs_levels):
    p = len(pairs_levels[0][0])
    prs = [pair(a, b, f"p{k}") for k, (a, b) in enumerate(pairs_levels)]
    return Design(tuple(prs), p, catalog(p))


def brute_info(pairs_levels, mains):
    """Information at theta=0 summed by hand from raw levels (mains only)."""
    q = len(mains)
    m = [[0.0] * q for _ in range(q)]
    for a, b in pairs_levels:
        d = [a[r] - b[r] for r in mains]
        for i in range(q):
            for j in range(q):
                m[i][j] += 0.25 * d[i] * d[j]
    return np.array(m)


def det_by_permutations(m):
    q = len(m)
    total = 0.0
    for perm in itertools.permutations(range(q)):
        inversions = sum(1 for i in range(q) for j in range(i + 1, q) if perm[i] > perm[j])
        prod = 1.0
        for i in range(q):
            prod *= m[i][perm[i]]
        total += (-1) ** inversions * prod
    return total


def brute_criterion(pairs_levels, mains):
    m = brute_info(pairs_levels, mains) / len(pairs_levels)
    det = det_by_permutations(m)
    return max(det, 0.0) ** (1.0 / len(mains)) if det > 1e-12 else 0.0


def test_feature_difference_examples():
    assert np.all(feature_difference(pair([1, 0], [1, 0]), ModelSpec.linear([0, 1])) == 0)
    assert feature_difference(pair([1, 0], [0, 1]), ModelSpec.linear([0, 1])).tolist() == [1, -1]
    spec = ModelSpec.with_all_interactions([0, 1])
    assert feature_difference(pair([1, 1], [1, 0]), spec).tolist() == [0, 1, 1]


def test_information_matrix_examples():
    d = full_design([([1, 0], [0, 0])])
    assert information_matrix(d, None, ModelSpec.linear([0, 1])).tolist() == [[0.25, 0.0], [0.0, 0.0]]
    flat = full_design([([1, 0], [1, 0]), ([0, 1], [0, 1])])
    assert np.all(information_matrix(flat, None, ModelSpec.linear([0, 1])) == 0)
    with pytest.raises(DomainError):
        information_matrix(Design((), 2, catalog(2)), None, ModelSpec.linear([0, 1]))


def test_information_matrix_all_unordered_pairs_matches_enumeration():
    profiles = list(itertools.product([0, 1], repeat=2))
    levels = [(list(a), list(b)) for a, b in itertools.combinations(profiles, 2)]
    got = information_matrix(full_design(levels), None, ModelSpec.linear([0, 1]))
    assert np.allclose(got, brute_info(levels, [0, 1]), atol=1e-15)


def test_information_matrix_at_theta():
    spec = ModelSpec.linear([0, 1])
    levels = [([1, 0], [0, 1]), ([1, 1], [0, 0])]
    design = full_design(levels)
    theta = np.array([0.7, -0.3])
    expected = np.zeros((2, 2))
    for pr in design.pairs:
        p = choice_probability(pr, theta, spec)
        d = np.subtract(pr.a.levels, pr.b.levels)
        expected += p * (1 - p) * np.outer(d, d)
    assert np.allclose(information_matrix(design, theta, spec), expected)


def test_d_criterion_examples():
    spec = ModelSpec.linear([0, 1])
    assert d_criterion(full_design([([1, 0], [0, 0])]), None, spec) == 0.0
    assert d_criterion(full_design([([1], [0])] if False else [([1, 0], [0, 0])]), None, ModelSpec.linear([0])) == pytest.approx(0.25)
    with pytest.raises(SpecificationError):
        d_criterion(full_design([([1, 0], [0, 1])]), None, ModelSpec(()))


def test_every_four_pair_design_two_attributes_matches_brute_force():
    profiles = [list(x) for x in itertools.product([0, 1], repeat=2)]
    pool = [(a, b) for a in profiles for b in profiles]
    spec = ModelSpec.linear([0, 1])
    for combo in itertools.combinations_with_replacement(range(len(pool)), 4):
        levels = [pool[i] for i in combo]
        got = d_criterion(full_design(levels), None, spec)
        m = brute_info(levels, [0, 1]) / 4
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        want = det ** 0.5 if det > 1e-12 else 0.0
        assert abs(got - want) < 1e-10


def _nondominated_pool(p):
    profiles = [list(x) for x in itertools.product([0, 1], repeat=p)]
    out = []
    for a in profiles:
        for b in profiles:
            if not (all(x >= y for x, y in zip(a, b)) or all(y >= x for x, y in zip(a, b))):
                out.append((a, b))
    return out


def _enumerated_optimum(p, n):
    pool = _nondominated_pool(p)
    best = 0.0
    for combo in itertools.combinations_with_replacement(range(len(pool)), n):
        best = max(best, brute_criterion([pool[i] for i in combo], list(range(p))))
    return best


def test_generator_two_attributes_attains_enumerated_optimum():
    # every non-dominated 2-attribute pair has d = +-(1, -1): the optimum is singular
    assert _enumerated_optimum(2, 4) == 0.0
    d = generate_design(2, 2, 4, ModelSpec.linear([0, 1]), np.random.default_rng(0))
    assert d_criterion(d, None, ModelSpec.linear([0, 1])) == 0.0
    assert not any(is_dominated(pr) for pr in d.pairs)


@pytest.mark.parametrize("p,n", [(3, 4), (3, 5)])
def test_generator_attains_enumerated_optimum_three_attributes(p, n):
    optimum = _enumerated_optimum(p, n)
    assert optimum > 0
    d = generate_design(p, p, n, ModelSpec.linear(range(p)), np.random.default_rng(1), restarts=5)
    assert d_criterion(d, None, ModelSpec.linear(range(p))) == pytest.approx(optimum, abs=1e-10)


def test_relative_efficiency():
    spec = ModelSpec.linear([0, 1, 2])
    levels = [([1, 0, 0], [0, 1, 1]), ([0, 1, 0], [1, 0, 1]), ([0, 0, 1], [1, 1, 0]), ([1, 1, 0], [0, 0, 1])]
    a = full_design(levels)
    assert relative_efficiency(a, a, None, spec) == pytest.approx(1.0)
    twice = full_design(levels + levels)
    assert relative_efficiency(a, twice, None, spec) == pytest.approx(1.0)
    singular = full_design([([1, 0, 0], [0, 1, 0])])
    with pytest.raises(UndefinedBenchmarkError):
        relative_efficiency(a, singular, None, spec)


def test_relative_efficiency_full_vs_partial_profile():
    """Full-profile vs strength-2 partial design on 3 attributes, mains only."""
    spec = ModelSpec.linear([0, 1, 2])
    full_levels = [([1, 1, 0], [0, 0, 1]), ([1, 0, 1], [0, 1, 0]), ([0, 1, 1], [1, 0, 0])]
    partial_levels = [([1, 0, None], [0, 1, None]), ([1, None, 0], [0, None, 1]), ([None, 1, 0], [None, 0, 1])]
    full = full_design(full_levels)
    partial = Design(tuple(pair(a, b, f"q{k}") for k, (a, b) in enumerate(partial_levels)), 2, catalog(3))
    # partial: all d = e_i - e_j, rank 2, so use a wider partial design
    assert d_criterion(partial, None, spec) == 0.0
    partial_levels2 = partial_levels + [([1, 1, None], [0, 0, None])]
    partial2 = Design(tuple(pair(a, b, f"q{k}") for k, (a, b) in enumerate(partial_levels2)), 2, catalog(3))
    ratio = relative_efficiency(full, partial2, None, spec)

    def crit(levels):
        zeroed = [([x or 0 for x in a], [x or 0 for x in b]) for a, b in levels]
        return brute_criterion(zeroed, [0, 1, 2])

    assert ratio == pytest.approx(crit(full_levels) / crit(partial_levels2), rel=1e-10)


def test_is_dominated_examples():
    assert is_dominated(pair([1, 1, 0, 0], [1, 0, 0, 0]))
    assert not is_dominated(pair([1, 0], [0, 1]))
    assert is_dominated(pair([1, 0], [1, 0]))
    # hidden attributes are ignored
    assert is_dominated(pair([1, None, 0], [0, None, 0]))


def test_prune_alternating_design_to_sixty():
    d = alternating_design()
    pruned = prune_dominated(d)
    assert len(pruned) == 60
    assert pruned.ids == tuple(f"P{k:03d}" for k in range(2, 121, 2))
    assert prune_dominated(pruned) == pruned


def test_prune_no_dominated_is_identity_and_all_dominated_warns():
    d = full_design([([1, 0], [0, 1]), ([0, 1], [1, 0])])
    assert prune_dominated(d) == d
    with pytest.warns(EmptyDesignWarning):
        assert len(prune_dominated(full_design([([1, 1], [0, 0])]))) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_prune_idempotent(seed):
    rng = np.random.default_rng(seed)
    levels = [(list(rng.integers(0, 2, 3)), list(rng.integers(0, 2, 3))) for _ in range(8)]
    d = full_design(levels)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        once = prune_dominated(d)
        assert prune_dominated(once) == once


def test_block_design_examples():
    d = prune_dominated(alternating_design())
    blocks = block_design(d, 5, np.random.default_rng(0))
    assert blocks.sizes() == [12] * 5
    assert sorted(i for _, ids in blocks.blocks for i in ids) == sorted(d.ids)
    assert block_design(d, 1, np.random.default_rng(0)).blocks[0][1] == d.ids
    seven = d.with_pairs(d.pairs[:7])
    assert sorted(block_design(seven, 2, np.random.default_rng(0)).sizes()) == [3, 4]
    with pytest.raises(DomainError):
        block_design(d, 0, np.random.default_rng(0))
    assert block_design(d, 5, np.random.default_rng(3)) == block_design(d, 5, np.random.default_rng(3))


def test_block_design_balances_exposure():
    d = prune_dominated(alternating_design())
    blocks = block_design(d, 5, np.random.default_rng(0))
    masks = {pr.id: np.array(pr.active, dtype=int) for pr in d.pairs}
    exposure = np.array([sum(masks[i] for i in ids) for _, ids in blocks.blocks])
    # random assignment typically leaves spreads of 4+; greedy keeps it tight
    assert (exposure.max(0) - exposure.min(0)).max() <= 2


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 1000))
def test_block_sizes_property(n, k, seed):
    if k > n:
        return
    d = prune_dominated(alternating_design()).pairs[:n]
    design = Design(d, 4, MPI_CATALOG)
    blocks = block_design(design, k, np.random.default_rng(seed))
    sizes = blocks.sizes()
    assert max(sizes) - min(sizes) <= 1
    assert sorted(i for _, ids in blocks.blocks for i in ids) == sorted(design.ids)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_info_psd_and_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    spec = ModelSpec.with_all_interactions([0, 1, 2])
    levels = [(list(rng.integers(0, 2, 3)), list(rng.integers(0, 2, 3))) for _ in range(10)]
    d = full_design(levels)
    theta = rng.normal(size=spec.n_terms)
    m = information_matrix(d, theta, spec)
    assert np.linalg.eigvalsh(m).min() >= -1e-12
    perm = rng.permutation(10)
    shuffled = Design(tuple(ChoicePair(f"z{k}", d.pairs[i].a, d.pairs[i].b) for k, i in enumerate(perm)), 3, d.catalog)
    assert d_criterion(shuffled, theta, spec) == pytest.approx(d_criterion(d, theta, spec), rel=1e-12, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_dominance_links_to_probability_and_d(seed):
    rng = np.random.default_rng(seed)
    spec = ModelSpec.linear([0, 1, 2, 3])
    a = rng.integers(0, 2, 4)
    b = np.minimum(a, rng.integers(0, 2, 4))  # a dominates b
    pr = pair(list(a), list(b))
    assert is_dominated(pr)
    d = feature_difference(pr, spec)
    assert np.all(d >= 0) or np.all(d <= 0)
    theta = np.abs(rng.normal(size=4))
    assert choice_probability(pr, theta, spec) >= 0.5


def test_generator_output_is_valid_and_deterministic():
    spec = ModelSpec.with_all_interactions([0, 1, 2, 3])
    d1 = generate_design(5, 3, 20, spec, np.random.default_rng(4))
    d2 = generate_design(5, 3, 20, spec, np.random.default_rng(4))
    assert d1 == d2
    assert not any(is_dominated(pr) for pr in d1.pairs)
    assert all(pr.a.strength == 3 for pr in d1.pairs)
    with pytest.raises(DomainError):
        generate_design(3, 4, 5, ModelSpec.linear([0, 1, 2]), np.random.default_rng(0))
    with pytest.raises(DomainError):
        generate_design(3, 2, 0, ModelSpec.linear([0, 1, 2]), np.random.default_rng(0))


def test_generator_improves_on_random_start():
    spec = ModelSpec.with_all_interactions([0, 1, 2, 3])
    start = generate_design(6, 3, 24, spec, np.random.default_rng(9), iterations=0)
    tuned = generate_design(6, 3, 24, spec, np.random.default_rng(9), iterations=20)
    assert d_criterion(tuned, None, spec) >= d_criterion(start, None, spec)
    assert d_criterion(tuned, None, spec) > 0


def test_generator_full_scale_is_nonsingular_for_interaction_model():
    full = ModelSpec.with_all_interactions(range(11))
    d = generate_design(11, 4, 120, full, np.random.default_rng(0), iterations=5, catalog=MPI_CATALOG)
    assert len(d) == 120 and d.strength == 4
    m = information_matrix(d, None, mpi.interaction_spec())
    assert np.linalg.matrix_rank(m) == 36
    assert d_criterion(d, None, mpi.interaction_spec()) > 0
