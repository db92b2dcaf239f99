"""Design evaluation and construction for paired partial-profile experiments.

The local D-criterion is ``det(M / n) ** (1 / q)`` with the Fisher information
``M = sum_pairs p (1 - p) d d^T`` of the binary logit, ``d`` being the feature
difference of a pair. By default everything is evaluated at theta = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from .core import (
    Attribute,
    AttributeCatalog,
    ChoicePair,
    ModelSpec,
    Profile,
    difference_matrix,
    expand_levels,
)
from .errors import (
    AlignmentError,
    DomainError,
    EmptyDesignWarning,
    SpecificationError,
    UndefinedBenchmarkError,
)

# eigenvalues below this fraction of the largest are treated as zero
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class Design:
    pairs: tuple[ChoicePair, ...]
    strength: int
    catalog: AttributeCatalog

    def __post_init__(self):
        pairs = tuple(self.pairs)
        object.__setattr__(self, "pairs", pairs)
        ids = set()
        for pr in pairs:
            if pr.a.p != self.catalog.p:
                raise DomainError(f"pair {pr.id} has {pr.a.p} attributes, catalog has {self.catalog.p}")
            if pr.a.strength != self.strength:
                raise DomainError(f"pair {pr.id} shows {pr.a.strength} attributes, design strength is {self.strength}")
            if pr.id in ids:
                raise DomainError(f"duplicate pair id {pr.id!r}")
            ids.add(pr.id)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(pr.id for pr in self.pairs)

    def pair(self, pair_id: str) -> ChoicePair:
        for pr in self.pairs:
            if pr.id == pair_id:
                return pr
        raise KeyError(pair_id)

    def with_pairs(self, pairs: Sequence[ChoicePair]) -> "Design":
        return Design(tuple(pairs), self.strength, self.catalog)

    def with_blocks(self, blocked: "BlockedDesign") -> "Design":
        label = {pid: lab for lab, ids in blocked.blocks for pid in ids}
        return self.with_pairs([replace(pr, block=label[pr.id]) for pr in self.pairs])

    def blocks(self) -> "BlockedDesign | None":
        """Blocking recorded on the pairs, or None if no pair carries a block label."""
        if all(pr.block is None for pr in self.pairs):
            return None
        groups: dict[str, list[str]] = {}
        for pr in self.pairs:
            if pr.block is None:
                raise DomainError(f"pair {pr.id} has no block while others do")
            groups.setdefault(pr.block, []).append(pr.id)
        return BlockedDesign(tuple((lab, tuple(ids)) for lab, ids in groups.items()))


@dataclass(frozen=True)
class BlockedDesign:
    blocks: tuple[tuple[str, tuple[str, ...]], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.blocks)

    def sizes(self) -> list[int]:
        return [len(ids) for _, ids in self.blocks]

    def block_of(self) -> dict[str, str]:
        return {pid: lab for lab, ids in self.blocks for pid in ids}


def feature_difference(pair: ChoicePair, spec: ModelSpec) -> NDArray[np.float64]:
    return difference_matrix([pair], spec)[0]


def _weights(diff: NDArray[np.float64], theta) -> NDArray[np.float64]:
    if theta is None:
        return np.full(diff.shape[0], 0.25)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (diff.shape[1],):
        raise AlignmentError(f"theta has shape {theta.shape}, expected ({diff.shape[1]},)")
    p = expit(diff @ theta)
    return p * (1.0 - p)


def information_matrix(design: Design, theta, spec: ModelSpec) -> NDArray[np.float64]:
    """Fisher information of the design; ``theta=None`` means theta = 0."""
    if len(design) == 0:
        raise DomainError("information matrix of an empty design")
    spec.check(design.catalog.p)
    diff = difference_matrix(design.pairs, spec)
    w = _weights(diff, theta)
    m = (diff.T * w) @ diff
    return 0.5 * (m + m.T)


def _criterion_from_info(m: NDArray[np.float64], n: int) -> float:
    q = m.shape[0]
    eig = np.linalg.eigvalsh(m / n)
    top = max(eig.max(), 0.0)
    if top <= 0.0 or eig.min() <= _RANK_TOL * top:
        return 0.0
    return float(np.exp(np.sum(np.log(eig)) / q))


def d_criterion(design: Design, theta, spec: ModelSpec) -> float:
    """``det(M / n) ** (1/q)``, or 0 when the information matrix is singular."""
    if spec.n_terms == 0:
        raise SpecificationError("D-criterion of a model with no terms")
    return _criterion_from_info(information_matrix(design, theta, spec), len(design))


def relative_efficiency(design_a: Design, design_b: Design, theta, spec: ModelSpec) -> float:
    """Ratio of D-criteria; values above 1 mean ``design_a`` is more efficient."""
    db = d_criterion(design_b, theta, spec)
    if db == 0.0:
        raise UndefinedBenchmarkError("benchmark design has a singular information matrix")
    return d_criterion(design_a, theta, spec) / db


def is_dominated(pair: ChoicePair) -> bool:
    """True when one alternative is at least as good on every shown attribute.

    Identical alternatives count as dominated: they carry no information.
    """
    on = np.array(pair.active, dtype=bool)
    a = np.array(pair.a.levels)[on]
    b = np.array(pair.b.levels)[on]
    return bool(np.all(a >= b) or np.all(b >= a))


def prune_dominated(design: Design) -> Design:
    kept = [pr for pr in design.pairs if not is_dominated(pr)]
    if design.pairs and not kept:
        warnings.warn("every pair in the design is dominated", EmptyDesignWarning, stacklevel=2)
    return design.with_pairs(kept)


def block_design(design: Design, k: int, rng: np.random.Generator) -> BlockedDesign:
    """Split the design into ``k`` questionnaire blocks of near-equal size.

    Pairs are visited in a seeded random order and each goes to the open block
    where its shown attributes have appeared least so far, which keeps every
    attribute's exposure balanced across blocks.
    """
    n = len(design)
    if k <= 0:
        raise DomainError(f"number of blocks must be positive, got {k}")
    if k > n:
        raise DomainError(f"cannot split {n} pairs into {k} nonempty blocks")
    capacity = np.full(k, n // k)
    capacity[: n % k] += 1
    exposure = np.zeros((k, design.catalog.p))
    members: list[list[int]] = [[] for _ in range(k)]
    for idx in rng.permutation(n):
        mask = np.array(design.pairs[idx].active, dtype=float)
        open_ = np.flatnonzero(np.array([len(m) for m in members]) < capacity)
        # least added exposure, then fewest members, then lowest index
        cost = [(float(exposure[b] @ mask), len(members[b]), b) for b in open_]
        best = min(cost)[2]
        members[best].append(int(idx))
        exposure[best] += mask
    blocks = []
    for b, idxs in enumerate(members):
        ids = tuple(design.pairs[i].id for i in sorted(idxs))
        blocks.append((f"B{b + 1}", ids))
    return BlockedDesign(tuple(blocks))


# ---------------------------------------------------------------------------
# coordinate-exchange generator


def _generic_catalog(p: int) -> AttributeCatalog:
    return AttributeCatalog(tuple(Attribute(f"X{i + 1}", "Health") for i in range(p)))


def _dominated_levels(a: NDArray, b: NDArray, on: NDArray) -> bool:
    return bool(np.all(a[on] >= b[on]) or np.all(b[on] >= a[on]))


def _random_pair(p: int, t: int, rng: np.random.Generator):
    on = np.zeros(p, dtype=bool)
    on[rng.choice(p, size=t, replace=False)] = True
    while True:
        a = np.where(on, rng.integers(0, 2, size=p), 0)
        b = np.where(on, rng.integers(0, 2, size=p), 0)
        if not _dominated_levels(a, b, on):
            return on, a, b


def _objective(m: NDArray[np.float64]) -> tuple[int, float]:
    """(rank, log pseudo-determinant) for lexicographic comparison."""
    eig = np.linalg.eigvalsh(m)
    top = eig.max()
    if top <= 0:
        return 0, 0.0
    pos = eig[eig > _RANK_TOL * top]
    return len(pos), float(np.sum(np.log(pos)))


def _candidates(on: NDArray, a: NDArray, b: NDArray):
    """All single-coordinate changes of one pair that keep it non-dominated."""
    shown = np.flatnonzero(on)
    hidden = np.flatnonzero(~on)
    states = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for j in shown:
        for la, lb in states:
            if (la, lb) == (a[j], b[j]):
                continue
            na, nb = a.copy(), b.copy()
            na[j], nb[j] = la, lb
            if not _dominated_levels(na, nb, on):
                yield on, na, nb
    for j in shown:
        for k in hidden:
            non = on.copy()
            non[j], non[k] = False, True
            for la, lb in states:
                na, nb = a.copy(), b.copy()
                na[j] = nb[j] = 0
                na[k], nb[k] = la, lb
                if not _dominated_levels(na, nb, non):
                    yield non, na, nb


def _exchange_once(p, t, n, spec, rng, iterations, weight):
    on = np.zeros((n, p), dtype=bool)
    a = np.zeros((n, p), dtype=int)
    b = np.zeros((n, p), dtype=int)
    for i in range(n):
        on[i], a[i], b[i] = _random_pair(p, t, rng)
    diff = expand_levels(a, spec) - expand_levels(b, spec)
    m = weight * diff.T @ diff
    q = spec.n_terms
    for _ in range(iterations):
        changed = False
        for i in rng.permutation(n):
            rank, logdet = _objective(m)
            full = rank == q
            minv = np.linalg.inv(m) if full else None
            best = None
            d_old = diff[i]
            for c_on, c_a, c_b in _candidates(on[i], a[i], b[i]):
                d_new = (expand_levels(c_a[None, :], spec) - expand_levels(c_b[None, :], spec))[0]
                if full:
                    # rank-two determinant lemma
                    u = np.stack([d_new, d_old], axis=1)
                    v = weight * np.stack([d_new, -d_old], axis=1)
                    ratio = np.linalg.det(np.eye(2) + v.T @ minv @ u)
                    if ratio <= 0:
                        continue
                    score = (q, logdet + np.log(ratio))
                else:
                    m_new = m + weight * (np.outer(d_new, d_new) - np.outer(d_old, d_old))
                    score = _objective(m_new)
                if score[0] > rank or (score[0] == rank and score[1] > logdet + 1e-10):
                    if best is None or score[0] > best[0][0] or (score[0] == best[0][0] and score[1] > best[0][1]):
                        best = (score, c_on, c_a, c_b, d_new)
            if best is not None:
                _, on[i], a[i], b[i], d_new = best
                m = m + weight * (np.outer(d_new, d_new) - np.outer(d_old, d_old))
                diff[i] = d_new
                changed = True
        if not changed:
            break
    m = weight * diff.T @ diff
    return on, a, b, _criterion_from_info(m, n)


def generate_design(
    p: int,
    t: int,
    n: int,
    spec: ModelSpec,
    rng: np.random.Generator,
    iterations: int = 20,
    restarts: int = 1,
    catalog: AttributeCatalog | None = None,
) -> Design:
    """Search for a D-efficient design of ``n`` non-dominated pairs at theta = 0.

    Each restart starts from random valid pairs and runs coordinate-exchange
    passes (a coordinate is one attribute's levels within a pair, or which
    attributes a pair shows) until a pass changes nothing or ``iterations``
    passes are used. The best restart wins; ties go to the earliest.
    """
    if t > p or t < 1 or n < 1:
        raise DomainError(f"infeasible design request p={p}, t={t}, n={n}")
    if t < 2:
        raise DomainError("with one shown attribute every pair is dominated")
    if restarts < 1:
        raise DomainError("restarts must be at least 1")
    spec.check(p)
    if spec.n_terms == 0:
        raise SpecificationError("cannot optimise a design for a model with no terms")
    catalog = catalog or _generic_catalog(p)
    if catalog.p != p:
        raise DomainError(f"catalog has {catalog.p} attributes, p={p}")

    seeds = rng.spawn(restarts)
    best = None
    for r, sub in enumerate(seeds):
        result = _exchange_once(p, t, n, spec, sub, iterations, 0.25)
        if best is None or result[3] > best[3]:
            best = result
    on, a, b, _ = best
    width = len(str(n))
    pairs = [
        ChoicePair(
            f"P{i + 1:0{width}d}",
            Profile(tuple(int(x) for x in a[i]), tuple(bool(x) for x in on[i])),
            Profile(tuple(int(x) for x in b[i]), tuple(bool(x) for x in on[i])),
        )
        for i in range(n)
    ]
    return Design(tuple(pairs), t, catalog)
