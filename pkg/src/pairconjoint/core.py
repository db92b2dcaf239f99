"""Random-utility model for paired partial-profile choices.

Utility of a profile is linear in main effects and two-factor interactions of
dummy-coded attributes. Attributes that are not shown in a pair sit at the
reference level 0 in both alternatives, so they never enter a feature
difference. With i.i.d. Gumbel noise, the probability of choosing ``a`` over
``b`` is the logistic function of ``v_a - v_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Literal, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit, log_expit

from .errors import AlignmentError, DomainError, SpecificationError

Choice = Literal["A", "B"]
HEADS = ("Health", "Education", "StandardOfLiving")


@dataclass(frozen=True)
class Attribute:
    code: str
    head: str
    label: str = ""


@dataclass(frozen=True)
class AttributeCatalog:
    """Ordered two-level attributes with their dimension heads."""

    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        if len(attrs) < 2:
            raise SpecificationError("a catalog needs at least two attributes")
        codes = [a.code for a in attrs]
        if any(not c for c in codes):
            raise SpecificationError("attribute codes must be nonempty")
        if len(set(codes)) != len(codes):
            raise SpecificationError(f"duplicate attribute codes in {codes}")
        for a in attrs:
            if a.head not in HEADS:
                raise SpecificationError(f"attribute {a.code}: unknown head {a.head!r}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "AttributeCatalog":
        return cls(tuple(Attribute(code, head) for code, head in pairs))

    @property
    def p(self) -> int:
        return len(self.attributes)

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(a.code for a in self.attributes)

    def index(self, code: str) -> int:
        try:
            return self.codes.index(code)
        except ValueError:
            raise SpecificationError(f"unknown attribute code {code!r}") from None

    def head(self, idx: int) -> str:
        return self.attributes[idx].head


MPI_CATALOG = AttributeCatalog(
    (
        Attribute("N", "Health", "Nutrition"),
        Attribute("CAM", "Health", "Child and Adolescent Mortality"),
        Attribute("YS", "Education", "Years of Schooling"),
        Attribute("SA", "Education", "School Attendance"),
        Attribute("CF", "StandardOfLiving", "Cooking Fuel"),
        Attribute("H", "StandardOfLiving", "Housing"),
        Attribute("S", "StandardOfLiving", "Sanitation"),
        Attribute("MH", "Health", "Maternal Health"),
        Attribute("A", "StandardOfLiving", "Assets"),
        Attribute("DW", "StandardOfLiving", "Drinking Water"),
        Attribute("E", "StandardOfLiving", "Electricity"),
    )
)


@dataclass(frozen=True)
class Profile:
    """One alternative: 0/1 levels plus the mask of attributes actually shown."""

    levels: tuple[int, ...]
    active: tuple[bool, ...]

    def __post_init__(self):
        levels = tuple(int(v) for v in self.levels)
        active = tuple(bool(v) for v in self.active)
        if len(levels) != len(active):
            raise DomainError("levels and active mask differ in length")
        for i, (lv, on) in enumerate(zip(levels, active)):
            if lv not in (0, 1):
                raise DomainError(f"level {lv!r} at position {i} is not binary")
            if lv and not on:
                raise DomainError(f"inactive position {i} must carry level 0")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "active", active)

    @classmethod
    def full(cls, levels: Sequence[int]) -> "Profile":
        return cls(tuple(levels), (True,) * len(levels))

    @property
    def p(self) -> int:
        return len(self.levels)

    @property
    def strength(self) -> int:
        return sum(self.active)


@dataclass(frozen=True)
class ChoicePair:
    id: str
    a: Profile
    b: Profile
    block: str | None = None

    def __post_init__(self):
        if self.a.active != self.b.active:
            raise DomainError(f"pair {self.id}: alternatives show different attributes")

    @classmethod
    def from_levels(
        cls,
        a: Sequence[int | None],
        b: Sequence[int | None],
        id: str = "",
        block: str | None = None,
    ) -> "ChoicePair":
        """Build a pair from level lists where ``None`` marks a hidden attribute."""
        active = tuple(x is not None for x in a)
        if active != tuple(x is not None for x in b):
            raise DomainError(f"pair {id}: alternatives show different attributes")
        return cls(
            id,
            Profile(tuple(x or 0 for x in a), active),
            Profile(tuple(x or 0 for x in b), active),
            block,
        )

    @property
    def active(self) -> tuple[bool, ...]:
        return self.a.active

    def swapped(self) -> "ChoicePair":
        return ChoicePair(self.id, self.b, self.a, self.block)


@dataclass(frozen=True)
class ModelSpec:
    """Which main effects and two-factor interactions are in the model.

    Terms are ordered with mains in catalog order, then interactions in
    lexicographic order of their index pairs.
    """

    mains: tuple[int, ...]
    interactions: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        mains = tuple(sorted(set(int(m) for m in self.mains)))
        inter = set()
        for pair in self.interactions:
            i, j = (int(x) for x in pair)
            if i == j:
                raise SpecificationError(f"interaction of attribute {i} with itself")
            inter.add((min(i, j), max(i, j)))
        inter = tuple(sorted(inter))
        if any(m < 0 for m in mains):
            raise SpecificationError("negative attribute index")
        for i, j in inter:
            if i not in mains or j not in mains:
                raise SpecificationError(f"interaction ({i}, {j}) uses an attribute not in mains")
        object.__setattr__(self, "mains", mains)
        object.__setattr__(self, "interactions", inter)

    @classmethod
    def linear(cls, mains: Iterable[int]) -> "ModelSpec":
        return cls(tuple(mains))

    @classmethod
    def with_all_interactions(cls, mains: Iterable[int]) -> "ModelSpec":
        mains = tuple(sorted(set(mains)))
        return cls(mains, tuple(combinations(mains, 2)))

    @property
    def n_terms(self) -> int:
        return len(self.mains) + len(self.interactions)

    def check(self, p: int) -> None:
        top = max(self.mains, default=-1)
        if top >= p:
            raise SpecificationError(f"spec references attribute {top} but only {p} exist")

    def term_names(self, catalog: AttributeCatalog) -> list[str]:
        self.check(catalog.p)
        codes = catalog.codes
        return [codes[m] for m in self.mains] + [f"{codes[i]}*{codes[j]}" for i, j in self.interactions]

    @classmethod
    def from_term_names(cls, names: Iterable[str], catalog: AttributeCatalog) -> "ModelSpec":
        mains, inter = [], []
        for name in names:
            parts = name.split("*")
            if len(parts) == 1:
                mains.append(catalog.index(parts[0]))
            elif len(parts) == 2:
                inter.append((catalog.index(parts[0]), catalog.index(parts[1])))
            else:
                raise SpecificationError(f"only two-factor interactions are supported: {name!r}")
        return cls(tuple(mains), tuple(inter))


def level_matrix(profiles: Sequence[Profile]) -> NDArray[np.float64]:
    """Effective levels (hidden attributes forced to 0), one row per profile."""
    lv = np.array([p.levels for p in profiles], dtype=float)
    on = np.array([p.active for p in profiles], dtype=bool)
    return np.where(on, lv, 0.0)


def expand_levels(x: NDArray[np.float64], spec: ModelSpec) -> NDArray[np.float64]:
    """Vectorised feature expansion of an (n, p) level matrix to (n, q)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    spec.check(x.shape[1])
    cols = [x[:, list(spec.mains)]]
    if spec.interactions:
        i, j = np.array(spec.interactions).T
        cols.append(x[:, i] * x[:, j])
    return np.hstack(cols)


def expand_features(profile: Profile, spec: ModelSpec) -> NDArray[np.float64]:
    return expand_levels(level_matrix([profile]), spec)[0]


def _aligned(theta, spec: ModelSpec) -> NDArray[np.float64]:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != spec.n_terms:
        raise AlignmentError(f"theta has {theta.shape[0]} entries, spec has {spec.n_terms} terms")
    return theta


def utility(profile: Profile, theta, spec: ModelSpec) -> float:
    return float(expand_features(profile, spec) @ _aligned(theta, spec))


def difference_matrix(pairs: Sequence[ChoicePair], spec: ModelSpec) -> NDArray[np.float64]:
    """Rows ``expand(a) - expand(b)`` for each pair."""
    if not pairs:
        return np.zeros((0, spec.n_terms))
    xa = level_matrix([pr.a for pr in pairs])
    xb = level_matrix([pr.b for pr in pairs])
    return expand_levels(xa, spec) - expand_levels(xb, spec)


def choice_probability(pair: ChoicePair, theta, spec: ModelSpec) -> float:
    """P(a is chosen) = 1 / (1 + exp(v_b - v_a))."""
    d = difference_matrix([pair], spec)[0]
    return float(expit(d @ _aligned(theta, spec)))


# Count-based calculus. Row k of ``diff`` was shown ``total[k]`` times and
# ``a`` was chosen ``n_a[k]`` of them; a single record is total=1.


def loglik_counts(diff, n_a, total, theta) -> float:
    u = diff @ theta
    return float(n_a @ log_expit(u) + (total - n_a) @ log_expit(-u))


def score_hessian_counts(diff, n_a, total, theta) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    p = expit(diff @ theta)
    grad = diff.T @ (n_a - total * p)
    w = total * p * (1.0 - p)
    hess = -(diff.T * w) @ diff
    return grad, 0.5 * (hess + hess.T)


def _records_to_arrays(data, spec: ModelSpec):
    data = list(data)
    if not data:
        raise DomainError("no observations")
    pairs = [pair for pair, _ in data]
    y = np.array([_is_a(c) for _, c in data], dtype=float)
    return difference_matrix(pairs, spec), y, np.ones_like(y)


def _is_a(choice) -> bool:
    if choice in ("A", "a", 1, True):
        return True
    if choice in ("B", "b", 0, False):
        return False
    raise DomainError(f"choice must be 'A' or 'B', got {choice!r}")


def log_likelihood(data: Sequence[tuple[ChoicePair, Choice]], theta, spec: ModelSpec) -> float:
    diff, y, tot = _records_to_arrays(data, spec)
    return loglik_counts(diff, y, tot, _aligned(theta, spec))


def score_and_hessian(data: Sequence[tuple[ChoicePair, Choice]], theta, spec: ModelSpec):
    """Gradient ``sum (y - p) d`` and Hessian ``-sum p (1 - p) d d^T``."""
    diff, y, tot = _records_to_arrays(data, spec)
    return score_hessian_counts(diff, y, tot, _aligned(theta, spec))


def sample_choice(pair: ChoicePair, theta, spec: ModelSpec, rng: np.random.Generator) -> Choice:
    """Draw one answer as the argmax of utility plus Gumbel noise (ties go to A)."""
    d = difference_matrix([pair], spec)[0]
    eps_a, eps_b = rng.gumbel(size=2)
    return "A" if d @ _aligned(theta, spec) + eps_a >= eps_b else "B"


def sample_choices(pair: ChoicePair, theta, spec: ModelSpec, rng: np.random.Generator, size: int) -> NDArray[np.bool_]:
    """Vectorised :func:`sample_choice`; True where A is chosen.

    Consumes the generator exactly as ``size`` sequential calls would.
    """
    d = difference_matrix([pair], spec)[0]
    eps = rng.gumbel(size=(size, 2))
    return d @ _aligned(theta, spec) + eps[:, 0] >= eps[:, 1]
