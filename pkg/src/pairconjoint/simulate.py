"""Synthetic survey populations drawn from the random-utility model."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from .core import AttributeCatalog, ModelSpec, difference_matrix, sample_choice
from .dataset import Dataset, Observation
from .design import BlockedDesign, Design
from .errors import DomainError
from .segments import CELLS, Cell, Respondent


def _counts(cell_counts) -> list[tuple[Cell, int]]:
    if isinstance(cell_counts, Mapping):
        items = [(c, int(cell_counts.get(c, 0))) for c in CELLS]
    else:
        cell_counts = list(cell_counts)
        if len(cell_counts) != len(CELLS):
            raise DomainError(f"need {len(CELLS)} cell counts, got {len(cell_counts)}")
        items = list(zip(CELLS, (int(c) for c in cell_counts)))
    if any(n < 0 for _, n in items) or sum(n for _, n in items) == 0:
        raise DomainError("cell counts must be non-negative with a positive total")
    return items


def _respondents(cell_counts, rng) -> list[Respondent]:
    people = []
    for cell, count in _counts(cell_counts):
        for _ in range(count):
            age = int(rng.integers(18, 41)) if cell.age_side == "<=40" else int(rng.integers(41, 81))
            people.append(Respondent(f"R{len(people) + 1:04d}", cell.gender, age, cell.education))
    return people


def _blocks(design: Design, blocks: BlockedDesign | None) -> BlockedDesign:
    blocks = blocks or design.blocks() or BlockedDesign((("B1", design.ids),))
    ids = sorted(pid for _, members in blocks.blocks for pid in members)
    if ids != sorted(design.ids):
        raise DomainError("blocks must cover every design pair exactly once")
    return blocks


def simulate_population(
    catalog: AttributeCatalog,
    design: Design,
    blocks: BlockedDesign | None,
    theta,
    spec: ModelSpec,
    cell_counts: Mapping[Cell, int] | Sequence[int],
    seed: int,
) -> Dataset:
    """Respondents per cell, blocks assigned round-robin, answers via Gumbel draws."""
    rng = np.random.default_rng(seed)
    blocks = _blocks(design, blocks)
    people = _respondents(cell_counts, rng)
    observations = []
    for k, person in enumerate(people):
        _, members = blocks.blocks[k % len(blocks.blocks)]
        for pid in members:
            choice = sample_choice(design.pair(pid), theta, spec, rng)
            observations.append(Observation(person.id, pid, choice))
    return Dataset(catalog, design, tuple(people), tuple(observations), blocks)


def expected_population(
    catalog: AttributeCatalog,
    design: Design,
    blocks: BlockedDesign | None,
    theta,
    spec: ModelSpec,
    cell_counts: Mapping[Cell, int] | Sequence[int],
    seed: int,
) -> Dataset:
    """Like :func:`simulate_population` but with no sampling noise in the answers.

    Each pair is answered A by ``round(n * P(A))`` of its ``n`` respondents, so
    fitted coefficients land close to ``theta`` and zero effects come out with
    near-zero z. Only the ages are random.
    """
    rng = np.random.default_rng(seed)
    blocks = _blocks(design, blocks)
    people = _respondents(cell_counts, rng)
    answering: dict[str, list[str]] = {pid: [] for pid in design.ids}
    for k, person in enumerate(people):
        _, members = blocks.blocks[k % len(blocks.blocks)]
        for pid in members:
            answering[pid].append(person.id)
    prob = expit(difference_matrix(design.pairs, spec) @ np.asarray(theta, dtype=float))
    choice_of: dict[tuple[str, str], str] = {}
    for pid, pr in zip(design.ids, prob):
        who = answering[pid]
        n_a = int(round(len(who) * pr))
        for i, rid in enumerate(who):
            choice_of[(rid, pid)] = "A" if i < n_a else "B"
    observations = []
    for k, person in enumerate(people):
        _, members = blocks.blocks[k % len(blocks.blocks)]
        observations.extend(Observation(person.id, pid, choice_of[(person.id, pid)]) for pid in members)
    return Dataset(catalog, design, tuple(people), tuple(observations), blocks)
