"""Respondent demographics, the eight gender x age x education cells, and subgroup filters."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .errors import DomainError, EmptySegmentWarning, ParseError
from .estimator import PipelineResult, run_pipeline

GENDERS = ("F", "M")
EDUCATIONS = ("Below10", "TenthPassOrMore")
AGE_SIDES = ("<=40", ">40")
AGE_BOUNDARY = 40
_AGE_ALIASES = {"le40": "<=40", "gt40": ">40"}


@dataclass(frozen=True)
class Respondent:
    id: str
    gender: str
    age: int
    education: str

    def __post_init__(self):
        if not self.id:
            raise DomainError("respondent id must be nonempty")
        if self.gender not in GENDERS:
            raise DomainError(f"respondent {self.id}: gender must be one of {GENDERS}")
        if self.education not in EDUCATIONS:
            raise DomainError(f"respondent {self.id}: education must be one of {EDUCATIONS}")
        if int(self.age) != self.age or self.age <= 0:
            raise DomainError(f"respondent {self.id}: age must be a positive integer")


class Cell(NamedTuple):
    gender: str
    age_side: str
    education: str


def age_side(age: int) -> str:
    # 40 itself falls on the young side
    return AGE_SIDES[0] if age <= AGE_BOUNDARY else AGE_SIDES[1]


def cell_of(respondent: Respondent) -> Cell:
    return Cell(respondent.gender, age_side(respondent.age), respondent.education)


CELLS: tuple[Cell, ...] = tuple(Cell(g, a, e) for g in GENDERS for a in AGE_SIDES for e in EDUCATIONS)

# respondents per cell in the MPI survey, in CELLS order
SURVEY_CELL_COUNTS: dict[Cell, int] = dict(zip(CELLS, (17, 50, 20, 24, 17, 67, 18, 58)))


@dataclass(frozen=True)
class SegmentFilter:
    gender: str | None = None
    age_side: str | None = None
    education: str | None = None

    def __post_init__(self):
        if self.gender is not None and self.gender not in GENDERS:
            raise DomainError(f"unknown gender {self.gender!r}")
        if self.age_side is not None and self.age_side not in AGE_SIDES:
            raise DomainError(f"unknown age side {self.age_side!r}")
        if self.education is not None and self.education not in EDUCATIONS:
            raise DomainError(f"unknown education level {self.education!r}")

    def matches(self, respondent: Respondent) -> bool:
        cell = cell_of(respondent)
        return (
            (self.gender is None or cell.gender == self.gender)
            and (self.age_side is None or cell.age_side == self.age_side)
            and (self.education is None or cell.education == self.education)
        )

    @property
    def is_empty(self) -> bool:
        return self.gender is None and self.age_side is None and self.education is None

    def label(self) -> str:
        parts = [f"{k}={v}" for k, v in (("gender", self.gender), ("age", self.age_side), ("edu", self.education)) if v]
        return ",".join(parts) or "all"

    @classmethod
    def parse(cls, text: str) -> "SegmentFilter":
        """Parse ``gender=F,age=<=40,edu=Below10``; any field may be omitted."""
        fields: dict[str, str] = {}
        keys = {"gender": "gender", "age": "age_side", "edu": "education", "education": "education"}
        for part in filter(None, (s.strip() for s in text.split(","))):
            key, sep, value = part.partition("=")
            key = key.strip()
            if not sep or key not in keys:
                raise ParseError(f"bad segment field {part!r}; expected gender=, age= or edu=")
            value = value.strip()
            if keys[key] == "age_side":
                value = _AGE_ALIASES.get(value, value)
            fields[keys[key]] = value
        try:
            return cls(**fields)
        except DomainError as exc:
            raise ParseError(str(exc)) from None


def filter_dataset(dataset, segment: SegmentFilter):
    """Keep respondents matching every set field, together with their answers."""
    if segment.is_empty:
        return dataset
    keep = [r.id for r in dataset.respondents if segment.matches(r)]
    if not keep:
        warnings.warn(f"segment {segment.label()} matched no respondents", EmptySegmentWarning, stacklevel=2)
    return dataset.subset(keep)


def run_segment_pipeline(dataset, segment: SegmentFilter, alpha: float = 0.05, settings=None) -> PipelineResult:
    sub = filter_dataset(dataset, segment)
    if not sub.observations:
        raise DomainError(f"segment {segment.label()} has no observations")
    return run_pipeline(sub, sub.catalog, alpha, settings)
