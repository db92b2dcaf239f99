"""Survey datasets and their tab-separated file formats.

Every file starts with a format line ``# pairconjoint <kind> v1``. Other lines
starting with ``#`` are comments, except ``# attribute`` lines in a design
file, which declare the catalog (code, head, optional label).

design.tsv     id, block, A_<code>..., B_<code>...; levels 0/1, ``·`` = not shown
respondents.tsv id, gender (F/M), age, education (Below10/TenthPassOrMore)
choices.tsv    respondent, pair, choice (A/B)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import MPI_CATALOG, Attribute, AttributeCatalog, ChoicePair, ModelSpec, Profile, difference_matrix
from .design import BlockedDesign, Design
from .errors import DomainError, LoadError, ParseError
from .segments import CELLS, Cell, Respondent, cell_of

FORMAT_VERSION = "v1"
INACTIVE = "·"
_INACTIVE_INPUT = {INACTIVE, "."}


class Observation(NamedTuple):
    respondent: str
    pair: str
    choice: str


@dataclass(frozen=True)
class Dataset:
    """Design plus respondents and their answers, with referential integrity checked."""

    catalog: AttributeCatalog
    design: Design
    respondents: tuple[Respondent, ...]
    observations: tuple[Observation, ...]
    blocks: BlockedDesign | None = None

    def __post_init__(self):
        object.__setattr__(self, "respondents", tuple(self.respondents))
        object.__setattr__(self, "observations", tuple(Observation(*o) for o in self.observations))
        if self.blocks is None:
            object.__setattr__(self, "blocks", self.design.blocks())
        if self.design.catalog != self.catalog:
            raise LoadError("design and dataset use different attribute catalogs")
        rids = set()
        for r in self.respondents:
            if r.id in rids:
                raise LoadError(f"duplicate respondent id {r.id!r}")
            rids.add(r.id)
        pids = set(self.design.ids)
        block_of = self.blocks.block_of() if self.blocks is not None else {}
        seen: set[tuple[str, str]] = set()
        resp_block: dict[str, str] = {}
        for o in self.observations:
            if o.respondent not in rids:
                raise LoadError(f"choice references unknown respondent {o.respondent!r}")
            if o.pair not in pids:
                raise LoadError(f"choice references unknown pair {o.pair!r}")
            if o.choice not in ("A", "B"):
                raise LoadError(f"choice of {o.respondent!r} on {o.pair!r} must be A or B, got {o.choice!r}")
            if (o.respondent, o.pair) in seen:
                raise LoadError(f"duplicate answer by {o.respondent!r} to pair {o.pair!r}")
            seen.add((o.respondent, o.pair))
            if block_of:
                blk = block_of[o.pair]
                if resp_block.setdefault(o.respondent, blk) != blk:
                    raise LoadError(f"respondent {o.respondent!r} answered pairs from several blocks")

    def records(self) -> list[tuple[ChoicePair, str]]:
        pairs = {pr.id: pr for pr in self.design.pairs}
        return [(pairs[o.pair], o.choice) for o in self.observations]

    def tally(self, spec: ModelSpec):
        """``(diff, n_a, total)`` per design pair, in design order."""
        if not self.observations:
            raise DomainError("no observations")
        index = {pid: k for k, pid in enumerate(self.design.ids)}
        n_a = np.zeros(len(index))
        total = np.zeros(len(index))
        for o in self.observations:
            k = index[o.pair]
            total[k] += 1
            n_a[k] += o.choice == "A"
        return difference_matrix(self.design.pairs, spec), n_a, total

    def subset(self, respondent_ids: Iterable[str]) -> "Dataset":
        keep = set(respondent_ids)
        return Dataset(
            self.catalog,
            self.design,
            tuple(r for r in self.respondents if r.id in keep),
            tuple(o for o in self.observations if o.respondent in keep),
            self.blocks,
        )

    def cell_members(self) -> dict[Cell, list[int]]:
        """Respondent positions per demographic cell, all eight cells present."""
        members: dict[Cell, list[int]] = {c: [] for c in CELLS}
        for k, r in enumerate(self.respondents):
            members[cell_of(r)].append(k)
        return members

    def response_matrices(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """``(chose_a, shown)``, each respondents x design pairs."""
        rindex = {r.id: k for k, r in enumerate(self.respondents)}
        pindex = {pid: k for k, pid in enumerate(self.design.ids)}
        chose_a = np.zeros((len(rindex), len(pindex)))
        shown = np.zeros_like(chose_a)
        for o in self.observations:
            i, j = rindex[o.respondent], pindex[o.pair]
            shown[i, j] = 1.0
            chose_a[i, j] = o.choice == "A"
        return chose_a, shown


# ---------------------------------------------------------------------------
# file io


def _format_line(kind: str) -> str:
    return f"# pairconjoint {kind} {FORMAT_VERSION}"


def _read_table(path, kind: str) -> tuple[list[str], list[list[str]], list[list[str]]]:
    """Return (header, data rows, attribute directive rows)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise ParseError(f"{path} is empty")
    if lines[0].strip() != _format_line(kind):
        raise ParseError(f"{path}: first line must be {_format_line(kind)!r}")
    directives, body = [], []
    for line in lines[1:]:
        if line.startswith("#"):
            parts = line[1:].strip().split("\t")
            if parts and parts[0] == "attribute":
                directives.append(parts[1:])
            continue
        if line.strip():
            body.append(line)
    rows = list(csv.reader(body, delimiter="\t"))
    if not rows:
        raise ParseError(f"{path} has no header row")
    return rows[0], rows[1:], directives


def _write_table(path, kind: str, header: Sequence[str], rows: Iterable[Sequence], preamble: Sequence[str] = ()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(_format_line(kind) + "\n")
        for line in preamble:
            fh.write(line + "\n")
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _catalog_from(codes: list[str], directives: list[list[str]], catalog: AttributeCatalog | None) -> AttributeCatalog:
    if catalog is not None:
        if list(catalog.codes) != codes:
            raise ParseError(f"design columns {codes} do not match catalog {list(catalog.codes)}")
        return catalog
    if directives:
        attrs = []
        for d in directives:
            if len(d) < 2:
                raise ParseError(f"attribute line needs code and head: {d}")
            attrs.append(Attribute(d[0], d[1], d[2] if len(d) > 2 else ""))
        try:
            cat = AttributeCatalog(tuple(attrs))
        except Exception as exc:
            raise ParseError(str(exc)) from None
        if list(cat.codes) != codes:
            raise ParseError(f"attribute lines {list(cat.codes)} do not match design columns {codes}")
        return cat
    known = {a.code: a for a in MPI_CATALOG.attributes}
    missing = [c for c in codes if c not in known]
    if missing:
        raise ParseError(f"no '# attribute' lines and unknown codes {missing}")
    return AttributeCatalog(tuple(known[c] for c in codes))


def load_design(path, catalog: AttributeCatalog | None = None) -> Design:
    header, rows, directives = _read_table(path, "design")
    if len(header) < 4 or header[:2] != ["id", "block"] or (len(header) - 2) % 2:
        raise ParseError("design header must be: id, block, A_<code>..., B_<code>...")
    p = (len(header) - 2) // 2
    a_cols, b_cols = header[2 : 2 + p], header[2 + p :]
    if not all(c.startswith("A_") for c in a_cols) or not all(c.startswith("B_") for c in b_cols):
        raise ParseError("design header must list all A_ columns, then all B_ columns")
    codes = [c[2:] for c in a_cols]
    if codes != [c[2:] for c in b_cols]:
        raise ParseError("A_ and B_ columns name different attributes")
    cat = _catalog_from(codes, directives, catalog)

    pairs = []
    strength = None
    for n, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", row=n)
        pid, block = row[0], row[1] or None
        levels = []
        for cell in row[2:]:
            cell = cell.strip()
            if cell in _INACTIVE_INPUT:
                levels.append(None)
            elif cell in ("0", "1"):
                levels.append(int(cell))
            else:
                raise ParseError(f"level {cell!r} is not 0, 1 or {INACTIVE}", row=n)
        a, b = levels[:p], levels[p:]
        if [x is None for x in a] != [x is None for x in b]:
            raise ParseError("A and B show different attributes", row=n)
        t = sum(x is not None for x in a)
        if strength is None:
            strength = t
        elif t != strength:
            raise ParseError(f"pair shows {t} attributes, earlier pairs show {strength}", row=n)
        pairs.append(ChoicePair.from_levels(a, b, pid, block))
    if not pairs:
        raise ParseError("design has no pairs")
    try:
        return Design(tuple(pairs), strength, cat)
    except DomainError as exc:
        raise ParseError(str(exc)) from None


def save_design(design: Design, path) -> None:
    codes = design.catalog.codes
    header = ["id", "block"] + [f"A_{c}" for c in codes] + [f"B_{c}" for c in codes]
    pre = [f"# attribute\t{a.code}\t{a.head}\t{a.label}" for a in design.catalog.attributes]

    def cells(profile: Profile):
        return [str(lv) if on else INACTIVE for lv, on in zip(profile.levels, profile.active)]

    rows = [[pr.id, pr.block or ""] + cells(pr.a) + cells(pr.b) for pr in design.pairs]
    _write_table(path, "design", header, rows, pre)


def load_respondents(path) -> list[Respondent]:
    header, rows, _ = _read_table(path, "respondents")
    if header != ["id", "gender", "age", "education"]:
        raise ParseError("respondents header must be: id, gender, age, education")
    out, seen = [], set()
    for n, row in enumerate(rows, start=1):
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, found {len(row)}", row=n)
        try:
            r = Respondent(row[0], row[1], int(row[2]), row[3])
        except (ValueError, DomainError) as exc:
            raise ParseError(str(exc), row=n) from None
        if r.id in seen:
            raise LoadError(f"duplicate respondent id {r.id!r}")
        seen.add(r.id)
        out.append(r)
    return out


def save_respondents(respondents: Sequence[Respondent], path) -> None:
    rows = [[r.id, r.gender, r.age, r.education] for r in respondents]
    _write_table(path, "respondents", ["id", "gender", "age", "education"], rows)


def load_choices(path) -> list[Observation]:
    header, rows, _ = _read_table(path, "choices")
    if header != ["respondent", "pair", "choice"]:
        raise ParseError("choices header must be: respondent, pair, choice")
    out = []
    for n, row in enumerate(rows, start=1):
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, found {len(row)}", row=n)
        if row[2] not in ("A", "B"):
            raise ParseError(f"choice must be A or B, got {row[2]!r}", row=n)
        out.append(Observation(*row))
    return out


def save_choices(observations: Sequence[Observation], path) -> None:
    _write_table(path, "choices", ["respondent", "pair", "choice"], [list(o) for o in observations])


def load_dataset(design_path, respondents_path, choices_path, catalog: AttributeCatalog | None = None) -> Dataset:
    design = load_design(design_path, catalog)
    return Dataset(design.catalog, design, tuple(load_respondents(respondents_path)), tuple(load_choices(choices_path)))


def save_dataset(dataset: Dataset, directory) -> dict[str, Path]:
    directory = Path(directory)
    paths = {
        "design": directory / "design.tsv",
        "respondents": directory / "respondents.tsv",
        "choices": directory / "choices.tsv",
    }
    design = dataset.design if dataset.blocks is None else dataset.design.with_blocks(dataset.blocks)
    save_design(design, paths["design"])
    save_respondents(dataset.respondents, paths["respondents"])
    save_choices(dataset.observations, paths["choices"])
    return paths
