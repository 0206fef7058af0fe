"""Partial MaxSAT formulas in the classic DIMACS WCNF dialect.

Only unit-weight soft clauses are accepted; a clause whose weight equals the
header's ``top`` value is hard. Clause ids are dense indices in file order and
are shared between the hard and the soft set.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

logger = logging.getLogger(__name__)


class WcnfParseError(ValueError):
    """Raised for malformed or unsupported WCNF input."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class Clause:
    id: int
    lits: tuple[int, ...]
    soft: bool = False

    def __len__(self) -> int:
        return len(self.lits)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(abs(l) for l in self.lits)

    @property
    def is_tautology(self) -> bool:
        s = set(self.lits)
        return any(-l in s for l in s)

    def satisfied_by(self, model: Sequence[bool]) -> bool:
        """``model[v - 1]`` is the truth value of variable ``v``."""
        return any(model[abs(l) - 1] == (l > 0) for l in self.lits)


@dataclass(frozen=True)
class WcnfFormula:
    num_vars: int
    hard: tuple[Clause, ...]
    soft: tuple[Clause, ...]
    top: int
    # tautological soft clauses dropped by normalize(); they always cost 0
    tautologies: int = field(default=0, compare=False)

    @property
    def clauses(self) -> list[Clause]:
        return sorted(self.hard + self.soft, key=lambda c: c.id)

    @property
    def num_clauses(self) -> int:
        return len(self.hard) + len(self.soft)

    def cost(self, model: Sequence[bool]) -> int:
        """Number of soft clauses falsified by ``model``."""
        return sum(not c.satisfied_by(model) for c in self.soft)

    def hard_satisfied(self, model: Sequence[bool]) -> bool:
        return all(c.satisfied_by(model) for c in self.hard)


Source = Union[str, bytes, Path, IO[str], IO[bytes]]


def _read_text(source: Source) -> str:
    if isinstance(source, Path):
        return source.read_text()
    if isinstance(source, bytes):
        return source.decode()
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode() if isinstance(data, bytes) else data


def parse_wcnf(source: Source) -> WcnfFormula:
    """Parse classic-format WCNF text (``p wcnf <vars> <clauses> <top>``).

    ``source`` may be WCNF text (``str``/``bytes``), a ``Path`` or an open
    file. Declared counts are advisory: a mismatch is logged, not raised.
    """
    text = _read_text(source)
    header: tuple[int, int, int] | None = None
    hard: list[Clause] = []
    soft: list[Clause] = []
    next_id = 0
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise WcnfParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 5 or parts[1] != "wcnf":
                raise WcnfParseError(f"expected 'p wcnf <vars> <clauses> <top>', got {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]), int(parts[4]))
            except ValueError:
                raise WcnfParseError(f"non-integer header field in {line!r}", lineno) from None
            continue
        if header is None:
            raise WcnfParseError("clause before 'p wcnf' header", lineno)
        num_vars, _, top = header
        try:
            tokens = [int(t) for t in line.split()]
        except ValueError:
            raise WcnfParseError(f"non-integer token in {line!r}", lineno) from None
        if len(tokens) < 2 or tokens[-1] != 0:
            raise WcnfParseError("truncated clause (missing terminating 0)", lineno)
        weight, lits = tokens[0], tuple(tokens[1:-1])
        if 0 in lits:
            raise WcnfParseError("literal 0 inside clause", lineno)
        for l in lits:
            if abs(l) > num_vars:
                raise WcnfParseError(f"literal {l} out of range (num_vars={num_vars})", lineno)
        if weight == top:
            hard.append(Clause(next_id, lits, soft=False))
        elif weight == 1:
            soft.append(Clause(next_id, lits, soft=True))
        else:
            raise WcnfParseError(f"unsupported soft weight {weight}", lineno)
        next_id += 1
    if header is None:
        raise WcnfParseError("missing 'p wcnf' header")
    num_vars, declared, top = header
    if declared != next_id:
        logger.warning("header declares %d clauses, found %d", declared, next_id)
    return WcnfFormula(num_vars, tuple(hard), tuple(soft), top)


def read_wcnf(path: str | Path) -> WcnfFormula:
    if str(path) == "-":
        import sys

        return parse_wcnf(sys.stdin)
    return parse_wcnf(Path(path))


def normalize(formula: WcnfFormula) -> WcnfFormula:
    """Drop duplicate literals and tautologies; renumber ids densely.

    Literal order within a clause is kept (first occurrence wins). Dropped
    tautological soft clauses are counted in ``tautologies``.
    """
    hard: list[Clause] = []
    soft: list[Clause] = []
    tautologies = formula.tautologies
    next_id = 0
    for c in formula.clauses:
        if c.is_tautology:
            tautologies += c.soft
            continue
        lits = tuple(dict.fromkeys(c.lits))
        (soft if c.soft else hard).append(Clause(next_id, lits, c.soft))
        next_id += 1
    return WcnfFormula(formula.num_vars, tuple(hard), tuple(soft), formula.top, tautologies)


def dump_wcnf(formula: WcnfFormula) -> str:
    """Serialize to the classic dialect, clauses in id order."""
    out = [f"p wcnf {formula.num_vars} {formula.num_clauses} {formula.top}"]
    for c in formula.clauses:
        weight = 1 if c.soft else formula.top
        out.append(" ".join(map(str, (weight, *c.lits, 0))))
    return "\n".join(out) + "\n"


def make_formula(
    hard: Iterable[Sequence[int]],
    soft: Iterable[Sequence[int]],
    num_vars: int | None = None,
    top: int | None = None,
) -> WcnfFormula:
    """Build a formula from literal lists; hard clauses get the lower ids."""
    hard = [tuple(c) for c in hard]
    soft = [tuple(c) for c in soft]
    if num_vars is None:
        num_vars = max((abs(l) for c in hard + soft for l in c), default=0)
    if top is None:
        top = len(soft) + 1
    clauses_h = tuple(Clause(i, c, False) for i, c in enumerate(hard))
    clauses_s = tuple(Clause(len(hard) + i, c, True) for i, c in enumerate(soft))
    return WcnfFormula(num_vars, clauses_h, clauses_s, max(top, 2))
