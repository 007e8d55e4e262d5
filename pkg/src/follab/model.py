"""Brute-force finite-model oracle.

A sentence is evaluated over every membership relation on a small
domain: an n by n boolean matrix where membership[i][j] says whether
element i is a member of element j.  Equality is interpreted as identity
on the domain.  Matrices are enumerated in row-major lexicographic
order, so counts and first models are reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    And,
    Eq,
    Exists,
    Falsum,
    Forall,
    Formula,
    Iff,
    Implies,
    In,
    Not,
    Or,
    free_vars_ordered,
    has_defapp,
    render,
)

DEFAULT_SIZE_CAP = 4


class FreeVariableError(Exception):
    def __init__(self, names):
        super().__init__(
            "sentence must be closed; free identifiers: " + ", ".join(names)
        )
        self.names = tuple(names)


class SizeBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class Interpretation:
    size: int
    membership: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("domain size must be >= 1")
        if len(self.membership) != self.size or any(
            len(row) != self.size for row in self.membership
        ):
            raise ValueError("membership matrix must be size x size")

    @classmethod
    def from_index(cls, size: int, index: int) -> "Interpretation":
        """The index-th matrix in row-major lexicographic order; the cell
        (0, 0) is the most significant bit."""
        bits = size * size
        rows = tuple(
            tuple(bool(index >> (bits - 1 - (i * size + j)) & 1) for j in range(size))
            for i in range(size)
        )
        return cls(size, rows)

    def index(self) -> int:
        k = 0
        for row in self.membership:
            for cell in row:
                k = (k << 1) | int(cell)
        return k

    def permuted(self, perm: list[int]) -> "Interpretation":
        """Relabel the domain: element i becomes perm[i]."""
        inv = [0] * self.size
        for i, p in enumerate(perm):
            inv[p] = i
        rows = tuple(
            tuple(self.membership[inv[i]][inv[j]] for j in range(self.size))
            for i in range(self.size)
        )
        return Interpretation(self.size, rows)

    def dump(self) -> str:
        return "\n".join(
            "".join("1" if cell else "0" for cell in row) for row in self.membership
        )


def _check_sentence(sentence: Formula):
    if has_defapp(sentence):
        raise ValueError("sentence contains definition applications; unfold first")
    offenders = free_vars_ordered(sentence)
    if offenders:
        raise FreeVariableError(offenders)


def _eval(f: Formula, m: tuple[tuple[bool, ...], ...], n: int, env: dict) -> bool:
    match f:
        case In(l, r):
            return m[env[l.name]][env[r.name]]
        case Eq(l, r):
            return env[l.name] == env[r.name]
        case Falsum():
            return False
        case Not(b):
            return not _eval(b, m, n, env)
        case And(l, r):
            return _eval(l, m, n, env) and _eval(r, m, n, env)
        case Or(l, r):
            return _eval(l, m, n, env) or _eval(r, m, n, env)
        case Implies(l, r):
            return (not _eval(l, m, n, env)) or _eval(r, m, n, env)
        case Iff(l, r):
            return _eval(l, m, n, env) == _eval(r, m, n, env)
        case Forall(v, b):
            old = env.get(v)
            try:
                for d in range(n):
                    env[v] = d
                    if not _eval(b, m, n, env):
                        return False
                return True
            finally:
                if old is None:
                    env.pop(v, None)
                else:
                    env[v] = old
        case Exists(v, b):
            old = env.get(v)
            try:
                for d in range(n):
                    env[v] = d
                    if _eval(b, m, n, env):
                        return True
                return False
            finally:
                if old is None:
                    env.pop(v, None)
                else:
                    env[v] = old
    raise TypeError(f"cannot evaluate {f!r}")


def evaluate(sentence: Formula, interp: Interpretation) -> bool:
    """Tarskian truth value of a closed sentence under the interpretation."""
    _check_sentence(sentence)
    return _eval(sentence, interp.membership, interp.size, {})


def _guard_size(size: int, allow_large: bool):
    if size < 1:
        raise SizeBudgetError("domain size must be >= 1")
    if size > DEFAULT_SIZE_CAP and not allow_large:
        raise SizeBudgetError(
            f"size {size} exceeds the default cap {DEFAULT_SIZE_CAP}; "
            "pass allow_large to override"
        )


def enumerate_models(
    sentence: Formula, size: int, allow_large: bool = False
) -> tuple[int, Interpretation | None]:
    """Exact model count over all 2^(size^2) membership matrices, plus the
    lexicographically least satisfying matrix if any."""
    _check_sentence(sentence)
    _guard_size(size, allow_large)
    count = 0
    first = None
    for k in range(1 << (size * size)):
        interp = Interpretation.from_index(size, k)
        if _eval(sentence, interp.membership, size, {}):
            count += 1
            if first is None:
                first = interp
    return count, first


@dataclass(frozen=True)
class SizeCount:
    size: int
    matrices: int
    model_count: int
    first_model: Interpretation | None


@dataclass(frozen=True)
class SearchReport:
    sentence: Formula
    max_size: int
    per_size: tuple[SizeCount, ...]
    verdict: str  # "valid-up-to" | "unsat-up-to" | "mixed"
    countermodel: Interpretation | None
    model: Interpretation | None

    def table(self, dump_first: bool = False) -> str:
        lines = [f"sentence: {render(self.sentence)}", "size matrices models"]
        for row in self.per_size:
            lines.append(f"{row.size} {row.matrices} {row.model_count}")
        lines.append(f"verdict: {self.verdict} (max size {self.max_size})")
        if dump_first and self.model is not None:
            lines.append(f"first model (size {self.model.size}):")
            lines.append(self.model.dump())
        return "\n".join(lines) + "\n"


def validity_sweep(
    sentence: Formula, max_size: int, allow_large: bool = False
) -> SearchReport:
    """Evaluate the sentence on every matrix at every size 1..max_size."""
    _check_sentence(sentence)
    _guard_size(max_size, allow_large)
    per_size = []
    countermodel = None
    model = None
    for n in range(1, max_size + 1):
        total = 1 << (n * n)
        count = 0
        first = None
        for k in range(total):
            interp = Interpretation.from_index(n, k)
            if _eval(sentence, interp.membership, n, {}):
                count += 1
                if first is None:
                    first = interp
                if model is None:
                    model = interp
            elif countermodel is None:
                countermodel = interp
        per_size.append(SizeCount(n, total, count, first))
    if countermodel is None:
        verdict = "valid-up-to"
    elif model is None:
        verdict = "unsat-up-to"
    else:
        verdict = "mixed"
    return SearchReport(
        sentence, max_size, tuple(per_size), verdict, countermodel, model
    )
