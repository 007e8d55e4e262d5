"""Verification of numbered Hilbert-style proof scripts.

Every line must be a hypothesis, an axiom-scheme instance, a definition
(un)folding, or follow from earlier lines by an allowed rule.  The
checker only verifies; it never searches.

Script file format, one step per line:

    <index> | <formula> | <justification>

where the justification is one of: hyp, taut, tautcons 3 5, pred[x:=r],
id-left, id-right, qdist, mp 2 4, gen 3 r, def phi 5,
qlaw neg-forall 7, qlaw neg-exists 7, qlaw exists-intro 7.
Lines starting with # are comments; `def name(params) := formula`
declares definitions.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .syntax import (
    And,
    DefApp,
    DefinitionError,
    DefinitionTable,
    Eq,
    Exists,
    FALSUM,
    Falsum,
    Forall,
    Formula,
    IDENT_RE,
    Iff,
    Implies,
    In,
    Not,
    Or,
    ParseError,
    Term,
    alpha_equal,
    bind_free,
    canonical,
    free_vars,
    parse,
    parse_def_line,
    render,
    substitute_count,
)


class ScriptError(Exception):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AtomBudgetError(Exception):
    """The propositional skeleton has too many distinct atoms."""


# --------------------------------------------------------------------------
# Propositional skeletons and the truth-table oracle
# --------------------------------------------------------------------------

def _letters():
    for i in itertools.count():
        for base in "pqstuvw":
            yield base if i == 0 else f"{base}{i}"


def skeletonize(f: Formula) -> tuple[tuple, dict[str, Formula]]:
    """Abstract maximal quantified subformulas and atoms to propositional
    letters; alpha-equivalent subformulas share a letter.  Returns the
    skeleton (nested tuples) and the letter-to-subformula map."""
    by_key: dict[tuple, str] = {}
    atoms: dict[str, Formula] = {}
    fresh = _letters()

    def letter(g: Formula):
        key = canonical(g)
        if key not in by_key:
            name = next(fresh)
            by_key[key] = name
            atoms[name] = g
        return ("atom", by_key[key])

    def walk(g: Formula):
        match g:
            case In() | Eq() | DefApp() | Forall() | Exists():
                return letter(g)
            case Falsum():
                return ("false",)
            case Not(b):
                return ("not", walk(b))
            case And(l, r):
                return ("and", walk(l), walk(r))
            case Or(l, r):
                return ("or", walk(l), walk(r))
            case Implies(l, r):
                return ("implies", walk(l), walk(r))
            case Iff(l, r):
                return ("iff", walk(l), walk(r))
            case _:
                raise TypeError(f"not a formula: {g!r}")

    return walk(f), atoms


def _eval_skeleton(p: tuple, env: dict[str, bool]) -> bool:
    match p:
        case ("atom", name):
            return env[name]
        case ("false",):
            return False
        case ("not", q):
            return not _eval_skeleton(q, env)
        case ("and", l, r):
            return _eval_skeleton(l, env) and _eval_skeleton(r, env)
        case ("or", l, r):
            return _eval_skeleton(l, env) or _eval_skeleton(r, env)
        case ("implies", l, r):
            return (not _eval_skeleton(l, env)) or _eval_skeleton(r, env)
        case ("iff", l, r):
            return _eval_skeleton(l, env) == _eval_skeleton(r, env)
    raise ValueError(f"bad skeleton node {p!r}")


@dataclass(frozen=True)
class TautologyVerdict:
    tautology: bool
    assignment: dict[str, bool] | None
    atoms: dict[str, Formula]


def check_tautology(f: Formula, max_atoms: int = 20) -> TautologyVerdict:
    """Truth-table verdict over the propositional skeleton of f; when
    falsifiable, carries the first falsifying assignment found."""
    skeleton, atoms = skeletonize(f)
    if len(atoms) > max_atoms:
        raise AtomBudgetError(
            f"skeleton has {len(atoms)} atoms, budget is {max_atoms}"
        )
    names = list(atoms)
    for bits in itertools.product((False, True), repeat=len(names)):
        env = dict(zip(names, bits))
        if not _eval_skeleton(skeleton, env):
            return TautologyVerdict(False, env, atoms)
    return TautologyVerdict(True, None, atoms)


# --------------------------------------------------------------------------
# Steps, justifications, verdicts
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Justification:
    rule: str
    refs: tuple[int, ...] = ()
    var: str | None = None
    term: str | None = None
    name: str | None = None
    kind: str | None = None

    def __str__(self):
        match self.rule:
            case "pred":
                return f"pred[{self.var}:={self.term}]"
            case "mp" | "tautcons":
                return f"{self.rule} {' '.join(map(str, self.refs))}"
            case "gen":
                return f"gen {self.refs[0]} {self.var}"
            case "def":
                return f"def {self.name} {self.refs[0]}"
            case "qlaw":
                return f"qlaw {self.kind} {self.refs[0]}"
        return self.rule


@dataclass(frozen=True)
class Step:
    index: int
    formula: Formula
    justification: Justification
    line: int = 0


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step_index: int | None = None
    reason: str | None = None
    hypotheses: tuple[int, ...] = ()

    def __str__(self):
        if self.accepted:
            hyps = (
                f" (hypotheses consumed: {', '.join(map(str, self.hypotheses))})"
                if self.hypotheses
                else ""
            )
            return f"Accepted{hyps}"
        return f"Rejected at step {self.step_index}: {self.reason}"


# --------------------------------------------------------------------------
# Per-rule checks
# --------------------------------------------------------------------------

def _replace_some(a: Formula, b: Formula, frm: str, to: str, bound=frozenset()) -> bool:
    """True when b is a with some (possibly zero) free occurrences of the
    constant frm replaced by to."""

    def term_ok(x: Term, y: Term) -> bool:
        if x == y:
            return True
        return (
            x.name == frm
            and y.name == to
            and frm not in bound
            and x.kind == y.kind
        )

    match (a, b):
        case (In(l1, r1), In(l2, r2)) | (Eq(l1, r1), Eq(l2, r2)):
            return term_ok(l1, l2) and term_ok(r1, r2)
        case (DefApp(n1, a1), DefApp(n2, a2)):
            return n1 == n2 and len(a1) == len(a2) and all(
                term_ok(x, y) for x, y in zip(a1, a2)
            )
        case (Falsum(), Falsum()):
            return True
        case (Not(x), Not(y)):
            return _replace_some(x, y, frm, to, bound)
        case (And(l1, r1), And(l2, r2)) | (Or(l1, r1), Or(l2, r2)) | (
            Implies(l1, r1),
            Implies(l2, r2),
        ) | (Iff(l1, r1), Iff(l2, r2)):
            return _replace_some(l1, l2, frm, to, bound) and _replace_some(
                r1, r2, frm, to, bound
            )
        case (Forall(v1, b1), Forall(v2, b2)) | (Exists(v1, b1), Exists(v2, b2)):
            return v1 == v2 and _replace_some(b1, b2, frm, to, bound | {v1})
    return False


def _conjoin(formulas: list[Formula]) -> Formula:
    conj = formulas[0]
    for g in formulas[1:]:
        conj = And(conj, g)
    return conj


class _Checker:
    def __init__(self, steps: list[Step], defs: DefinitionTable | None):
        self.steps = steps
        self.defs = defs or DefinitionTable()
        self.by_index: dict[int, Step] = {}

    def run(self) -> Verdict:
        if not self.steps:
            return Verdict(False, None, "empty script")
        last = 0
        for step in self.steps:
            if step.index <= last:
                return Verdict(
                    False, step.index, f"index {step.index} does not increase"
                )
            last = step.index
            reason = self.check_step(step)
            if reason is not None:
                return Verdict(False, step.index, reason)
            self.by_index[step.index] = step
        hyps = tuple(
            s.index for s in self.steps if s.justification.rule == "hyp"
        )
        return Verdict(True, hypotheses=hyps)

    def ref(self, step: Step, i: int) -> Formula | str:
        if i not in self.by_index:
            return f"cites step {i}, which is not an earlier step"
        return self.by_index[i].formula

    def check_step(self, step: Step) -> str | None:
        j = step.justification
        f = step.formula
        cited = []
        for i in j.refs:
            got = self.ref(step, i)
            if isinstance(got, str):
                return got
            cited.append(got)
        method = getattr(self, "rule_" + j.rule.replace("-", "_"), None)
        if method is None:
            return f"unknown justification {j.rule!r}"
        return method(step, f, cited)

    # --- rules -----------------------------------------------------------

    def rule_hyp(self, step, f, cited):
        return None

    def rule_taut(self, step, f, cited):
        try:
            v = check_tautology(f)
        except AtomBudgetError as e:
            return str(e)
        if not v.tautology:
            return f"not a tautology; falsified by {v.assignment}"
        return None

    def rule_tautcons(self, step, f, cited):
        if not 1 <= len(cited) <= 4:
            return "tautcons cites between 1 and 4 earlier lines"
        impl = Implies(_conjoin(cited), f)
        try:
            v = check_tautology(impl)
        except AtomBudgetError as e:
            return str(e)
        if not v.tautology:
            return (
                "not a propositional consequence of the cited lines; "
                f"falsified by {v.assignment}"
            )
        return None

    def rule_mp(self, step, f, cited):
        ante, impl = cited
        if not isinstance(impl, Implies):
            return f"second cited line is not an implication: {render(impl)}"
        if not alpha_equal(impl.lhs, ante):
            return "antecedent of the cited implication does not match"
        if not alpha_equal(impl.rhs, f):
            return "this line is not the consequent of the cited implication"
        return None

    def rule_gen(self, step, f, cited):
        (src,) = cited
        v = step.justification.var
        expected = Forall(v, bind_free(src, v))
        if not alpha_equal(f, expected):
            return f"generalization over {v!r} of the cited line would be {render(expected)}"
        for s in self.steps:
            if s.index >= step.index:
                break
            if s.justification.rule == "hyp" and v in free_vars(s.formula):
                return f"cannot generalize over {v!r}: free in hypothesis {s.index}"
        return None

    def rule_pred(self, step, f, cited):
        v, t = step.justification.var, step.justification.term
        if not (isinstance(f, Implies) and isinstance(f.lhs, Forall)):
            return "predicative axiom lines have the shape forall v. B -> B[v:=t]"
        if f.lhs.var != v:
            return f"quantified variable is {f.lhs.var!r}, justification says {v!r}"
        inst, renames = substitute_count(f.lhs.body, v, Term("const", t))
        if renames:
            return f"substituting {t!r} for {v!r} would capture; instance unsound"
        if not alpha_equal(f.rhs, inst):
            return f"instance should be {render(inst)}"
        return None

    def _identity(self, f, direction):
        if not (
            isinstance(f, Implies)
            and isinstance(f.lhs, Eq)
            and isinstance(f.rhs, Implies)
        ):
            return "identity axiom lines have the shape s = t -> (A -> B)"
        s, t = f.lhs.lhs.name, f.lhs.rhs.name
        a, b = f.rhs.lhs, f.rhs.rhs
        frm, to = (t, s) if direction == "left" else (s, t)
        if not _replace_some(a, b, frm, to):
            return (
                f"consequent is not the antecedent with occurrences of "
                f"{frm!r} replaced by {to!r}"
            )
        return None

    def rule_id_left(self, step, f, cited):
        return self._identity(f, "left")

    def rule_id_right(self, step, f, cited):
        return self._identity(f, "right")

    def rule_qdist(self, step, f, cited):
        match f:
            case Implies(Forall(v, Implies(a, b)), Implies(ex1, ex2)):
                if alpha_equal(ex1, Exists(v, a)) and alpha_equal(ex2, Exists(v, b)):
                    return None
        return (
            "quantifier distribution lines have the shape "
            "forall v. (A -> B) -> (exists v. A -> exists v. B)"
        )

    def rule_def(self, step, f, cited):
        name = step.justification.name
        if name not in self.defs.entries:
            return f"unknown definition {name!r}"
        (src,) = cited
        try:
            if not alpha_equal(self.defs.unfold(f), self.defs.unfold(src)):
                return "lines do not unfold to the same formula"
        except DefinitionError as e:
            return str(e)
        return None

    def rule_qlaw(self, step, f, cited):
        (src,) = cited
        kind = step.justification.kind

        def neg_forall(x, y):
            match x:
                case Not(Forall(v, b)):
                    return alpha_equal(y, Exists(v, Not(b)))
            return False

        def neg_exists(x, y):
            match x:
                case Not(Exists(v, b)):
                    return alpha_equal(y, Forall(v, Not(b)))
            return False

        if kind == "neg-forall":
            if neg_forall(src, f) or neg_forall(f, src):
                return None
            return "expected the neg-forall dual of the cited line"
        if kind == "neg-exists":
            if neg_exists(src, f) or neg_exists(f, src):
                return None
            return "expected the neg-exists dual of the cited line"
        if kind == "exists-intro":
            match src:
                case Forall(v, Implies(b, Falsum())):
                    if alpha_equal(f, Implies(Exists(v, b), FALSUM)):
                        return None
            return (
                "expected forall v. (B -> false) cited and "
                "exists v. B -> false on this line"
            )
        return f"unknown quantifier law {kind!r}"


def check(steps: list[Step], defs: DefinitionTable | None = None) -> Verdict:
    """Check a proof script; Accepted iff every step's justification holds."""
    return _Checker(steps, defs).run()


# --------------------------------------------------------------------------
# Script files
# --------------------------------------------------------------------------

_PRED_RE = re.compile(r"pred\[([a-z][a-zA-Z0-9_]*):=([a-z][a-zA-Z0-9_]*)\]\Z")

_QLAW_KINDS = {"neg-forall", "neg-exists", "exists-intro"}


def _parse_justification(text: str, line: int) -> Justification:
    toks = text.split()
    if not toks:
        raise ScriptError("missing justification", line)
    head = toks[0]
    if head in ("hyp", "taut", "qdist", "id-left", "id-right"):
        if len(toks) != 1:
            raise ScriptError(f"{head} takes no arguments", line)
        return Justification(head)
    if head.startswith("pred"):
        m = _PRED_RE.match(text.strip())
        if not m:
            raise ScriptError("pred justification looks like pred[x:=r]", line)
        return Justification("pred", var=m.group(1), term=m.group(2))
    if head == "mp":
        if len(toks) != 3:
            raise ScriptError("mp cites two line indices", line)
        return Justification("mp", refs=(_index(toks[1], line), _index(toks[2], line)))
    if head == "gen":
        if len(toks) != 3 or not IDENT_RE.match(toks[2]):
            raise ScriptError("gen cites a line index and a variable", line)
        return Justification("gen", refs=(_index(toks[1], line),), var=toks[2])
    if head == "tautcons":
        if len(toks) < 2:
            raise ScriptError("tautcons cites at least one line index", line)
        return Justification(
            "tautcons", refs=tuple(_index(t, line) for t in toks[1:])
        )
    if head == "def":
        if len(toks) != 3 or not IDENT_RE.match(toks[1]):
            raise ScriptError("def justification: def <name> <index>", line)
        return Justification("def", refs=(_index(toks[2], line),), name=toks[1])
    if head == "qlaw":
        if len(toks) != 3 or toks[1] not in _QLAW_KINDS:
            raise ScriptError(
                f"qlaw kinds: {', '.join(sorted(_QLAW_KINDS))}", line
            )
        return Justification("qlaw", refs=(_index(toks[2], line),), kind=toks[1])
    raise ScriptError(f"unknown justification {head!r}", line)


def _index(text: str, line: int) -> int:
    try:
        i = int(text)
    except ValueError:
        raise ScriptError(f"bad line index {text!r}", line) from None
    if i < 1:
        raise ScriptError(f"bad line index {text!r}", line)
    return i


@dataclass
class Script:
    steps: list[Step]
    defs: DefinitionTable

    def verdict(self) -> Verdict:
        return check(self.steps, self.defs)


def parse_script(text: str) -> Script:
    """Parse a proof script file into steps plus its definition table."""
    defs = DefinitionTable()
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("def ") or line == "def":
            try:
                parse_def_line(line, defs)
            except (ParseError, DefinitionError) as e:
                raise ScriptError(f"bad definition: {e}", lineno) from None
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 3:
            raise ScriptError(
                "steps look like: <index> | <formula> | <justification>", lineno
            )
        index = _index(parts[0], lineno)
        try:
            formula = parse(parts[1])
        except ParseError as e:
            raise ScriptError(f"bad formula: {e}", lineno) from None
        just = _parse_justification(parts[2], lineno)
        steps.append(Step(index, formula, just, lineno))
    return Script(steps, defs)
