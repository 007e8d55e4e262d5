"""First-order syntax with equality: terms, formulas, a recursive-descent
parser, printers, capture-avoiding substitution and definition unfolding.

All values are immutable after construction and safe to share freely.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

IDENT_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")

RESERVED = frozenset({"forall", "exists", "in", "notin", "false", "def"})


class ParseError(Exception):
    """Raised on malformed input; carries a 1-based line/column position."""

    def __init__(self, message, line=1, col=1):
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


class DefinitionError(Exception):
    """Unknown definition name, arity mismatch, or invalid definition."""


class ShadowWarning(UserWarning):
    """A quantifier re-binds a name already bound in scope; inner wins."""


# --------------------------------------------------------------------------
# Terms and formulas
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """An individual: kind is "var" for bound occurrences, "const" for free
    identifiers.  Whether an identifier is a variable is decided by the
    enclosing quantifiers, not by spelling."""

    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in ("var", "const"):
            raise ValueError(f"bad term kind {self.kind!r}")
        if not IDENT_RE.match(self.name):
            raise ValueError(f"bad identifier {self.name!r}")

    def __str__(self):
        return self.name


def var(name: str) -> Term:
    return Term("var", name)


def const(name: str) -> Term:
    return Term("const", name)


class Formula:
    """Base class for formula nodes."""

    __slots__ = ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class In(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Falsum(Formula):
    pass


FALSUM = Falsum()


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class DefApp(Formula):
    """An application of a named definition, eliminated by unfold()."""

    name: str
    args: tuple[Term, ...]


# --------------------------------------------------------------------------
# Traversals
# --------------------------------------------------------------------------

def _free_occurrences(f: Formula, bound: frozenset[str]):
    match f:
        case In(l, r) | Eq(l, r):
            if l.name not in bound:
                yield l.name
            if r.name not in bound:
                yield r.name
        case DefApp(_, args):
            for t in args:
                if t.name not in bound:
                    yield t.name
        case Falsum():
            return
        case Not(b):
            yield from _free_occurrences(b, bound)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            yield from _free_occurrences(l, bound)
            yield from _free_occurrences(r, bound)
        case Forall(v, b) | Exists(v, b):
            yield from _free_occurrences(b, bound | {v})
        case _:
            raise TypeError(f"not a formula: {f!r}")


def free_vars(f: Formula) -> set[str]:
    """Identifiers with at least one free occurrence in f."""
    return set(_free_occurrences(f, frozenset()))


def free_vars_ordered(f: Formula) -> list[str]:
    """Free identifiers in order of first occurrence (left to right)."""
    seen: list[str] = []
    for name in _free_occurrences(f, frozenset()):
        if name not in seen:
            seen.append(name)
    return seen


def all_names(f: Formula) -> set[str]:
    """Every identifier occurring in f, free or bound, including binders."""
    names: set[str] = set()

    def walk(g):
        match g:
            case In(l, r) | Eq(l, r):
                names.add(l.name)
                names.add(r.name)
            case DefApp(_, args):
                names.update(t.name for t in args)
            case Falsum():
                pass
            case Not(b):
                walk(b)
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                walk(l)
                walk(r)
            case Forall(v, b) | Exists(v, b):
                names.add(v)
                walk(b)

    walk(f)
    return names


def constants(f: Formula) -> set[str]:
    """Constant names occurring in f (same as free_vars on parsed input)."""
    return free_vars(f)


def has_defapp(f: Formula) -> bool:
    match f:
        case DefApp():
            return True
        case Not(b) | Forall(_, b) | Exists(_, b):
            return has_defapp(b)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return has_defapp(l) or has_defapp(r)
        case _:
            return False


# --------------------------------------------------------------------------
# Alpha-equivalence
# --------------------------------------------------------------------------

def canonical(f: Formula, _env: tuple[str, ...] = ()) -> tuple:
    """A hashable key invariant under renaming of bound variables.

    Free occurrences compare by name regardless of var/const kind, so a
    detached quantifier body equals its re-parsed spelling.
    """

    def t(term: Term):
        for i in range(len(_env) - 1, -1, -1):
            if _env[i] == term.name:
                return ("b", len(_env) - 1 - i)
        return ("f", term.name)

    match f:
        case In(l, r):
            return ("in", t(l), t(r))
        case Eq(l, r):
            return ("eq", t(l), t(r))
        case Falsum():
            return ("false",)
        case Not(b):
            return ("not", canonical(b, _env))
        case And(l, r):
            return ("and", canonical(l, _env), canonical(r, _env))
        case Or(l, r):
            return ("or", canonical(l, _env), canonical(r, _env))
        case Implies(l, r):
            return ("implies", canonical(l, _env), canonical(r, _env))
        case Iff(l, r):
            return ("iff", canonical(l, _env), canonical(r, _env))
        case Forall(v, b):
            return ("forall", canonical(b, _env + (v,)))
        case Exists(v, b):
            return ("exists", canonical(b, _env + (v,)))
        case DefApp(name, args):
            return ("def", name) + tuple(t(a) for a in args)
        case _:
            raise TypeError(f"not a formula: {f!r}")


def alpha_equal(f: Formula, g: Formula) -> bool:
    return canonical(f) == canonical(g)


# --------------------------------------------------------------------------
# Substitution
# --------------------------------------------------------------------------

def _fresh(base: str, taken: set[str]) -> str:
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _subst(f: Formula, sub: dict[str, Term], taken: set[str]) -> tuple[Formula, int]:
    def t(term: Term) -> Term:
        return sub.get(term.name, term)

    match f:
        case In(l, r):
            return In(t(l), t(r)), 0
        case Eq(l, r):
            return Eq(t(l), t(r)), 0
        case DefApp(name, args):
            return DefApp(name, tuple(t(a) for a in args)), 0
        case Falsum():
            return f, 0
        case Not(b):
            b2, n = _subst(b, sub, taken)
            return Not(b2), n
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            l2, n1 = _subst(l, sub, taken)
            r2, n2 = _subst(r, sub, taken)
            return type(f)(l2, r2), n1 + n2
        case Forall(v, b) | Exists(v, b):
            inner = {k: u for k, u in sub.items() if k != v}
            if not inner or not (free_vars(b) - {v}) & set(inner):
                return f, 0
            if any(u.name == v for u in inner.values()):
                # v would capture an inserted term; rename the binder.
                v2 = _fresh(v, taken | all_names(b) | {u.name for u in inner.values()})
                inner[v] = Term("var", v2)
                b2, n = _subst(b, inner, taken | {v2})
                return type(f)(v2, b2), n + 1
            b2, n = _subst(b, inner, taken)
            return type(f)(v, b2), n
        case _:
            raise TypeError(f"not a formula: {f!r}")


def subst_many(f: Formula, sub: dict[str, Term]) -> Formula:
    """Simultaneous capture-avoiding substitution of free identifiers."""
    if not sub:
        return f
    taken = all_names(f) | {t.name for t in sub.values()}
    return _subst(f, dict(sub), taken)[0]


def substitute(f: Formula, name: str, term: Term) -> Formula:
    """Replace free occurrences of name by term, renaming binders as needed."""
    return subst_many(f, {name: term})


def substitute_count(f: Formula, name: str, term: Term) -> tuple[Formula, int]:
    """Like substitute, also reporting how many binders were renamed."""
    taken = all_names(f) | {term.name}
    return _subst(f, {name: term}, taken)


def bind_free(f: Formula, name: str) -> Formula:
    """Turn free occurrences of name into variable occurrences (for use
    directly under a new binder of that name)."""

    def walk(g, shadowed):
        def t(term):
            if term.name == name and not shadowed:
                return Term("var", name)
            return term

        match g:
            case In(l, r):
                return In(t(l), t(r))
            case Eq(l, r):
                return Eq(t(l), t(r))
            case DefApp(dname, args):
                return DefApp(dname, tuple(t(a) for a in args))
            case Falsum():
                return g
            case Not(b):
                return Not(walk(b, shadowed))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(g)(walk(l, shadowed), walk(r, shadowed))
            case Forall(v, b) | Exists(v, b):
                return type(g)(v, walk(b, shadowed or v == name))

    return walk(f, False)


def quantify(f: Formula, name: str, kind: str = "forall") -> Formula:
    """Bind the free identifier name with a fresh outer quantifier."""
    cls = Forall if kind == "forall" else Exists
    return cls(name, bind_free(f, name))


def universal_closure(f: Formula) -> Formula:
    """Universally close f over its free identifiers, first occurrence
    outermost."""
    g = f
    for name in reversed(free_vars_ordered(f)):
        g = quantify(g, name)
    return g


def promote_free(f: Formula) -> Formula:
    """Rewrite free variable occurrences as constants (engine ingress)."""

    def walk(g, bound):
        def t(term):
            if term.kind == "var" and term.name not in bound:
                return Term("const", term.name)
            return term

        match g:
            case In(l, r):
                return In(t(l), t(r))
            case Eq(l, r):
                return Eq(t(l), t(r))
            case DefApp(dname, args):
                return DefApp(dname, tuple(t(a) for a in args))
            case Falsum():
                return g
            case Not(b):
                return Not(walk(b, bound))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(g)(walk(l, bound), walk(r, bound))
            case Forall(v, b) | Exists(v, b):
                return type(g)(v, walk(b, bound | {v}))

    return walk(f, frozenset())


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<sym><->|->|!=|=|\||&|!|\(|\)|\.|,)"
    r"|(?P<ident>[a-z][a-zA-Z0-9_]*)"
)


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        piece = m.group(0)
        if m.lastgroup != "ws":
            toks.append(_Tok(piece, line, col))
        nl = piece.count("\n")
        if nl:
            line += nl
            col = len(piece) - piece.rfind("\n")
        else:
            col += len(piece)
        pos = m.end()
    return toks


class _Parser:
    """Recursive descent over the grammar

        formula := iff
        iff     := imp { "<->" imp }            (left associative)
        imp     := or [ "->" imp ]              (right associative)
        or      := and { "|" and }
        and     := unary { "&" unary }
        unary   := "!" unary | "forall" IDENT "." unary
                 | "exists" IDENT "." unary | "(" formula ")" | atom
        atom    := "false" | TERM ("in"|"notin"|"="|"!=") TERM
                 | IDENT "(" TERM {"," TERM} ")"

    An identifier is a variable iff bound by an enclosing quantifier,
    otherwise a constant.  "notin" and "!=" desugar to negations.
    """

    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.scope: list[str] = []

    def error(self, message):
        if self.pos < len(self.toks):
            t = self.toks[self.pos]
            raise ParseError(message, t.line, t.col)
        if self.toks:
            t = self.toks[-1]
            raise ParseError(message + " (at end of input)", t.line, t.col + len(t.text))
        raise ParseError(message + " (empty input)")

    def peek(self) -> str | None:
        return self.toks[self.pos].text if self.pos < len(self.toks) else None

    def take(self, expected: str | None = None) -> _Tok:
        if self.pos >= len(self.toks):
            self.error(f"expected {expected!r}" if expected else "unexpected end of input")
        t = self.toks[self.pos]
        if expected is not None and t.text != expected:
            self.error(f"expected {expected!r}, found {t.text!r}")
        self.pos += 1
        return t

    def parse(self) -> Formula:
        f = self.formula()
        if self.pos < len(self.toks):
            self.error(f"unexpected token {self.peek()!r} after formula")
        return f

    def formula(self) -> Formula:
        f = self.imp()
        while self.peek() == "<->":
            self.take()
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            self.take()
            v = self.ident("quantified variable")
            if v in self.scope:
                t = self.toks[self.pos - 1]
                warnings.warn(
                    f"quantifier shadows {v!r} (line {t.line}, column {t.col}); "
                    "inner binding wins",
                    ShadowWarning,
                    stacklevel=4,
                )
            self.take(".")
            self.scope.append(v)
            try:
                body = self.unary()
            finally:
                self.scope.pop()
            return (Forall if tok == "forall" else Exists)(v, body)
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        return self.atom()

    def atom(self) -> Formula:
        if self.peek() == "false":
            self.take()
            return FALSUM
        name = self.ident("term or definition name")
        if self.peek() == "(":
            self.take()
            args = [self.term()]
            while self.peek() == ",":
                self.take()
                args.append(self.term())
            self.take(")")
            return DefApp(name, tuple(args))
        lhs = self.classify(name)
        op = self.peek()
        if op not in ("in", "notin", "=", "!="):
            self.error("expected 'in', 'notin', '=' or '!=' after term")
        self.take()
        rhs = self.term()
        if op == "in":
            return In(lhs, rhs)
        if op == "notin":
            return Not(In(lhs, rhs))
        if op == "=":
            return Eq(lhs, rhs)
        return Not(Eq(lhs, rhs))

    def term(self) -> Term:
        return self.classify(self.ident("term"))

    def ident(self, what: str) -> str:
        if self.pos >= len(self.toks):
            self.error(f"expected {what}")
        t = self.toks[self.pos]
        if not IDENT_RE.match(t.text) or t.text in RESERVED:
            self.error(f"expected {what}, found {t.text!r}")
        self.pos += 1
        return t.text

    def classify(self, name: str) -> Term:
        return Term("var" if name in self.scope else "const", name)


def parse(text: str) -> Formula:
    """Parse one formula; raises ParseError with position on bad input."""
    return _Parser(text).parse()


def parse_term(text: str) -> Term:
    """Parse a bare identifier as a constant term."""
    name = text.strip()
    if not IDENT_RE.match(name) or name in RESERVED:
        raise ParseError(f"bad term {text!r}")
    return Term("const", name)


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------

_PREC_IFF, _PREC_IMP, _PREC_OR, _PREC_AND, _PREC_UNARY, _PREC_ATOM = 1, 2, 3, 4, 5, 6


def _ascii(f: Formula, prec: int) -> str:
    def wrap(s, node_prec):
        return f"({s})" if node_prec < prec else s

    match f:
        case In(l, r):
            return f"{l} in {r}"
        case Eq(l, r):
            return f"{l} = {r}"
        case Falsum():
            return "false"
        case Not(In(l, r)):
            return f"{l} notin {r}"
        case Not(Eq(l, r)):
            return f"{l} != {r}"
        case Not(b):
            return wrap(f"!{_ascii(b, _PREC_UNARY)}", _PREC_UNARY)
        case And(l, r):
            return wrap(f"{_ascii(l, _PREC_AND)} & {_ascii(r, _PREC_AND + 1)}", _PREC_AND)
        case Or(l, r):
            return wrap(f"{_ascii(l, _PREC_OR)} | {_ascii(r, _PREC_OR + 1)}", _PREC_OR)
        case Implies(l, r):
            return wrap(f"{_ascii(l, _PREC_IMP + 1)} -> {_ascii(r, _PREC_IMP)}", _PREC_IMP)
        case Iff(l, r):
            return wrap(f"{_ascii(l, _PREC_IFF)} <-> {_ascii(r, _PREC_IFF + 1)}", _PREC_IFF)
        case Forall(v, b):
            return wrap(f"forall {v}. {_ascii(b, _PREC_UNARY)}", _PREC_UNARY)
        case Exists(v, b):
            return wrap(f"exists {v}. {_ascii(b, _PREC_UNARY)}", _PREC_UNARY)
        case DefApp(name, args):
            return f"{name}({', '.join(t.name for t in args)})"
        case _:
            raise TypeError(f"not a formula: {f!r}")


def _sexpr(f: Formula) -> str:
    match f:
        case In(l, r):
            return f"(in {l} {r})"
        case Eq(l, r):
            return f"(eq {l} {r})"
        case Falsum():
            return "false"
        case Not(b):
            return f"(not {_sexpr(b)})"
        case And(l, r):
            return f"(and {_sexpr(l)} {_sexpr(r)})"
        case Or(l, r):
            return f"(or {_sexpr(l)} {_sexpr(r)})"
        case Implies(l, r):
            return f"(implies {_sexpr(l)} {_sexpr(r)})"
        case Iff(l, r):
            return f"(iff {_sexpr(l)} {_sexpr(r)})"
        case Forall(v, b):
            return f"(forall {v} {_sexpr(b)})"
        case Exists(v, b):
            return f"(exists {v} {_sexpr(b)})"
        case DefApp(name, args):
            return "(" + " ".join([name] + [t.name for t in args]) + ")"
        case _:
            raise TypeError(f"not a formula: {f!r}")


def render(f: Formula, fmt: str = "ascii") -> str:
    """Render a formula.  ascii output re-parses to an alpha-equivalent
    formula; dot-label escapes for graph files; sexpr is one-way."""
    if fmt == "ascii":
        return _ascii(f, _PREC_IFF)
    if fmt == "dot-label":
        return _ascii(f, _PREC_IFF).replace("\\", "\\\\").replace('"', '\\"')
    if fmt == "sexpr":
        return _sexpr(f)
    raise ValueError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------
# Definition tables
# --------------------------------------------------------------------------

class DefinitionTable:
    """Named formula templates, e.g. phi(x, r) := x in r <-> x notin x.

    Templates may use previously defined names only, so unfolding always
    terminates.
    """

    def __init__(self):
        self.entries: dict[str, tuple[tuple[str, ...], Formula]] = {}

    def define(self, name: str, params: tuple[str, ...], template: Formula):
        if not IDENT_RE.match(name) or name in RESERVED:
            raise DefinitionError(f"bad definition name {name!r}")
        if name in self.entries:
            raise DefinitionError(f"duplicate definition {name!r}")
        if len(set(params)) != len(params):
            raise DefinitionError(f"duplicate parameters in {name!r}")
        if free_vars(template) != set(params):
            raise DefinitionError(
                f"free identifiers of {name!r} must be exactly its parameters"
            )
        for used in self._defapp_names(template):
            if used not in self.entries:
                raise DefinitionError(
                    f"{name!r} uses undefined {used!r}; define it first"
                )
        self.entries[name] = (tuple(params), template)

    @staticmethod
    def _defapp_names(f: Formula) -> set[str]:
        names = set()

        def walk(g):
            match g:
                case DefApp(n, _):
                    names.add(n)
                case Not(b) | Forall(_, b) | Exists(_, b):
                    walk(b)
                case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                    walk(l)
                    walk(r)

        walk(f)
        return names

    def unfold(self, f: Formula) -> Formula:
        """Replace every definition application by its instantiated template."""
        match f:
            case DefApp(name, args):
                if name not in self.entries:
                    raise DefinitionError(f"unknown definition {name!r}")
                params, template = self.entries[name]
                if len(params) != len(args):
                    raise DefinitionError(
                        f"{name!r} expects {len(params)} arguments, got {len(args)}"
                    )
                inst = subst_many(template, dict(zip(params, args)))
                return self.unfold(inst)
            case Not(b):
                return Not(self.unfold(b))
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                return type(f)(self.unfold(l), self.unfold(r))
            case Forall(v, b) | Exists(v, b):
                return type(f)(v, self.unfold(b))
            case _:
                return f


def unfold(defs: DefinitionTable, f: Formula) -> Formula:
    return defs.unfold(f)


_DEF_LINE_RE = re.compile(
    r"def\s+(?P<name>[a-z][a-zA-Z0-9_]*)\s*\((?P<params>[^)]*)\)\s*:=\s*(?P<body>.+)\Z"
)


def parse_def_line(line: str, defs: DefinitionTable):
    """Parse one `def name(p, q) := formula` declaration into defs."""
    m = _DEF_LINE_RE.match(line.strip())
    if not m:
        raise ParseError(f"bad definition line: {line.strip()!r}")
    params = tuple(p.strip() for p in m.group("params").split(",") if p.strip())
    for p in params:
        if not IDENT_RE.match(p) or p in RESERVED:
            raise ParseError(f"bad parameter {p!r} in definition")
    defs.define(m.group("name"), params, parse(m.group("body")))


def parse_defs(text: str) -> DefinitionTable:
    """Parse a definitions file: `def` lines, comments and blanks."""
    defs = DefinitionTable()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parse_def_line(line, defs)
    return defs
