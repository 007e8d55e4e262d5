"""Semantic tableaux for first-order logic with equality.

The engine expands a tree of branches under a fair, deterministic
discipline: every branch keeps a FIFO queue of pending rule applications
in formula-arrival order.  Universal formulas hold a persistent queue
slot that re-enters at the tail after each instantiation and parks while
no uninstantiated branch constant exists.  A universal may invent a
fresh constant only when its branch has no constants at all and nothing
else is pending.

Budgets make the search total: once max_rule_applications is reached no
new universal instantiation starts, but all other pending rules still
run to completion (they cannot cascade forever), so on budget exhaustion
no applicable non-universal rule is left unapplied on any open branch.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .syntax import (
    And,
    DefApp,
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
    Term,
    all_names,
    canonical,
    has_defapp,
    promote_free,
    render,
    subst_many,
    substitute,
)


class BudgetError(ValueError):
    """Budget fields must be at least 1."""


@dataclass(frozen=True)
class Budget:
    max_rule_applications: int = 500
    max_universal_reuse: int = 3

    def __post_init__(self):
        if self.max_rule_applications < 1 or self.max_universal_reuse < 1:
            raise BudgetError("budget values must be >= 1")


@dataclass
class Node:
    id: int
    parent: int | None
    formula: Formula
    rule: str
    closes: bool = False


class TableauTree:
    """The expansion record: one node per added formula."""

    def __init__(self, budget: Budget):
        self.budget = budget
        self.nodes: list[Node] = []

    def add(self, parent: int | None, formula: Formula, rule: str) -> int:
        node = Node(len(self.nodes), parent, formula, rule)
        self.nodes.append(node)
        return node.id

    def children(self) -> dict[int | None, list[int]]:
        kids: dict[int | None, list[int]] = {}
        for n in self.nodes:
            kids.setdefault(n.parent, []).append(n.id)
        return kids


@dataclass(frozen=True)
class Closure:
    """Why a branch closed; the formulas are literally on the branch."""

    kind: str  # "complementary" | "falsum" | "neq-refl"
    formulas: tuple[Formula, ...]


class Branch:
    _ids = itertools.count()

    def __init__(self):
        self.id = next(Branch._ids)
        self.formulas: list[Formula] = []
        self.by_key: dict[tuple, Formula] = {}
        self.ground_terms: list[str] = []
        self.instantiation_count: dict[tuple, int] = {}
        self.status = "open"  # open | closed | split
        self.closure: Closure | None = None
        self.tip: int | None = None
        self._queue: deque = deque()
        self._gamma_attempted: set[tuple] = set()
        self._gamma_parked: list[Formula] = []
        self._equalities: list[Eq] = []
        self._eq_done: set[tuple] = set()
        self.gamma_blocked = False

    def contains(self, f: Formula) -> bool:
        return canonical(f) in self.by_key

    def clone(self) -> "Branch":
        b = Branch()
        b.formulas = list(self.formulas)
        b.by_key = dict(self.by_key)
        b.ground_terms = list(self.ground_terms)
        b.instantiation_count = dict(self.instantiation_count)
        b.status = "open"
        b.tip = self.tip
        b._queue = deque(self._queue)
        b._gamma_attempted = set(self._gamma_attempted)
        b._gamma_parked = list(self._gamma_parked)
        b._equalities = list(self._equalities)
        b._eq_done = set(self._eq_done)
        b.gamma_blocked = self.gamma_blocked
        return b


@dataclass
class TableauResult:
    status: str  # "closed" | "open-saturated" | "budget-exhausted"
    tree: TableauTree
    branches: list[Branch]
    applications: int

    @property
    def is_closed(self) -> bool:
        return self.status == "closed"

    @property
    def open_branches(self) -> list[Branch]:
        return [b for b in self.branches if b.status == "open"]

    @property
    def closed_branches(self) -> list[Branch]:
        return [b for b in self.branches if b.status == "closed"]

    def verdict_word(self) -> str:
        return {
            "closed": "CLOSED",
            "open-saturated": "OPEN",
            "budget-exhausted": "BUDGET",
        }[self.status]


@dataclass
class _App:
    branch: Branch
    rule: str
    source: Formula | None
    adds: list[Formula] = field(default_factory=list)
    sides: list[list[Formula]] | None = None  # set for splitting rules
    gamma_requeue: bool = False


def _push_neg(f: Formula) -> Formula:
    """Rewrite a negated quantifier, cascading through the quantifier
    prefix: !forall x. exists y. p becomes exists x. forall y. !p."""
    match f:
        case Forall(v, b):
            inner = _push_neg(b) if isinstance(b, (Forall, Exists)) else Not(b)
            return Exists(v, inner)
        case Exists(v, b):
            inner = _push_neg(b) if isinstance(b, (Forall, Exists)) else Not(b)
            return Forall(v, inner)
    raise ValueError("not a quantified formula")


class TableauProver:
    """Stateful engine; step() applies exactly one rule, run() loops."""

    def __init__(self, premises: list[Formula], budget: Budget | None = None):
        self.budget = budget or Budget()
        for p in premises:
            if has_defapp(p):
                raise ValueError(
                    "premises contain definition applications; unfold them first"
                )
        self.premises = [promote_free(p) for p in premises]
        self.tree = TableauTree(self.budget)
        self.applications = 0
        self._status: str | None = None
        self._saturated: Branch | None = None
        self._split_children: list[Branch] | None = None
        self._taken = set()
        for p in self.premises:
            self._taken |= all_names(p)
        self._fresh_iter = self._fresh_names()
        root = Branch()
        self.branches: list[Branch] = [root]
        self._rotation: deque[Branch] = deque([root])
        for p in self.premises:
            if root.status == "closed":
                break
            self._attach(root, p, "premise")
        self._check_terminal()

    # ------------------------------------------------------------- naming

    def _fresh_names(self):
        for suffix in itertools.count():
            for letter in "abcdefghijklmnopqrstuvwxyz":
                name = letter if suffix == 0 else f"{letter}{suffix}"
                if name not in self._taken:
                    yield name

    def _fresh_const(self) -> str:
        name = next(self._fresh_iter)
        self._taken.add(name)
        return name

    # ------------------------------------------------------------ attach

    def _attach(self, br: Branch, f: Formula, rule: str):
        """Add one formula to a branch: tree node, queue jobs, closure."""
        key = canonical(f)
        if key in br.by_key:
            return
        br.tip = self.tree.add(br.tip, f, rule)
        br.formulas.append(f)
        br.by_key[key] = f

        for name in sorted(_constants_of(f)):
            if name not in br.ground_terms:
                br.ground_terms.append(name)
                # a new constant re-arms parked universals
                for g in br._gamma_parked:
                    br._queue.append(("gamma", g))
                br._gamma_parked.clear()

        self._enqueue_jobs(br, f)

        # closure checks: falsum, negated self-identity, complementary pair.
        # Double negations are left to the double-negation rule (which always
        # runs), so closing pairs surface at the innermost level, the way the
        # trees are drawn.
        match f:
            case Falsum():
                self._close(br, Closure("falsum", (f,)))
                return
            case Not(Eq(l, r)) if l.name == r.name:
                self._close(br, Closure("neq-refl", (f,)))
                return
        if isinstance(f, Not) and not isinstance(f.body, Not):
            inner = canonical(f.body)
            if inner in br.by_key:
                self._close(br, Closure("complementary", (br.by_key[inner], f)))
                return
        if not isinstance(f, Not):
            neg = canonical(Not(f))
            if neg in br.by_key:
                self._close(br, Closure("complementary", (f, br.by_key[neg])))

    def _enqueue_jobs(self, br: Branch, f: Formula):
        match f:
            case Forall():
                br._queue.append(("gamma", f))
            case Eq(l, r) if l.name != r.name:
                for g in br.formulas:
                    if g is not f:
                        br._queue.append(("eqsubst", f, g))
                br._equalities.append(f)
            case (
                Not(Not(_))
                | Not(Or(_, _))
                | Not(Implies(_, _))
                | Not(And(_, _))
                | Not(Iff(_, _))
                | Not(Forall(_, _))
                | Not(Exists(_, _))
                | And(_, _)
                | Or(_, _)
                | Implies(_, _)
                | Iff(_, _)
                | Exists(_, _)
            ):
                br._queue.append(("expand", f))
        for e in br._equalities:
            if e is not f:
                br._queue.append(("eqsubst", e, f))

    def _close(self, br: Branch, closure: Closure):
        br.status = "closed"
        br.closure = closure
        if br.tip is not None:
            self.tree.nodes[br.tip].closes = True

    # ----------------------------------------------------- rule selection

    def _budget_left(self) -> bool:
        return self.applications < self.budget.max_rule_applications

    def _gamma_pick(self, br: Branch, f: Formula) -> str | None:
        fkey = canonical(f)
        for c in br.ground_terms:
            if (fkey, c) in br._gamma_attempted:
                continue
            if br.instantiation_count.get((fkey, c), 0) >= self.budget.max_universal_reuse:
                continue
            return c
        return None

    def _find_application(self, br: Branch) -> _App | None:
        while br._queue:
            job = br._queue.popleft()
            kind = job[0]
            if kind == "expand":
                app = self._decompose(br, job[1])
                if app is not None:
                    return app
            elif kind == "gamma":
                f = job[1]
                app = None
                while app is None:
                    c = self._gamma_pick(br, f)
                    if c is None:
                        break
                    if not self._budget_left():
                        br.gamma_blocked = True
                        br._gamma_parked.append(f)
                        app = "blocked"
                        break
                    app = self._gamma_app(br, f, c)
                if app == "blocked":
                    continue
                if app is not None:
                    return app
                if not br.ground_terms and not br._queue:
                    # nothing else can ever supply a constant: invent one
                    if not self._budget_left():
                        br.gamma_blocked = True
                        br._gamma_parked.append(f)
                        continue
                    return self._gamma_app(br, f, self._fresh_const())
                br._gamma_parked.append(f)
                continue
            else:  # eqsubst
                _, e, target = job
                pair = (canonical(e), canonical(target))
                if pair in br._eq_done:
                    continue
                br._eq_done.add(pair)
                s, t = e.lhs.name, e.rhs.name
                adds = []
                for frm, to in ((s, t), (t, s)):
                    g = subst_many(target, {frm: Term("const", to)})
                    if canonical(g) not in br.by_key and all(
                        canonical(g) != canonical(a) for a in adds
                    ):
                        adds.append(g)
                if adds:
                    return _App(br, f"eq-subst {s}={t}", target, adds)
        return None

    def _gamma_app(self, br: Branch, f: Formula, c: str) -> "_App | None":
        """Instantiate a universal with c; None if the instance is already
        on the branch (the pair is still marked as used)."""
        fkey = canonical(f)
        br._gamma_attempted.add((fkey, c))
        inst = substitute(f.body, f.var, Term("const", c))
        if canonical(inst) in br.by_key:
            return None
        br.instantiation_count[(fkey, c)] = (
            br.instantiation_count.get((fkey, c), 0) + 1
        )
        return _App(br, f"gamma {c}", f, [inst], gamma_requeue=True)

    def _decompose(self, br: Branch, f: Formula) -> _App | None:
        def single(rule, adds):
            missing = []
            for a in adds:
                if canonical(a) not in br.by_key and all(
                    canonical(a) != canonical(m) for m in missing
                ):
                    missing.append(a)
            if not missing:
                return None
            return _App(br, rule, f, missing)

        def split(rule, left, right):
            sides = []
            for side in (left, right):
                missing = [a for a in side if canonical(a) not in br.by_key]
                if not missing:
                    return None  # one disjunct already holds on the branch
                sides.append(missing)
            return _App(br, rule, f, sides=sides)

        match f:
            case Not(Not(b)):
                return single("double-negation", [b])
            case And(l, r):
                return single("alpha-and", [l, r])
            case Not(Or(l, r)):
                return single("alpha-not-or", [Not(l), Not(r)])
            case Not(Implies(l, r)):
                return single("alpha-not-implies", [l, Not(r)])
            case Or(l, r):
                return split("beta-or", [l], [r])
            case Not(And(l, r)):
                return split("beta-not-and", [Not(l)], [Not(r)])
            case Implies(l, r):
                return split("beta-implies", [Not(l)], [r])
            case Iff(l, r):
                return split("iff", [l, r], [Not(l), Not(r)])
            case Not(Iff(l, r)):
                return split("not-iff", [l, Not(r)], [Not(l), r])
            case Not(Forall() as q) | Not(Exists() as q):
                return single("neg-quantifier", [_push_neg(q)])
            case Exists(v, b):
                c = self._fresh_const()
                inst = substitute(b, v, Term("const", c))
                return single(f"delta {c}", [inst])
        return None

    # -------------------------------------------------------------- apply

    def _apply(self, app: _App) -> str:
        self.applications += 1
        br = app.branch
        if app.sides is None:
            for a in app.adds:
                if br.status == "closed":
                    break
                self._attach(br, a, app.rule)
            if app.gamma_requeue and br.status == "open":
                br._queue.append(("gamma", app.source))
            added = ", ".join(render(a) for a in app.adds)
            return f"{app.rule}: {render(app.source)} => {added or '(nothing new)'}"
        children = []
        for side in app.sides:
            child = br.clone()
            self.branches.append(child)
            children.append(child)
            for a in side:
                if child.status == "closed":
                    break
                self._attach(child, a, app.rule)
        br.status = "split"
        self._split_children = children
        parts = " | ".join(
            "{" + ", ".join(render(a) for a in side) + "}" for side in app.sides
        )
        return f"{app.rule}: {render(app.source)} => {parts}"

    # ---------------------------------------------------------- stepping

    def _check_terminal(self):
        if all(b.status == "closed" for b in self.branches if b.status != "split"):
            self._status = "closed"

    def step(self) -> str:
        """Apply the next rule in fair order; after termination, return the
        terminal status unchanged ("closed", "saturated" or
        "budget-exhausted")."""
        if self._status is not None:
            return "saturated" if self._status == "open-saturated" else self._status
        while self._rotation:
            br = self._rotation[0]
            if br.status != "open":
                self._rotation.popleft()
                continue
            app = self._find_application(br)
            if app is None:
                if not br.gamma_blocked:
                    self._status = "open-saturated"
                    self._saturated = br
                    return "saturated"
                self._rotation.popleft()  # starved by the budget
                continue
            self._split_children = None
            desc = self._apply(app)
            self._rotation.popleft()
            if self._split_children is not None:
                self._rotation.extend(
                    c for c in self._split_children if c.status == "open"
                )
            elif br.status == "open":
                self._rotation.append(br)
            if not any(b.status == "open" for b in self.branches):
                self._status = "closed"
            return desc
        # rotation drained: every open branch is budget-starved
        if any(b.status == "open" for b in self.branches):
            self._status = "budget-exhausted"
        else:
            self._status = "closed"
        return self._status

    def run(self) -> TableauResult:
        while self._status is None:
            self.step()
        leaves = [b for b in self.branches if b.status != "split"]
        return TableauResult(self._status, self.tree, leaves, self.applications)


def refute(premises: list[Formula], budget: Budget | None = None) -> TableauResult:
    """Expand a tableau rooted at the given premises.  Closed means the
    premise set is unsatisfiable."""
    return TableauProver(premises, budget).run()


def prove(goal: Formula, budget: Budget | None = None) -> TableauResult:
    """Closed means the goal is provable: the tableau refutes its negation."""
    return refute([Not(goal)], budget)


def _constants_of(f: Formula) -> set[str]:
    """Constant names in a branch formula (branch formulas are sentences
    over constants)."""
    names: set[str] = set()

    def walk(g, bound):
        match g:
            case In(l, r) | Eq(l, r):
                names.update(t.name for t in (l, r) if t.name not in bound)
            case DefApp(_, args):
                names.update(t.name for t in args if t.name not in bound)
            case Not(b):
                walk(b, bound)
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                walk(l, bound)
                walk(r, bound)
            case Forall(v, b) | Exists(v, b):
                walk(b, bound | {v})

    walk(f, frozenset())
    return names


# --------------------------------------------------------------------------
# Export
# --------------------------------------------------------------------------

def export_tree(tree: TableauTree, fmt: str = "ascii") -> str:
    """Render the expansion tree; ascii is an indented outline with x marks
    on closed leaves, dot is a graphviz digraph."""
    header = (
        f"budget: {tree.budget.max_rule_applications} rule applications, "
        f"universal reuse {tree.budget.max_universal_reuse}"
    )
    kids = tree.children()
    if fmt == "ascii":
        lines = [header]

        def walk(nid, depth):
            n = tree.nodes[nid]
            mark = "  ×" if n.closes else ""
            lines.append(f"{'  ' * depth}{render(n.formula)}  [{n.rule}]{mark}")
            for k in kids.get(nid, []):
                walk(k, depth + 1)

        for root in kids.get(None, []):
            walk(root, 0)
        return "\n".join(lines) + "\n"
    if fmt == "dot":
        lines = ["digraph tableau {", f'  label="{header}";', "  node [shape=plaintext];"]
        for n in tree.nodes:
            shape = ' shape=box peripheries=2' if n.closes else ""
            label = render(n.formula, "dot-label")
            if n.closes:
                label += "  ×"
            lines.append(f'  n{n.id} [label="{label}"{shape}];')
        for n in tree.nodes:
            if n.parent is not None:
                lines.append(f'  n{n.parent} -> n{n.id} [label="{n.rule}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
