"""The bundled regression corpus: tableau roots, proof scripts and model
sweeps around the set-of-all-non-self-membered-sets antinomy, each with a
frozen expected outcome.

Reports are deterministic: entries run in id order and the report text
contains no timing, so two runs of the same corpus are byte-identical.
Per-entry wall-clock is only surfaced on stdout by the CLI.
"""

from __future__ import annotations

import fnmatch
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import hilbert, model, tableau
from .syntax import DefinitionTable, Formula, parse, parse_defs


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    kind: str  # tableau-closed | tableau-open | script-accepted | model-valid | model-unsat
    input: str
    defs: str | None = None
    mode: str = ""  # "prove" | "refute" for tableau entries
    max_size: int = 3
    # formula groups that must appear together on some open branch
    require_branches: tuple[tuple[str, ...], ...] = ()

    @property
    def expected(self) -> str:
        return {
            "tableau-closed": "closed",
            "tableau-open": "budget-exhausted",
            "script-accepted": "accepted",
            "model-valid": "valid-up-to",
            "model-unsat": "unsat-up-to",
        }[self.kind]


ENTRIES: tuple[CorpusEntry, ...] = (
    CorpusEntry("eq11-models", "model-valid", "fig1.fol"),
    CorpusEntry("eq20-tableau", "tableau-closed", "eq20.fol", mode="prove"),
    CorpusEntry("eq24-models", "model-valid", "eq24.fol"),
    CorpusEntry("eq24-tableau", "tableau-closed", "eq24.fol", mode="prove"),
    CorpusEntry("fig1", "tableau-closed", "fig1.fol", mode="prove"),
    CorpusEntry(
        "fig2",
        "tableau-open",
        "r.fol",
        mode="prove",
        require_branches=(("b in a", "b in b"), ("b notin a", "b notin b")),
    ),
    CorpusEntry("fig3", "tableau-closed", "fig3.fol", defs="phi.defs", mode="prove"),
    CorpusEntry("fig4", "tableau-closed", "fig4.fol", defs="phi.defs", mode="prove"),
    CorpusEntry("fig5", "tableau-closed", "fig5.fol", mode="prove"),
    CorpusEntry("fig6", "tableau-closed", "fig6.fol", mode="refute"),
    CorpusEntry("lemma-li-script", "script-accepted", "lemma-li.hil"),
    CorpusEntry("lemma1-script", "script-accepted", "lemma1.hil"),
    CorpusEntry("r-schema-tableau", "tableau-closed", "r-schema.fol", mode="prove"),
    CorpusEntry("r-unsat-models", "model-unsat", "r.fol"),
    CorpusEntry("thm1-zf-script", "script-accepted", "thm1.hil"),
    CorpusEntry("thm2-script", "script-accepted", "thm2.hil"),
    CorpusEntry("thm3-4-script", "script-accepted", "thm3-4.hil"),
    CorpusEntry("thm5-script", "script-accepted", "thm5.hil"),
    CorpusEntry("uniqueness-models", "model-valid", "uniqueness.fol"),
)


def data_path(name: str = "") -> Path:
    base = resources.files("follab") / "corpus_data"
    return Path(str(base / name if name else base))


def read_text(name: str) -> str:
    return data_path(name).read_text()


def load_formulas(name: str, defs: DefinitionTable | None = None) -> list[Formula]:
    formulas = []
    for line in read_text(name).splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        f = parse(line)
        if defs is not None:
            f = defs.unfold(f)
        formulas.append(f)
    return formulas


def load_defs(name: str) -> DefinitionTable:
    return parse_defs(read_text(name))


@dataclass(frozen=True)
class EntryResult:
    id: str
    passed: bool
    expected: str
    actual: str
    millis: int


@dataclass
class CorpusReport:
    results: list[EntryResult]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def report_text(self) -> str:
        lines = [
            f"{r.id} {'PASS' if r.passed else 'FAIL'} {r.expected} {r.actual}"
            for r in self.results
        ]
        passed = sum(r.passed for r in self.results)
        lines.append(f"passed {passed} of {len(self.results)} entries")
        return "\n".join(lines) + "\n"

    def stdout_text(self) -> str:
        lines = [
            f"{r.id} {'PASS' if r.passed else 'FAIL'} {r.expected} {r.actual} "
            f"{r.millis}ms"
            for r in self.results
        ]
        passed = sum(r.passed for r in self.results)
        lines.append(f"passed {passed} of {len(self.results)} entries")
        return "\n".join(lines) + "\n"


def _run_tableau(entry: CorpusEntry) -> str:
    defs = load_defs(entry.defs) if entry.defs else None
    formulas = load_formulas(entry.input, defs)
    if entry.mode == "prove":
        (goal,) = formulas
        result = tableau.prove(goal)
    else:
        result = tableau.refute(formulas)
    actual = result.status
    if entry.require_branches and actual == "budget-exhausted":
        for group in entry.require_branches:
            wanted = [parse(text) for text in group]
            if not any(
                all(branch.contains(w) for w in wanted)
                for branch in result.open_branches
            ):
                return actual + "-missing-branches"
    return actual


def _run_script(entry: CorpusEntry) -> str:
    script = hilbert.parse_script(read_text(entry.input))
    verdict = script.verdict()
    if verdict.accepted:
        return "accepted"
    return f"rejected@{verdict.step_index}"


def _run_model(entry: CorpusEntry) -> str:
    (sentence,) = load_formulas(entry.input)
    report = model.validity_sweep(sentence, entry.max_size)
    return report.verdict


def run_entry(entry: CorpusEntry) -> EntryResult:
    start = time.perf_counter()
    if entry.kind.startswith("tableau"):
        actual = _run_tableau(entry)
    elif entry.kind == "script-accepted":
        actual = _run_script(entry)
    else:
        actual = _run_model(entry)
    millis = int((time.perf_counter() - start) * 1000)
    return EntryResult(entry.id, actual == entry.expected, entry.expected, actual, millis)


def run(filter_glob: str | None = None) -> CorpusReport:
    """Run the corpus (optionally an id glob) in id order."""
    chosen = sorted(ENTRIES, key=lambda e: e.id)
    if filter_glob is not None:
        chosen = [e for e in chosen if fnmatch.fnmatch(e.id, filter_glob)]
        if not chosen:
            raise ValueError(f"filter {filter_glob!r} matches no corpus entry")
    return CorpusReport([run_entry(e) for e in chosen])
