"""Twelve-tone sequencing rules as rule sets, Markov chains and target matrices."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

SHARP = "♯"
FLAT = "♭"

_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_NAME_RE = re.compile(r"^([A-Ga-g])([#b♯♭]*)$")

DEFAULT_LABELS = ("E", "F", "G", "C♯", "F♯", "D♯", "G♯", "D", "B", "C", "A", "A♯")

# Successor lists exactly as the twelve rules list them. Rule 7 (C) is read
# with all four notes allowed.
DEFAULT_RULES = {
    "E": ("F", "D♯"),
    "D♯": ("E", "C♯", "F♯", "G♯"),
    "C♯": ("G", "F♯", "D♯"),
    "G": ("F", "C♯", "D"),
    "D": ("F", "G", "G♯", "B"),
    "F": ("E", "G", "D", "C"),
    "C": ("F", "F♯", "B", "A"),
    "F♯": ("C♯", "D♯", "C", "A"),
    "A": ("F♯", "G♯", "C", "A♯"),
    "G♯": ("D♯", "D", "B", "A"),
    "B": ("G♯", "D", "C", "A♯"),
    "A♯": ("B", "A"),
}

# Row order of the rule table (the inverted series).
DEFAULT_RULE_ORDER = ("E", "D♯", "C♯", "G", "D", "F", "C", "F♯", "A", "G♯", "B", "A♯")


def normalize_name(name: str) -> str:
    """Canonical spelling with Unicode accidentals, e.g. ``"c#"`` -> ``"C♯"``."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ValueError(f"not a note name: {name!r}")
    letter, acc = m.groups()
    acc = acc.replace("#", SHARP).replace("b", FLAT)
    return letter.upper() + acc


def pitch_class(name: str) -> int:
    """Semitone index 0-11 (C = 0) of a note name; enharmonic spellings agree."""
    canon = normalize_name(name)
    pc = _LETTER_PC[canon[0]]
    pc += canon.count(SHARP) - canon.count(FLAT)
    return pc % 12


def ascii_name(name: str) -> str:
    return name.replace(SHARP, "#").replace(FLAT, "b")


@dataclass(frozen=True)
class NoteAlphabet:
    """Ordered note labels; index ``i`` corresponds to basis state ``|i>``."""

    symbols: tuple[str, ...] = DEFAULT_LABELS

    def __post_init__(self):
        syms = tuple(normalize_name(s) for s in self.symbols)
        if len(syms) != 12:
            raise ValueError(f"a note alphabet needs 12 symbols, got {len(syms)}")
        if len({pitch_class(s) for s in syms}) != 12:
            raise ValueError("alphabet symbols must be 12 distinct pitch classes")
        object.__setattr__(self, "symbols", syms)

    def __len__(self) -> int:
        return len(self.symbols)

    def label(self, index: int, ascii: bool = False) -> str:
        s = self.symbols[index]
        return ascii_name(s) if ascii else s

    def index(self, name: str) -> int:
        """Index of ``name``; accepts ASCII or Unicode accidentals and enharmonics."""
        try:
            pc = pitch_class(name)
        except ValueError:
            raise ValueError(
                f"unknown note {name!r}; expected one of {', '.join(self.symbols)}"
            ) from None
        for i, s in enumerate(self.symbols):
            if pitch_class(s) == pc:
                return i
        raise ValueError(f"unknown note {name!r}; expected one of {', '.join(self.symbols)}")

    def pitch_class(self, index: int) -> int:
        return pitch_class(self.symbols[index])


@dataclass(frozen=True)
class RuleSet:
    """Allowed successors per alphabet index. Notes without a rule are absent.

    ``row_order`` lists the alphabet index owning each matrix row; the default
    rules use the inverted series as row order, so row 1 is the D♯ rule.
    """

    successors: Mapping[int, frozenset[int]]
    alphabet: NoteAlphabet = NoteAlphabet()
    row_order: tuple[int, ...] = tuple(range(12))

    def __post_init__(self):
        clean = {}
        n = len(self.alphabet)
        for r, succ in self.successors.items():
            succ = frozenset(int(c) for c in succ)
            if not 0 <= r < n:
                raise ValueError(f"rule index {r} out of range")
            if not succ:
                raise ValueError(f"rule for {self.alphabet.label(r)} has no successors")
            if any(not 0 <= c < n for c in succ):
                raise ValueError(f"rule for {self.alphabet.label(r)} names an index out of range")
            clean[int(r)] = succ
        object.__setattr__(self, "successors", dict(sorted(clean.items())))
        order = tuple(int(i) for i in self.row_order)
        if sorted(order) != list(range(n)):
            raise ValueError("row_order must be a permutation of the alphabet indices")
        object.__setattr__(self, "row_order", order)

    def row_of(self, note: int) -> int:
        """Matrix row holding the rule for alphabet index ``note``."""
        return self.row_order.index(note)

    def __getitem__(self, index: int) -> frozenset[int]:
        return self.successors[index]

    def allows(self, current: int, nxt: int) -> bool:
        return nxt in self.successors.get(current, ())

    def violations(self, sequence: Sequence[int]) -> list[tuple[int, int, int]]:
        """``(position, from, to)`` for every consecutive pair the rules forbid."""
        return [
            (i, a, b)
            for i, (a, b) in enumerate(zip(sequence, sequence[1:]))
            if not self.allows(a, b)
        ]

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet.symbols),
            "rules": {
                self.alphabet.label(r): [self.alphabet.label(c) for c in sorted(self[r])]
                for r in self.row_order
                if r in self.successors
            },
        }


def ruleset_default() -> RuleSet:
    alpha = NoteAlphabet()
    return RuleSet(
        {alpha.index(k): frozenset(alpha.index(v) for v in vs) for k, vs in DEFAULT_RULES.items()},
        alpha,
        tuple(alpha.index(n) for n in DEFAULT_RULE_ORDER),
    )


class RuleFileError(ValueError):
    pass


def ruleset_from_dict(data: Mapping) -> RuleSet:
    """Build a complete rule set from the JSON rule-file structure.

    ``rules`` is either a mapping of note name to successor names (matrix rows
    follow the mapping order) or a list of 12 successor lists in alphabet
    order. Every note must have a non-empty rule.
    """
    try:
        alphabet = NoteAlphabet(tuple(data.get("alphabet", DEFAULT_LABELS)))
    except ValueError as exc:
        raise RuleFileError(f"bad alphabet: {exc}") from None
    rules = data.get("rules")
    if isinstance(rules, Mapping):
        items = list(rules.items())
    elif isinstance(rules, list):
        if len(rules) != 12:
            raise RuleFileError(f"rules list needs 12 rows, got {len(rules)}")
        items = [(alphabet.label(i), row) for i, row in enumerate(rules)]
    else:
        raise RuleFileError("rule file needs a 'rules' object or list")

    succ: dict[int, frozenset[int]] = {}
    for name, row in items:
        try:
            r = alphabet.index(name)
            if not row:
                raise RuleFileError(f"rule row for {name} is empty")
            succ[r] = frozenset(alphabet.index(c) for c in row)
        except RuleFileError:
            raise
        except (ValueError, TypeError) as exc:
            raise RuleFileError(f"rule row for {name}: {exc}") from None
    missing = [alphabet.label(i) for i in range(12) if i not in succ]
    if missing:
        raise RuleFileError(f"no rule given for {', '.join(missing)}")
    if len(items) != 12:
        raise RuleFileError("each note may have only one rule")
    return RuleSet(succ, alphabet, tuple(succ))


def load_ruleset(path: str | Path) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RuleFileError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(data, list):
        data = {"rules": data}
    return ruleset_from_dict(data)


def to_target_matrix(rules: RuleSet) -> np.ndarray:
    """Binary matrix: row ``k`` marks the successors of ``rules.row_order[k]``.

    Columns are alphabet indices.
    """
    n = len(rules.alphabet)
    t = np.zeros((n, n), dtype=np.int8)
    for k, note in enumerate(rules.row_order):
        if note in rules.successors:
            t[k, sorted(rules[note])] = 1
    return t


def to_markov(rules: RuleSet) -> np.ndarray:
    t = to_target_matrix(rules).astype(np.float64)
    sums = t.sum(axis=1, keepdims=True)
    return np.divide(t, sums, out=np.zeros_like(t), where=sums > 0)


def walk1d_matrix(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("a one-dimensional walk needs at least 2 notes")
    m = np.zeros((n, n))
    for i in range(1, n - 1):
        m[i, i - 1] = m[i, i + 1] = 0.5
    m[0, 1] = 1.0
    m[n - 1, n - 2] = 1.0
    return m


def classical_sample(matrix: np.ndarray, current: int, rng) -> int:
    """Draw a column from row ``current`` of a row-stochastic matrix.

    ``rng`` needs a ``random()`` method returning a float in [0, 1). For a
    rule-set chain pass ``rules.row_of(note)`` as the row.
    """
    row = np.asarray(matrix, dtype=np.float64)[current]
    if not np.any(row > 0):
        raise ValueError(f"row {current} has no allowed successors")
    cdf = np.cumsum(row)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    if k >= len(row):
        k = int(np.flatnonzero(row > 0)[-1])
    return k
