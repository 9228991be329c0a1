"""Musical dictionaries and score output (MIDI and plain text)."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .markov import FLAT, SHARP, NoteAlphabet, ascii_name, normalize_name, pitch_class
from .qwalk import parse_vertex, vertex_label

log = logging.getLogger(__name__)

TICKS_PER_QUARTER = 480
VELOCITY = 96
CHANNEL = 0
DEFAULT_TEMPO = 120.0
DEFAULT_OCTAVE = 4

_LETTER_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_PITCH_RE = re.compile(r"^([A-Ga-g][#b♯♭]*)(-?\d+)$")


@dataclass(frozen=True)
class Pitch:
    """A pitch; ``spelling`` is display-only (G♯ and A♭ are the same pitch)."""

    pitch_class: int
    octave: int
    spelling: str = ""

    def __post_init__(self):
        if not 0 <= self.pitch_class <= 11:
            raise ValueError(f"pitch class must be 0..11, got {self.pitch_class}")
        if self.spelling and pitch_class(self.spelling) != self.pitch_class:
            raise ValueError(f"spelling {self.spelling!r} is not pitch class {self.pitch_class}")
        if not 0 <= self.midi_number <= 127:
            raise ValueError(f"{self.name()} is outside the MIDI note range")

    @property
    def midi_number(self) -> int:
        return 12 * (self.octave + 1) + self.pitch_class

    def name(self, ascii: bool = False) -> str:
        spelled = self.spelling or _DEFAULT_SPELLING[self.pitch_class]
        raw = _LETTER_PC[spelled[0]] + spelled.count(SHARP) - spelled.count(FLAT)
        written_octave = (self.midi_number - raw) // 12 - 1
        return (ascii_name(spelled) if ascii else spelled) + str(written_octave)

    @classmethod
    def parse(cls, text: str) -> "Pitch":
        """Parse scientific pitch notation such as ``"C4"``, ``"Db4"`` or ``"G♭4"``."""
        m = _PITCH_RE.match(text.strip())
        if not m:
            raise ValueError(f"not a pitch: {text!r}")
        spelled = normalize_name(m.group(1))
        octave = int(m.group(2))
        midi = 12 * (octave + 1) + _LETTER_PC[spelled[0]]
        midi += spelled.count(SHARP) - spelled.count(FLAT)
        # octave label follows the letter; Cb4 is MIDI 59
        return cls(midi % 12, midi // 12 - 1, spelled)


_DEFAULT_SPELLING = ("C", "C♯", "D", "D♯", "E", "F", "F♯", "G", "G♯", "A", "A♯", "B")


def twelve_tone_alphabet() -> NoteAlphabet:
    return NoteAlphabet()


def alphabet_pitch(alphabet: NoteAlphabet, index: int, octave: int = DEFAULT_OCTAVE) -> Pitch:
    return Pitch(alphabet.pitch_class(index), octave, alphabet.label(index))


PERSIAN_SCALE = ("C4", "D♭4", "E4", "F4", "G♭4", "A♭4", "B4", "C5")

# Rhythm figures in beats for the six codes not fixed by the walk example.
_OTHER_RHYTHMS = (
    Fraction(2), Fraction(3), Fraction(1, 2), Fraction(3, 2), Fraction(3, 4), Fraction(1, 4)
)


def _codes_by_label() -> list[int]:
    return sorted(range(8), key=vertex_label)


def persian_scale_dict() -> dict[int, Pitch]:
    """Vertex code -> pitch; labels 000..111 take the scale degrees in order."""
    return {code: Pitch.parse(p) for code, p in zip(_codes_by_label(), PERSIAN_SCALE)}


def rhythm_dict() -> dict[int, Fraction]:
    """Vertex code -> duration in beats; 100 is a crochet and 000 a semibreve."""
    out = {parse_vertex("100"): Fraction(1), parse_vertex("000"): Fraction(4)}
    rest = [c for c in _codes_by_label() if c not in out]
    out.update(zip(rest, _OTHER_RHYTHMS))
    return out


def _beats(value) -> Fraction:
    b = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
    if b <= 0:
        raise ValueError(f"durations must be positive, got {value!r}")
    return b


@dataclass(frozen=True)
class MusicDictionary:
    pitch_map: Mapping[int, Pitch]
    rhythm_map: Mapping[int, Fraction]

    def __post_init__(self):
        for name, m in (("pitch", self.pitch_map), ("rhythm", self.rhythm_map)):
            if sorted(m) != list(range(8)):
                raise ValueError(f"{name} dictionary must cover all 8 cube vertices")

    @classmethod
    def default(cls) -> "MusicDictionary":
        return cls(persian_scale_dict(), rhythm_dict())

    @classmethod
    def from_dict(cls, data: Mapping) -> "MusicDictionary":
        """Overlay ``{"pitch": {"000": "C4"}, "rhythm": {"000": 4}}`` on the defaults."""
        pitch = dict(persian_scale_dict())
        rhythm = dict(rhythm_dict())
        for label, p in (data.get("pitch") or {}).items():
            pitch[parse_vertex(label)] = Pitch.parse(p)
        for label, r in (data.get("rhythm") or {}).items():
            rhythm[parse_vertex(label)] = _beats(r)
        return cls(pitch, rhythm)

    @classmethod
    def load(cls, path: str | Path) -> "MusicDictionary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def note(self, pitch_code: int, rhythm_code: int) -> tuple[Pitch, Fraction]:
        return self.pitch_map[pitch_code], self.rhythm_map[rhythm_code]


@dataclass
class Score:
    notes: list[tuple[Pitch, Fraction]] = field(default_factory=list)
    tempo_bpm: float = DEFAULT_TEMPO

    def __len__(self) -> int:
        return len(self.notes)


def score_from_codes(codes: Sequence[tuple[int, int]],
                     dictionary: Optional[MusicDictionary] = None,
                     tempo_bpm: float = DEFAULT_TEMPO) -> Score:
    d = dictionary or MusicDictionary.default()
    return Score([d.note(p, r) for p, r in codes], tempo_bpm)


def score_from_indices(indices: Sequence[int], alphabet: NoteAlphabet,
                       beats=1, octave: int = DEFAULT_OCTAVE,
                       tempo_bpm: float = DEFAULT_TEMPO) -> Score:
    b = _beats(beats)
    return Score([(alphabet_pitch(alphabet, i, octave), b) for i in indices], tempo_bpm)


def _vlq(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def write_midi(score: Score, tempo_bpm: Optional[float] = None) -> bytes:
    """Standard MIDI file, format 0, one track, 480 ticks per quarter note."""
    if not score.notes:
        raise ValueError("cannot write an empty score")
    bpm = tempo_bpm if tempo_bpm is not None else score.tempo_bpm
    if not bpm > 0:
        raise ValueError("tempo must be positive")
    track = bytearray()
    track += b"\x00\xff\x51\x03" + round(60_000_000 / bpm).to_bytes(3, "big")
    for pitch, beats in score.notes:
        ticks = Fraction(beats) * TICKS_PER_QUARTER
        if ticks.denominator != 1 or ticks <= 0:
            raise ValueError(f"duration {beats} beats is not a whole number of ticks")
        note = pitch.midi_number
        track += b"\x00" + bytes([0x90 | CHANNEL, note, VELOCITY])
        track += _vlq(int(ticks)) + bytes([0x80 | CHANNEL, note, 0])
    track += b"\x00\xff\x2f\x00"
    header = b"MThd" + (6).to_bytes(4, "big") + (0).to_bytes(2, "big")
    header += (1).to_bytes(2, "big") + TICKS_PER_QUARTER.to_bytes(2, "big")
    return header + b"MTrk" + len(track).to_bytes(4, "big") + bytes(track)


def _format_beats(b: Fraction) -> str:
    return str(b.numerator) if b.denominator == 1 else format(float(b), "g")


def render_text(score: Score, ascii: bool = False) -> str:
    """One ``"<name><octave> <beats>"`` line per note."""
    if not score.notes:
        log.warning("rendering an empty score")
        return ""
    return "".join(f"{p.name(ascii)} {_format_beats(Fraction(b))}\n" for p, b in score.notes)
