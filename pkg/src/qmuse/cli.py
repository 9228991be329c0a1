"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 internal invariant
violation (a generated sequence failed its post-check).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import basak_miranda as bm
from . import music, qsim, qwalk
from .markov import NoteAlphabet, RuleFileError, load_ruleset, ruleset_default

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 2, 3, 4
FORMATS = ("midi", "csv", "json", "text")
_SUFFIX_FORMAT = {".mid": "midi", ".midi": "midi", ".csv": "csv", ".json": "json",
                  ".txt": "text", ".text": "text"}


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be in 0..2**64-1")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _vertex(text: str) -> int:
    try:
        return qwalk.parse_vertex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser, shots_default: int = 40) -> None:
    p.add_argument("--seed", type=_seed, default=None,
                   help="master seed (falls back to $QMUSE_SEED, then 0)")
    p.add_argument("--shots", type=_positive, default=shots_default)
    p.add_argument("--threads", type=_positive, default=1,
                   help="threads for shot sampling; output does not depend on it")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", action="append", default=[], metavar="PATH",
                   help="output file; repeatable, format taken from the suffix")
    p.add_argument("--format", choices=FORMATS, default=None,
                   help="force the output format for every --out")
    p.add_argument("--tempo", type=float, default=music.DEFAULT_TEMPO)
    p.add_argument("--ascii", action="store_true", help="ASCII accidentals in text output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("walk1d", help="one-dimensional walk driven by a one-qubit die")
    p.add_argument("--start", required=True, help="start note, e.g. C# or D♭")
    p.add_argument("--steps", type=_non_negative, default=16)
    _add_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_walk1d)

    p = sub.add_parser("cubewalk", help="pitch/rhythm walk on the 3-cube")
    p.add_argument("--start-pitch", type=_vertex, default=qwalk.parse_vertex("000"))
    p.add_argument("--start-rhythm", type=_vertex, default=qwalk.parse_vertex("100"))
    p.add_argument("--steps", type=_non_negative, default=29)
    p.add_argument("--dictionary", default=None, help="JSON pitch/rhythm dictionary")
    _add_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_cubewalk)

    p = sub.add_parser("basak-miranda", help="rule-constrained Grover note selection")
    p.add_argument("--start", default="D#")
    p.add_argument("--length", type=_positive, default=12)
    p.add_argument("--rules", default=None, help="JSON rule file")
    p.add_argument("--iterations", type=_positive, default=None,
                   help="override the amplification round count")
    p.add_argument("--beats", type=float, default=1.0, help="duration of every note")
    _add_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_basak_miranda)

    p = sub.add_parser("demo-grover", help="two-qubit amplitude-amplification walkthrough")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    _add_common(p)
    p.set_defaults(func=cmd_demo_grover)
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QMUSE_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"QMUSE_SEED: {exc}") from None


def _outputs(args) -> list[tuple[Path, str]]:
    out = []
    for path in args.out:
        path = Path(path)
        fmt = args.format or _SUFFIX_FORMAT.get(path.suffix.lower())
        if fmt is None:
            raise UsageError(f"cannot infer output format of {path}; use --format")
        out.append((path, fmt))
    return out


def _write(outputs, writers: dict[str, Callable[[], bytes | str]], stdout_format: str = "text"):
    if not outputs:
        data = writers[stdout_format]()
        sys.stdout.write(data if isinstance(data, str) else data.decode())
        return
    for path, fmt in outputs:
        data = writers[fmt]()
        if isinstance(data, str):
            data = data.encode("utf-8")
        path.write_bytes(data)


def cmd_walk1d(args) -> int:
    alphabet = NoteAlphabet()
    try:
        start = alphabet.index(args.start)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    outputs = _outputs(args)
    seed = _resolve_seed(args)
    config = qwalk.WalkConfig(steps=args.steps, shots=1, seed=seed, threads=args.threads)
    notes, rolls = qwalk.walk1d_generate(start, args.steps, config, len(alphabet))

    for a, b in zip(notes, notes[1:]):
        if abs(a - b) != 1:
            raise InvariantError(f"walk jumped from index {a} to {b}")

    score = music.score_from_indices(notes, alphabet, tempo_bpm=args.tempo)

    def csv_text():
        lines = ["step,index,note,die"]
        for k, n in enumerate(notes):
            die = "" if k == 0 else str(rolls[k - 1])
            lines.append(f"{k},{n},{alphabet.label(n, ascii=True)},{die}")
        return "\n".join(lines) + "\n"

    def json_text():
        return json.dumps({
            "seed": seed,
            "sequence": [alphabet.label(n) for n in notes],
            "indices": notes,
            "die": rolls,
        }, indent=2, ensure_ascii=False) + "\n"

    _write(outputs, {
        "midi": lambda: music.write_midi(score),
        "text": lambda: music.render_text(score, args.ascii),
        "csv": csv_text,
        "json": json_text,
    })
    return EXIT_OK


def cmd_cubewalk(args) -> int:
    outputs = _outputs(args)
    if args.dictionary:
        try:
            dictionary = music.MusicDictionary.load(args.dictionary)
        except OSError:
            raise
        except (ValueError, TypeError, AttributeError) as exc:
            raise UsageError(f"bad dictionary file {args.dictionary}: {exc}") from None
    else:
        dictionary = music.MusicDictionary.default()
    seed = _resolve_seed(args)
    config = qwalk.WalkConfig(steps=args.steps, shots=args.shots, seed=seed,
                              threads=args.threads)
    trace = qwalk.cube_generate(args.start_pitch, args.start_rhythm, config)

    codes = trace.codes()
    for (p0, r0), (p1, r1) in zip(codes, codes[1:]):
        if qwalk.hamming(p0, p1) > 1 or qwalk.hamming(r0, r1) > 1:
            raise InvariantError("walk left the cube edges")

    score = music.score_from_codes(codes, dictionary, args.tempo)
    _write(outputs, {
        "midi": lambda: music.write_midi(score),
        "text": lambda: music.render_text(score, args.ascii),
        "csv": trace.to_csv,
        "json": trace.to_json,
    }, stdout_format="csv")
    return EXIT_OK


def cmd_basak_miranda(args) -> int:
    if args.rules:
        try:
            rules = load_ruleset(args.rules)
        except RuleFileError as exc:
            raise UsageError(f"bad rules file {args.rules}: {exc}") from None
    else:
        rules = ruleset_default()
    try:
        start = rules.alphabet.index(args.start)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not args.beats > 0:
        raise UsageError("--beats must be positive")
    outputs = _outputs(args)
    seed = _resolve_seed(args)
    config = bm.GroverConfig(shots=args.shots, seed=seed,
                             iteration_override=args.iterations, threads=args.threads)
    comp = bm.generate(rules, start, args.length, config)

    bad = rules.violations(comp.notes)
    if bad:
        raise InvariantError(f"{len(bad)} rule violation(s), first at position {bad[0][0]}")
    if any(n >= len(rules.alphabet) for n in comp.notes):
        raise InvariantError("a padding state won a cycle")

    score = music.score_from_indices(comp.notes, rules.alphabet, beats=args.beats,
                                     tempo_bpm=args.tempo)
    if outputs:
        sys.stdout.write(" ".join(rules.alphabet.label(n, args.ascii) for n in comp.notes) + "\n")
    _write(outputs, {
        "midi": lambda: music.write_midi(score),
        "text": lambda: music.render_text(score, args.ascii),
        "csv": lambda: bm.cycles_to_csv(comp, rules),
        "json": lambda: bm.cycles_to_json(comp, rules),
    })
    return EXIT_OK


def grover_demo(shots: int, seed: int, threads: int = 1) -> dict:
    """The two-qubit |01> walkthrough: every intermediate state and its delta."""
    n = 2
    h2 = bm.hadamard_all(n)
    oracle = bm.build_oracle([0, 1, 0, 0], n)
    steps = [("phi1", "H on both qubits", qsim.apply_matrix(qsim.new_state(n), h2))]
    for name, what, m in (("phi2", "oracle marks |01>", oracle.matrix),
                          ("phi3", "H on both qubits", h2),
                          ("phi4", "conditional phase shift", bm.shift_operator(n)),
                          ("phi5", "H on both qubits", h2)):
        steps.append((name, what, qsim.apply_matrix(steps[-1][2], m)))
    final = steps[-1][2]
    hist = qsim.sample(final, range(n), shots, seed, threads)
    probs = qsim.probabilities(final)
    return {
        "chain": [
            {
                "name": name,
                "step": what,
                "amplitudes": [float(a.real) for a in state.amplitudes],
                "delta": qsim.mean_squared_amplitude(state),
            }
            for name, what, state in steps
        ],
        "histogram": {hist.label(k): v for k, v in sorted(hist.counts.items())},
        "shots": shots,
        "probabilities": {format(i, "02b"): float(p) for i, p in enumerate(probs)},
    }


def _fmt(x: float) -> str:
    x = 0.0 if abs(x) < 1e-15 else x
    return format(x, ".6g")


def cmd_demo_grover(args) -> int:
    demo = grover_demo(args.shots, _resolve_seed(args), args.threads)
    if args.json:
        sys.stdout.write(json.dumps(demo, indent=2) + "\n")
        return EXIT_OK
    for entry in demo["chain"]:
        amps = ", ".join(_fmt(a) for a in entry["amplitudes"])
        sys.stdout.write(f"{entry['name']} ({entry['step']}): [{amps}]  "
                         f"delta = {_fmt(entry['delta'])}\n")
    counts = ", ".join(f"{k}: {v}" for k, v in demo["histogram"].items())
    sys.stdout.write(f"histogram ({demo['shots']} shots): {counts}\n")
    sys.stdout.write(f"P(01) = {_fmt(demo['probabilities']['01'])}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"{parser.prog}: I/O error: {exc}\n")
        return EXIT_IO
    except InvariantError as exc:
        sys.stderr.write(f"{parser.prog}: invariant violated: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
