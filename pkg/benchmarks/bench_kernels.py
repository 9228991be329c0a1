"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--shots N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from qmuse import _kernels_py, kernels

try:
    from qmuse import _kernels as _compiled
except ImportError:
    _compiled = None


def _cases(shots: int):
    probs = np.full(32, 1 / 32)
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=1 << 8) + 1j * rng.normal(size=1 << 8)
    psi /= np.linalg.norm(psi)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return {
        f"sample_counts ({shots} shots, 32 outcomes)":
            lambda mod: mod.sample_counts(cdf, 12345, 0, shots, 31),
        "apply_single_qubit (8 qubits, 1 control) x100":
            lambda mod: [mod.apply_single_qubit(psi, 8, h, t % 8, 1 << ((t + 1) % 8))
                         for t in range(100)],
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--shots", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    if _compiled is None:
        print("compiled extension not built; timing the Python kernels only")
    for name, fn in _cases(args.shots).items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        line = f"{name:<48s} python {py * 1e3:9.2f} ms"
        if _compiled is not None:
            c = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat))
            line += f"   compiled {c * 1e3:8.2f} ms   speedup {py / c:6.1f}x"
        print(line)


if __name__ == "__main__":
    main()
