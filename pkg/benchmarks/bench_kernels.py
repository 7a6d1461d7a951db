"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 60]

Also times one end-to-end scan under each backend (the backend is chosen at
import, so that part runs in subprocesses).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ezdkit import _kernels


def bench_rref(fn, p, size, repeat, rng):
    mats = [rng.integers(0, p, size=(size, size + 7), dtype=np.int64) for _ in range(repeat)]

    def run():
        for m in mats:
            fn(m.copy(), p)

    return min(timeit.repeat(run, number=1, repeat=3)) / repeat


def bench_first_invertible(fn, p, rng):
    # singular span: the whole projective space gets walked
    basis = rng.integers(0, p, size=(5, 4, 4), dtype=np.int64)
    basis[:, :, 0] = 0
    basis = np.ascontiguousarray(basis)
    return min(timeit.repeat(lambda: fn(basis, p, 10 ** 6, 0, False), number=1, repeat=3))


SCAN = "from ezdkit import ezd, algebra; import importlib.resources as r; " \
       "A = algebra.load_algebra((r.files('ezdkit') / 'fixtures' / 'ring8_f3.alg').read_text()); " \
       "ezd.scan_ezd(A, threads=1)"


def bench_scan(pure):
    env = dict(os.environ)
    if pure:
        env["EZDKIT_PURE_PYTHON"] = "1"
    else:
        env.pop("EZDKIT_PURE_PYTHON", None)
    code = f"import timeit; print(min(timeit.repeat({SCAN!r}, number=1, repeat=3)))"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = _kernels.backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the fallback is timed")
    rows = []
    for p in (3, 101):
        for name, (rref, fi) in backends.items():
            rng = np.random.default_rng(args.seed)
            rows.append((f"rref {args.size}x{args.size + 7} mod {p}", name,
                         bench_rref(rref, p, args.size, args.repeat, rng)))
        for name, (rref, fi) in backends.items():
            if p > 7:
                continue
            rng = np.random.default_rng(args.seed)
            rows.append((f"first_invertible 5x4x4 mod {p}", name, bench_first_invertible(fi, p, rng)))
    for pure, name in ((True, "python"), (False, _kernels.BACKEND)):
        rows.append(("scan ring8 over F_3", name, bench_scan(pure)))
    width = max(len(r[0]) for r in rows)
    for task, name, secs in rows:
        print(f"{task:<{width}}  {name:<9} {secs * 1e3:10.2f} ms")


if __name__ == "__main__":
    main()
