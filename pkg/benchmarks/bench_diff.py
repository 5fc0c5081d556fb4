"""Compare the compiled and pure-Python diff kernels on realistic work.

Run from the repository root after an editable install:

    python3 benchmarks/bench_diff.py

The workload mirrors a typing session: repeated single-character edits to a
generated source file, timing the full computeEditScript path (parse of the
new text included, since that is what a keystroke costs) and the two raw
kernels in isolation.
"""

from __future__ import annotations

import random
import statistics
import subprocess
import sys
import time


def generate_source(lines: int, seed: int = 11) -> str:
    rng = random.Random(seed)
    names = [f"v{i}" for i in range(lines)]
    out = []
    for i in range(lines):
        pick = rng.randrange(3)
        if pick == 0:
            out.append(f"var {names[i]} = {rng.randrange(1000)}\n")
        elif pick == 1:
            a, b = rng.choice(names[: i + 1]), rng.randrange(100)
            out.append(f"var {names[i]} = {a} + {b}\n")
        else:
            vals = ", ".join(str(rng.randrange(50)) for _ in range(5))
            out.append(f"var {names[i]} = [{vals}]\n")
    return "".join(out)


def edit_positions(text: str, count: int, seed: int = 13) -> list[int]:
    rng = random.Random(seed)
    return [rng.randrange(len(text)) for _ in range(count)]


def bench_full_path(steps: int = 200, lines: int = 300) -> float:
    """Median per-edit time of computeEditScript over a typing session."""
    from stet.diff import compute_edit_script
    from stet.languages import parse_document

    text = generate_source(lines)
    tree = parse_document(text, "javascript")
    samples = []
    for pos in edit_positions(text, steps):
        new_text = text[:pos] + "x" + text[pos:]
        t0 = time.perf_counter()
        compute_edit_script(tree, new_text)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_kernels(repeat: int = 50, size: int = 20_000) -> tuple[float, float]:
    """Raw kernel times on synthetic preorder arrays of `size` nodes."""
    from stet.diff.kernels import assign_nearest, subtree_hashes

    rng = random.Random(29)
    parents = [0] * size
    for i in range(1, size):
        parents[i] = rng.randrange(max(0, i - 8), i)
    codes = [rng.randrange(60) for _ in range(size)]
    leaves = [None if rng.random() < 0.5
              else bytes(rng.randrange(97, 123) for _ in range(rng.randrange(1, 10)))
              for _ in range(size)]
    t0 = time.perf_counter()
    for _ in range(repeat):
        subtree_hashes(codes, parents, leaves)
    t_hash = (time.perf_counter() - t0) / repeat

    olds = sorted(rng.sample(range(size * 10), size // 2))
    news = sorted(rng.sample(range(size * 10), size // 2))
    t0 = time.perf_counter()
    for _ in range(repeat):
        assign_nearest(olds, news)
    t_near = (time.perf_counter() - t0) / repeat
    return t_hash, t_near


def run_one(force_py: bool) -> None:
    import os

    if force_py:
        os.environ["STET_FORCE_PY_KERNELS"] = "1"
    from stet.diff.kernels import KERNEL_IMPL

    per_edit = bench_full_path()
    t_hash, t_near = bench_kernels()
    print(f"kernel={KERNEL_IMPL:8s}  per-edit median {per_edit * 1e3:7.3f} ms  "
          f"hash({20_000} nodes) {t_hash * 1e3:7.3f} ms  "
          f"nearest({10_000}) {t_near * 1e3:7.3f} ms")


def main() -> None:
    if "--child" in sys.argv:
        run_one("--force-py" in sys.argv)
        return
    # fresh interpreter per variant: kernel choice is fixed at import time
    for extra in ([], ["--force-py"]):
        subprocess.run([sys.executable, __file__, "--child", *extra], check=True)


if __name__ == "__main__":
    main()
