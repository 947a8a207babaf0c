"""Smoke test for the pysoslab extension.

Build first:
    cargo build -p pysoslab --release --features extension-module
    cp target/release/libpysoslab.so python/pysoslab.so
then run `python3 python/smoke_test.py` from the repository root.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pysoslab  # noqa: E402


def main():
    rows = pysoslab.sample_heights(8, 8, 1.0, 50, seed=3)
    assert len(rows) == 8 and all(len(r) == 8 for r in rows)
    assert min(min(r) for r in rows) >= 0
    assert rows == pysoslab.sample_heights(8, 8, 1.0, 50, seed=3)

    marg = pysoslab.exact_marginals(2, 2, 1.0)
    for _, _, dist in marg:
        assert abs(sum(dist.values()) - 1.0) < 1e-12

    tension = pysoslab.surface_tension(2.0, (1, 0), 4)
    assert len(tension) == 5 and tension[-1][4]
    assert abs(tension[-1][3] - 1.7268442843687422) < 1e-3

    step = pysoslab.step_distribution(2.0, cutoff=8)
    assert 0.9 < step["total_mass"] <= 1.0
    assert step["csv"].startswith("# beta=")

    # (0,1) -> (2,1), lazy walk: up-down, down-up, flat-flat => 1/3.
    p = pysoslab.hitting_probability(1, 1, 2)
    assert abs(p - 1.0 / 3.0) < 1e-12, p

    paths = pysoslab.bridges(1, 1, 32, 5, seed=7)
    assert len(paths) == 5
    assert all(y >= 0 for path in paths for _, y in path)

    v = pysoslab.doney_v1([(-1, 0.5), (1, 0.5)], 20)
    assert all(math.isclose(x, a, rel_tol=1e-9) for a, x in zip(range(1, 21), v))

    out = pysoslab.experiment("exp-oz-battery", "[oz]\ndirections = []\n")
    assert out["oz_battery.csv"].splitlines()[0].endswith(",asymptotic")

    try:
        pysoslab.experiment("exp-min-rho", "[run]\nseeds = []\n")
    except ValueError:
        pass
    else:
        raise AssertionError("empty seed list accepted")

    try:
        pysoslab.exact_marginals(8, 8, 1.0)
    except pysoslab.GuardError:
        pass
    else:
        raise AssertionError("guard not raised")

    print("pysoslab smoke test: ok")


if __name__ == "__main__":
    main()
