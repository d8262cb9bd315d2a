"""Smoke test for the qubodem extension.

Build it first:

    cargo build --release -p qubo-dem-python --features extension-module
    python3 python/smoke_test.py
"""

import importlib.util
import math
import os
import pathlib
import shutil
import sys
import tempfile


def load():
    try:
        import qubodem
        return qubodem
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for name in ("libqubodem.so", "libqubodem.dylib", "qubodem.dll"):
        built = root / "target" / "release" / name
        if built.exists():
            break
    else:
        sys.exit("qubodem not built; run the cargo command in this file's docstring")
    tmp = pathlib.Path(tempfile.mkdtemp())
    target = tmp / ("qubodem.pyd" if os.name == "nt" else "qubodem.so")
    shutil.copy(built, target)
    spec = importlib.util.spec_from_file_location("qubodem", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


qd = load()

# subset-sum over (1, 2, 3) splits evenly
inst = qd.QuboInstance.subset_sum([1, 2, 3])
x, best = inst.brute_force()
assert best == 0.0, best
for solver in (qd.simulated_annealing, qd.tabu_search, qd.burer2, qd.gw_sdp_surrogate):
    _, v = solver(inst, seed=1)
    assert v == 0.0, (solver.__name__, v)

# MaxCut of a 4-cycle: the alternating cut takes all four edges
cycle = qd.QuboInstance.maxcut(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
assert cycle.original_value(cycle.evaluate([1, -1, 1, -1])) == 4.0

# DEM-RC on a random instance, checked against enumeration
rnd = qd.QuboInstance.random(12, 3)
_, opt = rnd.brute_force()
out = qd.dem_rc(rnd, rank=6, steps=300, rounds=50, seed=2)
assert abs(rnd.evaluate(out["x"]) - out["value"]) < 1e-9
assert out["value"] >= opt - 1e-9
assert out["phi"][-1] <= out["phi"][0]
assert abs(qd.expected_value(rnd, out["factor"]) - out["expected_value"]) < 1e-12

# the closed-form expectation matches the trial mean
f = qd.FactorMatrix.random(12, 3, 7)
r = qd.gw_round(rnd, f, 20000, 5)
vals = r["trial_values"]
mean = sum(vals) / len(vals)
se = math.sqrt(sum((v - mean) ** 2 for v in vals) / (len(vals) - 1) / len(vals))
assert abs(mean - qd.expected_value(rnd, f)) <= 4 * se

# exact DEM with backtracking never ends above its start
ex = qd.exact_dem(rnd, f, max_iter=30, backtracking=True, seed=1)
assert ex["phi"][-1] <= ex["phi"][0] + 1e-12
assert ex["stop"] in ("converged", "max_iterations", "no_descent", "step_rejected")

# text format round trip and error mapping
assert qd.QuboInstance.parse(rnd.format()).q() == rnd.q()
try:
    qd.QuboInstance.parse("qubo plus_minus_one 2 1\n0 5 1.0\n")
except ValueError:
    pass
else:
    raise AssertionError("bad index accepted")
try:
    qd.dem_rc(rnd, rank=13)
except ValueError:
    pass
else:
    raise AssertionError("rank > n accepted")

print("qubodem smoke test passed")
