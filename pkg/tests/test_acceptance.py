"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from extremal_cem.cem import CemConfig, run
from extremal_cem.graph import (
    adjacency_charpoly_tree,
    build_comet,
    build_t_nd,
    diameter,
    distance_spectrum,
    matching_counts,
    peak_profile,
    proximity,
    random_tree,
)
from extremal_cem.linalg import charpoly_exact, permanent, permanent_naive, sym_eigenvalues
from extremal_cem.nn import PolicyNetwork, TrainBatch, backward, ce_loss
from extremal_cem.rewards import KNOWN_F312, avoids_312, get_score_fn, star_op
from extremal_cem.verify import (
    check_aouch_counterexample,
    check_graham_pollack,
    check_hyperplane_cover,
    check_setpair_system,
    f312_bruteforce,
    f312_oracle,
    load_construction_matrices,
)

RESULTS = {}


def record(key, ok, evidence):
    RESULTS[key] = (bool(ok), evidence)
    return bool(ok)


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def random_avoiding(rnd, n):
    m = [[0] * n for _ in range(n)]
    cells = [(i, j) for i in range(n) for j in range(n)]
    rnd.shuffle(cells)
    for i, j in cells[: rnd.randint(n, 3 * n)]:
        m[i][j] = 1
        if not avoids_312(m):
            m[i][j] = 0
    return m


def criterion_1():
    rep, secs = timed(check_aouch_counterexample)
    ok = rep.passed and secs < 1.0
    return record("1", ok, f"report {'passed' if rep.passed else 'failed'}, {secs:.2f} s")


def criterion_2():
    def go():
        g = build_comet(13, 190)
        d = diameter(g)
        k = (2 * d) // 3
        return g.n, d, k, proximity(g) + float(distance_spectrum(g)[k - 1])

    (n, d, k, val), secs = timed(go)
    ok = n == 203 and d == 12 and k == 8 and val < -1e-6 and secs < 30
    return record("2", ok, f"n = {n}, D = {d}, pi + d_{k} = {val:.6e}, {secs:.1f} s")


def criterion_3():
    rep, secs = timed(check_graham_pollack, samples=200, seed=0)
    return record("3", rep.passed and secs < 10, f"200 trees, {secs:.2f} s")


def criterion_4_ratio():
    parts = []
    ok = True
    for n, d in ((16, 4), (25, 5)):
        prof = peak_profile(build_t_nd(n, d))
        ratio = Fraction(prof.p_A, prof.m)
        ok &= ratio == Fraction(1, d + 1)
        parts.append(f"T({n},{d}) p_A/m = {ratio} (want 1/{d + 1})")
    return record("4a", ok, "; ".join(parts))


def criterion_4_counts():
    c = matching_counts(build_t_nd(30, 5))
    return record("4b", c[5] == 3125 and c[4] == 3625, f"N_5 = {c[5]}, N_4 = {c[4]}")


def criterion_4_charpoly():
    rng = np.random.default_rng(4)
    bad = 0
    for _ in range(50):
        n = int(rng.integers(2, 13))
        t = random_tree(n, rng)
        sign = -1 if n % 2 else 1
        bad += [sign * x for x in charpoly_exact(t.adjacency_matrix())] != adjacency_charpoly_tree(t)
    return record("4c", bad == 0, f"{50 - bad}/50 trees agree")


def criterion_5():
    vals = []
    start = time.perf_counter()
    for n in range(1, 8):
        vals.append(f312_oracle(n)[0])
    secs = time.perf_counter() - start
    brute = [f312_bruteforce(n) for n in range(1, 5)]
    ok = vals == [1, 2, 4, 8, 16, 32, 64] and brute == vals[:4] and secs < 300
    return record("5", ok, f"oracle {vals}, brute force {brute}, {secs:.1f} s")


def criterion_6():
    mats = load_construction_matrices()
    bad = []
    for n in range(4, 14):
        m = mats[n]
        if permanent(m) != KNOWN_F312[n - 1] or not avoids_312(m) or sum(map(sum, m)) > 4 * n - 4:
            bad.append(n)
    rnd = random.Random(6)
    weak = 0
    for _ in range(100):
        a = random_avoiding(rnd, rnd.randint(1, 5))
        b = random_avoiding(rnd, rnd.randint(1, 5))
        weak += permanent(star_op(a, b)) < permanent(a) * permanent(b)
    ok = not bad and weak == 0
    return record("6", ok, f"captions mismatched for n in {bad}, {weak}/100 pairs violate per(A*B) >= per(A)per(B)")


def criterion_7():
    rep, secs = timed(check_hyperplane_cover)
    return record("7", rep.passed and secs < 1, f"{secs:.3f} s")


def criterion_8():
    rep, secs = timed(check_setpair_system)
    return record("8", rep.passed and secs < 1, f"{secs:.3f} s")


def _toy_run(workers, tmp, seed=1, iterations=50):
    fn = get_score_fn("ones", 10)
    cfg = CemConfig(batch_size=100, rng_seed=seed, max_iterations=iterations, workers=workers,
                    target_threshold=fn.threshold)
    log = f"{tmp}/log-{seed}-{workers}.jsonl"
    res = run(cfg, fn.space, fn, log_path=log)
    with open(log) as fh:
        lines = [l.split(', "elapsed_ms"')[0] for l in fh]
    return res, lines


def criterion_9(tmp):
    res, lines1 = _toy_run(1, tmp)
    reached = res.best.reward == 10 and len(res.history) <= 50
    monotone = True
    for seed in (1, 2, 3):
        r, _ = _toy_run(1, tmp, seed=seed, iterations=15)
        best = [h["best_reward"] for h in r.history]
        monotone &= all(x <= y for x, y in zip(best, best[1:]))
    _, lines4 = _toy_run(4, tmp)
    same = lines1 == lines4
    ok = reached and monotone and same
    return record("9", ok, f"reward {res.best.reward:g} after {len(res.history)} iterations, "
                  f"monotone = {monotone}, logs identical across workers = {same}")


def criterion_10():
    rng = np.random.default_rng(10)
    net = PolicyNetwork(hidden_layer_sizes=(5, 4), random_state=1).initialize(6, np.array([0, 1]))
    batch = TrainBatch(rng.normal(size=(8, 6)), rng.integers(0, 2, size=8))
    cg, ig = backward(net, batch)
    worst, eps = 0.0, 1e-6
    for params, grads in ((net.coefs_, cg), (net.intercepts_, ig)):
        for p, g in zip(params, grads):
            flat, gflat = p.reshape(-1), g.reshape(-1)
            for i in range(flat.size):
                old = flat[i]
                flat[i] = old + eps
                up = ce_loss(net, batch)
                flat[i] = old - eps
                down = ce_loss(net, batch)
                flat[i] = old
                num = (up - down) / (2 * eps)
                worst = max(worst, abs(num - gflat[i]) / max(abs(num), abs(gflat[i]), 1e-8))
    trace_ok = True
    for n in (3, 10, 40, 120):
        a = rng.normal(size=(n, n))
        a = a + a.T
        trace_ok &= abs(sym_eigenvalues(a).sum() - np.trace(a)) <= 1e-8 * n * np.abs(a).max()
    perm_ok = all(
        permanent(m) == permanent_naive(m)
        for n in range(1, 6)
        for m in (rng.integers(0, 2, size=(n, n)) for _ in range(20))
    )
    ok = worst < 1e-5 and trace_ok and perm_ok
    return record("10", ok, f"grad rel err {worst:.2e}, trace identity {trace_ok}, permanent vs n!-sum {perm_ok}")


def test_criterion_1():
    assert criterion_1(), RESULTS["1"]


def test_criterion_2():
    assert criterion_2(), RESULTS["2"]


def test_criterion_3():
    assert criterion_3(), RESULTS["3"]


def test_criterion_4_peak_ratio():
    assert criterion_4_ratio(), RESULTS["4a"]


def test_criterion_4_matching_counts():
    assert criterion_4_counts(), RESULTS["4b"]


def test_criterion_4_charpoly():
    assert criterion_4_charpoly(), RESULTS["4c"]


def test_criterion_5():
    assert criterion_5(), RESULTS["5"]


def test_criterion_6():
    assert criterion_6(), RESULTS["6"]


def test_criterion_7():
    assert criterion_7(), RESULTS["7"]


def test_criterion_8():
    assert criterion_8(), RESULTS["8"]


def test_criterion_9(tmp_path):
    assert criterion_9(tmp_path), RESULTS["9"]


def test_criterion_10():
    assert criterion_10(), RESULTS["10"]


def summary_lines():
    out = []
    for key in ("1", "2", "3", "4", "5", "6", "7", "8", "9", "10"):
        if key == "4":
            parts = [RESULTS[k] for k in ("4a", "4b", "4c") if k in RESULTS]
            if not parts:
                continue
            ok = all(p[0] for p in parts)
            ev = "; ".join(f"{'ok' if p[0] else 'FAILED'}: {p[1]}" for p in parts)
        elif key in RESULTS:
            ok, ev = RESULTS[key]
        else:
            continue
        out.append(f"{'PASS' if ok else 'FAIL'} criterion {key}: {ev}")
    return out


def main():
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        for fn in (criterion_1, criterion_2, criterion_3, criterion_4_ratio, criterion_4_counts,
                   criterion_4_charpoly, criterion_5, criterion_6, criterion_7, criterion_8):
            fn()
        criterion_9(tmp)
        criterion_10()
    lines = summary_lines()
    print("\n".join(lines))
    return 0 if all(l.startswith("PASS") for l in lines) else 1


if __name__ == "__main__":
    sys.exit(main())
