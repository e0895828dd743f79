"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from terpgeom.curvature import (build_H_jet_product, curvature_contraction, curvature_matrix_closed,
                                curvature_matrix_jet, g3_check, g4_check, horizontal_rank,
                                is_symmetric_nilpotent, phi_value)
from terpgeom.example3 import (Example3Config, example3_dC, example3_lattice, example3_reference_flag,
                               example3_topology, horizontal_witness, locate_wall, principal_nilpotent,
                               wall_modulus)
from terpgeom.hodge import check_DcPMHS, check_PMHS_polarized, weight_filtration
from terpgeom.laurent import exact_lattice_columns, exact_matmul, valuation_eliminate_exact
from terpgeom.phibound import phi_supremum_estimate
from terpgeom.terp import TopologicalData, hodge_filtration
from terpgeom.twistor import kodaira_spencer, metric_gram, tangent_metric

ROOT = Path(__file__).resolve().parents[1]


def report(capsys, k, ok, detail):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


# -- 1 ------------------------------------------------------------------------

def criterion_1():
    radii = list(np.linspace(0.1, 1.3, 10)) + list(np.linspace(1.55, 2.95, 10))
    start = time.perf_counter()
    worst = 0.0
    for r in radii:
        cfg = Example3Config(r=r)
        lat = example3_lattice(cfg)
        got = tangent_metric(lat, kodaira_spencer(lat, example3_dC(cfg, "r")))
        rho = cfg.rho
        want = 2 * (1 + rho ** 2) / (1 - rho) ** 4
        worst = max(worst, abs(got - want) / abs(want))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 10
    return ok, f"max rel err {worst:.3g} over 20 radii (tol 1e-6), {elapsed:.2f} s"


# -- 2 ------------------------------------------------------------------------

def criterion_2():
    pairs = [(0.0, 0.0), (0.5, 0.7), (1.0, 2.0), (1.8, -1.2), (2.4, 3.0)]
    errs = [abs(locate_wall(r, phi) - wall_modulus(r)) for r, phi in pairs]
    return max(errs) <= 1e-6, f"max |t| error {max(errs):.3g} at 5 (r, phase) pairs (tol 1e-6)"


# -- 3 ------------------------------------------------------------------------

def criterion_3():
    sigs = [metric_gram(example3_lattice(Example3Config(r=r, t=t))).signature
            for r, t in [(0.0, 2.0), (0.5, 2.0), (2.0, 3.0)]]
    cfg = Example3Config(r=1000.0)
    lat = example3_lattice(cfg)
    h = tangent_metric(lat, kodaira_spencer(lat, example3_dC(cfg, "inv_r")))
    ok = all(s == (1, 2) for s in sigs) and abs(h - 8) <= 1e-3
    return ok, f"signatures {sigs}; h(d_1/r) at |r|=1e3 = {h:.9g} (|h-8| tol 1e-3)"


# -- 4 ------------------------------------------------------------------------

def random_symmetric_nilpotent(rng, mu):
    # block-diagonal principal orbits conjugated by a random complex orthogonal matrix
    sizes = []
    left = mu
    while left:
        s = int(rng.integers(1, left + 1))
        sizes.append(s)
        left -= s
    if max(sizes) == 1:
        sizes = [mu]
    A = np.zeros((mu, mu), dtype=complex)
    o = 0
    for s in sizes:
        if s > 1:
            A[o:o + s, o:o + s] = principal_nilpotent(s) * rng.uniform(0.5, 2)
        o += s
    K = 0.4 * (rng.standard_normal((mu, mu)) + 1j * rng.standard_normal((mu, mu)))
    O = expm(K - K.T)
    A = O @ A @ O.T
    return (A + A.T) / 2


def criterion_4():
    rng = np.random.default_rng(2024)
    worst_m = worst_c = 0.0
    for _ in range(100):
        mu = int(rng.integers(2, 6))
        n = int(rng.integers(1, 5))
        D = random_symmetric_nilpotent(rng, mu)
        assert is_symmetric_nilpotent(D)
        closed = curvature_matrix_closed(D, n)
        jet = curvature_matrix_jet(build_H_jet_product(D, n))
        worst_m = max(worst_m, float(np.abs(closed - jet).max()))
        c = D @ D.conj() - D.conj() @ D
        worst_c = max(worst_c, abs(curvature_contraction(D) + float(np.sum(np.abs(c) ** 2))))
    ok = worst_m <= 1e-9 and worst_c <= 1e-9
    return ok, f"max entry diff {worst_m:.3g}, contraction diff {worst_c:.3g} over 100 cases (tol 1e-9)"


# -- 5 ------------------------------------------------------------------------

def criterion_5():
    p2 = phi_value(np.array([[1, 1j], [1j, -1]]))
    e2 = phi_supremum_estimate(2)
    ok = abs(p2 + 2) <= 1e-10 and abs(e2 + 2) <= 1e-6
    parts = [f"phi_value = {p2:.12g}", f"estimate(2) = {e2:.9g}"]
    for mu in (3, 4):
        a = phi_supremum_estimate(mu, 64, seed=0)
        b = phi_supremum_estimate(mu, 64, seed=1)
        ok = ok and -2 <= a < 0 and -2 <= b < 0 and abs(a - b) <= 1e-4
        parts.append(f"mu={mu}: {a:.9g} / {b:.9g}")
    return ok, "; ".join(parts)


# -- 6 ------------------------------------------------------------------------

def random_good_lattice(rng):
    mu = int(rng.integers(2, 7))
    alpha = sorted(Fraction(int(rng.integers(-8, 9)), int(rng.choice([1, 2, 3, 4]))) for _ in range(mu))
    n = int(math.floor(alpha[-1] - alpha[0]))
    A = {0: np.eye(mu, dtype=int).tolist()}
    for k in range(1, n + 1):
        A[-k] = [[int(rng.integers(-3, 4)) if alpha[i] - k >= alpha[j] else 0 for j in range(mu)]
                 for i in range(mu)]
    return mu, alpha, A


def criterion_6():
    rng = np.random.default_rng(6)
    bad = 0
    for _ in range(50):
        mu, alpha, A = random_good_lattice(rng)
        while True:
            Q0 = rng.integers(-2, 3, (mu, mu))
            if round(abs(np.linalg.det(Q0))) != 0:
                break
        Q = {0: Q0.tolist(), **{k: rng.integers(-2, 3, (mu, mu)).tolist() for k in range(1, 7)}}
        before = [s.rational for s in valuation_eliminate_exact(exact_lattice_columns(A), alpha)]
        after = [s.rational for s in valuation_eliminate_exact(exact_lattice_columns(exact_matmul(A, Q)),
                                                              alpha)]
        bad += not (before == after == alpha)
    return bad == 0, f"{50 - bad}/50 lattices keep their spectrum exactly (basis change order 6)"


# -- 7 ------------------------------------------------------------------------

def criterion_7():
    topo = example3_topology()
    F = hodge_filtration(example3_lattice(Example3Config()))
    F0 = example3_reference_flag()
    dc = check_DcPMHS(F, topo, F0).passed
    pol = check_PMHS_polarized(F, topo).passed
    flipped = TopologicalData(topo.mu, topo.weight, topo.alpha_ref, topo.N, -topo.S, topo.kappa, topo.Pmat)
    flip_fails = not check_PMHS_polarized(F, flipped).positive
    W = weight_filtration(topo.N, topo.weight)
    trivial = {l: d for l, d in W.graded_dims().items() if d} == {topo.weight: topo.mu}
    ok = dc and pol and flip_fails and trivial
    return ok, f"DcPMHS {dc}, polarized {pol}, flipped S rejected {flip_fails}, N=0 weight trivial {trivial}"


# -- 8 ------------------------------------------------------------------------

def criterion_8():
    U0, P, alpha = horizontal_witness(0.0)
    U1, _, _ = horizontal_witness(1.0)
    r0, r1 = horizontal_rank(U0, P, alpha), horizontal_rank(U1, P, alpha)
    rng = np.random.default_rng(8)
    g4_ok = True
    for _ in range(20):
        D = rng.standard_normal((4, 4)) * ~np.triu(np.ones((4, 4), bool))
        if g3_check([D], alpha):
            g4_ok &= g4_check([D], [rng.standard_normal((4, 4))])
    ok = r1 < r0 and g4_ok
    return ok, f"horizontal rank {r0} -> {r1}; g4 true on n=1 inputs {g4_ok}"


# -- 9 ------------------------------------------------------------------------

CLI_RUNS = [
    ["phi-bound", "--mu", "3", "--restarts", "8", "--seed", "5"],
    ["purity", "--example3", "--grid", "r=0:2:5", "t=0:1:5", "--csv"],
    ["metric", "--example3", "--r", "0.3,0.2", "--t", "0.1"],
    ["pmhs", str(ROOT / "fixtures" / "example3.json")],
]


def criterion_9():
    same = 0
    for argv in CLI_RUNS:
        cmd = [sys.executable, "-m", "terpgeom.cli", *argv]
        a = subprocess.run(cmd, capture_output=True).stdout
        b = subprocess.run(cmd, capture_output=True).stdout
        same += bool(a) and a == b
    return same == len(CLI_RUNS), f"{same}/{len(CLI_RUNS)} CLI invocations byte-identical across two runs"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("k", range(1, 10))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    assert report(capsys, k, ok, detail), detail


if __name__ == "__main__":
    results = [report(None, k, *c()) for k, c in enumerate(CRITERIA, 1)]
    sys.exit(0 if all(results) else 1)
