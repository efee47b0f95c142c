"""Exit criteria for the package; each test records one PASS/FAIL line."""

import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, SKEW, SUITE_MEASURES, TRI, UNIFORM2, UNIFORM3
from fsdim.dimest import divergence_experiment, estimate_dimensions, training_counts
from fsdim.fsc import (FiniteStateCompressor, beta_block_spec, build_block_coder, compress, decode,
                       empirical_block_spec, is_lossless_bruteforce)
from fsdim.measures import (ProbMeasure, SymbolSeq, cross_cost_rate, entropy, kl_divergence,
                            self_information)
from fsdim.seqgen import GenSpec, generate, normality_report

SEED = 314159
N = 1 << 20
TOL = 0.02


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def check_formula(criterion, alpha, beta, expected, mode="ideal"):
    t0 = time.perf_counter()
    rep = divergence_experiment(alpha, beta, N, SEED, kmax=8, mode=mode)
    elapsed = time.perf_counter() - t0
    e = rep.estimate
    ok = (abs(e.dim_lower_est - expected) <= TOL and abs(e.dim_upper_est - expected) <= TOL
          and abs(rep.predicted - expected) <= 5e-7)
    detail = (f"predicted {rep.predicted:.6f} (expected {expected:.6f}), lower {e.dim_lower_est:.6f}, "
              f"upper {e.dim_upper_est:.6f}, tol {TOL}, {elapsed:.1f}s")
    return ok, detail, elapsed, rep


def test_c1_divergence_formula_mismatched_binary():
    ok, detail, elapsed, _ = check_formula("C1", SKEW, UNIFORM2, 0.811278)
    record("C1 alpha=(3/4,1/4) beta=uniform", ok and elapsed <= 30, detail)


def test_c2_reversed_mismatch():
    ok, detail, _, _ = check_formula("C2", UNIFORM2, SKEW, 0.828144)
    record("C2 alpha=uniform beta=(3/4,1/4)", ok, detail)


@pytest.mark.parametrize("name", ["uniform2", "skew", "uniform3"])
def test_c3_maximum_case(name):
    m = SUITE_MEASURES[name]
    ok, detail, _, _ = check_formula("C3", m, m, 1.0)
    record(f"C3 alpha=beta={name}", ok, detail)


def test_c4_ternary():
    ok, detail, _, _ = check_formula("C4", TRI, UNIFORM3, 0.946395)
    record("C4 alpha=(1/2,1/4,1/4) beta=uniform3", ok, detail)


def test_c5_integer_mode_envelope():
    rep = divergence_experiment(SKEW, UNIFORM2, N, SEED, kmax=8, mode="integer")
    e = rep.estimate
    lo, hi = 0.801, 0.811278 + 1 / 8 + 0.01
    at8 = e.by_k(8)
    in_env = all(lo <= x <= hi for x in (e.dim_lower_est, e.dim_upper_est,
                                         min(t.lower for t in at8), min(t.upper for t in at8)))
    dominance = []
    for k in range(1, 9):
        final = {t.coder: t.final for t in e.by_k(k)}
        dominance.append(final["beta-huffman"] <= final["beta-shannon"]
                         and final["empirical-huffman"] <= final["empirical-shannon"])
    record("C5 integer-mode envelope and Huffman <= Shannon", in_env and all(dominance),
           f"lower {e.dim_lower_est:.6f}, upper {e.dim_upper_est:.6f}, env [{lo}, {hi:.6f}], "
           f"huffman<=shannon at k=1..8: {dominance}")


def _fuzz_measure(rng, m):
    weights = rng.integers(1, 1000, size=m)
    total = int(weights.sum())
    return ProbMeasure.of([Fraction(int(x), total) for x in weights])


def test_c6_property_suites():
    rng = np.random.default_rng(SEED)
    failures = []

    pairs = []
    for i in range(1000):
        m = int(rng.integers(2, 6))
        a = _fuzz_measure(rng, m)
        b = a if i % 10 == 0 else _fuzz_measure(rng, m)
        pairs.append((a, b))
    for a, b in pairs:
        d = kl_divergence(a, b)
        if not ((d == 0.0) if a.probs == b.probs else (d > 0.0)):
            failures.append(f"gibbs {a.probs} {b.probs}")
        if abs(cross_cost_rate(a, b) - entropy(a) - d) > 1e-12:
            failures.append(f"decomposition {a.probs} {b.probs}")

    for i in range(1000):
        beta = pairs[i][1]
        u = SymbolSeq(beta.alphabet, rng.integers(0, beta.size, size=int(rng.integers(0, 10_001))))
        v = SymbolSeq(beta.alphabet, rng.integers(0, beta.size, size=int(rng.integers(0, 10_001))))
        if abs(self_information(beta, u + v) - self_information(beta, u) - self_information(beta, v)) > 1e-9:
            failures.append(f"additivity case {i}")

    coders = {}
    for measure in (SKEW, TRI):
        for k in (1, 2, 4):
            for method in ("shannon", "huffman"):
                coders[(measure.size, k, method)] = build_block_coder(beta_block_spec(measure, k, method))
    keys = sorted(coders)
    for i in range(10_000):
        key = keys[i % len(keys)]
        c = coders[key]
        w = SymbolSeq(c.alphabet, rng.integers(0, key[0], size=int(rng.integers(0, 60))))
        r = compress(c, w)
        if decode(c, r.bits, r.final_state) != w:
            failures.append(f"roundtrip {key} {w}")

    train = generate(GenSpec(SKEW, 4000, SEED))
    shipped = []
    for k in range(1, 9):
        blocks, symbols = training_counts(train, k)
        shipped += [beta_block_spec(SKEW, k, "shannon"), beta_block_spec(SKEW, k, "huffman"),
                    empirical_block_spec(SKEW.alphabet, k, blocks, symbols, "shannon"),
                    empirical_block_spec(SKEW.alphabet, k, blocks, symbols, "huffman")]
    for spec in shipped:
        if not is_lossless_bruteforce(build_block_coder(spec), 12):
            failures.append(f"lossless {spec.name} k={spec.k}")
    bad = is_lossless_bruteforce(FiniteStateCompressor(UNIFORM2.alphabet, [[0, 0]], [["", ""]]), 12)
    if bad or bad.counterexample is None:
        failures.append("constant-empty machine not rejected")

    record("C6 property suites", not failures,
           f"1000 Gibbs/decomposition pairs, 1000 additivity cases, 10^4 round trips, "
           f"{len(shipped)} coders lossless at L=12, counterexample {bad.counterexample}; "
           f"failures: {failures[:3]}")


def test_c7_normality():
    worst = {}
    for name, m in SUITE_MEASURES.items():
        rep = normality_report(generate(GenSpec(m, 10**6, SEED)), m, 3)
        worst[name] = max(r.max_deviation for r in rep.rows)
    zeros = normality_report(SymbolSeq(SKEW.alphabet, np.zeros(10**6, dtype=np.uint8)), SKEW, 1)
    ok = all(v <= 0.005 for v in worst.values()) and zeros.rows[0].max_deviation >= 0.25
    record("C7 normality", ok, f"max deviations {{{', '.join(f'{k}: {v:.6f}' for k, v in worst.items())}}}, "
                               f"all-zeros k=1 deviation {zeros.rows[0].max_deviation:.6f}")


def test_c8_degenerate_sequence():
    w = SymbolSeq(UNIFORM2.alphabet, np.arange(N) % 2)
    ests = {k: estimate_dimensions(w, UNIFORM2, k, "ideal") for k in (2, 8)}
    ok = all(e.dim_lower_est <= 0.05 and e.dim_upper_est <= 0.05 for e in ests.values())
    record("C8 alternating sequence", ok,
           ", ".join(f"kmax={k}: lower {e.dim_lower_est:.6f} upper {e.dim_upper_est:.6f}" for k, e in ests.items()))
