"""Finite-state beta-dimension estimators and the divergence-formula experiment.

For a prefix ``w`` and coder ``C`` the estimator tracks the ratio
``|C(w_n)| / I_beta(w_n)`` at checkpoints ``n`` in the second half of ``w``.
The liminf and limsup over prefixes are approximated by the minimum and
maximum over those checkpoints; the first half is burn-in and doubles as the
training data of the empirical coders. The infimum over compressors is
approximated by the minimum over a block-coder family, ``k = 1 .. kmax``.

Two modes are provided:

``integer``
    real prefix codes run as finite-state machines (Shannon and Huffman
    codes for ``beta^k`` and for the smoothed empirical block counts).
``ideal``
    fractional code lengths ``log2(1/mu(block))`` for ``mu = beta^k`` and
    for the smoothed empirical block distribution, which removes the
    up-to-one-bit-per-block rounding loss of integer codes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fsc import (BlockCoder, FiniteStateCompressor, beta_block_spec, build_block_coder,
                  empirical_block_spec, smoothed_weights)
from .measures import (ProbMeasure, SymbolSeq, _check_alphabet, cumulative_self_information,
                       divergence_formula_value)
from .seqgen import MAX_TABLE, GenSpec, NormalityReport, generate, normality_report

MODES = ("ideal", "integer")
MIN_LENGTH = 1000
CSV_HEADER = "k,coder,mode,n,ratio,dim_lower,dim_upper,predicted,abs_error"


@dataclass(frozen=True)
class RatioTrajectory:
    checkpoints: np.ndarray
    ratios: np.ndarray
    coder: str
    k: int
    mode: str

    def __post_init__(self):
        if self.checkpoints.size == 0:
            raise ValueError("a trajectory needs at least one checkpoint")
        if np.any(np.diff(self.checkpoints) <= 0):
            raise ValueError("checkpoints must be strictly increasing")

    @property
    def final(self) -> float:
        return float(self.ratios[-1])

    @property
    def lower(self) -> float:
        return float(self.ratios.min())

    @property
    def upper(self) -> float:
        return float(self.ratios.max())


def default_checkpoints(n: int, count: int = 32) -> np.ndarray:
    """``count`` geometrically spaced prefix lengths from ``n/2`` to ``n``."""
    if n < 2:
        raise ValueError("need at least two symbols for checkpoints")
    if count < 1:
        raise ValueError("need at least one checkpoint")
    pts = np.unique(np.round(np.geomspace(max(n // 2, 1), n, count)).astype(np.int64))
    pts[-1] = n
    return pts


def _as_checkpoints(checkpoints, n: int) -> np.ndarray:
    pts = np.asarray(checkpoints, dtype=np.int64)
    if pts.size == 0:
        raise ValueError("checkpoint list is empty")
    if pts.min() < 1 or pts.max() > n:
        raise ValueError(f"checkpoints must lie in [1, {n}]")
    if np.any(np.diff(pts) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    return pts


def ratio_trajectory(w: SymbolSeq, beta: ProbMeasure, coder: FiniteStateCompressor,
                     checkpoints: Sequence[int], flush: bool = True, name: str | None = None) -> RatioTrajectory:
    """``|C(w_n)| / I_beta(w_n)`` at each checkpoint ``n`` for a fixed machine."""
    _check_alphabet(beta.alphabet, w.alphabet)
    _check_alphabet(coder.alphabet, w.alphabet)
    pts = _as_checkpoints(checkpoints, len(w))
    if isinstance(coder, BlockCoder):
        bits = coder.prefix_bits(w, pts, flush=flush).astype(np.float64)
        k = coder.k
    else:
        bits = np.empty(pts.size, dtype=np.float64)
        nxt = coder.next_state.tolist()
        out_len = [[len(b) for b in row] for row in coder.output]
        q, total, j = coder.start, 0, 0
        for i, a in enumerate(w.data[:pts[-1]].tolist(), start=1):
            total += out_len[q][a]
            q = nxt[q][a]
            if i == pts[j]:
                bits[j] = total + (len(coder.flush_bits(q)) if flush else 0)
                j += 1
        k = 1
    denom = cumulative_self_information(beta, w, pts)
    return RatioTrajectory(pts, bits / denom, name or getattr(getattr(coder, "spec", None), "name", "fsc"), k,
                           "integer")


def _aligned_blocks(data: np.ndarray, m: int, k: int) -> np.ndarray:
    n_full = data.size // k
    full = data[:n_full * k].astype(np.int64).reshape(n_full, k)
    blocks = np.zeros(n_full, dtype=np.int64)
    for j in range(k):
        blocks = blocks * m + full[:, j]
    return blocks


def _check_table(m: int, k: int) -> None:
    if k < 1:
        raise ValueError(f"block length must be >= 1, got {k}")
    if m ** k > MAX_TABLE:
        raise ValueError(f"|alphabet|^k = {m ** k} exceeds the table limit 2^24")


def training_counts(w: SymbolSeq, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Aligned ``k``-block counts and symbol counts over the first half of ``w``."""
    m = w.alphabet.size
    _check_table(m, k)
    half = w.data[:len(w) // 2]
    blocks = _aligned_blocks(half, m, k)
    return (np.bincount(blocks, minlength=m ** k).astype(np.int64),
            np.bincount(half, minlength=m).astype(np.int64))


def _smoothed_costs(counts: np.ndarray) -> np.ndarray:
    weights = np.array(smoothed_weights(counts), dtype=np.float64)
    return math.log2(weights.sum()) - np.log2(weights)


def _product_costs(beta: ProbMeasure, k: int) -> np.ndarray:
    out = np.zeros(1)
    for _ in range(k):
        out = np.add.outer(out, beta.costs).ravel()
    return out


def ideal_ratio_trajectory(w: SymbolSeq, beta: ProbMeasure, k: int, checkpoints: Sequence[int] | None = None,
                           distribution: str = "empirical") -> RatioTrajectory:
    """Ratio trajectory of the ideal (fractional-length) ``k``-block code.

    With ``distribution="empirical"`` the block distribution is the aligned
    block census of the first half of ``w``, clamped below at half a count and
    renormalised; trailing symbols of a partial block are charged at the
    smoothed empirical symbol cost. ``distribution="beta"`` uses ``beta^k``.
    Checkpoints must lie in the second half of ``w``.
    """
    _check_alphabet(beta.alphabet, w.alphabet)
    m, n = w.alphabet.size, len(w)
    _check_table(m, k)
    pts = default_checkpoints(n) if checkpoints is None else _as_checkpoints(checkpoints, n)
    if pts.min() < n // 2:
        raise ValueError(f"ideal-mode checkpoints must lie in the second half, >= {n // 2}")
    if distribution == "empirical":
        block_counts, symbol_counts = training_counts(w, k)
        block_cost, symbol_cost = _smoothed_costs(block_counts), _smoothed_costs(symbol_counts)
    elif distribution == "beta":
        block_cost, symbol_cost = _product_costs(beta, k), beta.costs
    else:
        raise ValueError(f"unknown coding distribution {distribution!r}")
    blocks = _aligned_blocks(w.data[:pts[-1]], m, k)
    bits = np.empty(pts.size, dtype=np.float64)
    for idx, p in enumerate(pts.tolist()):
        nb = p // k
        freq = np.bincount(blocks[:nb], minlength=m ** k)
        tail = np.bincount(w.data[nb * k:p], minlength=m)
        bits[idx] = math.fsum((float(freq @ block_cost), float(tail @ symbol_cost)))
    denom = cumulative_self_information(beta, w, pts)
    return RatioTrajectory(pts, bits / denom, distribution, k, "ideal")


@dataclass(frozen=True)
class DimEstimate:
    """Family-minimised tail estimates of the lower and upper finite-state beta-dimension."""

    dim_lower_est: float
    dim_upper_est: float
    mode: str
    n: int
    kmax: int
    predicted: float | None = None
    trajectories: tuple[RatioTrajectory, ...] = field(default=(), repr=False)

    @property
    def abs_error(self) -> float | None:
        if self.predicted is None:
            return None
        return max(abs(self.dim_lower_est - self.predicted), abs(self.dim_upper_est - self.predicted))

    def by_k(self, k: int) -> list[RatioTrajectory]:
        return [t for t in self.trajectories if t.k == k]

    def best_at(self, k: int) -> RatioTrajectory:
        return min(self.by_k(k), key=lambda t: t.final)

    def rows(self) -> list[list[str]]:
        """CSV rows, one per (k, coder) plus a final family summary."""
        out = []
        for t in self.trajectories:
            err = None if self.predicted is None else max(abs(t.lower - self.predicted),
                                                        abs(t.upper - self.predicted))
            out.append([str(t.k), t.coder, t.mode, str(self.n), _fmt(t.final), _fmt(t.lower), _fmt(t.upper),
                        _fmt(self.predicted), _fmt(err)])
        best_final = min(t.final for t in self.trajectories)
        out.append(["all", "family-min", self.mode, str(self.n), _fmt(best_final), _fmt(self.dim_lower_est),
                    _fmt(self.dim_upper_est), _fmt(self.predicted), _fmt(self.abs_error)])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows():
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _fmt(x: float | None) -> str:
    # Python's fixed-point formatting rounds the exact binary value, ties to even.
    return "" if x is None else f"{x:.6f}"


def coder_family(w: SymbolSeq, beta: ProbMeasure, k: int) -> list[BlockCoder]:
    """Integer-mode coders at block length ``k``; empirical tables are frozen from the first half."""
    block_counts, symbol_counts = training_counts(w, k)
    specs = [beta_block_spec(beta, k, "shannon"), beta_block_spec(beta, k, "huffman"),
             empirical_block_spec(w.alphabet, k, block_counts, symbol_counts, "shannon"),
             empirical_block_spec(w.alphabet, k, block_counts, symbol_counts, "huffman")]
    return [build_block_coder(s) for s in specs]


def estimate_dimensions(w: SymbolSeq, beta: ProbMeasure, kmax: int = 8, mode: str = "ideal",
                        alpha: ProbMeasure | None = None, n_checkpoints: int = 32) -> DimEstimate:
    """Estimate the finite-state beta-dimension and strong beta-dimension of ``w``.

    ``dim_lower_est`` is the minimum over the family of each trajectory's tail
    minimum, ``dim_upper_est`` the minimum over the family of each tail maximum.
    """
    _check_alphabet(beta.alphabet, w.alphabet)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if len(w) < MIN_LENGTH:
        raise ValueError(f"sequence too short: {len(w)} symbols, need at least {MIN_LENGTH}")
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    _check_table(w.alphabet.size, kmax)
    if kmax > len(w) // 2:
        raise ValueError(f"kmax={kmax} exceeds half the sequence length")
    pts = default_checkpoints(len(w), n_checkpoints)
    trajectories: list[RatioTrajectory] = []
    for k in range(1, kmax + 1):
        if mode == "ideal":
            trajectories += [ideal_ratio_trajectory(w, beta, k, pts, d) for d in ("beta", "empirical")]
        else:
            trajectories += [ratio_trajectory(w, beta, c, pts) for c in coder_family(w, beta, k)]
    predicted = divergence_formula_value(alpha, beta) if alpha is not None else None
    return DimEstimate(
        dim_lower_est=min(t.lower for t in trajectories),
        dim_upper_est=min(t.upper for t in trajectories),
        mode=mode, n=len(w), kmax=kmax, predicted=predicted, trajectories=tuple(trajectories))


@dataclass(frozen=True)
class ExperimentReport:
    alpha: ProbMeasure
    beta: ProbMeasure
    seed: int
    estimate: DimEstimate
    normality: NormalityReport

    @property
    def predicted(self) -> float:
        return self.estimate.predicted

    @property
    def abs_error(self) -> float:
        return self.estimate.abs_error

    def to_csv(self) -> str:
        return self.estimate.to_csv()

    def summary(self) -> str:
        e = self.estimate
        worst = max(r.max_deviation for r in self.normality.rows)
        return (f"predicted {_fmt(e.predicted)}  dim_lower {_fmt(e.dim_lower_est)}  "
                f"dim_upper {_fmt(e.dim_upper_est)}  abs_error {_fmt(e.abs_error)}  "
                f"max normality deviation (k<={len(self.normality.rows)}) {_fmt(worst)}")


def divergence_experiment(alpha: ProbMeasure, beta: ProbMeasure, n: int, seed: int, kmax: int = 8,
                          mode: str = "ideal", normality_kmax: int = 3) -> ExperimentReport:
    """Sample an alpha-distributed prefix and compare its estimated beta-dimension with the formula."""
    _check_alphabet(alpha.alphabet, beta.alphabet)
    w = generate(GenSpec(alpha, n, seed))
    nk = normality_kmax
    while nk > 1 and alpha.size ** nk > MAX_TABLE:
        nk -= 1
    report = normality_report(w, alpha, min(nk, n))
    estimate = estimate_dimensions(w, beta, kmax, mode, alpha=alpha)
    return ExperimentReport(alpha, beta, seed, estimate, report)
