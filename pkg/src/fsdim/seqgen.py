"""Seeded i.i.d. sequence generation and Borel-normality frequency checks.

Generator
---------
Symbols come from SplitMix64 used in counter mode. For seed ``s`` the
``i``-th raw output (``i = 0, 1, ...``) is, with all arithmetic mod 2**64::

    z = s + (i + 1) * 0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

which is exactly the stream of the sequential SplitMix64 generator started
from state ``s``. The top 53 bits ``u = z >> 11`` select a symbol by inverse
CDF against the integer thresholds ``t_j = floor(2**53 * (p_0 + ... + p_{j-1}))``
(computed with exact rationals): symbol ``a`` is emitted when
``t_a <= u < t_{a+1}``. Only integer operations are involved, so the stream is
identical on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .measures import Alphabet, ProbMeasure, SymbolSeq, _check_alphabet

PRNG_NAME = "splitmix64-counter"

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_CHUNK = 1 << 20
MAX_TABLE = 1 << 24


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Raw outputs ``start .. start+count-1`` of SplitMix64 seeded with ``seed``."""
    if not 0 <= seed < 1 << 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    i = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + i * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def cdf_thresholds(measure: ProbMeasure) -> np.ndarray:
    """Interior 53-bit inverse-CDF cut points ``t_1 .. t_{m-1}``."""
    cuts = []
    acc = Fraction(0)
    for p in measure.probs[:-1]:
        acc += p
        cuts.append((acc.numerator << 53) // acc.denominator)
    return np.array(cuts, dtype=np.uint64)


@dataclass(frozen=True)
class GenSpec:
    measure: ProbMeasure
    length: int
    seed: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"sequence length must be >= 1, got {self.length}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def generate(spec: GenSpec) -> SymbolSeq:
    """Draw ``spec.length`` i.i.d. symbols from ``spec.measure``."""
    cuts = cdf_thresholds(spec.measure)
    out = np.empty(spec.length, dtype=np.uint8 if spec.measure.size <= 256 else np.int64)
    for start in range(0, spec.length, _CHUNK):
        count = min(_CHUNK, spec.length - start)
        u = splitmix64(spec.seed, start, count) >> np.uint64(11)
        out[start:start + count] = np.searchsorted(cuts, u, side="right")
    return SymbolSeq(spec.measure.alphabet, out)


def window_codes(w: SymbolSeq, k: int) -> np.ndarray:
    """Base-|alphabet| integer code of every sliding window ``w[i:i+k]``.

    The first symbol of a window is its most significant digit, so codes sort
    like the words themselves.
    """
    m = w.alphabet.size
    n = len(w)
    data = w.data.astype(np.int64)
    codes = np.zeros(n - k + 1, dtype=np.int64)
    for j in range(k):
        codes = codes * m + data[j:n - k + 1 + j]
    return codes


def block_label(alphabet: Alphabet, code: int, k: int) -> str:
    m = alphabet.size
    digits = []
    for _ in range(k):
        code, d = divmod(code, m)
        digits.append(alphabet.symbols[d])
    return "".join(reversed(digits))


@dataclass(frozen=True)
class FrequencyCensus:
    """Sliding-window occurrence counts of all length-``k`` words.

    ``counts[c]`` is the count of the word whose base-|alphabet| code is ``c``.
    """

    alphabet: Alphabet
    k: int
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict[str, int]:
        return {block_label(self.alphabet, c, self.k): int(n) for c, n in enumerate(self.counts)}

    def count(self, word: str) -> int:
        code = 0
        for ch in word:
            code = code * self.alphabet.size + self.alphabet.index(ch)
        if len(word) != self.k:
            raise ValueError(f"word {word!r} does not have block length {self.k}")
        return int(self.counts[code])


def census(w: SymbolSeq, k: int) -> FrequencyCensus:
    if not 1 <= k <= len(w):
        raise ValueError(f"block length k={k} must satisfy 1 <= k <= {len(w)}")
    size = w.alphabet.size ** k
    if size > MAX_TABLE:
        raise ValueError(f"|alphabet|^k = {size} exceeds the table limit 2^24")
    counts = np.bincount(window_codes(w, k), minlength=size).astype(np.int64)
    return FrequencyCensus(w.alphabet, k, counts)


def product_probabilities(alpha: ProbMeasure, k: int) -> np.ndarray:
    """``alpha(v)`` for every ``v`` in Sigma^k, indexed by block code, as floats."""
    p = np.array([float(x) for x in alpha.probs])
    out = np.ones(1)
    for _ in range(k):
        out = np.outer(out, p).ravel()
    return out


def product_fractions(alpha: ProbMeasure, k: int) -> list[Fraction]:
    """Exact ``alpha(v)`` for every ``v`` in Sigma^k, indexed by block code."""
    out = [Fraction(1)]
    for _ in range(k):
        out = [q * p for q in out for p in alpha.probs]
    return out


@dataclass(frozen=True)
class NormalityRow:
    k: int
    max_deviation: float
    worst_word: str


@dataclass(frozen=True)
class NormalityReport:
    n: int
    rows: tuple[NormalityRow, ...]

    def passes(self, epsilon: float) -> bool:
        return all(r.max_deviation <= epsilon for r in self.rows)

    def format(self, epsilon: float | None = None) -> str:
        lines = ["k,max_deviation,worst_word"]
        lines += [f"{r.k},{r.max_deviation:.6f},{r.worst_word}" for r in self.rows]
        if epsilon is not None:
            lines.append(f"# epsilon={epsilon:.6f} {'PASS' if self.passes(epsilon) else 'FAIL'}")
        return "\n".join(lines)


def normality_report(w: SymbolSeq, alpha: ProbMeasure, kmax: int) -> NormalityReport:
    """Worst ``|freq(v) - alpha(v)|`` over all words of each length ``k <= kmax``."""
    _check_alphabet(w.alphabet, alpha.alphabet)
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    if kmax > len(w):
        raise ValueError(f"kmax={kmax} exceeds the sequence length {len(w)}")
    if alpha.size ** kmax > MAX_TABLE:
        raise ValueError(f"|alphabet|^kmax = {alpha.size ** kmax} exceeds the table limit 2^24")
    rows = []
    for k in range(1, kmax + 1):
        c = census(w, k)
        dev = np.abs(c.counts / c.total - product_probabilities(alpha, k))
        worst = int(np.argmax(dev))
        rows.append(NormalityRow(k, float(dev[worst]), block_label(w.alphabet, worst, k)))
    return NormalityReport(len(w), tuple(rows))


def write_sequence(w: SymbolSeq, path: str | Path, width: int = 80) -> None:
    text = w.to_string()
    lines = (text[i:i + width] for i in range(0, len(text), width))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_sequence(path: str | Path, alphabet: Alphabet) -> SymbolSeq:
    """Read one character per symbol; all whitespace (line breaks) is ignored."""
    text = "".join(Path(path).read_text(encoding="utf-8").split())
    points = np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32)
    order = np.argsort([ord(s) for s in alphabet.symbols])
    keys = np.array([ord(alphabet.symbols[i]) for i in order], dtype=np.uint32)
    pos = np.minimum(np.searchsorted(keys, points), keys.size - 1)
    bad = np.flatnonzero(keys[pos] != points)
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"{path}: character {text[i]!r} at position {i} is not in the alphabet "
                         f"{''.join(alphabet.symbols)!r}")
    return SymbolSeq(alphabet, order[pos])
