"""Alphabets, positive rational probability measures and their information quantities.

All logarithms are base 2. Measures hold exact :class:`fractions.Fraction`
entries so that equality (and therefore ``D(a||b) == 0``) is decidable; the
real-valued quantities are evaluated in binary floating point.
"""

from __future__ import annotations

import json
import math
import string
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

_DEFAULT_SYMBOLS = string.digits + string.ascii_lowercase


class AlphabetMismatch(ValueError):
    """Two objects that must share an alphabet do not."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite symbol set with a symbol <-> index mapping."""

    symbols: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if len(symbols) < 2:
            raise ValueError(f"alphabet needs at least 2 symbols, got {len(symbols)}")
        for s in symbols:
            if not isinstance(s, str) or len(s) != 1:
                raise ValueError(f"alphabet symbols must be single characters, got {s!r}")
            if s.isspace():
                raise ValueError("whitespace cannot be an alphabet symbol")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"alphabet symbols are not distinct: {symbols}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def default(cls, size: int) -> "Alphabet":
        """``"0", "1", ...`` then lowercase letters."""
        if size > len(_DEFAULT_SYMBOLS):
            raise ValueError(f"no default alphabet of size {size}")
        return cls(tuple(_DEFAULT_SYMBOLS[:size]))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet {''.join(self.symbols)!r}") from None

    def symbol(self, i: int) -> str:
        return self.symbols[i]


def _exact_log2(p: Fraction) -> float:
    # log2 of numerator and denominator separately: each is correctly rounded
    # even for huge integers, unlike float(p).
    return math.log2(p.numerator) - math.log2(p.denominator)


def parse_probability(value) -> Fraction:
    """Convert ``"p/q"``, a decimal string or a JSON number to an exact Fraction."""
    if isinstance(value, bool):
        raise ValueError(f"not a probability: {value!r}")
    if isinstance(value, float):
        # JSON floats: take the shortest decimal repr, not the binary value.
        value = repr(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse probability {value!r}") from None


@dataclass(frozen=True)
class ProbMeasure:
    """Strictly positive probability vector over an :class:`Alphabet`."""

    alphabet: Alphabet
    probs: tuple[Fraction, ...]
    costs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        if len(probs) != self.alphabet.size:
            raise ValueError(
                f"{len(probs)} probabilities given for an alphabet of {self.alphabet.size} symbols")
        for s, p in zip(self.alphabet.symbols, probs):
            if not 0 < p < 1:
                raise ValueError(f"probability of {s!r} must lie strictly in (0, 1), got {p}")
        total = sum(probs)
        if total != 1:
            raise ValueError(f"probabilities must sum to exactly 1, got {total}")
        object.__setattr__(self, "probs", probs)
        costs = np.array([-_exact_log2(p) for p in probs], dtype=np.float64)
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)

    @classmethod
    def of(cls, probs: Sequence, alphabet: Alphabet | None = None) -> "ProbMeasure":
        fracs = tuple(parse_probability(p) for p in probs)
        return cls(alphabet or Alphabet.default(len(fracs)), fracs)

    @classmethod
    def uniform(cls, alphabet: Alphabet | int) -> "ProbMeasure":
        if isinstance(alphabet, int):
            alphabet = Alphabet.default(alphabet)
        return cls(alphabet, (Fraction(1, alphabet.size),) * alphabet.size)

    @property
    def size(self) -> int:
        return self.alphabet.size

    def cost(self, a: int) -> float:
        """``log2(1/p(a))`` for symbol index ``a``."""
        return float(self.costs[a])

    def to_dict(self) -> dict:
        return {"alphabet": list(self.alphabet.symbols), "probs": [str(p) for p in self.probs]}

    @classmethod
    def from_dict(cls, obj: dict) -> "ProbMeasure":
        if not isinstance(obj, dict) or "probs" not in obj:
            raise ValueError('measure config must be an object with a "probs" list')
        probs = obj["probs"]
        if not isinstance(probs, list):
            raise ValueError('"probs" must be a list')
        alphabet = None
        if "alphabet" in obj:
            symbols = obj["alphabet"]
            if not isinstance(symbols, list):
                raise ValueError('"alphabet" must be a list of single-character strings')
            alphabet = Alphabet(tuple(symbols))
        return cls.of(probs, alphabet)


def load_measure(path: str | Path) -> ProbMeasure:
    """Read a measure config such as ``{"alphabet": ["0","1"], "probs": ["3/4","1/4"]}``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    try:
        return ProbMeasure.from_dict(obj)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_measure(measure: ProbMeasure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(measure.to_dict()) + "\n", encoding="utf-8")


class SymbolSeq:
    """A finite word over an alphabet, stored as an index array."""

    __slots__ = ("alphabet", "data")

    def __init__(self, alphabet: Alphabet, data: Iterable[int] | np.ndarray):
        arr = np.array(data, dtype=np.uint8 if alphabet.size <= 256 else np.int64).ravel()
        if arr.size and int(arr.max()) >= alphabet.size:
            raise ValueError(f"symbol index {int(arr.max())} out of range for alphabet of size {alphabet.size}")
        arr.setflags(write=False)
        self.alphabet = alphabet
        self.data = arr

    @classmethod
    def from_string(cls, alphabet: Alphabet, text: str) -> "SymbolSeq":
        return cls(alphabet, [alphabet.index(c) for c in text])

    def to_string(self) -> str:
        table = np.array(self.alphabet.symbols)
        return "".join(table[self.data].tolist())

    def __len__(self) -> int:
        return int(self.data.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SymbolSeq(self.alphabet, self.data[item])
        return int(self.data[item])

    def __add__(self, other: "SymbolSeq") -> "SymbolSeq":
        _check_alphabet(self.alphabet, other.alphabet)
        return SymbolSeq(self.alphabet, np.concatenate([self.data, other.data]))

    def __eq__(self, other) -> bool:
        return (isinstance(other, SymbolSeq) and self.alphabet == other.alphabet
                and np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        text = self.to_string() if len(self) <= 40 else self[:37].to_string() + "..."
        return f"SymbolSeq({text!r}, n={len(self)})"

    def symbol_counts(self) -> np.ndarray:
        return np.bincount(self.data, minlength=self.alphabet.size).astype(np.int64)


def _check_alphabet(a: Alphabet, b: Alphabet) -> None:
    if a != b:
        raise AlphabetMismatch(f"alphabet mismatch: {''.join(a.symbols)!r} vs {''.join(b.symbols)!r}")


def entropy(alpha: ProbMeasure) -> float:
    """Shannon entropy in bits per symbol."""
    return math.fsum(float(p) * c for p, c in zip(alpha.probs, alpha.costs))


def kl_divergence(alpha: ProbMeasure, beta: ProbMeasure) -> float:
    """Kullback-Leibler divergence ``D(alpha || beta)`` in bits per symbol.

    Exactly 0.0 when the two rational vectors coincide, positive otherwise.
    """
    _check_alphabet(alpha.alphabet, beta.alphabet)
    if alpha.probs == beta.probs:
        return 0.0
    terms = [float(p) * (cb - ca) for p, ca, cb in zip(alpha.probs, alpha.costs, beta.costs)]
    d = math.fsum(terms)
    # Rounding can only bite when the measures are extremely close.
    return d if d > 0 else math.ulp(0.0)


def cross_cost_rate(alpha: ProbMeasure, beta: ProbMeasure) -> float:
    """Expected beta-cost per symbol of alpha-distributed input: ``H(alpha) + D(alpha||beta)``."""
    _check_alphabet(alpha.alphabet, beta.alphabet)
    return math.fsum(float(p) * c for p, c in zip(alpha.probs, beta.costs))


def self_information(beta: ProbMeasure, w: SymbolSeq) -> float:
    """``I_beta(w) = sum_i log2(1/beta(w[i]))`` in bits.

    The sum is grouped by symbol (exact integer counts times the precomputed
    per-symbol cost) and the |alphabet| products are added with ``math.fsum``,
    so the error does not grow with ``len(w)``.
    """
    _check_alphabet(beta.alphabet, w.alphabet)
    if len(w) == 0:
        return 0.0
    counts = w.symbol_counts()
    return math.fsum(int(n) * c for n, c in zip(counts, beta.costs))


def cumulative_self_information(beta: ProbMeasure, w: SymbolSeq, lengths: Sequence[int]) -> np.ndarray:
    """``I_beta`` of the prefixes of ``w`` with the given lengths."""
    _check_alphabet(beta.alphabet, w.alphabet)
    lengths = np.asarray(lengths, dtype=np.int64)
    out = np.empty(lengths.size, dtype=np.float64)
    # Per-symbol running counts evaluated only at the requested lengths.
    onehot_counts = np.zeros((beta.size, lengths.size), dtype=np.int64)
    for a in range(beta.size):
        c = np.concatenate([[0], np.cumsum(w.data == a)])
        onehot_counts[a] = c[lengths]
    for j in range(lengths.size):
        out[j] = math.fsum(int(onehot_counts[a, j]) * float(beta.costs[a]) for a in range(beta.size))
    return out


def word_probability(alpha: ProbMeasure, w: SymbolSeq) -> Fraction:
    """Exact product ``alpha(w) = prod_i alpha(w[i])``."""
    _check_alphabet(alpha.alphabet, w.alphabet)
    result = Fraction(1)
    for p, n in zip(alpha.probs, w.symbol_counts()):
        if n:
            result *= p ** int(n)
    return result


def divergence_formula_value(alpha: ProbMeasure, beta: ProbMeasure) -> float:
    """``H(alpha) / (H(alpha) + D(alpha||beta))``, the beta-dimension of alpha-random sequences."""
    _check_alphabet(alpha.alphabet, beta.alphabet)
    if alpha.probs == beta.probs:
        return 1.0
    h = entropy(alpha)
    return h / (h + kl_divergence(alpha, beta))
