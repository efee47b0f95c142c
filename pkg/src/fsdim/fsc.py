"""Finite-state compressors with binary output, and prefix-free block coders.

A :class:`FiniteStateCompressor` reads one symbol per transition and emits a
(possibly empty) bit string. It is information-lossless when the pair
``(output bits, final state)`` determines the input. :class:`BlockCoder` is
the concrete family used for estimation: it buffers ``k`` symbols in its
state and emits one prefix-free codeword per full block.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .measures import Alphabet, ProbMeasure, SymbolSeq, _check_alphabet
from .seqgen import MAX_TABLE, block_label, product_fractions


class DecodeError(ValueError):
    """The bit string cannot have been produced by the coder."""


class FiniteStateCompressor:
    """Deterministic transducer ``Q x Sigma -> Q`` emitting bits on each transition.

    ``next_state[q][a]`` and ``output[q][a]`` must be total. ``final_output``
    optionally maps each state to bits appended when the input ends (a flush).
    """

    def __init__(self, alphabet: Alphabet, next_state, output, start: int = 0,
                 final_output: Sequence[str] | None = None):
        table = np.asarray(next_state, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] == 0 or table.shape[1] != alphabet.size:
            raise ValueError(f"transition table must have shape (states, {alphabet.size})")
        n_states = table.shape[0]
        if table.min() < 0 or table.max() >= n_states:
            raise ValueError("transition table refers to a nonexistent state")
        if not 0 <= start < n_states:
            raise ValueError(f"start state {start} out of range")
        output = tuple(tuple(row) for row in output)
        if len(output) != n_states or any(len(row) != alphabet.size for row in output):
            raise ValueError("output table must be total over states x symbols")
        for row in output:
            for bits in row:
                _check_bits(bits)
        if final_output is not None:
            final_output = tuple(final_output)
            if len(final_output) != n_states:
                raise ValueError("final output must give one bit string per state")
            for bits in final_output:
                _check_bits(bits)
        table.setflags(write=False)
        self.alphabet = alphabet
        self.next_state = table
        self.output = output
        self.start = start
        self.final_output = final_output

    @property
    def n_states(self) -> int:
        return self.next_state.shape[0]

    def run(self, w: SymbolSeq) -> tuple[str, int]:
        """Streamed output (no flush) and final state for input ``w``."""
        _check_alphabet(self.alphabet, w.alphabet)
        nxt = self.next_state.tolist()
        out = self.output
        q = self.start
        pieces = []
        for a in w.data.tolist():
            pieces.append(out[q][a])
            q = nxt[q][a]
        return "".join(pieces), q

    def flush_bits(self, state: int) -> str:
        return self.final_output[state] if self.final_output is not None else ""


def _check_bits(bits) -> None:
    if not isinstance(bits, str) or bits.strip("01"):
        raise ValueError(f"outputs must be strings over {{0,1}}, got {bits!r}")


@dataclass(frozen=True)
class CompressResult:
    bits: str
    final_state: int

    def __len__(self) -> int:
        return len(self.bits)


def compress(coder: FiniteStateCompressor, w: SymbolSeq, flush: bool = True) -> CompressResult:
    """Run ``coder`` on ``w``; with ``flush`` the final-state output is appended."""
    bits, q = coder.run(w)
    if flush:
        bits += coder.flush_bits(q)
    return CompressResult(bits, q)


def identity_coder(alphabet: Alphabet | None = None) -> FiniteStateCompressor:
    """One-state binary machine that copies each input bit."""
    alphabet = alphabet or Alphabet.default(2)
    if alphabet.size != 2:
        raise ValueError("the identity coder needs a binary alphabet")
    return FiniteStateCompressor(alphabet, [[0, 0]], [["0", "1"]])


# -- code tables ------------------------------------------------------------

def is_prefix_free(codewords: Sequence[str]) -> bool:
    ordered = sorted(codewords)
    return all(not b.startswith(a) for a, b in zip(ordered, ordered[1:]))


def kraft_sum(codewords: Sequence[str]) -> Fraction:
    longest = max((len(c) for c in codewords), default=0)
    return Fraction(sum(1 << (longest - len(c)) for c in codewords), 1 << longest)


def shannon_length(p: Fraction) -> int:
    """Smallest ``l`` with ``2**-l <= p``, i.e. ``ceil(log2(1/p))`` exactly."""
    a, b = p.numerator, p.denominator
    if a <= 0:
        raise ValueError("Shannon lengths need positive probabilities")
    l = max(0, (b // a).bit_length() - 1)
    while (a << l) < b:
        l += 1
    while l > 0 and (a << (l - 1)) >= b:
        l -= 1
    return l


def shannon_code_for(probs: Sequence[Fraction]) -> list[str]:
    """Shannon code: length ``ceil(log2 1/p)`` per block, cumulative-probability codewords.

    Blocks are taken in order of decreasing probability (ties by block index);
    block ``i`` gets the first ``l_i`` binary digits of the total probability of
    the blocks before it.
    """
    probs = [Fraction(p) for p in probs]
    if not probs or any(p <= 0 for p in probs):
        raise ValueError("Shannon code needs a nonempty strictly positive distribution")
    if sum(probs) > 1:
        raise ValueError("probabilities sum to more than 1")
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    code = [""] * len(probs)
    cum = Fraction(0)
    for i in order:
        l = shannon_length(probs[i])
        code[i] = format((cum.numerator << l) // cum.denominator, f"0{l}b") if l else ""
        cum += probs[i]
    return code


def huffman_lengths(weights: Sequence) -> list[int]:
    """Huffman code lengths; zero weights are raised to 1 first.

    Ties merge the lighter subtree first, then the subtree whose smallest block
    index is lower, so the result is fully deterministic.
    """
    if not weights:
        raise ValueError("Huffman code needs at least one block")
    w = [x if x > 0 else 1 for x in weights]
    if len(w) == 1:
        return [1]
    depth = [0] * len(w)
    heap = [(x, i, [i]) for i, x in enumerate(w)]
    heapq.heapify(heap)
    while len(heap) > 1:
        wa, ia, la = heapq.heappop(heap)
        wb, ib, lb = heapq.heappop(heap)
        for i in la:
            depth[i] += 1
        for i in lb:
            depth[i] += 1
        heapq.heappush(heap, (wa + wb, min(ia, ib), la + lb))
    return depth


def canonical_code(lengths: Sequence[int]) -> list[str]:
    """Canonical prefix code for the given lengths (assigned in (length, index) order)."""
    code = [""] * len(lengths)
    value = 0
    prev = 0
    for i in sorted(range(len(lengths)), key=lambda i: (lengths[i], i)):
        value <<= lengths[i] - prev
        prev = lengths[i]
        code[i] = format(value, f"0{prev}b") if prev else ""
        value += 1
    return code


def huffman_code_for(counts: Sequence) -> list[str]:
    """Optimal prefix code for the block counts, in canonical form."""
    return canonical_code(huffman_lengths(list(counts)))


def smoothed_weights(counts: np.ndarray) -> list[int]:
    """Integer weights ``max(2c, 1)``: zero counts get half a count.

    Normalised, this is the empirical distribution clamped below at
    ``1/(2 * total)`` and renormalised.
    """
    return [max(2 * int(c), 1) for c in counts]


def format_codebook(alphabet: Alphabet, k: int, code: Sequence[str]) -> str:
    """``<block> <codeword> <length>`` lines in canonical (length, block) order."""
    order = sorted(range(len(code)), key=lambda i: (len(code[i]), i))
    return "".join(f"{block_label(alphabet, i, k)} {code[i] or '-'} {len(code[i])}\n" for i in order)


# -- block coders -------------------------------------------------------------

@dataclass(frozen=True)
class BlockCoderSpec:
    """``code[b]`` for every full block code ``b``; ``tail_code[j][v]`` for partial blocks of length ``j < k``."""

    alphabet: Alphabet
    k: int
    code: tuple[str, ...]
    tail_code: tuple[tuple[str, ...], ...]
    name: str = "block"

    def __post_init__(self):
        m = self.alphabet.size
        if self.k < 1:
            raise ValueError(f"block length must be >= 1, got {self.k}")
        if m ** self.k > MAX_TABLE:
            raise ValueError(f"|alphabet|^k = {m ** self.k} exceeds the state limit 2^24")
        object.__setattr__(self, "code", tuple(self.code))
        object.__setattr__(self, "tail_code", tuple(tuple(t) for t in self.tail_code))
        if len(self.code) != m ** self.k:
            raise ValueError(f"block code must cover all {m ** self.k} blocks")
        if len(self.tail_code) != self.k or any(len(t) != m ** j for j, t in enumerate(self.tail_code)):
            raise ValueError("tail code must cover every partial block of length 0..k-1")
        for table in (self.code, *self.tail_code):
            for c in table:
                _check_bits(c)
            if len(table) > 1 and not is_prefix_free(table):
                raise ValueError("code table is not prefix-free")
            if kraft_sum(table) > 1:
                raise ValueError("code table violates the Kraft inequality")
        for c in self.code:
            if not c:
                raise ValueError("block codewords must be nonempty")


def _per_symbol_tail(alphabet: Alphabet, k: int, symbol_code: Sequence[str]) -> list[list[str]]:
    m = alphabet.size
    tails = []
    for j in range(k):
        tails.append(["".join(symbol_code[a] for a in word) for word in product(range(m), repeat=j)])
    return tails


def beta_block_spec(beta: ProbMeasure, k: int, method: str = "shannon") -> BlockCoderSpec:
    """Block coder matched to the product measure ``beta^k``."""
    probs = product_fractions(beta, k)
    build = {"shannon": shannon_code_for, "huffman": huffman_code_for}
    if method not in build:
        raise ValueError(f"unknown code construction {method!r}")
    code = build[method](probs)
    tail = _per_symbol_tail(beta.alphabet, k, build[method](list(beta.probs)))
    return BlockCoderSpec(beta.alphabet, k, tuple(code), tuple(map(tuple, tail)), f"beta-{method}")


def empirical_block_spec(alphabet: Alphabet, k: int, block_counts: np.ndarray, symbol_counts: np.ndarray,
                         method: str = "huffman") -> BlockCoderSpec:
    """Block coder for smoothed empirical counts (frozen two-pass table)."""
    bw = smoothed_weights(block_counts)
    sw = smoothed_weights(symbol_counts)
    if method == "huffman":
        code, sym = huffman_code_for(bw), huffman_code_for(sw)
    elif method == "shannon":
        tb, ts = sum(bw), sum(sw)
        code = shannon_code_for([Fraction(x, tb) for x in bw])
        sym = shannon_code_for([Fraction(x, ts) for x in sw])
    else:
        raise ValueError(f"unknown code construction {method!r}")
    tail = _per_symbol_tail(alphabet, k, sym)
    return BlockCoderSpec(alphabet, k, tuple(code), tuple(map(tuple, tail)), f"empirical-{method}")


class BlockCoder(FiniteStateCompressor):
    """Finite-state machine realising a :class:`BlockCoderSpec`.

    States are buffer contents: state ``offset(j) + v`` holds the partial block
    of length ``j`` with base-|alphabet| code ``v``, where
    ``offset(j) = (m**j - 1) / (m - 1)``. State 0 is the empty buffer.
    """

    def __init__(self, spec: BlockCoderSpec):
        m, k = spec.alphabet.size, spec.k
        offsets = [(m ** j - 1) // (m - 1) for j in range(k + 1)]
        n_states = offsets[k]
        nxt = np.zeros((n_states, m), dtype=np.int64)
        out: list[list[str]] = []
        final = []
        for j in range(k):
            for v in range(m ** j):
                row = []
                for a in range(m):
                    if j == k - 1:
                        nxt[offsets[j] + v, a] = 0
                        row.append(spec.code[v * m + a])
                    else:
                        nxt[offsets[j] + v, a] = offsets[j + 1] + v * m + a
                        row.append("")
                out.append(row)
                final.append(spec.tail_code[j][v])
        super().__init__(spec.alphabet, nxt, out, 0, final)
        self.spec = spec
        self.offsets = offsets
        self.code_lengths = np.array([len(c) for c in spec.code], dtype=np.int64)
        self.tail_lengths = np.array([len(c) for c in final], dtype=np.int64)
        self._decode_table = {c: b for b, c in enumerate(spec.code)}

    @property
    def k(self) -> int:
        return self.spec.k

    def state_of(self, j: int, v: int) -> int:
        return self.offsets[j] + v

    def buffer_of(self, state: int) -> tuple[int, int]:
        j = int(np.searchsorted(self.offsets, state, side="right")) - 1
        return j, state - self.offsets[j]

    def block_codes(self, w: SymbolSeq) -> tuple[np.ndarray, int, int]:
        """Codes of the full aligned blocks, plus (length, code) of the pending partial block."""
        m, k = self.alphabet.size, self.k
        n_full = len(w) // k
        data = w.data.astype(np.int64)
        blocks = np.zeros(n_full, dtype=np.int64)
        full = data[:n_full * k].reshape(n_full, k)
        for j in range(k):
            blocks = blocks * m + full[:, j]
        v = 0
        for a in data[n_full * k:].tolist():
            v = v * m + a
        return blocks, len(w) - n_full * k, v

    def run(self, w: SymbolSeq) -> tuple[str, int]:
        _check_alphabet(self.alphabet, w.alphabet)
        blocks, j, v = self.block_codes(w)
        codes = self.spec.code
        return "".join(codes[b] for b in blocks.tolist()), self.state_of(j, v)

    def prefix_bits(self, w: SymbolSeq, lengths: Sequence[int], flush: bool = True) -> np.ndarray:
        """``|C(w[:n])|`` for each ``n`` in ``lengths`` without re-running the machine."""
        m, k = self.alphabet.size, self.k
        lengths = np.asarray(lengths, dtype=np.int64)
        max_n = int(lengths.max()) if lengths.size else 0
        blocks, _, _ = self.block_codes(w[:max_n])
        cum = np.concatenate([[0], np.cumsum(self.code_lengths[blocks])])
        bits = cum[lengths // k]
        if flush:
            data = w.data.astype(np.int64)
            for idx, n in enumerate(lengths.tolist()):
                j = n % k
                v = 0
                for a in data[n - j:n].tolist():
                    v = v * m + a
                bits[idx] += self.tail_lengths[self.state_of(j, v)]
        return bits


def build_block_coder(spec: BlockCoderSpec) -> BlockCoder:
    return BlockCoder(spec)


def decode(coder: BlockCoder, bits: str, final_state: int, flushed: bool = True) -> SymbolSeq:
    """Invert :func:`compress` for a block coder.

    The pending partial block is read off ``final_state``; when ``flushed``
    the trailing tail codeword is checked against it and stripped. A string
    that stops inside a codeword raises :class:`DecodeError`. Dropping whole
    trailing codewords cannot be detected without the input length.
    """
    _check_bits(bits)
    if not 0 <= final_state < coder.n_states:
        raise DecodeError(f"final state {final_state} does not exist")
    j, v = coder.buffer_of(final_state)
    if flushed:
        tail = coder.spec.tail_code[j][v]
        if len(bits) < len(tail) or not bits.endswith(tail):
            raise DecodeError("bit string does not end with the tail codeword of the final state")
        bits = bits[:len(bits) - len(tail)]
    table = coder._decode_table
    longest = int(coder.code_lengths.max())
    m, k = coder.alphabet.size, coder.k
    out: list[int] = []
    pos = 0
    while pos < len(bits):
        for end in range(pos + 1, min(pos + longest, len(bits)) + 1):
            b = table.get(bits[pos:end])
            if b is not None:
                break
        else:
            raise DecodeError(f"no codeword matches the bits at offset {pos}")
        digits = []
        for _ in range(k):
            b, d = divmod(b, m)
            digits.append(d)
        out.extend(reversed(digits))
        pos = end
    digits = []
    for _ in range(j):
        v, d = divmod(v, m)
        digits.append(d)
    out.extend(reversed(digits))
    return SymbolSeq(coder.alphabet, out)


# -- information-losslessness ---------------------------------------------------

@dataclass(frozen=True)
class LosslessResult:
    lossless: bool
    counterexample: tuple[str, str] | None = None

    def __bool__(self) -> bool:
        return self.lossless


def is_lossless_bruteforce(coder: FiniteStateCompressor, max_len: int, budget: int = 1 << 20) -> LosslessResult:
    """Check that ``u -> (streamed output, final state)`` is injective for ``|u| <= max_len``.

    Inputs of different lengths are compared too. On failure the first
    colliding pair of inputs is returned, shortest length first.
    """
    m = coder.alphabet.size
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    if m ** max_len > budget:
        raise ValueError(f"|alphabet|^L = {m ** max_len} exceeds the enumeration budget {budget}")
    nxt = coder.next_state.tolist()
    out = coder.output
    syms = coder.alphabet.symbols
    seen: dict[tuple[str, int], str] = {}
    frontier = [("", "", coder.start)]
    for depth in range(max_len + 1):
        level: dict[tuple[str, int], str] = {}
        for word, bits, q in frontier:
            prior = level.setdefault((bits, q), word)
            if prior != word:
                return LosslessResult(False, (prior, word))
        # Equal-length collisions are reported first; then across lengths.
        for key, word in level.items():
            prior = seen.setdefault(key, word)
            if prior != word:
                return LosslessResult(False, (prior, word))
        if depth == max_len:
            break
        frontier = [(word + syms[a], bits + out[q][a], nxt[q][a]) for word, bits, q in frontier for a in range(m)]
    return LosslessResult(True)
