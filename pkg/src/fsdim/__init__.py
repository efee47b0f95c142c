"""Finite-state beta-dimension estimation and the divergence formula.

``H(alpha) / (H(alpha) + D(alpha||beta))`` is the finite-state
beta-dimension of alpha-normal sequences; this package computes the
closed-form side and estimates the compression side on sampled sequences.
"""

__version__ = "0.1.0"

from .measures import (Alphabet, AlphabetMismatch, ProbMeasure, SymbolSeq, cross_cost_rate,
                       divergence_formula_value, entropy, kl_divergence, load_measure, self_information,
                       word_probability)
from .seqgen import GenSpec, census, generate, normality_report
from .fsc import (BlockCoder, BlockCoderSpec, DecodeError, FiniteStateCompressor, build_block_coder, compress,
                  decode, huffman_code_for, is_lossless_bruteforce, shannon_code_for)
from .dimest import (DimEstimate, RatioTrajectory, divergence_experiment, estimate_dimensions,
                     ideal_ratio_trajectory, ratio_trajectory)
