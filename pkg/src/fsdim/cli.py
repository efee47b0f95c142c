"""Command-line front end: ``fsdim <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input (bad flags, malformed files,
guard violations, or a failed normality check) and 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .dimest import MODES, estimate_dimensions, divergence_experiment, training_counts
from .fsc import beta_block_spec, build_block_coder, compress, empirical_block_spec, format_codebook
from .measures import (cross_cost_rate, divergence_formula_value, entropy, kl_divergence, load_measure,
                       self_information)
from .seqgen import PRNG_NAME, GenSpec, generate, normality_report, read_sequence, write_sequence


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message} (see '{self.prog} --help')")


def _out(text: str, path: str | None = None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _positive(kind):
    def parse(value):
        try:
            x = kind(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {value!r}") from None
        if x <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {value}")
        return x
    return parse


def _seed(value):
    try:
        s = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {value!r}") from None
    if not 0 <= s < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return s


def cmd_entropy(args):
    print(f"{entropy(load_measure(args.measure)):.6f}")


def cmd_kl(args):
    print(f"{kl_divergence(load_measure(args.alpha), load_measure(args.beta)):.6f}")


def cmd_predict(args):
    print(f"{divergence_formula_value(load_measure(args.alpha), load_measure(args.beta)):.6f}")


def cmd_selfinfo(args):
    beta = load_measure(args.measure)
    w = read_sequence(args.input, beta.alphabet)
    print(f"{self_information(beta, w):.6f}")


def cmd_gen(args):
    alpha = load_measure(args.measure)
    write_sequence(generate(GenSpec(alpha, args.n, args.seed)), args.out)


def cmd_check_normal(args):
    alpha = load_measure(args.measure)
    w = read_sequence(args.input, alpha.alphabet)
    report = normality_report(w, alpha, args.kmax)
    print(report.format(args.epsilon))
    return 0 if report.passes(args.epsilon) else 1


def cmd_compress(args):
    beta = load_measure(args.beta)
    w = read_sequence(args.input, beta.alphabet)
    if args.empirical:
        blocks, symbols = training_counts(w, args.k)
        spec = empirical_block_spec(beta.alphabet, args.k, blocks, symbols, args.code)
    else:
        spec = beta_block_spec(beta, args.k, args.code)
    coder = build_block_coder(spec)
    result = compress(coder, w)
    if args.out:
        Path(args.out).write_text(result.bits + "\n", encoding="ascii")
    if args.codebook:
        Path(args.codebook).write_text(format_codebook(beta.alphabet, args.k, spec.code), encoding="utf-8")
    info = self_information(beta, w)
    ratio = len(result) / info if info > 0 else float("nan")
    print(f"coder {spec.name}\nk {args.k}\nbits {len(result)}\nfinal_state {result.final_state}\n"
          f"self_information {info:.6f}\nratio {ratio:.6f}")


def cmd_dim(args):
    beta = load_measure(args.beta)
    w = read_sequence(args.input, beta.alphabet)
    est = estimate_dimensions(w, beta, args.kmax, args.mode, n_checkpoints=args.checkpoints)
    _out(est.to_csv(), args.csv)
    if args.csv:
        print(f"dim_lower {est.dim_lower_est:.6f}\ndim_upper {est.dim_upper_est:.6f}")


def cmd_experiment(args):
    alpha, beta = load_measure(args.alpha), load_measure(args.beta)
    report = divergence_experiment(alpha, beta, args.n, args.seed, args.kmax, args.mode)
    _out(report.to_csv(), args.csv)
    if args.csv:
        print(f"cross_cost_rate {cross_cost_rate(alpha, beta):.6f}")
        print(report.summary())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fsdim", description="Finite-state beta-dimension and divergence-formula toolkit.")
    p.add_argument("--version", action="version", version=f"fsdim {__version__} (prng {PRNG_NAME})")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("entropy", help="Shannon entropy of a measure")
    s.add_argument("--measure", required=True)
    s.set_defaults(func=cmd_entropy)

    for name, func, help_ in (("kl", cmd_kl, "KL divergence D(alpha||beta)"),
                              ("predict", cmd_predict, "H(alpha)/(H(alpha)+D(alpha||beta))")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--alpha", required=True)
        s.add_argument("--beta", required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("selfinfo", help="Shannon self-information of a sequence file")
    s.add_argument("--measure", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=cmd_selfinfo)

    s = sub.add_parser("gen", help="generate an i.i.d. sequence file")
    s.add_argument("--measure", required=True)
    s.add_argument("--n", type=_positive(int), required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("check-normal", help="empirical normality report (exit 1 if any deviation > epsilon)")
    s.add_argument("--measure", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--kmax", type=_positive(int), default=3)
    s.add_argument("--epsilon", type=_positive(float), default=0.005)
    s.set_defaults(func=cmd_check_normal)

    s = sub.add_parser("compress", help="run a k-block coder over a sequence file")
    s.add_argument("--beta", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", type=_positive(int), required=True)
    s.add_argument("--empirical", action="store_true",
                   help="code table from smoothed block counts of the first half of the input")
    s.add_argument("--code", choices=("shannon", "huffman"), default="shannon")
    s.add_argument("--out", help="write the bit string here")
    s.add_argument("--codebook", help="write '<block> <codeword> <length>' lines here")
    s.set_defaults(func=cmd_compress)

    s = sub.add_parser("dim", help="estimate finite-state beta-dimensions of a sequence file")
    s.add_argument("--beta", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--kmax", type=_positive(int), default=8)
    s.add_argument("--mode", choices=MODES, default="ideal")
    s.add_argument("--checkpoints", type=_positive(int), default=32)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_dim)

    s = sub.add_parser("experiment", help="sample alpha, estimate beta-dimension, compare with the formula")
    s.add_argument("--alpha", required=True)
    s.add_argument("--beta", required=True)
    s.add_argument("--n", type=_positive(int), default=1 << 20)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--kmax", type=_positive(int), default=8)
    s.add_argument("--mode", choices=MODES, default="ideal")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args) or 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        name = exc.filename or ""
        print(f"fsdim: I/O error: {name}{': ' if name else ''}{exc.strerror or exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fsdim: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
