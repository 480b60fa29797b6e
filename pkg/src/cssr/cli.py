"""Command-line front-end.

Exit codes: 0 success, 1 usage error, 2 bad input or validation failure,
3 inference failure. Every failure prints one ``cssr: error: Kind: message``
line to stderr.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path
from typing import Sequence

from . import harness
from .alphabet import LINES, WHOLE, infer_alphabet, ingest, parse_alphabet
from .engine import InferenceConfig, infer
from .errors import CSSRError, InferenceError, ValidationError
from .machine import deserialize, generate, serialize, to_dot
from .processes import NAMED, resolve_process
from .stats import CHISQ, DEFAULT_ALPHA, KS

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFERENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(float(x)) if "e" in x.lower() else int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _count(text: str) -> int:
    try:
        return int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    spec_help = f"built-in process ({', '.join(sorted(NAMED))}) or a process-spec JSON file"
    p = _Parser(prog="cssr", description="Causal-state reconstruction of unifilar hidden Markov models.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("infer", help="reconstruct a machine from a symbol file")
    s.add_argument("--data", required=True, help="text file of symbols")
    s.add_argument("--alphabet", help="symbols, e.g. AB or 'up down' (default: distinct symbols in the data)")
    s.add_argument("--lmax", type=int, required=True, help="longest history length to examine")
    s.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="significance level (default 1e-3)")
    s.add_argument("--test", choices=(KS, CHISQ), default=KS, help="two-sample test (default ks)")
    s.add_argument("--min-count", type=int, default=1, help="skip histories seen fewer times (default 1)")
    s.add_argument("--mode", choices=(WHOLE, LINES), default=WHOLE,
                   help="whole: file is one sequence; lines: one sequence per line")
    s.add_argument("--tokens", action="store_true", help="symbols are whitespace-separated tokens")
    s.add_argument("--out", help="machine JSON output (default stdout)")
    s.add_argument("--dot", help="also write a Graphviz rendering here")

    s = sub.add_parser("generate", help="sample a sequence from a process")
    s.add_argument("--spec", required=True, help=spec_help)
    s.add_argument("--n", type=_count, required=True, help="number of symbols")
    s.add_argument("--seed", type=int, required=True, help="random seed")
    s.add_argument("--out", help="output text file (default stdout)")

    s = sub.add_parser("eval", help="score a machine against a true process")
    s.add_argument("--spec", required=True, help=spec_help)
    s.add_argument("--machine", required=True, help="machine JSON from infer")
    s.add_argument("--word-length", type=int, default=10, help="word length W (default 10)")

    s = sub.add_parser("sweep", help="run repeated trials over a grid of n and lmax, write CSV")
    s.add_argument("--spec", required=True, help=spec_help)
    s.add_argument("--n", type=_int_list, required=True, help="comma-separated data lengths, e.g. 1000,1e4")
    s.add_argument("--lmax", type=_int_list, required=True, help="comma-separated lmax values")
    s.add_argument("--trials", type=int, default=30, help="trials per cell (default 30)")
    s.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="significance level (default 1e-3)")
    s.add_argument("--test", choices=(KS, CHISQ), default=KS, help="two-sample test (default ks)")
    s.add_argument("--word-length", type=int, default=10, help="word length W (default 10)")
    s.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    s.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    s.add_argument("--out", help="CSV output (default stdout)")
    s.add_argument("--summary", action="store_true", help="append per-cell mean rows with trial=-1")
    s.add_argument("--no-timing", action="store_true",
                   help="write runtime_ms as 0 so repeated runs are byte-identical")

    s = sub.add_parser("suggest-lmax", help="largest lmax the data length supports")
    s.add_argument("--n", type=_count, required=True, help="data length")
    s.add_argument("--k", type=int, required=True, help="alphabet size")
    s.add_argument("--entropy", type=float, help="entropy rate in bits (default log2 k)")
    return p


def _cmd_infer(args) -> int:
    text = _read(args.data)
    alphabet = parse_alphabet(args.alphabet) if args.alphabet else infer_alphabet(text, args.tokens)
    corpus = ingest(text, alphabet, args.mode, args.tokens)
    config = InferenceConfig(args.lmax, args.alpha, args.test, args.min_count)
    machine = infer(corpus, alphabet, config)
    _write(args.out, serialize(machine))
    if args.dot:
        _write(args.dot, to_dot(machine))
    return EXIT_OK


def _cmd_generate(args) -> int:
    spec = resolve_process(args.spec)
    seq = generate(spec, args.n, args.seed)
    _write(args.out, spec.alphabet.render(seq.data.tolist()) + "\n")
    return EXIT_OK


def _cmd_eval(args) -> int:
    spec = resolve_process(args.spec)
    machine = deserialize(_read(args.machine))
    err = harness.prediction_error(spec, machine, args.word_length)
    print(f"n_states={machine.n_states}")
    print(f"tv_error={err:.6g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = harness.SweepConfig(
        resolve_process(args.spec), tuple(args.n), tuple(args.lmax), args.trials, args.alpha,
        args.word_length, args.seed, args.jobs, args.test, not args.no_timing,
    )
    records = harness.run_sweep(config)
    buf = io.StringIO()
    harness.write_csv(records, buf, aggregates=args.summary)
    _write(args.out, buf.getvalue())
    return EXIT_OK


def _cmd_suggest(args) -> int:
    print(harness.suggest_lmax(args.n, args.k, args.entropy))
    return EXIT_OK


COMMANDS = {
    "infer": _cmd_infer,
    "generate": _cmd_generate,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "suggest-lmax": _cmd_suggest,
}


def _diagnose(kind: str, message) -> None:
    line = " ".join(str(message).split())
    print(f"cssr: error: {kind}: {line}", file=sys.stderr)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _diagnose("UsageError", exc)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except InferenceError as exc:
        _diagnose(type(exc).__name__, exc)
        return EXIT_INFERENCE
    except (CSSRError, ValueError) as exc:
        _diagnose(type(exc).__name__, exc)
        return EXIT_DATA
    except OSError as exc:
        _diagnose(type(exc).__name__, f"{exc.filename}: {exc.strerror}")
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
