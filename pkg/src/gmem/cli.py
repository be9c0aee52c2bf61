"""Command-line entry point.

Exit status: 0 on success or accepted recall, 2 when recall rejects the
probe, 1 on any error (including usage errors).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evalbench
from .corpus import CorpusSpec, generate_corpus, load_pbm, save_pbm
from .network import HyperParams, MemoryNet, NormMode
from .patterns import BottomRight, MaskedPattern, apply_mask
from .persistence import DType, load_pattern_set, load_weights, save_pattern_set, save_weights

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _density_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    lo = float(lo)
    return (lo, float(hi) if sep else lo)


def _fractions(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _add_params(p: argparse.ArgumentParser):
    d = HyperParams()
    p.add_argument("--eps-w", type=float, default=d.eps_w)
    p.add_argument("--eps-v", type=float, default=d.eps_v)
    p.add_argument("--theta", type=float, default=d.theta)
    p.add_argument("--tau", type=float, default=d.tau)


def _add_recall_opts(p: argparse.ArgumentParser):
    p.add_argument("--norm", choices=[m.value for m in NormMode], default=NormMode.PRESENTED.value)
    p.add_argument("--tau", type=float, default=None, help="override the threshold stored in the weights")


def _add_report_opts(p: argparse.ArgumentParser):
    p.add_argument("-o", "--out", type=Path, default=None, help="CSV path (default: <experiment>_<timestamp>.csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gmem", description="One-neuron-per-pattern memory: store, recall, evaluate.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic corpus directory")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--size", type=int, default=None, help="square side; shorthand for --width/--height")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--density", type=_density_range, default=(0.475, 0.507), help="lo:hi")
    p.add_argument("--overlay", action="store_true", help="stamp shared finder blocks in three corners")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--text", action="store_true", help="write plain P1 instead of P4")
    p.add_argument("-o", "--out", type=Path, required=True)

    p = sub.add_parser("train", help="store a corpus and write a weight file")
    p.add_argument("corpus", type=Path)
    p.add_argument("weights", type=Path)
    p.add_argument("--dtype", choices=["f64", "f32", "f16"], default="f64")
    _add_params(p)

    p = sub.add_parser("recall", help="recall one probe pattern")
    p.add_argument("weights", type=Path)
    p.add_argument("probe", type=Path)
    p.add_argument("--keep", type=float, default=None, help="present only the bottom-right keep fraction")
    p.add_argument("--emit", type=Path, default=None, help="write the recalled pattern as PBM")
    _add_recall_opts(p)

    p = sub.add_parser("evaluate", help="full-recall experiment")
    p.add_argument("weights", type=Path)
    p.add_argument("corpus", type=Path)
    _add_recall_opts(p)
    _add_report_opts(p)

    p = sub.add_parser("sweep", help="occlusion sweep over keep fractions")
    p.add_argument("weights", type=Path)
    p.add_argument("corpus", type=Path)
    p.add_argument("--fractions", type=_fractions, default=[1.0, 0.5, 0.25, 0.207, 0.15, 0.1, 0.05])
    _add_recall_opts(p)
    _add_report_opts(p)

    p = sub.add_parser("probe", help="probe with a pattern that was never stored")
    p.add_argument("weights", type=Path)
    p.add_argument("corpus", type=Path)
    p.add_argument("--unknown", type=Path, required=True)
    _add_recall_opts(p)
    _add_report_opts(p)
    return parser


def _load_net(path: Path, tau: float | None) -> MemoryNet:
    net = load_weights(path.read_bytes())
    if tau is not None:
        net.params = HyperParams(net.params.eps_w, net.params.eps_v, net.params.theta, tau)
    return net


def _write_report(report, args, out=sys.stdout) -> Path:
    path = args.out or Path(evalbench.default_report_name(report.kind))
    with open(path, "w", newline="") as fh:
        evalbench.write_csv(report, fh)
    print(f"report: {path}", file=out)
    return path


def cmd_gen(args) -> int:
    width = args.width or args.size
    height = args.height or args.size
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if not width or not height:
        raise UsageError("give --size or both --width and --height")
    spec = CorpusSpec(args.count, width, height, args.density, args.overlay, args.seed)
    save_pattern_set(args.out, generate_corpus(spec), binary=not args.text)
    print(f"wrote {args.count} patterns to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    patterns = load_pattern_set(args.corpus)
    params = HyperParams(args.eps_w, args.eps_v, args.theta, args.tau)
    net = MemoryNet(patterns.width, patterns.height, params)
    net.store_all(patterns)
    args.weights.write_bytes(save_weights(net, DType.parse(args.dtype)))
    print(f"stored N={net.N} patterns (R={net.R}) in {args.weights}")
    return EXIT_OK


def cmd_recall(args) -> int:
    net = _load_net(args.weights, args.tau)
    pattern = load_pbm(args.probe.read_bytes())
    probe = MaskedPattern.full(pattern) if args.keep is None else apply_mask(pattern, BottomRight(args.keep))
    r = net.recall(probe, NormMode(args.norm))
    verdict = "accepted" if r.accepted else "rejected"
    print(f"winner={r.winner} score={r.winner_score:.6f} {verdict} presented={r.presented_count}")
    if args.emit is not None:
        args.emit.write_bytes(save_pbm(net.reconstruct(r.winner), binary=True))
    return EXIT_OK if r.accepted else EXIT_REJECTED


def cmd_evaluate(args) -> int:
    net = _load_net(args.weights, args.tau)
    report = evalbench.run_full_recall(net, load_pattern_set(args.corpus), NormMode(args.norm))
    print(f"accuracy={report.accuracy:.6f} max={report.max_score:.6f} min={report.min_score:.6f}")
    _write_report(report, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    net = _load_net(args.weights, args.tau)
    patterns = load_pattern_set(args.corpus)
    report = evalbench.run_occlusion_sweep(net, patterns, args.fractions, norm=NormMode(args.norm))
    for f, sub in report.by_fraction.items():
        print(f"keep={f:.6f} accuracy={sub.accuracy:.6f}")
    failure = "none" if report.failure_fraction is None else f"{report.failure_fraction:.6f}"
    print(f"failure_fraction={failure}")
    _write_report(report, args)
    return EXIT_OK


def cmd_probe(args) -> int:
    net = _load_net(args.weights, args.tau)
    unknown = load_pbm(args.unknown.read_bytes())
    report = evalbench.run_unknown_probe(net, load_pattern_set(args.corpus), unknown, NormMode(args.norm))
    o = report.per_pattern[0]
    verdict = "accepted" if o.accepted else "rejected"
    print(f"{verdict} winner={o.winner} max_score={o.score:.6f}")
    _write_report(report, args)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "recall": cmd_recall,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gmem {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, IndexError, RuntimeError) as exc:
        print(f"gmem {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
