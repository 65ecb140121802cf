"""Command-line entry point: ``dilutedmp <subcommand> [flags]``.

Subcommands:
    sweep    Monte Carlo sweep over distances and error rates, CSV out.
    decode   Decode one syndrome read from a file or stdin.
    radius   Exhaustive error-correcting radius of a diluted lattice.
    cavity   Cavity discrepancy of a mixed-type 4-cycle, exact and closed form.
    strip    Block experiment on the periodic strip, CSV out.
    graph    Export a diluted Tanner graph.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import Sequence

from . import __version__
from .decoder import compile_sequence, decode
from .geometry import Family, SparsificationPattern, build_surface_code, export_graph, sparsify
from .harness import SweepSpec, parse_p_grid, run_sweep, write_csv
from .mp import Mode, MpConfig, PhiMode
from .noise import NoiseKind, NoiseModel, Prior, prior_of
from .oracle import cavity_discrepancy_closed_form, cavity_discrepancy_exact, error_correcting_radius
from .pauli import Syndrome
from .strip import block_experiment, write_block_csv

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits with 2; keep the message short
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _p_grid(text: str) -> list[float]:
    try:
        return parse_p_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _eps(text: str):
    """``0.15`` or a per-distance map ``3:0.15,65:0.05``."""
    try:
        if ":" in text:
            return {int(k): float(v) for k, v in (item.split(":") for item in text.split(",") if item)}
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eps {text!r}")


def _budget(text: str):
    vals = _int_list(text)
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("budget values must be positive")
    return vals[0] if len(vals) == 1 else tuple(vals)


def _pattern(text: str):
    text = text.lower()
    if text == "auto":
        return "auto"
    try:
        return Family.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


@contextlib.contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_decoder_flags(p: argparse.ArgumentParser):
    p.add_argument("--noise", choices=["x", "depolarizing"], default="depolarizing", help="noise model (default: depolarizing)")
    p.add_argument("--pattern", type=_pattern, default="auto",
                   help="sparsification family dv|dh|cv|ch, or auto (dv for depolarizing, ch for x)")
    p.add_argument("--eps", type=_eps, default=None,
                   help="damping factor, or a per-distance map like 17:0.15,65:0.05 (default: per-noise table)")
    p.add_argument("--mode", choices=["minsum", "sumproduct"], default="minsum", help="check update rule")
    p.add_argument("--phi", choices=["max", "sum"], default="max", help="marginalization inside the correlation message")
    p.add_argument("--budget", type=_budget, default=None,
                   help="per-stage iterations: one integer b gives b*(k+1); a comma list is used as is (default 20)")
    p.add_argument("--no-dilution", action="store_true",
                   help="decode on the undiluted graph only, with the whole iteration budget")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dilutedmp", description="Quaternary message passing under graph dilution.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    sw = sub.add_parser("sweep", help="Monte Carlo sweep, one CSV row per (d, p)")
    sw.add_argument("--d", type=_int_list, required=True, help="distances, comma-separated")
    sw.add_argument("--p", type=_p_grid, required=True, help="error rates: comma list or start:stop:step")
    _add_decoder_flags(sw)
    sw.add_argument("--trials", type=int, default=1000, help="trials per point (default 1000)")
    sw.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    sw.add_argument("--workers", type=int, default=1, help="worker processes per point (default 1)")
    sw.add_argument("--out", default="-", help="CSV path, or - for stdout (default)")

    de = sub.add_parser("decode", help="decode one syndrome (Z-check bits then X-check bits)")
    de.add_argument("--d", type=int, required=True, help="code distance")
    de.add_argument("--p", type=float, required=True, help="physical error rate used for the prior")
    _add_decoder_flags(de)
    de.add_argument("--syndrome", default="-", help="file with whitespace-separated bits, or - for stdin")

    ra = sub.add_parser("radius", help="exhaustive error-correcting radius of a diluted lattice")
    ra.add_argument("--d", type=int, required=True, help="code distance")
    ra.add_argument("--pattern", type=_pattern, required=True, help="dv|dh|cv|ch")
    ra.add_argument("--s", type=int, required=True, help="sparsification ratio")
    ra.add_argument("--max-weight", type=int, default=None, help="largest weight scanned exhaustively")
    ra.add_argument("--ties", choices=["fail", "favorable"], default="fail",
                    help="how equal-weight logical classes are scored (default: fail)")
    ra.add_argument("--error-type", choices=["X", "Z"], default="X", help="error type (default X)")

    ca = sub.add_parser("cavity", help="cavity discrepancy of a mixed-type 4-cycle")
    src = ca.add_mutually_exclusive_group(required=True)
    src.add_argument("--p", type=float, help="depolarizing rate")
    src.add_argument("--prior", help="explicit prior pI,pX,pY,pZ")
    ca.add_argument("--sigma", type=int, choices=[0, 1], default=None, help="syndrome bit (default: both)")

    st = sub.add_parser("strip", help="block experiment on the periodic strip")
    st.add_argument("--k", type=_int_list, required=True, help="stages, comma-separated")
    st.add_argument("--nB", type=_int_list, required=True, help="input block weights, comma-separated")
    st.add_argument("--samples", type=int, default=10000, help="samples per point (default 10000)")
    st.add_argument("--weights", default="1:1", help="w_corr:w_wrong (default 1:1)")
    st.add_argument("--p", type=float, default=0.05, help="prior error rate (default 0.05)")
    st.add_argument("--seed", type=int, default=0, help="seed (default 0)")
    st.add_argument("--out", default="-", help="CSV path, or - for stdout (default)")

    gr = sub.add_parser("graph", help="export a diluted Tanner graph")
    gr.add_argument("--d", type=int, required=True, help="code distance")
    gr.add_argument("--pattern", type=_pattern, required=True, help="dv|dh|cv|ch")
    gr.add_argument("--s", type=int, default=1, help="sparsification ratio (default 1)")
    gr.add_argument("--format", choices=["edge-list", "dot"], default="edge-list", help="output format")
    gr.add_argument("--out", default="-", help="output path, or - for stdout (default)")
    return parser


def _spec_kwargs(args) -> dict:
    return dict(
        noise=NoiseKind.parse(args.noise),
        pattern=args.pattern,
        eps=args.eps,
        mode=Mode(args.mode),
        phi_mode=PhiMode(args.phi),
        budget=args.budget,
        dilution=not args.no_dilution,
    )


def _cmd_sweep(args) -> int:
    spec = SweepSpec(tuple(args.d), tuple(args.p), trials=args.trials, seed=args.seed, **_spec_kwargs(args))
    with _output(args.out) as fh:
        write_csv(run_sweep(spec, workers=args.workers), fh)
    return 0


def _cmd_decode(args) -> int:
    spec = SweepSpec((args.d,), (args.p,), **_spec_kwargs(args))
    text = sys.stdin.read() if args.syndrome == "-" else open(args.syndrome).read()
    code = build_surface_code(args.d)
    try:
        syn = Syndrome.from_bits(code, [int(t) for t in text.split()])
    except ValueError as exc:
        print(f"dilutedmp decode: {exc}", file=sys.stderr)
        return 2
    comp = compile_sequence(args.d, spec.family(), None if spec.dilution else 1)
    cfg = MpConfig(spec.mode, eps=spec.eps_for(args.d), phi_mode=spec.phi_mode)
    out = decode(code, comp, syn, prior_of(NoiseModel(spec.noise, args.p)), cfg, budgets=spec.budgets_for(args.d))
    print(f"estimate: {out.estimate}")
    print(f"converged: {str(out.converged).lower()}")
    print(f"stage: {out.stage_of_convergence}")
    print(f"iterations: {out.total_iterations}")
    return 0


def _cmd_radius(args) -> int:
    if args.pattern == "auto":
        print("dilutedmp radius: --pattern must name a family", file=sys.stderr)
        return 2
    code = build_surface_code(args.d)
    rep = error_correcting_radius(code, SparsificationPattern(args.pattern, args.s), max_weight=args.max_weight,
                                  error_type=args.error_type, ties=args.ties)
    print(rep.to_text())
    return 0


def _cmd_cavity(args) -> int:
    if args.prior is not None:
        vals = [float(v) for v in args.prior.split(",")]
        if len(vals) != 4:
            print("dilutedmp cavity: --prior needs four numbers", file=sys.stderr)
            return 2
        prior = Prior(*vals)
    else:
        prior = prior_of(NoiseModel(NoiseKind.DEPOLARIZING, args.p))
    for sigma in ((0, 1) if args.sigma is None else (args.sigma,)):
        exact = cavity_discrepancy_exact(prior, sigma)
        closed = cavity_discrepancy_closed_form(prior, sigma)
        print(f"sigma={sigma} exact={exact:.12e} closed_form={closed:.12e} diff={abs(exact - closed):.3e}")
    return 0


def _cmd_strip(args) -> int:
    try:
        wc, ww = (float(v) for v in args.weights.split(":"))
    except ValueError:
        print(f"dilutedmp strip: bad --weights {args.weights!r}", file=sys.stderr)
        return 2
    rows = (block_experiment(k, n, args.samples, wc, ww, p=args.p, seed=args.seed) for k in args.k for n in args.nB)
    with _output(args.out) as fh:
        write_block_csv(rows, fh)
    return 0


def _cmd_graph(args) -> int:
    if args.pattern == "auto":
        print("dilutedmp graph: --pattern must name a family", file=sys.stderr)
        return 2
    graph = sparsify(build_surface_code(args.d), SparsificationPattern(args.pattern, args.s))
    with _output(args.out) as fh:
        fh.write(export_graph(graph, args.format))
        fh.write("\n")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "decode": _cmd_decode,
    "radius": _cmd_radius,
    "cavity": _cmd_cavity,
    "strip": _cmd_strip,
    "graph": _cmd_graph,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"dilutedmp {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
