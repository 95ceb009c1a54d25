"""Command-line front end.

Exit status: 0 on success, 2 for unusable input (bad flags, unparsable files),
3 for domain errors such as a degenerate kernel or a nonnormal regime.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ParseError, UstatError
from .graphon import GraphSample, StepGraphon, load_graphon, sample
from .graphs import (
    BUILTIN_MOTIFS,
    Motif,
    automorphism_count,
    is_connected,
    is_strongly_connected,
    load_motif,
    motif_stats,
)
from .kernels import hoeffding_decompose, load_kernel, summarize
from .montecarlo import CASE_RATES, ExperimentSpec, classify_induced, verify_rate
from .stein import berry_esseen_bound, check_linearity_edge_swap, check_linearity_x_swap
from .ustat import count_subgraphs, variance_closed_form, variance_oracle

EXIT_INPUT = 2
EXIT_DOMAIN = 3


def _motif(arg: str) -> Motif:
    if arg in BUILTIN_MOTIFS and not Path(arg).exists():
        return BUILTIN_MOTIFS[arg]()
    return load_motif(arg)


def _graphon(args) -> StepGraphon:
    if args.graphon:
        return load_graphon(args.graphon)
    if args.p is not None:
        return StepGraphon.constant(args.p)
    raise UsageError("need --graphon or --p")


class UsageError(Exception):
    pass


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _flag(b: bool) -> str:
    return "true" if b else "false"


def cmd_motif(args) -> None:
    if not args.motif:
        raise UsageError("motif needs --motif")
    m = _motif(args.motif)
    st = motif_stats(m)
    parts = [
        f"e={st.edge_count}", f"s={st.two_star_count}", f"t={st.triangle_count}",
        f"|Aut|={automorphism_count(m)}",
        f"connected={_flag(is_connected(m))}",
        f"strongly_connected={_flag(is_strongly_connected(m))}",
    ]
    if args.p is not None:
        case = classify_induced(m, args.p)
        parts.append(f"case={case}")
        rate = CASE_RATES[case]
        parts.append(f"predicted_rate={'nonnormal' if rate is None else rate}")
    _emit(args, " ".join(parts) + "\n")


def _kernel(args):
    if args.kernel:
        return load_kernel(args.kernel)
    if args.motif:
        from .kernels import subgraph_kernel

        return subgraph_kernel(_motif(args.motif), _graphon(args), args.mode)
    raise UsageError("need --kernel, or --motif with --p/--graphon")


def cmd_decompose(args) -> None:
    f = _kernel(args)
    dec = hoeffding_decompose(f)
    s = summarize(dec)
    lines = ["A\tB\tv\tsigma\taut"]
    for c in dec:
        A = "{" + ",".join(map(str, c.A)) + "}"
        B = "{" + ",".join(f"{i}{j}" for i, j in c.B) + "}"
        lines.append(f"{A}\t{B}\t{c.v}\t{c.sigma!r}\t{c.aut}")
    lines += [
        f"# d={s.d} sigma1={s.sigma1!r} sigma_min={s.sigma_min!r} tau={s.tau!r}",
        f"# principal={len(s.principal_graphs)} all_connected={_flag(s.all_connected)} "
        f"all_strongly_connected={_flag(s.all_strongly_connected)}",
    ]
    _emit(args, "\n".join(lines) + "\n")


def cmd_sample(args) -> None:
    if args.n is None:
        raise UsageError("sample needs --n")
    g = sample(_graphon(args), args.n, args.seed)
    _emit(args, g.to_edge_list())


def cmd_count(args) -> None:
    if not args.motif:
        raise UsageError("count needs --motif")
    m = _motif(args.motif)
    if args.graph:
        path = Path(args.graph)
        g = GraphSample.from_edge_list(path.read_text(), str(path))
    else:
        if args.n is None:
            raise UsageError("count needs --graph, or --n with --p/--graphon")
        g = sample(_graphon(args), args.n, args.seed)
    _emit(args, f"{count_subgraphs(g, m, args.mode)}\n")


def cmd_variance(args) -> None:
    if args.n is None:
        raise UsageError("variance needs --n")
    f = _kernel(args)
    rep = variance_closed_form(hoeffding_decompose(f), args.n)
    text = rep.to_text()
    try:
        oracle = variance_oracle(f, args.n)
        rel = abs(rep.sigma_n_sq - oracle) / max(abs(oracle), 1e-300)
        text += f"oracle\t{oracle!r}\nrelative_error\t{rel!r}\n"
    except UstatError:
        text += "oracle\tskipped (state space too large)\n"
    _emit(args, text)


def cmd_stein_check(args) -> None:
    if args.n is None:
        raise UsageError("stein-check needs --n")
    f = _kernel(args)
    dec = hoeffding_decompose(f)
    construction = args.construction
    if construction == "auto":
        construction = "x-swap" if summarize(dec).d == 1 else "edge-swap"
    check = check_linearity_x_swap if construction == "x-swap" else check_linearity_edge_swap
    rep = check(f, args.n, samples=args.samples, seed=args.seed, decomp=dec)
    _emit(args, rep.to_text())


def cmd_bound(args) -> None:
    if args.n is None:
        raise UsageError("bound needs --n")
    f = _kernel(args)
    s = summarize(hoeffding_decompose(f))
    _emit(args, f"{berry_esseen_bound(s, f.k, args.n)!r}\n")


def cmd_verify_rate(args) -> None:
    if not args.n_grid:
        raise UsageError("verify-rate needs --n-grid")
    grid = tuple(int(t) for t in args.n_grid.split(","))
    common = dict(n_grid=grid, replicates=args.replicates, seed=args.seed,
                  standardization=args.standardization)
    if args.kernel:
        spec = ExperimentSpec(kernel=load_kernel(args.kernel), **common)
    elif args.motif:
        spec = ExperimentSpec(motif=_motif(args.motif), mode=args.mode, graphon=_graphon(args), **common)
    else:
        raise UsageError("verify-rate needs --kernel or --motif")
    rep = verify_rate(spec, threads=args.threads)
    summary = json.dumps(rep.summary(), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(rep.to_csv())
        Path(args.out).with_suffix(".json").write_text(summary)
        sys.stdout.write(f"verdict={rep.verdict} slope={rep.slope:.4f} r_squared={rep.r_squared:.4f}\n")
    else:
        sys.stdout.write(rep.to_csv() + summary)


COMMANDS = {
    "motif": cmd_motif,
    "decompose": cmd_decompose,
    "sample": cmd_sample,
    "count": cmd_count,
    "variance": cmd_variance,
    "stein-check": cmd_stein_check,
    "bound": cmd_bound,
    "verify-rate": cmd_verify_rate,
}


def _threads_default() -> int:
    env = os.environ.get("USTATLAB_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kernel", help="kernel spec file (JSON)")
    common.add_argument("--motif", "--file", dest="motif", help="motif file, or a builtin name")
    common.add_argument("--graphon", help="graphon spec file (JSON)")
    common.add_argument("--graph", help="edge-list file written by 'sample'")
    common.add_argument("--mode", choices=["inj", "ind"], default="inj")
    common.add_argument("--p", type=float, help="edge probability of a constant graphon")
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", help="output file (default: standard output)")

    parser = argparse.ArgumentParser(prog="ustatlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify-rate":
            p.add_argument("--n-grid", required=True, help="comma-separated, e.g. 16,32,64")
            p.add_argument("--replicates", type=int, required=True)
            p.add_argument("--standardization", choices=["exact", "plugin"], default="exact")
        if name == "stein-check":
            p.add_argument("--construction", choices=["auto", "x-swap", "edge-swap"], default="auto")
            p.add_argument("--samples", type=int, default=None,
                           help="random configurations instead of exhaustive enumeration")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        args.threads = _threads_default()
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ustatlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ParseError, OSError, json.JSONDecodeError) as exc:
        print(f"ustatlab: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UstatError, ValueError) as exc:
        print(f"ustatlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
