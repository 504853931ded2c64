"""quarkflow command line: decompose, verify, render, example, bench."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .catalog import EXAMPLES, example_program, load_example
from .decompose import emit_stage_kernels, render_dot, write_decomposition_json
from .errors import QuarkflowError
from .frontend import StencilProgram, parse, trace
from .graph import ComputationalGraph, read_graph_json, write_graph_json
from .pipeline import bench, oracle_suite, run, summary_lines, wk_sweep
from .verify import verify

FORMATS = ("json", "dot", "kernels", "summary")


def _use_color(stream) -> bool:
    return os.environ.get("QUARKFLOW_COLOR", "1") != "0" and stream.isatty()


def _paint(text: str, ok: bool, stream=sys.stdout) -> str:
    if not _use_color(stream):
        return text
    return f"\033[{32 if ok else 31}m{text}\033[0m"


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [_positive_int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of positive integers: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def load_input(args) -> tuple[str, ComputationalGraph, StencilProgram | None]:
    """Resolve --input / --example into a graph and, when available, its program."""
    if args.example:
        return args.example, load_example(args.example), example_program(args.example)
    path = Path(args.input)
    text = path.read_text()
    if path.suffix == ".stencil":
        program = parse(text)
        return path.stem, trace(program), program
    return path.stem, read_graph_json(text), None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary_text(result) -> str:
    return "".join(f"{k}: {v}\n" for k, v in summary_lines(result))


def cmd_decompose(args) -> int:
    name, graph, program = load_input(args)
    result = run(graph, args.wk)
    decomp = result.decomposition
    fmt = args.format
    if fmt == "summary":
        text = _summary_text(result)
        if args.wk_sweep:
            rows, stable = wk_sweep(graph, args.wk_sweep)
            for r in rows:
                text += (f"wk_sweep_{r.wk}: K={r.K} shared_weight={r.shared_weight} "
                         f"objective={r.objective}\n")
            text += f"wk_sweep_stable: {'yes' if stable else 'no'}\n"
        _emit(text, args.out)
    elif fmt == "json":
        _emit(write_decomposition_json(decomp), args.out)
    elif fmt == "dot":
        _emit(render_dot(decomp), args.out)
    else:
        kernels = emit_stage_kernels(decomp, program)
        if args.out:
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            for stage, text in zip(decomp.stages, kernels):
                (outdir / f"stage_{stage.k}.kernel").write_text(text)
        else:
            sys.stdout.write("\n".join(kernels))
    return 0


def cmd_verify(args) -> int:
    _, graph, _ = load_input(args)
    data = json.loads(Path(args.decomposition).read_text())
    if not isinstance(data, dict) or not isinstance(data.get("stages"), list):
        raise QuarkflowError("decomposition file has no stage list")
    report = verify(graph, data)
    sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    return 0 if report.passed else 2


def cmd_render(args) -> int:
    """Write the figure, DOT source, decomposition JSON and summary into --out."""
    from .plotting import plot_decomposition

    name, graph, _ = load_input(args)
    result = run(graph, args.wk)
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    plot_decomposition(result.decomposition, str(outdir / f"{name}.png"), title=name)
    (outdir / f"{name}.dot").write_text(render_dot(result.decomposition))
    (outdir / f"{name}.json").write_text(write_decomposition_json(result.decomposition))
    summary = _summary_text(result)
    (outdir / f"{name}.summary.txt").write_text(summary)
    sys.stdout.write(summary)
    sys.stdout.write(f"figure: {outdir / (name + '.png')}\n")
    return 0


def cmd_example(args) -> int:
    _emit(write_graph_json(load_example(args.name)), args.out)
    return 0


def cmd_bench(args) -> int:
    names = args.examples.split(",") if args.examples else ["heat1d", "heat3d", "euler3d"]
    rows = [bench(n, EXAMPLES[n] if n in EXAMPLES else (lambda n=n: load_example(n)),
                  repeat=args.repeat) for n in names]
    lines = ["name\tvertices\tedges\tswept\tK\tshared_weight\tmedian_ms\tbudget_ms\tstatus"]
    for r in rows:
        status = "ok" if r.within_budget else "REGRESSION"
        budget = "-" if r.budget_ms is None else f"{r.budget_ms:g}"
        lines.append(f"{r.name}\t{r.vertices}\t{r.edges}\t{r.swept}\t{r.K}\t{r.shared_weight}\t"
                     f"{r.median_ms:.3f}\t{budget}\t{_paint(status, r.within_budget)}")
    ok = all(r.within_budget for r in rows)
    if args.random:
        seeds = range(args.seed, args.seed + args.random)
        matched, bad = oracle_suite(seeds)
        rate = 100.0 * matched / len(seeds)
        lines.append(f"oracle_match: {matched}/{len(seeds)} ({rate:.1f}%)")
        if bad:
            lines.append("oracle_mismatch_seeds: " + " ".join(map(str, bad)))
        ok = ok and not bad
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        from .plotting import plot_bench

        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        plain = [ln.replace("\033[32m", "").replace("\033[31m", "").replace("\033[0m", "")
                 for ln in lines]
        (outdir / "bench.tsv").write_text("\n".join(plain) + "\n")
        plot_bench(rows, str(outdir / "bench.png"))
    return 0 if ok or not args.strict else 2


def _add_input(p: argparse.ArgumentParser, required: bool = True) -> None:
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--input", help="graph JSON or .stencil program")
    group.add_argument("--example", help=f"bundled example: {', '.join(EXAMPLES)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quarkflow",
                                     description="Split stencil update formulas into atomic stages.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="solve for an optimal staged decomposition")
    _add_input(p)
    p.add_argument("--wk", type=_positive_int, default=1, help="weight of the stage count")
    p.add_argument("--wk-sweep", type=_int_list, help="comma list of wk values to compare")
    p.add_argument("--format", choices=FORMATS, default="summary")
    p.add_argument("--out", help="output file (directory for kernels)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="check a decomposition file against its graph")
    _add_input(p)
    p.add_argument("--decomposition", required=True, help="decomposition JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="draw a decomposition and write its artifacts")
    _add_input(p)
    p.add_argument("--wk", type=_positive_int, default=1)
    p.add_argument("--out", help="output directory (default: current)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("example", help="write a bundled graph as JSON")
    p.add_argument("name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("bench", help="time the bundled examples")
    p.add_argument("--repeat", type=_positive_int, default=10)
    p.add_argument("--examples", help="comma list of example names")
    p.add_argument("--random", type=int, default=0, metavar="N",
                   help="also cross-check N seeded random graphs against brute force")
    p.add_argument("--seed", type=int, default=0, help="first seed of the random suite")
    p.add_argument("--out", help="directory for bench.tsv and bench.png")
    p.add_argument("--strict", action="store_true", help="exit 2 on a budget regression")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QuarkflowError, OSError, json.JSONDecodeError) as exc:
        msg = f"error: {type(exc).__name__}: {exc}"
        print(_paint(msg, False, sys.stderr), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
