"""Command line front end.

Commands
--------
modulus      p-modulus of the simple-path family between two vertex sets
gradient     slice-wise upper gradient of a parabolic step function
smooth-sweep mollification sweep: || g_{f - f_eps} ||_{L^p(K)} along a schedule
shift-sweep  shifted-difference sweep with sup over window translates
verify-bound Minkowski / Fubini domination check for one shift

Exit codes: 0 success, 1 input or solver error, 2 a convergence
criterion failed.  Sweeps write CSV (see ConvergenceReport.to_csv);
given the same configuration and seed the bytes are identical across
runs.  File formats are documented in `fileio`.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from .fileio import (
    ParseError,
    parse_graph_file,
    parse_parabolic_file,
    write_parabolic_text,
)
from .graph import GraphError, MetricGraph, VertexFunction, enumerate_paths
from .mollify import KINDS
from .modulus import compute_modulus
from .parabolic import (
    ParabolicStepFunction,
    Subcylinder,
    contiguous_partition,
    parabolic_gradient,
)
from .smoothing import epsilon_sweep, geometric_schedule, shift_sweep, verify_proof_bound
from .solver import SolverError


@dataclass
class RunConfig:
    """Validated run parameters shared by the subcommands."""

    command: str
    graph_path: str
    function_path: str | None = None
    output: str | None = None
    p: float = 2.0
    kernel: str = "hat"
    param0: float | None = None
    factor: float = 0.5
    steps: int = 13
    subset: tuple[str, ...] | None = None   # None means every vertex
    t0: float | None = None
    t1: float | None = None
    offsets: int = 11
    rtol: float = 1e-3
    shift: float | None = None
    sources: tuple[str, ...] = ()
    targets: tuple[str, ...] = ()
    max_hops: int = 0
    cap: int = 100_000
    seed: int = 0
    gen_pieces: int = 4
    plot: str | None = None
    density_out: str | None = None

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must satisfy p >= 1, got {self.p}")
        if self.kernel not in KINDS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not 0.0 < self.factor < 1.0:
            raise ValueError(f"schedule factor must lie in (0, 1), got {self.factor}")
        if self.steps < 1:
            raise ValueError("schedule needs at least one step")
        if self.param0 is not None and not self.param0 > 0:
            raise ValueError("schedule start must be positive")
        if self.offsets < 1:
            raise ValueError("offsets must be at least 1")


def _window(cfg: RunConfig, f: ParabolicStepFunction) -> Subcylinder:
    tau = f.tau
    t0 = cfg.t0 if cfg.t0 is not None else 0.1 * tau
    t1 = cfg.t1 if cfg.t1 is not None else 0.9 * tau
    vertices = cfg.subset if cfg.subset is not None else tuple(f.graph.ids)
    K = Subcylinder(vertices, t0, t1)
    K.validate_against(f.graph, tau)
    return K


def _schedule(cfg: RunConfig, K: Subcylinder, tau: float) -> np.ndarray:
    start = cfg.param0
    if start is None:
        start = K.time_distance_to_boundary(tau) / 2.0
    return geometric_schedule(start, cfg.factor, cfg.steps)


def _generate_function(cfg: RunConfig, g: MetricGraph) -> ParabolicStepFunction:
    """Seeded random step function on [0, 1): contiguous pieces with
    separated breakpoints and standard normal vertex values."""
    rng = np.random.default_rng(cfg.seed)
    tau = 1.0
    n_pieces = max(2, cfg.gen_pieces)
    for _ in range(1000):
        cuts = np.sort(rng.uniform(0.15, 0.85, n_pieces - 1))
        if n_pieces == 2 or np.min(np.diff(cuts)) > 0.02:
            break
    partition = contiguous_partition(tau, cuts.tolist())
    values = tuple(
        VertexFunction(g, rng.standard_normal(g.n)) for _ in range(n_pieces)
    )
    return ParabolicStepFunction(g, partition, values)


def _load_function(cfg: RunConfig, g: MetricGraph) -> ParabolicStepFunction:
    if cfg.function_path is not None:
        return parse_parabolic_file(cfg.function_path, g)
    return _generate_function(cfg, g)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _report_csv(report) -> str:
    buf = io.StringIO(newline="")
    report.to_csv(buf)
    return buf.getvalue()


def _maybe_plot(report, path: str | None) -> None:
    if path is None:
        return
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "nsgraph"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    series = report.sup_norms if report.sup_norms is not None else report.norms
    positive = series > 0
    ax.loglog(report.params, np.where(positive, series, np.nan), "o-", label="norm")
    ax.loglog(report.params, np.where(report.envelope > 0, report.envelope, np.nan),
              "--", label="envelope")
    ax.set_xlabel("epsilon" if report.mode == "epsilon" else "shift s")
    ax.set_ylabel("L^p norm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run(cfg: RunConfig) -> int:
    g = parse_graph_file(cfg.graph_path)

    if cfg.command == "modulus":
        if not cfg.sources or not cfg.targets:
            raise ValueError("modulus needs --sources and --targets")
        if cfg.max_hops < 1:
            raise ValueError("modulus needs --max-hops >= 1")
        family = enumerate_paths(g, cfg.sources, cfg.targets, cfg.max_hops, cfg.cap)
        res = compute_modulus(g, family, cfg.p)
        print(format(res.value, ".17g"))
        if cfg.density_out is not None and res.extremal_density is not None:
            with open(cfg.density_out, "w") as fh:
                for v in g.ids:
                    fh.write(f"{v} {format(res.extremal_density(v), '.17g')}\n")
        return 0

    if cfg.command == "gradient":
        f = _load_function(cfg, g)
        _emit(write_parabolic_text(parabolic_gradient(f)), cfg.output)
        return 0

    if cfg.command == "smooth-sweep":
        f = _load_function(cfg, g)
        K = _window(cfg, f)
        report = epsilon_sweep(
            f, cfg.p, K, _schedule(cfg, K, f.tau), kernel=cfg.kernel, rtol=cfg.rtol
        )
        _emit(_report_csv(report), cfg.output)
        _maybe_plot(report, cfg.plot)
        print(report.summary(), file=sys.stderr)
        return 0 if report.passed else 2

    if cfg.command == "shift-sweep":
        f = _load_function(cfg, g)
        K = _window(cfg, f)
        report = shift_sweep(
            f, cfg.p, K, _schedule(cfg, K, f.tau), offsets=cfg.offsets, rtol=cfg.rtol
        )
        _emit(_report_csv(report), cfg.output)
        _maybe_plot(report, cfg.plot)
        print(report.summary(), file=sys.stderr)
        return 0 if report.passed else 2

    if cfg.command == "verify-bound":
        if cfg.shift is None:
            raise ValueError("verify-bound needs --shift")
        f = _load_function(cfg, g)
        K = _window(cfg, f)
        check = verify_proof_bound(f, cfg.shift, cfg.p, K)
        lines = "lhs,rhs,ok\r\n" + (
            f"{format(check.lhs, '.17g')},{format(check.rhs, '.17g')},"
            f"{'true' if check.ok else 'false'}\r\n"
        )
        _emit(lines, cfg.output)
        return 0 if check.ok else 2

    raise ValueError(f"unknown command {cfg.command!r}")


def _split_ids(text: str) -> tuple[str, ...]:
    return tuple(tok for tok in text.split(",") if tok)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsgraph",
        description="Upper gradient and time-smoothing computations on weighted graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, function_file: bool = True):
        sp.add_argument("--graph", required=True, help="graph file (v/e records)")
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--output", default=None, help="output path (default stdout)")
        if function_file:
            sp.add_argument(
                "--function",
                default=None,
                help="parabolic step function file; omitted means a seeded random instance",
            )
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--gen-pieces", type=int, default=4, dest="gen_pieces")

    def window(sp):
        sp.add_argument("--t0", type=float, default=None)
        sp.add_argument("--t1", type=float, default=None)
        sp.add_argument(
            "--subset",
            default="all",
            help="comma separated vertex ids, or 'all'",
        )

    def schedule(sp):
        sp.add_argument("--param0", type=float, default=None,
                        help="largest schedule value (default: half the boundary distance)")
        sp.add_argument("--factor", type=float, default=0.5)
        sp.add_argument("--steps", type=int, default=13)
        sp.add_argument("--rtol", type=float, default=1e-3)
        sp.add_argument("--plot", default=None, help="write a static SVG plot here")

    sp = sub.add_parser("modulus", help="p-modulus of a simple-path family")
    common(sp, function_file=False)
    sp.add_argument("--sources", required=True, help="comma separated vertex ids")
    sp.add_argument("--targets", required=True, help="comma separated vertex ids")
    sp.add_argument("--max-hops", type=int, required=True, dest="max_hops")
    sp.add_argument("--cap", type=int, default=100_000)
    sp.add_argument("--density-out", default=None, dest="density_out")

    sp = sub.add_parser("gradient", help="slice-wise upper gradient, parabolic file out")
    common(sp)

    sp = sub.add_parser("smooth-sweep", help="mollification convergence sweep")
    common(sp)
    window(sp)
    schedule(sp)
    sp.add_argument("--kernel", default="hat", choices=list(KINDS))

    sp = sub.add_parser("shift-sweep", help="shifted-difference sweep with window translates")
    common(sp)
    window(sp)
    schedule(sp)
    sp.add_argument("--offsets", type=int, default=11)

    sp = sub.add_parser("verify-bound", help="domination check for one time shift")
    common(sp)
    window(sp)
    sp.add_argument("--shift", type=float, required=True)

    return parser


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    subset: tuple[str, ...] | None = None
    if getattr(ns, "subset", "all") != "all":
        subset = _split_ids(ns.subset)
    return RunConfig(
        command=ns.command,
        graph_path=ns.graph,
        function_path=getattr(ns, "function", None),
        output=ns.output,
        p=ns.p,
        kernel=getattr(ns, "kernel", "hat"),
        param0=getattr(ns, "param0", None),
        factor=getattr(ns, "factor", 0.5),
        steps=getattr(ns, "steps", 13),
        subset=subset,
        t0=getattr(ns, "t0", None),
        t1=getattr(ns, "t1", None),
        offsets=getattr(ns, "offsets", 11),
        rtol=getattr(ns, "rtol", 1e-3),
        shift=getattr(ns, "shift", None),
        sources=_split_ids(getattr(ns, "sources", "")),
        targets=_split_ids(getattr(ns, "targets", "")),
        max_hops=getattr(ns, "max_hops", 0),
        cap=getattr(ns, "cap", 100_000),
        seed=getattr(ns, "seed", 0),
        gen_pieces=getattr(ns, "gen_pieces", 4),
        plot=getattr(ns, "plot", None),
        density_out=getattr(ns, "density_out", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config_from_args(ns)
        return run(cfg)
    except (ParseError, GraphError, SolverError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
