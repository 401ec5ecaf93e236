"""Command-line front end.

Every command writes into ``--out`` (created if missing) and is fully
deterministic: equal arguments give byte-identical files.

Exit status: 0 on success, 1 on a domain error (the error class name is
printed) or a failed ``verify`` suite, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import evolve
from .errors import PTSSHError
from .hamiltonian import Boundary, LatticeParams
from .metrics import (
    DEFAULT_DT,
    charging_metrics,
    default_t_max,
    log10_time,
    scaling_curves,
    size_scaling,
    sweep_metrics,
)
from .plotting import Panel, Series, emit_heatmap, emit_svg
from .spectral import PTRegime, Topology, edge_ep_threshold, phase_diagram, sweep_spectrum
from .tables import table_payload, write_csv, write_json
from .verify import run_suite, suite_passed

FIG_N = 6
FIG_J1 = (0.5, 1.5)
FIG_GAMMA = (0.01, 0.45, 1.0, 2.8)
TOPO_COLOR, TRIV_COLOR = "#6a3d9a", "#e31a1c"

PRESETS = {
    "spectrum": ("fig2",),
    "phase-diagram": ("fig2",),
    "charge": ("fig3",),
    "metrics-sweep": ("fig4",),
    "scaling": ("fig4",),
    "populations": ("fig5",),
    "verify": (),
}

REGIME_COLORS = {
    f"{t.value}/{r.value}": c
    for t, r, c in (
        (Topology.TOPOLOGICAL, PTRegime.UNBROKEN, "#c6dbef"),
        (Topology.TOPOLOGICAL, PTRegime.EDGE_BROKEN, "#6baed6"),
        (Topology.TOPOLOGICAL, PTRegime.PARTIALLY_BROKEN, "#2171b5"),
        (Topology.TOPOLOGICAL, PTRegime.FULLY_BROKEN, "#08306b"),
        (Topology.CRITICAL, PTRegime.UNBROKEN, "#d9d9d9"),
        (Topology.CRITICAL, PTRegime.PARTIALLY_BROKEN, "#969696"),
        (Topology.CRITICAL, PTRegime.FULLY_BROKEN, "#525252"),
        (Topology.TRIVIAL, PTRegime.UNBROKEN, "#fcbba1"),
        (Topology.TRIVIAL, PTRegime.PARTIALLY_BROKEN, "#ef3b2c"),
        (Topology.TRIVIAL, PTRegime.FULLY_BROKEN, "#67000d"),
    )
}

X_GAMMA, X_TIME, Y_ENERGY, Y_LOG_T95 = "γ/J₂", "t·J₂", "ΔE", "log₁₀ t₀.₉₅"


@dataclass
class RunConfig:
    command: str
    params: LatticeParams
    out: Path
    formats: frozenset[str]
    t_max: float | None = None
    dt: float = DEFAULT_DT
    j1_grid: np.ndarray | None = None
    gamma_grid: np.ndarray | None = None
    n_list: tuple[int, ...] = ()
    gamma_list: tuple[float, ...] = ()
    j1_topo: float = FIG_J1[0]
    j1_triv: float = FIG_J1[1]
    workers: int | None = None
    preset: str | None = None
    written: list[Path] = field(default_factory=list)


def _tag(**kw) -> str:
    return "_".join(f"{k}-{v!r}" for k, v in kw.items())


def _phase_name(j1: float, j2: float) -> str:
    return "topological" if j1 < j2 else "trivial"


# ---------------------------------------------------------------- commands


def cmd_spectrum(cfg: RunConfig) -> None:
    j1s = FIG_J1 if cfg.preset == "fig2" else (cfg.params.J1,)
    for j1 in j1s:
        p = cfg.params.with_(J1=j1)
        sweep = sweep_spectrum(p, cfg.gamma_grid, cfg.workers)
        n = p.dim
        header = ["gamma"] + [f"re_e_{k}" for k in range(1, n + 1)] + [f"im_e_{k}" for k in range(1, n + 1)]
        rows = [
            [g, *ev.real.tolist(), *ev.imag.tolist()] for g, ev in zip(sweep.gamma_grid.tolist(), sweep.eigenvalues)
        ]
        stem = "spectrum" if len(j1s) == 1 else f"spectrum_{_tag(j1=j1)}"
        _emit_table(cfg, stem, header, rows)
        if "svg" in cfg.formats:
            vlines = [abs(j1 - p.J2), j1 + p.J2]
            if p.boundary is Boundary.OPEN and j1 < p.J2:
                vlines.insert(0, edge_ep_threshold(p))
            panels = [
                Panel(
                    [Series(sweep.gamma_grid, part[:, k], color=TOPO_COLOR if j1 < p.J2 else TRIV_COLOR) for k in range(n)],
                    xlabel=X_GAMMA,
                    ylabel=label,
                    vlines=vlines,
                )
                for part, label in ((sweep.eigenvalues.real, "Re E / J₂"), (sweep.eigenvalues.imag, "Im E / J₂"))
            ]
            title = f"N={p.N}, J₁/J₂={j1!r}, {p.boundary.value} chain"
            cfg.written.append(emit_svg(cfg.out / f"{stem}.svg", panels, title=title))


def cmd_phase_diagram(cfg: RunConfig) -> None:
    pd = phase_diagram(cfg.j1_grid, cfg.gamma_grid, cfg.params.with_(gamma=0.0), cfg.workers)
    label_rows = [
        [j1, g, lab.topology.value, lab.pt_regime.value]
        for j1, row in zip(pd.j1_grid.tolist(), pd.labels)
        for g, lab in zip(pd.gamma_grid.tolist(), row)
    ]
    _emit_table(cfg, "labels", ["j1", "gamma", "topology", "pt_regime"], label_rows)
    bound_rows = [
        [j1, ge, lo, hi]
        for j1, ge, lo, hi in zip(pd.j1_grid.tolist(), pd.gamma_e.tolist(), pd.bulk_lower.tolist(), pd.bulk_upper.tolist())
    ]
    _emit_table(cfg, "boundaries", ["j1", "gamma_e", "bulk_lower", "bulk_upper"], bound_rows)
    if "svg" in cfg.formats:
        z = [[str(pd.labels[i][j]) for i in range(pd.j1_grid.size)] for j in range(pd.gamma_grid.size)]
        overlays = [
            Series(pd.gamma_e, pd.j1_grid, color="#000000"),
            Series(pd.bulk_lower, pd.j1_grid, color="#ffffff", dashed=True),
            Series(pd.bulk_upper, pd.j1_grid, color="#ffffff", dashed=True),
        ]
        cfg.written.append(
            emit_heatmap(
                cfg.out / "phase_diagram.svg", pd.gamma_grid, pd.j1_grid, z,
                xlabel=X_GAMMA, ylabel="J₁/J₂", title=f"Phase diagram, N={cfg.params.N}",
                overlays=overlays, categories=REGIME_COLORS,
            )
        )


def _trace_cases(cfg: RunConfig, preset: str) -> list[LatticeParams]:
    if cfg.preset == preset:
        return [cfg.params.with_(J1=j1, gamma=g) for g in FIG_GAMMA for j1 in FIG_J1]
    return [cfg.params]


def cmd_charge(cfg: RunConfig) -> None:
    cases = _trace_cases(cfg, "fig3")
    summaries, by_gamma = [], {}
    for p in cases:
        t_max = cfg.t_max if cfg.t_max is not None else default_t_max(p)
        trace = evolve(p, t_max, cfg.dt)
        m = charging_metrics(trace)
        n = p.dim
        header = ["t", "delta_e"] + [f"p_{k}" for k in range(1, n + 1)]
        rows = ([t, de, *pop] for t, de, pop in zip(trace.times.tolist(), trace.delta_e.tolist(), trace.populations.tolist()))
        stem = "trace" if len(cases) == 1 else f"trace_{_tag(j1=p.J1, gamma=p.gamma)}"
        if "csv" in cfg.formats:
            cfg.written.append(write_csv(cfg.out / f"{stem}.csv", header, rows))
        summaries.append(
            {
                "n": p.N, "j1": p.J1, "j2": p.J2, "gamma": p.gamma,
                "first_peak": m.first_peak, "monotonic": m.monotonic,
                "saturation_time": m.saturation_time, "log10_t95": log10_time(m.saturation_time),
                "asymptote": m.asymptote,
            }
        )
        by_gamma.setdefault(p.gamma, []).append(
            Series(trace.times, trace.delta_e, label=_phase_name(p.J1, p.J2),
                   color=TOPO_COLOR if p.J1 < p.J2 else TRIV_COLOR)
        )
    if "json" in cfg.formats:
        cfg.written.append(write_json(cfg.out / "metrics.json", summaries if len(cases) > 1 else summaries[0]))
    if "svg" in cfg.formats:
        panels = [Panel(s, xlabel=X_TIME, ylabel=Y_ENERGY, title=f"γ/J₂={g!r}") for g, s in by_gamma.items()]
        name = "charging.svg" if len(cases) > 1 else "trace.svg"
        cfg.written.append(emit_svg(cfg.out / name, panels, title=f"Stored energy, N={cfg.params.N}", columns=2))


def cmd_populations(cfg: RunConfig) -> None:
    cases = _trace_cases(cfg, "fig5")
    panels = []
    for p in cases:
        t_max = cfg.t_max if cfg.t_max is not None else default_t_max(p)
        trace = evolve(p, t_max, cfg.dt)
        n = p.dim
        header = ["t"] + [f"p_{k}" for k in range(1, n + 1)]
        rows = ([t, *pop] for t, pop in zip(trace.times.tolist(), trace.populations.tolist()))
        stem = "populations" if len(cases) == 1 else f"populations_{_tag(j1=p.J1, gamma=p.gamma)}"
        if "csv" in cfg.formats:
            cfg.written.append(write_csv(cfg.out / f"{stem}.csv", header, rows))
        picks = sorted({1, p.N, p.N + 1, n})
        panels.append(
            Panel(
                [Series(trace.times, trace.populations[:, k - 1], label=f"φ{k}") for k in picks],
                xlabel=X_TIME, ylabel="population",
                title=f"{_phase_name(p.J1, p.J2)}, γ/J₂={p.gamma!r}",
            )
        )
    if "svg" in cfg.formats:
        cfg.written.append(
            emit_svg(cfg.out / "populations.svg", panels, title=f"Eigenstate populations, N={cfg.params.N}",
                     columns=2 if len(panels) > 1 else 1)
        )


def cmd_metrics_sweep(cfg: RunConfig) -> None:
    mm = sweep_metrics(cfg.j1_grid, cfg.gamma_grid, cfg.params, cfg.t_max, cfg.dt, cfg.workers)
    rows = [
        [j1, g, mm.first_peak_grid[i, j], mm.log10_t95_grid[i, j]]
        for i, j1 in enumerate(mm.j1_grid.tolist())
        for j, g in enumerate(mm.gamma_grid.tolist())
    ]
    _emit_table(cfg, "metrics", ["j1", "gamma", "first_peak", "log10_t95"], rows)
    for (i, j), msg in sorted(mm.errors.items()):
        print(f"warning: cell j1={float(mm.j1_grid[i])!r} gamma={float(mm.gamma_grid[j])!r}: {msg}", file=sys.stderr)
    if "svg" in cfg.formats:
        j2 = cfg.params.J2
        curves = [
            Series(np.abs(mm.j1_grid - j2), mm.j1_grid, color="#ffffff", dashed=True),
            Series(mm.j1_grid + j2, mm.j1_grid, color="#ffffff", dashed=True),
        ]
        ge = [edge_ep_threshold(cfg.params.with_(J1=float(j1))) for j1 in mm.j1_grid]
        curves.append(Series([math.nan if v is None else v for v in ge], mm.j1_grid, color="#000000"))
        for stem, grid, label in (
            ("first_peak", mm.first_peak_grid, "first ΔE peak"),
            ("log10_t95", mm.log10_t95_grid, Y_LOG_T95),
        ):
            cfg.written.append(
                emit_heatmap(
                    cfg.out / f"{stem}.svg", mm.gamma_grid, mm.j1_grid, grid.T,
                    xlabel=X_GAMMA, ylabel="J₁/J₂", title=f"{label}, N={cfg.params.N}", overlays=curves,
                )
            )


def cmd_scaling(cfg: RunConfig) -> None:
    rows = size_scaling(
        cfg.n_list, cfg.gamma_list, cfg.j1_topo, cfg.j1_triv, cfg.params, cfg.t_max, cfg.dt, cfg.workers
    )
    _emit_table(
        cfg, "scaling", ["n", "gamma", "phase", "first_peak", "log10_t95"],
        [[r.n, r.gamma, r.phase, r.first_peak, r.log10_t95] for r in rows],
    )
    if "svg" in cfg.formats:
        curves = scaling_curves(rows)
        gammas = sorted({g for g, _ in curves})
        palette = ("#1f78b4", "#33a02c", "#ff7f00", "#6a3d9a", "#e31a1c")

        def series(attr):
            return [
                Series([r.n for r in rs], [getattr(r, attr) for r in rs], label=f"γ={g!r} {ph[:4]}",
                       color=palette[gammas.index(g) % len(palette)], dashed=ph == "trivial")
                for (g, ph), rs in curves.items()
            ]

        panels = [
            Panel(series("first_peak"), xlabel="N", ylabel="first ΔE peak"),
            Panel(series("log10_t95"), xlabel="N", ylabel=Y_LOG_T95),
        ]
        cfg.written.append(emit_svg(cfg.out / "scaling.svg", panels, title="System-size dependence"))


def cmd_verify(cfg: RunConfig) -> int:
    kwargs = {}
    if cfg.t_max is not None:
        kwargs["t_max"] = cfg.t_max
    if cfg.dt != DEFAULT_DT:
        kwargs["dt"] = cfg.dt
    results = run_suite(n_list=cfg.n_list, **kwargs)
    entries = [r.as_dict() for r in results]
    if "json" in cfg.formats:
        cfg.written.append(write_json(cfg.out / "verify.json", entries))
    if "csv" in cfg.formats:
        cfg.written.append(
            write_csv(cfg.out / "verify.csv", ["name", "bound", "observed", "pass"],
                      [[r.name, r.bound, r.observed, r.passed] for r in results])
        )
    failed = [r.name for r in results if not r.passed]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if suite_passed(results) else 1


def _emit_table(cfg: RunConfig, stem: str, header, rows) -> None:
    rows = list(rows)
    if "csv" in cfg.formats:
        cfg.written.append(write_csv(cfg.out / f"{stem}.csv", header, rows))
    if "json" in cfg.formats:
        cfg.written.append(write_json(cfg.out / f"{stem}.json", table_payload(header, rows)))


HANDLERS = {
    "spectrum": cmd_spectrum,
    "phase-diagram": cmd_phase_diagram,
    "charge": cmd_charge,
    "metrics-sweep": cmd_metrics_sweep,
    "scaling": cmd_scaling,
    "populations": cmd_populations,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    status = HANDLERS[cfg.command](cfg)
    return 0 if status is None else status


# ---------------------------------------------------------------- parsing


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptssh", description="Gain/loss SSH chain battery simulations.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(name, help_, *, lists=False, grid=None, time=False, formats="csv,svg"):
        sp = sub.add_parser(name, help=help_)
        if lists:
            sp.add_argument("--n", type=_int_list, default=(FIG_N,), help="cell counts, comma separated")
        else:
            sp.add_argument("--n", type=int, default=FIG_N, help="unit cells (default 6)")
        sp.add_argument("--j1", type=float, default=FIG_J1[0], help="intra-cell hopping J1")
        sp.add_argument("--j2", type=float, default=1.0, help="inter-cell hopping J2 (energy unit)")
        if lists:
            sp.add_argument("--gamma", type=_float_list, default=FIG_GAMMA[1:], help="gain/loss values, comma separated")
        else:
            sp.add_argument("--gamma", type=float, default=0.0, help="gain/loss strength")
        sp.add_argument("--boundary", choices=[b.value for b in Boundary], default="open")
        if grid:
            for axis, (lo, hi) in grid.items():
                sp.add_argument(f"--{axis}-min", type=float, default=lo)
                sp.add_argument(f"--{axis}-max", type=float, default=hi)
                sp.add_argument(f"--{axis}-steps", type=int, default=None, help="overrides --steps on this axis")
            sp.add_argument("--steps", type=int, default=None, help="grid points per axis")
        if time:
            sp.add_argument("--tmax", type=float, default=None, help="final time (default: 200 below bulk breaking, else 100)")
            sp.add_argument("--dt", type=float, default=DEFAULT_DT, help="sampling step")
        if PRESETS[name]:
            sp.add_argument("--preset", choices=PRESETS[name], default=None)
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--formats", default=formats, help="comma-separated subset of csv,json,svg")
        sp.add_argument("--threads", type=int, default=None, help="worker processes (0 = all CPUs; default $PTSSH_THREADS or 1)")
        return sp

    common("spectrum", "eigenvalues of H_PT along a gamma grid", grid={"gamma": (0.0, 3.0)})
    common("phase-diagram", "regime labels on a (J1, gamma) grid", grid={"j1": (0.0, 2.0), "gamma": (0.0, 3.0)})
    common("charge", "stored-energy trace from the ground state", time=True)
    common("populations", "eigenstate populations during charging", time=True)
    common("metrics-sweep", "first peak and saturation time on a (J1, gamma) grid",
           grid={"j1": (0.0, 2.0), "gamma": (0.0, 3.0)}, time=True)
    sp = common("scaling", "metrics versus system size", lists=True, time=True)
    sp.add_argument("--j1-topo", type=float, default=FIG_J1[0])
    sp.add_argument("--j1-triv", type=float, default=FIG_J1[1])
    sp.set_defaults(n=(4, 6, 8, 10))
    sp = common("verify", "identity checks with a pass/fail report", lists=True, formats="json")
    sp.add_argument("--tmax", type=float, default=None, help="trace length for the ergotropy checks")
    sp.add_argument("--dt", type=float, default=DEFAULT_DT)
    return parser


DEFAULT_STEPS = {"spectrum": {"gamma": 301}, "phase-diagram": {"j1": 201, "gamma": 201},
                 "metrics-sweep": {"j1": 21, "gamma": 31}}


def _grid(parser, args, axis: str) -> np.ndarray:
    lo, hi = getattr(args, f"{axis}_min"), getattr(args, f"{axis}_max")
    steps = getattr(args, f"{axis}_steps") or args.steps or DEFAULT_STEPS[args.command][axis]
    flag = f"--{axis}-steps" if getattr(args, f"{axis}_steps") else "--steps"
    if steps < 1:
        parser.error(f"argument {flag}: must be >= 1")
    if steps == 1:
        return np.array([lo])
    if not hi > lo:
        parser.error(f"argument --{axis}-max: must exceed --{axis}-min for a grid of {steps} points")
    return np.linspace(lo, hi, steps)


def config_from_args(parser: argparse.ArgumentParser, args) -> RunConfig:
    n_single = args.n if isinstance(args.n, int) else args.n[0]
    n_values = (args.n,) if isinstance(args.n, int) else args.n
    if any(n < 2 for n in n_values):
        parser.error("argument --n: cell count must be >= 2")
    if not args.j1 >= 0:
        parser.error("argument --j1: must be >= 0")
    if not args.j2 > 0:
        parser.error("argument --j2: must be > 0")
    gammas = (args.gamma,) if isinstance(args.gamma, float) else args.gamma
    if any(not g >= 0 for g in gammas):
        parser.error("argument --gamma: must be >= 0")
    formats = frozenset(f.strip() for f in args.formats.split(",") if f.strip())
    if not formats or not formats <= {"csv", "json", "svg"}:
        parser.error(f"argument --formats: expected a subset of csv,json,svg, got {args.formats!r}")
    if args.threads is not None and args.threads < 0:
        parser.error("argument --threads: must be >= 0")
    if getattr(args, "dt", DEFAULT_DT) <= 0:
        parser.error("argument --dt: must be > 0")
    t_max = getattr(args, "tmax", None)
    if t_max is not None and not t_max >= getattr(args, "dt", DEFAULT_DT):
        parser.error("argument --tmax: must be >= --dt")
    if args.out.exists() and not (args.out.is_dir() and os.access(args.out, os.W_OK)):
        parser.error(f"argument --out: {args.out} is not a writable directory")
    params = LatticeParams(
        N=n_single, J1=args.j1, J2=args.j2, gamma=gammas[0] if isinstance(args.gamma, float) else 0.0,
        boundary=args.boundary,
    )
    cfg = RunConfig(
        command=args.command, params=params, out=args.out, formats=formats,
        t_max=t_max, dt=getattr(args, "dt", DEFAULT_DT), workers=args.threads,
        preset=getattr(args, "preset", None),
    )
    if args.command in ("phase-diagram", "metrics-sweep", "charge", "populations") and args.boundary != "open":
        parser.error("argument --boundary: this command needs an open chain")
    if hasattr(args, "gamma_min"):
        cfg.gamma_grid = _grid(parser, args, "gamma")
    if hasattr(args, "j1_min"):
        cfg.j1_grid = _grid(parser, args, "j1")
    if args.command in ("scaling", "verify"):
        cfg.n_list = tuple(n_values)
        cfg.gamma_list = tuple(gammas)
    if args.command == "scaling":
        cfg.j1_topo, cfg.j1_triv = args.j1_topo, args.j1_triv
        if not (0 <= cfg.j1_topo < args.j2 < cfg.j1_triv):
            parser.error("argument --j1-topo/--j1-triv: need j1-topo < j2 < j1-triv")
    if cfg.preset in ("fig2", "fig3", "fig5") or (cfg.preset == "fig4" and args.command == "metrics-sweep"):
        cfg.params = cfg.params.with_(N=FIG_N, J2=1.0)
    if cfg.preset == "fig4" and args.command == "scaling":
        cfg.n_list, cfg.gamma_list = (4, 6, 8, 10), FIG_GAMMA[1:]
        cfg.j1_topo, cfg.j1_triv = FIG_J1
        cfg.params = cfg.params.with_(J2=1.0)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(parser, args)
    try:
        status = run(cfg)
    except PTSSHError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in cfg.written:
        print(path)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
