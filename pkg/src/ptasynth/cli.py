"""Command-line front end.

Examples::

    ptasynth model.imi --pi0 model.pi0            # inverse method
    ptasynth model.imi --v0 model.v0 --forbid q2  # cartography, tiles classified
    ptasynth model.imi --v0 model.v0 --random 20 --seed 3
    ptasynth model.imi --depth 10                 # plain reachability

Every run prints one ``mode=<m> status=<ok|diag|limit> time_ms=<n>`` line on
standard output.  Exit status is 0 on success, 1 on diagnostics and 2 when a
depth or time limit left partial results (which are still written).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .cartography import FULL, RANDOM, ActionPrecedes, ForbiddenLocations, bc, classify, coverage_stats
from .errors import EmptyInitialState, IncompatibleInitialState, LimitReached, PtaError, UsageError
from .inverse_method import im
from .output import PlotViewport, emit_cartography_svg, emit_result, emit_state_listing, emit_tiling, emit_trace_dot
from .parser import ParseError, parse_model, parse_pi0, parse_v0
from .reachability import EQUALITY, INCLUSION, reachable, trace_set

MODES = ("reach", "inverse", "cover", "random")

OK, DIAG, LIMIT = 0, 1, 2
_STATUS = {OK: "ok", DIAG: "diag", LIMIT: "limit"}


@dataclass
class RunConfig:
    model: Path
    mode: str = "reach"
    pi0: Path | None = None
    v0: Path | None = None
    depth_limit: int | None = None
    time_limit: float | None = None
    acyclic: bool = False
    inclusion: bool = False
    optimized: bool = True
    plot: bool = False
    output: Path | None = None
    samples: int | None = None
    seed: int = 0
    plot_params: tuple[str, str] | None = None
    grid_denominator: int = 1
    forbid: list[str] = field(default_factory=list)
    precedes: tuple[str, str] | None = None
    timings: bool = False

    @property
    def prefix(self) -> Path:
        return self.output if self.output is not None else self.model.with_suffix("")

    def check(self):
        if self.mode not in MODES:
            raise UsageError(f"--mode: unknown mode {self.mode!r}")
        if self.mode == "inverse" and self.pi0 is None:
            raise UsageError("--pi0 is required in inverse mode")
        if self.mode in ("cover", "random") and self.v0 is None:
            raise UsageError("--v0 is required in cover and random modes")
        if self.mode == "random" and (self.samples is None or self.samples < 1):
            raise UsageError("--random N needs N >= 1")
        if self.mode != "inverse" and self.pi0 is not None:
            raise UsageError(f"--pi0 conflicts with mode {self.mode!r}")
        if self.mode not in ("cover", "random") and self.v0 is not None:
            raise UsageError(f"--v0 conflicts with mode {self.mode!r}")
        if self.mode != "random" and self.samples is not None:
            raise UsageError(f"--random conflicts with mode {self.mode!r}")
        if self.depth_limit is not None and self.depth_limit < 0:
            raise UsageError("--depth must be >= 0")
        if self.time_limit is not None and self.time_limit < 0:
            raise UsageError("--time must be >= 0")
        if self.grid_denominator < 1:
            raise UsageError("--grid-denominator must be >= 1")
        if self.forbid and self.precedes:
            raise UsageError("--forbid and --precedes are mutually exclusive")


class _ArgumentParser(argparse.ArgumentParser):
    # exit status 2 is reserved for limit-truncated results
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        print("mode=unknown status=diag time_ms=0")
        sys.exit(DIAG)


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(
        prog="ptasynth",
        description="Inverse method and behavioral cartography for parametric timed automata.",
    )
    p.add_argument("model", type=Path, help="network of parametric timed automata")
    p.add_argument("--mode", choices=MODES + ("border-random",),
                   help="analysis (default: inverse with --pi0, cover with --v0, reach otherwise)")
    p.add_argument("--pi0", type=Path, help="reference valuation file")
    p.add_argument("--v0", type=Path, help="parameter rectangle file")
    p.add_argument("--depth", type=int, dest="depth_limit", help="limit on the number of Post steps")
    p.add_argument("--time", type=float, dest="time_limit", help="time limit in seconds (per IM call in cartography)")
    p.add_argument("--acyclic", action="store_true", help="skip duplicate-state checks")
    p.add_argument("--incl", action="store_true", help="fixpoint up to constraint inclusion")
    p.add_argument("--no-opt", action="store_true", help="recompute states after each refinement")
    p.add_argument("--plot", action="store_true", help="also render the cartography as a PNG figure")
    p.add_argument("--random", type=int, metavar="N", dest="samples", help="cartography on N random integer points")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")
    p.add_argument("--plot-params", nargs=2, metavar=("I", "J"), help="parameters on the cartography axes")
    p.add_argument("--grid-denominator", type=int, default=1, metavar="D",
                   help="grid spacing 1/D for the coverage report")
    p.add_argument("--output", type=Path, metavar="PREFIX", help="output file prefix")
    p.add_argument("--forbid", nargs="+", default=[], metavar="LOC", help="bad locations for tile classification")
    p.add_argument("--precedes", nargs=2, metavar=("A", "B"), help="good iff action A precedes action B")
    p.add_argument("--timings", action="store_true", help="record wall-clock time in the .res file")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    mode = args.mode
    if mode == "border-random":
        mode = "random"
    if mode is None:
        if args.pi0 is not None and args.v0 is not None:
            raise UsageError("--pi0 and --v0 conflict; choose one analysis with --mode")
        if args.pi0 is not None:
            mode = "inverse"
        elif args.v0 is not None:
            mode = "random" if args.samples is not None else "cover"
        else:
            mode = "reach"
    cfg = RunConfig(
        model=args.model,
        mode=mode,
        pi0=args.pi0,
        v0=args.v0,
        depth_limit=args.depth_limit,
        time_limit=args.time_limit,
        acyclic=args.acyclic,
        inclusion=args.incl,
        optimized=not args.no_opt,
        plot=args.plot,
        output=args.output,
        samples=args.samples,
        seed=args.seed,
        plot_params=tuple(args.plot_params) if args.plot_params else None,
        grid_denominator=args.grid_denominator,
        forbid=list(args.forbid),
        precedes=tuple(args.precedes) if args.precedes else None,
        timings=args.timings,
    )
    cfg.check()
    return cfg


def _read(path: Path, flag: str) -> str:
    try:
        return path.read_text()
    except FileNotFoundError:
        raise UsageError(f"{flag}: file not found: {path}") from None
    except OSError as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc.strerror}") from None


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _plot_indices(cfg: RunConfig, parameters: tuple[str, ...]) -> tuple[int, int] | None:
    if cfg.plot_params is None:
        return (0, 1) if len(parameters) == 2 else None
    out = []
    for token in cfg.plot_params:
        if token in parameters:
            out.append(parameters.index(token))
        elif token.isdigit() and int(token) < len(parameters):
            out.append(int(token))
        else:
            raise UsageError(f"--plot-params: unknown parameter {token!r}")
    return tuple(out)


def _run_reach(cfg, net) -> int:
    mode = INCLUSION if cfg.inclusion else EQUALITY
    space = reachable(net, cfg.depth_limit, cfg.time_limit, cfg.acyclic, mode)
    _write(Path(f"{cfg.prefix}.states"), emit_state_listing(space))
    _write(Path(f"{cfg.prefix}.dot"), emit_trace_dot(trace_set(space)))
    if not space.complete:
        print(f"warning: {space.limit} limit reached; results are partial", file=sys.stderr)
        return LIMIT
    return OK


def _run_inverse(cfg, net) -> int:
    pi0 = parse_pi0(_read(cfg.pi0, "--pi0"), net, str(cfg.pi0))
    status = OK
    try:
        res = im(net, pi0, optimized=cfg.optimized, fixpoint=INCLUSION if cfg.inclusion else EQUALITY,
                 depth_limit=cfg.depth_limit, time_limit=cfg.time_limit, acyclic=cfg.acyclic)
    except LimitReached as exc:
        res = exc.partial
        status = LIMIT
        print(f"warning: {exc.reason} limit reached; results are partial", file=sys.stderr)
    _write(Path(f"{cfg.prefix}.res"), emit_result(res, cfg.timings))
    _write(Path(f"{cfg.prefix}.states"), emit_state_listing(res.space))
    _write(Path(f"{cfg.prefix}.dot"), emit_trace_dot(res.traces))
    return status


def _run_cartography(cfg, net) -> int:
    v0 = parse_v0(_read(cfg.v0, "--v0"), net, str(cfg.v0))
    params = net.registry.parameters
    plot = _plot_indices(cfg, params)
    prop = None
    if cfg.forbid:
        prop = ForbiddenLocations(frozenset(cfg.forbid))
    elif cfg.precedes:
        prop = ActionPrecedes(*cfg.precedes)
    if prop is not None:
        prop.check_names(net)
    tiling = bc(
        net, v0,
        mode=FULL if cfg.mode == "cover" else RANDOM,
        samples=cfg.samples,
        seed=cfg.seed,
        optimized=cfg.optimized,
        fixpoint=INCLUSION if cfg.inclusion else EQUALITY,
        depth_limit=cfg.depth_limit,
        time_limit=cfg.time_limit,
        acyclic=cfg.acyclic,
    )
    if prop is not None:
        classify(tiling, prop)
    report = coverage_stats(tiling, v0, cfg.grid_denominator)
    _write(Path(f"{cfg.prefix}.cart"), emit_tiling(tiling, report))
    for i, tile in enumerate(tiling.tiles, start=1):
        _write(Path(f"{cfg.prefix}_tile{i}.dot"), emit_trace_dot(tile.traces, f"tile{i}"))
    if plot is not None:
        viewport = PlotViewport(plot, v0)
        _write(Path(f"{cfg.prefix}_cart.svg"), emit_cartography_svg(tiling, viewport, params))
        if cfg.plot:
            from .plotting import save_cartography_png

            save_cartography_png(tiling, viewport, Path(f"{cfg.prefix}_cart.png"), params)
    elif cfg.plot:
        print("warning: cartography plots need two parameters; use --plot-params", file=sys.stderr)
    if any(reason.endswith("limit") for _, reason in tiling.failures):
        print(f"warning: {len(tiling.failures)} point(s) left uncovered by limits", file=sys.stderr)
        return LIMIT
    return OK


def run(cfg: RunConfig) -> int:
    started = time.monotonic()
    try:
        net = parse_model(_read(cfg.model, "model"), str(cfg.model))
        handler = {"reach": _run_reach, "inverse": _run_inverse, "cover": _run_cartography,
                   "random": _run_cartography}[cfg.mode]
        status = handler(cfg, net)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        status = DIAG
    except (UsageError, IncompatibleInitialState, EmptyInitialState, PtaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = DIAG
    elapsed = int((time.monotonic() - started) * 1000)
    print(f"mode={cfg.mode} status={_STATUS[status]} time_ms={elapsed}")
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a flag error already reported
        return exc.code if isinstance(exc.code, int) else DIAG
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"mode={args.mode or 'unknown'} status=diag time_ms=0")
        return DIAG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
