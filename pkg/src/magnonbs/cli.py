"""Scenario runner: figure tables, parameter sweeps, acceptance gate.

Subcommands: fig2, fig3, fig4, run, sweep, accept.  Every emitted file is
UTF-8 CSV whose '#'-prefixed header repeats the fully resolved
configuration (after unit conversion), so a table alone is enough to
rerun the scenario that produced it.

Unit policy: the solver works in normalized units (rates in gamma31,
times in 1/gamma31, lengths in the cell length).  Config keys may carry a
unit suffix: `*_mhz` values are linear frequencies f = x/2pi in MHz (the
convention detunings are usually quoted in) and `*_ns` values are times
in nanoseconds.  With gamma31 = 2pi x 3 MHz both convert by a fixed
factor, applied exactly once while the config is parsed; nothing past the
parser ever sees a suffixed key.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .core import (
    ConfigError,
    ControlSegment,
    ControlTimeline,
    MediumParams,
    PulseEnvelope,
    make_grid,
)
from .mbloch import SimulationConfig, evolve
from .splitter import phi_rt_analytic, tau_from_fwhm
from .stats import classical_bounds, g2_formula
from . import scenarios

# gamma31 = 2pi x 3 MHz anchors the normalized unit system.
GAMMA31_MHZ = 3.0
NS_TO_NORM = 2.0 * math.pi * GAMMA31_MHZ * 1e6 * 1e-9

_FLOAT_FMT = "%.10g"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    return str(value)


# ---------------------------------------------------------------- config


DEFAULTS: dict[str, dict[str, str]] = {
    "scenario": {
        "ods": "30, 150",
        "i_peak": "0.75",
        "fig4_i_peak": "1.0",
        "phase_rabi": "34.25",
        "phase_fwhm_ns": "100",
        "triples": "30:0, 66:10, 100:20",
        "delay_span": "4.0",
        "delay_steps": "81",
        "phase_steps": "97",
        "fig4_steps": "5",
        "fig4_span": "3.0",
    },
    "medium": {
        "od": "30",
        "delta": "0",
        "gamma12": "0",
    },
    "pulse": {
        "fwhm": "1.5",
        "t_center": "3.2",
        "amplitude_norm": "1",
    },
    "control": {
        "segments": "beamsplit:0:10:13",
    },
    "grid": {
        "n_z": "160",
        "t_end": "10",
        "snapshots": "",
    },
    "sweep": {
        "parameter": "control.rabi",
        "start": "2",
        "stop": "12",
        "num": "6",
        "spacing": "linear",
    },
    "output": {
        "prefix": "",
    },
}


def load_config(
    path: str | None, overrides: list[str]
) -> dict[str, dict[str, object]]:
    """Read, override, and unit-normalize the scenario configuration.

    Returns {section: {key: float | str}} with every `_mhz` / `_ns`
    suffix resolved to normalized units.  Override syntax is
    `section.key=value`; overrides apply before unit conversion so they
    may use suffixed keys too.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_dict(DEFAULTS)
    if path is not None:
        found = parser.read(path)
        if not found:
            raise ConfigError(f"config file not found: {path}")
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override must look like section.key=value: {item!r}")
        section, dot, name = key.strip().partition(".")
        if not dot:
            raise ConfigError(f"override key must be section.key: {key!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name.strip(), value.strip())

    resolved: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        out: dict[str, object] = {}
        for key, raw in parser.items(section):
            if key.endswith("_mhz"):
                out[key[: -len("_mhz")]] = float(raw) / GAMMA31_MHZ
            elif key.endswith("_ns"):
                out[key[: -len("_ns")]] = float(raw) * NS_TO_NORM
            else:
                try:
                    out[key] = float(raw)
                except ValueError:
                    out[key] = raw
        resolved[section] = out
    return resolved


def _floats(text: str) -> tuple[float, ...]:
    items = [s.strip() for s in str(text).split(",")]
    return tuple(float(s) for s in items if s)


def header_lines(
    command: str, config: dict[str, dict[str, object]], seed: int
) -> list[str]:
    lines = [
        f"magnonbs {command}",
        "units: rates in gamma31 (= 2pi x 3 MHz), times in 1/gamma31, "
        "z in cell lengths",
        f"seed = {seed}",
    ]
    for section in sorted(config):
        for key in sorted(config[section]):
            lines.append(f"{section}.{key} = {_fmt(config[section][key])}")
    return lines


def write_csv(path: Path, header: list[str], columns: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ------------------------------------------------------- figure scenarios


def _fig2_params(od: float, config: dict[str, dict[str, object]]):
    if od == 30.0:
        return scenarios.FIG2_OD30
    if od == 150.0:
        return scenarios.FIG2_OD150
    # Uncalibrated depth: reuse the low-depth drive schedule so shallow
    # and empty cells stay runnable.
    base = scenarios.FIG2_OD30
    return scenarios.Fig2Params(
        od=od,
        rabi_bs=base.rabi_bs,
        ref_rabi_s=base.ref_rabi_s,
        rabi_s_grid=base.rabi_s_grid,
        n_z=base.n_z,
        probe_center=base.probe_center,
        t_end=base.t_end,
    )


def cmd_fig2(config, out_dir: Path, seed: int, workers: int) -> None:
    ods = _floats(config["scenario"]["ods"])
    grid_override = config["scenario"].get("rabi_s_grid")
    for od in ods:
        params = _fig2_params(od, config)
        if grid_override is not None:
            grid = (
                (float(grid_override),)
                if isinstance(grid_override, float)
                else _floats(grid_override)
            )
            params = scenarios.Fig2Params(
                od=params.od,
                rabi_bs=params.rabi_bs,
                ref_rabi_s=params.ref_rabi_s,
                rabi_s_grid=grid,
                n_z=params.n_z,
                probe_center=params.probe_center,
                t_end=params.t_end,
            )
        curve = scenarios.fig2_curve(params)
        header = header_lines("fig2", config, seed)
        header.append(f"od = {_fmt(od)}")
        header.append(f"transmission = {_fmt(curve.transmission)}")
        header.append(f"release = {_fmt(curve.release)}")
        header.append(f"max_bookkeeping_residual = {_fmt(curve.max_residual)}")
        tag = f"od{od:g}"

        z = make_grid(1.0, params.n_z)
        prof_cols = ["z"] + [f"s12_abs_rabi_{r.rabi_s:g}" for r in curve.rows]
        prof_rows = [
            [z[i]] + [r.spin_abs[i] for r in curve.rows]
            for i in range(params.n_z)
        ]
        write_csv(out_dir / f"fig2_{tag}_profiles.csv", header, prof_cols, prof_rows)

        over_cols = ["rabi_s", "storage_efficiency", "overlap_i", "balance"]
        over_rows = [
            [r.rabi_s, r.efficiency, r.mode_overlap, r.balance]
            for r in curve.rows
        ]
        write_csv(out_dir / f"fig2_{tag}_overlap.csv", header, over_cols, over_rows)

        g2_cols = ["rabi_s", "visibility", "g2"]
        g2_rows = [[r.rabi_s, r.visibility, r.g2] for r in curve.rows]
        write_csv(out_dir / f"fig2_{tag}_g2.csv", header, g2_cols, g2_rows)


def _parse_triples(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        od_s, sep, delta_s = chunk.partition(":")
        if not sep:
            raise ConfigError(f"triple must look like od:delta, got {chunk!r}")
        out.append((float(od_s), float(delta_s)))
    return tuple(out)


def cmd_fig3(config, out_dir: Path, seed: int, workers: int) -> None:
    sc = config["scenario"]
    triples = _parse_triples(sc["triples"])
    rabi = float(sc["phase_rabi"])
    tau = tau_from_fwhm(float(sc["phase_fwhm"]))
    i_peak = float(sc["i_peak"])
    phis = [phi_rt_analytic(rabi, d, od, tau) for od, d in triples]

    bounds = classical_bounds()
    header = header_lines("fig3", config, seed)
    for (od, d), phi in zip(triples, phis):
        header.append(f"phi_rt(od={od:g}, delta={d:g}) = {_fmt(phi)}")

    span = float(sc["delay_span"])
    delays = np.linspace(-span, span, int(sc["delay_steps"]))
    curves = [
        scenarios.fig3_delay_curve(phi, delays=delays, i_peak=i_peak)[1]
        for phi in phis
    ]
    delay_cols = ["delay"]
    delay_cols += [f"g2_od{od:g}_delta{d:g}" for od, d in triples]
    delay_cols += ["classical_lo", "classical_hi"]
    delay_rows = [
        [delays[i]]
        + [c[i] for c in curves]
        + [bounds.g2_min, bounds.g2_max]
        for i in range(delays.size)
    ]
    write_csv(out_dir / "fig3_delay.csv", header, delay_cols, delay_rows)

    phases = np.linspace(0.0, 2.0 * math.pi, int(sc["phase_steps"]))
    _, g2 = scenarios.fig3_phase_curve(phases=phases, i_value=i_peak)
    phase_rows = [
        [phases[i], g2[i], bounds.g2_min, bounds.g2_max]
        for i in range(phases.size)
    ]
    write_csv(
        out_dir / "fig3_phase.csv",
        header,
        ["phi_rt", "g2", "classical_lo", "classical_hi"],
        phase_rows,
    )


def cmd_fig4(config, out_dir: Path, seed: int, workers: int) -> None:
    sc = config["scenario"]
    i_peak = float(sc["fig4_i_peak"])
    n = int(sc["fig4_steps"])
    span = float(sc["fig4_span"])
    d1, d2, grid = scenarios.fig4_grid(n=n, delay_span=span, i_peak=i_peak)
    bounds = classical_bounds()

    header = header_lines("fig4", config, seed)
    header.append(f"classical_g3_max = {_fmt(bounds.g3_max)}")
    rows = [
        [d1[i], d2[j], grid[i, j], bounds.g3_max]
        for i in range(n)
        for j in range(n)
    ]
    write_csv(
        out_dir / "fig4_surface.csv",
        header,
        ["delay_1", "delay_2", "g3", "classical_g3_max"],
        rows,
    )

    peak = float(grid[n // 2, n // 2]) if n % 2 else float(grid.max())
    corner_rows = [
        ["oracle_ideal", scenarios.ideal_cascade_g3()],
        ["formula_peak", peak],
        ["classical_threshold", bounds.g3_max],
    ]
    write_csv(
        out_dir / "fig4_corners.csv", header, ["source", "g3"], corner_rows
    )


# ------------------------------------------------------------ run / sweep


def _parse_segments(text: str) -> ControlTimeline:
    segments = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 4:
            raise ConfigError(
                f"segment must look like label:t0:t1:rabi, got {chunk!r}"
            )
        label, t0, t1, rabi = parts
        segments.append(
            ControlSegment(float(t0), float(t1), float(rabi), label.strip())
        )
    if not segments:
        raise ConfigError("control.segments is empty")
    return ControlTimeline(tuple(segments))


def _build_run(config) -> tuple[MediumParams, ControlTimeline, SimulationConfig, PulseEnvelope]:
    med = config["medium"]
    medium = MediumParams(
        od=float(med["od"]),
        delta=float(med.get("delta", 0.0)),
        gamma12=float(med.get("gamma12", 0.0)),
    )
    timeline = _parse_segments(config["control"]["segments"])
    grid = config["grid"]
    snaps = grid.get("snapshots", "")
    snapshot_times = _floats(snaps) if isinstance(snaps, str) else (float(snaps),)
    sim = SimulationConfig(
        t_end=float(grid["t_end"]),
        n_z=int(grid["n_z"]),
        snapshot_times=snapshot_times,
    )
    pul = config["pulse"]
    pulse = PulseEnvelope(
        fwhm=float(pul["fwhm"]),
        t_center=float(pul["t_center"]),
        amplitude_norm=float(pul.get("amplitude_norm", 1.0)),
    )
    return medium, timeline, sim, pulse


def _run_summary(traj) -> dict[str, float]:
    fin = traj.final_state
    return {
        "input_norm": traj.input_norm,
        "emitted_norm": fin.emitted_norm,
        "photon_norm": fin.photon_norm,
        "magnon_norm": fin.magnon_norm,
        "loss": fin.loss_accum,
        "residual": fin.bookkeeping_residual(),
    }


def cmd_run(config, out_dir: Path, seed: int, workers: int) -> None:
    medium, timeline, sim, pulse = _build_run(config)
    traj = evolve(medium, timeline, sim, pulse=pulse)

    header = header_lines("run", config, seed)
    for key, value in _run_summary(traj).items():
        header.append(f"{key} = {_fmt(value)}")

    emitted_rows = [
        [traj.times[i], traj.emitted[i].real, traj.emitted[i].imag,
         abs(traj.control[i])]
        for i in range(traj.times.size)
    ]
    write_csv(
        out_dir / "run_emitted.csv",
        header,
        ["t", "e_out_re", "e_out_im", "control_abs"],
        emitted_rows,
    )

    fin = traj.final_state
    final_rows = [
        [fin.z_grid[i], fin.e_field[i].real, fin.e_field[i].imag,
         fin.sigma12[i].real, fin.sigma12[i].imag,
         fin.sigma13[i].real, fin.sigma13[i].imag]
        for i in range(fin.z_grid.size)
    ]
    write_csv(
        out_dir / "run_final.csv",
        header,
        ["z", "e_re", "e_im", "s12_re", "s12_im", "s13_re", "s13_im"],
        final_rows,
    )

    if traj.snapshots:
        snap_rows = []
        for snap in traj.snapshots:
            for i in range(snap.z_grid.size):
                snap_rows.append(
                    [snap.t_now, snap.z_grid[i],
                     abs(snap.e_field[i]), abs(snap.sigma12[i])]
                )
        write_csv(
            out_dir / "run_snapshots.csv",
            header,
            ["t", "z", "e_abs", "s12_abs"],
            snap_rows,
        )


def _apply_value(config, parameter: str, value: float):
    section, dot, key = parameter.partition(".")
    if not dot:
        raise ConfigError(f"sweep parameter must be section.key: {parameter!r}")
    patched = {s: dict(kv) for s, kv in config.items()}
    if section == "control" and key == "rabi":
        # Convenience target: scales every control segment amplitude.
        timeline = _parse_segments(patched["control"]["segments"])
        patched["control"]["segments"] = ", ".join(
            f"{seg.label}:{seg.t_start:g}:{seg.t_end:g}:{value:g}"
            for seg in timeline.segments
        )
    else:
        if section not in patched or key not in patched[section]:
            raise ConfigError(f"unknown sweep parameter: {parameter!r}")
        patched[section][key] = value
    return patched


def _sweep_values(config, seed: int) -> np.ndarray:
    sw = config["sweep"]
    if "values" in sw:
        return np.array(_floats(sw["values"]))
    start, stop = float(sw["start"]), float(sw["stop"])
    num = int(sw["num"])
    if num < 1:
        raise ConfigError("sweep.num must be at least 1")
    spacing = str(sw.get("spacing", "linear"))
    if spacing == "linear":
        return np.linspace(start, stop, num)
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log spacing needs positive endpoints")
        return np.geomspace(start, stop, num)
    if spacing == "random":
        rng = np.random.default_rng(seed)
        return np.sort(rng.uniform(start, stop, size=num))
    raise ConfigError(f"unknown sweep spacing: {spacing!r}")


def _sweep_job(args: tuple[int, dict, str, float]) -> tuple[int, list[float]]:
    index, config, parameter, value = args
    patched = _apply_value(config, parameter, value)
    medium, timeline, sim, pulse = _build_run(patched)
    traj = evolve(medium, timeline, sim, pulse=pulse)
    summary = _run_summary(traj)
    return index, [
        float(index), value,
        summary["input_norm"], summary["emitted_norm"],
        summary["photon_norm"], summary["magnon_norm"],
        summary["loss"], summary["residual"],
    ]


def cmd_sweep(config, out_dir: Path, seed: int, workers: int) -> None:
    parameter = str(config["sweep"]["parameter"])
    values = _sweep_values(config, seed)
    jobs = [
        (i, config, parameter, float(v)) for i, v in enumerate(values)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_sweep_job, jobs))
    else:
        done = [_sweep_job(job) for job in jobs]
    # Completion order must not leak into the table.
    done.sort(key=lambda item: item[0])

    header = header_lines("sweep", config, seed)
    header.append(f"sweep parameter = {parameter}")
    write_csv(
        out_dir / "sweep.csv",
        header,
        ["index", parameter.replace(".", "_"), "input_norm", "emitted_norm",
         "photon_norm", "magnon_norm", "loss", "residual"],
        [row for _, row in done],
    )


def cmd_accept(config, out_dir: Path, seed: int, workers: int) -> int:
    from .acceptance import format_report, run_all

    results = run_all()
    report = format_report(results)
    print(report)
    header = header_lines("accept", config, seed)
    rows = [
        [r.number, "pass" if r.passed else "fail", r.runtime,
         f'"{r.label}"', f'"{r.details}"']
        for r in results
    ]
    write_csv(
        out_dir / "acceptance.csv",
        header,
        ["criterion", "status", "runtime_s", "label", "details"],
        rows,
    )
    return 0 if all(r.passed for r in results) else 1


# -------------------------------------------------------------- entrypoint


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnonbs",
        description=(
            "EIT memory as a lossy photon/magnon beam splitter: figure "
            "tables, parameter sweeps, and the acceptance gate."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fig2", "storage-drive sweep: profiles, overlap, g2 tables"),
        ("fig3", "interference crossover: g2 vs delay and vs phase"),
        ("fig4", "three-particle surface and corner values"),
        ("run", "single propagation run from the config file"),
        ("sweep", "parameter sweep with parallel workers"),
        ("accept", "run the acceptance suite and report pass/fail"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default=".", help="existing output directory")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="config override, repeatable, applied before unit conversion",
        )
    return parser


_COMMANDS = {
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "run": cmd_run,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.override)
        out_dir = Path(args.out)
        if not out_dir.is_dir():
            raise ConfigError(f"output directory does not exist: {out_dir}")
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.command == "accept":
            return cmd_accept(config, out_dir, args.seed, args.workers)
        _COMMANDS[args.command](config, out_dir, args.seed, args.workers)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
