"""Command-line front end.

One binary, six subcommands::

    doublon bands | spectrum | dynamics | fourbody | sweep-dq | sweep-detuning

Every run takes ``--config FILE`` (flat ``key = value`` text) and any number
of ``--set key=value`` overrides; results land in the output directory as
CSV + JSON (+ SVG with ``--plot``).  Exit codes: 0 success, 2 configuration
error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

import numpy as np

from .basis import DoubleExcitationBasis, TwoPhotonBasis
from .bands import solve_bands
from .dynamics import StateVector, evolve, extract_dbs_field, extract_spbs_profile, g2_correlation
from .output import (
    emit_sweep_outputs,
    svg_heatmap,
    svg_line_plot,
    write_csv,
    write_sidecar,
)
from .params import Boundary, Emitter, EmitterSet, StaggerPhase
from .reduced import four_body_model, reduced_ode_evolve
from .spectrum import classify_doublons, two_excitation_spectrum
from .sweeps import (
    ConfigError,
    ExperimentKind,
    RunConfig,
    pair_layout,
    run_detuning_sweep,
    run_dq_sweep,
    validate_config,
)

_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(field: dataclasses.Field, raw: str):
    raw = raw.strip()
    typ = field.type
    if "bool" in str(typ):
        return _BOOL[raw.lower()]
    if field.name == "boundary":
        return Boundary(raw)
    if field.name == "stagger_phase":
        return StaggerPhase(raw)
    if "int" in str(typ):
        return int(raw)
    if "float" in str(typ):
        return None if raw.lower() in ("", "none") else float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {line!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def build_config(kind: ExperimentKind, path: str | None, overrides: list[str]) -> RunConfig:
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    kv = {}
    if path:
        with open(path) as fh:
            kv.update(parse_config_text(fh.read()))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, val = item.split("=", 1)
        kv[key.strip()] = val.strip()
    kwargs = {}
    for key, raw in kv.items():
        if key == "kind":
            continue
        if key not in fields:
            raise ConfigError(f"unknown configuration key {key!r}")
        kwargs[key] = _coerce(fields[key], raw)
    env_out = os.environ.get("DOUBLON_OUTDIR")
    if env_out and "outdir" not in kwargs:
        kwargs["outdir"] = env_out
    return RunConfig(kind=kind, **kwargs)


def _cmd_bands(cfg: RunConfig) -> int:
    p = cfg.waveguide()
    t0 = time.time()
    bs = solve_bands(p, np.linspace(0.0, np.pi, cfg.k_count))
    os.makedirs(cfg.outdir, exist_ok=True)
    rows = zip(bs.K, bs.E_minus, bs.E_plus, bs.L_c_minus, bs.L_c_plus)
    csv_path = write_csv(
        os.path.join(cfg.outdir, "bands.csv"),
        ["K", "E_minus", "E_plus", "L_c_minus", "L_c_plus"],
        rows,
    )
    write_sidecar(
        os.path.join(cfg.outdir, "bands.json"),
        cfg,
        {
            "gap": bs.gap,
            "alpha": bs.alpha,
            "band_bounds": bs.band_bounds(),
            "wall_time_s": time.time() - t0,
        },
    )
    if cfg.plot:
        svg_line_plot(
            os.path.join(cfg.outdir, "bands.svg"),
            bs.K,
            {"E_minus": bs.E_minus, "E_plus": bs.E_plus},
            xlabel="K",
            ylabel="E",
            title="doublon bands",
        )
    print(f"bands: gap={bs.gap:.6f} alpha={bs.alpha:.4f} -> {csv_path}")
    return 0


def _cmd_spectrum(cfg: RunConfig) -> int:
    t0 = time.time()
    os.makedirs(cfg.outdir, exist_ok=True)
    rows = []
    for uc in np.linspace(cfg.uc_start, cfg.uc_stop, cfg.uc_count):
        p = dataclasses.replace(
            cfg.waveguide(N=cfg.spectrum_N), U_c=float(uc), boundary=Boundary.PERIODIC
        )
        s = classify_doublons(two_excitation_spectrum(p, with_vectors=True))
        for ev, cls, bb, kk in zip(
            s.eigenvalues, s.classification, s.bunching, s.momentum
        ):
            rows.append([uc, ev, cls.value, bb, kk])
    csv_path = write_csv(
        os.path.join(cfg.outdir, "spectrum.csv"),
        ["U_c", "eigenvalue", "class", "bunching", "K"],
        rows,
    )
    write_sidecar(
        os.path.join(cfg.outdir, "spectrum.json"),
        cfg,
        {"wall_time_s": time.time() - t0, "n_rows": len(rows)},
    )
    print(f"spectrum: {len(rows)} rows -> {csv_path}")
    return 0


def _cmd_dynamics(cfg: RunConfig) -> int:
    t0 = time.time()
    p = cfg.waveguide()
    wq = cfg.resolve_omega(p)
    center = (cfg.N - 1) // 2
    center -= center % 2  # strong sublattice under the default stagger phase
    e = EmitterSet(
        (Emitter(wq, cfg.g, center), Emitter(wq, cfg.g, center + cfg.d_e1))
    )
    basis = DoubleExcitationBasis(2, TwoPhotonBasis(cfg.N))
    res = evolve(
        p, e, StateVector.pair_excited(basis), cfg.t_end, cfg.dt_store
    )
    os.makedirs(cfg.outdir, exist_ok=True)
    csv_path = write_csv(
        os.path.join(cfg.outdir, "dynamics_traces.csv"),
        ["t", "ce2", "P1", "P2", "norm_drift"],
        zip(res.times, res.pair_trace(), res.P1, res.P2, res.norm_drift),
    )
    snap = res.final
    A = basis.photons.symmetrized_amplitudes(snap.two_photon_coeffs)
    write_csv(
        os.path.join(cfg.outdir, "dynamics_field.csv"),
        ["m", "n", "value"],
        (
            (m, n, abs(A[m, n]) ** 2)
            for m in range(cfg.N)
            for n in range(cfg.N)
        ),
    )
    write_csv(
        os.path.join(cfg.outdir, "dynamics_single_photon.csv"),
        ["n", "density"],
        zip(range(cfg.N), snap.single_photon_density),
    )
    spbs = extract_spbs_profile(res, 0)
    _, dbs = extract_dbs_field(res)
    g2 = g2_correlation(res)
    write_csv(
        os.path.join(cfg.outdir, "dynamics_g2.csv"),
        ["r", "G2"],
        zip(g2.r, g2.g2),
    )
    write_sidecar(
        os.path.join(cfg.outdir, "dynamics.json"),
        cfg,
        {
            "omega_q": wq,
            "wall_time_s": time.time() - t0,
            "norm_drift_max": float(res.norm_drift.max()),
            "energy_drift": res.energy_drift,
            "warnings": res.warnings,
            "spbs_fit": {
                "decay_length": spbs.decay_length,
                "r_squared": spbs.r_squared,
            },
            "dbs_fit": {
                "decay_length": dbs.decay_length,
                "r_squared": dbs.r_squared,
            },
        },
    )
    if cfg.plot:
        svg_line_plot(
            os.path.join(cfg.outdir, "dynamics.svg"),
            res.times,
            {"|c_e|^2": res.pair_trace(), "P1": res.P1, "P2": res.P2},
            xlabel="t J",
            title="pair dynamics",
        )
    print(
        f"dynamics: plateau~{res.pair_trace()[-1]:.4f} P1={res.P1[-1]:.4g} "
        f"P2={res.P2[-1]:.4g} -> {csv_path}"
    )
    return 0


def _cmd_fourbody(cfg: RunConfig) -> int:
    t0 = time.time()
    p = cfg.waveguide()
    wq = cfg.resolve_omega(p)
    sites = pair_layout(cfg, cfg.D_q)
    e4 = EmitterSet(tuple(Emitter(wq, cfg.g, s) for s in sites))
    model = four_body_model((sites[0], sites[1]), (sites[2], sites[3]), p, e4)
    tr = reduced_ode_evolve(
        [(sites[0], sites[1]), (sites[2], sites[3])], p, e4, cfg.t_end, cfg.dt_store
    )
    os.makedirs(cfg.outdir, exist_ok=True)
    csv_path = write_csv(
        os.path.join(cfg.outdir, "fourbody_traces.csv"),
        ["t", "c12_sq", "c34_sq", "mode_norm2"],
        zip(
            tr.times,
            np.abs(tr.pair_amplitudes[0]) ** 2,
            np.abs(tr.pair_amplitudes[1]) ** 2,
            tr.mode_norm2,
        ),
    )
    write_sidecar(
        os.path.join(cfg.outdir, "fourbody.json"),
        cfg,
        {"model": model, "omega_q": wq, "wall_time_s": time.time() - t0},
    )
    print(
        f"fourbody: |J_RS|={abs(model.J_RS):.4g} envelope={model.J_RS_envelope:.4g} "
        f"flags=({model.flag_intra_pair}, {model.flag_separation}) -> {csv_path}"
    )
    return 0


def _cmd_sweep_dq(cfg: RunConfig) -> int:
    t0 = time.time()

    def progress(pt):
        print(f"  D_q={pt.axis['D_q']}: {pt.values or pt.warnings}")

    result = run_dq_sweep(cfg, progress=progress)
    paths = emit_sweep_outputs(result, cfg, "sweep_dq", time.time() - t0)
    print(f"sweep-dq: {len(result.points)} points -> {paths[0]}")
    return 0


def _cmd_sweep_detuning(cfg: RunConfig) -> int:
    t0 = time.time()

    def progress(pt):
        print(
            f"  d3={pt.axis['delta3']:.3g} d4={pt.axis['delta4']:.3g}: "
            f"{pt.values.get('A_RS')}"
        )

    result = run_detuning_sweep(cfg, progress=progress)
    paths = emit_sweep_outputs(result, cfg, "sweep_detuning", time.time() - t0)
    print(f"sweep-detuning: {len(result.points)} points -> {paths[0]}")
    return 0


_COMMANDS = {
    ExperimentKind.BANDS: _cmd_bands,
    ExperimentKind.SPECTRUM: _cmd_spectrum,
    ExperimentKind.DYNAMICS: _cmd_dynamics,
    ExperimentKind.FOURBODY: _cmd_fourbody,
    ExperimentKind.SWEEP_DQ: _cmd_sweep_dq,
    ExperimentKind.SWEEP_DETUNING: _cmd_sweep_detuning,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="doublon",
        description="Doublon bands, bound states, and four-body exchange "
        "in a staggered Kerr cavity chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ExperimentKind:
        sp = sub.add_parser(kind.value)
        sp.add_argument("--config", default=None, help="flat key = value file")
        sp.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one configuration key",
        )
        sp.add_argument("--plot", action="store_true", help="emit SVG plots")
        sp.set_defaults(kind=kind)
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args.kind, args.config, args.set)
        if args.plot:
            cfg = dataclasses.replace(cfg, plot=True)
        problems = validate_config(cfg)
        if problems:
            for pr in problems:
                print(f"config error: {pr}", file=sys.stderr)
            return 2
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[cfg.kind](cfg)
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
