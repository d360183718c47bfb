"""Command-line front door.

Subcommands: spectrum | overlaps | converge | magnetization | allocation.
Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
Identical config and seed produce byte-identical output files.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import krylov, magnet, mirror
from .config import ConfigError, RunConfig
from .hamiltonian import SpinHamiltonian, write_spectrum_csv
from .lattice import build_star
from .noise import NoiseSpec
from .prep import dressed_initial, pinwheel, sector_initial


class NumericalFailure(RuntimeError):
    """Flagged estimate or non-converged solve; commands exit with code 3."""


def _build_problem(cfg: RunConfig):
    star = build_star(cfg.n_triangles)
    ham = SpinHamiltonian(star, cfg.h_field)
    bounds = ham.spectral_bounds()
    if cfg.dt >= bounds.dt_max:
        raise ConfigError(
            f"dt={cfg.dt:g} violates the spectral bound dt < {bounds.dt_max:.6g} "
            f"for {star.n_sites} sites at h={cfg.h_field:g}"
        )
    return star, ham


def _initial_prep(cfg: RunConfig, star):
    spec = cfg.initial
    if spec.kind == "pinwheel":
        return pinwheel(star)
    if spec.kind == "dressed":
        bonds = None if spec.cz_bonds is None else [tuple(b) for b in spec.cz_bonds]
        return dressed_initial(star, bonds)
    return sector_initial(star, spec.sz)


def _noise_spec(cfg: RunConfig) -> NoiseSpec | None:
    if cfg.noise is None:
        return None
    angle = cfg.noise.twirl_angle if cfg.noise.twirl_angle is not None else np.pi / 2
    return NoiseSpec(cfg.noise.p_pauli, cfg.noise.enable_postselect,
                     cfg.noise.enable_twirl, angle, cfg.seed)


def _shot_plan(cfg: RunConfig) -> mirror.ShotPlan | None:
    if cfg.shots is None:
        return None
    return mirror.ShotPlan(cfg.shots.total, tuple(cfg.shots.fractions),
                           cfg.shots.twirl_fraction)


def _series_for(cfg: RunConfig, star, ham, realization: int = 0):
    prep = _initial_prep(cfg, star)
    evolver = mirror.make_evolver(cfg.evolver, ham, dt_step=cfg.dt,
                                  reverse_groups=cfg.reverse_trotter_groups)
    plan = _shot_plan(cfg)
    if plan is None:
        return mirror.overlap_series_exact(prep.state(), evolver, cfg.dt, cfg.steps), None
    return mirror.overlap_series_sampled(
        prep, evolver, ham, cfg.dt, cfg.steps, plan, cfg.seed,
        noise=_noise_spec(cfg), realization=realization,
        magnitude_source=cfg.magnitude_source)


def _solver_kwargs(cfg: RunConfig, solver: str) -> dict:
    kwargs = {"band": tuple(cfg.eigenvalue_band)}
    if solver == "odmd":
        kwargs["window"] = cfg.odmd_window
        kwargs["real_part"] = cfg.odmd_real_part
    return kwargs


def cmd_spectrum(cfg: RunConfig, out: Path) -> None:
    star, ham = _build_problem(cfg)
    write_spectrum_csv(out / "spectrum.csv", ham)
    summary = {
        "n_sites": star.n_sites,
        "h_field": cfg.h_field,
        "ground_energy": ham.ground_state_energy(),
        "sector_ground_energies": {f"{sz:g}": e for sz, e
                                   in sorted(ham.sector_ground_energies().items())},
    }
    (out / "spectrum_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))


def cmd_overlaps(cfg: RunConfig, out: Path) -> None:
    star, ham = _build_problem(cfg)
    if cfg.shots is None:
        series, _ = _series_for(cfg, star, ham)
        mirror.write_overlap_csv(out / "overlaps.csv", cfg.dt, series.values,
                                 None, mode="exact")
        if series.neg_values is not None:
            mirror.write_overlap_csv(out / "overlaps_negative.csv", -cfg.dt,
                                     series.neg_values, None, mode="exact")
        return
    mode = "noisy" if (cfg.noise is not None and cfg.noise.p_pauli > 0) else "sampled"
    for r in range(cfg.realizations):
        series, estimates = _series_for(cfg, star, ham, realization=r)
        name = "overlaps.csv" if cfg.realizations == 1 else f"overlaps_r{r:03d}.csv"
        mirror.write_overlap_csv(out / name, cfg.dt, series.values, estimates, mode=mode)
    if mode == "noisy":
        from .noise import write_mitigation_csv
        # emulator-style ablation over at most 20 time steps (4 mitigation
        # combinations per step, each a full trajectory-sampled estimate)
        rows = mirror.mitigation_ablation(_initial_prep(cfg, star), ham, cfg.dt,
                                          min(cfg.steps, 20), _shot_plan(cfg),
                                          _noise_spec(cfg), cfg.seed,
                                          cfg.magnitude_source)
        write_mitigation_csv(out / "mitigation_ablation.csv", rows)


def _solver_steps(solver: str, steps: int, window: int | None = None):
    if solver != "odmd":
        return range(1, steps + 1)
    first = 2 if window is None else max(2, window)
    return range(first, steps + 1)


def cmd_converge(cfg: RunConfig, out: Path, threads: int = 1) -> None:
    star, ham = _build_problem(cfg)
    sector = cfg.initial.sz if cfg.initial.kind == "sector" else 0
    e_exact = ham.ground_state_energy(sector=float(sector))
    if "uvqpe_floquet" in cfg.solvers and cfg.evolver != "floquet":
        raise ConfigError("uvqpe_floquet requires the floquet evolver")

    def one_realization(r: int):
        series, _ = _series_for(cfg, star, ham, realization=r)
        rows = {}
        for solver in cfg.solvers:
            for delta in cfg.deltas:
                for ns in _solver_steps(solver, cfg.steps, cfg.odmd_window):
                    est = krylov.solve(solver, series, ns, delta,
                                       **_solver_kwargs(cfg, solver))
                    rows[(solver, delta, ns)] = (est.energy, est.retained_rank)
        return rows

    if cfg.realizations == 1:
        all_rows = [one_realization(0)]
    else:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            all_rows = list(pool.map(one_realization, range(cfg.realizations)))

    csv_rows = []
    spread_rows = []
    summary = {}
    for solver in cfg.solvers:
        for delta in cfg.deltas:
            steps_to_tol = None
            for ns in _solver_steps(solver, cfg.steps, cfg.odmd_window):
                cell = [rows[(solver, delta, ns)] for rows in all_rows]
                energies = [e for e, _ in cell if e is not None]
                if not energies:
                    csv_rows.append((solver, delta, ns, None, None, 0))
                    spread_rows.append((solver, delta, ns, None, None, 0))
                    continue
                mean_e = float(np.mean(energies))
                mean_err = float(np.mean([abs(e - e_exact) for e in energies]))
                rank = int(round(np.mean([k for _, k in cell])))
                csv_rows.append((solver, delta, ns, mean_e, mean_e - e_exact, rank))
                spread_rows.append((solver, delta, ns, float(np.std(energies)),
                                    mean_err, rank))
                if steps_to_tol is None and mean_err < 1e-6:
                    steps_to_tol = ns
            final = csv_rows[-1]
            summary[f"{solver}:delta={delta:g}"] = {
                "final_energy": final[3],
                "final_error": final[4],
                "steps_to_1e-6": steps_to_tol,
            }
    krylov.write_convergence_csv(out / "convergence.csv", csv_rows)
    if cfg.realizations > 1:
        # same schema; 'energy' holds the std across realizations and
        # 'energy_error' the mean absolute error
        krylov.write_convergence_csv(out / "convergence_spread.csv", spread_rows)
    summary["exact_ground_energy"] = e_exact
    summary["realizations"] = cfg.realizations
    (out / "convergence_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True))


def cmd_magnetization(cfg: RunConfig, out: Path, threads: int = 1) -> None:
    star, _ = _build_problem(cfg)
    ham = SpinHamiltonian(star)  # sector energies at h = 0
    ed_energies = {sz: e for sz, e in ham.sector_ground_energies().items()
                   if sz == int(sz) and sz >= 0}
    ed_energies = {int(sz): e for sz, e in ed_energies.items()}
    ed_curve = magnet.build_curve(ed_energies, star.n_sites, source="exact")
    magnet.write_sector_csv(out / "sectors_ed.csv", ed_energies)
    magnet.write_curve_csv(out / "magnetization_ed.csv", ed_curve)

    settings = magnet.sector_solver_settings(star)
    spec = cfg.magnet
    solver_energies, meta = magnet.estimate_sector_energies(
        star,
        method=spec.solver,
        delta=spec.delta if spec.delta is not None else settings["delta"],
        n_steps=spec.n_steps if spec.n_steps is not None else settings["n_steps"],
        dt=spec.dt if spec.dt is not None else settings["dt"],
    )
    unconverged = [sz for sz, m in meta.items() if not m["converged"]]
    magnet.write_sector_csv(out / f"sectors_{spec.solver}.csv", solver_energies)
    summary = {
        "crossing_fields_ed": list(ed_curve.crossing_fields),
        "sector_errors": {str(sz): meta[sz]["final_error"] for sz in sorted(meta)},
        "unconverged_sectors": unconverged,
    }
    if not unconverged:
        solver_curve = magnet.build_curve(solver_energies, star.n_sites,
                                          source=spec.solver)
        magnet.write_curve_csv(out / f"magnetization_{spec.solver}.csv", solver_curve)
        summary[f"crossing_fields_{spec.solver}"] = list(solver_curve.crossing_fields)
        summary["max_crossing_deviation"] = max(
            (abs(a - b) for a, b in zip(ed_curve.crossing_fields,
                                        solver_curve.crossing_fields)),
            default=math.inf if len(ed_curve.crossing_fields)
            != len(solver_curve.crossing_fields) else 0.0)
    (out / "magnetization_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True))
    if unconverged:
        raise NumericalFailure(f"sectors did not converge: {unconverged}")


def cmd_allocation(cfg: RunConfig, out: Path) -> None:
    star, ham = _build_problem(cfg)
    prep = _initial_prep(cfg, star)
    spec = cfg.allocation
    times = [(k + 1) * cfg.dt for k in range(spec.n_times)]
    rows = mirror.allocation_study(prep, ham, times, spec.m_totals, spec.f1_grid,
                                   spec.realizations, cfg.seed)
    mirror.write_allocation_csv(out / "allocation.csv", rows)
    best = {}
    for m in spec.m_totals:
        sub = [r for r in rows if r["m_total"] == m and r["mode"] == "f1_sqrt"]
        best[str(m)] = min(sub, key=lambda r: r["typical_error"])["f1_fraction"]
    (out / "allocation_summary.json").write_text(
        json.dumps({"best_f1_fraction_f1_sqrt": best}, indent=2, sort_keys=True))


COMMANDS = {
    "spectrum": cmd_spectrum,
    "overlaps": cmd_overlaps,
    "converge": cmd_converge,
    "magnetization": cmd_magnetization,
    "allocation": cmd_allocation,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starkrylov",
        description="Hybrid Krylov ground-state estimation on Heisenberg star plaquettes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON run configuration (defaults reproduce the "
                            "published settings)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", type=Path, default=Path("results"),
                       help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for independent cells")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.validate()
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        (out / "run_config.json").write_text(cfg.to_json())
        command = COMMANDS[args.command]
        if args.command in ("converge", "magnetization"):
            command(cfg, out, threads=args.threads)
        else:
            command(cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, mirror.EstimateUndefined) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
