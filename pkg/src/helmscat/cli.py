"""Command-line driver: config parsing, solver dispatch, output emission.

One invocation solves one scattering problem (by one or both methods),
writes diagnostics.json, field.csv (plus field_collocation.csv when both
methods run) and gmres_history.csv when an iterative solve happened, and
exits 0 on success, 2 when an iterative or adaptive loop failed to
converge, 3 on validation/configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .chebyshev import ChebCoeffs, cheb_resolve
from .collocation import assemble_collocation, solve_collocation, solve_layered_collocation
from .diagnostics import compare_methods, evaluate_field, make_report
from .errors import (
    MediumMismatchError,
    NotConvergedError,
    ResolutionError,
    ResonanceError,
    TruncationError,
)
from .field import SolutionField
from .fourier import TrigCoeffs, trig_resolve
from .lowrank import gecp_lowrank
from .media import PRESET_NAMES, paper_wave, registry_medium
from .problem import (
    IncidentWave,
    Layered,
    MediumSpec,
    ProblemSpec,
    SampledGrid,
    mode_constants,
    validate_medium,
)
from .tensor import DENSE_CAP_DEFAULT, solve_tensor_auto

SIZE_CAP = 1024
COLLOCATION_UNKNOWN_CAP = 9000
EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_VALIDATION = 3


@dataclass
class RunConfig:
    method: str = "tensor"
    preset: str | None = None
    medium: str = "homogeneous"
    layered_table: str | None = None
    sampled_grid: str | None = None
    omega: float | None = None
    theta: float | None = None
    eps_plus: complex = 1.0 + 0j
    eps_minus: complex = 1.0 + 0j
    mu: float = 1.0
    N: int | None = None
    M: int | None = None
    tol: float = 1e-6
    resolve_tol: float = 1e-10
    lowrank_tol: float = 1e-10
    dense_cap: int = DENSE_CAP_DEFAULT
    gmres_tol: float = 1e-8
    maxit: int = 200
    precond: str = "auto"
    out_dir: str = "."
    out_nx: int = 256
    out_ny: int = 128

    def to_json_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, complex):
                out[key] = [value.real, value.imag]
            else:
                out[key] = value
        return out


def _parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(value[0], value[1])
    return complex(value)


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Flat JSON document plus command-line overrides."""
    data = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ValueError("config file must hold a flat JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    config = RunConfig()
    for key, value in data.items():
        if not hasattr(config, key):
            raise ValueError(f"unknown config key {key!r}")
        if key in ("eps_plus", "eps_minus"):
            value = _parse_complex(value)
        setattr(config, key, value)
    if config.method not in ("collocation", "tensor", "both"):
        raise ValueError(f"unknown method {config.method!r}")
    if (config.N is None) != (config.M is None):
        raise ValueError("N and M must be given together (or neither, for adaptive)")
    if config.preset is not None and config.preset not in PRESET_NAMES:
        raise ValueError(f"unknown preset {config.preset!r}")
    return config


def build_problem(config: RunConfig) -> ProblemSpec:
    if config.preset is not None:
        wave = paper_wave()
        medium = registry_medium(config.preset)
    else:
        wave = None
        medium = registry_medium(config.medium)
    if config.layered_table is not None:
        medium = layered_table_medium(config.layered_table)
    elif config.sampled_grid is not None:
        medium = sampled_grid_medium(config.sampled_grid)
    omega = config.omega if config.omega is not None else (wave.omega if wave else 10.0)
    theta = config.theta if config.theta is not None else (wave.theta if wave else 3 * np.pi / 7)
    wave = IncidentWave(omega, theta, config.eps_plus, config.eps_minus, config.mu)
    return ProblemSpec(wave, medium)


def layered_table_medium(path: str) -> Layered:
    """Chebyshev least-squares fit of (y, eps) samples from a CSV file."""
    rows = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    ys = rows[:, 0]
    eps = rows[:, 1] + (1j * rows[:, 2] if rows.shape[1] > 2 else 0.0)
    deg = min(len(ys) - 1, 64)
    coeffs = npcheb.chebfit(ys, eps, deg)
    return Layered(lambda y: npcheb.chebval(np.asarray(y, dtype=float), coeffs))


def sampled_grid_medium(path: str) -> SampledGrid:
    data = json.loads(Path(path).read_text())
    values = np.asarray(data["values_re"], dtype=float).astype(complex)
    if "values_im" in data:
        values = values + 1j * np.asarray(data["values_im"], dtype=float)
    return SampledGrid(values)


def tensor_ready(medium: MediumSpec, lowrank_tol: float) -> MediumSpec:
    """Media without a separable form are compressed on ingest."""
    try:
        medium.separable_terms()
        return medium
    except TypeError:
        return gecp_lowrank(medium.evaluate, tol=lowrank_tol)


def _precond_options(config: RunConfig) -> dict:
    if config.precond == "none":
        return {"use_precond": False}
    if config.precond == "auto":
        return {"use_precond": True, "precond_profile": None}
    medium = registry_medium(config.precond)
    if not medium.is_layered:
        raise ValueError(f"preconditioner medium {config.precond!r} is not layered")
    profile = medium.separable_terms()[0][1]
    return {"use_precond": True, "precond_profile": profile}


def solve_fixed(
    problem: ProblemSpec, method: str, N: int, M: int, config: RunConfig
) -> tuple[SolutionField, object]:
    """One solve at fixed sizes; returns the field and an optional GMRES log."""
    if method == "collocation":
        if problem.medium.is_layered:
            return solve_layered_collocation(problem, N, M), None
        if N * (M + 1) > COLLOCATION_UNKNOWN_CAP:
            raise ResolutionError(
                f"collocation system with {N * (M + 1)} unknowns exceeds the dense cap"
            )
        return solve_collocation(assemble_collocation(problem, N, M)), None
    tensor_problem = ProblemSpec(problem.wave, tensor_ready(problem.medium, config.lowrank_tol))
    # disabling the preconditioner is a request for the iterative path, so
    # it also bypasses the dense-solve dispatch
    cap = 0 if config.precond == "none" else config.dense_cap
    return solve_tensor_auto(
        tensor_problem,
        M,
        N,
        resolve_tol=config.resolve_tol,
        dense_cap=cap,
        gmres_tol=min(config.gmres_tol, 0.1 * config.tol),
        gmres_maxit=config.maxit,
        **_precond_options(config),
    )


def _medium_degrees(medium: MediumSpec, resolve_tol: float) -> tuple[int, int]:
    trig_deg = 0
    cheb_deg = 0
    for phi, psi in medium.separable_terms():
        tphi = phi if isinstance(phi, TrigCoeffs) else trig_resolve(phi, resolve_tol)
        cpsi = psi if isinstance(psi, ChebCoeffs) else cheb_resolve(psi, resolve_tol)
        trig_deg = max(trig_deg, tphi.degree)
        cheb_deg = max(cheb_deg, cpsi.degree)
    return trig_deg, cheb_deg


def _even(n: int) -> int:
    return n + (n % 2)


def coefficient_tails(solution: SolutionField) -> tuple[float, float]:
    """Relative size of the outer 10% mode columns and trailing 10% rows."""
    coeffs = solution.to_coeff_space().data
    scale = np.abs(coeffs).max()
    if scale == 0.0:
        return 0.0, 0.0
    n_side = max(1, coeffs.shape[1] // 20)
    m_tail = max(1, coeffs.shape[0] // 10)
    x_tail = max(np.abs(coeffs[:, :n_side]).max(), np.abs(coeffs[:, -n_side:]).max()) / scale
    y_tail = np.abs(coeffs[-m_tail:, :]).max() / scale
    return float(x_tail), float(y_tail)


@dataclass
class AdaptiveResult:
    N: int
    M: int
    solution: SolutionField
    log: object
    trajectory: list = field(default_factory=list)


def adaptive_loop(problem: ProblemSpec, method: str, config: RunConfig) -> AdaptiveResult:
    """Refine (N, M) until successive fields differ below tol and the
    coefficient tails are below tol.

    The starting sizes come from the resolved medium degrees and the
    propagating-mode span; each step doubles the axes whose coefficient
    tail is still above tol (both axes when neither tail singles itself
    out).  When the pre-refinement solution already had clean tails, the
    refinement diff certifies it and the coarser resolution is returned.
    """
    medium_t = tensor_ready(problem.medium, config.lowrank_tol)
    trig_deg, cheb_deg = _medium_degrees(medium_t, config.resolve_tol)
    probe = mode_constants(problem.wave, 4 * SIZE_CAP, check_truncation=False)
    prop = [abs(j) for j in (*probe.propagating_up, *probe.propagating_down)]
    prop_width = 2 * max(prop, default=0) + 2
    N = min(_even(max(2 * trig_deg + prop_width, prop_width, 16)), SIZE_CAP)
    M = min(_even(max(cheb_deg + 16, 16)), SIZE_CAP)

    xs = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    ys = np.linspace(-1.0, 1.0, 33)

    prev, prev_log = solve_fixed(problem, method, N, M, config)
    x_tail, y_tail = coefficient_tails(prev)
    prev_ok = x_tail <= config.tol and y_tail <= config.tol
    trajectory = [{"N": N, "M": M, "x_tail": x_tail, "y_tail": y_tail}]
    while True:
        grow_n = x_tail > config.tol
        grow_m = y_tail > config.tol
        if not (grow_n or grow_m):
            grow_n = grow_m = True
        Nn = 2 * N if grow_n else N
        Mn = 2 * M if grow_m else M
        if Nn > SIZE_CAP or Mn > SIZE_CAP:
            raise ResolutionError(
                f"adaptive refinement exceeded the size cap at N={Nn}, M={Mn} "
                f"(tol={config.tol:g})"
            )
        cur, log = solve_fixed(problem, method, Nn, Mn, config)
        diff = compare_methods(prev, cur, xs, ys)
        cur_x_tail, cur_y_tail = coefficient_tails(cur)
        trajectory.append(
            {"N": Nn, "M": Mn, "diff": diff, "x_tail": cur_x_tail, "y_tail": cur_y_tail}
        )
        if diff <= config.tol:
            if prev_ok:
                return AdaptiveResult(N, M, prev, prev_log, trajectory)
            if cur_x_tail <= config.tol and cur_y_tail <= config.tol:
                return AdaptiveResult(Nn, Mn, cur, log, trajectory)
        prev, prev_log, N, M = cur, log, Nn, Mn
        x_tail, y_tail = cur_x_tail, cur_y_tail
        prev_ok = x_tail <= config.tol and y_tail <= config.tol


def _output_grid(config: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    xs = np.linspace(0.0, 2.0 * np.pi, config.out_nx, endpoint=False)
    ys = np.linspace(-1.0, 1.0, config.out_ny)
    return xs, ys


def write_field_csv(path: Path, solution: SolutionField, config: RunConfig) -> np.ndarray:
    xs, ys = _output_grid(config)
    u = evaluate_field(solution, xs, ys, reconstruct_u=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "re_u", "im_u"])
        for yi in range(ys.size):
            for xi in range(xs.size):
                writer.writerow(
                    [f"{xs[xi]:.12g}", f"{ys[yi]:.12g}", f"{u[yi, xi].real:.15g}", f"{u[yi, xi].imag:.15g}"]
                )
    return u


def write_gmres_csv(path: Path, residuals) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "relative_residual"])
        for i, r in enumerate(residuals):
            writer.writerow([i, f"{r:.15g}"])


def run(config: RunConfig) -> int:
    """Execute one configured run, writing artifacts into config.out_dir."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    diagnostics: dict = {"config": config.to_json_dict(), "runs": {}}
    status = EXIT_OK
    try:
        problem = build_problem(config)
        validate_medium(problem.medium, problem.wave)
        methods = ["collocation", "tensor"] if config.method == "both" else [config.method]
        solutions: dict[str, SolutionField] = {}
        for method in methods:
            t0 = time.perf_counter()
            if config.N is not None:
                solution, log = solve_fixed(problem, method, config.N, config.M, config)
                chosen_n, chosen_m, trajectory = config.N, config.M, None
            else:
                result = adaptive_loop(problem, method, config)
                solution, log = result.solution, result.log
                chosen_n, chosen_m, trajectory = result.N, result.M, result.trajectory
            elapsed = time.perf_counter() - t0
            report = make_report(
                problem, solution, method, krylov_residuals=log.residuals if log else None
            )
            entry = {"report": report.to_json_dict(), "N": chosen_n, "M": chosen_m}
            if trajectory is not None:
                entry["adaptive_trajectory"] = trajectory
            entry["timings"] = {"solve_seconds": elapsed}
            diagnostics["runs"][method] = entry
            solutions[method] = solution
            if log is not None:
                write_gmres_csv(out / "gmres_history.csv", log.residuals)
        primary = "tensor" if "tensor" in solutions else "collocation"
        write_field_csv(out / "field.csv", solutions[primary], config)
        if len(solutions) == 2:
            write_field_csv(out / "field_collocation.csv", solutions["collocation"], config)
            xs, ys = _output_grid(config)
            diagnostics["comparison"] = {
                "max_u_difference": compare_methods(
                    solutions["collocation"], solutions["tensor"], xs, ys
                )
            }
    except NotConvergedError as exc:
        diagnostics["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if exc.log is not None:
            write_gmres_csv(out / "gmres_history.csv", exc.log.residuals)
        status = EXIT_NOT_CONVERGED
    except ResolutionError as exc:
        diagnostics["error"] = {"type": type(exc).__name__, "message": str(exc)}
        status = EXIT_NOT_CONVERGED
    except (MediumMismatchError, ResonanceError, TruncationError, ValueError, KeyError) as exc:
        diagnostics["error"] = {"type": type(exc).__name__, "message": str(exc)}
        status = EXIT_VALIDATION
    (out / "diagnostics.json").write_text(json.dumps(diagnostics, indent=2, sort_keys=True))
    return status


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="helmscat",
        description="Spectral solvers for 2D quasi-periodic Helmholtz scattering",
    )
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--method", choices=["collocation", "tensor", "both"])
    parser.add_argument("--preset", choices=list(PRESET_NAMES))
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--tol", type=float, help="adaptive tolerance")
    parser.add_argument("--N", type=int, dest="N", help="fixed periodic-mode count")
    parser.add_argument("--M", type=int, dest="M", help="fixed Chebyshev parameter")
    parser.add_argument("--maxit", type=int, help="GMRES iteration cap")
    parser.add_argument(
        "--no-precond",
        action="store_const",
        const="none",
        dest="precond",
        help="disable the layered-medium preconditioner",
    )
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        config = load_config(args.config, overrides)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(EXIT_VALIDATION)
    sys.exit(run(config))


if __name__ == "__main__":
    main()
