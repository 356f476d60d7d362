"""``ffopt`` command-line driver.

Exit codes: 0 success, 2 bad arguments, 3 infeasible or unbounded, 4 I/O or
export failure, 5 iteration limit or numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import transforms as T
from .lp_solver import SolverConfig, solve, verify_mask_solution
from .lp_solver.io import atomic_write, read_solution_csv, read_solution_text, solution_to_csv, solution_to_text
from .lp_solver.mps import MPSExportError, MPSParseError, export_mps, parse_mps
from .lp_solver.verify import VerificationError, pupil_image
from .mask_lp import (MaskProblem, build_model, darkhole_mask, onestep_stats_estimate,
                      problem_from_mapping, pupil_mask, read_config)
from .render import DEFAULT_FLOOR, linear_stretch, log_stretch, mask_image, orient, pgm_bytes, psf_field
from .sparse_model import model_stats

log = logging.getLogger("ffopt")

EXIT_OK, EXIT_ARGS, EXIT_INFEASIBLE, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4, 5
STATUS_EXIT = {"optimal": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "unbounded": EXIT_INFEASIBLE,
               "iteration_limit": EXIT_SOLVER, "numerical_failure": EXIT_SOLVER}

# one-step models above this many nonzeros are reported from the count formula only
ONESTEP_NNZ_LIMIT = 30_000_000


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem: MaskProblem | None = None
    formulation: str = "twostep"
    out: str = "."
    mps: str | None = None
    solution: str | None = None
    free: bool = False
    size: int = 201
    floor: float = DEFAULT_FLOOR
    extra: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# argument handling

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffopt", description="Fourier-transform LP toolkit for apodized pupil masks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def problem_args(p):
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--rho0", type=float)
        p.add_argument("--rho1", type=float)
        p.add_argument("--contrast", type=float)
        p.add_argument("--config", help="key=value file with n, m, rho0, rho1, contrast")
        p.add_argument("--formulation", choices=("onestep", "twostep"), default="twostep")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("stats", help="constraint/variable/nonzero counts for both formulations")
    problem_args(p)

    p = sub.add_parser("solve", help="build and solve a mask LP (or an MPS file)")
    problem_args(p)
    p.add_argument("--mps", help="solve this MPS file instead of a generated mask model")
    p.add_argument("--max-iterations", type=int, default=SolverConfig.max_iterations)
    p.add_argument("--epsdiag", type=float, default=0.0)

    p = sub.add_parser("export", help="write a mask model as MPS")
    problem_args(p)
    p.add_argument("--mps", help="output path (default OUT/<formulation>.mps)")
    p.add_argument("--free", action="store_true", help="free-format MPS")

    p = sub.add_parser("render", help="PGM images of a mask and its PSF")
    problem_args(p)
    p.add_argument("--solution", required=True, help="solution dump (.txt key=value or .csv)")
    p.add_argument("--size", type=int, default=201, help="PSF image side (odd)")
    p.add_argument("--floor", type=float, default=DEFAULT_FLOOR, help="log10 intensity floor")

    p = sub.add_parser("verify", help="independent feasibility report for a mask solution")
    problem_args(p)
    p.add_argument("--solution", required=True)

    p = sub.add_parser("transform", help="run a DFT scheme on a CSV signal and report op counts")
    p.add_argument("--input", required=True, help="CSV: 1D rows 're[,im]' or a 2D real matrix")
    p.add_argument("--scheme", required=True, choices=("direct1d", "twostep1d", "radix3", "direct2d", "twostep2d"))
    p.add_argument("--M", type=int, help="1D output length (odd, default N)")
    p.add_argument("--dx", type=float, help="1D sample spacing (default 1)")
    p.add_argument("--dxi", type=float, help="1D frequency spacing (default 1/N)")
    p.add_argument("--plan", help="N0,N1,M0,M1 for twostep1d (default: first valid plan)")
    p.add_argument("--m", type=int, help="2D: highest transform index (default n)")
    p.add_argument("--rho1", type=float, default=1.0, help="2D: largest transform coordinate")
    p.add_argument("--out", default=".")
    return ap


def _problem(ns) -> MaskProblem:
    values = dict(read_config(ns.config)) if ns.config else {}
    for k in ("n", "m", "rho0", "rho1", "contrast"):
        v = getattr(ns, k)
        if v is not None:
            values[k] = v
    missing = {"n", "m"} - set(values)
    if missing:
        raise UsageError(f"missing problem parameter(s): {', '.join(sorted(missing))}")
    return problem_from_mapping(values)


def _config(ns) -> RunConfig:
    cfg = RunConfig(command=ns.command, out=ns.out)
    if ns.command == "transform":
        return cfg
    if not (ns.command == "solve" and ns.mps):
        cfg.problem = _problem(ns)
    cfg.formulation = ns.formulation
    cfg.mps = getattr(ns, "mps", None)
    cfg.solution = getattr(ns, "solution", None)
    cfg.free = getattr(ns, "free", False)
    cfg.size = getattr(ns, "size", 201)
    cfg.floor = getattr(ns, "floor", DEFAULT_FLOOR)
    return cfg


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# --------------------------------------------------------------------------
# subcommands

def stats_report(p: MaskProblem, onestep_limit: int = ONESTEP_NNZ_LIMIT) -> dict:
    """Counts for both formulations plus predicted 2D transform costs."""
    report = {"problem": p.as_dict(), "formulations": {}}
    est = onestep_stats_estimate(p)
    if est[2] <= onestep_limit:
        one = model_stats(build_model(p, "onestep")).as_tuple()
        report["formulations"]["onestep"] = {"stats": list(one), "source": "built"}
    else:
        one = est
        report["formulations"]["onestep"] = {"stats": list(one), "source": "estimate"}
    two = model_stats(build_model(p, "twostep")).as_tuple()
    report["formulations"]["twostep"] = {"stats": list(two), "source": "built"}
    report["nonzero_ratio"] = one[2] / two[2] if two[2] else None
    report["pupil_points"] = int(pupil_mask(p).sum())
    report["darkhole_points"] = int(darkhole_mask(p).sum())
    report["transform_ops"] = {
        s: int(T.predict_ops(s, n=p.n, m=p.m + 1)) for s in ("direct2d", "twostep2d")
    }
    return report


def cmd_stats(cfg: RunConfig) -> int:
    rep = stats_report(cfg.problem)
    print("formulation constraints variables nonzeros")
    for name, entry in rep["formulations"].items():
        c, v, z = entry["stats"]
        tag = " (formula estimate)" if entry["source"] == "estimate" else ""
        print(f"{name} {c} {v} {z}{tag}")
    print(f"nonzero ratio onestep/twostep: {rep['nonzero_ratio']:.4f}")
    ops = rep["transform_ops"]
    print(f"transform ops direct2d {ops['direct2d']} twostep2d {ops['twostep2d']}")
    atomic_write(os.path.join(_outdir(cfg.out), "stats.json"), json.dumps(rep, indent=2) + "\n")
    return EXIT_OK


def cmd_solve(cfg: RunConfig, solver: SolverConfig) -> int:
    if cfg.mps:
        with open(cfg.mps) as fh:
            model = parse_mps(fh.read())
        stem = os.path.splitext(os.path.basename(cfg.mps))[0]
    else:
        model = build_model(cfg.problem, cfg.formulation)
        stem = cfg.formulation
    t0 = time.perf_counter()
    sol = solve(model, solver)
    elapsed = time.perf_counter() - t0
    print(f"status {sol.status}")
    print(f"primal_objective {sol.primal_objective!r}")
    print(f"dual_objective {sol.dual_objective!r}")
    print(f"iterations {sol.iterations}")
    print(f"seconds {elapsed:.2f}")
    out = _outdir(cfg.out)
    atomic_write(os.path.join(out, f"{stem}_solution.txt"), solution_to_text(sol))
    atomic_write(os.path.join(out, f"{stem}_solution.csv"), solution_to_csv(sol))
    if cfg.problem is not None and sol.status == "optimal":
        rep = verify_mask_solution(cfg.problem, sol)
        for k, v in rep.as_dict().items():
            print(f"{k} {v!r}")
        atomic_write(os.path.join(out, f"{stem}_report.json"), json.dumps(rep.as_dict(), indent=2) + "\n")
    return STATUS_EXIT[sol.status]


def cmd_export(cfg: RunConfig) -> int:
    model = build_model(cfg.problem, cfg.formulation)
    path = cfg.mps or os.path.join(_outdir(cfg.out), f"{cfg.formulation}.mps")
    atomic_write(path, export_mps(model, free=cfg.free))
    c, v, z = model_stats(model).as_tuple()
    print(f"{cfg.formulation} {c} {v} {z} -> {path}")
    return EXIT_OK


def _load_values(path: str) -> dict[str, float]:
    if not os.path.exists(path):
        raise UsageError(f"solution file not found: {path}")
    if path.endswith(".csv"):
        return read_solution_csv(path)
    return read_solution_text(path)[1]


def cmd_render(cfg: RunConfig) -> int:
    p = cfg.problem
    F = pupil_image(p, _load_values(cfg.solution))
    field, _ = psf_field(p, F, cfg.size)
    img = orient(field)
    out = _outdir(cfg.out)
    files = {
        "mask.pgm": mask_image(F),
        "psf_log.pgm": log_stretch(img, cfg.floor),
        "psf_linear.pgm": linear_stretch(img),
    }
    for name, arr in files.items():
        atomic_write(os.path.join(out, name), pgm_bytes(arr))
        print(f"wrote {os.path.join(out, name)} {arr.shape[1]}x{arr.shape[0]}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    rep = verify_mask_solution(cfg.problem, _load_values(cfg.solution))
    d = rep.as_dict()
    d["relative_contrast_violation"] = rep.max_contrast_violation / rep.fhat00 if rep.fhat00 else 0.0
    for k, v in d.items():
        print(f"{k} {v!r}")
    atomic_write(os.path.join(_outdir(cfg.out), "report.json"), json.dumps(d, indent=2) + "\n")
    return EXIT_OK


def _read_signal(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        return np.array([[float(v) for v in r] for r in rows])
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from None


def cmd_transform(ns) -> int:
    data = _read_signal(ns.input)
    scheme = ns.scheme
    out = _outdir(ns.out)
    if scheme.endswith("2d"):
        n = data.shape[0]
        if data.ndim != 2 or data.shape[1] != n:
            raise UsageError("2D schemes need a square real matrix")
        m = n if ns.m is None else ns.m
        x = T.SampleGrid(n, "even", 1.0 / (2 * n))
        xi = T.SpectrumGrid(m, "zero", ns.rho1 / m)
        fn = T.dft_2d_direct if scheme == "direct2d" else T.dft_2d_twostep
        res = fn(data, x, x, xi)
        predicted = T.predict_ops(scheme, n=n, m=m + 1)
        buf = "\n".join(",".join(repr(v) for v in row) for row in res.values.tolist()) + "\n"
    else:
        if data.ndim != 2 or data.shape[1] not in (1, 2):
            raise UsageError("1D schemes need one or two columns (re[,im])")
        f = data[:, 0] + (1j * data[:, 1] if data.shape[1] == 2 else 0)
        N = f.size
        if N % 2 == 0:
            raise UsageError(f"signal length must be odd, got {N}")
        M = N if ns.M is None else ns.M
        if M < 1 or M % 2 == 0:
            raise UsageError(f"--M must be odd and positive, got {M}")
        dx = 1.0 if ns.dx is None else ns.dx
        dxi = 1.0 / N if ns.dxi is None else ns.dxi
        x = T.SampleGrid(N // 2, "odd", dx)
        xi = T.SpectrumGrid(M // 2, "odd", dxi)
        plan = None
        if scheme == "direct1d":
            res = T.dft_1d_direct(f, x, xi)
        elif scheme == "radix3":
            res = T.fft_radix3(f, x, xi)
        else:
            if ns.plan:
                try:
                    plan = T.FactorPlan.from_factors(*(int(v) for v in ns.plan.split(",")))
                except (TypeError, ValueError) as e:
                    raise UsageError(f"bad --plan {ns.plan!r}: {e}") from None
            else:
                plans = [q for q in T.valid_plans(N, M, dx, dxi) if q.N0 > 1 and q.M0 > 1] or \
                    T.valid_plans(N, M, dx, dxi)
                plan = plans[0]
            res = T.dft_1d_twostep(f, x, xi, plan)
        predicted = T.predict_ops(scheme, N=N, M=M, plan=plan)
        buf = "".join(f"{j},{v.real!r},{v.imag!r}\n" for j, v in zip(xi.indices.tolist(), res.values.tolist()))
    atomic_write(os.path.join(out, "spectrum.csv"), buf)
    print(f"scheme {scheme}")
    print(f"measured_ops {int(res.ops)} ({res.ops.unit})")
    print(f"predicted_ops {int(predicted)}")
    if int(res.ops) != int(predicted):
        print("operation count mismatch", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


# --------------------------------------------------------------------------

def main(argv=None) -> int:
    ap = _parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    try:
        if ns.command == "transform":
            return cmd_transform(ns)
        cfg = _config(ns)
        if ns.command == "stats":
            return cmd_stats(cfg)
        if ns.command == "solve":
            solver = SolverConfig(max_iterations=ns.max_iterations, epsdiag=ns.epsdiag, verbose=ns.verbose)
            return cmd_solve(cfg, solver)
        if ns.command == "export":
            return cmd_export(cfg)
        if ns.command == "render":
            return cmd_render(cfg)
        if ns.command == "verify":
            return cmd_verify(cfg)
    except (UsageError, VerificationError) as e:
        print(f"ffopt: error: {e}", file=sys.stderr)
        return EXIT_ARGS
    except (MPSExportError, MPSParseError, OSError) as e:
        print(f"ffopt: error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"ffopt: error: {e}", file=sys.stderr)
        return EXIT_ARGS
    raise AssertionError(f"unhandled command {ns.command}")


if __name__ == "__main__":
    sys.exit(main())
