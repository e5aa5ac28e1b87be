"""Command-line front end: ``phaseadj adjust | pattern | verify``."""
import argparse
import math
import sys

import numpy as np

from .adjuster import adjust, compose_h, DEFAULT_PSI_GRID
from .array_model import power_response, sample_pattern
from .errors import Infeasible, PhaseAdjustError
from .scenario import ResultFile, load_any, save_result

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_CHECK_FAILED = 3

MAGNITUDE_TOL = 1e-15
RESIDUAL_TOL = 1e-9
LEVEL_RTOL = 1e-6
NULL_LEVEL_MAX = 1e-8

EPILOG = f"""\
environment:
  PHASEADJ_PSI_GRID       number of psi candidates scanned when the scenario
                          has no psiC_rad (default {DEFAULT_PSI_GRID})
  PHASEADJ_DISABLE_NUMBA  set to 1 to use the pure-numpy kernels

exit codes: 0 success, 1 bad input, 2 no phase-only solution,
            3 verify found a failing check
"""


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return np.format_float_positional(value, unique=True, trim="0")


def make_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Angles ``start, start+step, ...`` up to ``stop`` (degrees, ascending)."""
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise ValueError("grid bounds and step must be finite")
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if start > stop:
        raise ValueError(f"--from ({start}) is greater than --to ({stop})")
    if start < -90 or stop > 90:
        raise ValueError("grid must stay within [-90, 90] degrees")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 10)


def cmd_adjust(args) -> int:
    scen = load_any(args.scenario)
    if isinstance(scen, ResultFile):
        scen = scen.scenario
    report = adjust(scen.geometry, scen.w_pre, scen.spec)
    save_result(args.output, ResultFile.from_report(scen, report))
    print(f"psi={report.psi_used:.6f} rad  level={report.level_db:.6f} dB  "
          f"residual={report.residual:.3e}  distortion={report.distortion:.4f} dB")
    return EXIT_OK


def cmd_pattern(args) -> int:
    loaded = load_any(args.file)
    if isinstance(loaded, ResultFile):
        scen, w = loaded.scenario, loaded.w_new
    else:
        scen, w = loaded, loaded.w_pre
    grid_deg = make_grid(args.start, args.stop, args.step)
    _, power_db = sample_pattern(w, scen.geometry, math.radians(scen.theta0_deg),
                                 np.radians(grid_deg))
    with open(args.output, "w", newline="") as fh:
        fh.write("theta_deg,power_db\n")
        for t, p in zip(grid_deg, power_db):
            fh.write(f"{_fmt(t)},{_fmt(p)}\n")
    return EXIT_OK


def run_checks(scen, w_new, psi):
    """Invariant checks on an adjusted weight; yields ``(name, passed, detail)``."""
    w_pre = scen.w_pre
    spec = scen.spec
    geom = scen.geometry

    gap = np.max(np.abs(np.abs(w_new) - np.abs(w_pre)))
    scale = np.max(np.abs(w_pre))
    yield "magnitude", bool(gap <= MAGNITUDE_TOL * scale), f"max ||w_new|-|w_pre|| = {gap:.3e}"

    h = compose_h(geom, spec, psi)
    resid = abs(np.vdot(w_new, h))
    bound = RESIDUAL_TOL * np.linalg.norm(w_new) * np.linalg.norm(h)
    ok = bool(resid <= bound) if bound > 0 else bool(resid == 0)
    yield "residual", ok, f"|w_new^H h| = {resid:.3e} (bound {bound:.3e})"

    level = power_response(w_new, geom, spec.thetaC, spec.theta0)
    if spec.rhoC == 0:
        ok = level <= NULL_LEVEL_MAX
        detail = f"level = {10 * math.log10(level) if level > 0 else -math.inf:.3f} dB (need <= -80 dB)"
    else:
        err = abs(level / spec.rhoC - 1.0)
        ok = err <= LEVEL_RTOL
        detail = f"level relative error = {err:.3e}"
    yield "level", bool(ok), detail


def cmd_verify(args) -> int:
    loaded = load_any(args.file)
    if isinstance(loaded, ResultFile):
        scen, w_new, psi = loaded.scenario, loaded.w_new, loaded.psi_used
    else:
        scen = loaded
        report = adjust(scen.geometry, scen.w_pre, scen.spec)
        w_new, psi = report.w_new, report.psi_used
    all_ok = True
    for name, ok, detail in run_checks(scen, w_new, psi):
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseadj",
        description="Phase-only adjustment of a linear array's response at one angle.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adjust", help="adjust a scenario and write a result file")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("-o", "--output", required=True, help="result JSON file to write")
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("pattern", help="sample a beampattern to CSV",
                       description="Uses w_new from a result file, or the starting "
                                   "weight of a scenario file.")
    p.add_argument("file", help="scenario or result JSON file")
    p.add_argument("--from", dest="start", type=float, default=-90.0,
                   help="first angle in degrees (default -90)")
    p.add_argument("--to", dest="stop", type=float, default=90.0,
                   help="last angle in degrees (default 90)")
    p.add_argument("--step", type=float, default=0.05,
                   help="angle step in degrees (default 0.05)")
    p.add_argument("-o", "--output", required=True, help="CSV file to write")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("verify", help="adjust (or load a result) and re-check invariants")
    p.add_argument("file", help="scenario or result JSON file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (PhaseAdjustError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
