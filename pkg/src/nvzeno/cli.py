"""Command-line harness: ``nvzeno {simulate,sweep,locus,validate}``.

Exit codes: 0 success, 1 a validation check failed, 2 usage error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import dataclasses
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import channel, dynamics, linalg, validation
from .config import ExperimentConfig, ConfigError, DEFAULT_LOCUS_RANGES, format_config, load_config
from .model import TWO_PI

log = logging.getLogger("nvzeno")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


def fmt(x) -> str:
    """17 significant digits: enough to round-trip a double."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@contextlib.contextmanager
def _open_output(path: str | None):
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    with _open_output(path) as fh:
        fh.write(buf.getvalue())


# -- subcommands ------------------------------------------------------------

SIMULATE_HEADER = ["cycle", "time_us", "rho_uu", "re_rho_ud", "im_rho_ud", "coherence_mag", "trace_dist_to_initial"]


def cmd_simulate(cfg: ExperimentConfig, out: str | None) -> int:
    p = cfg.params
    sched = cfg.schedule
    rho0 = cfg.initial_state
    traj = np.array(dynamics.run_n_cycles(rho0, p, sched.n_cycles))

    # trace distance for 2x2 unit-trace states, batched
    w, _ = linalg.hermitian_eig(traj - rho0, check=False)
    tdist = 0.5 * np.sum(np.abs(w), axis=-1)

    spec = channel.analytic_spectrum(p)
    c0 = channel.decompose(rho0)
    k = np.arange(sched.n_cycles + 1)
    pred_c1 = c0.c1 * spec.lambda1**k
    pred_c3 = c0.c3 * np.real(spec.lambda3**k)
    discrepancy = max(
        float(np.max(np.abs(traj[:, 0, 1] - pred_c1))),
        float(np.max(np.abs((traj[:, 0, 0] - traj[:, 1, 1]).real / 2 - pred_c3))),
    )

    rows = (
        (i, i * p.tau * 1e6, r[0, 0].real, r[0, 1].real, r[0, 1].imag, abs(r[0, 1]), d)
        for i, (r, d) in enumerate(zip(traj, tdist))
    )
    _write_csv(out, SIMULATE_HEADER, rows)
    final = channel.predict_after_n(c0, spec, sched.n_cycles)
    summary = {
        "n_cycles": sched.n_cycles,
        "lambda1": [spec.lambda1.real, spec.lambda1.imag],
        "abs_lambda1": abs(spec.lambda1),
        "predicted_final_rho_ud": [final.c1.real, final.c1.imag],
        "simulated_final_rho_ud": [traj[-1, 0, 1].real, traj[-1, 0, 1].imag],
        "max_discrepancy": discrepancy,
    }
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


SWEEP_HEADER = ["omega_MHz", "dtm_us", "abs_lambda1_analytic", "abs_lambda1_numeric", "deviation"]


def _sweep_point(args):
    p, omega_mhz, dtm_us = args
    q = p.retuned(rabi=TWO_PI * 1e6 * omega_mhz, dt_m=1e-6 * dtm_us)
    analytic = abs(channel.analytic_spectrum(q).lambda1)
    numeric = channel.numeric_spectrum(q)
    return (omega_mhz, dtm_us, analytic, abs(numeric.lambda1), abs(numeric.lambda1 - channel.analytic_spectrum(q).lambda1))


def cmd_sweep(cfg: ExperimentConfig, out: str | None, workers: int = 1) -> int:
    grid = cfg.sweep(required=True)
    p = cfg.params
    omegas = np.linspace(grid.omega_min, grid.omega_max, grid.n_omega)
    dtms = np.linspace(grid.dtm_min, grid.dtm_max, grid.n_dtm)
    points = [(p, w, t) for w in omegas for t in dtms]
    # map() keeps input order whatever the completion order
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(_sweep_point, points))
    _write_csv(out, SWEEP_HEADER, rows)
    log.info("sweep: %d points, max deviation %.3e", len(rows), max(r[4] for r in rows))
    return EXIT_OK


LOCUS_HEADER = ["n1", "omega_MHz", "dtm_us"]


def cmd_locus(cfg: ExperimentConfig, out: str | None) -> int:
    grid = cfg.sweep(required=False)
    if grid is None:
        r = DEFAULT_LOCUS_RANGES
        w_range, t_range = (r["omega_min_mhz"], r["omega_max_mhz"]), (r["dtm_min_us"], r["dtm_max_us"])
    else:
        w_range, t_range = (grid.omega_min, grid.omega_max), (grid.dtm_min, grid.dtm_max)
    curves = channel.qzle_locus(
        (TWO_PI * 1e6 * w_range[0], TWO_PI * 1e6 * w_range[1]),
        (1e-6 * t_range[0], 1e-6 * t_range[1]),
        cfg.get("n1_max"),
        cfg.get("locus_points"),
    )
    rows = []
    for n1, omega, dtm in curves:
        rows.extend((n1, w / (TWO_PI * 1e6), t * 1e6) for w, t in zip(omega, dtm))
    _write_csv(out, LOCUS_HEADER, rows)
    return EXIT_OK


def cmd_validate(cfg: ExperimentConfig, out: str | None) -> int:
    p = cfg.params
    seed = cfg.get("seed") or 0
    n_cycles = cfg.get("n_cycles")
    results = validation.run_all(p, seed=seed, n_cycles=n_cycles)
    for r in results:
        print(r.line(), file=sys.stderr)
    all_passed = all(r.passed for r in results)
    report = {
        "all_passed": all_passed,
        "seed": seed,
        "params": {
            "user_units": cfg.user_units(),
            "internal_si_angular": dataclasses.asdict(p),
        },
        "checks": [r.as_dict() for r in results],
    }
    with _open_output(out) as fh:
        json.dump(report, fh, indent=2, default=float)
        fh.write("\n")
    return EXIT_OK if all_passed else EXIT_FAILED


# -- argument handling --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-cycles", type=int)
    common.add_argument("--rabi-mhz", type=float)
    common.add_argument("--bz-gauss", type=float)
    common.add_argument("--dtf-us", type=float)
    common.add_argument("--dtm-us", type=float)
    common.add_argument("--save-config", metavar="PATH", help="write the effective config here")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nvzeno", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="N-cycle trajectory of the nuclear spin")
    sweep = sub.add_parser("sweep", parents=[common], help="|lambda1| over a (rabi, dt_m) grid")
    sweep.add_argument("--workers", type=int, default=1)
    sub.add_parser("locus", parents=[common], help="curves rabi * dt_m = 2 pi n1")
    sub.add_parser("validate", parents=[common], help="run the numerical checks, emit a JSON report")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed,
            n_cycles=args.n_cycles,
            rabi_mhz=args.rabi_mhz,
            bz_gauss=args.bz_gauss,
            dtf_us=args.dtf_us,
            dtm_us=args.dtm_us,
        )
        out = args.out or cfg.get("output")
        for msg in cfg.params.validity_warnings():
            log.warning(msg)
        if args.save_config:
            Path(args.save_config).write_text(format_config(cfg), encoding="utf-8")
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.workers)
        if args.command == "locus":
            return cmd_locus(cfg, out)
        return cmd_validate(cfg, out)
    except ConfigError as exc:
        print(f"nvzeno: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nvzeno: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"nvzeno: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
