"""Command-line driver: ``monitored-sps <subcommand> [options]``.

Every subcommand reads an optional INI file (see :mod:`monitored_sps.config`),
writes CSV and a JSON run summary into the output directory and exits with
0 on success, 2 on configuration errors, 3 on numerical failures and 4 on
I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from monitored_sps import experiment as ex
from monitored_sps.config import Config, parse_config
from monitored_sps.errors import ConfigError, SimulationError

log = logging.getLogger("monitored_sps")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
CURVE_COLUMNS = ("t", "p0", "p1", "p2plus")
RECORD_COLUMNS = ("t", "y", "expect_PX", "pump_on")


def build_id() -> str:
    """SHA-1 over the package sources, so results can be tied to the code that made them."""
    h = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_summary(path: Path, command: str, cfg: Config, results: dict) -> None:
    doc = {"command": command, "build_id": build_id(), "config": cfg.to_dict(),
           "results": results}
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _row(r: ex.SweepRow):
    return tuple(getattr(r, c) for c in ex.RESULT_COLUMNS)


def _stats_row(s: ex.PhotonStats):
    return _row(ex.SweepRow.from_stats(s))


# -- subcommands ------------------------------------------------------------------


def cmd_deterministic(cfg: Config, out: Path, args) -> dict:
    t_grid = ex.timer_grid(cfg.run.t_max, cfg.run.dt, cfg.sweep.t_spacing)
    curve = ex.deterministic_curve(cfg.model, t_grid, cfg.run.dt, cfg.run.t_tail)
    write_csv(out / "deterministic.csv", CURVE_COLUMNS, curve.rows())
    res = {"unconstrained": asdict(ex.optimal_timer(curve, 1.0))}
    try:
        res["constrained"] = asdict(ex.optimal_timer(curve, cfg.run.epsilon))
    except ex.NoFeasibleTime as exc:
        res["constrained"] = None
        log.warning("%s", exc)
    return res


def cmd_trajectory(cfg: Config, out: Path, args) -> dict:
    outcome, rec = ex.run_trajectory(cfg.model, cfg.run, args.index, with_record=True)
    write_csv(out / "trajectory.csv", RECORD_COLUMNS, rec)
    return {"index": args.index, **asdict(outcome)}


def cmd_montecarlo(cfg: Config, out: Path, args) -> dict:
    stats = ex.monte_carlo(cfg.model, cfg.run)
    write_csv(out / "montecarlo.csv", ex.RESULT_COLUMNS, [_stats_row(stats)])
    return dict(zip(ex.RESULT_COLUMNS, _stats_row(stats)))


def cmd_optimize_h(cfg: Config, out: Path, args) -> dict:
    best, scan = ex.optimize_h(cfg.model, cfg.run, cfg.sweep.h_grid)
    write_csv(out / "optimize_h.csv", ex.RESULT_COLUMNS, [_stats_row(s) for s in scan.all_stats()])
    return {"best": dict(zip(ex.RESULT_COLUMNS, _stats_row(best)))}


def cmd_sweep(cfg: Config, out: Path, args) -> dict:
    rows = []
    for om in cfg.sweep.omega:
        for case in cfg.sweep.cases:
            log.info("Omega=%g %s", om, case.label)
            rows.append(ex.evaluate_case(cfg.model.replace(Omega=om), case, cfg.run,
                                         cfg.sweep.h_grid, cfg.sweep.t_spacing))
    write_csv(out / "sweep.csv", ex.RESULT_COLUMNS, [_row(r) for r in rows])
    return {"n_rows": len(rows)}


def read_table(path: Path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def plot_csv(src: Path, dest: Path) -> Path:
    """Render a curve CSV (p vs t) or a result CSV (p1 vs Omega, or vs threshold) as SVG."""
    cols, rows = read_table(src)
    if not rows:
        raise OSError(f"{src}: no data rows to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    if tuple(cols) == CURVE_COLUMNS:
        t = [float(r["t"]) for r in rows]
        for c, lab in (("p0", "p(0)"), ("p1", "p(1)"), ("p2plus", "p(2+)")):
            ax.plot(t, [float(r[c]) for r in rows], label=lab)
        ax.set_xlabel("pumping duration t")
        ax.set_ylabel("probability")
    elif tuple(cols) == ex.RESULT_COLUMNS:
        groups: dict[tuple, list[dict]] = {}
        for r in rows:
            groups.setdefault((r["controller"], r["gamma"], r["eta"]), []).append(r)
        omegas = {r["omega"] for r in rows}
        xkey, xlabel = ("omega", "pumping rate Omega") if len(omegas) > 1 else ("h_or_eps", "threshold")
        for (ctl, g, e), grp in groups.items():
            grp = sorted(grp, key=lambda r: float(r[xkey]))
            ax.errorbar([float(r[xkey]) for r in grp], [float(r["p1"]) for r in grp],
                        yerr=[2 * float(r["se_p1"]) for r in grp], marker="o", capsize=2,
                        label=f"{ctl} gamma={float(g):g} eta={float(e):g}")
        if xkey == "h_or_eps":
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("p(1)")
    else:
        plt.close(fig)
        raise OSError(f"{src}: unrecognised columns {cols}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(dest, format="svg")
    plt.close(fig)
    return dest


def cmd_plot(cfg: Config, out: Path, args) -> dict:
    src = Path(args.csv)
    dest = Path(args.output) if args.output else out / (src.stem + ".svg")
    plot_csv(src, dest)
    return {"svg": str(dest)}


COMMANDS = {
    "deterministic": cmd_deterministic,
    "trajectory": cmd_trajectory,
    "montecarlo": cmd_montecarlo,
    "sweep": cmd_sweep,
    "optimize-h": cmd_optimize_h,
    "plot": cmd_plot,
}


# -- argument handling --------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="INI file")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-traj", type=int)
    common.add_argument("--dt", type=float)
    common.add_argument("--workers", type=int)
    common.add_argument("--outdir", help="output directory (overrides file and environment)")
    common.add_argument("--controller", choices=ex.CONTROLLERS)
    common.add_argument("--t-stop", type=float)
    common.add_argument("--h", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any config entry, e.g. model.gamma=10")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="monitored-sps",
                                description="Monitored single-photon source simulator")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("deterministic", parents=[common], help="p(n) versus pumping duration")
    t = sub.add_parser("trajectory", parents=[common], help="one trajectory with its record")
    t.add_argument("--index", type=int, default=0)
    sub.add_parser("montecarlo", parents=[common], help="averaged photon statistics")
    sub.add_parser("sweep", parents=[common], help="best p1 versus Omega for each case")
    sub.add_parser("optimize-h", parents=[common], help="CUSUM threshold scan")
    pl = sub.add_parser("plot", parents=[common], help="SVG chart from a result CSV")
    pl.add_argument("csv")
    pl.add_argument("-o", "--output", help="SVG path (default: <outdir>/<csv stem>.svg)")
    return p


_FLAG_KEYS = {"seed": "run.seed", "n_traj": "run.n_traj", "dt": "run.dt",
              "workers": "run.workers", "outdir": "output.dir", "controller": "run.controller",
              "t_stop": "run.t_stop", "h": "run.h", "epsilon": "run.epsilon"}


def overrides_from(args) -> dict:
    out = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected SECTION.KEY=VALUE")
        out[key.strip()] = value
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr)
        if v is not None:
            out[key] = v
    return out


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    logging.captureWarnings(True)
    try:
        cfg = parse_config(args.config, overrides_from(args))
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    out = Path(cfg.output.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        results = COMMANDS[args.command](cfg, out, args)
        if args.command != "plot":
            write_summary(out / f"{args.command.replace('-', '_')}.json", args.command, cfg, results)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except SimulationError as exc:
        log.error("numerical failure (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        log.error("invalid settings: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    log.info("wrote results to %s", out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
