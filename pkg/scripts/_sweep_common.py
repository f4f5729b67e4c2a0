"""Shared driver for the Omega sweeps."""

import argparse
import time
from pathlib import Path

from monitored_sps.cli import plot_csv, write_csv
from monitored_sps.dynamics import ModelParams
from monitored_sps.experiment import RESULT_COLUMNS, RunControl, evaluate_case


def run(cases, description, default_outdir):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--omega", type=float, nargs="+", default=[0.02])
    ap.add_argument("--n-traj", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--outdir", default=default_outdir)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    ctrl = RunControl(n_traj=args.n_traj, seed=args.seed, workers=args.workers)
    rows = []
    for om in args.omega:
        for case in cases:
            t0 = time.time()
            r = evaluate_case(ModelParams(Omega=om), case, ctrl)
            rows.append(r)
            print(f"Omega={om:g} {case.label:36s} p1={r.p1:.4f} se={r.se_p1:.4f} "
                  f"p2+={r.p2plus:.4f} threshold={r.h_or_eps:.4g} ({time.time() - t0:.0f}s)",
                  flush=True)
    path = out / "sweep.csv"
    write_csv(path, RESULT_COLUMNS, [[getattr(r, c) for c in RESULT_COLUMNS] for r in rows])
    plot_csv(path, out / "sweep.svg")
    return rows
