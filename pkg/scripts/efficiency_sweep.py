"""CUSUM under imperfect monitoring efficiency against the deterministic timer.

Usage: python3 scripts/efficiency_sweep.py [--omega 0.01 0.02 0.05 0.1] [--n-traj 1000]
"""

from _sweep_common import run

from monitored_sps.experiment import EFFICIENCY_CASES

if __name__ == "__main__":
    run(EFFICIENCY_CASES, __doc__.splitlines()[0], "results/efficiency_sweep")
