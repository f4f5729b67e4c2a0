"""CUSUM at three noise levels against the deterministic timer (eta = 1).

Usage: python3 scripts/noise_sweep.py [--omega 0.01 0.02 0.05 0.1] [--n-traj 1000]
"""

from _sweep_common import run

from monitored_sps.experiment import NOISE_CASES

if __name__ == "__main__":
    run(NOISE_CASES, __doc__.splitlines()[0], "results/noise_sweep")
