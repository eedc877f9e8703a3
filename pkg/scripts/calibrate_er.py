"""Monte Carlo spread of the ER estimates, used to set the recovery tolerances.

Prints, for each configuration, the per-fit standard deviation of alpha-hat and
beta-hat over the seeds, the mean absolute error and its standard error.

    python scripts/calibrate_er.py --seeds 30
"""

import argparse

import numpy as np

from dynrg import ErParams, fit_er, generate_er

CONFIGS = [
    # (n, T, alpha, beta): the acceptance recovery run and the CLI example
    (500, 10, 0.05, 0.30),
    (100, 5, 0.10, 0.40),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=30)
    args = ap.parse_args()
    print("n,T,alpha,beta,sd_alpha,sd_beta,mae_alpha,se_mae_alpha,mae_beta,se_mae_beta")
    for n, T, a, b in CONFIGS:
        fits = [fit_er(generate_er(n, T, ErParams(a, b), seed=s)) for s in range(args.seeds)]
        ah = np.array([f.alpha for f in fits])
        bh = np.array([f.beta for f in fits])
        ea, eb = np.abs(ah - a), np.abs(bh - b)
        root = np.sqrt(args.seeds)
        print(f"{n},{T},{a},{b},{ah.std(ddof=1):.6f},{bh.std(ddof=1):.6f},"
              f"{ea.mean():.6f},{ea.std(ddof=1) / root:.6f},{eb.mean():.6f},{eb.std(ddof=1) / root:.6f}")


if __name__ == "__main__":
    main()
