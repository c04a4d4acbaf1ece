"""Sensitivity of the reconstruction to the exponential weight parameters.

Sweeps the weight strength lambda (including lambda = 0, where the raw
fixed-schedule descent diverges) and the time slope alpha on the first test
coefficient, and plots error curves to demos/output/.

Run:  python3 demos/parameter_study.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from convexwave import InverseConfig, run_sweep

OUT = Path(__file__).parent / "output"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    cfg = InverseConfig()

    lams = [0.0, 1.0, 2.0, 5.0]
    recs = run_sweep("lambda", lams, cfg, test=1, noise=0.0)
    for lam, rec in zip(lams, recs):
        note = "DIVERGED" if rec.diverged else f"error {rec.error:.4f}"
        print(f"lambda={lam}: {note} (n*={rec.n_star})")

    alphas = [0.2, 0.3, 0.4, 0.5]
    arecs = run_sweep("alpha", alphas, cfg, test=1, noise=0.0)
    for alpha, rec in zip(alphas, arecs):
        print(f"alpha={alpha}: error {rec.error:.4f} (n*={rec.n_star})")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    good = [(lam, r.error) for lam, r in zip(lams, recs) if not r.diverged]
    ax1.plot(*zip(*good), "o-")
    ax1.set_xlabel("weight strength $\\lambda$")
    ax1.set_ylabel("relative error")
    ax1.set_title("lambda sweep (lambda=0 diverges)")
    ax2.plot(alphas, [r.error for r in arecs], "o-")
    ax2.set_xlabel("time slope $\\alpha$")
    ax2.set_title("alpha sweep")
    fig.tight_layout()
    fig.savefig(OUT / "parameter_study.svg", format="svg")
    print(f"wrote {OUT / 'parameter_study.svg'}")


if __name__ == "__main__":
    main()
