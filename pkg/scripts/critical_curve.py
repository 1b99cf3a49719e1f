"""The curve beta_*(alpha) on [lambda_1(p), alpha_*] with beta_ps estimates.

``beta_ps`` bisection is the slow part; ``--no-threshold`` skips it.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from _common import write_csv

from pqlab import Grid, alpha_star, beta_star_curve, lambda1
from pqlab.bifurcation import beta_ps_estimate


@dataclass(frozen=True)
class Config:
    p: float = 6.0
    q: float = 2.0
    n_alpha: int = 11
    nodes: int = 4097
    threshold: bool = True
    threshold_tol: float = 1e-4
    out: str = "out/critical_curve.csv"


def main(cfg: Config) -> None:
    g = Grid(cfg.nodes)
    rows = []
    for a in np.linspace(lambda1(cfg.p), alpha_star(cfg.p, cfg.q), cfg.n_alpha):
        c = beta_star_curve(float(a), cfg.p, cfg.q, g)
        bps = float("nan")
        if cfg.threshold and a < alpha_star(cfg.p, cfg.q):
            bps = beta_ps_estimate(float(a), cfg.p, cfg.q, tol=cfg.threshold_tol, grid=Grid(513),
                                   beta_known=c.beta_star_alpha).estimate
        print(f"alpha {a:12.6f}  beta_*(alpha) {c.beta_star_alpha:.8f}  beta_ps {bps:.6f}"
              f"  converged {c.converged}")
        rows.append({"alpha": float(a), "beta_star_alpha": c.beta_star_alpha,
                     "converged": c.converged, "iterations": c.iterations, "beta_ps": bps})
    write_csv(Path(cfg.out), cfg,
              ["alpha", "beta_star_alpha", "converged", "iterations", "beta_ps"], rows)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-alpha", type=int, default=Config.n_alpha)
    ap.add_argument("--no-threshold", action="store_true")
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    main(Config(n_alpha=a.n_alpha, threshold=not a.no_threshold, out=a.out))
