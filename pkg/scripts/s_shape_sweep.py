"""Solution branches over beta at fixed alpha; the default slice shows an S-shape.

Writes ``beta, branch_id, slope, linf, energy`` rows and prints the count
changes.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from _common import write_csv

from pqlab import Grid, beta_star, lambda1
from pqlab.bifurcation import sweep_beta


@dataclass(frozen=True)
class Config:
    p: float = 6.0
    q: float = 2.0
    alpha_shift: float = -0.1
    n_beta: int = 80
    nodes: int = 1025
    threads: int | None = None
    out: str = "out/s_shape.csv"


def main(cfg: Config) -> None:
    alpha = lambda1(cfg.p) + cfg.alpha_shift
    span = (lambda1(cfg.q) + 0.05, beta_star(cfg.p, cfg.q) + 0.5)
    res = sweep_beta(alpha, span, cfg.n_beta, cfg.p, cfg.q, Grid(cfg.nodes), threads=cfg.threads)
    for ch in res.changes:
        print(f"{ch.kind:8s} beta in [{ch.beta_lo:.6f}, {ch.beta_hi:.6f}]: {ch.count_lo} -> {ch.count_hi}")
    if res.failures:
        print(f"{len(res.failures)} failed samples")
    rows = [{"beta": s.beta, "branch_id": s.branch_id, "slope": s.slope, "linf": s.linf,
             "energy": s.energy} for s in res.rows()]
    write_csv(Path(cfg.out), cfg, ["beta", "branch_id", "slope", "linf", "energy"], rows)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha-shift", type=float, default=Config.alpha_shift)
    ap.add_argument("--n-beta", type=int, default=Config.n_beta)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    main(Config(alpha_shift=a.alpha_shift, n_beta=a.n_beta, threads=a.threads, out=a.out))
