"""Region labels on a window around (lambda_1(p), beta_*).

Run once with ``--p 6 --q 2`` (three-solution cells appear left of the
eigenvalue line) and once with ``--p 3 --q 2`` for comparison.
"""

from __future__ import annotations

import argparse
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from _common import write_csv

from pqlab import Grid, beta_star, lambda1
from pqlab.bifurcation import region_map


@dataclass(frozen=True)
class Config:
    p: float = 6.0
    q: float = 2.0
    alpha_halfwidth: float = 2.0
    beta_below: float = 0.6
    beta_above: float = 0.4
    n_alpha: int = 8
    n_beta: int = 8
    nodes: int = 513
    with_curves: bool = False
    threads: int | None = None
    out: str = "out/region_map.csv"


def main(cfg: Config) -> None:
    lam, bs = lambda1(cfg.p), beta_star(cfg.p, cfg.q)
    cells = region_map((lam - cfg.alpha_halfwidth, lam + cfg.alpha_halfwidth),
                       (bs - cfg.beta_below, bs + cfg.beta_above), cfg.n_alpha, cfg.n_beta,
                       cfg.p, cfg.q, grid=Grid(cfg.nodes), with_curves=cfg.with_curves,
                       threads=cfg.threads)
    for label, n in sorted(Counter(c.label.value for c in cells).items()):
        print(f"{label:22s} {n}")
    rows = [{"alpha": c.alpha, "beta": c.beta, "label": c.label.value} for c in cells]
    write_csv(Path(cfg.out), cfg, ["alpha", "beta", "label"], rows)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=Config.p)
    ap.add_argument("--q", type=float, default=Config.q)
    ap.add_argument("--n", type=int, default=8, help="samples per axis")
    ap.add_argument("--with-curves", action="store_true")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    main(Config(p=a.p, q=a.q, n_alpha=a.n, n_beta=a.n, with_curves=a.with_curves,
                threads=a.threads, out=a.out))
