"""Three positive solutions at p=6, q=2, alpha = lambda_1(6) - 0.1, beta = beta_* + 0.1.

Writes the node values of each solution to ``out/three_solutions.csv`` and
prints one summary line per solution.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from _common import write_csv

from pqlab import Grid, Params, beta_star, find_solutions, lambda1


@dataclass(frozen=True)
class Config:
    p: float = 6.0
    q: float = 2.0
    alpha_shift: float = -0.1
    beta_shift: float = 0.1
    nodes: int = 4097
    out: str = "out/three_solutions.csv"


def main(cfg: Config) -> None:
    pars = Params(cfg.p, cfg.q, lambda1(cfg.p) + cfg.alpha_shift, beta_star(cfg.p, cfg.q) + cfg.beta_shift)
    t0 = time.perf_counter()
    sols = find_solutions(pars, grid=Grid(cfg.nodes))
    print(f"{len(sols)} solutions in {time.perf_counter() - t0:.2f} s")
    rows = []
    for i, s in enumerate(sols):
        print(f"  #{i}: slope {s.slope:.10f}  Linf {s.linf:.6f}  energy {s.energy:.6e}  "
              f"residual {s.residual:.1e}")
        rows += [{"solution": i, "x": float(x), "u": float(u), "du": float(du)}
                 for x, u, du in zip(s.u.x, s.u.values, s.u.dvalues)]
    write_csv(Path(cfg.out), cfg, ["solution", "x", "u", "du"], rows)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=Config.nodes)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    main(Config(nodes=a.nodes, out=a.out))
