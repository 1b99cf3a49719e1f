"""Parameter sweeps: branches in ``beta``, fold events, ``beta_ps`` and region maps."""

from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .critical_values import alpha_star, beta_star, beta_star_curve
from .fiber import Params
from .grid import ConvergenceError, DomainError, Grid
from .shooting import DEFAULT_RTOL, find_solutions
from .special import lambda1

log = logging.getLogger(__name__)

# relative slope change above which two samples are not threaded together
JUMP_THRESHOLD = 0.2


def _map(fn, items, threads: int | None):
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# branches


@dataclass(frozen=True)
class BranchSample:
    beta: float
    slope: float
    linf: float
    energy: float
    branch_id: int


@dataclass(frozen=True)
class Branch:
    alpha: float
    branch_id: int
    samples: tuple[BranchSample, ...]


@dataclass(frozen=True)
class CountChange:
    """Change in solution count between consecutive ``beta`` samples.

    ``kind`` is ``"fold"`` when a pair of solutions appears or disappears.
    It is ``"endpoint"`` for an odd change, e.g. a branch entering from zero.
    """

    beta_lo: float
    beta_hi: float
    count_lo: int
    count_hi: int
    kind: str


@dataclass(frozen=True)
class SweepResult:
    alpha: float
    betas: tuple[float, ...]
    counts: tuple[int, ...]
    branches: tuple[Branch, ...]
    changes: tuple[CountChange, ...]
    failures: tuple[tuple[float, str], ...] = field(default=())

    @property
    def folds(self) -> tuple[CountChange, ...]:
        return tuple(c for c in self.changes if c.kind == "fold")

    def rows(self) -> list[BranchSample]:
        return sorted((s for b in self.branches for s in b.samples),
                      key=lambda s: (s.beta, s.branch_id))


def thread_branches(alpha: float, per_beta: list[tuple[float, list[tuple[float, float, float]]]]
                    ) -> tuple[Branch, ...]:
    """Thread ``(slope, linf, energy)`` triples into branches by nearest slope.

    Consecutive samples are matched by a minimum-cost assignment on
    ``|log(s_new / s_old)|``. Pairs whose relative slope change exceeds
    ``JUMP_THRESHOLD`` start a new branch. Input order within a ``beta``
    does not matter.
    """
    samples: dict[int, list[BranchSample]] = {}
    active: dict[int, float] = {}
    next_id = 0
    for beta, sols in per_beta:
        sols = sorted(sols)
        ids = [-1] * len(sols)
        prev = sorted(active.items())
        if prev and sols:
            cost = np.array([[abs(np.log(s[0] / ps)) for s in sols] for _, ps in prev])
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                if abs(sols[c][0] / prev[r][1] - 1.0) < JUMP_THRESHOLD:
                    ids[c] = prev[r][0]
        active = {}
        for k, (slope, linf, en) in enumerate(sols):
            if ids[k] < 0:
                ids[k] = next_id
                next_id += 1
            samples.setdefault(ids[k], []).append(
                BranchSample(beta=float(beta), slope=float(slope), linf=float(linf),
                             energy=float(en), branch_id=ids[k]))
            active[ids[k]] = slope
    return tuple(Branch(alpha=float(alpha), branch_id=i, samples=tuple(s))
                 for i, s in sorted(samples.items()))


def sweep_beta(alpha: float, beta_range: tuple[float, float], n_beta: int, p: float, q: float,
               grid: Grid | None = None, rtol: float = DEFAULT_RTOL, n_scan: int = 400,
               threads: int | None = None) -> SweepResult:
    """Solutions on a uniform ``beta`` grid, threaded into branches.

    A ``beta`` whose shooting fails is recorded in ``failures`` and left out
    of the counts and of the branches.
    """
    lo, hi = beta_range
    if not lo < hi:
        raise DomainError("need beta_lo < beta_hi")
    if n_beta < 2:
        raise DomainError("need n_beta >= 2")
    grid = grid or Grid()
    betas = [float(b) for b in np.linspace(lo, hi, n_beta)]

    def one(beta):
        try:
            sols = find_solutions(Params(p, q, alpha, beta), grid=grid, rtol=rtol, n_scan=n_scan)
            return [(s.slope, s.linf, s.energy) for s in sols], None
        except (ConvergenceError, DomainError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    results = _map(one, betas, threads)
    per_beta, failures = [], []
    for beta, (sols, err) in zip(betas, results):
        if err is not None:
            log.warning("sweep sample beta=%.12g failed: %s", beta, err)
            failures.append((beta, err))
        else:
            per_beta.append((beta, sols))
    counts = [len(s) for _, s in per_beta]
    changes = []
    for (b0, s0), (b1, s1) in zip(per_beta[:-1], per_beta[1:]):
        if len(s0) != len(s1):
            kind = "fold" if (len(s1) - len(s0)) % 2 == 0 else "endpoint"
            changes.append(CountChange(b0, b1, len(s0), len(s1), kind))
    return SweepResult(alpha=float(alpha), betas=tuple(b for b, _ in per_beta),
                       counts=tuple(counts), branches=thread_branches(alpha, per_beta),
                       changes=tuple(changes), failures=tuple(failures))


# ---------------------------------------------------------------------------
# existence threshold


@dataclass(frozen=True)
class ThresholdEstimate:
    """``beta_ps(alpha)`` lies in ``[lo, hi]``; ``estimate`` is the midpoint."""

    alpha: float
    estimate: float
    lo: float
    hi: float
    evaluations: int


def _has_solution(params: Params, grid: Grid, rtol: float, n_scan: int) -> bool:
    return bool(find_solutions(params, grid=grid, rtol=rtol, n_scan=n_scan))


def beta_ps_estimate(alpha: float, p: float, q: float, tol: float = 1e-4,
                     grid: Grid | None = None, rtol: float = DEFAULT_RTOL, n_scan: int = 400,
                     beta_known: float | None = None) -> ThresholdEstimate:
    """Bisect for the largest ``beta`` with a positive solution.

    The lower end is ``beta_known`` if given, otherwise ``beta_*(alpha)``,
    which admits solutions. The upper end is found by doubling a step upward
    until no solution is found. For ``alpha >= alpha_*`` the lower end is
    ``lambda_1(q) - 1``, which lies in the region with a positive-energy
    solution.

    Raises
    ------
    DomainError
        If ``alpha < lambda_1(p)``.
    ConvergenceError
        If the lower end has no solution, or no failing ``beta`` exists below
        ``beta_* + 1000``.
    """
    lam = lambda1(p)
    if alpha < lam * (1.0 - 1e-12):
        raise DomainError(f"need alpha >= lambda_1(p) = {lam:.12g}")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    grid = grid or Grid()
    cap = beta_star(p, q) + 1e3
    if beta_known is not None:
        lo = float(beta_known)
    elif alpha >= alpha_star(p, q):
        lo = lambda1(q) - 1.0
    else:
        lo = beta_star_curve(alpha, p, q, grid).beta_star_alpha
    evals = 1
    if not _has_solution(Params(p, q, alpha, lo), grid, rtol, n_scan):
        raise ConvergenceError(f"no solution at the lower end beta={lo:.12g}")
    step = max(16.0 * tol, 1e-3)
    hi = lo + step
    while _has_solution(Params(p, q, alpha, hi), grid, rtol, n_scan):
        evals += 1
        lo = hi
        step *= 2.0
        hi = lo + step
        if hi > cap:
            raise ConvergenceError(f"threshold exceeds cap beta={cap:.6g}")
    evals += 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evals += 1
        if _has_solution(Params(p, q, alpha, mid), grid, rtol, n_scan):
            lo = mid
        else:
            hi = mid
    return ThresholdEstimate(alpha=float(alpha), estimate=0.5 * (lo + hi), lo=lo, hi=hi,
                             evaluations=evals)


# ---------------------------------------------------------------------------
# regions


class RegionLabel(str, enum.Enum):
    NoSolution = "NoSolution"
    ExistsPositiveEnergy = "ExistsPositiveEnergy"
    ExistsNegativeEnergy = "ExistsNegativeEnergy"
    TwoMixedEnergy = "TwoMixedEnergy"
    TwoNegativeEnergy = "TwoNegativeEnergy"
    ThreeNegativeEnergy = "ThreeNegativeEnergy"
    Boundary = "Boundary"
    # counts and energy signs outside the list above
    Other = "Other"
    Error = "Error"


def label_from_energies(energies: list[float]) -> RegionLabel:
    n = len(energies)
    neg = sum(e < 0.0 for e in energies)
    if n == 0:
        return RegionLabel.NoSolution
    if n == 1:
        return RegionLabel.ExistsNegativeEnergy if neg else RegionLabel.ExistsPositiveEnergy
    if n == 2:
        return {2: RegionLabel.TwoNegativeEnergy, 1: RegionLabel.TwoMixedEnergy}.get(neg, RegionLabel.Other)
    if n == 3 and neg == 3:
        return RegionLabel.ThreeNegativeEnergy
    return RegionLabel.Other


@dataclass(frozen=True)
class Thresholds:
    """``beta``-values where the label may change at a fixed ``alpha``."""

    beta_star_alpha: float | None
    beta_ps: float | None


@lru_cache(maxsize=256)
def thresholds(alpha: float, p: float, q: float, grid: Grid | None = None,
               tol: float = 1e-4) -> Thresholds:
    """``beta_*(alpha)`` and the ``beta_ps`` estimate where they are finite and defined."""
    grid = grid or Grid()
    lam = lambda1(p)
    if alpha < lam:
        return Thresholds(None, None)
    bsa = beta_star_curve(alpha, p, q, grid).beta_star_alpha
    if alpha >= alpha_star(p, q):
        return Thresholds(bsa, None)
    bps = beta_ps_estimate(alpha, p, q, tol=tol, grid=grid, beta_known=bsa).estimate
    return Thresholds(bsa, bps)


def classify_region(alpha: float, beta: float, p: float, q: float, tol: float = 1e-3,
                    grid: Grid | None = None, curves: Thresholds | None = None,
                    rtol: float = DEFAULT_RTOL, n_scan: int = 400) -> RegionLabel:
    """Label ``(alpha, beta)`` by solution count and energy signs.

    ``Boundary`` is returned within ``tol`` of ``alpha = lambda_1(p)``,
    ``beta = lambda_1(q)`` or of the ``beta``-thresholds in ``curves``. Pass
    ``curves=None`` to check only the eigenvalue lines.
    """
    grid = grid or Grid()
    if abs(alpha - lambda1(p)) <= tol or abs(beta - lambda1(q)) <= tol:
        return RegionLabel.Boundary
    if curves is not None:
        for b in (curves.beta_star_alpha, curves.beta_ps):
            if b is not None and abs(beta - b) <= tol:
                return RegionLabel.Boundary
    sols = find_solutions(Params(p, q, alpha, beta), grid=grid, rtol=rtol, n_scan=n_scan)
    return label_from_energies([s.energy for s in sols])


@dataclass(frozen=True)
class RegionCell:
    alpha: float
    beta: float
    label: RegionLabel
    detail: str = ""


def region_map(alpha_range: tuple[float, float], beta_range: tuple[float, float],
               n_alpha: int, n_beta: int, p: float, q: float, tol: float = 1e-3,
               grid: Grid | None = None, with_curves: bool = False,
               rtol: float = DEFAULT_RTOL, n_scan: int = 400,
               threads: int | None = None) -> list[RegionCell]:
    """:func:`classify_region` on the product grid, ``alpha`` outer, ``beta`` inner.

    A cell that raises gets the ``Error`` label and the message in ``detail``.
    ``with_curves`` adds the ``beta_*(alpha)`` and ``beta_ps`` boundaries,
    which costs one curve point and one bisection per ``alpha`` column.
    """
    if not (alpha_range[0] < alpha_range[1] and beta_range[0] < beta_range[1]):
        raise DomainError("ranges must be increasing")
    if n_alpha < 1 or n_beta < 1:
        raise DomainError("need at least one sample per axis")
    grid = grid or Grid()
    alphas = [float(a) for a in np.linspace(*alpha_range, n_alpha)]
    betas = [float(b) for b in np.linspace(*beta_range, n_beta)]

    curves: dict[float, Thresholds | None] = {}
    for a in alphas:
        curves[a] = None
        if with_curves:
            try:
                curves[a] = thresholds(a, p, q, grid)
            except (ConvergenceError, DomainError) as exc:
                log.warning("thresholds at alpha=%.12g unavailable: %s", a, exc)

    def one(cell):
        a, b = cell
        try:
            lab = classify_region(a, b, p, q, tol=tol, grid=grid, curves=curves[a],
                                  rtol=rtol, n_scan=n_scan)
            return RegionCell(a, b, lab)
        except (ConvergenceError, DomainError) as exc:
            return RegionCell(a, b, RegionLabel.Error, f"{type(exc).__name__}: {exc}")

    return _map(one, [(a, b) for a in alphas for b in betas], threads)
