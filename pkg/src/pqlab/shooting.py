"""Positive solutions on (0, 1) by shooting on the initial slope.

The strong form is integrated in flux variables (see ``_ode``), which stay
regular where ``u' = 0``. ``T(s)`` is the first zero of the trajectory with
``u(0) = 0``, ``u'(0) = s``; each root of ``T(s) = 1`` is a positive solution.

Every positive solution is assumed to come from a shooting trajectory, which
needs uniqueness for the degenerate initial value problem; the variational
module gives an independent check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _ode
from .fiber import Params, energy
from .grid import ConvergenceError, DomainError, Grid, GridFunction

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
TIME_MAP_XMAX = 50.0
# the scan only needs the sign of T(s) - 1
SCAN_XMAX = 2.0
MAX_STEPS = 200_000
HAT_STRIDE = 16


class IntegrationError(ConvergenceError):
    """Step size underflow or step budget exhausted; ``best`` is the last state."""


def phi_inverse(w, p: float, q: float):
    """Inverse of ``t -> |t|^{p-2} t + |t|^{q-2} t``."""
    if not 1.0 < q < p:
        raise DomainError(f"need 1 < q < p, got p={p}, q={q}")
    arr = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("phi_inverse needs finite input")
    if arr.ndim == 0:
        return _ode.flux_inverse(float(arr), p, q, 1.0, 1.0)
    return _ode.flux_inverse_array(arr.ravel(), p, q, 1.0, 1.0).reshape(arr.shape)


def phi(t, p: float, q: float):
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.sign(t) * (a ** (p - 1.0) + a ** (q - 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted integrator steps of the flux ODE, plus event data."""

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    hit_zero: bool
    x_end: float
    x_peak: float
    u_peak: float

    def hamiltonian(self, params: Params) -> np.ndarray:
        p, q = params.p, params.q
        a = np.abs(self.du)
        b = np.abs(self.u)
        return ((p - 1) / p * a**p + (q - 1) / q * a**q
                + params.alpha / p * b**p + params.beta / q * b**q)


def _pars(params: Params) -> np.ndarray:
    return np.array([params.p, params.q, 1.0, 1.0, params.alpha, params.beta])


def _run(pars, s, x_max, rtol, stop_at_zero, x_out):
    p, q, cp, cq = pars[:4]
    v0 = _ode.flux(s, p, q, cp, cq)
    status, xs, ys, x_end, x_peak, u_peak, y_out = _ode.integrate(
        pars, 0.0, v0, float(x_max), rtol, 1e-3 * rtol * s, 1e-3 * rtol * abs(v0),
        stop_at_zero, x_out, MAX_STEPS)
    if status < 0:
        reason = "step size underflow" if status == _ode.STATUS_UNDERFLOW else "step budget exhausted"
        raise IntegrationError(f"integration failed at x={x_end:.6g} ({reason}), s={s:.6g}",
                               best=(xs[-1], ys[-1, 0], ys[-1, 1]))
    return status, xs, ys, x_end, x_peak, u_peak, y_out


def integrate_ivp(params: Params, s: float, x_max: float = TIME_MAP_XMAX,
                  rtol: float = DEFAULT_RTOL) -> Trajectory:
    """Integrate from ``u(0) = 0``, ``u'(0) = s`` to the first zero of ``u`` or ``x_max``."""
    if not s > 0.0 or not x_max > 0.0:
        raise DomainError("need s > 0 and x_max > 0")
    pars = _pars(params)
    status, xs, ys, x_end, x_peak, u_peak, _ = _run(pars, s, x_max, rtol, True, np.empty(0))
    du = _ode.flux_inverse_array(ys[:, 1].copy(), params.p, params.q, 1.0, 1.0)
    return Trajectory(x=xs, u=ys[:, 0], v=ys[:, 1], du=du,
                      hit_zero=status == _ode.STATUS_ZERO, x_end=x_end,
                      x_peak=x_peak, u_peak=u_peak)


@dataclass(frozen=True)
class TimeMapSample:
    s: float
    T: float
    peak: float


def time_map(params: Params, s: float, x_max: float = TIME_MAP_XMAX,
             rtol: float = DEFAULT_RTOL) -> TimeMapSample:
    """First zero ``T(s)`` of the shooting trajectory; ``inf`` when none before ``x_max``."""
    if not s > 0.0:
        raise DomainError("need s > 0")
    status, xs, ys, x_end, x_peak, u_peak, _ = _run(_pars(params), s, x_max, rtol, True,
                                                    np.empty(0))
    T = x_end if status == _ode.STATUS_ZERO else math.inf
    peak = u_peak if np.isfinite(u_peak) else float(np.max(ys[:, 0]))
    return TimeMapSample(s=float(s), T=float(T), peak=float(peak))


def _time_map_defect(pars, s, rtol, x_max=SCAN_XMAX) -> float:
    status, _, _, x_end, _, _, _ = _run(pars, s, x_max, rtol, True, np.empty(0))
    return x_end - 1.0 if status == _ode.STATUS_ZERO else math.inf


# ---------------------------------------------------------------------------
# weak residual


def _panel_cumsum(f: np.ndarray, h: float) -> np.ndarray:
    """``S[k] = int_0^{x_{2k}} f`` by Simpson panels."""
    panels = h / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    return np.concatenate(([0.0], np.cumsum(panels)))


def _test_defects(u: GridFunction, params: Params, flux: np.ndarray | None = None):
    """Normalized weak-form defects against the fixed test basis.

    Returns ``(defects, nonnegative)``: ``defects[k]`` is ``(int Phi(u') phi_k'
    - int f(u) phi_k) / ||phi_k'||_p`` and ``nonnegative[k]`` flags test
    functions that are ``>= 0``. The basis is hat functions of half-width
    ``HAT_STRIDE`` cells centred on every ``HAT_STRIDE``-th node, plus
    ``sin(k pi x)`` for ``k = 1..4``.
    """
    grid = u.grid
    n = grid.n_nodes
    h = grid.h
    x = grid.nodes
    p = params.p
    v = params.flux(u.dvalues) if flux is None else flux
    f = params.reaction(u.values)
    m = n - 1 if (n - 1) % 2 == 0 else n - 4
    Sv = _panel_cumsum(v[: m + 1], h)

    out = []
    nonneg = []
    stride = HAT_STRIDE if m >= 2 * HAT_STRIDE else 2
    w = stride * h
    norm = (2.0 * w) ** (1.0 / p) / w
    for c in range(stride, m - stride + 1, stride):
        lo, hi = c - stride, c + stride
        lhs = (Sv[c // 2] - Sv[lo // 2] - (Sv[hi // 2] - Sv[c // 2])) / w
        hat = 1.0 - np.abs(x[lo:hi + 1] - x[c]) / w
        g = f[lo:hi + 1] * hat
        rhs = h / 3.0 * np.sum(g[0:-2:2] + 4.0 * g[1:-1:2] + g[2::2])
        out.append((lhs - rhs) / norm)
        nonneg.append(True)
    for k in range(1, 5):
        phi_k = np.sin(k * np.pi * x)
        dphi_k = k * np.pi * np.cos(k * np.pi * x)
        val = grid.integrate(v * dphi_k - f * phi_k)
        out.append(val / grid.integrate(np.abs(dphi_k) ** p) ** (1.0 / p))
        nonneg.append(k == 1)
    return np.array(out), np.array(nonneg)


def weak_residual(u: GridFunction, params: Params) -> float:
    """Largest normalized defect of the weak formulation over the test basis."""
    d, _ = _test_defects(u, params)
    return float(np.max(np.abs(d)))


def supersolution_defect(w: GridFunction, params: Params) -> float:
    """Smallest normalized defect over the nonnegative test functions.

    ``>= 0`` for a supersolution (up to quadrature noise).
    """
    d, nonneg = _test_defects(w, params)
    return float(np.min(d[nonneg]))


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True, eq=False)
class Solution:
    params: Params
    slope: float
    u: GridFunction
    energy: float
    linf: float
    residual: float
    symmetry_defect: float
    bracket_width: float = 0.0

    def is_valid(self, residual_tol: float = 1e-8) -> bool:
        interior = self.u.values[1:-1]
        return bool(np.all(interior > 0.0) and self.residual <= residual_tol
                    and self.symmetry_defect <= 1e-6 * self.linf)


def solution_from_grid_function(u: GridFunction, params: Params, slope: float | None = None,
                                bracket_width: float = 0.0) -> Solution:
    if slope is None:
        slope = float(u.dvalues[0])
    return Solution(params=params, slope=float(slope), u=u, energy=energy(u, params),
                    linf=u.linf(), residual=weak_residual(u, params),
                    symmetry_defect=u.symmetry_defect(), bracket_width=bracket_width)


def shoot_on_grid(params: Params, s: float, grid: Grid, rtol: float = DEFAULT_RTOL) -> GridFunction:
    """Re-integrate over [0, 1] and sample ``u`` and ``u'`` at the grid nodes."""
    pars = _pars(params)
    _, _, _, _, _, _, y_out = _run(pars, s, 1.0, rtol, False, np.ascontiguousarray(grid.nodes))
    values = y_out[:, 0].copy()
    values[0] = values[-1] = 0.0
    du = _ode.flux_inverse_array(y_out[:, 1].copy(), params.p, params.q, 1.0, 1.0)
    return GridFunction(grid, values, du)


def _refine_root(pars, a, b, rtol):
    def g(s):
        d = _time_map_defect(pars, s, rtol)
        return d if math.isfinite(d) else 1.0

    s, res = optimize.brentq(g, a, b, xtol=1e-15 * a, rtol=4 * np.finfo(float).eps,
                             maxiter=200, full_output=True)
    return s


def _noise_checked(pars, rtol, pts):
    """Defects at ``rtol / 100`` if every one clears its error estimate, else None."""
    out = []
    for s, d in pts:
        dt = _time_map_defect(pars, s, 1e-2 * rtol)
        if not (math.isfinite(dt) or math.isinf(d)):
            return None
        if math.isfinite(dt) and not abs(dt) > abs(d - dt):
            return None
        out.append(dt)
    return out


def _scan_brackets(pars, s_range, n_scan, rtol):
    """Brackets of roots of ``T(s) - 1`` from a log-spaced scan.

    Sign changes give brackets directly. An interior local minimum of
    ``|T - 1|`` without a sign change may hide two nearby roots close to a
    fold. There a bounded minimization looks for the extremum, and if it
    crosses zero the cell is split in two.

    Every bracket is re-evaluated with ``rtol / 100``. It is kept only if
    its end signs still differ and each end's defect exceeds the estimated
    integration error ``|d(rtol) - d(rtol / 100)|``. Near
    ``alpha = lambda_1(p)`` the defect decays like a power of ``s`` and
    otherwise drowns in integrator bias at large ``s``.
    """
    lo, hi = s_range
    if not 0.0 < lo < hi:
        raise DomainError("need 0 < s_lo < s_hi")
    ss = np.logspace(np.log10(lo), np.log10(hi), int(n_scan))
    d = np.array([_time_map_defect(pars, s, rtol) for s in ss])
    sign = np.where(d > 0.0, 1, -1)
    candidates = [((ss[i], d[i]), (ss[i + 1], d[i + 1]))
                  for i in np.flatnonzero(sign[:-1] != sign[1:])]
    ad = np.abs(d)
    for i in range(1, ss.size - 1):
        if not (sign[i - 1] == sign[i] == sign[i + 1]) or not np.all(np.isfinite(d[i - 1:i + 2])):
            continue
        if not (ad[i] <= ad[i - 1] and ad[i] <= ad[i + 1]):
            continue
        # parabola through the three points (uniform in log s) must dip well towards zero
        curv = 0.5 * (ad[i - 1] + ad[i + 1]) - ad[i]
        vertex = ad[i] - (0.5 * (ad[i + 1] - ad[i - 1])) ** 2 / (4.0 * curv) if curv > 0.0 else ad[i]
        if vertex > 0.5 * ad[i]:
            continue
        sg = float(sign[i])
        res = optimize.minimize_scalar(lambda z: sg * _time_map_defect(pars, z, rtol),
                                       bounds=(ss[i - 1], ss[i + 1]), method="bounded",
                                       options={"xatol": 1e-12 * ss[i]})
        if res.fun < 0.0:
            m = (float(res.x), sg * float(res.fun))
            candidates.append(((ss[i - 1], d[i - 1]), m))
            candidates.append((m, (ss[i + 1], d[i + 1])))
    brackets = []
    for (a, da), (b, db) in sorted(candidates):
        checked = _noise_checked(pars, rtol, [(a, da), (b, db)])
        if checked is not None and np.sign(checked[0]) != np.sign(checked[1]):
            brackets.append((a, b))
        else:
            log.info("discarding root bracket [%.6g, %.6g]: below the integration "
                     "noise floor", a, b)
    return brackets


def find_solutions(params: Params, s_range: tuple[float, float] = (1e-3, 1e3),
                   n_scan: int = 400, grid: Grid | None = None,
                   rtol: float = DEFAULT_RTOL) -> list[Solution]:
    """All roots of ``T(s) = 1`` bracketed on a log-spaced scan, as Solutions.

    Sorted by L-infinity norm.
    """
    grid = grid or Grid()
    pars = _pars(params)
    sols = []
    for a, b in _scan_brackets(pars, s_range, n_scan, rtol):
        s = _refine_root(pars, a, b, rtol)
        u = shoot_on_grid(params, s, grid, rtol)
        # width of the last bracket is below brentq's xtol
        sol = solution_from_grid_function(u, params, slope=s, bracket_width=1e-15 * a)
        if not sol.is_valid():
            log.warning("shooting root s=%.10g fails solution checks (residual %.3g, "
                        "symmetry %.3g)", s, sol.residual, sol.symmetry_defect)
        sols.append(sol)
    sols.sort(key=lambda z: z.linf)
    return sols


def count_roots(params: Params, s_range: tuple[float, float] = (1e-3, 1e3),
                n_scan: int = 400, rtol: float = DEFAULT_RTOL) -> int:
    """Number of noise-checked sign changes of ``T(s) - 1`` on the scan."""
    return len(_scan_brackets(_pars(params), s_range, n_scan, rtol))


def shooting_eigenvalue(r: float, rtol: float = 1e-13) -> float:
    """First eigenvalue of the r-Laplacian on (0, 1) from the time map.

    Integrates ``(|u'|^{r-2} u')' + lam |u|^{r-2} u = 0`` and solves
    ``T(lam) = 1``; for the pure r-Laplacian ``T`` does not depend on the slope.
    """
    if not r > 1.0:
        raise DomainError("need r > 1")

    def defect(lam):
        pars = np.array([r, r, 1.0, 0.0, lam, 0.0])
        status, _, _, x_end, _, _, _ = _run(pars, 1.0, 10.0, rtol, True, np.empty(0))
        return x_end - 1.0

    T1 = defect(1.0) + 1.0
    guess = T1**r
    return optimize.brentq(defect, 0.99 * guess, 1.01 * guess, xtol=1e-15 * guess,
                           rtol=4 * np.finfo(float).eps)
