"""Critical constants ``beta_*``, ``alpha_*`` and the curve ``beta_*(alpha)``.

``beta_*`` is the q-Rayleigh quotient of the first p-eigenfunction and
``alpha_*`` the p-Rayleigh quotient of the first q-eigenfunction.
``beta_*(alpha)`` is the infimum of the q-Rayleigh quotient over
``{u != 0 : H_alpha(u) <= 0}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .discrete import DiscreteEnergy, P1Space, random_bump, solve_tridiag
from .fiber import Params
from .grid import DomainError, Grid, GridFunction
from .special import eigenpair, lambda1, pi_p

log = logging.getLogger(__name__)


def _check_pq(p: float, q: float) -> None:
    if not 1.0 < q < p:
        raise DomainError(f"need 1 < q < p, got p={p}, q={q}")


def _beta_moment(p: float, a: float, b: float) -> float:
    """``int_0^1 y^a (1 - y^p)^b dy`` with the ``(1 - y)^b`` factor as a weight."""

    def smooth(y):
        t = 1.0 - y
        if t <= 0.0:
            return p**b
        return y**a * (-np.expm1(p * np.log1p(-t)) / t) ** b

    val, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(0.0, b),
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def _cross_quotient(r: float, s: float) -> float:
    """s-Rayleigh quotient of the first r-eigenfunction.

    With ``y = sin_r(pi_r x)`` on the rising half the two integrals become
    ``pi_r^s int (1 - y^r)^{(s-1)/r} dy / int y^s (1 - y^r)^{-1/r} dy``.
    """
    return pi_p(r) ** s * _beta_moment(r, 0.0, (s - 1.0) / r) / _beta_moment(r, s, -1.0 / r)


@lru_cache(maxsize=128)
def beta_star(p: float, q: float, grid: Grid | None = None) -> float:
    """``||phi_p'||_q^q / ||phi_p||_q^q``.

    Without a grid the quotient is integrated to near machine precision. With
    a grid it uses that grid's quadrature, so ``G_beta`` of ``phi_p`` on the
    same grid vanishes to rounding.
    """
    _check_pq(p, q)
    if grid is None:
        return _cross_quotient(p, q)
    phi = eigenpair(p, grid).phi
    return phi.grad_norm_pow(q) / phi.norm_pow(q)


@lru_cache(maxsize=128)
def alpha_star(p: float, q: float, grid: Grid | None = None) -> float:
    """``||phi_q'||_p^p / ||phi_q||_p^p``; see :func:`beta_star` for ``grid``."""
    _check_pq(p, q)
    if grid is None:
        return _cross_quotient(q, p)
    phi = eigenpair(q, grid).phi
    return phi.grad_norm_pow(p) / phi.norm_pow(p)


# ---------------------------------------------------------------------------
# the curve beta_*(alpha)


@dataclass(frozen=True, eq=False)
class CriticalCurveSample:
    alpha: float
    beta_star_alpha: float
    minimizer: GridFunction
    converged: bool
    iterations: int
    constraint: float  # H_alpha(minimizer) / ||minimizer'||_p^p in the solver discretization
    starts_agree: bool


class _Quotients:
    """q-Rayleigh objective and p-Rayleigh constraint on the P1 space."""

    def __init__(self, space: P1Space, p: float, q: float, alpha_h: float):
        self.s = space
        self.p, self.q, self.alpha_h = p, q, alpha_h

    def rq(self, x):
        return self.s.A(x, self.q) / self.s.B(x, self.q)

    def rp(self, x):
        return self.s.A(x, self.p) / self.s.B(x, self.p)

    def grad_rq(self, x):
        b = self.s.B(x, self.q)
        return (self.s.grad_A(x, self.q) - self.rq(x) * self.s.grad_B(x, self.q)) / b

    def grad_rp(self, x):
        b = self.s.B(x, self.p)
        return (self.s.grad_A(x, self.p) - self.rp(x) * self.s.grad_B(x, self.p)) / b

    def c(self, x):
        return self.rp(x) / self.alpha_h - 1.0

    def normalize(self, x):
        return x / np.sqrt(self.s.dot_laplacian(x, x))

    def restore(self, x, max_iter=30):
        """Gauss-Newton steps along the Sobolev gradient of the constraint."""
        for _ in range(max_iter):
            cv = self.c(x)
            if cv <= 0.0:
                return x, True
            a = self.grad_rp(x) / self.alpha_h
            ah = self.s.solve_laplacian(a)
            den = float(np.dot(a, ah))
            if den <= 0.0:
                return x, False
            x = x - (1.0 + 1e-3) * cv / den * ah
        return x, self.c(x) <= 0.0

    def mix_feasible(self, x_feasible, x_target):
        """Furthest point on the segment towards ``x_target`` that is feasible."""
        if self.c(x_target) <= 0.0:
            return x_target
        lo, hi = 0.0, 1.0
        a = self.normalize(x_feasible)
        b = self.normalize(x_target)
        for _ in range(60):
            t = 0.5 * (lo + hi)
            if self.c((1 - t) * a + t * b) <= 0.0:
                lo = t
            else:
                hi = t
        return (1 - lo) * a + lo * b


def _projected_descent(Q: _Quotients, x0, window=50, tol=1e-10, max_iter=20000):
    x = Q.normalize(x0)
    f = Q.rq(x)
    history = [f]
    tau = 1e-2
    active_tol = 1e-12
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = Q.grad_rq(x)
        gh = Q.s.solve_laplacian(g)
        d = -gh
        if Q.c(x) > -active_tol:
            a = Q.grad_rp(x)
            ah = Q.s.solve_laplacian(a)
            ad = float(np.dot(a, d))
            if ad > 0.0:
                d = d - ad / float(np.dot(a, ah)) * ah
        slope = float(np.dot(g, d))
        if slope >= 0.0:
            converged = True
            break
        accepted = False
        for _ in range(60):
            xt, ok = Q.restore(x + tau * d)
            if ok:
                xt = Q.normalize(xt)
                ft = Q.rq(xt)
                if ft <= f + 1e-4 * tau * slope:
                    accepted = True
                    break
            tau *= 0.5
        if not accepted:
            converged = True
            break
        x, f = xt, ft
        tau = min(tau * 2.0, 1e3)
        history.append(f)
        if len(history) > window and history[-window - 1] - f < tol:
            converged = True
            break
    return x, f, converged, it


def _kkt_polish(Q: _Quotients, x, max_iter=50):
    """Newton on the optimality system of the active constraint.

    A constrained minimizer, suitably scaled, is a critical point ``w`` of the
    P1 energy at ``(alpha_h, beta)`` with ``H(w) = 0`` (hence ``G(w) = 0`` and
    ``beta = R_q(w)``). The unknowns are ``(w, beta)``; the Jacobian is the
    tridiagonal energy Hessian bordered by one row and one column.
    """
    s, p, q = Q.s, Q.p, Q.q
    beta = Q.rq(x)
    gH = s.grad_A(x, p) - Q.alpha_h * s.grad_B(x, p)
    gG = s.grad_A(x, q) - beta * s.grad_B(x, q)
    kH = s.solve_laplacian(gH)
    ratio = -(p / q) * float(np.dot(gG, kH)) / float(np.dot(gH, kH))
    if not ratio > 0.0:
        return None
    w = x * ratio ** (1.0 / (p - q))

    def residual(w, beta):
        E = DiscreteEnergy(s, Params(p, q, Q.alpha_h, beta), positive=False)
        F1 = E.gradient(w)
        Ap = s.A(w, p)
        F2 = (Ap - Q.alpha_h * s.B(w, p)) / Ap
        return E, F1, F2

    E, F1, F2 = residual(w, beta)
    norm0 = E.dual_norm(F1) + abs(F2)
    for it in range(1, max_iter + 1):
        diag, off = E.hessian_bands(w)
        col = -s.grad_B(w, q) / q
        Ap = s.A(w, p)
        H = Ap - Q.alpha_h * s.B(w, p)
        row = (s.grad_A(w, p) - Q.alpha_h * s.grad_B(w, p)) / Ap - H * s.grad_A(w, p) / Ap**2
        a = solve_tridiag(diag, off, F1)
        b = solve_tridiag(diag, off, col)
        den = float(np.dot(row, b))
        if den == 0.0 or not np.isfinite(den):
            return None
        dbeta = (F2 - float(np.dot(row, a))) / den
        dw = -a - b * dbeta
        step = 1.0
        for _ in range(30):
            wt, bt = w + step * dw, beta + step * dbeta
            Et, F1t, F2t = residual(wt, bt)
            norm_t = Et.dual_norm(F1t) + abs(F2t)
            if np.isfinite(norm_t) and norm_t < (1.0 - 1e-4 * step) * norm0:
                break
            step *= 0.5
        else:
            return None
        w, beta, E, F1, F2, norm0 = wt, bt, Et, F1t, F2t, norm_t
        if abs(step * dbeta) <= 1e-14 * abs(beta) and norm0 <= 1e-10:
            return w, beta, it
    return None


def beta_star_curve(alpha: float, p: float, q: float, grid: Grid | None = None,
                    seed: int = 0, n_random: int = 3,
                    max_descent: int = 400) -> CriticalCurveSample:
    """``beta_*(alpha)`` by projected Sobolev-gradient descent with several starts.

    Descent brings each start into the basin; when the constraint is active a
    Newton polish on the optimality system finishes the job.

    The constraint is posed on the P1 space with ``alpha`` mapped affinely so
    that ``lambda_1(p)`` and ``alpha_*`` land on the discrete p-Rayleigh
    quotients of the interpolated eigenfunctions ``phi_p`` and ``phi_q``.
    """
    _check_pq(p, q)
    grid = grid or Grid()
    lam = lambda1(p)
    if alpha < lam * (1.0 - 1e-12):
        raise DomainError(f"constraint set empty: alpha={alpha} < lambda_1(p)={lam}")
    ast = alpha_star(p, q)
    space = P1Space(grid)
    xp = space.restrict(eigenpair(p, grid).phi)
    xq = space.restrict(eigenpair(q, grid).phi)
    probe = _Quotients(space, p, q, 1.0)
    lam_h, ast_h = probe.rp(xp), probe.rp(xq)
    alpha_h = lam_h + (max(alpha, lam) - lam) * (ast_h - lam_h) / (ast - lam)
    Q = _Quotients(space, p, q, alpha_h * (1.0 + 1e-14))

    rng = np.random.default_rng(seed)
    starts = [xp, Q.mix_feasible(xp, xq)]
    x_int = grid.nodes[1:-1]
    for _ in range(n_random):
        starts.append(Q.mix_feasible(xp, random_bump(rng, x_int)))

    results = []
    for x0 in starts:
        x, f, converged, iters = _projected_descent(Q, x0, max_iter=max_descent)
        if Q.c(x) > -1e-9:
            polished = _kkt_polish(Q, x)
            if polished is not None and np.all(polished[0] > 0.0):
                w, f_new, n_newton = polished
                if f_new <= f + 1e-12 * abs(f):
                    x, f, converged, iters = Q.normalize(w), f_new, True, iters + n_newton
        results.append((x, f, converged, iters))
    best = min(range(len(results)), key=lambda i: (results[i][1], i))
    x, f, converged, iters = results[best]
    conv_vals = [r[1] for r in results if r[2]]
    agree = bool(conv_vals) and (max(conv_vals) - min(conv_vals)) <= 1e-4 * abs(f)
    if not agree:
        log.info("beta_*(%g): starts disagree, values %s", alpha, [r[1] for r in results])
    x = x / space.A(x, p) ** (1.0 / p)
    constraint = (space.A(x, p) - alpha_h * space.B(x, p)) / space.A(x, p)
    return CriticalCurveSample(alpha=float(alpha), beta_star_alpha=float(f),
                               minimizer=space.to_grid_function(x), converged=converged,
                               iterations=int(iters), constraint=float(constraint),
                               starts_agree=agree)
