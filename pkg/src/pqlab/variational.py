"""Variational routes to positive solutions, independent of shooting.

All searches run on the P1 space of the output grid, where the positive-part
energy ``E~`` has a tridiagonal Hessian. A search ends at an approximate
critical point, which is then polished by Newton on two refined P1 meshes.
The two results are Richardson-extrapolated back to the output grid.

The searches are:

* ``minimize_truncated``: projected Newton on the order interval ``[0, w]``.
  Inside the interval the truncated energy ``E^{[0,w]}`` coincides with ``E~``.
* ``global_minimize``: descent on the fibered functional ``J``, then a Newton
  minimization of ``E~``.
* ``mountain_pass``: a climbing-image string started from the Nehari
  projection of ``xi(s) = ((1-s) u1^q + s v1^q)^{1/q}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .discrete import DiscreteEnergy, P1Space, random_bump, solve_tridiag
from .fiber import FiberUndefinedError, Params, nehari_project
from .grid import ConvergenceError, DomainError, Grid, GridFunction
from .shooting import Solution, solution_from_grid_function, supersolution_defect
from .special import eigenpair, lambda1

log = logging.getLogger(__name__)

# refinement factors for the final Newton polish; consecutive entries differ by 2
REFINE_LEVELS = (8, 16)
PATH_SAMPLES = 41
SUPERSOLUTION_TOL = 1e-8


# ---------------------------------------------------------------------------
# positive-part and truncated energies on grid functions


def tilde_energy(u: GridFunction, params: Params) -> float:
    """``E~(u)``: the energy with ``u_+ = max(u, 0)`` in the reaction terms."""
    p, q = params.p, params.q
    up = np.maximum(u.values, 0.0)
    du = np.abs(u.dvalues)
    integrand = (du**p / p + du**q / q
                 - params.alpha * up**p / p - params.beta * up**q / q)
    return u.grid.integrate(integrand)


def _derivative_adjoint(grid: Grid, y: np.ndarray) -> np.ndarray:
    """Transpose of :meth:`Grid.derivative` applied to ``y``."""
    h2 = 2.0 * grid.h
    z = np.zeros_like(y)
    z[2:] += y[1:-1] / h2
    z[:-2] -= y[1:-1] / h2
    z[0] -= 3.0 * y[0] / h2
    z[1] += 4.0 * y[0] / h2
    z[2] -= y[0] / h2
    z[-1] += 3.0 * y[-1] / h2
    z[-2] -= 4.0 * y[-1] / h2
    z[-3] += y[-1] / h2
    return z


def tilde_gradient(u: GridFunction, params: Params) -> np.ndarray:
    """Gradient of ``E~`` with respect to the interior node values.

    The derivative is taken of the fully discrete functional, in which
    ``u'`` is the central difference of the node values. Stored ``dvalues``
    are ignored.
    """
    grid = u.grid
    w = grid.weights
    du = grid.derivative(u.values)
    up = np.maximum(u.values, 0.0)
    flux_part = _derivative_adjoint(grid, w * params.flux(du))
    reaction_part = w * (params.alpha * up ** (params.p - 1.0) + params.beta * up ** (params.q - 1.0))
    return (flux_part - reaction_part)[1:-1]


def truncated_energy(u: GridFunction, w: GridFunction, params: Params) -> float:
    """``E^{[0,w]}(u)``: the reaction clipped to the order interval ``[0, w]``.

    The primitive of the clipped reaction is ``F(0) = 0`` below zero,
    ``F(u)`` on ``[0, w]`` and ``F(w) + f(w) (u - w)`` above ``w``.
    """
    p, q = params.p, params.q
    uc = np.clip(u.values, 0.0, w.values)
    wv = np.maximum(w.values, 0.0)
    F = params.alpha * uc**p / p + params.beta * uc**q / q
    f_w = params.alpha * wv ** (p - 1.0) + params.beta * wv ** (q - 1.0)
    F = F + f_w * np.maximum(u.values - wv, 0.0)
    du = np.abs(u.dvalues)
    return u.grid.integrate(du**p / p + du**q / q - F)


# ---------------------------------------------------------------------------
# Newton machinery on the P1 space


def _scale(E: DiscreteEnergy, x: np.ndarray) -> float:
    s, P = E.space, E.params
    g = s.grad_A(x, P.p) / P.p + s.grad_A(x, P.q) / P.q
    return max(E.dual_norm(g), 1e-300)


def _newton_root(E: DiscreteEnergy, x: np.ndarray, tol: float = 1e-11, max_iter: int = 60):
    """Damped Newton on ``grad E = 0``; merit is the relative dual gradient norm.

    Returns ``(x, relative_residual, converged)``.
    """
    g = E.gradient(x)
    r = E.dual_norm(g) / _scale(E, x)
    for _ in range(max_iter):
        if r <= tol:
            return x, r, True
        diag, off = E.hessian_bands(x)
        try:
            dx = solve_tridiag(diag, off, -g)
        except (linalg.LinAlgError, ValueError):
            return x, r, False
        if not np.all(np.isfinite(dx)):
            return x, r, False
        t = 1.0
        while t > 1e-8:
            xt = x + t * dx
            gt = E.gradient(xt)
            rt = E.dual_norm(gt) / _scale(E, xt)
            if np.isfinite(rt) and rt < (1.0 - 1e-4 * t) * r:
                break
            t *= 0.5
        else:
            # rounding floor: accept if already small
            return x, r, r <= 1e3 * tol
        x, g, r = xt, gt, rt
    return x, r, r <= tol


def _newton_minimize(E: DiscreteEnergy, x: np.ndarray, lo=None, hi=None,
                     tol: float = 1e-10, max_iter: int = 500):
    """Projected Newton with a Levenberg shift for ``min E`` on a box.

    Variables sitting on a bound with the gradient pushing outward are frozen
    for the step. An indefinite Hessian is shifted by multiples of the
    Laplacian until banded Cholesky succeeds.

    Returns ``(x, relative_projected_gradient, converged, iterations)``.
    """
    s = E.space
    n = x.size
    lo = np.full(n, -np.inf) if lo is None else lo
    hi = np.full(n, np.inf) if hi is None else hi
    x = np.clip(x, lo, hi)
    f = E(x)
    lap_d, lap_o = s.laplacian_bands()
    mu = 0.0
    r = np.inf
    for it in range(1, max_iter + 1):
        g = E.gradient(x)
        eps = 1e-14 * (1.0 + np.abs(x))
        active = ((x <= lo + eps) & (g > 0.0)) | ((x >= hi - eps) & (g < 0.0))
        pg = np.where(active, 0.0, g)
        r = E.dual_norm(pg) / _scale(E, x)
        if r <= tol:
            return x, r, True, it
        diag, off = E.hessian_bands(x)
        free = ~active
        coupled = free[:-1] & free[1:]
        rhs = -pg
        dx = None
        mu = mu / 10.0 if mu > 0.0 else 0.0
        for _ in range(40):
            d = np.where(free, diag + mu * lap_d, 1.0)
            o = np.where(coupled, off + mu * lap_o, 0.0)
            try:
                dx = solve_tridiag(d, o, rhs, symmetric_pd=True)
                break
            except linalg.LinAlgError:
                mu = max(10.0 * mu, 1e-8 * float(np.max(np.abs(diag))) / lap_d[0])
        if dx is None:
            return x, r, False, it
        t = 1.0
        accepted = False
        while t > 1e-12:
            xt = np.clip(x + t * dx, lo, hi)
            ft = E(xt)
            if ft <= f + 1e-4 * float(np.dot(g, xt - x)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return x, r, r <= 1e3 * tol, it
        step = np.max(np.abs(xt - x))
        x, f = xt, ft
        if step <= 1e-15 * np.max(np.abs(x)):
            g = E.gradient(x)
            pg = np.where(active, 0.0, g)
            r = E.dual_norm(pg) / _scale(E, x)
            return x, r, r <= 1e3 * tol, it
    return x, r, False, max_iter


def _polish(params: Params, x: np.ndarray, grid: Grid) -> GridFunction:
    """Newton on refined P1 meshes, Richardson-extrapolated to ``grid``."""
    coarse = P1Space(grid).full(x)
    results = []
    for k in REFINE_LEVELS:
        fine = Grid(k * (grid.n_nodes - 1) + 1)
        space = P1Space(fine)
        xf = np.interp(fine.nodes, grid.nodes, coarse)[1:-1]
        xf, res, ok = _newton_root(DiscreteEnergy(space, params, positive=True), xf)
        if not ok:
            raise ConvergenceError(f"Newton polish stalled on {fine.n_nodes} nodes "
                                   f"(relative residual {res:.3g})",
                                   best=space.to_grid_function(xf))
        full = space.full(xf)
        results.append((full[::k], fine.derivative(full)[::k]))
    (v1, d1), (v2, d2) = results
    values = (4.0 * v2 - v1) / 3.0
    dvalues = (4.0 * d2 - d1) / 3.0
    values[0] = values[-1] = 0.0
    return GridFunction(grid, values, dvalues)


def _to_solution(params: Params, x: np.ndarray, grid: Grid) -> Solution:
    return solution_from_grid_function(_polish(params, x, grid), params)


# ---------------------------------------------------------------------------
# truncation


def minimize_truncated(w: GridFunction, params: Params) -> Solution:
    """Minimize ``E^{[0,w]}`` over the order interval ``[0, w]``.

    ``w`` must be a positive supersolution. The minimizer is a solution in
    ``[0, w]`` with negative energy.

    Raises
    ------
    DomainError
        If ``w`` is not positive, fails the supersolution check, or
        ``beta <= lambda_1(q)``.
    ConvergenceError
        If the minimization ends at nonnegative energy.
    """
    if params.beta <= lambda1(params.q):
        raise DomainError(f"need beta > lambda_1(q) = {lambda1(params.q):.12g}")
    if not np.all(w.values[1:-1] > 0.0):
        raise DomainError("w must be positive in (0, 1)")
    defect = supersolution_defect(w, params)
    if defect < -SUPERSOLUTION_TOL:
        raise DomainError(f"w is not a supersolution (defect {defect:.3g})")
    grid = w.grid
    space = P1Space(grid)
    E = DiscreteEnergy(space, params, positive=True)
    hi = space.restrict(w)
    x, r, ok, its = _newton_minimize(E, hi.copy(), lo=np.zeros_like(hi), hi=hi)
    if E(x) >= 0.0:
        raise ConvergenceError("no negative-energy minimizer found",
                               best=space.to_grid_function(x))
    log.debug("truncated minimization: %d iterations, residual %.3g", its, r)
    sol = _to_solution(params, x, grid)
    excess = float(np.max(sol.u.values - w.values))
    if excess > 1e-8 * max(1.0, w.linf()):
        log.warning("truncated minimizer exceeds w by %.3g after polish", excess)
    if sol.energy >= 0.0:
        raise ConvergenceError("no negative-energy minimizer found", best=sol.u)
    return sol


# ---------------------------------------------------------------------------
# fiber-reduced global minimization


def _log_J_terms(space: P1Space, params: Params, x: np.ndarray):
    p, q = params.p, params.q
    H = space.A(x, p) - params.alpha * space.B(x, p, True)
    G = space.A(x, q) - params.beta * space.B(x, q, True)
    return H, G


def _log_J(space, params, x):
    """``log(-J)`` up to a constant, valid where ``H > 0 > G``."""
    p, q = params.p, params.q
    H, G = _log_J_terms(space, params, x)
    if not (H > 0.0 and G < 0.0):
        return -np.inf
    return (p * np.log(-G) - q * np.log(H)) / (p - q)


def _grad_log_J(space, params, x):
    p, q = params.p, params.q
    H, G = _log_J_terms(space, params, x)
    gH = space.grad_A(x, p) - params.alpha * space.grad_B(x, p, True)
    gG = space.grad_A(x, q) - params.beta * space.grad_B(x, q, True)
    return (p * gG / G - q * gH / H) / (p - q)


def _descend_J(space: P1Space, params: Params, x: np.ndarray, max_iter: int,
               window: int = 20, tol: float = 1e-9):
    """Sobolev-gradient ascent of ``log(-J)``, i.e. descent of ``J``."""
    x = x / np.sqrt(space.dot_laplacian(x, x))
    f = _log_J(space, params, x)
    tau = 1e-2
    history = [f]
    for _ in range(max_iter):
        g = _grad_log_J(space, params, x)
        d = space.solve_laplacian(g)
        slope = float(np.dot(g, d))
        if slope <= 0.0:
            break
        for _ in range(50):
            xt = np.maximum(x + tau * d, 0.0)
            ft = _log_J(space, params, xt)
            if ft >= f + 1e-4 * tau * slope:
                break
            tau *= 0.5
        else:
            break
        x, f = xt / np.sqrt(space.dot_laplacian(xt, xt)), ft
        tau = min(2.0 * tau, 1e3)
        history.append(f)
        if len(history) > window and f - history[-window - 1] < tol * abs(f):
            break
    return x


def _nehari_scale(space: P1Space, params: Params, x: np.ndarray) -> np.ndarray:
    H, G = _log_J_terms(space, params, x)
    if not H * G < 0.0:
        raise FiberUndefinedError(f"fiber scaling undefined: H={H:.6g}, G={G:.6g}")
    return x * (-G / H) ** (1.0 / (params.p - params.q))


def _starts(grid: Grid, p: float, q: float, seed: int, n_random: int) -> list[np.ndarray]:
    space = P1Space(grid)
    starts = [space.restrict(eigenpair(q, grid).phi), space.restrict(eigenpair(p, grid).phi)]
    rng = np.random.default_rng(seed)
    x_int = grid.nodes[1:-1]
    starts.extend(random_bump(rng, x_int) for _ in range(n_random))
    return starts


def _global_minimize_p1(params: Params, grid: Grid, seed: int, n_random: int, max_descent: int):
    space = P1Space(grid)
    E = DiscreteEnergy(space, params, positive=True)
    best = None
    for i, x0 in enumerate(_starts(grid, params.p, params.q, seed, n_random)):
        H, G = _log_J_terms(space, params, x0)
        if not G < 0.0:
            continue
        x = _descend_J(space, params, x0, max_descent)
        x = _nehari_scale(space, params, x)
        x, r, ok, _ = _newton_minimize(E, x, lo=np.zeros_like(x))
        if not ok:
            log.info("global_minimize: start %d stalled at residual %.3g", i, r)
            continue
        e = E(x)
        if best is None or e < best[0]:
            best = (e, i, x)
    return best


def global_minimize(params: Params, grid: Grid | None = None, seed: int = 0,
                    n_random: int = 3, max_descent: int = 300) -> Solution:
    """Global minimizer of ``E`` for ``alpha < lambda_1(p)``, ``beta > lambda_1(q)``.

    Each admissible start is descended on ``J``, scaled onto the Nehari set
    and finished by Newton minimization. The lowest energy wins, with ties
    going to the earlier start. Starts are ``phi_q``, ``phi_p`` and
    ``n_random`` bumps drawn from ``seed``.
    """
    if not params.alpha < lambda1(params.p):
        raise DomainError(f"need alpha < lambda_1(p) = {lambda1(params.p):.12g}")
    if not params.beta > lambda1(params.q):
        raise DomainError(f"beta too small: need beta > lambda_1(q) = {lambda1(params.q):.12g}")
    grid = grid or Grid()
    best = _global_minimize_p1(params, grid, seed, n_random, max_descent)
    if best is None:
        raise DomainError("beta too small: no start has G_beta < 0")
    sol = _to_solution(params, best[2], grid)
    u = nehari_project(sol.u, params)
    return solution_from_grid_function(u, params)


# ---------------------------------------------------------------------------
# hidden-convexity path


@dataclass(frozen=True, eq=False)
class PathSample:
    s: float
    point: GridFunction
    energy: float
    G_value: float
    H_value: float


def _xi_values(a: np.ndarray, b: np.ndarray, s: float, q: float) -> np.ndarray:
    return ((1.0 - s) * a**q + s * b**q) ** (1.0 / q)


def xi(u1: GridFunction, v1: GridFunction, s: float, q: float) -> GridFunction:
    """``((1-s) u1^q + s v1^q)^{1/q}`` with its exact chain-rule derivative."""
    if s == 0.0:
        return u1
    if s == 1.0:
        return v1
    a, b = u1.values, v1.values
    vals = _xi_values(a, b, s, q)
    num = (1.0 - s) * a ** (q - 1.0) * u1.dvalues + s * b ** (q - 1.0) * v1.dvalues
    with np.errstate(divide="ignore", invalid="ignore"):
        der = num / vals ** (q - 1.0)
    # at zeros of xi the one-sided limit is the q-mean of the slopes
    zero = vals == 0.0
    lim = ((1.0 - s) * np.abs(u1.dvalues) ** q + s * np.abs(v1.dvalues) ** q) ** (1.0 / q)
    der[zero] = np.sign((1.0 - s) * u1.dvalues + s * v1.dvalues)[zero] * lim[zero]
    return GridFunction(u1.grid, vals, der)


def path_xi(u1: GridFunction, v1: GridFunction, n_samples: int, params: Params) -> list[PathSample]:
    """Sample ``xi`` on a uniform ``s``-grid of ``n_samples`` points in ``[0, 1]``."""
    if np.any(u1.values < 0.0) or np.any(v1.values < 0.0):
        raise DomainError("path endpoints must be nonnegative")
    if u1.grid != v1.grid:
        raise DomainError("path endpoints live on different grids")
    if n_samples < 2:
        raise DomainError("need at least two path samples")
    out = []
    for s in np.linspace(0.0, 1.0, n_samples):
        pt = xi(u1, v1, float(s), params.q)
        up = np.maximum(pt.values, 0.0)
        H = pt.grad_norm_pow(params.p) - params.alpha * pt.grid.integrate(up**params.p)
        G = pt.grad_norm_pow(params.q) - params.beta * pt.grid.integrate(up**params.q)
        out.append(PathSample(s=float(s), point=pt, energy=tilde_energy(pt, params),
                              G_value=float(G), H_value=float(H)))
    return out


# ---------------------------------------------------------------------------
# mountain pass


def _reparametrize(space: P1Space, nodes: list[np.ndarray]) -> list[np.ndarray]:
    """Redistribute interior nodes to equal Laplacian arclength."""
    if len(nodes) <= 2:
        return nodes
    seg = [np.sqrt(space.dot_laplacian(b - a, b - a)) for a, b in zip(nodes[:-1], nodes[1:])]
    arc = np.concatenate(([0.0], np.cumsum(seg)))
    if arc[-1] == 0.0:
        return nodes
    target = np.linspace(0.0, arc[-1], len(nodes))
    out = [nodes[0]]
    j = 0
    for t in target[1:-1]:
        while arc[j + 1] < t:
            j += 1
        lam = (t - arc[j]) / (arc[j + 1] - arc[j]) if arc[j + 1] > arc[j] else 0.0
        out.append((1.0 - lam) * nodes[j] + lam * nodes[j + 1])
    out.append(nodes[-1])
    return out


def _metric_bands(E: DiscreteEnergy, x: np.ndarray):
    """Hessian of the gradient terms ``A_p/p + A_q/q``: a positive tridiagonal metric."""
    s, P = E.space, E.params
    dp, op = s.stiffness_bands(x, P.p, reg=1e-8)
    dq, oq = s.stiffness_bands(x, P.q, reg=1e-8)
    return dp / P.p + dq / P.q, op / P.p + oq / P.q


def _band_dot(diag, off, a, b):
    return float(np.dot(a, diag * b) + np.dot(a[:-1], off * b[1:]) + np.dot(a[1:], off * b[:-1]))


def _lower_endpoint(params: Params, grid: Grid, x1: np.ndarray, e1: float, seed: int):
    """Nehari point with energy below ``e1``, or a direction that leaves ``H > 0``."""
    space = P1Space(grid)
    if params.alpha < lambda1(params.p) and params.beta > lambda1(params.q):
        best = _global_minimize_p1(params, grid, seed, 3, 300)
        if best is not None and best[0] < e1 and \
                np.sqrt(space.dot_laplacian(best[2] - x1, best[2] - x1)) > 1e-3 * np.sqrt(space.dot_laplacian(x1, x1)):
            return best[2]
    return space.restrict(eigenpair(params.p, grid).phi) * np.max(x1)


def _nehari_path(params: Params, space: P1Space, x1: np.ndarray, xv: np.ndarray,
                 e1: float, n: int):
    """Nehari-projected ``xi`` path, truncated where ``H`` stops being positive.

    Returns the path nodes and the ``s`` at which it ends.
    """
    q = params.q

    def H_of(s):
        return _log_J_terms(space, params, _xi_values(x1, xv, s, q))[0]

    def J_of(s):
        x = _xi_values(x1, xv, s, q)
        H, G = _log_J_terms(space, params, x)
        if not (H > 0.0 and G < 0.0):
            return np.inf
        return DiscreteEnergy(space, params, True)(_nehari_scale(space, params, x))

    s_grid = np.linspace(0.0, 1.0, n)
    Hs = np.array([H_of(s) for s in s_grid])
    s_end = 1.0
    if np.any(Hs[1:] <= 0.0):
        k0 = int(np.argmax(Hs[1:] <= 0.0)) + 1
        lo, hi = s_grid[k0 - 1], s_grid[k0]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if H_of(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        # walk back from the zero of H until J has dropped below e1
        cands = [s for s in s_grid[1:k0] if J_of(s) < e1]
        if cands:
            s_end = float(cands[0])
        else:
            # J -> -inf as H -> 0+ while G < 0, so approach the zero geometrically
            base = s_grid[k0 - 1]
            for j in range(1, 60):
                s_end = lo - (lo - base) * 0.5**j
                if J_of(s_end) < e1:
                    break
            else:
                raise ConvergenceError("no path point with energy below the start")
        log.info("H_alpha vanishes along xi near s=%.6g; path truncated at s=%.6g", lo, s_end)
        s_grid = np.linspace(0.0, s_end, n)
    nodes = [x1]
    for s in s_grid[1:]:
        nodes.append(_nehari_scale(space, params, _xi_values(x1, xv, s, q)))
    return nodes, s_end


def mountain_pass(u1: Solution, params: Params, v1: GridFunction | None = None,
                  n_path: int = PATH_SAMPLES, max_iter: int = 3000, seed: int = 0,
                  newton_every: int = 25) -> Solution:
    """Second solution by a mountain pass between ``u1`` and a lower Nehari point.

    The initial path is the Nehari projection of ``xi`` from ``u1`` to ``v1``.
    When ``v1`` is omitted, a global minimizer is used if it lies lower.
    Otherwise the path heads for ``phi_p`` and is truncated before
    ``H_alpha`` reaches zero, at a point where ``J`` is already below
    ``E(u1)``.

    The path is deformed by a climbing-image string. Interior nodes follow
    the energy gradient projected off the path tangent. The highest node
    climbs along the tangent. Every ``newton_every`` steps a Newton solve
    is tried from the highest node. It is accepted if it lands on a critical
    point that is neither endpoint and has energy in ``[E(u1), 0)``.

    Raises
    ------
    DomainError
        At ``(alpha, beta) = (lambda_1(p), beta_*)`` or if ``E(u1) >= 0``.
    ConvergenceError
        "mountain pass not converged", with the best iterate attached.
    """
    from .critical_values import beta_star

    lam = lambda1(params.p)
    if abs(params.alpha - lam) <= 1e-12 * lam and \
            abs(params.beta - beta_star(params.p, params.q)) <= 1e-12 * params.beta:
        raise DomainError("Palais-Smale fails at (lambda_1(p), beta_*)")
    if not u1.energy < 0.0:
        raise DomainError("u1 must have negative energy")
    grid = u1.u.grid
    space = P1Space(grid)
    E = DiscreteEnergy(space, params, positive=True)
    x1, _, ok = _newton_root(E, space.restrict(u1.u))
    if not ok or np.any(x1 <= 0.0):
        raise DomainError("u1 is not a positive critical point on this grid")
    e1 = E(x1)
    xv = space.restrict(v1) if v1 is not None else _lower_endpoint(params, grid, x1, e1, seed)
    if np.any(xv < 0.0):
        raise DomainError("v1 must be nonnegative")
    nodes, s_end = _nehari_path(params, space, x1, xv, e1, n_path)
    energies = np.array([E(x) for x in nodes])
    if energies[1:-1].max() >= 0.0:
        log.warning("initial path reaches energy %.3g >= 0", energies.max())

    norm1 = np.sqrt(space.dot_laplacian(x1, x1))
    xend = nodes[-1]
    best = None
    dt = 0.5
    for it in range(1, max_iter + 1):
        energies = np.array([E(x) for x in nodes])
        c = 1 + int(np.argmax(energies[1:-1]))
        new_nodes = [nodes[0]]
        for i in range(1, len(nodes) - 1):
            x = nodes[i]
            g = E.gradient(x)
            md, mo = _metric_bands(E, x)
            d = solve_tridiag(md, mo, g, symmetric_pd=True)
            tau = nodes[i + 1] - nodes[i - 1]
            tau = tau / np.sqrt(_band_dot(md, mo, tau, tau))
            along = _band_dot(md, mo, d, tau)
            step = d - (2.0 if i == c else 1.0) * along * tau
            new_nodes.append(np.maximum(x - dt * step, 0.0))
        new_nodes.append(nodes[-1])
        # reparametrize on each side of the climbing node separately
        nodes = (_reparametrize(space, new_nodes[:c + 1])
                 + _reparametrize(space, new_nodes[c:])[1:])
        if it % newton_every == 0 or it == max_iter:
            xc = nodes[c]
            best = xc
            x, r, ok = _newton_root(E, xc)
            if ok and np.all(x > 0.0):
                e = E(x)
                far1 = np.sqrt(space.dot_laplacian(x - x1, x - x1)) > 1e-3 * norm1
                far2 = np.sqrt(space.dot_laplacian(x - xend, x - xend)) > 1e-3 * norm1
                if far1 and far2 and e1 - 1e-8 <= e < 0.0:
                    log.info("mountain pass: string converged after %d steps", it)
                    sol = _to_solution(params, x, grid)
                    if not (u1.energy - 1e-8 <= sol.energy < 0.0):
                        raise ConvergenceError("mountain pass not converged: energy out of range",
                                               best=sol.u)
                    return sol
    raise ConvergenceError("mountain pass not converged",
                           best=space.to_grid_function(best) if best is not None else None)
