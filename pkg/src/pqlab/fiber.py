"""Energy functional, fiber maps and the Nehari set on grid functions.

For ``u`` in the discrete space

    H_alpha(u) = ||u'||_p^p - alpha ||u||_p^p
    G_beta(u)  = ||u'||_q^q - beta  ||u||_q^q
    E(u)       = H_alpha(u) / p + G_beta(u) / q

with every norm taken under the grid's Simpson quadrature. Along the ray
``t -> E(t u)`` there is exactly one critical point when ``H * G < 0``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .grid import DomainError, GridFunction

# |H| or |G| below this fraction of the matching gradient term is treated as zero
DEGENERACY_TOL = 1e-14


class FiberUndefinedError(DomainError):
    """The fiber scaling needs ``H_alpha(u) * G_beta(u) < 0``."""


@dataclass(frozen=True)
class Params:
    p: float
    q: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("p", "q", "alpha", "beta"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 1.0 < self.q < self.p:
            raise DomainError(f"need 1 < q < p, got p={self.p}, q={self.q}")

    def with_(self, **changes) -> "Params":
        return Params(**{**asdict(self), **changes})

    def reaction(self, u: np.ndarray) -> np.ndarray:
        """``alpha |u|^{p-2} u + beta |u|^{q-2} u``."""
        a = np.abs(u)
        return np.sign(u) * (self.alpha * a ** (self.p - 1.0) + self.beta * a ** (self.q - 1.0))

    def flux(self, du: np.ndarray) -> np.ndarray:
        """``|u'|^{p-2} u' + |u'|^{q-2} u'``."""
        a = np.abs(du)
        return np.sign(du) * (a ** (self.p - 1.0) + a ** (self.q - 1.0))


def H_alpha(u: GridFunction, params: Params) -> float:
    return u.grad_norm_pow(params.p) - params.alpha * u.norm_pow(params.p)


def G_beta(u: GridFunction, params: Params) -> float:
    return u.grad_norm_pow(params.q) - params.beta * u.norm_pow(params.q)


def energy(u: GridFunction, params: Params) -> float:
    return H_alpha(u, params) / params.p + G_beta(u, params) / params.q


def energy_derivative(u: GridFunction, v: GridFunction, params: Params) -> float:
    """``<E'(u), v>``: the weak form tested against ``v`` under the grid quadrature."""
    integrand = params.flux(u.dvalues) * v.dvalues - params.reaction(u.values) * v.values
    return u.grid.integrate(integrand)


def _checked_parts(u: GridFunction, params: Params) -> tuple[float, float]:
    H = H_alpha(u, params)
    G = G_beta(u, params)
    if abs(H) <= DEGENERACY_TOL * u.grad_norm_pow(params.p) or \
            abs(G) <= DEGENERACY_TOL * u.grad_norm_pow(params.q):
        raise FiberUndefinedError("fiber scaling undefined: H_alpha or G_beta vanishes")
    if H * G >= 0.0:
        raise FiberUndefinedError(f"fiber scaling undefined: H={H:.6g}, G={G:.6g} share a sign")
    return H, G


def t_star(u: GridFunction, params: Params) -> float:
    """Unique critical point of ``t -> E(t u)``: ``(-G/H)^{1/(p-q)}``."""
    H, G = _checked_parts(u, params)
    return (abs(G) / abs(H)) ** (1.0 / (params.p - params.q))


def fibered_J(u: GridFunction, params: Params) -> float:
    """``E(t_star(u) u)``, a 0-homogeneous functional."""
    H, G = _checked_parts(u, params)
    p, q = params.p, params.q
    return -np.sign(H) * (p - q) / (p * q) * abs(G) ** (p / (p - q)) / abs(H) ** (q / (p - q))


def nehari_project(u: GridFunction, params: Params) -> GridFunction:
    return u.scaled(t_star(u, params))


@dataclass(frozen=True)
class FiberReport:
    H: float
    G: float
    E: float
    t_star: float | None
    J: float | None
    nehari_residual: float


def fiber_report(u: GridFunction, params: Params) -> FiberReport:
    H = H_alpha(u, params)
    G = G_beta(u, params)
    try:
        t = t_star(u, params)
        J = fibered_J(u, params)
    except FiberUndefinedError:
        t = J = None
    return FiberReport(H=H, G=G, E=H / params.p + G / params.q, t_star=t, J=J,
                       nehari_residual=H + G)
