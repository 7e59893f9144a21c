"""Explicit test families with closed-form norms.

Three constructions: the exponential two-parameter family on the grid, the
real-line soliton profile, and its compactly supported rescalings squeezed
into a single edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functionals import energy
from .grid import GraphFunction, GridGraph, GridSpec, build_grid, embed_edge_function, mass


@dataclass(frozen=True)
class ExpFamilyParams:
    """Decay rate and target mass of the exponential family."""

    eps: float
    mu: float

    def __post_init__(self):
        if self.eps <= 0 or self.mu <= 0:
            raise ValueError("eps and mu must be positive")

    @property
    def kappa(self) -> float:
        """Amplitude making the family's mass exactly mu on the full grid."""
        e = self.eps
        return math.sqrt(0.5 * e * self.mu * (1.0 - math.exp(-2 * e)) / (1.0 + math.exp(-2 * e)))


def u_eps(
    g: GridGraph,
    params: ExpFamilyParams,
    tail_bound: float = 1e-12,
    enforce_tail: bool = True,
) -> GraphFunction:
    """Nodal interpolant of kappa * exp(-eps(|x|+|y|)) restricted to the grid.

    Centered at the origin vertex.  With enforce_tail the truncation window
    must satisfy exp(-2 eps L) < tail_bound so closed-form comparisons hold.
    """
    tail = math.exp(-2.0 * params.eps * g.half_width)
    if enforce_tail and tail >= tail_bound:
        raise ValueError(
            f"truncation too small: exp(-2*eps*L) = {tail:.3g} >= {tail_bound:.3g}; "
            "increase half_width or relax tail_bound"
        )
    k = params.kappa
    v = k * np.exp(-params.eps * (np.abs(g.node_x) + np.abs(g.node_y)))
    return GraphFunction(g, v)


def u_eps_closed_forms(params: ExpFamilyParams, p: float) -> tuple[float, float, float]:
    """Exact (mass, kinetic, integral of |u|^p) of the family on the full grid."""
    e, mu = params.eps, params.mu
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    k = params.kappa
    lp = 2.0 * k**p * (2.0 / (e * p)) * (1.0 + math.exp(-e * p)) / (1.0 - math.exp(-e * p))
    return mu, e * e * mu, lp


def energy_asymptotic_probe(
    p: float,
    mu: float,
    eps_list,
    mesh: int = 4,
    tail_bound: float = 1e-6,
) -> list[tuple[float, float, float, float]]:
    """Discrete energies of the exponential family for an eps sweep.

    Each eps gets its own truncation with exp(-2 eps L) < tail_bound; the
    (eps, energy, kinetic, potential) rows support log-log exponent fits.
    """
    rows = []
    for e in eps_list:
        if not (0.0 < e <= 0.5):
            raise ValueError(f"probe eps must lie in (0, 0.5], got {e}")
        L = max(1, math.ceil(math.log(1.0 / tail_bound) / (2.0 * e)))
        g = build_grid(GridSpec(L, mesh))
        u = u_eps(g, ExpFamilyParams(eps=e, mu=mu), tail_bound=tail_bound, enforce_tail=False)
        bd = energy(u, p)
        rows.append((float(e), bd.energy, bd.kinetic, bd.potential_p))
    return rows


# -- the real-line soliton -------------------------------------------------------

_SQRT3 = math.sqrt(3.0)


def soliton_constants() -> tuple[float, float]:
    """(critical mass of the line, sharp sixth-power quotient constant)."""
    return math.pi * _SQRT3 / 2.0, 4.0 / math.pi**2


def soliton_profile(lam: float, x_samples: np.ndarray) -> np.ndarray:
    """Mass-preserving rescaling sqrt(lam) * phi(lam x), phi = sech(2x/sqrt3)^(1/2)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    x = np.asarray(x_samples, dtype=float)
    return math.sqrt(lam) / np.sqrt(np.cosh(2.0 * lam * x / _SQRT3))


def soliton_derivative(lam: float, x_samples: np.ndarray) -> np.ndarray:
    """Analytic derivative of soliton_profile, for quadrature of the kinetic term."""
    x = np.asarray(x_samples, dtype=float)
    t = 2.0 * lam * x / _SQRT3
    return -lam ** 1.5 / _SQRT3 * np.tanh(t) / np.sqrt(np.cosh(t))


def compact_edge_soliton(
    g: GridGraph,
    eps_scale: float,
    edge: int | None = None,
    floor: float = 1e-10,
) -> GraphFunction:
    """Soliton squeezed into one edge by w(x) -> w(x / eps^2) / eps.

    Samples the rescaled profile on the edge (arc-length recentered to
    [-1/2, 1/2]), hard-clips amplitudes below `floor` times the peak to zero
    so the support is genuinely compact, and renormalizes the mass back to
    the exact line value.  Rejects eps_scale too large for the clip to reach
    the edge endpoints.
    """
    if eps_scale <= 0:
        raise ValueError("eps_scale must be positive")
    if edge is None:
        edge = g.edge_id(0, 0, 0)
    lam = 1.0 / (eps_scale * eps_scale)
    s = np.arange(g.mesh + 1) / g.mesh - 0.5
    prof = soliton_profile(lam, s)
    peak = math.sqrt(lam)
    if max(prof[0], prof[-1]) >= floor * peak:
        raise ValueError(
            f"eps_scale={eps_scale} leaves endpoint amplitude above the clip floor; "
            "shrink eps_scale or raise floor"
        )
    prof = np.where(prof < floor * peak, 0.0, prof)
    u = embed_edge_function(g, edge, prof)
    target, _ = soliton_constants()
    got = mass(u)
    if got <= 0:
        raise ValueError("clipped profile vanished; mesh too coarse for this eps_scale")
    u.values *= math.sqrt(target / got)
    return u
