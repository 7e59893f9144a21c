"""NLS energy, its discrete gradient, interpolation quotients and inequality checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    GraphFunction,
    GridGraph,
    grad_l1,
    kinetic,
    lp_power_exact,
    lp_power_trapezoid,
    mass,
    mass_exact,
    norm_linf,
    norm_lp,
    random_graph_function,
)

# Largest admissible nonlinearity power: beyond it the constrained energy is
# unbounded below for every mass and the minimization problem is void.
P_MAX = 6.0

# Constant served by the two-dimensional and interdimensional checks.
GN2D_CONSTANT = 1.5

INEQUALITY_NAMES = ("GN1D", "GNInfty", "Sobolev2D", "GN2D", "Interdimensional", "GNCritical")


@dataclass
class EnergyBreakdown:
    mass: float
    kinetic: float
    potential_p: float
    p: float
    energy: float


@dataclass
class QuotientValue:
    p: float
    value: float


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    parameters: dict = field(default_factory=dict)


def energy(u: GraphFunction, p: float) -> EnergyBreakdown:
    """Energy breakdown 1/2 * kinetic - (1/p) * integral |u|^p."""
    if not (2.0 < p <= P_MAX):
        raise ValueError(f"nonlinearity power must lie in (2, {P_MAX}], got {p}")
    M = mass(u)
    K = kinetic(u)
    P = lp_power_trapezoid(u, p)
    return EnergyBreakdown(mass=M, kinetic=K, potential_p=P, p=p, energy=0.5 * K - P / p)


def energy_value(u: GraphFunction, p: float) -> float:
    return energy(u, p).energy


def energy_gradient(u: GraphFunction, p: float) -> GraphFunction:
    """DOF-wise gradient g with energy(u + t v) = energy(u) + t <g, v> + O(t^2).

    Kinetic part is the stiffness stencil, potential part the weighted nodal
    power; boundary DOFs do not exist in the vector so they stay pinned.
    """
    if not (2.0 < p <= P_MAX):
        raise ValueError(f"nonlinearity power must lie in (2, {P_MAX}], got {p}")
    g = u.graph
    v = u.values
    grad = g.stiffness() @ v - g.node_weight * np.abs(v) ** (p - 2.0) * v
    return GraphFunction(g, grad)


def gn_quotient(u: GraphFunction, p: float) -> QuotientValue:
    """Critical-form interpolation quotient |u|_p^p / (|u|_2^{p-2} |u'|_2^2)."""
    if not (4.0 <= p <= 6.0):
        raise ValueError(f"quotient exponent must lie in [4, 6], got {p}")
    M = mass(u)
    K = kinetic(u)
    if M <= 0.0:
        raise ValueError("quotient undefined for the zero function")
    if K <= 0.0:
        raise ValueError("quotient undefined when u' vanishes identically")
    P = lp_power_trapezoid(u, p)
    return QuotientValue(p=p, value=P / (M ** ((p - 2.0) / 2.0) * K))


def pl_quotient(u: GraphFunction, p: float) -> QuotientValue:
    """Same quotient with exact piecewise-linear integrals instead of trapezoid.

    For any nodal function this value obeys the continuum bound by
    construction (the interpolant is an honest H^1 function), which is what
    quotient maximization needs: trapezoid quadrature overweights mesh-scale
    bumps enough to push the discrete supremum above the true constant.
    """
    if not (4.0 <= p <= 6.0):
        raise ValueError(f"quotient exponent must lie in [4, 6], got {p}")
    M = mass_exact(u)
    K = kinetic(u)
    if M <= 0.0:
        raise ValueError("quotient undefined for the zero function")
    if K <= 0.0:
        raise ValueError("quotient undefined when u' vanishes identically")
    P = lp_power_exact(u, p)
    return QuotientValue(p=p, value=P / (M ** ((p - 2.0) / 2.0) * K))


def interdim_alpha_range(p: float) -> tuple[float, float]:
    return (p - 2.0) / (2.0 * p), (p - 2.0) / p


def check_inequality(
    u: GraphFunction,
    name: str,
    p: float | None = None,
    alpha: float | None = None,
) -> InequalityReport:
    """Evaluate one of the six interpolation inequalities as lhs <= rhs.

    Negative slack marks a violation.  Constants: 1 for GN1D/GNInfty, 1/2 for
    Sobolev2D, 3/2 for GN2D and Interdimensional, (3/2)^p for GNCritical.
    """
    M = mass(u)
    if M <= 0.0:
        raise ValueError("inequality checks need a nonzero function")
    l2 = M ** 0.5
    K = kinetic(u)
    dl2 = K ** 0.5
    params: dict = {}

    if name == "GN1D":
        if p is None or p < 2:
            raise ValueError("GN1D needs p >= 2")
        lhs = norm_lp(u, p)
        rhs = l2 ** (0.5 + 1.0 / p) * dl2 ** (0.5 - 1.0 / p)
        params = {"p": p}
    elif name == "GNInfty":
        lhs = norm_linf(u)
        rhs = (l2 * dl2) ** 0.5
    elif name == "Sobolev2D":
        lhs = l2
        rhs = 0.5 * grad_l1(u)
        params = {"constant": 0.5}
    elif name == "GN2D":
        if p is None or p < 2:
            raise ValueError("GN2D needs p >= 2")
        lhs = norm_lp(u, p)
        rhs = GN2D_CONSTANT * l2 ** (2.0 / p) * dl2 ** (1.0 - 2.0 / p)
        params = {"p": p, "constant": GN2D_CONSTANT}
    elif name == "Interdimensional":
        if p is None or p < 2:
            raise ValueError("Interdimensional needs p >= 2")
        lo, hi = interdim_alpha_range(p)
        if alpha is None or not (lo - 1e-12 <= alpha <= hi + 1e-12):
            raise ValueError(f"alpha must lie in [{lo}, {hi}] for p={p}, got {alpha}")
        lhs = norm_lp(u, p)
        rhs = GN2D_CONSTANT * l2 ** (1.0 - alpha) * dl2 ** alpha
        params = {"p": p, "alpha": alpha, "constant": GN2D_CONSTANT}
    elif name == "GNCritical":
        if p is None or not (4.0 <= p <= 6.0):
            raise ValueError("GNCritical needs p in [4, 6]")
        kp = GN2D_CONSTANT ** p
        lhs = lp_power_trapezoid(u, p)
        rhs = kp * M ** ((p - 2.0) / 2.0) * K
        params = {"p": p, "constant": kp}
    else:
        raise ValueError(f"unknown inequality {name!r}; choose from {INEQUALITY_NAMES}")

    return InequalityReport(name=name, lhs=lhs, rhs=rhs, slack=rhs - lhs, parameters=params)


@dataclass
class IdentityCheck:
    direct: float
    via_quotient: float
    lower_bound: float | None


def energy_identity_check(
    u: GraphFunction,
    p: float,
    mu: float,
    kp_estimate: float | None = None,
    mass_tol: float = 1e-8,
) -> IdentityCheck:
    """Energy two ways: directly, and as 1/2 |u'|^2 (1 - (2/p) Q mu^{(p-2)/2}).

    Requires mass(u) = mu up to mass_tol.  With a quotient-constant estimate
    the kinetic lower bound 1/2 |u'|^2 (1 - (mu/mu_p)^{(p-2)/2}) is also
    returned, mu_p = (p / (2 K_p))^{2/(p-2)}.
    """
    M = mass(u)
    if abs(M - mu) > mass_tol * max(1.0, abs(mu)):
        raise ValueError(f"mass {M} does not match the target {mu}")
    bd = energy(u, p)
    K = bd.kinetic
    q = bd.potential_p / (mu ** ((p - 2.0) / 2.0) * K)
    via = 0.5 * K * (1.0 - (2.0 / p) * q * mu ** ((p - 2.0) / 2.0))
    lower = None
    if kp_estimate is not None:
        mu_p = critical_mass_from_kp(p, kp_estimate)
        lower = 0.5 * K * (1.0 - (mu / mu_p) ** ((p - 2.0) / 2.0))
    return IdentityCheck(direct=bd.energy, via_quotient=via, lower_bound=lower)


def critical_mass_from_kp(p: float, kp: float) -> float:
    """Mass threshold (p / (2 K_p))^{2/(p-2)} below which the energy is >= 0."""
    if kp <= 0:
        raise ValueError("K_p must be positive")
    return (p / (2.0 * kp)) ** (2.0 / (p - 2.0))


def run_inequality_suite(
    g: GridGraph,
    n_samples: int,
    seed: int = 0,
    ps: tuple[float, ...] = (4.0, 5.0, 6.0),
    n_alpha: int = 5,
) -> list[tuple[int, InequalityReport]]:
    """Seeded random-sample sweep over all six inequalities.

    Alternates mixed-sign and nonnegative samples across a few amplitude and
    smoothness scales.  Returns (sample_id, report) pairs.
    """
    rng = np.random.default_rng(seed)
    out: list[tuple[int, InequalityReport]] = []
    for i in range(n_samples):
        u = random_graph_function(
            g,
            rng,
            smoothing=int(rng.integers(1, 5)),
            amplitude=float(rng.uniform(0.2, 3.0)),
            nonnegative=bool(i % 2),
        )
        out.append((i, check_inequality(u, "GNInfty")))
        out.append((i, check_inequality(u, "Sobolev2D")))
        for p in ps:
            out.append((i, check_inequality(u, "GN1D", p=p)))
            out.append((i, check_inequality(u, "GN2D", p=p)))
            out.append((i, check_inequality(u, "GNCritical", p=p)))
            lo, hi = interdim_alpha_range(p)
            for alpha in np.linspace(lo, hi, n_alpha):
                out.append((i, check_inequality(u, "Interdimensional", p=p, alpha=float(alpha))))
    return out
