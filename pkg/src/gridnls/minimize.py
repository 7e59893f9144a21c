"""Mass-constrained energy minimization, quotient maximization, critical masses.

The minimizer is a projected gradient descent on the fixed-mass sphere with a
shifted-stiffness preconditioner (normalized-gradient-flow style): step along
the preconditioned negative gradient, renormalize the mass, backtrack until
the energy decreases.  Stationarity is always measured with the raw projected
gradient, so the preconditioner only affects speed, not the contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import ExpFamilyParams, compact_edge_soliton, soliton_profile, u_eps
from .functionals import P_MAX, critical_mass_from_kp, pl_quotient
from .grid import (
    GraphFunction,
    GridGraph,
    embed_edge_function,
    kinetic,
    lp_power_exact,
    lp_power_exact_grad,
    mass,
    mass_exact,
    norm_linf,
    random_graph_function,
)

STATUS_CONVERGED = "Converged"
STATUS_NONNEG = "NonNegativeInfimum"
STATUS_CONCENTRATED = "ConcentrationDetected"
STATUS_MAXITERS = "MaxItersReached"


@dataclass
class MinimizeConfig:
    p: float
    mu: float
    max_iters: int = 2000
    grad_tol: float = 1e-7
    step0: float = 1.0
    backtrack: float = 0.5
    init: object = "exp_family"  # "exp_family" | "edge_soliton" | GraphFunction
    init_eps: float = 0.5
    concentration_threshold: float = 0.5
    precond_shift: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (2.0 < self.p <= P_MAX):
            raise ValueError(f"p must lie in (2, {P_MAX}], got {self.p}")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.grad_tol <= 0 or self.step0 <= 0 or not (0 < self.backtrack < 1):
            raise ValueError("tolerances and step parameters must be positive")
        if not (0.0 < self.concentration_threshold < 1.0):
            raise ValueError("concentration_threshold must lie in (0, 1)")


@dataclass
class MinimizeResult:
    state: GraphFunction
    energy: float
    status: str
    iterations: int
    grad_norm: float
    energy_history: np.ndarray = field(repr=False)


@dataclass
class ConstantEstimate:
    p: float
    value: float
    bracket: tuple[float, float]
    method: str
    diagnostics: dict = field(default_factory=dict)


def _initial_state(g: GridGraph, cfg: MinimizeConfig) -> np.ndarray:
    if isinstance(cfg.init, GraphFunction):
        if cfg.init.graph is not g:
            raise ValueError("provided initial state lives on a different grid")
        v = cfg.init.values.copy()
    elif cfg.init == "exp_family":
        v = u_eps(g, ExpFamilyParams(cfg.init_eps, cfg.mu), enforce_tail=False).values.copy()
    elif cfg.init == "edge_soliton":
        v = compact_edge_soliton(g, 0.1).values.copy()
    else:
        raise ValueError(f"unknown init {cfg.init!r}")
    m0 = float(np.dot(g.node_weight, v * v))
    if m0 <= 0:
        raise ValueError("initial state has zero mass")
    return v * math.sqrt(cfg.mu / m0)


def minimize_energy(g: GridGraph, cfg: MinimizeConfig) -> MinimizeResult:
    """Projected, preconditioned gradient descent of the energy at fixed mass."""
    w = g.node_weight
    A = g.stiffness()
    solve = g.shifted_stiffness_solver(cfg.precond_shift)
    p, mu = cfg.p, cfg.mu

    def energy_of(v: np.ndarray) -> float:
        return 0.5 * float(v @ (A @ v)) - float(np.dot(w, np.abs(v) ** p)) / p

    v = _initial_state(g, cfg)
    E = energy_of(v)
    history = [E]
    status = STATUS_MAXITERS
    gnorm = math.inf
    step = cfg.step0
    iters = 0

    for iters in range(1, cfg.max_iters + 1):
        # mass fraction in the worst node-centered dual cell
        if float(np.max(w * v * v)) / mu > cfg.concentration_threshold:
            status = STATUS_CONCENTRATED
            break

        grad = A @ v - w * np.abs(v) ** (p - 2.0) * v
        wv = w * v
        gp = grad - (float(grad @ wv) / float(wv @ wv)) * wv
        gnorm = math.sqrt(float(np.dot(w, gp * gp)))
        if gnorm < cfg.grad_tol:
            status = STATUS_NONNEG if E >= -cfg.grad_tol else STATUS_CONVERGED
            break

        d = solve(gp)
        slope = float(gp @ d)  # positive: d is an SPD-preconditioned gradient
        step = min(cfg.step0, step / cfg.backtrack)
        accepted = False
        while step > 1e-14 * cfg.step0:
            cand = v - step * d
            mm = float(np.dot(w, cand * cand))
            if mm > 0:
                cand *= math.sqrt(mu / mm)
                Ec = energy_of(cand)
                if Ec <= E - 1e-4 * step * slope:
                    v, E = cand, Ec
                    accepted = True
                    break
            step *= cfg.backtrack
        if not accepted:
            # stalled line search: report what the gradient says
            status = STATUS_NONNEG if (gnorm < cfg.grad_tol and E >= -cfg.grad_tol) else STATUS_MAXITERS
            break
        assert E <= history[-1], "energy increased along an accepted iterate"
        history.append(E)

    return MinimizeResult(
        state=GraphFunction(g, v),
        energy=E,
        status=status,
        iterations=iters,
        grad_norm=gnorm,
        energy_history=np.asarray(history),
    )


# -- quotient maximization --------------------------------------------------------

def _edge_bump_start(g: GridGraph, width: float) -> GraphFunction:
    """Single-edge bump of the given intrinsic width, clipped to zero endpoints."""
    lam = 1.0 / max(width, 1e-6)
    s = np.arange(g.mesh + 1) / g.mesh - 0.5
    prof = soliton_profile(lam, s)
    prof = np.maximum(prof - max(prof[0], prof[-1]), 0.0)
    prof[0] = prof[-1] = 0.0
    return embed_edge_function(g, g.edge_id(0, 0, 0), prof)


def _quotient_ascent(
    g: GridGraph,
    p: float,
    v0: np.ndarray,
    max_iters: int,
    precond_shift: float,
) -> tuple[np.ndarray, float]:
    """Backtracking ascent of log Q on the mass sphere; returns (state, log Q)."""
    w = g.node_weight
    A = g.stiffness()
    solve = g.shifted_stiffness_solver(precond_shift)
    half_pm2 = 0.5 * (p - 2.0)

    def renorm(v):
        return v / math.sqrt(float(np.dot(w, v * v)))

    def logq(v):
        u = GraphFunction(g, v)
        P = lp_power_exact(u, p)
        M = mass_exact(u)
        K = float(v @ (A @ v))
        return math.log(P) - half_pm2 * math.log(M) - math.log(K), (P, M, K)

    v = renorm(v0)
    F, (P, M, K) = logq(v)
    step = 1.0
    stall = 0
    for _ in range(max_iters):
        u = GraphFunction(g, v)
        gF = (
            lp_power_exact_grad(u, p) / P
            - (half_pm2 / M) * lp_power_exact_grad(u, 2.0)
            - (2.0 / K) * (A @ v)
        )
        d = solve(gF)
        slope = float(gF @ d)
        if slope <= 0:
            break
        step = min(4.0, step / 0.5)
        accepted = False
        while step > 1e-14:
            cand = renorm(v + step * d)
            Fc, parts = logq(cand)
            if Fc >= F + 1e-4 * step * slope:
                improved = Fc - F
                v, F, (P, M, K) = cand, Fc, parts
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        stall = stall + 1 if improved < 1e-13 * (1.0 + abs(F)) else 0
        if stall >= 3:
            break
    return v, F


def maximize_quotient(
    g: GridGraph,
    p: float,
    max_iters: int = 400,
    n_certify: int = 200,
    seed: int = 0,
    safety: float = 1e-3,
    precond_shift: float = 1.0,
    k4_estimate: float | None = None,
    starts: list[GraphFunction] | None = None,
) -> ConstantEstimate:
    """Estimate the optimal critical-quotient constant by multi-start ascent.

    The objective is the exact piecewise-linear quotient, so every value is a
    certified lower bound on the continuum constant.  Random-sample
    certification can only raise the estimate, never be exceeded by it.
    """
    if not (4.0 <= p <= 6.0):
        raise ValueError(f"quotient exponent must lie in [4, 6], got {p}")
    if starts is None:
        h = g.h
        starts = [
            _edge_bump_start(g, width=max(6.0 * h, 0.05)),
            _edge_bump_start(g, width=0.5),
            u_eps(g, ExpFamilyParams(0.5, 1.0), enforce_tail=False),
        ]

    best_v, best_F = None, -math.inf
    for s in starts:
        v, F = _quotient_ascent(g, p, s.values, max_iters, precond_shift)
        if F > best_F:
            best_v, best_F = v, F

    best_state = GraphFunction(g, best_v)
    value = pl_quotient(best_state, p).value

    rng = np.random.default_rng(seed)
    cert_best = 0.0
    for i in range(n_certify):
        u = random_graph_function(
            g, rng,
            smoothing=int(rng.integers(0, 5)),
            amplitude=1.0,
            nonnegative=bool(i % 2),
        )
        try:
            q = pl_quotient(u, p).value
        except ValueError:
            continue
        cert_best = max(cert_best, q)
    value = max(value, cert_best)

    mu_hat = critical_mass_from_kp(p, value)
    c = math.sqrt(mu_hat / mass(best_state))
    dgrad = c * math.sqrt(kinetic(best_state))
    diagnostics = {
        "certified_max": cert_best,
        "compactness_bound": mu_hat ** ((6.0 - p) / 4.0) / dgrad ** ((6.0 - p) / 2.0),
        "nondegeneracy_bound": (
            (c * norm_linf(best_state)) ** (p - 4.0) * k4_estimate / mu_hat ** ((p - 4.0) / 2.0)
            if k4_estimate is not None
            else None
        ),
    }
    return ConstantEstimate(
        p=p,
        value=value,
        bracket=(value, value * (1.0 + safety)),
        method="QuotientAscent",
        diagnostics=diagnostics,
    )


def estimate_critical_mass(
    g: GridGraph,
    p: float,
    method: str = "formula",
    kp: float | ConstantEstimate | None = None,
    bracket: tuple[float, float] | None = None,
    bracket_width: float = 1e-2,
    energy_tol: float = 1e-9,
    minimize_kwargs: dict | None = None,
) -> ConstantEstimate:
    """Mass threshold below which the constrained energy stays nonnegative.

    method="formula" maps a quotient-constant estimate through
    (p / (2 K_p))^(2/(p-2)); method="bisection" bisects the predicate
    "minimized energy < -energy_tol" between the bracket endpoints.
    """
    if p < 4.0:
        raise ValueError(f"no critical mass for p={p}: below p=4 the energy is negative for every mass")
    if p > 6.0:
        raise ValueError(f"p={p} exceeds the admissible range [4, 6]")

    if method.lower() == "formula":
        if kp is None:
            kp = maximize_quotient(g, p)
        if isinstance(kp, ConstantEstimate):
            k_lo, k_hi = kp.bracket
            k_val = kp.value
        else:
            k_val = float(kp)
            k_lo = k_hi = k_val
        return ConstantEstimate(
            p=p,
            value=critical_mass_from_kp(p, k_val),
            bracket=(critical_mass_from_kp(p, k_hi), critical_mass_from_kp(p, k_lo)),
            method="Formula",
            diagnostics={"kp": k_val},
        )

    if method.lower() not in ("bisection", "energybisection", "energy_bisection"):
        raise ValueError(f"unknown method {method!r}")

    overrides = dict(minimize_kwargs or {})

    def negative_energy(mu: float) -> bool:
        cfg = MinimizeConfig(p=p, mu=mu, **overrides)
        return minimize_energy(g, cfg).energy < -energy_tol

    if bracket is None:
        ref = estimate_critical_mass(g, p, method="formula", kp=kp).value
        bracket = (0.5 * ref, 2.0 * ref)
    lo, hi = bracket
    if not (lo < hi):
        raise ValueError("bracket must satisfy lo < hi")
    if negative_energy(lo) or not negative_energy(hi):
        raise ValueError(f"bracket ({lo}, {hi}) does not straddle the energy sign change")
    while hi - lo > bracket_width:
        mid = 0.5 * (lo + hi)
        if negative_energy(mid):
            hi = mid
        else:
            lo = mid
    return ConstantEstimate(
        p=p,
        value=0.5 * (lo + hi),
        bracket=(lo, hi),
        method="EnergyBisection",
        diagnostics={"energy_tol": energy_tol},
    )


def center_state(u: GraphFunction) -> GraphFunction:
    """Translate so the max-|u| node's nearest vertex sits at the origin.

    Edge-interior ties go to the edge tail; among equal maxima the
    lexicographically smallest (j, k) wins.
    """
    from .grid import translate

    g = u.graph
    m = g.mesh
    absv = np.abs(u.values)
    top = float(np.max(absv)) if absv.size else 0.0
    if top == 0.0:
        raise ValueError("cannot center the zero function")
    candidates = np.flatnonzero(absv == top)

    n_vdof = int((~g.boundary_mask).sum())
    interior_vids = np.flatnonzero(g.vertex_dof >= 0)

    best: tuple[int, int] | None = None
    for dof in candidates:
        if dof < n_vdof:
            vid = interior_vids[dof]
        else:
            idx = dof - n_vdof
            e, i = divmod(idx, m - 1)
            i += 1
            vid = g.edge_tail[e] if i <= m - i else g.edge_head[e]
        jk = (int(g.vertices[vid, 0]), int(g.vertices[vid, 1]))
        if best is None or jk < best:
            best = jk
    return translate(u, -best[0], -best[1])
