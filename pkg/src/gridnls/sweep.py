"""Phase-diagram sweeps over (p, mu) with deterministic, parallel-safe output."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, build_grid
from .minimize import MinimizeConfig, minimize_energy


@dataclass
class SweepSpec:
    p_range: tuple[float, float, float]
    mu_range: tuple[float, float, float]
    grid: GridSpec
    overrides: dict = field(default_factory=dict)
    seed: int = 0


@dataclass
class PhasePoint:
    p: float
    mu: float
    status: str
    energy: float
    iters: int
    grad_norm: float
    mu_p_estimate_used: float | None = None


def _range_values(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _pool_width(n_points: int) -> int:
    cap = os.environ.get("GRIDNLS_THREADS")
    width = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n_points, width))


def run_sweep(spec: SweepSpec) -> list[PhasePoint]:
    """Minimize at every (p, mu) point; failures become status rows, not aborts."""
    ps = _range_values(*spec.p_range)
    mus = _range_values(*spec.mu_range)
    g = build_grid(spec.grid)
    points = [(float(p), float(mu)) for p in ps for mu in mus]

    def work(pm: tuple[float, float]) -> PhasePoint:
        p, mu = pm
        try:
            cfg = MinimizeConfig(p=p, mu=mu, seed=spec.seed, **spec.overrides)
            res = minimize_energy(g, cfg)
            return PhasePoint(p, mu, res.status, res.energy, res.iterations, res.grad_norm)
        except Exception as exc:  # recorded, never propagated
            return PhasePoint(p, mu, f"Error({type(exc).__name__})", math.nan, 0, math.nan)

    with ThreadPoolExecutor(max_workers=_pool_width(len(points))) as pool:
        rows = list(pool.map(work, points))
    rows.sort(key=lambda r: (r.p, r.mu))
    return rows


def sweep_to_csv(rows: list[PhasePoint]) -> str:
    out = ["p,mu,status,energy,iters,grad_norm"]
    for r in rows:
        out.append(
            f"{r.p:.17g},{r.mu:.17g},{r.status},{r.energy:.17g},{r.iters},{r.grad_norm:.17g}"
        )
    return "\n".join(out) + "\n"
