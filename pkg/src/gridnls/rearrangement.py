"""Symmetric decreasing rearrangement onto the line and level-set counting.

The rearrangement of a nonnegative piecewise-linear graph function is computed
exactly: the measure of every superlevel set is a closed-form sum over mesh
subintervals, piecewise affine in the level, so the rearranged profile is
again piecewise linear with breakpoints at the distinct nodal values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GraphFunction, _segment_lp, edge_values, norm_linf


@dataclass
class LineFunction:
    """Even, radially nonincreasing piecewise-linear profile on the line."""

    xs: np.ndarray
    values: np.ndarray

    def norm_lr(self, r: float) -> float:
        if r < 1:
            raise ValueError(f"r must be >= 1, got {r}")
        a = self.values[:-1]
        b = self.values[1:]
        dx = np.diff(self.xs)
        return float(np.sum(_segment_lp(a, b, r, dx))) ** (1.0 / r)

    def lr_power(self, r: float) -> float:
        a = self.values[:-1]
        b = self.values[1:]
        dx = np.diff(self.xs)
        return float(np.sum(_segment_lp(a, b, r, dx)))

    def mass(self) -> float:
        return self.lr_power(2.0)

    def grad_l2(self) -> float:
        dv = np.diff(self.values)
        dx = np.diff(self.xs)
        good = dx > 0
        return float(np.sqrt(np.sum(dv[good] * dv[good] / dx[good])))


def _superlevel_measures(ev: np.ndarray, h: float, levels: np.ndarray, weak: bool):
    """measure{u > t} (strict) or measure{u >= t} (weak) at each level."""
    lo = np.minimum(ev[:, :-1], ev[:, 1:]).ravel()
    hi = np.maximum(ev[:, :-1], ev[:, 1:]).ravel()
    nd = hi > lo

    lo_sorted = np.sort(lo)
    side = "left" if weak else "right"
    full = h * (lo.size - np.searchsorted(lo_sorted, levels, side=side))

    lo_nd, hi_nd = lo[nd], hi[nd]
    d = hi_nd - lo_nd
    alpha = h * hi_nd / d
    beta = h / d

    order_lo = np.argsort(lo_nd, kind="stable")
    lo_s = lo_nd[order_lo]
    cum_a_lo = np.concatenate([[0.0], np.cumsum(alpha[order_lo])])
    cum_b_lo = np.concatenate([[0.0], np.cumsum(beta[order_lo])])
    order_hi = np.argsort(hi_nd, kind="stable")
    hi_s = hi_nd[order_hi]
    cum_a_hi = np.concatenate([[0.0], np.cumsum(alpha[order_hi])])
    cum_b_hi = np.concatenate([[0.0], np.cumsum(beta[order_hi])])

    i_lo = np.searchsorted(lo_s, levels, side=side)
    i_hi = np.searchsorted(hi_s, levels, side=side)
    a_active = cum_a_lo[i_lo] - cum_a_hi[i_hi]
    b_active = cum_b_lo[i_lo] - cum_b_hi[i_hi]
    return full + a_active - levels * b_active


def symmetric_rearrangement(u: GraphFunction) -> LineFunction:
    """Exact symmetric decreasing rearrangement of a nonnegative graph function."""
    if np.any(u.values < 0):
        raise ValueError("rearrangement needs a nonnegative function; take |u| first")
    ev = edge_values(u)
    if not np.any(ev > 0):
        raise ValueError("rearrangement undefined for the zero function")
    h = u.graph.h

    levels = np.unique(ev.ravel())
    levels = levels[levels >= 0.0]
    strict = _superlevel_measures(ev, h, levels, weak=False)
    weakm = _superlevel_measures(ev, h, levels, weak=True)

    # descending levels; insert a second breakpoint where a plateau widens the set
    s_pts = [0.0]
    v_pts = [float(levels[-1])]
    for i in range(levels.size - 1, -1, -1):
        t = float(levels[i])
        s1, s2 = float(strict[i]), float(weakm[i])
        if s1 > s_pts[-1]:
            s_pts.append(s1)
            v_pts.append(t)
        if t == 0.0:
            break
        if s2 > s_pts[-1]:
            s_pts.append(s2)
            v_pts.append(t)
    if v_pts[-1] != 0.0:
        # support of positive values ends exactly at measure{u > 0}
        s_pts.append(float(strict[np.searchsorted(levels, 0.0)]))
        v_pts.append(0.0)

    s = np.asarray(s_pts)
    v = np.asarray(v_pts)
    xs = np.concatenate([-0.5 * s[::-1], 0.5 * s[1:]])
    vals = np.concatenate([v[::-1], v[1:]])
    return LineFunction(xs=xs, values=vals)


def count_preimages(u: GraphFunction, t: float) -> int:
    """Number of transversal crossings of level t by the interpolant.

    Levels colliding with a nodal value are nudged up by 1e-12 * |u|_inf so
    the count is defined for every t in (0, max).
    """
    top = norm_linf(u)
    if not (0.0 < t < top):
        raise ValueError(f"level must lie strictly inside (0, {top}), got {t}")
    ev = edge_values(u)
    if np.any(ev == t):
        t = t + 1e-12 * top
    a = ev[:, :-1].ravel()
    b = ev[:, 1:].ravel()
    return int(np.count_nonzero((a - t) * (b - t) < 0.0))
