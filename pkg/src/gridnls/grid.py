"""Truncated grid metric graph and piecewise-linear functions on it.

The graph is the restriction of the doubly periodic unit grid to the window
[-L, L]^2, with homogeneous Dirichlet values at the truncation boundary.
Functions are continuous piecewise-linear nodal interpolants on a uniform
mesh of `mesh` subintervals per unit edge; continuity at vertices is
structural (one degree of freedom per vertex, shared by all incident edges).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

HORIZONTAL = 0
VERTICAL = 1


@dataclass(frozen=True)
class GridSpec:
    """Truncation half-width (unit cells per direction) and mesh density."""

    half_width: int
    mesh: int

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise ValueError(f"half_width must be a positive integer, got {self.half_width}")
        if int(self.mesh) != self.mesh or self.mesh < 1:
            raise ValueError(f"mesh must be a positive integer, got {self.mesh}")


class GridGraph:
    """Immutable topology, DOF indexing and quadrature weights for one GridSpec.

    Vertices are the lattice points (j, k), |j|,|k| <= L, numbered
    lexicographically.  Edges come in two blocks: horizontal (j,k)->(j+1,k),
    then vertical (j,k)->(j,k+1).  Each edge carries mesh+1 nodes; interior
    edge nodes own one DOF each, every non-boundary vertex owns a single
    shared DOF, and boundary vertices are pinned to zero (index -1).
    """

    def __init__(self, spec: GridSpec):
        L, m = spec.half_width, spec.mesh
        n = 2 * L + 1

        self.spec = spec
        self.half_width = L
        self.mesh = m
        self.h = 1.0 / m

        jj, kk = np.meshgrid(np.arange(-L, L + 1), np.arange(-L, L + 1), indexing="ij")
        self.vertices = np.column_stack([jj.ravel(), kk.ravel()]).astype(np.int64)
        self.n_vertices = n * n
        self.boundary_mask = (np.abs(self.vertices[:, 0]) == L) | (np.abs(self.vertices[:, 1]) == L)

        # horizontal block: j in [-L, L-1], k in [-L, L]; vertical block mirrors it
        ej, ek = np.meshgrid(np.arange(-L, L), np.arange(-L, L + 1), indexing="ij")
        h_tail = (ej.ravel() + L) * n + (ek.ravel() + L)
        h_head = (ej.ravel() + 1 + L) * n + (ek.ravel() + L)
        vj, vk = np.meshgrid(np.arange(-L, L + 1), np.arange(-L, L), indexing="ij")
        v_tail = (vj.ravel() + L) * n + (vk.ravel() + L)
        v_head = (vj.ravel() + L) * n + (vk.ravel() + 1 + L)

        self.n_horizontal = h_tail.size
        self.edge_tail = np.concatenate([h_tail, v_tail])
        self.edge_head = np.concatenate([h_head, v_head])
        self.edge_orientation = np.concatenate(
            [np.full(h_tail.size, HORIZONTAL, dtype=np.int64),
             np.full(v_tail.size, VERTICAL, dtype=np.int64)]
        )
        self.n_edges = self.edge_tail.size

        # DOF layout: interior vertices first, then edge-interior nodes per edge
        self.vertex_dof = np.full(self.n_vertices, -1, dtype=np.int64)
        interior = ~self.boundary_mask
        self.vertex_dof[interior] = np.arange(interior.sum())
        n_vdof = int(interior.sum())
        self.n_dof = n_vdof + self.n_edges * (m - 1)

        en = np.empty((self.n_edges, m + 1), dtype=np.int64)
        en[:, 0] = self.vertex_dof[self.edge_tail]
        en[:, m] = self.vertex_dof[self.edge_head]
        if m > 1:
            blocks = n_vdof + np.arange(self.n_edges * (m - 1)).reshape(self.n_edges, m - 1)
            en[:, 1:m] = blocks
        self.edge_nodes = en

        # trapezoid weights: h per edge-interior node, h/2 per incident edge end
        w = np.zeros(self.n_dof)
        ends = np.concatenate([en[:, 0], en[:, m]])
        valid = ends >= 0
        np.add.at(w, ends[valid], 0.5 * self.h)
        if m > 1:
            w[n_vdof:] = self.h
        self.node_weight = w

        # embedded coordinates of every DOF (used by closed-form families)
        x = np.zeros(self.n_dof)
        y = np.zeros(self.n_dof)
        vx = self.vertices[:, 0].astype(float)
        vy = self.vertices[:, 1].astype(float)
        x[self.vertex_dof[interior]] = vx[interior]
        y[self.vertex_dof[interior]] = vy[interior]
        if m > 1:
            t = np.arange(1, m) * self.h
            tx = vx[self.edge_tail][:, None]
            ty = vy[self.edge_tail][:, None]
            horiz = (self.edge_orientation == HORIZONTAL)[:, None]
            ex = tx + np.where(horiz, t[None, :], 0.0)
            ey = ty + np.where(horiz, 0.0, t[None, :])
            x[n_vdof:] = ex.ravel()
            y[n_vdof:] = ey.ravel()
        self.node_x = x
        self.node_y = y

        for arr in (self.vertices, self.boundary_mask, self.edge_tail, self.edge_head,
                    self.edge_orientation, self.vertex_dof, self.edge_nodes,
                    self.node_weight, self.node_x, self.node_y):
            arr.setflags(write=False)

        self._stiffness = None
        self._stiffness_solver = {}

    def vertex_id(self, j: int, k: int) -> int:
        L = self.half_width
        if abs(j) > L or abs(k) > L:
            raise ValueError(f"vertex ({j},{k}) outside truncation window")
        return (j + L) * (2 * L + 1) + (k + L)

    def edge_id(self, j: int, k: int, orientation: int) -> int:
        """Edge starting at (j,k) with the given orientation."""
        L, n = self.half_width, 2 * self.half_width + 1
        if orientation == HORIZONTAL:
            if not (-L <= j < L and -L <= k <= L):
                raise ValueError(f"no horizontal edge at ({j},{k})")
            return (j + L) * n + (k + L)
        if orientation == VERTICAL:
            if not (-L <= j <= L and -L <= k < L):
                raise ValueError(f"no vertical edge at ({j},{k})")
        else:
            raise ValueError(f"orientation must be {HORIZONTAL} or {VERTICAL}")
        return self.n_horizontal + (j + L) * (2 * L) + (k + L)

    def stiffness(self) -> sparse.csr_matrix:
        """Assemble (once) the stiffness matrix A with u'A u = kinetic(u)... times one.

        More precisely kinetic(u) = v @ (A @ v) for the DOF vector v.
        """
        if self._stiffness is None:
            m = self.mesh
            a = self.edge_nodes[:, :-1].ravel()
            b = self.edge_nodes[:, 1:].ravel()
            rows, cols, vals = [], [], []
            c = 1.0 / self.h
            ma, mb = a >= 0, b >= 0
            rows.append(a[ma]); cols.append(a[ma]); vals.append(np.full(ma.sum(), c))
            rows.append(b[mb]); cols.append(b[mb]); vals.append(np.full(mb.sum(), c))
            both = ma & mb
            rows.append(a[both]); cols.append(b[both]); vals.append(np.full(both.sum(), -c))
            rows.append(b[both]); cols.append(a[both]); vals.append(np.full(both.sum(), -c))
            A = sparse.coo_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.n_dof, self.n_dof),
            )
            self._stiffness = A.tocsr()
        return self._stiffness

    def shifted_stiffness_solver(self, shift: float = 1.0):
        """Prefactorized solver for (shift*I + A); cached per shift."""
        key = float(shift)
        if key not in self._stiffness_solver:
            A = self.stiffness().tocsc()
            M = (A + sparse.identity(self.n_dof, format="csc") * key).tocsc()
            self._stiffness_solver[key] = sparse.linalg.factorized(M)
        return self._stiffness_solver[key]


def build_grid(spec: GridSpec) -> GridGraph:
    return GridGraph(spec)


@dataclass
class GraphFunction:
    """Nodal values of a continuous piecewise-linear function, boundary pinned to 0."""

    graph: GridGraph
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.graph.n_dof,):
            raise ValueError(f"expected {self.graph.n_dof} DOF values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite nodal values")
        self.values = v

    def copy(self) -> "GraphFunction":
        return GraphFunction(self.graph, self.values.copy())

    def __mul__(self, c: float) -> "GraphFunction":
        return GraphFunction(self.graph, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other: "GraphFunction") -> "GraphFunction":
        if other.graph is not self.graph:
            raise ValueError("functions live on different grids")
        return GraphFunction(self.graph, self.values + other.values)

    def __sub__(self, other: "GraphFunction") -> "GraphFunction":
        if other.graph is not self.graph:
            raise ValueError("functions live on different grids")
        return GraphFunction(self.graph, self.values - other.values)

    def __neg__(self) -> "GraphFunction":
        return GraphFunction(self.graph, -self.values)


def zero_function(g: GridGraph) -> GraphFunction:
    return GraphFunction(g, np.zeros(g.n_dof))


def edge_values(u: GraphFunction) -> np.ndarray:
    """(n_edges, mesh+1) nodal values per edge; pinned boundary entries are 0."""
    en = u.graph.edge_nodes
    vals = u.values[np.clip(en, 0, None)]
    vals[en < 0] = 0.0
    return vals


def mass(u: GraphFunction) -> float:
    """Composite-trapezoid integral of u^2 over the graph."""
    return float(np.dot(u.graph.node_weight, u.values * u.values))


def kinetic(u: GraphFunction) -> float:
    """Integral of |u'|^2, exact for the piecewise-linear interpolant."""
    d = np.diff(edge_values(u), axis=1)
    return float(np.sum(d * d)) * u.graph.mesh


def norm_lp(u: GraphFunction, p: float) -> float:
    """Composite-trapezoid L^p norm (the norm itself, not its p-th power)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.dot(u.graph.node_weight, np.abs(u.values) ** p)) ** (1.0 / p)


def lp_power_trapezoid(u: GraphFunction, p: float) -> float:
    """Composite-trapezoid integral of |u|^p (the potential term of the energy)."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.dot(u.graph.node_weight, np.abs(u.values) ** p))


def norm_linf(u: GraphFunction) -> float:
    return float(np.max(np.abs(u.values))) if u.graph.n_dof else 0.0


def grad_l1(u: GraphFunction) -> float:
    """Integral of |u'| = sum over subintervals of |slope| * length."""
    d = np.diff(edge_values(u), axis=1)
    return float(np.sum(np.abs(d)))


def vertex_continuity_gap(u: GraphFunction) -> float:
    """Max disagreement between edge-end evaluations at shared vertices.

    Zero by construction (shared DOF); kept as an executable sanity check.
    """
    ev = edge_values(u)
    g = u.graph
    vids = np.concatenate([g.edge_tail, g.edge_head])
    vals = np.concatenate([ev[:, 0], ev[:, -1]])
    lo = np.full(g.n_vertices, np.inf)
    hi = np.full(g.n_vertices, -np.inf)
    np.minimum.at(lo, vids, vals)
    np.maximum.at(hi, vids, vals)
    touched = np.isfinite(lo)
    return float(np.max(hi[touched] - lo[touched]))


# -- exact integrals of the piecewise-linear interpolant ----------------------
#
# Per subinterval with endpoint values (a, b) and length h:
#   int |a + (b-a)t/h|^p dt = h * (G(b) - G(a)) / (b - a),
#   G(s) = sign(s) |s|^{p+1} / (p+1).
# The quotient degenerates as b -> a; a midpoint series takes over there.

def _segment_lp(a: np.ndarray, b: np.ndarray, p: float, h: float) -> np.ndarray:
    d = b - a
    scale = np.abs(a) + np.abs(b)
    degenerate = np.abs(d) <= 1e-6 * scale + 1e-300
    mid = 0.5 * (a + b)
    q = p + 1.0
    Ga = np.sign(a) * np.abs(a) ** q / q
    Gb = np.sign(b) * np.abs(b) ** q / q
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (Gb - Ga) / d
    # second-order midpoint correction keeps the degenerate branch O(d^2)-accurate
    approx = np.abs(mid) ** p + p * (p - 1) / 24.0 * np.abs(mid) ** max(p - 2.0, 0.0) * d * d
    return h * np.where(degenerate, approx, exact)


def lp_power_exact(u: GraphFunction, p: float) -> float:
    """Exact integral of |u|^p for the piecewise-linear interpolant."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    ev = edge_values(u)
    a = ev[:, :-1].ravel()
    b = ev[:, 1:].ravel()
    return float(np.sum(_segment_lp(a, b, p, u.graph.h)))


def lp_power_exact_grad(u: GraphFunction, p: float) -> np.ndarray:
    """Gradient of lp_power_exact with respect to the DOF vector."""
    g = u.graph
    ev = edge_values(u)
    a = ev[:, :-1].ravel()
    b = ev[:, 1:].ravel()
    h = g.h
    d = b - a
    scale = np.abs(a) + np.abs(b)
    degenerate = np.abs(d) <= 1e-6 * scale + 1e-300
    q = p + 1.0
    Ga = np.sign(a) * np.abs(a) ** q / q
    Gb = np.sign(b) * np.abs(b) ** q / q
    fa = np.abs(a) ** p
    fb = np.abs(b) ** p
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = d * d
        da = h * ((Gb - Ga) - fa * d) / d2
        db = h * (fb * d - (Gb - Ga)) / d2
    mid = 0.5 * (a + b)
    dmid = 0.5 * h * p * np.sign(mid) * np.abs(mid) ** max(p - 1.0, 0.0)
    da = np.where(degenerate, dmid, da)
    db = np.where(degenerate, dmid, db)

    out = np.zeros(g.n_dof)
    ia = g.edge_nodes[:, :-1].ravel()
    ib = g.edge_nodes[:, 1:].ravel()
    ma, mb = ia >= 0, ib >= 0
    np.add.at(out, ia[ma], da[ma])
    np.add.at(out, ib[mb], db[mb])
    return out


def mass_exact(u: GraphFunction) -> float:
    """Exact integral of u^2 for the piecewise-linear interpolant."""
    ev = edge_values(u)
    a = ev[:, :-1]
    b = ev[:, 1:]
    return float(np.sum(a * a + a * b + b * b)) * u.graph.h / 3.0


# -- elementary transformations ------------------------------------------------

def embed_edge_function(g: GridGraph, edge: int, profile: np.ndarray) -> GraphFunction:
    """Place a single-edge profile (mesh+1 samples, zero endpoints) on `edge`."""
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (g.mesh + 1,):
        raise ValueError(f"profile must have {g.mesh + 1} samples")
    if profile[0] != 0.0 or profile[-1] != 0.0:
        raise ValueError("profile endpoints must be exactly 0 for continuity")
    v = np.zeros(g.n_dof)
    nodes = g.edge_nodes[edge, 1:-1]
    v[nodes] = profile[1:-1]
    return GraphFunction(g, v)


def translate(u: GraphFunction, dj: int, dk: int) -> GraphFunction:
    """Shift nodal values by the lattice vector (dj, dk).

    Values carried past the truncation window are dropped; vacated nodes
    (and anything landing on the pinned boundary) become 0.
    """
    g = u.graph
    L, m, n = g.half_width, g.mesh, 2 * g.half_width + 1
    v = np.zeros(g.n_dof)

    # vertices: target (j,k) pulls from source (j-dj, k-dk)
    tj = g.vertices[:, 0]
    tk = g.vertices[:, 1]
    sj = tj - dj
    sk = tk - dk
    ok = (np.abs(sj) <= L) & (np.abs(sk) <= L) & (g.vertex_dof >= 0)
    svid = (sj + L) * n + (sk + L)
    sdof = np.where(ok, g.vertex_dof[np.clip(svid, 0, g.n_vertices - 1)], -1)
    ok &= sdof >= 0
    v[g.vertex_dof[ok]] = u.values[sdof[ok]]

    if m > 1:
        # edges: same index arithmetic per orientation block
        tail = g.vertices[g.edge_tail]
        ej, ek = tail[:, 0], tail[:, 1]
        sj, sk = ej - dj, ek - dk
        horiz = g.edge_orientation == HORIZONTAL
        ok_h = horiz & (sj >= -L) & (sj < L) & (np.abs(sk) <= L)
        ok_v = ~horiz & (np.abs(sj) <= L) & (sk >= -L) & (sk < L)
        src = np.full(g.n_edges, -1, dtype=np.int64)
        src[ok_h] = (sj[ok_h] + L) * n + (sk[ok_h] + L)
        src[ok_v] = g.n_horizontal + (sj[ok_v] + L) * (2 * L) + (sk[ok_v] + L)
        has = src >= 0
        tgt_nodes = g.edge_nodes[has, 1:m]
        src_nodes = g.edge_nodes[src[has], 1:m]
        v[tgt_nodes] = u.values[src_nodes]

    return GraphFunction(g, v)


# -- serialization --------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def dump_function(u: GraphFunction, csv_path) -> None:
    """Write `edge_id,local_s,value` CSV plus a `<csv_path>.json` sidecar."""
    g = u.graph
    ev = edge_values(u)
    lines = ["edge_id,local_s,value"]
    s = np.arange(g.mesh + 1) / g.mesh
    for e in range(g.n_edges):
        for i in range(g.mesh + 1):
            lines.append(f"{e},{_fmt(s[i])},{_fmt(ev[e, i])}")
    with open(csv_path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")
    meta = (
        "{"
        f'"L": {g.half_width}, "m": {g.mesh}, '
        f'"mass": {_fmt(mass(u))}, "kinetic": {_fmt(kinetic(u))}'
        "}"
    )
    with open(str(csv_path) + ".json", "w", newline="") as f:
        f.write(meta + "\n")


def load_function(csv_path) -> GraphFunction:
    with open(str(csv_path) + ".json") as f:
        meta = json.load(f)
    g = build_grid(GridSpec(int(meta["L"]), int(meta["m"])))
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    if data.shape[0] != g.n_edges * (g.mesh + 1):
        raise ValueError("CSV row count does not match the sidecar grid")
    vals = data[:, 2].reshape(g.n_edges, g.mesh + 1)
    v = np.zeros(g.n_dof)
    en = g.edge_nodes
    ok = en >= 0
    v[en[ok]] = vals[ok]
    return GraphFunction(g, v)


# -- random states ---------------------------------------------------------------

def random_graph_function(
    g: GridGraph,
    rng: np.random.Generator,
    smoothing: int = 3,
    amplitude: float = 1.0,
    nonnegative: bool = False,
) -> GraphFunction:
    """Seeded random state: nodal noise mollified by damped-Jacobi sweeps.

    Smoothing keeps quadrature error well below the test tolerances while
    leaving plenty of shape variety; `nonnegative=True` takes |u|.
    """
    v = rng.standard_normal(g.n_dof)
    if smoothing > 0:
        A = g.stiffness()
        dinv = 1.0 / A.diagonal()
        for _ in range(smoothing):
            v = v - (2.0 / 3.0) * dinv * (A @ v)
    top = np.max(np.abs(v))
    if top > 0:
        v *= amplitude / top
    if nonnegative:
        v = np.abs(v)
    return GraphFunction(g, v)
