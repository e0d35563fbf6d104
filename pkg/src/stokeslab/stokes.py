"""Stationary two-phase Stokes solver on the interface.

The interfacial normal-velocity response to a normal traction jump g is
realized as a dense matrix on collocation nodes.  For matched viscosities
the velocity field is the single-layer potential with density g nu and the
matrix applies the 2D Stokeslet kernel, with the periodic log singularity
integrated by a spectral product rule.  For a viscosity contrast the
interfacial velocity solves the standard second-kind equation with a
double-layer term.

Free-space note: the problem is solved in the whole plane with decay at
infinity instead of a no-slip outer wall.  The 2D log kernel then carries a
scale ambiguity on densities with net force (for a circle the translation
mode changes sign at R = e^{3/4}); every operator is therefore assembled at
a fixed working scale (bounding diagonal = 1/2, where the kernel is
positive) and mapped back.  Force-free inputs -- curvature deflated by its
component means, component indicators, anything produced by the
volume-preserving dynamics -- are unaffected by this normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import Interface, MaterialParams, component_frame

TWO_PI = 2.0 * np.pi

#: bounding-box diagonal of the internal working geometry
WORKING_DIAMETER = 0.5

#: refuse assembly when distinct components are closer than this many node
#: spacings (quadrature would be near-singular)
MIN_GAP_SPACINGS = 3.0


class NearContactError(RuntimeError):
    """Components too close for accurate quadrature (geometry obstruction)."""


@dataclass(frozen=True)
class CollocationGrid:
    """Discrete carrier of the interface for all weighted pairings."""

    nodes: np.ndarray           # (n, 2)
    normals: np.ndarray         # (n, 2)
    weights: np.ndarray         # (n,) arc-length measure
    component_index: np.ndarray  # (n,) int
    theta: np.ndarray           # (n,)
    jacobians: np.ndarray       # (n,)
    curvature: np.ndarray       # (n,)
    slices: tuple               # per-component slice objects
    arc_lengths: tuple          # per-component total length

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_components(self) -> int:
        return len(self.slices)

    def max_spacing(self) -> float:
        return max(l / (s.stop - s.start)
                   for l, s in zip(self.arc_lengths, self.slices))

    def indicator(self, k: int) -> np.ndarray:
        e = np.zeros(self.size)
        e[self.slices[k]] = 1.0
        return e

    def component_means(self, values: np.ndarray) -> np.ndarray:
        """Weighted mean of a node field on each component.

        Numerator and denominator use the same dot reduction so a constant
        field has mean exactly equal to that constant.
        """
        out = np.empty(self.n_components)
        for k, sl in enumerate(self.slices):
            w = self.weights[sl]
            out[k] = np.dot(w, values[sl]) / np.dot(w, np.ones(len(w)))
        return out

    def deflate_means(self, values: np.ndarray) -> np.ndarray:
        """Subtract the per-component weighted mean (an exact-kernel
        direction of the NtD operator) so downstream roundoff scales with
        the informative part of the field."""
        out = values.astype(float).copy()
        means = self.component_means(values)
        for k, sl in enumerate(self.slices):
            out[sl] -= means[k]
        return out


def build_grid(interface: Interface, m_per_component: int) -> CollocationGrid:
    frames = [component_frame(c, m_per_component) for c in interface.components]
    thetas = np.concatenate([f[0] for f in frames])
    nodes = np.concatenate([f[1] for f in frames])
    normals = np.concatenate([f[2] for f in frames])
    jac = np.concatenate([f[3] for f in frames])
    curv = np.concatenate([f[4] for f in frames])
    weights = jac * (TWO_PI / m_per_component)
    idx = np.concatenate([np.full(m_per_component, k, dtype=np.intp)
                          for k in range(len(frames))])
    slices = tuple(slice(k * m_per_component, (k + 1) * m_per_component)
                   for k in range(len(frames)))
    arcs = tuple(float(weights[sl].sum()) for sl in slices)
    return CollocationGrid(nodes, normals, weights, idx, thetas, jac, curv,
                           slices, arcs)


def _check_separation(grid: CollocationGrid):
    h = grid.max_spacing()
    for i in range(grid.n_components):
        for j in range(i + 1, grid.n_components):
            xi = grid.nodes[grid.slices[i]]
            xj = grid.nodes[grid.slices[j]]
            gap = np.min(np.linalg.norm(xi[:, None, :] - xj[None, :, :], axis=2))
            if gap < MIN_GAP_SPACINGS * h:
                raise NearContactError(
                    f"components {i} and {j} are {gap:.3g} apart, below "
                    f"{MIN_GAP_SPACINGS} node spacings ({MIN_GAP_SPACINGS * h:.3g}); "
                    "refusing near-singular quadrature")


def _working_scale(grid: CollocationGrid) -> float:
    lo = grid.nodes.min(axis=0)
    hi = grid.nodes.max(axis=0)
    diam = float(np.hypot(*(hi - lo)))
    return WORKING_DIAMETER / diam


@dataclass(frozen=True)
class NtDOperator:
    """Dense realization of the traction-to-normal-velocity map.

    ``matrix`` maps node samples of g to node samples of u . nu.  The
    weighted form (W N) is symmetric positive semi-definite and annihilates
    the component indicator functions.
    """

    matrix: np.ndarray
    grid: CollocationGrid
    viscosities: tuple
    scale_factor: float
    domain_model: str = "free-space"

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _assemble_matched(grid: CollocationGrid, mu: float, s: float) -> np.ndarray:
    n = grid.size
    N = np.empty((n, n))
    for i, sli in enumerate(grid.slices):
        xi = grid.nodes[sli] * s
        for j, slj in enumerate(grid.slices):
            if i == j:
                N[sli, slj] = _kernels.ntd_self_block(
                    grid.theta[sli], xi, grid.normals[sli],
                    grid.jacobians[sli] * s)
            else:
                N[sli, slj] = _kernels.ntd_cross_block(
                    xi, grid.normals[sli], grid.nodes[slj] * s,
                    grid.normals[slj], grid.jacobians[slj] * s)
    N /= 4.0 * np.pi * mu * s
    return N


def _vector_single_layer(grid: CollocationGrid, s: float) -> np.ndarray:
    """(2n x 2n) single-layer matrix (no prefactor) at working scale,
    interleaved as [x0,y0,x1,y1,...] components."""
    n = grid.size
    S = np.zeros((n, 2, n, 2))
    for i, sli in enumerate(grid.slices):
        th = grid.theta[sli]
        x = grid.nodes[sli] * s
        jac = grid.jacobians[sli] * s
        m = len(th)
        dt = TWO_PI / m
        dx = x[:, None, 0] - x[None, :, 0]
        dy = x[:, None, 1] - x[None, :, 1]
        r2 = dx * dx + dy * dy
        s2 = 4.0 * np.sin((th[:, None] - th[None, :]) / 2.0) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            lnsm = 0.5 * np.log(r2 / s2)
            rxx = dx * dx / r2
            rxy = dx * dy / r2
            ryy = dy * dy / r2
        di = np.arange(m)
        lnsm[di, di] = np.log(jac)
        tx, ty = -grid.normals[sli][:, 1], grid.normals[sli][:, 0]
        rxx[di, di] = tx * tx
        rxy[di, di] = tx * ty
        ryy[di, di] = ty * ty
        wlog = _kernels.log_quadrature_weights(m)
        logw = wlog[np.minimum(np.abs(di[:, None] - di[None, :]),
                               m - np.abs(di[:, None] - di[None, :]))]
        cw = jac[None, :] * dt
        lg = -0.5 * logw * jac[None, :]
        S[sli, 0, sli, 0] = (-lnsm + rxx) * cw + lg
        S[sli, 0, sli, 1] = rxy * cw
        S[sli, 1, sli, 0] = rxy * cw
        S[sli, 1, sli, 1] = (-lnsm + ryy) * cw + lg
        for j, slj in enumerate(grid.slices):
            if i == j:
                continue
            y = grid.nodes[slj] * s
            jacj = grid.jacobians[slj] * s
            mj = slj.stop - slj.start
            ddx = x[:, None, 0] - y[None, :, 0]
            ddy = x[:, None, 1] - y[None, :, 1]
            rr2 = ddx * ddx + ddy * ddy
            lnr = 0.5 * np.log(rr2)
            cwj = jacj[None, :] * (TWO_PI / mj)
            S[sli, 0, slj, 0] = (-lnr + ddx * ddx / rr2) * cwj
            S[sli, 0, slj, 1] = (ddx * ddy / rr2) * cwj
            S[sli, 1, slj, 0] = (ddx * ddy / rr2) * cwj
            S[sli, 1, slj, 1] = (-lnr + ddy * ddy / rr2) * cwj
    return S.reshape(2 * n, 2 * n)


def _double_layer(grid: CollocationGrid, s: float) -> np.ndarray:
    """(2n x 2n) stresslet double-layer matrix K with K u ~ (1/2pi) int u T nu.

    The 2D kernel is smooth on a smooth curve; the diagonal carries the
    continuous limit -2 kappa t t^T.
    """
    n = grid.size
    x = grid.nodes * s
    nu = grid.normals
    w = grid.weights * s
    kappa = -grid.curvature / s
    dxs = x[None, :, 0] - x[:, None, 0]   # source j minus target i
    dys = x[None, :, 1] - x[:, None, 1]
    r2 = dxs * dxs + dys * dys
    rdn = dxs * nu[None, :, 0] + dys * nu[None, :, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = -4.0 * rdn / (r2 * r2)
    K = np.zeros((n, 2, n, 2))
    K[:, 0, :, 0] = c * dxs * dxs
    K[:, 0, :, 1] = c * dxs * dys
    K[:, 1, :, 0] = c * dys * dxs
    K[:, 1, :, 1] = c * dys * dys
    di = np.arange(n)
    tx, ty = -nu[:, 1], nu[:, 0]
    K[di, 0, di, 0] = -2.0 * kappa * tx * tx
    K[di, 0, di, 1] = -2.0 * kappa * tx * ty
    K[di, 1, di, 0] = -2.0 * kappa * ty * tx
    K[di, 1, di, 1] = -2.0 * kappa * ty * ty
    K *= (w[None, None, :, None] / TWO_PI)
    return K.reshape(2 * n, 2 * n)


def _assemble_contrast(grid: CollocationGrid, mu1: float, mu2: float,
                       s: float) -> np.ndarray:
    lam = mu1 / mu2
    beta = (1.0 - lam) / (1.0 + lam)
    n = grid.size
    S = _vector_single_layer(grid, s)
    K = _double_layer(grid, s)
    nu = grid.normals
    idx = np.arange(n)
    # Q: g -> interleaved density g nu;  P: interleaved field -> u . nu
    Q = np.zeros((2 * n, n))
    Q[2 * idx, idx] = nu[:, 0]
    Q[2 * idx + 1, idx] = nu[:, 1]
    rhs_map = (S @ Q) / (TWO_PI * mu2 * (1.0 + lam))
    A = np.eye(2 * n) - beta * K
    U = np.linalg.solve(A, rhs_map)       # (2n, n): velocity per unit g_j
    P = np.zeros((n, 2 * n))
    P[idx, 2 * idx] = nu[:, 0]
    P[idx, 2 * idx + 1] = nu[:, 1]
    return (P @ U) / s


def assemble_ntd(interface: Interface, materials: MaterialParams,
                 m_per_component: int = 128) -> NtDOperator:
    """Assemble the dense traction-to-normal-velocity operator.

    Matched viscosities take the direct single-layer path; a viscosity
    contrast is admitted through the second-kind double-layer equation.
    Raises :class:`NearContactError` when components are closer than
    three node spacings.
    """
    grid = build_grid(interface, m_per_component)
    _check_separation(grid)
    s = _working_scale(grid)
    if materials.mu1 == materials.mu2:
        N = _assemble_matched(grid, materials.mu1, s)
    else:
        N = _assemble_contrast(grid, materials.mu1, materials.mu2, s)
    return NtDOperator(N, grid, (materials.mu1, materials.mu2), s)


def apply_ntd(op: NtDOperator, g: np.ndarray) -> np.ndarray:
    """Normal interface velocity produced by the normal traction jump g."""
    g = np.asarray(g, dtype=float)
    if g.shape != (op.size,):
        raise ValueError(f"g has shape {g.shape}, expected ({op.size},)")
    return op.matrix @ g


def dissipation(op: NtDOperator, g: np.ndarray) -> float:
    """Weighted quadratic form (N g | g)_W = 2 int mu |D(u)|^2.

    The exact kernel directions (component indicators) are deflated before
    evaluation; this changes nothing analytically but keeps the result's
    roundoff proportional to the informative part of g.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (op.size,):
        raise ValueError(f"g has shape {g.shape}, expected ({op.size},)")
    gt = op.grid.deflate_means(g)
    return float(np.dot(op.grid.weights * gt, op.matrix @ gt))


def velocity_field(interface: Interface, materials: MaterialParams,
                   g: np.ndarray, query_points, m_per_component: int = 128
                   ) -> np.ndarray:
    """Off-interface velocity snapshots of the single-layer solution.

    Only matched viscosities are supported; query points must keep at least
    three node spacings of clearance from the interface.
    """
    if materials.mu1 != materials.mu2:
        raise NotImplementedError("off-interface evaluation requires matched "
                                  "viscosities")
    grid = build_grid(interface, m_per_component)
    _check_separation(grid)
    pts = np.atleast_2d(np.asarray(query_points, dtype=float))
    g = np.asarray(g, dtype=float)
    if g.shape != (grid.size,):
        raise ValueError(f"g has shape {g.shape}, expected ({grid.size},)")
    h = grid.max_spacing()
    d = np.min(np.linalg.norm(pts[:, None, :] - grid.nodes[None, :, :], axis=2),
               axis=1)
    if np.any(d < MIN_GAP_SPACINGS * h):
        raise NearContactError("query point within three node spacings of "
                               "the interface")
    s = _working_scale(grid)
    u = _kernels.single_layer_velocity(pts * s, grid.nodes * s, grid.normals,
                                       grid.weights * s, g)
    return u / (4.0 * np.pi * materials.mu1 * s)


def weighted_symmetrized(op: NtDOperator) -> np.ndarray:
    """Symmetric matrix similar to N in the W inner product,
    W^{1/2} N W^{-1/2}, symmetrized against roundoff."""
    sw = np.sqrt(op.grid.weights)
    A = (sw[:, None] * op.matrix) / sw[None, :]
    return 0.5 * (A + A.T)
