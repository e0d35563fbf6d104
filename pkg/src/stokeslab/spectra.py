"""Linearized operators at sphere equilibria and their spectra.

Three blocks are analyzed:

* the curvature-linearization multiplier (k^2 - 1)/R^2 on each circle and
  its node-space realization,
* the interface evolution linearization L = sigma N A on the multi-circle
  collocation grid, whose zero eigenvalue must be semi-simple with
  multiplicity 3 per component (dilation + two translations) and whose
  remaining spectrum must be real and positive for L (stable for -L),
* the decoupled radial thermal transmission eigenproblem, whose spectrum is
  real and non-positive with a constant leading mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .geometry import EquilibriumConfig, GeometryError, MaterialParams
from .stokes import assemble_ntd

TWO_PI = 2.0 * np.pi

#: default relative eigenvalue threshold below which a mode counts as kernel
ZERO_THRESHOLD = 1e-7


def a_sigma_eigenvalues(R: float, k_max: int) -> list[tuple[int, float]]:
    """Multipliers of the constrained curvature linearization on a circle of
    radius R: mode k maps to (k^2 - 1)/R^2 (constants to -1/R^2, the two
    degree-one harmonics to 0)."""
    if R <= 0:
        raise GeometryError("radius must be positive")
    return [(k, (k * k - 1.0) / (R * R)) for k in range(k_max + 1)]


def a_sigma_matrix(m: int, R: float) -> np.ndarray:
    """Node-space realization of the circle multiplier (k^2-1)/R^2 on a
    uniform m-point grid (real symmetric circulant)."""
    k = np.abs(np.fft.fftfreq(m, 1.0 / m))
    mult = (k * k - 1.0) / (R * R)
    A = np.real(np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(m), axis=0),
                            axis=0))
    return 0.5 * (A + A.T)


def assemble_linearized(config: EquilibriumConfig, materials: MaterialParams,
                        m_per_component: int = 64) -> np.ndarray:
    """Dense matrix of the evolution linearization sigma N A at a disjoint
    circle configuration."""
    iface = config.as_interface(m_per_component)
    op = assemble_ntd(iface, materials, m_per_component)
    n = op.size
    A = np.zeros((n, n))
    for (center, radius), sl in zip(config.circles, op.grid.slices):
        A[sl, sl] = a_sigma_matrix(m_per_component, radius)
    return materials.sigma * (op.matrix @ A)


def _rank(mat: np.ndarray, tol: float) -> int:
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv > tol))


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalue summary of a linearized operator."""

    eigenvalues: np.ndarray      # complex, sorted by (re, im)
    kernel_dim: int
    semisimple: bool
    spectral_gap: float
    zero_threshold: float        # relative threshold used
    resolution: int
    threshold_stable: bool       # kernel_dim unchanged at x10 / x0.1
    domain_model: str = "free-space"

    def to_text(self) -> str:
        from .textio import json_like
        doc = {
            "eigenvalues": [[float(ev.real), float(ev.imag)]
                            for ev in self.eigenvalues],
            "kernel_dim": self.kernel_dim,
            "semisimple": self.semisimple,
            "spectral_gap": self.spectral_gap,
            "zero_threshold": self.zero_threshold,
            "resolution": self.resolution,
            "domain_model": self.domain_model,
        }
        return json_like(doc) + "\n"


def analyze_spectrum(L: np.ndarray, zero_threshold: float = ZERO_THRESHOLD,
                     resolution: int = 0) -> SpectrumReport:
    """Full dense eigenanalysis of L with kernel counting and a
    semi-simplicity certificate rank(L) == rank(L^2).

    ``zero_threshold`` is relative to the largest eigenvalue magnitude.  The
    kernel count is re-checked at ten times and one tenth of the threshold;
    a disagreement flags under-resolution in ``threshold_stable``.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("expected a square matrix")
    try:
        ev = scipy.linalg.eigvals(L)
    except scipy.linalg.LinAlgError as exc:   # pragma: no cover
        raise RuntimeError("dense eigensolver failed to converge") from exc
    order = np.lexsort((ev.imag, ev.real))
    ev = ev[order]
    scale = float(np.max(np.abs(ev))) if len(ev) else 0.0

    def kdim(rel):
        return int(np.sum(np.abs(ev) <= rel * scale))

    kernel_dim = kdim(zero_threshold)
    stable = kdim(10 * zero_threshold) == kernel_dim == kdim(0.1 * zero_threshold)
    nonzero = np.abs(ev) > zero_threshold * scale
    gap = float(np.min(np.abs(ev[nonzero].real))) if nonzero.any() else 0.0
    smax = float(np.linalg.svd(L, compute_uv=False)[0])
    semi = _rank(L, zero_threshold * smax) == \
        _rank(L @ L, (zero_threshold * smax) ** 2)
    return SpectrumReport(ev, kernel_dim, semi, gap, zero_threshold,
                          resolution, stable)


def spectrum_of_equilibrium(config: EquilibriumConfig,
                            materials: MaterialParams,
                            m_per_component: int = 64,
                            zero_threshold: float = ZERO_THRESHOLD
                            ) -> SpectrumReport:
    L = assemble_linearized(config, materials, m_per_component)
    return analyze_spectrum(L, zero_threshold, resolution=m_per_component)


# ---------------------------------------------------------------------------
# constrained second variation at an equilibrium

@dataclass(frozen=True)
class Perturbation:
    """Finite section of an equilibrium perturbation.

    v_squared is the already-integrated weighted kinetic term
    int rho |v|^2 >= 0; theta_values holds one relative-temperature constant
    per dispersed component (zero in the continuous phase); h_coeffs holds
    per-component Fourier coefficients (a0, a1, b1, ...) of the normal
    displacement.
    """

    v_squared: float
    theta_values: tuple
    h_coeffs: tuple

    def __post_init__(self):
        if self.v_squared < 0:
            raise ValueError("v_squared must be non-negative")


def _surface_moment(coeffs: np.ndarray, R: float) -> float:
    """int_Gamma h dGamma for h given by Fourier coefficients on a circle."""
    return TWO_PI * R * float(coeffs[0])


def _h_quad_form(coeffs: np.ndarray, R: float) -> float:
    """-int_Gamma (H' h) h dGamma = (1/R) [ -2 pi a0^2
    + pi sum_j (j^2 - 1)(a_j^2 + b_j^2) ] on a circle of radius R."""
    a0 = coeffs[0]
    total = -TWO_PI * a0 * a0
    K = (len(coeffs) - 1) // 2
    for j in range(1, K + 1):
        aj, bj = coeffs[2 * j - 1], coeffs[2 * j]
        total += np.pi * (j * j - 1.0) * (aj * aj + bj * bj)
    return total / R


def second_variation(config: EquilibriumConfig, perturbation: Perturbation,
                     materials: MaterialParams, theta_star: float,
                     rho_eps_jump: float = 0.0,
                     tol: float = 1e-10) -> tuple[float, bool]:
    """Evaluate the constrained second variation of the entropy-type
    functional at a sphere equilibrium.

    Returns the form value
        int rho |v|^2 + int (rho kappa / theta) theta'^2
        - sigma sum_k int (H'_k h_k) h_k
    (closed-form on Fourier modes) and whether the perturbation satisfies
    the volume constraints int h_k = 0 and the energy constraint
    int rho kappa theta' = sum_k (rho-eps-jump + sigma H_k) int h_k.
    """
    if theta_star <= 0:
        raise ValueError("theta_star must be positive")
    m = config.n_components
    if len(perturbation.theta_values) != m or len(perturbation.h_coeffs) != m:
        raise ValueError("perturbation must carry one theta value and one "
                         "coefficient block per component")
    value = float(perturbation.v_squared)
    kM_ok = True
    energy_lhs = 0.0
    energy_rhs = 0.0
    for (center, R), theta_k, coeffs in zip(config.circles,
                                            perturbation.theta_values,
                                            perturbation.h_coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        disk_area = np.pi * R * R
        value += materials.rho_kappa1 * disk_area * theta_k ** 2 / theta_star
        value += materials.sigma * _h_quad_form(coeffs, R)
        moment = _surface_moment(coeffs, R)
        if abs(moment) > tol:
            kM_ok = False
        energy_lhs += materials.rho_kappa1 * disk_area * theta_k
        H_k = -1.0 / R
        energy_rhs += (rho_eps_jump + materials.sigma * H_k) * moment
    kE_ok = abs(energy_lhs - energy_rhs) <= tol
    return value, (kM_ok and kE_ok)


# ---------------------------------------------------------------------------
# radial thermal transmission eigenproblem (azimuthal mode 0)

@dataclass(frozen=True)
class ThermalConfig:
    """Radial two-phase disk: dispersed phase on (0, R), continuous phase on
    (R, R_out), insulated outer rim."""

    R: float
    R_out: float
    materials: MaterialParams
    grid_points: int = 64

    def __post_init__(self):
        if not (0 < self.R < self.R_out):
            raise GeometryError("require 0 < R < R_out")
        if self.grid_points < 16:
            raise GeometryError("need at least 16 grid points per region")


def _thermal_matrices(config: ThermalConfig):
    """Second-order conservation-form discretization of the radial operator.

    Nodes are uniform in each region with the interface r = R shared; the
    row at the interface balances the one-sided fluxes d_i r theta', which
    enforces flux continuity, while the shared unknown enforces temperature
    continuity.  Both matrices are symmetric tridiagonal; the stiffness has
    exactly zero row sums, so the constant mode is an exact eigenvector.
    """
    n1 = config.grid_points
    n2 = config.grid_points
    r = np.concatenate([np.linspace(0.0, config.R, n1 + 1),
                        np.linspace(config.R, config.R_out, n2 + 1)[1:]])
    dvals = np.concatenate([np.full(n1, config.materials.d1),
                            np.full(n2, config.materials.d2)])
    rkvals = np.concatenate([np.full(n1, config.materials.rho_kappa1),
                             np.full(n2, config.materials.rho_kappa2)])
    npts = len(r)
    A = np.zeros((npts, npts))
    B = np.zeros((npts, npts))
    for e in range(npts - 1):
        h = r[e + 1] - r[e]
        rmid = 0.5 * (r[e] + r[e + 1])
        kloc = dvals[e] * rmid / h
        A[e, e] += kloc
        A[e + 1, e + 1] += kloc
        A[e, e + 1] -= kloc
        A[e + 1, e] -= kloc
        # consistent mass with the r weight, element-linear
        c = rkvals[e] * h / 12.0
        B[e, e] += c * (3.0 * r[e] + r[e + 1])
        B[e + 1, e + 1] += c * (r[e] + 3.0 * r[e + 1])
        B[e, e + 1] += c * (r[e] + r[e + 1])
        B[e + 1, e] += c * (r[e] + r[e + 1])
    return A, B


def thermal_spectrum(config: ThermalConfig, n_eigs: int = 8,
                     return_modes: bool = False):
    """Largest eigenvalues of the radial thermal transmission problem.

    All eigenvalues are real and non-positive; the leading one is zero with
    a constant eigenfunction.  Returns them sorted descending; with
    ``return_modes`` also the eigenvectors (columns).
    """
    A, B = _thermal_matrices(config)
    w, v = scipy.linalg.eigh(A, B)
    lam = -w
    order = np.argsort(lam)[::-1]
    lam = lam[order][:n_eigs]
    if return_modes:
        return lam, v[:, order][:, :n_eigs]
    return lam
