"""Star-shaped interface geometry on truncated Fourier radius functions.

A component of the interface is a closed curve given in polar form about a
center, rho(theta) = a0 + sum_k (a_k cos k theta + b_k sin k theta), sampled
on a uniform theta grid.  All differential quantities (normals, curvature)
are evaluated spectrally from the coefficients, so they are exact for the
truncated series.  Sign convention: the unit normal points out of the
dispersed phase, and curvature is negative where the dispersed phase is
convex (a circle of radius R has curvature -1/R).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    """Invalid geometric input (non-star-shaped, overlapping components, ...)."""


@dataclass(frozen=True)
class StarCurve:
    """One closed star-shaped component.

    Parameters
    ----------
    center : array_like, shape (2,)
        Center of the polar parameterization.
    rho_coeffs : array_like, shape (2K+1,)
        Fourier coefficients of the radius, ordered (a0, a1, b1, ..., aK, bK).
    node_count : int
        Number of uniform theta nodes; must satisfy node_count >= 4K + 4 so
        the highest retained mode is dealiased.
    """

    center: np.ndarray
    rho_coeffs: np.ndarray
    node_count: int = 128

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(2)
        coeffs = np.atleast_1d(np.asarray(self.rho_coeffs, dtype=float))
        if coeffs.ndim != 1 or coeffs.size % 2 != 1:
            raise GeometryError("rho_coeffs must be (a0, a1, b1, ..., aK, bK)")
        if not np.all(np.isfinite(center)) or not np.all(np.isfinite(coeffs)):
            raise GeometryError("non-finite geometry input")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "rho_coeffs", coeffs)
        K = (coeffs.size - 1) // 2
        M = int(self.node_count)
        if M < 4 * K + 4:
            raise GeometryError(
                f"node_count {M} too small for K={K}; need at least {4 * K + 4}")
        object.__setattr__(self, "node_count", M)
        rho = self.radius(self.thetas())
        if np.any(rho <= 0.0):
            raise GeometryError("radius must be positive at every node "
                                "(curve is not star-shaped about its center)")

    @property
    def truncation(self) -> int:
        return (self.rho_coeffs.size - 1) // 2

    def thetas(self, m: int | None = None) -> np.ndarray:
        m = self.node_count if m is None else m
        return TWO_PI * np.arange(m) / m

    def radius(self, theta: np.ndarray, derivative: int = 0) -> np.ndarray:
        """Evaluate rho or one of its theta-derivatives at given angles."""
        theta = np.asarray(theta, dtype=float)
        c = self.rho_coeffs
        K = self.truncation
        out = np.full_like(theta, c[0] if derivative == 0 else 0.0)
        for k in range(1, K + 1):
            a, b = c[2 * k - 1], c[2 * k]
            ck, sk = np.cos(k * theta), np.sin(k * theta)
            if derivative == 0:
                out += a * ck + b * sk
            elif derivative == 1:
                out += k * (-a * sk + b * ck)
            elif derivative == 2:
                out += k * k * (-a * ck - b * sk)
            else:
                raise ValueError("derivative order must be 0, 1 or 2")
        return out


def curve_from_circle(center, radius: float, node_count: int = 128,
                      truncation: int = 0) -> StarCurve:
    coeffs = np.zeros(2 * truncation + 1)
    coeffs[0] = radius
    return StarCurve(np.asarray(center, dtype=float), coeffs, node_count)


def curve_from_samples(center, rho_samples: np.ndarray, truncation: int,
                       node_count: int | None = None) -> StarCurve:
    """Fit a StarCurve to radius samples on a uniform grid (least-aliasing
    truncated FFT fit)."""
    rho_samples = np.asarray(rho_samples, dtype=float)
    m = rho_samples.size
    spec = np.fft.rfft(rho_samples) / m
    K = min(truncation, m // 2 - 1)
    coeffs = np.zeros(2 * K + 1)
    coeffs[0] = spec[0].real
    for k in range(1, K + 1):
        coeffs[2 * k - 1] = 2.0 * spec[k].real
        coeffs[2 * k] = -2.0 * spec[k].imag
    return StarCurve(np.asarray(center, dtype=float), coeffs,
                     m if node_count is None else node_count)


def component_frame(curve: StarCurve, m: int | None = None):
    """Node positions, outward normals, jacobian |x'(theta)|, curvature.

    Returns
    -------
    theta, x, nu, jac, curv : arrays with leading dimension m.
        ``curv`` follows the dispersed-phase-convex-negative convention.
    """
    theta = curve.thetas(m)
    rho = curve.radius(theta)
    drho = curve.radius(theta, 1)
    ddrho = curve.radius(theta, 2)
    if np.any(rho <= 0.0):
        raise GeometryError("radius must be positive at every node")
    jac = np.sqrt(rho * rho + drho * drho)
    er = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    et = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    x = curve.center[None, :] + rho[:, None] * er
    nu = (rho[:, None] * er - drho[:, None] * et) / jac[:, None]
    curv = -(rho * rho + 2.0 * drho * drho - rho * ddrho) / jac**3
    return theta, x, nu, jac, curv


def component_points(curve: StarCurve, m: int | None = None) -> np.ndarray:
    theta = curve.thetas(m)
    rho = curve.radius(theta)
    return curve.center[None, :] + rho[:, None] * np.stack(
        [np.cos(theta), np.sin(theta)], axis=1)


def curvature(curve: StarCurve, m: int | None = None) -> np.ndarray:
    """Signed curvature at the theta nodes (circle of radius R gives -1/R)."""
    return component_frame(curve, m)[4]


def enclosed_area(curve: StarCurve) -> float:
    """Area enclosed by the curve, 0.5 * integral rho^2 dtheta.

    The integrand is a trigonometric polynomial of degree 2K < M, so the
    uniform-grid quadrature is exact.
    """
    rho = curve.radius(curve.thetas())
    return 0.5 * float(np.sum(rho * rho)) * TWO_PI / curve.node_count


def arc_length(curve: StarCurve, m: int | None = None) -> float:
    """Curve length by spectrally accurate trapezoid of sqrt(rho^2 + rho'^2)."""
    theta = curve.thetas(m)
    rho = curve.radius(theta)
    drho = curve.radius(theta, 1)
    return float(np.sum(np.sqrt(rho * rho + drho * drho))) * TWO_PI / len(theta)


def isoperimetric_deficit(curve: StarCurve) -> float:
    """Length minus 2 sqrt(pi area), evaluated without cancellation.

    Near circles the naive difference of two O(1) quantities loses all
    significant digits.  Using
        L^2 - 4 pi A = 2 pi * int rho'^2  - 0.5 * double-int (s(a)-s(b))^2
    with s = sqrt(rho^2 + rho'^2) (both terms are the same size as the
    deficit itself), the deficit L - 2 sqrt(pi A) = (L^2 - 4 pi A)/(L + 2
    sqrt(pi A)) stays accurate down to the last decade of a relaxation run.
    """
    theta = curve.thetas()
    m = len(theta)
    rho = curve.radius(theta)
    drho = curve.radius(theta, 1)
    s = np.sqrt(rho * rho + drho * drho)
    dt = TWO_PI / m
    int_dr2 = np.sum(drho * drho) * dt
    diff = s[:, None] - s[None, :]
    int_pairs = np.sum(diff * diff) * dt * dt
    num = TWO_PI * int_dr2 - 0.5 * int_pairs
    length = np.sum(s) * dt
    area = 0.5 * np.sum(rho * rho) * dt
    return float(num / (length + 2.0 * np.sqrt(np.pi * area)))


def hanzawa_delta(R: float, y0: float, y, theta) -> np.ndarray | float:
    """Normal offset placing the reference-circle point at angle theta onto
    the circle of center y and radius R + y0.

    The reference circle has radius R about the origin; the offset point is
    q + delta * nu(q) with q = R (cos theta, sin theta).
    """
    y = np.asarray(y, dtype=float).reshape(2)
    if (R + y0) ** 2 <= float(y @ y):
        raise GeometryError("degenerate target circle: (R + y0)^2 must "
                            "exceed |y|^2")
    theta = np.asarray(theta, dtype=float)
    yY = y[0] * np.cos(theta) + y[1] * np.sin(theta)
    delta = yY - R + np.sqrt(yY * yY + (R + y0) ** 2 - float(y @ y))
    return delta if delta.shape else float(delta)


def young_laplace_jump(R: float, sigma: float, n: int = 2) -> float:
    """Equilibrium pressure jump across a sphere of radius R."""
    if R <= 0 or sigma <= 0 or n < 2:
        raise GeometryError("require R > 0, sigma > 0, n >= 2")
    return -sigma * (n - 1) / R


def _pair_tangent_radii(x_i, nu_i, x_j):
    """Radius of the disk tangent at x_i (normal nu_i) through each x_j.

    For two parallel curve segments at distance d this reduces to d/2; for
    nearby points on a smooth arc it tends to the osculating radius.
    """
    dx = x_j[None, :, :] - x_i[:, None, :]
    dist2 = np.einsum("ijk,ijk->ij", dx, dx)
    proj = np.abs(np.einsum("ijk,ik->ij", dx, nu_i))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = dist2 / (2.0 * proj)
    r[proj <= 1e-300] = np.inf
    return r


def ball_condition_radius(curve: StarCurve, cap: float = np.inf) -> float:
    """Largest r <= cap such that interior and exterior tangent disks of
    radius r touch the curve only at the tangency point.

    Discrete estimate: minimum over (a) osculating radii at the nodes and
    (b) tangent-disk radii |x_i - x_j|^2 / (2 |(x_j - x_i) . nu_i|) over node
    pairs at least two grid steps apart.  Exact on circles (every pair term
    equals R).
    """
    theta, x, nu, jac, curv = component_frame(curve)
    m = len(theta)
    r = min(cap, float(np.min(1.0 / np.abs(curv))))
    pair = _pair_tangent_radii(x, nu, x)
    idx = np.arange(m)
    sep = np.minimum((idx[None, :] - idx[:, None]) % m,
                     (idx[:, None] - idx[None, :]) % m)
    pair[sep < 2] = np.inf
    return min(r, float(pair.min()))


def interface_reach(interface: "Interface", cap: float = np.inf) -> float:
    """Ball-condition radius of the whole interface: per-component reach and
    inter-component tangent-disk clearances."""
    r = min(ball_condition_radius(c, cap) for c in interface.components)
    frames = [component_frame(c) for c in interface.components]
    n = len(frames)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            pair = _pair_tangent_radii(frames[i][1], frames[i][2], frames[j][1])
            r = min(r, float(pair.min()))
    return min(r, cap)


def _point_inside(curve: StarCurve, points: np.ndarray) -> np.ndarray:
    rel = points - curve.center[None, :]
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    return np.hypot(rel[:, 0], rel[:, 1]) < curve.radius(ang)


@dataclass(frozen=True)
class Interface:
    """Ordered collection of pairwise disjoint star-shaped components.

    The unit normal of every component points from the dispersed phase into
    the continuous phase.
    """

    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise GeometryError("interface needs at least one component")
        for c in comps:
            if not isinstance(c, StarCurve):
                raise GeometryError("components must be StarCurve instances")
        object.__setattr__(self, "components", comps)
        pts = [component_points(c) for c in comps]
        for i, ci in enumerate(comps):
            for j, cj in enumerate(comps):
                if i == j:
                    continue
                if np.any(_point_inside(ci, pts[j])):
                    raise GeometryError(
                        f"components {i} and {j} are not disjoint")
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                d = np.min(np.linalg.norm(
                    pts[i][:, None, :] - pts[j][None, :, :], axis=2))
                if d <= 0.0:
                    raise GeometryError(
                        f"components {i} and {j} touch (gap must be positive)")

    @property
    def n_components(self) -> int:
        return len(self.components)

    def total_arc_length(self) -> float:
        return sum(arc_length(c) for c in self.components)

    def volumes(self) -> np.ndarray:
        return np.array([enclosed_area(c) for c in self.components])

    def total_deficit(self) -> float:
        return sum(isoperimetric_deficit(c) for c in self.components)

    def precise_length(self) -> float:
        """Total length as sum of per-component 2 sqrt(pi A) + deficit.

        Identical to the spectral arc length analytically, but the small
        deficit term is carried separately so length differences between
        nearby interfaces stay resolvable far below one ulp of the length.
        """
        return float(sum(2.0 * np.sqrt(np.pi * enclosed_area(c))
                         + isoperimetric_deficit(c)
                         for c in self.components))

    def to_text(self) -> str:
        from .textio import interface_text
        return interface_text(self)

    @classmethod
    def from_text(cls, text: str, node_count: int = 128) -> "Interface":
        from .textio import parse_interface_text
        comps = [StarCurve(center, coeffs, node_count)
                 for center, coeffs in parse_interface_text(text)]
        return cls(tuple(comps))


@dataclass(frozen=True)
class EquilibriumConfig:
    """Finite union of disjoint circles (centers and radii)."""

    circles: tuple

    def __post_init__(self):
        circles = tuple((np.asarray(c, dtype=float).reshape(2), float(r))
                        for c, r in self.circles)
        for _, r in circles:
            if r <= 0:
                raise GeometryError("circle radii must be positive")
        n = len(circles)
        for i in range(n):
            for j in range(i + 1, n):
                ci, ri = circles[i]
                cj, rj = circles[j]
                if np.linalg.norm(ci - cj) <= ri + rj:
                    raise GeometryError(
                        f"closed disks {i} and {j} must be disjoint")
        object.__setattr__(self, "circles", circles)

    @property
    def n_components(self) -> int:
        return len(self.circles)

    def as_interface(self, node_count: int = 128) -> Interface:
        return Interface(tuple(curve_from_circle(c, r, node_count)
                               for c, r in self.circles))

    def manifold_dimension(self, n: int = 2) -> int:
        """Dimension of the local family of nearby equilibria, m (n + 1)."""
        return len(self.circles) * (n + 1)


@dataclass(frozen=True)
class MaterialParams:
    """Surface tension, phase viscosities, and thermal constants."""

    sigma: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    rho_kappa1: float = 1.0
    rho_kappa2: float = 1.0
    d1: float = 1.0
    d2: float = 1.0

    def __post_init__(self):
        for name in ("sigma", "mu1", "mu2", "rho_kappa1", "rho_kappa2",
                     "d1", "d2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise GeometryError(f"material parameter {name} must be "
                                    f"finite and > 0, got {v}")
