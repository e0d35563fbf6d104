"""Hot assembly kernels: numba-jitted loops with a pure-numpy fallback.

The backend is selected once at import time from the ``STOKESLAB_BACKEND``
environment variable: ``numba`` (default when importable), ``numpy`` forces
the vectorized fallback.  ``STOKESLAB_THREADS`` caps the numba thread count.

Both backends compute the scalar Neumann-to-Dirichlet blocks
    N_ij = nu_i . [ -I log|x_i - x_j| + rhat rhat^T ] nu_j * w_j / (4 pi mu)
with the periodic log singularity split off and integrated by the exact
spectral product rule (see ``log_quadrature_weights``).
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("STOKESLAB_BACKEND", "auto").strip().lower()
if _env not in ("auto", "numba", "numpy"):
    raise ValueError(f"STOKESLAB_BACKEND must be auto|numba|numpy, got {_env!r}")

_numba_ok = False
if _env in ("auto", "numba"):
    try:
        import numba
        from numba import njit, prange
        _numba_ok = True
    except ImportError:
        if _env == "numba":
            raise
if not _numba_ok:
    numba = None

    def njit(*args, **kwargs):  # no-op decorator fallback
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range

BACKEND = "numba" if _numba_ok else "numpy"

if _numba_ok:
    _threads = os.environ.get("STOKESLAB_THREADS", "").strip()
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads),
                                         numba.config.NUMBA_NUM_THREADS)))


def active_backend() -> str:
    return BACKEND


_LOG_WEIGHT_CACHE: dict[int, np.ndarray] = {}


def log_quadrature_weights(m: int) -> np.ndarray:
    """Weights w[d] with sum_j w[|i-j| mod m] f(t_j) equal to
    int_0^{2pi} log(4 sin^2((t_i - tau)/2)) f(tau) dtau
    exactly for trigonometric polynomials of degree < m/2."""
    if m in _LOG_WEIGHT_CACHE:
        return _LOG_WEIGHT_CACHE[m]
    if m % 2 != 0 or m < 4:
        raise ValueError("node count must be even and >= 4")
    modes = np.arange(1, m // 2)
    d = np.arange(m)
    ang = (2.0 * np.pi / m) * np.outer(d, modes)
    w = -(4.0 * np.pi / m) * (np.cos(ang) / modes).sum(axis=1) \
        - (4.0 * np.pi / m**2) * np.where(d % 2 == 0, 1.0, -1.0)
    w.setflags(write=False)
    _LOG_WEIGHT_CACHE[m] = w
    return w


# ---------------------------------------------------------------------------
# numpy backend

def _self_block_numpy(theta, x, nu, jac, wlog):
    m = len(theta)
    dt = 2.0 * np.pi / m
    dx = x[:, None, 0] - x[None, :, 0]
    dy = x[:, None, 1] - x[None, :, 1]
    r2 = dx * dx + dy * dy
    half = (theta[:, None] - theta[None, :]) / 2.0
    s2 = 4.0 * np.sin(half) ** 2
    nn = nu @ nu.T
    rn_i = (dx * nu[:, None, 0] + dy * nu[:, None, 1])
    rn_j = (dx * nu[None, :, 0] + dy * nu[None, :, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        lnsm = 0.5 * np.log(r2 / s2)
        dyad = rn_i * rn_j / r2
    di = np.arange(m)
    lnsm[di, di] = np.log(jac)
    dyad[di, di] = 0.0  # tangential dyad is orthogonal to the normal
    dmat = np.abs(di[:, None] - di[None, :])
    logw = wlog[np.minimum(dmat, m - dmat)]
    out = (-lnsm * nn + dyad) * (jac[None, :] * dt) \
        - 0.5 * nn * logw * jac[None, :]
    return out


def _cross_block_numpy(xt, nut, xs, nus, jacs):
    ms = xs.shape[0]
    dt = 2.0 * np.pi / ms
    dx = xt[:, None, 0] - xs[None, :, 0]
    dy = xt[:, None, 1] - xs[None, :, 1]
    r2 = dx * dx + dy * dy
    lnr = 0.5 * np.log(r2)
    nn = nut @ nus.T
    rn_i = dx * nut[:, None, 0] + dy * nut[:, None, 1]
    rn_j = dx * nus[None, :, 0] + dy * nus[None, :, 1]
    return (-lnr * nn + rn_i * rn_j / r2) * (jacs[None, :] * dt)


def _velocity_block_numpy(targets, xs, nus, ws, g):
    dx = targets[:, None, 0] - xs[None, :, 0]
    dy = targets[:, None, 1] - xs[None, :, 1]
    r2 = dx * dx + dy * dy
    lnr = 0.5 * np.log(r2)
    q = g[:, None] * nus * ws[:, None]
    ux = (-lnr + dx * dx / r2) @ q[:, 0] + (dx * dy / r2) @ q[:, 1]
    uy = (dx * dy / r2) @ q[:, 0] + (-lnr + dy * dy / r2) @ q[:, 1]
    return np.stack([ux, uy], axis=1)


# ---------------------------------------------------------------------------
# numba backend

if _numba_ok:

    @njit(cache=True, parallel=True)
    def _self_block_numba(theta, x, nu, jac, wlog, out):
        m = theta.shape[0]
        dt = 2.0 * np.pi / m
        for i in prange(m):
            for j in range(m):
                if i == j:
                    out[i, i] = -np.log(jac[i]) * jac[i] * dt \
                        - 0.5 * wlog[0] * jac[i]
                    continue
                dx = x[i, 0] - x[j, 0]
                dy = x[i, 1] - x[j, 1]
                r2 = dx * dx + dy * dy
                s = 2.0 * np.sin((theta[i] - theta[j]) / 2.0)
                lnsm = 0.5 * np.log(r2 / (s * s))
                nn = nu[i, 0] * nu[j, 0] + nu[i, 1] * nu[j, 1]
                rni = dx * nu[i, 0] + dy * nu[i, 1]
                rnj = dx * nu[j, 0] + dy * nu[j, 1]
                d = j - i
                if d < 0:
                    d = -d
                if d > m - d:
                    d = m - d
                out[i, j] = (-lnsm * nn + rni * rnj / r2) * jac[j] * dt \
                    - 0.5 * nn * wlog[d] * jac[j]

    @njit(cache=True, parallel=True)
    def _cross_block_numba(xt, nut, xs, nus, jacs, out):
        mt = xt.shape[0]
        ms = xs.shape[0]
        dt = 2.0 * np.pi / ms
        for i in prange(mt):
            for j in range(ms):
                dx = xt[i, 0] - xs[j, 0]
                dy = xt[i, 1] - xs[j, 1]
                r2 = dx * dx + dy * dy
                lnr = 0.5 * np.log(r2)
                nn = nut[i, 0] * nus[j, 0] + nut[i, 1] * nus[j, 1]
                rni = dx * nut[i, 0] + dy * nut[i, 1]
                rnj = dx * nus[j, 0] + dy * nus[j, 1]
                out[i, j] = (-lnr * nn + rni * rnj / r2) * jacs[j] * dt


def ntd_self_block(theta, x, nu, jac, backend: str | None = None):
    """Same-component scalar NtD block (without the 1/(4 pi mu) prefactor)."""
    wlog = log_quadrature_weights(len(theta))
    b = BACKEND if backend is None else backend
    if b == "numba" and _numba_ok:
        out = np.empty((len(theta), len(theta)))
        _self_block_numba(theta, x, nu, jac, wlog, out)
        return out
    return _self_block_numpy(theta, x, nu, jac, wlog)


def ntd_cross_block(xt, nut, xs, nus, jacs, backend: str | None = None):
    """Smooth cross-component scalar NtD block."""
    b = BACKEND if backend is None else backend
    if b == "numba" and _numba_ok:
        out = np.empty((xt.shape[0], xs.shape[0]))
        _cross_block_numba(xt, nut, xs, nus, jacs, out)
        return out
    return _cross_block_numpy(xt, nut, xs, nus, jacs)


def single_layer_velocity(targets, xs, nus, ws, g):
    """Off-interface single-layer velocity (plain quadrature, no prefactor)."""
    return _velocity_block_numpy(targets, xs, nus, ws, g)
