import numpy as np
import pytest
import scipy.special

from stokeslab.geometry import EquilibriumConfig, GeometryError, MaterialParams
from stokeslab.spectra import (
    Perturbation,
    ThermalConfig,
    a_sigma_eigenvalues,
    a_sigma_matrix,
    analyze_spectrum,
    assemble_linearized,
    second_variation,
    spectrum_of_equilibrium,
    thermal_spectrum,
)

MAT = MaterialParams()
ONE_CIRCLE = EquilibriumConfig((((0.0, 0.0), 1.0),))
TWO_CIRCLES = EquilibriumConfig((((0.0, 0.0), 1.0), ((5.0, 0.0), 1.5)))


def j1_zeros_by_bisection(count):
    """Oracle: positive zeros of J1 by sign-change bisection."""
    zeros = []
    lo = 1.0
    x = lo
    step = 0.05
    f_prev = scipy.special.j1(x)
    while len(zeros) < count:
        x += step
        f = scipy.special.j1(x)
        if f_prev * f < 0:
            a, b = x - step, x
            for _ in range(200):
                mid = 0.5 * (a + b)
                if scipy.special.j1(a) * scipy.special.j1(mid) <= 0:
                    b = mid
                else:
                    a = mid
            zeros.append(0.5 * (a + b))
        f_prev = f
    return np.array(zeros)


class TestASigma:
    def test_paper_convention_values(self):
        vals = dict(a_sigma_eigenvalues(1.0, 3))
        assert vals[0] == -1.0
        assert vals[1] == 0.0
        assert vals[2] == 3.0

    def test_scaling_in_radius(self):
        vals = dict(a_sigma_eigenvalues(2.0, 2))
        assert vals[2] == pytest.approx(3.0 / 4.0)

    def test_node_matrix_multipliers(self):
        m, R = 64, 1.3
        A = a_sigma_matrix(m, R)
        th = 2 * np.pi * np.arange(m) / m
        for k in range(17):
            for g in (np.cos(k * th), np.sin(k * th)):
                if np.allclose(g, 0):
                    continue
                out = A @ g
                lam = out @ g / (g @ g)
                assert lam == pytest.approx((k * k - 1) / R**2, abs=1e-12)
                assert np.max(np.abs(out - lam * g)) < 1e-11


class TestLinearized:
    def test_single_circle_kernel(self):
        L = assemble_linearized(ONE_CIRCLE, MAT, 64)
        th = 2 * np.pi * np.arange(64) / 64
        for g in (np.ones(64), np.cos(th), np.sin(th)):
            assert np.max(np.abs(L @ g)) < 1e-10

    def test_single_circle_gap(self):
        # closed form: L acts on mode k >= 2 as sigma k / (4 mu R)
        rep = spectrum_of_equilibrium(ONE_CIRCLE, MAT, 64)
        assert rep.kernel_dim == 3
        assert rep.semisimple
        assert rep.threshold_stable
        assert rep.spectral_gap == pytest.approx(0.5, rel=1e-10)

    def test_mode_eigenvalues_closed_form(self):
        L = assemble_linearized(ONE_CIRCLE, MAT, 64)
        th = 2 * np.pi * np.arange(64) / 64
        for k in (2, 3, 7):
            g = np.cos(k * th)
            lam = (L @ g) @ g / (g @ g)
            assert lam == pytest.approx(k / 4.0, rel=1e-12)

    def test_two_circle_kernel_dimension(self):
        rep = spectrum_of_equilibrium(TWO_CIRCLES, MAT, 64)
        assert rep.kernel_dim == 6
        assert rep.semisimple
        assert rep.threshold_stable

    def test_stability_signs(self):
        for cfg in (ONE_CIRCLE, TWO_CIRCLES):
            rep = spectrum_of_equilibrium(cfg, MAT, 64)
            scale = np.max(np.abs(rep.eigenvalues))
            # -L must have no positive part beyond threshold, spectrum real
            assert np.min(rep.eigenvalues.real) > -1e-7 * scale
            assert np.max(np.abs(rep.eigenvalues.imag)) < 1e-8 * scale

    def test_sigma_linearity(self):
        L1 = assemble_linearized(ONE_CIRCLE, MAT, 64)
        L2 = assemble_linearized(ONE_CIRCLE, MaterialParams(sigma=2.0), 64)
        assert np.max(np.abs(L2 - 2.0 * L1)) < 1e-14 * np.max(np.abs(L1))

    def test_viscosity_scaling(self):
        L1 = assemble_linearized(ONE_CIRCLE, MAT, 64)
        L2 = assemble_linearized(ONE_CIRCLE, MaterialParams(mu1=2.0, mu2=2.0), 64)
        assert np.allclose(L2, 0.5 * L1, atol=1e-14)


class TestAnalyzeSpectrum:
    def test_synthetic_diagonal(self):
        rep = analyze_spectrum(np.diag([0.0, 0.0, -1.0]))
        assert rep.kernel_dim == 2
        assert rep.semisimple
        assert rep.spectral_gap == pytest.approx(1.0)

    def test_jordan_block_not_semisimple(self):
        L = np.array([[0.0, 1.0, 0], [0, 0, 0], [0, 0, -1.0]])
        rep = analyze_spectrum(L)
        assert not rep.semisimple

    def test_report_serialization_keys(self):
        rep = analyze_spectrum(np.diag([0.0, -1.0]))
        text = rep.to_text()
        for key in ('"eigenvalues"', '"kernel_dim"', '"semisimple"',
                    '"spectral_gap"', '"zero_threshold"', '"resolution"',
                    '"domain_model"'):
            assert key in text
        assert '"free-space"' in text


class TestSecondVariation:
    def test_translation_mode_neutral(self):
        p = Perturbation(0.0, (0.0,), (np.array([0.0, 1.0, 0.0]),))
        value, ok = second_variation(ONE_CIRCLE, p, MAT, theta_star=1.0)
        assert ok
        assert abs(value) < 1e-14

    def test_cos2_value_symbolic_oracle(self):
        import sympy

        th = sympy.symbols("theta")
        h = sympy.cos(2 * th)
        # on the unit circle: -sigma * int ((h + h'') h) dtheta
        oracle = float(-sympy.integrate((h + h.diff(th, 2)) * h,
                                        (th, 0, 2 * sympy.pi)))
        assert oracle == pytest.approx(3 * np.pi)
        p = Perturbation(0.0, (0.0,), (np.array([0.0, 0.0, 0.0, 1.0, 0.0]),))
        value, ok = second_variation(ONE_CIRCLE, p, MAT, theta_star=1.0)
        assert ok
        assert value == pytest.approx(oracle, abs=1e-10)

    def test_constant_h_violates_volume_constraint(self):
        p = Perturbation(0.0, (0.0,), (np.array([0.5]),))
        _, ok = second_variation(ONE_CIRCLE, p, MAT, theta_star=1.0)
        assert not ok

    def test_nonneutral_theta_requires_energy_constraint(self):
        p = Perturbation(0.0, (0.7, -0.7 / (np.pi * 1.5**2) * np.pi),
                         (np.zeros(1), np.zeros(1)))
        value, ok = second_variation(TWO_CIRCLES, p, MAT, theta_star=2.0)
        assert ok  # weighted theta means cancel
        assert value > 0

    def test_random_constrained_nonnegative(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            coeffs = []
            for _c, R in TWO_CIRCLES.circles:
                c = np.zeros(7)
                c[1:] = rng.standard_normal(6)
                coeffs.append(c)
            t1 = rng.standard_normal()
            # solve the energy constraint for the second theta value
            t2 = -t1 * (np.pi * 1.0**2) / (np.pi * 1.5**2)
            p = Perturbation(abs(rng.standard_normal()), (t1, t2),
                             tuple(coeffs))
            value, ok = second_variation(TWO_CIRCLES, p, MAT, theta_star=1.0)
            assert ok
            assert value >= -1e-10


class TestThermal:
    def test_leading_zero_with_constant_mode(self):
        cfg = ThermalConfig(1.0, 2.0, MAT, 64)
        lam, modes = thermal_spectrum(cfg, 4, return_modes=True)
        assert abs(lam[0]) < 1e-12
        v0 = modes[:, 0]
        assert np.max(np.abs(v0 - v0[0])) < 1e-8 * np.abs(v0[0])

    def test_all_real_nonpositive(self):
        cfg = ThermalConfig(0.7, 1.9, MaterialParams(d1=2.0, d2=0.5,
                                                     rho_kappa1=1.5), 48)
        lam = thermal_spectrum(cfg, 10)
        assert np.all(lam <= 1e-10)

    def test_matched_materials_bessel_oracle(self):
        # uniform disk of radius R_out with insulated rim: radial mode-0
        # eigenvalues are -(d/rho kappa) (j_{1,n}/R_out)^2
        R_out = 2.0
        zeros = j1_zeros_by_bisection(3)
        want = -(zeros / R_out) ** 2
        errs = []
        for npts in (32, 64, 128):
            lam = thermal_spectrum(ThermalConfig(1.0, R_out, MAT, npts), 4)
            errs.append(np.abs(lam[1:4] - want))
        errs = np.array(errs)
        assert np.all(errs[-1] < 1e-3)
        order = np.log2(errs[0] / errs[1])
        assert np.all(order > 1.9)

    def test_interface_position_irrelevant_when_matched(self):
        a = thermal_spectrum(ThermalConfig(0.5, 2.0, MAT, 128), 3)
        b = thermal_spectrum(ThermalConfig(1.5, 2.0, MAT, 128), 3)
        assert np.allclose(a, b, atol=1e-4)

    def test_coarse_grid_rejected(self):
        with pytest.raises(GeometryError):
            ThermalConfig(1.0, 2.0, MAT, 8)
