import math

import numpy as np
import pytest
from scipy.integrate import quad

from gravodiff.eos import (
    EosDomainError,
    EosKind,
    EosModel,
    audited_bounds,
    big_p,
    big_p_double_prime,
    big_p_prime,
    d2p_dtheta2,
    dp_dtheta,
    geometric_samples,
    h_primitive,
    pressure,
    structural_audit,
)
from gravodiff.tables import tables_for

MB = EosModel(kind=EosKind.MAXWELL_BOLTZMANN, d=3)
POLY2 = EosModel(kind=EosKind.POLYTROPIC, d=2, p1=1.0)
FD3 = EosModel(kind=EosKind.FERMI_DIRAC, d=3, mu=1.0)


class TestModel:
    def test_fd_p1_is_forced(self):
        for d in (2, 3, 4):
            m = EosModel(kind=EosKind.FERMI_DIRAC, d=d, mu=1.0)
            assert m.p1 == pytest.approx(
                (2.0 / (d + 2.0)) * d ** (2.0 / d), rel=1e-15
            )

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            EosModel(kind=EosKind.MAXWELL_BOLTZMANN, d=5)

    def test_rejects_bad_mu(self):
        with pytest.raises(ValueError):
            EosModel(kind=EosKind.FERMI_DIRAC, mu=-1.0)


class TestBigP:
    def test_maxwell_boltzmann_is_identity(self):
        assert big_p(MB, 2.0) == 2.0
        assert big_p_prime(MB, 17.3) == 1.0
        assert big_p_double_prime(MB, 0.4) == 0.0

    def test_polytropic_power(self):
        assert big_p(POLY2, 3.0) == pytest.approx(9.0, rel=1e-15)
        assert big_p_prime(POLY2, 3.0) == pytest.approx(6.0, rel=1e-15)

    def test_fd_small_z_linear_limit(self):
        z = 1e-6
        assert big_p(FD3, z) / z == pytest.approx(1.0, abs=1e-3)
        assert big_p_prime(FD3, z) == pytest.approx(1.0, abs=1e-3)

    def test_fd_large_z_polytropic_limit(self):
        z = 1e6
        lead = (2.0 / 3.0) * (3.0 * z) ** (2.0 / 3.0)
        assert big_p_prime(FD3, z) == pytest.approx(lead, rel=0.01)

    def test_fd_monotone_convex(self):
        zs = np.geomspace(1e-3, 1e3, 40)
        ps = [big_p(FD3, float(z)) for z in zs]
        assert all(b > a for a, b in zip(ps, ps[1:]))
        pps = [big_p_prime(FD3, float(z)) for z in zs]
        assert all(b > a for a, b in zip(pps, pps[1:]))
        assert all(big_p_double_prime(FD3, float(z)) >= 0.0 for z in zs)

    def test_domain_extension_and_error(self):
        m = EosModel(kind=EosKind.FERMI_DIRAC, d=3, delta=1e-3)
        assert big_p(m, -5e-4) < 0.0  # linear leading term
        # C1 match at zero
        assert big_p_prime(m, -1e-9) == pytest.approx(big_p_prime(m, 1e-9), abs=1e-6)
        with pytest.raises(EosDomainError):
            big_p(m, -2e-3)

    def test_fd_second_derivative_against_finite_difference(self):
        h = 1e-5
        for z in (0.3, 1.0, 7.0):
            fd = (big_p_prime(FD3, z + h) - big_p_prime(FD3, z - h)) / (2.0 * h)
            assert big_p_double_prime(FD3, z) == pytest.approx(fd, rel=1e-5)


class TestSelfSimilarPressure:
    def test_maxwell_boltzmann_reduces_to_theta_n(self):
        assert pressure(MB, 2.0, 3.0) == pytest.approx(6.0, rel=1e-15)
        assert dp_dtheta(MB, 5.0, 2.0) == pytest.approx(5.0, rel=1e-14)
        assert d2p_dtheta2(MB, 5.0, 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_polytropic_theta_independent(self):
        assert pressure(POLY2, 3.0, 7.0) == pytest.approx(9.0, rel=1e-13)
        assert dp_dtheta(POLY2, 3.0, 7.0) == 0.0
        assert d2p_dtheta2(POLY2, 3.0, 7.0) == 0.0

    def test_fd_theta_one_identity(self):
        assert pressure(FD3, 1.0, 1.0) == pytest.approx(big_p(FD3, 1.0), rel=1e-14)

    def test_dp_dtheta_matches_finite_difference(self):
        rng = np.random.default_rng(7)
        h = 1e-5
        for _ in range(30):
            n = float(rng.uniform(0.05, 3.0))
            theta = float(rng.uniform(0.3, 3.0))
            fd = (pressure(FD3, n, theta + h) - pressure(FD3, n, theta - h)) / (
                2.0 * h
            )
            assert dp_dtheta(FD3, n, theta) == pytest.approx(fd, rel=1e-6)

    def test_fd_dp_dtheta_positive_and_convex(self):
        assert dp_dtheta(FD3, 1.0, 1.0) > 0.0
        assert d2p_dtheta2(FD3, 1.0, 1.0) >= 0.0

    def test_d2p_dtheta2_matches_second_difference(self):
        h = 1e-4
        n, theta = 1.0, 1.0
        fd = (
            pressure(FD3, n, theta + h)
            - 2.0 * pressure(FD3, n, theta)
            + pressure(FD3, n, theta - h)
        ) / h**2
        assert d2p_dtheta2(FD3, n, theta) == pytest.approx(fd, rel=1e-4)

    def test_rejects_nonpositive_theta(self):
        with pytest.raises(EosDomainError):
            pressure(MB, 1.0, 0.0)


class TestHPrimitive:
    def test_maxwell_boltzmann_log(self):
        assert h_primitive(MB, 5.0) == pytest.approx(math.log(5.0), rel=1e-15)

    def test_base_point(self):
        for m in (MB, POLY2, FD3):
            assert h_primitive(m, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_fd_against_quadrature(self):
        for z in (0.1, 2.0, 7.3, 40.0):
            ref, _ = quad(lambda s: big_p_prime(FD3, s) / s, 1.0, z, limit=200)
            assert h_primitive(FD3, z) == pytest.approx(ref, rel=1e-8)

    def test_rejects_nonpositive(self):
        with pytest.raises(EosDomainError):
            h_primitive(MB, 0.0)


class TestStructuralAudit:
    def test_maxwell_boltzmann_p0(self):
        bounds = structural_audit(MB, geometric_samples())
        assert bounds.p0 == 1.0

    def test_fd_constants_positive_finite(self):
        for d in (2, 3, 4):
            m = EosModel(kind=EosKind.FERMI_DIRAC, d=d)
            b = structural_audit(m, geometric_samples())
            assert b.p0 > 0.0
            assert math.isfinite(b.B)
            assert b.growth_constant_C == pytest.approx(
                d * b.B**2 / (4.0 * (d + 2.0) * m.p1), rel=1e-14
            )

    def test_sandwich_bounds_hold(self):
        zs = geometric_samples()
        b = audited_bounds(FD3)
        e = 2.0 / 3.0
        for z in zs[::25]:
            z = float(z)
            pp = big_p_prime(FD3, z)
            p = big_p(FD3, z)
            assert max(b.p0, FD3.p1 * z**e) <= pp * (1.0 + 1e-9)
            assert pp <= b.p2 * (1.0 + z**e) * (1.0 + 1e-9)
            assert FD3.p1 * z ** (1.0 + e) <= p * (1.0 + 1e-9)
            assert z * big_p_double_prime(FD3, z) <= b.p3 * (1.0 + z**e) * (1.0 + 1e-9)
            assert pp * z < (1.0 + e) * p

    def test_requires_coverage(self):
        with pytest.raises(ValueError):
            structural_audit(MB, np.geomspace(1e-3, 1e3, 100))


class TestTables:
    def test_fd_matches_exact_path(self):
        tab = tables_for(FD3)
        zs = np.geomspace(1e-6, 1e6, 50) * 1.234
        for z in zs:
            z = float(z)
            assert tab.p(np.array([z]))[0] == pytest.approx(big_p(FD3, z), rel=1e-7)
            assert tab.p_prime(np.array([z]))[0] == pytest.approx(
                big_p_prime(FD3, z), rel=1e-7
            )
            assert tab.h(np.array([z]))[0] == pytest.approx(
                h_primitive(FD3, z), abs=1e-7 * (1 + abs(h_primitive(FD3, z)))
            )

    def test_closed_form_models_are_exact(self):
        tab = tables_for(MB)
        z = np.array([0.0, 0.5, 2.0])
        assert np.allclose(tab.p(z), z)
        assert np.allclose(tab.p_prime(z), 1.0)
        tabp = tables_for(POLY2)
        assert np.allclose(tabp.p(z), z**2)

    def test_edges(self):
        tab = tables_for(FD3)
        assert tab.p(np.array([0.0]))[0] == 0.0
        assert tab.p_prime(np.array([0.0]))[0] == pytest.approx(1.0, abs=1e-6)
        assert np.isfinite(tab.p(np.array([1e12]))[0])
