"""In-repo special functions against the scipy oracles."""
import numpy as np
import pytest
import scipy.special as sp

from ggfp.special import erf_array, log_gamma, reg_lower_gamma, reg_upper_gamma


def test_log_gamma_accuracy_on_working_range():
    x = np.concatenate([np.linspace(0.1, 50.0, 4000), np.geomspace(0.02, 500.0, 500)])
    ref = sp.gammaln(x)
    err = np.abs(log_gamma(x) - ref) / np.maximum(np.abs(ref), 1.0)
    assert err.max() < 1e-13


def test_log_gamma_integer_values():
    # Gamma(n) = (n-1)!
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(5.0) == pytest.approx(np.log(24.0), rel=1e-14)
    assert log_gamma(0.5) == pytest.approx(0.5 * np.log(np.pi), rel=1e-14)


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        log_gamma(0.0)
    with pytest.raises(ValueError):
        log_gamma(-1.5)


def test_incomplete_gamma_against_scipy():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(2000):
        a = float(np.exp(rng.uniform(np.log(0.05), np.log(40.0))))
        z = float(np.exp(rng.uniform(np.log(1e-6), np.log(200.0))))
        p = reg_lower_gamma(a, z)
        q = reg_upper_gamma(a, z)
        worst = max(
            worst,
            abs(p - sp.gammainc(a, z)) / max(sp.gammainc(a, z), 1e-14),
            abs(q - sp.gammaincc(a, z)) / max(sp.gammaincc(a, z), 1e-14),
        )
    assert worst < 1e-12


def test_incomplete_gamma_complementarity_and_edges():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a = float(rng.uniform(0.1, 20.0))
        z = float(rng.uniform(0.0, 50.0))
        assert reg_lower_gamma(a, z) + reg_upper_gamma(a, z) == pytest.approx(1.0, abs=5e-14)
    assert reg_lower_gamma(2.0, 0.0) == 0.0
    assert reg_upper_gamma(2.0, 0.0) == 1.0
    assert reg_lower_gamma(1.0, 700.0) == pytest.approx(1.0, abs=1e-15)


def test_incomplete_gamma_monotone_in_z():
    zs = np.linspace(0.0, 30.0, 400)
    vals = reg_lower_gamma(3.3, zs)
    assert np.all(np.diff(vals) >= -1e-15)


def test_erf_array_matches_scipy():
    x = np.linspace(-6.0, 6.0, 500)
    assert np.abs(erf_array(x) - sp.erf(x)).max() < 1e-15
    assert erf_array(0.3) == pytest.approx(sp.erf(0.3), rel=1e-15)
