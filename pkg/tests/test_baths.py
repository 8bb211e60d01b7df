import numpy as np
import pytest

from nafdyn import discretize_debye, discretize_ohmic
from nafdyn.units import cm1_to_au


def test_ohmic_single_mode():
    bath = discretize_ohmic(0.1, 1.0, 1)
    assert bath.omegas[0] == pytest.approx(np.log(2.0), abs=1e-14)
    assert bath.couplings[0] == pytest.approx(np.log(2.0) * np.sqrt(0.05), abs=1e-14)


def test_ohmic_midpoint():
    bath = discretize_ohmic(0.4, 2.5, 3)
    # j/(1+Nb) = 1/2 at the middle mode
    assert bath.omegas[1] == pytest.approx(2.5 * np.log(2.0), rel=1e-14)


def test_ohmic_matches_scalar_formula():
    alpha, wc, nb = 0.4, 2.5, 300
    bath = discretize_ohmic(alpha, wc, nb)
    # independent scalar evaluation of the closed formula
    for j in (1, 2, 57, 150, 299, 300):
        w = -wc * np.log(1.0 - j / (1.0 + nb))
        c = w * np.sqrt(alpha * wc / (nb + 1.0))
        assert abs(bath.omegas[j - 1] - w) <= 1e-14 * max(1.0, abs(w))
        assert abs(bath.couplings[j - 1] - c) <= 1e-14 * max(1.0, abs(c))
    assert np.all(np.diff(bath.omegas) > 0)


def test_debye_single_mode_is_cutoff():
    bath = discretize_debye(0.01, 0.37, 1)
    assert bath.omegas[0] == pytest.approx(0.37, rel=1e-14)


def test_debye_fmo_bath():
    lam = cm1_to_au(35.0)
    wc = cm1_to_au(106.14)
    bath = discretize_debye(lam, wc, 100)
    assert bath.nb == 100
    assert np.all(bath.omegas > 0)
    assert np.all(np.diff(bath.omegas) < 0)  # tangent decreases with j
    assert np.all(np.isfinite(bath.couplings))


def test_parameter_validation():
    with pytest.raises(ValueError):
        discretize_ohmic(-0.1, 1.0, 10)
    with pytest.raises(ValueError):
        discretize_ohmic(0.1, 0.0, 10)
    with pytest.raises(ValueError):
        discretize_debye(0.1, 1.0, 0)
