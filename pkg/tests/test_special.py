import mpmath as mp
import pytest

from molconsensus.special import erfc, expint_e1

mp.mp.dps = 40


@pytest.mark.parametrize("x", [0.0, 0.01, 0.3, 1.0, 1.5, 1.9, 2.0, 2.5, 4.0,
                               8.0, 15.0, 25.0, -0.3, -1.0, -3.0])
def test_erfc_against_mpmath(x):
    ref = float(mp.erfc(x))
    assert erfc(x) == pytest.approx(ref, rel=5e-13)


def test_erfc_extremes():
    assert erfc(30.0) == 0.0
    assert erfc(-30.0) == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("x", [1e-8, 1e-4, 0.05, 0.5, 0.999, 1.0, 1.001, 2.0,
                               7.0, 30.0, 200.0])
def test_e1_against_mpmath(x):
    ref = float(mp.e1(x))
    assert expint_e1(x) == pytest.approx(ref, rel=1e-13)


def test_e1_rejects_nonpositive():
    with pytest.raises(ValueError):
        expint_e1(0.0)
    with pytest.raises(ValueError):
        expint_e1(-1.0)
