import pytest

from coupledsir.errors import ParameterError
from coupledsir.params import EpidemicParams


def test_rejects_negative_rate():
    with pytest.raises(ParameterError):
        EpidemicParams(-0.1, 0, 0, 0.1)


def test_rejects_nonpositive_mu_and_alpha():
    with pytest.raises(ParameterError):
        EpidemicParams(0.1, 0, 0, 0.1, mu=0.0)
    with pytest.raises(ParameterError):
        EpidemicParams(0.1, 0, 0, 0.1, alpha=0.0)


def test_balanced_satisfies_constraint():
    for alpha in (0.5, 1.0, 2.0):
        p = EpidemicParams.balanced(beta11=0.04, beta22=0.09, mu=2.0, alpha=alpha)
        assert p.is_balanced()
        p.require_balanced()
        assert p.beta12 == p.beta21


def test_unbalanced_detected_at_1e12():
    p = EpidemicParams(0.04, 0.06, 0.06, 0.09, alpha=1.0)
    assert p.is_balanced()  # 0.04*0.09 == 0.06*0.06 exactly
    q = EpidemicParams(0.04, 0.06 * (1 + 1e-9), 0.06, 0.09, alpha=1.0)
    assert not q.is_balanced()
    with pytest.raises(ParameterError):
        q.require_balanced()


def test_zero_rates_are_balanced():
    assert EpidemicParams(0.0, 0.02, 0.0, 0.15).is_balanced()


def test_taus_divide_by_mu():
    p = EpidemicParams(0.2, 0.1, 0.05, 0.4, mu=2.0)
    assert p.taus() == (0.1, 0.05, 0.025, 0.2)
