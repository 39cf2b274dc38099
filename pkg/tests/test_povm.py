import numpy as np
import pytest

from qtpalign.aligned import build_dqtp
from qtpalign.bloch import SIGN_MATRICES
from qtpalign.errors import InvalidPovm
from qtpalign.povm import PovmElement, PovmSet, bell_povm, element_positivity, validate_closure
from qtpalign.sampling import random_povm
from qtpalign.states import BellLabel, TwoQubitFano, werner_state


def operators(povm):
    return [e.operator for e in povm]


def test_bell_povm():
    povm = bell_povm()
    assert np.allclose(povm.weights, 0.25)
    assert validate_closure(povm).max == 0
    for e, b in zip(povm, SIGN_MATRICES):
        assert np.array_equal(e.state.corr, b @ BellLabel.PHI_PLUS.corr)
        assert element_positivity(e)
    assert np.allclose(sum(operators(povm)), np.eye(4), atol=1e-15)
    # the four states are the four Bell projectors
    labels = {tuple(np.diag(e.state.corr)) for e in povm}
    assert labels == {tuple(x.diagonal) for x in BellLabel}


def test_truncated_bell_povm():
    povm = PovmSet(bell_povm().elements[:3])
    assert validate_closure(povm).weights == pytest.approx(0.25)


def test_dqtp_closure():
    p = build_dqtp(-np.sqrt(0.8) * np.ones(3), np.zeros(3), 0.8)
    assert validate_closure(p.povm).max < 1e-12
    assert np.allclose(sum(operators(p.povm)), np.eye(4), atol=1e-12)


def test_random_povm_sums_to_identity(rng):
    for n in (2, 4, 7):
        povm = random_povm(rng, n)
        assert validate_closure(povm).max < 1e-12
        assert np.max(np.abs(sum(operators(povm)) - np.eye(4))) < 1e-12
        assert all(element_positivity(e) for e in povm)


def test_weight_bounds():
    with pytest.raises(InvalidPovm):
        PovmElement(0.0, TwoQubitFano())
    with pytest.raises(InvalidPovm):
        PovmElement(1e-15, TwoQubitFano())
    with pytest.raises(InvalidPovm):
        PovmElement(1.5, TwoQubitFano())
    with pytest.raises(InvalidPovm):
        PovmSet(())


def test_element_positivity_detects_overscaled_correlation():
    s, r_d = 0.8, np.array([-0.5, -0.5, -0.5])
    # s / r_d = -1.6 on every axis: not a state
    e = PovmElement(0.25, TwoQubitFano(corr=np.diag(s / r_d)))
    assert not element_positivity(e)


def test_werner_element_in_positive_branch():
    p, s = 0.9, 0.5
    e = PovmElement(0.25, werner_state(BellLabel.PHI_PLUS, s / p))
    assert element_positivity(e)


def test_json_round_trip(rng):
    povm = random_povm(rng, 3)
    back = PovmSet.from_dict(povm.to_dict())
    for a, b in zip(povm, back):
        assert a.weight == b.weight and a.state.allclose(b.state, atol=0)
