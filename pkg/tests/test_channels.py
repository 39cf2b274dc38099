import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtpalign import densop
from qtpalign.aligned import build_dqtp, rca_from_spherical
from qtpalign.bloch import SIGN_MATRICES
from qtpalign.channels import (
    AffineChannel,
    WernerClass,
    apply_local,
    decompose_perfect_plus_noise,
    depolarizing,
    noise_conditions,
    tetrahedron_cptp,
    werner_feasible,
)
from qtpalign.errors import NotAligned, OutOfRange, SingularChannel
from qtpalign.povm import bell_povm
from qtpalign.protocol import Protocol
from qtpalign.sampling import random_ball, random_channel, random_fano, random_rotation
from qtpalign.states import BellLabel, TwoQubitFano, bell_state, werner_state

IDENTITY = AffineChannel()


def werner_dqtp(s, label=BellLabel.PHI_PLUS):
    return build_dqtp(np.sqrt(s) * label.diagonal, np.zeros(3), s)


def test_apply_local_identity(rng):
    f = random_fano(rng)
    assert apply_local(IDENTITY, IDENTITY, f).allclose(f, atol=0)


def test_apply_local_depolarizing_on_bell():
    q = 0.7
    for label in BellLabel:
        out = apply_local(depolarizing(q), depolarizing(q), bell_state(label))
        assert np.allclose(out.corr, q * q * label.corr, atol=1e-15)
        assert np.allclose(out.r_a, 0) and np.allclose(out.r_b, 0)


def test_apply_local_matches_choi_oracle(rng):
    worst = 0.0
    for _ in range(300):
        ca, cb = random_channel(rng), random_channel(rng)
        f = random_fano(rng)
        fast = apply_local(ca, cb, f).density()
        slow = densop.apply_local_choi(ca.choi(), cb.choi(), f.density())
        worst = max(worst, np.max(np.abs(fast - slow)))
    assert worst < 1e-12


def test_apply_local_with_non_symmetric_lambda():
    # a pure rotation on one side exposes the transpose convention
    o = random_rotation(np.random.default_rng(3))
    rot = AffineChannel(o, np.zeros(3))
    f = TwoQubitFano(r_a=[0.1, 0.2, 0.0], r_b=[0, 0.1, -0.2], corr=np.diag([-0.5, -0.4, -0.3]))
    out = apply_local(rot, IDENTITY, f)
    assert np.allclose(out.r_a, o @ f.r_a) and np.allclose(out.corr, o @ f.corr)
    slow = densop.apply_local_choi(rot.choi(), IDENTITY.choi(), f.density())
    assert np.max(np.abs(out.density() - slow)) < 1e-13


def test_depolarizing():
    assert depolarizing(1).allclose(IDENTITY, atol=0)
    ch = depolarizing(0.81**0.25)
    assert ch.lam[0, 0] == pytest.approx(0.9486832980505138, abs=1e-15)
    assert ch.is_cptp()
    assert depolarizing(-1 / 3).is_cptp()
    with pytest.raises(OutOfRange):
        depolarizing(-0.5)
    assert not AffineChannel(-0.5 * np.eye(3)).is_cptp()
    assert not AffineChannel(2 * np.eye(3)).is_cptp()


def test_from_kraus_amplitude_damping():
    g = 0.3
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
    k1 = np.array([[0, np.sqrt(g)], [0, 0]])
    ch = AffineChannel.from_kraus([k0, k1])
    assert np.allclose(ch.lam, np.diag([np.sqrt(1 - g), np.sqrt(1 - g), 1 - g]), atol=1e-15)
    assert np.allclose(ch.v, [0, 0, g], atol=1e-15)
    assert ch.is_cptp()


@settings(max_examples=400, deadline=None)
@given(st.floats(-1.2, 1.2), st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))
def test_tetrahedron_agrees_with_choi(l1, l2, l3):
    ch = AffineChannel(np.diag([l1, l2, l3]))
    low = densop.hermitian_eigenvalues(ch.choi())[0]
    if abs(low) > 1e-9:
        assert tetrahedron_cptp([l1, l2, l3]) == (low > 0)


def test_cptp_channels_keep_the_ball(rng):
    for _ in range(50):
        ch = random_channel(rng)
        assert ch.is_cptp()
        out = ch.apply(random_ball(rng, 100))
        assert np.all(np.linalg.norm(out, axis=1) <= 1 + 1e-10)


def test_noise_conditions_uncorrelated():
    s = 0.6
    d = depolarizing(s**0.25)
    res = noise_conditions(d, d, d, s, np.zeros(3))
    assert res.ok()


def test_noise_conditions_single_line():
    s = 0.6
    res = noise_conditions(IDENTITY, depolarizing(np.sqrt(s)), IDENTITY, s, np.zeros(3))
    assert res.ok()
    res = noise_conditions(depolarizing(np.sqrt(s)), IDENTITY, depolarizing(np.sqrt(s)), s, np.zeros(3))
    assert res.ok()


def test_noise_conditions_detect_mismatch():
    res = noise_conditions(depolarizing(0.9), IDENTITY, IDENTITY, 0.5, np.zeros(3))
    assert res.product == pytest.approx(0.4 * np.sqrt(3))
    assert not res.ok()


def test_noise_conditions_translation():
    s, r_c = 0.5, np.array([0.1, 0, 0])
    a, b = depolarizing(0.8), depolarizing(0.9)
    v_abar = -s * BellLabel.PHI_PLUS.diagonal * r_c / (0.8 * 0.9)
    abar = AffineChannel(s / (0.8**2 * 0.9) * np.eye(3), v_abar)
    assert noise_conditions(abar, a, b, s, r_c).ok()
    assert noise_conditions(abar, a, b, s, 2 * r_c).translation > 0


def test_noise_conditions_errors():
    with pytest.raises(SingularChannel):
        noise_conditions(IDENTITY, AffineChannel(np.diag([1.0, 0, 1])), IDENTITY, 0.5, [0.1, 0, 0])
    with pytest.raises(ValueError):
        noise_conditions(IDENTITY, AffineChannel(random_rotation(np.random.default_rng(0))), IDENTITY, 0.5, np.zeros(3))


def test_werner_examples():
    case = werner_feasible(0.8, 0.64)
    assert case.classification is WernerClass.UNCORRELATED_POINT and case.classification.feasible
    assert case.p_prime == pytest.approx(0.8)
    case = werner_feasible(0.5, 0.5)
    assert case.classification is WernerClass.CASE_I and case.p_prime == 1
    assert case.polynomial == 0
    assert werner_feasible(-0.2, 0.05).classification is WernerClass.CASE_II
    assert werner_feasible(-0.2, 0.1).classification is WernerClass.INFEASIBLE
    assert werner_feasible(0.3, 0.5).classification is WernerClass.INFEASIBLE
    assert werner_feasible(0.0, 0.5).classification is WernerClass.INFEASIBLE
    assert werner_feasible(0.5, 0.0).classification is WernerClass.INFEASIBLE


def test_werner_p_equals_s_gives_bell_measurement():
    s = 0.7
    p = Protocol(werner_state(BellLabel.PHI_PLUS, s), bell_povm(), SIGN_MATRICES)
    built = werner_dqtp(s)
    # with p = s the POVM states of the Werner protocol are Bell projectors (p' = 1)
    q = build_dqtp(s * BellLabel.PHI_PLUS.diagonal, np.zeros(3), s)
    for a, b in zip(q.povm, p.povm):
        assert a.state.allclose(b.state)
    assert built.resource.allclose(werner_state(BellLabel.PHI_PLUS, np.sqrt(s)))


def werner_oracle(p, s):
    corr = BellLabel.PHI_PLUS.corr
    lows = [densop.hermitian_eigenvalues(TwoQubitFano(corr=x * corr).density())[0] for x in (p, s / p)]
    return min(lows)


def test_werner_against_oracle():
    bad = 0
    for p in np.linspace(-1 / 3, 1, 60):
        for s in np.linspace(0.01, 1, 60):
            if p == 0:
                continue
            low = werner_oracle(p, s)
            if abs(low) <= 1e-10:
                continue
            bad += werner_feasible(p, s).classification.feasible != (low > 0)
    assert bad == 0


@pytest.mark.parametrize("s", [0.05, 0.2, 0.5, 0.9, 1.0])
def test_decompose_werner(s):
    p = werner_dqtp(s)
    dec = decompose_perfect_plus_noise(p)
    q = s**0.25
    for ch in (dec.abar, dec.a, dec.b):
        assert ch.allclose(depolarizing(q), atol=1e-12)
    assert dec.resource().allclose(p.resource, atol=1e-10)
    for a, b in zip(dec.povm_states(), p.povm):
        assert a.allclose(b.state, atol=1e-10)
    assert noise_conditions(dec.abar, dec.a, dec.b, s, np.zeros(3), dec.reference).ok()


def test_decompose_perfect():
    p = Protocol(bell_state(BellLabel.PSI_PLUS), bell_povm(BellLabel.PSI_PLUS), SIGN_MATRICES)
    dec = decompose_perfect_plus_noise(p)
    assert dec.reference is BellLabel.PSI_PLUS
    for ch in (dec.abar, dec.a, dec.b):
        assert ch.allclose(IDENTITY, atol=1e-12)


def test_decompose_anisotropic():
    s, r_d = 0.6, np.array([-0.9, -0.8, -0.85])
    p = build_dqtp(r_d, np.zeros(3), s)
    dec = decompose_perfect_plus_noise(p)
    assert all(ch.is_cptp() for ch in (dec.abar, dec.a, dec.b))
    assert dec.resource().allclose(p.resource, atol=1e-10)
    for a, b in zip(dec.povm_states(), p.povm):
        assert a.allclose(b.state, atol=1e-10)


def test_decompose_with_marginal_reproduces_resource_only():
    s, r_c = 0.8, rca_from_spherical(0.05, np.pi / 2, 0)
    p = build_dqtp([-0.9, -0.9, -0.9], r_c, s)
    dec = decompose_perfect_plus_noise(p)
    assert dec.resource().allclose(p.resource, atol=1e-12)
    assert noise_conditions(dec.abar, dec.a, dec.b, s, r_c, dec.reference).ok()
    # the translation on Alice's line leaves a marginal on the POVM states
    assert np.allclose(dec.povm_states()[0].r_b, r_c)


def test_decompose_rejects():
    wrong = Protocol(bell_state(BellLabel.PHI_PLUS), bell_povm(), (np.eye(3),) * 4)
    with pytest.raises(NotAligned):
        decompose_perfect_plus_noise(wrong)
    rotated = build_dqtp([-0.9, -0.9, -0.9], np.zeros(3), 0.8, o_b=random_rotation(np.random.default_rng(2)))
    with pytest.raises(NotAligned):
        decompose_perfect_plus_noise(rotated)
