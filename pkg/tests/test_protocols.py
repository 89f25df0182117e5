import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catport.errors import ConfigurationError
from catport.locc import validate_locality
from catport.protocol_math import SchmidtFrame, overlap_frame
from catport.protocols import (
    ChannelSpec,
    TeleportInput,
    build_initial_state,
    build_script,
    cat_protocol,
    ghz_class_protocol,
    ghz_protocol,
    min_fidelity,
    probabilistic_protocol,
    success_probability,
)
from catport.qstate import KET0, KET1, entanglement_entropy, schmidt

from conftest import haar_qubit, kron_all

S = 1 / np.sqrt(2)


def random_frame(rng):
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return SchmidtFrame.from_unitary(q)


def random_pair(rng, r=None):
    r = rng.uniform() if r is None else r
    phi = haar_qubit(rng)
    perp = np.array([-phi[1].conjugate(), phi[0].conjugate()])
    return phi, np.exp(1j * rng.uniform(-np.pi, np.pi)) * (r * phi + np.sqrt(1 - r * r) * perp)


def random_cat(rng, n, r=None):
    pairs = [random_pair(rng, r) for _ in range(n - 1)]
    phis, primes = [p for p, _ in pairs], [q for _, q in pairs]
    alpha, beta = haar_qubit(rng)
    inp = TeleportInput(alpha, beta, phis, primes, random_frame(rng))
    chan = ChannelSpec.ghz_class(phis[0], primes[0]) if n == 2 else ChannelSpec.cat(phis, primes)
    return inp, chan


# -- initial state ----------------------------------------------------------


def test_ghz_initial_state_matches_kron(rng):
    f1, f2 = random_frame(rng), random_frame(rng)
    alpha, beta = haar_qubit(rng)
    inp = TeleportInput.schmidt(alpha, beta, f1, f2)
    state, owner = build_initial_state(inp, ChannelSpec.ghz())
    xi = alpha * kron_all(f1.zero, f2.zero) + beta * kron_all(f1.one, f2.one)
    ghz = S * (kron_all(KET0, KET0, KET0) + kron_all(KET1, KET1, KET1))
    assert state.labels == ("1", "2", "A", "B1", "B2")
    np.testing.assert_allclose(state.amplitudes, np.kron(xi, ghz), atol=1e-14)
    assert owner == {"1": "Alice", "2": "Alice", "A": "Alice", "B1": "Bob1", "B2": "Bob2"}


def test_alpha_one_is_product(rng):
    phi, phi_p = random_pair(rng)
    inp = TeleportInput(1, 0, (phi,), (phi_p,))
    state, _ = build_initial_state(inp, ChannelSpec.ghz_class(phi, phi_p))
    assert schmidt(state, ("1", "2"))[1] < 1e-12


def test_cat_channel_with_identical_vectors():
    inp = TeleportInput(1, 0, (KET0, KET0), (KET0, KET0))
    state, owner = build_initial_state(inp, ChannelSpec.cat((KET0, KET0), (KET0, KET0)))
    chan_amps = state.amplitudes.reshape(8, 16)[0]
    expected = np.zeros(16)
    expected[0b0000] = expected[0b1001] = S
    np.testing.assert_allclose(chan_amps, expected, atol=1e-15)
    assert owner["1"] == "Claire1" and owner["3"] == "Alice" and owner["B3"] == "Bob3"


# -- configuration errors ---------------------------------------------------


def test_input_outside_plane_rejected(rng):
    phi, phi_p = random_pair(rng, 0.4)
    inp = TeleportInput(S, S, (phi,), (haar_qubit(rng),))
    with pytest.raises(ConfigurationError, match="teleportable plane"):
        build_script(inp, ChannelSpec.ghz_class(phi, phi_p))


def test_ghz_needs_schmidt_input():
    inp = TeleportInput(S, S, (KET0,), (np.array([S, S]),))
    with pytest.raises(ConfigurationError):
        build_script(inp, ChannelSpec.ghz())


def test_party_count_bounds():
    vs = [KET0] * 8
    with pytest.raises(ConfigurationError, match="2..8"):
        build_script(TeleportInput(1, 0, vs, vs), ChannelSpec.cat(vs, vs))


def test_family_checks(rng):
    inp, chan = random_cat(rng, 3)
    with pytest.raises(ConfigurationError):
        ghz_class_protocol(inp, chan)
    with pytest.raises(ConfigurationError):
        ChannelSpec("ghz-class", (KET0, KET0), (KET1, KET1))
    with pytest.raises(ConfigurationError):
        ChannelSpec("GHZ", (KET0,), (np.array([S, S]),))
    with pytest.raises(ConfigurationError):
        TeleportInput(1, 1, (KET0,), (KET1,))


def test_weighted_channel_needs_probabilistic_entry(rng):
    inp = TeleportInput.schmidt(S, S, random_frame(rng), random_frame(rng))
    with pytest.raises(ConfigurationError):
        ghz_protocol(inp, ChannelSpec.ghz(np.sqrt(0.8), np.sqrt(0.2)))


# -- GHZ protocol -----------------------------------------------------------


def test_ghz_trivial_input():
    inp = TeleportInput.schmidt(1, 0, SchmidtFrame.computational(), SchmidtFrame.computational())
    branches = ghz_protocol(inp)
    reachable = [b for b in branches if b.success]
    assert len(reachable) == 4
    for b in reachable:
        np.testing.assert_allclose(abs(b.final_state.amplitudes), [1, 0, 0, 0], atol=1e-12)


def test_ghz_random_frames(rng):
    for _ in range(20):
        alpha, beta = haar_qubit(rng)
        inp = TeleportInput.schmidt(alpha, beta, random_frame(rng), random_frame(rng))
        branches = ghz_protocol(inp)
        assert min_fidelity(branches) > 1 - 1e-10
        (p5,) = [b for b in branches if b.outcome("alice") == 4]
        assert p5.probability < 1e-12 and not p5.success


def test_ghz_messages_are_two_bits(rng):
    inp = TeleportInput.schmidt(0.6, 0.8, random_frame(rng), random_frame(rng))
    for b in ghz_protocol(inp):
        if b.success:
            assert [m.bit_count for m in b.transcript.messages()] == [2]


# -- ghz-class protocol -----------------------------------------------------


def test_ghz_class_probabilities_at_half_overlap(rng):
    inp, chan = random_cat(rng, 2, r=0.5)
    branches = ghz_class_protocol(inp, chan)
    assert len(branches) == 8
    for b in branches:
        want = 0.25 * (0.75 if b.outcome("claire1") == 0 else 0.25)
        assert b.probability == pytest.approx(want, abs=1e-12)
        assert b.fidelity == pytest.approx(1.0, abs=1e-10)


def test_ghz_class_at_r_zero_like_ghz():
    # orthogonal vectors: every Bell/Claire pair is equally likely and the
    # Bobs recover the state, just as with the GHZ channel
    inp = TeleportInput(0.6, 0.8, (KET0,), (KET1,))
    branches = ghz_class_protocol(inp, ChannelSpec.ghz_class(KET0, KET1))
    assert all(b.probability == pytest.approx(1 / 8) for b in branches)
    assert min_fidelity(branches) > 1 - 1e-10
    ghz = ghz_protocol(TeleportInput.schmidt(0.6, 0.8, SchmidtFrame.computational(), SchmidtFrame.computational()))
    for b in (br for br in ghz if br.success):
        np.testing.assert_allclose(abs(b.final_state.amplitudes), abs(branches[0].final_state.amplitudes), atol=1e-12)


@pytest.mark.parametrize("r", [0.0, 0.3, 1 / np.sqrt(2), 0.95, 1.0])
def test_ghz_class_fixed_overlaps(rng, r):
    inp, chan = random_cat(rng, 2, r=r)
    branches = ghz_class_protocol(inp, chan)
    assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-12)
    for b in branches:
        if b.success:
            assert b.fidelity > 1 - 1e-10
        else:
            assert r == 1.0 and b.probability < 1e-14
        assert validate_locality(b.transcript).ok


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ghz_class_property(seed):
    inp, chan = random_cat(np.random.default_rng(seed), 2)
    assert min_fidelity(ghz_class_protocol(inp, chan)) > 1 - 1e-10


# -- cat protocol -----------------------------------------------------------


def test_cat_n2_equals_ghz_class(rng):
    inp, chan = random_cat(rng, 2)
    a = ghz_class_protocol(inp, chan)
    b = cat_protocol(inp, ChannelSpec.cat(chan.phis, chan.phi_primes))
    assert [x.outcomes for x in a] == [y.outcomes for y in b]
    np.testing.assert_allclose([x.probability for x in a], [y.probability for y in b], atol=1e-15)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x.final_state.amplitudes, y.final_state.amplitudes, atol=1e-12)


def test_cat_n3_orthogonal(rng):
    inp, chan = random_cat(rng, 3, r=0.0)
    branches = cat_protocol(inp, chan)
    assert len(branches) == 16
    assert min_fidelity(branches) > 1 - 1e-10


def test_cat_n5_probabilities_factor(rng):
    inp, chan = random_cat(rng, 5)
    frames = chan.frames()
    branches = cat_protocol(inp, chan)
    assert len(branches) == 64
    for b in branches:
        p = 0.25
        for i, f in enumerate(frames, 1):
            rr = f.r
            p *= (1 + rr) / 2 if b.outcome(f"claire{i}") == 0 else (1 - rr) / 2
        assert b.probability == pytest.approx(p, abs=1e-12)
        assert b.fidelity > 1 - 1e-10


def test_cat_claire_outcomes_independent(rng):
    inp, chan = random_cat(rng, 3)
    branches = cat_protocol(inp, chan)
    f1, f2 = chan.frames()
    p1 = sum(b.probability for b in branches if b.outcome("claire1") == 0)
    p2 = sum(b.probability for b in branches if b.outcome("claire2") == 0)
    both = sum(b.probability for b in branches if b.outcome("claire1") == 0 and b.outcome("claire2") == 0)
    assert p1 == pytest.approx(f1.cos_half**2, abs=1e-12)
    assert both == pytest.approx(p1 * p2, abs=1e-12)


def test_cat_message_costs(rng):
    inp, chan = random_cat(rng, 4)
    for b in cat_protocol(inp, chan):
        msgs = b.transcript.messages()
        assert [(m.sender, m.bit_count) for m in msgs] == [
            ("Alice", 2), ("Claire1", 1), ("Claire2", 1), ("Claire3", 1)
        ]


# -- probabilistic ----------------------------------------------------------


def test_balanced_matches_deterministic(rng):
    inp, chan = random_cat(rng, 2)
    prob = probabilistic_protocol(inp, chan)
    det = ghz_class_protocol(inp, chan)
    assert success_probability(prob) == pytest.approx(1.0, abs=1e-12)
    succ = [b for b in prob if b.success]
    assert [b.outcomes[1:] for b in succ] == [b.outcomes for b in det]


@pytest.mark.parametrize("a2", [0.6, 0.8, 0.99])
@pytest.mark.parametrize("n", [2, 3])
def test_weighted_success_probability(rng, a2, n):
    inp, chan = random_cat(rng, n)
    weighted = ChannelSpec(chan.family, chan.phis, chan.phi_primes, np.sqrt(a2), np.sqrt(1 - a2) * 1j)
    branches = probabilistic_protocol(inp, weighted)
    assert success_probability(branches) == pytest.approx(2 * min(a2, 1 - a2), abs=1e-12)
    assert min_fidelity(branches) > 1 - 1e-10
    failures = [b for b in branches if not b.success and b.probability > 1e-14]
    assert len(failures) == 1
    joint = failures[0].transcript.final_state
    bobs = [l for l in joint.labels if l.startswith("B")]
    assert entanglement_entropy(schmidt(joint, bobs)) < 1e-10


def test_weighted_ghz_channel(rng):
    # a|000> + b|111> through both the GHZ-basis and the Bell+Claire routes
    a, b = np.sqrt(0.8), np.sqrt(0.2)
    inp = TeleportInput.schmidt(0.6, 0.8, random_frame(rng), random_frame(rng))
    out = probabilistic_protocol(inp, ChannelSpec.ghz(a, b))
    assert success_probability(out) == pytest.approx(0.4, abs=1e-12)
    assert min_fidelity(out) > 1 - 1e-10
    inp2 = TeleportInput(0.6, 0.8, (KET0,), (KET1,))
    out2 = probabilistic_protocol(inp2, ChannelSpec.ghz_class(KET0, KET1, a, b))
    assert success_probability(out2) == pytest.approx(0.4, abs=1e-12)
    assert min_fidelity(out2) > 1 - 1e-10


def test_overlap_frame_of_channel(rng):
    inp, chan = random_cat(rng, 2, r=0.25)
    (f,) = chan.frames()
    assert f.r == pytest.approx(0.25)
    assert overlap_frame(chan.phis[0], chan.phi_primes[0]).theta == pytest.approx(f.theta)
