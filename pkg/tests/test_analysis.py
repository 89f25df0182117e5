import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catport.analysis import (
    binary_entropy,
    channel_negativity_report,
    closed_form_emax,
    frame_for_overlap,
    teleportable_entanglement_range,
    teleportable_entropy,
)
from catport.errors import DomainError
from catport.protocols import ChannelSpec
from catport.qstate import KET0, KET1

R_GRID = np.round(np.arange(11) / 10, 10)


def ghz_class_channel(r, eps=0.0):
    f = frame_for_overlap(r, eps)
    return ChannelSpec.ghz_class(f.phi, f.phi_prime)


def test_ghz_channel_is_ppt_on_both_pairs():
    rep = channel_negativity_report(ChannelSpec.ghz())
    assert rep.negativity_AB2 == pytest.approx(0.0, abs=1e-12)
    assert rep.negativity_AB1 == pytest.approx(0.0, abs=1e-12)
    assert not rep.distillable_AB2


def test_half_overlap_negativity():
    rep = channel_negativity_report(ghz_class_channel(0.5))
    assert rep.negativity_AB2 == pytest.approx(0.25, abs=1e-10)
    assert rep.distillable_AB2 and not rep.distillable_AB1


@pytest.mark.parametrize("r", R_GRID)
@pytest.mark.parametrize("eps", [0.0, 1.2])
def test_negativity_grid(r, eps):
    rep = channel_negativity_report(ghz_class_channel(r, eps))
    assert rep.negativity_AB2 == pytest.approx(r / 2, abs=1e-10)
    assert rep.negativity_AB1 == pytest.approx(0.0, abs=1e-10)


def test_negativity_report_needs_two_bobs():
    with pytest.raises(DomainError):
        channel_negativity_report(ChannelSpec.cat((KET0, KET0), (KET1, KET1)))


@pytest.mark.parametrize("p, h", [(0.5, 1.0), (0.0, 0.0), (1.0, 0.0), (0.75, 0.8112781244591328)])
def test_binary_entropy(p, h):
    assert binary_entropy(p) == pytest.approx(h, abs=1e-12)


def test_range_at_r_zero():
    res = teleportable_entanglement_range(frame_for_overlap(0.0))
    assert res.e_max == pytest.approx(1.0, abs=1e-12)
    assert res.argmax_alpha2 == pytest.approx(0.5)


def test_range_at_half_overlap():
    res = teleportable_entanglement_range(frame_for_overlap(0.5))
    assert res.e_max == pytest.approx(0.8112781244591328, abs=1e-9)
    assert res.argmax_alpha2 == pytest.approx(0.5)
    assert res.closed_form == pytest.approx(res.e_max, abs=1e-9)


def test_range_at_r_one():
    res = teleportable_entanglement_range(frame_for_overlap(1.0))
    assert res.e_max == pytest.approx(0.0, abs=1e-12)


def test_range_grid_size_checked():
    with pytest.raises(DomainError):
        teleportable_entanglement_range(frame_for_overlap(0.2), points=50)


def test_brute_force_curve_confirms_closed_form():
    # a fine grid over |alpha|^2 with random overlap phases never exceeds
    # H((1+r)/2), and the balanced real point attains it
    rng = np.random.default_rng(3)
    for r in R_GRID:
        f = frame_for_overlap(r, rng.uniform(-np.pi, np.pi))
        res = teleportable_entanglement_range(f, points=401)
        assert res.e_max == pytest.approx(closed_form_emax(r), abs=1e-6)
        assert res.e_max <= 1 + 1e-9


def test_emax_strictly_decreasing():
    maxima = [teleportable_entanglement_range(frame_for_overlap(r)).e_max for r in R_GRID]
    assert all(b < a for a, b in zip(maxima, maxima[1:]))
    assert [r for r, m in zip(R_GRID, maxima) if abs(m - 1) < 1e-9] == [0.0]


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0, 1), p=st.floats(0, 1))
def test_entropy_bounded_by_closed_form(r, p):
    assert teleportable_entropy(frame_for_overlap(r), p) <= closed_form_emax(r) + 1e-9


def test_overlap_frame_helper():
    f = frame_for_overlap(0.3, 0.7)
    assert f.r == pytest.approx(0.3) and f.epsilon == pytest.approx(0.7)
    np.testing.assert_allclose(f.phi, KET0)
    with pytest.raises(DomainError):
        frame_for_overlap(1.5)
    assert abs(np.vdot(frame_for_overlap(0.0).phi_prime, KET1)) == pytest.approx(1.0)
