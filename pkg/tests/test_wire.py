import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import THETA_STAR
from oracles import fit_cylinder, phasor_chord
from wireshape.geom import exp_so3, E3
from wireshape.wire import (ActionProgram, ActionStep, BendLaw, Centerline, WireSpec,
                            apply_bend_law, chord_of, forward_shape, signed_turning, turning)

CHORD_689 = 18.827869650514415  # phasor oracle, l=2, n=10, theta=6.89 deg


def arc_program(wire, n, phi=0.0, beta=1.0, delta=None):
    delta = wire.segment_length if delta is None else delta
    return ActionProgram(wire, tuple(ActionStep(k, phi, beta, delta) for k in range(1, n + 1)))


def const_law(theta):
    return BendLaw.constant(1.0, theta)


# bend law

def test_bend_law_exact_entry():
    assert apply_bend_law(BendLaw(((0.8, 0.1203),)), 0.8) == 0.1203


def test_bend_law_clamps():
    assert apply_bend_law(BendLaw(((0.8, 0.1203),)), 0.2) == 0.1203
    assert apply_bend_law(BendLaw(((0.0, 0.0), (0.5, 0.1))), 1.0) == 0.1


def test_bend_law_linear_midpoint():
    assert apply_bend_law(BendLaw(((0.0, 0.0), (1.0, 0.2))), 0.5) == pytest.approx(0.1, abs=1e-15)


def test_bend_law_rejects_empty_and_unsorted():
    with pytest.raises(ValueError):
        BendLaw(())
    with pytest.raises(ValueError):
        BendLaw(((0.5, 0.1), (0.4, 0.2)))
    with pytest.raises(ValueError):
        BendLaw(((0.1, 0.2), (0.4, 0.1)))


def test_bend_law_inverse():
    law = BendLaw(((0.0, 0.0), (0.5, 0.1), (1.0, 0.3)))
    for theta in (0.0, 0.05, 0.1, 0.2, 0.3):
        assert apply_bend_law(law, law.invert(theta)) == pytest.approx(theta, abs=1e-15)
    assert law.invert(1.0) == 1.0


# data model

def test_wire_invariants():
    with pytest.raises(ValueError):
        WireSpec(n=0)
    with pytest.raises(ValueError):
        WireSpec(segment_length=3.0)  # 30 mm > 20 mm shapeable
    with pytest.raises(ValueError):
        WireSpec(shapeable_length=700.0, total_length=680.0)


def test_step_invariants():
    with pytest.raises(ValueError):
        ActionStep(1, 0.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        ActionStep(1, 0.0, 1.5, 2.0)


def test_program_invariants(wire):
    with pytest.raises(ValueError):
        ActionProgram(wire, (ActionStep(2, 0.0, 1.0, 2.0),))
    with pytest.raises(ValueError):
        arc_program(wire, 10, delta=2.5)
    with pytest.raises(ValueError):
        arc_program(WireSpec(n=3, segment_length=2.0), 4)


def test_roll_increments(wire):
    p = ActionProgram(wire, tuple(ActionStep(k, k * 0.5, 1.0, 2.0) for k in range(1, 5)))
    assert p.roll_increments() == [0.5, 0.5, 0.5, 0.5]


# forward kinematics

def test_straight_wire(wire):
    cl = forward_shape(arc_program(wire, 10), const_law(0.0))
    assert len(cl) == 11
    np.testing.assert_allclose(cl.tip, [0, 0, 20], atol=0)
    np.testing.assert_allclose(cl.points[:, :2], 0.0, atol=0)


def test_unpinched_steps_stay_straight(wire):
    cl = forward_shape(arc_program(wire, 10, beta=0.0), const_law(0.3))
    np.testing.assert_allclose(cl.tip, [0, 0, 20])


def test_c_arc_chord(wire, reported_law):
    cl = forward_shape(arc_program(wire, 10), reported_law)
    assert chord_of(cl) == pytest.approx(CHORD_689, abs=1e-10)
    assert round(chord_of(cl), 2) == 18.83


def test_closed_decagon(wire):
    cl = forward_shape(arc_program(wire, 10), const_law(2 * math.pi / 10))
    assert chord_of(cl) == pytest.approx(0.0, abs=1e-12)


def test_padding_with_unshaped_proximal_segments(wire, law):
    cl = forward_shape(arc_program(wire, 4), law)
    assert len(cl) == wire.n + 1
    # six straight shaft-side segments along e3
    np.testing.assert_allclose(cl.points[:7, :2], 0.0, atol=0)
    assert chord_of(Centerline(cl.points[6:])) == pytest.approx(phasor_chord(2.0, 4, THETA_STAR), abs=1e-12)


def test_bend_direction_convention(wire, law):
    # bending about +e1 swings the tip towards -e2 in the y-z plane
    cl = forward_shape(arc_program(wire, 10), law)
    assert cl.tip[1] < 0
    assert np.all(signed_turning(cl.points, [1, 0, 0]) > 0)


def test_helix_on_cylinder(wire, law):
    steps = tuple(ActionStep(k, k * math.pi / 4, 1.0, 2.0) for k in range(1, 11))
    cl = forward_shape(ActionProgram(wire, steps), law)
    _, _, r, d = fit_cylinder(cl.points)
    assert np.std(d) < 1e-9 * r


def test_arc_mode_constant_bend_lies_on_circle(wire, law):
    cl = forward_shape(arc_program(wire, 10), law, mode="arc")
    pts = cl.points[:, 1:]
    radius = 2.0 / THETA_STAR
    center = np.array([-radius, 0.0])  # y-z plane, arc starts tangent to +z bending to -y
    np.testing.assert_allclose(np.linalg.norm(pts - center, axis=1), radius, atol=1e-10)


def test_unknown_mode(wire, law):
    with pytest.raises(ValueError):
        forward_shape(arc_program(wire, 2), law, mode="spline")


def test_turning_reports_base_joint(wire, law):
    cl = forward_shape(arc_program(wire, 10), law)
    ang, axes = turning(cl.points)
    np.testing.assert_allclose(ang, THETA_STAR, atol=1e-12)
    np.testing.assert_allclose(axes, np.tile([1.0, 0, 0], (10, 1)), atol=1e-12)


# properties

steps_strategy = st.lists(
    st.tuples(st.floats(-7, 7), st.sampled_from([0.0, 0.25, 0.5, 1.0]), st.floats(0.2, 2.0)),
    min_size=1, max_size=10)
law_strategy = st.floats(0.0, 0.6).map(lambda t: BendLaw(((0.0, 0.0), (1.0, t))))


def build(wire, raw):
    return ActionProgram(wire, tuple(ActionStep(k, phi, b, d) for k, (phi, b, d) in enumerate(raw, start=1)))


@settings(max_examples=60, deadline=None)
@given(steps_strategy, law_strategy)
def test_link_lengths_equal_advances(raw, law):
    wire = WireSpec()
    p = build(wire, raw)
    cl = forward_shape(p, law)
    expected = [wire.segment_length] * (wire.n - len(raw)) + [d for _, _, d in reversed(raw)]
    np.testing.assert_allclose(cl.segment_lengths(), expected, atol=1e-12, rtol=0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([0.0, 1.0]), st.floats(0.2, 2.0)), min_size=1, max_size=10),
       law_strategy)
def test_zero_roll_is_planar(raw, law):
    p = build(WireSpec(), [(0.0, b, d) for b, d in raw])
    cl = forward_shape(p, law)
    assert np.all(np.abs(cl.points[:, 0]) < 1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 24), st.floats(0.5, 5.0), st.floats(0, 1))
def test_constant_bend_matches_phasor_chord(n, l, frac):
    theta = frac * 2 * math.pi / n
    wire = WireSpec(segment_length=l, n=n, shapeable_length=n * l, total_length=n * l)
    cl = forward_shape(arc_program(wire, n), const_law(theta))
    assert chord_of(cl) == pytest.approx(phasor_chord(l, n, theta), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(steps_strategy, law_strategy, st.floats(-7, 7))
def test_roll_offset_rotates_centerline(raw, law, c):
    wire = WireSpec()
    a = forward_shape(build(wire, raw), law)
    b = forward_shape(build(wire, [(phi + c, bb, d) for phi, bb, d in raw]), law)
    np.testing.assert_allclose(b.points, a.points @ exp_so3(E3, c).T, atol=1e-10)


def _max_gap(total_turn, length, n):
    l = length / n
    wire = WireSpec(segment_length=l, n=n, shapeable_length=length, total_length=length)
    p = ActionProgram(wire, tuple(ActionStep(k, 1.5 * k / n, 1.0, l) for k in range(1, n + 1)))
    law = const_law(total_turn / n)
    return np.max(np.linalg.norm(forward_shape(p, law).points - forward_shape(p, law, "arc").points, axis=1))


def test_arc_and_rigid_converge_under_refinement():
    gaps = [_max_gap(1.2, 20.0, n) for n in (5, 10, 20, 40, 80)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < gaps[0] / 10
