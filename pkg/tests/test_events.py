"""Collision detection and shockpeakon data.

Collision times come from zeros of the analytic 1/m1 and 1/m3. The limit
amplitude is checked against total mass minus the spectator mass read off
the direct integration, and the shock strength against an expression in
quantities that stay finite through the collision.
"""

import json

import numpy as np
import pytest

from dppeakons.classify import table_horizon
from dppeakons.closedform import build, formal_values, state_at
from dppeakons.dynamics import Status, integrate
from dppeakons.events import (
    BACKWARD,
    FORWARD,
    CollisionEvent,
    collision_time,
    event_json,
    first_collision,
    pair_functional,
    richardson_limit,
    shock_data,
    shock_limit_formula,
)

from conftest import sig_id, states_for

COLLIDING = [(1, 1, -1), (1, -1, -1), (-1, 1, -1), (1, -1, 1), (-1, -1, 1), (-1, 1, 1)]


def phi(x):
    return np.exp(-x * x)


def dphi(x):
    return -2 * x * np.exp(-x * x)


def events_of(s):
    cf = build(s)
    return cf, [ev for ev in (first_collision(cf, FORWARD), first_collision(cf, BACKWARD)) if ev is not None]


# --- patterns ------------------------------------------------------------


def test_pure_peakons_never_collide():
    for s in states_for((1, 1, 1), 5, seed=111):
        cf = build(s)
        assert first_collision(cf, FORWARD) is None and first_collision(cf, BACKWARD) is None


def test_forward_only_collision():
    for s in states_for((1, 1, -1), 5, seed=112):
        cf = build(s)
        ev = first_collision(cf, FORWARD)
        assert ev is not None and ev.t_c > 0 and ev.pair == (2, 3)
        assert first_collision(cf, BACKWARD) is None


def test_confined_pairs():
    # a large eigenvalue slows the relative motion; search far enough
    for s in states_for((-1, 1, -1), 5, seed=113):
        cf = build(s)
        H = table_horizon(cf.eigenvalues)
        fwd, bwd = first_collision(cf, FORWARD, H), first_collision(cf, BACKWARD, H)
        assert fwd.pair == (2, 3) and fwd.t_c > 0
        assert bwd.pair == (1, 2) and bwd.t_c < 0


def test_mirror_confined_pairs():
    for s in states_for((1, -1, 1), 5, seed=114):
        cf = build(s)
        H = table_horizon(cf.eigenvalues)
        assert first_collision(cf, FORWARD, H).pair == (1, 2)
        assert first_collision(cf, BACKWARD, H).pair == (2, 3)


@pytest.mark.parametrize("sig", COLLIDING, ids=sig_id)
def test_pairs_adjacent_and_times_signed(sig):
    for s in states_for(sig, 5, seed=115):
        _, evs = events_of(s)
        assert evs
        for ev in evs:
            assert ev.pair in ((1, 2), (2, 3))
            assert (ev.t_c > 0) == (ev.direction == FORWARD)
            assert not ev.simultaneous


def test_collision_time_is_a_zero_of_the_outer_mass():
    for s in states_for((1, 1, -1), 3, seed=116) + states_for((1, -1, -1), 3, seed=116):
        cf = build(s)
        tc, pair, _ = collision_time(cf, FORWARD)
        q = cf.q3 if pair == (2, 3) else cf.q1
        scale = np.sum(np.abs(q.c) * np.exp(np.real(q.mu) * tc))
        assert abs(q(tc)) <= 1e-12 * scale
        # and it changes sign there
        assert np.real(q(tc - 1e-9)) * np.real(q(tc + 1e-9)) < 0


def test_unknown_direction():
    cf = build(states_for((1, 1, 1), 1, seed=1)[0])
    with pytest.raises(ValueError):
        collision_time(cf, "sideways")


# --- shock data ----------------------------------------------------------


@pytest.mark.parametrize("sig", COLLIDING, ids=sig_id)
def test_amplitude_is_total_minus_spectator(sig):
    """Oracle: M1 and the spectator mass of the direct integration at its stop."""
    for s in states_for(sig, 3, seed=117):
        cf, evs = events_of(s)
        for ev in evs:
            tr = integrate(s, ev.t_c + np.sign(ev.t_c), mass_cap=np.inf, rtol=1e-12, atol=1e-14)
            assert tr.status == Status.STOPPED_NEAR_COLLISION
            spectator = 2 if ev.pair == (1, 2) else 0
            assert abs(ev.amplitude - (cf.M1 - tr.final.m[spectator])) <= 1e-6


def test_shock_matches_finite_limit_formula():
    for sig in COLLIDING:
        for s in states_for(sig, 5, seed=118):
            cf, evs = events_of(s)
            for ev in evs:
                amp, shock, xc = shock_limit_formula(cf, ev.t_c, ev.pair)
                assert abs(amp - ev.amplitude) <= 1e-8
                assert abs(shock - ev.shock) <= 1e-8 * max(1.0, abs(shock))
                assert abs(xc - ev.x_c) <= 1e-8


def test_shock_data_repeats_event_values():
    cf, (ev, *_) = events_of(states_for((1, 1, -1), 1, seed=119)[0])
    assert shock_data(cf, ev) == (ev.amplitude, ev.shock, ev.x_c)


def test_peakon_antipeakon_pair_has_positive_shock():
    # a peakon running into an antipeakon from the left, tiny spectator
    from dppeakons.spectral import PeakonState

    s = PeakonState([-3.0, 0.0, 0.4], [1e-3, 1.0, -1.0])
    cf = build(s)
    ev = first_collision(cf, FORWARD)
    assert ev.pair == (2, 3)
    assert ev.shock > 0
    v = formal_values(cf, ev.t_c)
    assert abs(ev.amplitude - (cf.M1 - v["m1"])) <= 1e-6


def test_no_triple_collision_at_event():
    for s in states_for((1, 1, -1), 5, seed=121) + states_for((-1, 1, -1), 5, seed=121):
        cf = build(s)
        ev = first_collision(cf, FORWARD)
        assert ev.pair == (2, 3)
        x1 = formal_values(cf, ev.t_c)["x1"]
        assert x1 < ev.x_c


def test_pair_functional_converges_first_order():
    for sig in COLLIDING:
        for s in states_for(sig, 2, seed=122):
            cf, evs = events_of(s)
            for ev in evs:
                limit = ev.amplitude * phi(ev.x_c) - ev.shock * dphi(ev.x_c)
                side = -np.sign(ev.t_c)
                eps = 10.0 ** -np.arange(2, 7)
                err = np.array([abs(pair_functional(cf, ev.t_c + side * e, ev.pair, phi) - limit) for e in eps])
                ratio = err / eps
                assert np.max(ratio) <= 10 * np.min(ratio)
                slope = np.polyfit(np.log10(eps), np.log10(err), 1)[0]
                assert abs(slope - 1) <= 0.1


def test_pair_functional_against_direct_sum():
    """Away from the collision the stable form equals the plain sum."""
    s = states_for((1, -1, 1), 1, seed=123)[0]
    cf = build(s)
    tc = collision_time(cf, FORWARD)[0]
    t = 0.5 * tc
    st = state_at(cf, t)
    direct = st.m[0] * phi(st.x[0]) + st.m[1] * phi(st.x[1])
    assert np.isclose(pair_functional(cf, t, (1, 2), phi), direct, rtol=1e-12)


# --- extrapolation and JSON ---------------------------------------------


def test_richardson_on_a_polynomial():
    best, err, _ = richardson_limit(lambda t: 3.0 + 2 * (1 - t) + (1 - t) ** 2, 1.0, 0.1)
    assert abs(best - 3.0) <= 1e-12 and err <= 1e-10


def test_event_json_layout():
    ev = CollisionEvent(0.5, (2, 3), 0.1, 1.5, -0.25, FORWARD)
    obj = json.loads(event_json(ev))
    assert obj == {"t_c": 0.5, "pair": [2, 3], "x_c": 0.1, "amplitude": 1.5, "shock": -0.25, "direction": FORWARD}
    assert event_json(None) == "null"
