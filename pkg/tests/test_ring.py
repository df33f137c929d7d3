import json

import pytest
from hypothesis import given, strategies as st

from ringpatrol.ring import (
    CCW,
    CW,
    STAY,
    ObliviousSchedule,
    ScheduleError,
    apply_round,
    arc_distance,
    check_initial_configuration,
    is_uniform,
    make_random_schedule,
    ring_distance,
    take_snapshot,
    uniform_gaps,
    uniform_positions,
    validate_schedule,
)
from ringpatrol.adversaries import wave_schedule


def test_ring_topology_edge_naming():
    from ringpatrol.ring import RingTopology

    ring = RingTopology(6)
    assert ring.cw_of(5) == 0 and ring.ccw_of(0) == 5
    assert ring.cw_edge_of(5) == 5 and ring.ccw_edge_of(0) == 5
    with pytest.raises(ValueError):
        RingTopology(2)


def test_ring_distance_examples():
    assert ring_distance(10, 0, 5, CW) == 5
    assert ring_distance(10, 2, 9, CW) == 7
    assert ring_distance(7, 3, 3, CCW) == 0


def test_ring_distance_rejects_bad_nodes():
    with pytest.raises(ValueError):
        ring_distance(5, 0, 5, CW)


@given(st.integers(3, 40), st.data())
def test_ring_distance_directions_sum_to_n(n, data):
    u = data.draw(st.integers(0, n - 1))
    v = data.draw(st.integers(0, n - 1))
    cw = ring_distance(n, u, v, CW)
    ccw = ring_distance(n, u, v, CCW)
    if u == v:
        assert cw == ccw == 0
    else:
        assert cw + ccw == n
    assert arc_distance(n, u, v) == min(cw, ccw)


def test_validate_schedule_static_ok():
    assert validate_schedule(ObliviousSchedule(n=10), horizon=100) is None


def test_schedule_file_with_two_edges_in_one_round_rejected():
    raw = json.dumps(
        {
            "n": 8,
            "period": None,
            "missing": [{"round": 3, "edge": 2}, {"round": 3, "edge": 5}],
        }
    )
    with pytest.raises(ScheduleError, match="round 3"):
        ObliviousSchedule.from_json(raw)


def test_validate_schedule_flags_bad_edge_index():
    sched = ObliviousSchedule(n=6, missing={4: 6})
    report = validate_schedule(sched, 10)
    assert report is not None and "round 4" in report


def test_wave_schedule_validates():
    assert validate_schedule(wave_schedule(10), horizon=64) is None


def test_schedule_json_round_trip():
    sched = make_random_schedule(9, 40, seed=5)
    again = ObliviousSchedule.from_json(sched.to_json())
    assert again.n == sched.n and again.missing == sched.missing


def test_periodic_schedule_wraps():
    sched = ObliviousSchedule(n=6, missing={1: 4}, period=3)
    assert [sched.missing_edge(r) for r in range(7)] == [
        None, 4, None, None, 4, None, None,
    ]


def test_apply_round_examples():
    pos, blocked = apply_round((0, 3), (CW, CW), 6, None)
    assert pos == (1, 4) and blocked == (False, False)

    pos, blocked = apply_round((0, 3), (CW, CW), 6, 0)
    assert pos == (0, 4) and blocked == (True, False)

    pos, blocked = apply_round((2, 3), (CW, CCW), 6, 2)
    assert pos == (2, 3) and blocked == (True, True)


@given(
    st.integers(3, 20),
    st.data(),
)
def test_apply_round_invariants(n, data):
    k = data.draw(st.integers(1, min(n, 5)))
    positions = tuple(data.draw(st.lists(
        st.integers(0, n - 1), min_size=k, max_size=k)))
    moves = tuple(data.draw(st.lists(
        st.sampled_from([CCW, STAY, CW]), min_size=k, max_size=k)))
    missing = data.draw(st.one_of(st.none(), st.integers(0, n - 1)))
    after, blocked = apply_round(positions, moves, n, missing)
    assert all(0 <= p < n for p in after)
    for p, m, q, b in zip(positions, moves, after, blocked):
        if b:
            assert q == p and m != STAY
        else:
            assert q == (p + m) % n


@given(st.integers(3, 20), st.integers(0, 19))
def test_all_clockwise_blocks_at_most_one(n, e):
    e = e % n
    positions = tuple(range(n))
    _, blocked = apply_round(positions, (CW,) * n, n, e)
    assert sum(blocked) == 1


def test_take_snapshot_examples():
    snap = take_snapshot((0, 0, 4), 8, None, 1, "local")
    assert snap.agents_here == 2 and snap.cw_present and snap.ccw_present

    snap = take_snapshot((0, 3), 8, 2, 0, "local")
    assert snap.agents_here == 1 and snap.cw_present and snap.ccw_present

    snap = take_snapshot((0, 3), 8, 2, 1, "global")
    assert snap.positions == (0, 3)
    assert snap.missing_edge == 2 and snap.own_index == 1
    assert snap.own_position == 3


def test_local_snapshot_reports_missing_side():
    snap = take_snapshot((4,), 8, 4, 0, "local")
    assert not snap.cw_present and snap.ccw_present
    snap = take_snapshot((4,), 8, 3, 0, "local")
    assert snap.cw_present and not snap.ccw_present


def test_uniform_positions_and_gaps():
    assert uniform_positions(10, 2) == (0, 5)
    assert uniform_gaps(9, 2) == [5, 4]
    assert uniform_positions(9, 2) == (0, 5)
    assert is_uniform(12, (0, 3, 6, 9))
    assert is_uniform(9, (1, 4, 7))
    assert not is_uniform(9, (1, 4, 6))  # gaps 3,2,4
    assert is_uniform(9, (0, 5))  # gaps 5,4 both allowed when k does not divide n


def test_initial_configuration_must_be_injective():
    with pytest.raises(ValueError):
        check_initial_configuration(6, (1, 1))
    check_initial_configuration(6, (0, 3))
