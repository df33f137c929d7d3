import json

import pytest

from ringpatrol.agents import (
    FsmAlgorithm,
    FsmSpec,
    KPingPong,
    PingPong,
    PlaceAndSwipe,
    SNAP_BOTH,
    SNAP_CCW_MISSING,
    SNAP_CW_MISSING,
    TargetSelectionError,
    UniformSpread,
    _order_preserving_assignment,
    compute_swipe_set,
    fsm_of,
    placement_route,
    select_targets,
)
from ringpatrol.engine import idle_time, run, visit_log
from ringpatrol.ring import (
    CCW,
    CW,
    ObliviousSchedule,
    is_uniform,
    make_random_schedule,
    random_positions,
    uniform_positions,
)
from ringpatrol.adversaries import fixed_edge_schedule, wave_schedule


# --- ping-pong ---------------------------------------------------------------

def test_pingpong_static_stays_synchronized():
    phases = []
    tr = run(
        PingPong(), None, (0, 3), 30, n=6,
        observer=lambda r, mems, rec: phases.append(mems),
    )
    assert all(m == ("S0", "S0") for m in phases)
    assert idle_time(tr).idle <= 6 - 1  # distinct loopers revisit within n-1


def test_pingpong_first_block_assigns_opposite_phases():
    sched = ObliviousSchedule(n=6, missing={0: 0})
    phases = []
    run(
        PingPong(), sched, (0, 3), 5, n=6,
        observer=lambda r, mems, rec: phases.append(mems),
    )
    assert phases[0] == ("CCW", "CW")
    assert {"CW", "CCW"} == set(phases[-1])


def test_pingpong_rejects_wrong_team_size():
    with pytest.raises(ValueError):
        run(PingPong(), None, (0, 2, 4), 5, n=6)


def test_pingpong_full_coverage_within_n_minus_1_after_bounce():
    n = 8
    sched = ObliviousSchedule(n=n, missing={0: 0})  # one block, then nothing
    tr = run(PingPong(), sched, uniform_positions(n, 2), 120)
    # find a bounce: a round where both phases flip
    log = visit_log(tr)
    for r in range(1, 100):
        a, b = tr.records[r].after
        if min((a - b) % n, (b - a) % n) <= 1:
            window = set()
            for t in range(r + 1, r + n):
                window.update(tr.records[t].after)
            assert window == set(range(n))
            return
    pytest.fail("agents never came within bouncing distance")


# --- swipe sets and target selection -------------------------------------------

def test_swipe_set_static_everything_survives():
    assert compute_swipe_set(ObliviousSchedule(n=10), 3, 4) == set(range(10))


def test_swipe_set_fixed_edge_excludes_crossing_walks():
    sched = fixed_edge_schedule(10, 0)
    assert compute_swipe_set(sched, 0, 4) == {1, 2, 3, 4, 5, 6}


def test_swipe_set_cardinality_floor():
    from ringpatrol.adversaries import wave_schedule

    survivors = compute_swipe_set(wave_schedule(10), 0, 4)
    assert len(survivors) >= 6


def test_select_targets_examples():
    assert select_targets(set(range(10)), 10, 2) == (0, 5)
    assert select_targets({1, 2, 3, 4, 5, 6}, 10, 2) == (1, 6)


def test_select_targets_failure_reported():
    with pytest.raises(TargetSelectionError):
        select_targets({0, 1}, 10, 2)


@pytest.mark.parametrize("n,k", [(10, 2), (11, 2), (12, 3), (9, 4)])
def test_select_targets_never_fails_on_real_windows(n, k):
    h = -(-n // k) - 1
    for seed in range(250):
        sched = make_random_schedule(n, 3 * n, seed)
        survivors = compute_swipe_set(sched, 0, h)
        targets = select_targets(survivors, n, k)
        assert len(targets) == k and is_uniform(n, targets)


# --- placement routing ------------------------------------------------------------

def test_placement_route_static_two_agents():
    sched = ObliviousSchedule(n=10)
    plan, direction, assignment = placement_route((0, 5), (2, 7), sched, 0, 5)
    assert direction == CW
    assert assignment == {0: 2, 1: 7}
    # both arrive after two moves, then hold
    assert plan[0] == (CW, CW) and plan[1] == (CW, CW)
    assert all(m == (0, 0) for m in plan[2:])


def test_placement_route_falls_back_counter_clockwise():
    n = 10
    # wall off the first agent's clockwise exit for the whole window
    sched = fixed_edge_schedule(n, 0)
    plan, direction, assignment = placement_route((0, 5), (2, 7), sched, 0, 5)
    assert direction == CCW
    assert assignment == {0: 7, 1: 2}


def test_assignment_shift_pairing():
    # the two directions' assignments differ by exactly one cyclic notch
    for n, k in ((9, 4), (12, 3), (10, 2), (13, 4)):
        for seed in range(40):
            agents = random_positions(n, k, seed)
            targets = uniform_positions(n, k, seed % n)
            cw = _order_preserving_assignment(agents, targets, n, CW)
            ccw = _order_preserving_assignment(agents, targets, n, CCW)
            ts = sorted(targets)
            for i in cw:
                assert ccw[i] == ts[(ts.index(cw[i]) - 1) % k]


@pytest.mark.parametrize("k", [2, 3, 4])
def test_placement_dichotomy_holds(k):
    """One of the two directional plans always lands within the window."""
    count = 0
    for n in range(8, 17):
        L = -(-n // k)
        for seed in range(30):
            sched = make_random_schedule(n, 4 * L, seed)
            agents = uniform_positions(n, k, seed % n)
            survivors = compute_swipe_set(sched, L, L - 1)
            try:
                targets = select_targets(survivors, n, k)
            except TargetSelectionError:
                continue
            placement_route(agents, targets, sched, 0, L)  # must not raise
            count += 1
    assert count > 200


# --- place-and-swipe -----------------------------------------------------------------

def test_place_and_swipe_static_bound():
    sched = ObliviousSchedule(n=10)
    tr = run(PlaceAndSwipe(sched), sched, uniform_positions(10, 2), 200)
    assert idle_time(tr).worst_gap(0) <= 15


@pytest.mark.parametrize(
    "n,k,make_sched",
    [
        (12, 3, lambda: make_random_schedule(12, 240, 17)),
        (10, 2, lambda: wave_schedule(10)),
    ],
)
def test_place_and_swipe_epoch_invariants(n, k, make_sched):
    L = -(-n // k)
    sched = make_sched()
    algo = PlaceAndSwipe(sched)

    mems = []
    tr = run(
        algo, sched, uniform_positions(n, k), 12 * L,
        observer=lambda r, m, rec: mems.append(m[0]),
    )
    for r, mem in enumerate(mems):
        t = (mem.round - 1 - mem.epoch_anchor) % (2 * L)
        if t == L - 1:  # placement just ended: standing on the chosen targets
            assert tuple(sorted(tr.records[r].after)) == mem.targets
        if t == 2 * L - 1:  # epoch just ended: uniform again
            assert is_uniform(n, tr.records[r].after)


def test_place_and_swipe_arbitrary_start_spreads_fast():
    n = 12
    for seed in range(40):
        sched = make_random_schedule(n, 20 * n, seed)
        tr = run(PlaceAndSwipe(sched), sched, random_positions(n, 2, seed), 8 * n)
        first_uniform = next(
            r for r in range(len(tr.records)) if is_uniform(n, tr.records[r].after)
        )
        assert first_uniform <= n // 2


def test_place_and_swipe_needs_room():
    sched = ObliviousSchedule(n=4)
    with pytest.raises(ValueError):
        run(PlaceAndSwipe(sched), sched, (0, 1, 2, 3), 5, n=4)


# --- k-ping-pong ----------------------------------------------------------------------

def test_kpingpong_static_keeps_sweeping():
    n, k = 12, 4
    tr = run(KPingPong(), None, uniform_positions(n, k), 10 * n, n=n)
    assert idle_time(tr).idle == n // k


def test_kpingpong_partition_alternates_from_blocked_agent():
    n, k = 8, 4
    sched = fixed_edge_schedule(n, 0)
    mems = []
    run(
        KPingPong(), sched, uniform_positions(n, k), 3, n=n,
        observer=lambda r, m, rec: mems.append(m[0]),
    )
    phases = mems[0].phases
    # blocked agent sits on node 0 = agent 0; clockwise ranks alternate C/CC
    assert phases == ("C", "CC", "C", "CC")


def test_kpingpong_membership_swap_at_cut():
    n, k = 8, 4
    sched = fixed_edge_schedule(n, 0)
    log = []
    run(
        KPingPong(), sched, uniform_positions(n, k), 30, n=n,
        observer=lambda r, m, rec: log.append((m[0].phases, rec)),
    )
    swaps = [
        (prev, cur) for (prev, _), (cur, _) in zip(log, log[1:]) if prev != cur
    ]
    assert swaps, "the two groups never exchanged members at the cut"


def test_kpingpong_same_group_never_crosses():
    n, k = 12, 4
    for seed in range(25):
        sched = make_random_schedule(n, 30 * n, seed)
        mems = []
        tr = run(
            KPingPong(), sched, uniform_positions(n, k), 20 * n, n=n,
            observer=lambda r, m, rec: mems.append(m[0]),
        )
        for r in range(1, len(tr.records)):
            if mems[r].stage != "groups" or mems[r - 1].stage != "groups":
                continue
            phases = mems[r - 1].phases
            for phase in ("C", "CC"):
                group = [i for i in range(k) if phases[i] == phase]
                before = sorted((tr.records[r].before[i], i) for i in group)
                after = [tr.records[r].after[i] for _, i in before]
                gaps = [(after[(j + 1) % len(after)] - after[j]) % n for j in range(len(after))]
                assert sum(gaps) == n  # clockwise order of the group preserved


def test_kpingpong_divisible_bound():
    n, k = 12, 4
    for seed in range(25):
        sched = make_random_schedule(n, 30 * n, seed)
        tr = run(KPingPong(), sched, uniform_positions(n, k), 30 * n)
        assert idle_time(tr).worst_gap(2 * n) <= 4 * n // k


def test_kpingpong_rejects_single_agent():
    with pytest.raises(ValueError):
        run(KPingPong(), None, (0,), 5, n=6)


def test_kpingpong_odd_k_respreads_groups():
    n, k = 12, 3
    sched = fixed_edge_schedule(n, 0)
    mems = []
    tr = run(
        KPingPong(), sched, uniform_positions(n, k), 40 * n, n=n,
        observer=lambda r, m, rec: mems.append(m[0]),
    )
    settled = next(r for r, m in enumerate(mems) if m.stage == "groups")
    phases = mems[settled].phases
    for phase, size in (("C", 2), ("CC", 1)):
        group = [i for i in range(k) if phases[i] == phase]
        assert len(group) == size
        assert is_uniform(n, tuple(tr.records[settled].before[i] for i in group))
    bound = 4 * n * k // (k * k - 1) + 4
    assert idle_time(tr).worst_gap(settled) <= bound


# --- uniform spread ---------------------------------------------------------------------

def test_uniform_spread_noop_when_already_uniform():
    n, k = 10, 2
    tr = run(UniformSpread(), None, uniform_positions(n, k), 5, n=n)
    assert all(rec.moves == (0, 0) for rec in tr.records)


def test_uniform_spread_adjacent_pair_static():
    n = 10
    tr = run(UniformSpread(), None, (0, 1), 2 * n, n=n)
    assert any(is_uniform(n, rec.after) for rec in tr.records)


@pytest.mark.parametrize("n,k", [(8, 2), (11, 3), (14, 4), (12, 4)])
def test_uniform_spread_random_cases(n, k):
    for seed in range(40):
        init = random_positions(n, k, 31 * seed + k)
        sched = make_random_schedule(n, 4 * n, seed)
        tr = run(UniformSpread(), sched, init, 2 * n)
        assert is_uniform(n, init) or any(
            is_uniform(n, rec.after) for rec in tr.records
        ), (n, k, seed, init)


@pytest.mark.parametrize(
    "n,init",
    [
        (12, (0, 1, 6, 7)),  # symmetric under rotation by 6
        (8, (0, 3, 4, 7)),  # symmetric under rotation by 4
        (12, (0, 1, 2, 6, 7, 8)),  # three agents per half
        (12, (0, 4, 8)),  # already uniform, three segments
    ],
)
def test_uniform_spread_symmetric_start_without_faults(n, init):
    # rotation-symmetric configuration on a still ring: per-segment placement
    tr = run(UniformSpread(), None, init, 2 * n, n=n)
    assert any(is_uniform(n, rec.after) for rec in tr.records)


def test_uniform_spread_symmetry_broken_mid_flight():
    # a removal while the segment plans are running forces the anchored plan
    n, init = 12, (0, 1, 6, 7)
    sched = ObliviousSchedule(n=n, missing={2: 9})
    tr = run(UniformSpread(), sched, init, 2 * n)
    assert any(is_uniform(n, rec.after) for rec in tr.records)


# --- machine table -----------------------------------------------------------------------

def test_reverse_on_block_arcs():
    spec = fsm_of("reverse-on-block")
    assert spec.states == 2 and spec.initial == 0
    assert spec.arcs[(0, SNAP_BOTH)] == (0, CW)
    assert spec.arcs[(0, SNAP_CW_MISSING)] == (1, CCW)
    assert spec.arcs[(0, SNAP_CCW_MISSING)] == (0, CW)
    assert spec.arcs[(1, SNAP_BOTH)] == (1, CCW)
    assert spec.arcs[(1, SNAP_CCW_MISSING)] == (0, CW)
    assert spec.arcs[(1, SNAP_CW_MISSING)] == (1, CCW)


def test_clockwise_machine_single_state():
    spec = fsm_of("clockwise")
    assert spec.states == 1
    assert all(arc == (0, CW) for arc in spec.arcs.values())


def test_fsm_of_unknown_name():
    with pytest.raises(KeyError):
        fsm_of("zigzag")


def test_fsm_spec_rejects_partial_table():
    with pytest.raises(ValueError, match="non-total"):
        FsmSpec(states=2, initial=0, arcs={(0, SNAP_BOTH): (1, CW)})


def test_fsm_spec_json_round_trip():
    spec = fsm_of("oscillator")
    again = FsmSpec.from_json(spec.to_json())
    assert again == spec
    raw = json.loads(spec.to_json())
    assert {"from", "snapshot", "to", "move"} == set(raw["arcs"][0])


def test_fsm_algorithm_runs_on_local_snapshots():
    tr = run(FsmAlgorithm(fsm_of("reverse-on-block")), fixed_edge_schedule(8, 3),
             (3,), 6, n=8)
    # blocked at once: the machine turns around immediately
    assert tr.records[0].after[0] == 2
