"""Lower-bound schedule constructions and adaptive adversaries.

Adaptive adversaries implement ``decide(round, positions, memories)`` and may
dry-run the algorithm's step function on hypothetical snapshots (the engine
hands them the algorithm via ``bind``).  They remove at most one edge per
round and are deterministic, so runs against them replay exactly.
"""

from __future__ import annotations

from typing import Optional

from .ring import CW, CCW, STAY, ObliviousSchedule, take_snapshot


def fixed_edge_schedule(n: int, e: int) -> ObliviousSchedule:
    """Remove the same edge forever, turning the ring into a line."""
    if not (0 <= e < n):
        raise ValueError(f"edge {e} out of range for n={n}")
    return ObliviousSchedule(n=n, missing={0: e}, period=1)


def wave_schedule(n: int) -> ObliviousSchedule:
    """Periodic schedule whose removals sweep from the two adjacent start
    nodes (n-1 and 0) out to the antipodal end nodes and back.

    With start nodes 0 and n-1, the up-edges are 0..n/2-2 (clockwise side)
    and the down-edges are n-2 down to n/2 (counter-clockwise side); edge
    ``n-1`` between the start nodes and edge ``n/2-1`` between the end nodes
    are never removed.  Up-edges occupy all even rounds of the period, one
    sweeping outwards and one back; down-edges fill the odd rounds.
    """
    if n % 2 != 0 or n < 10:
        raise ValueError(f"wave schedule needs even n >= 10, got {n}")
    half = n // 2
    period = 4 * (half - 1)
    missing: dict[int, int] = {}

    def put(r: int, e: int) -> None:
        r %= period
        if r in missing:
            raise AssertionError(f"round {r} assigned twice ({missing[r]} and {e})")
        missing[r] = e

    for i in range(half - 1):
        up = i  # edge at clockwise distance i from node 0
        down = (n - 2 - i) % n  # edge at ccw distance i from node n-1
        put(2 * i, up)
        put(period - 2 * (i + 1), up)
        put(period - (2 * i + 1), down)
    # outbound wave on the counter-clockwise side: round 0 already removes
    # the first up-edge, so the first down-edge crossing cannot be blocked;
    # the wave instead catches that walker at its second step and paces it
    # from there (one edge ahead of the literal mirror of the up side)
    for j in range(half - 2):
        put(2 * j + 1, (n - 3 - j) % n)
    return ObliviousSchedule(n=n, missing=missing, period=period)


WAVE_START_A = 0  # home node for the wave lower-bound experiment


def wave_start_positions(n: int) -> tuple[int, int]:
    """The adjacent starting pair used with wave_schedule."""
    return (0, n - 1)


class TrapAdversary:
    """Confine one agent to its starting node and that node's clockwise
    neighbour by removing whichever edge would let it leave.

    The prediction dry-runs the target's step with no edge removed; removing
    the predicted escape edge can change the target's decision, but both
    remaining choices stay inside the two-node prison.
    """

    def __init__(self, target_agent: int = 0):
        self.target = target_agent
        self.prison: Optional[tuple[int, int]] = None
        self._algorithm = None
        self._n = None

    def bind(self, algorithm, n: int, k: int) -> None:
        self._algorithm = algorithm
        self._n = n

    def _dry_run_move(self, positions, memories, missing):
        snap = take_snapshot(
            positions, self._n, missing, self.target,
            getattr(self._algorithm, "visibility", "global"),
        )
        _, move = self._algorithm.step(self.target, memories[self.target], snap)
        return move

    def decide(self, r: int, positions, memories) -> Optional[int]:
        n = self._n
        pos = positions[self.target]
        if self.prison is None:
            self.prison = (pos, (pos + 1) % n)
        move = self._dry_run_move(positions, memories, None)
        lo, hi = self.prison
        if pos == lo and move == CCW:
            return (lo - 1) % n
        if pos == hi and move == CW:
            return hi
        return None


def trap_adversary(target_agent: int = 0) -> TrapAdversary:
    return TrapAdversary(target_agent)


class GateAdversary:
    """Two-agent adversary that pens one agent on the node pair
    {n-1, n-2} and never lets the other one pass through the four-node
    stretch (0, n-1, n-2, n-3), reducing the patrol to a line.

    Priorities per round: first block the penned agent's attempt to leave
    the pair, otherwise block the free agent's attempt to step into the
    pair.  If the penned agent slips out while the other one is inside, the
    two swap roles.
    """

    def __init__(self, n: int):
        self.n = n
        self.pair = ((n - 1) % n, (n - 2) % n)
        self.trapped: Optional[int] = None
        self._algorithm = None

    def bind(self, algorithm, n: int, k: int) -> None:
        if k != 2:
            raise ValueError("gate adversary drives exactly 2 agents")
        if n != self.n:
            raise ValueError(f"gate built for n={self.n}, run has n={n}")
        self._algorithm = algorithm

    def _dry_run_moves(self, positions, memories, missing):
        moves = []
        for i in range(2):
            snap = take_snapshot(
                positions, self.n, missing, i,
                getattr(self._algorithm, "visibility", "global"),
            )
            _, move = self._algorithm.step(i, memories[i], snap)
            moves.append(move)
        return moves

    def _destination(self, pos: int, move: int) -> int:
        return (pos + move) % self.n

    def _crossing_edge(self, pos: int, move: int) -> int:
        return pos if move == CW else (pos - 1) % self.n

    def decide(self, r: int, positions, memories) -> Optional[int]:
        if self.trapped is None:
            # the agent starting counter-clockwise-closer to node n-1 is penned
            self.trapped = min(range(2), key=lambda i: ((positions[i] + 1) % self.n, i))
        free = 1 - self.trapped
        if positions[self.trapped] not in self.pair and positions[free] in self.pair:
            self.trapped, free = free, self.trapped

        moves = self._dry_run_moves(positions, memories, None)

        t_pos, t_move = positions[self.trapped], moves[self.trapped]
        if (
            t_pos in self.pair
            and t_move != STAY
            and self._destination(t_pos, t_move) not in self.pair
        ):
            return self._crossing_edge(t_pos, t_move)

        f_pos, f_move = positions[free], moves[free]
        if (
            f_pos not in self.pair
            and f_move != STAY
            and self._destination(f_pos, f_move) in self.pair
        ):
            return self._crossing_edge(f_pos, f_move)
        return None


def gate_adversary(n: int) -> GateAdversary:
    return GateAdversary(n)


def gate_segment_nodes(n: int) -> tuple[int, int, int, int]:
    """The guarded four-node stretch, listed from node 0 counter-clockwise."""
    return (0, (n - 1) % n, (n - 2) % n, (n - 3) % n)
