"""Dynamic ring topology, edge schedules, configurations and round semantics.

Conventions used throughout the package:

* Nodes are indexed ``0..n-1`` in clockwise order; moving clockwise means
  ``+1`` (mod n), counter-clockwise ``-1``.
* Edge ``j`` connects node ``j`` and node ``(j+1) % n``, i.e. an edge is
  named after its counter-clockwise endpoint.  The clockwise edge of node
  ``u`` is edge ``u``; its counter-clockwise edge is edge ``(u-1) % n``.
* At most one edge may be missing per round (removing two edges would
  disconnect the ring).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

CW = 1
STAY = 0
CCW = -1

MOVES = (CCW, STAY, CW)


class ScheduleError(ValueError):
    """A schedule violates the one-missing-edge-per-round model."""


@dataclass(frozen=True)
class RingTopology:
    """An oriented ring of ``n`` nodes."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"ring needs at least 3 nodes, got {self.n}")

    def cw_of(self, u: int) -> int:
        return (u + 1) % self.n

    def ccw_of(self, u: int) -> int:
        return (u - 1) % self.n

    def cw_edge_of(self, u: int) -> int:
        return u

    def ccw_edge_of(self, u: int) -> int:
        return (u - 1) % self.n


def ring_distance(n: int, u: int, v: int, direction: int = CW) -> int:
    """Number of edges traversed going from ``u`` to ``v`` in ``direction``.

    ``direction`` is CW (+1) or CCW (-1).  Distances in the two directions
    sum to ``n`` for distinct nodes and are 0 for ``u == v``.
    """
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"nodes must lie in [0, {n}), got {u}, {v}")
    if direction == CW:
        return (v - u) % n
    if direction == CCW:
        return (u - v) % n
    raise ValueError(f"direction must be +1 or -1, got {direction}")


def arc_distance(n: int, u: int, v: int) -> int:
    """Length of the shorter arc between ``u`` and ``v``."""
    d = (v - u) % n
    return min(d, n - d)


@dataclass
class ObliviousSchedule:
    """Per-round missing-edge function defining the dynamic ring.

    ``missing`` maps a round to the edge absent in that round; rounds not in
    the map have no missing edge.  When ``period`` is set the map repeats:
    ``missing_edge(r) == missing_edge(r % period)``.
    """

    n: int
    missing: dict[int, int] = field(default_factory=dict)
    period: Optional[int] = None

    def missing_edge(self, r: int) -> Optional[int]:
        if self.period is not None:
            r = r % self.period
        return self.missing.get(r)

    def to_json(self) -> str:
        entries = [
            {"round": r, "edge": e} for r, e in sorted(self.missing.items())
        ]
        return json.dumps(
            {"n": self.n, "period": self.period, "missing": entries},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ObliviousSchedule":
        raw = json.loads(text)
        missing: dict[int, int] = {}
        for m in raw["missing"]:
            r = int(m["round"])
            if r in missing:
                raise ScheduleError(
                    f"round {r}: two missing edges ({missing[r]} and {m['edge']}) "
                    "would disconnect the ring"
                )
            missing[r] = int(m["edge"])
        sched = cls(n=int(raw["n"]), missing=missing, period=raw.get("period"))
        horizon = sched.period or (max(missing) + 1 if missing else 1)
        report = validate_schedule(sched, horizon)
        if report is not None:
            raise ScheduleError(report)
        return sched


def validate_schedule(schedule: ObliviousSchedule, horizon: int) -> Optional[str]:
    """Check a schedule over ``[0, horizon)``; return None or a violation report.

    The encoding already forbids two missing edges in one round (one dict
    slot per round), so the checks are edge-index range and period sanity.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if schedule.period is not None and schedule.period < 1:
        return "period must be a positive integer"
    for r in range(horizon):
        e = schedule.missing_edge(r)
        if e is not None and not (0 <= e < schedule.n):
            return f"round {r}: edge index {e} out of range for n={schedule.n}"
    for r, e in schedule.missing.items():
        if r < 0:
            return f"negative round {r} in schedule"
        if schedule.period is not None and r >= schedule.period:
            return f"round {r} outside declared period {schedule.period}"
    return None


def make_random_schedule(
    n: int, rounds: int, seed: int, density: float = 0.5
) -> ObliviousSchedule:
    """Seeded random valid schedule: each round removes one edge with
    probability ``density``, chosen uniformly."""
    rng = random.Random(seed)
    missing = {}
    for r in range(rounds):
        if rng.random() < density:
            missing[r] = rng.randrange(n)
    return ObliviousSchedule(n=n, missing=missing)


# --- configurations ---------------------------------------------------------

def uniform_gaps(n: int, k: int) -> list[int]:
    """Inter-agent gaps of the canonical uniform placement, larger gaps first."""
    q, rem = divmod(n, k)
    return [q + 1] * rem + [q] * (k - rem)


def uniform_positions(n: int, k: int, anchor: int = 0) -> tuple[int, ...]:
    """The uniform pattern anchored at ``anchor``: gaps floor(n/k)/ceil(n/k),
    larger gaps placed first."""
    gaps = uniform_gaps(n, k)
    positions = [anchor % n]
    for g in gaps[:-1]:
        positions.append((positions[-1] + g) % n)
    return tuple(positions)


def is_uniform(n: int, positions: Sequence[int]) -> bool:
    """True iff consecutive clockwise gaps are all floor(n/k) or ceil(n/k)."""
    k = len(positions)
    if k == 0:
        return False
    if len(set(p % n for p in positions)) != k:
        return False
    ordered = sorted(p % n for p in positions)
    gaps = sorted(
        (ordered[(i + 1) % k] - ordered[i]) % n if k > 1 else n
        for i in range(k)
    )
    return gaps == sorted(uniform_gaps(n, k))


def consecutive_positions(n: int, k: int, anchor: int = 0) -> tuple[int, ...]:
    return tuple((anchor + i) % n for i in range(k))


def random_positions(n: int, k: int, seed: int) -> tuple[int, ...]:
    """Seeded injective placement."""
    rng = random.Random(seed)
    return tuple(rng.sample(range(n), k))


def check_initial_configuration(n: int, positions: Sequence[int]) -> None:
    if any(not (0 <= p < n) for p in positions):
        raise ValueError(f"positions out of range for n={n}: {positions}")
    if len(set(positions)) != len(positions):
        raise ValueError(f"initial configuration must be injective: {positions}")


# --- snapshots and round application ----------------------------------------

class LocalSnapshot(NamedTuple):
    """What an agent sees of its own node only."""

    agents_here: int
    cw_present: bool
    ccw_present: bool


class GlobalSnapshot(NamedTuple):
    """The full round-r picture, with the observer's slot marked."""

    n: int
    missing_edge: Optional[int]
    positions: tuple[int, ...]
    own_index: int

    @property
    def own_position(self) -> int:
        return self.positions[self.own_index]


def take_snapshot(
    positions: Sequence[int],
    n: int,
    missing_edge: Optional[int],
    agent_index: int,
    visibility: str = "global",
):
    """Build the Look-phase snapshot for one agent."""
    if not (0 <= agent_index < len(positions)):
        raise ValueError(f"agent index {agent_index} out of range")
    if visibility == "global":
        return GlobalSnapshot(
            n=n,
            missing_edge=missing_edge,
            positions=tuple(positions),
            own_index=agent_index,
        )
    if visibility == "local":
        u = positions[agent_index]
        return LocalSnapshot(
            agents_here=sum(1 for p in positions if p == u),
            cw_present=missing_edge != u,
            ccw_present=missing_edge != (u - 1) % n,
        )
    raise ValueError(f"unknown visibility {visibility!r}")


def apply_round(
    positions: Sequence[int],
    moves: Sequence[int],
    n: int,
    missing_edge: Optional[int],
) -> tuple[tuple[int, ...], tuple[bool, ...]]:
    """Apply one synchronous Move phase.

    An agent whose move requires the missing edge stays in place and is
    flagged blocked; everyone else moves simultaneously.  Co-location is
    allowed.
    """
    if len(moves) != len(positions):
        raise ValueError("one move per agent required")
    new_positions = []
    blocked = []
    for p, m in zip(positions, moves):
        if m == STAY:
            new_positions.append(p)
            blocked.append(False)
        elif m == CW:
            if missing_edge == p:
                new_positions.append(p)
                blocked.append(True)
            else:
                new_positions.append((p + 1) % n)
                blocked.append(False)
        elif m == CCW:
            if missing_edge == (p - 1) % n:
                new_positions.append(p)
                blocked.append(True)
            else:
                new_positions.append((p - 1) % n)
                blocked.append(False)
        else:
            raise ValueError(f"invalid move {m}")
    return tuple(new_positions), tuple(blocked)
