"""Budgeted waypoint sessions shared by humans and autonomous agents.

A session walks a path over the grid: each added waypoint rasterizes a leg
from the previous waypoint and reveals the ground-truth value of every
newly visited cell, until the budget of distinct revealed cells runs out.
The same state machine backs the HTTP service (human runs) and run_robot
(autonomous runs), so logs from both replay identically.
"""

import datetime
import json
import logging
import uuid
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .acquisition import (
    DEFAULT_ALPHA,
    Strategy,
    score_entropy,
    score_entropy_plus_mean,
    score_random,
    select,
)
from .errors import (
    FactorizationFailure,
    FormatError,
    InvalidCell,
    ReplayMismatch,
    SessionExhausted,
    SessionFinished,
)
from .gp import DEFAULT_HP_INIT, Hyperparams, TrainingSet, fit, optimize_hyperparams
from .scenario import Cell, Field

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 190

SESSION_FORMAT_VERSION = 1


class Agent(str, Enum):
    HUMAN = "human"
    RANDOM = "random"
    ENTROPY = "entropy"
    ENTROPY_MEAN = "entropy_mean"


@dataclass(frozen=True)
class Reveal:
    """One revealed cell: its value and the waypoint step that exposed it."""

    cell: Cell
    value: float
    step: int


@dataclass(frozen=True)
class RevealResult:
    """Outcome of one add_waypoint call."""

    newly_revealed: list[tuple[Cell, float]]
    truncated: bool
    remaining: int


def _round_frac(p: int, q: int) -> int:
    """Nearest integer to p/q (q > 0), ties away from zero."""
    if p >= 0:
        return (2 * p + q) // (2 * q)
    return -((2 * -p + q) // (2 * q))


def raster_line(a: Cell, b: Cell) -> list[Cell]:
    """8-connected integer rasterization from a to b, inclusive.

    Steps once along the major axis per cell, rounding the minor axis to
    nearest (ties away from zero), so the result has exactly
    max(|drow|, |dcol|) + 1 cells and consecutive cells are 8-neighbors.
    """
    dr, dc = b.row - a.row, b.col - a.col
    n = max(abs(dr), abs(dc))
    if n == 0:
        return [a]
    return [
        Cell(a.row + _round_frac(i * dr, n), a.col + _round_frac(i * dc, n))
        for i in range(n + 1)
    ]


class Session:
    """One sampling run over a hidden scenario.

    Mutated only through add_waypoint; everything else is bookkeeping.
    revealed cells are unique and remaining = budget_total - len(revealed)
    never goes negative.
    """

    def __init__(self, session_id: str, scenario: Field, agent: Agent,
                 budget_total: int = DEFAULT_BUDGET,
                 hp_init: Hyperparams | None = None, seed: int | None = None,
                 note: str | None = None, created_at: str | None = None):
        self.id = session_id
        self.scenario = scenario
        self.agent = agent
        self.budget_total = budget_total
        self.hp_init = hp_init
        self.seed = seed
        self.note = note
        self.created_at = created_at
        self.waypoints: list[Cell] = []
        self.revealed: list[Reveal] = []
        self.finished = False
        self._revealed_set: set[Cell] = set()

    @property
    def remaining(self) -> int:
        return self.budget_total - len(self.revealed)

    def is_revealed(self, cell: Cell) -> bool:
        return cell in self._revealed_set

    @property
    def revealed_cells(self) -> set[Cell]:
        return set(self._revealed_set)


def utc_now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def new_session(scenario: Field, agent: Agent,
                budget_total: int = DEFAULT_BUDGET, *,
                session_id: str | None = None,
                hp_init: Hyperparams | None = None, seed: int | None = None,
                note: str | None = None,
                created_at: str | None = None) -> Session:
    """Fresh session with an empty waypoint list and the full budget."""
    if budget_total < 0:
        raise ValueError("budget_total must be nonnegative")
    return Session(
        session_id=session_id or uuid.uuid4().hex,
        scenario=scenario,
        agent=Agent(agent),
        budget_total=budget_total,
        hp_init=hp_init,
        seed=seed,
        note=note,
        created_at=created_at,
    )


def add_waypoint(session: Session, target: Cell) -> RevealResult:
    """Append a waypoint and reveal the cells along the leg to it.

    The first waypoint reveals only its own cell. Later waypoints reveal
    the rasterized leg from the previous waypoint, excluding the start
    cell; already-revealed cells cost nothing. When the budget runs out
    mid-leg the reveal stops there and the result is flagged truncated.
    """
    if session.finished:
        raise SessionFinished(f"session {session.id} is finished")
    if session.remaining <= 0:
        raise SessionExhausted(f"session {session.id} has no budget left")
    grid = session.scenario.grid
    if not grid.valid(target):
        raise InvalidCell(f"cell ({target.row}, {target.col}) outside "
                          f"{grid.rows}x{grid.cols} grid")
    if session.waypoints:
        path = raster_line(session.waypoints[-1], target)[1:]
    else:
        path = [target]
    step = len(session.waypoints)
    newly: list[tuple[Cell, float]] = []
    truncated = False
    for cell in path:
        if session.is_revealed(cell):
            continue
        if session.remaining == 0:
            truncated = True
            break
        value = session.scenario.value_at(cell)
        session.revealed.append(Reveal(cell, value, step))
        session._revealed_set.add(cell)
        newly.append((cell, value))
    session.waypoints.append(target)
    return RevealResult(newly, truncated, session.remaining)


def run_robot(scenario: Field, strategy, budget_total: int = DEFAULT_BUDGET,
              hp_init: Hyperparams = DEFAULT_HP_INIT, seed: int = 0,
              start: Cell = Cell(0, 0), alpha: float = DEFAULT_ALPHA,
              session_id: str | None = None) -> Session:
    """Run one autonomous sampling session to budget exhaustion.

    Per leg: rebuild the training set from the revealed cells (centers in
    degrees), re-estimate hyperparameters warm-started from the previous
    leg, fit, score the unrevealed cells, and move to the selected
    waypoint. A model exists only once two samples do; before that, and on
    a factorization failure, the step falls back to random selection.
    Deterministic for a fixed seed.
    """
    strategy = Strategy(strategy)
    agent = Agent(strategy.value)
    spec = scenario.grid
    sid = session_id or f"{scenario.name}-{strategy.value}-s{seed}"
    session = new_session(scenario, agent, budget_total, session_id=sid,
                          hp_init=hp_init, seed=seed)
    rng = np.random.default_rng(seed)
    if budget_total <= 0:
        return session
    add_waypoint(session, start)

    candidates = spec.all_cells()
    centers_deg = spec.centers_lonlat()
    hp = hp_init
    while session.remaining > 0:
        exclude = session._revealed_set
        scores = None
        if strategy is not Strategy.RANDOM and len(session.revealed) >= 2:
            idx = [spec.index(r.cell) for r in session.revealed]
            train = TrainingSet(centers_deg[idx],
                                [r.value for r in session.revealed])
            try:
                hp = optimize_hyperparams(train, hp)
                model = fit(train, hp)
                if strategy is Strategy.ENTROPY:
                    scores = score_entropy(model, candidates, spec)
                else:
                    scores = score_entropy_plus_mean(model, candidates, spec, alpha)
            except FactorizationFailure:
                log.warning("session %s: factorization failed with %d samples; "
                            "falling back to random selection", sid, len(train))
                scores = None
        if scores is None:
            scores = score_random(candidates)
        target = select(scores, rng=rng, exclude=exclude)
        add_waypoint(session, target)
    return session


# --- session log serialization -------------------------------------------

def session_to_log(session: Session) -> dict:
    """Session as its on-disk log structure (fixed key order)."""
    payload = {
        "format_version": SESSION_FORMAT_VERSION,
        "id": session.id,
        "agent": session.agent.value,
        "scenario_name": session.scenario.name,
        "budget_total": session.budget_total,
    }
    if session.hp_init is not None:
        payload["hp_init"] = session.hp_init.to_dict()
    if session.seed is not None:
        payload["seed"] = session.seed
    payload["waypoints"] = [{"row": w.row, "col": w.col} for w in session.waypoints]
    payload["revealed"] = [
        {"row": r.cell.row, "col": r.cell.col, "value": r.value, "step": r.step}
        for r in session.revealed
    ]
    if session.note is not None:
        payload["note"] = session.note
    payload["created_at"] = session.created_at
    return payload


def save_log(session: Session, path: str):
    with open(path, "w") as handle:
        handle.write(dump_log(session_to_log(session)))


def dump_log(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def load_log(path: str) -> dict:
    """Read and structurally validate a session log."""
    with open(path) as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    if payload.get("format_version") != SESSION_FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version "
                          f"{payload.get('format_version')!r}")
    for key in ("id", "agent", "scenario_name", "budget_total", "waypoints",
                "revealed"):
        if key not in payload:
            raise FormatError(f"{path}: missing field {key!r}")
    return payload


def replay_log(payload: dict, scenario: Field) -> Session:
    """Re-drive the waypoint list on a fresh session and verify the log.

    Raises ReplayMismatch when the recomputed reveals (cells, values,
    steps, order) or budget bookkeeping differ from the recorded log:
    any edited value or reordered waypoint fails.
    """
    if payload["scenario_name"] != scenario.name:
        raise ReplayMismatch(
            f"log references scenario {payload['scenario_name']!r}, "
            f"got {scenario.name!r}"
        )
    hp_init = (Hyperparams.from_dict(payload["hp_init"])
               if "hp_init" in payload else None)
    fresh = new_session(
        scenario,
        Agent(payload["agent"]),
        payload["budget_total"],
        session_id=payload["id"],
        hp_init=hp_init,
        seed=payload.get("seed"),
        note=payload.get("note"),
        created_at=payload.get("created_at"),
    )
    try:
        for wp in payload["waypoints"]:
            add_waypoint(fresh, Cell(wp["row"], wp["col"]))
    except (SessionExhausted, InvalidCell) as exc:
        raise ReplayMismatch(f"waypoint list does not replay: {exc}") from exc
    recomputed = session_to_log(fresh)
    if recomputed != payload:
        for key in recomputed:
            if recomputed.get(key) != payload.get(key):
                raise ReplayMismatch(f"log field {key!r} does not replay")
        raise ReplayMismatch("log does not replay")
    return fresh
