"""Multi-coalition game model.

A game is a tuple of coalitions; each coalition carries one scalar cost per
agent, per-agent gains, a communication graph and an interference graph.  The
interference graph must cover the actual same-coalition dependencies of the
costs, which is validated at construction.  All evaluation helpers work on a
flat action profile ordered coalition-major: (1,1), (1,2), ..., (N, m_N).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .expr import (
    Binary,
    Const,
    Expression,
    Unary,
    Var,
    differentiate,
    evaluate,
    free_variables,
)
from .graphs import Graph, laplacian

__all__ = [
    "Coalition",
    "Game",
    "GameError",
    "Block",
    "Layout",
    "FlowAgent",
    "action_name",
    "split_action_name",
    "infer_interference_graph",
    "validate_domain",
    "pseudo_gradient",
    "coalition_cost",
    "build_congestion_game",
]

_ACTION_SPLIT = re.compile(r"x([1-9]\d*)_([1-9]\d*)\Z")


class GameError(ValueError):
    pass


def action_name(i: int, j: int) -> str:
    return f"x{i}_{j}"


def split_action_name(name: str) -> tuple[int, int] | None:
    """(coalition, agent) for a canonical action identifier, else None."""
    m = _ACTION_SPLIT.match(name)
    if m is None:
        return None
    return int(m.group(1)), int(m.group(2))


@dataclass(frozen=True)
class Coalition:
    """One coalition: per-agent costs, gains and graphs on agents 1..m."""

    costs: tuple[Expression, ...]
    dbar: tuple[float, ...]
    comm: Graph
    interference: Graph

    @property
    def m(self) -> int:
        return len(self.costs)


@dataclass(frozen=True)
class Block:
    """Estimation block for one gradient component: coalition ``i``,
    component ``k``, and the agents holding an estimate of it."""

    coalition: int
    k: int
    members: tuple[int, ...]
    start: int  # slice of the flat auxiliary vector

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def stop(self) -> int:
        return self.start + self.size


@dataclass(frozen=True)
class Game:
    coalitions: tuple[Coalition, ...]
    delta: float = 0.1

    def __post_init__(self):
        if not self.coalitions:
            raise GameError("a game needs at least one coalition")
        if not (self.delta > 0):
            raise GameError("delta must be positive")
        valid_names = set()
        for i, c in enumerate(self.coalitions, start=1):
            m = c.m
            if m < 1:
                raise GameError(f"coalition {i} has no agents")
            if len(c.dbar) != m:
                raise GameError(f"coalition {i}: dbar length != number of agents")
            if any(not (d > 0) for d in c.dbar):
                raise GameError(f"coalition {i}: gains must be positive")
            expected = tuple(range(1, m + 1))
            for label, g in (("communication", c.comm), ("interference", c.interference)):
                if g.vertices != expected:
                    raise GameError(
                        f"coalition {i}: {label} graph must be on vertices 1..{m}"
                    )
            valid_names.update(action_name(i, j) for j in range(1, m + 1))
        for i, c in enumerate(self.coalitions, start=1):
            for j, f in enumerate(c.costs, start=1):
                for name in free_variables(f):
                    idx = split_action_name(name)
                    if idx is None or name not in valid_names:
                        raise GameError(
                            f"cost of agent ({i},{j}) references unknown action '{name}'"
                        )
                    ci, ck = idx
                    if ci == i and ck != j and not c.interference.has_edge(j, ck):
                        raise GameError(
                            f"cost of agent ({i},{j}) depends on x{i}_{ck} but the "
                            f"interference graph of coalition {i} has no edge ({j},{ck})"
                        )

    # -- indexing ----------------------------------------------------------

    @property
    def n_coalitions(self) -> int:
        return len(self.coalitions)

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        return tuple(c.m for c in self.coalitions)

    @cached_property
    def n_actions(self) -> int:
        return sum(self.sizes)

    @cached_property
    def var_names(self) -> tuple[str, ...]:
        return tuple(
            action_name(i, j)
            for i, c in enumerate(self.coalitions, start=1)
            for j in range(1, c.m + 1)
        )

    @cached_property
    def var_index(self) -> dict[str, int]:
        return {name: idx for idx, name in enumerate(self.var_names)}

    def action_index(self, i: int, j: int) -> int:
        return self.var_index[action_name(i, j)]

    def as_profile(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.n_actions,):
            raise GameError(f"profile must have {self.n_actions} entries")
        if not np.all(np.isfinite(arr)):
            raise GameError("profile entries must be finite")
        return arr

    def assignment(self, x: np.ndarray) -> dict[str, float]:
        return dict(zip(self.var_names, x.tolist()))

    def interference_neighbors(self, i: int, j: int) -> tuple[int, ...]:
        return self.coalitions[i - 1].interference.neighbors(j)

    # -- derivative cache and block layout ----------------------------------

    @cached_property
    def partials(self) -> dict[tuple[int, int, int], Expression]:
        """Symbolic d f_ij / d x_ik for every stored estimate index (i, j, k),
        k running over the closed interference neighborhood of agent j."""
        table = {}
        for i, c in enumerate(self.coalitions, start=1):
            for j in range(1, c.m + 1):
                f = c.costs[j - 1]
                for k in sorted(set(c.interference.neighbors(j)) | {j}):
                    table[(i, j, k)] = differentiate(f, action_name(i, k))
        return table

    @cached_property
    def layout(self) -> "Layout":
        return Layout(self)


class Layout:
    """Flat storage layout of the per-block auxiliary/estimate vectors.

    Entries are ordered block-major: coalitions in order, components k in
    order, members j sorted within the block.  Membership is symmetric, so the
    index set equals the (i, j, k) triples of ``Game.partials``.
    """

    def __init__(self, game: Game):
        blocks = []
        slots: dict[tuple[int, int, int], int] = {}
        offset = 0
        for i, c in enumerate(game.coalitions, start=1):
            for k in range(1, c.m + 1):
                members = tuple(sorted(set(c.interference.neighbors(k)) | {k}))
                block = Block(coalition=i, k=k, members=members, start=offset)
                blocks.append(block)
                for j in members:
                    slots[(i, j, k)] = offset
                    offset += 1
        self.game = game
        self.blocks: tuple[Block, ...] = tuple(blocks)
        self.slots = slots
        self.size = offset
        self.block_by_key = {(b.coalition, b.k): b for b in blocks}

    def slot(self, i: int, j: int, k: int) -> int:
        return self.slots[(i, j, k)]

    def block(self, i: int, k: int) -> Block:
        return self.block_by_key[(i, k)]

    def block_size(self, i: int, k: int) -> int:
        return self.block_by_key[(i, k)].size

    @cached_property
    def block_laplacians(self) -> dict[tuple[int, int], np.ndarray]:
        out = {}
        for b in self.blocks:
            comm = self.game.coalitions[b.coalition - 1].comm
            out[(b.coalition, b.k)] = laplacian(comm.induced(b.members))
        return out

    @cached_property
    def big_laplacian(self) -> np.ndarray:
        big = np.zeros((self.size, self.size))
        for b in self.blocks:
            big[b.start : b.stop, b.start : b.stop] = self.block_laplacians[
                (b.coalition, b.k)
            ]
        return big

    @cached_property
    def own_slots(self) -> np.ndarray:
        """Slot of (i, j, j) for each action, in profile order."""
        return np.array(
            [
                self.slots[(i, j, j)]
                for i, c in enumerate(self.game.coalitions, start=1)
                for j in range(1, c.m + 1)
            ],
            dtype=int,
        )

    @cached_property
    def component_sum(self) -> np.ndarray:
        """Matrix summing a flat partials vector into the pseudo-gradient."""
        mat = np.zeros((self.game.n_actions, self.size))
        row = 0
        for b in self.blocks:
            col = self.game.action_index(b.coalition, b.k)
            mat[col, b.start : b.stop] = 1.0
            row += 1
        return mat

    def partial_exprs(self) -> list[Expression]:
        """Cached partial derivatives in slot order."""
        table = self.game.partials
        out: list[Expression] = [Const(0.0)] * self.size
        for key, slot in self.slots.items():
            out[slot] = table[key]
        return out

    def partial_vector(self, assignment: Mapping[str, float]) -> np.ndarray:
        vals = np.empty(self.size)
        table = self.game.partials
        for key, slot in self.slots.items():
            vals[slot] = evaluate(table[key], assignment)
        return vals


# ---------------------------------------------------------------------------
# Game-level evaluations
# ---------------------------------------------------------------------------


def infer_interference_graph(costs: Sequence[Expression], coalition: int) -> Graph:
    """Dependency graph of one coalition: agents j and k are adjacent iff the
    cost of j depends on the action of k or vice versa (syntactically)."""
    m = len(costs)
    deps: list[set[int]] = []
    for f in costs:
        own = set()
        for name in free_variables(f):
            idx = split_action_name(name)
            if idx is not None and idx[0] == coalition and 1 <= idx[1] <= m:
                own.add(idx[1])
        deps.append(own)
    edges = set()
    for j in range(1, m + 1):
        for k in range(1, m + 1):
            if j != k and (k in deps[j - 1] or j in deps[k - 1]):
                edges.add((min(j, k), max(j, k)))
    return Graph.build(range(1, m + 1), sorted(edges))


def validate_domain(game: Game, env: Mapping[str, float]) -> None:
    """Evaluate every cost at the assignment; raises DomainError when the
    point lies outside some cost's domain."""
    for c in game.coalitions:
        for f in c.costs:
            evaluate(f, env)


def pseudo_gradient(game: Game, x) -> np.ndarray:
    """Stacked gradient of each coalition's cost in its own action block,
    entry (i, k) summed over the closed interference neighborhood of k."""
    profile = game.as_profile(x)
    env = game.assignment(profile)
    validate_domain(game, env)
    out = np.empty(game.n_actions)
    table = game.partials
    for b in game.layout.blocks:
        out[game.action_index(b.coalition, b.k)] = sum(
            evaluate(table[(b.coalition, j, b.k)], env) for j in b.members
        )
    return out


def coalition_cost(game: Game, i: int, x) -> float:
    if not 1 <= i <= game.n_coalitions:
        raise GameError(f"no coalition {i}")
    env = game.assignment(game.as_profile(x))
    return sum(evaluate(f, env) for f in game.coalitions[i - 1].costs)


# ---------------------------------------------------------------------------
# Congestion-game builder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowAgent:
    """A flow-routing agent: coalition label, path as a tuple of link names,
    and the utility weight on its own logarithmic throughput term."""

    coalition: int
    path: tuple[str, ...]
    u: float


def build_congestion_game(
    links: Mapping[str, float] | Iterable[tuple[str, float]],
    agents: Sequence[FlowAgent],
    kappa: float,
    delta: float = 0.1,
) -> Game:
    """Congestion game over a shared-link network.

    Each agent pays, per link on its path, ``kappa / (capacity - load)`` where
    the load is the total flow of every agent (any coalition) routing through
    the link, minus ``u * log(own flow + 1)``.  Interference graphs are
    inferred from shared links restricted to same-coalition agents, and the
    communication graphs default to the interference graphs.
    """
    capacity = dict(links)
    for name, cap in capacity.items():
        if not (cap > 0):
            raise GameError(f"link '{name}' must have positive capacity")

    by_coalition: dict[int, list[int]] = {}
    var_of_agent: list[str] = []
    for a in agents:
        if a.coalition < 1:
            raise GameError("coalition labels must be positive integers")
        idx = by_coalition.setdefault(a.coalition, [])
        idx.append(len(var_of_agent))
        var_of_agent.append(action_name(a.coalition, len(idx)))
    n = len(by_coalition)
    if sorted(by_coalition) != list(range(1, n + 1)):
        raise GameError("coalition labels must be contiguous 1..N")

    # Total flow per link, in coalition-major agent order.
    sharers: dict[str, list[str]] = {name: [] for name in capacity}
    order = sorted(range(len(agents)), key=lambda t: (agents[t].coalition, t))
    for t in order:
        for name in agents[t].path:
            if name not in capacity:
                raise GameError(
                    f"agent {var_of_agent[t]} routes through unknown link '{name}'"
                )
            sharers[name].append(var_of_agent[t])

    def load_term(name: str) -> Expression:
        expr: Expression = Const(float(capacity[name]))
        for vname in sharers[name]:
            expr = Binary("sub", expr, Var(vname))
        return Binary("div", Const(float(kappa)), expr)

    coalitions = []
    for i in range(1, n + 1):
        costs = []
        for pos, t in enumerate(by_coalition[i], start=1):
            a = agents[t]
            own = Var(action_name(i, pos))
            total: Expression | None = None
            for name in a.path:
                term = load_term(name)
                total = term if total is None else Binary("add", total, term)
            if total is None:
                raise GameError(f"agent {action_name(i, pos)} has an empty path")
            barrier = Binary(
                "mul",
                Const(float(a.u)),
                Unary("log", Binary("add", own, Const(1.0))),
            )
            costs.append(Binary("sub", total, barrier))
        interference = infer_interference_graph(costs, i)
        coalitions.append(
            Coalition(
                costs=tuple(costs),
                dbar=(1.0,) * len(costs),
                comm=interference,
                interference=interference,
            )
        )
    return Game(coalitions=tuple(coalitions), delta=delta)
