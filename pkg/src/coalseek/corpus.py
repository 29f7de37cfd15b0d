"""Random problem generators used by the test suite and the experiment
scripts: connected graphs, containment-compliant graph pairs, and strongly
monotone quadratic games whose equilibrium is available in closed form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Binary, Const, Expression, Var
from .game import Coalition, Game, action_name
from .graphs import Graph, max_triangle_free_spanning_subgraph

__all__ = [
    "random_connected_graph",
    "random_containment_pair",
    "QuadraticGameSample",
    "random_quadratic_game",
]


def random_connected_graph(rng: np.random.Generator, n: int, extra_edge_prob: float = 0.35) -> Graph:
    """Random spanning tree plus independent extra edges; always connected."""
    if n < 1:
        raise ValueError("n must be positive")
    edges = set()
    order = list(rng.permutation(np.arange(1, n + 1)))
    for pos in range(1, n):
        anchor = order[int(rng.integers(0, pos))]
        j, l = int(order[pos]), int(anchor)
        edges.add((min(j, l), max(j, l)))
    for j in range(1, n + 1):
        for l in range(j + 1, n + 1):
            if (j, l) not in edges and rng.random() < extra_edge_prob:
                edges.add((j, l))
    return Graph.build(range(1, n + 1), sorted(edges))


def random_containment_pair(rng: np.random.Generator, n: int) -> tuple[Graph, Graph]:
    """(interference, communication) with the communication graph squeezed
    between a maximal triangle-free spanning subgraph of the interference
    graph and the interference graph itself."""
    interference = random_connected_graph(rng, n)
    if n == 1:
        return interference, interference
    kernel = max_triangle_free_spanning_subgraph(interference)
    keep = set(kernel.edge_pairs())
    for pair in interference.edge_pairs():
        if pair not in keep and rng.random() < 0.5:
            keep.add(pair)
    comm = Graph.build(interference.vertices, sorted(keep))
    return interference, comm


def _mul(a: Expression, b: Expression) -> Expression:
    return Binary("mul", a, b)


@dataclass(frozen=True)
class QuadraticGameSample:
    """A quadratic game together with the coefficients of its (affine)
    pseudo-gradient P(x) = M x + b, kept for closed-form cross-checks."""

    game: Game
    matrix: np.ndarray
    offset: np.ndarray

    def equilibrium(self) -> np.ndarray:
        return np.linalg.solve(self.matrix, -self.offset)


def random_quadratic_game(
    rng: np.random.Generator,
    max_coalitions: int = 3,
    max_agents: int = 4,
    delta: float = 0.1,
) -> QuadraticGameSample:
    """Strongly monotone random quadratic game on containment-compliant graphs.

    Costs are per-agent quadratics whose same-coalition couplings follow the
    interference graph (plus weak cross-coalition terms); magnitudes are
    scaled so the symmetric part of the pseudo-gradient map stays strictly
    diagonally dominant, hence positive definite.
    """
    n_coalitions = int(rng.integers(1, max_coalitions + 1))
    sizes = [int(rng.integers(1, max_agents + 1)) for _ in range(n_coalitions)]
    total = sum(sizes)

    pairs = [random_containment_pair(rng, m) for m in sizes]
    names = [
        action_name(i, j)
        for i, m in enumerate(sizes, start=1)
        for j in range(1, m + 1)
    ]
    index = {name: pos for pos, name in enumerate(names)}

    matrix = np.zeros((total, total))
    offset = np.zeros(total)
    coupling = 0.35 / max(1, total - 1)
    coalitions = []

    for i, m in enumerate(sizes, start=1):
        interference, comm = pairs[i - 1]
        costs: list[Expression] = []
        for j in range(1, m + 1):
            own = Var(action_name(i, j))
            row = index[action_name(i, j)]
            alpha = float(rng.uniform(0.8, 1.5))
            target = float(rng.uniform(-2.0, 2.0))
            f: Expression = _mul(
                Const(alpha),
                Binary("pow", Binary("sub", own, Const(target)), Const(2.0)),
            )
            matrix[row, row] += 2.0 * alpha
            offset[row] += -2.0 * alpha * target
            for k in interference.neighbors(j):
                gamma = float(rng.uniform(-coupling, coupling))
                f = Binary("add", f, _mul(Const(gamma), _mul(own, Var(action_name(i, k)))))
                # d f_ij / d x_ij picks up gamma * x_ik, and d f_ij / d x_ik
                # contributes gamma * x_ij to component (i, k) of the map.
                matrix[row, index[action_name(i, k)]] += gamma
                matrix[index[action_name(i, k)], row] += gamma
            for other in rng.permutation(total)[:2]:
                name = names[int(other)]
                if name.startswith(f"x{i}_"):
                    continue
                c = float(rng.uniform(-coupling, coupling))
                f = Binary("add", f, _mul(Const(c), _mul(own, Var(name))))
                matrix[row, index[name]] += c
            costs.append(f)
        coalitions.append(
            Coalition(
                costs=tuple(costs),
                dbar=tuple(float(rng.uniform(0.5, 1.5)) for _ in range(m)),
                comm=comm,
                interference=interference,
            )
        )

    sym = 0.5 * (matrix + matrix.T)
    if np.linalg.eigvalsh(sym)[0] <= 0:
        # Couplings are scaled to forbid this; guard against regressions.
        raise AssertionError("generated pseudo-gradient map is not strongly monotone")
    return QuadraticGameSample(
        game=Game(coalitions=tuple(coalitions), delta=delta),
        matrix=matrix,
        offset=offset,
    )
