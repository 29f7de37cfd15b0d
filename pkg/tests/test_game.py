import numpy as np
import pytest

from coalseek.expr import DomainError, evaluate, parse, render
from coalseek.game import (
    Coalition,
    FlowAgent,
    Game,
    GameError,
    action_name,
    build_congestion_game,
    coalition_cost,
    infer_interference_graph,
    pseudo_gradient,
    split_action_name,
)
from coalseek.graphs import Graph
from conftest import STATIONARY_SECOND


def test_action_name_round_trip():
    assert split_action_name(action_name(3, 12)) == (3, 12)
    assert split_action_name("x0_1") is None
    assert split_action_name("y1_2") is None


# --- interference inference ---------------------------------------------------


def test_inference_four_agent_coalition():
    costs = [
        parse("x1_1 + x1_2 + x1_4 + x2_1"),
        parse("x1_1*x1_2*x1_3*x1_4"),
        parse("x1_2 + x1_3"),
        parse("x1_1 + x1_2 + x1_4"),
    ]
    g = infer_interference_graph(costs, 1)
    assert g.edge_pairs() == ((1, 2), (1, 4), (2, 3), (2, 4))


def test_inference_example2_coalition2_is_complete(example2_game):
    costs = example2_game.coalitions[1].costs
    g = infer_interference_graph(costs, 2)
    assert g.edge_pairs() == ((1, 2), (1, 3), (2, 3))


def test_inference_single_agent():
    g = infer_interference_graph([parse("x1_1^2")], 1)
    assert g.vertices == (1,)
    assert g.edges == ()


def test_inference_is_symmetric_and_loop_free():
    # one-directional dependence still induces the undirected edge
    costs = [parse("x1_1 + x1_2"), parse("x1_2^2")]
    g = infer_interference_graph(costs, 1)
    assert g.edge_pairs() == ((1, 2),)
    assert all(j != l for j, l in g.edge_pairs())


# --- construction validation -----------------------------------------------------


def test_game_rejects_undeclared_dependency():
    costs = (parse("x1_1 + x1_2"), parse("x1_2^2"))
    empty = Graph.build([1, 2])
    with pytest.raises(GameError, match="interference graph"):
        Game(
            coalitions=(
                Coalition(costs=costs, dbar=(1.0, 1.0), comm=empty, interference=empty),
            )
        )


def test_game_rejects_unknown_action():
    costs = (parse("x1_1 + x9_9"),)
    trivial = Graph.build([1])
    with pytest.raises(GameError, match="unknown action"):
        Game(coalitions=(Coalition(costs, (1.0,), trivial, trivial),))


def test_game_rejects_bad_gain():
    trivial = Graph.build([1])
    with pytest.raises(GameError, match="positive"):
        Game(coalitions=(Coalition((parse("x1_1^2"),), (0.0,), trivial, trivial),))


# --- pseudo-gradient ----------------------------------------------------------------


def test_pseudo_gradient_vanishes_at_both_stationary_points(example2_game):
    assert np.abs(pseudo_gradient(example2_game, np.zeros(10))).max() == 0.0
    assert np.abs(pseudo_gradient(example2_game, STATIONARY_SECOND)).max() == 0.0


def test_pseudo_gradient_single_agent():
    trivial = Graph.build([1])
    g = Game(coalitions=(Coalition((parse("(x1_1 - 3)^2"),), (1.0,), trivial, trivial),))
    assert pseudo_gradient(g, np.zeros(1))[0] == -6.0


def test_restricted_sum_equals_full_sum(example2_game):
    # components summed over the closed neighborhood match the sum over the
    # whole coalition: the omitted partial derivatives are identically zero
    from coalseek.expr import differentiate

    game = example2_game
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(-2, 2, game.n_actions)
        env = game.assignment(x)
        restricted = pseudo_gradient(game, x)
        full = np.zeros(game.n_actions)
        for i, c in enumerate(game.coalitions, start=1):
            for k in range(1, c.m + 1):
                acc = 0.0
                for j in range(1, c.m + 1):
                    acc += evaluate(differentiate(c.costs[j - 1], action_name(i, k)), env)
                full[game.action_index(i, k)] = acc
        assert np.abs(restricted - full).max() <= 1e-12


def test_pseudo_gradient_matches_finite_differences(example2_game):
    game = example2_game
    rng = np.random.default_rng(4)
    h = 1e-6
    for _ in range(10):
        x = rng.uniform(-1.5, 1.5, game.n_actions)
        p = pseudo_gradient(game, x)
        for i, c in enumerate(game.coalitions, start=1):
            for k in range(1, c.m + 1):
                col = game.action_index(i, k)
                up, down = x.copy(), x.copy()
                up[col] += h
                down[col] -= h
                fd = (coalition_cost(game, i, up) - coalition_cost(game, i, down)) / (2 * h)
                assert abs(p[col] - fd) / max(1.0, abs(p[col])) <= 1e-6


# --- coalition cost -------------------------------------------------------------------


def test_coalition_costs_at_origin(example2_game):
    assert coalition_cost(example2_game, 1, np.zeros(10)) == 0.0
    # sum (-1) + 0 + 0 + 0 + 0 + 1 of the six per-agent values
    assert coalition_cost(example2_game, 3, np.zeros(10)) == 0.0


def test_coalition_cost_additivity(example2_game):
    game = example2_game
    rng = np.random.default_rng(5)
    x = rng.uniform(-1, 1, game.n_actions)
    env = game.assignment(x)
    for i, c in enumerate(game.coalitions, start=1):
        total = sum(evaluate(f, env) for f in c.costs)
        assert coalition_cost(game, i, x) == pytest.approx(total, rel=0, abs=0)


def test_coalition_cost_domain_error_propagates(congestion_demo):
    game = congestion_demo.game
    x = np.zeros(game.n_actions)
    x[game.action_index(1, 1)] = -1.0  # log barrier pole
    with pytest.raises(DomainError):
        coalition_cost(game, 1, x)


# --- congestion builder ----------------------------------------------------------------


def test_shared_link_cost_shape():
    game = build_congestion_game(
        {"a": 20.0},
        [FlowAgent(1, ("a",), 10.0), FlowAgent(1, ("a",), 10.0)],
        kappa=10.0,
    )
    assert render(game.coalitions[0].costs[0]) == "10/(20 - x1_1 - x1_2) - 10*log(x1_1 + 1)"
    assert render(game.coalitions[0].costs[1]) == "10/(20 - x1_1 - x1_2) - 10*log(x1_2 + 1)"
    assert game.coalitions[0].interference.edge_pairs() == ((1, 2),)


def test_disjoint_links_no_interference():
    game = build_congestion_game(
        {"a": 20.0, "b": 20.0},
        [FlowAgent(1, ("a",), 10.0), FlowAgent(1, ("b",), 10.0)],
        kappa=10.0,
    )
    assert game.coalitions[0].interference.edges == ()


def test_unknown_link_rejected():
    with pytest.raises(GameError, match="unknown link"):
        build_congestion_game({"a": 20.0}, [FlowAgent(1, ("b",), 10.0)], kappa=10.0)


def test_single_agent_stationary_point_matches_bisection():
    game = build_congestion_game({"a": 20.0}, [FlowAgent(1, ("a",), 10.0)], kappa=10.0)

    def slope(x):
        # derivative of 10/(20-x) - 10*log(x+1)
        return 10.0 / (20.0 - x) ** 2 - 10.0 / (x + 1.0)

    lo, hi = 0.0, 19.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    from coalseek.oracle import solve_stationary

    report = solve_stationary(game, np.array([1.0]), tol=1e-12)
    assert report.converged
    assert abs(report.x[0] - root) <= 1e-9


def test_cross_coalition_coupling_allowed():
    game = build_congestion_game(
        {"a": 20.0},
        [FlowAgent(1, ("a",), 10.0), FlowAgent(2, ("a",), 10.0)],
        kappa=10.0,
    )
    assert game.n_coalitions == 2
    assert "x2_1" in render(game.coalitions[0].costs[0])
    # cross-coalition sharing does not create intra-coalition edges
    assert game.coalitions[0].interference.edges == ()
