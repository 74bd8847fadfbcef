import math

import pytest

from toy_games import trap_game

from carcassonne_lab.carcassonne import new_game
from carcassonne_lab.mcts import Node
from carcassonne_lab.rave import RaveConfig, beta, rave_backpropagate, rave_search, rave_value


def _pair(n_s, q, n, amaf):
    node = Node(None, None, 0)
    node.visits = n_s
    child = Node("a", "a", 1, node)
    child.visits, child.value_sum = n, q * n
    node.children["a"] = child
    node.amaf = {"a": list(amaf)}
    return node, child


def _uct(q, n_s, n, k):
    return q + 2 * k * math.sqrt(2 * math.log(n_s) / n)


def test_beta_schedule():
    assert beta(30, 10) == pytest.approx(math.sqrt(0.1))
    assert round(beta(30, 10), 4) == 0.3162
    assert beta(10**6, 10) < 0.002


def test_equal_q_gives_uct():
    cfg = RaveConfig(k=1.0)
    node, child = _pair(30, 4.0, 5, (12, 48.0))
    assert rave_value(node, child, cfg) == pytest.approx(_uct(4.0, 30, 5, 1.0), abs=1e-12)


def test_large_n_close_to_uct():
    cfg = RaveConfig(k=1.0)
    node, child = _pair(10**6, 2.0, 1000, (2000, 2000 * 7.0))
    diff = abs(rave_value(node, child, cfg) - _uct(2.0, 10**6, 1000, 1.0))
    assert diff <= 0.002 * abs(7.0 - 2.0)


def test_tiny_b_tilde_limit():
    cfg = RaveConfig(k=0.5, b_tilde=1e-9)
    # beta ~ 2.6e-6 here, so the 1e-6 tolerance needs |Q_amaf - Q| below ~0.4
    node, child = _pair(50, -3.0, 7, (20, 20 * -2.7))
    assert rave_value(node, child, cfg) == pytest.approx(_uct(-3.0, 50, 7, 0.5), abs=1e-6)
    # in general the gap is exactly beta * |Q_amaf - Q|
    node, child = _pair(50, -3.0, 7, (20, 100.0))
    gap = abs(rave_value(node, child, cfg) - _uct(-3.0, 50, 7, 0.5))
    assert gap == pytest.approx(beta(50, 1e-9) * 8.0, rel=1e-6)


def test_zero_amaf_forces_plain_uct():
    cfg = RaveConfig(k=1.0)
    node, child = _pair(30, 4.0, 5, (0, 0.0))
    assert rave_value(node, child, cfg) == _uct(4.0, 30, 5, 1.0)


def test_amaf_update_dedup_and_player_filter():
    root = Node(None, None, 0)
    root.amaf = {"a": [0, 0.0], "b": [0, 0.0]}
    rave_backpropagate([root], [(0, "a"), (1, "b"), (0, "a")], 6.0)
    assert root.amaf["a"] == [1, 6.0]
    assert root.amaf["b"] == [0, 0.0]
    assert root.visits == 1


def test_amaf_reward_zero_pulls_mean_down():
    root = Node(None, None, 0)
    root.amaf = {"a": [2, 10.0]}
    rave_backpropagate([root], [(0, "a")], 0.0)
    assert root.amaf["a"][1] / root.amaf["a"][0] < 5.0


def test_amaf_no_matching_keys():
    root = Node(None, None, 0)
    root.amaf = {"a": [3, 3.0]}
    rave_backpropagate([root], [(0, "z"), (1, "a")], 9.0)
    assert root.amaf == {"a": [3, 3.0]}


@pytest.mark.parametrize("seed", [0, 1])
def test_amaf_visits_dominate_real_visits(seed):
    out = []
    rave_search(new_game(seed), RaveConfig(simulations=120, seed=seed), tree_out=out)
    tree = out[0]
    checked = 0
    for n in tree.root.iter_nodes():
        for c in n.children.values():
            assert n.amaf[c.key][0] >= c.visits
            checked += 1
    assert checked > 100


def test_rave_toy_and_determinism():
    g = trap_game()
    cfg = RaveConfig(simulations=300, k=1.0, seed=4)
    assert rave_search((), cfg, game=g) == "R"
    s = new_game(6)
    c2 = RaveConfig(simulations=50, seed=2)
    assert rave_search(s, c2) == rave_search(s, c2)
