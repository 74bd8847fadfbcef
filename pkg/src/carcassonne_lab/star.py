"""Depth-limited expectiminimax with Star1 / Star2 / Star2.5 chance pruning.

Depth 2 is: the root player's move (its tile is known), a chance node over
the next tile the opponent draws, then the opponent's move, then a leaf.
The chance node lists the unseen tile kinds that have at least one legal
placement, weighted by their multiplicity; unplaceable tiles would be
discarded and redrawn, so this is the exact distribution of the opponent's
tile.

Values are exact rationals (:class:`fractions.Fraction`), so a pruned search
and a brute-force expectimax agree bit for bit.  Leaves are clamped to
``[lower, upper]``, which is what makes the Star bounds valid.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .carcassonne.engine import Action, GameState, end_game_points, legal_actions
from .game_api import ContractError

_EPS = Fraction(1, 10**9)  # far below the gap between distinct values (denominators <= 71)


@dataclass
class StarConfig:
    depth: int = 2
    lower: int = -100
    upper: int = 100
    probing_factor: int = 0  # 0 = Star1, 1 = Star2, >1 = Star2.5
    ordering: str = "best"  # "best", "worst" (reversed) or "none" (canonical)

    def __post_init__(self) -> None:
        if self.lower >= self.upper:
            raise ValueError("lower must be below upper")
        if self.probing_factor < 0:
            raise ValueError("probing factor must be >= 0")
        if self.depth not in (1, 2):
            raise ValueError("only depth 1 and 2 are supported")
        if self.ordering not in ("best", "worst", "none"):
            raise ValueError(f"unknown ordering {self.ordering!r}")

    @property
    def variant(self) -> str:
        return {0: "Star1", 1: "Star2"}.get(self.probing_factor, "Star2.5")


@dataclass
class StarStats:
    nodes: int = 0  # leaf values examined by the search (probes included)
    leaf_evals: int = 0  # leaf states actually built, ordering included
    ordering_evals: int = 0
    probes: int = 0
    chance_nodes: int = 0
    cutoffs: int = 0
    probe_cutoffs: int = 0
    extra: Dict[str, int] = field(default_factory=dict)


def _clamp(v: int, cfg: StarConfig) -> int:
    return cfg.lower if v < cfg.lower else cfg.upper if v > cfg.upper else v


def evaluate_leaf(state: GameState, perspective: int, cfg: Optional[StarConfig] = None, terminal: Optional[bool] = None) -> int:
    """Score difference for ``perspective``, with end-game scoring if terminal, clamped."""
    cfg = cfg or StarConfig()
    if terminal is None:
        terminal = state.is_terminal
    s = state.scores
    d = s[perspective] - s[1 - perspective]
    if terminal:
        extra = end_game_points(state)
        d += extra[perspective] - extra[1 - perspective]
    return _clamp(d, cfg)


class _Outcome:
    """One chance outcome: the opponent draws ``kind``."""

    __slots__ = ("kind", "count", "prob", "placements", "order", "values", "terminal")

    def __init__(self, kind: int, count: int, prob: Fraction, placements, terminal: bool):
        self.kind = kind
        self.count = count
        self.prob = prob
        self.placements = placements
        self.order: Optional[List[Action]] = None
        self.values: Dict[Action, int] = {}
        self.terminal = terminal


class _Search:
    def __init__(self, state: GameState, cfg: StarConfig, stats: StarStats):
        self.state = state
        self.cfg = cfg
        self.stats = stats
        self.p = state.to_move
        self.L = Fraction(cfg.lower)
        self.U = Fraction(cfg.upper)

    # -- leaves ----------------------------------------------------------
    def _leaf(self, s1: GameState, o: _Outcome, a: Action) -> int:
        t = s1.copy()
        t.drawn = o.kind
        t._step(a, draw=False, frontier=False)
        self.stats.leaf_evals += 1
        return evaluate_leaf(t, self.p, self.cfg, terminal=o.terminal)

    def _value(self, s1: GameState, o: _Outcome, a: Action) -> int:
        v = o.values.get(a)
        if v is None:
            v = o.values[a] = self._leaf(s1, o, a)
        self.stats.nodes += 1
        return v

    def _ordered(self, s1: GameState, o: _Outcome) -> List[Action]:
        """Opponent moves, most promising for the opponent first.

        Placements are ranked by the leaf value of their meeple-less action;
        meeple variants follow their placement.
        """
        if o.order is not None:
            return o.order
        s1.drawn = o.kind
        s1._pl = o.placements
        acts = s1._actions()
        s1.drawn = None
        s1._pl = ()
        if self.cfg.ordering == "none":
            o.order = acts
            return acts
        groups: Dict[Tuple[int, int, int], List[Action]] = {}
        for a in acts:
            groups.setdefault((a.x, a.y, a.rot), []).append(a)
        keyed = []
        for idx, (pl, group) in enumerate(groups.items()):
            bare = group[0]  # meeple-less action comes first in canonical order
            v = o.values.get(bare)
            if v is None:
                v = o.values[bare] = self._leaf(s1, o, bare)
                self.stats.ordering_evals += 1
            keyed.append((v, idx, group))
        keyed.sort(key=lambda t: (t[0], t[1]))
        if self.cfg.ordering == "worst":
            keyed.reverse()
        o.order = [a for _v, _i, g in keyed for a in g]
        return o.order

    # -- min node --------------------------------------------------------
    def _min_node(self, s1: GameState, o: _Outcome, alpha, start: int = 0, stop: Optional[int] = None, v=None):
        """Minimum over the opponent's moves, returning early once <= alpha."""
        order = self._ordered(s1, o)
        end = len(order) if stop is None else min(stop, len(order))
        for a in order[start:end]:
            x = self._value(s1, o, a)
            if v is None or x < v:
                v = x
                if alpha is not None and v <= alpha:
                    return v
        return v

    # -- chance node -----------------------------------------------------
    def _outcomes(self, s1: GameState) -> Tuple[List[_Outcome], int]:
        unseen = Counter(s1.deck[s1.pos:])
        total = sum(unseen.values())
        rows = []
        for k, c in unseen.items():
            pl = s1._placements_for(k)
            if pl:
                rows.append((c, k, pl))
        rows.sort(key=lambda r: (-r[0], r[1]))
        w = sum(r[0] for r in rows)
        outs = [_Outcome(k, c, Fraction(c, w), pl, total == 1) for c, k, pl in rows]
        return outs, w

    def chance(self, s1: GameState, alpha: Fraction, beta: Fraction) -> Fraction:
        self.stats.chance_nodes += 1
        outs, w = self._outcomes(s1)
        if not outs:
            # nothing left that can be placed: the game ends after the root move
            return Fraction(evaluate_leaf(s1, self.p, self.cfg, terminal=True))
        L, U = self.L, self.U
        n = len(outs)
        ub = [U] * n
        f = self.cfg.probing_factor
        if f > 0:
            done = Fraction(0)
            rest = Fraction(1)
            for i, o in enumerate(outs):
                v = self._min_node(s1, o, None, 0, f)
                self.stats.probes += 1
                ub[i] = Fraction(v)
                done += o.prob * ub[i]
                rest -= o.prob
                bound = done + U * rest
                if bound <= alpha:
                    self.stats.probe_cutoffs += 1
                    self.stats.cutoffs += 1
                    return bound
        done = Fraction(0)
        rest_ub = sum((o.prob * ub[i] for i, o in enumerate(outs)), Fraction(0))
        rest_p = Fraction(1)
        for i, o in enumerate(outs):
            p_i = o.prob
            rest_ub -= p_i * ub[i]
            rest_p -= p_i
            a_i = (alpha - done - rest_ub) / p_i
            b_i = (beta - done - L * rest_p) / p_i
            # probed moves are cached; the scan restarts from the first move
            v = self._min_node(s1, o, a_i if a_i >= L else None)
            if v <= a_i:
                self.stats.cutoffs += 1
                return done + p_i * v + rest_ub
            if v >= b_i:
                self.stats.cutoffs += 1
                return done + p_i * v + L * rest_p
            done += p_i * v
        return done

    # -- root ------------------------------------------------------------
    def root(self) -> Tuple[Fraction, Action]:
        state = self.state
        acts = legal_actions(state)
        p = self.p
        kids = []
        for i, a in enumerate(acts):
            s1 = state.copy()
            s1._step(a, draw=False, frontier=True)
            g = s1.scores[p] - s1.scores[1 - p]
            kids.append((g, i, a, s1))
        if self.cfg.ordering == "best":
            kids.sort(key=lambda t: (-t[0], t[1]))
        elif self.cfg.ordering == "worst":
            kids.sort(key=lambda t: (t[0], t[1]))
        best: Optional[Fraction] = None
        best_i = -1
        best_a: Optional[Action] = None
        top = self.U + 1
        for _g, i, a, s1 in kids:
            if self.cfg.depth == 1:
                unseen = len(s1.deck) - s1.pos
                v = Fraction(evaluate_leaf(s1, p, self.cfg, terminal=unseen == 0 or not self._outcomes(s1)[0]))
                if best is None or v > best or (v == best and i < best_i):
                    best, best_i, best_a = v, i, a
                continue
            if best is None:
                window = self.L - 1
            else:
                # an earlier canonical action wins ties, so it must be resolved at equality too
                window = best - _EPS if i < best_i else best
            v = self.chance(s1, window, top)
            if v > window and (best is None or v > best or (v == best and i < best_i)):
                best, best_i, best_a = v, i, a
        assert best is not None and best_a is not None
        return best, best_a


def star_value(state: GameState, cfg: Optional[StarConfig] = None, stats: Optional[StarStats] = None) -> Tuple[Fraction, Action]:
    """Exact depth-limited value and the first (canonical order) action attaining it."""
    if state.drawn is None:
        raise ContractError("star search needs a drawn tile")
    cfg = cfg or StarConfig()
    return _Search(state, cfg, stats if stats is not None else StarStats()).root()


def star_search(state: GameState, cfg: Optional[StarConfig] = None, stats: Optional[StarStats] = None) -> Action:
    if state.drawn is None:
        raise ContractError("star search needs a drawn tile")
    acts = legal_actions(state)
    if len(acts) == 1:
        return acts[0]
    return star_value(state, cfg, stats)[1]


def star1_chance(values, probs, alpha, beta, lower=-100, upper=100, upper_bounds=None):
    """Star1 over an explicit chance node whose children are known values.

    ``values[i]`` may be a callable returning the child's value for a window
    ``(a, b)``; plain numbers are used as is.  Returns ``(value, evaluated)``
    where ``evaluated`` counts children looked at before any cutoff.
    """
    L, U = Fraction(lower), Fraction(upper)
    probs = [Fraction(p) for p in probs]
    ub = [Fraction(u) for u in upper_bounds] if upper_bounds is not None else [U] * len(probs)
    done = Fraction(0)
    rest_ub = sum((p * u for p, u in zip(probs, ub)), Fraction(0))
    rest_p = Fraction(1)
    alpha, beta = Fraction(alpha), Fraction(beta)
    for i, p_i in enumerate(probs):
        rest_ub -= p_i * ub[i]
        rest_p -= p_i
        a_i = (alpha - done - rest_ub) / p_i
        b_i = (beta - done - L * rest_p) / p_i
        v = values[i]
        v = Fraction(v(max(a_i, L), min(b_i, U)) if callable(v) else v)
        if v <= a_i:
            return done + p_i * v + rest_ub, i + 1
        if v >= b_i:
            return done + p_i * v + L * rest_p, i + 1
        done += p_i * v
    return done, len(probs)


def star2_probe(probe_values, values, probs, alpha, beta, lower=-100, upper=100):
    """Star2 over an explicit node: ``probe_values[i]`` is an upper bound on child i.

    Returns ``(value, probed, evaluated)``; on a probing cutoff ``evaluated`` is 0.
    """
    U = Fraction(upper)
    probs = [Fraction(p) for p in probs]
    done = Fraction(0)
    rest = Fraction(1)
    for i, (p_i, u) in enumerate(zip(probs, probe_values)):
        done += p_i * Fraction(u)
        rest -= p_i
        bound = done + U * rest
        if bound <= Fraction(alpha):
            return bound, i + 1, 0
    v, n = star1_chance(values, probs, alpha, beta, lower, upper, upper_bounds=probe_values)
    return v, len(probs), n
