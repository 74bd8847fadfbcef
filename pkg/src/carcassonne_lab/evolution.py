"""Online per-turn evolution of the MCTS selection expression.

Three variants share one loop: a single parent (seeded with UCT) produces
``lam`` mutated offspring per generation and the best offspring replaces it.

* ``EA_P``: an offspring's fitness is the reward of one episode (select at
  the root with the offspring's expression, roll out) on a scratch tree.
* ``EA``: each offspring runs ``S`` full MCTS iterations on the decision's
  working tree; fitness is the mean reward, the per-iteration rewards are its
  semantics.
* ``SIEA``: as ``EA`` but ties on fitness are broken by semantic similarity
  to the parent (:func:`semantic_select`).

After evolution the turn's move comes from a fresh MCTS search that uses the
evolved expression.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional, Sequence, Tuple

from .carcassonne.engine import CARCASSONNE
from .expression import Expr, depth, node_count, seeded_uct, serialize, subtree_mutation
from .game_api import ContractError, RewardSystem, StochasticGame
from .mcts import ExpressionSelector, SearchConfig, Tree


class Variant(enum.Enum):
    EA_P = "EA_P"
    EA = "EA"
    SIEA = "SIEA"


@dataclass(frozen=True)
class SemanticBounds:
    alpha: float = 5.0
    beta: float = 10.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha < self.beta:
            raise ValueError("need 0 < alpha < beta")


@dataclass
class EvolutionConfig:
    variant: Variant = Variant.SIEA
    mu: int = 1
    lam: int = 4
    generations: int = 20
    fitness_sims: int = 30
    final_search_sims: int = 400
    k_seed: float = math.sqrt(2)
    reward_system: RewardSystem = RewardSystem.R2
    bounds: SemanticBounds = field(default_factory=SemanticBounds)
    tree_mode: str = "shared"  # "shared" (one working tree) or "snapshot"
    strict_pseudocode: bool = False
    ea_p_fitness_rollouts: int = 1
    normalize_q: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.variant, str):
            self.variant = Variant(self.variant.upper())
        if self.mu != 1:
            raise ValueError("only mu = 1 is supported")
        if self.lam < 1 or self.fitness_sims < 1 or self.generations < 0 or self.final_search_sims < 1:
            raise ValueError("lam, fitness_sims and final_search_sims must be >= 1, generations >= 0")
        if self.tree_mode not in ("shared", "snapshot"):
            raise ValueError(f"unknown tree_mode {self.tree_mode!r}")
        if self.ea_p_fitness_rollouts < 1:
            raise ValueError("ea_p_fitness_rollouts must be >= 1")

    @property
    def evolution_budget(self) -> int:
        """Simulations spent on fitness evaluation per decision."""
        if self.variant is Variant.EA_P:
            return self.generations * self.lam * self.ea_p_fitness_rollouts
        return self.generations * self.lam * self.fitness_sims

    @property
    def decision_budget(self) -> int:
        return self.evolution_budget + self.final_search_sims


@dataclass
class Individual:
    expr: Expr
    fitness: Optional[float] = None
    semantics: Optional[List[float]] = None


# -- semantics -------------------------------------------------------------
def ssd(p: Sequence[float], q: Sequence[float]) -> float:
    """Mean absolute componentwise distance."""
    if len(p) != len(q):
        raise ContractError(f"semantics length mismatch: {len(p)} vs {len(q)}")
    if not p:
        raise ContractError("empty semantics")
    return sum(abs(a - b) for a, b in zip(p, q)) / len(p)


def ssi(p: Sequence[float], q: Sequence[float], bounds: SemanticBounds = SemanticBounds()) -> bool:
    d = ssd(p, q)
    return bounds.alpha < d < bounds.beta


def _uniform(items: Sequence[Any], rng: random.Random) -> Any:
    return items[0] if len(items) == 1 else items[rng.randrange(len(items))]


def best_by_fitness(offspring: Sequence[Individual], rng: random.Random) -> Individual:
    h = max(o.fitness for o in offspring)
    return _uniform([o for o in offspring if o.fitness == h], rng)


def semantic_select(
    offspring: Sequence[Individual],
    parent: Individual,
    bounds: SemanticBounds,
    rng: random.Random,
    strict_pseudocode: bool = False,
) -> Individual:
    """Max fitness; ties resolved towards semantic similarity in (alpha, beta), closest to alpha.

    With ``strict_pseudocode`` the literal listing is followed: fewer than two
    tied offspring in range, or none, falls back to a uniform pick over *all*
    offspring.
    """
    if not offspring:
        raise ContractError("no offspring")
    h = max(o.fitness for o in offspring)
    tied = [o for o in offspring if o.fitness == h]
    if len(tied) == 1:
        return tied[0]
    if parent.semantics is None:
        # no parent semantics yet (generation 0): nothing to compare against
        return _uniform(list(offspring) if strict_pseudocode else tied, rng)
    dists = [(o, ssd(o.semantics, parent.semantics)) for o in tied]
    in_range = [(o, d) for o, d in dists if bounds.alpha < d < bounds.beta]
    if strict_pseudocode and len(in_range) < 2:
        return _uniform(list(offspring), rng)
    if not in_range:
        return _uniform(tied, rng)
    gap = min(abs(d - bounds.alpha) for _o, d in in_range)
    return _uniform([o for o, d in in_range if abs(d - bounds.alpha) == gap], rng)


# -- evolution loops -------------------------------------------------------
@dataclass
class EvolutionRecord:
    variant: str
    expression: str
    node_count: int
    depth: int
    fitness: Optional[float]
    semantics: Optional[List[float]]
    generations: int
    evolution_sims: int
    final_sims: int
    short_circuit: bool = False


# called as hook(generation, offspring, parent, winner) after each selection
GenerationHook = Callable[[int, List[Individual], Individual, Individual], None]


class _Counter:
    def __init__(self) -> None:
        self.sims = 0


def evolve_ea_p(
    state: Any,
    cfg: EvolutionConfig,
    rng: random.Random,
    game: StochasticGame = CARCASSONNE,
    counter: Optional[_Counter] = None,
    on_generation: Optional[GenerationHook] = None,
) -> Individual:
    """One-episode fitness on a scratch tree that lives for this decision only."""
    if game.is_terminal(state):
        raise ContractError("evolution from a terminal state")
    parent = Individual(seeded_uct(cfg.k_seed))
    if cfg.generations == 0:
        return parent
    scratch = Tree(state, game, cfg.reward_system, cfg.normalize_q)
    for gen in range(cfg.generations):
        offspring = [Individual(subtree_mutation(parent.expr, rng)) for _ in range(cfg.lam)]
        for o in offspring:
            sel = ExpressionSelector(o.expr, rng, scratch.q_scale)
            rewards = [scratch.iterate(sel, rng, max_depth=1) for _ in range(cfg.ea_p_fitness_rollouts)]
            if counter is not None:
                counter.sims += len(rewards)
            o.fitness = sum(rewards) / len(rewards)
        winner = best_by_fitness(offspring, rng)
        if on_generation is not None:
            on_generation(gen, offspring, parent, winner)
        parent = winner
    return parent


def evolve_ea(
    state: Any,
    cfg: EvolutionConfig,
    rng: random.Random,
    game: StochasticGame = CARCASSONNE,
    counter: Optional[_Counter] = None,
    on_generation: Optional[GenerationHook] = None,
) -> Tuple[Individual, Tree]:
    """EA / SIEA: ``S`` MCTS iterations per offspring on the decision's working tree."""
    if game.is_terminal(state):
        raise ContractError("evolution from a terminal state")
    tree = Tree(state, game, cfg.reward_system, cfg.normalize_q)
    parent = Individual(seeded_uct(cfg.k_seed))
    for gen in range(cfg.generations):
        offspring = [Individual(subtree_mutation(parent.expr, rng)) for _ in range(cfg.lam)]
        # common random numbers: the i-th simulation of every offspring uses slot seed i
        slots = [rng.getrandbits(64) for _ in range(cfg.fitness_sims)]
        trees = []
        for o in offspring:
            t = tree.clone() if cfg.tree_mode == "snapshot" else tree
            sel = ExpressionSelector(o.expr, rng, t.q_scale)
            rewards = []
            for seed in slots:
                sim_rng = random.Random(seed)
                sel.rng = sim_rng
                rewards.append(t.iterate(sel, sim_rng))
            if counter is not None:
                counter.sims += len(rewards)
            o.semantics = rewards
            o.fitness = sum(rewards) / len(rewards)
            trees.append(t)
        if cfg.variant is Variant.SIEA:
            winner = semantic_select(offspring, parent, cfg.bounds, rng, cfg.strict_pseudocode)
        else:
            winner = best_by_fitness(offspring, rng)
        if cfg.tree_mode == "snapshot":
            tree = trees[offspring.index(winner)]
        if on_generation is not None:
            on_generation(gen, offspring, parent, winner)
        parent = winner
    return parent, tree


def decide(
    state: Any,
    cfg: EvolutionConfig,
    rng: random.Random,
    game: StochasticGame = CARCASSONNE,
    budget: Optional[dict] = None,
) -> Tuple[Any, EvolutionRecord]:
    """Evolve an expression for this turn, then search with it.

    Exactly one 64-bit draw is taken from ``rng`` per call (as for the plain
    MCTS controller); evolution and final search use streams derived from it.
    """
    if game.is_terminal(state):
        raise ContractError("decide on a terminal state")
    actions = game.legal_actions(state)
    if len(actions) == 1:
        e = seeded_uct(cfg.k_seed)
        rec = EvolutionRecord(cfg.variant.value, serialize(e), node_count(e), depth(e), None, None, 0, 0, 0, True)
        return actions[0], rec
    search_seed = rng.getrandbits(64)
    evo_rng = random.Random(f"evo/{search_seed}")
    counter = _Counter()
    if cfg.variant is Variant.EA_P:
        best = evolve_ea_p(state, cfg, evo_rng, game, counter)
    else:
        best, _tree = evolve_ea(state, cfg, evo_rng, game, counter)
    scfg = SearchConfig(
        simulations=cfg.final_search_sims,
        k=cfg.k_seed,
        reward_system=cfg.reward_system,
        selection_expr=best.expr,
        normalize_q=cfg.normalize_q,
    )
    final = Tree(state, game, cfg.reward_system, cfg.normalize_q)
    srng = random.Random(search_seed)
    sel = ExpressionSelector(best.expr, srng, final.q_scale)
    for _ in range(scfg.simulations):
        final.iterate(sel, srng)
    action = final.best_action(srng)
    if budget is not None:
        budget["evolution_sims"] = counter.sims
        budget["final_sims"] = final.iterations
    rec = EvolutionRecord(
        variant=cfg.variant.value,
        expression=serialize(best.expr),
        node_count=node_count(best.expr),
        depth=depth(best.expr),
        fitness=best.fitness,
        semantics=best.semantics,
        generations=cfg.generations,
        evolution_sims=counter.sims,
        final_sims=final.iterations,
    )
    return action, rec
