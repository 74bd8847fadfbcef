"""Controller registry and the textual controller grammar.

A controller spec is ``name`` or ``name:key=value,key=value``::

    random
    mcts:k=1.4142,sims=400,reward=R2
    rave:k=0.5,b=10,sims=2800
    star:f=4,depth=2            (f=0 -> Star1, f=1 -> Star2, f>1 -> Star2.5)
    siea:g=20,lambda=4,s=30,final=400,k=1.4142
    ea:...  eap:...             (same keys as siea; eap also takes rollouts=N)

Every controller is called as ``controller.act(state, rng)`` with the game's
per-player rng.  Search controllers take exactly one 64-bit draw per decision
with more than one legal action, so their behaviour at a turn depends only on
(state, that draw).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from .carcassonne.engine import GameState, legal_actions
from .evolution import EvolutionConfig, EvolutionRecord, SemanticBounds, Variant, decide
from .game_api import ContractError, RewardSystem
from .mcts import SearchConfig, search
from .rave import RaveConfig, rave_search
from .star import StarConfig, star_search


class SpecError(ValueError):
    """Malformed controller spec."""


def random_move(state: GameState, rng: random.Random):
    """Uniform over the legal actions."""
    if state.is_terminal:
        raise ContractError("random_move on a terminal state")
    acts = legal_actions(state)
    return acts[0] if len(acts) == 1 else acts[rng.randrange(len(acts))]


class Controller:
    name: str = "controller"
    spec: str = ""

    def act(self, state: GameState, rng: random.Random):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.spec}>"


class RandomController(Controller):
    name = "random"

    def __init__(self, spec: str = "random"):
        self.spec = spec

    def act(self, state, rng):
        return random_move(state, rng)


def _single(state: GameState):
    acts = legal_actions(state)
    return acts[0] if len(acts) == 1 else None


class MCTSController(Controller):
    name = "mcts"

    def __init__(self, cfg: SearchConfig, spec: str = "mcts", trace: Optional[list] = None):
        self.cfg = cfg
        self.spec = spec
        self.trace = trace

    def act(self, state, rng):
        only = _single(state)
        if only is not None:
            return only
        return search(state, self.cfg, random.Random(rng.getrandbits(64)), trace=self.trace)


class RaveController(Controller):
    name = "rave"

    def __init__(self, cfg: RaveConfig, spec: str = "rave", trace: Optional[list] = None):
        self.cfg = cfg
        self.spec = spec
        self.trace = trace

    def act(self, state, rng):
        only = _single(state)
        if only is not None:
            return only
        return rave_search(state, self.cfg, random.Random(rng.getrandbits(64)), trace=self.trace)


class StarController(Controller):
    """Deterministic; the rng is not consumed."""

    name = "star"

    def __init__(self, cfg: StarConfig, spec: str = "star"):
        self.cfg = cfg
        self.spec = spec

    def act(self, state, rng):
        return star_search(state, self.cfg)


class EvolutionController(Controller):
    name = "evo"

    def __init__(self, cfg: EvolutionConfig, spec: str = "siea"):
        self.cfg = cfg
        self.spec = spec
        self.log: List[EvolutionRecord] = []

    def act(self, state, rng):
        action, rec = decide(state, self.cfg, rng)
        self.log.append(rec)
        return action


# -- grammar ---------------------------------------------------------------
def _num(v: str, key: str) -> float:
    try:
        x = float(v)
    except ValueError:
        raise SpecError(f"parameter {key}={v!r} is not a number") from None
    if not math.isfinite(x):
        raise SpecError(f"parameter {key} must be finite")
    return x


def _int(v: str, key: str) -> int:
    try:
        return int(v)
    except ValueError:
        raise SpecError(f"parameter {key}={v!r} is not an integer") from None


def _reward(v: str, key: str) -> RewardSystem:
    try:
        return RewardSystem(v.upper())
    except ValueError:
        raise SpecError(f"parameter {key}={v!r} must be R1 or R2") from None


def _bool(v: str, key: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise SpecError(f"parameter {key}={v!r} is not a boolean")


def _k(v: str, key: str) -> float:
    # "sqrt2" is accepted as a convenience for the canonical constant
    return math.sqrt(2) if v.lower() in ("sqrt2", "√2") else _num(v, key)


_PARAMS: Dict[str, Dict[str, Tuple[str, Callable[[str, str], Any]]]] = {
    "random": {},
    "mcts": {
        "k": ("k", _k),
        "sims": ("simulations", _int),
        "reward": ("reward_system", _reward),
    },
    "rave": {
        "k": ("k", _k),
        "b": ("b_tilde", _num),
        "sims": ("simulations", _int),
        "reward": ("reward_system", _reward),
    },
    "star": {
        "f": ("probing_factor", _int),
        "depth": ("depth", _int),
        "lower": ("lower", _int),
        "upper": ("upper", _int),
        "order": ("ordering", str),
    },
}
_EVO_PARAMS = {
    "g": ("generations", _int),
    "lambda": ("lam", _int),
    "s": ("fitness_sims", _int),
    "final": ("final_search_sims", _int),
    "k": ("k_seed", _k),
    "reward": ("reward_system", _reward),
    "alpha": ("alpha", _num),
    "beta": ("beta", _num),
    "tree": ("tree_mode", str),
    "rollouts": ("ea_p_fitness_rollouts", _int),
    "strict": ("strict_pseudocode", _bool),
}
_VARIANTS = {"siea": Variant.SIEA, "ea": Variant.EA, "eap": Variant.EA_P}
for _n in _VARIANTS:
    _PARAMS[_n] = _EVO_PARAMS

NAMES = tuple(_PARAMS)


@dataclass
class ControllerSpec:
    name: str
    params: Dict[str, Any] = field(default_factory=dict)
    text: str = ""

    def __str__(self) -> str:
        return self.text


def parse_spec(text: str) -> ControllerSpec:
    """Parse and validate ``name[:k=v,...]`` (values are type-checked here)."""
    text = text.strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name not in _PARAMS:
        raise SpecError(f"unknown controller {name!r}; known: {', '.join(NAMES)}")
    table = _PARAMS[name]
    params: Dict[str, Any] = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            key, val = key.strip().lower(), val.strip()
            if not eq or not key or not val:
                raise SpecError(f"malformed parameter {item!r} in {text!r}")
            if key not in table:
                raise SpecError(f"unknown parameter {key!r} for {name}")
            field_name, conv = table[key]
            params[field_name] = conv(val, key)
    return ControllerSpec(name, params, text)


def build(
    spec,
    normalize_q: bool = False,
    strict_pseudocode: bool = False,
    trace: Optional[list] = None,
) -> Controller:
    """Controller instance from a spec string or :class:`ControllerSpec`."""
    cs = parse_spec(spec) if isinstance(spec, str) else spec
    p = dict(cs.params)
    try:
        if cs.name == "random":
            return RandomController(cs.text or "random")
        if cs.name == "mcts":
            return MCTSController(SearchConfig(normalize_q=normalize_q, **p), cs.text, trace)
        if cs.name == "rave":
            return RaveController(RaveConfig(normalize_q=normalize_q, **p), cs.text, trace)
        if cs.name == "star":
            return StarController(StarConfig(**p), cs.text)
        bounds = SemanticBounds(p.pop("alpha", 5.0), p.pop("beta", 10.0))
        p.setdefault("strict_pseudocode", strict_pseudocode)
        cfg = EvolutionConfig(variant=_VARIANTS[cs.name], bounds=bounds, normalize_q=normalize_q, **p)
        return EvolutionController(cfg, cs.text)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"{cs.text}: {exc}") from None
