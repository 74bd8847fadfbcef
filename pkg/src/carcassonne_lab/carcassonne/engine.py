"""Two-player Carcassonne base game.

Features are tracked incrementally with a union-find over *global feature
ids* (``tile serial * 8 + slot``).  Every union-find root owns one segment
record (a plain tuple, see ``_K`` ... ``_DONE``) so copying a state is a
handful of shallow container copies.

Public functions treat :class:`GameState` as immutable.  Methods prefixed
with ``_`` mutate in place and are only used on scratch copies (rollouts,
search).
"""

from __future__ import annotations

import random
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from ..game_api import ContractError, GameOutcome, Player, StochasticGame
from .tiles import (
    CITY,
    DIRS,
    FIELD,
    MAX_FEATURES,
    MONASTERY,
    ROAD,
    SCORING,
    TileKind,
    TileSet,
    opposite_port,
    standard_tileset,
)

MEEPLES = 7

# segment tuple layout
_K, _TILES, _OPEN, _PEN, _M0, _M1, _ADJ, _DONE = range(8)
_EMPTY: frozenset = frozenset()
_OPP = tuple(opposite_port(p) for p in range(12))

Cell = Tuple[int, int]


class Action(NamedTuple):
    x: int
    y: int
    rot: int
    meeple: Optional[int] = None

    @property
    def cell(self) -> Cell:
        return (self.x, self.y)


TileRef = Union[int, str, TileKind]


def _find(parent: List[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


class GameState:
    __slots__ = (
        "ts",
        "board",
        "parent",
        "segs",
        "cloisters",
        "frontier",
        "deck",
        "pos",
        "drawn",
        "_pl",
        "discarded",
        "meeples",
        "scores",
        "to_move",
        "turn",
        "turns",
        "n_placed",
        "seed",
    )

    # -- construction -------------------------------------------------
    def copy(self) -> "GameState":
        c = object.__new__(GameState)
        c.ts = self.ts
        c.board = self.board.copy()
        c.parent = self.parent[:]
        c.segs = self.segs.copy()
        c.cloisters = self.cloisters.copy()
        c.frontier = self.frontier.copy()
        c.deck = self.deck
        c.pos = self.pos
        c.drawn = self.drawn
        c._pl = self._pl
        c.discarded = self.discarded
        c.meeples = self.meeples[:]
        c.scores = self.scores[:]
        c.to_move = self.to_move
        c.turn = self.turn
        c.turns = self.turns[:]
        c.n_placed = self.n_placed
        c.seed = self.seed
        return c

    # -- read-only views ------------------------------------------------
    @property
    def current_player(self) -> Player:
        return Player(self.to_move)

    @property
    def remaining(self) -> Tuple[int, ...]:
        return self.deck[self.pos:]

    @property
    def drawn_tile(self) -> Optional[TileKind]:
        return None if self.drawn is None else self.ts.kinds[self.drawn]

    @property
    def is_terminal(self) -> bool:
        return self.drawn is None and self.pos >= len(self.deck)

    def score(self, p: int) -> int:
        return self.scores[p]

    def find(self, gid: int) -> int:
        return _find(self.parent, gid)

    def segment(self, gid: int) -> tuple:
        return self.segs[_find(self.parent, gid)]

    def feature_gid(self, cell: Cell, slot: int) -> int:
        return self.board[cell][2] * MAX_FEATURES + slot

    def meeples_on_board(self) -> List[int]:
        counts = [0, 0]
        for s in self.segs.values():
            counts[0] += s[_M0]
            counts[1] += s[_M1]
        return counts

    # -- placement enumeration ----------------------------------------
    def _placements_for(self, kind: int) -> Tuple[Tuple[Cell, int], ...]:
        groups = self.ts.rotation_groups[kind]
        out = []
        for cell, (mask, value) in self.frontier.items():
            for code, rots in groups:
                if code & mask == value:
                    for r in rots:
                        out.append((cell, r))
        return tuple(out)

    def _blocked_slots(self, cell: Cell, orient, player: int) -> List[bool]:
        """Per slot: would a meeple there join a feature the opponent holds?

        Slots of the new tile that touch the same neighbouring segment end up
        in one feature, so the check follows those merges transitively.
        """
        board = self.board
        orients = self.ts.orientations
        parent = self.parent
        segs = self.segs
        key = _M1 if player == 0 else _M0
        x, y = cell
        n = len(orient.feature_links)
        comp = list(range(n))

        def root(a: int) -> int:
            while comp[a] != a:
                a = comp[a]
            return a

        owner: Dict[int, int] = {}
        for d in range(4):
            dx, dy = DIRS[d]
            nb = board.get((x + dx, y + dy))
            if nb is None:
                continue
            nport = orients[nb[0]][nb[1]].port_feature
            nbase = nb[2] * MAX_FEATURES
            for slot, p in orient.side_links[d]:
                r = _find(parent, nbase + nport[_OPP[p]])
                o = owner.get(r)
                if o is None:
                    owner[r] = slot
                else:
                    ra, rb = root(o), root(slot)
                    if ra != rb:
                        comp[rb] = ra
        bad = set()
        for r, slot in owner.items():
            if segs[r][key]:
                bad.add(root(slot))
        return [root(s) in bad for s in range(n)]

    def _claimable(self, cell: Cell, orient, slot: int, player: int) -> bool:
        if not orient.feature_links[slot]:  # monastery
            return True
        return not self._blocked_slots(cell, orient, player)[slot]

    def _actions(self) -> List[Action]:
        kind = self.drawn
        p = self.to_move
        orients = self.ts.orientations[kind]
        nslots = len(self.ts.kinds[kind].features)
        can_meeple = self.meeples[p] > 0
        out = []
        for cell, r in self._pl:
            x, y = cell
            out.append(Action(x, y, r, None))
            if can_meeple:
                blocked = self._blocked_slots(cell, orients[r], p)
                for slot in range(nslots):
                    if not blocked[slot]:
                        out.append(Action(x, y, r, slot))
        return out

    def _random_action(self, rng: random.Random) -> Action:
        """Uniform over legal actions by rejection sampling on placement x slot."""
        pl = self._pl
        p = self.to_move
        kind = self.drawn
        width = len(self.ts.kinds[kind].features) + 1 if self.meeples[p] > 0 else 1
        orients = self.ts.orientations[kind]
        n = len(pl) * width
        while True:
            i = rng.randrange(n)
            cell, r = pl[i // width]
            j = i % width
            if j == 0:
                return Action(cell[0], cell[1], r, None)
            if self._claimable(cell, orients[r], j - 1, p):
                return Action(cell[0], cell[1], r, j - 1)

    # -- mutation (scratch states only) ---------------------------------
    def _union(self, keep: int, other: int, closing: bool) -> None:
        parent = self.parent
        segs = self.segs
        ra = _find(parent, keep)
        rb = _find(parent, other)
        if ra == rb:
            if closing:
                s = segs[ra]
                segs[ra] = (s[0], s[1], s[2] - 2, s[3], s[4], s[5], s[6], s[7])
            return
        sa = segs[ra]
        sb = segs.pop(rb)
        parent[rb] = ra
        segs[ra] = (
            sa[0],
            sa[1] | sb[1],
            sa[2] + sb[2] - (2 if closing else 0),
            sa[3] + sb[3],
            sa[4] + sb[4],
            sa[5] + sb[5],
            sa[6] | sb[6],
            False,
        )

    def _award(self, s: tuple, points: int) -> None:
        m0, m1 = s[_M0], s[_M1]
        if m0 >= m1 and m0:
            self.scores[0] += points
        if m1 >= m0 and m1:
            self.scores[1] += points

    def _place(self, kind: int, x: int, y: int, rot: int, slot: Optional[int], frontier: bool = True) -> None:
        ts = self.ts
        kdef = ts.kinds[kind]
        o = ts.orientations[kind][rot]
        board = self.board
        parent = self.parent
        segs = self.segs
        serial = self.n_placed
        self.n_placed = serial + 1
        board[(x, y)] = (kind, rot, serial)
        base = serial * MAX_FEATURES
        tiles = frozenset((serial,))
        for s, f in enumerate(kdef.features):
            gid = base + s
            parent[gid] = gid
            fk = f.kind
            if fk == CITY:
                segs[gid] = (CITY, tiles, len(o.feature_links[s]), int(kdef.pennant), 0, 0, _EMPTY, False)
            elif fk == ROAD:
                segs[gid] = (ROAD, tiles, len(o.feature_links[s]), 0, 0, 0, _EMPTY, False)
            elif fk == FIELD:
                adj = frozenset(base + c for c in f.adjacent_cities) if f.adjacent_cities else _EMPTY
                segs[gid] = (FIELD, _EMPTY, 0, 0, 0, 0, adj, False)
            else:
                segs[gid] = (MONASTERY, tiles, 0, 0, 0, 0, _EMPTY, False)
        orients = ts.orientations
        feats = kdef.features
        for d in range(4):
            dx, dy = DIRS[d]
            nb = board.get((x + dx, y + dy))
            if nb is None:
                continue
            nport = orients[nb[0]][nb[1]].port_feature
            nbase = nb[2] * MAX_FEATURES
            for s, p in o.side_links[d]:
                self._union(nbase + nport[_OPP[p]], base + s, feats[s].kind != FIELD)

        p = self.to_move
        if slot is not None:
            r = _find(parent, base + slot)
            sg = segs[r]
            if p == 0:
                segs[r] = (sg[0], sg[1], sg[2], sg[3], sg[4] + 1, sg[5], sg[6], sg[7])
            else:
                segs[r] = (sg[0], sg[1], sg[2], sg[3], sg[4], sg[5] + 1, sg[6], sg[7])
            self.meeples[p] -= 1
            if feats[slot].kind == MONASTERY:
                self.cloisters[(x, y)] = base + slot

        # completed cities and roads
        for s, f in enumerate(feats):
            fk = f.kind
            if fk != CITY and fk != ROAD:
                continue
            r = _find(parent, base + s)
            sg = segs[r]
            if sg[_OPEN] or sg[_DONE]:
                continue
            if sg[_M0] or sg[_M1]:
                if fk == CITY:
                    pts = SCORING["city_tile"] * len(sg[_TILES]) + SCORING["city_pennant"] * sg[_PEN]
                else:
                    pts = SCORING["road_tile"] * len(sg[_TILES])
                self._award(sg, pts)
                self.meeples[0] += sg[_M0]
                self.meeples[1] += sg[_M1]
            segs[r] = (sg[0], sg[1], 0, sg[3], 0, 0, sg[6], True)

        # monasteries with a meeple in the 3x3 block around the new tile
        if self.cloisters:
            for cx in (x - 1, x, x + 1):
                for cy in (y - 1, y, y + 1):
                    gid = self.cloisters.get((cx, cy))
                    if gid is None or self._neighbourhood(cx, cy) < 9:
                        continue
                    sg = segs[gid]
                    self._award(sg, SCORING["monastery_complete"])
                    self.meeples[0] += sg[_M0]
                    self.meeples[1] += sg[_M1]
                    segs[gid] = (sg[0], sg[1], 0, 0, 0, 0, sg[6], True)
                    del self.cloisters[(cx, cy)]

        if frontier:
            fr = self.frontier
            fr.pop((x, y), None)
            edges = o.edges
            for d in range(4):
                dx, dy = DIRS[d]
                n = (x + dx, y + dy)
                if n in board:
                    continue
                opp = ((d + 2) % 4) * 2
                mask, value = fr.get(n, (0, 0))
                fr[n] = (mask | (3 << opp), value | (edges[d] << opp))

    def _neighbourhood(self, x: int, y: int) -> int:
        board = self.board
        return sum(1 for cx in (x - 1, x, x + 1) for cy in (y - 1, y, y + 1) if (cx, cy) in board)

    def _draw(self) -> None:
        deck = self.deck
        while self.pos < len(deck):
            k = deck[self.pos]
            self.pos += 1
            pl = self._placements_for(k)
            if pl:
                self.drawn = k
                self._pl = pl
                return
            self.discarded = self.discarded + (k,)
        self.drawn = None
        self._pl = ()

    def _step(self, action: Action, draw: bool = True, frontier: Optional[bool] = None) -> None:
        """Place the drawn tile; ``draw=False`` stops before the next draw.

        ``frontier`` (default: same as ``draw``) keeps the open-cell table up
        to date, needed if placements are enumerated afterwards.
        """
        self._place(self.drawn, action.x, action.y, action.rot, action.meeple, frontier=draw if frontier is None else frontier)
        self.turns[self.to_move] += 1
        self.to_move = 1 - self.to_move
        self.turn += 1
        self.drawn = None
        self._pl = ()
        if draw:
            self._draw()

    def _check_legal(self, action: Action) -> None:
        if self.drawn is None:
            raise ContractError("no drawn tile")
        if ((action.x, action.y), action.rot) not in self._pl:
            raise ContractError(f"illegal placement {action.x},{action.y} rot {action.rot}")
        if action.meeple is not None:
            kind = self.ts.kinds[self.drawn]
            if not 0 <= action.meeple < len(kind.features):
                raise ContractError(f"no feature slot {action.meeple} on tile {kind.id}")
            if self.meeples[self.to_move] <= 0:
                raise ContractError("no meeples left")
            o = self.ts.orientations[self.drawn][action.rot]
            if not self._claimable((action.x, action.y), o, action.meeple, self.to_move):
                raise ContractError(f"feature slot {action.meeple} is held by the opponent")

    def __repr__(self) -> str:
        tile = "-" if self.drawn is None else self.ts.kinds[self.drawn].id
        return (
            f"GameState(turn={self.turn}, to_move=P{self.to_move + 1}, drawn={tile}, "
            f"scores={tuple(self.scores)}, meeples={tuple(self.meeples)}, deck={len(self.deck) - self.pos})"
        )


# ---------------------------------------------------------------------------
# public API


def _kind_index(ts: TileSet, tile: TileRef) -> int:
    if isinstance(tile, TileKind):
        return tile.index
    if isinstance(tile, str):
        return ts.by_id(tile).index
    return int(tile)


def shuffled_deck(seed, tileset: Optional[TileSet] = None) -> Tuple[int, ...]:
    """The 71 non-start tiles in the order ``seed`` deals them."""
    ts = tileset or standard_tileset()
    pool = []
    for k in ts.kinds:
        n = k.count - (1 if k.index == ts.start else 0)
        pool.extend([k.index] * n)
    random.Random(f"deck/{seed}").shuffle(pool)
    return tuple(pool)


def new_game(
    seed=0,
    deck: Optional[Sequence[TileRef]] = None,
    tileset: Optional[TileSet] = None,
) -> GameState:
    """Start tile at the origin, P1 to move with the first tile drawn.

    ``deck`` overrides the seeded shuffle with an explicit draw order (used by
    fixtures); it need not contain the full tile set.
    """
    ts = tileset or standard_tileset()
    s = object.__new__(GameState)
    s.ts = ts
    s.board = {}
    s.parent = [0] * (ts.total * MAX_FEATURES)
    s.segs = {}
    s.cloisters = {}
    s.frontier = {}
    s.deck = shuffled_deck(seed, ts) if deck is None else tuple(_kind_index(ts, t) for t in deck)
    s.pos = 0
    s.drawn = None
    s._pl = ()
    s.discarded = ()
    s.meeples = [MEEPLES, MEEPLES]
    s.scores = [0, 0]
    s.to_move = 0
    s.turn = 0
    s.turns = [0, 0]
    s.n_placed = 0
    s.seed = seed
    s._place(ts.start, 0, 0, 0, None)
    s._draw()
    return s


def legal_placements(state: GameState, tile: Optional[TileRef] = None) -> List[Tuple[Cell, int]]:
    if tile is None:
        if state.drawn is None:
            raise ContractError("no drawn tile")
        return list(state._pl)
    return list(state._placements_for(_kind_index(state.ts, tile)))


def legal_actions(state: GameState) -> List[Action]:
    if state.drawn is None:
        raise ContractError("legal_actions needs a drawn tile")
    return state._actions()


def apply(state: GameState, action: Action) -> GameState:
    state._check_legal(action)
    nxt = state.copy()
    nxt._step(action)
    return nxt


def is_terminal(state: GameState) -> bool:
    return state.is_terminal


def current_player(state: GameState) -> Player:
    return Player(state.to_move)


def draw_tile(state: GameState) -> GameState:
    """Pop the next placeable tile of the (already shuffled) deck."""
    if state.pos >= len(state.deck):
        raise ContractError("draw from an empty deck")
    nxt = state.copy()
    nxt._draw()
    return nxt


def end_game_points(state: GameState) -> List[int]:
    """Points each player would add at game end (farms and incomplete features)."""
    extra = [0, 0]
    parent = state.parent
    segs = state.segs

    def pay(sg, pts):
        m0, m1 = sg[_M0], sg[_M1]
        if m0 >= m1 and m0:
            extra[0] += pts
        if m1 >= m0 and m1:
            extra[1] += pts

    for sg in segs.values():
        if sg[_DONE] or not (sg[_M0] or sg[_M1]):
            continue
        k = sg[_K]
        if k == CITY:
            pay(sg, SCORING["end_city_tile"] * len(sg[_TILES]) + SCORING["end_city_pennant"] * sg[_PEN])
        elif k == ROAD:
            pay(sg, SCORING["end_road_tile"] * len(sg[_TILES]))
        elif k == FIELD:
            cities = {_find(parent, g) for g in sg[_ADJ]}
            done = sum(1 for c in cities if segs[c][_DONE])
            if done:
                pay(sg, SCORING["farm_city"] * done)
    for (x, y), gid in state.cloisters.items():
        pay(segs[gid], state._neighbourhood(x, y))
    return extra


def final_scoring(state: GameState) -> GameOutcome:
    if not state.is_terminal:
        raise ContractError("final_scoring on a non-terminal state")
    extra = end_game_points(state)
    return GameOutcome(state.scores[0] + extra[0], state.scores[1] + extra[1], True)


def with_drawn(state: GameState, tile: TileRef) -> GameState:
    """Copy where ``tile`` is the drawn tile and the rest of the unseen pool is the deck.

    The unseen pool is the remaining deck plus the currently drawn tile; the
    resulting deck order is unspecified.
    """
    k = _kind_index(state.ts, tile)
    pool = list(state.deck[state.pos:])
    if state.drawn is not None:
        pool.append(state.drawn)
    pool.remove(k)
    nxt = state.copy()
    nxt.deck = tuple(pool)
    nxt.pos = 0
    nxt.drawn = k
    nxt._pl = nxt._placements_for(k)
    return nxt


def unseen_tiles(state: GameState) -> Dict[int, int]:
    """Multiset of tile kinds the player to move cannot see (deck plus drawn tile)."""
    counts: Dict[int, int] = {}
    for k in state.deck[state.pos:]:
        counts[k] = counts.get(k, 0) + 1
    if state.drawn is not None:
        counts[state.drawn] = counts.get(state.drawn, 0) + 1
    return counts


class Carcassonne(StochasticGame):
    """Adapter exposing the engine through the generic game contract."""

    def legal_actions(self, state: GameState) -> List[Action]:
        return legal_actions(state)

    def apply(self, state: GameState, action: Action) -> GameState:
        nxt = state.copy()
        nxt._step(action)
        return nxt

    def step(self, state: GameState, action: Action) -> GameState:
        state._step(action)
        return state

    def copy(self, state: GameState) -> GameState:
        return state.copy()

    def is_terminal(self, state: GameState) -> bool:
        return state.is_terminal

    def current_player(self, state: GameState) -> Player:
        return Player(state.to_move)

    def outcome(self, state: GameState) -> GameOutcome:
        return final_scoring(state)

    def determinize(self, state: GameState, rng: random.Random) -> GameState:
        """Scratch copy whose future draws are a fresh shuffle of the remaining deck."""
        c = state.copy()
        rest = list(state.deck[state.pos:])
        rng.shuffle(rest)
        c.deck = tuple(rest)
        c.pos = 0
        return c

    def context(self, state: GameState):
        return state.drawn

    def action_key(self, state: GameState, action: Action):
        return (state.drawn, action.x, action.y, action.rot, action.meeple)

    def playout(self, state: GameState, rng: random.Random, trace: Optional[list] = None) -> GameOutcome:
        while state.drawn is not None:
            a = state._random_action(rng)
            if trace is not None:
                trace.append((state.to_move, (state.drawn, a.x, a.y, a.rot, a.meeple)))
            state._step(a)
        return final_scoring(state)


CARCASSONNE = Carcassonne()


def play_random_game(seed, rng: Optional[random.Random] = None) -> Tuple[GameState, List[Action]]:
    """Play a full game with uniform random actions; returns the terminal state and actions."""
    rng = rng or random.Random(f"random-game/{seed}")
    s = new_game(seed)
    actions = []
    while not s.is_terminal:
        acts = s._actions()
        a = acts[rng.randrange(len(acts))]
        actions.append(a)
        s = apply(s, a)
    return s, actions


def replay_actions(seed, actions: Iterable[Action]) -> GameState:
    s = new_game(seed)
    for a in actions:
        s = apply(s, a)
    return s
