"""Matches, league scoring, significance tests and result files.

League scoring per match: the side with more game wins takes 4 points, equal
game wins give both sides 2.  A match winner whose share of decided games is
at least 0.75 gets one bonus win point (BWP); a match loser within two games
of the winner gets one bonus loss point (BLP).  Rows are ranked by points,
then by PD (mean per-game score difference), then by controller id.

Game seeds inside a match are ``base_seed + game_idx``; in a league every
match reuses the same seeds, so both orderings of a pair see the same decks.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from scipy import stats

from .carcassonne.engine import apply, final_scoring, new_game
from .carcassonne.records import GameRecord
from .controllers import Controller, EvolutionController, build
from .game_api import ContractError

CSV_HEADER = ("match_id", "p1", "p2", "game_idx", "seed", "winner", "score1", "score2", "turns")
SIGNIFICANCE = 0.01

ControllerLike = Union[str, Controller]


# -- single games ----------------------------------------------------------
@dataclass
class GameResult:
    seed: int
    score1: int
    score2: int
    turns: int
    expressions: List[dict] = field(default_factory=list)
    record: Optional[str] = None

    @property
    def winner(self) -> int:
        """1, 2 or 0 for a draw."""
        return 1 if self.score1 > self.score2 else 2 if self.score2 > self.score1 else 0


def player_rngs(seed: int) -> Tuple[random.Random, random.Random]:
    return random.Random(f"ctl/{seed}/0"), random.Random(f"ctl/{seed}/1")


def _as_controller(c: ControllerLike, **kw) -> Controller:
    return build(c, **kw) if isinstance(c, str) else c


def play_game(
    c1: ControllerLike,
    c2: ControllerLike,
    seed: int,
    keep_record: bool = False,
    normalize_q: bool = False,
    strict_pseudocode: bool = False,
    trace: Optional[list] = None,
) -> GameResult:
    """One game, ``c1`` moving first.  Each seat has its own rng stream."""
    kw = dict(normalize_q=normalize_q, strict_pseudocode=strict_pseudocode, trace=trace)
    ctl = (_as_controller(c1, **kw), _as_controller(c2, **kw))
    rngs = player_rngs(seed)
    state = new_game(seed)
    rec = GameRecord(seed) if keep_record else None
    exprs: List[dict] = []
    while not state.is_terminal:
        p = state.to_move
        c = ctl[p]
        before = state
        n_logged = len(c.log) if isinstance(c, EvolutionController) else 0
        action = c.act(state, rngs[p])
        state = apply(state, action)
        if rec is not None:
            rec.add(before, action, state)
        if isinstance(c, EvolutionController) and len(c.log) > n_logged:
            r = c.log[-1]
            exprs.append({"player": p + 1, "turn": before.turns[p] + 1, **asdict(r)})
    out = final_scoring(state)
    text = None
    if rec is not None:
        rec.final = (out.score_p1, out.score_p2)
        text = rec.dumps()
    return GameResult(seed, out.score_p1, out.score_p2, state.turn, exprs, text)


# -- matches ---------------------------------------------------------------
@dataclass
class MatchResult:
    p1: str
    p2: str
    games: int
    wins1: int = 0
    wins2: int = 0
    draws: int = 0
    score_diffs: List[float] = field(default_factory=list)
    results: List[GameResult] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.wins1 + self.wins2 + self.draws > self.games:
            raise ContractError("more outcomes than games")

    @classmethod
    def from_tally(cls, p1: str, p2: str, wins1: int, wins2: int, games: int) -> "MatchResult":
        """Match known only by its game-win split (draws fill up to ``games``)."""
        if wins1 + wins2 > games:
            raise ContractError(f"{wins1}-{wins2} exceeds {games} games")
        return cls(p1, p2, games, wins1, wins2, games - wins1 - wins2)

    @classmethod
    def from_games(cls, p1: str, p2: str, results: Sequence[GameResult]) -> "MatchResult":
        m = cls(p1, p2, len(results))
        for g in results:
            w = g.winner
            m.wins1 += w == 1
            m.wins2 += w == 2
            m.draws += w == 0
            m.score_diffs.append(g.score1 - g.score2)
        m.results = list(results)
        return m


def _game_job(args) -> GameResult:
    c1, c2, seed, keep_record, normalize_q, strict = args
    return play_game(c1, c2, seed, keep_record, normalize_q, strict)


def _executor_map(jobs: int, fn, items: list) -> Iterator:
    """Results in submission order (lazy), so the reduce is deterministic."""
    if jobs <= 1 or len(items) <= 1:
        for x in items:
            yield fn(x)
        return
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        yield from ex.map(fn, items)


def run_match(
    a: ControllerLike,
    b: ControllerLike,
    games: int,
    base_seed: int = 0,
    keep_records: bool = False,
    jobs: int = 1,
    normalize_q: bool = False,
    strict_pseudocode: bool = False,
) -> MatchResult:
    """``games`` games with ``a`` always moving first; game i uses seed base_seed + i.

    Identical specs on both seats are labelled ``spec@1`` and ``spec@2``.  With ``jobs > 1`` controllers must be given as spec strings.
    """
    if games <= 0:
        raise ContractError("games must be positive")
    name_a = a if isinstance(a, str) else a.spec
    name_b = b if isinstance(b, str) else b.spec
    if name_a == name_b:
        # self-play: seat labels keep the two rows of a league table apart
        name_a, name_b = f"{name_a}@1", f"{name_b}@2"
    items = [(a, b, base_seed + i, keep_records, normalize_q, strict_pseudocode) for i in range(games)]
    if jobs > 1 and not (isinstance(a, str) and isinstance(b, str)):
        jobs = 1
    return MatchResult.from_games(name_a, name_b, list(_executor_map(jobs, _game_job, items)))


# -- league arithmetic -----------------------------------------------------
class MatchPoints(NamedTuple):
    points1: int
    bwp1: int
    blp1: int
    points2: int
    bwp2: int
    blp2: int


BWP_SHARE = 0.75
BLP_MARGIN = 2


def match_points(m: MatchResult) -> MatchPoints:
    if m.wins1 == m.wins2:
        return MatchPoints(2, 0, 0, 2, 0, 0)
    first_won = m.wins1 > m.wins2
    w, l = (m.wins1, m.wins2) if first_won else (m.wins2, m.wins1)
    bwp = int(w / (w + l) >= BWP_SHARE)
    blp = int(w - l <= BLP_MARGIN)
    if first_won:
        return MatchPoints(4 + bwp, bwp, 0, blp, 0, blp)
    return MatchPoints(blp, 0, blp, 4 + bwp, bwp, 0)


@dataclass
class LeagueRow:
    controller: str
    points: int = 0
    bwp: int = 0
    blp: int = 0
    wins: int = 0
    losses: int = 0
    draws: int = 0
    pd: float = 0.0
    games: int = 0
    _diff_sum: float = 0.0

    def check(self) -> None:
        if self.points != 4 * self.wins + 2 * self.draws + self.bwp + self.blp:
            raise AssertionError(f"points identity broken for {self.controller}")


def league_table(matches: Iterable[MatchResult]) -> List[LeagueRow]:
    rows: Dict[str, LeagueRow] = {}

    def row(c: str) -> LeagueRow:
        if c not in rows:
            rows[c] = LeagueRow(c)
        return rows[c]

    for m in matches:
        if m.p1 == m.p2:
            raise ContractError(f"controller {m.p1} plays itself")
        mp = match_points(m)
        r1, r2 = row(m.p1), row(m.p2)
        r1.points += mp.points1
        r2.points += mp.points2
        r1.bwp += mp.bwp1
        r1.blp += mp.blp1
        r2.bwp += mp.bwp2
        r2.blp += mp.blp2
        if m.wins1 > m.wins2:
            r1.wins += 1
            r2.losses += 1
        elif m.wins2 > m.wins1:
            r2.wins += 1
            r1.losses += 1
        else:
            r1.draws += 1
            r2.draws += 1
        for d in m.score_diffs:
            r1._diff_sum += d
            r2._diff_sum -= d
        r1.games += len(m.score_diffs)
        r2.games += len(m.score_diffs)
    for r in rows.values():
        r.pd = r._diff_sum / r.games if r.games else 0.0
        r.check()
    return sorted(rows.values(), key=lambda r: (-r.points, -r.pd, r.controller))


def format_league(rows: Sequence[LeagueRow]) -> str:
    width = max([len("Player")] + [len(r.controller) for r in rows])
    head = f"{'Rank':>4}  {'Player':<{width}}  {'Points':>6} {'BWP':>4} {'BLP':>4} {'W':>3} {'L':>3} {'D':>3} {'PD':>9}"
    lines = [head, "-" * len(head)]
    for i, r in enumerate(rows, 1):
        lines.append(
            f"{i:>4}  {r.controller:<{width}}  {r.points:>6} {r.bwp:>4} {r.blp:>4} "
            f"{r.wins:>3} {r.losses:>3} {r.draws:>3} {r.pd:>+9.2f}"
        )
    return "\n".join(lines) + "\n"


# -- significance ----------------------------------------------------------
@dataclass(frozen=True)
class TTestReport:
    t: float
    p_value: float
    df: float

    @property
    def significant(self) -> bool:
        return self.p_value < SIGNIFICANCE


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TTestReport:
    """Two-sided Welch test.  Both samples constant: p = 1 if the means agree, else 0."""
    if len(a) < 2 or len(b) < 2:
        raise ContractError("each sample needs at least two values")
    va, vb = statistics.variance(a), statistics.variance(b)
    ma, mb = statistics.fmean(a), statistics.fmean(b)
    if va == 0 and vb == 0:
        if ma == mb:
            return TTestReport(0.0, 1.0, float(len(a) + len(b) - 2))
        return TTestReport(math.copysign(math.inf, ma - mb), 0.0, float(len(a) + len(b) - 2))
    res = stats.ttest_ind(a, b, equal_var=False)
    sa, sb = va / len(a), vb / len(b)
    df = (sa + sb) ** 2 / (sa**2 / (len(a) - 1) + sb**2 / (len(b) - 1))
    return TTestReport(float(res.statistic), float(res.pvalue), df)


# -- leagues ---------------------------------------------------------------
def schedule(controllers: Sequence[str]) -> List[Tuple[str, str]]:
    """Every ordered pair of distinct controllers, in a fixed order."""
    return [(a, b) for a in controllers for b in controllers if a != b]


@dataclass
class LeagueSpec:
    controllers: List[str]
    games: int = 25
    seed: int = 0
    jobs: int = 1
    keep_records: bool = False
    normalize_q: bool = False
    strict_pseudocode: bool = False


@dataclass
class LeagueResult:
    matches: List[MatchResult]
    table: List[LeagueRow]
    ttests: Dict[Tuple[str, str], TTestReport]


def controller_diffs(matches: Sequence[MatchResult]) -> Dict[str, List[float]]:
    """Per-controller samples of own-minus-opponent game scores."""
    out: Dict[str, List[float]] = {}
    for m in matches:
        out.setdefault(m.p1, []).extend(m.score_diffs)
        out.setdefault(m.p2, []).extend(-d for d in m.score_diffs)
    return out


def ttest_matrix(matches: Sequence[MatchResult], order: Sequence[str]) -> Dict[Tuple[str, str], TTestReport]:
    diffs = controller_diffs(matches)
    res = {}
    for i, a in enumerate(order):
        for b in order[i + 1 :]:
            if len(diffs.get(a, ())) >= 2 and len(diffs.get(b, ())) >= 2:
                res[(a, b)] = welch_t_test(diffs[a], diffs[b])
    return res


def results_csv(matches: Sequence[MatchResult], header: bool = True, first_id: int = 0) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_HEADER)
    for mid, m in enumerate(matches, first_id):
        for gi, g in enumerate(m.results):
            w.writerow((mid, m.p1, m.p2, gi, g.seed, g.winner, g.score1, g.score2, g.turns))
    return buf.getvalue()


def expression_log(matches: Sequence[MatchResult]) -> str:
    lines = []
    for mid, m in enumerate(matches):
        for gi, g in enumerate(m.results):
            for e in g.expressions:
                ctl = m.p1 if e["player"] == 1 else m.p2
                rec = {"match_id": mid, "game_id": f"{mid}-{gi}", "seed": g.seed, "controller": ctl, **e}
                lines.append(json.dumps(rec, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def quartiles(values: Sequence[float]) -> Tuple[float, float, float, float, float]:
    v = sorted(values)
    if len(v) == 1:
        return (v[0],) * 5
    q1, med, q3 = statistics.quantiles(v, n=4, method="inclusive")
    return v[0], q1, med, q3, v[-1]


def node_count_quartiles(expression_lines: Iterable[dict]) -> str:
    """Per (controller, variant, turn) quartiles of evolved-expression node counts."""
    groups: Dict[Tuple[str, str, int], List[int]] = {}
    for r in expression_lines:
        groups.setdefault((r["controller"], r["variant"], r["turn"]), []).append(r["node_count"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("controller", "variant", "turn", "n", "min", "q1", "median", "q3", "max"))
    for key in sorted(groups):
        w.writerow((*key, len(groups[key]), *quartiles(groups[key])))
    return buf.getvalue()


def format_ttests(tt: Dict[Tuple[str, str], TTestReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("a", "b", "t", "df", "p_value", "significant"))
    for (a, b), r in tt.items():
        w.writerow((a, b, f"{r.t:.6g}", f"{r.df:.6g}", f"{r.p_value:.6g}", int(r.significant)))
    return buf.getvalue()


def write_outputs(out: Union[str, Path], matches: Sequence[MatchResult], controllers: Sequence[str]) -> LeagueResult:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    table = league_table(matches)
    tt = ttest_matrix(matches, controllers)
    (out / "results.csv").write_text(results_csv(matches))
    (out / "league.txt").write_text(format_league(table))
    (out / "ttest.csv").write_text(format_ttests(tt))
    log = expression_log(matches)
    (out / "expressions.jsonl").write_text(log)
    recs = [json.loads(x) for x in log.splitlines()]
    (out / "fig2_node_counts.csv").write_text(node_count_quartiles(recs))
    for mid, m in enumerate(matches):
        for gi, g in enumerate(m.results):
            if g.record is not None:
                d = out / "records"
                d.mkdir(exist_ok=True)
                (d / f"match{mid:03d}_game{gi:03d}.txt").write_text(g.record)
    return LeagueResult(list(matches), table, tt)


def run_league(spec: LeagueSpec, out: Union[str, Path]) -> LeagueResult:
    """All ordered pairs, games pooled into one ordered job list, then every artifact written."""
    if len(set(spec.controllers)) != len(spec.controllers) or len(spec.controllers) < 2:
        raise ContractError("a league needs at least two distinct controllers")
    pairs = schedule(spec.controllers)
    items = [
        (a, b, spec.seed + i, spec.keep_records, spec.normalize_q, spec.strict_pseudocode)
        for a, b in pairs
        for i in range(spec.games)
    ]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    matches: List[MatchResult] = []
    pending: List[GameResult] = []
    # results.csv grows match by match so an interrupted league keeps what finished
    with open(out / "results.csv", "w", newline="") as fh:
        fh.write(results_csv([]))
        for res in _executor_map(spec.jobs, _game_job, items):
            pending.append(res)
            if len(pending) == spec.games:
                a, b = pairs[len(matches)]
                matches.append(MatchResult.from_games(a, b, pending))
                pending = []
                fh.write(results_csv(matches[-1:], header=False, first_id=len(matches) - 1))
                fh.flush()
    return write_outputs(out, matches, spec.controllers)


def default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
