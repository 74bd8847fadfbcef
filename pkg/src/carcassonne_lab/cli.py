"""``carcassonne-lab`` command line.

    carcassonne-lab play  CTL1 CTL2 --seed 3 --out runs/one
    carcassonne-lab match CTL1 CTL2 --games 25 --seed 7 --out runs/m
    carcassonne-lab league [CTL ...] --config league.cfg --out runs/l
    carcassonne-lab replay runs/m/records/match000_game000.txt
    carcassonne-lab verify-tiles [--tiles my_tiles.json]

A config file holds one directive per line, using the same words as the
command line (``#`` starts a comment)::

    controller mcts:k=0.5,sims=400
    controller random
    games 25
    seed 7
    jobs 2

Flags given on the command line override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from .carcassonne.records import RecordError, replay
from .carcassonne.tiles import CITY, FIELD, ROAD, TileSetError, parse_tileset, standard_tileset
from .controllers import NAMES, SpecError, parse_spec
from .tournament import (
    LeagueSpec,
    default_jobs,
    format_league,
    play_game,
    run_league,
    run_match,
    write_outputs,
)

COMMANDS = ("play", "match", "league", "replay", "verify-tiles")
STANDARD_TILE_COUNT = 72
EDGE_LETTERS = {CITY: "C", ROAD: "R", FIELD: "F"}


@dataclass
class RunSpec:
    command: str
    controllers: List[str] = field(default_factory=list)
    games: int = 25
    seed: Optional[int] = None
    jobs: int = 1
    out: Path = Path("runs")
    trace: bool = False
    normalize_q: bool = False
    strict_pseudocode: bool = False
    record: Optional[Path] = None
    tiles: Optional[Path] = None
    keep_records: bool = True


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="carcassonne-lab",
        description="Carcassonne search controllers: games, matches, leagues and record replay.",
        epilog="controller grammar: name[:key=value,...] with name in " + ", ".join(NAMES),
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_ctl):
        sp.add_argument("controllers", nargs=n_ctl, metavar="CONTROLLER")
        sp.add_argument("--games", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None, help="concurrent games (default: available CPUs)")
        sp.add_argument("--out", type=Path, default=None)
        sp.add_argument("--config", type=Path, default=None)
        sp.add_argument("--trace", action="store_true", help="dump per-simulation search traces (play only)")
        sp.add_argument("--normalize-q", action="store_true")
        sp.add_argument("--strict-pseudocode", action="store_true")
        sp.add_argument("--no-records", action="store_true", help="do not write per-game record files")

    common(sub.add_parser("play", help="one game"), "*")
    common(sub.add_parser("match", help="games with the first controller moving first"), "*")
    common(sub.add_parser("league", help="round robin over all ordered pairs"), "*")
    r = sub.add_parser("replay", help="verify a game record")
    r.add_argument("record", type=Path)
    t = sub.add_parser("verify-tiles", help="validate a tile-set file")
    t.add_argument("--tiles", type=Path, default=None)
    return p


def read_config(path: Path) -> dict:
    conf: dict = {"controllers": []}
    for n, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition(" ")
        key, val = key.strip().lower().replace("_", "-"), val.strip()
        if key == "controller":
            conf["controllers"].append(val)
        elif key in ("games", "seed", "jobs"):
            try:
                conf[key] = int(val)
            except ValueError:
                raise SpecError(f"{path}:{n}: {key} needs an integer, got {val!r}") from None
        elif key == "out":
            conf["out"] = Path(val)
        elif key in ("trace", "normalize-q", "strict-pseudocode"):
            conf[key.replace("-", "_")] = val.lower() in ("", "1", "true", "yes", "on")
        else:
            raise SpecError(f"{path}:{n}: unknown directive {key!r}")
    return conf


def parse_args(argv: Optional[Sequence[str]] = None) -> RunSpec:
    """Validated :class:`RunSpec`; exits with status 2 and a message on usage errors."""
    parser = _parser()
    ns = parser.parse_args(argv)
    spec = RunSpec(ns.command)
    if ns.command == "replay":
        spec.record = ns.record
        return spec
    if ns.command == "verify-tiles":
        spec.tiles = ns.tiles
        return spec
    try:
        conf = read_config(ns.config) if ns.config else {"controllers": []}
    except (OSError, SpecError) as exc:
        parser.error(str(exc))
    spec.controllers = list(ns.controllers) or conf["controllers"]
    spec.games = ns.games if ns.games is not None else conf.get("games", 25)
    spec.seed = ns.seed if ns.seed is not None else conf.get("seed")
    spec.jobs = ns.jobs if ns.jobs is not None else conf.get("jobs", default_jobs())
    spec.out = ns.out if ns.out is not None else conf.get("out", Path("runs") / ns.command)
    spec.trace = ns.trace or conf.get("trace", False)
    spec.normalize_q = ns.normalize_q or conf.get("normalize_q", False)
    spec.strict_pseudocode = ns.strict_pseudocode or conf.get("strict_pseudocode", False)
    spec.keep_records = not ns.no_records
    for c in spec.controllers:
        try:
            parse_spec(c)
        except SpecError as exc:
            parser.error(str(exc))
    if ns.command in ("play", "match") and len(spec.controllers) != 2:
        parser.error(f"{ns.command} needs exactly two controllers")
    if ns.command == "league":
        if len(spec.controllers) < 2:
            parser.error("league needs at least two controllers")
        if len(set(spec.controllers)) != len(spec.controllers):
            parser.error("league controllers must be distinct")
    if ns.command in ("match", "league") and spec.seed is None:
        parser.error(f"{ns.command} needs --seed (or a seed directive in --config)")
    if spec.seed is None:
        spec.seed = 0
    if spec.games < 1:
        parser.error("--games must be positive")
    if spec.jobs < 1:
        parser.error("--jobs must be positive")
    return spec


def _cmd_play(spec: RunSpec) -> int:
    trace: Optional[list] = [] if spec.trace else None
    g = play_game(
        spec.controllers[0],
        spec.controllers[1],
        spec.seed,
        keep_record=True,
        normalize_q=spec.normalize_q,
        strict_pseudocode=spec.strict_pseudocode,
        trace=trace,
    )
    spec.out.mkdir(parents=True, exist_ok=True)
    (spec.out / "game.txt").write_text(g.record)
    if g.expressions:
        (spec.out / "expressions.jsonl").write_text(
            "".join(json.dumps(e, sort_keys=True) + "\n" for e in g.expressions)
        )
    if trace is not None:
        (spec.out / "trace.jsonl").write_text("".join(json.dumps(t, default=list) + "\n" for t in trace))
    result = {1: spec.controllers[0], 2: spec.controllers[1]}.get(g.winner, "draw")
    print(f"seed {g.seed}: {g.score1}-{g.score2} ({result}), record in {spec.out / 'game.txt'}")
    return 0


def _cmd_match(spec: RunSpec) -> int:
    m = run_match(
        spec.controllers[0],
        spec.controllers[1],
        spec.games,
        spec.seed,
        keep_records=spec.keep_records,
        jobs=spec.jobs,
        normalize_q=spec.normalize_q,
        strict_pseudocode=spec.strict_pseudocode,
    )
    res = write_outputs(spec.out, [m], [m.p1, m.p2])
    print(f"{m.p1} vs {m.p2}: {m.wins1}-{m.wins2} ({m.draws} drawn) over {m.games} games")
    print(format_league(res.table), end="")
    return 0


def _cmd_league(spec: RunSpec) -> int:
    ls = LeagueSpec(
        controllers=spec.controllers,
        games=spec.games,
        seed=spec.seed,
        jobs=spec.jobs,
        keep_records=spec.keep_records,
        normalize_q=spec.normalize_q,
        strict_pseudocode=spec.strict_pseudocode,
    )
    res = run_league(ls, spec.out)
    print(format_league(res.table), end="")
    print(f"{len(res.matches)} matches written to {spec.out}")
    return 0


def _cmd_replay(spec: RunSpec) -> int:
    try:
        report = replay(spec.record)
    except (OSError, RecordError) as exc:
        print(f"FAIL: {exc}")
        return 1
    print(report)
    return 0 if report.ok else 1


def _cmd_verify_tiles(spec: RunSpec) -> int:
    try:
        if spec.tiles is None:
            ts = standard_tileset()
        else:
            ts = parse_tileset(json.loads(spec.tiles.read_text()))
    except (OSError, ValueError, KeyError, TileSetError) as exc:
        print(f"FAIL: {exc}")
        return 1
    for k in ts.kinds:
        print(f"{k.id:>3} x{k.count:<2} edges={''.join(EDGE_LETTERS[e] for e in k.edges)}")
    print(f"{len(ts.kinds)} kinds, {ts.total} tiles, start tile {ts.kinds[ts.start].id}")
    if spec.tiles is None and ts.total != STANDARD_TILE_COUNT:
        print(f"FAIL: standard set should hold {STANDARD_TILE_COUNT} tiles")
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    spec = parse_args(argv)
    handler = {
        "play": _cmd_play,
        "match": _cmd_match,
        "league": _cmd_league,
        "replay": _cmd_replay,
        "verify-tiles": _cmd_verify_tiles,
    }[spec.command]
    return handler(spec)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
