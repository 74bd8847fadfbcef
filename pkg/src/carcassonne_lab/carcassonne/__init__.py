from .engine import (
    CARCASSONNE,
    Action,
    Carcassonne,
    GameState,
    apply,
    current_player,
    draw_tile,
    end_game_points,
    final_scoring,
    is_terminal,
    legal_actions,
    legal_placements,
    new_game,
    play_random_game,
    unseen_tiles,
    with_drawn,
)
from .records import GameRecord, parse_record, replay, verify_record
from .tiles import SCORING, TileSet, parse_tileset, standard_tileset

__all__ = [
    "CARCASSONNE",
    "Action",
    "Carcassonne",
    "GameRecord",
    "GameState",
    "SCORING",
    "TileSet",
    "apply",
    "current_player",
    "draw_tile",
    "end_game_points",
    "final_scoring",
    "is_terminal",
    "legal_actions",
    "legal_placements",
    "new_game",
    "parse_record",
    "parse_tileset",
    "play_random_game",
    "replay",
    "standard_tileset",
    "unseen_tiles",
    "verify_record",
    "with_drawn",
]
