"""Hand-scored engine fixtures.

Coordinates: the start tile D sits at (0, 0) with its city north and its
road running east-west; y grows northwards.  Moves alternate P1, P2, ...
Each move is (x, y, rotation, meeple slot or None).  Expected scores were
worked out by hand from the standard scoring table.
"""

FIXTURES = [
    {
        "name": "two_tile_city",
        "deck": ["E"],
        "moves": [(0, 1, 2, 0)],
        "running": (4, 0),
        "final": (4, 0),
        "meeples": (7, 7),
    },
    {
        "name": "three_tile_city_with_pennant",
        "deck": ["F", "E"],
        "moves": [(0, 1, 1, 0), (0, 2, 2, None)],
        "running": (8, 0),
        "final": (8, 0),
        "meeples": (7, 7),
    },
    {
        "name": "four_tile_city_two_pennants",
        "deck": ["F", "F", "E"],
        "moves": [(0, 1, 1, 0), (0, 2, 1, None), (0, 3, 2, None)],
        "running": (12, 0),
        "final": (12, 0),
        "meeples": (7, 7),
    },
    {
        "name": "three_tile_road",
        "deck": ["A", "W"],
        "moves": [(-1, 0, 3, 1), (1, 0, 0, None)],
        "running": (3, 0),
        "final": (3, 0),
        "meeples": (7, 7),
    },
    {
        # P1 holds two meeples on the east road, P2 one on a side road that
        # is joined last; the merged 8-tile road goes to P1 only.
        "name": "road_majority_two_vs_one",
        "deck": ["U", "V", "V", "A", "U", "A", "V"],
        "moves": [
            (1, 0, 1, 0),
            (1, -1, 3, 0),
            (2, -1, 1, None),
            (1, -2, 2, None),
            (-1, 0, 1, 0),
            (-2, 0, 3, None),
            (2, 0, 0, None),
        ],
        "running": (8, 0),
        "final": (8, 0),
        "meeples": (7, 7),
    },
    {
        "name": "city_tie_both_score",
        "deck": ["G", "E", "N", "N"],
        "moves": [(0, 1, 0, 0), (1, 1, 0, 0), (1, 2, 3, None), (0, 2, 2, None)],
        "running": (10, 10),
        "final": (10, 10),
        "meeples": (7, 7),
    },
    {
        "name": "monastery_completed",
        "deck": ["B", "U", "U", "B", "B", "E", "E", "E"],
        "moves": [
            (0, -1, 0, 0),
            (1, 0, 1, None),
            (-1, 0, 1, None),
            (1, -1, 0, None),
            (-1, -1, 0, None),
            (0, -2, 2, None),
            (-1, -2, 2, None),
            (1, -2, 2, None),
        ],
        "running": (9, 0),
        "final": (9, 0),
        "meeples": (7, 7),
    },
    {
        "name": "road_loop_closes_on_itself",
        "deck": ["V", "V", "V", "V"],
        "moves": [(0, -1, 3, 0), (1, -1, 0, None), (1, -2, 1, None), (0, -2, 2, None)],
        "running": (4, 0),
        "final": (4, 0),
        "meeples": (7, 7),
    },
    {
        "name": "completed_city_without_meeple_scores_nothing",
        "deck": ["E"],
        "moves": [(0, 1, 2, None)],
        "running": (0, 0),
        "final": (0, 0),
        "meeples": (7, 7),
    },
    {
        "name": "farm_two_completed_cities",
        "deck": ["E", "U", "E", "E"],
        "moves": [(0, 1, 2, None), (1, 0, 1, 2), (1, 1, 0, None), (1, 2, 2, None)],
        "running": (0, 0),
        "final": (0, 6),
        "meeples": (7, 6),
    },
    {
        "name": "incomplete_city_with_pennant",
        "deck": ["F", "G"],
        "moves": [(0, 1, 1, 0), (0, 2, 0, None)],
        "running": (0, 0),
        "final": (4, 0),
        "meeples": (6, 7),
    },
    {
        "name": "incomplete_road",
        "deck": ["U"],
        "moves": [(1, 0, 1, 0)],
        "running": (0, 0),
        "final": (2, 0),
        "meeples": (6, 7),
    },
    {
        "name": "incomplete_monastery",
        "deck": ["B"],
        "moves": [(0, -1, 0, 0)],
        "running": (0, 0),
        "final": (2, 0),
        "meeples": (6, 7),
    },
    {
        # P1 stacks a second meeple on its own road, which is allowed
        "name": "own_road_second_meeple",
        "deck": ["U", "B", "U"],
        "moves": [(1, 0, 1, 0), (0, -1, 0, None), (2, 0, 1, 0)],
        "running": (0, 0),
        "final": (3, 0),
        "meeples": (5, 7),
    },
]
