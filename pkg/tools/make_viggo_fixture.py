"""Generate the dialogue-act corpus fixture shipped under src/m2t/data/viggo/.

Synthesizes a small parallel corpus (MR column + reference column) covering
all nine dialogue acts, with enough training rows per DA for 10-shot
exemplar sampling.  References are produced by the canonical slot-faithful
realizer, then lightly varied with slot-preserving rewrites so train rows do
not all share one phrasing.  A handful of well-known MR/reference pairs are
pinned verbatim into the test split.

Deterministic: same seed, byte-identical CSVs.  Run from the repo root:

    python3 tools/make_viggo_fixture.py
"""

from __future__ import annotations

import csv
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from m2t.mr import ViggoMr, parse_viggo_mr, serialize_viggo_mr  # noqa: E402
from m2t.schema import load_schema  # noqa: E402
from m2t.viggo_text import realize_viggo  # noqa: E402

SEED = 20240811
OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "m2t" / "data" / "viggo"

GAMES = [
    {
        "name": "Hellblade: Senua's Sacrifice", "release_year": "2017",
        "developer": "Ninja Theory", "esrb": "M (for Mature)",
        "genres": ["action-adventure", "hack-and-slash"],
        "player_perspective": ["third person"], "has_multiplayer": "no",
        "platforms": ["PC", "PlayStation"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Half-Life 2", "release_year": "2004",
        "developer": "Valve Corporation", "esrb": "M (for Mature)",
        "genres": ["shooter"], "player_perspective": ["first person"],
        "has_multiplayer": "no", "platforms": ["PC", "Xbox"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
    {
        "name": "SpellForce 3", "release_year": "2017",
        "developer": "Grimlore Games", "esrb": "T (for Teen)",
        "genres": ["real-time strategy", "role-playing"],
        "player_perspective": ["bird view"], "has_multiplayer": "yes",
        "platforms": ["PC"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Little Big Adventure", "release_year": "1994",
        "developer": "Adeline Software", "esrb": "E (for Everyone)",
        "genres": ["adventure", "platformer"],
        "player_perspective": ["third person"], "has_multiplayer": "no",
        "platforms": ["PlayStation", "PC"], "available_on_steam": "no",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Control", "release_year": "2019",
        "developer": "Remedy Entertainment", "esrb": "M (for Mature)",
        "genres": ["shooter", "action-adventure"],
        "player_perspective": ["third person"], "has_multiplayer": "yes",
        "platforms": ["PC", "PlayStation", "Xbox"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Alan Wake", "release_year": "2010",
        "developer": "Remedy Entertainment", "esrb": "T (for Teen)",
        "genres": ["adventure"], "player_perspective": ["third person"],
        "has_multiplayer": "no", "platforms": ["PC", "Xbox"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Tony Hawk's Pro Skater 3", "release_year": "2001",
        "developer": "Neversoft", "esrb": "T (for Teen)",
        "genres": ["sport"], "player_perspective": ["third person"],
        "has_multiplayer": "yes", "platforms": ["PlayStation", "Nintendo GameCube"],
        "available_on_steam": "no", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Might & Magic: Heroes VI", "release_year": "2011",
        "developer": "Black Hole Entertainment", "esrb": "T (for Teen)",
        "genres": ["turn-based strategy", "role-playing"],
        "player_perspective": ["bird view"], "has_multiplayer": "yes",
        "platforms": ["PC"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Sid Meier's Civilization V", "release_year": "2010",
        "developer": "Firaxis Games", "esrb": "E 10+ (for Everyone 10 and Older)",
        "genres": ["turn-based strategy"], "player_perspective": ["bird view"],
        "has_multiplayer": "yes", "platforms": ["PC"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
    {
        "name": "Assassin's Creed Chronicles: India", "release_year": "2016",
        "developer": "Climax Studios", "esrb": "T (for Teen)",
        "genres": ["action-adventure", "platformer"],
        "player_perspective": ["side view"], "has_multiplayer": "no",
        "platforms": ["PC", "PlayStation", "Xbox"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Riverford Tales", "release_year": "2015",
        "developer": "Bluequill Interactive", "esrb": "E (for Everyone)",
        "genres": ["adventure", "puzzle"], "player_perspective": ["third person"],
        "has_multiplayer": "no", "platforms": ["PC", "Nintendo Switch"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
    {
        "name": "Ironclad Harvest", "release_year": "2018",
        "developer": "Petrel Forge", "esrb": "T (for Teen)",
        "genres": ["real-time strategy"], "player_perspective": ["bird view"],
        "has_multiplayer": "yes", "platforms": ["PC"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "no",
    },
    {
        "name": "Lumen Drift", "release_year": "2020",
        "developer": "Harbor Nine Studios", "esrb": "E (for Everyone)",
        "genres": ["racing", "arcade"], "player_perspective": ["third person"],
        "has_multiplayer": "yes", "platforms": ["PC", "PlayStation", "Nintendo Switch"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "yes",
    },
    {
        "name": "Cinder Vale", "release_year": "2013",
        "developer": "Moth & Lantern", "esrb": "M (for Mature)",
        "genres": ["survival horror"], "player_perspective": ["first person"],
        "has_multiplayer": "no", "platforms": ["PC", "Xbox"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Skylark Kingdoms", "release_year": "2009",
        "developer": "Gildergreen Games", "esrb": "E 10+ (for Everyone 10 and Older)",
        "genres": ["role-playing", "adventure"],
        "player_perspective": ["third person"], "has_multiplayer": "yes",
        "platforms": ["PC", "PlayStation"], "available_on_steam": "no",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Quiet Orbit", "release_year": "2021",
        "developer": "Parallax Loom", "esrb": "E (for Everyone)",
        "genres": ["simulation", "indie"], "player_perspective": ["first person"],
        "has_multiplayer": "no", "platforms": ["PC"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
    {
        "name": "Brineholt", "release_year": "2014",
        "developer": "Saltworks Digital", "esrb": "T (for Teen)",
        "genres": ["action", "role-playing"], "player_perspective": ["third person"],
        "has_multiplayer": "yes", "platforms": ["PC", "PlayStation", "Xbox"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Copper Canyon Run", "release_year": "2006",
        "developer": "Dry Gulch Workshop", "esrb": "E (for Everyone)",
        "genres": ["racing"], "player_perspective": ["third person"],
        "has_multiplayer": "yes", "platforms": ["PlayStation", "Xbox"],
        "available_on_steam": "no", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Violet Meridian", "release_year": "2022",
        "developer": "Nightjar Collective", "esrb": "M (for Mature)",
        "genres": ["shooter", "role-playing"], "player_perspective": ["first person"],
        "has_multiplayer": "yes", "platforms": ["PC", "PlayStation", "Xbox"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Gloaming Hollow", "release_year": "2012",
        "developer": "Fernweh Works", "esrb": "T (for Teen)",
        "genres": ["adventure", "puzzle"], "player_perspective": ["side view"],
        "has_multiplayer": "no", "platforms": ["PC", "Nintendo Switch"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "no",
    },
    {
        "name": "Thornwick Abbey", "release_year": "2008",
        "developer": "Candlewood Games", "esrb": "M (for Mature)",
        "genres": ["survival horror", "adventure"],
        "player_perspective": ["first person"], "has_multiplayer": "no",
        "platforms": ["PC"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Paper Armada", "release_year": "2019",
        "developer": "Inkwell Nine", "esrb": "E (for Everyone)",
        "genres": ["strategy", "indie"], "player_perspective": ["bird view"],
        "has_multiplayer": "yes", "platforms": ["PC", "Nintendo Switch"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
    {
        "name": "Redshift Alley", "release_year": "2016",
        "developer": "Torchlight Row", "esrb": "T (for Teen)",
        "genres": ["shooter", "arcade"], "player_perspective": ["side view"],
        "has_multiplayer": "yes", "platforms": ["PC", "Xbox"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Mosswater Farm", "release_year": "2018",
        "developer": "Tumbledown Barn", "esrb": "E (for Everyone)",
        "genres": ["simulation", "role-playing"],
        "player_perspective": ["bird view"], "has_multiplayer": "yes",
        "platforms": ["PC", "Nintendo Switch", "PlayStation"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
    {
        "name": "Hollow Lantern", "release_year": "2023",
        "developer": "Wyrmwood Atelier", "esrb": "M (for Mature)",
        "genres": ["action", "survival horror"],
        "player_perspective": ["third person"], "has_multiplayer": "no",
        "platforms": ["PC", "PlayStation"], "available_on_steam": "yes",
        "has_linux_release": "no", "has_mac_release": "no",
    },
    {
        "name": "Starfall Directive", "exp_release_date": "March 2026",
        "developer": "Meridian Forge", "esrb": "T (for Teen)",
        "genres": ["shooter", "strategy"], "player_perspective": ["first person"],
        "has_multiplayer": "yes", "platforms": ["PC"],
        "available_on_steam": "yes", "has_linux_release": "no",
        "has_mac_release": "no",
    },
    {
        "name": "Emberline Station", "exp_release_date": "fall 2026",
        "developer": "Quiet Comet", "esrb": "E (for Everyone)",
        "genres": ["adventure", "indie"], "player_perspective": ["side view"],
        "has_multiplayer": "no", "platforms": ["PC", "Nintendo Switch"],
        "available_on_steam": "yes", "has_linux_release": "yes",
        "has_mac_release": "yes",
    },
]

RATINGS = ["excellent", "good", "average", "poor"]
SPECIFIERS = [
    "visually stunning", "challenging", "relaxing", "story-driven",
    "fast-paced", "atmospheric", "replayable", "innovative",
    "family-friendly", "competitive", "immersive", "nostalgic",
]

# per-DA slot patterns; "rating" and "specifier" come from pools, the rest
# from the selected game record
PATTERNS = {
    "inform": [
        ["name", "release_year", "developer", "genres", "player_perspective", "platforms"],
        ["name", "release_year", "developer", "rating", "genres", "has_multiplayer", "player_perspective", "platforms"],
        ["name", "developer", "genres", "has_multiplayer"],
        ["name", "release_year", "genres", "platforms", "available_on_steam"],
        ["name", "rating", "genres", "player_perspective", "has_linux_release"],
        ["name", "exp_release_date", "developer", "genres"],
        ["name", "release_year", "esrb", "genres", "platforms"],
        ["name", "genres", "has_multiplayer", "available_on_steam", "has_mac_release"],
    ],
    "confirm": [
        ["name", "release_year"],
        ["name", "release_year", "developer"],
        ["name", "developer"],
        ["name", "release_year", "genres"],
    ],
    "suggest": [
        ["name", "genres"],
        ["name", "genres", "player_perspective"],
        ["name", "developer", "genres"],
        ["name", "genres", "platforms"],
    ],
    "request": [
        ["specifier"],
        ["specifier", "genres"],
    ],
    "request_attribute": [
        ["has_multiplayer"], ["available_on_steam"], ["player_perspective"],
        ["developer"], ["esrb"], ["platforms"], ["genres"], ["release_year"],
        ["has_linux_release"], ["has_mac_release"],
    ],
    "request_explanation": [
        ["name", "rating"],
        ["name", "rating", "genres"],
        ["name", "rating", "developer"],
    ],
    "verify_attribute": [
        ["name", "rating", "has_multiplayer"],
        ["name", "rating", "platforms"],
        ["name", "rating", "has_multiplayer", "platforms"],
        ["name", "rating", "available_on_steam"],
    ],
    "give_opinion": [
        ["name", "rating", "genres"],
        ["name", "rating", "genres", "player_perspective"],
        ["name", "rating", "has_multiplayer", "platforms"],
        ["name", "rating", "available_on_steam", "has_linux_release"],
    ],
    "recommend": [
        ["name", "genres"],
        ["name", "genres", "platforms"],
        ["name", "genres", "player_perspective"],
    ],
}

# slot-preserving phrasing rewrites applied to some generated references;
# the same MR may recur with a different reference, as in crowd-sourced data
REWRITES = [
    ("It was released in", ["It came out in"]),
    ("It was developed by", ["The developer is"]),
    ("It is available on", ["You can play it on"]),
    ("Have you tried", ["Have you played"]),
    ("You might want to give", ["I would suggest you give"]),
    ("People consider it", ["Most players call it"]),
    ("It is played from a", ["You play it from a"]),
    ("Do you like", ["Are you a fan of", "Do you enjoy playing"]),
    ("Do you have a preferred", ["Is there a particular", "What is your favorite"]),
    ("Oh, do you mean", ["So you are talking about"]),
]

# well-known rows pinned verbatim into the test split
PINNED_TEST = [
    (
        "confirm(name[Hellblade: Senua's Sacrifice], release_year[2017], developer[Ninja Theory])",
        "Oh, do you mean the 2017 game from Ninja Theory, Hellblade: Senua's Sacrifice?",
    ),
    (
        "suggest(name[Half-Life 2], genres[shooter], player_perspective[first person])",
        "Do you also enjoy playing first-person shooters, such as Half-Life 2?",
    ),
    (
        "give_opinion(name[SpellForce 3], rating[poor], genres[real-time strategy, role-playing], player_perspective[bird view])",
        "I think that SpellForce 3 is one of the worst games I've ever played. Trying to combine the real-time strategy and role-playing genres just doesn't work, and the bird's eye view makes it near impossible to play.",
    ),
    (
        "verify_attribute(name[Little Big Adventure], rating[average], has_multiplayer[no], platforms[PlayStation])",
        "I recall that you were not that fond of Little Big Adventure. Does single-player gaming on the PlayStation quickly get boring for you?",
    ),
    (
        "inform(name[Control], release_year[2019], developer[Remedy Entertainment], rating[excellent], genres[shooter, action-adventure], has_multiplayer[yes], player_perspective[third person], platforms[PC, PlayStation, Xbox])",
        "Control is an excellent third-person action-adventure shooter with multiplayer. It was released in 2019 by Remedy Entertainment for PC, PlayStation, and Xbox.",
    ),
    (
        "suggest(name[Alan Wake], developer[Remedy Entertainment], genres[adventure])",
        "Have you played any adventure games by Remedy Entertainment, like Alan Wake?",
    ),
    (
        "request_attribute(has_multiplayer[])",
        "Do you like multiplayer games?",
    ),
    (
        "confirm(name[Tony Hawk's Pro Skater 3], release_year[2001], genres[sport])",
        "Gotcha! So you're referring to the Tony Hawk's Pro Skater 3 sports game, which was released in 2001?",
    ),
    (
        "give_opinion(name[Might & Magic: Heroes VI], rating[average], player_perspective[bird view], platforms[PC])",
        "Might & Magic: Heroes VI is just average if you ask me. Bird view strategy games on PC are usually a harder sell for my friends.",
    ),
    (
        "give_opinion(name[Sid Meier's Civilization V], rating[good], available_on_steam[yes], has_linux_release[yes])",
        "Sid Meier's Civilization V is a pretty good game that you can grab on Steam, and it even has a Linux release.",
    ),
    (
        "verify_attribute(name[Assassin's Creed Chronicles: India], rating[poor], has_multiplayer[no], developer[Climax Studios])",
        "So I know you said Assassin's Creed Chronicles: India was poor. Do you think all of Climax Studios single-player games are as bad?",
    ),
]

TRAIN_PER_DA = 14
VALID_PER_DA = 3
TEST_PER_DA = 5


def build_mr(rng: random.Random, da: str, pattern: list[str]) -> ViggoMr | None:
    if "exp_release_date" in pattern:
        pool = [g for g in GAMES if "exp_release_date" in g]
    else:
        pool = [g for g in GAMES if "release_year" in g]
    game = rng.choice(pool)
    slots = []
    for attr in pattern:
        if da == "request_attribute":
            slots.append((attr, ()))
            continue
        if attr == "rating":
            slots.append((attr, (rng.choice(RATINGS),)))
        elif attr == "specifier":
            slots.append((attr, (rng.choice(SPECIFIERS),)))
        else:
            value = game.get(attr)
            if value is None:
                return None
            values = tuple(value) if isinstance(value, list) else (value,)
            slots.append((attr, values))
    return ViggoMr(da, tuple(slots))


def vary(rng: random.Random, text: str) -> str:
    for old, alternatives in REWRITES:
        if old in text:
            choice = rng.randrange(len(alternatives) + 1)
            if choice:
                text = text.replace(old, alternatives[choice - 1])
    return text


def generate_rows(rng: random.Random, da: str, count: int, taken: set[str]):
    rows = []
    guard = 0
    while len(rows) < count:
        guard += 1
        if guard > 4000:
            raise RuntimeError(f"cannot generate {count} unique rows for {da}")
        mr = build_mr(rng, da, rng.choice(PATTERNS[da]))
        if mr is None:
            continue
        mr_text = serialize_viggo_mr(mr)
        row = (mr_text, vary(rng, realize_viggo(mr)))
        if row in taken:
            continue
        taken.add(row)
        rows.append(row)
    return rows


def main() -> None:
    rng = random.Random(SEED)
    schema = load_schema()
    taken = set(PINNED_TEST)

    splits = {"train": [], "valid": [], "test": list(PINNED_TEST)}
    for da in sorted(PATTERNS):
        splits["train"].extend(generate_rows(rng, da, TRAIN_PER_DA, taken))
        splits["valid"].extend(generate_rows(rng, da, VALID_PER_DA, taken))
        splits["test"].extend(generate_rows(rng, da, TEST_PER_DA, taken))

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for split, rows in splits.items():
        for mr_text, ref in rows:
            parsed = parse_viggo_mr(mr_text)
            schema.validate_viggo(parsed)
            assert serialize_viggo_mr(parsed) == mr_text
            assert "\n" not in ref and ref.strip() == ref and ref
        path = OUT_DIR / f"{split}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mr", "ref"])
            writer.writerows(rows)
        print(f"{path}: {len(rows)} rows")


if __name__ == "__main__":
    main()
