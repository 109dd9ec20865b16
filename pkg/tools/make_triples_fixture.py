"""Regenerate the shipped KG triple fixture (data/fixtures/triples.jsonl).

Builds 100 triple groups per template category from seeded entity pools,
with a small set of pinned well-known groups mixed in.  Every group is
checked to serialize cleanly in both MR forms, to be unique, and to match
exactly one template category in the shipped bank.

Run from the repository root:  python3 tools/make_triples_fixture.py
"""

import json
import random
from pathlib import Path

from m2t.mr import KgMr, Triple, serialize_kg_paren, serialize_kg_s2s
from m2t.realizer import load_template_bank, realize_with_template

SEED = 20240817
PER_CATEGORY = 100
OUT_PATH = Path(__file__).resolve().parent.parent / "src/m2t/data/fixtures/triples.jsonl"

FIRST = (
    "Avery Bennett Carmen Dalia Edmund Farrah Gideon Harriet Idris Juniper"
    " Kelvin Lorena Matteo Noelle Orson Priya Quentin Rosalind Stellan Tamsin"
    " Ulysses Vera Wendell Xiomara Yusuf Zelda Marcus Ingrid Caleb Odette"
).split()
LAST = (
    "Ashford Blackwood Calloway Delacroix Ellington Fairbanks Granger Holloway"
    " Ivers Jardine Kensington Lockhart Merriweather Northgate Okafor Pemberton"
    " Quimby Ravenscroft Sinclair Thorneville Underhill Vance Whitlock Yates"
    " Zimmerman Hartwell Bellamy Crowther Davenport Eastman"
).split()
PLACES = (
    "Harrowgate Veldemar Castelline Norbury Quillhaven Ashmere Drumlin"
    " Farwater Gildenport Hollowbrook Ironvale Juneberry Kestrel Larkmoor"
    " Mirefield Northwind Oakhaven Pinebluff Quarryton Ravenshold"
).split()
NOUNS = (
    "Lantern Harvest Meridian Compass Orchard Tempest Ledger Paradox Monarch"
    " Satchel Beacon Furnace Gallery Horizon Anthem Cipher Drift Ember Folly"
    " Garland"
).split()
ADJECTIVES = (
    "Silent Crimson Wandering Forgotten Gilded Restless Hollow Luminous"
    " Breathless Midnight Verdant Solemn Amber Distant Feral Quiet Broken"
    " Paper Winter Velvet"
).split()

MOVIE_GENRES = [
    "science fiction film",
    "romantic comedy",
    "psychological thriller",
    "animated film",
    "crime drama",
    "historical epic",
    "horror film",
    "documentary film",
    "coming-of-age film",
    "action film",
]
MOVIE_AWARDS = [
    "Academy Award for Best Picture",
    "Golden Globe Award for Best Drama Film",
    "BAFTA Award for Best Film",
    "Saturn Award for Best Science Fiction Film",
    "Critics Choice Award for Best Picture",
    "Independent Spirit Award for Best Feature",
    "National Board of Review Award for Best Film",
    "Palme d'Or",
]
MUSIC_GENRES = [
    "pop rock",
    "synth-pop",
    "indie folk",
    "alternative rock",
    "country music",
    "rhythm and blues",
    "electronic dance music",
    "jazz fusion",
    "folk rock",
    "soul music",
]
MUSIC_AWARDS = [
    "Grammy Award for Best New Artist",
    "Grammy Award for Album of the Year",
    "Brit Award for Best International Artist",
    "MTV Video Music Award for Best Pop Video",
    "Billboard Music Award for Top Artist",
    "American Music Award for Favorite Pop Album",
    "Mercury Prize",
    "Juno Award for Single of the Year",
]
POSITIONS = [
    "point guard",
    "power forward",
    "small forward",
    "quarterback",
    "goalkeeper",
    "shortstop",
    "center",
    "winger",
    "linebacker",
    "striker",
]
MASCOTS = (
    "Harriers Mariners Stallions Voyagers Sentinels Cyclones Pioneers Falcons"
    " Badgers Comets Rovers Titans Wolverines Herons Raiders Lynxes"
).split()
SPORTS_AWARDS = [
    "NBA Most Valuable Player Award",
    "Ballon d'Or",
    "Cy Young Award",
    "Heisman Trophy",
    "FIFA World Player of the Year",
    "Olympic gold medal in the 100 meter sprint",
    "Stanley Cup playoffs Most Valuable Player",
    "World Series Most Valuable Player Award",
]
TV_GENRES = [
    "paranormal television program",
    "drama television",
    "situation comedy",
    "crime television series",
    "medical drama",
    "reality television",
    "anthology series",
    "animated series",
    "mystery television series",
    "science fiction television",
]

PINNED = [
    ("movies", [("Wonder Woman", "director", "Patty Jenkins")]),
    ("movies", [("Scream", "cast member", "Liev Schreiber")]),
    ("movies", [("Planet of the Apes", "cast member", "Felix Silla")]),
    ("music", [("Rihanna", "record label", "Def Jam Records")]),
    ("music", [("Taylor Swift", "numTracks", "114")]),
    ("music", [("Taylor Swift", "song", "22"), ("22", "date", "2013")]),
    (
        "music",
        [
            ("Bad Blood", "performer", "Taylor Swift"),
            ("Bad Blood", "performer", "Kendrick Lamar"),
        ],
    ),
    ("music", [("P!nk", "award", "Grammy Award for Best Pop Collaboration with Vocals")]),
    (
        "music",
        [
            ("Starship", "song", "We Built This City"),
            ("We Built This City", "genre", "pop rock"),
        ],
    ),
    (
        "sports",
        [
            ("Lebron James", "member of sports team", "Los Angeles Lakers"),
            ("Lebron James", "position played on team/specialty", "power forward"),
        ],
    ),
    (
        "sports",
        [
            ("Len Ford", "member of sports team", "Los Angeles Dons"),
            ("Len Ford", "position played on team", "end"),
        ],
    ),
    ("tv", [("Lost", "genre", "paranormal television program"), ("Lost", "genre", "drama television")]),
]


class Pools:
    def __init__(self, rng):
        self.rng = rng

    def person(self):
        return f"{self.rng.choice(FIRST)} {self.rng.choice(LAST)}"

    def title(self):
        rng = self.rng
        pattern = rng.randrange(6)
        if pattern == 0:
            return f"The {rng.choice(NOUNS)} of {rng.choice(PLACES)}"
        if pattern == 1:
            return f"{rng.choice(ADJECTIVES)} {rng.choice(NOUNS)}"
        if pattern == 2:
            return f"Beneath the {rng.choice(NOUNS)}"
        if pattern == 3:
            return f"{rng.choice(PLACES)} Nights"
        if pattern == 4:
            return f"A {rng.choice(NOUNS)} in {rng.choice(PLACES)}"
        return f"The Last {rng.choice(NOUNS)}"

    def band(self):
        rng = self.rng
        if rng.randrange(3) == 0:
            return f"The {rng.choice(NOUNS)}s"
        return self.person()

    def song(self):
        rng = self.rng
        if rng.randrange(2) == 0:
            return f"{rng.choice(ADJECTIVES)} {rng.choice(NOUNS)}"
        return f"{rng.choice(NOUNS)} of {rng.choice(PLACES)}"

    def show(self):
        rng = self.rng
        pattern = rng.randrange(4)
        if pattern == 0:
            return f"{rng.choice(PLACES)} General"
        if pattern == 1:
            return f"The {rng.choice(NOUNS)} Files"
        if pattern == 2:
            return f"{rng.choice(ADJECTIVES)} {rng.choice(NOUNS)}"
        return f"{rng.choice(PLACES)} Street"

    def label(self):
        rng = self.rng
        stem = rng.choice(PLACES) if rng.randrange(2) == 0 else rng.choice(NOUNS)
        return f"{stem} Records"

    def team(self):
        return f"{self.rng.choice(PLACES)} {self.rng.choice(MASCOTS)}"

    def height(self):
        rng = self.rng
        if rng.randrange(2) == 0:
            return f"{rng.randrange(160, 216)} centimeters"
        return f"{rng.randrange(5, 7)} feet {rng.randrange(0, 12)} inches"

    def year(self):
        return str(self.rng.randrange(1958, 2024))


def builders(p):
    return {
        "movies_director": lambda: ("movies", [(p.title(), "director", p.person())]),
        "movies_cast": lambda: ("movies", [(p.title(), "cast member", p.person())]),
        "movies_genre": lambda: (
            "movies",
            [(p.title(), "genre", p.rng.choice(MOVIE_GENRES))],
        ),
        "movies_award": lambda: (
            "movies",
            [(p.title(), "award", p.rng.choice(MOVIE_AWARDS))],
        ),
        "movies_spouse": lambda: ("movies", [(p.person(), "spouse", p.person())]),
        "music_num_tracks": lambda: (
            "music",
            [(p.band(), "numTracks", str(p.rng.randrange(8, 301)))],
        ),
        "music_song_date": lambda: _song_pair(p, "date", p.year()),
        "music_performer_pair": lambda: _performer_pair(p),
        "music_award": lambda: (
            "music",
            [(p.band(), "award", p.rng.choice(MUSIC_AWARDS))],
        ),
        "music_label": lambda: ("music", [(p.band(), "record label", p.label())]),
        "music_song_genre": lambda: _song_pair(p, "genre", p.rng.choice(MUSIC_GENRES)),
        "sports_team_position": lambda: _team_position(p),
        "sports_award": lambda: (
            "sports",
            [(p.person(), "award", p.rng.choice(SPORTS_AWARDS))],
        ),
        "sports_height": lambda: ("sports", [(p.person(), "height", p.height())]),
        "tv_genre_pair": lambda: _tv_genres(p),
        "tv_cast": lambda: ("tv", [(p.show(), "cast member", p.person())]),
    }


def _song_pair(p, second_relation, second_object):
    artist = p.band()
    song = p.song()
    return (
        "music",
        [(artist, "song", song), (song, second_relation, second_object)],
    )


def _performer_pair(p):
    song = p.song()
    a, b = p.person(), p.person()
    while b == a:
        b = p.person()
    return ("music", [(song, "performer", a), (song, "performer", b)])


def _team_position(p):
    athlete = p.person()
    # both display surfaces for the position relation appear in real MRs
    relation = (
        "position played on team/specialty"
        if p.rng.randrange(2) == 0
        else "position played on team"
    )
    return (
        "sports",
        [
            (athlete, "member of sports team", p.team()),
            (athlete, relation, p.rng.choice(POSITIONS)),
        ],
    )


def _tv_genres(p):
    show = p.show()
    first = p.rng.choice(TV_GENRES)
    second = p.rng.choice(TV_GENRES)
    while second == first:
        second = p.rng.choice(TV_GENRES)
    return ("tv", [(show, "genre", first), (show, "genre", second)])


def to_mr(topic, triples):
    return KgMr(topic=topic, triples=tuple(Triple(*t) for t in triples))


def main():
    rng = random.Random(SEED)
    pools = Pools(rng)
    bank = load_template_bank()
    build = builders(pools)

    groups = []
    seen = set()
    counts = {name: 0 for name in build}

    def admit(topic, triples):
        mr = to_mr(topic, triples)
        key = serialize_kg_paren(mr)
        serialize_kg_s2s(mr)
        if key in seen:
            return False
        _, template = realize_with_template(mr, bank, 0)
        seen.add(key)
        groups.append((topic, triples))
        counts[template.paraphrase_group] += 1
        return True

    for topic, triples in PINNED:
        assert admit(topic, triples), f"pinned group duplicated: {triples}"

    for name, builder in build.items():
        guard = 0
        while counts[name] < PER_CATEGORY:
            guard += 1
            if guard > 20000:
                raise RuntimeError(f"cannot fill category {name}")
            topic, triples = builder()
            admit(topic, triples)

    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    with OUT_PATH.open("w", encoding="utf-8") as fh:
        for topic, triples in groups:
            fh.write(
                json.dumps(
                    {"topic": topic, "triples": [list(t) for t in triples]},
                    ensure_ascii=False,
                )
                + "\n"
            )
    total = sum(counts.values())
    print(f"wrote {total} groups to {OUT_PATH}")
    for name in sorted(counts):
        print(f"  {name}: {counts[name]}")


if __name__ == "__main__":
    main()
