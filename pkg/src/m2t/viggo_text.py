"""Canonical slot-faithful sentences for dialogue-act MRs.

Backs the deterministic mock completion backend and the shipped corpus
fixtures.  Every slot value (or, for boolean and empty-value slots, its
keyword from the matching lexicon) appears verbatim in the output, so the
slot aligner scores these sentences 1.0 by construction.
"""

from __future__ import annotations

from .mr import ViggoMr

# keyword used when a boolean/empty-value slot is asked about or asserted
ATTRIBUTE_KEYWORDS = {
    "has_multiplayer": "multiplayer",
    "available_on_steam": "Steam",
    "has_linux_release": "Linux",
    "has_mac_release": "Mac",
}

BOOLEAN_ATTRIBUTES = frozenset(ATTRIBUTE_KEYWORDS)


def _join(values: tuple[str, ...]) -> str:
    if len(values) <= 1:
        return values[0] if values else ""
    return ", ".join(values[:-1]) + " and " + values[-1]


def _attribute_words(attribute: str) -> str:
    return attribute.replace("_", " ")


def _boolean_clause(attribute: str, value: str) -> str:
    kw = ATTRIBUTE_KEYWORDS[attribute]
    if attribute == "has_multiplayer":
        return "It has multiplayer." if value == "yes" else "It is single-player."
    if value == "yes":
        if attribute == "available_on_steam":
            return f"You can get it on {kw}."
        return f"It has a {kw} release."
    if attribute == "available_on_steam":
        return f"It is not available on {kw}."
    return f"There is no {kw} release."


def _descriptor_sentences(mr: ViggoMr, skip: frozenset[str]) -> list[str]:
    """Trailing sentences covering every slot not consumed by the DA frame."""
    out: list[str] = []
    for attr, values in mr.slots:
        if attr in skip:
            continue
        if attr in BOOLEAN_ATTRIBUTES:
            if values:
                out.append(_boolean_clause(attr, values[0]))
            else:
                out.append(f"I wonder about {ATTRIBUTE_KEYWORDS[attr]}.")
            continue
        if not values:
            out.append(f"I wonder about the {_attribute_words(attr)}.")
            continue
        joined = _join(values)
        if attr == "name":
            out.append(f"The game is called {joined}.")
        elif attr == "release_year":
            out.append(f"It was released in {joined}.")
        elif attr == "exp_release_date":
            out.append(f"It is expected to release on {joined}.")
        elif attr == "developer":
            out.append(f"It was developed by {joined}.")
        elif attr == "esrb":
            out.append(f"It is rated {joined}.")
        elif attr == "rating":
            out.append(f"People consider it {joined}.")
        elif attr == "genres":
            out.append(f"It is a {joined} game.")
        elif attr == "player_perspective":
            out.append(f"It is played from a {joined} perspective.")
        elif attr == "platforms":
            out.append(f"It is available on {joined}.")
        elif attr == "specifier":
            out.append(f"It is quite {joined}.")
        else:
            out.append(f"Its {_attribute_words(attr)} is {joined}.")
    return out


def realize_viggo(mr: ViggoMr) -> str:
    """Deterministic sentence for a dialogue-act MR, faithful to every slot."""
    da = mr.dialogue_act
    name = mr.values_of("name")
    name_str = _join(name) if name else "that game"

    if da == "request_attribute":
        # one empty-value slot queried
        attr, values = mr.slots[0] if mr.slots else ("has_multiplayer", ())
        if attr in BOOLEAN_ATTRIBUTES and not values:
            return f"Do you like {ATTRIBUTE_KEYWORDS[attr]} games?"
        if not values:
            return f"Do you have a preferred {_attribute_words(attr)}?"
        return f"Do you like {_join(values)} games?"

    if da == "confirm":
        year = mr.values_of("release_year")
        dev = mr.values_of("developer")
        genres = mr.values_of("genres")
        rest = _descriptor_sentences(
            mr, skip=frozenset({"name", "release_year", "developer", "genres"})
        )
        desc = ""
        if year or genres:
            desc = "the "
            if year:
                desc += f"{_join(year)} "
            if genres:
                desc += f"{' and '.join(genres)} "
            desc += "game"
        if dev:
            desc = f"{desc} from {_join(dev)}" if desc else f"the game from {_join(dev)}"
        question = (
            f"Oh, do you mean {desc}, {name_str}?" if desc else f"Oh, do you mean {name_str}?"
        )
        detail = " ".join(rest)
        sep = " " if detail else ""
        return f"{detail}{sep}{question}".lstrip()

    if da == "suggest":
        rest = _descriptor_sentences(mr, skip=frozenset({"name"}))
        detail = " ".join(rest)
        sep = " " if detail else ""
        return f"{detail}{sep}Have you tried {name_str}?".lstrip()

    if da == "request":
        spec = mr.values_of("specifier")
        rest = _descriptor_sentences(mr, skip=frozenset({"specifier"}))
        detail = " ".join(rest)
        sep = " " if detail else ""
        if spec:
            return f"{detail}{sep}What do you think makes a game {_join(spec)}?".lstrip()
        return f"{detail}{sep}What kind of games do you usually play?".lstrip()

    if da == "request_explanation":
        rating = mr.values_of("rating")
        rest = _descriptor_sentences(mr, skip=frozenset({"name", "rating"}))
        detail = " ".join(rest)
        sep = " " if detail else ""
        if rating:
            return (
                f"{detail}{sep}Can you explain why you consider {name_str} "
                f"{_join(rating)}?".lstrip()
            )
        return f"{detail}{sep}Can you explain what you think of {name_str}?".lstrip()

    if da == "verify_attribute":
        rating = mr.values_of("rating")
        rest = _descriptor_sentences(mr, skip=frozenset({"name", "rating"}))
        detail = " ".join(rest)
        opening = (
            f"I recall that you found {name_str} {_join(rating)}."
            if rating
            else f"I recall that you mentioned {name_str}."
        )
        sep = " " if detail else ""
        return f"{opening}{sep}{detail} Is that still how you see it?".rstrip()

    if da == "give_opinion":
        rating = mr.values_of("rating")
        rest = _descriptor_sentences(mr, skip=frozenset({"name", "rating"}))
        detail = " ".join(rest)
        opening = (
            f"I think that {name_str} is {_join(rating)}."
            if rating
            else f"I have thoughts about {name_str}."
        )
        sep = " " if detail else ""
        return f"{opening}{sep}{detail}".rstrip()

    if da == "recommend":
        rest = _descriptor_sentences(mr, skip=frozenset({"name"}))
        detail = " ".join(rest)
        sep = " " if detail else ""
        return f"You might want to give {name_str} a go.{sep}{detail}".rstrip()

    # inform and anything else: plain declaratives over all slots
    sentences = _descriptor_sentences(mr, skip=frozenset())
    if not sentences:
        return f"Here is something about {name_str}."
    return " ".join(sentences)
