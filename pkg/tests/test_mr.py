"""MR parsing and serialization: fixed examples plus round-trip properties."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from m2t.errors import (
    AmbiguousCommaSplitError,
    DuplicateAttributeError,
    EscapingRequiredError,
    MrSyntaxError,
)
from m2t.mr import (
    KG_TOPICS,
    KgMr,
    Triple,
    ViggoMr,
    parse_any_mr,
    parse_kg_paren,
    parse_kg_s2s,
    parse_viggo_mr,
    parse_viggo_qa,
    serialize_kg_paren,
    serialize_kg_s2s,
    serialize_viggo_mr,
    serialize_viggo_qa,
)

STRUCTURED_EXAMPLES = [
    "confirm(name[Hellblade: Senua's Sacrifice], release_year[2017], developer[Ninja Theory])",
    "suggest(name[Half-Life 2], genres[shooter], player_perspective[first person])",
    "give_opinion(name[SpellForce 3], rating[poor], genres[real-time strategy, role-playing], player_perspective[bird view])",
    "verify_attribute(name[Little Big Adventure], rating[average], has_multiplayer[no], platforms[PlayStation])",
    "request_attribute(has_multiplayer[])",
    "inform(name[Control], release_year[2019], developer[Remedy Entertainment], rating[excellent], genres[shooter, action-adventure], has_multiplayer[yes], player_perspective[third person], platforms[PC, PlayStation, Xbox])",
]


class TestStructuredForm:
    @pytest.mark.parametrize("text", STRUCTURED_EXAMPLES)
    def test_round_trip_is_byte_identical(self, text):
        assert serialize_viggo_mr(parse_viggo_mr(text)) == text

    def test_parse_fields(self):
        mr = parse_viggo_mr(STRUCTURED_EXAMPLES[0])
        assert mr.dialogue_act == "confirm"
        assert mr.slots == (
            ("name", ("Hellblade: Senua's Sacrifice",)),
            ("release_year", ("2017",)),
            ("developer", ("Ninja Theory",)),
        )

    def test_multi_value_slot_preserves_order(self):
        mr = parse_viggo_mr(STRUCTURED_EXAMPLES[2])
        assert mr.values_of("genres") == ("real-time strategy", "role-playing")

    def test_empty_value_slot(self):
        mr = parse_viggo_mr("request_attribute(has_multiplayer[])")
        assert mr.slots == (("has_multiplayer", ()),)

    def test_duplicate_attribute_rejected(self):
        with pytest.raises(DuplicateAttributeError):
            parse_viggo_mr("inform(name[A], name[B])")

    def test_missing_dialogue_act_rejected(self):
        with pytest.raises(MrSyntaxError):
            parse_viggo_mr("(name[A])")

    def test_unbalanced_bracket_rejected(self):
        with pytest.raises(MrSyntaxError):
            parse_viggo_mr("inform(name[A)")

    def test_value_with_bracket_needs_escaping(self):
        mr = ViggoMr("inform", (("name", ("Portal [Remastered]",)),))
        with pytest.raises(EscapingRequiredError):
            serialize_viggo_mr(mr)

    def test_value_with_comma_needs_escaping(self):
        mr = ViggoMr("inform", (("name", ("Crysis, Warhead",)),))
        with pytest.raises(EscapingRequiredError):
            serialize_viggo_mr(mr)


class TestQaForm:
    def test_serialization_bytes(self):
        mr = parse_viggo_mr(
            "confirm(name[Tony Hawk's Pro Skater 3], release_year[2001], genres[sport])"
        )
        assert serialize_viggo_qa(mr) == (
            "confirm = yes | name = Tony Hawk's Pro Skater 3"
            " | release_year = 2001 | genres = sport"
        )

    def test_leading_field_is_syntax_not_slot(self):
        mr = parse_viggo_qa("inform = yes | name = Control")
        assert mr.dialogue_act == "inform"
        assert mr.slots == (("name", ("Control",)),)

    def test_empty_slot_emits_trailing_space(self):
        mr = parse_viggo_mr("request_attribute(has_multiplayer[])")
        assert serialize_viggo_qa(mr) == "request_attribute = yes | has_multiplayer = "

    def test_empty_slot_round_trips_even_if_trailing_space_lost(self):
        mr = parse_viggo_mr("request_attribute(has_multiplayer[])")
        assert parse_viggo_qa("request_attribute = yes | has_multiplayer = ") == mr
        assert parse_viggo_qa("request_attribute = yes | has_multiplayer =") == mr

    @pytest.mark.parametrize("text", STRUCTURED_EXAMPLES)
    def test_round_trip_through_qa_form(self, text):
        mr = parse_viggo_mr(text)
        assert parse_viggo_qa(serialize_viggo_qa(mr)) == mr

    def test_missing_yes_flag_rejected(self):
        with pytest.raises(MrSyntaxError):
            parse_viggo_qa("confirm = no | name = Control")

    def test_value_with_pipe_needs_escaping(self):
        mr = ViggoMr("inform", (("name", ("A | B",)),))
        with pytest.raises(EscapingRequiredError):
            serialize_viggo_qa(mr)


class TestKgPipeForm:
    def test_serialization_bytes(self):
        mr = KgMr((Triple("Scream", "cast member", "Liev Schreiber"),), topic="movies")
        assert serialize_kg_s2s(mr) == "Scream = cast member = Liev Schreiber"

    def test_multi_triple_round_trip(self):
        text = (
            "Starship = song = We Built This City"
            " | We Built This City = genre = pop rock"
        )
        mr = parse_kg_s2s(text, topic="music")
        assert mr.relations == ("song", "genre")
        assert serialize_kg_s2s(mr) == text

    def test_wrong_field_count_rejected(self):
        with pytest.raises(MrSyntaxError):
            parse_kg_s2s("Scream = Liev Schreiber")

    def test_field_with_pipe_needs_escaping(self):
        mr = KgMr((Triple("A | B", "genre", "drama"),))
        with pytest.raises(EscapingRequiredError):
            serialize_kg_s2s(mr)


class TestKgParenForm:
    def test_serialization_bytes(self):
        mr = KgMr(
            (
                Triple("Despicable Me", "screen writer", "Cinco Paul"),
                Triple("Despicable Me", "producer", "John Cohen"),
            ),
            topic="movies",
        )
        assert serialize_kg_paren(mr) == (
            "(Despicable Me, screen writer, Cinco Paul),"
            " (Despicable Me, producer, John Cohen)"
        )

    def test_round_trip(self):
        text = "(Lost, genre, drama television series), (Lost, genre, paranormal television program)"
        mr = parse_kg_paren(text, topic="tv")
        assert serialize_kg_paren(mr) == text

    def test_extra_comma_in_group_is_ambiguous(self):
        with pytest.raises(AmbiguousCommaSplitError):
            parse_kg_paren("(Despicable Me, screen writer, Cinco Paul, Ken Daurio)")

    def test_two_fields_rejected_as_syntax(self):
        with pytest.raises(MrSyntaxError):
            parse_kg_paren("(Despicable Me, Cinco Paul)")

    def test_field_with_comma_needs_escaping(self):
        mr = KgMr((Triple("Me, Myself & Irene", "director", "Bobby Farrelly"),))
        with pytest.raises(EscapingRequiredError):
            serialize_kg_paren(mr)


class TestParseAny:
    def test_dispatches_each_form(self):
        assert isinstance(parse_any_mr("inform(name[Control])"), ViggoMr)
        assert isinstance(parse_any_mr("inform = yes | name = Control"), ViggoMr)
        assert isinstance(parse_any_mr("Scream = cast member = Liev Schreiber"), KgMr)
        assert isinstance(parse_any_mr("(Scream, cast member, Liev Schreiber)"), KgMr)

    def test_topic_is_forwarded(self):
        mr = parse_any_mr("Scream = cast member = Liev Schreiber", topic="movies")
        assert mr.topic == "movies"

    def test_garbage_rejected(self):
        with pytest.raises(MrSyntaxError):
            parse_any_mr("not an MR at all")


# Free-text alphabet avoiding every delimiter any form reserves, so the same
# generated MR can be pushed through all serializers.
SAFE_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 '-:&!+."

safe_token = (
    st.text(alphabet=SAFE_CHARS, min_size=1, max_size=24)
    .map(str.strip)
    .filter(bool)
)
attr_name = st.from_regex(r"[a-z][a-z_]{0,14}[a-z]", fullmatch=True)


@st.composite
def viggo_mrs(draw):
    attrs = draw(st.lists(attr_name, min_size=0, max_size=5, unique=True))
    slots = tuple(
        (attr, tuple(draw(st.lists(safe_token, min_size=0, max_size=3))))
        for attr in attrs
    )
    return ViggoMr(draw(attr_name), slots)


@st.composite
def kg_mrs(draw):
    triples = tuple(
        Triple(draw(safe_token), draw(safe_token), draw(safe_token))
        for _ in range(draw(st.integers(1, 4)))
    )
    topic = draw(st.sampled_from(KG_TOPICS + ("other",)))
    return KgMr(triples, topic=topic)


@given(viggo_mrs())
def test_structured_form_round_trips(mr):
    assert parse_viggo_mr(serialize_viggo_mr(mr)) == mr


@given(viggo_mrs())
def test_qa_form_round_trips(mr):
    assert parse_viggo_qa(serialize_viggo_qa(mr)) == mr


@given(kg_mrs())
def test_kg_pipe_form_round_trips(mr):
    assert parse_kg_s2s(serialize_kg_s2s(mr), topic=mr.topic) == mr


@given(kg_mrs())
def test_kg_paren_form_round_trips(mr):
    assert parse_kg_paren(serialize_kg_paren(mr), topic=mr.topic) == mr
