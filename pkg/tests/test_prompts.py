"""Oracle tests for prompt assembly and exemplar sampling.

The golden files under tests/golden/ are frozen byte-for-byte fixtures;
both builders must reproduce them exactly.
"""

from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from m2t.corpus import load_viggo_split
from m2t.errors import (
    EmbeddedNewlineError,
    InsufficientCorpusError,
    MarkerCollisionError,
)
from m2t.prompts import (
    build_qa,
    build_s2s,
    load_novel_mrs,
    load_stock_exemplars,
    sample_exemplars,
)

GOLDEN = Path(__file__).parent / "golden"


def read_golden(name):
    return (GOLDEN / name).read_text(encoding="utf-8")


class TestS2sFormat:
    def test_golden_cross_domain(self):
        stock = load_stock_exemplars()
        bundle = build_s2s(stock.sets["cross_domain_pair"], stock.restaurant_test_mr)
        assert bundle.rendered == read_golden("s2s_cross_domain.txt")

    def test_bundle_fields(self):
        bundle = build_s2s([("m1", "r1"), ("m2", "r2")], "t")
        assert bundle.format == "s2s"
        assert bundle.exemplars == (("m1", "r1"), ("m2", "r2"))
        assert bundle.test_mr_serialized == "t"
        assert bundle.stop_sequences == ("\n\n",)
        assert bundle.rendered == "m1\nr1\n\nm2\nr2\n\nt\n"

    def test_zero_shot(self):
        assert build_s2s([], "a = b = c").rendered == "a = b = c\n"

    def test_embedded_newline_rejected(self):
        with pytest.raises(EmbeddedNewlineError):
            build_s2s([("m\n1", "r")], "t")
        with pytest.raises(EmbeddedNewlineError):
            build_s2s([("m", "r\n")], "t")
        with pytest.raises(EmbeddedNewlineError):
            build_s2s([("m", "r")], "t\nt")

    def test_empty_fields_rejected(self):
        with pytest.raises(ValueError):
            build_s2s([("", "r")], "t")
        with pytest.raises(ValueError):
            build_s2s([("m", "  ")], "t")
        with pytest.raises(ValueError):
            build_s2s([("m", "r")], "")

    @given(
        st.lists(
            st.tuples(
                st.text("abcdefg ", min_size=1).filter(str.strip),
                st.text("hijklmn ", min_size=1).filter(str.strip),
            ),
            max_size=5,
        ),
        st.text("opqrstu ", min_size=1).filter(str.strip),
    )
    def test_structure_property(self, exemplars, test_mr):
        bundle = build_s2s(exemplars, test_mr)
        blocks = bundle.rendered.split("\n\n")
        assert len(blocks) == len(exemplars) + 1
        for block in blocks[:-1]:
            assert len(block.split("\n")) == 2
        assert blocks[-1] == test_mr + "\n"


class TestQaFormat:
    def test_golden_confirm(self):
        stock = load_stock_exemplars()
        bundle = build_qa(
            stock.sets["qa_confirm_demo"],
            "request_attribute = yes | has_multiplayer = ",
        )
        assert bundle.rendered == read_golden("qa_confirm.txt")

    def test_contains_figure_lines_verbatim(self):
        stock = load_stock_exemplars()
        bundle = build_qa(stock.sets["qa_confirm_demo"], "inform = yes")
        assert (
            "[PROMPT]: confirm = yes | name = Tony Hawk's Pro Skater 3"
            " | release_year = 2001 | genres = sport\n" in bundle.rendered
        )
        assert (
            "[SENTENCE]: Gotcha! So you're referring to the Tony Hawk's Pro"
            " Skater 3 sports game, which was released in 2001?\n" in bundle.rendered
        )

    def test_zero_shot(self):
        bundle = build_qa([], "a = b = c")
        assert bundle.rendered == "[PROMPT]: a = b = c\n[SENTENCE]:"
        assert bundle.stop_sequences == ("[PROMPT]:", "\n")

    def test_trailing_space_option(self):
        bundle = build_qa([], "a = b = c", trailing_space=True)
        assert bundle.rendered == "[PROMPT]: a = b = c\n[SENTENCE]: "

    def test_marker_override(self):
        bundle = build_qa(
            [("m", "r")], "t", prompt_marker="Q:", sentence_marker="A:"
        )
        assert bundle.rendered == "Q: m\nA: r\nQ: t\nA:"
        assert bundle.stop_sequences == ("Q:", "\n")

    def test_marker_collision(self):
        with pytest.raises(MarkerCollisionError):
            build_qa([("m [PROMPT]: x", "r")], "t")
        with pytest.raises(MarkerCollisionError):
            build_qa([("m", "r says [SENTENCE]: hi")], "t")
        with pytest.raises(MarkerCollisionError):
            build_qa([("m", "r")], "t [PROMPT]:")

    def test_embedded_newline_rejected(self):
        with pytest.raises(EmbeddedNewlineError):
            build_qa([("m\n", "r")], "t")

    @given(
        st.lists(
            st.tuples(
                st.text("abcdefg ", min_size=1).filter(str.strip),
                st.text("hijklmn ", min_size=1).filter(str.strip),
            ),
            max_size=5,
        ),
        st.text("opqrstu ", min_size=1).filter(str.strip),
    )
    def test_marker_count_property(self, exemplars, test_mr):
        bundle = build_qa(exemplars, test_mr)
        assert bundle.rendered.count("[SENTENCE]:") == len(exemplars) + 1
        assert bundle.rendered.count("[PROMPT]:") == len(exemplars) + 1

    def test_injectivity_spot_checks(self):
        # the one collision shape (test MR embedding a full exemplar block)
        # is unreachable because newlines are rejected at the boundary
        with pytest.raises(EmbeddedNewlineError):
            build_s2s([], "m\nr\n\nt")
        pairs = [
            build_s2s([("m1", "r1")], "t").rendered,
            build_s2s([("m1", "r2")], "t").rendered,
            build_s2s([("m1", "r1")], "u").rendered,
            build_qa([("m1", "r1")], "t").rendered,
            build_qa([("m1", "r2")], "t").rendered,
        ]
        assert len(set(pairs)) == len(pairs)


@pytest.fixture(scope="module")
def train():
    return load_viggo_split("train")


@pytest.fixture(scope="module")
def test_split():
    return load_viggo_split("test")


class TestSampleExemplars:
    def test_uniform_basics(self, train):
        result = sample_exemplars(train, 3, strategy="uniform", seed=11)
        assert len(result.exemplars) == 3
        assert len(set(result.keys)) == 3
        again = sample_exemplars(train, 3, strategy="uniform", seed=11)
        assert result.keys == again.keys
        other = sample_exemplars(train, 3, strategy="uniform", seed=12)
        assert result.keys != other.keys

    def test_per_dialogue_act(self, train):
        result = sample_exemplars(train, 2, strategy="per_dialogue_act", seed=5)
        assert len(result.exemplars) == 18  # 9 dialogue acts x 2
        by_da = {}
        for e in result.exemplars:
            by_da[e.dialogue_act] = by_da.get(e.dialogue_act, 0) + 1
        assert set(by_da.values()) == {2}
        assert len(by_da) == 9

    def test_per_dialogue_act_ten_shot(self, train):
        result = sample_exemplars(train, 10, strategy="per_dialogue_act", seed=1)
        assert len(result.exemplars) == 90
        assert len(set(result.keys)) == 90

    def test_zero_k(self, train):
        assert sample_exemplars(train, 0, seed=1).exemplars == ()

    def test_exclusion(self, train):
        excluded = frozenset(r.key for r in train[:100])
        result = sample_exemplars(
            train, 10, strategy="uniform", seed=3, exclude_keys=excluded
        )
        assert not set(result.keys) & excluded
        allowed = {r.key for r in train[100:]}
        assert set(result.keys) <= allowed

    def test_no_test_set_leakage(self, train, test_split):
        test_keys = frozenset(r.key for r in test_split)
        result = sample_exemplars(
            train, 10, strategy="per_dialogue_act", seed=2, exclude_keys=test_keys
        )
        assert not set(result.keys) & test_keys

    def test_insufficient_corpus(self, train):
        with pytest.raises(InsufficientCorpusError):
            sample_exemplars(train, 20, strategy="per_dialogue_act", seed=1)
        with pytest.raises(InsufficientCorpusError):
            sample_exemplars(train[:5], 10, strategy="uniform", seed=1)

    def test_manifest(self, train):
        result = sample_exemplars(train, 2, strategy="uniform", seed=9)
        manifest = result.manifest()
        assert manifest["seed"] == 9
        assert manifest["k"] == 2
        assert manifest["strategy"] == "uniform"
        assert manifest["keys"] == list(result.keys)

    def test_order_preserved_not_sorted(self, train):
        # sampled order must be reproducible, not canonicalized
        result = sample_exemplars(train, 10, strategy="uniform", seed=4)
        assert list(result.keys) != sorted(result.keys)


class TestCorpusLoader:
    def test_split_sizes(self):
        assert len(load_viggo_split("train")) == 126
        assert len(load_viggo_split("valid")) == 27
        assert len(load_viggo_split("test")) == 56

    def test_records_have_parsed_dialogue_acts(self):
        das = {r.dialogue_act for r in load_viggo_split("train")}
        assert das == {
            "inform",
            "confirm",
            "suggest",
            "request",
            "request_attribute",
            "request_explanation",
            "verify_attribute",
            "give_opinion",
            "recommend",
        }

    def test_keys_unique_across_splits(self):
        keys = [
            r.key
            for split in ("train", "valid", "test")
            for r in load_viggo_split(split)
        ]
        assert len(set(keys)) == len(keys)

    def test_unknown_split_rejected(self):
        with pytest.raises(ValueError):
            load_viggo_split("dev2")


class TestNovelMrs:
    def test_fixture_shape(self):
        novel = load_novel_mrs()
        assert [n.id for n in novel] == ["M1", "M2", "M3", "M4"]
        assert [n.mr.topic for n in novel] == ["movies", "music", "tv", "sports"]
        assert [len(n.mr.triples) for n in novel] == [1, 2, 1, 2]
        m2 = novel[1].mr
        assert m2.triples[0].subject == "The Beach Boys"
        assert m2.triples[1].object == "1970"
