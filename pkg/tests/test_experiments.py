"""Oracle tests for the experiment runner.

The mock backend is MR-faithful by construction, so within-domain
semantic-accuracy diagonals of 1.0, byte-identical reruns, and exact
package counts are all decidable in advance and frozen here.
"""

import json
import random
import re

import pytest

from m2t.annotation import AnnotationRecord, resolve_item
from m2t.errors import (
    BackendError,
    EmptyGroupError,
    InsufficientCorpusError,
)
from m2t.experiments import (
    FORMATS,
    KG_TOPICS,
    VIGGO_KS,
    ExperimentConfig,
    ScoredItem,
    correlate,
    run_matrix,
    run_novel,
    run_viggo,
)
from m2t.llm import CompletionClient, GenerationStore, MockBackend, parse_test_mr
from m2t.metrics import (
    load_aligned_examples,
    load_lexicon,
    semantic_accuracy,
)
from m2t.mr import KgMr, Triple, serialize_kg_paren, serialize_kg_s2s
from m2t.realizer import (
    CorpusSplitConfig,
    default_bank,
    generate_corpus,
    load_corpus_records,
    load_triple_groups,
)

TOPICS = ("movies", "music", "sports", "tv")

TWO_SHOT_PREFIX = (
    "Starship = song = We Built This City | We Built This City = genre = pop rock\n"
    "Starship plays pop rock like the song We Built This City. Do you like that genre?\n\n"
    "Planet of the Apes = cast member = Felix Silla\n"
    "I heard Felix Silla starred in a good movie, called Planet of the Apes.\n\n"
)

SONG_DATE_SURFACES = {
    "I like The Beach Boys's song, Cotton Fields. It came out in 1970.",
    "The Beach Boys released Cotton Fields in 1970. Have you heard it?",
}


def walk_keys(node):
    if isinstance(node, dict):
        for key, value in node.items():
            yield key
            yield from walk_keys(value)
    elif isinstance(node, (list, tuple)):
        for value in node:
            yield from walk_keys(value)


def read_lines(path):
    return [
        json.loads(line)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


# ---------------------------------------------------------------------------
# hand-labeled aligner oracle
# ---------------------------------------------------------------------------

class TestAlignedOracle:
    def test_reproduces_every_hand_label(self):
        lexicon = load_lexicon()
        examples = load_aligned_examples()
        assert len(examples) == 4
        for example in examples:
            report = semantic_accuracy(example.mr, example.text, lexicon=lexicon)
            assert (report.realized, report.total) == (example.realized, example.total), (
                example.id
            )

    def test_expected_counts_by_example(self):
        by_id = {e.id: e for e in load_aligned_examples()}
        assert (by_id["movies-award-chain"].realized, by_id["movies-award-chain"].total) == (2, 3)
        assert (by_id["music-song-genre"].realized, by_id["music-song-genre"].total) == (1, 2)
        assert (by_id["tv-award-year"].realized, by_id["tv-award-year"].total) == (3, 3)
        assert (by_id["sports-team-position"].realized, by_id["sports-team-position"].total) == (2, 2)

    def test_genre_label_needs_lexicon_variant(self):
        # "country music" only matches through its variant "country"
        example = next(e for e in load_aligned_examples() if e.id == "music-song-genre")
        without = semantic_accuracy(example.mr, example.text)
        assert without.realized == 0
        with_lexicon = semantic_accuracy(example.mr, example.text, lexicon=load_lexicon())
        assert with_lexicon.realized == 1


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.topics == TOPICS
        assert cfg.k == 10
        assert cfg.formats == ("s2s", "qa")
        assert cfg.backends == ("mock",)
        assert cfg.seed == 0
        assert cfg.train_per_topic == 10
        assert cfg.test_per_topic == 50
        assert cfg.viggo_mode is False
        assert cfg.viggo_test_size == 100
        assert cfg.num_candidates == 1

    def test_module_constants(self):
        assert KG_TOPICS == TOPICS
        assert FORMATS == ("s2s", "qa")
        assert VIGGO_KS == (3, 10)

    def test_sequences_coerced_to_tuples(self):
        cfg = ExperimentConfig(topics=["movies"], formats=["qa"], backends=["mock"])
        assert cfg.topics == ("movies",)
        assert cfg.formats == ("qa",)
        assert cfg.backends == ("mock",)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"topics": ()},
            {"topics": ("movies", "movies")},
            {"topics": ("restaurants",)},
            {"formats": ()},
            {"formats": ("xml",)},
            {"backends": ()},
            {"backends": ("",)},
            {"k": 0},
            {"train_per_topic": 0},
            {"test_per_topic": 0},
            {"viggo_test_size": 0},
            {"num_candidates": 0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)

    def test_manifest_serialization_covers_every_field(self):
        cfg = ExperimentConfig(corpus_path="corpus.jsonl", seed=9)
        manifest = cfg.as_manifest()
        assert manifest["corpus_path"] == "corpus.jsonl"
        assert manifest["topics"] == list(TOPICS)
        assert manifest["k"] == 10
        assert manifest["formats"] == ["s2s", "qa"]
        assert manifest["backends"] == ["mock"]
        assert manifest["seed"] == 9
        assert manifest["train_per_topic"] == 10
        assert manifest["test_per_topic"] == 50
        assert manifest["viggo_mode"] is False
        assert manifest["viggo_test_size"] == 100
        assert manifest["num_candidates"] == 1
        json.dumps(manifest)


# ---------------------------------------------------------------------------
# matrix runs over a generated corpus
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def kg_corpus_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("kgcorpus")
    generated = generate_corpus(
        load_triple_groups(),
        default_bank(),
        CorpusSplitConfig(train_target=200, dev_target=0, test_per_category=2, seed=11),
        out,
    )
    return generated.corpus_path


@pytest.fixture(scope="module")
def matrix_cfg(kg_corpus_path):
    return ExperimentConfig(
        corpus_path=str(kg_corpus_path),
        k=3,
        seed=7,
        train_per_topic=5,
        test_per_topic=3,
    )


@pytest.fixture(scope="module")
def matrix_run(matrix_cfg, tmp_path_factory):
    return run_matrix(matrix_cfg, tmp_path_factory.mktemp("matrixrun"))


class TestRunMatrix:
    def test_one_sub_table_per_format_backend(self, matrix_run):
        tables = matrix_run.report["sub_tables"]
        assert [(t["format"], t["backend"]) for t in tables] == [
            ("s2s", "mock"),
            ("qa", "mock"),
        ]

    def test_cells_cover_full_train_by_test_grid(self, matrix_run):
        for table in matrix_run.report["sub_tables"]:
            pairs = [(c["train_topic"], c["test_topic"]) for c in table["cells"]]
            assert pairs == [(a, b) for a in TOPICS for b in TOPICS]

    def test_within_domain_diagonal_semantic_accuracy_is_one(self, matrix_run):
        for table in matrix_run.report["sub_tables"]:
            for cell in table["cells"]:
                if cell["train_topic"] == cell["test_topic"]:
                    assert cell["within_domain"] is True
                    assert cell["semantic_mean"] == 1.0
                else:
                    assert cell["within_domain"] is False

    def test_cell_counts_and_totals(self, matrix_run):
        for table in matrix_run.report["sub_tables"]:
            for cell in table["cells"]:
                assert cell["n"] == 3
                assert cell["error_count"] == 0
        totals = matrix_run.report["totals"]
        assert totals["test_items_per_sub_table"] == 12
        assert totals["generations"] == 2 * 4 * 12

    def test_row_and_column_averages_present(self, matrix_run):
        for table in matrix_run.report["sub_tables"]:
            assert set(table["row_averages"]) == set(TOPICS)
            assert set(table["column_averages"]) == set(TOPICS)
            for avg in table["row_averages"].values():
                assert 0.0 <= avg["surface"] <= 1.0
                assert 0.0 <= avg["semantic"] <= 1.0

    def test_every_test_item_scored_once_per_row(self, matrix_run):
        items = matrix_run.report["items"]
        for table in matrix_run.report["sub_tables"]:
            fmt, backend = table["format"], table["backend"]
            for train in TOPICS:
                keys = [
                    i["item_key"]
                    for i in items
                    if i["format"] == fmt
                    and i["backend"] == backend
                    and i["train_topic"] == train
                ]
                assert len(keys) == 12
                assert len(set(keys)) == 12

    def test_item_keys_are_annotation_item_keys(self, matrix_run):
        for item in matrix_run.report["items"]:
            assert re.fullmatch(r"[0-9a-f]{64}#\d+", item["item_key"])
            assert item["model"] == item["backend"]

    def test_manifest_digest_referenced_and_recomputable(self, matrix_run):
        manifest = json.loads(
            matrix_run.paths["manifest"].read_text(encoding="utf-8")
        )
        assert matrix_run.report["manifest_digest"] == manifest["digest"]
        import hashlib

        body = {k: v for k, v in manifest.items() if k != "digest"}
        recomputed = hashlib.sha256(
            json.dumps(body, sort_keys=True, ensure_ascii=False).encode()
        ).hexdigest()
        assert recomputed == manifest["digest"]

    def test_manifest_records_config_and_exemplars(self, matrix_run, matrix_cfg):
        manifest = matrix_run.manifest
        assert manifest["config"] == matrix_cfg.as_manifest()
        for topic in TOPICS:
            exemplars = manifest["exemplars"][topic]
            assert exemplars["k"] == 3
            assert len(exemplars["keys"]) == 3
            assert len(manifest["test_items"][topic]) == 3

    def test_byte_identical_rerun(self, matrix_cfg, matrix_run, tmp_path):
        again = run_matrix(matrix_cfg, tmp_path / "again")
        for name in ("report", "markdown", "tsv", "manifest"):
            assert again.paths[name].read_bytes() == matrix_run.paths[name].read_bytes()

    def test_shuffled_record_order_changes_nothing(
        self, matrix_cfg, matrix_run, kg_corpus_path, tmp_path
    ):
        records = load_corpus_records(kg_corpus_path)
        random.Random(0).shuffle(records)
        shuffled = run_matrix(matrix_cfg, tmp_path / "shuffled", records=records)
        assert (
            shuffled.paths["report"].read_bytes()
            == matrix_run.paths["report"].read_bytes()
        )

    def test_markdown_rounds_to_two_decimals(self, matrix_run):
        text = matrix_run.paths["markdown"].read_text(encoding="utf-8")
        assert not re.search(r"\d\.\d{3,}", text)
        assert re.search(r"\| 1\.00\*", text)

    def test_machine_outputs_keep_full_precision(self, matrix_run):
        report_text = matrix_run.paths["report"].read_text(encoding="utf-8")
        assert re.search(r"\d\.\d{6,}", report_text)
        tsv_text = matrix_run.paths["tsv"].read_text(encoding="utf-8")
        assert tsv_text.startswith(
            "format\tbackend\ttrain_topic\ttest_topic\tn\terror_count"
            "\twithin_domain\tsurface_mean\tsemantic_mean\n"
        )
        assert re.search(r"\d\.\d{6,}", tsv_text)

    def test_significance_has_both_poolings(self, matrix_run):
        entries = matrix_run.report["significance"]
        scopes = {e["scope"] for e in entries}
        assert scopes == {"pooled"} | {f"test_topic:{t}" for t in TOPICS}
        for entry in entries:
            assert {entry["a"]["format"], entry["b"]["format"]} == {"s2s", "qa"}
            assert entry["metric"] == "surface_similarity"
            if entry["scope"] == "pooled":
                assert entry["n"] == 48
            else:
                assert entry["n"] == 12
            if not entry["degenerate"]:
                assert isinstance(entry["t_statistic"], float)
                assert 0.0 <= entry["p_value"] <= 1.0

    def test_requires_corpus_or_records(self):
        with pytest.raises(ValueError):
            run_matrix(ExperimentConfig(), "unused")

    def test_unknown_backend_needs_a_client(self, tmp_path):
        cfg = ExperimentConfig(
            topics=("movies", "tv"),
            backends=("remote-x",),
            formats=("s2s",),
            k=2,
            train_per_topic=3,
            test_per_topic=3,
        )
        with pytest.raises(ValueError, match="remote-x"):
            run_matrix(cfg, tmp_path, records=manual_records())


# ---------------------------------------------------------------------------
# matrix gap handling over hand-built records
# ---------------------------------------------------------------------------

def manual_records():
    records = []
    for split, start in (("train", 0), ("test", 3)):
        for i in range(start, start + 3):
            movie = KgMr(
                topic="movies",
                triples=(Triple(f"Film {i}", "cast member", f"Actor {i}"),),
            )
            records.append(
                {
                    "topic": "movies",
                    "mr_paren": serialize_kg_paren(movie),
                    "mr_s2s": serialize_kg_s2s(movie),
                    "reference": f"I heard Actor {i} starred in a good movie, called Film {i}.",
                    "template_category": "movies_cast",
                    "split": split,
                }
            )
            show = KgMr(
                topic="tv",
                triples=(
                    Triple(f"Lost {i}", "genre", "drama"),
                    Triple(f"Lost {i}", "genre", "mystery"),
                ),
            )
            records.append(
                {
                    "topic": "tv",
                    "mr_paren": serialize_kg_paren(show),
                    "mr_s2s": serialize_kg_s2s(show),
                    "reference": f"Lost {i} is a drama. It is also a mystery.",
                    "template_category": "tv_genre_pair",
                    "split": split,
                }
            )
    return records


class LostFailingBackend(MockBackend):
    """Refuses any prompt whose test MR is about a Lost show."""

    def raw_complete(self, prompt, params):
        mr = parse_test_mr(prompt)
        if isinstance(mr, KgMr) and mr.triples[0].subject.startswith("Lost"):
            raise BackendError("backend declined", retryable=False)
        return super().raw_complete(prompt, params)


def small_cfg(**overrides):
    base = {
        "topics": ("movies", "tv"),
        "formats": ("s2s",),
        "k": 2,
        "seed": 1,
        "train_per_topic": 3,
        "test_per_topic": 3,
    }
    base.update(overrides)
    return ExperimentConfig(**base)


class TestMatrixGaps:
    def test_clean_manual_run_has_full_diagonal(self, tmp_path):
        result = run_matrix(small_cfg(), tmp_path, records=manual_records())
        cells = result.report["sub_tables"][0]["cells"]
        for cell in cells:
            assert cell["n"] == 3
            if cell["train_topic"] == cell["test_topic"]:
                assert cell["semantic_mean"] == 1.0

    def test_failed_cells_are_marked_gaps(self, tmp_path):
        clients = {"mock": CompletionClient(LostFailingBackend())}
        result = run_matrix(
            small_cfg(), tmp_path, records=manual_records(), clients=clients
        )
        cells = {
            (c["train_topic"], c["test_topic"]): c
            for c in result.report["sub_tables"][0]["cells"]
        }
        for train in ("movies", "tv"):
            gap = cells[(train, "tv")]
            assert gap["n"] == 0
            assert gap["error_count"] == 3
            assert gap["surface_mean"] is None
            assert gap["semantic_mean"] is None
            scored = cells[(train, "movies")]
            assert scored["n"] == 3
            assert scored["error_count"] == 0
        markdown = result.paths["markdown"].read_text(encoding="utf-8")
        assert "—" in markdown

    def test_insufficient_test_items_raise(self, tmp_path):
        with pytest.raises(InsufficientCorpusError):
            run_matrix(
                small_cfg(test_per_topic=9), tmp_path, records=manual_records()
            )

    def test_insufficient_train_pool_raises(self, tmp_path):
        with pytest.raises(InsufficientCorpusError):
            run_matrix(
                small_cfg(train_per_topic=4), tmp_path, records=manual_records()
            )


# ---------------------------------------------------------------------------
# novel-MR protocol
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def novel_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("novelrun")
    store = GenerationStore(out / "generations.jsonl")
    clients = {"mock": CompletionClient(MockBackend(), store=store)}
    result = run_novel(
        ExperimentConfig(num_candidates=2, seed=5), out_dir=out, clients=clients
    )
    return result, store


class TestRunNovel:
    def test_package_has_mr_count_times_candidates(self, novel_run):
        result, _ = novel_run
        items = read_lines(result.paths["package"])
        assert len(items) == 4 * 2
        assert result.report["counts"] == {
            "errors": 0,
            "items": 8,
            "mrs": 4,
            "num_candidates": 2,
        }

    def test_totals_follow_triple_counts(self, novel_run):
        result, _ = novel_run
        items = read_lines(result.paths["package"])
        by_id = {}
        for item in items:
            by_id.setdefault(item["novel_id"], item)
        assert {k: v["total"] for k, v in by_id.items()} == {
            "M1": 1,
            "M2": 2,
            "M3": 1,
            "M4": 2,
        }

    def test_no_surface_similarity_anywhere(self, novel_run):
        result, _ = novel_run
        for node in (
            result.report,
            result.manifest,
            *read_lines(result.paths["package"]),
        ):
            assert not any("surface" in key for key in walk_keys(node))

    def test_prompts_are_two_shot_from_stock_pair(self, novel_run):
        _, store = novel_run
        prompts = [record.prompt for record in store]
        assert len(prompts) == 4
        for prompt in prompts:
            assert prompt.startswith(TWO_SHOT_PREFIX)
        assert (
            TWO_SHOT_PREFIX + "Despicable Me = screen writer = Cinco Paul\n"
        ) in prompts

    def test_mock_outputs_cover_template_and_fallback_paths(self, novel_run):
        result, _ = novel_run
        items = read_lines(result.paths["package"])
        texts = {item["novel_id"]: item["text"] for item in items}
        assert texts["M1"] == "The screen writer of Despicable Me is Cinco Paul."
        assert texts["M2"] in SONG_DATE_SURFACES
        assert texts["M3"] == (
            "The narrative location of Desperate Housewives is Fairview."
        )
        assert texts["M4"] == (
            "The significant event of Muhammad Ali is lighting the Olympic cauldron."
            " The of of lighting the Olympic cauldron is 1996 Summer Olympics."
        )

    def test_items_resolve_against_generation_store(self, novel_run):
        result, store = novel_run
        for item in read_lines(result.paths["package"]):
            resolved = resolve_item(store, item["item_key"])
            assert resolved.total == item["total"]
            assert resolved.text == item["text"]

    def test_empty_novel_file(self, tmp_path):
        empty = tmp_path / "none.jsonl"
        empty.write_text("", encoding="utf-8")
        result = run_novel(
            ExperimentConfig(), empty, out_dir=tmp_path / "out"
        )
        assert read_lines(result.paths["package"]) == []
        assert result.report["counts"]["mrs"] == 0
        assert result.report["counts"]["items"] == 0
        assert result.report["human_metrics"] is None
        assert re.fullmatch(r"[0-9a-f]{64}", result.manifest["digest"])

    def test_report_without_annotations_has_no_human_rows(self, novel_run):
        result, _ = novel_run
        assert result.report["human_metrics"] is None

    def test_report_aggregates_supplied_annotations(self, novel_run, tmp_path):
        result, store = novel_run
        records = [
            AnnotationRecord(
                item_key=item["item_key"],
                rater_id="r1",
                coherence=3,
                realized=item["total"],
                total=item["total"],
                good_hallucination=False,
                bad_hallucination=False,
                question_added=False,
            )
            for item in read_lines(result.paths["package"])
        ]
        again = run_novel(
            ExperimentConfig(num_candidates=2, seed=5),
            out_dir=tmp_path,
            clients={"mock": CompletionClient(MockBackend(), store=store)},
            annotations=records,
        )
        rows = again.report["human_metrics"]
        assert rows[-1]["group"] == "overall"
        assert rows[-1]["n"] == 8
        assert rows[-1]["coherence_mean"] == 3.0
        assert rows[-1]["semantic_accuracy_pooled"] == 1.0
        assert not any("surface" in key for key in walk_keys(again.report))

    def test_byte_identical_rerun(self, novel_run, tmp_path):
        result, _ = novel_run
        again = run_novel(
            ExperimentConfig(num_candidates=2, seed=5), out_dir=tmp_path
        )
        for name in ("report", "package", "manifest", "markdown"):
            assert again.paths[name].read_bytes() == result.paths[name].read_bytes()


# ---------------------------------------------------------------------------
# dialogue-act corpus runs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def viggo_run(tmp_path_factory):
    cfg = ExperimentConfig(viggo_mode=True, viggo_test_size=6, seed=3)
    return run_viggo(cfg, tmp_path_factory.mktemp("viggorun"))


class TestRunViggo:
    def test_exactly_four_cells_per_backend(self, viggo_run):
        cells = viggo_run.report["cells"]
        assert [(c["k"], c["format"], c["backend"]) for c in cells] == [
            (3, "s2s", "mock"),
            (3, "qa", "mock"),
            (10, "s2s", "mock"),
            (10, "qa", "mock"),
        ]

    def test_mock_semantic_accuracy_is_one_in_every_cell(self, viggo_run):
        for cell in viggo_run.report["cells"]:
            assert cell["semantic_mean"] == 1.0

    def test_cell_metrics_present(self, viggo_run):
        for cell in viggo_run.report["cells"]:
            assert cell["n"] == 6
            assert cell["error_count"] == 0
            assert 0.0 <= cell["surface_mean"] <= 1.0
            assert 0.0 <= cell["da_match_rate"] <= 1.0
            assert 0.0 <= cell["da_uncertain_rate"] <= 1.0

    def test_manifest_audit_per_da_counts_and_no_leakage(self, viggo_run):
        manifest = viggo_run.manifest
        for k in VIGGO_KS:
            exemplars = manifest["exemplars"][str(k)]
            counts = exemplars["per_dialogue_act_counts"]
            assert len(counts) == 9
            assert all(count == k for count in counts.values())
            assert len(exemplars["keys"]) == 9 * k
        audit = manifest["audit"]
        assert audit["exemplar_test_overlap"] == []
        assert audit["per_dialogue_act_counts_equal_k"] is True

    def test_test_size_capped_at_split_size(self, tmp_path):
        cfg = ExperimentConfig(viggo_mode=True, viggo_test_size=500, seed=3)
        result = run_viggo(cfg, tmp_path)
        assert all(cell["n"] == 56 for cell in result.report["cells"])

    def test_byte_identical_rerun(self, viggo_run, tmp_path):
        cfg = ExperimentConfig(viggo_mode=True, viggo_test_size=6, seed=3)
        again = run_viggo(cfg, tmp_path)
        for name in ("report", "markdown", "tsv", "manifest"):
            assert again.paths[name].read_bytes() == viggo_run.paths[name].read_bytes()

    def test_items_carry_da_labels(self, viggo_run):
        items = viggo_run.report["items"]
        assert len(items) == 4 * 6
        for item in items:
            assert item["da_match"] in ("match", "mismatch", "uncertain")
            assert re.fullmatch(r"[0-9a-f]{64}#0", item["item_key"])


# ---------------------------------------------------------------------------
# correlation
# ---------------------------------------------------------------------------

def annotation(item_key, realized, total, coherence, rater="r1"):
    return AnnotationRecord(
        item_key=item_key,
        rater_id=rater,
        coherence=coherence,
        realized=realized,
        total=total,
        good_hallucination=False,
        bad_hallucination=False,
        question_added=False,
    )


def affine_fixture(model="mock", slope=0.5, intercept=0.1, n=12):
    scored, annotations = [], []
    for i in range(n):
        realized, total = i % 5, 4
        ratio = realized / total
        scored.append(
            ScoredItem(
                item_key=f"{model}-{i}",
                model=model,
                score=intercept + slope * ratio,
            )
        )
        annotations.append(
            annotation(f"{model}-{i}", realized, total, coherence=(i % 3) + 1)
        )
    return scored, annotations


def rows_by(result):
    return {(row.model, row.metric): row for row in result}


class TestCorrelate:
    def test_affine_surface_gives_r_one(self):
        scored, annotations = affine_fixture()
        rows = rows_by(correlate(scored, annotations))
        for model in ("mock", "overall"):
            row = rows[(model, "semantic_accuracy")]
            assert row.result.n == 12
            assert row.result.pearson_r == pytest.approx(1.0, abs=1e-12)

    def test_negative_affine_gives_minus_one(self):
        scored, annotations = affine_fixture(slope=-0.5, intercept=0.9)
        rows = rows_by(correlate(scored, annotations))
        assert rows[("overall", "semantic_accuracy")].result.pearson_r == pytest.approx(
            -1.0, abs=1e-12
        )

    def test_rows_cover_models_and_metrics(self):
        scored_a, annotations_a = affine_fixture(model="alpha")
        scored_b, annotations_b = affine_fixture(model="beta", slope=0.3)
        rows = correlate(scored_a + scored_b, annotations_a + annotations_b)
        labels = [(row.model, row.metric) for row in rows]
        assert labels == [
            ("alpha", "semantic_accuracy"),
            ("alpha", "coherence"),
            ("beta", "semantic_accuracy"),
            ("beta", "coherence"),
            ("overall", "semantic_accuracy"),
            ("overall", "coherence"),
        ]
        by = rows_by(rows)
        assert by[("alpha", "semantic_accuracy")].result.pearson_r == pytest.approx(1.0)
        assert by[("beta", "semantic_accuracy")].result.pearson_r == pytest.approx(1.0)

    def test_independent_random_coherence_has_small_r(self):
        rng = random.Random(5)
        scored, annotations = [], []
        for i in range(200):
            realized = rng.randrange(0, 101)
            scored.append(
                ScoredItem(item_key=f"i{i}", model="mock", score=realized / 100)
            )
            annotations.append(
                annotation(f"i{i}", realized, 100, coherence=rng.choice((1, 2, 3)))
            )
        row = rows_by(correlate(scored, annotations))[("mock", "coherence")]
        assert row.result.n == 200
        assert abs(row.result.pearson_r) < 0.25

    def test_disjoint_keys_raise_empty_group(self):
        scored = [ScoredItem(item_key="a", model="mock", score=0.5)]
        with pytest.raises(EmptyGroupError):
            correlate(scored, [annotation("b", 1, 1, coherence=3)])

    def test_constant_scores_are_degenerate_not_fatal(self):
        scored = [
            ScoredItem(item_key=f"i{n}", model="flat", score=0.5) for n in range(4)
        ]
        annotations = [annotation(f"i{n}", n % 3, 2, coherence=(n % 3) + 1) for n in range(4)]
        row = rows_by(correlate(scored, annotations))[("flat", "semantic_accuracy")]
        assert row.result.degenerate is True
        assert row.result.pearson_r is None

    def test_single_pair_is_degenerate(self):
        scored = [ScoredItem(item_key="only", model="solo", score=0.4)]
        rows = rows_by(correlate(scored, [annotation("only", 1, 2, coherence=2)]))
        row = rows[("solo", "semantic_accuracy")]
        assert row.result.n == 1
        assert row.result.degenerate is True

    def test_zero_total_records_count_only_for_coherence(self):
        scored, annotations = affine_fixture()
        scored.append(ScoredItem(item_key="zt", model="mock", score=0.9))
        annotations.append(annotation("zt", 0, 0, coherence=1))
        rows = rows_by(correlate(scored, annotations))
        assert rows[("mock", "semantic_accuracy")].result.n == 12
        assert rows[("mock", "coherence")].result.n == 13

    def test_multiple_raters_pair_per_record(self):
        scored = [
            ScoredItem(item_key=f"i{n}", model="mock", score=n / 10) for n in range(3)
        ]
        annotations = []
        for n in range(3):
            annotations.append(annotation(f"i{n}", n, 4, coherence=1, rater="r1"))
            annotations.append(annotation(f"i{n}", n + 1, 4, coherence=2, rater="r2"))
        rows = rows_by(correlate(scored, annotations))
        assert rows[("mock", "semantic_accuracy")].result.n == 6

    def test_accepts_matrix_run_result(self, matrix_run):
        items = matrix_run.report["items"][:4]
        annotations = [
            annotation(item["item_key"], 1, 1, coherence=3) for item in items
        ]
        annotations[0] = annotation(items[0]["item_key"], 0, 1, coherence=1)
        rows = correlate(matrix_run, annotations)
        assert rows_by(rows)[("mock", "coherence")].result.n == 4
