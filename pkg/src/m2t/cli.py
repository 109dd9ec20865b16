"""Command line client for the generation and evaluation service.

Every command except ``annotate`` and ``serve`` talks to the HTTP API.
By default an in-process application instance handles the requests, so
the commands work offline with no server running; ``--service-url``
points them at a live deployment instead.  ``annotate`` is local on
purpose: it is an interactive terminal session, and the labels land in
a file on the rater's machine.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import httpx

from .annotation import AnnotationStore
from .annotation import annotate as run_annotation
from .errors import M2tError
from .llm import GenerationStore

AGGREGATE_COLUMNS = (
    "group",
    "n",
    "coherence_mean",
    "semantic_accuracy_pooled",
    "semantic_accuracy_mean",
    "good_hallucination_rate",
    "bad_hallucination_rate",
    "question_added_rate",
    "da_match_rate",
    "word_count_mean",
)

service_url_option = click.option(
    "--service-url",
    default=None,
    metavar="URL",
    help="Send requests to a running service instead of in-process.",
)


def _request(path: str, payload: dict, service_url: str | None) -> dict:
    if service_url:
        client = httpx.Client(base_url=service_url, timeout=600.0)
    else:
        from fastapi.testclient import TestClient

        from .service import create_app

        client = TestClient(create_app())
    with client:
        response = client.post(path, json=payload)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(str(detail))
    return response.json()


def _config_payload(**kwargs) -> dict:
    """Keep only options the user actually set; the rest take defaults."""
    payload = {}
    for key, value in kwargs.items():
        if isinstance(value, tuple):
            value = list(value) or None
        if value is not None:
            payload[key] = value
    return payload


def _fmt2(value) -> str:
    if value is None:
        return "—"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def _tsv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _md_table(headers, rows) -> str:
    lines = [
        "| " + " | ".join(headers) + " |",
        "|" + "|".join(" --- " for _ in headers) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return "\n".join(lines)


def _echo_run(body: dict) -> None:
    click.echo(f"manifest digest: {body['report']['manifest_digest']}")
    counts = body["report"].get("counts")
    if counts:
        for name in sorted(counts):
            click.echo(f"{name}: {counts[name]}")
    for name in sorted(body["paths"]):
        click.echo(f"{name}: {body['paths'][name]}")


@click.group()
def main():
    """Meaning-to-text generation and evaluation toolkit."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8201, show_default=True, type=int)
def serve(host: str, port: int):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command()
@click.option(
    "--in",
    "in_file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="File with one MR per line, any supported form.",
)
@click.option(
    "--out",
    "out_store",
    default=None,
    type=click.Path(dir_okay=False),
    help="Generation store to append records to.",
)
@click.option("--format", "fmt", default="s2s", type=click.Choice(["s2s", "qa"]), show_default=True)
@click.option("--k", default=2, show_default=True, type=int, help="Exemplars per prompt.")
@click.option("--backend", default="mock", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--num-candidates", default=1, show_default=True, type=int)
@click.option(
    "--corpus",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="Synthetic corpus to sample exemplars from.",
)
@click.option(
    "--viggo",
    is_flag=True,
    help="Sample exemplars per dialogue act from the shipped split.",
)
@service_url_option
def generate(in_file, out_store, fmt, k, backend, seed, num_candidates, corpus, viggo, service_url):
    """Generate text for every MR line in a file."""
    mrs = [
        line.strip()
        for line in Path(in_file).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    payload = {
        "mrs": mrs,
        "format": fmt,
        "k": k,
        "backend": backend,
        "seed": seed,
        "num_candidates": num_candidates,
        "corpus_path": corpus,
        "viggo": viggo,
        "store_path": out_store,
    }
    body = _request("/generate", payload, service_url)
    for record in body["records"]:
        click.echo(
            json.dumps(
                {
                    "mr": record["mr"],
                    "cache_key": record["cache_key"],
                    "candidates": record["candidates"],
                },
                sort_keys=True,
            )
        )


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--topic", "topics", multiple=True, help="Repeat to select topics.")
@click.option("--format", "formats", multiple=True, type=click.Choice(["s2s", "qa"]))
@click.option("--backend", "backends", multiple=True)
@click.option("--k", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--train-per-topic", type=int, default=None)
@click.option("--test-per-topic", type=int, default=None)
@click.option("--num-candidates", type=int, default=None)
@service_url_option
def matrix(
    corpus,
    out_dir,
    topics,
    formats,
    backends,
    k,
    seed,
    train_per_topic,
    test_per_topic,
    num_candidates,
    service_url,
):
    """Run the within/across-topic tuning matrix over a corpus."""
    config = _config_payload(
        corpus_path=corpus,
        topics=topics,
        formats=formats,
        backends=backends,
        k=k,
        seed=seed,
        train_per_topic=train_per_topic,
        test_per_topic=test_per_topic,
        num_candidates=num_candidates,
    )
    body = _request("/matrix", {"config": config, "out_dir": out_dir}, service_url)
    _echo_run(body)


@main.command()
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option(
    "--mr-file",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="JSONL of reference-free MRs; defaults to the shipped set.",
)
@click.option(
    "--annotations",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="Annotation store to fold into the report as human metrics.",
)
@click.option("--num-candidates", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--backend", "backends", multiple=True)
@service_url_option
def novel(out_dir, mr_file, annotations, num_candidates, seed, backends, service_url):
    """Generate from reference-free MRs and package them for annotation."""
    config = _config_payload(
        num_candidates=num_candidates, seed=seed, backends=backends
    )
    payload = {
        "config": config,
        "out_dir": out_dir,
        "mr_file": mr_file,
        "annotation_store": annotations,
    }
    body = _request("/novel", payload, service_url)
    _echo_run(body)


@main.command()
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--viggo-test-size", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--backend", "backends", multiple=True)
@click.option(
    "--viggo-dir",
    default=None,
    type=click.Path(exists=True, file_okay=False),
    help="Directory with train.csv/valid.csv/test.csv overriding the shipped splits.",
)
@service_url_option
def viggo(out_dir, viggo_test_size, seed, backends, viggo_dir, service_url):
    """Run the fixed exemplar-count by format grid on dialogue-act data."""
    config = _config_payload(
        viggo_mode=True,
        viggo_test_size=viggo_test_size,
        seed=seed,
        backends=backends,
        viggo_dir=viggo_dir,
    )
    body = _request("/viggo", {"config": config, "out_dir": out_dir}, service_url)
    _echo_run(body)


@main.command()
@click.option("--report", "report_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--annotations", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit the raw JSON body.")
@service_url_option
def correlate(report_path, store_path, as_json, service_url):
    """Correlate a run's automatic scores with human annotations."""
    body = _request(
        "/correlate",
        {"report_path": report_path, "store_path": store_path},
        service_url,
    )
    if as_json:
        click.echo(json.dumps(body, indent=2, sort_keys=True))
        return
    rows = [
        [row["model"], row["metric"], str(row["n"]), _fmt2(row["pearson_r"])]
        for row in body["rows"]
    ]
    click.echo(_md_table(["model", "metric", "n", "r"], rows))


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--generations",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="Generation store for grouping and word counts.",
)
@click.option(
    "--group-by",
    default=None,
    type=click.Choice(["topic", "model", "dialogue_act"]),
)
@click.option("--tsv", is_flag=True, help="Emit a machine-readable table.")
@service_url_option
def report(store_path, generations, group_by, tsv, service_url):
    """Aggregate annotation stores into per-group means."""
    body = _request(
        "/aggregate",
        {
            "store_path": store_path,
            "group_by": group_by,
            "generation_store": generations,
        },
        service_url,
    )
    rows = body["rows"]
    if tsv:
        click.echo("\t".join(AGGREGATE_COLUMNS))
        for row in rows:
            click.echo("\t".join(_tsv_cell(row[c]) for c in AGGREGATE_COLUMNS))
        return
    body_rows = [[_fmt2(row[c]) for c in AGGREGATE_COLUMNS] for row in rows]
    click.echo(_md_table(list(AGGREGATE_COLUMNS), body_rows))


@main.command()
@click.option("--store", "ann_path", required=True, type=click.Path(dir_okay=False))
@click.option("--generations", "gen_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rater", required=True, help="Rater identifier recorded on every label.")
@click.option(
    "--filter",
    "filter_expr",
    default=None,
    help="Only items whose prompt contains this substring.",
)
def annotate(ann_path, gen_path, rater, filter_expr):
    """Label stored generations interactively."""
    store = GenerationStore(gen_path)
    annotations = AnnotationStore(ann_path)
    try:
        records = run_annotation(
            store,
            filter_expr,
            rater,
            annotations,
            input_fn=input,
            output_fn=click.echo,
        )
    except M2tError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"captured {len(records)} annotations")
