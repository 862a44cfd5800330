"""Command-line interface for headless and batch use.

Exit codes mirror verdicts so shell pipelines can branch on them:
0 Pass, 1 Fail, 2 Partial Pass (debug), 3 run/usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from .config import (
    AppConfig,
    load_config,
    make_classifier,
    make_embedding_client,
    make_generation_client,
    make_reranker_client,
)
from .engine import (
    VerdictKind,
    debug as run_debug,
    export_matrix_csv,
    export_matrix_json,
    validate as run_validate,
)
from .flows import ApprovalState, ProceduralFlow, flow_from_text
from .logs import dissect_capture, parse_log_file, to_canonical_json
from .metrics import score_run, validation_accuracy
from .orchestrator import Orchestrator, RunState
from .repository import load_repository
from .retrieval import VectorIndex, build_index, chunk_document

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_PARTIAL = 2
EXIT_ERROR = 3

_VERDICT_EXIT = {
    VerdictKind.PASS: EXIT_PASS,
    VerdictKind.FAIL: EXIT_FAIL,
    VerdictKind.PARTIAL_PASS: EXIT_PARTIAL,
}


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit code 2; we reserve 2 for verdicts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_ERROR)


def _load_cfg(path: str | None) -> AppConfig:
    return load_config(path) if path else AppConfig()


def _load_flow(path: Path) -> ProceduralFlow:
    """Load a flow from JSON (with approval state) or numbered plain text.

    Plain-text flows are treated as approved by the invoking operator; the
    orchestrated `run` command is the path with the full approval gate.
    """
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return ProceduralFlow.from_dict(json.loads(text))
    flow = flow_from_text(text, approval=ApprovalState.APPROVED)
    return flow


def _cmd_index_build(args) -> int:
    cfg = _load_cfg(args.config)
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        print(f"error: corpus directory not found: {corpus}", file=sys.stderr)
        return EXIT_ERROR
    chunks = []
    for doc in sorted(list(corpus.glob("*.txt")) + list(corpus.glob("*.md"))):
        chunks.extend(
            chunk_document(
                doc.name, doc.read_text(encoding="utf-8"),
                cfg.chunk_words, cfg.overlap_words,
            )
        )
    if not chunks:
        print("error: corpus produced no chunks", file=sys.stderr)
        return EXIT_ERROR
    client = make_embedding_client(cfg)
    index = build_index(chunks, client, retry=cfg.retry)
    out = Path(args.out or cfg.index_path)
    index.save(out)
    print(f"indexed {len(chunks)} chunks from {corpus} -> {out} (dimension {index.dimension})")
    return EXIT_PASS


def _cmd_ingest(args) -> int:
    cfg = _load_cfg(args.config)
    src = Path(args.source)
    filt = set(args.filter.split(",")) if args.filter else None
    if src.suffix.lower() in (".pcap", ".pcapng", ".cap"):
        if cfg.dissector is None:
            print("error: capture input requires a dissector config", file=sys.stderr)
            return EXIT_ERROR
        sequence = dissect_capture(src, cfg.dissector, filt)
    else:
        sequence = parse_log_file(src.read_bytes(), filt, origin=str(src))
    out_text = to_canonical_json(sequence)
    if args.out:
        Path(args.out).write_text(out_text, encoding="utf-8")
        print(f"wrote {len(sequence)} records to {args.out}")
    else:
        print(out_text, end="")
    return EXIT_PASS


def _make_orchestrator(cfg: AppConfig, runs_dir: str | None) -> Orchestrator:
    repository = load_repository(cfg.repository_dir)
    index_path = Path(cfg.index_path)
    index = VectorIndex.load(index_path) if index_path.exists() else None
    return Orchestrator(
        cfg,
        repository,
        index=index,
        embedding_client=make_embedding_client(cfg),
        reranker_client=make_reranker_client(cfg),
        generation_client=make_generation_client(cfg),
        classifier=make_classifier(cfg),
        runs_dir=runs_dir,
    )


def _cmd_run(args) -> int:
    cfg = _load_cfg(args.config)
    orc = _make_orchestrator(cfg, args.runs_dir)
    record = orc.create_run(
        args.tc_id, Path(args.log), run_id=args.run_id, auto_approve=args.auto_approve
    )
    print(f"run {record.run_id}: state {record.state.value}")
    if record.state is RunState.AWAITING_APPROVAL:
        print("run is parked awaiting operator approval; "
              "use the dashboard or API to review the generated flow")
        return EXIT_PASS
    if record.state is RunState.ABORTED:
        print(f"aborted: {record.abort_cause}", file=sys.stderr)
        return EXIT_ERROR
    assert record.val_verdict is not None
    print(f"validation verdict: {record.val_verdict.kind.value}")
    if record.debug_verdict is not None:
        print(f"debug verdict: {record.debug_verdict.kind.value}")
        print(f"inference: {record.debug_verdict.inference}")
        return _VERDICT_EXIT[record.debug_verdict.kind]
    return _VERDICT_EXIT[record.val_verdict.kind]


def _cmd_validate(args) -> int:
    cfg = _load_cfg(args.config)
    flow = _load_flow(Path(args.flow))
    logs = parse_log_file(Path(args.log).read_bytes(), origin=args.log)
    classifier = make_classifier(cfg)
    verdict = run_validate(flow, logs, classifier)
    print(f"verdict: {verdict.kind.value}")
    print(f"matched: {list(verdict.matched_assignment)}")
    if verdict.inference:
        print(f"inference: {verdict.inference}")
    return _VERDICT_EXIT[verdict.kind]


def _cmd_debug(args) -> int:
    cfg = _load_cfg(args.config)
    flow = _load_flow(Path(args.flow))
    logs = parse_log_file(Path(args.log).read_bytes(), origin=args.log)
    classifier = make_classifier(cfg)
    matrix, verdict = run_debug(
        flow, logs, classifier,
        strict_chronology=cfg.strict_debug_chronology,
        max_workers=cfg.debug_workers,
    )
    print(f"verdict: {verdict.kind.value}")
    print(f"inference: {verdict.inference}")
    if args.matrix_out:
        out = Path(args.matrix_out)
        if out.suffix == ".csv":
            out.write_text(export_matrix_csv(matrix), encoding="utf-8")
        else:
            out.write_text(
                json.dumps(export_matrix_json(matrix), indent=2) + "\n", encoding="utf-8"
            )
        print(f"matrix written to {out}")
    return _VERDICT_EXIT[verdict.kind]


def _cmd_score(args) -> int:
    truth = yaml.safe_load(Path(args.ground_truth).read_text(encoding="utf-8"))
    predictions_raw = yaml.safe_load(Path(args.predictions).read_text(encoding="utf-8"))
    predicted = {}
    for case_id, entry in predictions_raw.items():
        val = VerdictKind(str(entry["val"]).lower())
        dbg = VerdictKind(str(entry["debug"]).lower()) if entry.get("debug") else None
        predicted[case_id] = (val, dbg)
    cm = score_run(truth, predicted)
    accuracy = validation_accuracy(cm)
    print(f"tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")
    print(f"validation accuracy: {accuracy}")
    return EXIT_PASS


def _cmd_report(args) -> int:
    cfg = _load_cfg(args.config)
    orc = _make_orchestrator(cfg, args.runs_dir)
    report = orc.get_report(args.run_id)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_PASS


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway import create_app

    cfg = _load_cfg(args.config)
    orc = _make_orchestrator(cfg, args.runs_dir)
    app = create_app(orc)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orantest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="specification index operations")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p_build = index_sub.add_parser("build", help="chunk, embed and index a corpus directory")
    p_build.add_argument("corpus")
    p_build.add_argument("--out", default=None)
    p_build.add_argument("--config", default=None)
    p_build.set_defaults(func=_cmd_index_build)

    p_ingest = sub.add_parser("ingest", help="normalize a capture or log file")
    p_ingest.add_argument("source")
    p_ingest.add_argument("--filter", default=None, help="comma-separated protocols to retain")
    p_ingest.add_argument("--out", default=None)
    p_ingest.add_argument("--config", default=None)
    p_ingest.set_defaults(func=_cmd_ingest)

    p_run = sub.add_parser("run", help="execute a test case end to end")
    p_run.add_argument("tc_id")
    p_run.add_argument("--log", required=True)
    p_run.add_argument("--auto-approve", action="store_true",
                       help="bypass the human approval gate (CI only)")
    p_run.add_argument("--run-id", default=None)
    p_run.add_argument("--runs-dir", default=None)
    p_run.add_argument("--config", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_validate = sub.add_parser("validate", help="greedy chronological validation")
    p_validate.add_argument("flow")
    p_validate.add_argument("log")
    p_validate.add_argument("--config", default=None)
    p_validate.set_defaults(func=_cmd_validate)

    p_debug = sub.add_parser("debug", help="exhaustive step-by-log matrix analysis")
    p_debug.add_argument("flow")
    p_debug.add_argument("log")
    p_debug.add_argument("--matrix-out", default=None)
    p_debug.add_argument("--config", default=None)
    p_debug.set_defaults(func=_cmd_debug)

    p_score = sub.add_parser("score", help="confusion matrix over a campaign")
    p_score.add_argument("ground_truth")
    p_score.add_argument("predictions")
    p_score.set_defaults(func=_cmd_score)

    p_report = sub.add_parser("report", help="print a completed run's report")
    p_report.add_argument("run_id")
    p_report.add_argument("--runs-dir", default=None)
    p_report.add_argument("--config", default=None)
    p_report.set_defaults(func=_cmd_report)

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--runs-dir", default=None)
    p_serve.add_argument("--config", default=None)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
