"""Command line: serve the HTTP service, generate and replay corpora,
run simulated labelers, and render stats reports.

Every command exits 0 on success; failures print a JSON error object to
stderr and exit nonzero.
"""

import argparse
import json
import sys
from pathlib import Path

import httpx

from .config import ServiceConfig, load_config
from .errors import TriageError, ValidationError
from .harness import (
    HttpClient,
    ReplayPlan,
    SyntheticSpec,
    auto_label,
    default_health_spec,
    generate_synthetic,
    replay,
    truth_map,
)
from .service import TriageService


def _fail(exc: Exception, code: int = 1) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)
    return code


def _split_push_endpoint(endpoint: str) -> tuple[str, str]:
    """Split a full push link into (base_url, endpoint_path)."""
    marker = "/push/"
    if marker not in endpoint:
        raise ValidationError(
            "endpoint must be the collection push link, e.g. "
            "http://host:port/push/<token>"
        )
    base, _, path = endpoint.partition(marker)
    if not path:
        raise ValidationError("push link is missing the collection token")
    return base, path


def cmd_serve(args) -> int:
    import uvicorn

    from .httpapi import create_app

    config = load_config(args.config) if args.config else load_config()
    if args.data_dir:
        config.data_dir = args.data_dir
    if args.host:
        config.listen_host = args.host
    if args.port:
        config.listen_port = args.port
    service = TriageService.open(config)
    try:
        uvicorn.run(
            create_app(service),
            host=config.listen_host,
            port=config.listen_port,
            log_level="info",
        )
    finally:
        service.close()
    return 0


def cmd_synth(args) -> int:
    if args.spec:
        spec = SyntheticSpec.from_dict(
            json.loads(Path(args.spec).read_text(encoding="utf-8"))
        )
        if args.messages:
            spec.messages = args.messages
        if args.seed is not None:
            spec.seed = args.seed
    else:
        spec = default_health_spec(
            messages=args.messages or 8000,
            seed=args.seed or 0,
            char_limit=args.char_limit,
        )
    count = generate_synthetic(spec, args.out)
    print(json.dumps({"written": count, "out": str(args.out)}))
    return 0


def cmd_replay(args) -> int:
    base, path = _split_push_endpoint(args.endpoint)
    plan = ReplayPlan(
        source_file=args.file,
        endpoint_path=path,
        rate="max" if args.rate == "max" else float(args.rate),
        shuffle_seed=args.seed,
        limit=args.limit,
    )
    client = HttpClient(base)
    try:
        report = replay(plan, client)
    finally:
        client.close()
    print(json.dumps(report.to_dict()))
    return 0


def cmd_autolabel(args) -> int:
    truth = truth_map(args.corpus) if args.corpus else {}
    client = HttpClient(args.endpoint)
    try:
        report = auto_label(
            client,
            args.schema,
            truth,
            labeler_count=args.labelers,
            accuracy=args.accuracy,
            seed=args.seed,
            max_labels=args.max_labels,
        )
    finally:
        client.close()
    print(json.dumps(report.to_dict()))
    return 0


def cmd_stats(args) -> int:
    from .report import write_stats_report

    if args.endpoint:
        http = httpx.Client(base_url=args.endpoint.rstrip("/"), timeout=30)
        try:
            schema_id = args.schema
            if schema_id is None:
                classifiers = http.get(
                    f"/collections/{args.collection}/classifiers"
                ).json()
                if not classifiers:
                    raise ValidationError("collection has no classifiers")
                schema_id = classifiers[0]["id"]
            stats = http.get(f"/stats/{args.collection}/{schema_id}").json()
            metrics = http.get(f"/classifiers/{schema_id}/metrics").json()
        finally:
            http.close()
    elif args.data_dir:
        service = TriageService.open(
            ServiceConfig(data_dir=args.data_dir, mode="sync")
        )
        try:
            schema_id = args.schema
            if schema_id is None:
                candidates = service.schemas_by_collection.get(args.collection, [])
                if not candidates:
                    raise ValidationError("collection has no classifiers")
                schema_id = candidates[0]
            stats = {
                "collectionId": args.collection,
                "schemaId": schema_id,
                "proportions": service.category_proportions(
                    args.collection, schema_id
                ),
                "classifiedTotal": len(service.classifications[schema_id]),
            }
            metrics = service.classifier_metrics(schema_id)
        finally:
            service.close()
    else:
        raise ValidationError("stats needs --endpoint or --data-dir")

    output = {"stats": stats, "metrics": metrics}
    if args.out:
        written = write_stats_report(stats, metrics, args.out)
        output["files"] = [str(p) for p in written]
    print(json.dumps(output, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smstriage",
        description="Short-message classification service and replay tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="JSON config file")
    serve.add_argument("--data-dir", help="persistence directory")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.set_defaults(func=cmd_serve)

    synth = sub.add_parser("synth", help="generate a synthetic corpus")
    synth.add_argument("--spec", help="JSON spec file (default: health preset)")
    synth.add_argument("--out", required=True, help="output corpus.jsonl")
    synth.add_argument("--messages", type=int)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--char-limit", type=int, default=140)
    synth.set_defaults(func=cmd_synth)

    rep = sub.add_parser("replay", help="push a corpus file to a collection")
    rep.add_argument("--file", required=True)
    rep.add_argument("--endpoint", required=True,
                     help="full push link: http://host:port/push/<token>")
    rep.add_argument("--rate", default="max",
                     help="messages per second, or 'max'")
    rep.add_argument("--seed", type=int, help="shuffle seed")
    rep.add_argument("--limit", type=int)
    rep.set_defaults(func=cmd_replay)

    auto = sub.add_parser("autolabel", help="run simulated labelers")
    auto.add_argument("--endpoint", required=True, help="service base URL")
    auto.add_argument("--schema", required=True, help="classifier id")
    auto.add_argument("--corpus", help="corpus.jsonl with trueCategory")
    auto.add_argument("--labelers", type=int, default=3)
    auto.add_argument("--accuracy", type=float, default=0.9)
    auto.add_argument("--seed", type=int, default=0)
    auto.add_argument("--max-labels", type=int)
    auto.set_defaults(func=cmd_autolabel)

    stats = sub.add_parser("stats", help="fetch stats; render CSV + figures")
    stats.add_argument("--collection", required=True)
    stats.add_argument("--schema")
    stats.add_argument("--endpoint", help="service base URL")
    stats.add_argument("--data-dir", help="read a local data directory instead")
    stats.add_argument("--out", help="directory for proportions.csv/.png, auc.png")
    stats.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TriageError as exc:
        return _fail(exc)
    except (OSError, json.JSONDecodeError, httpx.HTTPError) as exc:
        return _fail(exc, code=2)


if __name__ == "__main__":
    sys.exit(main())
