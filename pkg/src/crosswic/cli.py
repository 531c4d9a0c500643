"""Command-line client for the crosswic service.

Every subcommand talks to the HTTP API: by default the FastAPI app is
mounted in-process (no daemon needed); pass --server to target a running
instance instead. Flags mirror the experiment config; --config loads the
same fields from a JSON file, with explicit flags taking precedence.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

import argparse
import json
import sys

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _request(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    # no server given: mount the ASGI app in this process
    import asyncio

    from .service.app import app  # deferred: keeps --help fast

    async def call() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, timeout=None,
                                     base_url="http://crosswic.local") as client:
            return await client.post(path, json=payload)

    return asyncio.run(call())


def _post(args, path: str, payload: dict) -> tuple[int, dict | None]:
    response = _request(args.server, path, payload)
    if response.status_code == 200:
        return EXIT_OK, response.json()
    if response.status_code == 422:
        return _fail(f"invalid request: {response.text}", EXIT_CONFIG), None
    try:
        body = response.json()
    except ValueError:
        body = {}
    kind = body.get("error_kind", "internal")
    detail = body.get("detail", response.text)
    code = EXIT_CONFIG if kind == "config" else EXIT_DATA if kind == "data" else 1
    return _fail(detail, code), None


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
    except FileNotFoundError:
        raise SystemExit(_fail(f"config file not found: {path}", EXIT_CONFIG))
    except json.JSONDecodeError as exc:
        raise SystemExit(_fail(f"config file {path}: {exc}", EXIT_CONFIG))
    if not isinstance(loaded, dict):
        raise SystemExit(_fail(f"config file {path} must hold a JSON object",
                               EXIT_CONFIG))
    return loaded


def _encoder_payload(args, base: dict) -> dict:
    encoder = dict(base.get("encoder", {}))
    if args.store:
        encoder.update({"kind": "store", "store_path": args.store})
    for flag, key in (("vocab", "vocab_path"), ("layers", "layers"),
                      ("heads", "heads"), ("hidden", "hidden"), ("ffn", "ffn"),
                      ("max_len", "max_len"), ("dropout", "dropout"),
                      ("init_std", "init_std")):
        value = getattr(args, flag, None)
        if value is not None:
            encoder[key] = value
    encoder.setdefault("kind", "toy")
    return encoder


def _regime_payload(args, base: dict) -> dict | None:
    regime = dict(base.get("regime") or {})
    for flag, key in (("epochs", "max_iters"), ("batch_size", "batch_size"),
                      ("lr", "learning_rate"), ("optimizer", "optimizer"),
                      ("weight_decay", "weight_decay"),
                      ("iteration_unit", "iteration_unit")):
        value = getattr(args, flag, None)
        if value is not None:
            regime[key] = value
    if not regime:
        return None
    if "seed" not in regime and args.seed is not None:
        regime["seed"] = args.seed
    return regime


def _experiment_payload(args, strategy: str) -> dict:
    base = _load_config_file(args.config)
    payload = dict(base)
    payload.pop("encoder", None)
    payload.pop("regime", None)
    payload["strategy"] = strategy
    payload["encoder"] = _encoder_payload(args, base)
    regime = _regime_payload(args, base)
    if regime:
        payload["regime"] = regime
    for flag, key in (("data_dir", "data_dir"), ("out_dir", "out_dir"),
                      ("train_pair", "train_pair"), ("dev_subset", "dev_subset"),
                      ("conllu_dir", "conllu_dir"), ("seed", "seed"),
                      ("label", "system_label"), ("checkpoint", "checkpoint_path"),
                      ("features_dir", "features_dir")):
        value = getattr(args, flag, None)
        if value is not None:
            payload[key] = value
    if getattr(args, "eval_pairs", None):
        payload["eval_pairs"] = [p.strip() for p in args.eval_pairs.split(",") if p.strip()]
    if getattr(args, "pooling", None):
        payload["pooling"] = args.pooling
    if getattr(args, "dependent_combine", None):
        payload["dependent_combine"] = args.dependent_combine
    if getattr(args, "joint_features", False):
        payload["joint_features"] = True
    return payload


def _print_result(body: dict) -> None:
    print(f"system: {body['system']}")
    for entry in body.get("metrics", []):
        dev = entry.get("dev_accuracy")
        dev_text = "" if dev is None else f"  dev_acc={dev:.4f}"
        print(f"  epoch {entry['epoch']}: train_loss={entry['train_loss']:.4f}{dev_text}")
    for row in body.get("rows", []):
        print(f"  {row['lang_pair']}: {row['correct']}/{row['n']} = "
              f"{100.0 * row['accuracy']:.1f}%")
    for pair, reason in body.get("skipped", {}).items():
        print(f"  {pair}: skipped ({reason})")
    if body.get("results_path"):
        print(f"results: {body['results_path']}")
    if body.get("report_text"):
        print(body["report_text"], end="")


def cmd_train_finetune(args) -> int:
    code, body = _post(args, "/experiments/finetune",
                       _experiment_payload(args, "finetune"))
    if body:
        _print_result(body)
    return code


def cmd_train_feature(args) -> int:
    payload = _experiment_payload(args, args.strategy)
    code, body = _post(args, "/experiments/feature", payload)
    if body:
        _print_result(body)
    return code


def cmd_extract_features(args) -> int:
    base = _load_config_file(args.config)
    payload = {
        "variant": args.variant,
        "encoder": _encoder_payload(args, base),
        "data_dir": args.data_dir or base.get("data_dir"),
        "out_dir": args.out_dir or base.get("out_dir"),
        "seed": args.seed if args.seed is not None else base.get("seed", 0),
    }
    if args.eval_pairs:
        payload["eval_pairs"] = [p.strip() for p in args.eval_pairs.split(",")]
    if args.splits:
        payload["splits"] = [s.strip() for s in args.splits.split(",")]
    for flag, key in (("train_pair", "train_pair"), ("conllu_dir", "conllu_dir"),
                      ("dev_subset", "dev_subset"), ("pooling", "pooling"),
                      ("dependent_combine", "dependent_combine")):
        value = getattr(args, flag, None)
        if value is not None:
            payload[key] = value
    code, body = _post(args, "/features/extract", payload)
    if body:
        for path in body["written"]:
            print(path)
    return code


def cmd_evaluate(args) -> int:
    payload = {"predictions_path": args.predictions}
    if args.out:
        payload["out_path"] = args.out
    code, body = _post(args, "/evaluate", payload)
    if body:
        for row in body["rows"]:
            print(f"{row['system']}\t{row['lang_pair']}\t{row['correct']}/{row['n']}\t"
                  f"{100.0 * row['accuracy']:.1f}%")
    return code


def cmd_report(args) -> int:
    payload = {
        "results_paths": args.results,
        "include_joint": args.include_joint,
    }
    if args.pairs:
        payload["pairs"] = [p.strip() for p in args.pairs.split(",")]
    if args.out_text:
        payload["out_text"] = args.out_text
    if args.out_csv:
        payload["out_csv"] = args.out_csv
    code, body = _post(args, "/report", payload)
    if body:
        print(body["text"], end="")
    return code


def cmd_validate_conllu(args) -> int:
    payload = {
        "pairs_path": args.pairs,
        "conllu_path": args.conllu,
        "require_languages": [p.strip() for p in args.require_languages.split(",")]
        if args.require_languages else [],
    }
    code, body = _post(args, "/conllu/validate", payload)
    if body is None:
        return code
    print(f"sentences: {body['sentences']}")
    print(f"sides covered: {body['sides_covered']}")
    if body["sides_missing"]:
        print(f"sides missing: {len(body['sides_missing'])}")
    for error in body["errors"]:
        print(f"error: {error}", file=sys.stderr)
    return EXIT_DATA if body["errors"] else EXIT_OK


def cmd_synth(args) -> int:
    payload = {
        "out_dir": args.out_dir,
        "n_train": args.n_train,
        "n_test": args.n_test,
        "seed": args.seed or 0,
        "with_conllu": args.with_conllu,
    }
    code, body = _post(args, "/synth", payload)
    if body:
        for name, path in sorted(body["paths"].items()):
            print(f"{name}: {path}")
    return code


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", help="base URL of a running service "
                        "(default: run in-process)")
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, default=None)


def _add_encoder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--vocab", help="vocabulary file for the toy encoder")
    parser.add_argument("--store", help="precomputed hidden-state store path")
    parser.add_argument("--layers", type=int, default=None)
    parser.add_argument("--heads", type=int, default=None)
    parser.add_argument("--hidden", type=int, default=None)
    parser.add_argument("--ffn", type=int, default=None)
    parser.add_argument("--max-len", dest="max_len", type=int, default=None)
    parser.add_argument("--dropout", type=float, default=None)
    parser.add_argument("--init-std", dest="init_std", type=float, default=None)


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data-dir", dest="data_dir")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--eval-pairs", dest="eval_pairs",
                        help="comma-separated language pairs, e.g. en-en,fr-fr")
    parser.add_argument("--train-pair", dest="train_pair", default=None)
    parser.add_argument("--dev-subset", dest="dev_subset", type=int, default=None)
    parser.add_argument("--conllu-dir", dest="conllu_dir", default=None)
    parser.add_argument("--pooling", choices=("average", "sum"), default=None)
    parser.add_argument("--dependent-combine", dest="dependent_combine",
                        choices=("sum", "average"), default=None)
    parser.add_argument("--label", help="system label override")


def _add_regime_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epochs", type=int, default=None,
                        help="training iterations (epochs by default)")
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--optimizer", choices=("sgd", "adam", "adamw"), default=None)
    parser.add_argument("--weight-decay", dest="weight_decay", type=float, default=None)
    parser.add_argument("--iteration-unit", dest="iteration_unit",
                        choices=("epochs", "steps"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosswic",
        description="Multilingual word-in-context disambiguation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-finetune", help="fine-tune the toy encoder + span head")
    _add_common(p)
    _add_encoder_flags(p)
    _add_data_flags(p)
    _add_regime_flags(p)
    p.add_argument("--checkpoint", help="write model checkpoint here")
    p.set_defaults(func=cmd_train_finetune, store=None)

    p = sub.add_parser("train-feature", help="frozen-feature classifier experiment")
    _add_common(p)
    _add_encoder_flags(p)
    _add_data_flags(p)
    _add_regime_flags(p)
    p.add_argument("--strategy", required=True,
                   choices=("feature_lr", "feature_mlp",
                            "feature_syntax_lr", "feature_syntax_mlp"))
    p.add_argument("--joint-features", dest="joint_features", action="store_true")
    p.add_argument("--features-dir", dest="features_dir",
                   help="train from cached feature files instead of encoding")
    p.set_defaults(func=cmd_train_feature, checkpoint=None)

    p = sub.add_parser("extract-features", help="write feature cache files")
    _add_common(p)
    _add_encoder_flags(p)
    _add_data_flags(p)
    p.add_argument("--variant", choices=("target_concat", "syntax"),
                   default="target_concat")
    p.add_argument("--splits", help="comma-separated: train,dev,test")
    p.set_defaults(func=cmd_extract_features)

    p = sub.add_parser("evaluate", help="recompute accuracies from predictions")
    _add_common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help="write a results CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="aggregate results files into a grid")
    _add_common(p)
    p.add_argument("--results", action="append", required=True,
                   help="results.csv path (repeatable)")
    p.add_argument("--pairs", help="comma-separated column order")
    p.add_argument("--include-joint", dest="include_joint", action="store_true",
                   help="include joint-encoding variants in the grid")
    p.add_argument("--out-text", dest="out_text")
    p.add_argument("--out-csv", dest="out_csv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate-conllu",
                       help="check annotations against a pair file")
    _add_common(p)
    p.add_argument("--pairs", required=True)
    p.add_argument("--conllu", required=True)
    p.add_argument("--require-languages", dest="require_languages",
                   help="languages whose sides must all be annotated")
    p.set_defaults(func=cmd_validate_conllu)

    p = sub.add_parser("synth", help="generate the synthetic marker corpus")
    _add_common(p)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--n-train", dest="n_train", type=int, default=200)
    p.add_argument("--n-test", dest="n_test", type=int, default=100)
    p.add_argument("--with-conllu", dest="with_conllu", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8570)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    except httpx.HTTPError as exc:
        return _fail(f"cannot reach service: {exc}", EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
