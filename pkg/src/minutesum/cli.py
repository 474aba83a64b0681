"""Command line entry point: ``minutesum <stage> [options]``.

Stages: ingest, embed, build-triplets, train, eval-embed, summarize, rouge,
and pipeline (all stages in order). Options given on the command line
override the JSON config passed with ``--config``.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import summarizer, triplets
from .config import PipelineConfig
from .embedding import NgramEmbedder, PrecomputedEmbedder, save_vectors
from .errors import ConfigError, DataError, NumericError
from .metrics import eval_diff, rouge1_recall
from .trainer import AdapterModel, train

log = logging.getLogger("minutesum")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_noise(value: str | None) -> list[str] | None:
    if value is None:
        return None
    if os.path.isfile(value):
        with open(value, encoding="utf-8") as fh:
            return [line.rstrip("\n") for line in fh if line.strip()]
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        return [v for v in value.split(",") if v]
    if not isinstance(parsed, list):
        raise ConfigError("--noise must be a file, a JSON array, or a comma-separated list")
    return [str(v) for v in parsed]


def base_backend(cfg: PipelineConfig):
    emb = cfg.data["embedding"]
    if emb["backend"] == "file":
        return PrecomputedEmbedder.load(cfg.path("vectors"))
    return NgramEmbedder(dim=emb["dim"])


def load_model(cfg: PipelineConfig, base, model_path) -> AdapterModel:
    model = AdapterModel.load(model_path)
    if model.backend_name and model.backend_name != base.name:
        raise ConfigError(f"model was trained on backend {model.backend_name!r}, configured backend is {base.name!r}")
    return model


def _corpus(cfg: PipelineConfig):
    return corpus_mod.load_corpus(cfg.path("corpus"), cfg.noise)


# -- stages -----------------------------------------------------------------


def run_ingest(cfg: PipelineConfig) -> dict:
    corpus = corpus_mod.load_corpus(cfg.path("minutes"), cfg.noise)
    out = cfg.path("corpus")
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus.dump(out, meta=cfg.meta("ingest"))
    return {"utterances": len(corpus), "sessions": len(corpus.sessions()), "out": str(out)}


def run_embed(cfg: PipelineConfig, kind: str | None = None, model_path=None) -> dict:
    corpus = _corpus(cfg)
    backend = base_backend(cfg)
    if kind == "adapted":
        if model_path is None:
            model_path = cfg.path("model")
        backend = load_model(cfg, backend, model_path).embedder(backend)
    out = cfg.path("vectors_out")
    out.parent.mkdir(parents=True, exist_ok=True)
    items, failed = [], []
    for u in corpus:
        try:
            items.append((u.id, backend.embed(u.text, u.id)))
        except DataError:
            failed.append(u.id)
    save_vectors(out, items)
    return {"backend": backend.name, "dim": backend.dim, "embedded": len(items), "failed": failed, "out": str(out)}


def run_build_triplets(cfg: PipelineConfig) -> dict:
    corpus = _corpus(cfg)
    backend = base_backend(cfg)
    tcfg = cfg.data["triplets"]
    built, report = triplets.build_triplets(
        corpus,
        backend,
        pos_threshold=tcfg["pos_threshold"],
        neg_threshold=tcfg["neg_threshold"],
        seed=cfg.seed,
        max_attempts=tcfg["max_attempts"],
    )
    out = cfg.path("triplets")
    out.parent.mkdir(parents=True, exist_ok=True)
    meta = cfg.meta("build-triplets")
    triplets.write_triplets(out, built, meta=meta)
    report_dict = {**report.to_dict(), **meta}
    _write_json(cfg.path("build_report"), report_dict)
    return report_dict


def _split(cfg: PipelineConfig, corpus):
    ts = triplets.read_triplets(cfg.path("triplets"), corpus)
    if not ts:
        raise DataError("triplet file is empty")
    return triplets.split_triplets(ts, cfg.seed)


def run_train(cfg: PipelineConfig) -> dict:
    corpus = _corpus(cfg)
    backend = base_backend(cfg)
    split = _split(cfg, corpus)
    model = train(split, backend, cfg.train_config())
    model.config = {**model.config, **cfg.meta("train")}
    out = cfg.path("model")
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    return {"sizes": list(split.sizes), "history": model.history, "out": str(out)}


def run_eval_embed(cfg: PipelineConfig, model_path=None, which: str = "all", strict: bool = False) -> dict:
    corpus = _corpus(cfg)
    backend = base_backend(cfg)
    ts = triplets.read_triplets(cfg.path("triplets"), corpus)
    if which != "all":
        ts = getattr(triplets.split_triplets(ts, cfg.seed), which)
    if not ts:
        raise DataError(f"no triplets in split {which!r}")
    result = {**cfg.meta("eval-embed"), "split": which, "baseline": eval_diff(None, backend, ts, strict).to_dict()}
    if model_path is not None:
        model = load_model(cfg, backend, model_path)
        result["model"] = eval_diff(model, backend, ts, strict).to_dict()
    out = cfg.path("diff_report", required=False)
    if out is not None:
        _write_json(out, result)
    return result


def run_summarize(cfg: PipelineConfig, model_path=None) -> dict:
    corpus = _corpus(cfg)
    tasks = corpus_mod.load_tasks(cfg.path("tasks"))
    backend = base_backend(cfg)
    if model_path is not None:
        backend = load_model(cfg, backend, model_path).embedder(backend)
    mmr = cfg.mmr_config()
    outputs = [summarizer.summarize_task(corpus, task, backend, mmr) for task in tasks]
    out = cfg.path("summaries")
    out.parent.mkdir(parents=True, exist_ok=True)
    summarizer.write_summaries(out, outputs, meta=cfg.meta("summarize"))
    flagged = [o.task_id for o in outputs if o.flags]
    return {"tasks": len(outputs), "flagged": flagged, "out": str(out)}


def run_rouge(cfg: PipelineConfig, candidates=None, references=None) -> dict:
    cands = summarizer.read_summaries(candidates or cfg.path("summaries"))
    refs = {t.id: t for t in corpus_mod.load_tasks(references or cfg.path("tasks"))}
    unit = cfg.data["rouge_unit"]
    pairs = []
    for rec in cands:
        task = refs.get(rec["task_id"])
        if task is None:
            continue
        for role in corpus_mod.ROLES:
            ref = task.reference(role)
            if ref is None:
                continue
            rep = rouge1_recall(rec[f"{role}_summary"], ref, unit, cfg.noise)
            pairs.append(
                {
                    "task_id": task.id,
                    "role": role,
                    "recall": rep.recall,
                    "overlap": rep.overlap_count,
                    "reference_count": rep.reference_count,
                }
            )
    mean = sum(p["recall"] for p in pairs) / len(pairs) if pairs else None
    result = {**cfg.meta("rouge"), "unit": unit, "pairs": pairs, "mean_recall": mean}
    out = cfg.path("rouge_report", required=False)
    if out is not None:
        _write_json(out, result)
    return result


def run_pipeline(cfg: PipelineConfig) -> dict:
    steps = {}
    steps["ingest"] = run_ingest(cfg)
    steps["build-triplets"] = run_build_triplets(cfg)
    steps["train"] = run_train(cfg)
    held_out = _split(cfg, _corpus(cfg)).test
    steps["eval-embed"] = run_eval_embed(cfg, cfg.path("model"), which="test" if held_out else "all")
    steps["summarize"] = run_summarize(cfg, cfg.path("model"))
    steps["rouge"] = run_rouge(cfg)
    return steps


# -- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", help="directory for artifacts without an explicit path")
    common.add_argument("--corpus", help="cleaned corpus (JSON Lines)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="minutesum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="clean and index raw minutes")
    p.add_argument("--minutes")
    p.add_argument("--noise", help="file with one literal per line, JSON array, or comma-separated")
    p.add_argument("--out")

    p = sub.add_parser("embed", parents=[common], help="write corpus embeddings")
    p.add_argument("--backend", choices=("ngram", "file", "adapted"))
    p.add_argument("--dim", type=int)
    p.add_argument("--vectors", help="precomputed vectors for --backend file")
    p.add_argument("--model")
    p.add_argument("--out")

    p = sub.add_parser("build-triplets", parents=[common], help="build and store triplets")
    p.add_argument("--pos-th", type=float)
    p.add_argument("--neg-th", type=float)
    p.add_argument("--max-attempts", type=int)
    p.add_argument("--out")
    p.add_argument("--report")

    p = sub.add_parser("train", parents=[common], help="train the linear adapter")
    p.add_argument("--triplets")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--warmup", type=float)
    p.add_argument("--out")

    p = sub.add_parser("eval-embed", parents=[common], help="diff/accuracy report")
    p.add_argument("--triplets")
    p.add_argument("--model")
    p.add_argument("--split", choices=("all", "train", "dev", "test"), default="all")
    p.add_argument("--strict", action="store_true", help="count zero differences as wrong")
    p.add_argument("--out")

    p = sub.add_parser("summarize", parents=[common], help="MMR summaries for every task")
    p.add_argument("--tasks")
    p.add_argument("--model")
    p.add_argument("--k", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--chars-per-key", type=int)
    p.add_argument("--query-scope", choices=("pool", "meeting"))
    p.add_argument("--out")

    p = sub.add_parser("rouge", parents=[common], help="ROUGE-1 recall of summaries")
    p.add_argument("--candidates")
    p.add_argument("--references")
    p.add_argument("--unit", choices=("char", "token"))
    p.add_argument("--out")

    p = sub.add_parser("pipeline", parents=[common], help="run every stage in order")
    p.add_argument("--minutes")
    p.add_argument("--tasks")
    return parser


def _overrides(args) -> dict:
    a = vars(args)
    cmd = args.command
    paths = {"out_dir": a.get("out_dir"), "corpus": a.get("corpus")}
    over = {"seed": a.get("seed"), "paths": paths, "embedding": {"dim": a.get("dim")}}
    if cmd in ("ingest", "pipeline"):
        paths["minutes"] = a.get("minutes")
        over["noise"] = _parse_noise(a.get("noise"))
    if cmd == "ingest":
        paths["corpus"] = a.get("out") or a.get("corpus")
    if cmd == "embed":
        backend = a.get("backend")
        if backend in ("ngram", "file"):
            over["embedding"]["backend"] = backend
        paths["vectors"] = a.get("vectors")
        paths["vectors_out"] = a.get("out")
    if cmd == "build-triplets":
        over["triplets"] = {
            "pos_threshold": a.get("pos_th"),
            "neg_threshold": a.get("neg_th"),
            "max_attempts": a.get("max_attempts"),
        }
        paths["triplets"] = a.get("out")
        paths["build_report"] = a.get("report")
    if cmd in ("train", "eval-embed"):
        paths["triplets"] = a.get("triplets")
    if cmd == "train":
        over["train"] = {
            "epochs": a.get("epochs"),
            "batch_size": a.get("batch"),
            "learning_rate": a.get("lr"),
            "margin": a.get("margin"),
            "warmup_fraction": a.get("warmup"),
        }
        paths["model"] = a.get("out")
    if cmd == "eval-embed":
        paths["diff_report"] = a.get("out")
    if cmd in ("summarize", "pipeline"):
        paths["tasks"] = a.get("tasks")
    if cmd == "summarize":
        over["mmr"] = {
            "k": a.get("k"),
            "m": a.get("m"),
            "s": a.get("s"),
            "lam": a.get("lam"),
            "chars_per_key": a.get("chars_per_key"),
            "query_scope": a.get("query_scope"),
        }
        paths["summaries"] = a.get("out")
    if cmd == "rouge":
        over["rouge_unit"] = a.get("unit")
        paths["rouge_report"] = a.get("out")
    return over


def run(args) -> dict:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig.from_dict()
    cfg = cfg.override(_overrides(args))
    cmd = args.command
    if cmd == "ingest":
        return run_ingest(cfg)
    if cmd == "embed":
        return run_embed(cfg, args.backend, args.model)
    if cmd == "build-triplets":
        return run_build_triplets(cfg)
    if cmd == "train":
        return run_train(cfg)
    if cmd == "eval-embed":
        return run_eval_embed(cfg, args.model, args.split, args.strict)
    if cmd == "summarize":
        return run_summarize(cfg, args.model)
    if cmd == "rouge":
        return run_rouge(cfg, args.candidates, args.references)
    if cmd == "pipeline":
        return run_pipeline(cfg)
    raise ConfigError(f"unknown command {cmd!r}")


def _brief(obj):
    if isinstance(obj, dict):
        return {k: _brief(v) for k, v in obj.items() if k != "per_triplet_diff"}
    return obj


def _fail(stage: str, kind: str, exc: Exception, code: int) -> int:
    print(json.dumps({"error": kind, "stage": stage, "message": str(exc)}, ensure_ascii=False), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        result = run(args)
    except ConfigError as exc:
        return _fail(args.command, "config", exc, EXIT_CONFIG)
    except NumericError as exc:
        return _fail(args.command, "numeric", exc, EXIT_NUMERIC)
    except (DataError, OSError) as exc:
        return _fail(args.command, "data", exc, EXIT_DATA)
    print(json.dumps(_brief(result), ensure_ascii=False, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
