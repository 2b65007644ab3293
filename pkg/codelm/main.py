from __future__ import annotations

import argparse
import functools
import sys
from pathlib import Path
from typing import Sequence

from ._loguru import configure_logging, logger
from .config import TrainConfig, load_train_config, settings
from .container import ModelBundle, load_model, save_model
from .corpus import corpus_stats, scan_corpus, split_folds, split_folds_per_project, write_manifest
from .errors import CodeLMError, ConfigError
from .evaluator import DEFAULT_KS, compare_report, evaluate, export_reports
from .formatting import format_generation, format_suggestions, format_vocab_stats
from .model import init_params
from .pipeline import build_examples, prepare_corpus, token_lines
from .lexer import lex
from .repl import run_repl
from .sampler import external_compiler_hook, sample_source
from .suggest import generate, suggest
from .trainer import train, write_loss_history
from .vocabulary import build_vocab, save_vocab, vocab_stats


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _compiler_hook():
    return external_compiler_hook(settings.COMPILER_COMMAND) if settings.COMPILER_COMMAND else None


def _split_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", type=Path, required=True, help="Corpus root directory")
    parser.add_argument("--ext", default=settings.EXTENSION, help="Source file extension")
    parser.add_argument("--folds", type=int, default=settings.FOLD_COUNT)
    parser.add_argument("--fold", type=int, default=settings.TEST_FOLD, help="Held-out test fold")
    parser.add_argument(
        "--global-split",
        action="store_true",
        help="Shuffle all files together instead of splitting each project",
    )


def _seed(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else settings.SEED


def cmd_ingest(args: argparse.Namespace) -> int:
    files = scan_corpus(args.corpus, args.ext)
    splitter = split_folds if args.global_split else split_folds_per_project
    split = splitter(files, args.folds, _seed(args)).with_test_fold(args.fold)
    manifest = args.manifest or args.corpus / "manifest.jsonl"
    write_manifest(files, split, manifest)
    print(corpus_stats(files).to_string(index=False))
    print(f"{len(files)} files, fold sizes {split.fold_sizes()}, manifest {manifest}")
    return 0


def cmd_preprocess(args: argparse.Namespace) -> int:
    files = scan_corpus(args.corpus, args.ext)
    hook = _compiler_hook()
    written = 0
    for source in files:
        clean = sample_source(source.raw_text, source.path, compiler_hook=hook)
        if clean is None:
            continue
        source.path.with_name(source.path.name + ".clean").write_text(clean.text, encoding="utf-8")
        written += 1
    print(f"{written} of {len(files)} files normalized")
    return 0


def cmd_regularize(args: argparse.Namespace) -> int:
    mode = "raw" if args.raw else "regularized"
    paths: list[Path] = []
    for item in args.inputs:
        paths.extend(sorted(item.rglob("*.clean")) if item.is_dir() else [item])
    for path in paths:
        lines = token_lines(lex(path.read_text(encoding="utf-8")), mode)
        out = path.with_name(path.name + (".raw" if args.raw else ".reg"))
        out.write_text("".join(" ".join(line) + "\n" for line in lines), encoding="utf-8")
    print(f"{len(paths)} files written")
    return 0


def cmd_vocab(args: argparse.Namespace) -> int:
    common = dict(
        extension=args.ext,
        fold_count=args.folds,
        test_fold=args.fold,
        seed=_seed(args),
        per_project=not args.global_split,
        compiler_hook=_compiler_hook(),
    )
    raw = prepare_corpus(args.corpus, token_mode="raw", **common)
    reg = prepare_corpus(args.corpus, token_mode="regularized", **common)
    vocab = build_vocab(line for item in (raw.train if args.raw else reg.train) for line in item.lines)
    save_vocab(vocab, args.out)
    stats = vocab_stats(
        (line for item in raw.train for line in item.lines),
        (line for item in reg.train for line in item.lines),
    )
    print(format_vocab_stats(stats))
    print(f"vocabulary of {vocab.size} entries written to {args.out}")
    return 0


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return load_train_config(
        args.config,
        context_mode=args.mode,
        cell_kind=args.cell,
        token_mode=args.tokens,
        n=args.n,
        batch_size=args.batch,
        epochs=args.epochs,
        learning_rate=args.lr,
        dropout_rate=args.dropout,
        embed_dim=args.embed,
        hidden_dim=args.hidden,
        seed=args.seed,
        workers=args.workers,
        reset_per_line=True if args.reset_per_line else None,
        use_bias=False if args.no_bias else None,
    )


def cmd_train(args: argparse.Namespace) -> int:
    config = _train_config(args)
    corpus = prepare_corpus(
        args.corpus,
        extension=args.ext,
        fold_count=args.folds,
        test_fold=args.fold,
        seed=config.seed,
        per_project=not args.global_split,
        token_mode=config.token_mode,
        compiler_hook=_compiler_hook(),
    )
    vocab = build_vocab(line for item in corpus.train for line in item.lines)
    examples = build_examples(corpus.train, vocab, config)
    logger.info("Training on {count} examples, vocabulary {size}", count=len(examples), size=vocab.size)
    params = init_params(
        vocab.size, config.embed_dim, config.hidden_dim, config.cell_kind, config.seed, config.use_bias
    )
    result = train(params, examples, config)
    out = args.out or args.model or Path(settings.MODEL_PATH)
    save_model(result.params, vocab, config, out)
    history_path = Path(f"{out}.loss.txt")
    write_loss_history(result.history, history_path)
    final = f"{result.history[-1]:.4f}" if result.history else "n/a"
    print(f"model {out}, final loss {final} bits, history {history_path}")
    return 0


def _load(path: Path | None) -> ModelBundle:
    model_path = path or Path(settings.MODEL_PATH)
    if not model_path.exists():
        raise ConfigError(f"model file {model_path} not found")
    return load_model(model_path)


def cmd_evaluate(args: argparse.Namespace) -> int:
    paths = [args.model or Path(settings.MODEL_PATH)] + list(args.also or [])
    ks = tuple(args.ks) if args.ks else DEFAULT_KS
    reports = []
    for path in paths:
        bundle = _load(path)
        config = bundle.config.model_copy(update={"context_mode": args.mode or bundle.config.context_mode})
        corpus = prepare_corpus(
            args.corpus,
            extension=args.ext,
            fold_count=args.folds,
            test_fold=args.fold,
            seed=_seed(args) if args.seed is not None else config.seed,
            per_project=not args.global_split,
            token_mode=config.token_mode,
        )
        examples = build_examples(corpus.test, bundle.vocab, config)
        name = f"{config.cell_kind}-{config.token_mode}"
        reports.append(evaluate(bundle.params, examples, ks, name=name, context_mode=config.context_mode))
    print(compare_report(reports))
    export = args.export or Path(f"{paths[0]}.eval.yml")
    export_reports(reports, export)
    print(f"report written to {export}")
    return 0


def cmd_suggest(args: argparse.Namespace) -> int:
    bundle = _load(args.model)
    print(format_suggestions(suggest(bundle, args.code, args.k or settings.SUGGEST_K)))
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    bundle = _load(args.model)
    print(format_generation(generate(bundle, args.code, args.max_steps or settings.GENERATE_MAX_STEPS)))
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    bundle = _load(args.model)
    return run_repl(bundle, k=args.k or settings.SUGGEST_K, max_steps=settings.GENERATE_MAX_STEPS)


def _global_args(parser: argparse.ArgumentParser, default: object = None) -> None:
    parser.add_argument("--config", type=Path, default=default, help="key=value file with training settings")
    parser.add_argument("--seed", type=int, default=default, help="Seed for splits, initialization and shuffling")
    parser.add_argument("--model", type=Path, default=default, help="Model container path")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL if default is None else default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="codelm", description="Source-code language modeling toolkit")
    _global_args(parser)
    # repeated after the subcommand; SUPPRESS keeps a value given before it
    common = argparse.ArgumentParser(add_help=False)
    _global_args(common, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    add = functools.partial(sub.add_parser, parents=[common])

    p = add("ingest", help="Scan a corpus, split folds, write a manifest")
    _split_args(p)
    p.add_argument("--manifest", type=Path)
    p.set_defaults(func=cmd_ingest)

    p = add("preprocess", help="Write normalized .clean files next to the sources")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--ext", default=settings.EXTENSION)
    p.set_defaults(func=cmd_preprocess)

    p = add("regularize", help="Encode .clean files into token streams")
    p.add_argument("inputs", type=Path, nargs="+")
    p.add_argument("--raw", action="store_true", help="Write lowercased lexemes instead")
    p.set_defaults(func=cmd_regularize)

    p = add("vocab", help="Build the vocabulary and report its reduction")
    _split_args(p)
    p.add_argument("--out", type=Path, default=Path("vocab.txt"))
    p.add_argument("--raw", action="store_true", help="Save the raw-token vocabulary")
    p.set_defaults(func=cmd_vocab)

    p = add("train", help="Train a recurrent model")
    _split_args(p)
    p.add_argument("--mode", choices=["variable", "fixed"])
    p.add_argument("--cell", choices=["rnn", "gru"])
    p.add_argument("--tokens", choices=["regularized", "raw"])
    p.add_argument("--n", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--dropout", type=float)
    p.add_argument("--embed", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--reset-per-line", action="store_true")
    p.add_argument("--no-bias", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_train)

    p = add("evaluate", help="Score a model on the held-out fold")
    _split_args(p)
    p.add_argument("--mode", choices=["variable", "fixed"])
    p.add_argument("--ks", type=int, nargs="+")
    p.add_argument("--also", type=Path, action="append", help="Additional model to compare")
    p.add_argument("--export", type=Path)
    p.set_defaults(func=cmd_evaluate)

    p = add("suggest", help="Rank next-token suggestions for a code fragment")
    p.add_argument("code")
    p.add_argument("-k", type=int)
    p.set_defaults(func=cmd_suggest)

    p = add("generate", help="Greedily complete a code fragment")
    p.add_argument("code")
    p.add_argument("--max-steps", type=int)
    p.set_defaults(func=cmd_generate)

    p = add("repl", help="Interactive suggestion session")
    p.add_argument("-k", type=int)
    p.set_defaults(func=cmd_repl)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except CodeLMError as exc:
        logger.error("{name}: {exc}", name=type(exc).__name__, exc=exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O failure: {exc}", exc=exc)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
