"""Command-line interface: ``dialogue-context {train,eval,learn-ops,replay,interactive}``.

Exit codes: 0 success, 1 usage error, 2 data or validation error.  Defaults
for any flag may be supplied by a JSON file named in ``DLG_CONFIG`` (keys are
the long flag names with dashes or underscores).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence, TextIO

from . import __version__
from .base import DialogueContextError
from .clarification import load_lexicon
from .corpus import parse_corpus, parse_speaking_time
from .engine import Session, SessionConfig, replay_dialogue
from .plan_recognizer import learn_operators, load_operators, save_operators
from .predictor import estimate_lambdas, evaluate_topn, load_model, save_model, train
from .thematic import time_expression_from_json

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

REQUIRED = {
    "train": ("corpus", "model"),
    "eval": ("corpus", "model"),
    "learn-ops": ("corpus", "output"),
    "replay": ("corpus",),
    "interactive": (),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dialogue-context", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("train", help="train the dialogue-act predictor")
    p.add_argument("--corpus")
    p.add_argument("--model", help="output model file")
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--held-out", type=float, default=0.1, help="held-out fraction for interpolation weights")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="top-n hit rate of a trained model")
    p.add_argument("--corpus")
    p.add_argument("--model")
    p.add_argument("--top-n", type=int, default=3)

    p = sub.add_parser("learn-ops", help="learn turn-level plan operators")
    p.add_argument("--corpus")
    p.add_argument("--output")
    p.add_argument("--min-support", type=int, default=2)

    for name in ("replay", "interactive"):
        p = sub.add_parser(name, help="replay a corpus" if name == "replay" else "step through a dialogue on stdin")
        if name == "replay":
            p.add_argument("--corpus")
            p.add_argument("--output", help="snapshot file (default: stdout)")
            p.add_argument("--clarify", choices=("accept", "reject"), help="auto-answer clarification prompts")
            p.add_argument("--thematic-dump", help="write the final thematic structure of each dialogue here")
            p.add_argument("--structure-dump", help="write the final intentional structure of each dialogue here")
        else:
            p.add_argument("--speaking-time", help="YYYY-MM-DD[THH:MM]")
            p.add_argument("--participants", nargs=2, default=["A", "B"])
        p.add_argument("--model")
        p.add_argument("--operators")
        p.add_argument("--lexicon")
        p.add_argument("--top-k", type=int, default=3)
        p.add_argument("--confusable-threshold", type=float, default=0.7)
        p.add_argument("--no-clarification", action="store_true")
    return parser


def _config_defaults() -> dict:
    path = os.environ.get("DLG_CONFIG")
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _apply_defaults(parser: argparse.ArgumentParser, defaults: dict):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                known = {a.dest for a in sub._actions}
                sub.set_defaults(**{k: v for k, v in defaults.items() if k in known})


def _check_args(args):
    for name in REQUIRED[args.command]:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"{args.command}: --{name.replace('_', '-')} is required")
    for name in ("max_order", "top_n", "min_support", "top_k"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be at least 1")
    held_out = getattr(args, "held_out", None)
    if held_out is not None and not 0 < held_out < 1:
        raise UsageError("--held-out must lie strictly between 0 and 1")
    threshold = getattr(args, "confusable_threshold", None)
    if threshold is not None and not 0 < threshold <= 1:
        raise UsageError("--confusable-threshold must lie in (0, 1]")


def _load_corpus(path):
    corpus = parse_corpus(path)
    if not corpus.dialogues:
        raise ValueError(f"{path}: corpus contains no dialogues")
    return corpus


def _session_parts(args):
    model = load_model(args.model) if args.model else None
    operators = load_operators(args.operators) if args.operators else []
    lexicon = load_lexicon(args.lexicon) if args.lexicon else []
    config = SessionConfig(prediction_k=args.top_k, clarification=not args.no_clarification,
                           confusable_threshold=args.confusable_threshold)
    return model, operators, lexicon, config


def cmd_train(args, out: TextIO) -> int:
    corpus = _load_corpus(args.corpus)
    lambdas, n_events = estimate_lambdas(corpus, args.max_order, args.held_out, args.seed)
    model = train(corpus, args.max_order, lambdas=lambdas)
    save_model(model, args.model)
    print("lambdas: " + " ".join(f"{x:.4f}" for x in lambdas) + f" (held-out events: {n_events})", file=out)
    return EXIT_OK


def cmd_eval(args, out: TextIO) -> int:
    model = load_model(args.model)
    corpus = _load_corpus(args.corpus)
    rate = evaluate_topn(model, corpus, args.top_n)
    print(f"top-{args.top_n} hit rate: {100 * rate:.2f}%", file=out)
    return EXIT_OK


def cmd_learn_ops(args, out: TextIO) -> int:
    corpus = _load_corpus(args.corpus)
    operators = learn_operators(corpus, args.min_support)
    save_operators(operators, args.output)
    print(f"learned {len(operators)} operators", file=out)
    return EXIT_OK


def cmd_replay(args, out: TextIO) -> int:
    corpus = _load_corpus(args.corpus)
    model, operators, lexicon, config = _session_parts(args)
    sink = open(args.output, "w", encoding="utf-8") if args.output else out
    thematic_dumps, structure_dumps = [], []
    try:
        for dialogue in corpus.dialogues:
            session, snapshots = replay_dialogue(dialogue, model, operators, lexicon, config, args.clarify)
            for snap in snapshots:
                sink.write(json.dumps(snap, sort_keys=True, ensure_ascii=False) + "\n")
            thematic_dumps.append(f"# {dialogue.id}\n{session.thematic.dump()}\n")
            structure_dumps.append(f"# {dialogue.id}\n{session.structure.dump()}\n")
    finally:
        if sink is not out:
            sink.close()
    for path, dumps in ((args.thematic_dump, thematic_dumps), (args.structure_dump, structure_dumps)):
        if path:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("".join(dumps))
    return EXIT_OK


def _parse_times(text: str):
    data = json.loads(text)
    items = data if isinstance(data, list) else [data]
    return [time_expression_from_json(t) for t in items]


def cmd_interactive(args, out: TextIO, inp: TextIO, err: TextIO) -> int:
    model, operators, lexicon, config = _session_parts(args)
    speaking_time = parse_speaking_time(args.speaking_time) if args.speaking_time else None
    session = Session(model, operators, speaking_time, tuple(args.participants), lexicon, config)

    def emit(obj):
        print(json.dumps(obj, sort_keys=True, ensure_ascii=False), file=out, flush=True)

    lines = iter(inp)
    for line in lines:
        parts = line.strip().split(maxsplit=2)
        if not parts:
            continue
        cmd = parts[0]
        try:
            if cmd == "quit":
                break
            if cmd == "turn" and len(parts) == 2:
                emit({"turn": session.begin_turn(parts[1]), "speaker": parts[1]})
            elif cmd == "utt" and len(parts) >= 2:
                times = _parse_times(parts[2]) if len(parts) == 3 else []
                report = session.process_utterance(session.config.inference_track, parts[1], times)
                emit(report.to_json())
                while session.awaiting is not None:
                    print(f"CLARIFY: did you mean {session.awaiting.proposal}? [y/n]", file=out, flush=True)
                    answer = next(lines, "n").strip().lower()
                    while answer not in ("y", "n"):
                        print("please answer y or n", file=err)
                        answer = next(lines, "n").strip().lower()
                    emit(session.respond(answer == "y"))
            elif cmd == "end" and len(parts) <= 3:
                track = parts[1] if len(parts) >= 2 else None
                count = int(parts[2]) if len(parts) == 3 else None
                report = session.process_turn_end(track, count)
                emit({"turn": report.turn_index, "phase": report.phase.value if report.phase else None,
                      "phase_repair": report.phase_repair, "repairs": report.repairs,
                      "errors": [list(e) for e in report.errors]})
            else:
                print(f"unrecognized command: {line.strip()!r} "
                      "(expected: turn <speaker> | utt <act> [json] | end [track] [count] | quit)", file=err)
        except (DialogueContextError, ValueError) as exc:
            print(f"error: {exc}", file=err)
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None, stdin: TextIO = None, stdout: TextIO = None,
        stderr: TextIO = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        _apply_defaults(parser, _config_defaults())
    except (OSError, ValueError) as exc:
        print(f"error: DLG_CONFIG: {exc}", file=stderr)
        return EXIT_DATA
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        _check_args(args)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=stderr)
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE

    handlers = {"train": cmd_train, "eval": cmd_eval, "learn-ops": cmd_learn_ops, "replay": cmd_replay}
    try:
        if args.command == "interactive":
            return cmd_interactive(args, stdout, stdin, stderr)
        return handlers[args.command](args, stdout)
    except (DialogueContextError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DATA


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
