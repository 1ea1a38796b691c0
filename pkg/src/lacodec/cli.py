"""Command-line interface: encode, decode, roundtrip, vocab, eval.

Sentences travel on stdout/stdin (one sound per line) so an encoder process
can pipe straight into a decoder process. All randomness is derived from
the code's own hash, so every command is reproducible byte-for-byte.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluate as ev
from .audioio import CANONICAL_SR, read_wav, write_wav
from .features import Waveform, extract
from .refine import RefineConfig, decode
from .textcodec import FEATURE_NAMES, ParseError, canonical_tokens, code_from_features, parse, verbalize
from .vocab import Vocabulary, build_default_vocabulary


def _load_vocab(args) -> Vocabulary:
    path = args.vocab or os.environ.get("LAC_VOCAB") or None
    return build_default_vocabulary(path)


def _families(args):
    if not getattr(args, "families", None):
        return ev.FAMILY_ORDER
    fams = tuple(f.strip() for f in args.families.split(",") if f.strip())
    for f in fams:
        if f not in ev.FAMILY_ORDER:
            raise SystemExit(f"unknown family {f!r}; choose from {', '.join(ev.FAMILY_ORDER)}")
    return fams


def _read_waveform(path: str) -> Waveform:
    samples, sr, was_stereo = read_wav(path)
    if was_stereo:
        print(f"warning: {path}: stereo input mixed down to mono", file=sys.stderr)
    return Waveform(samples, sr)


def cmd_encode(args) -> int:
    vocab = _load_vocab(args)
    for path in args.wav:
        w = _read_waveform(path)
        code = code_from_features(extract(w).values, vocab)
        if args.dump_code:
            for token in canonical_tokens(code):
                print(token, file=sys.stderr)
        print(verbalize(code))
    return 0


def cmd_decode(args) -> int:
    vocab = _load_vocab(args)
    config = RefineConfig(budget=args.budget, reg_weight=args.reg_weight,
                          target_len=args.target_len)
    if args.sentences == "-":
        lines = [ln for ln in sys.stdin.read().splitlines() if ln.strip()]
    else:
        lines = [ln for ln in Path(args.sentences).read_text().splitlines() if ln.strip()]
    if not lines:
        print("error: no sentences to decode", file=sys.stderr)
        return 1
    out = Path(args.output)
    for i, sentence in enumerate(lines):
        try:
            wav, report = decode(sentence, vocab, config)
        except ParseError as exc:
            print(f"error: sentence {i + 1}: {exc}", file=sys.stderr)
            return 1
        target = out if len(lines) == 1 else out.with_stem(f"{out.stem}-{i + 1:03d}")
        write_wav(target, wav.samples, wav.sample_rate, args.format)
        report_path = target.with_suffix(target.suffix + ".report.txt")
        report_path.write_text("\n".join(report.lines()) + "\n")
        if args.verbose:
            print(f"{target}: violations={report.violations} score={report.score:.4f} "
                  f"evaluations={report.evaluations}", file=sys.stderr)
    return 0


def cmd_roundtrip(args) -> int:
    vocab = _load_vocab(args)
    fams = _families(args)
    slots = ev.family_slots(fams)
    w = _read_waveform(args.wav)
    code = code_from_features(extract(w).values, vocab)
    sentence = verbalize(code)
    recovered = parse(sentence, vocab)
    from .textcodec import LexicalCode

    requant = LexicalCode(
        tuple(
            vocab.quantize(name, vocab.representative_of(name, label))
            for name, label in zip(FEATURE_NAMES, recovered.labels)
        )
    )
    pre = ev.bin_accuracy(code, requant, slots)
    config = RefineConfig(budget=args.budget, reg_weight=args.reg_weight,
                          target_len=args.target_len)
    wav, report = decode(sentence, vocab, config)
    post_code = code_from_features(extract(wav).values, vocab)
    post = ev.bin_accuracy(code, post_code, slots)
    print(f"sentence: {sentence}")
    print(f"families: {','.join(fams)}")
    print(f"pre_synthesis_accuracy: {pre:.6f}")
    print(f"post_synthesis_accuracy: {post:.6f}")
    print(f"violations: {report.violations}")
    print(f"seed: {report.seed}")
    if args.output:
        write_wav(args.output, wav.samples, wav.sample_rate, args.format)
    return 0


def cmd_vocab(args) -> int:
    vocab = _load_vocab(args)
    if args.action == "dump":
        for f in vocab.features:
            labels = [e.label for e in vocab.entries[f.name]]
            print(f"{f.index:2d} {f.name} [{f.family}] {len(labels)} labels: "
                  + ", ".join(labels[:8]) + (", ..." if len(labels) > 8 else ""))
    elif args.action == "validate":
        report = vocab.validate()
        print("\n".join(report.lines()))
        return 0 if report.ok else 1
    elif args.action == "bits":
        print(f"{vocab.max_bits():.6f}")
    return 0


def _load_corpus(directory: str) -> list[Waveform]:
    paths = sorted(Path(directory).glob("*.wav"))
    corpus = []
    for p in paths:
        try:
            corpus.append(_read_waveform(p))
        except Exception as exc:  # unreadable files are skipped with a warning
            print(f"warning: skipping {p}: {exc}", file=sys.stderr)
    if not corpus:
        raise SystemExit(f"no readable WAV files in {directory}")
    return corpus


def cmd_eval(args) -> int:
    vocab = _load_vocab(args)
    corpus = _load_corpus(args.corpus)
    if args.mode == "ablation":
        rows = ev.ablation_table(corpus, vocab, budget=args.budget,
                                 reg_weight=args.reg_weight, jobs=args.jobs)
        print("families\tpre_mean\tpre_ci95\tpost_mean\tpost_ci95\tpost_delta")
        for row in rows:
            delta = "" if row.post_delta is None else f"{row.post_delta:.4f}"
            print(f"{'+'.join(row.families)}\t{row.pre_mean:.4f}\t{row.pre_ci95:.4f}"
                  f"\t{row.post_mean:.4f}\t{row.post_ci95:.4f}\t{delta}")
    elif args.mode == "sweep":
        budgets = tuple(int(b) for b in args.budgets.split(","))
        rows = ev.budget_sweep(corpus, vocab, budgets=budgets,
                               reg_weight=args.reg_weight, jobs=args.jobs)
        print("budget\taccuracy_mean\taccuracy_median\tci95\tsounds_per_minute\tselection_ok")
        for row in rows:
            print(f"{row.budget}\t{row.accuracy_mean:.4f}\t{row.accuracy_median:.4f}"
                  f"\t{row.ci95:.4f}\t{row.sounds_per_minute:.2f}\t{row.selection_ok}")
    elif args.mode == "rate":
        codes = ev.encode_corpus(corpus, vocab)
        print("\n".join(ev.rate_report(codes, vocab).lines()))
    return 0


def cmd_make_corpus(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    for i, w in enumerate(ev.synthetic_corpus(args.count, seed=args.seed)):
        write_wav(out / f"sound-{i:03d}.wav", w.samples, w.sample_rate, "float32")
    print(f"wrote {args.count} files to {out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lacodec",
        description="Encode short sounds as English sentences and decode them back to audio.",
    )
    parser.add_argument("--vocab", help="vocabulary file (default: packaged; env LAC_VOCAB)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="WAV file(s) to one sentence per line on stdout")
    p.add_argument("wav", nargs="+")
    p.add_argument("--dump-code", action="store_true", help="print canonical tokens to stderr")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="sentence file (or - for stdin) to WAV")
    p.add_argument("sentences")
    p.add_argument("-o", "--output", default="decoded.wav")
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--reg-weight", type=float, default=0.05)
    p.add_argument("--target-len", type=int, default=None)
    p.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("roundtrip", help="encode then decode one WAV, report accuracies")
    p.add_argument("wav")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--reg-weight", type=float, default=0.05)
    p.add_argument("--target-len", type=int, default=None)
    p.add_argument("--families", default=None, help="comma-separated family subset")
    p.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("vocab", help="inspect the vocabulary")
    p.add_argument("action", choices=("dump", "validate", "bits"))
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("eval", help="corpus experiments over a directory of WAVs")
    p.add_argument("mode", choices=("ablation", "sweep", "rate"))
    p.add_argument("corpus")
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--budgets", default="1,16,32,64,128,256")
    p.add_argument("--reg-weight", type=float, default=0.05)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("make-corpus", help="write a synthetic WAV corpus")
    p.add_argument("directory")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_corpus)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
