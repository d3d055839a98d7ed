"""Command-line front end: ``taxsim {sim,eval-mc,group,coord,count}``.

Settings resolve in order: command-line flag, ``TAXSIM_<NAME>`` environment
variable, JSON config file (``--config``), built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter

from . import __version__
from .coordination import CoordinationPhrase, Number, Resolver, Thresholds, guess_number
from .evalharness import EvalError, eval_live, eval_published, read_gold_pairs
from .probmodel import (
    DEFAULT_BASE,
    ProbabilityError,
    count_weighted,
    dump_probabilities,
    load_probabilities,
    to_probability,
)
from .selection import SelectionError, ingest_pairs, read_pairs
from .sensegroup import (
    EVALUATION,
    PRESENTATION,
    AnnotationError,
    disambiguate_group,
    filter_senses,
    random_baseline,
    read_annotations,
    scale_confidence,
    score_filtering,
    score_selection,
)
from .similarity import WORD_MEASURES, min_sense_path, wsim, wsim_edge, wsim_lc, NoPathError
from .taxonomy import TaxonomyError, load_taxonomy

log = logging.getLogger("taxsim")

EXIT_OK, EXIT_INTERNAL, EXIT_LOAD, EXIT_VOCAB = 0, 1, 2, 3

DEFAULTS = {
    "taxonomy": None,
    "probs": None,
    "corpus": None,
    "corpus_format": "text",
    "lemmas": None,
    "base": DEFAULT_BASE,
    "virtual_root": False,
    "fallback": None,
    "format": "tsv",
    "tau": 2.0,
    "sigma": 0.0,
    "threshold": None,
    "min_level": None,
}
_TYPES = {"base": float, "tau": float, "sigma": float, "threshold": float, "min_level": int}


class LoadError(Exception):
    pass


class VocabularyError(Exception):
    pass


def _as_bool(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def resolve_settings(args: argparse.Namespace, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    config = {}
    config_path = args.config or environ.get("TAXSIM_CONFIG")
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as f:
                config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise LoadError(f"config {config_path}: {e}") from e
    out = {}
    for key, default in DEFAULTS.items():
        value = getattr(args, key, None)
        if value is None or value is False:
            env = environ.get(f"TAXSIM_{key.upper()}")
            if env is not None:
                value = env
            elif key in config:
                value = config[key]
            elif value is None:
                value = default
        if key == "virtual_root":
            value = _as_bool(value)
        elif value is not None and key in _TYPES:
            value = _TYPES[key](value)
        out[key] = value
    return out


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise LoadError(f"{path}: {e.strerror}") from e


def load_taxonomy_from(cfg):
    if not cfg["taxonomy"]:
        raise LoadError("no taxonomy given (--taxonomy or TAXSIM_TAXONOMY)")
    try:
        return load_taxonomy(_read(cfg["taxonomy"]), virtual_root=cfg["virtual_root"], fallback=cfg["fallback"])
    except TaxonomyError as e:
        raise LoadError(f"{cfg['taxonomy']}: {e}") from e


def _lemma_map(cfg):
    if not cfg["lemmas"]:
        return None
    out = {}
    for lineno, line in enumerate(_read(cfg["lemmas"]).splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise LoadError(f"{cfg['lemmas']}: line {lineno}: expected surface<TAB>lemma")
        out[fields[0]] = fields[1]
    return out


def _corpus_counts(cfg):
    text = _read(cfg["corpus"])
    if cfg["corpus_format"] == "counts":
        counts = Counter()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            try:
                counts[fields[0]] += float(fields[1])
            except (IndexError, ValueError):
                raise LoadError(f"{cfg['corpus']}: line {lineno}: expected word<TAB>count") from None
        return counts.items()
    return Counter(text.split()).items()


def load_model_from(cfg, t):
    if cfg["probs"] and cfg["corpus"]:
        raise LoadError("give either --probs or --corpus, not both")
    try:
        if cfg["probs"]:
            return load_probabilities(t, _read(cfg["probs"]), cfg["base"])
        if cfg["corpus"]:
            return to_probability(count_weighted(t, _corpus_counts(cfg), _lemma_map(cfg)), cfg["base"])
    except (ProbabilityError, TaxonomyError) as e:
        raise LoadError(str(e)) from e
    raise LoadError("no probability source given (--probs or --corpus)")


def _emit(cfg, out, tsv_fields, record):
    if cfg["format"] == "jsonl":
        out.write(json.dumps(record) + "\n")
    else:
        out.write("\t".join(str(f) for f in tsv_fields) + "\n")


def _f4(x):
    return "undefined" if x is None else f"{x:.4f}"


# -- sim ------------------------------------------------------------------

def _sim_one(cfg, m, t, w1, w2, measure):
    for w in (w1, w2):
        if not t.senses(w):
            raise VocabularyError(f"word {w!r} has no senses and no fallback concept is set")
    if measure in ("resnik", "prob", "lin", "wup"):
        res = wsim(m, w1, w2, "wupalmer" if measure == "wup" else measure)
        return res.value, list(res.subsumers), list(res.sense_pair or ())
    via_top = measure == "edge-vtop"
    _, pair = min_sense_path(t, w1, w2, via_top)
    if measure == "lc":
        try:
            value = wsim_lc(t, w1, w2, cfg["base"])
        except NoPathError:
            value = 0.0
    else:
        value = wsim_edge(t, w1, w2, "virtual-top" if via_top else "assert-zero")
    return value, [], list(pair or ())


def cmd_sim(args, cfg, out):
    t = load_taxonomy_from(cfg)
    m = load_model_from(cfg, t)
    if args.words and len(args.words) != 2:
        raise LoadError("sim takes exactly two words (or none to read pairs from stdin)")
    if args.words:
        jobs = [tuple(args.words)]
    else:
        jobs = []
        for line in sys.stdin:
            parts = line.split()
            if len(parts) >= 2:
                jobs.append((parts[0], parts[1]))
    status = EXIT_OK
    for w1, w2 in jobs:
        try:
            value, mis, pair = _sim_one(cfg, m, t, w1, w2, args.measure)
        except VocabularyError as e:
            if len(jobs) == 1:
                raise
            log.error("%s", e)
            status = EXIT_VOCAB
            continue
        _emit(cfg, out, [f"{value:.4f}", ",".join(mis) or "-", *(pair or ["-", "-"])],
              {"word1": w1, "word2": w2, "measure": args.measure, "value": value,
               "subsumers": mis, "sense_pair": pair})
    return status


# -- eval-mc --------------------------------------------------------------

def cmd_eval_mc(args, cfg, out):
    if args.pairs or cfg["taxonomy"]:
        if not args.pairs:
            raise LoadError("eval-mc with a taxonomy needs --pairs")
        t = load_taxonomy_from(cfg)
        m = load_model_from(cfg, t)
        try:
            report = eval_live(m, read_gold_pairs(_read(args.pairs)), args.measure)
        except EvalError as e:
            raise LoadError(str(e)) from e
    else:
        report = eval_published()
    if cfg["format"] == "jsonl":
        out.write(json.dumps({"correlations": report.correlations, "n": report.n,
                              "excluded": report.excluded}) + "\n")
    else:
        out.write(report.format() + "\n")
    return EXIT_OK


# -- group ----------------------------------------------------------------

def _read_groups(path):
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        if line.startswith("#"):
            continue
        item, _, rest = line.rpartition("\t")
        item = item or str(lineno)
        words = [w.strip() for w in rest.split(",") if w.strip()]
        if not words:
            log.warning("line %d: empty group skipped", lineno)
            continue
        yield item, words


def cmd_group(args, cfg, out):
    t = load_taxonomy_from(cfg)
    m = load_model_from(cfg, t)
    threshold, min_level = PRESENTATION if args.mode == "presentation" else EVALUATION
    if cfg["threshold"] is not None:
        threshold = cfg["threshold"]
    if cfg["min_level"] is not None:
        min_level = cfg["min_level"]
    partition, listed = {}, []
    for item, words in _read_groups(args.groups):
        gr = disambiguate_group(m, words)
        part = filter_senses(gr, threshold, min_level, item)
        partition.update(part)
        listed.append((item, [(w, s) for w, s, _ in gr.items()]))
        if cfg["format"] == "tsv":
            out.write(f"# item {item}: {','.join(words)}\n")
        for w, s, phi in gr.items():
            level = scale_confidence(phi)
            inc = part[(item, w, s)]
            _emit(cfg, out, [w, s, f"{phi:.4f}", level, "yes" if inc else "no"],
                  {"item": item, "word": w, "sense": s, "phi": phi, "level": level, "included": inc})
        for w in gr.excluded:
            log.warning("item %s: %r has no senses", item, w)
    if args.annotations:
        try:
            ann = read_annotations(_read(args.annotations))
            sel = score_selection(partition, ann)
            fil = score_filtering(partition, ann)
            known = [item for item, _ in listed if ann.is_known(item)]
            target = args.target_avg
            if target is None:
                target = sum(ann.correct_count(i) for i in known) / max(len(known), 1)
            base = random_baseline(listed, ann, target, args.runs, args.seed) if target > 0 else None
        except (AnnotationError, ValueError) as e:
            raise LoadError(str(e)) from e
        footer = {
            "selection": {"precision": sel.precision, "recall": sel.recall},
            "filtering": {"precision": fil.precision, "recall": fil.recall},
        }
        if base is not None:
            footer["random"] = {
                "inclusion_prob": base.inclusion_prob, "runs": args.runs, "seed": args.seed,
                "selection": {"precision": base.selection.precision, "recall": base.selection.recall},
                "filtering": {"precision": base.filtering.precision, "recall": base.filtering.recall},
            }
        if cfg["format"] == "jsonl":
            out.write(json.dumps({"metrics": footer}) + "\n")
        else:
            out.write(f"# selection\tP={_f4(sel.precision)}\tR={_f4(sel.recall)}\n")
            out.write(f"# filtering\tP={_f4(fil.precision)}\tR={_f4(fil.recall)}\n")
            if base is not None:
                out.write(f"# random q={base.inclusion_prob:.4f} runs={args.runs} seed={args.seed}"
                          f"\tselection P={_f4(base.selection.precision)} R={_f4(base.selection.recall)}"
                          f"\tfiltering P={_f4(base.filtering.precision)} R={_f4(base.filtering.recall)}\n")
    return EXIT_OK


# -- coord ----------------------------------------------------------------

def _parse_phrase(line, lexicon, guess):
    fields = line.split("\t")
    if len(fields) == 4:
        fields.append("-")
    if len(fields) != 5:
        raise ValueError("expected n0<TAB>n1<TAB>n2<TAB>n3<TAB>numbers")
    n0, n1, n2, n3, numbers = fields
    if numbers.strip() == "-":
        if guess:
            tags = tuple(guess_number(w, lexicon) for w in (n1, n2, n3))
        else:
            tags = (Number.UNKNOWN,) * 3
    else:
        tags = [Number.parse(x) for x in numbers.split(",")]
        if len(tags) == 4:
            tags = tags[1:]
        if len(tags) != 3:
            raise ValueError(f"expected 3 number tags, got {numbers!r}")
    return CoordinationPhrase(n1, n2, n3, n0 or None, tuple(tags))


def cmd_coord(args, cfg, out):
    t = load_taxonomy_from(cfg)
    model = load_model_from(cfg, t) if (cfg["probs"] or cfg["corpus"]) else None
    cooc = None
    if args.cooc:
        try:
            cooc = ingest_pairs(t, read_pairs(_read(args.cooc)))
        except (SelectionError, ValueError) as e:
            raise LoadError(f"{args.cooc}: {e}") from e
    lexicon = None
    if args.number_lexicon:
        lexicon = dict(line.split("\t", 1) for line in _read(args.number_lexicon).splitlines()
                       if line and not line.startswith("#"))
    try:
        resolver = Resolver(model, cooc, Thresholds(cfg["tau"], cfg["sigma"]))
    except ValueError as e:
        raise LoadError(str(e)) from e
    for lineno, line in enumerate(_read(args.phrases).splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            phrase = _parse_phrase(line, lexicon, args.guess_number or lexicon is not None)
        except ValueError as e:
            log.error("line %d: malformed phrase: %s", lineno, e)
            continue
        d = resolver.resolve(phrase, args.combiner, args.default)
        scores = []
        for sub in d.evidence:
            if sub.evaluated:
                scores += [f"{sub.strategy}.{k}={v:.4f}" if isinstance(v, float) else f"{sub.strategy}.{k}={v}"
                           for k, v in sub.scores.items()]
        _emit(cfg, out, [d.choice.value, d.strategy or "none", *scores],
              {"choice": d.choice.value, "strategy": d.strategy, "defaulted": d.defaulted,
               "evidence": [{"strategy": s.strategy, "choice": s.choice.value, "evaluated": s.evaluated,
                             "scores": s.scores} for s in d.evidence]})
    return EXIT_OK


# -- count ----------------------------------------------------------------

def cmd_count(args, cfg, out):
    t = load_taxonomy_from(cfg)
    if not cfg["corpus"]:
        raise LoadError("count needs --corpus")
    ft = count_weighted(t, _corpus_counts(cfg), _lemma_map(cfg))
    try:
        model = to_probability(ft, cfg["base"])
    except ProbabilityError as e:
        raise LoadError(str(e)) from e
    log.info("N=%g, skipped %d token(s)", ft.total_n, sum(ft.skipped.values()))
    dump_probabilities(model, out, args.kind)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--taxonomy", help="taxonomy file (id<TAB>parents<TAB>words)")
    g.add_argument("--probs", help="probability file (id<TAB>p=... or ic=...)")
    g.add_argument("--corpus", help="corpus to estimate probabilities from")
    g.add_argument("--corpus-format", choices=["text", "counts"], default=None)
    g.add_argument("--lemmas", help="surface<TAB>lemma map applied while counting")
    g.add_argument("--base", type=float, help="log base for information content (default 2)")
    g.add_argument("--virtual-root", action="store_true", default=None, help="add a synthetic top node")
    g.add_argument("--fallback", help="concept used for words missing from the taxonomy")
    g.add_argument("--format", choices=["tsv", "jsonl"], default=None)
    g.add_argument("--config", help="JSON file of default settings")
    g.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="taxsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sim", parents=[common], help="word similarity")
    s.add_argument("words", nargs="*", help="two words; omit to read pairs from stdin")
    s.add_argument("--measure", choices=WORD_MEASURES, default="resnik")
    s.set_defaults(func=cmd_sim)

    e = sub.add_parser("eval-mc", parents=[common], help="correlation with human ratings")
    e.add_argument("--pairs", help="word1,word2,rating CSV; needs --taxonomy")
    e.add_argument("--measure", choices=WORD_MEASURES, default="resnik")
    e.set_defaults(func=cmd_eval_mc)

    gr = sub.add_parser("group", parents=[common], help="sense confidences for noun groups")
    gr.add_argument("groups", help="one comma-separated group per line, optionally item<TAB>group")
    gr.add_argument("--annotations", help="item<TAB>word<TAB>sense<TAB>correct|incorrect records")
    gr.add_argument("--mode", choices=["presentation", "evaluation"], default="presentation")
    gr.add_argument("--threshold", type=float, help="minimum confidence to include a sense")
    gr.add_argument("--min-level", type=int, help="minimum 1-5 confidence level to include a sense")
    gr.add_argument("--target-avg", type=float, help="random baseline senses per item")
    gr.add_argument("--runs", type=int, default=10)
    gr.add_argument("--seed", type=int, default=0)
    gr.set_defaults(func=cmd_group)

    c = sub.add_parser("coord", parents=[common], help="resolve n1 and n2 n3 bracketing")
    c.add_argument("phrases", help="n0<TAB>n1<TAB>n2<TAB>n3<TAB>numbers lines")
    c.add_argument("--cooc", help="predicate<TAB>argument[<TAB>count] lines")
    c.add_argument("--combiner", choices=["backoff", "vote"], default="backoff")
    c.add_argument("--default", choices=["12", "13"])
    c.add_argument("--tau", type=float)
    c.add_argument("--sigma", type=float)
    c.add_argument("--number-lexicon", help="word<TAB>sg|pl lines")
    c.add_argument("--guess-number", action="store_true", help="tag '-' records by lexicon and -s suffix")
    c.set_defaults(func=cmd_coord)

    k = sub.add_parser("count", parents=[common], help="estimate a probability file from a corpus")
    k.add_argument("--kind", choices=["p", "ic"], default="p")
    k.set_defaults(func=cmd_count)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="taxsim: %(levelname)s: %(message)s")
    try:
        cfg = resolve_settings(args)
        return args.func(args, cfg, out)
    except LoadError as e:
        log.error("%s", e)
        return EXIT_LOAD
    except VocabularyError as e:
        log.error("%s", e)
        return EXIT_VOCAB
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
