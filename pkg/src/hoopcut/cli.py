"""Command-line interface.

Exit codes: 0 success, 2 missing/unreadable files, 3 validation errors,
4 internal errors.  All diagnostics go to stderr; each subcommand prints
a one-line summary to stdout.  The default output directory comes from
HOOPCUT_OUT_DIR when set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import traceback
from pathlib import Path

from .config import ConfigError, EngineConfig
from .excitement import CUE_NAMES, WeightVector
from .game_data import ParseError
from .learning import (evaluate_weights, filter_pairs_by_agreement,
                       learn_weights, load_pairs_csv)
from .loudness import SampleRateError
from .metrics import fleiss_kappa, mean_pairwise_agreement, mean_pairwise_cohen
from .synth import SynthConfig, load_votes_csv, write_dataset
from . import assembly, learning, pipeline

log = logging.getLogger(__name__)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out or os.environ.get("HOOPCUT_OUT_DIR") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    cfg = EngineConfig.load(args.config) if args.config else EngineConfig()
    for flag, field in (("n", "top_n"), ("step", "grid_step"),
                        ("n_min", "agreement_min"), ("objective", "fold_objective")):
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, field, val)
    cfg.validate()
    return cfg


def _load_weights(path: str) -> WeightVector:
    return WeightVector.from_dict(json.loads(Path(path).read_text("utf-8")))


def _parse_planted(spec: str) -> WeightVector:
    if spec == "uniform":
        return WeightVector.uniform()
    if spec in CUE_NAMES:
        return WeightVector.one_hot(spec)
    if spec.startswith("@"):
        return _load_weights(spec[1:])
    raise ConfigError(
        f"planted weights must be 'uniform', a cue name {CUE_NAMES}, "
        f"or @path.json; got {spec!r}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_config_init(args: argparse.Namespace) -> int:
    path = Path(args.path)
    EngineConfig().save(path)
    print(f"config: wrote defaults to {path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    engine = _engine_config(args)
    cfg = SynthConfig(seed=args.seed, n_games=args.games,
                      baskets_per_game=args.baskets,
                      misread_rate=args.misread_rate,
                      vote_noise=args.vote_noise,
                      planted_weights=_parse_planted(args.planted),
                      pairs_per_game=args.pairs_per_game,
                      raters=args.raters)
    summary = write_dataset(cfg, out, engine)
    print(f"synth: {summary['games']} games, {summary['baskets']} baskets, "
          f"{summary['pairs']} pairs -> {summary['out_dir']}")
    return 0


def cmd_align(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    out = _out_dir(args)
    bundle = pipeline.load_bundle(args.game, cfg)
    aligned, unmatched = pipeline.align_game(bundle, cfg)
    path = out / f"{bundle.record.game_id}.aligned.json"
    pipeline.write_json(
        pipeline.aligned_dict(bundle.record.game_id, aligned, unmatched), path)
    print(f"align: {len(aligned)}/{len(bundle.record.events)} events aligned "
          f"({len(unmatched)} unmatched) -> {path}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    out = _out_dir(args)
    weights = _load_weights(args.weights)
    bundle = pipeline.load_bundle(args.game, cfg)
    scored, unmatched = pipeline.score_bundle(bundle, weights, cfg)
    path = out / f"{bundle.record.game_id}.scored.json"
    pipeline.write_json(
        pipeline.scored_dict(bundle.record.game_id, weights, scored), path)
    print(f"score: {len(scored)} baskets scored "
          f"({len(unmatched)} events unmatched) -> {path}")
    return 0


def cmd_learn_weights(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    out = _out_dir(args)
    pairs_path = Path(args.pairs) if args.pairs else Path(args.dataset) / "pairs.csv"
    pairs = load_pairs_csv(pairs_path)
    scored = pipeline.load_and_score_dataset(args.dataset, cfg,
                                             workers=args.workers)
    tables = learning.cue_tables_from_scored(scored)
    report = learn_weights(tables, pairs, step=cfg.grid_step,
                           n_min=cfg.agreement_min,
                           objective=cfg.fold_objective)
    report_path = out / "cv_report.json"
    pipeline.write_json(report.to_dict(), report_path)
    weights_path = out / "weights.json"
    pipeline.write_json(report.final_weights.as_dict(), weights_path)
    pct = 100.0 * report.overall_matches / report.overall_total
    print(f"learn-weights: {len(report.folds)} folds, overall match "
          f"{pct:.1f}% (MCC {report.overall_mcc:.3f}) -> {report_path}")
    return 0


def _per_cue_table(tables: learning.CueTables, pairs: list,
                   cues: list[str]) -> dict:
    return {cue: evaluate_weights(WeightVector.one_hot(cue), pairs, tables)
            for cue in cues}


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    out = _out_dir(args)
    pairs_path = Path(args.pairs) if args.pairs else Path(args.dataset) / "pairs.csv"
    pairs = filter_pairs_by_agreement(load_pairs_csv(pairs_path),
                                      cfg.agreement_min)
    if not pairs:
        raise ValueError("no pairs survive the agreement filter")
    scored = pipeline.load_and_score_dataset(args.dataset, cfg,
                                             workers=args.workers)
    tables = learning.cue_tables_from_scored(scored)
    cues = args.cue or list(CUE_NAMES)
    payload = {"agreement_min": cfg.agreement_min,
               "pairs": len(pairs),
               "per_cue": _per_cue_table(tables, pairs, cues)}
    if args.weights:
        payload["combined"] = evaluate_weights(_load_weights(args.weights),
                                               pairs, tables)
    path = out / "evaluation.json"
    pipeline.write_json(payload, path)
    best = max(payload["per_cue"], key=lambda c: payload["per_cue"][c]["matches"])
    print(f"evaluate: {len(pairs)} pairs, best single cue {best} "
          f"({payload['per_cue'][best]['match_pct']:.1f}%) -> {path}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    out = _out_dir(args)
    weights = _load_weights(args.weights)
    bundle = pipeline.load_bundle(args.game, cfg)
    video_len = args.video_length if args.video_length else float("inf")
    edl, unmatched = pipeline.generate_edl(bundle, weights, cfg, video_len)
    gid = bundle.record.game_id
    json_path = out / f"{gid}.edl.json"
    json_path.write_text(assembly.emit_edl(edl, "json"), encoding="utf-8")
    csv_path = out / f"{gid}.edl.csv"
    csv_path.write_text(assembly.emit_edl(edl, "csv"), encoding="utf-8")
    extra = ""
    if args.cuts_script:
        sh_path = out / f"{gid}.cuts.sh"
        sh_path.write_text(assembly.render_cuts_script(edl), encoding="utf-8")
        extra = f" + {sh_path.name}"
    print(f"generate: {len(edl.clips)} clips, {edl.total_duration_s:.1f}s "
          f"total -> {json_path}{extra}")
    return 0


def _agreement_table(pairs: list, raters: int) -> list[dict]:
    rows = []
    for n_min in range(raters // 2 + 1, raters):
        kept = filter_pairs_by_agreement(pairs, n_min)
        row: dict = {"n_min": n_min, "pairs_kept": len(kept)}
        if kept:
            table = [(p.votes_a, p.votes_b) for p in kept]
            row["mean_pairwise_agreement_pct"] = (
                100.0 * mean_pairwise_agreement(table, raters))
            row["fleiss_kappa"] = fleiss_kappa(table, raters)
        else:
            row["mean_pairwise_agreement_pct"] = None
            row["fleiss_kappa"] = None
        rows.append(row)
    return rows


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _engine_config(args)
    out = _out_dir(args)
    pairs_path = Path(args.pairs) if args.pairs else Path(args.dataset) / "pairs.csv"
    pairs = load_pairs_csv(pairs_path)
    if not pairs:
        raise ValueError(f"{pairs_path}: no pairs")
    raters = max(p.raters for p in pairs)
    kept = filter_pairs_by_agreement(pairs, cfg.agreement_min)
    scored = pipeline.load_and_score_dataset(args.dataset, cfg,
                                             workers=args.workers)
    tables = learning.cue_tables_from_scored(scored)
    payload: dict = {
        "raters": raters,
        "agreement_min": cfg.agreement_min,
        "pairs_total": len(pairs),
        "pairs_kept": len(kept),
        "per_cue": _per_cue_table(tables, kept, list(CUE_NAMES)),
        "agreement": _agreement_table(pairs, raters),
    }
    votes_path = Path(args.votes) if args.votes else pairs_path.parent / "votes.csv"
    if votes_path.exists():
        ballots = load_votes_csv(votes_path)
        if all(len(b.answers) == raters for b in ballots):
            rater_major = ["".join(b.answers[r] for b in ballots)
                           for r in range(raters)]
            payload["mean_pairwise_cohen_kappa"] = mean_pairwise_cohen(rater_major)
        else:
            log.warning("%s: ballots vary in rater count; skipping Cohen kappa",
                        votes_path)
    path = out / "report.json"
    pipeline.write_json(payload, path)
    print(f"report: {len(kept)}/{len(pairs)} pairs at agreement >= "
          f"{cfg.agreement_min} -> {path}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoopcut",
        description="Score basketball baskets for excitement and cut highlights.")
    parser.add_argument("--verbose", action="store_true",
                        help="log debug detail to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, workers: bool = False) -> None:
        p.add_argument("--config", help="engine config TOML")
        p.add_argument("--out", help="output directory "
                       "(default $HOOPCUT_OUT_DIR or .)")
        if workers:
            p.add_argument("--workers", type=int, default=1,
                           help="parallel per-game workers")

    p = sub.add_parser("config", help="configuration helpers")
    csub = p.add_subparsers(dest="config_command", required=True)
    ci = csub.add_parser("init", help="write a config file with every default")
    ci.add_argument("path", nargs="?", default="engine.toml")
    ci.set_defaults(func=cmd_config_init)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--games", type=int, default=25)
    p.add_argument("--baskets", type=int, default=30)
    p.add_argument("--misread-rate", type=float, default=0.0)
    p.add_argument("--vote-noise", type=float, default=0.0)
    p.add_argument("--pairs-per-game", type=int, default=30)
    p.add_argument("--raters", type=int, default=15)
    p.add_argument("--planted", default="uniform",
                   help="'uniform', a cue name, or @weights.json")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("align", help="align play-by-play events to video time")
    common(p)
    p.add_argument("--game", required=True, help="game manifest JSON")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("score", help="score every basket of one game")
    common(p)
    p.add_argument("--game", required=True, help="game manifest JSON")
    p.add_argument("--weights", required=True, help="weights JSON")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("learn-weights",
                       help="cross-validated grid search for cue weights")
    common(p, workers=True)
    p.add_argument("--dataset", required=True,
                   help="directory of *.manifest.json games")
    p.add_argument("--pairs", help="pairs CSV (default <dataset>/pairs.csv)")
    p.add_argument("--step", type=float, help="grid step override")
    p.add_argument("--n-min", dest="n_min", type=int,
                   help="agreement threshold override")
    p.add_argument("--objective", choices=["train", "heldout"],
                   help="fold-winner objective override")
    p.set_defaults(func=cmd_learn_weights)

    p = sub.add_parser("evaluate", help="per-cue and combined match tables")
    common(p, workers=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--pairs")
    p.add_argument("--cue", action="append", choices=list(CUE_NAMES),
                   help="restrict to one cue (repeatable)")
    p.add_argument("--weights", help="also evaluate this weight vector")
    p.add_argument("--n-min", dest="n_min", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", help="emit the highlight EDL for one game")
    common(p)
    p.add_argument("--game", required=True, help="game manifest JSON")
    p.add_argument("--weights", required=True, help="weights JSON")
    p.add_argument("--n", type=int, help="number of clips (default config top_n)")
    p.add_argument("--video-length", type=float,
                   help="video duration in seconds, for clamping")
    p.add_argument("--cuts-script", action="store_true",
                   help="also write a shell script of cut commands")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report",
                       help="rater agreement and per-cue performance tables")
    common(p, workers=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--pairs")
    p.add_argument("--votes", help="per-rater ballots CSV")
    p.add_argument("--n-min", dest="n_min", type=int)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 2
    except IsADirectoryError as exc:
        print(f"error: expected a file: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ConfigError, SampleRateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports everything
        print(f"internal error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 4


if __name__ == "__main__":
    sys.exit(main())
