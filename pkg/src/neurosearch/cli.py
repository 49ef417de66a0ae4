"""Command-line interface.

Verbs: layout, schedule, synth, bench-speller, bench-suggest, train-sat,
replay, serve, bench-kernels. A global --config JSON file overrides runtime
defaults (sampling rate, refresh rate, harmonics, window length, thresholds).
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import bench_kernels, bench_speller, kernel_table, speller_table
from .config import DEFAULT_PINYIN_DICT, DEFAULT_QUERY_LOG, RuntimeConfig, asset_path
from .errors import NeurosearchError
from .gbdt import DEFAULT_GRID, GbdtParams, lopo_tune, save_model, load_model
from .features import LabeledFeatureSet
from .serp import SerpCorpus
from .session import SessionAssets, replay_file
from .stimulus import StimulusConfig, layout_table, layout_tsv, luminance_schedule, tag_for_target
from .suggest import QueryLog, Suggester, bench_suggestion, load_pinyin_dict
from .synth import SynthSpec, synth_background, synth_satisfaction_eeg, synth_ssvep


def _load_config(args) -> RuntimeConfig:
    return RuntimeConfig.load(args.config) if args.config else RuntimeConfig()


def _cmd_layout(args) -> int:
    if args.json:
        print(json.dumps(layout_table(), ensure_ascii=False, indent=2))
    else:
        sys.stdout.write(layout_tsv())
    return 0


def _cmd_schedule(args) -> int:
    cfg = _load_config(args)
    tag = tag_for_target(args.k, StimulusConfig(refresh_rate=cfg.refresh_rate))
    frames = luminance_schedule(tag, args.frames, cfg.refresh_rate)
    if args.json:
        print(json.dumps({"k": args.k, "f": tag.f, "phi": tag.phi, "frames": frames}))
    else:
        for i, v in enumerate(frames):
            print(f"{i}\t{v:.9f}")
    return 0


def _cmd_synth(args) -> int:
    cfg = _load_config(args)
    if args.satisfaction:
        window = synth_satisfaction_eeg(
            satisfied=args.satisfaction == "satisfied",
            duration=args.duration,
            sampling_rate=cfg.sampling_rate,
            seed=args.seed,
        )
    elif args.background:
        spec = SynthSpec(
            duration=args.duration,
            sampling_rate=cfg.sampling_rate,
            n_channels=args.channels,
            seed=args.seed,
        )
        window = synth_background(spec)
    else:
        spec = SynthSpec(
            duration=args.duration,
            sampling_rate=cfg.sampling_rate,
            n_channels=args.channels,
            n_harmonics=cfg.n_harmonics,
            snr_db=args.snr_db,
            seed=args.seed,
        )
        window = synth_ssvep(spec, tag_for_target(args.target))
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(window.to_bytes())
        print(f"wrote {window.n_channels}x{window.n_samples} window to {args.out}")
    else:
        print(json.dumps(window.to_json_dict()))
    return 0


def _cmd_bench_speller(args) -> int:
    rows = []
    for window_s in args.window_s:
        rows.append(
            bench_speller(
                snr_db=args.snr_db,
                window_s=window_s,
                trials_per_target=args.trials,
                sampling_rate=args.sampling_rate,
                n_harmonics=args.harmonics,
                seed=args.seed,
            )
        )
    sys.stdout.write(speller_table(rows))
    return 0


def _cmd_bench_suggest(args) -> int:
    log = QueryLog.load(args.log or asset_path(DEFAULT_QUERY_LOG))
    pinyin = load_pinyin_dict(args.dict or asset_path(DEFAULT_PINYIN_DICT))
    strategies = [args.strategy] if args.strategy else ["first_letter", "full_letter"]
    print("strategy\tmatch_ratio\tkeys_per_char\tmatched/total")
    for strategy in strategies:
        b = bench_suggestion(log, pinyin, strategy)
        print(
            f"{b.strategy}\t{b.match_ratio:.4f}\t{b.keys_per_char:.4f}\t{b.n_matched}/{b.n_queries}"
        )
    return 0


def _cmd_train_sat(args) -> int:
    if args.data:
        data = LabeledFeatureSet.load(args.data)
    elif args.synthetic_eeg:
        from .synth import synth_satisfaction_feature_dataset

        data = synth_satisfaction_feature_dataset(n_per_class=args.eeg_windows, seed=args.seed)
    else:
        from .synth import synth_satisfaction_dataset

        data = synth_satisfaction_dataset(
            n_participants=args.participants,
            n_trials=args.trials,
            separation=args.separation,
            seed=args.seed,
        )
    if args.grid == "default":
        grid = DEFAULT_GRID
    elif args.grid == "small":
        grid = (GbdtParams(learning_rate=0.1, n_estimators=60, max_depth=3, max_leaf_nodes=8),)
    else:
        with open(args.grid, "r", encoding="utf-8") as fh:
            grid = tuple(GbdtParams(**row) for row in json.load(fh))
    if args.no_tune:
        from .gbdt import train

        model = train(data, grid[0])
        mean_auc = float("nan")
    else:
        result = lopo_tune(data, grid)
        model, mean_auc = result.model, result.mean_auc
    save_model(model, args.out)
    print(f"saved model to {args.out} (LOPO mean AUC {mean_auc:.4f})")
    return 0


def _cmd_replay(args) -> int:
    cfg = _load_config(args)
    model = load_model(args.model) if args.model else None
    assets = SessionAssets.bundled(cfg, model=model)
    if args.corpus:
        assets.corpus = SerpCorpus.load(args.corpus)
    session = replay_file(args.log_file, assets)
    print(json.dumps(session.state.snapshot(), ensure_ascii=False, indent=2))
    return 0


def _cmd_serve(args) -> int:
    from .server import build_server

    cfg = _load_config(args)
    model = load_model(args.model) if args.model else None
    assets = SessionAssets.bundled(cfg, model=model)
    if args.corpus:
        assets.corpus = SerpCorpus.load(args.corpus)
    if args.log or args.dict:
        assets.suggester = Suggester(
            QueryLog.load(args.log or asset_path(DEFAULT_QUERY_LOG)),
            load_pinyin_dict(args.dict or asset_path(DEFAULT_PINYIN_DICT)),
            cfg.suggestion_strategy,
        )
    server = build_server(
        assets, host=args.host, port=args.port, log_dir=args.log_dir, ui_dir=args.ui_dir
    )
    print(f"neurosearch serve listening on http://{server.host}:{server.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _cmd_bench_kernels(args) -> int:
    rows = bench_kernels(
        n_rows=args.rows, n_features=args.features, n_trees=args.trees, seed=args.seed
    )
    sys.stdout.write(kernel_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neurosearch")
    parser.add_argument("--config", help="JSON file with runtime configuration overrides")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="dump the 33-key flicker table")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_layout)

    p = sub.add_parser("schedule", help="per-frame luminance for one key")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("synth", help="generate a synthetic EEG window")
    p.add_argument("--target", type=int, default=1, help="speller target index k")
    p.add_argument("--background", action="store_true")
    p.add_argument("--satisfaction", choices=["satisfied", "unsatisfied"])
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--channels", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write binary window here instead of JSON to stdout")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench-speller", help="accuracy / ITR sweep on synthetic SSVEP")
    p.add_argument("--snr-db", type=float, default=-5.0)
    p.add_argument("--window-s", type=float, nargs="+", default=[1.0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--sampling-rate", type=float, default=250.0)
    p.add_argument("--harmonics", type=int, default=5)
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(func=_cmd_bench_speller)

    p = sub.add_parser("bench-suggest", help="suggestion match ratio / keys per char")
    p.add_argument("--log", help="query log TSV (default: bundled)")
    p.add_argument("--dict", help="pinyin dictionary TSV (default: bundled)")
    p.add_argument("--strategy", choices=["first_letter", "full_letter"])
    p.set_defaults(func=_cmd_bench_suggest)

    p = sub.add_parser("train-sat", help="train the satisfaction model")
    p.add_argument("--data", help="LabeledFeatureSet TSV file")
    p.add_argument("--synthetic-eeg", action="store_true", help="train on synthetic EEG features")
    p.add_argument("--eeg-windows", type=int, default=40, help="windows per class for --synthetic-eeg")
    p.add_argument("--participants", type=int, default=18)
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--separation", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", default="small", help="'default', 'small', or JSON file of params")
    p.add_argument("--no-tune", action="store_true", help="skip LOPO, train grid[0] on all data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_sat)

    p = sub.add_parser("replay", help="rebuild a session from its event log")
    p.add_argument("log_file")
    p.add_argument("--corpus")
    p.add_argument("--model")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8330)
    p.add_argument("--corpus")
    p.add_argument("--dict")
    p.add_argument("--log", help="query log TSV")
    p.add_argument("--model", help="trained satisfaction model file")
    p.add_argument("--log-dir", help="append per-session event logs here")
    p.add_argument("--ui-dir", help="serve this directory as the web UI")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("bench-kernels", help="compare compiled vs numpy split kernels")
    p.add_argument("--rows", type=int, default=2000)
    p.add_argument("--features", type=int, default=310)
    p.add_argument("--trees", type=int, default=20)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_bench_kernels)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NeurosearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
