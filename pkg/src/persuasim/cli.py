"""Command-line entry point.

Subcommands: corpus, generate, dataset, train, predict, eval, experiment,
serve.  Global flags --seed/--config/--out; the config file is plain
``key = value`` lines (# comments allowed) supplying defaults for any
option not given on the command line.  Every command that produces an
artifact writes a <out>.manifest.json recording the command, config
snapshot, seeds, input hashes, and timings.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import dataset as dataset_io
from .agents import PERSONAS, LlmDm, SentimentDm, make_scripted_agent, SCRIPTED_AGENT_NAMES
from .corpus import Corpus, load_corpus, save_corpus, synth_corpus
from .dataset import InteractionDataset
from .evaluation import evaluate, expert_winning_rates, global_vs_local
from .experts import DEFAULT_EXPERT_ORDER
from .game_core import DmAgentError, GameConfig, play_full_interaction
from .llm_client import ChatClient
from .predictor import (
    TrainConfig,
    load_model,
    predict_dataset,
    save_model,
    train_on_dataset,
)
from .sentiment import ScoreOracle, StubScoreBackend, build_oracle_table

GENERATOR_KINDS = SCRIPTED_AGENT_NAMES + ("sentiment", "llm")

# Recipe grids for the full-scale experiment protocol: human training
# pools, doubling synthetic sizes, and the player-level evaluation splits.
RECIPE_GRIDS = {
    "human_train_sizes": [32, 64, 110],
    "synthetic_train_sizes": [64, 128, 256, 512, 1024, 2048, 4096],
    "mix_human_base": 110,
    "test_players": 100,
    "n_splits": 50,
}


# --- config file and manifests ----------------------------------------------


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` config; later keys win."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def cfg(args, config: dict, key: str, fallback, cast=None):
    """Effective option value: CLI flag, then config file, then fallback."""
    value = getattr(args, key, None)
    if value is None:
        value = config.get(key)
    if value is None:
        return fallback
    return cast(value) if cast else value


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_path: str,
    command: Sequence[str],
    config_snapshot: dict,
    seeds: dict,
    inputs: Sequence[str],
    outputs: Sequence[str],
    elapsed: float,
) -> str:
    manifest = {
        "command": list(command),
        "config": config_snapshot,
        "seeds": seeds,
        "inputs": {p: _sha256(p) for p in inputs if os.path.exists(p)},
        "outputs": list(outputs),
        "elapsed_seconds": round(elapsed, 3),
    }
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# --- generation ---------------------------------------------------------------


def _player_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _make_agent(
    kind: str,
    index: int,
    seed: int,
    tau: float,
    rounds_T: int,
    personas_on: bool,
    oracle,
    llm_client: Optional[ChatClient],
):
    """(agent, dm_kind, persona_id) for one generated player."""
    if kind in SCRIPTED_AGENT_NAMES:
        return make_scripted_agent(kind, oracle=oracle, tau=tau), "scripted", None
    if kind == "sentiment":
        return (
            SentimentDm(oracle, tau=tau, seed=_player_seed(seed, index)),
            "sentiment_baseline",
            None,
        )
    if kind == "llm":
        if llm_client is None:
            raise ValueError("llm generation needs a chat client")
        persona = PERSONAS[index % len(PERSONAS)] if personas_on else None
        agent = LlmDm(llm_client, persona=persona, rounds_T=rounds_T)
        return agent, "llm", persona.persona_id if persona else None
    raise ValueError(f"unknown generator kind {kind!r}")


def generation_provenance(kind: str, model_name: str = "") -> str:
    if kind == "llm":
        return f"llm:{model_name or 'unknown'}"
    if kind == "sentiment":
        return "sentiment_baseline"
    return "scripted"


def _dm_id(kind: str, model_name: str, index: int) -> str:
    if kind == "llm":
        return f"llm:{model_name or 'unknown'}:{index:05d}"
    if kind == "sentiment":
        return f"sentiment:{index:05d}"
    return f"scripted:{kind}:{index:05d}"


def generate_players(
    kind: str,
    n_players: int,
    corpus: Corpus,
    config: GameConfig,
    seed: int,
    out_path: str,
    personas_on: bool = False,
    oracle=None,
    llm_client: Optional[ChatClient] = None,
    model_name: str = "",
    resume: bool = False,
    expert_order=DEFAULT_EXPERT_ORDER,
    workers: int = 1,
) -> InteractionDataset:
    """Append ``n_players`` full interactions to ``out_path``.

    Player i's content depends only on (seed, i), so interrupted runs can
    resume by player index and still produce the bytes of a fresh run.
    With ``workers`` > 1 players are simulated in a thread pool (LLM
    calls throttled by the process-wide rate limiter) but written strictly
    in player order, so the output is identical to a sequential run.
    """
    provenance = generation_provenance(kind, model_name)
    done: set[str] = set()
    if resume and os.path.exists(out_path):
        existing = dataset_io.load(out_path)
        by_player: dict[str, set[int]] = {}
        for game in existing.games:
            by_player.setdefault(game.dm_id, set()).add(game.stage_index)
        done = {p for p, stages in by_player.items() if config.n_stages in stages}
        complete_games = [g for g in existing.games if g.dm_id in done]
        dataset_io.save(
            InteractionDataset(complete_games, provenance, config.rounds_T), out_path
        )
    elif os.path.exists(out_path):
        os.remove(out_path)

    skipped = 0

    def play_one(index: int):
        agent, dm_kind, persona_id = _make_agent(
            kind, index, seed, config.quality_threshold_tau, config.rounds_T,
            personas_on, oracle, llm_client,
        )
        return play_full_interaction(
            agent,
            expert_order,
            corpus.hotels,
            config,
            np.random.default_rng([seed, index]),
            dm_id=_dm_id(kind, model_name, index),
            dm_kind=dm_kind,
            persona_id=persona_id,
        )

    todo = [
        i for i in range(n_players) if _dm_id(kind, model_name, i) not in done
    ]
    results: dict[int, Optional[list]] = {}

    def flush(next_index: int) -> int:
        while next_index < n_players and (
            _dm_id(kind, model_name, next_index) in done or next_index in results
        ):
            games = results.pop(next_index, None)
            if games:
                dataset_io.append_games(out_path, games, provenance, config.rounds_T)
            next_index += 1
        return next_index

    next_to_write = 0
    if workers <= 1:
        for index in todo:
            try:
                results[index] = play_one(index)
            except DmAgentError as exc:
                skipped += 1
                results[index] = None
                print(f"warning: discarding player {index}: {exc}", file=sys.stderr)
            next_to_write = flush(next_to_write)
    else:
        import concurrent.futures

        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(play_one, i): i for i in todo}
            for future in concurrent.futures.as_completed(futures):
                index = futures[future]
                try:
                    results[index] = future.result()
                except DmAgentError as exc:
                    skipped += 1
                    results[index] = None
                    print(f"warning: discarding player {index}: {exc}", file=sys.stderr)
                next_to_write = flush(next_to_write)
    flush(next_to_write)
    if skipped:
        print(f"warning: {skipped} player(s) discarded after agent failures", file=sys.stderr)
    return dataset_io.load(out_path)


# --- sweep ---------------------------------------------------------------------


def sweep(
    train_sizes: Sequence[int],
    train_data: InteractionDataset,
    test_data: InteractionDataset,
    oracle_table,
    game_config: GameConfig,
    train_config: TrainConfig,
    kind: str = "lstm",
    rng: Optional[np.random.Generator] = None,
) -> list[dict]:
    """Train at each player count and evaluate on the fixed test set."""
    sizes: list[int] = []
    for size in train_sizes:
        if size in sizes:
            print(f"warning: duplicate sweep size {size} ignored", file=sys.stderr)
            continue
        sizes.append(size)
    players = train_data.player_ids()
    rows: list[dict] = []
    rng = rng or np.random.default_rng(train_config.seed)
    for size in sizes:
        if size > len(players):
            raise ValueError(
                f"sweep size {size} exceeds available players ({len(players)})"
            )
        chosen = [players[i] for i in rng.choice(len(players), size=size, replace=False)]
        subset = InteractionDataset(
            train_data.games_of(chosen), train_data.provenance, train_data.rounds_T
        )
        model = train_on_dataset(subset, oracle_table, game_config, train_config, kind)
        probs, truths, pairs = predict_dataset(model, test_data, oracle_table, game_config)
        report = evaluate(probs, truths, pairs, rng=np.random.default_rng([train_config.seed, size]))
        rows.append(
            {
                "source": train_data.provenance,
                "train_players": size,
                "accuracy": report.overall_accuracy,
                "ci95_lo": report.ci95[0] if report.ci95 else None,
                "ci95_hi": report.ci95[1] if report.ci95 else None,
                "ece": report.ece,
                "n_test_decisions": report.n_decisions,
                "n_test_players": report.n_players,
            }
        )
    return rows


# --- shared command helpers -----------------------------------------------------


def _game_config(args, config: dict) -> GameConfig:
    n_stages = cfg(args, config, "n_stages", 6, int)
    target = cfg(args, config, "points_target", 10, int)
    return GameConfig(
        rounds_T=cfg(args, config, "rounds_t", 10, int),
        reviews_R=cfg(args, config, "reviews_r", 7, int),
        quality_threshold_tau=cfg(args, config, "tau", 8.0, float),
        stage_points_target=tuple([target] * n_stages),
    )


def _train_config(args, config: dict) -> TrainConfig:
    return TrainConfig(
        learning_rate=cfg(args, config, "learning_rate", 4e-4, float),
        epochs=cfg(args, config, "epochs", 20, int),
        batch_size=cfg(args, config, "batch_size", 32, int),
        seed=cfg(args, config, "seed", 0, int),
        hidden_dim=cfg(args, config, "hidden_dim", 64, int),
        n_layers=cfg(args, config, "n_layers", 2, int),
    )


def _load_corpus(args, config: dict) -> Corpus:
    return load_corpus(
        args.corpus,
        reviews_R=cfg(args, config, "reviews_r", 7, int),
        tau=cfg(args, config, "tau", 8.0, float),
    )


def _oracle_table(args, config: dict, corpus: Corpus):
    spread = cfg(args, config, "spread", 0.0, float)
    backend = StubScoreBackend.from_corpus(corpus.hotels, spread=spread)
    return build_oracle_table(
        corpus.hotels, backend, cache_path=getattr(args, "oracle_cache", None)
    )


def _write_metrics_lines(path: str, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def _print_table(rows: Sequence[dict]) -> None:
    if not rows:
        return
    keys = list(rows[0])
    widths = {k: max(len(str(k)), *(len(_fmt(r.get(k))) for r in rows)) for k in keys}
    print("  ".join(str(k).ljust(widths[k]) for k in keys))
    for row in rows:
        print("  ".join(_fmt(row.get(k)).ljust(widths[k]) for k in keys))


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


# --- command implementations ------------------------------------------------------


def cmd_corpus(args, config: dict, argv: Sequence[str]) -> int:
    if args.corpus_cmd == "validate":
        corpus = load_corpus(
            args.path,
            reviews_R=cfg(args, config, "reviews_r", 7, int),
            tau=cfg(args, config, "tau", 8.0, float),
        )
        print(f"hotels: {len(corpus)}")
        print(f"high_quality_fraction: {corpus.high_quality_fraction():.4f}")
        return 0
    if args.corpus_cmd == "synth":
        started = time.time()
        seed = cfg(args, config, "seed", 0, int)
        rng = np.random.default_rng(seed)
        corpus = synth_corpus(
            args.n,
            rng,
            high_fraction=cfg(args, config, "high_fraction", 0.5, float),
            reviews_R=cfg(args, config, "reviews_r", 7, int),
            tau=cfg(args, config, "tau", 8.0, float),
        )
        save_corpus(corpus, args.out)
        write_manifest(
            args.out, argv, {"n": args.n}, {"seed": seed}, [], [args.out],
            time.time() - started,
        )
        print(f"wrote {len(corpus)} hotels to {args.out}")
        return 0
    raise SystemExit(f"unknown corpus subcommand {args.corpus_cmd!r}")


def cmd_generate(args, config: dict, argv: Sequence[str]) -> int:
    started = time.time()
    seed = cfg(args, config, "seed", 0, int)
    game_config = _game_config(args, config)
    corpus = _load_corpus(args, config)
    oracle = None
    if args.kind in ("sentiment", "threshold"):
        spread = cfg(args, config, "spread", 0.0, float)
        backend = StubScoreBackend.from_corpus(corpus.hotels, spread=spread)
        oracle = ScoreOracle(backend).distribution_for_text
    client = None
    if args.kind == "llm":
        client = ChatClient(
            model=args.model_name,
            cache_dir=cfg(args, config, "cache_dir", None),
            cache_mode=cfg(args, config, "cache_mode", "auto"),
        )
    data = generate_players(
        args.kind,
        args.n_players,
        corpus,
        game_config,
        seed,
        args.out,
        personas_on=bool(args.personas),
        oracle=oracle,
        llm_client=client,
        model_name=args.model_name or "",
        resume=bool(args.resume),
        workers=cfg(args, config, "workers", 1, int),
    )
    write_manifest(
        args.out,
        argv,
        {"kind": args.kind, "n_players": args.n_players, "personas": bool(args.personas)},
        {"seed": seed},
        [args.corpus],
        [args.out],
        time.time() - started,
    )
    print(f"wrote {len(data)} games / {data.n_decisions} decisions to {args.out}")
    return 0


def cmd_dataset(args, config: dict, argv: Sequence[str]) -> int:
    if args.dataset_cmd == "stats":
        data = dataset_io.load(args.path)
        players = data.player_ids()
        print(f"provenance: {data.provenance}")
        print(f"players: {len(players)}")
        print(f"games: {len(data)}")
        print(f"decisions: {data.n_decisions}")
        return 0
    if args.dataset_cmd == "split":
        started = time.time()
        seed = cfg(args, config, "seed", 0, int)
        data = dataset_io.load(args.data)
        splits = dataset_io.split_by_player(
            data,
            test_players=args.test_players,
            n_splits=args.n_splits,
            rng=np.random.default_rng(seed),
        )
        os.makedirs(args.out_dir, exist_ok=True)
        outputs = []
        for i, (train, test) in enumerate(splits):
            train_path = os.path.join(args.out_dir, f"split{i:03d}.train.jsonl")
            test_path = os.path.join(args.out_dir, f"split{i:03d}.test.jsonl")
            dataset_io.save(train, train_path)
            dataset_io.save(test, test_path)
            outputs += [train_path, test_path]
        write_manifest(
            os.path.join(args.out_dir, "splits"),
            argv,
            {"test_players": args.test_players, "n_splits": args.n_splits},
            {"seed": seed},
            [args.data],
            outputs,
            time.time() - started,
        )
        print(f"wrote {len(splits)} splits to {args.out_dir}")
        return 0
    if args.dataset_cmd == "mix":
        started = time.time()
        mixed = dataset_io.mix(dataset_io.load(args.a), dataset_io.load(args.b))
        dataset_io.save(mixed, args.out)
        write_manifest(
            args.out, argv, {}, {}, [args.a, args.b], [args.out], time.time() - started
        )
        print(f"wrote {len(mixed)} games ({len(mixed.player_ids())} players) to {args.out}")
        return 0
    if args.dataset_cmd == "ingest-human":
        started = time.time()
        columns = json.loads(args.columns) if args.columns else None
        data = dataset_io.ingest_human(args.src, columns=columns)
        dataset_io.save(data, args.out)
        write_manifest(
            args.out, argv, {}, {}, [args.src], [args.out], time.time() - started
        )
        print(
            f"ingested {len(data.player_ids())} players, {data.n_decisions} decisions"
        )
        return 0
    raise SystemExit(f"unknown dataset subcommand {args.dataset_cmd!r}")


def cmd_train(args, config: dict, argv: Sequence[str]) -> int:
    started = time.time()
    game_config = _game_config(args, config)
    train_config = _train_config(args, config)
    corpus = _load_corpus(args, config)
    data = dataset_io.load(args.data)
    oracle_table = _oracle_table(args, config, corpus)
    model = train_on_dataset(data, oracle_table, game_config, train_config, args.model)
    save_model(model, args.out)
    write_manifest(
        args.out,
        argv,
        {"model": args.model, **train_config.__dict__},
        {"seed": train_config.seed},
        [args.data, args.corpus],
        [args.out],
        time.time() - started,
    )
    print(f"trained {args.model} model on {len(data)} games -> {args.out}")
    return 0


def cmd_predict(args, config: dict, argv: Sequence[str]) -> int:
    started = time.time()
    game_config = _game_config(args, config)
    corpus = _load_corpus(args, config)
    data = dataset_io.load(args.data)
    oracle_table = _oracle_table(args, config, corpus)
    model = load_model(args.model)
    probs, truths, pairs = predict_dataset(model, data, oracle_table, game_config)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("dm_id\texpert\ttruth\tprobability\n")
        for (dm_id, expert), truth, prob in zip(pairs, truths, probs):
            fh.write(f"{dm_id}\t{expert}\t{int(truth)}\t{prob!r}\n")
    write_manifest(
        args.out, argv, {}, {}, [args.model, args.data, args.corpus], [args.out],
        time.time() - started,
    )
    print(f"wrote {len(probs)} predictions to {args.out}")
    return 0


def cmd_eval(args, config: dict, argv: Sequence[str]) -> int:
    started = time.time()
    if args.winning_rates:
        data = dataset_io.load(args.data)
        rates = expert_winning_rates(data)
        records = [
            {
                "metric": "winning_rate",
                "expert": expert,
                "go_rate": go,
                "go_rate_given_low_quality": low,
            }
            for expert, (go, low) in sorted(rates.items())
        ]
        if args.out:
            _write_metrics_lines(args.out, records)
        _print_table(records)
        return 0

    if not args.model or not args.corpus:
        raise SystemExit("eval needs --model and --corpus (or --winning-rates)")
    seed = cfg(args, config, "seed", 0, int)
    game_config = _game_config(args, config)
    corpus = _load_corpus(args, config)
    data = dataset_io.load(args.data)
    oracle_table = _oracle_table(args, config, corpus)
    model = load_model(args.model)
    probs, truths, pairs = predict_dataset(model, data, oracle_table, game_config)
    report = evaluate(probs, truths, pairs, rng=np.random.default_rng(seed))
    records = [
        {"metric": "overall_accuracy", "value": report.overall_accuracy},
        {"metric": "ece", "value": report.ece},
        {"metric": "ci95_lo", "value": report.ci95[0] if report.ci95 else None},
        {"metric": "ci95_hi", "value": report.ci95[1] if report.ci95 else None},
        {"metric": "n_decisions", "value": report.n_decisions},
        {"metric": "n_players", "value": report.n_players},
    ]
    if args.per_expert:
        for expert, acc in sorted(report.per_expert_accuracy.items()):
            records.append({"metric": "per_expert_accuracy", "expert": expert, "value": acc})
    if args.out:
        _write_metrics_lines(args.out, records)
        write_manifest(
            args.out, argv, {}, {"seed": seed},
            [args.model, args.data, args.corpus], [args.out],
            time.time() - started,
        )
    _print_table([{"metric": r["metric"], "value": r.get("value", r.get("expert"))} for r in records])
    return 0


def cmd_experiment(args, config: dict, argv: Sequence[str]) -> int:
    if args.experiment_cmd == "grids":
        print(json.dumps(RECIPE_GRIDS, indent=2, sort_keys=True))
        return 0
    started = time.time()
    game_config = _game_config(args, config)
    train_config = _train_config(args, config)
    corpus = _load_corpus(args, config)
    oracle_table = _oracle_table(args, config, corpus)
    if args.experiment_cmd == "global-vs-local":
        train_data = dataset_io.load(args.train)
        test_data = dataset_io.load(args.test)
        global_acc, local_acc = global_vs_local(
            args.expert, train_data, test_data, oracle_table, game_config,
            train_config, kind=args.model,
        )
        records = [
            {"metric": "global_accuracy", "expert": args.expert, "value": global_acc},
            {"metric": "local_accuracy", "expert": args.expert, "value": local_acc},
        ]
        if args.out:
            _write_metrics_lines(args.out, records)
            write_manifest(
                args.out, argv, {"expert": args.expert}, {"seed": train_config.seed},
                [args.train, args.test, args.corpus], [args.out],
                time.time() - started,
            )
        _print_table(records)
        return 0
    if args.experiment_cmd == "sweep":
        sizes = [int(s) for s in args.sizes.split(",") if s]
        train_data = dataset_io.load(args.train)
        test_data = dataset_io.load(args.test)
        rows = sweep(
            sizes, train_data, test_data, oracle_table, game_config, train_config,
            kind=args.model,
        )
        if args.out:
            _write_metrics_lines(args.out, rows)
            write_manifest(
                args.out, argv, {"sizes": sizes}, {"seed": train_config.seed},
                [args.train, args.test, args.corpus], [args.out],
                time.time() - started,
            )
        _print_table(rows)
        return 0
    raise SystemExit(f"unknown experiment subcommand {args.experiment_cmd!r}")


def cmd_serve(args, config: dict, argv: Sequence[str]) -> int:
    import uvicorn

    from .service import create_app

    game_config = _game_config(args, config)
    corpus = _load_corpus(args, config)
    app = create_app(
        corpus.hotels,
        config=game_config,
        out_dataset=args.out_dataset,
        seed=cfg(args, config, "seed", 0, int),
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persuasim",
        description="Persuasion-game simulation, data generation, and choice prediction",
    )
    parser.add_argument("--config", help="key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, corpus=False, train=False):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--reviews-r", dest="reviews_r", type=int, default=None)
        p.add_argument("--rounds-t", dest="rounds_t", type=int, default=None)
        p.add_argument("--points-target", dest="points_target", type=int, default=None)
        p.add_argument("--n-stages", dest="n_stages", type=int, default=None)
        if corpus:
            p.add_argument("--corpus", required=True)
            p.add_argument("--spread", type=float, default=None)
            p.add_argument("--oracle-cache", dest="oracle_cache", default=None)
        if train:
            p.add_argument("--model", choices=("lstm", "baseline"), default="lstm")
            p.add_argument("--epochs", type=int, default=None)
            p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
            p.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
            p.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=None)
            p.add_argument("--n-layers", dest="n_layers", type=int, default=None)

    p = sub.add_parser("corpus", help="validate or synthesize a hotel corpus")
    corpus_sub = p.add_subparsers(dest="corpus_cmd", required=True)
    pv = corpus_sub.add_parser("validate")
    pv.add_argument("path")
    add_common(pv)
    ps = corpus_sub.add_parser("synth")
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--out", required=True)
    ps.add_argument("--high-fraction", dest="high_fraction", type=float, default=None)
    add_common(ps)

    p = sub.add_parser("generate", help="generate an interaction dataset")
    p.add_argument("--kind", choices=GENERATOR_KINDS, required=True)
    p.add_argument("--n-players", dest="n_players", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model-name", dest="model_name", default=None)
    p.add_argument("--personas", action="store_true", default=False)
    p.add_argument("--resume", action="store_true", default=False)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--cache-dir", dest="cache_dir", default=None)
    p.add_argument("--cache-mode", dest="cache_mode", default=None)
    add_common(p, corpus=True)

    p = sub.add_parser("dataset", help="dataset utilities")
    ds_sub = p.add_subparsers(dest="dataset_cmd", required=True)
    pd = ds_sub.add_parser("stats")
    pd.add_argument("path")
    pd = ds_sub.add_parser("split")
    pd.add_argument("--data", required=True)
    pd.add_argument("--test-players", dest="test_players", type=int, default=100)
    pd.add_argument("--n-splits", dest="n_splits", type=int, default=50)
    pd.add_argument("--out-dir", dest="out_dir", required=True)
    add_common(pd)
    pd = ds_sub.add_parser("mix")
    pd.add_argument("--a", required=True)
    pd.add_argument("--b", required=True)
    pd.add_argument("--out", required=True)
    pd = ds_sub.add_parser("ingest-human")
    pd.add_argument("--src", required=True)
    pd.add_argument("--out", required=True)
    pd.add_argument("--columns", help="JSON remapping of source column names")

    p = sub.add_parser("train", help="train a predictor")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    add_common(p, corpus=True, train=True)

    p = sub.add_parser("predict", help="per-decision probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    add_common(p, corpus=True)

    p = sub.add_parser("eval", help="evaluate predictions or datasets")
    p.add_argument("--model")
    p.add_argument("--data", required=True)
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--per-expert", dest="per_expert", action="store_true", default=False)
    p.add_argument("--winning-rates", dest="winning_rates", action="store_true", default=False)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--reviews-r", dest="reviews_r", type=int, default=None)
    p.add_argument("--rounds-t", dest="rounds_t", type=int, default=None)
    p.add_argument("--points-target", dest="points_target", type=int, default=None)
    p.add_argument("--n-stages", dest="n_stages", type=int, default=None)
    p.add_argument("--spread", type=float, default=None)
    p.add_argument("--oracle-cache", dest="oracle_cache", default=None)

    p = sub.add_parser("experiment", help="experiment recipes")
    exp_sub = p.add_subparsers(dest="experiment_cmd", required=True)
    exp_sub.add_parser("grids", help="print the full-scale recipe grids")
    pe = exp_sub.add_parser("global-vs-local")
    pe.add_argument("--expert", required=True)
    pe.add_argument("--train", required=True)
    pe.add_argument("--test", required=True)
    pe.add_argument("--out")
    add_common(pe, corpus=True, train=True)
    pe = exp_sub.add_parser("sweep")
    pe.add_argument("--sizes", required=True, help="comma-separated player counts")
    pe.add_argument("--train", required=True)
    pe.add_argument("--test", required=True)
    pe.add_argument("--out")
    add_common(pe, corpus=True, train=True)

    p = sub.add_parser("serve", help="run the live-play HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--out-dataset", dest="out_dataset", default=None)
    add_common(p, corpus=True)

    return parser


COMMANDS = {
    "corpus": cmd_corpus,
    "generate": cmd_generate,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    config = load_config_file(args.config) if args.config else {}
    return COMMANDS[args.command](args, config, ["persuasim", *argv])


if __name__ == "__main__":
    sys.exit(main())
