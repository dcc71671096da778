"""Scenario runner: pre-train on source, adapt to target (RL-DA or SL-DA),
evaluate UAR on the held-out test sets.

RL adaptation drives the DQN over the scenario's utterance stream. Because
the stream's next state never depends on the action, Q-values for action
selection are precomputed for the whole (finite) stream state set in one
batched forward and invalidated whenever a training update changes the
online net; this is exactly equivalent to a per-step forward, just faster.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rlser.agent.dqn import DQNAgent
from rlser.agent.policy import select_action
from rlser.agent.replay import Transition
from rlser.agent.telemetry import TelemetryLog
from rlser.corpus.manifest import Corpus, Utterance
from rlser.corpus.split import CompositionScheme, DomainAssignment, balance_classes, compose_domains
from rlser.env.emotion_env import EmotionEnv, StreamConfig, StreamOrdering
from rlser.env.features import FeatureCache, NoiseConfig
from rlser.experiments.config import Method, ScenarioConfig, Scheme
from rlser.experiments.evaluate import RunResult, SubsetResult, UARReport, evaluate_uar
from rlser.experiments.pretrain import pretrain
from rlser.nn.checkpoint import save_checkpoint
from rlser.nn.network import QNetwork


@dataclass
class _SeedSetup:
    assignment: DomainAssignment
    pretrain_set: list[Utterance]
    source_test: list[Utterance]
    target_test: list[Utterance]
    clean_features: FeatureCache
    stream_features: FeatureCache
    target_test_features: FeatureCache


class _StreamQTable:
    """Q-values for every distinct stream state under the current online
    net; rebuilt lazily after each training update."""

    def __init__(self, net: QNetwork, env: EmotionEnv):
        self.net = net
        self.env = env
        self._table: dict[str, np.ndarray] = {}

    def invalidate(self) -> None:
        self._table.clear()

    def _rebuild(self) -> None:
        utts = self.env.utterances
        feats = np.stack([self.env.features.get(u) for u in utts])
        q = self.net.forward(feats, train=False)
        self._table = {self.env.features.state_key(u): q[i] for i, u in enumerate(utts)}

    def q_for(self, state_key: str) -> np.ndarray:
        if not self._table:
            self._rebuild()
        return self._table[state_key]


def _materialize(cfg: ScenarioConfig, workdir: Path) -> tuple[Corpus, Corpus, Corpus | None]:
    corpora_dir = workdir / "corpora"
    source = cfg.source.materialize(corpora_dir)
    target = cfg.target.materialize(corpora_dir)
    noise = cfg.noise.materialize(corpora_dir) if cfg.noise is not None else None
    return source, target, noise


def _compose(cfg: ScenarioConfig, source: Corpus, target: Corpus, seed: int) -> DomainAssignment:
    scheme = CompositionScheme.MIXED50 if cfg.scheme is Scheme.MIXED50 else CompositionScheme.SEPARATE
    return compose_domains(source, target, scheme, seed, cfg.test_fraction)


def _setup_seed(cfg: ScenarioConfig, source: Corpus, target: Corpus, noise: Corpus | None, seed: int) -> _SeedSetup:
    assignment = _compose(cfg, source, target, seed)
    pretrain_set = list(assignment.pretrain_set)
    if cfg.balance_pretrain:
        pretrain_set = balance_classes(pretrain_set, rng_seed=seed)

    source_ids = {u.id for u in source.utterances}
    source_test = [u for u in assignment.test_set if u.corpus_id == source.corpus_id and u.id in source_ids]
    target_test = [u for u in assignment.test_set if u.corpus_id == target.corpus_id]

    clean = FeatureCache(seed=seed)
    if cfg.scheme is Scheme.LIVE_FEED_NOISE:
        noisy = FeatureCache(noise=NoiseConfig(noise, cfg.snr_db), seed=seed)
        # the noisy target is the deployed domain: the RL stream and the
        # target-test evaluation both carry it
        return _SeedSetup(assignment, pretrain_set, source_test, target_test, clean, noisy, noisy)
    return _SeedSetup(assignment, pretrain_set, source_test, target_test, clean, clean, clean)


def _build_net(cfg: ScenarioConfig, seed: int) -> QNetwork:
    return QNetwork(
        seed=seed,
        conv_filters=cfg.network.conv_filters,
        lstm_units=cfg.network.lstm_units,
        dense_units=cfg.network.dense_units,
        dropout=cfg.network.dropout,
    )


def _evaluate_subsets(net, setup: _SeedSetup) -> dict[str, SubsetResult]:
    out: dict[str, SubsetResult] = {}
    pieces = {
        "source": (setup.source_test, setup.clean_features),
        "target": (setup.target_test, setup.target_test_features),
    }
    for name, (subset, feats) in pieces.items():
        if not subset:
            continue
        matrix, uar = evaluate_uar(net, subset, feats)
        out[name] = SubsetResult(
            name=name,
            uar=uar,
            per_class_recall=[round(float(r), 4) for r in matrix.per_class_recall()],
            n_examples=len(subset),
        )
    combined = setup.source_test + setup.target_test
    if setup.target_test_features is setup.clean_features and combined:
        matrix, uar = evaluate_uar(net, combined, setup.clean_features)
        out["combined"] = SubsetResult(
            "combined", uar, [round(float(r), 4) for r in matrix.per_class_recall()], len(combined)
        )
    return out


def _rl_stream_env(cfg: ScenarioConfig, setup: _SeedSetup, seed: int) -> EmotionEnv:
    rl_set = list(setup.assignment.rl_set)
    if cfg.scheme in (Scheme.LIVE_FEED, Scheme.LIVE_FEED_NOISE):
        stream_cfg = StreamConfig(
            ordering=StreamOrdering.ENDLESS_RANDOM,
            episode_length=cfg.episode_length,
        )
    else:
        stream_cfg = StreamConfig(ordering=StreamOrdering.SHUFFLED_EPOCH)
    return EmotionEnv(rl_set, seed=seed, config=stream_cfg, features=setup.stream_features)


def _run_rl_adaptation(
    cfg: ScenarioConfig,
    net: QNetwork,
    setup: _SeedSetup,
    seed: int,
    telemetry: TelemetryLog,
) -> int:
    agent = DQNAgent(net, cfg.agent, seed=seed)
    env = _rl_stream_env(cfg, setup, seed)
    policy = cfg.policy()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xAC7]))
    qtable = _StreamQTable(net, env)

    state = env.reset()
    for step in range(cfg.rl_steps):
        q = qtable.q_for(state.state_key)
        action = select_action(policy, q, rng, step=step)
        reward, next_state, done = env.step(action)
        agent.observe(
            Transition(
                state=state.features,
                action=action,
                reward=reward,
                next_state=None if done else next_state.features,
                terminal=done,
                state_key=state.state_key,
                next_state_key=None if done else next_state.state_key,
            )
        )
        loss = None
        if agent.due_for_update():
            loss = agent.train_on_batch()
            qtable.invalidate()
        telemetry.record(step, env.episode, reward, loss, policy.epsilon_at(step))
        state = next_state if not done else env.reset()
    telemetry.flush()
    return cfg.rl_steps


def _run_sl_adaptation(cfg: ScenarioConfig, net: QNetwork, setup: _SeedSetup, seed: int) -> int:
    """Supervised fine-tune on the scheme's adaptation set; the live-feed
    baseline is the static source model (no target training at all)."""
    if cfg.scheme in (Scheme.LIVE_FEED, Scheme.LIVE_FEED_NOISE):
        return 0
    rl_set = balance_classes(list(setup.assignment.rl_set), rng_seed=seed + 1)
    history = pretrain(
        rl_set,
        setup.stream_features,
        net,
        epochs=cfg.sl_epochs(),
        seed=seed + 1,
        learning_rate=cfg.agent.learning_rate,
    )
    return history.epochs_run


def run_scenario_method(
    cfg: ScenarioConfig,
    method: Method,
    workdir: str | Path,
) -> UARReport:
    """All seeds of one (scenario, method) pair."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    source, target, noise = _materialize(cfg, workdir)
    report = UARReport(scenario=cfg.name, method=method.value, scheme=cfg.scheme.value, seeds=list(cfg.seeds))

    for seed in cfg.seeds:
        started = time.perf_counter()
        setup = _setup_seed(cfg, source, target, noise, seed)
        test_ids = {u.qualified_id for u in setup.assignment.test_set}
        train_ids = {u.qualified_id for u in setup.pretrain_set} | {
            u.qualified_id for u in setup.assignment.rl_set
        }
        if test_ids & train_ids:
            raise RuntimeError(f"test leakage: {sorted(test_ids & train_ids)[:3]}")
        net = _build_net(cfg, seed)
        history = pretrain(
            setup.pretrain_set,
            setup.clean_features,
            net,
            epochs=cfg.pretrain_epochs,
            seed=seed,
            learning_rate=cfg.agent.learning_rate,
        )
        ckpt_path = workdir / f"base-{cfg.name}-seed{seed}.ckpt"
        save_checkpoint(ckpt_path, net, metadata={"stage": "pretrained", "seed": seed, "scenario": cfg.name})
        frozen_base = _evaluate_subsets(net, setup)

        if method is Method.RL_DA:
            telemetry = TelemetryLog(workdir / f"telemetry-{cfg.name}-seed{seed}.jsonl")
            steps = _run_rl_adaptation(cfg, net, setup, seed, telemetry) if cfg.rl_steps > 0 else 0
            telemetry.close()
        else:
            steps = _run_sl_adaptation(cfg, net, setup, seed)

        subsets = _evaluate_subsets(net, setup)
        report.runs.append(
            RunResult(
                seed=seed,
                method=method.value,
                scheme=cfg.scheme.value,
                subsets=subsets,
                frozen_base=frozen_base,
                steps_consumed=steps,
                wall_clock_s=time.perf_counter() - started,
                pretrain_epochs_run=history.epochs_run,
            )
        )
    return report


def run_rl_da(cfg: ScenarioConfig, workdir: str | Path) -> UARReport:
    return run_scenario_method(cfg, Method.RL_DA, workdir)


def run_sl_da(cfg: ScenarioConfig, workdir: str | Path) -> UARReport:
    return run_scenario_method(cfg, Method.SL_DA, workdir)
