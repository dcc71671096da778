"""Declarative scenario configuration (YAML).

See configs/desk_separate.yaml for a commented example. A corpus reference
is either {manifest: <path>} for real data or {synthetic: {...}, seed: N}
for generated desk-scale corpora; noise references additionally accept
{synthetic_noise: {...}, seed: N}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml

from rlser.agent.dqn import AgentConfig
from rlser.agent.policy import PolicyConfig
from rlser.corpus.manifest import Corpus, load_manifest
from rlser.corpus.synthetic import (
    DomainShift,
    SyntheticSpec,
    generate_noise_corpus,
    generate_synthetic_corpus,
)


class Scheme(str, Enum):
    SEPARATE = "separate"
    MIXED50 = "mixed50"
    LIVE_FEED = "live_feed"
    LIVE_FEED_NOISE = "live_feed_noise"


class Method(str, Enum):
    RL_DA = "rl_da"
    SL_DA = "sl_da"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusRef:
    manifest: Path | None = None
    synthetic: SyntheticSpec | None = None
    synthetic_noise: dict | None = None
    seed: int = 0

    def materialize(self, workdir: Path) -> Corpus:
        if self.manifest is not None:
            return load_manifest(self.manifest)
        if self.synthetic is not None:
            return generate_synthetic_corpus(self.synthetic, self.seed, workdir / self.synthetic.corpus_id)
        if self.synthetic_noise is not None:
            params = dict(self.synthetic_noise)
            corpus_id = params.pop("corpus_id", "noisebeds")
            return generate_noise_corpus(corpus_id, self.seed, workdir / corpus_id, **params)
        raise ConfigError("corpus reference needs one of: manifest, synthetic, synthetic_noise")


@dataclass(frozen=True)
class NetworkSize:
    conv_filters: tuple[int, int] = (32, 64)
    lstm_units: int = 16
    dense_units: int = 256
    dropout: float = 0.3


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    scheme: Scheme
    source: CorpusRef
    target: CorpusRef
    methods: tuple[Method, ...] = (Method.RL_DA, Method.SL_DA)
    noise: CorpusRef | None = None
    snr_db: float = -5.0
    test_fraction: float = 0.2
    balance_pretrain: bool = True
    pretrain_epochs: int = 20
    finetune_epochs: int | None = None  # SL-DA target pass; defaults to pretrain_epochs
    rl_steps: int = 5000
    seeds: tuple[int, ...] = (11, 22, 33)
    network: NetworkSize = field(default_factory=NetworkSize)
    agent: AgentConfig = field(default_factory=AgentConfig)
    policy_kind: str = "max_boltzmann"
    temperature: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_decay_fraction: float = 0.2
    episode_length: int = 256

    def __post_init__(self):
        if self.scheme is Scheme.LIVE_FEED_NOISE and self.noise is None:
            raise ConfigError("live_feed_noise needs a noise corpus reference")
        if len(self.seeds) < 1:
            raise ConfigError("at least one seed (repeats >= 1)")
        if self.rl_steps < 0 or self.pretrain_epochs < 0:
            raise ConfigError("budgets must be non-negative")

    def policy(self) -> PolicyConfig:
        decay = max(1, int(round(self.rl_steps * self.epsilon_decay_fraction)))
        return PolicyConfig(
            kind=self.policy_kind,
            temperature=self.temperature,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            epsilon_decay_steps=decay,
        )

    def sl_epochs(self) -> int:
        return self.pretrain_epochs if self.finetune_epochs is None else self.finetune_epochs


def _corpus_ref(raw: dict, base: Path, what: str) -> CorpusRef:
    if not isinstance(raw, dict):
        raise ConfigError(f"{what}: expected a mapping")
    seed = int(raw.get("seed", 0))
    if "manifest" in raw:
        path = Path(raw["manifest"])
        if not path.is_absolute():
            path = base / path
        return CorpusRef(manifest=path, seed=seed)
    if "synthetic" in raw:
        params = dict(raw["synthetic"])
        shift = params.pop("shift", None)
        if shift is not None:
            params["shift"] = DomainShift(**shift)
        try:
            return CorpusRef(synthetic=SyntheticSpec(**params), seed=seed)
        except TypeError as exc:
            raise ConfigError(f"{what}.synthetic: {exc}") from exc
    if "synthetic_noise" in raw:
        return CorpusRef(synthetic_noise=dict(raw["synthetic_noise"]), seed=seed)
    raise ConfigError(f"{what}: needs manifest, synthetic, or synthetic_noise")


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("scenario file must be a mapping")
    base = path.resolve().parent

    try:
        scheme = Scheme(raw["scheme"])
    except KeyError:
        raise ConfigError("missing required field: scheme") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    methods = tuple(Method(m) for m in raw.get("methods", ["rl_da", "sl_da"]))

    net_raw = dict(raw.get("network", {}))
    if "conv_filters" in net_raw:
        net_raw["conv_filters"] = tuple(net_raw["conv_filters"])
    network = NetworkSize(**net_raw)
    agent = AgentConfig(**raw.get("agent", {}))
    policy_raw = dict(raw.get("policy", {}))

    kwargs = dict(
        name=str(raw.get("name", path.stem)),
        scheme=scheme,
        methods=methods,
        source=_corpus_ref(raw["source"], base, "source"),
        target=_corpus_ref(raw["target"], base, "target"),
        noise=_corpus_ref(raw["noise"], base, "noise") if raw.get("noise") else None,
        snr_db=float(raw.get("snr_db", -5.0)),
        test_fraction=float(raw.get("test_fraction", 0.2)),
        balance_pretrain=bool(raw.get("balance_pretrain", True)),
        pretrain_epochs=int(raw.get("pretrain_epochs", 20)),
        finetune_epochs=None if raw.get("finetune_epochs") is None else int(raw["finetune_epochs"]),
        rl_steps=int(raw.get("rl_steps", 5000)),
        seeds=tuple(int(s) for s in raw.get("seeds", (11, 22, 33))),
        network=network,
        agent=agent,
        episode_length=int(raw.get("episode_length", 256)),
    )
    for key in ("kind", "temperature", "epsilon_start", "epsilon_end", "epsilon_decay_fraction"):
        if key in policy_raw:
            target_key = "policy_kind" if key == "kind" else key
            kwargs[target_key] = policy_raw[key]
    return ScenarioConfig(**kwargs)
