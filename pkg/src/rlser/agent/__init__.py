from rlser.agent.dqn import AgentConfig, DQNAgent, compute_targets, dqn_loss
from rlser.agent.policy import PolicyConfig, PolicyKind, boltzmann_probabilities, select_action
from rlser.agent.replay import ReplayBuffer, Transition
from rlser.agent.telemetry import TelemetryLog

__all__ = [
    "AgentConfig",
    "DQNAgent",
    "PolicyConfig",
    "PolicyKind",
    "ReplayBuffer",
    "TelemetryLog",
    "Transition",
    "boltzmann_probabilities",
    "compute_targets",
    "dqn_loss",
    "select_action",
]
