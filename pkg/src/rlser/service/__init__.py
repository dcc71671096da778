from rlser.service.app import create_app
from rlser.service.config import ENV_PREFIX, MAX_UPLOAD_BYTES, ServiceConfig
from rlser.service.state import Metrics, ModelSnapshot, ServiceState
from rlser.service.trainer import OnlineTrainer

__all__ = [
    "ENV_PREFIX",
    "MAX_UPLOAD_BYTES",
    "Metrics",
    "ModelSnapshot",
    "OnlineTrainer",
    "ServiceConfig",
    "ServiceState",
    "create_app",
]
