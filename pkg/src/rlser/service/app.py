"""HTTP service: emotion inference on uploaded WAV clips, thumbs up/down
feedback driving online adaptation, metrics, and health.

Endpoints: POST /infer (raw audio/wav body), POST /feedback (JSON),
GET /metrics, GET /healthz. When a console build directory is configured its
static assets are served at /.
"""

from __future__ import annotations

import logging

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from rlser.dsp.pipeline import extract_features
from rlser.dsp.wav import WavError, decode_wav
from rlser.env.feedback import (
    DuplicateJudgmentError,
    ExpiredInferenceError,
    FeedbackQueueFullError,
    HumanFeedbackChannel,
    UnknownInferenceError,
)
from rlser.nn.checkpoint import load_checkpoint, save_checkpoint
from rlser.nn.network import QNetwork
from rlser.service.config import MAX_UPLOAD_BYTES, ServiceConfig
from rlser.service.state import ServiceState, emotion_name, utc_now_iso
from rlser.service.trainer import OnlineTrainer

log = logging.getLogger(__name__)


class FeedbackBody(BaseModel):
    inference_id: str
    judgment: str  # "up" | "down"


def _load_or_init_model(config: ServiceConfig) -> tuple[QNetwork, int]:
    if config.checkpoint_path.exists():
        net, _, meta = load_checkpoint(config.checkpoint_path)
        version = int(meta.get("model_version", 0))
        log.info("restored checkpoint %s at model version %d", config.checkpoint_path, version)
        return net, version
    net = QNetwork(seed=config.trainer_seed)
    save_checkpoint(config.checkpoint_path, net, metadata={"stage": "init", "model_version": 0})
    return net, 0


def create_app(config: ServiceConfig | None = None, net: QNetwork | None = None) -> FastAPI:
    """Build the service; pass an explicit net to skip checkpoint loading."""
    config = config or ServiceConfig.from_env()
    if net is None:
        net, version = _load_or_init_model(config)
    else:
        version = 0
        save_checkpoint(config.checkpoint_path, net, metadata={"stage": "init", "model_version": 0})

    channel = HumanFeedbackChannel(
        timeout_s=config.feedback_timeout_s,
        queue_capacity=config.feedback_queue_capacity,
    )
    state = ServiceState(net, version, channel)
    trainer = OnlineTrainer(net.clone(), state, config)
    trainer.model_version = version

    app = FastAPI(title="rlser", docs_url=None, redoc_url=None)
    app.state.service_state = state
    app.state.trainer = trainer
    app.state.config = config

    @app.on_event("startup")
    def _start_trainer():
        trainer.start()

    @app.on_event("shutdown")
    def _stop_trainer():
        trainer.stop()

    @app.post("/infer")
    async def infer(request: Request):
        body = await request.body()
        if len(body) > MAX_UPLOAD_BYTES:
            return JSONResponse({"error": "payload too large"}, status_code=413)
        if not body:
            return JSONResponse({"error": "empty body"}, status_code=400)
        snapshot = state.current_snapshot()
        if snapshot.net is None:
            return JSONResponse({"error": "no model loaded"}, status_code=503)
        try:
            waveform = decode_wav(body)
            features = extract_features(waveform)
        except (WavError, ValueError) as exc:
            return JSONResponse({"error": f"undecodable audio: {exc}"}, status_code=400)

        q = snapshot.net.forward(features[None])[0]
        action = int(np.argmax(q))
        inference_id = state.new_inference_id()
        state.record_inference(inference_id, features, action)
        state.sweep_expired()
        return {
            "inference_id": inference_id,
            "emotion": emotion_name(action),
            "q_values": [float(v) for v in q],
            "model_version": snapshot.version,
            "timestamp": utc_now_iso(),
        }

    @app.post("/feedback")
    def feedback(body: FeedbackBody):
        if body.judgment not in ("up", "down"):
            return JSONResponse({"error": "judgment must be 'up' or 'down'"}, status_code=422)
        state.sweep_expired()
        try:
            reward = channel.resolve(body.inference_id, body.judgment)
        except UnknownInferenceError:
            return JSONResponse({"error": "unknown inference id"}, status_code=404)
        except DuplicateJudgmentError:
            return JSONResponse({"error": "already judged"}, status_code=409)
        except ExpiredInferenceError:
            return JSONResponse({"error": "inference expired"}, status_code=410)
        except FeedbackQueueFullError:
            return JSONResponse({"error": "feedback queue full"}, status_code=503)
        state.record_feedback(reward)
        trainer.notify()
        return {"accepted": True, "reward": reward}

    @app.get("/metrics")
    def metrics():
        state.sweep_expired()
        with state.metrics_lock:
            return state.metrics.snapshot()

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "model_version": state.current_snapshot().version}

    if config.static_dir is not None and config.static_dir.exists():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="console")

    return app
