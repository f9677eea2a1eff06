"""
FastAPI REST API for serving predictions from a trained checkpoint.

Provides endpoints for:
- Model metadata (dimensions, class names, hyperparameters)
- Batch prediction on raw or already-normalized features
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import MgpllError
from ..model.checkpoint import load_checkpoint
from ..model.networks import MgpllModel, predict

try:
    from fastapi import FastAPI, HTTPException
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel
    HAS_FASTAPI = True
except ImportError:
    HAS_FASTAPI = False

logger = logging.getLogger(__name__)


# Pydantic models for API requests and responses
if HAS_FASTAPI:

    class ModelInfo(BaseModel):
        n_features: int
        n_classes: int
        class_names: list[str]
        has_scaler: bool
        config: dict

    class PredictRequest(BaseModel):
        features: list[list[float]]
        normalized: bool = False

    class PredictResult(BaseModel):
        labels: list[int]
        class_names: list[str]
        probabilities: list[list[float]]


def _class_names(model: MgpllModel) -> list[str]:
    return list(model.class_names) or [str(j) for j in range(model.n_classes)]


def _prepare(model: MgpllModel, features: list[list[float]], normalized: bool) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("features must be a non-empty list of rows")
    if not normalized:
        if model.scaler is None:
            raise ValueError("checkpoint has no feature scaler; send normalized features")
        x = model.scaler.transform(x)
    return x


def create_app(checkpoint_path: Union[str, Path], model: Optional[MgpllModel] = None) -> "FastAPI":
    """
    Create the FastAPI application.

    The model is loaded once and only read afterwards, so concurrent
    requests are safe.

    Args:
        checkpoint_path: Checkpoint written by save_checkpoint
        model: Already-loaded model (skips loading checkpoint_path)

    Returns:
        Configured FastAPI app
    """
    if not HAS_FASTAPI:
        raise ImportError(
            "FastAPI is required for the API server. "
            "Install with: pip install fastapi uvicorn"
        )

    if model is None:
        model = load_checkpoint(checkpoint_path).model

    app = FastAPI(
        title="MGPLL prediction API",
        description="Class predictions from a partial-label model checkpoint",
        version="0.1.0",
    )

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    app.state.model = model
    app.state.checkpoint_path = str(checkpoint_path)

    @app.get("/health")
    def health_check():
        return {"status": "healthy", "checkpoint": app.state.checkpoint_path}

    @app.get("/api/model", response_model=ModelInfo)
    def model_info():
        """Dimensions and configuration of the served model."""
        return ModelInfo(
            n_features=model.n_features,
            n_classes=model.n_classes,
            class_names=_class_names(model),
            has_scaler=model.scaler is not None,
            config=model.config.to_dict(),
        )

    @app.post("/api/predict", response_model=PredictResult)
    def predict_batch(request: PredictRequest):
        """Predict class indices and probabilities for a batch of feature rows."""
        try:
            x = _prepare(model, request.features, request.normalized)
            prob = predict(model, x)
        except MgpllError as e:
            logger.info("Rejected prediction request: %s", e)
            return JSONResponse(status_code=422, content={"error": e.category, "detail": str(e)})
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))

        logger.debug("Predicted %d rows", prob.shape[0])
        labels = np.argmax(prob, axis=1)
        names = _class_names(model)
        return PredictResult(
            labels=[int(k) for k in labels],
            class_names=[names[k] for k in labels],
            probabilities=prob.tolist(),
        )

    return app

