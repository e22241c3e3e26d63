"""HTTP inference service: point-and-ask answers with attention
overlays, plus image listing/rasterization for the pointing UI.
"""

from __future__ import annotations

import base64
import time
from pathlib import Path

import torch
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .builders.base import PointQAInstance
from .errors import ContractError
from .features import FeatureStore
from .geometry import Point
from .models import ModelConfig, answer_distribution, load_model
from .models.vocab import AnswerVocab, Vocabulary
from .scene_graph import AnnotationStore, load_annotations
from .synthworld import rasterize_png
from .training import TensorBatcher


class PointBody(BaseModel):
    x: int
    y: int


class AnswerRequest(BaseModel):
    image_id: str
    point: PointBody
    question: str


def _weight_list(weights, boxes, full: bool) -> list[dict]:
    entries = [
        {
            "box": {
                "x": float(boxes[i][0]),
                "y": float(boxes[i][1]),
                "w": float(boxes[i][2]),
                "h": float(boxes[i][3]),
            },
            "weight": float(weights[i]),
        }
        for i in range(len(weights))
        if weights[i] > 0
    ]
    entries.sort(key=lambda e: -e["weight"])
    return entries if full else entries[:20]


def create_app(
    checkpoint: str | Path | None = None,
    features: str | Path | FeatureStore | None = None,
    annotations: str | Path | AnnotationStore | None = None,
    model: torch.nn.Module | None = None,
    model_config: ModelConfig | None = None,
) -> FastAPI:
    """Build the service; accepts paths (CLI) or live objects (tests)."""
    if model is None:
        model, model_config = load_model(checkpoint)
    if not isinstance(features, FeatureStore):
        features = FeatureStore.open(features)
    if not isinstance(annotations, AnnotationStore):
        annotations = load_annotations(annotations)

    vocab = Vocabulary(model_config.question_vocab)
    answers = AnswerVocab(model_config.answer_vocab)
    dims = {img.image_id: (img.width, img.height) for img in annotations}
    image_ids = [i for i in annotations.image_ids() if i in features]

    app = FastAPI(title="pointqa inference service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.post("/v1/answer")
    def answer(body: AnswerRequest, full: int = Query(0)):
        started = time.perf_counter()
        img = annotations.get(body.image_id)
        if img is None or body.image_id not in features:
            raise HTTPException(status_code=404, detail={"error": "unknown image_id"})
        if not (0 <= body.point.x < img.width and 0 <= body.point.y < img.height):
            raise HTTPException(status_code=422, detail={"error": "point out of bounds"})
        if not body.question.strip():
            raise HTTPException(status_code=422, detail={"error": "question is empty"})

        instance = PointQAInstance(
            qa_id="request",
            image_id=body.image_id,
            question=body.question,
            answer=answers.labels[0],  # placeholder; inference ignores labels
            split="request",
            point=Point(body.point.x, body.point.y),
        )
        try:
            batcher = TensorBatcher(
                [instance],
                features=features,
                image_dims=dims,
                vocab=vocab,
                answers=answers,
                strategy="all_containing",
                n_proposals=model_config.n_proposals,
                max_question_len=model_config.max_question_len,
            )
        except ContractError as exc:
            raise HTTPException(status_code=422, detail={"error": str(exc)})

        batch = batcher.batch([0])
        with torch.no_grad():
            logits, attn = model(batch)
        probs = answer_distribution(logits)[0]
        scores = [
            {"label": label, "prob": float(probs[i])}
            for i, label in enumerate(answers.labels)
        ]
        scores.sort(key=lambda s: -s["prob"])

        attention = {}
        if attn.get("local") is not None:
            attention["local"] = _weight_list(
                attn["local"][0].tolist(), batch["pt_boxes"][0].tolist(), bool(full)
            )
        if attn.get("global") is not None:
            attention["global"] = _weight_list(
                attn["global"][0].tolist(), batch["img_boxes"][0].tolist(), bool(full)
            )

        return {
            "answer": scores[0]["label"],
            "scores": scores,
            "attention": attention,
            "latency_ms": (time.perf_counter() - started) * 1000.0,
        }

    @app.get("/v1/images")
    def list_images(page: int = Query(1), size: int = Query(20)):
        if page < 1 or size < 1 or size > 200:
            raise HTTPException(status_code=400, detail={"error": "bad page params"})
        total = len(image_ids)
        pages = max(1, -(-total // size))
        chunk = image_ids[(page - 1) * size : page * size]
        return {
            "images": [
                {
                    "image_id": i,
                    "width": dims[i][0],
                    "height": dims[i][1],
                    "thumbnail_uri": None,
                }
                for i in chunk
            ],
            "page": page,
            "pages": pages,
            "total": total,
        }

    @app.get("/v1/images/{image_id}")
    def image_detail(image_id: str):
        img = annotations.get(image_id)
        if img is None:
            raise HTTPException(status_code=404, detail={"error": "unknown image_id"})
        payload = {
            "image_id": img.image_id,
            "width": img.width,
            "height": img.height,
            "image_uri": img.image_uri,
        }
        if img.image_uri is None:
            payload["png_base64"] = base64.b64encode(rasterize_png(img)).decode("ascii")
        return payload

    return app
