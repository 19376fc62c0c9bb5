"""HTTP surface over the in-process service. JSON bodies, UTF-8,
camelCase field names, RFC 3339 timestamps."""

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .errors import NotFoundError, TriageError
from .service import TriageService


class CreateCollectionBody(BaseModel):
    name: str
    charLimit: int | None = None


class PushBody(BaseModel):
    text: str
    senderRef: str = ""
    sourceMeta: dict[str, str] = Field(default_factory=dict)


class CategoryBody(BaseModel):
    name: str
    description: str = ""


class CreateClassifierBody(BaseModel):
    collectionId: str
    categories: list[CategoryBody]
    k: int = 800
    retrainEvery: int = 50
    activeThreshold: float = 0.60
    holdoutFraction: float = 0.20
    numTrees: int = 100
    seed: int | None = None


class VoteBody(BaseModel):
    labeler: str
    category: str


def create_app(service: TriageService) -> FastAPI:
    app = FastAPI(title="smstriage", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(TriageError)
    async def triage_error_handler(request: Request, exc: TriageError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"type": type(exc).__name__, "message": str(exc)}},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    # -- collections -----------------------------------------------------

    @app.post("/collections", status_code=201)
    def create_collection(body: CreateCollectionBody):
        return service.create_collection(body.name, body.charLimit).to_dict()

    @app.get("/collections")
    def list_collections():
        return [c.to_dict() for c in service.gateway.collections.values()]

    @app.get("/collections/{collection_id}")
    def get_collection(collection_id: str):
        return service.get_collection(collection_id).to_dict()

    @app.post("/collections/{collection_id}/pause")
    def pause_collection(collection_id: str):
        return service.pause_collection(collection_id).to_dict()

    @app.post("/collections/{collection_id}/resume")
    def resume_collection(collection_id: str):
        return service.resume_collection(collection_id).to_dict()

    @app.get("/collections/{collection_id}/classifiers")
    def list_classifiers(collection_id: str):
        service.get_collection(collection_id)
        return [
            service.schemas[sid].to_dict()
            for sid in service.schemas_by_collection.get(collection_id, [])
        ]

    # -- intake ------------------------------------------------------------

    @app.post("/push/{endpoint_path}")
    def push(endpoint_path: str, body: PushBody):
        message = service.ingest(
            endpoint_path, body.text, body.senderRef, body.sourceMeta
        )
        return {"messageId": message.id}

    # -- classifiers ---------------------------------------------------------

    @app.post("/classifiers", status_code=201)
    def create_classifier(body: CreateClassifierBody):
        schema = service.create_classifier(
            body.collectionId,
            [(c.name, c.description) for c in body.categories],
            k=body.k,
            retrain_every=body.retrainEvery,
            active_threshold=body.activeThreshold,
            holdout_fraction=body.holdoutFraction,
            num_trees=body.numTrees,
            seed=body.seed,
        )
        return schema.to_dict()

    @app.get("/classifiers/{schema_id}")
    def get_classifier(schema_id: str):
        return service.get_schema(schema_id).to_dict()

    @app.get("/classifiers/{schema_id}/metrics")
    def classifier_metrics(schema_id: str):
        return service.classifier_metrics(schema_id)

    @app.get("/classifiers/{schema_id}/vocabulary")
    def classifier_vocabulary(schema_id: str):
        service.get_schema(schema_id)
        model = service.models.get(schema_id)
        if model is None:
            raise NotFoundError(f"classifier {schema_id} has no trained model yet")
        return PlainTextResponse(
            model.vocabulary.to_csv(), media_type="text/csv; charset=utf-8"
        )

    # -- labeling ---------------------------------------------------------------

    @app.get("/tasks/next")
    def next_task(labeler: str = Query(...), schema: str | None = Query(None)):
        return {"task": service.next_task(labeler, schema)}

    @app.post("/tasks/{task_id}/vote")
    def vote(task_id: str, body: VoteBody):
        return service.submit_vote(task_id, body.labeler, body.category)

    @app.get("/labels")
    def list_labels(
        schema: str = Query(...),
        page: int = Query(1, ge=1),
        pageSize: int = Query(50, ge=1, le=500),
    ):
        return service.list_labeled(schema, page, pageSize)

    @app.delete("/labels/{message_id}")
    def delete_label(message_id: str, schema: str = Query(...)):
        return service.delete_label(message_id, schema)

    # -- exports and stats ----------------------------------------------------------

    @app.get("/export/{collection_id}/{schema_id}/{category}")
    def export(collection_id: str, schema_id: str, category: str,
               format: str = Query("csv")):
        stream = service.export_category(collection_id, schema_id, category, format)
        media = "text/csv" if format == "csv" else "application/x-ndjson"
        return StreamingResponse(stream, media_type=media)

    @app.get("/stats/{collection_id}/{schema_id}")
    def stats(collection_id: str, schema_id: str):
        return {
            "collectionId": collection_id,
            "schemaId": schema_id,
            "proportions": service.category_proportions(collection_id, schema_id),
            "classifiedTotal": len(service.classifications.get(schema_id, {})),
        }

    return app
