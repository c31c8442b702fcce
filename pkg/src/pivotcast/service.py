"""HTTP API for the expert-correction loop.

A session pins one dataset and carries the expert's pivot set plus the
latest refit. Mutating calls bump a revision counter and must present the
revision they saw (optimistic concurrency): a stale write gets a 409
instead of silently clobbering a colleague's pivots. The service is a
thin adapter over the same run_experiment the CLI uses, so every number
it returns is reproducible offline.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .correction import PivotPoint, PivotSet, suggest_pivots
from .errors import NotFoundError, PivotcastError, ValidationError
from .evaluate import ExperimentOptions, ExperimentResult, run_experiment
from .ingest import Dataset, load_dataset_dir

SUGGEST_WINDOW = 7


class CreateSessionRequest(BaseModel):
    dataset: str = "."


class PivotPayload(BaseModel):
    date: str
    value: float


class PutPivotsRequest(BaseModel):
    pivots: list[PivotPayload]
    expected_revision: int


class RefitRequest(BaseModel):
    fast: bool | None = None
    lambda_: float | None = Field(default=None, alias="lambda")
    seed: int | None = None
    split: str | None = None
    chains: int | None = None
    samples: int | None = None
    warmup: int | None = None

    model_config = {"populate_by_name": True}


@dataclass
class Session:
    id: str
    dataset_name: str
    dataset: Dataset
    revision: int
    pivots: PivotSet | None
    base: ExperimentResult  # cheap no-MCMC fit backing the deviation view
    suggested: PivotSet
    last: ExperimentResult | None = None


class SessionStore:
    """In-memory sessions; one lock serializes all mutations."""

    def __init__(self, data_root: Path, defaults: ExperimentOptions, fast: bool,
                 target: str = "price"):
        self.data_root = Path(data_root)
        self.defaults = defaults
        self.fast = fast
        self.target = target
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def dataset_names(self) -> list[str]:
        names = []
        if any(self.data_root.glob("*.csv")):
            names.append(".")
        for child in sorted(self.data_root.iterdir()):
            if child.is_dir() and any(child.glob("*.csv")):
                names.append(child.name)
        return names

    def _resolve(self, dataset_name: str) -> Path:
        directory = (
            self.data_root if dataset_name in (".", "") else self.data_root / dataset_name
        )
        if not directory.is_dir():
            raise NotFoundError(f"dataset {dataset_name!r} not found under {self.data_root}")
        return directory

    def create(self, dataset_name: str, pivots: PivotSet | None = None,
               revision: int = 0, session_id: str | None = None) -> Session:
        directory = self._resolve(dataset_name)
        dataset = load_dataset_dir(directory, list(self.defaults.features), self.target)
        base = run_experiment(dataset, None, replace(self.defaults, run_bayes=False))
        window = min(SUGGEST_WINDOW, max(1, (len(base.deviation) - 1) // 2))
        suggested = suggest_pivots(base.deviation, window)
        session = Session(
            id=session_id or uuid.uuid4().hex[:16],
            dataset_name=dataset_name,
            dataset=dataset,
            revision=revision,
            pivots=pivots,
            base=base,
            suggested=suggested,
        )
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return session

    def put_pivots(self, session_id: str, pivots: PivotSet, expected_revision: int) -> int:
        with self._lock:
            session = self.get(session_id)
            if expected_revision != session.revision:
                raise RevisionConflict(session.revision)
            session.pivots = pivots
            session.revision += 1
            return session.revision

    def refit(self, session_id: str, options: ExperimentOptions) -> tuple[dict, int]:
        with self._lock:
            session = self.get(session_id)
            result = run_experiment(session.dataset, session.pivots, options)
            session.last = result
            session.revision += 1
            return result.report.to_dict(), session.revision

    def save(self, path: Path) -> None:
        with self._lock:
            payload = [
                {
                    "id": s.id,
                    "dataset": s.dataset_name,
                    "revision": s.revision,
                    "pivots": s.pivots.to_payload() if s.pivots else None,
                }
                for s in self._sessions.values()
            ]
        path.write_text(json.dumps(payload, indent=2) + "\n")

    def load(self, path: Path) -> int:
        restored = 0
        for item in json.loads(path.read_text()):
            pivots = PivotSet.from_payload(item["pivots"]) if item["pivots"] else None
            try:
                self.create(
                    item["dataset"],
                    pivots=pivots,
                    revision=item["revision"],
                    session_id=item["id"],
                )
                restored += 1
            except PivotcastError:
                continue  # dataset moved or invalid; drop the session
        return restored


class RevisionConflict(Exception):
    def __init__(self, current: int):
        super().__init__(f"revision conflict; current revision is {current}")
        self.current = current


def _parse_pivots(payload: list[PivotPayload], dataset: Dataset) -> PivotSet:
    """Build a PivotSet or raise HTTP 422 naming the violated rule."""

    def reject(index: int, message: str):
        raise HTTPException(
            status_code=422,
            detail=[{"loc": ["body", "pivots", index], "msg": message}],
        )

    points = []
    for i, item in enumerate(payload):
        try:
            day = date.fromisoformat(item.date)
        except ValueError:
            reject(i, f"date {item.date!r} is not YYYY-MM-DD")
        if not (dataset.dates[0] <= day <= dataset.dates[-1]):
            reject(
                i,
                f"pivot date {day} outside dataset range "
                f"{dataset.dates[0]}..{dataset.dates[-1]}",
            )
        try:
            points.append(PivotPoint(day, item.value))
        except ValidationError as exc:
            reject(i, str(exc))
        if i > 0 and points[i - 1].date >= points[i].date:
            reject(i, "pivot dates must be strictly increasing")
    return PivotSet(tuple(points))


def create_app(
    data_root: Path,
    defaults: ExperimentOptions | None = None,
    fast: bool = False,
    target: str = "price",
    ui_dir: Path | None = None,
    snapshot_path: Path | None = None,
    cors_origins: tuple[str, ...] = ("*",),
) -> FastAPI:
    defaults = defaults or ExperimentOptions()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if snapshot_path and snapshot_path.exists():
            store.load(snapshot_path)
        yield
        if snapshot_path:
            store.save(snapshot_path)

    app = FastAPI(title="pivotcast", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
        expose_headers=["X-Session-Revision"],
    )
    store = SessionStore(Path(data_root), defaults, fast, target=target)
    app.state.store = store

    def get_or_404(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/datasets")
    def list_datasets():
        return {"datasets": store.dataset_names()}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        try:
            session = store.create(body.dataset)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except PivotcastError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "id": session.id,
            "revision": session.revision,
            "dataset": session.dataset_name,
            "dates": [session.dataset.dates[0].isoformat(),
                      session.dataset.dates[-1].isoformat()],
        }

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        session = get_or_404(session_id)
        return {
            "id": session.id,
            "revision": session.revision,
            "dataset": session.dataset_name,
            "n_pivots": len(session.pivots) if session.pivots else 0,
            "has_report": session.last is not None,
        }

    @app.get("/sessions/{session_id}/deviation")
    def deviation(session_id: str):
        session = get_or_404(session_id)
        series = session.base.deviation
        return {
            "revision": session.revision,
            "dates": [d.isoformat() for d in series.dates],
            "values": [float(v) for v in series.values],
            "suggested_pivots": session.suggested.to_payload(),
        }

    @app.get("/sessions/{session_id}/pivots")
    def get_pivots(session_id: str):
        session = get_or_404(session_id)
        return {
            "revision": session.revision,
            "pivots": session.pivots.to_payload() if session.pivots else [],
        }

    @app.put("/sessions/{session_id}/pivots")
    def put_pivots(session_id: str, body: PutPivotsRequest):
        session = get_or_404(session_id)
        pivots = _parse_pivots(body.pivots, session.dataset)
        try:
            revision = store.put_pivots(session_id, pivots, body.expected_revision)
        except RevisionConflict as exc:
            raise HTTPException(
                status_code=409,
                detail={"message": str(exc), "revision": exc.current},
            ) from exc
        return {"revision": revision}

    @app.post("/sessions/{session_id}/refit")
    def refit(session_id: str, body: RefitRequest, response: Response):
        get_or_404(session_id)
        run_bayes = not (fast if body.fast is None else body.fast)
        options = replace(
            store.defaults,
            run_bayes=run_bayes,
            lambda_=body.lambda_ if body.lambda_ is not None else store.defaults.lambda_,
            seed=body.seed if body.seed is not None else store.defaults.seed,
            split=date.fromisoformat(body.split) if body.split else store.defaults.split,
            n_chains=body.chains if body.chains is not None else store.defaults.n_chains,
            n_samples=body.samples if body.samples is not None else store.defaults.n_samples,
            n_warmup=body.warmup if body.warmup is not None else store.defaults.n_warmup,
        )
        try:
            report, revision = store.refit(session_id, options)
        except PivotcastError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        response.headers["X-Session-Revision"] = str(revision)
        return report

    @app.get("/sessions/{session_id}/posterior")
    def posterior(session_id: str):
        session = get_or_404(session_id)
        last = session.last
        if last is None or last.summaries_base is None:
            raise HTTPException(
                status_code=404,
                detail="no posterior available; run a non-fast refit first",
            )
        summaries = last.summaries_corrected or last.summaries_base
        var = last.report.var
        return {
            "revision": session.revision,
            "corrected": last.summaries_corrected is not None,
            "summaries": [
                {
                    "name": s.name,
                    "median": s.median,
                    "q25": s.q25,
                    "q75": s.q75,
                    "whisker_low": s.whisker_low,
                    "whisker_high": s.whisker_high,
                }
                for s in summaries
            ],
            "var": {
                "level": var.level,
                "horizon_date": var.horizon_date.isoformat() if var.horizon_date else None,
                "log_quantile": var.log_quantile,
                "price_quantile": var.price_quantile,
            },
        }

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
