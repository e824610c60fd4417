"""Stateful HTTP session service exposing the full pipeline to the browser UI.

One analyst session per service instance.  Mutating endpoints (/filter,
/augment, /save, /reset, /session/load) take a lock and swap an immutable
state snapshot atomically, so readers always observe a consistent state.
Render payloads are pure functions of the snapshot.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import synth
from .augment import (
    ORIGIN_SAMPLED,
    ORIGIN_SAMPLED_DESCENDANT,
    ORIGIN_SEED,
    ORIGIN_SEED_DESCENDANT,
    RNG_ALGORITHM,
    AugmentResult,
    AugmentSpec,
    augment,
    kl_matrix,
)
from .data import VisitDataset, export_cohort, load_dataset
from .errors import OntocohortError, UnknownSeedCode
from .filtering import FilteredGraph, FilterSpec, filter_graph, filter_summary
from .graph import ConceptGraph, build_graph, load_edge_list, load_labels

BORDER_BY_ORIGIN = {
    ORIGIN_SEED: "thick",
    ORIGIN_SEED_DESCENDANT: "thin",
    ORIGIN_SAMPLED: "none",
    ORIGIN_SAMPLED_DESCENDANT: "none",
}

DEFAULT_BODY_LIMIT = 1 << 20  # 1 MiB


class ApiError(Exception):
    """Maps directly onto the wire error shape {code, message, detail}."""

    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


@dataclass(frozen=True)
class SessionState:
    """Immutable snapshot of one analysis session."""

    base_graph: ConceptGraph
    dataset: VisitDataset
    filter_spec: FilterSpec | None = None
    filtered: FilteredGraph | None = None
    augmented: AugmentResult | None = None


@dataclass
class SessionStore:
    """Holds the current snapshot plus the append-only action history."""

    state: SessionState | None = None
    history: list[tuple[float, str, dict]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def require_state(self) -> SessionState:
        if self.state is None:
            raise ApiError(409, "NoSession", "no session loaded; POST /session/load first")
        return self.state

    def record(self, action: str, parameters: dict) -> None:
        self.history.append((time.time(), action, parameters))


def _finite(x: float | None) -> float | None:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return x


def render_payload(state: SessionState) -> dict:
    """Graph + chart payload for the UI; a pure function of the state."""
    if state.filtered is not None:
        graph = state.filtered.graph
        summary = filter_summary(state.filtered, state.dataset)
        bar = [{"code": c, "visit_count": n} for c, n in summary.node_visit_counts]
        pie = [{"phenotype": p, "share": s} for p, s in summary.phenotype_shares]
        total_visits = summary.total_visits
    else:
        graph = state.base_graph
        counts = sorted(
            ((c, node.visit_count) for c, node in graph.nodes.items()),
            key=lambda item: (-item[1], item[0]),
        )
        bar = [{"code": c, "visit_count": n} for c, n in counts]
        visit_ids: set[str] = set()
        for node in graph.nodes.values():
            visit_ids.update(node.visit_ids)
        total_visits = len(visit_ids)
        pie = []

    borders: dict[str, str] = {}
    if state.augmented is not None:
        for code, entry in state.augmented.provenance.items():
            borders[code] = BORDER_BY_ORIGIN[entry.origin]

    nodes = [
        {
            "code": code,
            "label": node.label,
            "visit_count": node.visit_count,
            "depth": node.depth,
            "border_style": borders.get(code, "default"),
        }
        for code, node in sorted(graph.nodes.items())
    ]
    payload = {
        "session_id": "default",
        "nodes": nodes,
        "edges": sorted([p, c] for p, c in graph.edges),
        "summary": {"node_count": len(graph), "visit_count": total_visits},
        "bar_chart": bar,
        "pie_chart": pie,
    }
    if state.augmented is not None:
        result = state.augmented
        payload["cohort"] = {
            "size": len(result.cohort_visit_ids),
            "node_count": len(result.node_set),
            "provenance_counts": result.provenance_counts(),
            "hops_executed": result.hops_executed,
            "terminated_early": result.terminated_early,
        }
        payload["provenance"] = [
            dict(rec, min_kl=_finite(rec["min_kl"]))
            for rec in result.provenance_records()
        ]
    return payload


def _session_summary(store: SessionStore) -> dict:
    state = store.require_state()
    return {
        "session_id": "default",
        "node_count": len(state.base_graph),
        "visit_count": len(state.dataset),
        "filtered": state.filtered is not None,
        "augmented": state.augmented is not None,
        "history_length": len(store.history),
        "warnings": state.base_graph.report.warnings(),
    }


def _load_state(ontology_path: str, visits_path: str, vocabulary_path: str,
                labels_path: str | None = None) -> SessionState:
    try:
        dataset = load_dataset(visits_path, vocabulary_path)
        edges = load_edge_list(ontology_path)
        labels = load_labels(labels_path) if labels_path else None
        graph = build_graph(edges, dataset, labels=labels)
    except OntocohortError as exc:
        raise ApiError(400, type(exc).__name__, str(exc)) from exc
    except OSError as exc:
        raise ApiError(400, "IoError", str(exc)) from exc
    return SessionState(base_graph=graph, dataset=dataset)


def _require_field(body: dict, key: str) -> Any:
    if key not in body:
        raise ApiError(400, "InvalidParameters", f"missing field {key!r}")
    return body[key]


def create_app(
    data_dir: str | Path | None = None,
    body_limit: int = DEFAULT_BODY_LIMIT,
) -> FastAPI:
    """Build the service app, optionally preloading a generated data directory."""
    app = FastAPI(title="ontocohort session service")
    store = SessionStore()
    app.state.store = store

    if data_dir is not None:
        base = Path(data_dir)
        labels_file = base / synth.FILE_NAMES["labels"]
        store.state = _load_state(
            str(base / synth.FILE_NAMES["edges"]),
            str(base / synth.FILE_NAMES["visits"]),
            str(base / synth.FILE_NAMES["vocabulary"]),
            str(labels_file) if labels_file.exists() else None,
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "InvalidParameters",
                "message": "request body failed validation",
                "detail": exc.errors(),
            },
        )

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > body_limit:
            return JSONResponse(
                status_code=413,
                content={
                    "code": "BodyTooLarge",
                    "message": f"request body exceeds {body_limit} bytes",
                    "detail": None,
                },
            )
        return await call_next(request)

    @app.get("/session")
    def session_summary():
        return _session_summary(store)

    @app.post("/session/load")
    def session_load(body: dict):
        with store.lock:
            state = _load_state(
                str(_require_field(body, "ontology_path")),
                str(_require_field(body, "visits_path")),
                str(_require_field(body, "vocabulary_path")),
                body.get("labels_path"),
            )
            store.state = state
            store.record("load", {k: str(v) for k, v in body.items()})
        return _session_summary(store)

    @app.post("/filter")
    def apply_filter(body: dict):
        with store.lock:
            state = store.require_state()
            try:
                spec = FilterSpec(
                    selected_codes=frozenset(str(c) for c in _require_field(body, "codes")),
                    phenotypes_of_interest=frozenset(
                        str(p) for p in _require_field(body, "phenotypes")
                    ),
                    min_visits=int(body.get("min_visits", 0)),
                    min_phenotype_count=int(body.get("min_phenotype_count", 0)),
                )
            except (ValueError, TypeError) as exc:
                raise ApiError(400, "InvalidParameters", str(exc)) from exc
            try:
                filtered = filter_graph(state.base_graph, spec, state.dataset)
            except UnknownSeedCode as exc:
                raise ApiError(404, "UnknownSeedCode", str(exc)) from exc
            store.state = replace(
                state, filter_spec=spec, filtered=filtered, augmented=None
            )
            store.record("filter", spec.to_dict())
        return {
            "warnings": list(filtered.warnings),
            "qualifying_count": len(filtered.qualifying_codes),
            "descendant_count": len(filtered.descendant_codes),
            "render": render_payload(store.state),
        }

    @app.get("/nodes/{code}")
    def node_detail(code: str):
        state = store.require_state()
        if state.filtered is None:
            raise ApiError(409, "NoFilter", "apply /filter before inspecting nodes")
        if code not in state.filtered.graph:
            raise ApiError(404, "UnknownCode", f"code {code!r} not in filtered graph")
        node = state.filtered.graph.node(code)
        seeds = sorted(state.filtered.seed_codes)
        matrix = kl_matrix(state.filtered, [code] + seeds)
        return {
            "code": code,
            "label": node.label,
            "visit_count": node.visit_count,
            "depth": node.depth,
            "phenotype_dist": {
                "phenotypes": list(state.dataset.vocabulary.names),
                "probs": list(node.phenotype_dist.probs),
                "support_count": node.phenotype_dist.support_count,
            },
            "kl_to_selected": {
                seed: _finite(float(matrix[0, j + 1])) for j, seed in enumerate(seeds)
            },
        }

    @app.post("/augment")
    def apply_augment(body: dict):
        with store.lock:
            state = store.require_state()
            if state.filtered is None:
                raise ApiError(409, "NoFilter", "apply /filter before augmenting")
            params = dict(body)
            params.setdefault("seed_codes", sorted(state.filtered.seed_codes))
            try:
                spec = AugmentSpec.from_dict(params)
            except (ValueError, TypeError, KeyError) as exc:
                raise ApiError(400, "InvalidParameters", str(exc)) from exc
            try:
                result = augment(state.filtered, spec)
            except OntocohortError as exc:
                raise ApiError(400, type(exc).__name__, str(exc)) from exc
            store.state = replace(state, augmented=result)
            store.record("augment", spec.to_dict())
        return {"render": render_payload(store.state)}

    @app.post("/save")
    def save_cohort(body: dict):
        with store.lock:
            state = store.require_state()
            if state.filtered is None:
                raise ApiError(409, "NothingToSave", "nothing to save; filter first")
            path = Path(str(_require_field(body, "path")))
            if state.augmented is not None:
                visit_ids = sorted(state.augmented.cohort_visit_ids)
                augment_params = state.augmented.spec_echo.to_dict()
                seed = state.augmented.spec_echo.rng_seed
                augmented_nodes = sorted(state.augmented.node_set)
                provenance = [
                    dict(rec, min_kl=_finite(rec["min_kl"]))
                    for rec in state.augmented.provenance_records()
                ]
            else:
                visit_ids = sorted(state.filtered.distinct_visit_ids())
                augment_params = None
                seed = None
                augmented_nodes = sorted(state.filtered.graph.nodes)
                provenance = []
            manifest = {
                "parameters": {
                    "filter": state.filter_spec.to_dict() if state.filter_spec else None,
                    "augment": augment_params,
                },
                "seed": seed,
                "rng": RNG_ALGORITHM,
                "selected_nodes": sorted(state.filtered.seed_codes),
                "augmented_nodes": augmented_nodes,
                "visit_count": len(visit_ids),
                "provenance": provenance,
                "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
            try:
                manifest_path = export_cohort(
                    (state.dataset.visits[v] for v in visit_ids),
                    manifest,
                    path,
                    vocabulary=state.dataset.vocabulary,
                )
            except OSError as exc:
                raise ApiError(400, "IoError", str(exc)) from exc
            store.record("save", {"path": str(path)})
        return {
            "path": str(path),
            "manifest_path": str(manifest_path),
            "visit_count": len(visit_ids),
            "parameters": manifest["parameters"],
        }

    @app.post("/reset")
    def reset_session():
        with store.lock:
            state = store.require_state()
            store.state = SessionState(base_graph=state.base_graph, dataset=state.dataset)
            store.record("reset", {})
        return _session_summary(store)

    return app
