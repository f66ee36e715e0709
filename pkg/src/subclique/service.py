"""HTTP service exposing the state toolkit: validation, move exploration,
the disconnect table, sampling runs, and DOT export.

Every endpoint takes and returns the canonical state document, so clients
stay stateless and runs are reproducible from their inputs.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .errors import (
    ImpermissibleMoveError,
    InvalidPromotionError,
    ParseError,
    SubcliqueError,
    UnknownCliqueNodeError,
    UnknownNodeError,
)
from .graphs import mcs_peo
from .moves import (
    apply_connect,
    apply_disconnect,
    disconnect_table,
    format_disconnect_table,
    move_sets,
    promotion_candidates,
    tree_free_report,
)
from .sampler import (
    ChainState,
    make_affinity,
    make_target,
    run_chain,
    run_summary,
    trace_text,
)
from .state import (
    RepresentationState,
    restore,
    snapshot,
    to_dot,
    verify_clique_dependent,
)

app = FastAPI(title="subclique", version="0.1.0")


def _load(document: str) -> RepresentationState:
    try:
        return restore(document)
    except ParseError as exc:
        raise HTTPException(
            status_code=422, detail={"error": "parse", "message": str(exc)}
        )


def _resolve_node(state: RepresentationState, token: str) -> int:
    try:
        return state.z.node_by_label(token)
    except UnknownNodeError as exc:
        raise HTTPException(
            status_code=404, detail={"error": "unknown-node", "message": str(exc)}
        )


def _resolve_clique(state: RepresentationState, token: str) -> int:
    try:
        return state.resolve_clique(token)
    except (UnknownCliqueNodeError, ValueError) as exc:
        raise HTTPException(
            status_code=404, detail={"error": "unknown-clique-node", "message": str(exc)}
        )


class StateRequest(BaseModel):
    document: str


class ValidateResponse(BaseModel):
    valid: bool
    violation: Optional[str] = None
    chordal: bool
    node_count: int
    maximal_count: int
    sub_clique_count: int


class TableRowModel(BaseModel):
    node: str
    clique: str
    separators: list[str]
    candidates: list[str]


class TableResponse(BaseModel):
    text: str
    rows: list[TableRowModel]


class MoveRequest(BaseModel):
    document: str
    node: str
    action: str = Field(pattern="^(connect|disconnect)$")
    target: str
    promotion: Optional[str] = None


class MoveResponse(BaseModel):
    document: str
    edit: list[str]
    valid: bool


class MoveSetsRequest(BaseModel):
    document: str
    node: str


class MoveSetsResponse(BaseModel):
    node: str
    bd_max: list[str]
    bd_sub: list[str]
    nei_max: list[str]
    nei_sub: list[str]
    promotions: dict[str, list[str]]


class SampleRequest(BaseModel):
    document: str
    seed: int = 0
    steps: int = Field(default=1000, ge=0)
    f_model: str = "const:0.5"
    target: str = "uniform"
    check: str = Field(default="fast", pattern="^(debug|fast|off)$")
    batched: bool = False


class SampleResponse(BaseModel):
    document: str
    trace: str
    checkpoint: str
    summary: dict


class ExportResponse(BaseModel):
    dot: str


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/validate", response_model=ValidateResponse)
def validate(req: StateRequest) -> ValidateResponse:
    state = _load(req.document)
    violation = verify_clique_dependent(state.z, state.t)
    chordal = mcs_peo(state.project()).is_chordal
    return ValidateResponse(
        valid=violation is None and chordal,
        violation=str(violation) if violation else (None if chordal else "projection is not chordal"),
        chordal=chordal,
        node_count=state.node_count,
        maximal_count=len(state.t.maximal),
        sub_clique_count=len(state.sub_ids()),
    )


@app.post("/table", response_model=TableResponse)
def table(req: StateRequest) -> TableResponse:
    state = _load(req.document)
    rows = disconnect_table(state)
    models = [
        TableRowModel(
            node=state.node_label(r.node),
            clique=state.clique_label(r.clique),
            separators=sorted(state.render_members(s) for s in r.separators),
            candidates=sorted(state.clique_label(c) for c in r.candidates),
        )
        for r in rows
    ]
    return TableResponse(text=format_disconnect_table(state, rows), rows=models)


@app.post("/move", response_model=MoveResponse)
def move(req: MoveRequest) -> MoveResponse:
    state = _load(req.document)
    i = _resolve_node(state, req.node)
    target = _resolve_clique(state, req.target)
    promotion = (
        _resolve_clique(state, req.promotion) if req.promotion is not None else None
    )
    try:
        if req.action == "connect":
            if promotion is not None:
                raise InvalidPromotionError("connect moves take no promotion")
            edit = apply_connect(state, i, target)
        else:
            edit = apply_disconnect(state, i, target, promotion)
    except (ImpermissibleMoveError, InvalidPromotionError) as exc:
        raise HTTPException(
            status_code=409,
            detail={"error": "impermissible", "message": str(exc)},
        )
    violation = verify_clique_dependent(state.z, state.t)
    return MoveResponse(
        document=snapshot(state),
        edit=edit.describe(state),
        valid=violation is None,
    )


@app.post("/move-sets", response_model=MoveSetsResponse)
def move_sets_endpoint(req: MoveSetsRequest) -> MoveSetsResponse:
    state = _load(req.document)
    i = _resolve_node(state, req.node)
    ms = move_sets(state, i)

    def names(cids) -> list[str]:
        return sorted(f"{state.clique_label(c)}(#{c})" for c in cids)

    promos = {}
    for s in sorted(ms.bd_max):
        cands = promotion_candidates(state, s, i)
        promos[f"{state.clique_label(s)}(#{s})"] = names(cands)
    return MoveSetsResponse(
        node=state.node_label(i),
        bd_max=names(ms.bd_max),
        bd_sub=names(ms.bd_sub),
        nei_max=names(ms.nei_max),
        nei_sub=names(ms.nei_sub),
        promotions=promos,
    )


@app.post("/sample", response_model=SampleResponse)
def sample(req: SampleRequest) -> SampleResponse:
    state = _load(req.document)
    violation = verify_clique_dependent(state.z, state.t)
    if violation is not None:
        raise HTTPException(
            status_code=409,
            detail={"error": "invalid-state", "message": str(violation)},
        )
    try:
        f = make_affinity(req.f_model)
        target = make_target(req.target, f)
    except ValueError as exc:
        raise HTTPException(
            status_code=422, detail={"error": "config", "message": str(exc)}
        )
    chain = ChainState(state, seed=req.seed)
    run_chain(chain, f, target, steps=req.steps, check=req.check, batched=req.batched)
    return SampleResponse(
        document=snapshot(chain.state),
        trace=trace_text(chain),
        checkpoint=chain.checkpoint(),
        summary=run_summary(chain),
    )


@app.post("/export", response_model=ExportResponse)
def export(req: StateRequest) -> ExportResponse:
    state = _load(req.document)
    return ExportResponse(dot=to_dot(state))


@app.post("/treefree-report")
def treefree(req: StateRequest) -> dict:
    state = _load(req.document)
    try:
        return tree_free_report(state)
    except SubcliqueError as exc:
        raise HTTPException(
            status_code=409, detail={"error": "invalid-state", "message": str(exc)}
        )
