"""FastAPI service wrapping the simulation engine.

Run with ``qnoise serve`` or ``uvicorn qnoise.service.app:app``.  Domain
errors return a structured payload (`{"error": {"kind", "message",
"line", "col"}}`); the CLI thin client maps ``kind`` back onto its exit
codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import QnoiseError
from . import handlers, models

_STATUS = {"parse": 400, "validation": 422, "resource": 507, "internal": 500}

app = FastAPI(
    title="qnoise",
    description=(
        "Noisy quantum circuit simulation and approximate equivalence "
        "checking via low-rank channel factorizations on doubled tensor networks."
    ),
    version="0.1.0",
)


@app.exception_handler(QnoiseError)
async def _domain_error(_req: Request, exc: QnoiseError):
    kind = handlers.error_kind(exc)
    info = models.ErrorInfo(
        kind=kind,
        message=str(exc),
        line=getattr(exc, "line", None),
        col=getattr(exc, "col", None),
    )
    return JSONResponse(
        status_code=_STATUS[kind],
        content=models.ErrorResponse(error=info).model_dump(),
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": app.version}


@app.post("/simulate", response_model=models.SimulateReport)
def simulate(req: models.SimulateRequest):
    return handlers.run_simulate(req)


@app.post("/eqcheck", response_model=models.EqcheckReport)
def eqcheck(req: models.EqcheckRequest):
    return handlers.run_eqcheck(req)


@app.post("/decompose", response_model=models.DecomposeReport)
def decompose(req: models.DecomposeRequest):
    return handlers.run_decompose(req)


@app.post("/gen", response_model=models.GenResponse)
def gen(req: models.GenRequest):
    return handlers.run_gen(req)


@app.post("/bench", response_model=models.BenchReport)
def bench(req: models.BenchRequest):
    return handlers.run_bench(req)
