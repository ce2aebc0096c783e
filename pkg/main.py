from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import ValidationError
from typing import List
import logging

import schemas
from config import API_HOST, API_PORT
from erg import classify as classify_erg
from exceptions import PhaseDiagramError, SizeLimitError
from minorant import boundary_curve, double_tangent
from phase import build_break_witness, classify_spectral, classify_upper_tail
from rate_fn import is_convex

# Configure logging
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Replica Symmetry Phase Diagram API",
    description="""
    Read-only JSON service over the phase diagram library.

    ## Features

    * **Upper tail**: replica symmetric / symmetry breaking verdicts for d-regular patterns
    * **Witnesses**: explicit three-block graphons that beat the constant graphon
    * **Spectral radius**: classification with a checkable certificate
    * **Minorant**: double tangent of the gamma-curve and the phase boundary
    * **ERG**: phase of two-term exponential random graph models
    """,
    version="1.0.0",
    license_info={
        "name": "MIT",
        "url": "https://opensource.org/licenses/MIT",
    },
    openapi_tags=[
        {
            "name": "Upper tail",
            "description": "Classification and witnesses for subgraph and spectral upper tails",
        },
        {
            "name": "Minorant",
            "description": "Convex minorant of the gamma-curve and the phase boundary",
        },
        {
            "name": "ERG",
            "description": "Exponential random graph models",
        },
    ]
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _http_error(route: str, e: Exception) -> HTTPException:
    """Domain failures are the caller's fault; anything else is logged as a server error."""
    if isinstance(e, SizeLimitError):
        return HTTPException(status_code=413, detail=str(e))
    if isinstance(e, PhaseDiagramError):
        return HTTPException(status_code=400, detail=str(e))
    if isinstance(e, ValidationError):
        return HTTPException(status_code=422, detail=str(e))
    logger.error(f"❌ Error in {route}: {str(e)}")
    return HTTPException(status_code=500, detail=f"Internal server error in {route}")


def _pattern(n: int, edges) -> schemas.SmallGraph:
    return schemas.SmallGraph(n=n, edges=edges)


@app.get(
    "/",
    tags=["Root"],
    summary="Welcome Message",
    description="Returns a welcome message for the API"
)
def read_root():
    """
    Welcome endpoint that confirms the API is running.
    """
    return {"message": "Welcome to the Replica Symmetry Phase Diagram API"}


@app.post(
    "/classify",
    response_model=schemas.PhaseClassification,
    tags=["Upper tail"],
    summary="Upper-tail phase",
    description="Classify the upper tail of t(H, G(n, p)) >= r^e(H) for a d-regular H"
)
def classify(request: schemas.ClassifyRequest):
    """
    - **d**: degree of H (at least 2)
    - **p**, **r**: 0 < p <= r < 1
    - **n**, **edges**: optional edge list of H; a built-in d-regular graph is used otherwise

    A symmetry-breaking verdict carries its witness graphon.

    **Error Cases:**
    - 400: (p, r) outside the upper-tail domain, or H is not d-regular
    - 413: H too large for exact homomorphism densities
    """
    try:
        H = None
        if request.edges is not None:
            if request.n is None:
                raise HTTPException(status_code=400, detail="n is required with edges")
            H = _pattern(request.n, request.edges)
        return classify_upper_tail(request.d, request.p, request.r, H)
    except HTTPException:
        raise
    except Exception as e:
        raise _http_error("classify", e)


@app.post(
    "/spectral-classify",
    response_model=schemas.PhaseClassification,
    tags=["Upper tail"],
    summary="Spectral-radius phase",
    description="Classify the upper tail of the largest eigenvalue, with a certificate when symmetry breaks"
)
def spectral_classify(request: schemas.SpectralRequest):
    try:
        return classify_spectral(request.p, request.r)
    except Exception as e:
        raise _http_error("spectral-classify", e)


@app.post(
    "/witness",
    response_model=schemas.BreakWitness,
    tags=["Upper tail"],
    summary="Break witness",
    description="Three-block graphon with larger H-density and smaller rate than the constant r"
)
def witness(request: schemas.WitnessRequest):
    """
    **Error Cases:**
    - 400: (p, r) is not symmetry breaking, H is not regular, or the epsilon schedule ran out
    """
    try:
        return build_break_witness(_pattern(request.n, request.edges), request.p, request.r)
    except Exception as e:
        raise _http_error("witness", e)


@app.post(
    "/minorant",
    response_model=schemas.MinorantResponse,
    tags=["Minorant"],
    summary="Double tangent",
    description="Double tangent of x -> h_p(x^(1/gamma)); null when the curve is convex"
)
def minorant(request: schemas.MinorantRequest):
    try:
        c = schemas.GammaCurve(p=request.p, gamma=request.gamma)
        return schemas.MinorantResponse(
            p=c.p, gamma=c.gamma, convex=is_convex(c), tangent=double_tangent(c)
        )
    except Exception as e:
        raise _http_error("minorant", e)


@app.get(
    "/boundary",
    response_model=List[schemas.BoundaryRow],
    tags=["Minorant"],
    summary="Phase boundary",
    description="Critical p against r on an evenly spaced open grid of r in (0, 1)"
)
def boundary(
    gamma: float = Query(..., gt=0.0),
    grid: int = Query(100, ge=1, le=2000),
):
    try:
        r_grid = [(i + 1) / (grid + 1) for i in range(grid)]
        return boundary_curve(gamma, r_grid)
    except Exception as e:
        raise _http_error("boundary", e)


@app.post(
    "/erg/classify",
    response_model=schemas.ErgClassification,
    tags=["ERG"],
    summary="ERG phase",
    description="Phase of exp(C(n,2) (beta1 t(K2, G) + beta2 t(H, G)^alpha)) for a regular H"
)
def erg_classify(request: schemas.ErgRequest):
    """
    **Error Cases:**
    - 422: H is not d-regular with d >= 2, or alpha is not positive
    """
    try:
        model = schemas.ErgModel(
            H=_pattern(request.n, request.edges),
            alpha=request.alpha,
            beta1=request.beta1,
            beta2=request.beta2,
        )
        return classify_erg(model)
    except Exception as e:
        raise _http_error("erg/classify", e)


if __name__ == "__main__":
    import uvicorn

    logger.info(f"🚀 Serving on {API_HOST}:{API_PORT}")
    uvicorn.run(app, host=API_HOST, port=API_PORT)
