import itertools
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, root_validator, validator

from config import TANGENT_RESIDUAL_TOL, WITNESS_MARGIN

WEIGHT_RENORMALIZE_TOL = 1e-9
SYMMETRY_TOL = 1e-12


def model_to_dict(model: BaseModel, **kwargs) -> Dict[str, Any]:
    # Handle both Pydantic v1 and v2
    try:
        return model.model_dump(**kwargs)
    except AttributeError:
        return model.dict(**kwargs)


def _normalized_weights(v: List[float]) -> List[float]:
    if len(v) == 0:
        raise ValueError("at least one block is required")
    if any(not math.isfinite(w) or w <= 0 for w in v):
        raise ValueError("block weights must be positive")
    total = math.fsum(v)
    if abs(total - 1.0) > WEIGHT_RENORMALIZE_TOL:
        raise ValueError(f"block weights must sum to 1, got {total!r}")
    return [w / total for w in v]


# Curve schemas
class GammaCurve(BaseModel):
    """The curve x -> h_p(x^(1/gamma)) on [0, 1]."""

    p: float
    gamma: float

    class Config:
        frozen = True

    @validator("p")
    def p_in_open_unit_interval(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {v!r}")
        return v

    @validator("gamma")
    def gamma_positive(cls, v):
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError(f"gamma must be positive, got {v!r}")
        return v


class DoubleTangent(BaseModel):
    """Lower common tangent of a non-convex gamma-curve; touch points in q-coordinates."""

    q_lo: float
    q_hi: float
    slope: float
    intercept: float
    residual: float

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def touch_points_ordered(cls, values):
        q_lo, q_hi = values["q_lo"], values["q_hi"]
        if not 0.0 < q_lo < q_hi < 1.0:
            raise ValueError(f"touch points must satisfy 0 < q_lo < q_hi < 1, got ({q_lo}, {q_hi})")
        if values["slope"] <= 0.0:
            raise ValueError("double tangent slope must be positive")
        if values["residual"] > TANGENT_RESIDUAL_TOL:
            raise ValueError(f"tangency residual {values['residual']:.3e} exceeds tolerance")
        return values


class BoundaryRow(BaseModel):
    r: float
    p_critical: float
    gamma: float


# Step kernel schemas
class SignedKernel(BaseModel):
    """Symmetric step kernel: block measures plus a symmetric value matrix."""

    weights: List[float]
    values: List[List[float]]

    class Config:
        frozen = True

    @validator("weights")
    def weights_form_a_partition(cls, v):
        return _normalized_weights(v)

    @validator("values")
    def values_symmetric(cls, v, values):
        weights = values.get("weights")
        if weights is None:
            return v
        k = len(weights)
        if len(v) != k or any(len(row) != k for row in v):
            raise ValueError(f"value matrix must be {k}x{k}")
        m = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(m)):
            raise ValueError("kernel values must be finite")
        if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL:
            raise ValueError("kernel value matrix must be symmetric")
        return ((m + m.T) / 2.0).tolist()

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def weight_vector(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


class StepGraphon(SignedKernel):
    """Step graphon: a symmetric step kernel with values in [0, 1]."""

    @validator("values")
    def values_in_unit_interval(cls, v):
        if any(x < 0.0 or x > 1.0 for row in v for x in row):
            raise ValueError("graphon values must lie in [0, 1]")
        return v


class StepKernelK(BaseModel):
    """Symmetric step k-kernel: block measures plus a permutation-symmetric k-tensor."""

    k: int
    weights: List[float]
    values: List[Any]

    class Config:
        frozen = True

    @validator("k")
    def arity_at_least_two(cls, v):
        if v < 2:
            raise ValueError("kernel arity must be at least 2")
        return v

    @validator("weights")
    def weights_form_a_partition(cls, v):
        return _normalized_weights(v)

    @validator("values")
    def tensor_symmetric(cls, v, values):
        k, weights = values.get("k"), values.get("weights")
        if k is None or weights is None:
            return v
        t = np.asarray(v, dtype=float)
        if t.shape != (len(weights),) * k:
            raise ValueError(f"value tensor must have shape {(len(weights),) * k}, got {t.shape}")
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise ValueError("kernel values must lie in [0, 1]")
        for perm in itertools.permutations(range(k)):
            if np.max(np.abs(t - np.transpose(t, perm))) > SYMMETRY_TOL:
                raise ValueError("kernel tensor must be symmetric under coordinate permutations")
        return t.tolist()

    @property
    def tensor(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def weight_vector(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


# Graph schemas
class SmallGraph(BaseModel):
    """Small graph on vertices 0..n-1. Loops are only accepted for target graphs."""

    n: int
    loops: bool = False
    edges: List[Tuple[int, int]] = []

    class Config:
        frozen = True

    @validator("n")
    def at_least_one_vertex(cls, v):
        if v < 1:
            raise ValueError("graph needs at least one vertex")
        return v

    @validator("edges")
    def edges_valid(cls, v, values):
        n, loops = values.get("n"), values.get("loops", False)
        if n is None:
            return v
        seen = set()
        normalized = []
        for u, w in v:
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError(f"edge ({u}, {w}) has an endpoint outside 0..{n - 1}")
            if u == w and not loops:
                raise ValueError(f"loop at {u} in a simple graph")
            edge = (min(u, w), max(u, w))
            if edge in seen:
                raise ValueError(f"duplicate edge {edge}")
            seen.add(edge)
            normalized.append(edge)
        return normalized

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> List[int]:
        deg = [0] * self.n
        for u, w in self.edges:
            deg[u] += 1
            if w != u:
                deg[w] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for u, w in self.edges:
            a[u, w] = 1
            a[w, u] = 1
        return a


class Hypergraph(BaseModel):
    """k-uniform hypergraph on vertices 0..n-1."""

    k: int
    n: int
    hyperedges: List[Tuple[int, ...]]

    class Config:
        frozen = True

    @validator("k")
    def uniformity_at_least_two(cls, v):
        if v < 2:
            raise ValueError("uniformity must be at least 2")
        return v

    @validator("hyperedges")
    def hyperedges_valid(cls, v, values):
        k, n = values.get("k"), values.get("n")
        if k is None or n is None:
            return v
        seen = set()
        normalized = []
        for edge in v:
            if len(set(edge)) != k or len(edge) != k:
                raise ValueError(f"hyperedge {edge} must have exactly {k} distinct vertices")
            if any(not 0 <= x < n for x in edge):
                raise ValueError(f"hyperedge {edge} has a vertex outside 0..{n - 1}")
            edge = tuple(sorted(edge))
            if edge in seen:
                raise ValueError(f"duplicate hyperedge {edge}")
            seen.add(edge)
            normalized.append(edge)
        return normalized

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)

    def degrees(self) -> List[int]:
        deg = [0] * self.n
        for edge in self.hyperedges:
            for x in edge:
                deg[x] += 1
        return deg


class LinearHypergraph(Hypergraph):
    """Every pair of vertices lies in at most one hyperedge."""

    @validator("hyperedges")
    def pairs_in_at_most_one_edge(cls, v):
        owner: Dict[Tuple[int, int], Tuple[int, ...]] = {}
        for edge in v:
            for pair in itertools.combinations(edge, 2):
                if pair in owner:
                    raise ValueError(f"hyperedges {owner[pair]} and {edge} share the pair {pair}")
                owner[pair] = edge
        return v


# Phase schemas
class Verdict(str, Enum):
    REPLICA_SYMMETRIC = "ReplicaSymmetric"
    SYMMETRY_BREAKING = "SymmetryBreaking"
    BOUNDARY = "Boundary"


class WitnessBase(BaseModel):
    """Three-block construction I1 | I0 | I2 beating the constant kernel r."""

    d: int
    r: float
    r1: float
    r2: float
    s: float
    epsilon: float
    excess_mass: float
    t_value: float
    target_t: float
    hp_value: float
    target_hp: float

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def strict_inequalities(cls, values):
        if not values["r1"] < values["r"] < values["r2"]:
            raise ValueError("witness chord must satisfy r1 < r < r2")
        d, r, r1, r2, s = values["d"], values["r"], values["r1"], values["r2"], values["s"]
        if abs(r ** d - (s * r1 ** d + (1.0 - s) * r2 ** d)) > 1e-12:
            raise ValueError("chord weight s does not reproduce r^d")
        if not values["t_value"] > values["target_t"] + WITNESS_MARGIN:
            raise ValueError("witness density does not exceed the target strictly")
        if not values["hp_value"] < values["target_hp"] - WITNESS_MARGIN:
            raise ValueError("witness rate is not strictly below the symmetric rate")
        if values["epsilon"] <= 0.0:
            raise ValueError("epsilon must be positive")
        return values


class BreakWitness(WitnessBase):
    graphon: StepGraphon


class HyperBreakWitness(WitnessBase):
    k: int
    kernel: StepKernelK


class SpectralCertificate(BaseModel):
    graphon: StepGraphon
    epsilon: float
    excess_mass: float
    r: float
    test_vector: List[float]
    action: List[float]
    operator_norm: float
    hp_value: float
    target_hp: float
    verified: bool

    class Config:
        frozen = True


class PhaseClassification(BaseModel):
    verdict: Verdict
    p: float
    r: float
    d: int
    tail: str = "upper"
    rate: Optional[float] = None
    witness: Optional[Union[BreakWitness, HyperBreakWitness]] = None
    certificate: Optional[SpectralCertificate] = None
    note: str = ""

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def rate_matches_verdict(cls, values):
        if values["verdict"] == Verdict.REPLICA_SYMMETRIC and values.get("rate") is None:
            raise ValueError("a replica symmetric verdict carries the symmetric rate")
        return values


class InequalityReport(BaseModel):
    name: str = ""
    lhs: float
    rhs: float
    holds: bool
    tight: bool = False

    class Config:
        frozen = True


# Exponential random graph schemas
class ErgModel(BaseModel):
    """Two-term model exp(C(n,2) (beta1 t(K2, G) + beta2 t(H, G)^alpha))."""

    H: SmallGraph
    alpha: float
    beta1: float
    beta2: float

    class Config:
        frozen = True

    @validator("alpha")
    def alpha_positive(cls, v):
        if not v > 0.0:
            raise ValueError("alpha must be positive")
        return v

    @validator("H")
    def H_regular(cls, v):
        degrees = set(v.degrees())
        if len(degrees) != 1 or degrees.pop() < 2:
            raise ValueError("H must be d-regular with d >= 2")
        return v

    @property
    def d(self) -> int:
        return self.H.degrees()[0]

    @property
    def gamma(self) -> float:
        return self.H.num_edges * self.alpha

    @property
    def p(self) -> float:
        return 1.0 / (1.0 + math.exp(-self.beta1))


class ErgKind(str, Enum):
    SYMMETRIC_UNIQUE = "SymmetricUnique"
    SYMMETRIC_TWO_PHASE = "SymmetricTwoPhase"
    BREAKING = "Breaking"
    INDETERMINATE = "Indeterminate"


class ScalarOptimum(BaseModel):
    maximizers: List[float]
    value: float

    class Config:
        frozen = True


class ErgClassification(BaseModel):
    kind: ErgKind
    beta1: float
    beta2: float
    gamma: float
    d: int
    u_star: List[float]
    psi: float
    beta2_interval: Optional[Tuple[float, float]] = None
    case: str = ""

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def kind_payload(cls, values):
        kind = values["kind"]
        if kind == ErgKind.SYMMETRIC_TWO_PHASE and len(values["u_star"]) != 2:
            raise ValueError("a two-phase point carries both maximizers")
        if kind == ErgKind.BREAKING and values.get("beta2_interval") is None:
            raise ValueError("a breaking verdict carries its beta2 interval")
        return values


class TrajectoryPoint(BaseModel):
    beta2: float
    u_star: float
    u_star2: Optional[float] = None
    in_region: Optional[bool] = None


class PhaseCell(BaseModel):
    beta1: float
    beta2: float
    kind: ErgKind
    u_star: float
    u_star2: Optional[float] = None


# Sampler schemas
class TrajectoryRow(BaseModel):
    step: int
    edge_density: float
    hom_density: float


class McmcRun(BaseModel):
    n: int
    kind: str = "triangle"
    cycle_length: Optional[int] = None
    alpha: float = 1.0
    beta1: float
    beta2: float
    steps: int
    burn_in: Optional[int] = None
    thinning: Optional[int] = None
    seed: int
    trajectory: List[TrajectoryRow] = Field(default_factory=list)

    class Config:
        frozen = True

    @validator("n")
    def at_least_three_vertices(cls, v):
        if v < 3:
            raise ValueError("chains need at least 3 vertices")
        return v

    @validator("kind")
    def supported_kind(cls, v):
        if v not in ("triangle", "cycle"):
            raise ValueError(f"unsupported H-kind {v!r}; expected 'triangle' or 'cycle'")
        return v

    @validator("alpha")
    def alpha_positive(cls, v):
        if not v > 0.0:
            raise ValueError("alpha must be positive")
        return v

    @validator("steps")
    def steps_nonnegative(cls, v):
        if v < 0:
            raise ValueError("steps must be nonnegative")
        return v

    @root_validator(skip_on_failure=True)
    def fill_defaults(cls, values):
        n = values["n"]
        if values["kind"] == "cycle":
            if values.get("cycle_length") is None or values["cycle_length"] < 3:
                raise ValueError("cycle chains need cycle_length >= 3")
        else:
            values["cycle_length"] = None
        if values.get("burn_in") is None:
            values["burn_in"] = max(100_000, 50 * n * n)
        if values.get("thinning") is None:
            values["thinning"] = n * n
        if values["burn_in"] < 0 or values["thinning"] < 1:
            raise ValueError("burn_in must be >= 0 and thinning >= 1")
        return values


class ConditionalTailReport(BaseModel):
    n: int
    p: float
    r: float
    threshold: float
    graphs_enumerated: int
    event_probability: float
    conditional_mean_edge_density: float
    unconditional_mean_edge_density: float
    conditional_edge_count_distribution: List[float]


class CutDistanceEstimate(BaseModel):
    lower_bound: float
    exact: bool


class SuiteResult(BaseModel):
    name: str
    checked: int
    violations: int
    details: List[str] = []

    @property
    def passed(self) -> bool:
        return self.violations == 0


# Request schemas
class ClassifyRequest(BaseModel):
    d: int = 2
    p: float
    r: float
    n: Optional[int] = None
    edges: Optional[List[Tuple[int, int]]] = None


class SpectralRequest(BaseModel):
    p: float
    r: float


class MinorantRequest(BaseModel):
    p: float
    gamma: float


class WitnessRequest(BaseModel):
    p: float
    r: float
    n: int
    edges: List[Tuple[int, int]]


class ErgRequest(BaseModel):
    n: int
    edges: List[Tuple[int, int]]
    alpha: float
    beta1: float
    beta2: float


class MinorantResponse(BaseModel):
    p: float
    gamma: float
    convex: bool
    tangent: Optional[DoubleTangent] = None
