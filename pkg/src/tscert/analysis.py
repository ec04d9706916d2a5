"""Parameter search, problem-size accounting, and region analysis.

lambda_max_search runs a bisection for the largest lam with a strictly
feasible condition: probe the lower end, then halve the bracket until it
is tighter than tol and report the last feasible probe. A verdict of
NUMERICAL_FAILURE counts as an infeasible probe (the conservative
direction); the probe history records what actually happened.

complexity_report tabulates decision-variable and row counts for the
five condition families as closed forms in (n, r), with the membership
Jacobian polytope taken to have r vertices, the convention the
benchmark sizes use. Two classic interior-point cost proxies are
attached: N_d^3 * N_l and ln(N_d^2 * N_l).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditions import Method, build_condition, xi_vector
from .errors import ModelError
from .linalg import solve_spd
from .model import Box, JacobianModel, MembershipSpec, TSModel, jacobian_fd, system_matrix
from .sdp import SolverConfig, Verdict, solve_feasibility

DEFAULT_LO = 0.001
DEFAULT_HI = 100.0
DEFAULT_TOL = 1e-3


@dataclass(frozen=True)
class ProbeRecord:
    lam: float
    verdict: str
    t_star: float | None


@dataclass(frozen=True)
class LambdaSearchResult:
    lambda_star: float | None
    iterations: int
    bracket: tuple
    history: tuple

    @property
    def found(self) -> bool:
        return self.lambda_star is not None


def lambda_max_search(
    model: TSModel,
    method: Method,
    jac: JacobianModel | None = None,
    *,
    lo: float = DEFAULT_LO,
    hi: float = DEFAULT_HI,
    tol: float = DEFAULT_TOL,
    cfg: SolverConfig | None = None,
    probe=None,
) -> LambdaSearchResult:
    """Largest lam in [lo, hi] (to within tol) with a strict certificate.

    probe overrides the solve, mapping lam to a FeasibilityOutcome;
    by default each probe assembles the condition and solves it.
    """
    if not hi > lo:
        raise ModelError(f"bad bracket [{lo}, {hi}]")
    if not tol > 0:
        raise ModelError("tol must be positive")

    if probe is None:

        def probe(lam):
            return solve_feasibility(build_condition(model, method, lam, jac), cfg)

    history = []

    def feasible(lam: float) -> bool:
        outcome = probe(lam)
        history.append(ProbeRecord(lam, outcome.verdict.value, outcome.t_star))
        return outcome.verdict is Verdict.STRICTLY_FEASIBLE

    if not feasible(lo):
        return LambdaSearchResult(None, len(history), (lo, hi), tuple(history))

    left, right = lo, hi
    while right - left > tol:
        mid = 0.5 * (left + right)
        if feasible(mid):
            left = mid
        else:
            right = mid
    return LambdaSearchResult(left, len(history), (left, right), tuple(history))


@dataclass(frozen=True)
class ComplexityRow:
    method: str
    n_d: int
    n_l: int
    cost: int  # N_d^3 * N_l, the dense interior-point proxy
    log_cost: float  # ln(N_d^2 * N_l)


def _row(method: str, n_d: int, n_l: int) -> ComplexityRow:
    return ComplexityRow(method, n_d, n_l, n_d**3 * n_l, math.log(n_d**2 * n_l))


def _exact_half(value: int) -> int:
    if value % 2:
        raise ModelError(f"internal: {value} is not even")
    return value // 2


def complexity_report(n: int, r: int) -> list:
    """Problem sizes for the five families at state dim n and r rules."""
    if n < 1 or r < 1:
        raise ModelError("n and r must be positive")
    q = n + r * n + n * n  # augmented state dimension
    rows = [
        _row("quadratic", _exact_half(n * (n + 1)), n + n * r),
        _row(
            "tanaka",
            r * _exact_half(n * (n + 1)),
            n * r + n * _exact_half(r * (r + 1)),
        ),
        _row(
            "mozelli",
            (r + 1) * _exact_half(n * (n + 1)),
            2 * n * r + n * _exact_half(r * (r + 1)),
        ),
        _row(
            "line-integral",
            n * n - n + n * r + _exact_half(n * (n + 1)),
            2 * n * r + n * _exact_half(r * (r - 1)),
        ),
        _row(
            "augmented-slack",
            _exact_half(q * (n + 3 * r * n + n * n + 1)),
            _exact_half((r**3 + r**2 + 2) * q),
        ),
    ]
    return rows


@dataclass(frozen=True)
class DAEstimate:
    c_star: float
    kind: str  # "analytic-ellipsoid" or "grid"
    detail: str
    n_samples: int = 0


def estimate_da_quadratic(p: np.ndarray, region: Box) -> DAEstimate:
    """Largest c with {x : x^T P x <= c} inside the region.

    Exact for a box: the extreme of |x_j| over the level set is
    sqrt(c * (P^{-1})_jj), so each bounded coordinate gives the bound
    c <= min(l_j^2, u_j^2) / (P^{-1})_jj. Coordinates bounded on one
    side only cannot cap an ellipsoid centered at the origin more
    tightly than their bounded side, so only fully bounded coordinates
    enter; a region with none has no finite answer.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (region.dim, region.dim):
        raise ModelError(f"P has shape {p.shape}, region dim is {region.dim}")
    bounded = [j for j in range(region.dim) if region.lower[j] is not None or region.upper[j] is not None]
    if not bounded:
        raise ModelError("no bounded face: every sublevel set fits")
    pinv = solve_spd(p, np.eye(region.dim))
    c = math.inf
    for j in bounded:
        sides = [v * v for v in (region.lower[j], region.upper[j]) if v is not None]
        c = min(c, min(sides) / pinv[j, j])
    return DAEstimate(c, "analytic-ellipsoid", "exact for axis-aligned bounds")


def _face_points(region: Box, j: int, value: float, per_face: int, clip: float) -> np.ndarray:
    free = [a for a in range(region.dim) if a != j]
    if not free:
        return np.array([[value]])
    per_axis = max(2, round(per_face ** (1.0 / len(free))))
    axes = []
    for a in free:
        lo = region.lower[a] if region.lower[a] is not None else -clip
        hi = region.upper[a] if region.upper[a] is not None else clip
        axes.append(np.linspace(lo, hi, per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.empty((mesh[0].size, region.dim))
    pts[:, j] = value
    for a, m in zip(free, mesh):
        pts[:, a] = m.ravel()
    return pts


def estimate_da_augmented(
    cert,
    spec: MembershipSpec,
    region: Box,
    *,
    per_face: int = 1000,
    clip: float = 10.0,
) -> DAEstimate:
    """Sampled sublevel bound for V(x) = xi(x)^T P xi(x) on the region.

    V is not quadratic in x, so the exact face minimum is out of reach;
    the region boundary is sampled instead and the smallest V found is
    returned. The estimate is sampled lower-confidence: the reported
    level set may still poke out of the region between samples.
    """
    if cert.method.kind not in ("augmented", "augmented-slack"):
        raise ModelError(f"augmented DA estimate needs an augmented certificate, got {cert.method.kind!r}")
    if spec is None:
        raise ModelError("augmented DA estimate needs membership expressions")
    p = cert.blocks["P"]
    faces = [
        (j, v)
        for j in range(region.dim)
        for v in (region.lower[j], region.upper[j])
        if v is not None
    ]
    if not faces:
        raise ModelError("no bounded face: every sublevel set fits")
    c = math.inf
    total = 0
    for j, value in faces:
        pts = _face_points(region, j, value, per_face, clip)
        total += len(pts)
        for x in pts:
            xi = xi_vector(spec.eval(x), x)
            c = min(c, float(xi @ p @ xi))
    return DAEstimate(c, "grid", "sampled lower-confidence boundary minimum", total)


@dataclass(frozen=True)
class OmegaReport:
    n_points: int
    n_inside: int
    max_ratio: float
    worst_point: np.ndarray

    @property
    def all_inside(self) -> bool:
        return self.n_inside == self.n_points


def omega_region_check(
    model: TSModel,
    spec: MembershipSpec,
    phi,
    lam: float,
    points,
    h: float = 1e-6,
) -> OmegaReport:
    """Where do the rate bounds |d(alpha_k)/dt| <= phi_k actually hold?

    The membership rate along trajectories is J(x) A(alpha(x)) x; the
    report gives the worst ratio rate_k / phi_k over the sampled points
    (a point is inside the valid subregion iff its ratio is <= 1).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape == ():
        phi = np.full(model.r, float(phi))
    if phi.shape != (model.r,) or np.any(phi <= 0):
        raise ModelError(f"phi must be {model.r} positive bounds")
    worst = -1.0
    worst_point = None
    inside = 0
    count = 0
    for x in points:
        x = np.asarray(x, dtype=float)
        alpha = spec.eval(x)
        flow = system_matrix(model, alpha, lam) @ x
        rate = jacobian_fd(spec, x, h) @ flow
        ratio = float(np.max(np.abs(rate) / phi))
        count += 1
        if ratio <= 1.0:
            inside += 1
        if ratio > worst:
            worst = ratio
            worst_point = x
    if worst_point is None:
        raise ModelError("no sample points supplied")
    return OmegaReport(count, inside, worst, worst_point)
