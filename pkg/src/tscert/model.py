"""Takagi-Sugeno model data: vertices, region, memberships, MF Jacobian hull.

A model bundle ties together

  * TSModel          -- rule vertex matrices A_i(lam) = A0_i + lam * A1_i
                        and the modeling region (an axis-aligned box),
  * MembershipSpec   -- parsed membership expressions alpha_i(x),
  * JacobianModel    -- vertices J_k of a polytope that must contain the
                        Jacobian d(alpha)/dx everywhere on the region.

The Jacobian polytope is user-supplied data and is validated against the
memberships by sampling (check_jacobian_hull), never synthesized here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import expr as expr_mod
from . import jsonio
from .errors import ModelError
from .linalg import mat

SIMPLEX_TOL = 1e-9

# Jacobian column sums must vanish because the memberships sum to one.
_COLSUM_TOL = 1e-9


@dataclass(frozen=True)
class Box:
    """Axis-aligned region, None meaning unbounded on that side.

    The origin must lie strictly inside: every stability statement here
    is about the equilibrium at zero.
    """

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ModelError("lower and upper bound lists differ in length")
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            for v in (lo, hi):
                if v is not None and not np.isfinite(v):
                    raise ModelError(f"bound for coordinate {j} is not finite")
            if lo is not None and hi is not None and not lo < hi:
                raise ModelError(f"empty interval for coordinate {j}")
            if (lo is not None and lo >= 0) or (hi is not None and hi <= 0):
                raise ModelError(f"origin not strictly inside coordinate {j}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def is_bounded(self, j: int) -> bool:
        return self.lower[j] is not None and self.upper[j] is not None

    def bounded_coords(self):
        return [j for j in range(self.dim) if self.is_bounded(j)]

    def contains(self, x, atol=0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ModelError(f"point has shape {x.shape}, region dim is {self.dim}")
        for j in range(self.dim):
            if self.lower[j] is not None and x[j] < self.lower[j] - atol:
                return False
            if self.upper[j] is not None and x[j] > self.upper[j] + atol:
                return False
        return True


@dataclass(frozen=True)
class TSModel:
    """Vertex matrices of the rule consequents, affine in the parameter lam."""

    n: int
    r: int
    a0: tuple
    a1: tuple
    region: Box

    def __post_init__(self):
        if self.n < 1 or self.r < 1:
            raise ModelError("n and r must be positive")
        if len(self.a0) != self.r or len(self.a1) != self.r:
            raise ModelError(f"expected {self.r} vertex matrices")
        for name, mats in (("a0", self.a0), ("a1", self.a1)):
            for i, a in enumerate(mats):
                if a.shape != (self.n, self.n):
                    raise ModelError(f"{name}[{i}] has shape {a.shape}, expected ({self.n}, {self.n})")
        if self.region.dim != self.n:
            raise ModelError(f"region dim {self.region.dim} != n = {self.n}")

    def vertex(self, i: int, lam: float) -> np.ndarray:
        """A_i(lam) for 0-based rule index i."""
        if not 0 <= i < self.r:
            raise ModelError(f"rule index {i} out of range for r = {self.r}")
        return self.a0[i] + lam * self.a1[i]

    def vertices(self, lam: float):
        return [self.vertex(i, lam) for i in range(self.r)]


@dataclass(frozen=True)
class JacobianModel:
    """Polytope vertices J_k enclosing the membership Jacobian on the region."""

    r: int
    n: int
    vertices: tuple

    def __post_init__(self):
        if not self.vertices:
            raise ModelError("jacobian polytope needs at least one vertex")
        for k, j in enumerate(self.vertices):
            if j.shape != (self.r, self.n):
                raise ModelError(f"jacobian vertex {k} has shape {j.shape}, expected ({self.r}, {self.n})")
            colsum = np.abs(j.sum(axis=0)).max()
            if colsum > _COLSUM_TOL:
                # Rows are gradients of functions summing to one, so the
                # columns of every hull vertex must sum to zero.
                raise ModelError(f"jacobian vertex {k} has column sum {colsum:.3e}")

    @property
    def p(self) -> int:
        return len(self.vertices)


class MembershipSpec:
    """Parsed membership expressions with compiled fast-path evaluators."""

    def __init__(self, texts, n):
        if not texts:
            raise ModelError("at least one membership expression required")
        self.n = int(n)
        self.texts = tuple(texts)
        self.asts = tuple(expr_mod.parse(t) for t in texts)
        for t, ast in zip(texts, self.asts):
            if ast.max_var() > self.n:
                raise ModelError(f"expression {t!r} references x{ast.max_var()}, model has n = {self.n}")
        self._fns = tuple(expr_mod.compile_fn(ast) for ast in self.asts)

    @property
    def r(self) -> int:
        return len(self.texts)

    def eval(self, x) -> np.ndarray:
        """Membership vector at x, validated against the unit simplex.

        Values in [-tol, 0) are clamped to 0; larger violations raise.
        """
        x = np.asarray(x, dtype=float)
        alpha = np.array([fn(x) for fn in self._fns])
        low = alpha.min()
        if low < -SIMPLEX_TOL:
            raise ModelError(f"membership value {low:.3e} below zero at x = {x.tolist()}")
        s = alpha.sum()
        if abs(s - 1.0) > SIMPLEX_TOL:
            raise ModelError(f"membership sum {s!r} != 1 at x = {x.tolist()}")
        return np.clip(alpha, 0.0, None)


@dataclass(frozen=True)
class ModelBundle:
    model: TSModel
    memberships: MembershipSpec | None = None
    jacobian: JacobianModel | None = None


def validate_simplex(alpha, r) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (r,):
        raise ModelError(f"membership vector has shape {alpha.shape}, expected ({r},)")
    if alpha.min() < -SIMPLEX_TOL or abs(alpha.sum() - 1.0) > SIMPLEX_TOL:
        raise ModelError(f"{alpha.tolist()} is not in the unit simplex")
    return np.clip(alpha, 0.0, None)


def system_matrix(model: TSModel, alpha, lam: float) -> np.ndarray:
    """A(alpha, lam) = sum_i alpha_i A_i(lam)."""
    alpha = validate_simplex(alpha, model.r)
    out = np.zeros((model.n, model.n))
    for i in range(model.r):
        out += alpha[i] * model.vertex(i, lam)
    return out


def jacobian_fd(spec: MembershipSpec, x, h=1e-6) -> np.ndarray:
    """Central-difference Jacobian of the membership vector, shape (r, n)."""
    x = np.asarray(x, dtype=float)
    if h <= 0:
        raise ModelError("step h must be positive")
    out = np.empty((spec.r, spec.n))
    for j in range(spec.n):
        step = np.zeros(spec.n)
        step[j] = h
        if (x + step)[j] == x[j]:
            raise ModelError(f"step underflow at coordinate {j} (h = {h})")
        out[:, j] = (spec.eval(x + step) - spec.eval(x - step)) / (2.0 * h)
    return out


@dataclass(frozen=True)
class HullReport:
    passed: bool
    max_residual: float
    worst_point: np.ndarray
    n_points: int
    tol: float


def check_jacobian_hull(spec, jac: JacobianModel, points, tol=1e-4, h=1e-6) -> HullReport:
    """Verify the sampled membership Jacobian lies in the declared polytope.

    At each point the finite-difference Jacobian is projected onto the
    convex hull of the J_k by nonnegative least squares (the sum-to-one
    constraint enters as a heavily weighted extra row); the Frobenius
    distance to the projection is the residual.
    """
    cols = np.column_stack([j.ravel() for j in jac.vertices])
    weight = 1e6
    worst = 0.0
    worst_point = None
    n_points = 0
    for x in points:
        x = np.asarray(x, dtype=float)
        target = jacobian_fd(spec, x, h)
        a = np.vstack([cols, weight * np.ones((1, jac.p))])
        b = np.concatenate([target.ravel(), [weight]])
        beta, _ = scipy.optimize.nnls(a, b)
        total = beta.sum()
        if total > 0:
            beta = beta / total
        resid = float(np.linalg.norm(cols @ beta - target.ravel()))
        n_points += 1
        if worst_point is None or resid > worst:
            worst = resid
            worst_point = x
    if n_points == 0:
        raise ModelError("no sample points supplied")
    return HullReport(worst <= tol, worst, worst_point, n_points, tol)


def region_grid(box: Box, per_axis: int, clip=10.0) -> np.ndarray:
    """Uniform grid over the region, unbounded coordinates clipped to +-clip."""
    if per_axis < 2:
        raise ModelError("per_axis must be at least 2")
    axes = []
    for j in range(box.dim):
        lo = box.lower[j] if box.lower[j] is not None else -clip
        hi = box.upper[j] if box.upper[j] is not None else clip
        axes.append(np.linspace(lo, hi, per_axis))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


_TOP_KEYS = {"n", "r", "p", "vertices", "region", "memberships", "jacobian_vertices"}
_VERTEX_KEYS = {"A0", "A1"}
_REGION_KEYS = {"lower", "upper"}


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ModelError(f"{where} must be a JSON object")
    unknown = set(d) - allowed
    if unknown:
        raise ModelError(f"unknown keys in {where}: {sorted(unknown)}")


def bundle_from_dict(data: dict) -> ModelBundle:
    _reject_unknown(data, _TOP_KEYS, "model")
    for key in ("n", "r", "vertices", "region"):
        if key not in data:
            raise ModelError(f"model is missing required key {key!r}")
    n = int(data["n"])
    r = int(data["r"])

    raw_vertices = data["vertices"]
    if len(raw_vertices) != r:
        raise ModelError(f"expected {r} vertices, got {len(raw_vertices)}")
    a0, a1 = [], []
    for i, v in enumerate(raw_vertices):
        _reject_unknown(v, _VERTEX_KEYS, f"vertices[{i}]")
        if "A0" not in v:
            raise ModelError(f"vertices[{i}] is missing 'A0'")
        a0.append(mat(v["A0"], n, n))
        a1.append(mat(v["A1"], n, n) if "A1" in v else np.zeros((n, n)))

    raw_region = data["region"]
    _reject_unknown(raw_region, _REGION_KEYS, "region")
    lower = tuple(None if v is None else float(v) for v in raw_region["lower"])
    upper = tuple(None if v is None else float(v) for v in raw_region["upper"])
    region = Box(lower, upper)

    model = TSModel(n, r, tuple(a0), tuple(a1), region)

    memberships = None
    if "memberships" in data:
        texts = data["memberships"]
        if len(texts) != r:
            raise ModelError(f"expected {r} membership expressions, got {len(texts)}")
        memberships = MembershipSpec(texts, n)

    jacobian = None
    if "jacobian_vertices" in data:
        if "p" not in data:
            raise ModelError("jacobian_vertices requires the vertex count 'p'")
        vertices = tuple(mat(j, r, n) for j in data["jacobian_vertices"])
        if len(vertices) != int(data["p"]):
            raise ModelError(f"p = {data['p']} but {len(vertices)} jacobian vertices given")
        jacobian = JacobianModel(r, n, vertices)
    elif "p" in data:
        raise ModelError("'p' given without jacobian_vertices")

    return ModelBundle(model, memberships, jacobian)


def bundle_to_dict(bundle: ModelBundle) -> dict:
    model = bundle.model
    out = {
        "n": model.n,
        "r": model.r,
        "vertices": [
            {"A0": model.a0[i], "A1": model.a1[i]} for i in range(model.r)
        ],
        "region": {
            "lower": list(model.region.lower),
            "upper": list(model.region.upper),
        },
    }
    if bundle.jacobian is not None:
        out["p"] = bundle.jacobian.p
        out["jacobian_vertices"] = list(bundle.jacobian.vertices)
    if bundle.memberships is not None:
        out["memberships"] = list(bundle.memberships.texts)
    return out


def load_bundle(path) -> ModelBundle:
    try:
        data = jsonio.load(path)
    except ValueError as exc:
        raise ModelError(f"cannot parse {path}: {exc}") from exc
    return bundle_from_dict(data)


def save_bundle(bundle: ModelBundle, path):
    jsonio.dump(bundle_to_dict(bundle), path)


def grid_points(n, per_axis, lo, hi):
    """Plain cube grid helper for tests and sampling."""
    axes = [np.linspace(lo, hi, per_axis)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def sample_simplex(rng, r, count) -> np.ndarray:
    """Uniform samples from the unit simplex (Dirichlet(1) via ordered gaps)."""
    u = rng.random((count, r - 1)) if r > 1 else np.zeros((count, 0))
    u.sort(axis=1)
    padded = np.hstack([np.zeros((count, 1)), u, np.ones((count, 1))])
    return np.diff(padded, axis=1)


def simplex_vertices(r) -> np.ndarray:
    return np.eye(r)


def simplex_grid(r, per_edge) -> np.ndarray:
    """All simplex points with coordinates that are multiples of 1/per_edge."""
    pts = []
    for combo in itertools.combinations_with_replacement(range(r), per_edge):
        counts = np.bincount(combo, minlength=r)
        pts.append(counts / per_edge)
    return np.array(pts)
