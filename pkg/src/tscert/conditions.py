"""Assembly of the five LMI stability conditions.

Every builder returns an LMIProblem whose constraints the solver reads
uniformly as expr(x) >= t*I:

  quadratic        common P:  P > 0,  -(A_i^T P + P A_i) > 0.
  tanaka           fuzzy P(a) under rate bounds |da_k/dt| <= phi_k:
                   P_k > 0 and a pairwise relaxation of
                   sum_k phi_k P_k + P(a)A(a) + A(a)^T P(a) < 0.
  mozelli          tanaka plus a symmetric slack M exploiting
                   sum_k da_k/dt = 0:  P_k + M > 0 and the same double
                   sum with P_k + M inside the rate term.
  augmented        Lyapunov matrix on the extended state
                   xi = (x, a (x) x, x (x) x); the derivative matrix
                   Phi is bi-affine in (a, J-hull weights), so vertex
                   enumeration over both index sets is sound.
  augmented-slack  adds multipliers N_i against the exact algebraic
                   identity Gamma(a) xi = 0, relaxed pairwise in the
                   rule indices for each J-hull vertex.

The augmented state has dimension n + r*n + n^2. Kronecker identities
used throughout: (I_r (x) A)(a (x) x) = a (x) Ax and
(M (x) I_n)(x (x) x) = Mx (x) x. All rule/hull indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import ModelError
from .linalg import kron, mat, sym_mat
from .lmi import AffineMatExpr, LMIProblem, VarSpace, block_expr, relax_double, relax_single, sym_sandwich
from .model import JacobianModel, TSModel, system_matrix, validate_simplex

KINDS = ("quadratic", "tanaka", "mozelli", "augmented", "augmented-slack")

_NEEDS_PHI = {"tanaka", "mozelli"}
_NEEDS_JACOBIAN = {"augmented", "augmented-slack"}


@dataclass(frozen=True)
class Method:
    """A condition family plus per-rule rate bounds where the family needs them."""

    kind: str
    phi: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown method {self.kind!r}; choose one of {KINDS}")
        if self.kind in _NEEDS_PHI:
            if self.phi is None:
                raise ModelError(f"method {self.kind!r} needs rate bounds phi")
            phi = tuple(float(v) for v in self.phi)
            if not phi or any(not v > 0 for v in phi):
                raise ModelError("rate bounds phi must be positive")
            object.__setattr__(self, "phi", phi)
        elif self.phi is not None:
            raise ModelError(f"method {self.kind!r} takes no phi")

    def needs_jacobian(self) -> bool:
        return self.kind in _NEEDS_JACOBIAN

    def phi_for(self, r: int) -> tuple:
        """Per-rule bounds, broadcasting a single value to all r rules."""
        if len(self.phi) == 1:
            return self.phi * r
        if len(self.phi) != r:
            raise ModelError(f"phi has {len(self.phi)} entries, model has r = {r}")
        return self.phi

    def label(self) -> str:
        if self.phi is None:
            return self.kind
        return f"{self.kind}(phi={','.join(format(v, 'g') for v in self.phi)})"


def aug_dim(n: int, r: int) -> int:
    return n + r * n + n * n


def xi_vector(alpha, x) -> np.ndarray:
    """Extended state (x, alpha (x) x, x (x) x)."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, np.kron(alpha, x), np.kron(x, x)])


def phi_matrix(a: np.ndarray, j: np.ndarray, r: int) -> np.ndarray:
    """Extended-state derivative matrix for system matrix a and MF Jacobian j."""
    n = a.shape[0]
    if j.shape != (r, n):
        raise ModelError(f"jacobian has shape {j.shape}, expected ({r}, {n})")
    d = aug_dim(n, r)
    out = np.zeros((d, d))
    out[:n, :n] = a
    out[n : n + r * n, n : n + r * n] = kron(np.eye(r), a)
    out[n : n + r * n, n + r * n :] = kron(j @ a, np.eye(n))
    out[n + r * n :, n + r * n :] = kron(np.eye(n), a) + kron(a, np.eye(n))
    return out


def build_phi_vertex(model: TSModel, jac: JacobianModel, i: int, k: int, lam: float) -> np.ndarray:
    """Phi at rule vertex i and J-hull vertex k."""
    if not 0 <= k < jac.p:
        raise ModelError(f"hull index {k} out of range for p = {jac.p}")
    return phi_matrix(model.vertex(i, lam), jac.vertices[k], model.r)


def phi_mixture(model, jac, alpha, theta, lam: float) -> np.ndarray:
    """Phi at interior weights alpha (rules) and theta (hull)."""
    theta = validate_simplex(theta, jac.p)
    j = sum(theta[k] * jac.vertices[k] for k in range(jac.p))
    return phi_matrix(system_matrix(model, alpha, lam), j, model.r)


def gamma_matrix(a: np.ndarray, vertex_list) -> np.ndarray:
    """[a, -[A_1 ... A_r], 0]: annihilates xi because a = sum alpha_i A_i."""
    n = a.shape[0]
    return np.hstack([a, -np.hstack(vertex_list), np.zeros((n, n * n))])


def build_gamma_vertex(model: TSModel, j: int, lam: float) -> np.ndarray:
    if not 0 <= j < model.r:
        raise ModelError(f"rule index {j} out of range for r = {model.r}")
    return gamma_matrix(model.vertex(j, lam), model.vertices(lam))


def gamma_mixture(model: TSModel, alpha, lam: float) -> np.ndarray:
    return gamma_matrix(system_matrix(model, alpha, lam), model.vertices(lam))


def build_quadratic(model: TSModel, lam: float) -> LMIProblem:
    space = VarSpace()
    p = space.sym_block("P", model.n)
    prob = LMIProblem(space)
    prob.add("P", block_expr(p))
    eye = np.eye(model.n)
    lyap = [sym_sandwich(p, eye, model.vertex(i, lam)) for i in range(model.r)]
    prob.add_all("neg_lyap", relax_single(lyap))
    return prob


def _fuzzy_p_core(model: TSModel, lam: float, phi, slack: bool) -> LMIProblem:
    phi = tuple(float(v) for v in phi)
    if len(phi) != model.r:
        raise ModelError(f"phi has {len(phi)} entries, model has r = {model.r}")
    if any(not v > 0 for v in phi):
        raise ModelError("rate bounds phi must be positive")

    space = VarSpace()
    p_blocks = [space.sym_block(f"P_{k + 1}", model.n) for k in range(model.r)]
    m_block = space.sym_block("M", model.n) if slack else None
    prob = LMIProblem(space)

    m_expr = block_expr(m_block) if slack else None
    for k, blk in enumerate(p_blocks):
        prob.add(f"P_{k + 1}", block_expr(blk))
        if slack:
            # The rate term below only controls P_k + M; these shifted
            # matrices must stay positive for that bound to be valid.
            prob.add(f"P_{k + 1}+M", block_expr(blk) + m_expr)

    rate = AffineMatExpr.zero(model.n)
    for k, blk in enumerate(p_blocks):
        shifted = block_expr(blk) + m_expr if slack else block_expr(blk)
        rate = rate + shifted.scaled(phi[k])

    eye = np.eye(model.n)
    grid = {}
    for i in range(model.r):
        for j in range(model.r):
            grid[(i, j)] = rate + sym_sandwich(p_blocks[j], eye, model.vertex(i, lam))
    prob.add_all("neg_upsilon", relax_double(grid, model.r))
    return prob


def build_tanaka(model: TSModel, phi, lam: float) -> LMIProblem:
    return _fuzzy_p_core(model, lam, phi, slack=False)


def build_mozelli(model: TSModel, phi, lam: float) -> LMIProblem:
    return _fuzzy_p_core(model, lam, phi, slack=True)


def build_augmented(model: TSModel, jac: JacobianModel, lam: float) -> LMIProblem:
    d = aug_dim(model.n, model.r)
    space = VarSpace()
    p = space.sym_block("P", d)
    prob = LMIProblem(space)
    prob.add("P", block_expr(p))
    eye = np.eye(d)
    lyap = []
    for i in range(model.r):
        for k in range(jac.p):
            lyap.append(sym_sandwich(p, eye, build_phi_vertex(model, jac, i, k, lam)))
    prob.add_all("neg_lyap", relax_single(lyap))
    return prob


def build_augmented_slack(model: TSModel, jac: JacobianModel, lam: float) -> LMIProblem:
    d = aug_dim(model.n, model.r)
    space = VarSpace()
    p = space.sym_block("P", d)
    # Gamma rows live in R^n, so d x n multipliers exhaust the freedom.
    n_blocks = [space.rect_block(f"N_{i + 1}", d, model.n) for i in range(model.r)]
    prob = LMIProblem(space)
    prob.add("P", block_expr(p))
    eye = np.eye(d)
    for k in range(jac.p):
        grid = {}
        for i in range(model.r):
            phi_ik = build_phi_vertex(model, jac, i, k, lam)
            for j in range(model.r):
                # Gamma(a) xi = 0 exactly, so adding sym(N(a) Gamma(a))
                # changes nothing along trajectories while relaxing the LMI.
                gamma_j = build_gamma_vertex(model, j, lam)
                grid[(i, j)] = sym_sandwich(p, eye, phi_ik) + sym_sandwich(
                    n_blocks[i], eye, gamma_j
                )
        prob.add_all(f"neg_upsilon[k={k}]", relax_double(grid, model.r))
    return prob


def build_condition(model: TSModel, method: Method, lam: float, jac: JacobianModel | None = None) -> LMIProblem:
    if method.needs_jacobian():
        if jac is None:
            raise ModelError(f"method {method.kind!r} needs a membership Jacobian polytope")
        if jac.r != model.r or jac.n != model.n:
            raise ModelError("jacobian polytope dimensions do not match the model")
    if method.kind == "quadratic":
        return build_quadratic(model, lam)
    if method.kind == "tanaka":
        return build_tanaka(model, method.phi_for(model.r), lam)
    if method.kind == "mozelli":
        return build_mozelli(model, method.phi_for(model.r), lam)
    if method.kind == "augmented":
        return build_augmented(model, jac, lam)
    return build_augmented_slack(model, jac, lam)


@dataclass(frozen=True)
class Certificate:
    """A solved stability certificate: method, parameter, margin, blocks.

    Self-contained for re-verification: rebuilding the condition at
    (method, lam) and substituting the blocks must reproduce margins of
    at least the stated one up to solver tolerance.
    """

    method: Method
    lam: float
    margin: float
    blocks: dict

    def __post_init__(self):
        if not self.margin > 0:
            raise ModelError(f"certificate margin must be positive, got {self.margin}")
        for name, b in self.blocks.items():
            if not isinstance(b, np.ndarray) or b.ndim != 2:
                raise ModelError(f"certificate block {name!r} is not a matrix")


_CERT_REQUIRED = {"method", "lambda", "margin", "blocks"}
_CERT_ALLOWED = _CERT_REQUIRED | {"phi"}


def certificate_to_dict(cert: Certificate) -> dict:
    out = {
        "method": cert.method.kind,
        "lambda": cert.lam,
        "margin": cert.margin,
        "blocks": {name: cert.blocks[name] for name in sorted(cert.blocks)},
    }
    if cert.method.phi is not None:
        out["phi"] = list(cert.method.phi)
    return out


def certificate_from_dict(data: dict) -> Certificate:
    if not isinstance(data, dict):
        raise ModelError("certificate file must contain a JSON object")
    unknown = set(data) - _CERT_ALLOWED
    if unknown:
        raise ModelError(f"unknown keys in certificate: {sorted(unknown)}")
    missing = _CERT_REQUIRED - set(data)
    if missing:
        raise ModelError(f"certificate is missing keys: {sorted(missing)}")
    phi = data.get("phi")
    method = Method(data["method"], tuple(phi) if phi is not None else None)
    blocks = {}
    for name, rows in data["blocks"].items():
        b = mat(rows)
        # All stored square blocks are symmetric except the multipliers.
        blocks[name] = b if name.startswith("N_") else sym_mat(b)
    return Certificate(method, float(data["lambda"]), float(data["margin"]), blocks)


def save_certificate(cert: Certificate, path):
    jsonio.dump(certificate_to_dict(cert), path)


def load_certificate(path) -> Certificate:
    try:
        data = jsonio.load(path)
    except ValueError as exc:
        raise ModelError(f"cannot parse {path}: {exc}") from exc
    return certificate_from_dict(data)
