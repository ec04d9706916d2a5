"""Trust-but-verify layer: certificate re-checking, nonlinear simulation,
and finite-difference validation of the dynamics identities.

Nothing here believes the optimizer. Margins come from a symmetric
eigensolver on freshly assembled constraints; Lyapunov decrease is
measured along trajectories of the actual nonlinear system (membership
expressions evaluated, not the vertex hull); the extended-state
dynamics are compared against finite differences of the extended state
itself.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .conditions import Certificate, build_condition, phi_matrix, xi_vector
from .errors import ModelError, SolverError
from .model import JacobianModel, MembershipSpec, TSModel, jacobian_fd, system_matrix

_ZERO_FLOW = 1e-12
_CONVERGED_NORM = 1e-9


@dataclass(frozen=True)
class Trajectory:
    dt: float
    t: np.ndarray  # (N,)
    x: np.ndarray  # (N, n)
    exit_flag: str  # "converged" | "horizon" | "left-region"

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class DecreaseReport:
    violations: int
    worst_delta: float  # largest V(k+1) - V(k); negative when V decreases
    tol: float
    v: np.ndarray


@dataclass(frozen=True)
class VerificationReport:
    margins: tuple
    threshold: float  # margins must reach eps_strict/2 * data scale
    decrease: DecreaseReport | None = None
    residuals: dict | None = None

    @property
    def margins_ok(self) -> bool:
        return min(self.margins) >= self.threshold

    @property
    def passed(self) -> bool:
        if not self.margins_ok:
            return False
        if self.decrease is not None and self.decrease.violations:
            return False
        if self.residuals:
            return all(ok for _, ok in self.residuals.values())
        return True


def verify_certificate(
    cert: Certificate,
    model: TSModel,
    jac: JacobianModel | None = None,
    lam: float | None = None,
    eps_strict: float = 1e-6,
) -> VerificationReport:
    """Rebuild the certificate's constraints and measure every margin.

    Independent of the solver: assembly comes from the builders and the
    margins from eig_sym on the substituted blocks.
    """
    lam = cert.lam if lam is None else lam
    problem = build_condition(model, cert.method, lam, jac)
    x = problem.space.pack(cert.blocks)
    margins = problem.eval_margins(x)
    threshold = 0.5 * eps_strict * problem.data_scale()
    return VerificationReport(tuple(margins), threshold)


def simulate(
    model: TSModel,
    spec: MembershipSpec,
    lam: float,
    x0,
    t_end: float,
    dt: float = 1e-3,
) -> Trajectory:
    """Classical fixed-step 4th-order integration of dx/dt = A(alpha(x)) x.

    Halts early when the state leaves the modeling region (the fuzzy
    representation stops being the system there); the offending sample
    is not recorded. A non-finite state aborts the run.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.n,):
        raise ModelError(f"x0 has shape {x0.shape}, expected ({model.n},)")
    if not model.region.contains(x0):
        raise ModelError(f"x0 = {x0.tolist()} is outside the modeling region")
    if spec is None:
        raise ModelError("simulation needs membership expressions")
    if spec.r != model.r:
        raise ModelError(f"{spec.r} membership expressions for r = {model.r} rules")
    if not (dt > 0 and t_end >= dt):
        raise ModelError("need t_end >= dt > 0")

    a_stack = np.stack(model.vertices(lam))

    def f(x):
        alpha = spec.eval(x)
        return np.tensordot(alpha, a_stack, axes=1) @ x

    steps = int(round(t_end / dt))
    xs = [x0.copy()]
    flag = "horizon"
    x = x0.copy()
    # overflow is handled by the non-finite check below, not by warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            k1 = f(x)
            k2 = f(x + 0.5 * dt * k1)
            k3 = f(x + 0.5 * dt * k2)
            k4 = f(x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise SolverError("integration produced a non-finite state")
            if not model.region.contains(x):
                flag = "left-region"
                break
            xs.append(x.copy())
    xarr = np.array(xs)
    if flag == "horizon" and float(np.linalg.norm(xarr[-1])) <= _CONVERGED_NORM:
        flag = "converged"
    t = dt * np.arange(len(xs))
    return Trajectory(dt, t, xarr, flag)


def lyapunov_values(cert: Certificate, spec: MembershipSpec | None, xs: np.ndarray) -> np.ndarray:
    """V along the given states for the certificate's function class."""
    kind = cert.method.kind
    if kind == "quadratic":
        p = cert.blocks["P"]
        return np.einsum("ki,ij,kj->k", xs, p, xs)
    if spec is None:
        raise ModelError(f"V for method {kind!r} needs membership expressions")
    if kind in ("tanaka", "mozelli"):
        r = spec.r
        p_stack = np.stack([cert.blocks[f"P_{k + 1}"] for k in range(r)])
        out = np.empty(len(xs))
        for idx, x in enumerate(xs):
            p = np.tensordot(spec.eval(x), p_stack, axes=1)
            out[idx] = x @ p @ x
        return out
    p = cert.blocks["P"]
    out = np.empty(len(xs))
    for idx, x in enumerate(xs):
        xi = xi_vector(spec.eval(x), x)
        out[idx] = xi @ p @ xi
    return out


def check_lyapunov_decrease(cert: Certificate, spec: MembershipSpec | None, traj: Trajectory) -> DecreaseReport:
    """Count V increases along the trajectory beyond 1e-9 * max V."""
    v = lyapunov_values(cert, spec, traj.x)
    if len(v) < 2:
        return DecreaseReport(0, 0.0, 0.0, v)
    deltas = np.diff(v)
    tol = 1e-9 * float(v.max())
    violations = int(np.count_nonzero(deltas > tol))
    return DecreaseReport(violations, float(deltas.max()), tol, v)


def _flow(model, spec, lam, x):
    alpha = spec.eval(x)
    return system_matrix(model, alpha, lam) @ x


def check_mf_dynamics(spec: MembershipSpec, model: TSModel, lam: float, x, h: float) -> float | None:
    """Residual of d(alpha)/dt = J(x) A(alpha(x)) x at one point.

    Two independent O(h^2) discretizations are compared: a centered
    difference of alpha along the normalized flow direction (rescaled
    by the speed) against the finite-difference Jacobian applied to the
    flow. Returns None when the flow vanishes and no direction exists.
    """
    x = np.asarray(x, dtype=float)
    flow = _flow(model, spec, lam, x)
    speed = float(np.linalg.norm(flow))
    if speed <= _ZERO_FLOW:
        return None
    u = flow / speed
    directional = (spec.eval(x + h * u) - spec.eval(x - h * u)) / (2.0 * h)
    target = jacobian_fd(spec, x, h) @ flow
    return float(np.linalg.norm(directional * speed - target))


def check_xi_dynamics(model: TSModel, spec: MembershipSpec, lam: float, x, h: float) -> float | None:
    """Residual of d(xi)/dt = Phi(x) xi(x) at one point.

    Phi(x) is assembled from A(alpha(x)) and the finite-difference MF
    Jacobian; the left side is a centered difference of xi along the
    normalized flow, rescaled by the speed. Returns None on zero flow.
    """
    x = np.asarray(x, dtype=float)
    alpha = spec.eval(x)
    flow = system_matrix(model, alpha, lam) @ x
    speed = float(np.linalg.norm(flow))
    if speed <= _ZERO_FLOW:
        return None
    u = flow / speed
    xp = x + h * u
    xm = x - h * u
    fd = (xi_vector(spec.eval(xp), xp) - xi_vector(spec.eval(xm), xm)) / (2.0 * h) * speed
    phi_x = phi_matrix(system_matrix(model, alpha, lam), jacobian_fd(spec, x, h), model.r)
    return float(np.linalg.norm(fd - phi_x @ xi_vector(alpha, x)))


def write_trajectory_csv(traj: Trajectory, v: np.ndarray | None = None) -> str:
    """CSV dump: header t,x1,...,xn[,V], every value with 17 significant digits."""
    n = traj.x.shape[1]
    buf = io.StringIO()
    header = ["t"] + [f"x{j + 1}" for j in range(n)]
    if v is not None:
        if len(v) != len(traj.t):
            raise ModelError("V column length does not match the trajectory")
        header.append("V")
    buf.write(",".join(header) + "\n")
    for idx in range(len(traj.t)):
        row = [format(traj.t[idx], ".17g")]
        row.extend(format(val, ".17g") for val in traj.x[idx])
        if v is not None:
            row.append(format(v[idx], ".17g"))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
