"""Max-margin SDP solve with independent verification of the verdict.

The feasibility question "does x exist with expr_c(x) > 0 for all c" is
answered through the always-feasible program

    maximize t  subject to  expr_c(x) >= t*I  for all c,  |x_m| <= B.

The optimizer's answer is never trusted directly: whenever a point
comes back, every constraint margin is recomputed with a symmetric
eigensolver, and the verdict is based on those verified margins. The
strictness threshold scales with the data (eps_strict * data_scale) so
that multiplying a model by a constant does not flip verdicts.

Verdicts:
  STRICTLY_FEASIBLE  verified min margin >= threshold. The assignment
                     is included and is a checkable certificate.
  INFEASIBLE         the solver certified optimality but the optimal
                     margin is below the threshold. Margins in
                     [threshold/2, threshold) additionally set the
                     boundary flag: the problem may be feasible with a
                     tighter solve.
  NUMERICAL_FAILURE  no optimality certificate and no point that
                     verifies; nothing can be concluded.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers

from .lmi import LMIProblem


class Verdict(enum.Enum):
    STRICTLY_FEASIBLE = "strictly-feasible"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class SolverConfig:
    eps_strict: float = 1e-6
    var_bound: float = 1e4
    max_iters: int = 200
    tol: float = 1e-8
    backend: object = None  # callable(problem, cfg) -> BackendResult


@dataclass(frozen=True)
class BackendResult:
    status: str  # "optimal", "suboptimal" or "failed"
    x: np.ndarray | None
    t: float | None
    message: str = ""


@dataclass(frozen=True)
class FeasibilityOutcome:
    verdict: Verdict
    t_star: float | None
    scale: float
    threshold: float
    boundary: bool = False
    margins: tuple = ()
    assignment: dict | None = None
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.STRICTLY_FEASIBLE


def cvxopt_backend(problem: LMIProblem, cfg: SolverConfig) -> BackendResult:
    """Interior-point solve via cvxopt's semidefinite cone program.

    Tight tolerances can drive the iteration into an exact singularity on
    degenerate (typically infeasible) instances; such solves are retried
    at loosened tolerances. The caller re-verifies margins by eigenvalue,
    so a looser solve can never upgrade a verdict.
    """
    result = _cvxopt_solve(problem, cfg, cfg.tol)
    tol = cfg.tol
    while result.status == "failed" and tol < 1e-6:
        tol = min(tol * 100.0, 1e-6)
        result = _cvxopt_solve(problem, cfg, tol)
    return result


def _cvxopt_solve(problem: LMIProblem, cfg: SolverConfig, tol: float) -> BackendResult:
    n_vars = problem.space.n_vars
    n_total = n_vars + 1  # trailing variable is t

    c = cvx_matrix(np.concatenate([np.zeros(n_vars), [-1.0]]))

    # Box |x_m| <= B keeps the feasible set bounded; t needs no box
    # because every semidefinite block bounds it above.
    gl = np.zeros((2 * n_vars, n_total))
    gl[:n_vars, :n_vars] = np.eye(n_vars)
    gl[n_vars:, :n_vars] = -np.eye(n_vars)
    hl = np.full(2 * n_vars, cfg.var_bound)

    gs, hs = [], []
    for cons in problem.constraints:
        d = cons.expr.dim
        g = np.zeros((d * d, n_total))
        for m, coeff in cons.expr.coeffs.items():
            g[:, m] = -coeff.ravel()
        g[:, n_vars] = np.eye(d).ravel()
        gs.append(cvx_matrix(g))
        hs.append(cvx_matrix(cons.expr.constant))

    saved = dict(cvx_solvers.options)
    cvx_solvers.options.update(
        {
            "show_progress": False,
            "maxiters": cfg.max_iters,
            "abstol": tol,
            "reltol": tol,
            "feastol": tol,
        }
    )
    try:
        sol = cvx_solvers.sdp(c, Gl=cvx_matrix(gl), hl=cvx_matrix(hl), Gs=gs, hs=hs)
    except (ValueError, ArithmeticError, ZeroDivisionError) as exc:
        return BackendResult("failed", None, None, f"backend raised: {exc}")
    finally:
        cvx_solvers.options.clear()
        cvx_solvers.options.update(saved)

    status = sol.get("status", "unknown")
    if sol.get("x") is None:
        return BackendResult("failed", None, None, f"backend status {status!r}")
    y = np.array(sol["x"]).ravel()
    x = y[:n_vars]
    t = float(y[n_vars])
    if status == "optimal":
        return BackendResult("optimal", x, t)
    return BackendResult("suboptimal", x, t, f"backend status {status!r}")


def solve_feasibility(problem: LMIProblem, cfg: SolverConfig | None = None) -> FeasibilityOutcome:
    cfg = cfg or SolverConfig()
    backend = cfg.backend or cvxopt_backend
    scale = problem.data_scale()
    threshold = cfg.eps_strict * scale

    result = backend(problem, cfg)

    margins = None
    if result.x is not None:
        margins = problem.eval_margins(result.x)

    if margins is not None and min(margins) >= threshold:
        # Verified strictly feasible regardless of what the solver claims.
        return FeasibilityOutcome(
            Verdict.STRICTLY_FEASIBLE,
            t_star=min(margins),
            scale=scale,
            threshold=threshold,
            margins=tuple(margins),
            assignment=problem.space.unpack(result.x),
        )

    if result.status == "optimal":
        t_star = min(margins)
        return FeasibilityOutcome(
            Verdict.INFEASIBLE,
            t_star=t_star,
            scale=scale,
            threshold=threshold,
            boundary=t_star >= threshold / 2.0,
            margins=tuple(margins),
        )

    return FeasibilityOutcome(
        Verdict.NUMERICAL_FAILURE,
        t_star=None,
        scale=scale,
        threshold=threshold,
        message=result.message or "solver returned no certificate",
    )


def check_assignment(problem: LMIProblem, blocks: dict) -> list:
    """Verified per-constraint margins for a named-block assignment."""
    x = problem.space.pack(blocks)
    return problem.eval_margins(x)


def dump_problem(problem: LMIProblem) -> str:
    """Textual adapter dump, one line per constraint.

    Grammar (space separated, decimals %.17g, matrices row-major):

        line 0:   "lmi-dump" VERSION NVARS NCONSTRAINTS
        line c+1: DIM  const[0..DIM^2)  coeff_var0[0..DIM^2) ... coeff_var{NVARS-1}[...]

    Every variable's coefficient matrix appears (zeros included), so a
    consumer needs no sparsity handling.
    """
    m = problem.space.n_vars
    out = [f"lmi-dump 1 {m} {len(problem.constraints)}"]
    for cons in problem.constraints:
        d = cons.expr.dim
        zero = np.zeros((d, d))
        parts = [str(d)]
        parts.extend(format(v, ".17g") for v in cons.expr.constant.ravel())
        for idx in range(m):
            coeff = cons.expr.coeffs.get(idx, zero)
            parts.extend(format(v, ".17g") for v in coeff.ravel())
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"
