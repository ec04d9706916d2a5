"""Symbolic layer for assembling LMI feasibility problems.

A problem is a list of symmetric matrix expressions, each affine in a
shared vector of scalar decision variables. Matrix-valued blocks
(symmetric or rectangular) own contiguous slices of that vector; an
AffineMatExpr stores one coefficient matrix per scalar variable plus a
constant term. The solver layer only ever sees pre-negated expressions:
every constraint is read as  expr(x) >= t*I.

The two relaxation helpers encode the standard sufficient vertex
conditions for parameterized families on the unit simplex:

  relax_single  --  M(theta) = sum_k theta_k M_k > 0  follows from all M_k > 0.
  relax_double  --  sum_i sum_j a_i a_j U_ij < 0      follows from
                    U_ij + U_ji < 0 for all i >= j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LinAlgError

_SYM_TOL = 1e-9


class _Block:
    def __init__(self, name, offset, n_scalars):
        self.name = name
        self.offset = offset
        self.n_scalars = n_scalars

    def scalar_indices(self):
        return range(self.offset, self.offset + self.n_scalars)


class SymVarBlock(_Block):
    """Symmetric dim x dim matrix variable, upper triangle packed row-major."""

    def __init__(self, name, dim, offset):
        if dim < 1:
            raise LinAlgError(f"block {name!r}: dim must be positive")
        super().__init__(name, offset, dim * (dim + 1) // 2)
        self.dim = dim
        self._pairs = [(i, j) for i in range(dim) for j in range(i, dim)]

    def bases(self):
        """Yield (global_index, basis matrix) for each scalar variable."""
        for local, (i, j) in enumerate(self._pairs):
            e = np.zeros((self.dim, self.dim))
            e[i, j] = 1.0
            e[j, i] = 1.0
            yield self.offset + local, e

    def unpack(self, x) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for local, (i, j) in enumerate(self._pairs):
            out[i, j] = out[j, i] = x[self.offset + local]
        return out

    def pack(self, matrix, out):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (self.dim, self.dim):
            raise LinAlgError(f"block {self.name!r} expects shape ({self.dim}, {self.dim})")
        if np.max(np.abs(matrix - matrix.T)) > _SYM_TOL * max(1.0, np.max(np.abs(matrix))):
            raise LinAlgError(f"block {self.name!r} expects a symmetric matrix")
        for local, (i, j) in enumerate(self._pairs):
            out[self.offset + local] = matrix[i, j]


class RectVarBlock(_Block):
    """General rows x cols matrix variable, packed row-major."""

    def __init__(self, name, rows, cols, offset):
        if rows < 1 or cols < 1:
            raise LinAlgError(f"block {name!r}: shape must be positive")
        super().__init__(name, offset, rows * cols)
        self.rows = rows
        self.cols = cols

    def bases(self):
        for local in range(self.n_scalars):
            i, j = divmod(local, self.cols)
            e = np.zeros((self.rows, self.cols))
            e[i, j] = 1.0
            yield self.offset + local, e

    def unpack(self, x) -> np.ndarray:
        flat = np.array([x[m] for m in self.scalar_indices()])
        return flat.reshape(self.rows, self.cols)

    def pack(self, matrix, out):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (self.rows, self.cols):
            raise LinAlgError(f"block {self.name!r} expects shape ({self.rows}, {self.cols})")
        out[self.offset : self.offset + self.n_scalars] = matrix.ravel()


class VarSpace:
    """Registry of named matrix blocks sharing one scalar variable vector."""

    def __init__(self):
        self.blocks = {}
        self.n_vars = 0

    def _add(self, block):
        if block.name in self.blocks:
            raise LinAlgError(f"duplicate block name {block.name!r}")
        self.blocks[block.name] = block
        self.n_vars += block.n_scalars
        return block

    def sym_block(self, name, dim) -> SymVarBlock:
        return self._add(SymVarBlock(name, dim, self.n_vars))

    def rect_block(self, name, rows, cols) -> RectVarBlock:
        return self._add(RectVarBlock(name, rows, cols, self.n_vars))

    def block(self, name):
        try:
            return self.blocks[name]
        except KeyError:
            raise LinAlgError(f"no block named {name!r}") from None

    def pack(self, assignment: dict) -> np.ndarray:
        """Scalar vector from {block name: matrix}; every block required."""
        missing = set(self.blocks) - set(assignment)
        if missing:
            raise LinAlgError(f"assignment missing blocks: {sorted(missing)}")
        extra = set(assignment) - set(self.blocks)
        if extra:
            raise LinAlgError(f"assignment has unknown blocks: {sorted(extra)}")
        x = np.zeros(self.n_vars)
        for name, block in self.blocks.items():
            block.pack(assignment[name], x)
        return x

    def unpack(self, x) -> dict:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_vars,):
            raise LinAlgError(f"expected {self.n_vars} scalars, got shape {x.shape}")
        return {name: block.unpack(x) for name, block in self.blocks.items()}


@dataclass
class AffineMatExpr:
    """Symmetric matrix expression affine in the scalar variables."""

    dim: int
    constant: np.ndarray
    coeffs: dict = field(default_factory=dict)

    @staticmethod
    def const(matrix) -> "AffineMatExpr":
        matrix = np.asarray(matrix, dtype=float)
        return AffineMatExpr(matrix.shape[0], matrix.copy())

    @staticmethod
    def zero(dim) -> "AffineMatExpr":
        return AffineMatExpr(dim, np.zeros((dim, dim)))

    def _check_dim(self, other):
        if self.dim != other.dim:
            raise LinAlgError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other) -> "AffineMatExpr":
        self._check_dim(other)
        coeffs = {m: c.copy() for m, c in self.coeffs.items()}
        for m, c in other.coeffs.items():
            coeffs[m] = coeffs[m] + c if m in coeffs else c.copy()
        return AffineMatExpr(self.dim, self.constant + other.constant, coeffs)

    def __neg__(self) -> "AffineMatExpr":
        return self.scaled(-1.0)

    def __sub__(self, other) -> "AffineMatExpr":
        return self + (-other)

    def scaled(self, c: float) -> "AffineMatExpr":
        return AffineMatExpr(
            self.dim, c * self.constant, {m: c * co for m, co in self.coeffs.items()}
        )

    def value(self, x) -> np.ndarray:
        out = self.constant.copy()
        for m, c in self.coeffs.items():
            out += x[m] * c
        return out

    def max_abs_entry(self) -> float:
        best = float(np.max(np.abs(self.constant))) if self.constant.size else 0.0
        for c in self.coeffs.values():
            best = max(best, float(np.max(np.abs(c))))
        return best


def block_expr(block) -> AffineMatExpr:
    """The bare value of a symmetric block as an expression."""
    if not isinstance(block, SymVarBlock):
        raise LinAlgError("block_expr needs a symmetric block; wrap others in sym_sandwich")
    coeffs = {m: e for m, e in block.bases()}
    return AffineMatExpr(block.dim, np.zeros((block.dim, block.dim)), coeffs)


def sym_sandwich(block, left, right) -> AffineMatExpr:
    """L X R + (L X R)^T for a matrix block X and constant L, R."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    in_rows = block.dim if isinstance(block, SymVarBlock) else block.rows
    in_cols = block.dim if isinstance(block, SymVarBlock) else block.cols
    if left.shape[1] != in_rows or right.shape[0] != in_cols:
        raise LinAlgError(
            f"sandwich shapes do not chain: {left.shape} x ({in_rows}, {in_cols}) x {right.shape}"
        )
    if left.shape[0] != right.shape[1]:
        raise LinAlgError("sandwich result is not square")
    dim = left.shape[0]
    coeffs = {}
    for m, e in block.bases():
        c = left @ e @ right
        coeffs[m] = c + c.T
    return AffineMatExpr(dim, np.zeros((dim, dim)), coeffs)


def relax_single(family) -> list:
    """Vertex conditions for an affine family required negative definite.

    family is a sequence of AffineMatExpr, one per simplex vertex, each
    standing for a term U_i of sum_i a_i U_i < 0. Returns the negated
    vertex expressions [-U_i]; their positivity makes every convex
    combination of the U_i negative definite.
    """
    family = list(family)
    if not family:
        raise LinAlgError("empty family")
    dim = family[0].dim
    for f in family:
        if f.dim != dim:
            raise LinAlgError("family members differ in dimension")
    return [-f for f in family]


def relax_double(grid: dict, r: int) -> list:
    """Pairwise relaxation of a double sum over the simplex.

    grid maps (i, j) for i, j in range(r) to the expression U_ij. The
    returned list holds -(U_ij + U_ji) for i >= j; positivity of all of
    them makes sum_ij a_i a_j U_ij negative definite on the simplex.
    """
    out = []
    for i in range(r):
        for j in range(r):
            if (i, j) not in grid:
                raise LinAlgError(f"grid is missing entry ({i}, {j})")
    for i in range(r):
        for j in range(i + 1):
            out.append(-(grid[(i, j)] + grid[(j, i)]))
    return out


@dataclass(frozen=True)
class Constraint:
    label: str
    expr: AffineMatExpr


class LMIProblem:
    """max-t feasibility problem: find x with expr_c(x) >= t*I for all c.

    Every expression must be symmetric (constant and all coefficient
    matrices); this is checked on add because a silently asymmetric
    constraint is always an assembly bug.
    """

    def __init__(self, space: VarSpace):
        self.space = space
        self.constraints = []

    def add(self, label: str, expr: AffineMatExpr):
        scale = max(1.0, expr.max_abs_entry())
        mats = [expr.constant] + list(expr.coeffs.values())
        for mtx in mats:
            if mtx.shape != (expr.dim, expr.dim):
                raise LinAlgError(f"constraint {label!r}: matrix shape {mtx.shape} != dim {expr.dim}")
            if np.max(np.abs(mtx - mtx.T)) > _SYM_TOL * scale:
                raise LinAlgError(f"constraint {label!r} is not symmetric")
        for m in expr.coeffs:
            if not 0 <= m < self.space.n_vars:
                raise LinAlgError(f"constraint {label!r} references unknown variable {m}")
        self.constraints.append(Constraint(label, expr))

    def add_all(self, prefix: str, exprs):
        for k, expr in enumerate(exprs):
            self.add(f"{prefix}[{k}]", expr)

    def data_scale(self) -> float:
        """max(1, largest absolute entry across all constraint data)."""
        best = 1.0
        for c in self.constraints:
            best = max(best, c.expr.max_abs_entry())
        return best

    def eval_margins(self, x) -> list:
        """Smallest eigenvalue of each constraint at the given point."""
        from .linalg import eig_sym

        return [float(eig_sym(c.expr.value(x))[0]) for c in self.constraints]
