"""Gram-matrix relaxation of the quantum value and its first-order solver.

The optimization maximizes sum M[x,y,a,b] <u_x^a, v_y^b> over vector
strategies sharing a unit marginal vector z, with per-input outcome vectors
orthogonal and summing to z.  It is encoded as a linear objective over a
single PSD Gram matrix with linear equality constraints, and solved by an
operator-splitting (ADMM) loop alternating an affine projection, a PSD cone
projection, and a dual update.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .construction import SignTensor
from .errors import BudgetExceededError
from .linalg import sym
from .model import BellFunctional


@dataclass(frozen=True)
class GramProblem:
    """maximize/minimize <objective, G> over PSD G with <A_i, G> = b_i."""

    size: int
    objective: np.ndarray = field()
    constraints: tuple = field()
    sense: str = "max"

    def __post_init__(self):
        obj = sym(np.asarray(self.objective, dtype=float))
        if obj.shape != (self.size, self.size):
            raise ValueError("objective shape must match problem size")
        cons = tuple((sym(np.asarray(a, dtype=float)), float(b)) for a, b in self.constraints)
        for a, _ in cons:
            if a.shape != (self.size, self.size):
                raise ValueError("constraint matrices must match problem size")
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", cons)

    def with_sense(self, sense: str) -> "GramProblem":
        return GramProblem(self.size, self.objective, self.constraints, sense)


@dataclass(frozen=True)
class SdpSolution:
    value: float
    gram: np.ndarray
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class VectorStrategy:
    """Explicit vector families u[x, a, :] and v[y, b, :] in a shared real space."""

    u: np.ndarray = field()
    v: np.ndarray = field()

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.ndim != 3 or v.ndim != 3 or u.shape != v.shape:
            raise ValueError("vector families must share an (N, K, dim) shape")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("vector entries must be finite")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def _dedup(constraints):
    seen = {}
    for a, b in constraints:
        seen[(a.tobytes(), b)] = (a, b)
    return tuple(seen.values())


def build_op_gram(m: BellFunctional, sense: str = "max") -> GramProblem:
    """Encode the shared-marginal vector optimization as a Gram problem.

    Index 0 is the marginal vector z, then Alice's u_x^a, then Bob's v_y^b.
    Constraints: ||z||^2 = 1; per input, ||sum_a u_x^a - z||^2 = 0 together
    with pairwise orthogonality of the outcome vectors (and the implied
    diagonal row kept as an explicitly redundant equality for conditioning);
    same for Bob.
    """
    n, k = m.scenario.n_inputs, m.scenario.n_outputs
    size = 1 + 2 * n * k

    def iu(x: int, a: int) -> int:
        return 1 + x * k + a

    def iv(y: int, b: int) -> int:
        return 1 + n * k + y * k + b

    objective = np.zeros((size, size))
    block = m.coeffs.transpose(0, 2, 1, 3).reshape(n * k, n * k)
    objective[1 : 1 + n * k, 1 + n * k :] = block / 2.0
    objective = objective + objective.T

    constraints = []
    norm_z = np.zeros((size, size))
    norm_z[0, 0] = 1.0
    constraints.append((norm_z, 1.0))

    for party_index in (iu, iv):
        for x in range(n):
            members = [party_index(x, a) for a in range(k)]
            w = np.zeros(size)
            w[members] = 1.0
            w[0] = -1.0
            constraints.append((np.outer(w, w), 0.0))
            for i in range(k):
                for j in range(i + 1, k):
                    a_mat = np.zeros((size, size))
                    a_mat[members[i], members[j]] = 0.5
                    a_mat[members[j], members[i]] = 0.5
                    constraints.append((a_mat, 0.0))
            diag_row = np.zeros((size, size))
            for idx in members:
                diag_row[idx, idx] = 1.0
                diag_row[idx, 0] -= 1.0
                diag_row[0, idx] -= 1.0
            constraints.append((diag_row, -1.0))

    return GramProblem(size=size, objective=objective, constraints=_dedup(constraints), sense=sense)


def _facial_reduction(size: int, objective: np.ndarray, constraints):
    """Eliminate directions forced into ker(G) by definite constraints with b = 0.

    A constraint <A, G> = 0 with A PSD (or NSD) and G PSD forces range(A)
    into the kernel of G, which destroys strict feasibility and stalls
    first-order methods.  Substituting G = Q H Q^T over the orthogonal
    complement restores an interior.  Returns (Q, reduced objective,
    reduced constraints); Q has zero columns when G = 0 is forced.
    """
    basis = np.eye(size)
    obj = np.asarray(objective, dtype=float)
    cons = list(constraints)
    for _ in range(4):
        null_blocks = []
        keep = []
        for a, b in cons:
            if abs(b) <= 1e-14:
                vals, vecs = np.linalg.eigh(a)
                if vals[0] >= -1e-12 and vals[-1] > 1e-12:
                    null_blocks.append(vecs[:, vals > 1e-12])
                    continue
                if vals[-1] <= 1e-12 and vals[0] < -1e-12:
                    null_blocks.append(vecs[:, vals < -1e-12])
                    continue
            keep.append((a, b))
        if not null_blocks:
            break
        w_mat = np.concatenate(null_blocks, axis=1)
        u_full, svals, _ = np.linalg.svd(w_mat, full_matrices=True)
        rank = int(np.sum(svals > 1e-10))
        q = u_full[:, rank:]
        if q.shape[1] == 0:
            return basis[:, :0], obj[:0, :0], []
        obj = sym(q.T @ obj @ q)
        reduced = []
        for a, b in keep:
            ar = sym(q.T @ a @ q)
            if float(np.linalg.norm(ar)) <= 1e-12:
                if abs(b) > 1e-9:
                    raise ValueError("infeasible problem: annihilated constraint with nonzero rhs")
                continue
            reduced.append((ar, b))
        cons = reduced
        basis = basis @ q
    return basis, obj, cons


def solve_sdp(problem: GramProblem, tol: float = 1e-9, max_iter: int = 50000) -> SdpSolution:
    """ADMM solve of a GramProblem, after facial-reduction presolve.

    The reported value is the objective at the PSD iterate; it is rigorous
    only up to the recorded residuals, which are never rounded away.  Hitting
    `max_iter` returns a solution flagged as non-converged.
    """
    direction = 1.0 if problem.sense == "max" else -1.0
    basis, obj, reduced = _facial_reduction(
        problem.size, direction * problem.objective, problem.constraints
    )
    m = basis.shape[1]
    if m == 0:
        return SdpSolution(
            value=0.0,
            gram=np.zeros((problem.size, problem.size)),
            primal_residual=0.0,
            dual_residual=0.0,
            iterations=0,
            converged=True,
        )

    if reduced:
        a_rows = np.stack([a.reshape(-1) for a, _ in reduced])
        b_vec = np.array([b for _, b in reduced])
        a_pinv = np.linalg.pinv(a_rows, rcond=1e-12)
    else:
        a_rows = np.zeros((0, m * m))
        b_vec = np.zeros(0)
        a_pinv = np.zeros((m * m, 0))

    def project_affine(v: np.ndarray) -> np.ndarray:
        if b_vec.size == 0:
            return v
        flat = v.reshape(-1)
        corrected = flat - a_pinv @ (a_rows @ flat - b_vec)
        return sym(corrected.reshape(m, m))

    rho = 1.0
    z = np.zeros((m, m))
    u = np.zeros((m, m))
    scale = np.sqrt(m * m)
    r_norm = s_norm = np.inf
    eps_pri = eps_dual = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        x = project_affine(z - u + obj / rho)
        w = sym(x + u)
        vals, vecs = np.linalg.eigh(w)
        z_new = sym((vecs * np.clip(vals, 0.0, None)) @ vecs.T)
        s_norm = rho * float(np.linalg.norm(z_new - z))
        z = z_new
        u = u + x - z
        r_norm = float(np.linalg.norm(x - z))
        eps_pri = scale * tol + tol * max(float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        eps_dual = scale * tol + tol * rho * float(np.linalg.norm(u))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            break
        if it % 50 == 0:
            if r_norm > 10.0 * s_norm and rho < 1e6:
                rho *= 2.0
                u /= 2.0
            elif s_norm > 10.0 * r_norm and rho > 1e-6:
                rho /= 2.0
                u *= 2.0

    converged = r_norm <= eps_pri and s_norm <= eps_dual
    affine_res = 0.0
    if b_vec.size:
        affine_res = float(
            np.linalg.norm(a_rows @ z.reshape(-1) - b_vec) / (1.0 + np.linalg.norm(b_vec))
        )
    gram = sym(basis @ z @ basis.T)
    value = float(np.tensordot(problem.objective, gram, axes=2))
    return SdpSolution(
        value=value,
        gram=gram,
        primal_residual=max(r_norm, affine_res),
        dual_residual=s_norm,
        iterations=it,
        converged=converged,
    )


def omega_op(
    m: BellFunctional, tol: float = 1e-7, max_iter: int = 50000
) -> tuple[float, SdpSolution]:
    """Absolute optimum of the Gram relaxation: both senses, larger magnitude wins.

    The constraints are not sign-symmetric (z is shared), so max and min are
    solved separately.
    """
    problem = build_op_gram(m)
    sol_max = solve_sdp(problem.with_sense("max"), tol=tol, max_iter=max_iter)
    sol_min = solve_sdp(problem.with_sense("min"), tol=tol, max_iter=max_iter)
    if abs(sol_max.value) >= abs(sol_min.value):
        return abs(sol_max.value), sol_max
    return abs(sol_min.value), sol_min


def sign_vector_strategy(signs: SignTensor) -> VectorStrategy:
    """Both families set to the sign rows: u[x, a, p] = v[x, a, p] = eps[x, a, p].

    The outcome index is zero-padded to n + 1 entries so the strategy aligns
    with the padded construction functional; the extra vectors are zero and
    change neither the pairing nor the map norms.
    """
    n = signs.n
    u = np.zeros((n, n + 1, n))
    u[:, :n, :] = signs.eps
    return VectorStrategy(u=u, v=u.copy())


def _sign_matrix(k: int) -> np.ndarray:
    """All sign vectors in {+-1}^k with the first coordinate pinned to +1."""
    count = 1 << max(k - 1, 0)
    rows = np.arange(count, dtype=np.int64)
    cols = np.arange(max(k - 1, 0), dtype=np.int64)
    tail = 1.0 - 2.0 * ((rows[:, None] >> cols[None, :]) & 1)
    return np.concatenate([np.ones((count, 1)), tail], axis=1)


def map_norm(family: np.ndarray, budget: int = 10**8) -> float:
    """Norm of the map e_x tensor e_a -> vectors, over dual extreme points.

    Equals max over inputs x and sign vectors s of ||sum_a s_a u_x^a||, the
    extreme points being e_x tensor s.
    """
    n, k, _ = family.shape
    required = (1 << max(k - 1, 0)) * n
    if required > budget:
        raise BudgetExceededError(required=required, budget=budget, what="map-norm enumeration")
    signs = _sign_matrix(k)
    best = 0.0
    for x in range(n):
        combos = signs @ family[x]
        best = max(best, float(np.linalg.norm(combos, axis=1).max()))
    return best


def vector_certificate_value(
    m: BellFunctional, strategy: VectorStrategy, budget: int = 10**8
) -> float:
    """Rigorous lower bound on the Gram-relaxation norm from explicit vectors.

    value = |sum M <u_x^a, v_y^b>| / (||u-map|| * ||v-map||); the map norms
    are computed exactly over the 2^(K-1) * N dual extreme points.
    """
    if strategy.u.shape[:2] != (m.scenario.n_inputs, m.scenario.n_outputs):
        raise ValueError("strategy shape does not match the functional's scenario")
    nu = map_norm(strategy.u, budget=budget)
    nv = map_norm(strategy.v, budget=budget)
    if nu <= 0.0 or nv <= 0.0:
        raise ValueError("degenerate vector strategy: a map norm is zero")
    pairing = float(np.einsum("xyab,xah,ybh->", m.coeffs, strategy.u, strategy.v))
    return abs(pairing) / (nu * nv)


def gram_to_json(problem: GramProblem) -> str:
    """Sparse-triplet form for cross-validation with external SDP tools."""

    def triplets(mat: np.ndarray) -> list:
        out = []
        for i in range(problem.size):
            for j in range(i, problem.size):
                if mat[i, j] != 0.0:
                    out.append([i, j, mat[i, j]])
        return out

    return json.dumps(
        {
            "m": problem.size,
            "sense": problem.sense,
            "obj": triplets(problem.objective),
            "constraints": [
                {"A": triplets(a), "b": b} for a, b in problem.constraints
            ],
        }
    )


def gram_from_json(text: str) -> GramProblem:
    data = json.loads(text)
    size = int(data["m"])

    def dense(trips) -> np.ndarray:
        mat = np.zeros((size, size))
        for i, j, v in trips:
            mat[int(i), int(j)] = float(v)
            mat[int(j), int(i)] = float(v)
        return mat

    constraints = tuple(
        (dense(entry["A"]), float(entry["b"])) for entry in data["constraints"]
    )
    return GramProblem(
        size=size,
        objective=dense(data["obj"]),
        constraints=constraints,
        sense=data.get("sense", "max"),
    )
