"""Variational lower bounds on quantum values via alternating best responses.

Each round maximizes over Alice's measurement for every input (Bob and the
state fixed), then over Bob's, then (in free mode) replaces the state by the
top eigenvector of the Bell operator.  Every step solves its subproblem to
optimality or keeps the incumbent, so the value sequence never decreases and
every iterate is a feasible quantum strategy, hence a valid lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import sym
from .model import BellFunctional
from .povm import PovmFamily, require_valid_povm
from .sdp import GramProblem, solve_sdp
from .states import SchmidtState, build_state


@dataclass(frozen=True)
class SeesawConfig:
    """Knobs for one see-saw run; state_mode=None searches the state freely."""

    dim: int
    max_rounds: int = 80
    restarts: int = 8
    seed: int = 0
    state_mode: SchmidtState | None = None
    tol: float = 1e-9
    subproblem_tol: float = 1e-9

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.tol <= 0:
            raise ValueError("convergence tolerance must be positive")
        if self.state_mode is not None and self.state_mode.dim != self.dim:
            raise ValueError("fixed state dimension must match cfg.dim")


@dataclass(frozen=True)
class SeesawResult:
    value: float
    povm_a: PovmFamily
    povm_b: PovmFamily
    state: SchmidtState
    rounds: int
    history: tuple
    methods: tuple


def bell_operator(m: BellFunctional, povm_a: PovmFamily, povm_b: PovmFamily) -> np.ndarray:
    """The operator sum M[x,y,a,b] E_x^a tensor F_y^b on the product space."""
    n, k = m.scenario.n_inputs, m.scenario.n_outputs
    if (povm_a.n_inputs, povm_a.n_outputs) != (n, k) or (
        povm_b.n_inputs,
        povm_b.n_outputs,
    ) != (n, k):
        raise ValueError("POVM families do not match the functional's scenario")
    da, db = povm_a.dim, povm_b.dim
    op = np.einsum(
        "xyab,xaij,ybkl->ikjl", m.coeffs, povm_a.elements, povm_b.elements
    ).reshape(da * db, da * db)
    return sym(op)


# ---------------------------------------------------------------------------
# POVM best-response subproblem: maximize sum_a tr(E_a C_a) over POVMs.


def povm_subproblem_gram(c: np.ndarray) -> GramProblem:
    """Encode the best-response subproblem as a Gram problem for cross-checks.

    The PSD variable is the block-diagonal stack of the K elements; cross
    blocks are pinned to zero and the diagonal blocks must sum to identity.
    """
    c = np.asarray(c, dtype=float)
    k, d, _ = c.shape
    size = k * d
    objective = np.zeros((size, size))
    for a in range(k):
        objective[a * d : (a + 1) * d, a * d : (a + 1) * d] = sym(c[a])
    constraints = []
    for a in range(k):
        for b in range(a + 1, k):
            for i in range(d):
                for j in range(d):
                    mat = np.zeros((size, size))
                    mat[a * d + i, b * d + j] = 0.5
                    mat[b * d + j, a * d + i] = 0.5
                    constraints.append((mat, 0.0))
    for i in range(d):
        for j in range(i, d):
            mat = np.zeros((size, size))
            for a in range(k):
                mat[a * d + i, a * d + j] += 0.5
                mat[a * d + j, a * d + i] += 0.5
            constraints.append((mat, 1.0 if i == j else 0.0))
    return GramProblem(size=size, objective=objective, constraints=tuple(constraints))


def _blockwise_psd(e: np.ndarray) -> np.ndarray:
    out = np.empty_like(e)
    for a in range(e.shape[0]):
        vals, vecs = np.linalg.eigh(sym(e[a]))
        out[a] = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    return out


def _completeness_project(e: np.ndarray) -> np.ndarray:
    k, d, _ = e.shape
    defect = (e.sum(axis=0) - np.eye(d)) / k
    return e - defect[None, :, :]


def project_to_povm_set(e: np.ndarray, max_iter: int = 400, tol: float = 1e-11) -> np.ndarray:
    """Land inside {E_a >= 0, sum_a E_a = I} by alternating projections."""
    e = np.array([sym(block) for block in e])
    for _ in range(max_iter):
        e = _completeness_project(_blockwise_psd(e))
        worst = min(float(np.linalg.eigvalsh(sym(block))[0]) for block in e)
        if worst >= -tol:
            break
    # final tiny PSD defect is absorbed by mixing toward the uniform POVM
    k, d, _ = e.shape
    worst = min(float(np.linalg.eigvalsh(sym(block))[0]) for block in e)
    if worst < 0.0:
        t = (-worst * k) / (1.0 + (-worst * k))
        e = (1.0 - t) * e + t * np.broadcast_to(np.eye(d) / k, e.shape)
    return np.array([sym(block) for block in e])


def _subproblem_value(e: np.ndarray, c: np.ndarray) -> float:
    return float(np.einsum("aij,aij->", e, c))


def _povm_admm(
    c: np.ndarray, tol: float, max_iter: int = 4000
) -> tuple[np.ndarray, bool]:
    """Operator-splitting solve of the best-response subproblem.

    Same alternation as the Gram solver (affine projection, PSD projection,
    dual update) run directly on the block structure, which is what makes
    see-saw rounds affordable for K >= 3.
    """
    k, d, _ = c.shape
    eye = np.eye(d)
    z = np.broadcast_to(eye / k, c.shape).copy()
    u = np.zeros_like(z)
    rho = 1.0
    scale = np.sqrt(c.size)
    converged = False
    for it in range(1, max_iter + 1):
        x = _completeness_project(z - u + c / rho)
        z_new = _blockwise_psd(x + u)
        s_norm = rho * float(np.linalg.norm(z_new - z))
        z = z_new
        u = u + x - z
        r_norm = float(np.linalg.norm(x - z))
        eps_pri = scale * tol + tol * max(float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        eps_dual = scale * tol + tol * rho * float(np.linalg.norm(u))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break
        if it % 50 == 0:
            if r_norm > 10.0 * s_norm and rho < 1e6:
                rho *= 2.0
                u /= 2.0
            elif s_norm > 10.0 * r_norm and rho > 1e-6:
                rho /= 2.0
                u *= 2.0
    return project_to_povm_set(z), converged


def _povm_projected_gradient(c: np.ndarray, iters: int = 500) -> np.ndarray:
    """Fallback: projected (sub)gradient ascent with feasibility projections."""
    k, d, _ = c.shape
    step0 = 1.0 / max(float(np.linalg.norm(c)), 1e-12)
    e = np.broadcast_to(np.eye(d) / k, c.shape).copy()
    best, best_val = e, _subproblem_value(e, c)
    for t in range(1, iters + 1):
        e = project_to_povm_set(e + (step0 / np.sqrt(t)) * c, max_iter=60)
        val = _subproblem_value(e, c)
        if val > best_val:
            best, best_val = e, val
    return best


def optimal_povm(c: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, str]:
    """Solve max sum_a tr(E_a C_a) over POVMs; returns (elements, method).

    K = 1 is forced, K = 2 has the exact spectral solution (project onto the
    nonnegative eigenspace of C_1 - C_2), and larger K runs the splitting
    solver with a projected-gradient fallback on non-convergence.
    """
    c = np.asarray(c, dtype=float)
    k, d, _ = c.shape
    if k == 1:
        return np.eye(d)[None, :, :].copy(), "identity"
    if k == 2:
        vals, vecs = np.linalg.eigh(sym(c[0] - c[1]))
        keep = vecs[:, vals >= 0.0]
        top = sym(keep @ keep.T)
        return np.stack([top, np.eye(d) - top]), "spectral"
    e, converged = _povm_admm(c, tol)
    if converged:
        return e, "admm"
    fallback = _povm_projected_gradient(c)
    if _subproblem_value(fallback, c) > _subproblem_value(e, c):
        return fallback, "projected-gradient"
    return e, "admm-nonconverged"


def povm_best_response(
    m: BellFunctional,
    fixed_other_side: PovmFamily,
    state: SchmidtState,
    x: int,
    tol: float = 1e-9,
) -> tuple[np.ndarray, str]:
    """Optimal measurement for Alice's input x against a fixed Bob family.

    The subproblem is max sum_a tr(E_a C_x^a) with
    C_x^a = sum_{y,b} M[x,y,a,b] D F_y^b D and D = diag(alpha).
    """
    d = fixed_other_side.dim
    if state.dim != d:
        raise ValueError("state dimension must match the fixed POVM family")
    alpha = state.alphas
    weighted = alpha[None, None, :, None] * fixed_other_side.elements * alpha[None, None, None, :]
    c = np.einsum("yab,ybij->aij", m.coeffs[x], weighted)
    return optimal_povm(c, tol=tol)


# ---------------------------------------------------------------------------
# The see-saw loop.


def _value(m: BellFunctional, ea: np.ndarray, fb: np.ndarray, psi: np.ndarray) -> float:
    gf = np.einsum("ybkl,ik,jl->ybij", fb, psi, psi)
    return float(np.einsum("xyab,xaij,ybij->", m.coeffs, ea, gf))


def _random_povm_elements(
    n: int, k: int, d: int, rng: np.random.Generator, spread: float = 0.8
) -> np.ndarray:
    """Rank-one perturbations of the uniform POVM, whitened back to validity.

    The uniform family E_a = I/K is a see-saw fixed point for symmetric
    functionals, so restarts must break it.
    """
    elements = np.empty((n, k, d, d))
    eye = np.eye(d)
    for x in range(n):
        blocks = []
        for _ in range(k):
            vec = rng.standard_normal(d)
            blocks.append(eye / k + spread * np.outer(vec, vec))
        total = sym(sum(blocks))
        vals, vecs = np.linalg.eigh(total)
        whiten = (vecs / np.sqrt(np.clip(vals, 1e-12, None))) @ vecs.T
        for a, block in enumerate(blocks):
            elements[x, a] = sym(whiten @ block @ whiten)
    return elements


def seesaw(m: BellFunctional, cfg: SeesawConfig) -> SeesawResult:
    """Alternating maximization of <M, quantum strategy>; best over restarts.

    Returns rotated POVMs and the state in Schmidt form, so that
    quantum_prob_pure(povm_a, povm_b, state) reproduces the reported value.
    """
    n, k = m.scenario.n_inputs, m.scenario.n_outputs
    d = cfg.dim
    free = cfg.state_mode is None
    best = None
    methods: set[str] = set()

    for restart in range(max(1, cfg.restarts)):
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([cfg.seed, restart]))
        )
        ea = _random_povm_elements(n, k, d, rng)
        fb = _random_povm_elements(n, k, d, rng)
        if free:
            psi = rng.standard_normal((d, d))
            psi /= np.linalg.norm(psi)
        else:
            psi = np.diag(cfg.state_mode.alphas)
        value = _value(m, ea, fb, psi)
        history = [value]
        stall = 0
        rounds = 0
        for rounds in range(1, cfg.max_rounds + 1):
            gf = np.einsum("ybkl,ik,jl->ybij", fb, psi, psi)
            for x in range(n):
                c = np.einsum("yab,ybij->aij", m.coeffs[x], gf)
                cand, method = optimal_povm(c, tol=cfg.subproblem_tol)
                methods.add(method)
                if _subproblem_value(cand, c) > _subproblem_value(ea[x], c):
                    ea[x] = cand
            ge = np.einsum("xaij,ik,jl->xakl", ea, psi, psi)
            for y in range(n):
                c = np.einsum("xab,xakl->bkl", m.coeffs[:, y], ge)
                cand, method = optimal_povm(c, tol=cfg.subproblem_tol)
                methods.add(method)
                if _subproblem_value(cand, c) > _subproblem_value(fb[y], c):
                    fb[y] = cand
            if free:
                op = np.einsum("xyab,xaij,ybkl->ikjl", m.coeffs, ea, fb).reshape(
                    d * d, d * d
                )
                _, vecs = np.linalg.eigh(sym(op))
                psi_new = vecs[:, -1].reshape(d, d)
                if _value(m, ea, fb, psi_new) >= _value(m, ea, fb, psi):
                    psi = psi_new
            new_value = _value(m, ea, fb, psi)
            history.append(new_value)
            if new_value - history[-2] < cfg.tol:
                stall += 1
            else:
                stall = 0
            if stall >= 3:
                break
            value = new_value
        final_value = history[-1]
        if best is None or final_value > best[0]:
            best = (final_value, ea.copy(), fb.copy(), psi.copy(), rounds, tuple(history))

    final_value, ea, fb, psi, rounds, history = best
    # Rotate into the Schmidt frame: Psi = U diag(s) V^T, E' = U^T E U, F' = V^T F V.
    left, singulars, right_t = np.linalg.svd(psi)
    singulars = np.clip(singulars, 0.0, None)
    norm = np.linalg.norm(singulars)
    state = SchmidtState(singulars / norm if norm > 0 else np.eye(1, d)[0])
    right = right_t.T
    ea_rot = np.einsum("xaij,ip,jq->xapq", ea, left, left)
    fb_rot = np.einsum("xaij,ip,jq->xapq", fb, right, right)
    povm_a = PovmFamily(elements=np.array([[sym(e) for e in row] for row in ea_rot]))
    povm_b = PovmFamily(elements=np.array([[sym(e) for e in row] for row in fb_rot]))
    require_valid_povm(povm_a, tol=1e-8, name="see-saw Alice POVM")
    require_valid_povm(povm_b, tol=1e-8, name="see-saw Bob POVM")
    return SeesawResult(
        value=final_value,
        povm_a=povm_a,
        povm_b=povm_b,
        state=state,
        rounds=rounds,
        history=history,
        methods=tuple(sorted(methods)),
    )


def seesaw_magnitude(m: BellFunctional, cfg: SeesawConfig) -> tuple[float, SeesawResult]:
    """Largest |<M, Q>| reachable by see-saw: both signs of M, larger magnitude."""
    plus = seesaw(m, cfg)
    minus = seesaw(m.scaled(-1.0), cfg)
    if abs(plus.value) >= abs(minus.value):
        return abs(plus.value), plus
    return abs(minus.value), minus


def max_entangled_value(
    m: BellFunctional,
    dims,
    restarts: int = 6,
    seed: int = 0,
    max_rounds: int = 60,
    tol: float = 1e-9,
) -> tuple[int, float]:
    """Best fixed-state see-saw value over maximally entangled states of the
    given dimensions; returns (best_dim, value)."""
    dims = list(dims)
    if not dims:
        raise ValueError("dims must be nonempty")
    best_k, best_value = dims[0], -np.inf
    for dim in dims:
        cfg = SeesawConfig(
            dim=dim,
            restarts=restarts,
            seed=seed,
            max_rounds=max_rounds,
            tol=tol,
            state_mode=build_state(maximally_entangled=dim),
        )
        result = seesaw(m, cfg)
        if result.value > best_value:
            best_k, best_value = dim, result.value
    return best_k, float(best_value)
