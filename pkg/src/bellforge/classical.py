"""Optimization over local-hidden-variable strategies.

The exact solver enumerates Alice's deterministic assignments and computes
Bob's best response analytically per input, so the cost is K^N * N * K rather
than K^N * K^N.  A seeded coordinate-ascent heuristic covers scenarios beyond
the enumeration budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError
from .model import BellFunctional, DeterministicStrategy

DEFAULT_BUDGET = 10**8
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class ClassicalResult:
    """Signed extrema of <M, P> over deterministic strategy pairs.

    ``value`` is max(|max_value|, |min_value|), the classical value of the
    functional over the local set; ``argmax`` attains the winning magnitude.
    """

    value: float
    max_value: float
    min_value: float
    argmax: tuple[DeterministicStrategy, DeterministicStrategy]
    exact: bool


def _decode_strategies(indices: np.ndarray, n: int, k: int) -> np.ndarray:
    """Mixed-radix decode of strategy indices into an (R, n) choice table."""
    out = np.empty((indices.size, n), dtype=np.int64)
    rest = indices.copy()
    for x in range(n):
        out[:, x] = rest % k
        rest //= k
    return out


def _bob_best(m: BellFunctional, alice: np.ndarray, minimize: bool) -> np.ndarray:
    """Bob's optimal response to a fixed Alice assignment."""
    n = m.scenario.n_inputs
    sel = m.coeffs[np.arange(n), :, alice, :]  # (x, y, b)
    c = sel.sum(axis=0)
    return np.argmin(c, axis=1) if minimize else np.argmax(c, axis=1)


def classical_value_exact(m: BellFunctional, budget: int = DEFAULT_BUDGET) -> ClassicalResult:
    """Exact classical value by enumerating Alice with analytic Bob responses.

    Raises BudgetExceededError (naming the required budget) when
    K^N * N * K would exceed `budget`; callers fall back to local search.
    """
    n, k = m.scenario.n_inputs, m.scenario.n_outputs
    total = k**n
    required = total * n * k
    if required > budget:
        raise BudgetExceededError(required=required, budget=budget, what="classical enumeration")

    # Layout (x, a, y*b) so each Alice assignment is a plain row gather.
    flat = m.coeffs.transpose(0, 2, 1, 3).reshape(n, k, n * k)
    chunk_rows = max(1, _CHUNK_ELEMENTS // (n * k))
    best_max = -np.inf
    best_min = np.inf
    arg_max_idx = arg_min_idx = 0
    for start in range(0, total, chunk_rows):
        idx = np.arange(start, min(start + chunk_rows, total), dtype=np.int64)
        assign = _decode_strategies(idx, n, k)
        c = np.zeros((idx.size, n * k))
        for x in range(n):
            c += flat[x][assign[:, x]]
        c = c.reshape(idx.size, n, k)
        hi = c.max(axis=2).sum(axis=1)
        lo = c.min(axis=2).sum(axis=1)
        i_hi = int(np.argmax(hi))
        i_lo = int(np.argmin(lo))
        if hi[i_hi] > best_max:
            best_max, arg_max_idx = float(hi[i_hi]), int(idx[i_hi])
        if lo[i_lo] < best_min:
            best_min, arg_min_idx = float(lo[i_lo]), int(idx[i_lo])

    winner_idx = arg_max_idx if abs(best_max) >= abs(best_min) else arg_min_idx
    minimize = abs(best_max) < abs(best_min)
    alice = _decode_strategies(np.array([winner_idx]), n, k)[0]
    bob = _bob_best(m, alice, minimize=minimize)
    argmax = (
        DeterministicStrategy(m.scenario, tuple(alice)),
        DeterministicStrategy(m.scenario, tuple(bob)),
    )
    return ClassicalResult(
        value=max(abs(best_max), abs(best_min)),
        max_value=best_max,
        min_value=best_min,
        argmax=argmax,
        exact=True,
    )


def _ascend(m: BellFunctional, alice: np.ndarray, bob: np.ndarray, minimize: bool):
    """Alternate best responses until a fixed point; returns (a, b, value)."""
    n = m.scenario.n_inputs
    pick = np.argmin if minimize else np.argmax
    value = -np.inf if not minimize else np.inf
    for _ in range(1000):
        # Alice against Bob: cA[x, a] = sum_y M[x, y, a, b_y]
        c_alice = m.coeffs[:, np.arange(n), :, bob].sum(axis=0)
        alice = pick(c_alice, axis=1)
        # Bob against Alice: cB[y, b] = sum_x M[x, y, a_x, b]
        c_bob = m.coeffs[np.arange(n), :, alice, :].sum(axis=0)
        bob = pick(c_bob, axis=1)
        new_value = float(c_bob[np.arange(n), bob].sum())
        if (new_value <= value) if not minimize else (new_value >= value):
            break
        value = new_value
    return alice, bob, value


def classical_value_local(
    m: BellFunctional, restarts: int = 64, seed: int = 0
) -> ClassicalResult:
    """Heuristic classical value: seeded coordinate ascent, best over restarts.

    Each restart runs one maximizing and one minimizing chain from a random
    strategy pair.  Ties break toward the lowest output index, so results are
    reproducible for a given seed.  Always a lower bound on the exact value.
    """
    n, k = m.scenario.n_inputs, m.scenario.n_outputs
    best_max, best_min = -np.inf, np.inf
    arg_hi = arg_lo = None
    for r in range(max(1, restarts)):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, r])))
        a0 = rng.integers(0, k, size=n)
        b0 = rng.integers(0, k, size=n)
        a_hi, b_hi, hi = _ascend(m, a0.copy(), b0.copy(), minimize=False)
        a_lo, b_lo, lo = _ascend(m, a0.copy(), b0.copy(), minimize=True)
        if hi > best_max:
            best_max, arg_hi = hi, (a_hi, b_hi)
        if lo < best_min:
            best_min, arg_lo = lo, (a_lo, b_lo)
    winner = arg_hi if abs(best_max) >= abs(best_min) else arg_lo
    argmax = (
        DeterministicStrategy(m.scenario, tuple(winner[0])),
        DeterministicStrategy(m.scenario, tuple(winner[1])),
    )
    return ClassicalResult(
        value=max(abs(best_max), abs(best_min)),
        max_value=best_max,
        min_value=best_min,
        argmax=argmax,
        exact=False,
    )


def epsilon_norm_exact(m: BellFunctional, budget: int = DEFAULT_BUDGET) -> float:
    """Injective tensor norm over signed deterministic extreme points.

    Alice ranges over per-input (output, sign) choices; for each such choice
    Bob's optimum is sum_y max_b |c_y(b)|.  The value dominates the classical
    value, and a global Alice sign flip is quotiented out.
    """
    n, k = m.scenario.n_inputs, m.scenario.n_outputs
    required = (2 * k) ** n
    if required > budget:
        raise BudgetExceededError(required=required, budget=budget, what="dual-ball enumeration")

    # Signed layout: index t in [0, 2K) means output t % K with sign +1 for
    # t < K and -1 otherwise.  The first input's sign is pinned to +1.
    flat = m.coeffs.transpose(0, 2, 1, 3).reshape(n, k, n * k)
    signed = np.concatenate([flat, -flat], axis=1)  # (x, 2K, y*b)
    total = k * (2 * k) ** max(n - 1, 0)
    chunk_rows = max(1, _CHUNK_ELEMENTS // (n * k))
    best = 0.0
    for start in range(0, total, chunk_rows):
        idx = np.arange(start, min(start + chunk_rows, total), dtype=np.int64)
        c = np.zeros((idx.size, n * k))
        rest = idx % k
        c += signed[0][rest]
        rest = idx // k
        for x in range(1, n):
            c += signed[x][rest % (2 * k)]
            rest //= 2 * k
        vals = np.abs(c.reshape(idx.size, n, k)).max(axis=2).sum(axis=1)
        best = max(best, float(vals.max()))
    return best
