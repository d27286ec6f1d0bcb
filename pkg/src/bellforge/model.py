"""Scenario data model: Bell functionals, probability tables, and pairings.

Conventions: inputs x, y and outputs a, b are 0-based indices throughout the
code; tensors are indexed (x, y, a, b).  Both parties share the same number of
inputs and outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ScenarioMismatchError, UndefinedRatioError
from .povm import PovmFamily, require_valid_povm
from .states import SchmidtState

SUM_TOL = 1e-9
NEG_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    """A bipartite measurement scenario with N inputs and K outputs per party."""

    n_inputs: int
    n_outputs: int

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("scenario needs at least one input and one output")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        n, k = self.n_inputs, self.n_outputs
        return (n, n, k, k)


@dataclass(frozen=True)
class BellFunctional:
    """Real coefficient tensor M[x, y, a, b] paired linearly with tables."""

    scenario: Scenario
    coeffs: np.ndarray = field()
    provenance: Any = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != self.scenario.shape:
            raise ValueError(
                f"coefficient shape {c.shape} does not match scenario {self.scenario.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coeffs(cls, coeffs, provenance: Any = None) -> "BellFunctional":
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 4 or c.shape[0] != c.shape[1] or c.shape[2] != c.shape[3]:
            raise ValueError(f"expected an (N, N, K, K) tensor, got shape {c.shape}")
        return cls(Scenario(c.shape[0], c.shape[2]), c, provenance)

    def scaled(self, factor: float) -> "BellFunctional":
        return BellFunctional(self.scenario, self.coeffs * factor)

    def transposed(self) -> "BellFunctional":
        """Swap the two parties: M'[y, x, b, a] = M[x, y, a, b]."""
        return BellFunctional(self.scenario, self.coeffs.transpose(1, 0, 3, 2).copy())


@dataclass(frozen=True)
class ProbabilityTable:
    """Conditional distribution p(a, b | x, y), one distribution per input pair."""

    scenario: Scenario
    p: np.ndarray = field()

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != self.scenario.shape:
            raise ValueError(
                f"table shape {p.shape} does not match scenario {self.scenario.shape}"
            )
        if np.min(p) < -NEG_TOL:
            raise ValueError(f"negative probability {np.min(p):.3e} below -{NEG_TOL:g}")
        sums = p.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > SUM_TOL:
            raise ValueError(
                f"per-(x,y) sums deviate from 1 by {np.max(np.abs(sums - 1.0)):.3e}"
            )
        object.__setattr__(self, "p", p)

    def clamped(self) -> np.ndarray:
        """Entries with eigen-roundoff negatives (>= -1e-12) clamped to zero."""
        return np.clip(self.p, 0.0, None)


@dataclass(frozen=True)
class DeterministicStrategy:
    """One output choice per input (0-based indices)."""

    scenario: Scenario
    choice: tuple[int, ...]

    def __post_init__(self):
        choice = tuple(int(c) for c in self.choice)
        if len(choice) != self.scenario.n_inputs:
            raise ValueError("strategy length must equal the number of inputs")
        if any(c < 0 or c >= self.scenario.n_outputs for c in choice):
            raise ValueError("strategy outputs out of range")
        object.__setattr__(self, "choice", choice)


def _require_same_scenario(a, b) -> Scenario:
    if a.scenario != b.scenario:
        raise ScenarioMismatchError(f"{a.scenario} vs {b.scenario}")
    return a.scenario


def pair(m: BellFunctional, table: ProbabilityTable) -> float:
    """Duality pairing <M, P> = sum M[x,y,a,b] * p(a,b|x,y)."""
    _require_same_scenario(m, table)
    return float(np.tensordot(m.coeffs, table.p, axes=4))


def check_nonsignalling(table: ProbabilityTable, tol: float = 1e-9) -> tuple[bool, float]:
    """Whether both parties' marginals ignore the other party's input.

    Returns (ok, residual) where residual is the largest marginal variation
    across the other party's inputs.
    """
    p = table.p
    marg_a = p.sum(axis=3)  # (x, y, a): Alice's marginal, should not depend on y
    marg_b = p.sum(axis=2)  # (x, y, b): Bob's marginal, should not depend on x
    res_a = float(np.max(marg_a.max(axis=1) - marg_a.min(axis=1), initial=0.0))
    res_b = float(np.max(marg_b.max(axis=0) - marg_b.min(axis=0), initial=0.0))
    residual = max(res_a, res_b)
    return residual <= tol, residual


def quantum_prob_pure(
    povm_a: PovmFamily, povm_b: PovmFamily, state: SchmidtState, validate_tol: float = 1e-8
) -> ProbabilityTable:
    """Probability table of measuring a Schmidt-diagonal pure state.

    For real symmetric POVMs, p(a,b|x,y) = sum_{i,j} alpha_i alpha_j
    E_x^a[i,j] F_y^b[i,j], which equals <phi| E tensor F |phi>.
    """
    if povm_a.n_inputs != povm_b.n_inputs or povm_a.n_outputs != povm_b.n_outputs:
        raise ScenarioMismatchError("POVM families have different scenarios")
    if povm_a.dim != state.dim or povm_b.dim != state.dim:
        raise ScenarioMismatchError(
            f"POVM dims ({povm_a.dim}, {povm_b.dim}) do not match state dim {state.dim}"
        )
    require_valid_povm(povm_a, tol=validate_tol, name="Alice POVM")
    require_valid_povm(povm_b, tol=validate_tol, name="Bob POVM")
    a = state.alphas
    weighted = a[:, None] * a[None, :]
    p = np.einsum("ij,xaij,ybij->xyab", weighted, povm_a.elements, povm_b.elements)
    p = np.where(np.abs(p) < NEG_TOL, np.clip(p, 0.0, None), p)
    scenario = Scenario(povm_a.n_inputs, povm_a.n_outputs)
    return ProbabilityTable(scenario, p)


def deterministic_prob(
    strat_a: DeterministicStrategy, strat_b: DeterministicStrategy
) -> ProbabilityTable:
    """Point-mass table: p = 1 exactly at (x, y, sA(x), sB(y))."""
    scenario = _require_same_scenario(strat_a, strat_b)
    n, _, k, _ = scenario.shape
    p = np.zeros(scenario.shape)
    for x, a in enumerate(strat_a.choice):
        for y, b in enumerate(strat_b.choice):
            p[x, y, a, b] = 1.0
    return ProbabilityTable(scenario, p)


def zeta1(m: BellFunctional, quantum_value: float, classical_value: float) -> float:
    """Violation ratio |quantum| / classical from already-computed bounds.

    The 0/0 := 0 convention of the band-width distance is surfaced as an
    explicit error instead of a silent zero.
    """
    if classical_value <= 1e-15:
        raise UndefinedRatioError(
            f"classical value {classical_value:.3e} too small for a meaningful ratio"
        )
    return abs(quantum_value) / classical_value


def chsh_game() -> BellFunctional:
    """The CHSH game functional: weight 1/4 on events with a XOR b = x AND y."""
    coeffs = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    if (a + b) % 2 == (x & y):
                        coeffs[x, y, a, b] = 0.25
    return BellFunctional.from_coeffs(coeffs)


def functional_to_json(m: BellFunctional) -> str:
    return json.dumps(
        {
            "n_inputs": m.scenario.n_inputs,
            "n_outputs": m.scenario.n_outputs,
            "coeffs": m.coeffs.tolist(),
        }
    )


def functional_from_json(text: str) -> BellFunctional:
    data = json.loads(text)
    try:
        scenario = Scenario(int(data["n_inputs"]), int(data["n_outputs"]))
        coeffs = np.asarray(data["coeffs"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed BellFunctional JSON: {exc}") from exc
    return BellFunctional(scenario, coeffs)


def table_to_json(table: ProbabilityTable) -> str:
    return json.dumps(
        {
            "n_inputs": table.scenario.n_inputs,
            "n_outputs": table.scenario.n_outputs,
            "p": table.p.tolist(),
        }
    )


def table_from_json(text: str) -> ProbabilityTable:
    data = json.loads(text)
    try:
        scenario = Scenario(int(data["n_inputs"]), int(data["n_outputs"]))
        p = np.asarray(data["p"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed ProbabilityTable JSON: {exc}") from exc
    return ProbabilityTable(scenario, p)
