"""POVM families: per-input lists of PSD matrices summing to the identity."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import PovmValidationError
from .linalg import spectral_norm, sym


@dataclass(frozen=True)
class PovmFamily:
    """Measurement elements indexed (input, outcome), each a d x d symmetric matrix.

    ``elements`` has shape (n_inputs, n_outputs, dim, dim).  ``provenance`` is
    an optional opaque tag recording how the family was built (used to replay
    and to pair construction outputs safely).
    """

    elements: np.ndarray = field()
    provenance: Any = None

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=float)
        if e.ndim != 4 or e.shape[2] != e.shape[3]:
            raise ValueError(f"POVM elements must have shape (N, K, d, d), got {e.shape}")
        object.__setattr__(self, "elements", e)

    @property
    def n_inputs(self) -> int:
        return self.elements.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.elements.shape[1]

    @property
    def dim(self) -> int:
        return self.elements.shape[2]


@dataclass(frozen=True)
class PovmReport:
    """Validation outcome: worst PSD defect and completeness residual per input."""

    min_eigenvalues: np.ndarray  # (N, K) smallest eigenvalue of each element
    completeness_residuals: np.ndarray  # (N,) spectral norm of sum_a E_x^a - I
    tol: float

    @property
    def min_eigenvalue(self) -> float:
        return float(self.min_eigenvalues.min())

    @property
    def max_completeness_residual(self) -> float:
        return float(self.completeness_residuals.max())

    @property
    def passed(self) -> bool:
        return (
            self.min_eigenvalue >= -self.tol
            and self.max_completeness_residual <= self.tol
        )


def validate_povm(povm: PovmFamily, tol: float = 1e-9) -> PovmReport:
    """Check positivity and completeness of every input's measurement.

    Never raises; the report carries the failures (smallest eigenvalue per
    element, per-input residual ||sum_a E_x^a - I|| in spectral norm).
    """
    e = povm.elements
    n, k, d, _ = e.shape
    mins = np.empty((n, k))
    residuals = np.empty(n)
    eye = np.eye(d)
    for x in range(n):
        for a in range(k):
            mins[x, a] = np.linalg.eigvalsh(sym(e[x, a]))[0]
        residuals[x] = spectral_norm(e[x].sum(axis=0) - eye)
    return PovmReport(min_eigenvalues=mins, completeness_residuals=residuals, tol=tol)


def require_valid_povm(povm: PovmFamily, tol: float = 1e-8, name: str = "POVM") -> None:
    """Raise PovmValidationError when the family fails validation at `tol`."""
    report = validate_povm(povm, tol=tol)
    if not report.passed:
        raise PovmValidationError(
            f"{name} invalid: min eigenvalue {report.min_eigenvalue:.3e}, "
            f"completeness residual {report.max_completeness_residual:.3e} at tol {tol:g}",
            witness=report.min_eigenvalue,
        )


def identity_povm(n_inputs: int, dim: int) -> PovmFamily:
    """The single-outcome family E_x^1 = I for every input."""
    e = np.broadcast_to(np.eye(dim), (n_inputs, 1, dim, dim)).copy()
    return PovmFamily(elements=e)


def random_povm(
    n_inputs: int, n_outputs: int, dim: int, rng: np.random.Generator
) -> PovmFamily:
    """Random valid POVM family: Wishart blocks whitened by the total sum.

    E_x^a = S^{-1/2} G_a G_a^T S^{-1/2} with S = sum_a G_a G_a^T, which is PSD
    and complete by construction.
    """
    elements = np.empty((n_inputs, n_outputs, dim, dim))
    for x in range(n_inputs):
        blocks = []
        for _ in range(n_outputs):
            g = rng.standard_normal((dim, dim))
            blocks.append(g @ g.T)
        total = sym(sum(blocks))
        vals, vecs = np.linalg.eigh(total)
        vals = np.clip(vals, 1e-12, None)
        whiten = (vecs / np.sqrt(vals)) @ vecs.T
        for a, block in enumerate(blocks):
            elements[x, a] = sym(whiten @ block @ whiten)
    return PovmFamily(elements=elements)
