"""Schmidt-diagonal pure states |phi> = sum_i alpha_i |ii>."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SchmidtState:
    """Nonincreasing, normalized Schmidt coefficients of a bipartite pure state."""

    alphas: np.ndarray = field()

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("Schmidt coefficients must be a nonempty 1-d sequence")
        if np.any(a < -1e-15):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if np.any(np.diff(a) > 1e-15):
            raise ValueError("Schmidt coefficients must be nonincreasing")
        if abs(float(a @ a) - 1.0) > 1e-12:
            raise ValueError("Schmidt coefficients must have unit 2-norm")
        object.__setattr__(self, "alphas", a)

    @property
    def dim(self) -> int:
        return int(self.alphas.size)

    def vector(self) -> np.ndarray:
        """The state as a dense vector in the dim^2 product space (ii-diagonal)."""
        d = self.dim
        psi = np.zeros(d * d)
        psi[np.arange(d) * d + np.arange(d)] = self.alphas
        return psi


def build_state(
    alphas=None,
    alpha_top: float | None = None,
    n: int | None = None,
    maximally_entangled: int | None = None,
) -> SchmidtState:
    """Build a Schmidt state from one of three profiles.

    Exactly one of the following must be supplied:
      * ``alphas``: explicit coefficients, normalized and sorted here;
      * ``alpha_top`` with ``n``: the two-level profile with top coefficient
        alpha and n equal coefficients sqrt(1 - alpha^2)/sqrt(n) below it
        (dimension n + 1);
      * ``maximally_entangled``: uniform coefficients 1/sqrt(dim).
    """
    supplied = sum(x is not None for x in (alphas, alpha_top, maximally_entangled))
    if supplied != 1:
        raise ValueError("supply exactly one of alphas, alpha_top(+n), maximally_entangled")
    if alphas is not None:
        a = np.asarray(alphas, dtype=float)
        if np.any(a < 0):
            raise ValueError("explicit coefficients must be nonnegative")
        norm = float(np.linalg.norm(a))
        if norm <= 0.0:
            raise ValueError("all-zero coefficient profile")
        a = np.sort(a / norm)[::-1]
        return SchmidtState(a)
    if alpha_top is not None:
        if n is None or n < 1:
            raise ValueError("the two-level profile needs n >= 1")
        if not 0.0 <= alpha_top <= 1.0:
            raise ValueError("alpha_top must lie in [0, 1]")
        rest = np.sqrt(max(1.0 - alpha_top * alpha_top, 0.0) / n)
        a = np.concatenate(([alpha_top], np.full(n, rest)))
        a = np.sort(a)[::-1]
        a /= np.linalg.norm(a)
        return SchmidtState(a)
    d = int(maximally_entangled)
    if d < 1:
        raise ValueError("dimension must be positive")
    return SchmidtState(np.full(d, 1.0 / np.sqrt(d)))
