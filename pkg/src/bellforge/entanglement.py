"""Entanglement measures, the dyadic block decomposition, and extraction of
maximally entangled witnesses from positive functionals.

Logs are base 2 throughout; entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PositivityError
from .model import BellFunctional
from .povm import PovmFamily
from .seesaw import bell_operator
from .states import SchmidtState


def entropy_of_entanglement(state: SchmidtState) -> float:
    """Von Neumann entropy of the reduced state, -sum alpha_i^2 log2 alpha_i^2."""
    p = state.alphas**2
    p = p[p > 0.0]
    return float(-(p @ np.log2(p)))


def f_alpha(n: int, alpha: float) -> float:
    """Entropy of the two-level profile with top coefficient alpha over n + 1 levels.

    Closed form alpha^2 log2(1/alpha^2) + (1 - alpha^2) log2(n / (1 - alpha^2)),
    with the 0 log 0 := 0 convention at both endpoints.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a2 = alpha * alpha
    rest = 1.0 - a2
    out = 0.0
    if a2 > 0.0:
        out -= a2 * np.log2(a2)
    if rest > 0.0:
        out += rest * np.log2(n / rest)
    return float(out)


@dataclass(frozen=True)
class DeltaClassification:
    entropy: float
    gap: float
    is_delta_max_entangled: bool
    is_delta_non_entangled: bool

    @property
    def label(self) -> str:
        if self.is_delta_max_entangled and self.is_delta_non_entangled:
            return "both"
        if self.is_delta_max_entangled:
            return "delta_max_entangled"
        if self.is_delta_non_entangled:
            return "delta_non_entangled"
        return "neither"


def delta_classify(state: SchmidtState, delta: float) -> DeltaClassification:
    """Strict-inequality classification against the two delta thresholds.

    A state is delta-maximally entangled when log2(dim) - E < delta and
    delta-non-entangled when E < delta; both flags are reported since they
    can coincide for tiny dimensions.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    entropy = entropy_of_entanglement(state)
    gap = float(np.log2(state.dim)) - entropy
    return DeltaClassification(
        entropy=entropy,
        gap=gap,
        is_delta_max_entangled=gap < delta,
        is_delta_non_entangled=entropy < delta,
    )


def iviol(state: SchmidtState) -> float:
    """Violation indicator ||psi||_inf * ||psi||_1 = alpha_1 * sum_i alpha_i (>= 1)."""
    a = state.alphas
    return float(a[0] * a.sum())


@dataclass(frozen=True)
class DyadicDecomposition:
    """Positive combination of uniform-block vectors reconstructing a state.

    Each term is (beta, indices): beta > 0 and a 0-based index tuple lying
    inside a single dyadic interval [2^(k-1) - 1, 2^k - 2].
    """

    terms: tuple
    source_dim: int

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.source_dim)
        for beta, indices in self.terms:
            out[list(indices)] += beta / np.sqrt(len(indices))
        return out

    def beta_sum(self) -> float:
        return float(sum(beta for beta, _ in self.terms))

    def block_vectors(self) -> np.ndarray:
        """Columns are the normalized uniform indicators, shape (dim, n_terms)."""
        phi = np.zeros((self.source_dim, len(self.terms)))
        for s, (_, indices) in enumerate(self.terms):
            phi[list(indices), s] = 1.0 / np.sqrt(len(indices))
        return phi

    def to_json_dict(self) -> dict:
        return {
            "source_dim": self.source_dim,
            "terms": [
                {"beta": beta, "indices": list(indices)} for beta, indices in self.terms
            ],
        }


def dyadic_decompose(coeffs) -> DyadicDecomposition:
    """Write a sorted nonnegative vector as a short positive combination of
    states uniform on nested subsets of dyadic index blocks.

    Within block k the sorted entries are peeled off as a staircase of prefix
    indicators (the cube's extreme points), giving at most |block| terms with
    exact reconstruction and sum of weights <= 2 sqrt(log2 n) for n >= 2.
    """
    a = np.asarray(coeffs, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("coefficients must be a nonempty 1-d sequence")
    if np.any(a < 0.0):
        raise ValueError("coefficients must be nonnegative")
    if np.any(np.diff(a) > 0.0):
        raise ValueError("coefficients must be sorted nonincreasing")
    if float(a @ a) > 1.0 + 1e-12:
        raise ValueError("coefficients must have 2-norm at most 1")

    n = a.size
    terms = []
    k = 1
    while (1 << (k - 1)) <= n:
        lo = (1 << (k - 1)) - 1
        hi = min((1 << k) - 1, n)
        seg = a[lo:hi]
        top = float(seg[0])
        if top <= 0.0:
            break  # sorted, so every later block is zero too
        ratios = seg / top
        m = seg.size
        for j in range(m):
            step = float(ratios[j] - (ratios[j + 1] if j + 1 < m else 0.0))
            if step <= 0.0:
                continue
            indices = tuple(range(lo, lo + j + 1))
            beta = step * top * np.sqrt(len(indices))
            terms.append((float(beta), indices))
        k += 1
    return DyadicDecomposition(terms=tuple(terms), source_dim=n)


# ---------------------------------------------------------------------------
# Extraction of maximally entangled witnesses.


def _diag_compression(
    m: BellFunctional, povm_a: PovmFamily, povm_b: PovmFamily
) -> np.ndarray:
    """d x d matrix with <ii| sum M E tensor F |jj> entries."""
    return np.einsum(
        "xyab,xaij,ybij->ij", m.coeffs, povm_a.elements, povm_b.elements
    )


@dataclass(frozen=True)
class ExtractionResult:
    k: int
    support: tuple
    coeffs: np.ndarray
    value: float
    total: float  # the full state's pairing C


def extract_max_entangled(
    m: BellFunctional,
    povm_a: PovmFamily,
    povm_b: PovmFamily,
    state: SchmidtState,
    premise_tol: float = 1e-8,
) -> ExtractionResult:
    """Find a uniform-block state whose pairing is at least C / (4 log2 d).

    Requires nonnegative coefficients, or failing that a numerically PSD Bell
    operator.  The state is dyadically decomposed; the pair with the largest
    cross term is located and the Cauchy-Schwarz step selects whichever of
    the two blocks pairs better.  A state already uniform on its support is
    returned as-is.
    """
    if not np.all(m.coeffs >= 0.0):
        witness = float(np.linalg.eigvalsh(bell_operator(m, povm_a, povm_b))[0])
        if witness < -premise_tol:
            raise PositivityError(
                f"Bell operator has eigenvalue {witness:.3e}; positivity premise fails",
                witness=witness,
            )
    diag = _diag_compression(m, povm_a, povm_b)
    alpha = state.alphas
    total = float(alpha @ diag @ alpha)
    if total <= 0.0:
        raise PositivityError(
            f"state pairs to nonpositive value {total:.3e}", witness=total
        )
    support = np.flatnonzero(alpha > 0.0)
    on_support = alpha[support]
    if float(on_support.max() - on_support.min()) <= 1e-15:
        return ExtractionResult(
            k=int(support.size),
            support=tuple(int(i) for i in support),
            coeffs=alpha.copy(),
            value=total,
            total=total,
        )
    decomp = dyadic_decompose(alpha)
    phi = decomp.block_vectors()
    cross = phi.T @ diag @ phi
    p_star, q_star = np.unravel_index(int(np.argmax(cross)), cross.shape)
    pick = p_star if cross[p_star, p_star] >= cross[q_star, q_star] else q_star
    indices = decomp.terms[pick][1]
    coeffs = np.zeros_like(alpha)
    coeffs[list(indices)] = 1.0 / np.sqrt(len(indices))
    return ExtractionResult(
        k=len(indices),
        support=indices,
        coeffs=coeffs,
        value=float(cross[pick, pick]),
        total=total,
    )


@dataclass(frozen=True)
class PolarizationResult:
    k_power: int
    support_left: tuple
    support_right: tuple
    coeffs: np.ndarray  # complex, non-normalized superposition
    value: float
    total: float


def polarization_select(
    m: BellFunctional,
    povm_a: PovmFamily,
    povm_b: PovmFamily,
    state: SchmidtState,
) -> PolarizationResult:
    """Best superposition phi_A + i^k phi_B of two decomposition blocks.

    No positivity is required of the functional; all block pairs and all four
    phase powers are scanned and the pairing of largest magnitude is returned
    (the polarization identity guarantees |value| >= C / (16 log2 d); a
    negative witness certifies the negated functional the same way).  For a
    real symmetric Bell operator the odd powers contribute no cross term, so
    k in {0, 2} always attains the maximum.
    """
    diag = _diag_compression(m, povm_a, povm_b)
    alpha = state.alphas
    total = float(alpha @ diag @ alpha)
    if abs(total) <= 0.0:
        raise PositivityError("state pairs to zero; nothing to polarize", witness=0.0)
    decomp = dyadic_decompose(alpha)
    if not decomp.terms:
        raise PositivityError("empty decomposition", witness=0.0)
    phi = decomp.block_vectors()
    best = None
    n_terms = phi.shape[1]
    for p in range(n_terms):
        for q in range(n_terms):
            for k_power in range(4):
                xi = phi[:, p].astype(complex) + (1j**k_power) * phi[:, q]
                if float(np.linalg.norm(xi)) <= 1e-12:
                    continue  # p == q with opposite phase collapses to zero
                value = float(np.real(np.conj(xi) @ diag @ xi))
                if best is None or abs(value) > abs(best[0]):
                    best = (value, p, q, k_power, xi)
    value, p, q, k_power, xi = best
    return PolarizationResult(
        k_power=k_power,
        support_left=decomp.terms[p][1],
        support_right=decomp.terms[q][1],
        coeffs=xi,
        value=value,
        total=abs(total),
    )
