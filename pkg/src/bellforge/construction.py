"""The explicit violation machine: sign tensors, coefficients, POVMs, states.

A draw of n^3 signs eps[x, a, k] produces

  * Bell coefficients  M[x,y,a,b] = (1/n^2) sum_k eps[x,a,k] eps[y,b,k]
    for a, b < n, padded with zeros at the extra (n+1)-th output;
  * rank-one measurement elements E_x^a = u u^T / (n K) built from the
    rows u = (1, eps[x,a,1], ..., eps[x,a,n]), completed by E_x^{n+1}
    = I - sum_a E_x^a, which is PSD whenever K >= 2 K2^2 for the realized
    row-spectral bound K2;
  * a closed-form lower bound on the quantum value against any Schmidt
    state, split into three nonnegative terms.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .classical import ClassicalResult, classical_value_exact, classical_value_local
from .errors import BudgetExceededError, PovmValidationError, ProvenanceError
from .model import BellFunctional, Scenario
from .povm import PovmFamily, PovmReport, validate_povm
from .states import SchmidtState, build_state

DISTRIBUTIONS = ("bernoulli", "gaussian")


@dataclass(frozen=True)
class SignTensor:
    """An n x n x n draw eps[x, a, k], plus the metadata to replay it."""

    n: int
    eps: np.ndarray = field()
    seed: int
    distribution: str

    def __post_init__(self):
        e = np.asarray(self.eps, dtype=float)
        if e.shape != (self.n, self.n, self.n):
            raise ValueError(f"sign tensor must be ({self.n},)*3, got {e.shape}")
        if self.distribution == "bernoulli" and not np.all(np.abs(e) == 1.0):
            raise ValueError("bernoulli entries must be exactly +1 or -1")
        object.__setattr__(self, "eps", e)

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n}|{self.seed}|{self.distribution}|".encode())
        h.update(self.eps.tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class ConstructionTag:
    """Provenance attached to construction outputs so they can be paired safely."""

    n: int
    seed: int
    distribution: str
    digest: str
    k_scale: float | None = None


def gen_signs(n: int, seed: int, distribution: str = "bernoulli") -> SignTensor:
    """Draw the n^3 sign (or gaussian) tensor from a counter-based generator.

    Uses a Philox bit generator keyed by `seed`, so identical (n, seed,
    distribution) reproduce the same tensor bit for bit on any platform
    running the pinned numpy generation code.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    if distribution == "bernoulli":
        eps = rng.integers(0, 2, size=(n, n, n)).astype(float) * 2.0 - 1.0
    else:
        eps = rng.standard_normal((n, n, n))
    return SignTensor(n=n, eps=eps, seed=seed, distribution=distribution)


def signs_to_json(signs: SignTensor) -> str:
    """Serialize as replay metadata; bernoulli draws also pack their bits."""
    payload: dict[str, Any] = {
        "n": signs.n,
        "seed": signs.seed,
        "distribution": signs.distribution,
        "digest": signs.digest,
    }
    if signs.distribution == "bernoulli":
        bits = (signs.eps.reshape(-1) > 0).astype(np.uint8)
        payload["packed_bits"] = base64.b64encode(np.packbits(bits).tobytes()).decode()
    return json.dumps(payload)


def signs_from_json(text: str) -> SignTensor:
    """Regenerate a sign tensor from its metadata and verify the digest."""
    data = json.loads(text)
    signs = gen_signs(int(data["n"]), int(data["seed"]), data["distribution"])
    if signs.digest != data["digest"]:
        raise ProvenanceError(
            f"replayed digest {signs.digest} does not match stored {data['digest']}"
        )
    if "packed_bits" in data:
        raw = np.frombuffer(base64.b64decode(data["packed_bits"]), dtype=np.uint8)
        bits = np.unpackbits(raw)[: signs.n**3]
        if not np.array_equal(bits, (signs.eps.reshape(-1) > 0).astype(np.uint8)):
            raise ProvenanceError("packed bits disagree with the replayed draw")
    return signs


def build_bell(signs: SignTensor) -> BellFunctional:
    """Coefficients (1/n^2) sum_k eps[x,a,k] eps[y,b,k], zero-padded to K = n+1."""
    n = signs.n
    coeffs = np.zeros((n, n, n + 1, n + 1))
    coeffs[:, :, :n, :n] = np.einsum("xak,ybk->xyab", signs.eps, signs.eps) / n**2
    tag = ConstructionTag(signs.n, signs.seed, signs.distribution, signs.digest)
    return BellFunctional(Scenario(n, n + 1), coeffs, provenance=tag)


def row_spectral_bound(signs: SignTensor) -> float:
    """K2 = max over inputs x of the spectral norm of (eps[x,a,k] / sqrt(n))."""
    scaled = signs.eps / np.sqrt(signs.n)
    return float(max(np.linalg.norm(scaled[x], 2) for x in range(signs.n)))


def scale_constant(k2: float) -> float:
    """The normalization K = 2 K2^2 that makes the completion element PSD."""
    return 2.0 * k2 * k2


def build_povms(signs: SignTensor, k_scale: float, psd_tol: float = 1e-10) -> PovmFamily:
    """Rank-one measurements E_x^a = u u^T / (n K) plus the completion element.

    Requires k_scale large enough that E_x^{n+1} = I - sum_a E_x^a stays PSD;
    if its smallest eigenvalue drops below -psd_tol the constant is rejected,
    reporting the witness eigenvalue.
    """
    n = signs.n
    d = n + 1
    u = np.concatenate([np.ones((n, n, 1)), signs.eps], axis=2)  # (x, a, d)
    elements = np.empty((n, d, d, d))
    elements[:, :n] = np.einsum("xai,xaj->xaij", u, u) / (n * k_scale)
    eye = np.eye(d)
    worst = np.inf
    for x in range(n):
        last = eye - elements[x, :n].sum(axis=0)
        elements[x, n] = (last + last.T) / 2.0
        worst = min(worst, float(np.linalg.eigvalsh(elements[x, n])[0]))
    if worst < -psd_tol:
        raise PovmValidationError(
            f"scale constant {k_scale:.6g} too small: completion element has "
            f"eigenvalue {worst:.3e}",
            witness=worst,
        )
    tag = ConstructionTag(
        signs.n, signs.seed, signs.distribution, signs.digest, k_scale=k_scale
    )
    return PovmFamily(elements=elements, provenance=tag)


@dataclass(frozen=True)
class QuantumTerms:
    """Closed-form quantum value split as total = term_i + term_ii + term_iii."""

    total: float
    term_i: float
    term_ii: float
    term_iii: float


def guaranteed_cross_bound(k_scale: float, state: SchmidtState) -> float:
    """(2 / K^2) * alpha_1 * sum_{i >= 2} alpha_i, the unconditional floor of term II."""
    a = state.alphas
    return 2.0 / k_scale**2 * float(a[0]) * float(a[1:].sum())


def explicit_quantum_value(
    m: BellFunctional, povm: PovmFamily, state: SchmidtState
) -> QuantumTerms:
    """Closed-form evaluation of <phi| sum M E tensor E |phi> for a construction pair.

    With S0(k) = sum_{x,a} eps, S(k,p) = sum_{x,a} eps^k eps^p and
    T(k,p,q) = sum_{x,a} eps^k eps^p eps^q:

      term_i   = alpha_1^2 / (K^2 n^4) * sum_k S0(k)^2
      term_ii  = 2 alpha_1 / (K^2 n^4) * sum_{i>=2} alpha_i sum_k S(k, i-1)^2
      term_iii = 1 / (K^2 n^4) * sum_k sum_{i,j>=2} alpha_i alpha_j T(k,i-1,j-1)^2

    Both inputs must descend from the same sign tensor; the draw is replayed
    from the shared provenance tag and re-verified before use.
    """
    tag_m = m.provenance
    tag_p = povm.provenance
    if not isinstance(tag_m, ConstructionTag) or not isinstance(tag_p, ConstructionTag):
        raise ProvenanceError("functional and POVM must both come from the construction")
    if tag_m.digest != tag_p.digest:
        raise ProvenanceError(
            f"functional digest {tag_m.digest} != POVM digest {tag_p.digest}"
        )
    if tag_p.k_scale is None:
        raise ProvenanceError("POVM tag is missing its scale constant")
    signs = gen_signs(tag_m.n, tag_m.seed, tag_m.distribution)
    if signs.digest != tag_m.digest:
        raise ProvenanceError("replayed sign tensor does not match the provenance digest")
    n = signs.n
    if state.dim != n + 1:
        raise ValueError(f"state dimension {state.dim} must be n + 1 = {n + 1}")

    k_scale = tag_p.k_scale
    eps = signs.eps
    alpha = state.alphas
    top, tail = float(alpha[0]), alpha[1:]
    norm = k_scale**2 * float(n) ** 4

    s0 = eps.sum(axis=(0, 1))
    s_kp = np.einsum("xak,xap->kp", eps, eps)
    t_kpq = np.einsum("xak,xap,xaq->kpq", eps, eps, eps)

    term_i = top**2 / norm * float(s0 @ s0)
    term_ii = 2.0 * top / norm * float(np.einsum("p,kp->", tail, s_kp**2))
    term_iii = float(np.einsum("p,q,kpq->", tail, tail, t_kpq**2)) / norm
    return QuantumTerms(
        total=term_i + term_ii + term_iii,
        term_i=term_i,
        term_ii=term_ii,
        term_iii=term_iii,
    )


DEFAULT_ALPHA_TOP = float(1.0 / np.sqrt(2.0))


@dataclass(frozen=True)
class ConstructionReport:
    """One full construction run with its classical and quantum values."""

    n: int
    seed: int
    distribution: str
    alpha_top: float
    retries: int
    k2: float
    k_scale: float
    classical: ClassicalResult
    classical_method: str
    quantum_lb: float
    term_i: float
    term_ii: float
    term_iii: float
    guaranteed_bound: float
    ratio: float
    accepted: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "seed": self.seed,
            "distribution": self.distribution,
            "alpha_top": self.alpha_top,
            "retries": self.retries,
            "k2": self.k2,
            "k_scale": self.k_scale,
            "classical_value": self.classical.value,
            "classical_max": self.classical.max_value,
            "classical_min": self.classical.min_value,
            "classical_method": self.classical_method,
            "quantum_lb": self.quantum_lb,
            "term_i": self.term_i,
            "term_ii": self.term_ii,
            "term_iii": self.term_iii,
            "guaranteed_bound": self.guaranteed_bound,
            "ratio": self.ratio,
            "accepted": self.accepted,
        }


def construct_report(
    n: int,
    seed: int,
    alpha_top: float | None = None,
    distribution: str = "bernoulli",
    classical_budget: int = 10**8,
    local_restarts: int = 64,
    retry_cap: int = 3,
    povm_tol: float = 1e-9,
) -> ConstructionReport:
    """Run the whole pipeline for one (n, seed) and collect a report.

    Draws are re-sampled with seed+1, seed+2, ... up to `retry_cap` extra
    attempts if the realized POVM family fails validation (never observed for
    n >= 4 with K = 2 K2^2).  The classical value is exact when the
    enumeration budget allows, otherwise the seeded local search is used and
    flagged as such.
    """
    alpha = DEFAULT_ALPHA_TOP if alpha_top is None else float(alpha_top)
    retries = 0
    current_seed = seed
    while True:
        signs = gen_signs(n, current_seed, distribution)
        k2 = row_spectral_bound(signs)
        k_scale = scale_constant(k2)
        try:
            povm = build_povms(signs, k_scale)
            report: PovmReport = validate_povm(povm, tol=povm_tol)
            if report.passed:
                break
        except PovmValidationError:
            pass
        retries += 1
        current_seed += 1
        if retries > retry_cap:
            raise PovmValidationError(
                f"no valid draw for n={n} within {retry_cap} retries from seed {seed}"
            )

    functional = build_bell(signs)
    state = build_state(alpha_top=alpha, n=n)
    terms = explicit_quantum_value(functional, povm, state)
    bound = guaranteed_cross_bound(k_scale, state)
    try:
        classical = classical_value_exact(functional, budget=classical_budget)
        method = "exact"
    except BudgetExceededError:
        classical = classical_value_local(functional, restarts=local_restarts, seed=current_seed)
        method = "local"
    ratio = terms.total / classical.value if classical.value > 1e-15 else float("nan")
    return ConstructionReport(
        n=n,
        seed=current_seed,
        distribution=distribution,
        alpha_top=alpha,
        retries=retries,
        k2=k2,
        k_scale=k_scale,
        classical=classical,
        classical_method=method,
        quantum_lb=terms.total,
        term_i=terms.term_i,
        term_ii=terms.term_ii,
        term_iii=terms.term_iii,
        guaranteed_bound=bound,
        ratio=ratio,
        accepted=True,
    )


def rebuild_from_report(report: ConstructionReport):
    """Replay (signs, functional, povm, state) for a report's accepted seed."""
    signs = gen_signs(report.n, report.seed, report.distribution)
    functional = build_bell(signs)
    povm = build_povms(signs, report.k_scale)
    state = build_state(alpha_top=report.alpha_top, n=report.n)
    return signs, functional, povm, state


__all__ = [
    "SignTensor",
    "ConstructionTag",
    "QuantumTerms",
    "ConstructionReport",
    "gen_signs",
    "signs_to_json",
    "signs_from_json",
    "build_bell",
    "row_spectral_bound",
    "scale_constant",
    "build_povms",
    "validate_povm",
    "build_state",
    "guaranteed_cross_bound",
    "explicit_quantum_value",
    "construct_report",
    "rebuild_from_report",
    "DEFAULT_ALPHA_TOP",
]
