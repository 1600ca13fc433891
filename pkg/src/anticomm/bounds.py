"""Truncation and product-formula error bounds.

For a segment of length ``t`` the truncated Taylor series up to order ``K``
misses ``sum_{k>K} (-itH)^k / k!``.  Every scheme bounds ``||H^k||``
differently:

* original   ``alpha^k``
* refined-m  ``alpha_m^floor(k/m) * alpha^(k mod m)`` for m = 2, 3, 4, where
  ``alpha_m`` bounds ``||H^m||`` (``alpha_2 = alpha_comm``)
* modified   the refined-2 tail from order K+3 plus explicit order K+1 and
  K+2 remainders left over by the modified LCU scheme

With ``c = alpha_m**(1/m)`` and ``q = alpha / c`` the refined bound is
written as ``(tc)^(K+1)/(K+1)! * sum_j q^((K+1+j) mod m) S_j(tc)`` where
``S_j(x) = sum_{l = j mod m} x^l / l!``.  For ``m = 2`` this is
``(tc)^(K+1)/(K+1)! * [(q+1) e^x + (-1)^K (q-1) e^-x] / 2``.

Powers and factorials are handled in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import FormulaDomainError, MissingStructureError

LN2 = math.log(2.0)
K_SEARCH_MAX = 200
SCHEMES = ("original", "refined2", "refined3", "refined4", "modified")


def _log_prefactor(x: float, K: int) -> float:
    """``log(x^(K+1) / (K+1)!)``; ``-inf`` for ``x == 0``."""
    if x == 0.0:
        return -math.inf
    return (K + 1) * math.log(x) - math.lgamma(K + 2)


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def residue_sums(x: float, m: int, scaled: bool = False) -> list[float]:
    """``[S_0(x), ..., S_{m-1}(x)]`` with ``S_j = sum_{l = j mod m} x^l / l!``.

    Summed term by term in real arithmetic until the terms are negligible
    against the running total.  With ``scaled=True`` each sum is multiplied by
    ``exp(-x)``, which keeps large arguments finite.
    """
    if x < 0:
        raise FormulaDomainError("residue sums need x >= 0")
    out = [0.0] * m
    if x == 0.0:
        out[0] = 1.0
        return out
    shift = x if scaled else 0.0
    lx = math.log(x)
    l_max = int(x + 50 + 12 * math.sqrt(x))
    parts: list[list[float]] = [[] for _ in range(m)]
    total = 0.0
    for l in range(l_max + 1):
        term = math.exp(l * lx - math.lgamma(l + 1) - shift)
        parts[l % m].append(term)
        total += term
        if l > x and term < 1e-20 * total:
            break
    return [math.fsum(p) for p in parts]


# ---------------------------------------------------------------------------
# per-segment truncation errors
# ---------------------------------------------------------------------------

def original_taylor_delta(alpha: float, t: float, K: int) -> float:
    """``(t alpha)^(K+1) / (K+1)! * exp(t alpha)``."""
    _check_common(alpha, t, K)
    x = t * alpha
    return _safe_exp(_log_prefactor(x, K) + x)


def refined_delta(alpha: float, alpha_m: float, m: int, t: float, K: int) -> float:
    """Refined bound for cancellation order ``m`` with ``||H^m|| <= alpha_m``."""
    _check_common(alpha, t, K)
    if m < 1:
        raise FormulaDomainError("order m must be >= 1")
    if not alpha_m > 0:
        raise FormulaDomainError(f"alpha_{m} must be positive, got {alpha_m}")
    if alpha_m > alpha ** m * (1 + 1e-12):
        raise FormulaDomainError(f"alpha_{m} exceeds alpha^{m}")
    c = min(alpha, alpha_m ** (1.0 / m))
    q = alpha / c
    x = t * c
    if x == 0.0:
        return 0.0
    sums = residue_sums(x, m, scaled=True)
    weight = math.fsum(q ** ((K + 1 + j) % m) * sums[j] for j in range(m))
    return _safe_exp(_log_prefactor(x, K) + x + math.log(weight))


def refined_delta_order2(alpha: float, alpha_comm: float, t: float, K: int) -> float:
    return refined_delta(alpha, alpha_comm, 2, t, K)


def refined_delta_order3(alpha: float, alpha3: float, t: float, K: int) -> float:
    return refined_delta(alpha, alpha3, 3, t, K)


def refined_delta_order4(alpha: float, alpha4: float, t: float, K: int) -> float:
    return refined_delta(alpha, alpha4, 4, t, K)


def power_norm_bound(alpha: float, alpha_comm: float, k: int) -> float:
    """``||H^k|| <= alpha_comm^floor(k/2) * alpha^(k mod 2)``."""
    return alpha_comm ** (k // 2) * alpha ** (k % 2)


@dataclass(frozen=True)
class BoundInputs:
    """Parameters of one Hamiltonian; cancellation fields are ``None`` when unknown."""

    alpha: float
    alpha_comm: float | None = None
    alpha3: float | None = None
    alpha3_r: float | None = None
    alpha3_star: float = 0.0
    alpha4: float | None = None
    e_epsilon: float | None = None
    label: str = ""

    def __post_init__(self):
        if not self.alpha > 0:
            raise FormulaDomainError("alpha must be positive")

    @classmethod
    def from_report(cls, report, label: str = "") -> "BoundInputs":
        return cls(alpha=report.alpha, alpha_comm=report.alpha_comm, alpha3=report.alpha3,
                   alpha3_r=report.alpha3_r, alpha3_star=report.alpha3_star or 0.0,
                   alpha4=report.alpha4, e_epsilon=report.e_epsilon, label=label)

    def with_(self, **kw) -> "BoundInputs":
        return replace(self, **kw)


def modified_delta(inputs: BoundInputs, t: float, K: int) -> float:
    """Per-segment error of the modified LCU scheme.

    Three parts, with ``h = ||H^(K-1)||`` bounded by ``alpha_comm^((K-1)/2)``
    (odd K) or ``alpha * alpha_comm^((K-2)/2)`` (even K):

    * ``t^(K+1) h e_epsilon / (K+1)!``            H^2 mass not captured
    * ``t^(K+2) h (alpha3_r + alpha3_star) / (K+2)!``  H^3 mass not absorbed
    * the refined-2 tail starting at order ``K+3``
    """
    _check_common(inputs.alpha, t, K)
    missing = [n for n in ("alpha_comm", "e_epsilon", "alpha3_r") if getattr(inputs, n) is None]
    if missing:
        raise MissingStructureError(
            f"modified bound needs {', '.join(missing)}; run the structure analysis first")
    a, ac = inputs.alpha, inputs.alpha_comm
    if t == 0.0:
        return 0.0
    log_h = ((K - 1) // 2) * math.log(ac) + ((K - 1) % 2) * math.log(a)
    parts = []
    if inputs.e_epsilon > 0:
        parts.append(_safe_exp((K + 1) * math.log(t) + log_h + math.log(inputs.e_epsilon) - math.lgamma(K + 2)))
    resid = inputs.alpha3_r + inputs.alpha3_star
    if resid > 0:
        parts.append(_safe_exp((K + 2) * math.log(t) + log_h + math.log(resid) - math.lgamma(K + 3)))
    parts.append(refined_delta(a, ac, 2, t, K + 2))
    return math.fsum(parts)


def scheme_delta(scheme: str, inputs: BoundInputs, t: float, K: int) -> float:
    if scheme == "original":
        return original_taylor_delta(inputs.alpha, t, K)
    if scheme == "modified":
        return modified_delta(inputs, t, K)
    field = {"refined2": "alpha_comm", "refined3": "alpha3", "refined4": "alpha4"}.get(scheme)
    if field is None:
        raise ValueError(f"unknown scheme {scheme!r}")
    val = getattr(inputs, field)
    if val is None:
        raise MissingStructureError(f"scheme {scheme} needs {field}; run the structure analysis first")
    return refined_delta(inputs.alpha, val, int(scheme[-1]), t, K)


def envelope(delta: float) -> float:
    """Distance of one amplified segment from the exact evolution: ``(d^2 + 3d + 4) d / 2``."""
    if delta < 0:
        raise FormulaDomainError("delta must be non-negative")
    return (delta * delta + 3.0 * delta + 4.0) * delta / 2.0


def _check_common(alpha: float, t: float, K: int) -> None:
    if not alpha > 0:
        raise FormulaDomainError("alpha must be positive")
    if t < 0:
        raise FormulaDomainError("t must be non-negative")
    if K < 0:
        raise FormulaDomainError("K must be non-negative")


@dataclass(frozen=True)
class BoundResult:
    scheme: str
    K: int
    t: float
    r: int
    per_segment_delta: float
    enveloped_epsilon: float
    total_epsilon: float


def evaluate(scheme: str, inputs: BoundInputs, t: float, K: int, r: int = 1) -> BoundResult:
    """Bound for ``r`` equal segments of length ``t / r``."""
    if r < 1:
        raise FormulaDomainError("r must be >= 1")
    d = scheme_delta(scheme, inputs, t / r, K)
    e = envelope(d)
    return BoundResult(scheme, K, t, r, d, e, r * e)


# ---------------------------------------------------------------------------
# first-order product formula
# ---------------------------------------------------------------------------

def pf1_bound(h, t: float, r: int, s=None, mode: str = "analytic", cap: int | None = None) -> float:
    """``t^2/(2r) * sum_l1 || sum_{l2>l1} [a_l2 H_l2, a_l1 H_l1] ||``.

    ``analytic`` uses ``||[P, Q]|| = 2`` for anticommuting Paulis and the
    triangle inequality, giving ``t^2/(2r) * alpha_anti``.  ``exact`` forms
    each inner commutator sum as a dense matrix.
    """
    if r < 1:
        raise FormulaDomainError("r must be >= 1")
    pref = t * t / (2.0 * r)
    if mode == "analytic":
        if s is None:
            from .structure import analyze
            s = analyze(h)
        return pref * s.alpha_anti
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    from . import pauli as pl
    from .oracle import spectral_norm
    cap = pl.DENSE_CAP if cap is None else cap
    mats = [c * pl.to_dense(p, cap) for p, c in zip(h.paulis, h.signed_coeffs)]
    norms = []
    suffix = np.zeros_like(mats[0])
    for l1 in range(h.L - 1, -1, -1):
        comm = suffix @ mats[l1] - mats[l1] @ suffix
        norms.append(spectral_norm(comm))
        suffix = suffix + mats[l1]
    return pref * math.fsum(norms)


# ---------------------------------------------------------------------------
# operational K selection and ratio tables
# ---------------------------------------------------------------------------

def segment_count(alpha: float, t: float) -> int:
    """``ceil(alpha t / ln 2)``, at least 1, tolerant of round-off at integers."""
    return max(1, math.ceil(alpha * t / LN2 - 1e-12))


def min_K(scheme: str, inputs: BoundInputs, t: float, eps: float, k_max: int = K_SEARCH_MAX) -> int:
    """Smallest ``K`` whose enveloped per-segment error fits ``eps / r`` at ``tau = ln2/alpha``."""
    if not eps > 0:
        raise FormulaDomainError("target accuracy must be positive")
    if not t > 0:
        raise FormulaDomainError("t must be positive")
    r = segment_count(inputs.alpha, t)
    tau = LN2 / inputs.alpha
    budget = eps / r
    for K in range(1, k_max + 1):
        if envelope(scheme_delta(scheme, inputs, tau, K)) <= budget:
            return K
    raise FormulaDomainError(f"no K <= {k_max} reaches accuracy {eps:g} with scheme {scheme}")


@dataclass(frozen=True)
class RatioRow:
    molecule_label: str
    scheme: str
    K: int
    t: float
    r: int
    delta: float
    epsilon: float
    ratio_vs_original: float


RATIO_COLUMNS = ("molecule_label", "scheme", "K", "t", "r", "delta", "epsilon", "ratio_vs_original")


def ratio_table(inputs: BoundInputs, Ks: Iterable[int], schemes: Sequence[str] = ("original", "refined2"),
                t: float | None = None) -> list[RatioRow]:
    """``eps_original / eps_scheme`` per scheme and K at one segment (default ``t = ln2/alpha``)."""
    if t is None:
        t = LN2 / inputs.alpha
    rows = []
    for scheme in schemes:
        for K in Ks:
            e_o = envelope(original_taylor_delta(inputs.alpha, t, K))
            d = scheme_delta(scheme, inputs, t, K)
            e = envelope(d)
            ratio = e_o / e if e > 0 else math.inf
            rows.append(RatioRow(inputs.label, scheme, K, t, 1, d, e, ratio))
    return rows
