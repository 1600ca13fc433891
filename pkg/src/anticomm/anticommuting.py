"""Pairwise-anticommuting Hamiltonians and small perturbations of them.

If every pair of distinct terms anticommutes then ``H^2 = beta_s^2 I`` with
``beta_s = sqrt(sum alpha_l^2)``, hence

    exp(-itH) = cos(t beta_s) I + sum_l (s_l alpha_l / beta_s) sin(t beta_s) (-i H_l)

is an exact linear combination of ``L + 1`` unitaries with normalization
``s = |cos(t beta_s)| + (alpha / beta_s) |sin(t beta_s)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import pauli as pl
from .errors import BudgetExceeded, FormulaDomainError, NotAnticommutingError
from .hamiltonian import Hamiltonian
from .pauli import PauliString
from .structure import SymbolicBudget, DEFAULT_BUDGET, analyze, symbolic_power, symbolic_powers


def gamma_table(h: Hamiltonian, m_max: int) -> list[tuple[float, np.ndarray]]:
    """``[(gamma0, gamma_l) for m = 1..m_max]`` with ``H^m = gamma0 I + sum gamma_l H_l``.

    Valid for pairwise-anticommuting H:
    ``gamma0' = sum_l gamma_l a_l`` and ``gamma_l' = gamma0 a_l`` (signed ``a_l``).
    """
    a = h.signed_coeffs
    g0, gl = 0.0, a.copy()
    out = [(g0, gl)]
    for _ in range(m_max - 1):
        g0, gl = math.fsum(gl * a), g0 * a
        out.append((g0, gl))
    return out


@dataclass(frozen=True)
class AnticommutingProfile:
    is_pairwise_anticommuting: bool
    alpha: float
    beta_s: float
    epsilon_A: float
    epsilon_method: str
    gammas: list[tuple[float, np.ndarray]] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "pairwise_anticommuting": self.is_pairwise_anticommuting,
            "alpha": self.alpha, "beta_s": self.beta_s,
            "epsilon_A": self.epsilon_A, "epsilon_method": self.epsilon_method,
            "gamma": [{"m": m + 1, "gamma0": g0, "gamma_l": [float(v) for v in gl]}
                      for m, (g0, gl) in enumerate(self.gammas)],
        }


def epsilon_A(h: Hamiltonian, cap: int = pl.DENSE_CAP,
              budget: SymbolicBudget = DEFAULT_BUDGET) -> tuple[float, str]:
    """``||H^2 - beta_s^2 I||``: dense spectral norm when possible, else l1 of the residual."""
    if h.n_qubits <= cap:
        from .oracle import spectral_norm
        H = h.dense(cap)
        V = H @ H - h.beta_s ** 2 * np.eye(H.shape[0])
        return spectral_norm(V), "dense"
    sq = symbolic_power(h, 2, budget)
    c0 = sq.identity_coefficient()
    return sq.l1 - abs(c0) + abs(c0 - h.beta_s ** 2), "symbolic-l1"


def profile(h: Hamiltonian, m_max: int = 4, cap: int = pl.DENSE_CAP) -> AnticommutingProfile:
    s = analyze(h)
    anti = s.pairwise_anticommuting
    if anti:
        eps, method = 0.0, "structure"
    else:
        eps, method = epsilon_A(h, cap)
    gammas = gamma_table(h, m_max) if anti else []
    return AnticommutingProfile(anti, h.alpha, h.beta_s, eps, method, gammas)


def _require_anticommuting(h: Hamiltonian) -> None:
    if not analyze(h).pairwise_anticommuting:
        raise NotAnticommutingError(
            "terms are not pairwise anticommuting; use near_anticommuting_bound or the Taylor-series plans")


@dataclass(frozen=True)
class ExactCoefficients:
    """Signed ``alpha~_0`` (on I) and ``alpha~_l`` (on ``-i H_l``)."""

    n_qubits: int
    paulis: tuple[PauliString, ...]
    alpha0: float
    alphas: np.ndarray

    @property
    def s(self) -> float:
        return abs(self.alpha0) + math.fsum(np.abs(self.alphas))

    def terms(self) -> list[tuple[PauliString, float]]:
        """Unitaries with positive weights; signs moved into the unitaries."""
        ident = PauliString.identity(self.n_qubits)
        out = [(ident if self.alpha0 >= 0 else -ident, abs(self.alpha0))]
        for p, a in zip(self.paulis, self.alphas):
            out.append((p.with_phase(3 if a >= 0 else 1), abs(float(a))))
        return [(u, w) for u, w in out if w > 0]

    def dense(self, cap: int = pl.DENSE_CAP) -> np.ndarray:
        dim = 1 << self.n_qubits
        return self.alpha0 * np.eye(dim) - 1j * pl.dense_sum(self.paulis, self.alphas, self.n_qubits, cap)


def exact_coefficients(h: Hamiltonian, t: float, check: bool = True) -> ExactCoefficients:
    """Coefficients of ``exp(-itH)`` (exact when the terms pairwise anticommute).

    With ``check=False`` the same formulas are applied to any H; this is the
    operator whose error :func:`near_anticommuting_bound` controls.
    """
    if check:
        _require_anticommuting(h)
    b = h.beta_s
    return ExactCoefficients(h.n_qubits, h.paulis, math.cos(t * b), h.signed_coeffs * (math.sin(t * b) / b))


def s_value(t: float, alpha: float, beta_s: float) -> float:
    if not (alpha > 0 and beta_s > 0):
        raise FormulaDomainError("alpha and beta_s must be positive")
    return abs(math.cos(t * beta_s)) + alpha / beta_s * abs(math.sin(t * beta_s))


# ---------------------------------------------------------------------------
# segment schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactSchedule:
    """``t = t1 + r * t_seg + t_rest``.

    ``t1`` is a multiple of ``pi / beta_s`` (evolution is ``+-I``, s = 1);
    every ``t_seg`` segment has s = 2; ``t_rest`` has ``1 <= s < 2`` and is
    boosted with an extra ancilla.  When ``alpha^2 / beta_s^2 < 3`` no segment
    reaches s = 2, ``t_seg`` is ``None`` and the whole rest is one boosted segment.
    """

    t: float
    t1: float
    t_seg: float | None
    r: int
    t_rest: float
    alpha: float
    beta_s: float
    method: str

    @property
    def boost(self) -> bool:
        return self.t_rest > 0

    def segments(self) -> list[float]:
        out = [self.t1] if self.t1 > 0 else []
        out += [self.t_seg] * self.r
        if self.t_rest > 0:
            out.append(self.t_rest)
        return out

    def s_values(self) -> list[float]:
        return [s_value(x, self.alpha, self.beta_s) for x in self.segments()]

    def to_dict(self) -> dict:
        return {"t": self.t, "t1": self.t1, "t_seg": self.t_seg, "r": self.r, "t_rest": self.t_rest,
                "boost": self.boost, "t_seg_method": self.method, "segments": self.segments(),
                "s_values": self.s_values()}


def _bisect_s2(a: float) -> float:
    """Smallest theta in (0, atan(a)] with ``cos(theta) + a sin(theta) = 2``."""
    lo, hi = 0.0, math.atan(a)
    f = lambda th: math.cos(th) + a * math.sin(th) - 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def schedule(t: float, alpha: float, beta_s: float) -> ExactSchedule:
    if not t > 0:
        raise FormulaDomainError("t must be positive")
    if not (alpha > 0 and beta_s > 0):
        raise FormulaDomainError("alpha and beta_s must be positive")
    half = math.pi / beta_s
    t1 = math.floor(t * beta_s / math.pi) * half
    t2 = t - t1
    rho = (alpha / beta_s) ** 2
    if rho < 3.0:
        return ExactSchedule(t, t1, None, 0, t2, alpha, beta_s, "boost")
    a = alpha / beta_s
    x = (2.0 * a - math.sqrt(max(0.0, rho - 3.0))) / (1.0 + rho)
    theta = math.asin(min(1.0, x))
    method = "closed-form"
    if abs(math.cos(theta) + a * math.sin(theta) - 2.0) > 1e-10:
        theta = _bisect_s2(a)
        method = "bisection"
    t_seg = theta / beta_s
    r = int(math.floor(t2 / t_seg))
    t_rest = t2 - r * t_seg
    if t_rest < 1e-15 * max(1.0, t):
        t_rest = 0.0
    return ExactSchedule(t, t1, t_seg, r, t_rest, alpha, beta_s, method)


# ---------------------------------------------------------------------------
# family and perturbations
# ---------------------------------------------------------------------------

def family_paulis(n: int) -> list[PauliString]:
    """``X_0``, ``Z_0 Z_1`` and ``Z_0 X_1 ... X_{j-2} Z_{j-1}`` for ``j = 3..n``."""
    if n < 2:
        raise FormulaDomainError("the anticommuting family needs n >= 2")
    out = [PauliString(n, x=1), PauliString(n, z=0b11)]
    for j in range(3, n + 1):
        xm = ((1 << (j - 1)) - 1) & ~1          # qubits 1..j-2
        zm = 1 | (1 << (j - 1))                  # qubits 0 and j-1
        out.append(PauliString(n, xm, zm))
    return out


def generate_family(n: int, coeffs=None, label: str | None = None) -> Hamiltonian:
    ps = family_paulis(n)
    if coeffs is None:
        coeffs = [1.0] * n
    if len(coeffs) != n:
        raise ValueError(f"expected {n} coefficients")
    h = Hamiltonian.from_terms(zip(coeffs, ps), n, label if label is not None else f"family-{n}")
    if h.L != n or not analyze(h).pairwise_anticommuting:
        raise AssertionError("family terms are not pairwise anticommuting")
    return h


def perturbed_family(n: int, eps_A: float, coeffs=None) -> Hamiltonian:
    """Family plus ``c Z_0`` with ``c`` chosen so that ``||H^2 - beta_s^2 I|| = eps_A``.

    ``Z_0`` is not a family term, so ``H^2 - beta_s^2 I = c {H_family, Z_0}``.
    """
    fam = generate_family(n, coeffs)
    z0 = PauliString(n, z=1)
    terms = list(zip(fam.signed_coeffs, fam.paulis))
    acomm = 2.0 * math.sqrt(math.fsum(c * c for c, p in terms if pl.commutes(p, z0)))
    if acomm == 0.0:
        raise FormulaDomainError("no family term commutes with Z_0")
    # the commuting terms times Z_0 are distinct, mutually anticommuting Paulis
    c = eps_A / acomm
    return Hamiltonian.from_terms(terms + [(c, z0)], n, f"family-{n}-eps{eps_A:g}")


# ---------------------------------------------------------------------------
# H^M proportional to identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerReduction:
    """``H^M = gamma I`` so ``exp(-itH) = sum_{k<M} gamma_k(t) (-itH)^k``."""

    M: int
    gamma: float

    def coefficients(self, t: float) -> list[complex]:
        """``gamma_k = sum_j (-it)^(jM) gamma^j / (k + jM)!`` for ``k = 0..M-1``."""
        M, g = self.M, self.gamma
        base = (-1j * t) ** M * g
        lmag = math.log(abs(base)) if base != 0 else -math.inf
        out = []
        for k in range(M):
            terms, mags = [], []
            j = 0
            while True:
                lm = j * lmag - math.lgamma(k + j * M + 1) if j else -math.lgamma(k + 1)
                mags.append(math.exp(lm))
                terms.append((base ** j if j else 1.0) * math.exp(-math.lgamma(k + j * M + 1)))
                if base == 0 or (j * M > abs(base) ** (1.0 / M) + 1 and mags[-1] < 1e-18 * math.fsum(mags)):
                    break
                j += 1
            out.append(complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms)))
        return out

    def dense_exp(self, h: Hamiltonian, t: float, cap: int = pl.DENSE_CAP) -> np.ndarray:
        H = h.dense(cap)
        B = -1j * t * H
        out = np.zeros_like(B)
        P = np.eye(B.shape[0], dtype=complex)
        for gk in self.coefficients(t):
            out += gk * P
            P = P @ B
        return out


def power_reduction(h: Hamiltonian, M_cap: int = 8, tol: float = 1e-12,
                    budget: SymbolicBudget = DEFAULT_BUDGET) -> PowerReduction | None:
    """Smallest ``M <= M_cap`` with ``H^M`` proportional to the identity, else ``None``."""
    try:
        powers = symbolic_powers(h, M_cap, budget)
    except BudgetExceeded:
        return None
    for M, P in enumerate(powers, start=1):
        c0 = P.identity_coefficient()
        rest = P.l1 - abs(c0)
        if rest <= tol * max(1.0, abs(c0)):
            return PowerReduction(M, c0)
    return None


# ---------------------------------------------------------------------------
# near-anticommuting error
# ---------------------------------------------------------------------------

def near_anticommuting_bound(eps_A: float, alpha: float, beta_s: float, t: float) -> float:
    """Error of the perfect-case coefficients when ``||H^2 - beta_s^2 I|| <= eps_A``.

    Equals ``[cosh-type difference] + [alpha/B sinh-type difference]`` with
    ``B = sqrt(beta_s^2 + eps_A)``, summed as the series
    ``sum_even t^k (B^k - beta^k)/k! + alpha sum_odd t^k (B^(k-1) - beta^(k-1))/k!``
    using ``expm1``/``log1p`` so small ``eps_A`` keeps full relative accuracy.
    """
    if eps_A < 0:
        raise FormulaDomainError("eps_A must be non-negative")
    if not (alpha > 0 and beta_s > 0) or t < 0:
        raise FormulaDomainError("alpha, beta_s must be positive and t non-negative")
    if eps_A == 0.0 or t == 0.0:
        return 0.0
    lb = math.log(beta_s)
    lr = math.log1p(eps_A / beta_s ** 2)
    lt = math.log(t)
    parts = []
    k = 2
    xb = t * math.sqrt(beta_s ** 2 + eps_A)
    while True:
        j = k // 2                                   # B^(2j) - beta^(2j)
        mag = math.exp(k * lt + 2 * j * lb - math.lgamma(k + 1))
        diff = mag * math.expm1(j * lr)
        if k % 2 == 1:
            diff *= alpha
        parts.append(diff)
        if k > xb + 10 and diff < 1e-18 * math.fsum(parts):
            break
        k += 1
    return math.fsum(parts)


def near_anticommuting_closed_form(eps_A: float, alpha: float, beta_s: float, t: float) -> float:
    """Same quantity evaluated directly with exponentials (loses accuracy for tiny eps_A)."""
    B = math.sqrt(beta_s ** 2 + eps_A)
    even = 0.5 * ((math.exp(t * B) + math.exp(-t * B)) - (math.exp(t * beta_s) + math.exp(-t * beta_s)))
    odd = 0.5 * (alpha / B * (math.exp(t * B) - math.exp(-t * B))
                 - alpha / beta_s * (math.exp(t * beta_s) - math.exp(-t * beta_s)))
    return even + odd
