"""Commutation structure and anticommutative-cancellation parameters.

Quantities (all sums over *ordered* index pairs/triples):

* ``alpha``       sum of coefficients
* ``alpha_comm``  sum of alpha_i alpha_j over commuting pairs, diagonal included
* ``alpha_anti``  same over anticommuting pairs; ``alpha_comm + alpha_anti = alpha**2``
* ``alpha3``      bound on ||H^3||, either from the triple classification or the
                  l1 norm of the fully combined Pauli expansion of H^3
* ``alpha3_r``    mass of distinct, mutually commuting triples
* ``alpha3_star`` mass of distinct triples where one term anticommutes with two
                  mutually commuting terms; these do not cancel (residual 2 of 6
                  orderings) and join ``alpha3_r`` in the order-(K+2) error
* ``alpha4``      l1 norm of the combined expansion of H^4
* ``e_epsilon``   H^2 pair mass not captured by the chosen extra unitaries

Aggregates are accumulated per fixed row block and combined with
``math.fsum`` so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import pauli as pl
from .errors import BudgetExceeded
from .hamiltonian import Hamiltonian
from .pauli import PauliString

ROW_BLOCK = 128
DROP_REL = 1e-12


@dataclass(frozen=True)
class SymbolicBudget:
    max_terms: int = 5_000_000
    max_products: int = 1_000_000_000
    max_triples: float = 1e11
    chunk: int = 2_000_000


DEFAULT_BUDGET = SymbolicBudget()


def _map_blocks(fn: Callable[[int, int], object], n: int, workers: int, block: int = ROW_BLOCK) -> list:
    starts = list(range(0, n, block))
    spans = [(s, min(n, s + block)) for s in starts]
    if workers <= 1 or len(spans) <= 1:
        return [fn(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda ab: fn(*ab), spans))


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommutationStructure:
    adjacency: np.ndarray
    alpha: float
    alpha_comm: float
    alpha_anti: float

    @property
    def q2(self) -> float:
        # sqrt of one quotient rounds once less than alpha / sqrt(alpha_comm)
        return math.sqrt(self.alpha ** 2 / self.alpha_comm)

    @property
    def L(self) -> int:
        return self.adjacency.shape[0]

    @property
    def pairwise_anticommuting(self) -> bool:
        off = self.adjacency & ~np.eye(self.L, dtype=bool)
        return not off.any()

    def commuting_pairs(self) -> np.ndarray:
        """Unordered distinct commuting pairs ``(i, j)``, ``i < j``."""
        return np.argwhere(np.triu(self.adjacency, 1))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "alpha_comm": self.alpha_comm,
                "alpha_anti": self.alpha_anti, "q2": self.q2}


def analyze(h: Hamiltonian, workers: int = 1) -> CommutationStructure:
    X, Z = h.x_words, h.z_words
    a = h.alphas
    L = h.L

    def block(lo, hi):
        adj = pl.commutation_matrix(X[lo:hi], Z[lo:hi], X, Z)
        prod = a[lo:hi, None] * a[None, :]
        return adj, math.fsum(prod[adj]), math.fsum(prod[~adj])

    parts = _map_blocks(block, L, workers)
    adjacency = np.vstack([p[0] for p in parts])
    alpha_comm = math.fsum(p[1] for p in parts)
    alpha_anti = math.fsum(p[2] for p in parts)
    return CommutationStructure(adjacency, h.alpha, alpha_comm, alpha_anti)


# ---------------------------------------------------------------------------
# symbolic Pauli sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolicOperator:
    """Real combination of phase-0 Pauli strings, stored as packed tables."""

    n_qubits: int
    x: np.ndarray
    z: np.ndarray
    coeffs: np.ndarray

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def l1(self) -> float:
        return math.fsum(np.abs(self.coeffs))

    def identity_coefficient(self) -> float:
        idx = np.nonzero(~(self.x.any(axis=1) | self.z.any(axis=1)))[0]
        return float(self.coeffs[idx[0]]) if len(idx) else 0.0

    def paulis(self) -> list[PauliString]:
        return [PauliString(self.n_qubits, x, z) for x, z in zip(pl.unpack(self.x), pl.unpack(self.z))]

    def to_dict(self) -> dict[PauliString, float]:
        return dict(zip(self.paulis(), self.coeffs.tolist()))

    def dense(self, cap: int = pl.DENSE_CAP) -> np.ndarray:
        return pl.dense_sum(self.paulis(), self.coeffs, self.n_qubits, cap)

    @classmethod
    def from_hamiltonian(cls, h: Hamiltonian) -> "SymbolicOperator":
        return cls(h.n_qubits, h.x_words, h.z_words, h.signed_coeffs.copy())


def _void_keys(x: np.ndarray, z: np.ndarray) -> np.ndarray:
    k = np.ascontiguousarray(np.concatenate([x, z], axis=1))
    return k.view(np.dtype((np.void, k.dtype.itemsize * k.shape[1]))).ravel()


def _group(x, z, c, mass):
    """Sum complex coefficients (and absolute masses) of equal Pauli keys."""
    keys = _void_keys(x, z)
    uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    inv = inv.ravel()
    re = np.bincount(inv, weights=c.real, minlength=len(uniq))
    im = np.bincount(inv, weights=c.imag, minlength=len(uniq))
    ms = np.bincount(inv, weights=mass, minlength=len(uniq))
    return x[first], z[first], re + 1j * im, ms


def _multiply(a: SymbolicOperator, b: SymbolicOperator, budget: SymbolicBudget,
              used: list[int]) -> SymbolicOperator:
    n_prod = len(a) * len(b)
    used[0] += n_prod
    if used[0] > budget.max_products:
        raise BudgetExceeded(
            f"symbolic expansion needs {used[0]:.3g} products (budget {budget.max_products:.3g}); "
            "too large, use composite bound")
    w = a.x.shape[1]
    zeros_b = np.zeros(len(b), dtype=np.int64)
    step = max(1, budget.chunk // max(1, len(b)))
    acc = None
    for lo in range(0, len(a), step):
        hi = min(len(a), lo + step)
        x, z, ph = pl.table_products(a.x[lo:hi], a.z[lo:hi], np.zeros(hi - lo, dtype=np.int64),
                                     b.x, b.z, zeros_b)
        mag = (a.coeffs[lo:hi, None] * b.coeffs[None, :]).ravel()
        c = mag * pl.I_POWERS[ph]
        part = _group(x, z, c, np.abs(mag))
        if acc is None:
            acc = part
        else:
            acc = _group(np.concatenate([acc[0], part[0]]), np.concatenate([acc[1], part[1]]),
                         np.concatenate([acc[2], part[2]]), np.concatenate([acc[3], part[3]]))
        if len(acc[2]) > budget.max_terms:
            raise BudgetExceeded(
                f"symbolic map exceeds {budget.max_terms} entries; too large, use composite bound")
    x, z, c, mass = acc
    if np.any(np.abs(c.imag) > 1e-9 * np.maximum(mass, 1e-300)):
        raise ArithmeticError("non-real coefficient in a Hermitian power")
    keep = np.abs(c.real) > DROP_REL * mass
    return SymbolicOperator(a.n_qubits, x[keep].reshape(-1, w), z[keep].reshape(-1, w), c.real[keep])


def symbolic_powers(h: Hamiltonian, m: int, budget: SymbolicBudget = DEFAULT_BUDGET) -> list[SymbolicOperator]:
    """``[H^1, ..., H^m]`` as fully combined Pauli expansions."""
    if m < 1:
        raise ValueError("m must be >= 1")
    base = SymbolicOperator.from_hamiltonian(h)
    out = [base]
    used = [0]
    for _ in range(m - 1):
        out.append(_multiply(out[-1], base, budget, used))
    return out


def symbolic_power(h: Hamiltonian, m: int, budget: SymbolicBudget = DEFAULT_BUDGET) -> SymbolicOperator:
    return symbolic_powers(h, m, budget)[-1]


# ---------------------------------------------------------------------------
# third order classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Order3Classification:
    beta: np.ndarray          # H_b mass from repeated-index sequences
    alpha3_r: float           # distinct, mutually commuting triples (all orderings)
    alpha3_star: float        # distinct triples with exactly two anticommuting pairs

    @property
    def alpha3_residual(self) -> float:
        """Third-order mass left after the ``beta_l H_l`` part is absorbed."""
        return self.alpha3_r + self.alpha3_star

    @property
    def alpha3(self) -> float:
        return math.fsum(self.beta) + self.alpha3_r + self.alpha3_star


def cancellation_order3(h: Hamiltonian, s: CommutationStructure | None = None, workers: int = 1,
                        budget: SymbolicBudget = DEFAULT_BUDGET) -> Order3Classification:
    """Classify ordered triples ``H_a H_b H_c``.

    * repeated indices collapse to ``+-H_b``: for ``a != b`` the orderings
      ``(a,a,b)`` and ``(b,a,a)`` give ``+H_b`` and ``(a,b,a)`` gives ``+-H_b``;
    * distinct and mutually commuting: all six orderings survive;
    * distinct with one or three anticommuting pairs: the six orderings cancel;
    * distinct with exactly two anticommuting pairs: the signed sum of the six
      orderings is ``+-2`` times one product, so two orderings' worth survives.
    """
    L = h.L
    if float(L) ** 3 > budget.max_triples:
        raise BudgetExceeded(f"L^3 = {float(L) ** 3:.3g} triples exceeds budget; use composite bound alpha*alpha_comm")
    if s is None:
        s = analyze(h, workers)
    a = h.alphas
    comm = s.adjacency & ~np.eye(L, dtype=bool)
    commf = comm.astype(float)
    antif = (~s.adjacency).astype(float)
    a2 = a * a
    beta = a * (math.fsum(a2) + 2.0 * (commf @ a2))

    def block(lo, hi):
        u = commf[lo:hi] * a[None, :]
        v = antif[lo:hi] * a[None, :]
        r = np.einsum("ij,ij->i", u @ commf, u) * a[lo:hi]
        st = np.einsum("ij,ij->i", v @ commf, v) * a[lo:hi]
        return math.fsum(r), math.fsum(st)

    parts = _map_blocks(block, L, workers)
    alpha3_r = math.fsum(p[0] for p in parts)
    alpha3_star = math.fsum(p[1] for p in parts)
    return Order3Classification(beta, alpha3_r, alpha3_star)


def cancellation_order4(h: Hamiltonian, budget: SymbolicBudget = DEFAULT_BUDGET) -> float:
    return symbolic_power(h, 4, budget).l1


# ---------------------------------------------------------------------------
# extra unitaries from the commuting part of H^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairGroup:
    """All distinct commuting pairs whose product is ``+-pauli``."""

    pauli: PauliString
    coefficient: float    # signed sum of sign_a sign_b alpha_a alpha_b (+-1 from the product), both orderings
    mass: float           # sum of 2 alpha_a alpha_b

    @property
    def unitary(self) -> PauliString:
        """Unitary entering the K-th block with positive weight: ``-sign(coefficient) * pauli``."""
        return self.pauli if self.coefficient < 0 else -self.pauli


@dataclass(frozen=True)
class ExtraUnitaries:
    chosen: tuple[PairGroup, ...]
    remaining: tuple[PairGroup, ...]
    e_epsilon: float
    pair_mass: float

    @property
    def n_groups(self) -> int:
        return len(self.chosen) + len(self.remaining)


def pair_groups(h: Hamiltonian, s: CommutationStructure | None = None) -> list[PairGroup]:
    """Groups of the distinct commuting part of H^2, largest ``|coefficient|`` first."""
    if s is None:
        s = analyze(h)
    pairs = s.commuting_pairs()
    if len(pairs) == 0:
        return []
    i, j = pairs[:, 0], pairs[:, 1]
    X, Z = h.x_words, h.z_words
    w = X.shape[1]
    x = X[i] ^ X[j]
    z = Z[i] ^ Z[j]
    ph = (pl.popcount_rows(X[i] & Z[i]) + pl.popcount_rows(X[j] & Z[j])
          + 2 * pl.popcount_rows(Z[i] & X[j]) - pl.popcount_rows(x & z)) % 4
    sign = np.where(ph == 0, 1.0, -1.0) * h.signed_coeffs[i] * h.signed_coeffs[j] / (h.alphas[i] * h.alphas[j])
    mass = 2.0 * h.alphas[i] * h.alphas[j]
    gx, gz, gc, gm = _group(x, z, sign * mass + 0j, mass)
    gx = gx.reshape(-1, w)
    gz = gz.reshape(-1, w)
    keys = _void_keys(gx, gz)
    # largest |coefficient| first; ties by mass, then by key for determinism
    order = np.lexsort((np.argsort(np.argsort(keys)), -gm, -np.abs(gc.real)))
    xs, zs = pl.unpack(gx[order]), pl.unpack(gz[order])
    return [PairGroup(PauliString(h.n_qubits, xv, zv), float(c), float(m))
            for xv, zv, c, m in zip(xs, zs, gc.real[order], gm[order])]


def select_extra_unitaries(h: Hamiltonian, E: int, s: CommutationStructure | None = None,
                           groups: Sequence[PairGroup] | None = None) -> ExtraUnitaries:
    if E < 0:
        raise ValueError("E must be non-negative")
    if groups is None:
        groups = pair_groups(h, s)
    chosen = tuple(groups[:E])
    remaining = tuple(groups[E:])
    return ExtraUnitaries(chosen, remaining, math.fsum(g.mass for g in remaining),
                          math.fsum(g.mass for g in groups))


def default_extra_count(L: int) -> int:
    """``2^w - L - 1`` with ``w = ceil(log2 L)``, floored at zero."""
    w = max(0, math.ceil(math.log2(L))) if L > 1 else 0
    return max(0, (1 << w) - L - 1)


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

REPORT_FIELDS = ("alpha", "alpha_comm", "alpha_anti", "q2", "alpha3", "alpha3_r", "alpha3_star",
                 "alpha4", "e_epsilon", "q3", "q4", "alpha3_method", "alpha4_method")


@dataclass(frozen=True)
class CancellationReport:
    alpha: float
    alpha_comm: float
    alpha_anti: float
    alpha3: float
    alpha3_method: str
    alpha3_classified: float | None
    alpha3_symbolic: float | None
    alpha3_r: float | None
    alpha3_star: float | None
    alpha4: float
    alpha4_method: str
    e_epsilon: float | None
    extra_unitaries: int
    beta: np.ndarray | None = field(default=None, repr=False)

    @property
    def alpha2(self) -> float:
        return self.alpha_comm

    @property
    def q2(self) -> float:
        # sqrt of one quotient rounds once less than alpha / sqrt(alpha_comm)
        return math.sqrt(self.alpha ** 2 / self.alpha_comm)

    @property
    def q3(self) -> float:
        return self.alpha / self.alpha3 ** (1.0 / 3.0)

    @property
    def q4(self) -> float:
        return self.alpha / self.alpha4 ** 0.25

    @property
    def alpha3_residual(self) -> float | None:
        if self.alpha3_r is None:
            return None
        return self.alpha3_r + self.alpha3_star

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_FIELDS} | {
            "alpha3_classified": self.alpha3_classified,
            "alpha3_symbolic": self.alpha3_symbolic,
            "extra_unitaries": self.extra_unitaries,
        }


def cancellation_report(h: Hamiltonian, E: int | None = None, s: CommutationStructure | None = None,
                        budget: SymbolicBudget = DEFAULT_BUDGET, workers: int = 1,
                        symbolic: bool = True) -> CancellationReport:
    """Compute every cancellation parameter, degrading to composite bounds past the budget.

    ``alpha3`` prefers the symbolic l1 value (tighter), then the classification,
    then ``alpha * alpha_comm``.  ``alpha4`` is symbolic or ``alpha_comm**2``.
    """
    if s is None:
        s = analyze(h, workers)
    if E is None:
        E = default_extra_count(h.L)
    try:
        cls3 = cancellation_order3(h, s, workers, budget)
    except BudgetExceeded:
        cls3 = None
    a3_sym = a4 = None
    if symbolic:
        try:
            powers = symbolic_powers(h, 3, budget)
            a3_sym = powers[2].l1
            a4 = _multiply(powers[2], powers[0], budget, [sum(len(p) for p in powers[:2]) * h.L]).l1
        except BudgetExceeded:
            pass
    if a3_sym is not None:
        alpha3, m3 = a3_sym, "symbolic-l1"
    elif cls3 is not None:
        alpha3, m3 = cls3.alpha3, "classification"
    else:
        alpha3, m3 = s.alpha * s.alpha_comm, "composite"
    if a4 is not None:
        alpha4, m4 = a4, "symbolic-l1"
    else:
        alpha4, m4 = s.alpha_comm ** 2, "composite"
    try:
        extra = select_extra_unitaries(h, E, s)
        e_eps = extra.e_epsilon
    except MemoryError:  # pragma: no cover - pair table too large
        e_eps = None
    return CancellationReport(
        alpha=s.alpha, alpha_comm=s.alpha_comm, alpha_anti=s.alpha_anti,
        alpha3=alpha3, alpha3_method=m3,
        alpha3_classified=None if cls3 is None else cls3.alpha3,
        alpha3_symbolic=a3_sym,
        alpha3_r=None if cls3 is None else cls3.alpha3_r,
        alpha3_star=None if cls3 is None else cls3.alpha3_star,
        alpha4=alpha4, alpha4_method=m4, e_epsilon=e_eps, extra_unitaries=E,
        beta=None if cls3 is None else cls3.beta,
    )
