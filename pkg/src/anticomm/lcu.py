"""Linear-combination-of-unitaries plans for truncated Taylor series.

A plan for one segment of length ``t`` represents

    U~ = sum_{k<=K} (-itH)^k / k!                       (truncated scheme)

or, for the modified scheme, replaces the order-K block by

    (-itH)^(K-1)/K! * [ sum_l gamma_l s_l (-i H_l) + g0 (-I) + sum_j g_j U_j ]

which also carries the identity, captured H^2 groups and the ``H_l`` part
of H^3 that would otherwise appear at orders K+1 and K+2.  Plans keep the
per-order building blocks; the explicit unitary list is expanded only on
request (small systems) with identical unitaries merged, so ``s`` is the
same as for the fully expanded list.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import pauli as pl
from .bounds import LN2
from .errors import FormulaDomainError, MissingStructureError
from .hamiltonian import Hamiltonian
from .pauli import PauliString
from .structure import (CommutationStructure, ExtraUnitaries, Order3Classification, analyze,
                        cancellation_order3, default_extra_count, select_extra_unitaries)


def term_unitaries(h: Hamiltonian) -> list[PauliString]:
    """``-i s_l H_l`` for every term (phase 3, plus 2 when the sign is negative)."""
    return [p.with_phase(3 if s > 0 else 1) for p, s in zip(h.paulis, h.signs)]


@dataclass(frozen=True)
class SegmentSchedule:
    r: int
    tau: float
    tau_re: float

    @property
    def total(self) -> float:
        return (self.r - 1) * self.tau + self.tau_re

    def to_dict(self) -> dict:
        return {"r": self.r, "tau": self.tau, "tau_re": self.tau_re}


def segment_schedule(t: float, alpha: float) -> SegmentSchedule:
    """Split ``t`` into ``r - 1`` segments of ``tau = ln2/alpha`` and a remainder in ``(0, tau]``."""
    if not t > 0:
        raise FormulaDomainError("t must be positive")
    if not alpha > 0:
        raise FormulaDomainError("alpha must be positive")
    tau = LN2 / alpha
    r = max(1, math.ceil(t / tau - 1e-12))
    tau_re = t - (r - 1) * tau
    return SegmentSchedule(r, tau, tau_re)


@dataclass(frozen=True)
class LcuPlan:
    """Coefficient plan for one segment.

    ``first_order`` holds ``(-i s_l H_l, alpha_l)``; order ``k`` of the series is
    ``t^k/k!`` times products of ``k`` such unitaries.  For the modified scheme
    ``final_block`` holds ``(unitary, weight)`` of the bracket multiplying
    ``(-itH)^(K-1)/K!``.
    """

    scheme: str
    n_qubits: int
    K: int
    t: float
    first_order: tuple[tuple[PauliString, float], ...]
    final_block: tuple[tuple[PauliString, float], ...] | None = None
    gamma: np.ndarray | None = field(default=None, repr=False)
    gamma0: float | None = None
    extras: tuple[tuple[PauliString, float], ...] = ()
    E: int = 0
    notes: tuple[str, ...] = ()

    @property
    def L(self) -> int:
        return len(self.first_order)

    @property
    def alpha(self) -> float:
        return math.fsum(w for _, w in self.first_order)

    def order_weights(self) -> list[float]:
        """Sum of ``beta_j`` inside each order ``0..K``."""
        x = self.t * self.alpha
        out = [math.exp(k * math.log(x) - math.lgamma(k + 1)) if x > 0 else float(k == 0)
               for k in range(self.K + 1)]
        if self.final_block is not None:
            out[self.K] = out[self.K - 1] / self.K * math.fsum(w for _, w in self.final_block)
        return out

    @property
    def s(self) -> float:
        return math.fsum(self.order_weights())

    @property
    def block_size(self) -> int:
        """Number of distinct unitaries the select oracle indexes in the last block."""
        return self.L if self.final_block is None else len(self.final_block)

    # -- dense reconstruction -----------------------------------------------

    def dense(self, cap: int = pl.DENSE_CAP) -> np.ndarray:
        """Operator ``sum_j beta_j V_j`` built from per-order aggregates."""
        B = self.t * self._dense_block(self.first_order, cap)
        dim = B.shape[0]
        term = np.eye(dim, dtype=complex)
        total = term.copy()
        last = self.K if self.final_block is None else self.K - 1
        for k in range(1, last + 1):
            term = term @ B / k
            total += term
        if self.final_block is not None:
            total += term @ self._dense_block(self.final_block, cap) / self.K
        return total

    def _dense_block(self, entries, cap) -> np.ndarray:
        return pl.dense_sum([p for p, _ in entries], [w for _, w in entries], self.n_qubits, cap)

    def terms(self, max_terms: int = 200_000) -> list[tuple[PauliString, float]]:
        """Explicit ``(V_j, beta_j)`` list with identical unitaries merged."""
        n = self.n_qubits
        level: dict[tuple[int, int, int], float] = {(0, 0, 0): 1.0}
        merged: dict[tuple[int, int, int], float] = {(0, 0, 0): 1.0}
        last = self.K if self.final_block is None else self.K - 1

        def step(src, entries, scale):
            out: dict[tuple[int, int, int], float] = {}
            for (x, z, ph), w in src.items():
                for p, b in entries:
                    nph = (ph + p.phase + pl.product_phase(x, z, p.x, p.z)) % 4
                    key = (x ^ p.x, z ^ p.z, nph)
                    out[key] = out.get(key, 0.0) + w * b * scale
            if len(out) > max_terms:
                raise MemoryError(f"explicit LCU list exceeds {max_terms} unitaries")
            return out

        for k in range(1, last + 1):
            level = step(level, self.first_order, self.t / k)
            for key, w in level.items():
                merged[key] = merged.get(key, 0.0) + w
        if self.final_block is not None:
            level = step(level, self.final_block, 1.0 / self.K)
            for key, w in level.items():
                merged[key] = merged.get(key, 0.0) + w
        return [(PauliString(n, x, z, ph), w) for (x, z, ph), w in merged.items() if w > 0]

    def to_dict(self) -> dict:
        d = {"scheme": self.scheme, "K": self.K, "t": self.t, "s": self.s,
             "order_weights": self.order_weights(), "L": self.L}
        if self.final_block is not None:
            d["gamma"] = [float(g) for g in self.gamma]
            d["gamma0"] = self.gamma0
            d["extra_unitaries"] = [{"unitary": str(u), "weight": w} for u, w in self.extras]
            d["E"] = self.E
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def build_truncated(h: Hamiltonian, t: float, K: int) -> LcuPlan:
    if K < 1:
        raise FormulaDomainError("K must be >= 1")
    if not t > 0:
        raise FormulaDomainError("t must be positive")
    first = tuple(zip(term_unitaries(h), h.coeffs))
    return LcuPlan("original", h.n_qubits, K, t, first)


@dataclass(frozen=True)
class ModifiedInputs:
    """Structure data the modified scheme needs."""

    order3: Order3Classification
    extra: ExtraUnitaries

    @classmethod
    def compute(cls, h: Hamiltonian, E: int, s: CommutationStructure | None = None) -> "ModifiedInputs":
        s = s if s is not None else analyze(h)
        return cls(cancellation_order3(h, s), select_extra_unitaries(h, E, s))


def build_modified(h: Hamiltonian, t: float, K: int, E: int | None = None,
                   inputs: ModifiedInputs | None = None, allow_even: bool = False) -> LcuPlan:
    """Modified-scheme plan.

    ``gamma_l = alpha_l t - t^3 beta_l / ((K+1)(K+2))`` with ``beta_l`` the
    repeated-index H^3 mass of term l; the identity gets ``t^2 sum alpha_l^2 /
    (K+1)`` on ``U_0 = -I`` and each captured H^2 group P gets
    ``t^2 |g_P| / (K+1)`` on ``-sign(g_P) P``.  Negative weights flip the
    unitary's sign so every stored weight is positive.
    """
    if K < 1:
        raise FormulaDomainError("K must be >= 1")
    if K % 2 == 0 and not allow_even:
        raise FormulaDomainError("modified scheme is built for odd K; use K+1 or pass allow_even=True")
    if not t > 0:
        raise FormulaDomainError("t must be positive")
    e_max = default_extra_count(h.L)
    if E is None:
        E = e_max
    if inputs is None:
        inputs = ModifiedInputs.compute(h, E)
    elif len(inputs.extra.chosen) != min(E, inputs.extra.n_groups):
        raise MissingStructureError("extra-unitary selection was computed for a different E")
    notes = []
    if E > e_max:
        notes.append(f"E={E} exceeds 2^w-L-1={e_max}: select oracle cost increases")
        warnings.warn(notes[-1], stacklevel=2)

    beta = inputs.order3.beta
    gamma = h.alphas * t - t ** 3 * beta / ((K + 1) * (K + 2))
    units = term_unitaries(h)
    block = [((u if g >= 0 else -u), abs(float(g))) for u, g in zip(units, gamma) if g != 0.0]
    gamma0 = t * t * math.fsum(h.alphas ** 2) / (K + 1)
    block.append((-PauliString.identity(h.n_qubits), gamma0))
    extras = tuple((g.unitary, t * t * abs(g.coefficient) / (K + 1))
                   for g in inputs.extra.chosen if g.coefficient != 0.0)
    block.extend(extras)
    first = tuple(zip(units, h.coeffs))
    return LcuPlan("modified", h.n_qubits, K, t, first, tuple(block), gamma, gamma0, extras, E, tuple(notes))


@dataclass(frozen=True)
class SimulationPlan:
    schedule: SegmentSchedule
    segment: LcuPlan
    last_segment: LcuPlan

    def to_dict(self) -> dict:
        return {"scheme": self.segment.scheme, "K": self.segment.K, **self.schedule.to_dict(),
                "s": self.segment.s, "s_last": self.last_segment.s,
                "segment": self.segment.to_dict(), "last_segment": self.last_segment.to_dict()}


def plan_simulation(h: Hamiltonian, t: float, K: int, scheme: str = "original", E: int | None = None,
                    inputs: ModifiedInputs | None = None) -> SimulationPlan:
    sch = segment_schedule(t, h.alpha)
    if scheme == "original":
        seg, last = build_truncated(h, sch.tau, K), build_truncated(h, sch.tau_re, K)
    elif scheme == "modified":
        if inputs is None:
            inputs = ModifiedInputs.compute(h, default_extra_count(h.L) if E is None else E)
        seg = build_modified(h, sch.tau, K, E, inputs)
        last = build_modified(h, sch.tau_re, K, E, inputs)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return SimulationPlan(sch, seg, last)


# ---------------------------------------------------------------------------
# gate cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateCostModel:
    """Select-oracle cost with a binary index register of ``w = ceil(log2 L)`` qubits."""

    L: int
    w: int
    cnot_per_select: int
    t_per_select: int
    K: int
    r: int
    D: int
    E: int
    same_cost_as_original: bool

    @property
    def selects(self) -> int:
        # W, W^dagger, W per segment, each applying K selects
        return 3 * self.K * self.r

    @property
    def total_cnot(self) -> int:
        return self.selects * self.cnot_per_select

    @property
    def total_t(self) -> int:
        return self.selects * self.t_per_select

    @property
    def complexity_estimate(self) -> float:
        """``r K L (D + log2 L)`` with D the largest Pauli weight of a term."""
        return self.r * self.K * self.L * (self.D + math.log2(self.L))

    def to_dict(self) -> dict:
        return {"L": self.L, "w": self.w, "cnot_per_select": self.cnot_per_select,
                "t_per_select": self.t_per_select, "K": self.K, "r": self.r, "D": self.D,
                "E": self.E, "same_cost_as_original": self.same_cost_as_original,
                "total_cnot": self.total_cnot, "total_t": self.total_t,
                "complexity_estimate": self.complexity_estimate}


def select_cost(L: int) -> tuple[int, int, int]:
    """``(w, CNOTs, T gates)`` of one select over ``L`` indices."""
    if L < 4:
        raise FormulaDomainError("select cost formula needs L >= 4")
    w = math.ceil(math.log2(L))
    base = 15 * (1 << w) // 2 + 6 * w
    return w, base - 26, base - 28


def gate_cost(L: int, K: int, r: int = 1, D: int = 1, E: int = 0) -> GateCostModel:
    w, cnot, tg = select_cost(L)
    same = L + 1 + E <= (1 << w)
    return GateCostModel(L, w, cnot, tg, K, r, D, E, same)


def plan_gate_cost(h: Hamiltonian, plan: LcuPlan | SimulationPlan) -> GateCostModel:
    r = 1
    if isinstance(plan, SimulationPlan):
        r = plan.schedule.r
        plan = plan.segment
    E = plan.E if plan.scheme == "modified" else 0
    return gate_cost(h.L, plan.K, r, h.max_weight, E)
