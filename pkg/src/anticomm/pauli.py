"""Exact Pauli-string algebra in the symplectic (x, z) representation.

A :class:`PauliString` on ``n`` qubits stands for the operator

    i**phase * sigma(x_0, z_0) (x) sigma(x_1, z_1) (x) ... (x) sigma(x_{n-1}, z_{n-1})

with ``sigma(0,0) = I``, ``sigma(1,0) = X``, ``sigma(0,1) = Z`` and
``sigma(1,1) = Y = i X Z``.  The Y convention is fixed for the whole package:
a string with ``phase == 0`` is always Hermitian, and every sign downstream
(grouping of products, extra-unitary selection) is derived from it.

Bit ``q`` of the integers ``x`` and ``z`` belongs to qubit ``q``.  In dense
matrices qubit 0 is the leftmost Kronecker factor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DenseCapError, ParseError, WidthMismatchError

DENSE_CAP = 12

_FACTOR_RE = re.compile(r"^([XYZ])([0-9]+)$")
_LETTERS = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}


def _popcount(v: int) -> int:
    return v.bit_count()


@dataclass(frozen=True, slots=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"bit vectors exceed {self.n_qubits} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_factors(cls, factors: Iterable[tuple[str, int]], n_qubits: int) -> "PauliString":
        x = z = 0
        seen = set()
        for letter, q in factors:
            if q in seen:
                raise ValueError(f"qubit {q} appears twice")
            if q >= n_qubits:
                raise ValueError(f"qubit {q} outside {n_qubits}-qubit register")
            seen.add(q)
            if letter in ("X", "Y"):
                x |= 1 << q
            if letter in ("Z", "Y"):
                z |= 1 << q
        return cls(n_qubits, x, z)

    @classmethod
    def from_label(cls, text: str, n_qubits: int | None = None) -> "PauliString":
        """Parse whitespace separated factors such as ``"X0 Y3 Z12"``."""
        factors = parse_factors(text)
        if n_qubits is None:
            n_qubits = 1 + max((q for _, q in factors), default=-1)
        return cls.from_factors(factors, n_qubits)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def factors(self) -> list[tuple[str, int]]:
        out = []
        support = self.x | self.z
        q = 0
        while support:
            if support & 1:
                out.append((_LETTERS[((self.x >> q) & 1, (self.z >> q) & 1)], q))
            support >>= 1
            q += 1
        return out

    def label(self) -> str:
        """Factor list without the phase, e.g. ``"X0 Z2"``; identity is ``""``."""
        return " ".join(f"{p}{q}" for p, q in self.factors())

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.n_qubits, self.x, self.z, phase)

    def __neg__(self) -> "PauliString":
        return self.with_phase(self.phase + 2)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        body = self.label() or "I"
        return _PHASE_PREFIX[self.phase] + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r}, n_qubits={self.n_qubits})"


def parse_factors(text: str, line_no: int | None = None) -> list[tuple[str, int]]:
    factors = []
    for tok in text.split():
        m = _FACTOR_RE.match(tok)
        if m is None:
            raise ParseError(f"bad Pauli factor {tok!r}", line_no)
        factors.append((m.group(1), int(m.group(2))))
    return factors


def _check_width(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise WidthMismatchError(f"width mismatch: {p.n_qubits} vs {q.n_qubits} qubits")


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Phase exponent (mod 4) picked up by sigma(x1,z1) * sigma(x2,z2)."""
    x = x1 ^ x2
    z = z1 ^ z2
    return (_popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x & z)) % 4


def multiply(p: PauliString, q: PauliString) -> PauliString:
    _check_width(p, q)
    ph = p.phase + q.phase + product_phase(p.x, p.z, q.x, q.z)
    return PauliString(p.n_qubits, p.x ^ q.x, p.z ^ q.z, ph)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_width(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def _index_mask(mask: int, n: int) -> int:
    # qubit q -> basis-index bit n-1-q
    if n == 0:
        return 0
    return int(format(mask, f"0{n}b")[::-1], 2)


def dense_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(rows, values)`` with ``dense(p)[rows[c], c] == values[c]``."""
    n = p.n_qubits
    xm = _index_mask(p.x, n)
    zm = _index_mask(p.z, n)
    cols = np.arange(1 << n, dtype=np.int64)
    rows = cols ^ xm
    parity = np.bitwise_count(cols & zm) & 1
    base = 1j ** ((p.phase + _popcount(p.x & p.z)) % 4)
    values = np.where(parity == 1, -base, base).astype(complex)
    return rows, values


def to_dense(p: PauliString, cap: int = DENSE_CAP) -> np.ndarray:
    if p.n_qubits > cap:
        raise DenseCapError(f"{p.n_qubits} qubits exceeds dense cap {cap}")
    dim = 1 << p.n_qubits
    rows, values = dense_action(p)
    out = np.zeros((dim, dim), dtype=complex)
    out[rows, np.arange(dim)] = values
    return out


def dense_sum(paulis: Sequence[PauliString], coeffs: Sequence[complex], n_qubits: int,
              cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of ``sum_j coeffs[j] * paulis[j]``."""
    if n_qubits > cap:
        raise DenseCapError(f"{n_qubits} qubits exceeds dense cap {cap}")
    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for p, c in zip(paulis, coeffs):
        rows, values = dense_action(p)
        out[rows, cols] += c * values
    return out


# ---------------------------------------------------------------------------
# Packed tables: many Pauli strings as uint64 word arrays, for the hot loops
# ---------------------------------------------------------------------------

def n_words(n_qubits: int) -> int:
    return max(1, (n_qubits + 63) // 64)


def pack(values: Sequence[int], n_qubits: int) -> np.ndarray:
    """Pack Python-int bit vectors into an ``(N, W)`` uint64 array."""
    w = n_words(n_qubits)
    out = np.zeros((len(values), w), dtype=np.uint64)
    mask = (1 << 64) - 1
    for i, v in enumerate(values):
        for k in range(w):
            out[i, k] = (v >> (64 * k)) & mask
    return out


def unpack(words: np.ndarray) -> list[int]:
    out = []
    for row in words:
        v = 0
        for k, wv in enumerate(row):
            v |= int(wv) << (64 * k)
        out.append(v)
    return out


def popcount_rows(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def commutation_matrix(xa: np.ndarray, za: np.ndarray, xb: np.ndarray | None = None,
                       zb: np.ndarray | None = None) -> np.ndarray:
    """Boolean matrix ``C[i, j] = True`` iff row i of A commutes with row j of B."""
    if xb is None:
        xb, zb = xa, za
    cnt = popcount_rows(xa[:, None, :] & zb[None, :, :]) + popcount_rows(za[:, None, :] & xb[None, :, :])
    return (cnt & 1) == 0


def table_products(xa, za, pa, xb, zb, pb):
    """Elementwise-outer products of two packed tables.

    Returns ``(x, z, phase)`` of shape ``(Na*Nb, W)``, ``(Na*Nb, W)``, ``(Na*Nb,)``
    for the products ``A[i] * B[j]`` in row-major (i, j) order.
    """
    x = xa[:, None, :] ^ xb[None, :, :]
    z = za[:, None, :] ^ zb[None, :, :]
    ph = (pa[:, None] + pb[None, :]
          + popcount_rows(xa & za)[:, None] + popcount_rows(xb & zb)[None, :]
          + 2 * popcount_rows(za[:, None, :] & xb[None, :, :])
          - popcount_rows(x & z)) % 4
    w = xa.shape[1]
    return x.reshape(-1, w), z.reshape(-1, w), ph.reshape(-1)


I_POWERS = np.array([1, 1j, -1, -1j], dtype=complex)
