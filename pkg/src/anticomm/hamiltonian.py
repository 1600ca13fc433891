"""Hamiltonian container, term-list I/O and the Jordan-Wigner builder.

Coefficients are stored as magnitudes ``alpha_l = |c_l| > 0``; the sign of the
input coefficient is kept in a per-term sign bit and applied only when a term
enters a unitary (``-i H_l`` becomes ``+i H_l``).  Every bound formula uses the
magnitudes.

Term-list format (UTF-8)::

    # qubits: 4
    -0.25 Z0 Z1
    0.5 X0 Y3
    1.0            # identity term

Factors match ``[XYZ][0-9]+``; qubit indices are 0-based.  Duplicate operators
are merged by exact summation and terms with ``|c| < 1e-14`` are dropped.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import pauli as pl
from .errors import EmptyHamiltonianError, NonHermitianError, ParseError
from .pauli import PauliString

DROP_TOL = 1e-14
HERMITIAN_TOL = 1e-10

_HEADER_RE = re.compile(r"^#\s*qubits\s*:\s*([0-9]+)\s*$", re.IGNORECASE)
_LABEL_RE = re.compile(r"^#\s*label\s*:\s*(.*?)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class Hamiltonian:
    """``H = sum_l sign_l * alpha_l * H_l`` with ``alpha_l > 0`` and Hermitian Pauli ``H_l``."""

    n_qubits: int
    paulis: tuple[PauliString, ...]
    coeffs: tuple[float, ...]
    signs: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        if not self.paulis:
            raise EmptyHamiltonianError("Hamiltonian has no terms")
        if not (len(self.paulis) == len(self.coeffs) == len(self.signs)):
            raise ValueError("paulis, coeffs and signs must have equal length")
        keys = set()
        for p, c, s in zip(self.paulis, self.coeffs, self.signs):
            if p.n_qubits != self.n_qubits:
                raise ValueError("term width differs from n_qubits")
            if p.phase != 0:
                raise ValueError("term operators must carry phase 0")
            if not c > 0:
                raise ValueError("coefficients must be positive")
            if s not in (1, -1):
                raise ValueError("signs must be +1 or -1")
            if p.key in keys:
                raise ValueError(f"duplicate operator {p}")
            keys.add(p.key)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, PauliString]], n_qubits: int | None = None,
                   label: str = "", drop_tol: float = DROP_TOL) -> "Hamiltonian":
        """Merge duplicates, fold signs and drop negligible terms.

        A term whose operator carries phase ``-1`` has its coefficient negated;
        phases ``+-i`` are rejected because the term would not be Hermitian.
        """
        groups: dict[tuple[int, int], list[float]] = {}
        order: list[PauliString] = []
        width = n_qubits
        for c, p in terms:
            if p.phase in (1, 3):
                raise NonHermitianError(f"term {p} has an imaginary phase")
            c = float(c) * (-1.0 if p.phase == 2 else 1.0)
            if width is None:
                width = p.n_qubits
            if p.n_qubits != width:
                p = PauliString(width, p.x, p.z)
            if p.key not in groups:
                groups[p.key] = []
                order.append(p.with_phase(0))
            groups[p.key].append(c)
        paulis, coeffs, signs = [], [], []
        for p in order:
            c = math.fsum(groups[p.key])
            if abs(c) < drop_tol:
                continue
            paulis.append(p)
            coeffs.append(abs(c))
            signs.append(1 if c > 0 else -1)
        if not paulis:
            raise EmptyHamiltonianError("all-zero Hamiltonian")
        return cls(width, tuple(paulis), tuple(coeffs), tuple(signs), label)

    # -- derived quantities -------------------------------------------------

    @property
    def L(self) -> int:
        return len(self.paulis)

    @cached_property
    def alphas(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    @cached_property
    def signed_coeffs(self) -> np.ndarray:
        return self.alphas * np.array(self.signs, dtype=float)

    @cached_property
    def alpha(self) -> float:
        return math.fsum(self.coeffs)

    @cached_property
    def beta_s(self) -> float:
        return math.sqrt(math.fsum(c * c for c in self.coeffs))

    @cached_property
    def max_weight(self) -> int:
        return max(p.weight for p in self.paulis)

    @cached_property
    def x_words(self) -> np.ndarray:
        return pl.pack([p.x for p in self.paulis], self.n_qubits)

    @cached_property
    def z_words(self) -> np.ndarray:
        return pl.pack([p.z for p in self.paulis], self.n_qubits)

    def dense(self, cap: int = pl.DENSE_CAP) -> np.ndarray:
        return pl.dense_sum(self.paulis, self.signed_coeffs, self.n_qubits, cap)

    def sign_ledger(self) -> list[tuple[str, int]]:
        """Terms whose input coefficient was negative, as ``(label, -1)`` pairs."""
        return [(p.label() or "I", s) for p, s in zip(self.paulis, self.signs) if s < 0]

    def scaled(self, coeffs: Sequence[float]) -> "Hamiltonian":
        """Same operators with new (signed) coefficients."""
        return Hamiltonian.from_terms(zip(coeffs, self.paulis), self.n_qubits, self.label)

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        n = max(self.n_qubits, other.n_qubits)
        terms = [(c, PauliString(n, p.x, p.z)) for c, p in zip(self.signed_coeffs, self.paulis)]
        terms += [(c, PauliString(n, p.x, p.z)) for c, p in zip(other.signed_coeffs, other.paulis)]
        return Hamiltonian.from_terms(terms, n, self.label)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def parse_hamiltonian(text: str, label: str = "", source: str | None = None,
                      drop_tol: float = DROP_TOL, default_label: str = "") -> Hamiltonian:
    """Parse the term-list format.  Label priority: ``label``, ``# label:`` header, ``default_label``."""
    header_n = None
    header_label = ""
    raw: list[tuple[float, list[tuple[str, int]]]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = _HEADER_RE.match(stripped)
        if m:
            header_n = int(m.group(1))
            continue
        m = _LABEL_RE.match(stripped)
        if m:
            header_label = m.group(1)
            continue
        body = stripped.split("#", 1)[0].strip()
        if not body:
            continue
        head, *rest = body.split(None, 1)
        try:
            c = float(head)
        except ValueError:
            raise ParseError(f"expected a real coefficient, got {head!r}", line_no, source) from None
        if not math.isfinite(c):
            raise ParseError("coefficient is not finite", line_no, source)
        try:
            factors = pl.parse_factors(rest[0] if rest else "", line_no)
        except ParseError as exc:
            raise ParseError(str(exc).split(": ", 1)[-1], line_no, source) from None
        qubits = [q for _, q in factors]
        if len(set(qubits)) != len(qubits):
            raise ParseError("qubit repeated within one term", line_no, source)
        raw.append((c, factors))
    if not raw:
        raise EmptyHamiltonianError(f"{source or 'input'}: no terms")
    n = 1 + max((q for _, fs in raw for _, q in fs), default=0)
    if header_n is not None:
        if header_n < n:
            raise ParseError(f"header declares {header_n} qubits but index {n - 1} is used", None, source)
        n = header_n
    label = label or header_label or default_label
    terms = [(c, PauliString.from_factors(fs, n)) for c, fs in raw]
    try:
        return Hamiltonian.from_terms(terms, n, label, drop_tol)
    except EmptyHamiltonianError:
        raise EmptyHamiltonianError(f"{source or 'input'}: all-zero Hamiltonian") from None


def load_hamiltonian(source: str | os.PathLike, label: str | None = None) -> Hamiltonian:
    """Load from a file path, or parse ``source`` directly if it is not a path."""
    if isinstance(source, os.PathLike) or ("\n" not in str(source) and Path(str(source)).is_file()):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        return parse_hamiltonian(text, label or "", str(path), default_label=path.stem)
    return parse_hamiltonian(str(source), label or "")


def serialize(h: Hamiltonian) -> str:
    lines = [f"# qubits: {h.n_qubits}"]
    if h.label:
        lines.append(f"# label: {h.label}")
    for p, c in zip(h.paulis, h.signed_coeffs):
        lbl = p.label()
        lines.append(f"{float(c)!r} {lbl}".rstrip())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Jordan-Wigner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FermionIntegrals:
    """Real integrals of ``sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s``."""

    n_modes: int
    one_body: np.ndarray
    two_body: np.ndarray = field(default=None)

    def __post_init__(self):
        h1 = np.asarray(self.one_body, dtype=float)
        if h1.shape != (self.n_modes, self.n_modes):
            raise ValueError(f"one_body must have shape ({self.n_modes}, {self.n_modes})")
        if not np.allclose(h1, h1.T, atol=1e-12, rtol=0):
            raise NonHermitianError("one-body integrals are not symmetric")
        h2 = self.two_body
        if h2 is None:
            h2 = np.zeros((self.n_modes,) * 4)
        h2 = np.asarray(h2, dtype=float)
        if h2.shape != (self.n_modes,) * 4:
            raise ValueError("two_body must have shape (n, n, n, n)")
        object.__setattr__(self, "one_body", h1)
        object.__setattr__(self, "two_body", h2)


_Op = dict  # (x, z) -> complex


def _op_mul(a: _Op, b: _Op) -> _Op:
    out: _Op = {}
    for (xa, za), ca in a.items():
        for (xb, zb), cb in b.items():
            k = (xa ^ xb, za ^ zb)
            out[k] = out.get(k, 0.0) + ca * cb * pl.I_POWERS[pl.product_phase(xa, za, xb, zb)]
    return out


def _ladder(p: int, dagger: bool) -> _Op:
    # a_p = (X_p + iY_p)/2 (x) Z_{p-1} ... Z_0
    lower = (1 << p) - 1
    xp = 1 << p
    return {(xp, lower): 0.5, (xp, lower | xp): (-0.5j if dagger else 0.5j)}


def jordan_wigner(f: FermionIntegrals, label: str = "", drop_tol: float = DROP_TOL) -> Hamiltonian:
    n = f.n_modes
    ann = [_ladder(p, False) for p in range(n)]
    cre = [_ladder(p, True) for p in range(n)]
    acc: _Op = {}

    def add(op: _Op, coeff: float):
        for k, v in op.items():
            acc[k] = acc.get(k, 0.0) + coeff * v

    for p in range(n):
        for q in range(n):
            if f.one_body[p, q] != 0.0:
                add(_op_mul(cre[p], ann[q]), f.one_body[p, q])

    nz = np.argwhere(f.two_body != 0.0)
    if len(nz):
        cc = {}
        aa = {}
        for p, q, r, s in nz:
            if (p, q) not in cc:
                cc[(p, q)] = _op_mul(cre[p], cre[q])
            if (r, s) not in aa:
                aa[(r, s)] = _op_mul(ann[r], ann[s])
            add(_op_mul(cc[(p, q)], aa[(r, s)]), 0.5 * f.two_body[p, q, r, s])

    terms = []
    for (x, z), c in acc.items():
        if abs(c.imag) > HERMITIAN_TOL:
            raise NonHermitianError(
                f"residual imaginary coefficient {c.imag:.3e} on {PauliString(n, x, z)}")
        terms.append((c.real, PauliString(n, x, z)))
    try:
        return Hamiltonian.from_terms(terms, n, label, drop_tol)
    except EmptyHamiltonianError:
        raise EmptyHamiltonianError("all-zero Hamiltonian from integrals") from None
