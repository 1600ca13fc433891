"""Dense numerical reference: exponentials, norms, product formulas, LCU blocks.

Everything here works on explicit ``2^n x 2^n`` matrices and is meant for
small systems (``n`` up to the dense cap, 12 by default).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import pauli as pl
from .errors import DenseCapError, FormulaDomainError
from .hamiltonian import Hamiltonian
from .pauli import PauliString


@dataclass(frozen=True)
class OracleConfig:
    n_max: int = pl.DENSE_CAP
    svd_max_dim: int = 256
    power_tol: float = 1e-11
    power_max_iter: int = 5000


DEFAULT_CONFIG = OracleConfig()


def _check_cap(n: int, config: OracleConfig) -> None:
    if n > config.n_max:
        raise DenseCapError(f"{n} qubits exceeds dense cap {config.n_max}")


def expm(h: Hamiltonian, t: float, config: OracleConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``exp(-itH)`` via the Hermitian eigendecomposition of H."""
    _check_cap(h.n_qubits, config)
    return expm_dense(h.dense(config.n_max), t)


def expm_dense(H: np.ndarray, t: float) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


def spectral_norm(A: np.ndarray, config: OracleConfig = DEFAULT_CONFIG) -> float:
    """Largest singular value.

    Full SVD up to ``svd_max_dim``; above that, power iteration on ``A^dagger A``
    from a fixed start vector, falling back to SVD if it has not converged.
    """
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    if max(A.shape) <= config.svd_max_dim:
        return float(np.linalg.norm(A, 2))
    return _power_norm(A, config)


def _power_norm(A: np.ndarray, config: OracleConfig) -> float:
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(config.power_max_iter):
        w = A.conj().T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= config.power_tol * nw:
            return float(np.sqrt(nw))
        lam = nw
    return float(scipy.linalg.svdvals(A)[0])


def pauli_rotation(p: PauliString, theta: float, cap: int = pl.DENSE_CAP) -> np.ndarray:
    """``exp(-i theta P) = cos(theta) I - i sin(theta) P`` for a Hermitian Pauli P."""
    P = pl.to_dense(p, cap)
    return np.cos(theta) * np.eye(P.shape[0]) - 1j * np.sin(theta) * P


def pf1_product(h: Hamiltonian, t: float, r: int, config: OracleConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``(exp(-i c_1 H_1 t/r) ... exp(-i c_L H_L t/r))^r`` with term 1 leftmost."""
    _check_cap(h.n_qubits, config)
    if r < 1:
        raise FormulaDomainError("r must be >= 1")
    dim = 1 << h.n_qubits
    step = np.eye(dim, dtype=complex)
    for p, c in zip(h.paulis, h.signed_coeffs):
        step = step @ pauli_rotation(p, c * t / r, config.n_max)
    return np.linalg.matrix_power(step, r)


def truncated_series(H: np.ndarray, t: float, K: int) -> np.ndarray:
    """``sum_{k<=K} (-itH)^k / k!`` for a dense Hermitian H."""
    B = -1j * t * H
    term = np.eye(H.shape[0], dtype=complex)
    total = term.copy()
    for k in range(1, K + 1):
        term = term @ B / k
        total += term
    return total


# ---------------------------------------------------------------------------
# LCU block encoding and oblivious amplitude amplification
# ---------------------------------------------------------------------------

def prepare_unitary(weights) -> np.ndarray:
    """Unitary G whose first column is ``sqrt(weights / sum(weights))``.

    Completed by a Householder reflection, which is deterministic.
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not w.sum() > 0:
        raise FormulaDomainError("weights must be non-negative with positive sum")
    d = 1 << max(0, int(np.ceil(np.log2(len(w))))) if len(w) > 1 else 1
    a = np.zeros(d)
    a[: len(w)] = np.sqrt(w / w.sum())
    e0 = np.zeros(d)
    e0[0] = 1.0
    u = a - e0
    nu = np.linalg.norm(u)
    if nu < 1e-15:
        return np.eye(d)
    u /= nu
    return np.eye(d) - 2.0 * np.outer(u, u)


@dataclass(frozen=True)
class LcuBlock:
    """``W = (G^dagger x I) select(V) (G x I)`` for an explicit unitary list.

    W is applied structurally (prepare on the ancilla index, select as a
    block-diagonal stack) so only thin ``(m d) x k`` matrices are formed.
    """

    G: np.ndarray
    unitaries: np.ndarray      # (m, d, d), identity padding past the plan length
    s: float

    @property
    def ancilla_dim(self) -> int:
        return self.G.shape[0]

    @property
    def system_dim(self) -> int:
        return self.unitaries.shape[1]

    def apply(self, X: np.ndarray, adjoint: bool = False) -> np.ndarray:
        m, d = self.ancilla_dim, self.system_dim
        Y = np.einsum("ij,jdk->idk", self.G, X.reshape(m, d, -1))
        if adjoint:
            Y = np.einsum("jba,jbk->jak", self.unitaries.conj(), Y)
        else:
            Y = np.einsum("jab,jbk->jak", self.unitaries, Y)
        Y = np.einsum("ji,jdk->idk", self.G.conj(), Y)
        return Y.reshape(m * d, -1)

    def _zero_columns(self) -> np.ndarray:
        d = self.system_dim
        X = np.zeros((self.ancilla_dim * d, d), dtype=complex)
        X[:d] = np.eye(d)
        return X

    def _reflect(self, X: np.ndarray) -> np.ndarray:
        """``R = (I - 2|0><0|) x I``."""
        Y = X.copy()
        Y[: self.system_dim] *= -1.0
        return Y

    def block(self) -> np.ndarray:
        """Zero-ancilla block of W, which equals ``(sum_j beta_j V_j) / s``."""
        return self.apply(self._zero_columns())[: self.system_dim]

    @property
    def success_probability(self) -> float:
        """Zero-ancilla probability when the encoded operator is unitary: ``1/s^2``."""
        return 1.0 / self.s ** 2

    def amplified_block(self) -> np.ndarray:
        """Zero-ancilla block of ``-W R W^dagger R W``."""
        Y = self._reflect(self.apply(self._zero_columns()))
        Y = self._reflect(self.apply(Y, adjoint=True))
        return -self.apply(Y)[: self.system_dim]

    def dense_W(self) -> np.ndarray:
        return self.apply(np.eye(self.ancilla_dim * self.system_dim, dtype=complex))


def lcu_block(terms, n_qubits: int, config: OracleConfig = DEFAULT_CONFIG) -> LcuBlock:
    """Build W for ``[(V_j, beta_j)]`` with ``V_j`` given as Pauli strings or dense unitaries."""
    _check_cap(n_qubits, config)
    mats, weights = [], []
    for V, b in terms:
        mats.append(pl.to_dense(V, config.n_max) if isinstance(V, PauliString) else np.asarray(V, dtype=complex))
        weights.append(float(b))
    G = prepare_unitary(weights)
    d = 1 << n_qubits
    U = np.empty((G.shape[0], d, d), dtype=complex)
    for j in range(G.shape[0]):
        U[j] = mats[j] if j < len(mats) else np.eye(d)
    return LcuBlock(G, U, float(np.sum(weights)))


def boost_terms(terms, n_qubits: int):
    """Append ``+I`` and ``-I`` with weight ``(2 - s)/2`` each so that ``s`` becomes 2.

    The pair cancels in the block, so the encoded operator is unchanged.
    """
    s = sum(b for _, b in terms)
    if s > 2.0 + 1e-12:
        raise FormulaDomainError(f"s = {s} exceeds 2; shorten the segment")
    if s >= 2.0 - 1e-15:
        return list(terms)
    extra = (2.0 - s) / 2.0
    ident = PauliString.identity(n_qubits)
    return list(terms) + [(ident, extra), (-ident, extra)]


def amplify(terms, n_qubits: int, boost: bool = True, config: OracleConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Zero-ancilla block of ``-W R W^dagger R W`` for a plan's unitary list."""
    if boost:
        terms = boost_terms(terms, n_qubits)
    s = sum(b for _, b in terms)
    if not 1.0 < s <= 2.0 + 1e-12:
        raise FormulaDomainError(f"s = {s} outside (1, 2] without the boost construction")
    return lcu_block(terms, n_qubits, config).amplified_block()


def amplification_formula(U: np.ndarray, s: float) -> np.ndarray:
    """``(3/s) U - (4/s^3) U U^dagger U``."""
    return 3.0 / s * U - 4.0 / s ** 3 * (U @ U.conj().T @ U)
