import numpy as np
import pytest

from anticomm.errors import EmptyHamiltonianError, NonHermitianError, ParseError
from anticomm.hamiltonian import (FermionIntegrals, Hamiltonian, jordan_wigner, load_hamiltonian,
                                  parse_hamiltonian, serialize)
from anticomm.pauli import PauliString, commutes

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def test_basic_load():
    h = parse_hamiltonian("1.0 X0\n1.0 Z0")
    assert h.L == 2 and h.alpha == 2.0 and h.n_qubits == 1
    assert not commutes(*h.paulis)


def test_merge_duplicates():
    h = parse_hamiltonian("0.5 X0\n0.5 X0")
    assert h.L == 1 and h.coeffs == (1.0,)


def test_sign_ledger_and_dense():
    h = parse_hamiltonian("-0.3 Y1")
    assert h.coeffs == (0.3,) and h.signs == (-1,)
    assert h.sign_ledger() == [("Y1", -1)]
    np.testing.assert_allclose(h.dense(), -0.3 * np.kron(np.eye(2), Y), atol=1e-12)


def test_comments_header_and_identity():
    text = "# qubits: 3\n# label: demo\n  # comment\n-0.25 Z0 Z1  # trailing\n1.0\n"
    h = parse_hamiltonian(text)
    assert h.n_qubits == 3 and h.label == "demo" and h.L == 2
    assert any(p.is_identity() for p in h.paulis)


def test_drop_and_all_zero():
    h = parse_hamiltonian("1e-15 X0\n1.0 Z0")
    assert h.L == 1
    with pytest.raises(EmptyHamiltonianError):
        parse_hamiltonian("1.0 X0\n-1.0 X0")
    with pytest.raises(EmptyHamiltonianError):
        parse_hamiltonian("# nothing here\n")


@pytest.mark.parametrize("text,line", [("1.0 X0\nabc X1", 2), ("1.0 X0\n\n2.0 Q3", 3), ("1.0 X0 Z0", 1),
                                       ("nan X0", 1)])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_hamiltonian(text, source="h.txt")
    assert exc.value.line_no == line
    assert str(exc.value).startswith(f"h.txt:{line}:")


def test_header_too_small():
    with pytest.raises(ParseError):
        parse_hamiltonian("# qubits: 1\n1.0 X3")


def test_round_trip(rng):
    terms = []
    for _ in range(15):
        x, z = int(rng.integers(0, 16)), int(rng.integers(0, 16))
        terms.append((float(rng.normal()), PauliString(4, x, z)))
    h = Hamiltonian.from_terms(terms, 4, "rt")
    h2 = parse_hamiltonian(serialize(h))
    assert set(zip(h.paulis, h.signed_coeffs)) == set(zip(h2.paulis, h2.signed_coeffs))
    np.testing.assert_allclose(h.dense(), h2.dense(), atol=1e-12)


def test_raw_text_and_ledger_agree(rng):
    lines = []
    dense = np.zeros((8, 8), dtype=complex)
    mats = {"X": X, "Y": Y, "Z": Z}
    for _ in range(10):
        c = float(rng.normal())
        letters = [rng.choice(["I", "X", "Y", "Z"]) for _ in range(3)]
        fac = " ".join(f"{l}{q}" for q, l in enumerate(letters) if l != "I")
        lines.append(f"{c!r} {fac}")
        m = np.eye(1)
        for l in letters:
            m = np.kron(m, mats.get(l, np.eye(2)))
        dense += c * m
    h = parse_hamiltonian("# qubits: 3\n" + "\n".join(lines))
    np.testing.assert_allclose(h.dense(), dense, atol=1e-12)


def test_load_from_file(tmp_path):
    f = tmp_path / "mol.txt"
    f.write_text("1.0 X0\n0.5 Z1\n")
    h = load_hamiltonian(f)
    assert h.label == "mol" and h.n_qubits == 2
    f.write_text("# label: named\n1.0 X0\n")
    assert load_hamiltonian(f).label == "named"


# -- Jordan-Wigner ----------------------------------------------------------

def dense_ladder(n):
    """Independent dense a_p: (X + iY)/2 on mode p with Z on modes < p (mode 0 leftmost factor)."""
    lower = (X + 1j * Y) / 2
    out = []
    for p in range(n):
        m = np.eye(1)
        for q in range(n):
            m = np.kron(m, Z if q < p else (lower if q == p else np.eye(2)))
        out.append(m)
    return out


def dense_fermion_h(f: FermionIntegrals):
    a = dense_ladder(f.n_modes)
    ad = [m.conj().T for m in a]
    H = sum(f.one_body[p, q] * ad[p] @ a[q] for p in range(f.n_modes) for q in range(f.n_modes))
    for p, q, r, s in np.argwhere(f.two_body != 0):
        H = H + 0.5 * f.two_body[p, q, r, s] * ad[p] @ ad[q] @ a[r] @ a[s]
    return H


def test_jw_number_operator():
    h = jordan_wigner(FermionIntegrals(1, np.array([[1.0]])))
    got = {(p.label() or "I"): c for p, c in zip(h.paulis, h.signed_coeffs)}
    assert got == {"I": 0.5, "Z0": -0.5}


def test_jw_hopping():
    h = jordan_wigner(FermionIntegrals(2, np.array([[0.0, 1.0], [1.0, 0.0]])))
    got = {p.label(): c for p, c in zip(h.paulis, h.signed_coeffs)}
    assert got == pytest.approx({"X0 X1": 0.5, "Y0 Y1": 0.5})
    np.testing.assert_allclose(h.dense(), dense_fermion_h(FermionIntegrals(2, np.array([[0.0, 1.0], [1.0, 0.0]]))),
                               atol=1e-12)


def test_jw_all_zero():
    with pytest.raises(EmptyHamiltonianError):
        jordan_wigner(FermionIntegrals(2, np.zeros((2, 2))))


def random_integrals(rng, n):
    h1 = rng.normal(size=(n, n))
    h1 = h1 + h1.T
    h2 = rng.normal(size=(n,) * 4) * 0.3
    # hermiticity of the two-body part: h_pqrs = h_srqp
    h2 = h2 + h2.transpose(3, 2, 1, 0)
    return FermionIntegrals(n, h1, h2)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_jw_matches_dense_fermions_and_is_hermitian(rng, n):
    f = random_integrals(rng, n)
    h = jordan_wigner(f)
    H = h.dense()
    np.testing.assert_allclose(H, H.conj().T, atol=1e-12)
    np.testing.assert_allclose(H, dense_fermion_h(f), atol=1e-10)


def test_jw_hermitian_six_modes(rng):
    f = random_integrals(rng, 6)
    H = jordan_wigner(f).dense()
    assert np.abs(H - H.conj().T).max() <= 1e-12


def test_jw_rejects_non_hermitian():
    h2 = np.zeros((3,) * 4)
    h2[0, 1, 0, 2] = 1.0  # partner h_2010 missing: n_0 a+_1 a_2 alone
    with pytest.raises(NonHermitianError):
        jordan_wigner(FermionIntegrals(3, np.zeros((3, 3)), h2))
    with pytest.raises(NonHermitianError):
        FermionIntegrals(2, np.array([[0.0, 1.0], [0.0, 0.0]]))
