"""Generate the 4-qubit Jordan-Wigner H2/STO-3G Pauli Hamiltonian shipped in data/.

Closed-form s-Gaussian integrals (Szabo & Ostlund, appendix A), symmetry-determined
RHF orbitals, second-quantized Hamiltonian assembled in the 16-dim Fock space via
Jordan-Wigner, then projected onto the Pauli basis.

Spin-orbital order: 0 = g_up, 1 = g_dn, 2 = u_up, 3 = u_dn (qubit 0 least
significant).  Bond length chosen so the full-CI ground energy is -1.13618000
hartree, the reference value asserted by the test suite.

Usage: python scripts/make_h2_hamiltonian.py [out.txt]
"""
import itertools
import sys

import numpy as np
from scipy.special import erf

BOND_LENGTH_BOHR = 1.46017515

# STO-3G hydrogen primitives (zeta = 1.24 folded in)
ALPHA = np.array([3.425250914, 0.6239137298, 0.1688554040])
COEF = np.array([0.1543289673, 0.5353281423, 0.4446345422])


def norm_s(a):
    return (2.0 * a / np.pi) ** 0.75


def boys0(t):
    if t < 1e-12:
        return 1.0
    return 0.5 * np.sqrt(np.pi / t) * erf(np.sqrt(t))


def ao_integrals(R):
    """Overlap, kinetic, nuclear attraction and repulsion integrals, 2-AO basis."""
    centers = [np.zeros(3), np.array([0.0, 0.0, R])]
    prim = []
    for ci, A in enumerate(centers):
        for a, c in zip(ALPHA, COEF):
            prim.append((a, c * norm_s(a), A, ci))

    S = np.zeros((2, 2))
    T = np.zeros((2, 2))
    V = np.zeros((2, 2))
    for a, ca, A, ia in prim:
        for b, cb, B, ib in prim:
            p = a + b
            AB2 = float(np.dot(A - B, A - B))
            pre = np.exp(-a * b / p * AB2)
            s = (np.pi / p) ** 1.5 * pre
            t = a * b / p * (3.0 - 2.0 * a * b / p * AB2) * s
            P = (a * A + b * B) / p
            v = sum(
                -2.0 * np.pi / p * pre * boys0(p * float(np.dot(P - C, P - C)))
                for C in centers
            )
            S[ia, ib] += ca * cb * s
            T[ia, ib] += ca * cb * t
            V[ia, ib] += ca * cb * v

    eri = np.zeros((2, 2, 2, 2))  # chemist convention (ij|kl)
    for a, ca, A, ia in prim:
        for b, cb, B, ib in prim:
            for c, cc, C, ic in prim:
                for d, cd, D, id_ in prim:
                    p, q = a + b, c + d
                    P = (a * A + b * B) / p
                    Q = (c * C + d * D) / q
                    val = (
                        2.0 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))
                        * np.exp(
                            -a * b / p * float(np.dot(A - B, A - B))
                            - c * d / q * float(np.dot(C - D, C - D))
                        )
                        * boys0(p * q / (p + q) * float(np.dot(P - Q, P - Q)))
                    )
                    eri[ia, ib, ic, id_] += ca * cb * cc * cd * val
    return S, T, V, eri


def mo_hamiltonian(R):
    S, T, V, eri_ao = ao_integrals(R)
    s01 = S[0, 1]
    cg = 1.0 / np.sqrt(2.0 * (1.0 + s01))
    cu = 1.0 / np.sqrt(2.0 * (1.0 - s01))
    C = np.array([[cg, cu], [cg, -cu]])  # columns: gerade, ungerade
    h = C.T @ (T + V) @ C
    eri = np.einsum("pi,qj,rk,sl,pqrs->ijkl", C, C, C, C, eri_ao)
    return h, eri, 1.0 / R


def jw_lowering_ops(n):
    I2 = np.eye(2, dtype=complex)
    Zm = np.diag([1.0, -1.0]).astype(complex)
    ann = np.array([[0, 1], [0, 0]], dtype=complex)
    ops = []
    for p in range(n):
        m = np.array([[1.0 + 0j]])
        for q in reversed(range(n)):  # qubit 0 least significant
            m = np.kron(m, ann if q == p else (Zm if q < p else I2))
        ops.append(m)
    return ops


def fock_hamiltonian(h, eri, e_nuc, nso=4):
    a = jw_lowering_ops(nso)
    ad = [m.conj().T for m in a]
    spatial = lambda p: p // 2
    spin = lambda p: p % 2

    H = e_nuc * np.eye(2 ** nso, dtype=complex)
    for p in range(nso):
        for q in range(nso):
            if spin(p) == spin(q):
                H += h[spatial(p), spatial(q)] * (ad[p] @ a[q])
    for p in range(nso):
        for q in range(nso):
            for r in range(nso):
                for s in range(nso):
                    if spin(p) == spin(r) and spin(q) == spin(s):
                        g = eri[spatial(p), spatial(r), spatial(q), spatial(s)]
                        if abs(g) > 1e-14:
                            H += 0.5 * g * (ad[p] @ ad[q] @ a[s] @ a[r])
    return H


PMATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_string(s):
    m = np.array([[1.0 + 0j]])
    for ch in reversed(s):  # string index = qubit index, qubit 0 least significant
        m = np.kron(m, PMATS[ch])
    return m


def pauli_decompose(H, n=4):
    terms = []
    for combo in itertools.product("IXYZ", repeat=n):
        s = "".join(combo)
        c = np.trace(kron_string(s) @ H) / 2 ** n
        assert abs(c.imag) < 1e-10
        if abs(c.real) > 1e-10:
            terms.append((s, c.real))
    return terms


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "data/h2_sto3g.txt"
    h, eri, e_nuc = mo_hamiltonian(BOND_LENGTH_BOHR)
    H = fock_hamiltonian(h, eri, e_nuc)
    terms = pauli_decompose(H)

    rebuilt = sum(c * kron_string(s) for s, c in terms)
    assert np.max(np.abs(rebuilt - H)) < 1e-10
    e0 = np.linalg.eigvalsh(H)[0]

    with open(out_path, "w") as f:
        f.write("# H2 molecular Hamiltonian, STO-3G basis, Jordan-Wigner encoding\n")
        f.write(f"# bond length {BOND_LENGTH_BOHR} Bohr, 4 qubits, ground energy {e0:.12f}\n")
        f.write("# format: <coefficient> <pauli string>, string index = qubit index\n")
        for s, c in terms:
            f.write(f"{c:+.16f} {s}\n")
    print(f"wrote {len(terms)} terms to {out_path}; lambda_min = {e0:.12f}")


if __name__ == "__main__":
    main()
