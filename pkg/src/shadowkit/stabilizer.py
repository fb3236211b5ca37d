"""Signed Pauli strings and tableau-based stabilizer simulation.

A Pauli is stored as ``i**phase * X^x Z^z`` with ``x, z`` bit vectors over
the qubits (qubit 0 leftmost) and ``phase`` an exponent mod 4.  A tableau
holds n destabilizer rows followed by n stabilizer rows, in the usual
Aaronson-Gottesman layout, with full mod-4 phase tracking so overlaps and
estimator values come out as exact dyadic rationals.
"""

from fractions import Fraction

import numpy as np

from . import bits as f2

_PAULI_BITS = {"I": (0, 0, 0), "X": (1, 0, 0), "Z": (0, 1, 0), "Y": (1, 1, 1)}
_SIGNS = {0: "+", 1: "+i", 2: "-", 3: "-i"}


class PauliString:
    """A signed n-qubit Pauli operator ``i**phase * X^x Z^z``."""

    __slots__ = ("x", "z", "phase")

    def __init__(self, x, z, phase=0):
        self.x = np.asarray(x, dtype=np.uint8) & 1
        self.z = np.asarray(z, dtype=np.uint8) & 1
        self.phase = int(phase) % 4

    @property
    def n(self):
        return len(self.x)

    @classmethod
    def identity(cls, n):
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_label(cls, label):
        """Parse e.g. '-XIZ' or '+iYY'. Letters use qubit order left to right."""
        phase = 0
        for prefix, ph in (("-i", 3), ("+i", 1), ("i", 1), ("-", 2), ("+", 0)):
            if label.startswith(prefix):
                phase, label = ph, label[len(prefix):]
                break
        x = np.zeros(len(label), dtype=np.uint8)
        z = np.zeros(len(label), dtype=np.uint8)
        for j, ch in enumerate(label):
            xj, zj, pj = _PAULI_BITS[ch]
            x[j], z[j] = xj, zj
            phase += pj
        return cls(x, z, phase)

    @classmethod
    def random(cls, n, rng, signed=True):
        x = rng.integers(2, size=n, dtype=np.uint8)
        z = rng.integers(2, size=n, dtype=np.uint8)
        base = int(np.dot(x, z)) % 2          # keep it Hermitian
        phase = base + (2 * int(rng.integers(2)) if signed else 0)
        return cls(x, z, phase)

    def __mul__(self, other):
        if self.n != other.n:
            raise ValueError("Pauli size mismatch")
        phase = self.phase + other.phase + 2 * int(np.dot(self.z, other.x))
        return PauliString(self.x ^ other.x, self.z ^ other.z, phase)

    def commutes(self, other):
        return (int(np.dot(self.x, other.z)) + int(np.dot(self.z, other.x))) % 2 == 0

    def is_hermitian(self):
        return (self.phase + int(np.dot(self.x, self.z))) % 2 == 0

    def hermitian_sign(self):
        """+1 or -1 for a Hermitian Pauli (sign in front of the IXYZ word)."""
        s = (self.phase - int(np.dot(self.x, self.z))) % 4
        if s % 2:
            raise ValueError("Pauli is not Hermitian")
        return 1 if s == 0 else -1

    def label(self):
        word = []
        for xj, zj in zip(self.x, self.z):
            word.append("IXZY"[xj + 2 * zj])
        s = (self.phase - int(np.dot(self.x, self.z))) % 4
        return _SIGNS[s] + "".join(word)

    def key(self):
        return (self.x.tobytes(), self.z.tobytes(), self.phase)

    def __eq__(self, other):
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"PauliString({self.label()})"

    def x_int(self):
        return int("".join(map(str, self.x)), 2) if self.n else 0

    def z_int(self):
        return int("".join(map(str, self.z)), 2) if self.n else 0

    def apply(self, vec):
        """Apply to a dense statevector (signed permutation, O(2^n))."""
        n = self.n
        xi, zi = self.x_int(), self.z_int()
        idx = np.arange(len(vec))
        signs = 1 - 2 * (np.bitwise_count(idx & zi) & 1).astype(np.int64)
        out = np.empty_like(vec, dtype=complex)
        out[idx ^ xi] = (1j ** self.phase) * signs * vec
        return out

    def dense(self):
        from .dense import kron_all, I2, X, Z
        factors = []
        for xj, zj in zip(self.x, self.z):
            f = I2
            if xj:
                f = X
            if zj:
                f = f @ Z
            factors.append(f)
        return (1j ** self.phase) * kron_all(factors)


class StabilizerTableau:
    """Pure stabilizer state as destabilizer/stabilizer generator rows."""

    def __init__(self, xs, zs, phases):
        self.xs = np.asarray(xs, dtype=np.uint8)
        self.zs = np.asarray(zs, dtype=np.uint8)
        self.phases = np.asarray(phases, dtype=np.int64) % 4
        self.n = self.xs.shape[1]
        if self.xs.shape != (2 * self.n, self.n):
            raise ValueError("tableau must have 2n rows")

    @classmethod
    def zero_state(cls, n):
        """|0...0>: destabilizers X_j, stabilizers Z_j."""
        xs = np.zeros((2 * n, n), dtype=np.uint8)
        zs = np.zeros((2 * n, n), dtype=np.uint8)
        for j in range(n):
            xs[j, j] = 1
            zs[n + j, j] = 1
        return cls(xs, zs, np.zeros(2 * n, dtype=np.int64))

    @classmethod
    def basis_state(cls, x):
        """|x> for a bitstring like '010'."""
        tab = cls.zero_state(len(x))
        for j, b in enumerate(x):
            if b == "1":
                tab.phases[len(x) + j] = 2
        return tab

    def copy(self):
        return StabilizerTableau(self.xs.copy(), self.zs.copy(), self.phases.copy())

    def row(self, i):
        return PauliString(self.xs[i], self.zs[i], self.phases[i])

    def stabilizer_generators(self):
        return [self.row(self.n + j) for j in range(self.n)]

    def _row_mul(self, h, i):
        """row_h <- row_h * row_i with exact phase tracking."""
        self.phases[h] = (self.phases[h] + self.phases[i]
                          + 2 * int(np.dot(self.zs[h], self.xs[i]))) % 4
        self.xs[h] ^= self.xs[i]
        self.zs[h] ^= self.zs[i]

    def apply_clifford(self, c):
        """Return the tableau of C|S>; delegates phase algebra to c."""
        if c.n != self.n:
            raise ValueError("qubit count mismatch")
        xs, zs, phases = c.conjugate_rows(self.xs, self.zs, self.phases)
        return StabilizerTableau(xs, zs, phases)

    def measure_z(self, q, rng):
        """Measure qubit q in the Z basis, collapsing in place; returns 0/1."""
        n = self.n
        anti = np.nonzero(self.xs[n:, q])[0]
        if anti.size:
            p = n + int(anti[0])
            hits = [i for i in np.nonzero(self.xs[:, q])[0] if i != p]
            for i in hits:
                self._row_mul(i, p)
            self.xs[p - n] = self.xs[p]
            self.zs[p - n] = self.zs[p]
            self.phases[p - n] = self.phases[p]
            outcome = int(rng.integers(2))
            self.xs[p] = 0
            self.zs[p] = 0
            self.zs[p, q] = 1
            self.phases[p] = 2 * outcome
            return outcome
        # deterministic outcome: express Z_q in terms of the stabilizer rows
        acc = PauliString.identity(n)
        for j in np.nonzero(self.xs[:n, q])[0]:
            acc = acc * self.row(n + int(j))
        return 0 if acc.hermitian_sign() == 1 else 1

    def sample_z_basis(self, rng):
        """One computational-basis outcome, drawn from |<x|S>|^2."""
        work = self.copy()
        return "".join(str(work.measure_z(q, rng)) for q in range(self.n))

    def z_support_dim(self):
        """Dimension of the affine support of the Z-basis distribution."""
        return f2.rank_f2(self.xs[self.n:])

    def z_constraints(self):
        """(A, b) with support = {x : A x = b over F2}; A has n-d rows."""
        n = self.n
        rows = [self.row(n + j) for j in range(n)]
        # eliminate x-parts to isolate the pure-Z subgroup, tracking phases
        r = 0
        for col in range(n):
            piv = next((i for i in range(r, n) if rows[i].x[col]), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            for i in range(n):
                if i != r and rows[i].x[col]:
                    rows[i] = rows[i] * rows[r]
            r += 1
        a_rows, b_vals = [], []
        for row in rows[r:]:
            a_rows.append(row.z.copy())
            b_vals.append(0 if row.hermitian_sign() == 1 else 1)
        a = np.array(a_rows, dtype=np.uint8).reshape(len(a_rows), n)
        return a, np.array(b_vals, dtype=np.uint8)

    def z_probability(self, x):
        """Exact Born probability of bitstring x as a Fraction."""
        xv = np.array([int(b) for b in x], dtype=np.uint8)
        a, b = self.z_constraints()
        if len(b) and ((a @ xv.astype(np.int64)) % 2 != b).any():
            return Fraction(0)
        return Fraction(1, 2 ** self.z_support_dim())

    def statevector(self):
        """Dense statevector (oracle path; arbitrary global phase)."""
        a, b = self.z_constraints()
        if len(b):
            sol = f2.solve_f2(a, b)
            if sol is None:
                raise RuntimeError("invalid tableau: inconsistent sign constraints")
            start = int("".join(map(str, sol)), 2)
        else:
            start = 0
        dim = 2 ** self.n
        v = np.zeros(dim, dtype=complex)
        v[start] = 1.0
        for g in self.stabilizer_generators():
            v = (v + g.apply(v)) / 2
        norm = np.linalg.norm(v)
        if norm < 1e-9:
            raise RuntimeError("invalid tableau: no support found")
        return v / norm


def _group_product(tab, coeffs):
    """Product of the selected stabilizer generators of tab (they commute)."""
    acc = PauliString.identity(tab.n)
    for j in np.nonzero(coeffs)[0]:
        acc = acc * tab.row(tab.n + int(j))
    return acc


def overlap_sq(a, b):
    """|<S_a|S_b>|^2, exactly, as a dyadic Fraction (0 or 2**-k).

    The stabilizer groups intersect in a subgroup of dimension d.  If the
    signs agree on that subgroup the overlap is 2**(d-n), otherwise 0.
    """
    if a.n != b.n:
        raise ValueError("qubit count mismatch")
    n = a.n
    ga = np.concatenate([a.xs[n:], a.zs[n:]], axis=1)
    gb = np.concatenate([b.xs[n:], b.zs[n:]], axis=1)
    ker = f2.kernel_f2(np.concatenate([ga, gb], axis=0).T)
    d = len(ker)
    for coeff in ker:
        pa = _group_product(a, coeff[:n])
        pb = _group_product(b, coeff[n:])
        if pa.hermitian_sign() != pb.hermitian_sign():
            return Fraction(0)
    return Fraction(1, 2 ** (n - d))
