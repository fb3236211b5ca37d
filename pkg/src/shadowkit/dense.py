"""Dense operators on n qubits in the vectorized (Liouville) picture.

Conventions used throughout the package:

* Qubit 0 is the *leftmost* tensor factor, so a computational basis state
  ``|x_0 x_1 ... x_{n-1}>`` has index ``int("".join(x), 2)``.
* Operators are plain complex numpy arrays of shape ``(2**n, 2**n)``.
* Vectorization is column-major: ``vectorize(A)[i + d*j] = A[i, j]``.
  With this choice ``vectorize(U @ X @ U.conj().T) == np.kron(U.conj(), U)
  @ vectorize(X)``.
"""

import numpy as np

ATOL_UNITARY = 1e-10
ATOL_STATE = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
T_GATE = np.diag([1.0, np.exp(1j * np.pi / 4)])

MAX_ENTRIES = 2 ** 24


def num_qubits(op):
    d = op.shape[0]
    n = d.bit_length() - 1
    if op.shape != (d, d) or d != 2 ** n or n < 1:
        raise ValueError(f"not an operator on qubits: shape {op.shape}")
    return n


def kron_all(factors):
    out = np.array([[1.0 + 0j]])
    for f in factors:
        out = np.kron(out, f)
    return out


def basis_state(x, n):
    """Density matrix |x><x| for an integer or '0101'-style bitstring x."""
    if isinstance(x, str):
        x = int(x, 2)
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    rho[x, x] = 1.0
    return rho


def is_unitary(u, atol=ATOL_UNITARY):
    d = u.shape[0]
    return np.allclose(u.conj().T @ u, np.eye(d), atol=atol)

def is_hermitian(a, atol=ATOL_UNITARY):
    return np.allclose(a, a.conj().T, atol=atol)


def hs_inner(a, b):
    """Hilbert-Schmidt inner product tr(a^dag b)."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.trace(a.conj().T @ b))


def conjugation_apply(u, x):
    """u x u^dag for unitary u; preserves trace and Hermiticity."""
    if u.shape != x.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {x.shape}")
    if not is_unitary(u):
        raise ValueError("operator is not unitary to tolerance")
    return u @ x @ u.conj().T


def tensor_power(x, t):
    if t < 1:
        raise ValueError("tensor power needs t >= 1")
    d = x.shape[0]
    if (d ** t) ** 2 > MAX_ENTRIES:
        raise MemoryError(f"tensor power {d}^{t} exceeds dense budget")
    out = x
    for _ in range(t - 1):
        out = np.kron(out, x)
    return out


def vectorize(a):
    """Column-major stacking of an operator into a length d**2 vector."""
    return np.asarray(a, dtype=complex).flatten(order="F")


def devectorize(v):
    d = round(len(v) ** 0.5)
    if d * d != len(v):
        raise ValueError("vector length is not a perfect square")
    return np.asarray(v, dtype=complex).reshape((d, d), order="F")


def conjugation_superop(u):
    """Matrix of rho -> u rho u^dag acting on vectorized operators."""
    return np.kron(u.conj(), u)


def born_probabilities(state, atol=ATOL_STATE):
    p = np.real(np.diag(state)).copy()
    if p.min() < -atol:
        raise ValueError(f"diagonal entry {p.min():.3e} below -{atol}")
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"diagonal sums to {p.sum():.12f}, not 1")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def born_sample(state, rng, shots=None):
    """Sample computational-basis outcomes with probability <x|state|x>.

    Returns a single index, or an array of ``shots`` indices.
    """
    p = born_probabilities(state)
    if shots is None:
        return int(rng.choice(len(p), p=p))
    return rng.choice(len(p), size=shots, p=p)


def index_to_bits(x, n):
    return format(x, f"0{n}b")
