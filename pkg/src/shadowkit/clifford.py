"""The n-qubit Clifford group in binary-symplectic form.

An element is a pair ``(S, alpha)``: a 2n x 2n matrix over F2 that is
symplectic for the standard form ``J = [[0, I], [I, 0]]``, plus 2n sign
bits.  Column j of S gives the X/Z bits of the conjugated generator
(X_0..X_{n-1}, Z_0..Z_{n-1} in that order) and ``alpha[j]`` its sign, the
image being the Hermitian Pauli ``(-1)**alpha[j] * i**(x.z) * X^x Z^z``.
This pair determines the unitary up to global phase, and every choice of
``(S, alpha)`` is a valid element, so the group order is
``2**(n**2 + 2n) * prod_{j=1..n} (4**j - 1)``.

Uniform sampling builds the symplectic factor by the transvection
construction of Koenig and Smolin, which is an explicit bijection from
mixed-radix index tuples onto the symplectic group; sampling the tuple
uniformly is therefore exactly uniform, and iterating it enumerates the
group without repetition.
"""

import numpy as np

from . import bits as f2
from .stabilizer import PauliString, StabilizerTableau


def symplectic_order(n):
    order = 1
    for j in range(1, n + 1):
        order *= (4 ** j - 1) * 2 ** (2 * j - 1)
    return order


def clifford_order(n):
    """|C_n| modulo global phase: one element per (S, alpha) pair."""
    return 4 ** n * symplectic_order(n)


def symplectic_form(n):
    j = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    j[:n, n:] = np.eye(n, dtype=np.uint8)
    j[n:, :n] = np.eye(n, dtype=np.uint8)
    return j


def is_symplectic(s):
    n = s.shape[0] // 2
    j = symplectic_form(n)
    return (f2.mat_mul_f2(f2.mat_mul_f2(s.T, j), s) == j).all()


# ---------------------------------------------------------------------------
# Koenig-Smolin construction.  Internally we work in the "direct sum"
# convention where coordinates come in (x_i, z_i) pairs; the result is
# permuted into the standard block convention at the end.

def _sympl_inner_ds(v, w):
    return int(np.dot(v[0::2], w[1::2]) + np.dot(v[1::2], w[0::2])) % 2


def _transvect_ds(h, v):
    if _sympl_inner_ds(v, h):
        return v ^ h
    return v.copy()


def _find_transvection_ds(x, y):
    """Two vectors h1, h2 with Z_h2 Z_h1 x = y (Z_h v = v + <v,h> h)."""
    nn = len(x)
    z = np.zeros(nn, dtype=np.uint8)
    if (x == y).all():
        return z.copy(), z.copy()
    if _sympl_inner_ds(x, y):
        return (x ^ y), z.copy()
    # <x,y> = 0: go through an intermediate z with <x,z> = <y,z> = 1
    for i in range(nn // 2):
        ii = 2 * i
        if (x[ii] or x[ii + 1]) and (y[ii] or y[ii + 1]):
            z[ii] = x[ii] ^ y[ii]
            z[ii + 1] = x[ii + 1] ^ y[ii + 1]
            if not (z[ii] or z[ii + 1]):
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            return (x ^ z), (y ^ z)
    for i in range(nn // 2):
        ii = 2 * i
        if (x[ii] or x[ii + 1]) and not (y[ii] or y[ii + 1]):
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for i in range(nn // 2):
        ii = 2 * i
        if not (x[ii] or x[ii + 1]) and (y[ii] or y[ii + 1]):
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    return (x ^ z), (y ^ z)


def _int_bits(k, width):
    return np.array([(k >> b) & 1 for b in range(width)], dtype=np.uint8)


def _symplectic_from_components(components):
    """Build a direct-sum-convention symplectic matrix from per-level
    (k, bits) pairs, ordered from level 1 (2x2) up to level n."""
    g = None
    for level, (k, free_bits) in enumerate(components, start=1):
        nn = 2 * level
        if g is None:
            g = np.eye(2, dtype=np.uint8)
        else:
            new = np.eye(nn, dtype=np.uint8)
            new[2:, 2:] = g
            g = new
        e1 = np.zeros(nn, dtype=np.uint8)
        e1[0] = 1
        f1 = _int_bits(k, nn)
        t0, t1 = _find_transvection_ds(e1, f1)
        bvec = _int_bits(free_bits, nn - 1)
        eprime = e1.copy()
        eprime[2:] = bvec[1:]
        h0 = _transvect_ds(t1, _transvect_ds(t0, eprime))
        if bvec[0]:
            f1 = np.zeros(nn, dtype=np.uint8)
        for h in (t0, t1, h0, f1):
            if h.any():
                coeff = (g[:, 0::2] @ h[1::2] + g[:, 1::2] @ h[0::2]) % 2
                g ^= np.outer(coeff, h).astype(np.uint8)
    return g


def _components_from_index(index, n):
    components = []
    for level in range(n, 0, -1):
        s = 4 ** level - 1
        k = index % s + 1
        index //= s
        free = index % 2 ** (2 * level - 1)
        index >>= 2 * level - 1
        components.append((k, free))
    components.reverse()
    return components


def _ds_to_standard(s_ds):
    nn = s_ds.shape[0]
    n = nn // 2
    perm = np.empty(nn, dtype=np.int64)
    for i in range(n):
        perm[2 * i] = i
        perm[2 * i + 1] = n + i
    out = np.zeros_like(s_ds)
    out[np.ix_(perm, perm)] = s_ds
    return out


def symplectic_from_index(index, n):
    """Standard-convention symplectic matrix with canonical index ``index``."""
    if not 0 <= index < symplectic_order(n):
        raise ValueError("symplectic index out of range")
    return _ds_to_standard(_symplectic_from_components(_components_from_index(index, n)))


def sample_symplectic(n, rng):
    components = [(int(rng.integers(1, 4 ** level)),
                   int(rng.integers(0, 2 ** (2 * level - 1))))
                  for level in range(1, n + 1)]
    return _ds_to_standard(_symplectic_from_components(components))


# ---------------------------------------------------------------------------

class CliffordElement:
    __slots__ = ("symplectic", "alpha", "n", "_phase_cache")

    def __init__(self, symplectic, alpha):
        self.symplectic = np.asarray(symplectic, dtype=np.uint8) & 1
        self.alpha = np.asarray(alpha, dtype=np.uint8) & 1
        self.n = self.symplectic.shape[0] // 2
        self._phase_cache = None

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    def _column_data(self):
        """Per-generator image phases q_j and the reordering form M."""
        if self._phase_cache is None:
            s = self.symplectic.astype(np.int64)
            n = self.n
            xz = (s[:n] * s[n:]).sum(axis=0)       # x.z per column
            q = (xz + 2 * self.alpha.astype(np.int64)) % 4
            m = np.triu((s[n:].T @ s[:n]) % 2, 1)  # m[j,j'] = z_j . x_j', j<j'
            self._phase_cache = (q, m)
        return self._phase_cache

    def conjugate_rows(self, xs, zs, phases):
        """Conjugate a batch of Pauli rows: returns new (xs, zs, phases)."""
        n = self.n
        v = np.concatenate([xs, zs], axis=1).astype(np.int64)
        q, m = self._column_data()
        new_bits = (v @ self.symplectic.T.astype(np.int64)) % 2
        quad = ((v @ m) * v).sum(axis=1) % 2
        new_phases = (np.asarray(phases) + v @ q + 2 * quad) % 4
        return (new_bits[:, :n].astype(np.uint8),
                new_bits[:, n:].astype(np.uint8), new_phases)

    def conjugate_pauli(self, p):
        xs, zs, phases = self.conjugate_rows(p.x.reshape(1, -1),
                                             p.z.reshape(1, -1), [p.phase])
        return PauliString(xs[0], zs[0], int(phases[0]))

    def compose(self, other):
        """Element implementing 'apply other, then self'."""
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        n = self.n
        s = f2.mat_mul_f2(self.symplectic, other.symplectic).astype(np.uint8)
        ob = other.symplectic.astype(np.int64)
        oq = (ob[:n] * ob[n:]).sum(axis=0) + 2 * other.alpha.astype(np.int64)
        xs, zs, phases = self.conjugate_rows(other.symplectic[:n].T,
                                             other.symplectic[n:].T, oq % 4)
        sx = s.astype(np.int64)
        target_xz = (sx[:n] * sx[n:]).sum(axis=0)
        alpha = ((phases - target_xz) // 2) % 2
        if ((phases - target_xz) % 2).any():
            raise AssertionError("composition produced a non-Hermitian image")
        return CliffordElement(s, alpha.astype(np.uint8))

    def inverse(self):
        n = self.n
        j = symplectic_form(n)
        s_inv = f2.mat_mul_f2(f2.mat_mul_f2(j, self.symplectic.T), j).astype(np.uint8)
        xs, zs, phases = self.conjugate_rows(s_inv[:n].T, s_inv[n:].T,
                                             (s_inv[:n] * s_inv[n:]).sum(axis=0) % 4)
        # self applied to the unsigned inverse images must give back the
        # generators; the leftover sign is the inverse's alpha
        alpha = (np.asarray(phases) // 2) % 2
        return CliffordElement(s_inv, alpha.astype(np.uint8))

    def apply_to(self, tab):
        return tab.apply_clifford(self)

    def to_dense(self):
        """A unitary realizing this element (global phase arbitrary).

        Column x is the image of X^x applied to the rotated zero state:
        U|x> = (U X^x U^dag) U|0^n>.
        """
        n = self.n
        if n > 6:
            raise ValueError("dense Clifford capped at n <= 6")
        psi0 = StabilizerTableau.zero_state(n).apply_clifford(self).statevector()
        dim = 2 ** n
        idx = np.arange(dim)
        xbits = ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)
        imgs, img_z, phases = self.conjugate_rows(
            xbits, np.zeros((dim, n), dtype=np.uint8), np.zeros(dim, dtype=np.int64))
        weights = 1 << np.arange(n - 1, -1, -1)
        a_int = imgs @ weights                     # image X-bit patterns
        b_int = img_z @ weights
        src = idx[:, None] ^ a_int[None, :]        # source index per (row, col)
        signs = 1 - 2 * (np.bitwise_count(src & b_int[None, :]) & 1).astype(np.int64)
        i_pow = np.array([1, 1j, -1, -1j])[phases]
        return i_pow[None, :] * signs * psi0[src]

    def key(self):
        return (self.n, self.symplectic.tobytes(), self.alpha.tobytes())

    def __eq__(self, other):
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_hex(self):
        bits = np.concatenate([self.symplectic.reshape(-1), self.alpha])
        return np.packbits(bits).tobytes().hex()

    @classmethod
    def from_hex(cls, n, hexstr):
        raw = np.unpackbits(np.frombuffer(bytes.fromhex(hexstr), dtype=np.uint8))
        need = 4 * n * n + 2 * n
        bits = raw[:need]
        s = bits[:4 * n * n].reshape(2 * n, 2 * n)
        return cls(s, bits[4 * n * n:])

    def __repr__(self):
        return f"CliffordElement(n={self.n}, {self.to_hex()[:16]}...)"


def sample_uniform(n, rng):
    """Exactly uniform element of C_n (modulo global phase)."""
    s = sample_symplectic(n, rng)
    alpha = rng.integers(2, size=2 * n, dtype=np.uint8)
    return CliffordElement(s, alpha)


def sample_uniform_batch(n, rng, count):
    """count independent uniform elements, drawn through the batched sampler."""
    mats = sample_symplectic_batch(n, rng, count)
    alphas = rng.integers(2, size=(count, 2 * n), dtype=np.uint8)
    return [CliffordElement(s, a) for s, a in zip(mats, alphas)]


def enumerate_group(n):
    """All of C_n (mod phase), each element exactly once.  n <= 2 only."""
    if n not in (1, 2):
        raise ValueError("exhaustive enumeration supported for n in {1, 2}")
    for index in range(symplectic_order(n)):
        s = symplectic_from_index(index, n)
        for abits in range(4 ** n):
            alpha = _int_bits(abits, 2 * n)
            yield CliffordElement(s, alpha)


def random_stabilizer_tableau(n, rng):
    """Uniformly random pure stabilizer state, as a tableau."""
    return StabilizerTableau.zero_state(n).apply_clifford(sample_uniform(n, rng))


# ---------------------------------------------------------------------------
# Batched symplectic sampling for the high-throughput experiment paths.

def _transvect_batch(g, h):
    """Apply per-sample transvections Z_{h[b]} to all rows of g[b]."""
    coeff = (np.einsum("bri,bi->br", g[:, :, 0::2].astype(np.int64),
                       h[:, 1::2].astype(np.int64))
             + np.einsum("bri,bi->br", g[:, :, 1::2].astype(np.int64),
                         h[:, 0::2].astype(np.int64))) % 2
    g ^= (coeff[:, :, None] * h[:, None, :]).astype(np.uint8)


def _find_transvection_e1_batch(f1):
    """Batched _find_transvection_ds specialized to x = e1."""
    nb, nn = f1.shape
    e1 = np.zeros(nn, dtype=np.uint8)
    e1[0] = 1
    t0 = np.zeros_like(f1)
    t1 = np.zeros_like(f1)
    is_e1 = (f1 == e1).all(axis=1)
    inner = f1[:, 1].astype(bool) & ~is_e1
    t0[inner] = f1[inner] ^ e1
    hard = ~inner & ~is_e1
    if hard.any():
        fh = f1[hard]
        z = np.zeros_like(fh)
        pair0 = fh[:, 0].astype(bool)           # y nonzero in pair 0
        z[pair0, 0] = 1
        z[pair0, 1] = 1
        rest = ~pair0
        if rest.any():
            fr = fh[rest]
            zr = np.zeros_like(fr)
            zr[:, 1] = 1                        # pair 0: x=(1,0), y=(0,0)
            pairs = fr.reshape(len(fr), -1, 2)
            nonzero = pairs.any(axis=2)
            first = np.argmax(nonzero, axis=1)
            rows = np.arange(len(fr))
            yi = pairs[rows, first, 0]
            yi1 = pairs[rows, first, 1]
            eq = yi == yi1
            zr[rows[eq], 2 * first[eq] + 1] = 1
            zr[rows[~eq], 2 * first[~eq] + 1] = yi[~eq]
            zr[rows[~eq], 2 * first[~eq]] = yi1[~eq]
            z[rest] = zr
        t0[hard] = e1 ^ z
        t1[hard] = fh ^ z
    return t0, t1


def sample_symplectic_batch(n, rng, count):
    """count standard-convention symplectic matrices, exactly uniform."""
    g = np.broadcast_to(np.eye(2, dtype=np.uint8), (count, 2, 2)).copy()
    for level in range(1, n + 1):
        nn = 2 * level
        if level > 1:
            gnew = np.zeros((count, nn, nn), dtype=np.uint8)
            gnew[:, 0, 0] = 1
            gnew[:, 1, 1] = 1
            gnew[:, 2:, 2:] = g
            g = gnew
        k = rng.integers(1, 4 ** level, size=count)
        free = rng.integers(0, 2 ** (2 * level - 1), size=count)
        f1 = ((k[:, None] >> np.arange(nn)) & 1).astype(np.uint8)
        bvec = ((free[:, None] >> np.arange(nn - 1)) & 1).astype(np.uint8)
        t0, t1 = _find_transvection_e1_batch(f1)
        eprime = np.zeros((count, nn), dtype=np.uint8)
        eprime[:, 0] = 1
        eprime[:, 2:] = bvec[:, 1:]
        h0 = eprime[:, None, :].copy()
        _transvect_batch(h0, t0)
        _transvect_batch(h0, t1)
        h0 = h0[:, 0, :]
        f1 = f1 * (1 - bvec[:, :1])
        for h in (t0, t1, h0, f1):
            _transvect_batch(g, h)
    # standard position i reads direct-sum position 2i (x_i) or 2i+1 (z_i)
    gather = np.empty(2 * n, dtype=np.int64)
    gather[:n] = 2 * np.arange(n)
    gather[n:] = 2 * np.arange(n) + 1
    return g[:, gather][:, :, gather]
