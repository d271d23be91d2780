"""Matrix product states: canonical forms, truncation, sampling, dense bridge.

Gauge convention: canonicalization produces left-canonical tensors via a
left-to-right QR sweep; truncation runs right-to-left on the left-canonical
state.  Site tensors have shape (left bond, physical=2, right bond) with
boundary bonds of size 1.  Site 0 is the most significant bit of the basis
index, matching the convention in problems.py.
"""

from __future__ import annotations

import json

import numpy as np

from .analytics import DenseState

MAX_DENSE_QUBITS = 16
SVD_CUTOFF = 1e-12  # relative; noise bonds are dropped even under chi_max


class MpsError(ValueError):
    pass


class MPS:
    """Immutable-by-convention MPS; operations return new instances."""

    def __init__(self, tensors):
        tensors = [np.asarray(t, dtype=np.complex128) for t in tensors]
        if not tensors:
            raise MpsError("empty tensor list")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise MpsError("boundary bonds must have dimension 1")
        for k, t in enumerate(tensors):
            if t.ndim != 3 or t.shape[1] != 2:
                raise MpsError(f"site {k}: expected shape (Dl, 2, Dr), got {t.shape}")
            if k > 0 and tensors[k - 1].shape[2] != t.shape[0]:
                raise MpsError(f"bond mismatch between sites {k-1} and {k}")
        self.tensors = tensors

    @property
    def n(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def chi(self) -> int:
        return max(self.bond_dims, default=1)

    def copy(self) -> "MPS":
        return MPS([t.copy() for t in self.tensors])

    # -- constructors -------------------------------------------------------

    @classmethod
    def plus_state(cls, n: int) -> "MPS":
        if n < 1:
            raise MpsError("n must be >= 1")
        t = (np.ones((1, 2, 1)) / np.sqrt(2)).astype(np.complex128)
        return cls([t.copy() for _ in range(n)])

    @classmethod
    def basis_state(cls, bits) -> "MPS":
        tensors = []
        for b in bits:
            t = np.zeros((1, 2, 1), dtype=np.complex128)
            t[0, int(b), 0] = 1.0
            tensors.append(t)
        return cls(tensors)

    @classmethod
    def from_dense(cls, psi: DenseState, chi_max=None) -> "MPS":
        """Sequential-SVD decomposition of a dense state."""
        n = psi.n
        tensors = []
        rest = psi.amplitudes.reshape(1, -1)
        for _ in range(n - 1):
            dl = rest.shape[0]
            m = rest.reshape(dl * 2, -1)
            u, s, vh = np.linalg.svd(m, full_matrices=False)
            keep = s > SVD_CUTOFF * s[0] if s[0] > 0 else s > 0
            k = max(1, int(keep.sum()))
            if chi_max is not None:
                k = min(k, chi_max)
            tensors.append(u[:, :k].reshape(dl, 2, k))
            rest = (s[:k, None] * vh[:k]).astype(np.complex128)
        tensors.append(rest.reshape(rest.shape[0], 2, 1))
        out = cls(tensors)
        return out.normalized()

    # -- basic quantities ----------------------------------------------------

    def norm(self) -> float:
        env = np.ones((1, 1), dtype=np.complex128)
        for t in self.tensors:
            env = np.einsum("ab,aic,bid->cd", env, t, t.conj(), optimize=True)
        return float(np.sqrt(abs(env[0, 0].real)))

    def normalized(self) -> "MPS":
        nrm = self.norm()
        if nrm == 0:
            raise MpsError("zero-norm MPS")
        out = self.copy()
        out.tensors[-1] = out.tensors[-1] / nrm
        return out

    def amplitude(self, bits) -> complex:
        """<s|MPS> by a single left-to-right contraction pass."""
        bits = [int(b) for b in bits]
        if len(bits) != self.n:
            raise MpsError(f"bitstring length {len(bits)} != n={self.n}")
        v = np.ones(1, dtype=np.complex128)
        for b, t in zip(bits, self.tensors):
            v = v @ t[:, b, :]
        return complex(v[0])

    def to_dense(self) -> DenseState:
        if self.n > MAX_DENSE_QUBITS:
            raise MpsError(f"to_dense limited to n <= {MAX_DENSE_QUBITS}")
        acc = self.tensors[0][0]  # (2, D)
        for t in self.tensors[1:]:
            acc = np.tensordot(acc, t, axes=(acc.ndim - 1, 0))
        amps = acc.reshape(-1)
        return DenseState.from_unnormalized(self.n, amps)

    # -- canonical form ------------------------------------------------------

    def left_canonicalize(self) -> "MPS":
        """Left-to-right QR sweep; output is left-canonical and unit norm."""
        tensors = [t.copy() for t in self.tensors]
        for k in range(self.n - 1):
            dl, _, dr = tensors[k].shape
            q, r = np.linalg.qr(tensors[k].reshape(dl * 2, dr))
            tensors[k] = q.reshape(dl, 2, q.shape[1])
            tensors[k + 1] = np.tensordot(r, tensors[k + 1], axes=(1, 0))
        last = tensors[-1]
        nrm = np.linalg.norm(last)
        if nrm == 0:
            raise MpsError("zero-norm MPS")
        tensors[-1] = last / nrm
        return MPS(tensors)

    def is_left_canonical(self, tol=1e-10) -> bool:
        for t in self.tensors:
            m = t.reshape(-1, t.shape[2])
            if np.abs(m.conj().T @ m - np.eye(t.shape[2])).max() > tol:
                return False
        return True

    # -- sampling -------------------------------------------------------------

    def sample(self, k: int, seed: int) -> list:
        """k i.i.d. bitstrings from |a_s|^2 via sequential conditional sampling."""
        mps = self.left_canonicalize()
        n = mps.n
        # right environments: renv[i] = contraction of sites i..n-1
        renv = [None] * (n + 1)
        renv[n] = np.ones((1, 1), dtype=np.complex128)
        for i in range(n - 1, -1, -1):
            t = mps.tensors[i]
            renv[i] = np.einsum("aib,cid,bd->ac", t, t.conj(), renv[i + 1], optimize=True)
        rng = np.random.default_rng(seed)
        left = np.ones((k, 1), dtype=np.complex128)
        bits = np.empty((k, n), dtype=np.int8)
        for i in range(n):
            t = mps.tensors[i]
            v0 = left @ t[:, 0, :]
            v1 = left @ t[:, 1, :]
            r = renv[i + 1]
            p0 = np.einsum("ka,ab,kb->k", v0, r, v0.conj(), optimize=True).real
            p1 = np.einsum("ka,ab,kb->k", v1, r, v1.conj(), optimize=True).real
            tot = p0 + p1
            pick1 = rng.random(k) >= p0 / tot
            bits[:, i] = pick1
            chosen = np.where(pick1[:, None], v1, v0)
            pchosen = np.where(pick1, p1, p0)
            left = chosen / np.sqrt(pchosen / tot)[:, None]
        return ["".join(map(str, row)) for row in bits]

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> str:
        sites = []
        for t in self.tensors:
            sites.append(
                {
                    "shape": list(t.shape),
                    "re": t.real.ravel().tolist(),
                    "im": t.imag.ravel().tolist(),
                }
            )
        return json.dumps({"n": self.n, "sites": sites})

    @classmethod
    def from_json(cls, text: str) -> "MPS":
        data = json.loads(text)
        tensors = []
        for site in data["sites"]:
            arr = np.asarray(site["re"], dtype=float) + 1j * np.asarray(
                site["im"], dtype=float
            )
            tensors.append(arr.reshape(site["shape"]))
        return cls(tensors)

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path) -> "MPS":
        with open(path) as f:
            return cls.from_json(f.read())


def canonical_truncate(mps: MPS, chi_max: int) -> tuple:
    """Truncate every bond to chi_max in canonical gauge.

    Returns (truncated unit-norm MPS, truncation error), where the error is
    the square root of the total discarded squared singular-value weight of
    the unit-norm input.
    """
    if chi_max < 1:
        raise MpsError(f"chi_max must be >= 1, got {chi_max}")
    work = mps.left_canonicalize()
    tensors = work.tensors
    discarded = 0.0
    # right-to-left truncation sweep
    for i in range(work.n - 1, 0, -1):
        dl, _, dr = tensors[i].shape
        m = tensors[i].reshape(dl, 2 * dr)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = s > SVD_CUTOFF * s[0] if s[0] > 0 else s > 0
        k = min(max(1, int(keep.sum())), chi_max)
        discarded += float((s[k:] ** 2).sum())
        tensors[i] = vh[:k].reshape(k, 2, dr)
        carry = u[:, :k] * s[:k]
        tensors[i - 1] = np.tensordot(tensors[i - 1], carry, axes=(2, 0))
    out = MPS(tensors).normalized()
    return out, float(np.sqrt(discarded))


def fidelity(mps: MPS, psi: DenseState) -> float:
    """|<psi|MPS>|^2 for a unit-norm MPS and dense state."""
    if mps.n > MAX_DENSE_QUBITS:
        raise MpsError(f"fidelity via dense bridge limited to n <= {MAX_DENSE_QUBITS}")
    a = mps.to_dense().amplitudes
    return float(abs(np.vdot(psi.amplitudes, a)) ** 2)


def overlap_mps(a: MPS, b: MPS) -> complex:
    """<a|b> for two MPS of equal length."""
    if a.n != b.n:
        raise MpsError("length mismatch")
    env = np.ones((1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.einsum("ab,aic,bid->cd", env, ta.conj(), tb, optimize=True)
    return complex(env[0, 0])
