"""MPS to staircase-circuit translation and two-qubit KAK decomposition.

A staircase layer is a list of n-1 two-qubit gates in application order
(n-2, n-1), (n-3, n-2), ..., (0, 1).  Applied to |0...0> this pattern
generates exactly the states whose every bipartite cut has Schmidt rank <= 2,
so a chi=2 MPS is reproduced exactly by one layer.  Circuits store layers in
application order: circuit state = layers[-1] o ... o layers[0] |0...0>.

Environments for the variational gate updates are computed by dense
contraction, which is adequate at the scale this package targets (n <= 16).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .analytics import DenseState
from .mps import MPS, canonical_truncate

UNITARY_TOL = 1e-10


class SynthesisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dense gate application helpers

def _apply_gate(state: np.ndarray, gate: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 4x4 gate on qubits (q, q+1) to a dense (2,)*n tensor."""
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, state, axes=([2, 3], [q, q + 1]))
    return np.moveaxis(out, [0, 1], [q, q + 1])


def apply_layer(amps: np.ndarray, layer, n: int, inverse=False) -> np.ndarray:
    state = amps.reshape((2,) * n)
    gates = list(enumerate(layer))
    if inverse:
        gates = reversed(gates)
    for j, g in gates:
        q = n - 2 - j
        state = _apply_gate(state, g.conj().T if inverse else g, q, n)
    return state.reshape(-1)


@dataclass
class StaircaseCircuit:
    """k layers of two-qubit gates in staircase order."""

    n: int
    layers: list  # application order; each layer is a list of n-1 4x4 gates
    achieved_fidelity: float = None
    target_reached: bool = True

    @property
    def k(self) -> int:
        return len(self.layers)

    def validate(self, tol=UNITARY_TOL):
        for layer in self.layers:
            if len(layer) != self.n - 1:
                raise SynthesisError("layer must hold n-1 gates")
            for g in layer:
                if np.abs(g.conj().T @ g - np.eye(4)).max() > tol:
                    raise SynthesisError("non-unitary gate in circuit")

    def state(self) -> DenseState:
        if self.n > 16:
            raise SynthesisError("dense circuit evaluation limited to n <= 16")
        amps = np.zeros(2**self.n, dtype=np.complex128)
        amps[0] = 1.0
        for layer in self.layers:
            amps = apply_layer(amps, layer, self.n)
        return DenseState.from_unnormalized(self.n, amps)

    def to_json(self, include_kak=False) -> str:
        data = {"n": self.n, "k": self.k, "achieved_fidelity": self.achieved_fidelity,
                "target_reached": self.target_reached, "layers": []}
        for layer in self.layers:
            gates = []
            for j, g in enumerate(layer):
                entry = {
                    "qubits": [self.n - 2 - j, self.n - 1 - j],
                    "re": g.real.ravel().tolist(),
                    "im": g.imag.ravel().tolist(),
                }
                if include_kak:
                    kak = kak_decompose(g)
                    entry["kak"] = kak.to_dict()
                gates.append(entry)
            data["layers"].append(gates)
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str) -> "StaircaseCircuit":
        data = json.loads(text)
        layers = []
        for layer in data["layers"]:
            gates = []
            for entry in layer:
                g = (
                    np.asarray(entry["re"], dtype=float)
                    + 1j * np.asarray(entry["im"], dtype=float)
                ).reshape(4, 4)
                gates.append(g)
            layers.append(gates)
        return cls(
            n=data["n"],
            layers=layers,
            achieved_fidelity=data.get("achieved_fidelity"),
            target_reached=data.get("target_reached", True),
        )


def circuit_to_state(circuit: StaircaseCircuit) -> DenseState:
    return circuit.state()


# ---------------------------------------------------------------------------
# analytic layer extraction

def _complete_unitary(columns: np.ndarray, positions) -> np.ndarray:
    """4x4 unitary whose given columns are fixed; the rest are completed
    orthonormally against the canonical basis."""
    dim = 4
    g = np.zeros((dim, dim), dtype=np.complex128)
    have = list(positions)
    basis = [columns[:, k] for k in range(columns.shape[1])]
    for v, pos in zip(basis, have):
        g[:, pos] = v
    free = [p for p in range(dim) if p not in have]
    vecs = [g[:, p] for p in have]
    for p in free:
        for cand_idx in range(dim):
            v = np.zeros(dim, dtype=np.complex128)
            v[cand_idx] = 1.0
            for u in vecs:
                v = v - u * np.vdot(u, v)
            nrm = np.linalg.norm(v)
            if nrm > 1e-6:
                v /= nrm
                break
        else:
            raise SynthesisError("failed to complete unitary")
        g[:, p] = v
        vecs.append(v)
    return g


def analytic_layer(mps: MPS) -> tuple:
    """Extract one staircase layer that exactly prepares the chi<=2
    truncation of the input; returns (layer, residual MPS) where the residual
    is the layer inverse applied to the full input."""
    n = mps.n
    if n < 2:
        raise SynthesisError("need at least two qubits")
    truncated, _ = canonical_truncate(mps, 2)
    psi2 = truncated.to_dense().amplitudes

    gates_fwd = []  # index k acts on (k, k+1)
    work = psi2.reshape((2,) * n)
    for k in range(n - 1):
        remaining = n - k
        if remaining > 2:
            m = work.reshape(4, -1)
            u, s, _ = np.linalg.svd(m, full_matrices=False)
            # Schmidt rank across (first two qubits | rest) is <= 2 by construction
            cols = u[:, :2]
            g = _complete_unitary(cols, positions=(0, 1))
            gates_fwd.append(g)
            out = np.tensordot(g.conj().T, m, axes=(1, 0))
            # qubit k is now |0>; drop it (basis index 2 q_k + q_{k+1})
            work = out[:2].reshape((2,) * (remaining - 1))
            work = work / np.linalg.norm(work)
        else:
            vec = work.reshape(4)
            vec = vec / np.linalg.norm(vec)
            g = _complete_unitary(vec[:, None], positions=(0,))
            gates_fwd.append(g)
    layer = list(reversed(gates_fwd))  # application order (n-2, n-1) .. (0, 1)

    residual_amps = apply_layer(mps.to_dense().amplitudes, layer, n, inverse=True)
    residual = MPS.from_dense(DenseState.from_unnormalized(n, residual_amps))
    return layer, residual


# ---------------------------------------------------------------------------
# variational refinement

def _circuit_fidelity(circuit: StaircaseCircuit, target: np.ndarray) -> float:
    return float(abs(np.vdot(target, circuit.state().amplitudes)) ** 2)


def variational_refine(
    circuit: StaircaseCircuit, target: MPS, sweeps: int
) -> StaircaseCircuit:
    """Sweep gate-by-gate updates maximizing |<target|circuit|0>| via the SVD
    polar of each gate's environment; fidelity is non-decreasing per update."""
    n = circuit.n
    t = target.to_dense().amplitudes
    layers = [[g.copy() for g in layer] for layer in circuit.layers]
    flat = [(li, gi) for li in range(len(layers)) for gi in range(n - 1)]

    for _ in range(sweeps):
        for li, gi in flat:
            q = n - 2 - gi
            # pre: gates strictly before this one applied to |0>
            pre = np.zeros(2**n, dtype=np.complex128)
            pre[0] = 1.0
            for lj in range(li):
                pre = apply_layer(pre, layers[lj], n)
            state = pre.reshape((2,) * n)
            for gj in range(gi):
                state = _apply_gate(state, layers[li][gj], n - 2 - gj, n)
            pre = state.reshape(-1)
            # post: inverse of the gates after this one applied to the target
            post = t.reshape((2,) * n)
            for lj in range(len(layers) - 1, li, -1):
                post = apply_layer(post.reshape(-1), layers[lj], n, inverse=True).reshape((2,) * n)
            for gj in range(n - 2, gi, -1):
                g = layers[li][gj]
                post = _apply_gate(post, g.conj().T, n - 2 - gj, n)
            # environment on the gate slot: overlap = Tr(G M)
            a = np.moveaxis(pre.reshape((2,) * n), [q, q + 1], [0, 1]).reshape(4, -1)
            b = np.moveaxis(post, [q, q + 1], [0, 1]).reshape(4, -1)
            m = a @ b.conj().T  # M[p, q'] = sum_r a[p, r] conj(b[q', r])
            u, _, vh = np.linalg.svd(m)
            layers[li][gi] = (u @ vh).conj().T
    out = StaircaseCircuit(n=n, layers=layers)
    out.achieved_fidelity = _circuit_fidelity(out, t)
    return out


def _identity_layer(n: int) -> list:
    return [np.eye(4, dtype=np.complex128) for _ in range(n - 1)]


def synthesize(
    mps: MPS,
    k_max: int,
    fidelity_target: float = 0.99,
    refine_sweeps: int = 30,
) -> StaircaseCircuit:
    """Iterate analytic layer extraction and variational refinement until the
    fidelity target is met or k_max layers are used; reports the achieved
    fidelity and flags a missed target."""
    if k_max < 1:
        raise SynthesisError("k_max must be >= 1")
    n = mps.n
    target = mps.left_canonicalize()
    t_dense = target.to_dense().amplitudes

    best = None
    layers: list = []  # application order; new layers inserted in front
    for _ in range(k_max):
        if layers:
            residual_amps = t_dense
            for layer in reversed(layers):
                residual_amps = apply_layer(residual_amps, layer, n, inverse=True)
            residual = MPS.from_dense(DenseState.from_unnormalized(n, residual_amps))
        else:
            residual = target
        new_layer, _ = analytic_layer(residual)

        candidates = [layers + [new_layer]]
        if best is not None:
            candidates.append(layers + [_identity_layer(n)])
        scored = []
        for cand in candidates:
            circ = variational_refine(
                StaircaseCircuit(n=n, layers=cand), target, refine_sweeps
            )
            scored.append(circ)
        circ = max(scored, key=lambda c: c.achieved_fidelity)
        if best is None or circ.achieved_fidelity >= best.achieved_fidelity:
            best = circ
        layers = [[g.copy() for g in layer] for layer in best.layers]
        if best.achieved_fidelity >= fidelity_target:
            break

    best.target_reached = best.achieved_fidelity >= fidelity_target
    return best


# ---------------------------------------------------------------------------
# KAK decomposition

_MAGIC = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=np.complex128,
) / np.sqrt(2)

_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_SZ = np.diag([1.0, -1.0]).astype(np.complex128)
_PAULIS = (_SX, _SY, _SZ)

# diagonals of sigma_k (x) sigma_k in the magic basis; all real
_MAGIC_DIAGS = np.array(
    [np.real(np.diag(_MAGIC.conj().T @ np.kron(p, p) @ _MAGIC)) for p in _PAULIS]
)
# theta = A @ (cx, cy, cz, phi)
_THETA_MAP = np.vstack([_MAGIC_DIAGS, np.ones(4)]).T
_THETA_MAP_INV = np.linalg.inv(_THETA_MAP)


@dataclass
class KakDecomposition:
    """u = (after_a (x) after_b) exp(i sum_k c_k sigma_k (x) sigma_k)
    (before_a (x) before_b), up to global phase; coefficients normalized to
    the Weyl chamber pi/4 >= c_x >= c_y >= |c_z|."""

    before_a: np.ndarray
    before_b: np.ndarray
    coefficients: np.ndarray  # (c_x, c_y, c_z)
    after_a: np.ndarray
    after_b: np.ndarray

    def interaction_unitary(self) -> np.ndarray:
        gen = sum(
            c * np.kron(p, p) for c, p in zip(self.coefficients, _PAULIS)
        )
        w, v = np.linalg.eigh(gen)
        return (v * np.exp(1j * w)) @ v.conj().T

    def reconstruct(self) -> np.ndarray:
        return (
            np.kron(self.after_a, self.after_b)
            @ self.interaction_unitary()
            @ np.kron(self.before_a, self.before_b)
        )

    def to_dict(self) -> dict:
        def mat(m):
            return {"re": m.real.ravel().tolist(), "im": m.imag.ravel().tolist()}

        return {
            "before_a": mat(self.before_a),
            "before_b": mat(self.before_b),
            "coefficients": self.coefficients.tolist(),
            "after_a": mat(self.after_a),
            "after_b": mat(self.after_b),
        }


def _joint_diagonalize_symmetric(x: np.ndarray, y: np.ndarray, group_tol: float):
    """Real orthogonal P diagonalizing two commuting real symmetric matrices."""
    w, p = np.linalg.eigh(x)
    i = 0
    dim = x.shape[0]
    while i < dim:
        j = i + 1
        while j < dim and abs(w[j] - w[i]) < group_tol:
            j += 1
        if j - i > 1:
            sub = p[:, i:j]
            _, r = np.linalg.eigh(sub.T @ y @ sub)
            p[:, i:j] = sub @ r
        i = j
    return p


def _nearest_kron_factors(m: np.ndarray):
    """Split a 4x4 tensor-product unitary into its 2x2 unitary factors."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    a = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    # fix scale/phase so each factor is unitary (joint phase stays global)
    da = np.linalg.det(a)
    a = a / np.sqrt(da) if abs(da) > 1e-12 else a
    db = np.linalg.det(b)
    b = b / np.sqrt(db) if abs(db) > 1e-12 else b
    return a, b


_AXIS_SWAPS = {
    # u conjugation swapping Pauli axes: u sigma_j u^dag = sigma_k
    (0, 1): (_SX + _SY) / np.sqrt(2),
    (0, 2): (_SX + _SZ) / np.sqrt(2),  # Hadamard
    (1, 2): (_SY + _SZ) / np.sqrt(2),
}


_EVEN_SIGNS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))
_PERMS = tuple(itertools.permutations(range(3)))


def in_weyl_chamber(c, tol=1e-9) -> bool:
    return (
        c[0] <= np.pi / 4 + tol and c[0] >= c[1] - tol and c[1] >= abs(c[2]) - tol
    )


def _canonicalize(c, k1a, k1b, k2a, k2b):
    """Move coefficients into the Weyl chamber pi/4 >= c_x >= c_y >= |c_z|.

    The symmetry group is generated by pi/2 shifts of one coefficient,
    simultaneous negation of two, and axis permutations; every move is
    compensated exactly by Pauli/Clifford factors absorbed into the local
    gates.  The chamber representative is found by enumerating the finite
    set of candidate images and applying the matching move sequence.
    """
    c = np.array(c, dtype=float)
    half = np.pi / 2
    base_shifts = np.floor(c / half).astype(int)
    base = c - base_shifts * half  # each in [0, pi/2)

    found = None
    for extra in itertools.product((0, 1), repeat=3):
        vals = base - np.array(extra) * half
        for signs in _EVEN_SIGNS:
            v = vals * np.array(signs)
            for perm in _PERMS:
                w = v[list(perm)]
                if in_weyl_chamber(w, tol=1e-12):
                    found = (extra, signs, perm)
                    break
            if found:
                break
        if found:
            break
    if found is None:  # loosen: boundary roundoff
        for extra in itertools.product((0, 1), repeat=3):
            vals = base - np.array(extra) * half
            for signs in _EVEN_SIGNS:
                v = vals * np.array(signs)
                for perm in _PERMS:
                    if in_weyl_chamber(v[list(perm)], tol=1e-9):
                        found = (extra, signs, perm)
                        break
                if found:
                    break
            if found:
                break
    if found is None:
        raise SynthesisError("Weyl chamber normalization failed")
    extra, signs, perm = found

    def shift(k, count):
        nonlocal c, k2a, k2b
        c[k] -= count * half
        if count % 2:  # Pauli correction squares to identity
            p = _PAULIS[k]
            k2a = p @ k2a
            k2b = p @ k2b

    def negate_pair(j, k):
        nonlocal c, k1a, k2a
        p = _PAULIS[3 - j - k]
        c[j], c[k] = -c[j], -c[k]
        k1a = k1a @ p
        k2a = p @ k2a

    def swap(j, k):
        nonlocal c, k1a, k1b, k2a, k2b
        u = _AXIS_SWAPS[(min(j, k), max(j, k))]
        c[j], c[k] = c[k], c[j]
        k1a = k1a @ u.conj().T
        k1b = k1b @ u.conj().T
        k2a = u @ k2a
        k2b = u @ k2b

    for k in range(3):
        shift(k, base_shifts[k] + extra[k])
    neg = [k for k in range(3) if signs[k] < 0]
    if neg:
        negate_pair(*neg)
    # realize the permutation: slot i must receive the value at source perm[i]
    src = [0, 1, 2]
    for i in range(3):
        j = src.index(perm[i])
        if j != i:
            swap(i, j)
            src[i], src[j] = src[j], src[i]
    return c, k1a, k1b, k2a, k2b


def kak_decompose(u: np.ndarray) -> KakDecomposition:
    """Cartan (KAK) decomposition of a two-qubit unitary via magic-basis
    diagonalization; canonical coefficients land in the declared Weyl chamber."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (4, 4) or np.abs(u.conj().T @ u - np.eye(4)).max() > UNITARY_TOL:
        raise SynthesisError("input must be a 4x4 unitary (within 1e-10)")
    su = u / np.linalg.det(u) ** 0.25
    m = _MAGIC.conj().T @ su @ _MAGIC
    mmt = m @ m.T
    x, y = mmt.real.copy(), mmt.imag.copy()
    x = 0.5 * (x + x.T)
    y = 0.5 * (y + y.T)

    last_err = None
    for group_tol in (1e-7, 1e-5, 1e-9, 1e-3):
        p = _joint_diagonalize_symmetric(x, y, group_tol)
        d2 = p.T @ mmt @ p
        if np.abs(d2 - np.diag(np.diag(d2))).max() > 1e-8:
            last_err = "off-diagonal residue"
            continue
        if np.linalg.det(p) < 0:
            p = p.copy()
            p[:, 0] = -p[:, 0]
        theta = 0.5 * np.angle(np.diag(d2))
        k = (np.exp(-1j * theta)[:, None]) * (p.T @ m)
        if np.abs(k.imag).max() > 1e-8:
            last_err = "K not real"
            continue
        k = k.real
        if np.linalg.det(k) < 0:
            theta = theta.copy()
            theta[0] += np.pi
            k = k.copy()
            k[0] = -k[0]
        coeffs = _THETA_MAP_INV @ theta  # (cx, cy, cz, phi)
        k1a, k1b = _nearest_kron_factors(_MAGIC @ p @ _MAGIC.conj().T)
        k2a, k2b = _nearest_kron_factors(_MAGIC @ k @ _MAGIC.conj().T)
        c, after_a, after_b, before_a, before_b = _canonicalize(
            coeffs[:3], k1a, k1b, k2a, k2b
        )
        kak = KakDecomposition(
            before_a=before_a,
            before_b=before_b,
            coefficients=c,
            after_a=after_a,
            after_b=after_b,
        )
        rec = kak.reconstruct()
        phase = np.vdot(rec.ravel(), u.ravel())
        phase /= abs(phase)
        if np.abs(rec * phase - u).max() < 1e-9:
            return kak
        last_err = f"reconstruction error {np.abs(rec * phase - u).max():.2e}"
    raise SynthesisError(f"KAK decomposition failed: {last_err}")
