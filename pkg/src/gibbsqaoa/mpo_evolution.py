"""Long-range Ising Hamiltonian as MPO blocks, first/second-kind imaginary-time
step MPOs, and the normalized evolution driver.

Coupling placement convention: the coupling coefficient J_ij is absorbed into
the opening operator of the channel (the C block at site i); the closing
operator (B block at site j) is a bare sigma_z.  Channels are created only
for pairs with J_ij != 0.

Step MPOs approximate e^{-delta_tau * H}; the minus sign is absorbed by
negating the on-site and opening blocks before applying the Taylor-expansion
tensor formulas.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .analytics import DenseState, diagonal_entropy, expected_energy
from .mps import MPS, canonical_truncate
from .problems import IsingHamiltonian, energy_of

SZ = np.diag([1.0, -1.0]).astype(np.complex128)
ID2 = np.eye(2, dtype=np.complex128)
Z2 = np.zeros((2, 2), dtype=np.complex128)


class EvolutionError(ValueError):
    pass


@dataclass
class HamiltonianBlocks:
    """Per-site A/B/C/D operator blocks of the long-range Ising MPO.

    channels[i] lists the coupling pairs (a, b), a <= i < b, that are open on
    the bond between sites i and i+1; N_i = len(channels[i]).
    """

    n: int
    d_ops: list  # site i -> (2,2) on-site operator h_i * sigma_z
    c_ops: list  # site i -> (N_i, 2, 2) channel-opening row
    b_ops: list  # site i -> (N_{i-1}, 2, 2) channel-closing column
    a_ops: list  # site i -> (N_{i-1}, N_i, 2, 2) pass-through block
    channels: list  # bond i -> tuple of pairs


def build_blocks(h: IsingHamiltonian) -> HamiltonianBlocks:
    n = h.n
    channels = []
    for i in range(n - 1):
        active = tuple(
            sorted((a, b) for (a, b) in h.J.keys() if a <= i < b)
        )
        channels.append(active)
    channels.append(())  # right boundary bond

    d_ops, c_ops, b_ops, a_ops = [], [], [], []
    for i in range(n):
        left = channels[i - 1] if i > 0 else ()
        right = channels[i] if i < n else ()
        d_ops.append(h.h[i] * SZ)
        c = np.zeros((len(right), 2, 2), dtype=np.complex128)
        for k, (a, b) in enumerate(right):
            if a == i:
                c[k] = h.J[(a, b)] * SZ
        c_ops.append(c)
        bcol = np.zeros((len(left), 2, 2), dtype=np.complex128)
        for j, (a, b) in enumerate(left):
            if b == i:
                bcol[j] = SZ
        b_ops.append(bcol)
        amat = np.zeros((len(left), len(right), 2, 2), dtype=np.complex128)
        for j, pl in enumerate(left):
            for k, pr in enumerate(right):
                if pl == pr:
                    amat[j, k] = ID2
        a_ops.append(amat)
    return HamiltonianBlocks(
        n=n, d_ops=d_ops, c_ops=c_ops, b_ops=b_ops, a_ops=a_ops, channels=channels
    )


def assemble_hamiltonian_mpo(blocks: HamiltonianBlocks) -> list:
    """Site tensors (wl, 2, 2, wr) of the Hamiltonian MPO itself.

    Bond basis ordering: [accumulated-H slot, channels..., identity slot];
    left boundary selects the first row, right boundary the last column.
    """
    tensors = []
    n = blocks.n
    for i in range(n):
        nl = len(blocks.channels[i - 1]) if i > 0 else 0
        nr = len(blocks.channels[i])
        wl, wr = nl + 2, nr + 2
        w = np.zeros((wl, wr, 2, 2), dtype=np.complex128)
        w[0, 0] = ID2
        w[0, 1 : 1 + nr] = blocks.c_ops[i]
        w[0, wr - 1] = blocks.d_ops[i]
        w[1 : 1 + nl, 1 : 1 + nr] = blocks.a_ops[i]
        w[1 : 1 + nl, wr - 1] = blocks.b_ops[i][:, :]
        w[wl - 1, wr - 1] = ID2
        if i == 0:
            w = w[:1]
        if i == n - 1:
            w = w[:, -1:]
        tensors.append(np.transpose(w, (0, 2, 3, 1)))  # (wl, out, in, wr)
    return tensors


@dataclass
class StepMPO:
    """MPO approximation of e^{-delta_tau * H} (order I or II)."""

    tensors: list  # (wl, out, in, wr) per site
    order: str
    delta_tau: float
    n: int = field(init=False)

    def __post_init__(self):
        self.n = len(self.tensors)


def build_wI(blocks: HamiltonianBlocks, delta_tau: float) -> StepMPO:
    """First-kind step tensor: [[1 + dt*D, sqrt(dt)*C], [sqrt(dt)*B, A]]
    with the sign of H absorbed into D and C."""
    if delta_tau < 0:
        raise EvolutionError("delta_tau must be >= 0")
    rt = np.sqrt(delta_tau)
    tensors = []
    n = blocks.n
    for i in range(n):
        nl = len(blocks.channels[i - 1]) if i > 0 else 0
        nr = len(blocks.channels[i])
        w = np.zeros((nl + 1, nr + 1, 2, 2), dtype=np.complex128)
        w[0, 0] = ID2 + delta_tau * (-blocks.d_ops[i])
        w[0, 1:] = rt * (-blocks.c_ops[i])
        w[1:, 0] = rt * blocks.b_ops[i]
        w[1:, 1:] = blocks.a_ops[i]
        if i == 0:
            w = w[:1]
        if i == n - 1:
            w = w[:, :1]
        tensors.append(np.transpose(w, (0, 2, 3, 1)))
    return StepMPO(tensors=tensors, order="I", delta_tau=delta_tau)


def _wII_site(d, c_row, b_col, a_mat, delta_tau):
    """Second-kind tensor for one site via 8x8 block-operator exponentials."""
    nl, nr = b_col.shape[0], c_row.shape[0]
    rt = np.sqrt(delta_tau)
    dt_d = delta_tau * d

    def block_exp(c_op, b_op, a_op):
        m = np.zeros((8, 8), dtype=np.complex128)
        for blk in range(4):
            m[2 * blk : 2 * blk + 2, 2 * blk : 2 * blk + 2] = dt_d
        m[2:4, 0:2] = rt * c_op
        m[4:6, 0:2] = rt * b_op
        m[6:8, 0:2] = a_op
        m[6:8, 2:4] = rt * b_op
        m[6:8, 4:6] = rt * c_op
        e = expm(m)
        return (
            e[0:2, 0:2],  # D row
            e[2:4, 0:2],  # C row
            e[4:6, 0:2],  # B row
            e[6:8, 0:2],  # A row
        )

    w = np.zeros((nl + 1, nr + 1, 2, 2), dtype=np.complex128)
    wd, _, _, _ = block_exp(Z2, Z2, Z2)
    w[0, 0] = wd
    for k in range(nr):
        _, wc, _, _ = block_exp(c_row[k], Z2, Z2)
        w[0, 1 + k] = wc
    for j in range(nl):
        _, _, wb, _ = block_exp(Z2, b_col[j], Z2)
        w[1 + j, 0] = wb
    for j in range(nl):
        for k in range(nr):
            _, _, _, wa = block_exp(c_row[k], b_col[j], a_mat[j, k])
            w[1 + j, 1 + k] = wa
    return w


def build_wII(blocks: HamiltonianBlocks, delta_tau: float) -> StepMPO:
    """Second-kind step tensor (overlaps of at most one site), sign of H
    absorbed into the D and C blocks."""
    if delta_tau < 0:
        raise EvolutionError("delta_tau must be >= 0")
    tensors = []
    n = blocks.n
    for i in range(n):
        w = _wII_site(
            -blocks.d_ops[i],
            -blocks.c_ops[i],
            blocks.b_ops[i],
            blocks.a_ops[i],
            delta_tau,
        )
        if i == 0:
            w = w[:1]
        if i == n - 1:
            w = w[:, :1]
        tensors.append(np.transpose(w, (0, 2, 3, 1)))
    return StepMPO(tensors=tensors, order="II", delta_tau=delta_tau)


def build_step(h: IsingHamiltonian, delta_tau: float, order: str) -> StepMPO:
    blocks = build_blocks(h)
    if order.upper() == "I":
        return build_wI(blocks, delta_tau)
    if order.upper() == "II":
        return build_wII(blocks, delta_tau)
    raise EvolutionError(f"unknown MPO order {order!r}")


def mpo_to_dense(tensors) -> np.ndarray:
    """Contract an MPO to its full 2^n x 2^n matrix (test oracle bridge)."""
    n = len(tensors)
    if n > 10:
        raise EvolutionError("dense MPO contraction limited to n <= 10")
    acc = tensors[0][0]  # (out, in, wr)
    for t in tensors[1:]:
        acc = np.tensordot(acc, t, axes=(acc.ndim - 1, 0))
    # axes: out0, in0, out1, in1, ..., wr(=1)
    acc = acc.reshape(acc.shape[:-1])
    outs = list(range(0, 2 * n, 2))
    ins = list(range(1, 2 * n, 2))
    acc = np.transpose(acc, outs + ins)
    return acc.reshape(2**n, 2**n)


def exact_step_dense(h: IsingHamiltonian, delta_tau: float) -> np.ndarray:
    """Exact e^{-delta_tau H}: cheap because H is diagonal.

    The constant energy offset is excluded so the result matches the step
    MPO, which also omits it; the constant is a pure rescaling that every
    normalized evolution step removes anyway.
    """
    return np.diag(np.exp(-delta_tau * (h.energies() - h.offset)))


def apply_mpo(mps: MPS, step: StepMPO) -> MPS:
    """Exact MPO application; bond dimensions multiply."""
    if step.n != mps.n:
        raise EvolutionError("site count mismatch")
    tensors = []
    for w, m in zip(step.tensors, mps.tensors):
        t = np.einsum("wpqx,aqb->wapxb", w, m, optimize=True)
        wl, dl, _, wr, dr = t.shape
        tensors.append(t.reshape(wl * dl, 2, wr * dr))
    return MPS(tensors)


def evolve_step(mps: MPS, step: StepMPO, chi_max: int) -> tuple:
    """One phi_dtau map: apply the step MPO, canonically truncate, normalize."""
    applied = apply_mpo(mps, step)
    return canonical_truncate(applied, chi_max)


@dataclass
class EvolutionTrace:
    """Per-step observables of an imaginary-time evolution run."""

    taus: list
    energies: list
    entropies_bits: list
    trunc_errors: list  # per recorded step
    final_mps: MPS
    t_total: float
    m: int
    delta_tau: float
    order: str

    @property
    def cumulative_trunc_error(self) -> float:
        return float(sum(self.trunc_errors))

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "tau", "energy", "entropy_bits", "trunc_err"])
            for k, (tau, e, s, err) in enumerate(
                zip(self.taus, self.energies, self.entropies_bits, self.trunc_errors)
            ):
                w.writerow([k, repr(tau), repr(e), repr(s), repr(err)])


def _observables(mps: MPS, h: IsingHamiltonian, sample_size=4096, seed=0):
    if mps.n <= 16:
        psi = mps.to_dense()
        return expected_energy(psi, h), diagonal_entropy(psi)
    # sampled estimates for large systems
    samples = mps.sample(sample_size, seed)
    energies = np.array([energy_of(h, s) for s in samples])
    counts = {}
    for s in samples:
        counts[s] = counts.get(s, 0) + 1
    p = np.array(list(counts.values()), dtype=float) / sample_size
    ent = float(-(p * np.log2(p)).sum())
    return float(energies.mean()), ent


def imaginary_time_evolve(
    h: IsingHamiltonian,
    t_total: float,
    delta_tau: float,
    chi_max: int,
    order: str = "II",
    trace_stride: int = 1,
    checkpoint_dir=None,
    checkpoint_interval=None,
) -> EvolutionTrace:
    """Evolve |+>^n by m = round(t_total/delta_tau) normalized steps of
    e^{-delta_tau H}; records (tau, energy, entropy, truncation error)."""
    if delta_tau <= 0:
        raise EvolutionError(f"delta_tau must be positive, got {delta_tau}")
    if chi_max < 1:
        raise EvolutionError(f"chi_max must be >= 1, got {chi_max}")
    if t_total < 0:
        raise EvolutionError("t_total must be >= 0")
    m = int(round(t_total / delta_tau))
    step = build_step(h, delta_tau, order)
    mps = MPS.plus_state(h.n)

    taus, energies, entropies, errs = [], [], [], []
    e0, s0 = _observables(mps, h)
    taus.append(0.0)
    energies.append(e0)
    entropies.append(s0)
    errs.append(0.0)

    pending_err = 0.0
    for k in range(1, m + 1):
        mps, err = evolve_step(mps, step, chi_max)
        pending_err += err
        if k % trace_stride == 0 or k == m:
            e, s = _observables(mps, h, seed=k)
            taus.append(k * delta_tau)
            energies.append(e)
            entropies.append(s)
            errs.append(pending_err)
            pending_err = 0.0
        if (
            checkpoint_dir is not None
            and checkpoint_interval
            and k % checkpoint_interval == 0
        ):
            mps.save(f"{checkpoint_dir}/mps_step{k:06d}.json")

    return EvolutionTrace(
        taus=taus,
        energies=energies,
        entropies_bits=entropies,
        trunc_errors=errs,
        final_mps=mps,
        t_total=m * delta_tau,
        m=m,
        delta_tau=delta_tau,
        order=order.upper(),
    )
