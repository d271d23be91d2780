"""Statevector QAOA with arbitrary initial states.

Layer unitary per block k: e^{-i gamma_k H_C} then e^{-i xi_k H_M} with the
mixer H_M = -sum_i sigma_x^i, so the mixer factorizes into single-qubit
rotations e^{+i xi sigma_x}.  The constant offset of the cost Hamiltonian is
excluded from the phase (pure energy shift) but included in reported energies.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .analytics import DenseState, dephase
from .optimizers import OPTIMIZERS, MinimizeResult
from .problems import IsingHamiltonian


class QaoaError(ValueError):
    pass


@dataclass
class QaoaParams:
    gamma: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        self.xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if self.gamma.shape != self.xi.shape:
            raise QaoaError("gamma and xi must have equal length")
        if not (np.isfinite(self.gamma).all() and np.isfinite(self.xi).all()):
            raise QaoaError("angles must be finite")

    @property
    def p(self) -> int:
        return self.gamma.size

    @classmethod
    def from_flat(cls, vec) -> "QaoaParams":
        vec = np.asarray(vec, dtype=float)
        p = vec.size // 2
        return cls(gamma=vec[:p], xi=vec[p:])

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.xi])


def apply_cost_layer(psi: DenseState, h: IsingHamiltonian, gamma: float) -> DenseState:
    """Diagonal phase a_s <- e^{-i gamma (E_s - offset)} a_s."""
    phases = np.exp(-1j * gamma * (h.energies() - h.offset))
    return DenseState(n=psi.n, amplitudes=phases * psi.amplitudes)


def apply_mixer_layer(psi: DenseState, xi: float) -> DenseState:
    """Product of e^{+i xi sigma_x} on every qubit (sign from H_M = -sum sigma_x)."""
    c, s = np.cos(xi), 1j * np.sin(xi)
    rot = np.array([[c, s], [s, c]], dtype=np.complex128)
    a = psi.amplitudes.reshape((2,) * psi.n)
    for q in range(psi.n):
        a = np.moveaxis(np.tensordot(rot, a, axes=(1, q)), 0, q)
    return DenseState(n=psi.n, amplitudes=a.reshape(-1))


def run(psi0: DenseState, h: IsingHamiltonian, params: QaoaParams) -> DenseState:
    if 2**h.n != psi0.amplitudes.size:
        raise QaoaError("dimension mismatch between state and Hamiltonian")
    psi = psi0
    for gamma, xi in zip(params.gamma, params.xi):
        psi = apply_cost_layer(psi, h, gamma)
        psi = apply_mixer_layer(psi, xi)
    return psi


def expectation(psi: DenseState, h: IsingHamiltonian) -> float:
    """<psi|H|psi> = sum_s p_s E_s (diagonal Hamiltonian, offset included)."""
    return float(dephase(psi) @ h.energies())


@dataclass
class OptimizationRun:
    best_params: QaoaParams
    best_energy: float
    trace: list  # (evaluation index, energy) in evaluation order
    optimizer: str
    seed: int
    initial_state: str
    evaluations: int

    @property
    def best_so_far(self):
        best = np.inf
        out = []
        for i, e in self.trace:
            best = min(best, e)
            out.append((i, best))
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "optimizer": self.optimizer,
                "seed": self.seed,
                "initial_state": self.initial_state,
                "p": self.best_params.p,
                "best_gamma": self.best_params.gamma.tolist(),
                "best_xi": self.best_params.xi.tolist(),
                "best_energy": self.best_energy,
                "evaluations": self.evaluations,
                "trace": [[int(i), float(e)] for i, e in self.trace],
            },
            indent=2,
        )


def optimize(
    psi0: DenseState,
    h: IsingHamiltonian,
    p: int,
    optimizer: str = "cmaes",
    seed: int = 0,
    budget: int = 300,
    init_scale: float = 0.01,
    initial_state_label: str = "custom",
) -> OptimizationRun:
    """Derivative-free minimization of expectation(run(psi0, ., params)).

    Initial angles are uniform in [-init_scale, +init_scale]; the budget is a
    hard cap on objective evaluations and exhausting it returns best-so-far.
    """
    if budget < 1:
        raise QaoaError("budget must be >= 1")
    if optimizer not in OPTIMIZERS:
        raise QaoaError(f"unknown optimizer {optimizer!r}; choose from {sorted(OPTIMIZERS)}")
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-init_scale, init_scale, size=2 * p)

    def objective(x):
        return expectation(run(psi0, h, QaoaParams.from_flat(x)), h)

    result: MinimizeResult = OPTIMIZERS[optimizer](objective, x0, budget, seed=seed)
    return OptimizationRun(
        best_params=QaoaParams.from_flat(result.x),
        best_energy=result.fun,
        trace=result.trace,
        optimizer=optimizer,
        seed=seed,
        initial_state=initial_state_label,
        evaluations=result.evaluations,
    )


def landscape_scan(
    psi0: DenseState,
    h: IsingHamiltonian,
    resolution: int = 64,
    gamma_max: float = 2 * np.pi,
    xi_max: float = np.pi,
) -> np.ndarray:
    """p=1 energy landscape on an equispaced (gamma, xi) grid; entry [i, j]
    is the energy at (gamma_i, xi_j)."""
    gammas = np.linspace(0, gamma_max, resolution, endpoint=False)
    xis = np.linspace(0, xi_max, resolution, endpoint=False)
    out = np.empty((resolution, resolution))
    for i, g in enumerate(gammas):
        psi_g = apply_cost_layer(psi0, h, g)
        for j, x in enumerate(xis):
            out[i, j] = expectation(apply_mixer_layer(psi_g, x), h)
    return out


def write_landscape_csv(path, grid: np.ndarray):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        for row in grid:
            w.writerow([repr(float(v)) for v in row])
