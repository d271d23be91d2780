"""Dense-state reference analytics.

Entropy convention: diagrams and reported entropies are in bits (log2);
the free energy and the Boltzmann-boundary slope identity dS/dE = t are
thermodynamic statements and use natural log internally.  Conversion factor
is ln 2: S_nats = S_bits * ln(2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .problems import IsingHamiltonian, Spectrum, brute_spectrum

NORM_TOL = 1e-12


class StateError(ValueError):
    pass


@dataclass
class DenseState:
    """Normalized amplitudes over the 2^n computational basis states."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n,):
            raise StateError(
                f"expected {2**self.n} amplitudes, got {self.amplitudes.shape}"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise StateError(f"state not normalized: |psi| = {norm}")

    @classmethod
    def from_unnormalized(cls, n, amplitudes) -> "DenseState":
        a = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise StateError("zero vector cannot be normalized")
        return cls(n=n, amplitudes=a / norm)

    @classmethod
    def plus(cls, n) -> "DenseState":
        return cls(n=n, amplitudes=np.full(2**n, 2 ** (-n / 2), dtype=np.complex128))

    @classmethod
    def basis(cls, n, index) -> "DenseState":
        a = np.zeros(2**n, dtype=np.complex128)
        a[index] = 1.0
        return cls(n=n, amplitudes=a)


@dataclass
class EnergyEntropyPoint:
    energy: float
    entropy_bits: float


@dataclass
class BoltzmannCurve:
    """Samples (t, E(t), S(t)) of the pure-Gibbs boundary over a grid of inverse temperatures."""

    t_grid: np.ndarray
    energies: np.ndarray
    entropies_bits: np.ndarray

    def rows(self):
        return zip(self.t_grid, self.energies, self.entropies_bits)


def dephase(psi: DenseState) -> np.ndarray:
    """Computational-basis probabilities |a_s|^2 of the completely dephased state."""
    p = np.abs(psi.amplitudes) ** 2
    return p / p.sum()


def _shannon(p: np.ndarray, base) -> float:
    p = p[p > 0]
    if base == 2:
        return float(-(p * np.log2(p)).sum())
    return float(-(p * np.log(p)).sum())


def diagonal_entropy(psi: DenseState) -> float:
    """Diagonal (coherence) entropy in bits, with 0*log 0 := 0."""
    return _shannon(dephase(psi), base=2)


def diagonal_entropy_nats(psi: DenseState) -> float:
    return _shannon(dephase(psi), base=np.e)


def expected_energy(psi: DenseState, h: IsingHamiltonian) -> float:
    """<psi|H|psi> for the diagonal Hamiltonian, offset included."""
    return float(dephase(psi) @ h.energies())


def free_energy(psi: DenseState, h: IsingHamiltonian, T: float) -> float:
    """G = <H> - T * S_d with the entropy in nats (thermodynamic convention)."""
    if T <= 0:
        raise StateError(f"temperature must be positive, got {T}")
    return expected_energy(psi, h) - T * diagonal_entropy_nats(psi)


def exact_gibbs(h: IsingHamiltonian, t: float) -> DenseState:
    """Pure Gibbs state: a_s = e^{-t E_s / 2} / sqrt(Z_t), all phases zero.

    Energies are shifted by E_min before exponentiation; the shift cancels
    in the normalization and guards against overflow.
    """
    if not np.isfinite(t) or t < 0:
        raise StateError(f"inverse temperature must be finite and >= 0, got {t}")
    e = h.energies()
    w = np.exp(-t * (e - e.min()) / 2.0)
    return DenseState.from_unnormalized(h.n, w)


def gibbs_from_evolution_time(h: IsingHamiltonian, tau: float) -> DenseState:
    """Pure Gibbs state reached by imaginary-time evolution of |+>^n for time tau.

    Evolved amplitudes go as e^{-tau E_s} = e^{-E_s/T} with T = 1/tau, i.e.
    the amplitude-convention state exact_gibbs(2*tau).
    """
    return exact_gibbs(h, 2.0 * tau)


def gaussian_state(h: IsingHamiltonian, e_target: float, sigma: float) -> DenseState:
    """Energy-windowed superposition with weights e^{-(E_s - E_T)^2 / (2 sigma^2)}.

    Explicitly renormalized to unit norm (the textbook Gaussian prefactor is
    not a valid state normalizer).
    """
    if sigma <= 0:
        raise StateError(f"sigma must be positive, got {sigma}")
    e = h.energies()
    x = -((e - e_target) ** 2) / (2.0 * sigma**2)
    w = np.exp(x - x.max())  # overflow guard; cancels in normalization
    return DenseState.from_unnormalized(h.n, w)


def fixed_energy_gaussian(
    h: IsingHamiltonian, energy: float, sigma: float, tol: float = 1e-9
) -> DenseState:
    """Gaussian state with given sigma, re-projected to the target energy by
    bisection on the window center E_T."""
    e = h.energies()
    lo, hi = float(e.min()) - 3 * sigma, float(e.max()) + 3 * sigma
    if not (e.min() - tol <= energy <= e.max() + tol):
        raise StateError(f"target energy {energy} outside spectrum")

    def mean_at(et):
        return expected_energy(gaussian_state(h, et, sigma), h)

    flo, fhi = mean_at(lo), mean_at(hi)
    if not (flo - tol <= energy <= fhi + tol):
        raise StateError("bisection bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = mean_at(mid)
        if abs(fm - energy) < tol:
            break
        if fm < energy:
            lo = mid
        else:
            hi = mid
    return gaussian_state(h, 0.5 * (lo + hi), sigma)


def energy_entropy_point(psi: DenseState, h: IsingHamiltonian) -> EnergyEntropyPoint:
    return EnergyEntropyPoint(
        energy=expected_energy(psi, h), entropy_bits=diagonal_entropy(psi)
    )


def boltzmann_curve(h: IsingHamiltonian, t_grid) -> BoltzmannCurve:
    """Pure-Gibbs boundary over a grid of inverse temperatures (both signs)."""
    t_grid = np.asarray(t_grid, dtype=float)
    e = h.energies()
    energies = np.empty_like(t_grid)
    entropies = np.empty_like(t_grid)
    for k, t in enumerate(t_grid):
        # negative t: weights e^{-t E/2} favor high energies; shift accordingly
        ref = e.min() if t >= 0 else e.max()
        w = np.exp(-t * (e - ref) / 2.0)
        psi = DenseState.from_unnormalized(h.n, w)
        energies[k] = expected_energy(psi, h)
        entropies[k] = diagonal_entropy(psi)
    return BoltzmannCurve(t_grid=t_grid, energies=energies, entropies_bits=entropies)


def approximation_ratio(e_x: float, spectrum: Spectrum) -> float:
    """alpha(x) = (E_min - E_x) / |E_min|; zero at the optimum, negative above it."""
    e_min = spectrum.e_min
    if e_min == 0:
        raise StateError("approximation ratio undefined for E_min = 0")
    return (e_min - e_x) / abs(e_min)


def relative_ratio(e_x: float, e_y: float, spectrum: Spectrum) -> float:
    """alpha_r = alpha(y) - alpha(x): positive iff state y reached lower energy."""
    return approximation_ratio(e_y, spectrum) - approximation_ratio(e_x, spectrum)


# ---------------------------------------------------------------------------
# CSV emission

def write_diagram_csv(path, labelled_points):
    """Rows (label, E, S_bits) for an energy-entropy diagram."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "energy", "entropy_bits"])
        for label, pt in labelled_points:
            w.writerow([label, repr(pt.energy), repr(pt.entropy_bits)])


def write_boltzmann_csv(path, curve: BoltzmannCurve):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "energy", "entropy_bits"])
        for t, e, s in curve.rows():
            w.writerow([repr(float(t)), repr(float(e)), repr(float(s))])


def random_state(n: int, rng) -> DenseState:
    """Haar-ish random normalized state (Gaussian amplitudes)."""
    a = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return DenseState.from_unnormalized(n, a)
