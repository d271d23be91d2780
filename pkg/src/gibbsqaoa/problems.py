"""Classical optimization instances, their Ising encodings, and brute-force oracles.

Bit-to-spin convention, used everywhere in the package:

    z_i = 1 - 2 * bit_i

so bit 0 maps to the sigma_z eigenvalue +1.  Basis index convention: qubit 0
is the most significant bit, i.e. bitstring "b0 b1 ... b_{n-1}" has integer
index sum_i b_i * 2^(n-1-i).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

MAX_BRUTE_QUBITS = 24


class InstanceError(ValueError):
    """Raised for malformed instances or violated preconditions."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..n-1."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("graph needs at least one vertex")
        norm = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise InstanceError(f"self-loop on vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InstanceError(f"edge {e} out of range")
            pair = (min(i, j), max(i, j))
            if pair in norm:
                raise InstanceError(f"duplicate edge {pair}")
            norm.add(pair)
        object.__setattr__(self, "edges", frozenset(norm))

    def cut_size(self, bits) -> int:
        bits = _as_bits(bits, self.n)
        return sum(1 for (i, j) in self.edges if bits[i] != bits[j])


@dataclass
class IsingHamiltonian:
    """Diagonal problem Hamiltonian: sum_i h_i z_i + sum_{i<j} J_ij z_i z_j + offset."""

    n: int
    h: np.ndarray
    J: dict
    offset: float = 0.0
    _energies: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        if self.h.shape != (self.n,):
            raise InstanceError(f"h must have length n={self.n}")
        clean = {}
        for (i, j), v in self.J.items():
            if not (0 <= i < j < self.n):
                raise InstanceError(f"J key ({i},{j}) not strictly upper-triangular")
            if v != 0.0:
                clean[(i, j)] = float(v)
        self.J = clean
        if not np.isfinite(self.h).all() or not all(
            np.isfinite(v) for v in self.J.values()
        ):
            raise InstanceError("non-finite coefficients")

    def energies(self) -> np.ndarray:
        """Energies of all 2^n bitstrings, indexed by basis integer. Cached."""
        if self._energies is None:
            if self.n > MAX_BRUTE_QUBITS:
                raise InstanceError(
                    f"dense enumeration limited to n <= {MAX_BRUTE_QUBITS}, got {self.n}"
                )
            z = spin_table(self.n)
            e = z @ self.h + self.offset
            for (i, j), v in self.J.items():
                e = e + v * z[:, i] * z[:, j]
            self._energies = e
        return self._energies


@dataclass(frozen=True)
class TspInstance:
    """Symmetric TSP instance: distance matrix plus a penalty for constraint terms."""

    distances: np.ndarray
    penalty: float

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InstanceError("distance matrix must be square")
        if (d < 0).any() or (np.diag(d) != 0).any():
            raise InstanceError("distances must be non-negative with zero diagonal")
        object.__setattr__(self, "distances", d)

    @property
    def cities(self) -> int:
        return self.distances.shape[0]

    def tour_length(self, order) -> float:
        c = self.cities
        return sum(
            self.distances[order[p], order[(p + 1) % c]] for p in range(c)
        )

    def all_tours(self):
        """(order, length) for every permutation starting at city 0."""
        c = self.cities
        for rest in itertools.permutations(range(1, c)):
            order = (0,) + rest
            yield order, self.tour_length(order)

    def max_tour_length(self) -> float:
        return max(length for _, length in self.all_tours())

    def min_tour_length(self) -> float:
        return min(length for _, length in self.all_tours())


@dataclass
class Spectrum:
    """Complete energy table of an IsingHamiltonian."""

    n: int
    energies: np.ndarray

    @property
    def e_min(self) -> float:
        return float(self.energies.min())

    @property
    def e_max(self) -> float:
        return float(self.energies.max())

    def ground_indices(self, tol: float = 1e-9) -> np.ndarray:
        return np.flatnonzero(self.energies <= self.e_min + tol)

    def ground_bitstrings(self, tol: float = 1e-9) -> list:
        return [index_to_bitstring(int(s), self.n) for s in self.ground_indices(tol)]

    def energy(self, bits) -> float:
        return float(self.energies[bits_to_index(_as_bits(bits, self.n))])


# ---------------------------------------------------------------------------
# bit helpers

def _as_bits(s, n) -> tuple:
    if isinstance(s, str):
        bits = tuple(int(c) for c in s)
    else:
        bits = tuple(int(b) for b in s)
    if len(bits) != n:
        raise InstanceError(f"bitstring length {len(bits)} != n={n}")
    if any(b not in (0, 1) for b in bits):
        raise InstanceError("bitstring entries must be 0/1")
    return bits


def bits_to_index(bits) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def index_to_bitstring(idx: int, n: int) -> str:
    return format(idx, f"0{n}b")


def bit_table(n: int) -> np.ndarray:
    """(2^n, n) matrix of bits; row s is the bitstring of basis index s."""
    idx = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def spin_table(n: int) -> np.ndarray:
    """(2^n, n) matrix of spins z = 1 - 2*bit."""
    return 1.0 - 2.0 * bit_table(n)


# ---------------------------------------------------------------------------
# encodings

def maxcut_to_ising(g: Graph) -> IsingHamiltonian:
    """Max Cut Hamiltonian: bitstring energy equals minus its cut size."""
    J = {(min(i, j), max(i, j)): 0.5 for (i, j) in g.edges}
    return IsingHamiltonian(n=g.n, h=np.zeros(g.n), J=J, offset=-len(g.edges) / 2.0)


def tsp_to_ising(t: TspInstance) -> IsingHamiltonian:
    """One-hot (city x position) QUBO for the TSP, converted to Ising form.

    Qubit v*c + p is "city v visited at position p".  Ground bitstrings are
    the optimal tours and their energy is the shortest tour length.
    Requires penalty > max tour length.
    """
    c = t.cities
    if t.penalty <= t.max_tour_length():
        raise InstanceError(
            f"penalty {t.penalty} must exceed max tour length {t.max_tour_length()}"
        )
    n = c * c
    q = lambda v, p: v * c + p

    lin = np.zeros(n)
    quad = {}
    const = 0.0

    def add_quad(i, j, w):
        if i == j:
            lin[i] += w  # x^2 = x for binaries
            return
        key = (min(i, j), max(i, j))
        quad[key] = quad.get(key, 0.0) + w

    # one-hot penalties: A*(1 - sum_p x_vp)^2 per city, and per position
    for v in range(c):
        const += t.penalty
        for p in range(c):
            lin[q(v, p)] += -2.0 * t.penalty
            for p2 in range(c):
                add_quad(q(v, p), q(v, p2), t.penalty)
    for p in range(c):
        const += t.penalty
        for v in range(c):
            lin[q(v, p)] += -2.0 * t.penalty
            for v2 in range(c):
                add_quad(q(v, p), q(v2, p), t.penalty)

    # tour length objective
    for u in range(c):
        for v in range(c):
            if u == v:
                continue
            for p in range(c):
                add_quad(q(u, p), q(v, (p + 1) % c), t.distances[u, v])

    return _qubo_to_ising(n, lin, quad, const)


def _qubo_to_ising(n, lin, quad, const) -> IsingHamiltonian:
    """Substitute x_i = (1 - z_i)/2 into sum lin_i x_i + sum quad_ij x_i x_j + const."""
    h = np.zeros(n)
    J = {}
    offset = const
    for i, w in enumerate(lin):
        offset += w / 2.0
        h[i] -= w / 2.0
    for (i, j), w in quad.items():
        offset += w / 4.0
        h[i] -= w / 4.0
        h[j] -= w / 4.0
        J[(i, j)] = J.get((i, j), 0.0) + w / 4.0
    J = {k: v for k, v in J.items() if v != 0.0}
    return IsingHamiltonian(n=n, h=h, J=J, offset=offset)


def tour_to_bits(order, c) -> str:
    bits = ["0"] * (c * c)
    for p, v in enumerate(order):
        bits[v * c + p] = "1"
    return "".join(bits)


def energy_of(h: IsingHamiltonian, s) -> float:
    """Energy of a single bitstring under the bit->spin convention z = 1 - 2*bit."""
    bits = _as_bits(s, h.n)
    z = [1.0 - 2.0 * b for b in bits]
    e = h.offset + sum(hi * zi for hi, zi in zip(h.h, z))
    e += sum(v * z[i] * z[j] for (i, j), v in h.J.items())
    return float(e)


def brute_spectrum(h: IsingHamiltonian) -> Spectrum:
    """Exhaustive energy table; ground truth for all downstream checks."""
    if h.n > MAX_BRUTE_QUBITS:
        raise InstanceError(
            f"brute_spectrum limited to n <= {MAX_BRUTE_QUBITS}, got {h.n}"
        )
    return Spectrum(n=h.n, energies=h.energies())


# ---------------------------------------------------------------------------
# random instances

def random_maxcut(n: int, seed: int, edge_prob: float = 0.5) -> Graph:
    """Erdos-Renyi graph; re-draws until at least one edge exists."""
    rng = np.random.default_rng(seed)
    while True:
        edges = {
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < edge_prob
        }
        if edges:
            return Graph(n=n, edges=frozenset(edges))


def random_tsp(cities: int, seed: int, penalty_factor: float = 2.0) -> TspInstance:
    """Symmetric distances uniform in [0,1); penalty = factor * max tour length."""
    rng = np.random.default_rng(seed)
    d = np.zeros((cities, cities))
    for i in range(cities):
        for j in range(i + 1, cities):
            d[i, j] = d[j, i] = rng.random()
    tmp = TspInstance(distances=d, penalty=np.inf)
    return TspInstance(distances=d, penalty=penalty_factor * tmp.max_tour_length())


# ---------------------------------------------------------------------------
# instance files

def save_instance(path, obj, seed=None):
    """Write a Graph, TspInstance or IsingHamiltonian as JSON."""
    if isinstance(obj, Graph):
        data = {
            "type": "maxcut",
            "n": obj.n,
            "edges": sorted([list(e) for e in obj.edges]),
        }
    elif isinstance(obj, TspInstance):
        data = {
            "type": "tsp",
            "n": obj.cities * obj.cities,
            "distances": obj.distances.tolist(),
            "penalty": obj.penalty,
        }
    elif isinstance(obj, IsingHamiltonian):
        data = {
            "type": "ising",
            "n": obj.n,
            "h": obj.h.tolist(),
            "J": [[i, j, v] for (i, j), v in sorted(obj.J.items())],
            "offset": obj.offset,
        }
    else:
        raise InstanceError(f"cannot serialize {type(obj)!r}")
    if seed is not None:
        data["seed"] = seed
    with open(path, "w") as f:
        json.dump(data, f, indent=2)


def load_instance(path):
    """Load an instance file; returns (object, hamiltonian)."""
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        g = parse_edge_list(text)
        return g, maxcut_to_ising(g)
    kind = data.get("type")
    if kind == "maxcut":
        g = Graph(n=data["n"], edges=frozenset(tuple(e) for e in data["edges"]))
        return g, maxcut_to_ising(g)
    if kind == "tsp":
        t = TspInstance(
            distances=np.asarray(data["distances"]), penalty=data["penalty"]
        )
        return t, tsp_to_ising(t)
    if kind == "ising":
        h = IsingHamiltonian(
            n=data["n"],
            h=np.asarray(data["h"]),
            J={(i, j): v for i, j, v in data["J"]},
            offset=data.get("offset", 0.0),
        )
        return h, h
    raise InstanceError(f"unknown instance type {kind!r}")


def parse_edge_list(text: str) -> Graph:
    """Edge-list text format: one "i j" pair per line; blank lines ignored."""
    edges = set()
    nmax = -1
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InstanceError(f"bad edge line: {line!r}")
        i, j = int(parts[0]), int(parts[1])
        edges.add((min(i, j), max(i, j)))
        nmax = max(nmax, i, j)
    if not edges:
        raise InstanceError("edge list is empty")
    return Graph(n=nmax + 1, edges=frozenset(edges))
