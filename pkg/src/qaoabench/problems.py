"""Max-Cut and Sherrington-Kirkpatrick instances with exact brute-force oracles.

Ising energies use the spin convention s = +1 for bit '0' and s = -1 for
bit '1'; bitstrings put spin 0 in the leftmost character, matching the
simulator's little-endian index order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import CapacityError
from .seeding import derive_seed
from .simulator import index_to_bitstring

MAX_ORACLE_SPINS = 24

SK_PLUS_MINUS_ONE = "pm1"
SK_STANDARD_NORMAL = "normal"

KIND_MAXCUT = "maxcut"
KIND_SK = "sk"


@dataclass
class Graph:
    """Undirected weighted graph; edges stored as (i, j, weight) with i < j."""

    num_nodes: int
    edges: list[tuple[int, int, float]]

    def __post_init__(self):
        seen = set()
        for i, j, _w in self.edges:
            if not 0 <= i < j < self.num_nodes:
                raise ValueError(f"edge ({i}, {j}) violates 0 <= i < j < {self.num_nodes}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))


@dataclass
class IsingInstance:
    """Two-body Ising cost sum_ij J_ij s_i s_j with a scalar offset."""

    num_spins: int
    couplings: list[tuple[int, int, float]]
    offset: float
    kind: str
    seed: int | None = None
    p_edge: float | None = None
    _energy_diag: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in (KIND_MAXCUT, KIND_SK):
            raise ValueError(f"unknown instance kind {self.kind!r}")
        seen = set()
        for i, j, _w in self.couplings:
            if not 0 <= i < j < self.num_spins:
                raise ValueError(f"coupling ({i}, {j}) out of range")
            if (i, j) in seen:
                raise ValueError(f"duplicate coupling ({i}, {j})")
            seen.add((i, j))

    @property
    def normalizer(self) -> float:
        """Sum of |J|; the spectral bound on the Ising energy."""
        return float(sum(abs(w) for _i, _j, w in self.couplings))

    def energy_diagonal(self) -> np.ndarray:
        """Ising energy of every bitstring, indexed by basis state (cached)."""
        if self._energy_diag is None:
            self._energy_diag = _energy_table(self.num_spins, self.couplings)
        return self._energy_diag


@dataclass
class OracleResult:
    """Exact extremes of an instance's energy landscape."""

    best_bitstring: str
    best_energy: float
    worst_energy: float
    best_cut: float | None = None


def _spin_columns(indices: np.ndarray, qubit: int) -> np.ndarray:
    return 1.0 - 2.0 * ((indices >> qubit) & 1)


def _energy_table(num_spins: int, couplings, indices: np.ndarray | None = None) -> np.ndarray:
    if indices is None:
        indices = np.arange(1 << num_spins, dtype=np.int64)
    energy = np.zeros(indices.size)
    for i, j, w in couplings:
        energy += w * _spin_columns(indices, i) * _spin_columns(indices, j)
    return energy


def gen_erdos_renyi(n: int, p_edge: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p) with unit edge weights, deterministic per seed."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if not 0.0 <= p_edge <= 1.0:
        raise ValueError(f"edge probability {p_edge} outside [0, 1]")
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                edges.append((i, j, 1.0))
    return Graph(n, edges)


def gen_sk_instance(n: int, seed: int, dist: str = SK_PLUS_MINUS_ONE) -> IsingInstance:
    """Fully connected SK instance; stored couplings are J_jk / sqrt(n)."""
    if n < 2:
        raise ValueError("need at least 2 spins")
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(n)
    couplings = []
    for i in range(n):
        for j in range(i + 1, n):
            if dist == SK_PLUS_MINUS_ONE:
                raw = 1.0 if rng.random() < 0.5 else -1.0
            elif dist == SK_STANDARD_NORMAL:
                raw = float(rng.normal())
            else:
                raise ValueError(f"unknown SK distribution {dist!r}")
            couplings.append((i, j, raw * scale))
    return IsingInstance(n, couplings, offset=0.0, kind=KIND_SK, seed=seed)


def maxcut_to_ising(graph: Graph) -> IsingInstance:
    """Cut value of z equals offset - energy(z)/2 under this encoding."""
    couplings = list(graph.edges)
    offset = 0.5 * sum(w for _i, _j, w in graph.edges)
    return IsingInstance(graph.num_nodes, couplings, offset=offset, kind=KIND_MAXCUT)


def maxcut_instance(n: int, p_edge: float, seed: int) -> IsingInstance:
    """Erdos-Renyi graph converted to Ising form, with provenance recorded."""
    inst = maxcut_to_ising(gen_erdos_renyi(n, p_edge, seed))
    inst.seed = seed
    inst.p_edge = p_edge
    return inst


def generate_instance(
    family: str,
    n: int,
    seed: int,
    p_edge: float | None = None,
    sk_dist: str = SK_PLUS_MINUS_ONE,
) -> IsingInstance:
    """Benchmark-layer generation: degenerate (couplingless) draws are redrawn
    deterministically so downstream code never sees a zero normalizer."""
    for attempt in range(64):
        attempt_seed = seed if attempt == 0 else derive_seed(seed, "redraw", attempt)
        if family == KIND_MAXCUT:
            if p_edge is None or p_edge <= 0.0:
                raise ValueError("Max-Cut generation needs p_edge > 0")
            inst = maxcut_instance(n, p_edge, attempt_seed)
        elif family == KIND_SK:
            inst = gen_sk_instance(n, attempt_seed, dist=sk_dist)
        else:
            raise ValueError(f"unknown instance family {family!r}")
        if inst.couplings:
            inst.seed = attempt_seed
            return inst
    raise ValueError(f"could not draw a non-degenerate {family} instance at n={n}")


def ising_energy(instance: IsingInstance, z: str) -> float:
    """Energy of one bitstring (character i is spin i; '0' -> s=+1)."""
    if len(z) != instance.num_spins:
        raise ValueError(f"bitstring length {len(z)} != {instance.num_spins} spins")
    spins = [1.0 if b == "0" else -1.0 for b in z]
    return float(sum(w * spins[i] * spins[j] for i, j, w in instance.couplings))


def cut_value(instance: IsingInstance, energy: float) -> float:
    """Max-Cut objective corresponding to an Ising energy."""
    return instance.offset - 0.5 * energy


def brute_force_optimum(instance: IsingInstance) -> OracleResult:
    """Exhaustive minimum/maximum energy; flip symmetry halves the enumeration."""
    n = instance.num_spins
    if n > MAX_ORACLE_SPINS:
        raise CapacityError(f"{n} spins exceeds brute-force cap {MAX_ORACLE_SPINS}")
    # spin n-1 fixed to +1; the complement of each bitstring has equal energy
    half = 1 << (n - 1)
    best_energy = np.inf
    worst_energy = -np.inf
    best_index = 0
    chunk = 1 << 20
    for start in range(0, half, chunk):
        indices = np.arange(start, min(start + chunk, half), dtype=np.int64)
        energies = _energy_table(n, instance.couplings, indices)
        lo = int(np.argmin(energies))
        hi = int(np.argmax(energies))
        if energies[lo] < best_energy:
            best_energy = float(energies[lo])
            best_index = int(indices[lo])
        worst_energy = max(worst_energy, float(energies[hi]))
    result = OracleResult(
        best_bitstring=index_to_bitstring(best_index, n),
        best_energy=best_energy,
        worst_energy=worst_energy,
    )
    if instance.kind == KIND_MAXCUT:
        result.best_cut = cut_value(instance, best_energy)
    return result


def approx_ratio(expected_energy: float, instance: IsingInstance, oracle: OracleResult) -> float:
    """Achieved objective normalized to the exact optimum, clamped to [0, 1].

    Max-Cut: expected cut over best cut.  SK: position of the expected energy
    between the worst and best energies (optimum -> 1, anti-optimum -> 0).
    """
    if abs(oracle.worst_energy - oracle.best_energy) < 1e-15:
        return 1.0  # degenerate landscape: every state is optimal
    if instance.kind == KIND_MAXCUT:
        ratio = cut_value(instance, expected_energy) / oracle.best_cut
    else:
        ratio = (oracle.worst_energy - expected_energy) / (
            oracle.worst_energy - oracle.best_energy
        )
    return float(min(1.0, max(0.0, ratio)))


def instance_to_dict(instance: IsingInstance) -> dict:
    data = {
        "kind": instance.kind,
        "num_spins": instance.num_spins,
        "couplings": [[i, j, w] for i, j, w in instance.couplings],
        "offset": instance.offset,
        "seed": instance.seed,
    }
    if instance.p_edge is not None:
        data["p_edge"] = instance.p_edge
    return data


def instance_from_dict(data: dict) -> IsingInstance:
    return IsingInstance(
        num_spins=data["num_spins"],
        couplings=[(int(i), int(j), float(w)) for i, j, w in data["couplings"]],
        offset=float(data["offset"]),
        kind=data["kind"],
        seed=data.get("seed"),
        p_edge=data.get("p_edge"),
    )


def save_instance(instance: IsingInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n")


def load_instance(path) -> IsingInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))
