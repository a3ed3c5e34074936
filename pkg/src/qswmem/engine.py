"""Quantum stochastic walk engine.

Integrates the master equation

    drho/dz = -(1 - mix) * i [H, rho]
              + mix * sum_k ( L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho} )

where each jump operator L_k transfers population from one site to another
(L = sqrt(rate) |to><from|) and ``mix`` in [0, 1] blends the coherent walk
(mix = 0) with the classical random walk (mix = 1).  Propagation distance z
in mm plays the role of time.  Density matrices are plain complex ndarrays;
``validate_density`` checks the contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionError,
    IntegrationDivergedError,
    StabilityError,
    StateError,
)
from .network import Hamiltonian, NetworkSpec

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-9
EIGENVALUE_FLOOR = -1e-7


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, Hamiltonian):
        return h.matrix
    return np.asarray(h, dtype=complex)


def basis_density(dim: int, site: int) -> np.ndarray:
    """Pure density matrix |site><site|."""
    if not 0 <= site < dim:
        raise DimensionError(f"site {site} outside dimension {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[site, site] = 1.0
    return rho


def validate_density(rho: np.ndarray, *, herm_tol=HERMITICITY_TOL,
                     trace_tol=TRACE_TOL, eig_floor=EIGENVALUE_FLOOR) -> None:
    """Raise StateError unless rho is Hermitian, unit-trace and positive
    within tolerance."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise StateError(f"density matrix not Hermitian: deviation {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise StateError(f"density matrix trace {tr:.12f} != 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < eig_floor:
        raise StateError(f"density matrix has eigenvalue {lo:.3e} below floor")


@dataclass(frozen=True)
class LindbladSet:
    """Directed population-transfer jumps (from_site -> to_site, rate).

    Rates are dimensionless weights; the master equation scales them by the
    mixing weight and by ``rate_per_mm``, the overall jump rate constant.
    """

    sources: np.ndarray
    targets: np.ndarray
    rates: np.ndarray
    rate_per_mm: float = 1.0

    def __post_init__(self):
        sources = np.asarray(self.sources, dtype=int)
        targets = np.asarray(self.targets, dtype=int)
        rates = np.asarray(self.rates, dtype=float)
        if not (sources.shape == targets.shape == rates.shape):
            raise DimensionError("jump arrays must have equal lengths")
        if sources.size and (sources.min() < 0 or targets.min() < 0):
            raise ConfigurationError("jump site indices must be nonnegative")
        if rates.size and (not np.all(np.isfinite(rates)) or rates.min() < 0):
            raise ConfigurationError("jump rates must be finite and nonnegative")
        if not self.rate_per_mm >= 0:
            raise ConfigurationError("rate_per_mm must be nonnegative")
        for name, arr in (("sources", sources), ("targets", targets), ("rates", rates)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_jumps(cls, jumps, rate_per_mm: float = 1.0) -> "LindbladSet":
        """Build from an iterable of (from_site, to_site, rate) triples."""
        jumps = list(jumps)
        if jumps:
            src, dst, rate = zip(*jumps)
        else:
            src, dst, rate = (), (), ()
        return cls(np.array(src, dtype=int), np.array(dst, dtype=int),
                   np.array(rate, dtype=float), rate_per_mm=rate_per_mm)

    def __len__(self):
        return self.sources.size

    @property
    def max_site(self) -> int:
        if self.sources.size == 0:
            return -1
        return int(max(self.sources.max(), self.targets.max()))

    def outflow(self, dim: int) -> np.ndarray:
        """Total jump rate leaving each site (before mixing/rate scaling)."""
        return np.bincount(self.sources, weights=self.rates, minlength=dim)


def chain_jumps(n_states: int, *, edge_rate: float = 1.0,
                sink_links=(), sink_rate: float = 1.0,
                dephasing_rate: float = 0.0,
                rate_per_mm: float = 1.0) -> LindbladSet:
    """Jump set for an undirected chain with optional directed sink nodes.

    Every chain edge (i, i+1) contributes both directions at ``edge_rate``;
    each (state_site, sink_node) link contributes only the directed jump into
    the sink, which is what makes the sink absorbing.  ``dephasing_rate`` > 0
    adds on-site L = |i><i| operators on the chain sites.
    """
    jumps = []
    for i in range(n_states - 1):
        jumps.append((i, i + 1, edge_rate))
        jumps.append((i + 1, i, edge_rate))
    for site, node in sink_links:
        jumps.append((site, node, sink_rate))
    if dephasing_rate > 0:
        for i in range(n_states):
            jumps.append((i, i, dephasing_rate))
    return LindbladSet.from_jumps(jumps, rate_per_mm=rate_per_mm)


def abstract_qsw_system(spec: NetworkSpec, *, edge_rate: float = 1.0,
                        sink_rate: float = 1.0, dephasing_rate: float = 0.0,
                        rate_per_mm: float = 1.0):
    """Compact walk representation: one extra node per sink.

    Returns (h, jumps, sink_nodes).  The Hamiltonian covers the state chain
    only; sink nodes are coupled exclusively through directed jumps, so they
    absorb and never feed back.
    """
    n = spec.n_states
    dim = n + len(spec.sinks)
    h = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(h, spec.base_propagation_constant)
    for i in range(n - 1):
        h[i, i + 1] = h[i + 1, i] = spec.chain_coupling
    sink_nodes = list(range(n, dim))
    links = [(s.site, node) for s, node in zip(spec.sinks, sink_nodes)]
    jumps = chain_jumps(n, edge_rate=edge_rate, sink_links=links,
                        sink_rate=sink_rate, dephasing_rate=dephasing_rate,
                        rate_per_mm=rate_per_mm)
    return h, jumps, sink_nodes


@dataclass(frozen=True)
class WalkParams:
    """Integration controls: mixing weight, step in mm, snapshot stride."""

    mix: float
    step: float = 0.25
    record_every: int = 1

    def __post_init__(self):
        if not 0.0 <= self.mix <= 1.0:
            raise ConfigurationError(f"mix must be in [0, 1], got {self.mix}")
        if not self.step > 0:
            raise ConfigurationError("step must be positive")
        if self.record_every < 1:
            raise ConfigurationError("record_every must be >= 1")


@dataclass
class EvolutionResult:
    """Sampled populations along z plus the final state."""

    z_grid: np.ndarray
    populations: np.ndarray
    final_rho: np.ndarray

    def __post_init__(self):
        self.z_grid = np.asarray(self.z_grid, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        if self.populations.ndim != 2 or self.populations.shape[0] != self.z_grid.size:
            raise DimensionError("populations must be (n_snapshots, dim)")
        if self.populations.size:
            if self.populations.min() < -1e-9:
                raise StateError(
                    f"negative population {self.populations.min():.3e} in result"
                )
            sums = self.populations.sum(axis=1)
            worst = np.max(np.abs(sums - 1.0))
            if worst > 1e-9:
                raise StateError(f"population sum deviates from 1 by {worst:.3e}")

    @property
    def dim(self) -> int:
        return self.populations.shape[1]


def lindblad_generator(rho: np.ndarray, h, jumps: LindbladSet, mix: float) -> np.ndarray:
    """Right-hand side drho/dz of the mixed coherent/dissipative walk.

    The output is Hermitian and traceless for any valid input.
    """
    h = _as_matrix(h)
    rho = np.asarray(rho, dtype=complex)
    dim = h.shape[0]
    if rho.shape != (dim, dim):
        raise DimensionError(f"rho shape {rho.shape} incompatible with H {h.shape}")
    if jumps.max_site >= dim:
        raise DimensionError(
            f"jump site {jumps.max_site} outside dimension {dim}"
        )
    if not 0.0 <= mix <= 1.0:
        raise ConfigurationError(f"mix must be in [0, 1], got {mix}")

    out = np.zeros_like(rho)
    if mix < 1.0:
        out += -(1.0 - mix) * 1j * (h @ rho - rho @ h)
    if mix > 0.0 and len(jumps) > 0 and jumps.rate_per_mm > 0:
        scale = mix * jumps.rate_per_mm
        gamma = jumps.outflow(dim)
        out -= (0.5 * scale) * (gamma[:, None] * rho + rho * gamma[None, :])
        gains = np.zeros(dim, dtype=complex)
        np.add.at(gains, jumps.targets, jumps.rates * np.diagonal(rho)[jumps.sources])
        out[np.arange(dim), np.arange(dim)] += scale * gains
    return out


def _rk4_step(rho, h, jumps, mix, dz):
    k1 = lindblad_generator(rho, h, jumps, mix)
    k2 = lindblad_generator(rho + 0.5 * dz * k1, h, jumps, mix)
    k3 = lindblad_generator(rho + 0.5 * dz * k2, h, jumps, mix)
    k4 = lindblad_generator(rho + dz * k3, h, jumps, mix)
    return rho + (dz / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_step_invariants(rho, step_index, z):
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise IntegrationDivergedError(
            f"hermiticity drift {herm:.3e} at step {step_index} (z={z:.3f} mm)"
        )
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise IntegrationDivergedError(
            f"trace drift {tr - 1.0:.3e} at step {step_index} (z={z:.3f} mm)"
        )
    lo = np.linalg.eigvalsh(rho).min()
    if lo < EIGENVALUE_FLOOR:
        raise IntegrationDivergedError(
            f"negative eigenvalue {lo:.3e} at step {step_index} (z={z:.3f} mm)"
        )


def evolve(rho0: np.ndarray, h, jumps: LindbladSet, params: WalkParams,
           z_total: float) -> EvolutionResult:
    """Fixed-step 4th-order integration of the walk up to z_total (mm).

    The step is shrunk (never grown) so that an integer number of steps lands
    exactly on z_total.  Invariants (hermiticity, trace, positivity) are
    monitored every step and violations abort with IntegrationDivergedError;
    nothing is silently clipped.
    """
    h = _as_matrix(h)
    if not z_total > 0:
        raise ConfigurationError(f"z_total must be positive, got {z_total}")
    validate_density(rho0)
    dim = h.shape[0]
    if np.asarray(rho0).shape != (dim, dim):
        raise DimensionError("rho0 incompatible with H")

    h_norm = float(np.max(np.abs(np.linalg.eigvalsh(h)))) if dim else 0.0
    if params.step * h_norm > 0.1:
        raise StabilityError(
            f"step {params.step} mm too large: step * |H| = "
            f"{params.step * h_norm:.3f} > 0.1"
        )

    n_steps = max(1, math.ceil(z_total / params.step))
    dz = z_total / n_steps

    rho = np.array(rho0, dtype=complex)
    z_points = [0.0]
    pops = [np.real(np.diagonal(rho)).copy()]
    for k in range(1, n_steps + 1):
        rho = _rk4_step(rho, h, jumps, params.mix, dz)
        z = k * dz
        _check_step_invariants(rho, k, z)
        if k % params.record_every == 0 or k == n_steps:
            z_points.append(z)
            pops.append(np.real(np.diagonal(rho)).copy())

    return EvolutionResult(z_grid=np.array(z_points),
                           populations=np.array(pops), final_rho=rho)


def site_populations(rho: np.ndarray) -> np.ndarray:
    """Real parts of the density-matrix diagonal."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected square matrix, got {rho.shape}")
    return np.real(np.diagonal(rho)).copy()


def sink_population(result: EvolutionResult, sink_group) -> np.ndarray:
    """Per-snapshot total population of a sink's site group."""
    group = np.asarray(list(sink_group), dtype=int)
    if group.size == 0:
        raise ConfigurationError("sink group is empty")
    if group.min() < 0 or group.max() >= result.dim:
        raise DimensionError("sink group index outside result dimension")
    return result.populations[:, group].sum(axis=1)


def purity(rho: np.ndarray) -> float:
    """trace(rho^2); 1 for pure states, 1/dim for the maximally mixed one."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"expected square matrix, got {rho.shape}")
    return float(np.real(np.vdot(rho, rho)))
