"""Segmented propagation-constant disorder and coupler calibration.

The experimentally realizable decoherence knob is a piecewise-constant random
detuning of each state guide's propagation constant: the evolution length is
cut into segments (2 mm each by default) and every (segment, site) cell gets
an independent uniform draw in [0, amplitude] mm^-1.  Averaging unitary
single-realization evolutions over this disorder produces the decohering
mixture; the amplitude controls how classical the walk behaves.

Also provides the directional-coupler math used to calibrate the detuning:
cross-port power P(z) = (C^2 / C_eff^2) sin^2(C_eff z) with
C_eff = sqrt((detuning / 2)^2 + C^2), and the linear map from writing-speed
offset to detuning.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.sparse.linalg import expm_multiply

from .engine import EvolutionResult, _as_matrix
from .errors import (
    ConfigurationError,
    DimensionError,
    FitFailureError,
    StateError,
)


@dataclass(frozen=True)
class DetuningProfile:
    """Per-segment, per-site detunings in mm^-1, constant within a segment.

    ``values`` has shape (n_segments, n_sites); the columns cover the state
    guides only — auxiliary sink guides are never detuned.
    """

    values: np.ndarray
    segment_length: float
    amplitude: float
    seed: int | None = None
    symmetric: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionError("profile values must be a segments x sites table")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.segment_length > 0:
            raise ConfigurationError("segment_length must be positive")
        lo, hi = (-self.amplitude / 2, self.amplitude / 2) if self.symmetric \
            else (0.0, self.amplitude)
        if values.size and (values.min() < lo - 1e-12 or values.max() > hi + 1e-12):
            raise ValueError("profile values outside the sampling interval")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_segments(self) -> int:
        return self.values.shape[0]

    @property
    def n_sites(self) -> int:
        return self.values.shape[1]

    @property
    def total_length(self) -> float:
        return self.n_segments * self.segment_length

    def to_csv(self, path) -> None:
        """Write the table: one row per segment, one column per site."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([f"site_{i}" for i in range(self.n_sites)])
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, segment_length: float, amplitude: float,
                 seed=None, symmetric=False) -> "DetuningProfile":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        values = np.array([[float(v) for v in row] for row in rows[1:]])
        return cls(values=values, segment_length=segment_length,
                   amplitude=amplitude, seed=seed, symmetric=symmetric)


def sample_detuning_profile(n_sites: int, n_segments: int, amplitude: float,
                            seed, *, segment_length: float = 2.0,
                            symmetric: bool = False) -> DetuningProfile:
    """Draw an independent uniform detuning for every (segment, site) cell.

    One-sided draws on [0, amplitude] by default (speed offsets are
    positive); ``symmetric=True`` centres the interval on zero, which leaves
    sink-free populations unchanged because a common diagonal offset is a
    global phase.
    """
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    if n_sites < 1 or n_segments < 1:
        raise ConfigurationError("profile needs at least one site and one segment")
    rng = np.random.default_rng(seed)
    values = rng.uniform(0.0, amplitude, size=(n_segments, n_sites))
    if symmetric:
        values -= amplitude / 2
    seed_field = seed if (seed is None or isinstance(seed, (int, np.integer))) else None
    return DetuningProfile(values=values, segment_length=segment_length,
                           amplitude=amplitude,
                           seed=int(seed_field) if seed_field is not None else None,
                           symmetric=symmetric)


def _segment_unitary(h_segment: np.ndarray, length: float) -> np.ndarray:
    w, v = np.linalg.eigh(h_segment)
    return (v * np.exp(-1j * w * length)) @ v.conj().T


def piecewise_evolve(psi0, h, profile: DetuningProfile,
                     detuned_sites=None) -> EvolutionResult:
    """Exact unitary evolution with the profile's detunings, segment by segment.

    Each segment applies exp(-i (H + diag(detunings_k)) * segment_length) to
    the amplitude vector; populations are recorded at every segment boundary.
    ``detuned_sites`` maps profile columns onto Hamiltonian indices (default:
    the first n_sites indices, i.e. the state guides).
    """
    mat = _as_matrix(h)
    dim = mat.shape[0]
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi.size != dim:
        raise DimensionError(f"state length {psi.size} != dimension {dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise StateError(f"input state norm {norm:.12f} != 1")
    if detuned_sites is None:
        detuned_sites = np.arange(profile.n_sites)
    detuned_sites = np.asarray(detuned_sites, dtype=int)
    if detuned_sites.size != profile.n_sites:
        raise DimensionError("detuned_sites length must match profile columns")
    if detuned_sites.size and (detuned_sites.min() < 0 or detuned_sites.max() >= dim):
        raise DimensionError("detuned site index outside Hamiltonian")

    # Zero-disorder profiles reuse a single propagator; disordered segments
    # apply the exponential directly to the vector, which is much cheaper
    # than diagonalizing every segment Hamiltonian.
    static = not profile.values.any()
    if static:
        u_static = _segment_unitary(mat, profile.segment_length)

    z_points = [0.0]
    pops = [np.abs(psi) ** 2]
    for k in range(profile.n_segments):
        if static:
            psi = u_static @ psi
        else:
            h_seg = mat.copy()
            h_seg[detuned_sites, detuned_sites] += profile.values[k]
            psi = expm_multiply(-1j * profile.segment_length * h_seg, psi)
        z_points.append((k + 1) * profile.segment_length)
        pops.append(np.abs(psi) ** 2)

    return EvolutionResult(z_grid=np.array(z_points), populations=np.array(pops),
                           final_rho=np.outer(psi, psi.conj()))


def spawn_seeds(master_seed: int, n: int) -> list[int]:
    """Deterministic child seeds: entry k is derived from (master_seed, k)."""
    return [derive_seed(master_seed, k) for k in range(n)]


def derive_seed(master_seed: int, *key) -> int:
    """Collapse (master_seed, *key) into one 64-bit stream seed."""
    ss = np.random.SeedSequence([int(master_seed), *(int(k) for k in key)])
    return int(ss.generate_state(1, np.uint64)[0])


def _resolve_seeds(seeds, n_realizations: int) -> list[int]:
    if seeds is None:
        return spawn_seeds(0, n_realizations)
    if isinstance(seeds, (int, np.integer)):
        return spawn_seeds(int(seeds), n_realizations)
    seeds = [int(s) for s in seeds]
    if len(seeds) != n_realizations:
        raise ConfigurationError(
            f"need {n_realizations} seeds, got {len(seeds)}"
        )
    return seeds


def ensemble_average(psi0, h, amplitude: float, n_sites: int, n_segments: int,
                     n_realizations: int, seeds=None, *,
                     segment_length: float = 2.0, detuned_sites=None,
                     symmetric: bool = False) -> EvolutionResult:
    """Mean population trajectory over independent disorder realizations.

    The returned final state is the averaged density matrix (mean projector),
    which is the decohered mixture the disorder model is meant to create.
    ``seeds`` may be a master seed (children are spawned deterministically)
    or an explicit per-realization list.
    """
    if n_realizations < 1:
        raise ConfigurationError("n_realizations must be >= 1")
    seed_list = _resolve_seeds(seeds, n_realizations)
    pop_sum = None
    rho_sum = None
    z_grid = None
    for seed in seed_list:
        profile = sample_detuning_profile(n_sites, n_segments, amplitude, seed,
                                          segment_length=segment_length,
                                          symmetric=symmetric)
        res = piecewise_evolve(psi0, h, profile, detuned_sites=detuned_sites)
        if pop_sum is None:
            z_grid = res.z_grid
            pop_sum = res.populations.copy()
            rho_sum = res.final_rho.copy()
        else:
            pop_sum += res.populations
            rho_sum += res.final_rho
    return EvolutionResult(z_grid=z_grid, populations=pop_sum / n_realizations,
                           final_rho=rho_sum / n_realizations)


def ensemble_coherence(psi0, h, pair, amplitude: float, n_sites: int,
                       n_segments: int, n_realizations: int, seeds=None, *,
                       segment_length: float = 2.0, detuned_sites=None,
                       symmetric: bool = False):
    """|<i| rho_mean |j>| at every segment boundary for one site pair.

    Tracks how fast ensemble averaging destroys a chosen off-diagonal
    element.  Returns (z_grid, coherence magnitudes).
    """
    i, j = pair
    if n_realizations < 1:
        raise ConfigurationError("n_realizations must be >= 1")
    seed_list = _resolve_seeds(seeds, n_realizations)
    acc = None
    z_grid = None
    for seed in seed_list:
        profile = sample_detuning_profile(n_sites, n_segments, amplitude, seed,
                                          segment_length=segment_length,
                                          symmetric=symmetric)
        mat = _as_matrix(h)
        dim = mat.shape[0]
        psi = np.asarray(psi0, dtype=complex).reshape(-1)
        if psi.size != dim:
            raise DimensionError(f"state length {psi.size} != dimension {dim}")
        sites = np.arange(profile.n_sites) if detuned_sites is None \
            else np.asarray(detuned_sites, dtype=int)
        terms = [psi[i] * np.conj(psi[j])]
        for k in range(profile.n_segments):
            h_seg = mat.copy()
            h_seg[sites, sites] += profile.values[k]
            psi = expm_multiply(-1j * profile.segment_length * h_seg, psi)
            terms.append(psi[i] * np.conj(psi[j]))
        if acc is None:
            z_grid = np.arange(profile.n_segments + 1) * profile.segment_length
            acc = np.array(terms)
        else:
            acc += np.array(terms)
    return z_grid, np.abs(acc / n_realizations)


def effective_coupling(coupling: float, detuning: float) -> float:
    """Detuned coupler rate: sqrt((detuning / 2)^2 + coupling^2) in mm^-1."""
    if not coupling > 0:
        raise ValueError(f"coupling must be positive, got {coupling}")
    return float(np.hypot(detuning / 2.0, coupling))


def coupler_power_transfer(coupling: float, detuning: float, z):
    """Cross-port power of a detuned directional coupler at distance z (mm).

    P(z) = (C^2 / C_eff^2) sin^2(C_eff z), bounded above by C^2 / C_eff^2.
    """
    if not coupling > 0:
        raise ValueError(f"coupling must be positive, got {coupling}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("z must be nonnegative")
    c_eff = effective_coupling(coupling, detuning)
    power = (coupling / c_eff) ** 2 * np.sin(c_eff * z) ** 2
    return float(power) if power.ndim == 0 else power


@dataclass(frozen=True)
class CouplerCalibration:
    """Linear writing-speed calibration: detuning = slope * speed_offset."""

    base_speed: float = 5.0      # mm/s
    slope: float = 0.20          # mm^-1 per (mm/s)
    coupling: float = 0.3        # mm^-1

    def __post_init__(self):
        if not self.slope > 0:
            raise ConfigurationError("slope must be positive")
        if not self.coupling > 0:
            raise ConfigurationError("coupling must be positive")


def detuning_from_speed(speed_offset: float, calib: CouplerCalibration) -> float:
    """Detuning (mm^-1) produced by a writing-speed offset (mm/s)."""
    return calib.slope * speed_offset


@dataclass(frozen=True)
class CouplerFit:
    """Result of fitting P(z) = amplitude * sin^2(rate * z)."""

    effective_coupling: float
    coupling: float
    amplitude: float
    residual: float


def fit_effective_coupling(z, power) -> CouplerFit:
    """Least-squares fit of cross-port power oscillations.

    Fits P(z) = A sin^2(Omega z); Omega is the effective coupling and
    sqrt(A) * Omega the bare coupling.  Needs >= 8 samples spanning at least
    half an oscillation period; flat or non-oscillatory data raises
    FitFailureError with the raw series attached.
    """
    z = np.asarray(z, dtype=float)
    power = np.asarray(power, dtype=float)
    if z.shape != power.shape or z.ndim != 1:
        raise DimensionError("z and power must be equal-length 1-D arrays")
    if z.size < 8:
        raise ValueError(f"need at least 8 samples, got {z.size}")
    span = float(z.max() - z.min())
    if not span > 0:
        raise ValueError("z samples must span a nonzero range")
    if float(np.ptp(power)) < 1e-12:
        raise FitFailureError("power series is flat; nothing to fit",
                              diagnostics={"z": z, "power": power})

    def model(zz, amp, rate):
        return amp * np.sin(rate * zz) ** 2

    # Coarse frequency scan (amplitude has a closed-form optimum per rate),
    # then a local refinement.
    rate_grid = np.linspace(0.25 * np.pi / span, np.pi / span * 8.0, 600)
    best_rate, best_amp, best_sse = None, None, np.inf
    for rate in rate_grid:
        q = np.sin(rate * z) ** 2
        denom = float(q @ q)
        if denom < 1e-12:
            continue
        amp = float(q @ power) / denom
        sse = float(np.sum((power - amp * q) ** 2))
        if sse < best_sse:
            best_rate, best_amp, best_sse = rate, amp, sse
    if best_rate is None or best_amp <= 0:
        raise FitFailureError("no oscillatory structure found",
                              diagnostics={"z": z, "power": power})
    try:
        popt, _ = curve_fit(model, z, power, p0=[best_amp, best_rate],
                            maxfev=20000)
    except RuntimeError as exc:
        raise FitFailureError(f"curve fit did not converge: {exc}",
                              diagnostics={"z": z, "power": power}) from exc
    amp, rate = float(popt[0]), float(abs(popt[1]))
    if amp <= 0 or rate * span < 0.5 * np.pi * 0.999:
        raise FitFailureError(
            "fitted oscillation does not span half a period",
            diagnostics={"z": z, "power": power, "amplitude": amp, "rate": rate},
        )
    residual = float(np.sqrt(np.mean((power - model(z, amp, rate)) ** 2)))
    return CouplerFit(effective_coupling=rate,
                      coupling=float(np.sqrt(amp) * rate),
                      amplitude=amp, residual=residual)


def detuning_from_couplings(effective: float, coupling: float) -> float:
    """Invert the coupler relation: detuning = 2 sqrt(C_eff^2 - C^2).

    Noise can push the fitted C a hair above C_eff; the difference is clamped
    at zero so the result stays real.
    """
    return float(2.0 * np.sqrt(max(effective ** 2 - coupling ** 2, 0.0)))


def fit_dephasing_rate(amplitude: float, h, n_realizations: int, *,
                       n_segments: int = 40, segment_length: float = 2.0,
                       seed: int = 0) -> float:
    """Empirical decoherence rate (per mm) of a two-guide coupler under the
    segmented-disorder model.

    Injects the symmetric superposition (stationary under the coupling, so
    only disorder moves the coherence), ensemble-averages, and fits the
    exponential decay of the off-diagonal magnitude.  Bridges the disorder
    amplitude to an equivalent jump-rate scale for the abstract walk; the
    correspondence is empirical, not exact.
    """
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    mat = _as_matrix(h)
    if mat.shape != (2, 2):
        raise DimensionError("dephasing-rate fit expects a 2-site coupler")
    psi0 = np.array([1.0, 1.0]) / np.sqrt(2.0)
    z, coh = ensemble_coherence(psi0, mat, (0, 1), amplitude, 2, n_segments,
                                n_realizations, seeds=seed,
                                segment_length=segment_length)
    floor = coh[0] * max(0.05, 3.0 / np.sqrt(n_realizations))
    keep = coh > floor
    if not keep.all():
        cut = int(np.argmin(keep))  # first index below the floor
        keep = np.zeros_like(keep)
        keep[:cut] = True
    if keep.sum() < 3:
        raise FitFailureError(
            "coherence decays below the statistical floor too quickly to fit",
            diagnostics={"z": z, "coherence": coh},
        )
    slope = np.polyfit(z[keep], np.log(coh[keep]), 1)[0]
    return float(-slope)
