"""State encoding and waveguide-lattice Hamiltonians.

A chain of ``n_states`` waveguides encodes binary patterns that differ by one
bit between neighbours; absorbing "sinks" are long auxiliary waveguide arrays
hung off selected chain sites with a much stronger coupling.  All couplings
are in mm^-1 and all lengths in mm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError


class BinaryPattern:
    """Fixed-length string of 0/1 bits labelling one network state."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = tuple(int(b) for b in bits)
        if len(bits) == 0:
            raise ValueError("pattern needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"pattern bits must be 0 or 1, got {bits}")
        self.bits = bits

    def __len__(self):
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __eq__(self, other):
        return isinstance(other, BinaryPattern) and self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __str__(self):
        return "".join(str(b) for b in self.bits)

    def __repr__(self):
        return f"BinaryPattern('{self}')"

    def spins(self) -> np.ndarray:
        """Map bits to Ising spins: 0 -> -1, 1 -> +1."""
        return np.array([2 * b - 1 for b in self.bits], dtype=float)


def as_pattern(value) -> BinaryPattern:
    """Coerce a string / bit sequence to a BinaryPattern."""
    if isinstance(value, BinaryPattern):
        return value
    return BinaryPattern(value)


def threshold_patterns(m: int) -> list[BinaryPattern]:
    """The m+1 patterns with k trailing ones, k = 0..m.

    Consecutive patterns differ in exactly one position, so the list is a
    geodesic in Hamming space: distance(pattern_j, pattern_k) == |j - k|.
    """
    if m < 1:
        raise ValueError(f"pattern length must be >= 1, got {m}")
    return [BinaryPattern([0] * (m - k) + [1] * k) for k in range(m + 1)]


def hamming(a, b) -> int:
    """Number of positions where two equal-length patterns differ."""
    a = as_pattern(a)
    b = as_pattern(b)
    if len(a) != len(b):
        raise DimensionError(f"pattern lengths differ: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a.bits, b.bits))


@dataclass(frozen=True)
class SinkAttachment:
    """One absorbing auxiliary array: which chain site it hangs off, how
    many auxiliary guides it has, and their (stronger) coupling in mm^-1."""

    site: int
    n_aux: int = 50
    coupling: float = 0.25


def _default_sinks():
    return (SinkAttachment(site=0), SinkAttachment(site=6))


@dataclass(frozen=True)
class NetworkSpec:
    """Lattice description: a coupled chain of state guides plus sink arrays.

    Defaults reproduce the seven-state network: chain coupling 0.05 mm^-1,
    two sinks of 50 auxiliary guides at the chain ends coupled at 0.25 mm^-1,
    and an 80 mm evolution length.
    """

    n_states: int = 7
    chain_coupling: float = 0.05
    sinks: tuple[SinkAttachment, ...] = field(default_factory=_default_sinks)
    evolution_length: float = 80.0
    base_propagation_constant: float = 0.0

    def __post_init__(self):
        if self.n_states < 2:
            raise ConfigurationError(f"n_states must be >= 2, got {self.n_states}")
        if not self.chain_coupling > 0:
            raise ConfigurationError("chain_coupling must be positive")
        if not self.evolution_length > 0:
            raise ConfigurationError("evolution_length must be positive")
        sinks = tuple(
            s if isinstance(s, SinkAttachment) else SinkAttachment(**s)
            for s in self.sinks
        )
        object.__setattr__(self, "sinks", sinks)
        seen = set()
        for s in sinks:
            if not 0 <= s.site < self.n_states:
                raise ConfigurationError(f"sink site {s.site} outside state chain")
            if s.site in seen:
                raise ConfigurationError(f"duplicate sink attachment at site {s.site}")
            seen.add(s.site)
            if s.n_aux < 1:
                raise ConfigurationError("sink needs at least one auxiliary guide")
            if not s.coupling > self.chain_coupling:
                raise ConfigurationError(
                    "sink coupling must exceed the chain coupling "
                    f"({s.coupling} <= {self.chain_coupling})"
                )

    @property
    def total_sites(self) -> int:
        return self.n_states + sum(s.n_aux for s in self.sinks)

    def to_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "chain_coupling": self.chain_coupling,
            "sinks": [
                {"site": s.site, "n_aux": s.n_aux, "coupling": s.coupling}
                for s in self.sinks
            ],
            "evolution_length_mm": self.evolution_length,
            "base_propagation_constant": self.base_propagation_constant,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkSpec":
        known = {
            "n_states",
            "chain_coupling",
            "sinks",
            "evolution_length_mm",
            "base_propagation_constant",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(
                f"unknown network key(s): {', '.join(sorted(unknown))}"
            )
        kwargs = {}
        if "n_states" in doc:
            kwargs["n_states"] = int(doc["n_states"])
        if "chain_coupling" in doc:
            kwargs["chain_coupling"] = float(doc["chain_coupling"])
        if "evolution_length_mm" in doc:
            kwargs["evolution_length"] = float(doc["evolution_length_mm"])
        if "base_propagation_constant" in doc:
            kwargs["base_propagation_constant"] = float(doc["base_propagation_constant"])
        if "sinks" in doc:
            sinks = []
            for entry in doc["sinks"]:
                extra = set(entry) - {"site", "n_aux", "coupling"}
                if extra:
                    raise ConfigurationError(
                        f"unknown sink key(s): {', '.join(sorted(extra))}"
                    )
                sinks.append(
                    SinkAttachment(
                        site=int(entry["site"]),
                        n_aux=int(entry.get("n_aux", 50)),
                        coupling=float(entry.get("coupling", 0.25)),
                    )
                )
            kwargs["sinks"] = tuple(sinks)
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian coupling matrix over all sites, with site bookkeeping.

    Index layout: state sites come first (0 .. n_states-1), then the
    auxiliary chains of each sink in attachment order.  ``sink_groups``
    holds the auxiliary index lists, one per sink.
    """

    matrix: np.ndarray
    site_roles: tuple[str, ...]
    sink_groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        self.matrix.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_states(self) -> int:
        return sum(1 for r in self.site_roles if r == "state")


def build_hamiltonian(spec: NetworkSpec) -> Hamiltonian:
    """Assemble the lattice Hamiltonian for a NetworkSpec.

    Nearest-neighbour chain couplings between state sites; each sink is a
    nearest-neighbour auxiliary chain whose first guide couples to its state
    site, all at the sink's coupling.  The diagonal is the common base
    propagation constant (detunings are added later, per segment).
    """
    n = spec.n_states
    dim = spec.total_sites
    h = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(h, spec.base_propagation_constant)
    for i in range(n - 1):
        h[i, i + 1] = h[i + 1, i] = spec.chain_coupling

    roles = ["state"] * n
    groups = []
    next_index = n
    for sink in spec.sinks:
        aux = list(range(next_index, next_index + sink.n_aux))
        next_index += sink.n_aux
        h[sink.site, aux[0]] = h[aux[0], sink.site] = sink.coupling
        for a, b in zip(aux, aux[1:]):
            h[a, b] = h[b, a] = sink.coupling
        roles.extend("aux" for _ in aux)
        groups.append(tuple(aux))

    return Hamiltonian(matrix=h, site_roles=tuple(roles), sink_groups=tuple(groups))
