"""Newtonian point-mass fields at probe points and their branch-weighted mixtures.

A field is represented by the acceleration vectors it produces at a fixed
set of probe points, flattened into one array of 3 * n_probes components
(m/s^2). The mass sits at one of four sites, one per BB84 symbol; the
mixture field weights the four single-site fields by branch probabilities,
and the general field adds a decaying fraction of that mixture on top of
the realized configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GeometryError, ValidationError
from .qubits import SYMBOLS, Bb84Symbol, BranchWeights, as_symbol, branch_weights

NEWTON_G = 6.674e-11

MIN_PROBE_SEPARATION = 1e-6

# A field vector is a flat float64 array of 3 * n_probes acceleration
# components; the alias documents intent in signatures.
FieldVector = np.ndarray


def _require_positive(value: float, path: str) -> float:
    if not (isinstance(value, (int, float)) and not isinstance(value, bool)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{path}: must be a positive finite number, got {value!r}")
    return value


def point_mass_field(
    site_pos, probe_pos, mass: float, grav_const: float = NEWTON_G
) -> FieldVector:
    """Gravitational acceleration at a probe due to a point mass at a site.

    Returns grav_const * mass * (site - probe) / |site - probe|^3, the
    acceleration vector pointing from the probe toward the mass. Raises
    GeometryError when probe and site are separated by less than the
    minimum separation.
    """
    site = np.asarray(site_pos, dtype=np.float64)
    probe = np.asarray(probe_pos, dtype=np.float64)
    if site.shape != (3,) or probe.shape != (3,):
        raise ValidationError("point_mass_field: positions must be 3-vectors")
    offset = site - probe
    distance = float(np.linalg.norm(offset))
    if distance < MIN_PROBE_SEPARATION:
        raise GeometryError(
            f"probe at {probe.tolist()} is within {MIN_PROBE_SEPARATION} m "
            f"of the mass site at {site.tolist()}"
        )
    return grav_const * mass * offset / distance**3


@dataclass(frozen=True, eq=False)
class Geometry:
    """Immutable mass-site and probe layout.

    sites holds one 3-vector per BB84 symbol in (Z0, Z1, Xp, Xm) order and
    probes at least one 3-vector; coordinates in meters, test_mass in kg.
    """

    sites: np.ndarray
    probes: np.ndarray
    test_mass: float = 1.0
    grav_const: float = NEWTON_G

    def __post_init__(self) -> None:
        sites = np.asarray(self.sites, dtype=np.float64)
        probes = np.asarray(self.probes, dtype=np.float64)
        if sites.shape != (4, 3):
            raise ValidationError(f"geometry.sites: expected shape (4, 3), got {sites.shape}")
        if probes.ndim != 2 or probes.shape[0] < 1 or probes.shape[1] != 3:
            raise ValidationError(
                f"geometry.probes: expected shape (n, 3) with n >= 1, got {probes.shape}"
            )
        if not np.isfinite(sites).all():
            raise ValidationError("geometry.sites: coordinates must be finite")
        if not np.isfinite(probes).all():
            raise ValidationError("geometry.probes: coordinates must be finite")
        for i in range(4):
            for j in range(i + 1, 4):
                if np.array_equal(sites[i], sites[j]):
                    raise GeometryError(
                        f"geometry.sites: {SYMBOLS[i].label} and {SYMBOLS[j].label} coincide"
                    )
        for k, probe in enumerate(probes):
            gaps = np.linalg.norm(sites - probe, axis=1)
            if float(gaps.min()) < MIN_PROBE_SEPARATION:
                nearest = SYMBOLS[int(gaps.argmin())].label
                raise GeometryError(
                    f"geometry.probes[{k}]: closer than {MIN_PROBE_SEPARATION} m "
                    f"to site {nearest}"
                )
        test_mass = _require_positive(self.test_mass, "geometry.testMass")
        grav_const = _require_positive(self.grav_const, "geometry.gravConst")
        sites.setflags(write=False)
        probes.setflags(write=False)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "probes", probes)
        object.__setattr__(self, "test_mass", test_mass)
        object.__setattr__(self, "grav_const", grav_const)

    @property
    def n_probes(self) -> int:
        return int(self.probes.shape[0])

    @property
    def field_dim(self) -> int:
        return 3 * self.n_probes

    def site_position(self, symbol: Bb84Symbol) -> np.ndarray:
        return self.sites[Bb84Symbol(symbol)]

    @cached_property
    def config_matrix(self) -> np.ndarray:
        """Read-only (4, field_dim) matrix; row s is config_field(s)."""
        rows = [
            np.concatenate(
                [
                    point_mass_field(self.sites[s], probe, self.test_mass, self.grav_const)
                    for probe in self.probes
                ]
            )
            for s in range(4)
        ]
        matrix = np.array(rows)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def mix_matrix(self) -> np.ndarray:
        """Read-only (4, field_dim) matrix; row s is mix_field(branch_weights(s))."""
        matrix = np.array([branch_weights(s).as_array() @ self.config_matrix for s in SYMBOLS])
        matrix.setflags(write=False)
        return matrix


def config_field(label: Bb84Symbol, geom: Geometry) -> FieldVector:
    """Field of the single mass parked at the site for `label`, over all probes."""
    return geom.config_matrix[as_symbol(label)].copy()


def mix_field(weights: BranchWeights, geom: Geometry) -> FieldVector:
    """Branch-weighted mixture field: sum over s of w(s) * config_field(s).

    Linear in the weights; a degenerate weight vector reproduces the matching
    configuration field exactly.
    """
    if not isinstance(weights, BranchWeights):
        weights = BranchWeights(tuple(float(x) for x in weights))
    return weights.as_array() @ geom.config_matrix


@dataclass(frozen=True)
class NonlinearParams:
    """Amplitude b, relaxation rate lam (1/s), and delay delta_t (s) of the nonlinear term."""

    b: float
    lam: float = 0.0
    delta_t: float = 0.0

    def __post_init__(self) -> None:
        for name, value, key in (
            ("b", self.b, "nonlinear.b"),
            ("lam", self.lam, "nonlinear.lambda"),
            ("delta_t", self.delta_t, "nonlinear.deltaT"),
        ):
            if not (isinstance(value, (int, float)) and not isinstance(value, bool)):
                raise ValidationError(f"{key}: expected a number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"{key}: must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not 0.0 <= self.b <= 1.0:
            raise ValidationError(f"nonlinear.b: must lie in [0, 1], got {self.b!r}")
        if self.lam < 0.0:
            raise ValidationError(f"nonlinear.lambda: must be >= 0, got {self.lam!r}")
        if self.delta_t < 0.0:
            raise ValidationError(f"nonlinear.deltaT: must be >= 0, got {self.delta_t!r}")


def decay_factor(params: NonlinearParams) -> float:
    """The scalar b * exp(-lam * delta_t) multiplying the mixture term."""
    return params.b * math.exp(-params.lam * params.delta_t)


def general_field(
    label: Bb84Symbol,
    weights: BranchWeights,
    params: NonlinearParams,
    geom: Geometry,
) -> FieldVector:
    """Post-attack field: config_field(label) + decay_factor(params) * mix_field(weights).

    `label` is the realized mass position (Eve's outcome) and `weights` are
    the branch weights of the prepared state. When the decay factor is
    exactly zero the configuration field is returned unchanged bit for bit,
    which is the linear limit.
    """
    base = config_field(label, geom)
    factor = decay_factor(params)
    if factor == 0.0:
        return base
    return base + factor * mix_field(weights, geom)
