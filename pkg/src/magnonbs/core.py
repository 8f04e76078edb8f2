"""Shared domain types for the memory / beam-splitter simulator.

Everything internal runs in normalized units:

* length in units of the medium length L (the cell spans z in [0, 1]),
* time in units of 1/gamma31 (optical coherence decay rate),
* Rabi frequencies, detunings and couplings in units of gamma31.

SI values (MHz, ns) exist only at the CLI boundary.  The optical depth is an
intensity depth: with the control off, a resonant cw probe leaves with
transmission exp(-od).  That convention ties the collective coupling G to the
depth through  od = 2 G^2 L / (gamma31 c_eff),  where c_eff is the normalized
propagation speed of the bare field.

Atomic amplitudes are stored collectively: the sigma12/sigma13 arrays hold
sqrt(N) * (coherence per atom), so their squared integrals count excitations
on the same footing as the field norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

# Probability-like quantities may exceed their physical range by at most this
# much (accumulated roundoff) before we treat it as a bug rather than noise.
PROBABILITY_SLACK = 1e-6

# Default duration of the raised-cosine edges on control segments.
DEFAULT_RAMP = 0.1

SEGMENT_LABELS = ("storage", "beamsplit", "readout", "off")


class ConfigError(ValueError):
    """A constructed object or configuration violates its contract."""


class PhysicsViolation(RuntimeError):
    """A probability or norm left its physical range by more than roundoff."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.setflags(write=False)
    return out


def make_grid(length: float, n_cells: int) -> np.ndarray:
    """Cell-center positions of a uniform grid of n_cells over [0, length].

    Cell-centered samples make the transport bookkeeping exact: a field cell
    traverses exactly n_cells steps of interaction over the length, with no
    half-weight endpoints.
    """
    if length <= 0:
        raise ConfigError(f"medium length must be positive, got {length}")
    if n_cells < 16:
        raise ConfigError(
            f"spatial grid needs at least 16 cells to resolve a stored "
            f"profile, got {n_cells}"
        )
    dz = float(length) / int(n_cells)
    grid = (np.arange(int(n_cells)) + 0.5) * dz
    return _readonly(grid)


@dataclass(frozen=True)
class MediumParams:
    """Static parameters of the atomic cell.

    Exactly one of `od` and `coupling` must be supplied; the other is derived
    from  od = 2 coupling^2 length / (gamma31 c_eff).
    """

    od: float | None = None
    gamma31: float = 1.0
    gamma12: float = 0.0
    delta: float = 0.0
    length: float = 1.0
    c_eff: float = 12.0
    coupling: float | None = None

    def __post_init__(self) -> None:
        if self.gamma31 <= 0:
            raise ConfigError("gamma31 must be positive")
        if self.gamma12 < 0:
            raise ConfigError("gamma12 cannot be negative")
        if self.length <= 0:
            raise ConfigError("medium length must be positive")
        if self.c_eff <= 0:
            raise ConfigError("propagation speed must be positive")
        if (self.od is None) == (self.coupling is None):
            raise ConfigError("give exactly one of od / coupling, the other is derived")
        if self.od is None:
            g = float(self.coupling)
            if g < 0:
                raise ConfigError("coupling cannot be negative")
            od = 2.0 * g * g * self.length / (self.gamma31 * self.c_eff)
            object.__setattr__(self, "od", od)
            object.__setattr__(self, "coupling", g)
        else:
            od = float(self.od)
            if od < 0:
                raise ConfigError("optical depth cannot be negative")
            g = math.sqrt(od * self.gamma31 * self.c_eff / (2.0 * self.length))
            object.__setattr__(self, "od", od)
            object.__setattr__(self, "coupling", g)


@dataclass(frozen=True)
class PulseEnvelope:
    """Temporal envelope of the input probe amplitude at the cell entrance.

    `amplitude(t)` is normalized so that its squared integral over time equals
    `amplitude_norm` (the injected excitation number).  fwhm refers to the
    intensity profile.
    """

    shape: str = "gaussian"
    fwhm: float = 1.0
    t_center: float = 0.0
    amplitude_norm: float = 1.0
    samples: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.shape not in ("gaussian", "custom"):
            raise ConfigError(f"unknown pulse shape {self.shape!r}")
        if self.shape == "gaussian" and self.fwhm <= 0:
            raise ConfigError("pulse fwhm must be positive")
        if not 0.0 <= self.amplitude_norm <= 1.0 + PROBABILITY_SLACK:
            raise ConfigError(
                f"amplitude_norm is a single-excitation weight in [0, 1], "
                f"got {self.amplitude_norm}"
            )
        if self.shape == "custom":
            if self.samples is None:
                raise ConfigError("custom pulse needs (t, value) samples")
            t, v = self.samples
            t = np.asarray(t, dtype=float)
            v = np.asarray(v, dtype=complex)
            if t.ndim != 1 or t.size < 4 or t.size != v.size:
                raise ConfigError("custom pulse samples must be matching 1d arrays")
            if np.any(np.diff(t) <= 0):
                raise ConfigError("custom pulse times must increase strictly")
            norm = np.trapezoid(np.abs(v) ** 2, t)
            if norm <= 0:
                raise ConfigError("custom pulse has zero norm")
            scale = math.sqrt(self.amplitude_norm / norm)
            object.__setattr__(self, "samples", (_readonly(t), _readonly(v * scale)))

    @property
    def sigma(self) -> float:
        """Standard deviation of the intensity profile (gaussian shape)."""
        return self.fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))

    def amplitude(self, t: np.ndarray | float) -> np.ndarray | complex:
        t = np.asarray(t, dtype=float)
        if self.shape == "gaussian":
            s = self.sigma
            peak = self.amplitude_norm / (s * math.sqrt(2.0 * math.pi))
            out = math.sqrt(peak) * np.exp(-((t - self.t_center) ** 2) / (4.0 * s * s))
            out = out.astype(complex)
        else:
            ts, vs = self.samples
            out = np.interp(t, ts, vs.real, left=0.0, right=0.0) + 1j * np.interp(
                t, ts, vs.imag, left=0.0, right=0.0
            )
        if out.ndim == 0:
            return complex(out)
        return out


@dataclass(frozen=True)
class ControlSegment:
    """One labeled interval of control-field drive.

    `amplitude` is either a complex Rabi frequency or a callable t -> complex
    evaluated inside the segment.  Edges are raised-cosine ramps of duration
    `ramp` placed inside the interval, so the drive is continuous and vanishes
    at both segment ends.
    """

    t_start: float
    t_end: float
    amplitude: complex | Callable[[np.ndarray], np.ndarray]
    label: str = "off"
    ramp: float = DEFAULT_RAMP

    def __post_init__(self) -> None:
        if self.label not in SEGMENT_LABELS:
            raise ConfigError(
                f"segment label {self.label!r} not in {SEGMENT_LABELS}")
        if not self.t_end > self.t_start:
            raise ConfigError("segment must have positive duration")
        if self.ramp < 0:
            raise ConfigError("ramp duration cannot be negative")

    def _edge(self, t: np.ndarray) -> np.ndarray:
        # Raised-cosine turn-on/turn-off confined to the segment interior.
        ramp = min(self.ramp, 0.5 * (self.t_end - self.t_start))
        w = np.ones_like(t)
        if ramp > 0:
            up = np.clip((t - self.t_start) / ramp, 0.0, 1.0)
            down = np.clip((self.t_end - t) / ramp, 0.0, 1.0)
            w = 0.5 * (1 - np.cos(np.pi * up)) * 0.5 * (1 - np.cos(np.pi * down))
        inside = (t >= self.t_start) & (t <= self.t_end)
        return np.where(inside, w, 0.0)

    def value(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if callable(self.amplitude):
            amp = np.asarray(self.amplitude(t), dtype=complex)
        else:
            amp = complex(self.amplitude)
        return amp * self._edge(t)


@dataclass(frozen=True)
class ControlTimeline:
    """Ordered, non-overlapping control segments; gaps mean zero drive."""

    segments: tuple[ControlSegment, ...]

    def __post_init__(self) -> None:
        segs = tuple(self.segments)
        for a, b in zip(segs, segs[1:]):
            if b.t_start < a.t_end - 1e-12:
                raise ConfigError(
                    f"segments overlap: [{a.t_start}, {a.t_end}] and "
                    f"[{b.t_start}, {b.t_end}]"
                )
        object.__setattr__(self, "segments", segs)

    def rabi(self, t: np.ndarray | float) -> np.ndarray | complex:
        """Control Rabi frequency at time(s) t."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for seg in self.segments:
            out = out + seg.value(t)
        if out.ndim == 0:
            return complex(out)
        return out

    def by_label(self, label: str) -> tuple[ControlSegment, ...]:
        return tuple(s for s in self.segments if s.label == label)

    @property
    def t_last(self) -> float:
        return max((s.t_end for s in self.segments), default=0.0)


@dataclass(frozen=True)
class FieldState:
    """Snapshot of the coupled field/atom amplitudes plus norm bookkeeping.

    sigma12/sigma13 are collective amplitudes (sqrt(N)-scaled), so
    dz * sum|.|^2 counts excitations directly.  The conservation ledger is

        injected_norm + initial_norm ==
            photon_norm + magnon_norm + excited_norm + emitted_norm + loss_accum

    and `bookkeeping_residual` returns the left side minus the right side.
    """

    z_grid: np.ndarray
    e_field: np.ndarray
    sigma12: np.ndarray
    sigma13: np.ndarray
    t_now: float
    loss_accum: float
    emitted_norm: float = 0.0
    injected_norm: float = 0.0
    initial_norm: float = 0.0

    def __post_init__(self) -> None:
        n = self.z_grid.size
        for name in ("e_field", "sigma12", "sigma13"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ConfigError(f"{name} must match the grid ({n} points)")
            object.__setattr__(self, name, _readonly(np.asarray(arr, dtype=complex)))
        object.__setattr__(self, "z_grid", _readonly(self.z_grid))
        if self.loss_accum < -PROBABILITY_SLACK:
            raise PhysicsViolation(f"negative accumulated loss {self.loss_accum}")

    @classmethod
    def vacuum(cls, z_grid: np.ndarray, t_now: float = 0.0) -> "FieldState":
        zero = np.zeros(z_grid.size, dtype=complex)
        return cls(z_grid, zero, zero.copy(), zero.copy(), t_now, 0.0)

    @property
    def dz(self) -> float:
        return float(self.z_grid[1] - self.z_grid[0])

    @property
    def photon_norm(self) -> float:
        return float(self.dz * np.sum(np.abs(self.e_field) ** 2))

    @property
    def magnon_norm(self) -> float:
        return float(self.dz * np.sum(np.abs(self.sigma12) ** 2))

    @property
    def excited_norm(self) -> float:
        return float(self.dz * np.sum(np.abs(self.sigma13) ** 2))

    @property
    def input_norm(self) -> float:
        return self.injected_norm + self.initial_norm

    def bookkeeping_residual(self) -> float:
        held = (
            self.photon_norm
            + self.magnon_norm
            + self.excited_norm
            + self.emitted_norm
            + self.loss_accum
        )
        return self.input_norm - held


class NormSplit(NamedTuple):
    photon: float
    magnon: float
    loss: float


def norm_decomposition(state: FieldState, medium: MediumParams) -> NormSplit:
    """Split the tracked excitation into photon / magnon / dissipated parts.

    The in-flight excited-state amplitude is counted with the dissipated
    share: it lives in the decaying channel and outside transients it is
    negligible.  The three components plus the already-emitted norm add up to
    the input norm.
    """
    del medium  # collective scaling makes the split medium-independent
    photon = state.photon_norm
    magnon = state.magnon_norm
    loss = state.loss_accum + state.excited_norm
    for name, val in (("photon", photon), ("magnon", magnon), ("loss", loss)):
        if val < -PROBABILITY_SLACK:
            raise PhysicsViolation(f"negative {name} norm {val}")
    return NormSplit(photon, magnon, loss)


@dataclass(frozen=True)
class SplitterMatrix:
    """2x2 transfer matrix of the hybrid splitter.

    Acts on (magnon_in, photon_in); the matrix is [[t1, r2], [r1, t2]] so
    magnon_out = t1 * magnon_in + r2 * photon_in and
    photon_out = r1 * magnon_in + t2 * photon_in.  Passivity (no gain) is
    checked on construction.
    """

    t1: complex
    r1: complex
    t2: complex
    r2: complex

    def __post_init__(self) -> None:
        for name in ("t1", "r1", "t2", "r2"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        tol = 1e-9
        s1 = abs(self.t1) ** 2 + abs(self.r1) ** 2
        s2 = abs(self.t2) ** 2 + abs(self.r2) ** 2
        if s1 > 1 + tol or s2 > 1 + tol:
            raise PhysicsViolation(
                f"port survival exceeds unity: |t1|^2+|r1|^2={s1:.3e}, "
                f"|t2|^2+|r2|^2={s2:.3e}"
            )
        smax = np.linalg.svd(self.matrix, compute_uv=False)[0]
        if smax > 1 + tol:
            raise PhysicsViolation(f"largest singular value {smax} exceeds unity")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.t1, self.r2], [self.r1, self.t2]], dtype=complex)

    @property
    def port_sums(self) -> tuple[float, float]:
        """Survival probabilities (magnon port, photon port)."""
        return (
            abs(self.t1) ** 2 + abs(self.r1) ** 2,
            abs(self.t2) ** 2 + abs(self.r2) ** 2,
        )


@dataclass(frozen=True)
class CorrelationResult:
    """Correlation observables for one splitter configuration."""

    output_probs: dict[tuple[int, ...], float]
    g2: float | None = None
    g3: float | None = None
    overlap: float | None = None
    phi_rt: float | None = None

    def __post_init__(self) -> None:
        total = 0.0
        for pattern, p in self.output_probs.items():
            if p < -PROBABILITY_SLACK:
                raise PhysicsViolation(f"negative probability {p} for {pattern}")
            total += p
        if abs(total - 1.0) > PROBABILITY_SLACK:
            raise PhysicsViolation(
                f"output probabilities sum to {total}, expected 1 "
                f"(loss outcomes included)"
            )
        if self.overlap is not None and not (
            -PROBABILITY_SLACK <= self.overlap <= 1 + PROBABILITY_SLACK
        ):
            raise PhysicsViolation(f"overlap {self.overlap} outside [0, 1]")


def check_unit_interval(value: float, what: str) -> float:
    """Validate a probability-like scalar, tolerating roundoff-level slack."""
    if not -PROBABILITY_SLACK <= value <= 1.0 + PROBABILITY_SLACK:
        raise PhysicsViolation(f"{what} = {value} outside [0, 1]")
    return float(min(max(value, 0.0), 1.0))
