"""Multi-frequency far-field synthesis for a moving point source.

The far-field value at direction x_hat and wavenumber k is the oscillatory
integral of the retarded phase over the emission interval,

    w(x_hat, k) = integral_{t_min}^{t_max} exp(-i k (x_hat . a(t) + t)) dt,

computed by composite Gauss-Legendre panels whose count tracks the
oscillation number k * (1 + max|a'|) * T.  Negative wavenumbers follow from
conjugate symmetry w(x_hat, -k) = conj(w(x_hat, k)) of real time signals.

The positive band (0, k_max] is discretized at midpoints
k_n = (n - 1/2) dk, dk = k_max / N; these samples feed the spectral module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .trajectory import Direction, TimeInterval, Trajectory

QUAD_TOL = 1e-10
_GL_ORDER = 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


class QuadratureError(RuntimeError):
    """Oscillatory quadrature failed to reach tolerance."""

    def __init__(self, residual: float):
        super().__init__(f"quadrature did not converge; residual {residual:.3e}")
        self.residual = residual


@dataclass(frozen=True)
class FrequencyBand:
    """Positive wavenumber band (0, k_max] sampled at N midpoints."""

    k_max: float
    n: int

    def __post_init__(self):
        if self.k_max <= 0:
            raise ValueError("k_max must be positive")
        if self.n < 1:
            raise ValueError("need at least one frequency sample")

    @property
    def dk(self) -> float:
        return self.k_max / self.n

    def midpoints(self) -> np.ndarray:
        """Sample wavenumbers k_n = (n - 1/2) dk, n = 1..N."""
        return (np.arange(1, self.n + 1) - 0.5) * self.dk

    def nodes(self) -> np.ndarray:
        """Output grid tau_n = n dk where test vectors are evaluated."""
        return np.arange(1, self.n + 1) * self.dk


@dataclass(frozen=True, eq=False)
class FarFieldSamples:
    """Far-field values at the band midpoints for one direction."""

    direction: Direction
    band: FrequencyBand
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.band.n,):
            raise ValueError(f"expected {self.band.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("far-field values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class NoiseSpec:
    """Multiplicative Gaussian noise level and generator seed."""

    delta: float
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("noise level must be nonnegative")


# ---------------------------------------------------------------------------
# Oscillatory quadrature
# ---------------------------------------------------------------------------

def _phase_integral(traj: Trajectory, direction: Direction, k: float,
                    refine: int = 0) -> complex:
    """Gauss-Legendre panel evaluation of the far-field integral.

    Panels are split at velocity breakpoints; within each smooth piece the
    panel count keeps at least _GL_ORDER nodes per phase oscillation, and
    `refine` doublings shrink the panels further.
    """
    iv = traj.interval
    rate = abs(k) * (1.0 + traj.speed_bound()) / (2.0 * math.pi)  # osc per unit time
    bks = [float(b) for b in traj.breakpoints() if iv.t_min < b < iv.t_max]
    bounds = [iv.t_min, *bks, iv.t_max]
    total = 0.0 + 0.0j
    for a, b in zip(bounds[:-1], bounds[1:]):
        panels = max(1, int(math.ceil(rate * (b - a)))) << refine
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mids = 0.5 * (edges[1:] + edges[:-1])
        ts = (mids[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        phases = ts + traj.positions(ts) @ direction.vec
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        total += np.sum(w * np.exp(-1j * k * phases))
    return complex(total)


def far_field_value(traj: Trajectory, direction: Direction, k: float,
                    tol: float = QUAD_TOL) -> complex:
    """Far-field value at wavenumber k (any real k, including 0) to `tol`."""
    prev = _phase_integral(traj, direction, k, refine=0)
    for refine in range(1, 7):
        cur = _phase_integral(traj, direction, k, refine=refine)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise QuadratureError(abs(cur - prev))


def far_field_line_closed_form(speed: float, angle: float, offset,
                               direction: Direction, interval: TimeInterval,
                               k: float) -> complex:
    """Analytic far field of planar straight motion; test oracle only.

    With beta = 1 + speed * cos(theta - angle) the integral reduces to
    T * sinc(k beta T / 2) * exp(-i k beta t_mid) * exp(-i k x_hat . offset),
    which covers the k*beta -> 0 limit without branching.
    """
    offset = np.asarray(offset, dtype=float)
    theta = math.atan2(direction.vec[1], direction.vec[0])
    beta = 1.0 + speed * math.cos(theta - angle)
    T = interval.duration
    arg = k * beta * T / 2.0
    sinc = np.sinc(arg / np.pi)  # sin(x)/x
    phase = -k * (beta * interval.midpoint + float(direction.vec @ offset))
    return complex(T * sinc * np.exp(1j * phase))


def sample_band(traj: Trajectory, direction: Direction,
                band: FrequencyBand) -> FarFieldSamples:
    """Far-field samples at every band midpoint."""
    vals = np.array([far_field_value(traj, direction, k)
                     for k in band.midpoints()])
    return FarFieldSamples(direction, band, vals)


def add_noise(samples: FarFieldSamples, noise: NoiseSpec) -> FarFieldSamples:
    """Multiplicative Gaussian perturbation of real and imaginary parts.

    Each sample w becomes Re(w)(1 + delta g1) + i Im(w)(1 + delta g2) with
    independent standard normal g1, g2 clamped to [-1, 1], drawn per sample
    from a generator seeded by the spec.  delta = 0 returns the input
    values bit-exactly.
    """
    if noise.delta == 0.0:
        return samples
    rng = np.random.default_rng(noise.seed)
    out = np.empty_like(samples.values)
    for i, w in enumerate(samples.values):
        g1, g2 = np.clip(rng.standard_normal(2), -1.0, 1.0)
        out[i] = w.real * (1.0 + noise.delta * g1) \
            + 1j * w.imag * (1.0 + noise.delta * g2)
    return replace(samples, values=out)


# ---------------------------------------------------------------------------
# Far-field CSV interface: header k,re,im, one row per midpoint
# ---------------------------------------------------------------------------

def write_farfield_csv(path, samples: FarFieldSamples) -> None:
    ks = samples.band.midpoints()
    with open(path, "w", encoding="utf-8") as f:
        f.write("k,re,im\n")
        for k, w in zip(ks, samples.values):
            f.write(f"{k:.17g},{w.real:.17g},{w.imag:.17g}\n")


def read_farfield_csv(path, direction: Direction,
                      band: FrequencyBand | None = None) -> FarFieldSamples:
    """Load samples; when `band` is given the file grid must match it."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ks = data[:, 0]
    vals = data[:, 1] + 1j * data[:, 2]
    if band is None:
        dk = 2.0 * ks[0]
        band = FrequencyBand(dk * len(ks), len(ks))
    if len(ks) != band.n or not np.allclose(ks, band.midpoints(), atol=1e-9):
        raise ValueError(f"{path}: frequency grid does not match the band")
    return FarFieldSamples(direction, band, vals)
