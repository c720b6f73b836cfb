"""Picard-series indicator functions over the operator eigensystem.

A probe point y enters through the discretized test vector on the output
grid tau_n = n dk,

    phi_n(y) = (i / (T tau_n)) (e^{-i tau_n t_max} - e^{-i tau_n t_min})
               * e^{-i tau_n x_hat . y},

equivalently sinc(tau_n T / 2) e^{-i tau_n (t_mid + x_hat . y)}.  The Picard
series sum_n |<phi, psi_n>|^2 / lambda_n stays bounded exactly when y lies
in the recoverable strip of an observable direction; its reciprocal W is
the plotted indicator.  For several directions the per-direction series
are summed, after dropping directions whose series minimum over the search
grid exceeds a threshold (those behave as non-observable).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import FrequencyBand
from .spectral import Spectrum
from .trajectory import Direction, TimeInterval

# Default cutoff on min-over-grid Picard sums beyond which a direction is
# treated as non-observable and removed from multi-direction indicators.
DEFAULT_THRESHOLD = 3.5e3


@dataclass(frozen=True, eq=False)
class TestVector:
    """Discretized range-test profile of a probe point for one direction."""

    entries: np.ndarray
    direction: Direction
    point: np.ndarray
    interval: TimeInterval


@dataclass(frozen=True, eq=False)
class PicardResult:
    """Total Picard sum and the per-eigenpair contributions."""

    total: float
    terms: np.ndarray


def _entries_for_projections(projections: np.ndarray, interval: TimeInterval,
                             band: FrequencyBand) -> np.ndarray:
    """Test-vector entries for an array of values x_hat . y, shape (N, P)."""
    tau = band.nodes()
    T = interval.duration
    amp = np.sinc(tau * T / 2.0 / np.pi)  # sin(x)/x, exact 1 at tau = 0
    phase = np.exp(-1j * tau[:, None]
                   * (interval.midpoint + projections[None, :]))
    return amp[:, None] * phase


def test_vector(direction: Direction, y, interval: TimeInterval,
                band: FrequencyBand) -> TestVector:
    """Test vector of probe point y; depends on y only through x_hat . y."""
    y = np.asarray(y, dtype=float)
    proj = np.array([float(direction.vec @ y)])
    entries = _entries_for_projections(proj, interval, band)[:, 0]
    return TestVector(entries, direction, y, interval)


def picard_sum(spectrum: Spectrum, phi: TestVector | np.ndarray) -> PicardResult:
    """Series terms |<phi, psi_n>|^2 / lambda_n with floored eigenvalues.

    The inner product is conjugate-linear in the second argument:
    <u, v> = sum_m u_m conj(v_m).
    """
    entries = phi.entries if isinstance(phi, TestVector) else np.asarray(phi)
    coef = spectrum.eigenvectors.conj().T @ entries
    terms = np.abs(coef) ** 2 / spectrum.floored_eigenvalues()
    return PicardResult(float(np.sum(terms)), terms)


def picard_sums_grid(spectrum: Spectrum, direction: Direction,
                     points: np.ndarray, interval: TimeInterval,
                     band: FrequencyBand) -> np.ndarray:
    """Vectorized Picard sums over many probe points, shape (P,)."""
    points = np.asarray(points, dtype=float)
    proj = points @ direction.vec
    phis = _entries_for_projections(proj, interval, band)
    coef = spectrum.eigenvectors.conj().T @ phis        # (N, P)
    return (np.abs(coef) ** 2
            / spectrum.floored_eigenvalues()[:, None]).sum(axis=0)


def indicator_single(spectrum: Spectrum, direction: Direction, y,
                     interval: TimeInterval, band: FrequencyBand) -> float:
    """Single-direction indicator W(y), the reciprocal Picard sum."""
    total = picard_sum(spectrum, test_vector(direction, y, interval, band)).total
    return 1.0 / total if total > 0.0 else float("inf")


def direction_filter(grid_sums, threshold: float = DEFAULT_THRESHOLD) -> list[int]:
    """Indices of directions kept by the min-over-grid truncation rule.

    `grid_sums` holds one Picard-sum array per direction, all evaluated on
    the shared search grid; direction j is dropped iff min(grid_sums[j])
    exceeds the threshold.
    """
    kept = [j for j, sums in enumerate(grid_sums)
            if float(np.min(sums)) <= threshold]
    return kept


def indicator_multi(spectra, directions, y, interval: TimeInterval,
                    band: FrequencyBand) -> float:
    """Multi-direction indicator: reciprocal of the summed Picard series.

    Callers filter non-observable directions first (see direction_filter);
    passing an empty direction set is an error.
    """
    if len(directions) == 0:
        raise ValueError("no directions left to combine")
    total = 0.0
    for spec, d in zip(spectra, directions):
        total += picard_sum(spec, test_vector(d, y, interval, band)).total
    return 1.0 / total if total > 0.0 else float("inf")


def filtered_field_values(spectra, directions, points: np.ndarray,
                          interval: TimeInterval, band: FrequencyBand,
                          threshold: float = DEFAULT_THRESHOLD):
    """Grid values of the truncated multi-direction indicator.

    Returns (values, kept_indices); `values` is None when every direction
    is dropped by the filter.
    """
    grids = [picard_sums_grid(spec, d, points, interval, band)
             for spec, d in zip(spectra, directions)]
    kept = direction_filter(grids, threshold)
    if not kept:
        return None, kept
    total = np.sum([grids[j] for j in kept], axis=0)
    with np.errstate(divide="ignore"):
        values = np.where(total > 0.0, 1.0 / total, np.inf)
    return values, kept
