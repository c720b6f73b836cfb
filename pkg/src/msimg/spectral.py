"""Discrete far-field operator and its positive spectral surrogate.

The banded far-field data generate a frequency-convolution operator whose
midpoint discretization is the N x N complex Toeplitz matrix

    F[n, m] = w((n - m + 1/2) dk) * dk,

with negative arguments supplied by conjugate symmetry.  Range tests need
the positive operator F# = |Re F| + |Im F| built by spectral calculus on
the Hermitian parts (mode "rigorous").  Mode "paper" instead diagonalizes
F itself and sets lambda_n = |Re l_n| + |Im l_n| while keeping F's
eigenvectors; the two agree when F is normal, which the Toeplitz F need
not be, so both are provided and may be compared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .forward import FarFieldSamples, FrequencyBand
from .trajectory import Direction

MODE_RIGOROUS = "rigorous"
MODE_PAPER = "paper"

# Relative floor applied to eigenvalues before they divide Picard terms.
EIGENVALUE_FLOOR = 1e-14


class DiagonalizationError(RuntimeError):
    """Eigen decomposition unavailable or numerically defective."""


@dataclass(frozen=True, eq=False)
class FarFieldOperator:
    """Toeplitz discretization of the far-field operator for one direction."""

    matrix: np.ndarray
    band: FrequencyBand
    direction: Direction


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (descending) and matching eigenvectors of F#.

    In rigorous mode the eigenvalues are the nonnegative spectrum of the
    Hermitian F# and the eigenvector columns are orthonormal.  In paper
    mode the vectors are the unit-norm eigenvectors of F itself and need
    not be orthogonal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mode: str

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def floored_eigenvalues(self, rel_floor: float = EIGENVALUE_FLOOR) -> np.ndarray:
        """Eigenvalues with a relative floor so Picard terms stay finite."""
        lam_max = float(np.max(self.eigenvalues, initial=0.0))
        floor = rel_floor * lam_max
        if floor <= 0.0:
            floor = np.finfo(float).tiny
        return np.maximum(self.eigenvalues, floor)


def build_operator(samples: FarFieldSamples) -> FarFieldOperator:
    """Assemble the N x N Toeplitz matrix from the band samples.

    Column m of the first row holds conj(w(k_{m-1})); row n of the first
    column holds w(k_n); all diagonals are constant by construction.
    """
    w = samples.values
    dk = samples.band.dk
    first_col = w * dk
    first_row = np.concatenate(([w[0]], np.conj(w[:-1]))) * dk
    matrix = scipy.linalg.toeplitz(first_col, first_row)
    return FarFieldOperator(matrix, samples.band, samples.direction)


def hermitian_parts(op: FarFieldOperator | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian matrices (Re F, Im F) with F = Re F + i Im F exactly."""
    F = op.matrix if isinstance(op, FarFieldOperator) else np.asarray(op)
    Fh = F.conj().T
    return 0.5 * (F + Fh), (F - Fh) / 2j


def hermitian_abs(H: np.ndarray) -> np.ndarray:
    """Spectral absolute value Q |L| Q* of a Hermitian matrix."""
    H = np.asarray(H)
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise ValueError("matrix is not Hermitian")
    lam, Q = np.linalg.eigh(H)
    A = (Q * np.abs(lam)) @ Q.conj().T
    return 0.5 * (A + A.conj().T)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first significant component of each column real positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        top = mags.max()
        if top == 0.0:
            continue
        i = int(np.argmax(mags > 1e-12 * top))
        ph = col[i] / abs(col[i])
        out[:, j] = col * np.conj(ph)
    return out


def f_sharp_spectrum(op: FarFieldOperator, mode: str = MODE_RIGOROUS) -> Spectrum:
    """Eigensystem of the positive operator in the requested mode.

    "rigorous": Hermitian eigensystem of |Re F| + |Im F|.
    "paper": eigensystem of F with lambda_n = |Re l_n| + |Im l_n|; raises
    DiagonalizationError when the eigenvector basis of F is numerically
    defective.
    """
    F = op.matrix
    if mode == MODE_RIGOROUS:
        re, im = hermitian_parts(op)
        f_sharp = hermitian_abs(re) + hermitian_abs(im)
        lam, vecs = np.linalg.eigh(f_sharp)
    elif mode == MODE_PAPER:
        lam_c, vecs = np.linalg.eig(F)
        if np.linalg.cond(vecs) > 1e12:
            raise DiagonalizationError(
                "paper mode: eigenvector basis of the operator matrix is "
                "numerically defective")
        vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
        lam = np.abs(lam_c.real) + np.abs(lam_c.imag)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    order = np.argsort(-lam, kind="stable")
    return Spectrum(lam[order], _fix_phases(vecs[:, order]), mode)


# ---------------------------------------------------------------------------
# Optional spectrum dump
# ---------------------------------------------------------------------------

def write_spectrum_csv(path_eigenvalues, spectrum: Spectrum,
                       path_eigenvectors=None) -> None:
    """Dump `n,lambda` rows, plus `n,m,re,im` eigenvector rows if asked."""
    with open(path_eigenvalues, "w", encoding="utf-8") as f:
        f.write("n,lambda\n")
        for i, lam in enumerate(spectrum.eigenvalues, start=1):
            f.write(f"{i},{lam:.17g}\n")
    if path_eigenvectors is not None:
        with open(path_eigenvectors, "w", encoding="utf-8") as f:
            f.write("n,m,re,im\n")
            for n in range(spectrum.n):
                for m in range(spectrum.n):
                    v = spectrum.eigenvectors[m, n]
                    f.write(f"{n + 1},{m + 1},{v.real:.17g},{v.imag:.17g}\n")
