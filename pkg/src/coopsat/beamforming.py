"""Hybrid beamforming: DFT-codebook analog stage and regularized
zero-forcing digital stage.

The analog beam for a link is built by scoring every codeword of a 2D
DFT codebook against the channel, least-squares combining the best K,
and projecting the combination back onto the equal-amplitude constraint
of phase-only hardware.  Per satellite, the digital stage inverts the
generalized (beam-space) channel with a diagonal regularizer and a
power scaling that keeps the transmitter at full power.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .channel import ArrayConfig, ChannelVector


@dataclass(frozen=True, eq=False)
class Codebook:
    """Unitary 2D DFT codebook, one codeword per column."""

    matrix: np.ndarray  # (N, N)
    n_x: int
    n_y: int


@dataclass(frozen=True, eq=False)
class AnalogBeamVector:
    """Constant-modulus analog beam plus the codewords it came from."""

    entries: np.ndarray            # (N,), every entry has modulus 1/sqrt(N)
    codeword_indices: tuple[int, ...]
    coefficients: np.ndarray       # (K,) least-squares combination weights


@dataclass(frozen=True, eq=False)
class DigitalMatrix:
    """Digital precoder of one satellite with its regularizer and the
    power scaling applied when the hybrid matrix was formed."""

    matrix: np.ndarray  # (n, n)
    beta: float
    eta: float = 1.0


@dataclass(frozen=True, eq=False)
class HybridMatrix:
    """Transmit beam matrix, one column per served user; columns sum to
    the satellite transmit power."""

    matrix: np.ndarray  # (N, n)


def _dft_unitary(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * math.pi * np.outer(k, k) / n) / math.sqrt(n)


def build_codebook(array: ArrayConfig) -> Codebook:
    """Kronecker product of the 1D DFT codebooks of the two array axes."""
    d = np.kron(_dft_unitary(array.n_x), _dft_unitary(array.n_y))
    return Codebook(matrix=d, n_x=array.n_x, n_y=array.n_y)


def analog_beamform(h, codebook: Codebook, k: int = 4) -> AnalogBeamVector:
    """Codebook-based analog beam for channel ``h``.

    Steps: rank codewords by |h^H d|^2 and keep the top ``k`` (ties go to
    the lower index), least-squares combine them, then force every entry
    to modulus 1/sqrt(N) keeping only the phases.  Entries that combine
    to exactly zero get phase zero.
    """
    if isinstance(h, ChannelVector):
        h = h.entries
    h = np.asarray(h)
    n = codebook.matrix.shape[0]
    if h.shape != (n,):
        raise ValueError(f"channel length {h.shape} does not match codebook size {n}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")
    if not np.any(h):
        raise ValueError("channel vector is zero")

    scores = np.abs(codebook.matrix.conj().T @ h) ** 2
    order = np.argsort(-scores, kind="stable")  # stable: lower index wins ties
    selected = order[:k]

    d_k = codebook.matrix[:, selected]
    coeff = d_k.conj().T @ h          # least squares; columns are orthonormal
    combined = d_k @ coeff

    mod = np.abs(combined)
    phases = np.where(mod > 0.0, combined / np.where(mod > 0.0, mod, 1.0), 1.0)
    entries = phases / math.sqrt(n)
    return AnalogBeamVector(entries=entries,
                            codeword_indices=tuple(int(i) for i in selected),
                            coefficients=coeff)


def generalized_channel(h_matrix: np.ndarray, analog: np.ndarray) -> np.ndarray:
    """Beam-space channel: stacked conjugated channel rows times the
    analog beam columns."""
    h_matrix = np.asarray(h_matrix)
    analog = np.asarray(analog)
    if h_matrix.ndim != 2 or analog.ndim != 2 or h_matrix.shape[1] != analog.shape[0]:
        raise ValueError(
            f"dimension mismatch: {h_matrix.shape} x {analog.shape}")
    return h_matrix @ analog


def regularized_zf(h_tilde: np.ndarray, tx_power_w: float,
                   noise_power: float = 1.0,
                   beta: float | None = None) -> DigitalMatrix:
    """Regularized zero-forcing precoder for a square beam-space channel.

    ``beta=None`` selects n * noise / tx_power (the large-system optimum);
    ``beta=0`` is plain channel inversion, falling back to the
    pseudo-inverse when the channel is singular.  Power scaling is not
    applied here: it belongs to the hybrid combination.
    """
    h_tilde = np.asarray(h_tilde)
    if h_tilde.ndim != 2 or h_tilde.shape[0] != h_tilde.shape[1]:
        raise ValueError(f"beam-space channel must be square, got {h_tilde.shape}")
    n = h_tilde.shape[0]
    if beta is None:
        beta = n * noise_power / tx_power_w
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        f = np.linalg.pinv(h_tilde)
    else:
        gram = h_tilde @ h_tilde.conj().T + beta * np.eye(n)
        # H^H (H H^H + beta I)^-1, using the hermitian structure of the Gram
        f = np.linalg.solve(gram, h_tilde).conj().T
    return DigitalMatrix(matrix=f, beta=float(beta))


def hybrid_combine(analog: np.ndarray, digital, tx_power_w: float) -> HybridMatrix:
    """Cascade the analog and digital stages and rescale so the column
    powers sum exactly to ``tx_power_w``."""
    if isinstance(digital, DigitalMatrix):
        digital = digital.matrix
    raw = np.asarray(analog) @ np.asarray(digital)
    total = float(np.sum(np.abs(raw) ** 2))
    if total == 0.0:
        raise ValueError("hybrid matrix is identically zero")
    return HybridMatrix(matrix=raw * math.sqrt(tx_power_w / total))


def hybrid_from_beamspace(h_tilde: np.ndarray, analog: np.ndarray,
                          tx_power_w: float, noise_power: float = 1.0,
                          beta: float | None = None) -> tuple[HybridMatrix, DigitalMatrix]:
    """Regularized ZF on an already-computed beam-space channel, followed
    by the power-scaled hybrid combination."""
    zf = regularized_zf(h_tilde, tx_power_w, noise_power, beta)
    raw = np.asarray(analog) @ zf.matrix
    total = float(np.sum(np.abs(raw) ** 2))
    if total == 0.0:
        raise ValueError("hybrid matrix is identically zero")
    eta = tx_power_w / total
    hybrid = HybridMatrix(matrix=raw * math.sqrt(eta))
    return hybrid, DigitalMatrix(matrix=zf.matrix, beta=zf.beta, eta=eta)


def hybrid_beamform(h_matrix: np.ndarray, analog: np.ndarray, tx_power_w: float,
                    noise_power: float = 1.0,
                    beta: float | None = None) -> tuple[HybridMatrix, DigitalMatrix]:
    """Full digital pipeline for one satellite: beam-space channel,
    regularized ZF, and power-scaled hybrid matrix."""
    h_tilde = generalized_channel(h_matrix, analog)
    return hybrid_from_beamspace(h_tilde, analog, tx_power_w, noise_power, beta)


def analog_power_scale(analog: np.ndarray, tx_power_w: float) -> HybridMatrix:
    """Analog-only transmit matrix: equal power per beam, full power total."""
    analog = np.asarray(analog)
    n = analog.shape[1] if analog.ndim == 2 else 0
    if n == 0:
        raise ValueError("no beams to scale")
    return HybridMatrix(matrix=analog * math.sqrt(tx_power_w / n))
