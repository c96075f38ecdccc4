"""SNRs, capacities and secrecy rates, for a single eavesdropper and for
colluding eavesdroppers (joint MRC over M single-antenna Eves)."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Beamformer:
    "Transmit weight vector with its power budget (watts)."

    w: np.ndarray
    p_max_w: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        if not self.p_max_w > 0:
            raise ValueError("p_max_w must be > 0")
        if np.linalg.norm(w) ** 2 > self.p_max_w + 1e-12:
            raise ValueError("beamformer violates the power budget "
                             f"(||w||^2 = {np.linalg.norm(w) ** 2:.6g} > "
                             f"{self.p_max_w:.6g})")
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class SecrecyResult:
    """Capacities and secrecy rate in bps/Hz.

    r_s is the clamped rate max(c_b - c_e, 0); r_s_unclamped keeps the sign
    for use inside the optimizer.
    """

    c_b: float
    c_e: float
    r_s: float
    r_s_unclamped: float


def snr(h: np.ndarray, w: Beamformer, sigma2: float) -> float:
    "Receive SNR |h^H w|^2 / sigma2."
    if not sigma2 > 0:
        raise ValueError("sigma2 must be > 0")
    f = np.vdot(h, w.w)  # h^H w
    return float(abs(f) ** 2 / sigma2)


def _result(snr_b: float, snr_e: float) -> SecrecyResult:
    c_b = float(np.log2(1.0 + snr_b))
    c_e = float(np.log2(1.0 + snr_e))
    unclamped = c_b - c_e
    return SecrecyResult(c_b=c_b, c_e=c_e, r_s=max(unclamped, 0.0),
                         r_s_unclamped=unclamped)


def secrecy_rate_single(h_b, h_e, w: Beamformer, sigma2) -> SecrecyResult:
    "Secrecy rate [C_B - C_E]^+ against a single eavesdropper."
    return _result(snr(h_b, w, sigma2), snr(h_e, w, sigma2))


def secrecy_rate_colluding(h_b, h_e_matrix, w: Beamformer,
                           sigma2) -> SecrecyResult:
    """Secrecy rate against M colluding single-antenna eavesdroppers.

    h_e_matrix is N x M with one column per Eve; the colluders perform MRC,
    so their post-combining SNR is sum_i |h_{E,i}^H w|^2 / sigma2.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be > 0")
    h_e_matrix = np.asarray(h_e_matrix, dtype=complex)
    if h_e_matrix.ndim == 1:
        h_e_matrix = h_e_matrix[:, None]
    if h_e_matrix.shape[1] < 1:
        raise ValueError("need at least one eavesdropper column")
    f_e = h_e_matrix.conj().T @ w.w  # per-Eve h^H w
    snr_e = float(np.sum(np.abs(f_e) ** 2) / sigma2)
    return _result(snr(h_b, w, sigma2), snr_e)
