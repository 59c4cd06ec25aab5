"""Frequency-domain log-Gabor filter bank and phase-congruency moment maps.

The bank is a grid of n_scales x n_orient transfer functions: a radial
log-Gaussian profile (zero DC by construction) times an angular Gaussian
spread.  Convolution happens in the frequency domain with periodic
boundaries; keypoints near borders are excluded downstream, so wrap-around
never reaches a descriptor patch.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import ParameterError
from .imaging import check_image

# Division guard used in the energy normalization.
EPSILON = 1e-4
# Butterworth low-pass taper suppressing frequencies near Nyquist.
LOWPASS_CUTOFF = 0.45
LOWPASS_ORDER = 15


def fft_workers(threads: int = 0) -> int:
    """Worker count for FFT calls; 0 means auto (all cores)."""
    if threads and threads > 0:
        return threads
    return os.cpu_count() or 1


@dataclass(frozen=True)
class BankParams:
    """Filter-bank tunables.

    `orientation_spread` is the sigma of the angular Gaussian in radians;
    None derives pi / n_orient.  `spread_cutoff` / `spread_gain` control the
    sigmoid frequency-spread weighting of the phase-congruency energy, and
    `noise_k` scales the Rayleigh noise threshold; together they pin down
    the phase-congruency variant in use, so a dumped config fully describes
    the computation.
    """

    n_scales: int = 4
    n_orient: int = 6
    min_wavelength: float = 3.0
    scale_mult: float = 2.1
    sigma_on_f: float = 0.55
    orientation_spread: float | None = None
    noise_k: float = 2.0
    spread_cutoff: float = 0.5
    spread_gain: float = 10.0

    def __post_init__(self):
        if self.n_scales < 1:
            raise ParameterError("n_scales must be >= 1")
        if self.n_orient < 2:
            raise ParameterError("n_orient must be >= 2")
        if self.min_wavelength < 2:
            raise ParameterError("min_wavelength must be >= 2")
        if self.scale_mult <= 1:
            raise ParameterError("scale_mult must be > 1")
        if not 0 < self.sigma_on_f < 1:
            raise ParameterError("sigma_on_f must be in (0, 1)")

    @property
    def angular_sigma(self) -> float:
        if self.orientation_spread is not None:
            return self.orientation_spread
        return np.pi / self.n_orient

    def wavelengths(self) -> np.ndarray:
        return self.min_wavelength * self.scale_mult ** np.arange(self.n_scales)

    def orientation_angles(self) -> np.ndarray:
        """Channel center angles, uniform over [0, pi)."""
        return np.arange(self.n_orient) * np.pi / self.n_orient


@dataclass(frozen=True)
class FilterBank:
    """Transfer functions, shape (n_scales, n_orient, height, width)."""

    transfer: np.ndarray
    params: BankParams

    @property
    def shape(self):
        return self.transfer.shape[2], self.transfer.shape[3]


@dataclass(frozen=True)
class ConvolutionStack:
    """Even/odd quadrature responses and their amplitude, per scale and
    orientation: shape (n_scales, n_orient, height, width)."""

    even: np.ndarray
    odd: np.ndarray
    amplitude: np.ndarray
    params: BankParams


@dataclass(frozen=True)
class PCField:
    """Per-orientation amplitude sums and phase congruency, plus the moment
    maps derived from the congruency's variation with orientation.  The
    maximum moment responds to edges, the minimum moment to corners."""

    a_o: np.ndarray            # (n_orient, h, w) summed amplitudes
    pc_per_orientation: np.ndarray  # (n_orient, h, w) in [0, 1]
    moment_max: np.ndarray     # (h, w)
    moment_min: np.ndarray     # (h, w)

    @property
    def shape(self):
        return self.moment_max.shape


def _frequency_grids(height: int, width: int):
    fy = scipy.fft.fftfreq(height)[:, None]
    fx = scipy.fft.fftfreq(width)[None, :]
    radius = np.hypot(fx, fy)
    radius[0, 0] = 1.0  # avoid log(0) at DC; the DC bin is zeroed later
    theta = np.arctan2(fy, fx)
    return radius, theta


def build_filter_bank(width: int, height: int, params: BankParams | None = None) -> FilterBank:
    """Construct the log-Gabor transfer functions for an image size."""
    params = params or BankParams()
    if width < 16 or height < 16:
        raise ParameterError("filter bank needs width and height >= 16")

    radius, theta = _frequency_grids(height, width)
    lowpass = 1.0 / (1.0 + (radius / LOWPASS_CUTOFF) ** (2 * LOWPASS_ORDER))

    radial = np.empty((params.n_scales, height, width))
    log_sigma2 = 2.0 * np.log(params.sigma_on_f) ** 2
    for s, wavelength in enumerate(params.wavelengths()):
        f0 = 1.0 / wavelength
        radial[s] = np.exp(-np.log(radius / f0) ** 2 / log_sigma2) * lowpass
        radial[s, 0, 0] = 0.0

    sin_t, cos_t = np.sin(theta), np.cos(theta)
    sigma_theta = params.angular_sigma
    angular = np.empty((params.n_orient, height, width))
    for o, angle in enumerate(params.orientation_angles()):
        # Angular distance via sin/cos differences, robust to wrap-around.
        ds = sin_t * np.cos(angle) - cos_t * np.sin(angle)
        dc = cos_t * np.cos(angle) + sin_t * np.sin(angle)
        dtheta = np.abs(np.arctan2(ds, dc))
        angular[o] = np.exp(-(dtheta**2) / (2 * sigma_theta**2))

    transfer = radial[:, None, :, :] * angular[None, :, :, :]
    transfer[:, :, 0, 0] = 0.0
    return FilterBank(transfer=transfer, params=params)


def apply_bank(img, bank: FilterBank, threads: int = 0) -> ConvolutionStack:
    """Filter an image with every bank channel.

    Even (real) and odd (imaginary) responses come from one complex inverse
    transform per channel; amplitude is their quadrature magnitude.
    """
    arr = check_image(img)
    if arr.shape != bank.shape:
        raise ParameterError(
            f"image shape {arr.shape} does not match bank shape {bank.shape}")
    params = bank.params
    workers = fft_workers(threads)
    spectrum = scipy.fft.fft2(arr, workers=workers)

    shape = (params.n_scales, params.n_orient) + arr.shape
    even = np.empty(shape)
    odd = np.empty(shape)
    for s in range(params.n_scales):
        for o in range(params.n_orient):
            response = scipy.fft.ifft2(spectrum * bank.transfer[s, o], workers=workers)
            even[s, o] = response.real
            odd[s, o] = response.imag
    amplitude = np.hypot(even, odd)
    return ConvolutionStack(even=even, odd=odd, amplitude=amplitude, params=params)


def orientation_amplitudes(stack: ConvolutionStack) -> np.ndarray:
    """Sum amplitudes over scales: (n_orient, h, w) channels A_1..A_n."""
    return stack.amplitude.sum(axis=0)


def phase_congruency_moments(stack: ConvolutionStack, params: BankParams | None = None) -> PCField:
    """Per-orientation phase congruency and its moment maps.

    Congruency is the noise-compensated, spread-weighted energy ratio: the
    phase-deviation energy of the scale responses against an estimated
    Rayleigh noise floor (from the smallest scale, scaled by noise_k),
    normalized by the total amplitude with an epsilon guard.  The moments
    come from the classical eigen-analysis of congruency over orientation.
    """
    params = params or stack.params
    n_scales, n_orient = stack.even.shape[0], stack.even.shape[1]
    h, w = stack.even.shape[2], stack.even.shape[3]

    pc = np.empty((n_orient, h, w))
    for o in range(n_orient):
        sum_e = stack.even[:, o].sum(axis=0)
        sum_o = stack.odd[:, o].sum(axis=0)
        sum_amp = stack.amplitude[:, o].sum(axis=0)
        max_amp = stack.amplitude[:, o].max(axis=0)

        x_energy = np.hypot(sum_e, sum_o) + EPSILON
        mean_e = sum_e / x_energy
        mean_o = sum_o / x_energy
        energy = np.zeros((h, w))
        for s in range(n_scales):
            e, od = stack.even[s, o], stack.odd[s, o]
            energy += e * mean_e + od * mean_o - np.abs(e * mean_o - od * mean_e)

        # Rayleigh noise floor estimated from the smallest-scale response.
        tau = np.median(stack.amplitude[0, o]) / np.sqrt(np.log(4.0))
        inv_mult = 1.0 / params.scale_mult
        total_tau = tau * (1 - inv_mult**n_scales) / (1 - inv_mult)
        noise_mean = total_tau * np.sqrt(np.pi / 2)
        noise_sigma = total_tau * np.sqrt((4 - np.pi) / 2)
        threshold = noise_mean + params.noise_k * noise_sigma
        energy = np.maximum(energy - threshold, 0.0)

        # Down-weight responses with a narrow frequency spread.
        spread = (sum_amp / (max_amp + EPSILON) - 1) / max(n_scales - 1, 1)
        weight = 1.0 / (1.0 + np.exp(params.spread_gain * (params.spread_cutoff - spread)))

        pc[o] = weight * energy / (sum_amp + EPSILON)

    angles = params.orientation_angles()
    pc_cos = pc * np.cos(angles)[:, None, None]
    pc_sin = pc * np.sin(angles)[:, None, None]
    a = np.sum(pc_cos**2, axis=0)
    b = 2.0 * np.sum(pc_cos * pc_sin, axis=0)
    c = np.sum(pc_sin**2, axis=0)
    root = np.sqrt(b**2 + (a - c) ** 2)
    moment_max = 0.5 * (c + a + root)
    moment_min = 0.5 * (c + a - root)

    return PCField(
        a_o=orientation_amplitudes(stack),
        pc_per_orientation=pc,
        moment_max=moment_max,
        moment_min=np.maximum(moment_min, 0.0),
    )
