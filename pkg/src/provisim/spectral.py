"""Resolution reduction: radial low-pass filtering in the discrete Fourier domain.

The filter models the sampling limit of a photovoltaic implant. Its profile is
flat out to the cutoff radius and falls off as a raised cosine (Tukey taper)
over the apodization band beyond it; the taper stands in for the ~30% acuity
gain from fixational eye movements. Spatial frequency is measured in cycles
per image along each axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import Image

# Equivalent pixel pitch of 20/20 vision: 288 um per degree / 30 cpd / 2 samples per cycle.
NORMAL_VISION_PITCH_UM = 288.0 / 30.0 / 2.0

PRIMA_IMPLANT_WIDTH_UM = 2000.0
DEFAULT_TAPER = 0.3


@dataclass(frozen=True)
class SpectralFilter:
    """Radial frequency mask: pass to `cutoff_cycles`, taper to `cutoff*(1+taper)`."""

    cutoff_cycles: float
    taper: float = DEFAULT_TAPER

    def __post_init__(self):
        if self.cutoff_cycles <= 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff_cycles}")
        if not 0.0 <= self.taper <= 1.0:
            raise ValueError(f"taper must lie in [0, 1], got {self.taper}")

    @property
    def stop_cycles(self) -> float:
        """Radius beyond which the mask is exactly zero."""
        return self.cutoff_cycles * (1.0 + self.taper)


@dataclass(frozen=True)
class ImplantPreset:
    """Geometry of a square photovoltaic array, derived from its pixel pitch."""

    pixel_pitch_um: float
    implant_width_um: float = PRIMA_IMPLANT_WIDTH_UM

    @property
    def grid_extent(self) -> float:
        """Implant pixels across the field of view."""
        return self.implant_width_um / self.pixel_pitch_um

    @property
    def cutoff_cycles(self) -> float:
        """Nyquist limit of the array: two pixels per cycle."""
        return self.grid_extent / 2.0

    def spectral_filter(self, taper: float = DEFAULT_TAPER) -> SpectralFilter:
        return SpectralFilter(self.cutoff_cycles, taper)


def preset_from_pitch(
    pixel_pitch_um: float, implant_width_um: float = PRIMA_IMPLANT_WIDTH_UM
) -> ImplantPreset:
    """Build an ImplantPreset from a pixel pitch in micrometers."""
    if pixel_pitch_um <= 0:
        raise ValueError(f"pixel pitch must be positive, got {pixel_pitch_um}")
    if pixel_pitch_um > implant_width_um:
        raise ValueError(
            f"pixel pitch {pixel_pitch_um} exceeds implant width {implant_width_um}"
        )
    return ImplantPreset(pixel_pitch_um, implant_width_um)


def snellen_equivalent(pixel_pitch_um: float) -> float:
    """Snellen denominator (20/x) associated with a sampling pitch."""
    if pixel_pitch_um <= 0:
        raise ValueError(f"pixel pitch must be positive, got {pixel_pitch_um}")
    return 20.0 * pixel_pitch_um / NORMAL_VISION_PITCH_UM


def tukey_weight(r, f: SpectralFilter):
    """Mask value at radial frequency r (cycles/image). Accepts scalars or arrays.

    1 inside the cutoff; raised-cosine from the cutoff R to R*(1+taper); 0 beyond.
    A zero taper degenerates to a hard cutoff at R.
    """
    r = np.asarray(r, dtype=np.float64)
    cutoff = f.cutoff_cycles
    stop = f.stop_cycles
    out = np.zeros_like(r)
    out[r <= cutoff] = 1.0
    if f.taper > 0.0:
        band = (r > cutoff) & (r <= stop)
        out[band] = 0.5 * (1.0 + np.cos(np.pi * (r[band] - cutoff) / (f.taper * cutoff)))
    if out.ndim == 0:
        return float(out)
    return out


def frequency_radii(height: int, width: int) -> np.ndarray:
    """Radial frequency in cycles/image for every FFT bin of an HxW raster.

    Each axis contributes its integer cycle count, so the window is circular
    in index-normalized frequency regardless of aspect ratio.
    """
    fy = np.fft.fftfreq(height) * height
    fx = np.fft.fftfreq(width) * width
    return np.hypot(fy[:, None], fx[None, :])


def filter_mask(height: int, width: int, f: SpectralFilter) -> np.ndarray:
    """The full 2-D frequency-domain mask for an HxW raster."""
    return tukey_weight(frequency_radii(height, width), f)


def lowpass(img: Image, f: SpectralFilter) -> Image:
    """Apply the radial low-pass in the Fourier domain.

    Forward FFT, multiply by the Tukey mask, inverse FFT, discard the
    imaginary residue and clamp to [0, 1]. The DC coefficient carries
    mask weight 1, so mean luminance survives unless clamping bites.
    Ringing near sharp edges is intrinsic to the mask and left in place.
    """
    spectrum = np.fft.fft2(img.pixels)
    spectrum *= filter_mask(img.height, img.width, f)
    restored = np.fft.ifft2(spectrum).real
    return Image(np.clip(restored, 0.0, 1.0))


def lowpass_unclamped(img: Image, f: SpectralFilter) -> np.ndarray:
    """Same transform as `lowpass` but returning the raw float array.

    Exposed for analysis and tests that need to observe the pre-clamp signal.
    """
    spectrum = np.fft.fft2(img.pixels)
    spectrum *= filter_mask(img.height, img.width, f)
    return np.fft.ifft2(spectrum).real
