"""Contrast-reduction tone curves and their exact inverses.

Two monotone families model the contrast loss reported with subretinal
stimulation: a power-law curve that keeps black and white fixed while
flattening mid-greys, and a logistic curve whose horizontal shift acts like
a stimulation threshold and lifts the black level. Applying the inverse
curve to an image *before* simulation pre-compensates the loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import Image

# Parameter sets used throughout the figures and the trial protocol.
GAMMA_PRESETS = (1.7, 2.6, 3.5)
GAIN_PRESETS = (10.0, 20.0, 30.0)
DEFAULT_SHIFT = 0.2


@dataclass(frozen=True)
class GammaCurve:
    """y = x**gamma on [0, 1]; endpoints fixed at 0 and 1."""

    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class SigmoidCurve:
    """y = 1 / (1 + exp(-gain * (x - shift))) on [0, 1].

    Output spans [sigmoid(-gain*shift), sigmoid(gain*(1-shift))], so the
    darkest producible level is strictly above 0 and the brightest strictly
    below 1; no renormalization is applied.
    """

    gain: float
    shift: float = DEFAULT_SHIFT

    def __post_init__(self):
        if self.gain <= 0:
            raise ValueError(f"gain must be positive, got {self.gain}")
        if not 0.0 <= self.shift <= 1.0:
            raise ValueError(f"shift must lie in [0, 1], got {self.shift}")

    @property
    def floor(self) -> float:
        """Darkest achievable output."""
        return float(_logistic(-self.gain * self.shift))

    @property
    def ceiling(self) -> float:
        """Brightest achievable output."""
        return float(_logistic(self.gain * (1.0 - self.shift)))


ToneCurve = GammaCurve | SigmoidCurve

# Sigmoid scalar math runs in extended precision: near saturation the curve is
# so flat that a float64 return value cannot carry enough information for the
# inverse to reconstruct the input to 1e-9 (at gain 30 the double-precision
# resolution limit near v=1 is ~1e-7). x86 long double restores the headroom.
_WIDE = np.longdouble


def _logistic(t):
    return 1.0 / (1.0 + np.exp(-np.asarray(t, dtype=_WIDE)))


def _logit(p):
    return np.log(p) - np.log1p(-p)


def gamma_apply(v, c: GammaCurve):
    """v**gamma. Accepts scalars or arrays in [0, 1]."""
    return np.power(v, c.gamma)


def gamma_invert(v, c: GammaCurve):
    """Exact inverse of gamma_apply: v**(1/gamma)."""
    return np.power(v, 1.0 / c.gamma)


def sigmoid_apply(v, c: SigmoidCurve):
    """Logistic transform of v. Accepts scalars or arrays in [0, 1].

    Returns extended-precision values; image-level wrappers demote to float64.
    """
    return _logistic(c.gain * (np.asarray(v, dtype=_WIDE) - c.shift))


def sigmoid_invert(v, c: SigmoidCurve):
    """Inverse logistic transform, total on [0, 1].

    Input is clamped to the curve's achievable range before inversion and the
    result is clamped to [0, 1], so values outside the range (e.g. true black
    in a photograph) map to the nearest representable input.
    """
    wide = _WIDE(c.gain)
    lo = _logistic(-wide * _WIDE(c.shift))
    hi = _logistic(wide * (1.0 - _WIDE(c.shift)))
    v = np.clip(np.asarray(v, dtype=_WIDE), lo, hi)
    out = np.clip(_WIDE(c.shift) + _logit(v) / wide, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def curve_apply(v, curve: ToneCurve):
    """Forward transform of a scalar or array under either curve family."""
    if isinstance(curve, GammaCurve):
        return gamma_apply(v, curve)
    return sigmoid_apply(v, curve)


def curve_invert(v, curve: ToneCurve):
    """Inverse transform of a scalar or array under either curve family."""
    if isinstance(curve, GammaCurve):
        return gamma_invert(v, curve)
    return sigmoid_invert(v, curve)


def apply_curve(img: Image, curve: ToneCurve) -> Image:
    """Pointwise forward transform of an image."""
    return Image(np.clip(curve_apply(img.pixels, curve), 0.0, 1.0))


def apply_inverse(img: Image, curve: ToneCurve) -> Image:
    """Pointwise inverse transform of an image (pre-emptive correction)."""
    return Image(np.clip(curve_invert(img.pixels, curve), 0.0, 1.0))


def residual_contrast(
    curve: ToneCurve, mid: float = 0.5, amplitude: float = 0.25
) -> float:
    """Michelson contrast retained by a curve around a mid-grey probe.

    Reports (T(m+a) - T(m-a)) / (T(m+a) + T(m-a)) for probe midpoint m and
    half-swing a. A diagnostic for comparing curves, not a calibrated match
    to any published contrast figure (the metric behind those is unstated).
    """
    lo = float(curve_apply(mid - amplitude, curve))
    hi = float(curve_apply(mid + amplitude, curve))
    return (hi - lo) / (hi + lo)
