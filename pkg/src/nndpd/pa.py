"""Memoryless power-amplifier models.

Two models share the same parameter container:

* a soft-saturation nonlinearity with separate amplitude (AM/AM) and
  phase (AM/PM) characteristics,

      f_rho(u) = G u / (1 + |G u / v_sat|^(2 p))^(1 / (2 p))
      f_phi(u) = a u^q / (1 + (u / b)^q)        [degrees]

* an ideal limiter, perfectly linear up to the same saturation voltage:
  magnitude min(G |x|, v_sat), phase untouched. It serves as the
  best-case reference a predistorter can aim for.

Phase shifts are expressed in degrees throughout and converted to
radians only where they rotate complex samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import NumericalError
from .validation import check_amplitudes, check_complex_signal

# Gain compression targeted by the 1 dB compression point.
_COMPRESSION_1DB = 10.0 ** (-1.0 / 20.0)


@dataclass(frozen=True)
class RappParams:
    """Parameters of the soft-saturation PA model.

    Attributes
    ----------
    g:
        Linear gain G (dimensionless).
    p:
        Knee factor controlling how sharply the AM/AM curve saturates.
    v_sat:
        Saturation voltage in volts; f_rho never exceeds it.
    a, b, q:
        Phase-shift fitting parameters; the AM/PM curve rises from 0
        toward the asymptote a * b**q degrees with half value at u = b.
    """

    g: float = 16.0
    p: float = 1.1
    v_sat: float = 1.9
    a: float = -345.0
    b: float = 0.17
    q: float = 4.0

    def __post_init__(self):
        for name in ("g", "p", "v_sat", "b", "q"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not np.isfinite(self.a):
            raise ValueError(f"a must be finite, got {self.a!r}")


def rapp_am_am(u, params: RappParams = RappParams()) -> np.ndarray | float:
    """Amplitude characteristic f_rho(u) of the soft-saturation PA.

    Parameters
    ----------
    u:
        Input amplitude(s) in volts, nonnegative.
    params:
        PA parameters.

    Returns
    -------
    Output amplitude(s); 0 <= f_rho(u) <= min(G u, v_sat), strictly
    increasing in u.
    """
    u = check_amplitudes(u)
    drive = params.g * u / params.v_sat
    out = params.g * u / (1.0 + drive ** (2.0 * params.p)) ** (1.0 / (2.0 * params.p))
    return float(out) if np.ndim(out) == 0 else out


def rapp_am_pm(u, params: RappParams = RappParams()) -> np.ndarray | float:
    """Phase characteristic f_phi(u) of the soft-saturation PA, in degrees.

    Monotone from 0 at u = 0 toward the asymptote a * b**q.
    """
    u = check_amplitudes(u)
    ratio_q = (u / params.b) ** params.q
    out = params.a * u ** params.q / (1.0 + ratio_q)
    return float(out) if np.ndim(out) == 0 else out


def apply_pa(signal, params: RappParams = RappParams()) -> np.ndarray:
    """Pass a complex baseband signal through the soft-saturation PA.

    Per sample: output magnitude f_rho(|x|), output phase
    arg(x) + f_phi(|x|) with the phase shift converted from degrees.
    Zero samples map to zero (arg(0) taken as 0).
    """
    signal = check_complex_signal(np.asarray(signal), "signal")
    amplitude = np.abs(signal)
    magnitude = rapp_am_am(amplitude, params)
    phase = np.angle(signal) + np.deg2rad(rapp_am_pm(amplitude, params))
    return magnitude * np.exp(1j * phase)


def apply_ideal_limiter(signal, params: RappParams = RappParams()) -> np.ndarray:
    """Pass a signal through the ideal limiter reference.

    Magnitude min(G |x|, v_sat), phase unchanged: exactly linear with
    gain G wherever |x| <= v_sat / G.
    """
    signal = check_complex_signal(np.asarray(signal), "signal")
    amplitude = np.abs(signal)
    magnitude = np.minimum(params.g * amplitude, params.v_sat)
    return magnitude * np.exp(1j * np.angle(signal))


def p1db_input_closed_form(params: RappParams = RappParams()) -> float:
    """Closed-form input 1 dB compression power in watts.

    u* = (v_sat / G) * (10^(p/10) - 1)^(1 / (2 p)), returned squared.
    Kept separate from the bisection solver so the two routes can be
    cross-checked against each other.
    """
    u_star = (params.v_sat / params.g) * (10.0 ** (params.p / 10.0) - 1.0) ** (
        1.0 / (2.0 * params.p)
    )
    return u_star * u_star


def p1db_input(params: RappParams = RappParams(), rel_tol: float = 1e-12) -> float:
    """Input-referred 1 dB compression power of the soft-saturation PA.

    Solves f_rho(u) / (G u) = 10^(-1/20) for the input amplitude u* by
    bisection and returns u*^2 in watts. The normalized gain is strictly
    decreasing in u, so the root is unique and the result does not
    depend on the bracket (the default spans [1e-12, 10 v_sat / G]).
    """
    target = _COMPRESSION_1DB

    def residual(u: float) -> float:
        drive = params.g * u / params.v_sat
        return (1.0 + drive ** (2.0 * params.p)) ** (-1.0 / (2.0 * params.p)) - target

    lo = 1e-12
    hi = 10.0 * params.v_sat / params.g
    if not (residual(lo) > 0.0 > residual(hi)):
        raise NumericalError("compression-point bracket does not enclose a sign change")
    # ~90 halvings take any bracket to relative width 1e-12 with margin.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * mid:
            u_star = 0.5 * (lo + hi)
            return u_star * u_star
    raise NumericalError("compression-point bisection failed to converge")


class RappPowerAmplifier(BaseEstimator, TransformerMixin):
    """Stateless transformer view of the soft-saturation PA.

    fit is a no-op; transform applies the PA sample-wise to a complex
    baseband signal. Parameters follow the estimator convention (stored
    as given, validated at use time via RappParams).
    """

    def __init__(self, g: float = 16.0, p: float = 1.1, v_sat: float = 1.9,
                 a: float = -345.0, b: float = 0.17, q: float = 4.0):
        self.g = g
        self.p = p
        self.v_sat = v_sat
        self.a = a
        self.b = b
        self.q = q

    def rapp_params(self) -> RappParams:
        return RappParams(g=self.g, p=self.p, v_sat=self.v_sat,
                          a=self.a, b=self.b, q=self.q)

    def fit(self, X, y=None):
        self.rapp_params()
        return self

    def transform(self, X) -> np.ndarray:
        return apply_pa(X, self.rapp_params())

    def p1db_input(self) -> float:
        return p1db_input(self.rapp_params())


class IdealLimiter(BaseEstimator, TransformerMixin):
    """Stateless transformer view of the ideal limiter reference."""

    def __init__(self, g: float = 16.0, v_sat: float = 1.9):
        self.g = g
        self.v_sat = v_sat

    def fit(self, X, y=None):
        RappParams(g=self.g, v_sat=self.v_sat)
        return self

    def transform(self, X) -> np.ndarray:
        return apply_ideal_limiter(X, RappParams(g=self.g, v_sat=self.v_sat))
