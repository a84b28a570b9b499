"""Dispersive readout: cavity photon number, dephasing rates and the Gaussian POVM.

Rates and frequencies cross this module's boundary as ``value/2pi`` in Hz,
the way they are quoted in the lab; conversions to angular units happen
inside the functions that need them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

TWO_PI = 2 * math.pi

# Readout amplitude calibration anchor: A^2 = 0.25 gives nbar = 5.16.
DEFAULT_PHOTON_GAIN = 5.16 / 0.25


class ReadoutModelError(ValueError):
    pass


@dataclass(frozen=True)
class ReadoutParams:
    """Dispersive readout parameters of one qubit, all ``/2pi`` in Hz.

    ``photon_gain`` maps squared drive amplitude ``A**2`` to steady-state
    intracavity photon number.
    """

    chi: float
    kappa: float
    g: float | None = None
    detuning: float | None = None
    photon_gain: float = DEFAULT_PHOTON_GAIN

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not math.isfinite(self.chi):
            raise ValueError("chi must be finite")

    def nbar(self, amplitude: float) -> float:
        return self.photon_gain * amplitude**2


def dispersive_shift(g: float, delta: float, eta: float) -> float:
    """Transmon dispersive shift ``g^2 eta / (Delta (Delta + eta))``."""
    if delta == 0 or delta + eta == 0:
        raise ReadoutModelError("dispersive shift is singular at Delta = 0 or Delta = -eta")
    return g * g * eta / (delta * (delta + eta))


def stark_shift(chi: float, nbar: float) -> float:
    if nbar < 0:
        raise ValueError("photon number must be non-negative")
    return 2.0 * chi * nbar


def dephasing_rate_continuous(chi: float, kappa: float, nbar) -> float:
    """Measurement-induced dephasing ``2 kappa chi^2 n / (chi^2 + (kappa/2)^2)``.

    Works elementwise on arrays of ``nbar``.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return 2.0 * kappa * chi**2 * np.asarray(nbar) / (chi**2 + (kappa / 2) ** 2)


def photon_number(t, n_ss: float, kappa: float, t_off: float):
    """Intracavity photons for a square drive switched off at ``t_off``.

    ``kappa`` is the linewidth ``/2pi`` in Hz; the ring-up and decay use the
    angular rate ``2 pi kappa``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    k = TWO_PI * kappa
    on = n_ss * (1.0 - np.exp(-k * np.minimum(t, t_off)))
    n = np.where(t <= t_off, on, on * np.exp(-k * np.maximum(t - t_off, 0.0)))
    return float(n) if n.ndim == 0 else n


def photon_threshold_time(n_ss: float, kappa: float, t_off: float, threshold: float) -> float:
    """First time after ``t_off`` at which the photon number drops below ``threshold``."""
    n_off = photon_number(t_off, n_ss, kappa, t_off)
    if n_off <= threshold:
        return t_off
    return t_off + math.log(n_off / threshold) / (TWO_PI * kappa)


def average_dephasing_window(n_ss: float, readout: ReadoutParams, t_pulse: float, t_window: float) -> float:
    """Time-averaged dephasing rate ``/2pi`` over ``[0, t_window]`` for a ``t_pulse`` drive."""
    if t_window < t_pulse or t_window <= 0:
        raise ValueError("window must be positive and at least as long as the pulse")
    if n_ss == 0:
        return 0.0

    def rate(t):
        return float(dephasing_rate_continuous(readout.chi, readout.kappa, photon_number(t, n_ss, readout.kappa, t_pulse)))

    total = 0.0
    for a, b in ((0.0, t_pulse), (t_pulse, t_window)):
        if b <= a:
            continue
        val, err = integrate.quad(rate, a, b, epsrel=1e-10, epsabs=0.0, limit=200)
        if err > 1e-6 * max(abs(val), 1e-300):
            raise ReadoutModelError(f"quadrature did not converge (estimate {val}, error {err})")
        total += val
    return total / t_window


def dephasing_from_tomography(rho01_m: complex, rho01_ref: complex, t_m: float) -> float:
    """Average dephasing ``/2pi`` in Hz from the loss of qubit coherence over ``t_m``.

    A coherence ratio above one (possible from shot noise) yields a negative
    rate and a ``RuntimeWarning``.
    """
    if t_m <= 0:
        raise ValueError("measurement time must be positive")
    ref = abs(rho01_ref)
    if ref == 0:
        raise ValueError("reference coherence must be non-zero")
    m = abs(rho01_m)
    if m == 0:
        raise ReadoutModelError("coherence fully lost: dephasing rate is infinite")
    ratio = m / ref
    if ratio > 1:
        warnings.warn("coherence ratio exceeds one; returning a negative dephasing rate", RuntimeWarning, stacklevel=2)
    return -math.log(ratio) / t_m / TWO_PI


@dataclass(frozen=True)
class PointerTrace:
    times: np.ndarray
    alpha_g: np.ndarray
    alpha_e: np.ndarray

    @property
    def separation(self) -> np.ndarray:
        return self.alpha_e - self.alpha_g


def pointer_amplitudes(readout: ReadoutParams, drive, dt: float, n_steps: int | None = None) -> PointerTrace:
    """Integrate the qubit-conditioned cavity amplitudes with classical RK4.

    ``drive`` is either an array of drive amplitudes ``epsilon_d/2pi`` (Hz)
    sampled every ``dt`` or a callable of time. ``readout.detuning`` is the
    cavity-drive detuning; ``None`` means a resonant drive. The amplitudes
    start in vacuum.
    """
    k = TWO_PI * readout.kappa
    chi = TWO_PI * readout.chi
    delta = TWO_PI * (readout.detuning or 0.0)
    fastest = max(k, abs(chi), abs(delta))
    if dt * fastest >= 0.1:
        raise ValueError(f"step {dt} s does not resolve the cavity dynamics (rate {fastest:.3g} rad/s)")

    if callable(drive):
        if n_steps is None:
            raise ValueError("n_steps is required for a callable drive")
        eps: Callable[[float], complex] = lambda t: TWO_PI * drive(t)
    else:
        samples = TWO_PI * np.asarray(drive, dtype=complex)
        n_steps = len(samples) if n_steps is None else n_steps

        def eps(t):
            # zero-order hold on the sampled drive
            i = min(int(t / dt + 1e-9), len(samples) - 1)
            return samples[i]

    s = np.array([-1.0, 1.0])
    rate = -(k / 2 + 1j * (delta + s * chi))

    def f(y, e):
        return rate * y - 1j * e

    times = dt * np.arange(n_steps + 1)
    out = np.zeros((n_steps + 1, 2), dtype=complex)
    a = np.zeros(2, dtype=complex)
    for n in range(n_steps):
        t = times[n]
        e0 = eps(t)
        k1 = f(a, e0)
        k2 = f(a + 0.5 * dt * k1, e0)
        k3 = f(a + 0.5 * dt * k2, e0)
        k4 = f(a + dt * k3, e0)
        a = a + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[n + 1] = a
    return PointerTrace(times, out[:, 0], out[:, 1])


def steady_pointer(readout: ReadoutParams, eps_d: float, s: int) -> complex:
    k = TWO_PI * readout.kappa
    chi = TWO_PI * readout.chi
    delta = TWO_PI * (readout.detuning or 0.0)
    return -1j * TWO_PI * eps_d / (k / 2 + 1j * (delta + s * chi))


@dataclass(frozen=True)
class GaussianPovm:
    """Integrated-signal readout model with outcome means ``s_g``, ``s_e``.

    SNR convention: ``(s_e - s_g)**2 / (4 sigma**2)``.
    """

    s_g: float
    s_e: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def snr(self) -> float:
        return (self.s_e - self.s_g) ** 2 / (4 * self.sigma**2)

    def log_likelihoods(self, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.asarray(s, dtype=float)
        c = -0.5 * math.log(2 * math.pi) - math.log(self.sigma)
        with np.errstate(over="ignore"):  # -inf is the right log-likelihood far out
            lg = c - 0.5 * ((s - self.s_g) / self.sigma) ** 2
            le = c - 0.5 * ((s - self.s_e) / self.sigma) ** 2
        return lg, le


def povm_element(povm: GaussianPovm, s: float) -> np.ndarray:
    lg, le = povm.log_likelihoods(s)
    return np.diag([math.exp(lg), math.exp(le)])


def bayes_update(prior, povm: GaussianPovm, s) -> tuple:
    """Posterior ``(p_g, p_e)`` after observing ``s``, computed in log space.

    ``s`` may be an array, in which case arrays are returned.
    """
    pg, pe = (float(x) for x in prior)
    if pg < 0 or pe < 0 or abs(pg + pe - 1) > 1e-9:
        raise ValueError("prior must be a normalized probability pair")
    if pe == 0 or pg == 0:
        s_arr = np.asarray(s, dtype=float)
        return np.full(s_arr.shape, pg)[()], np.full(s_arr.shape, pe)[()]
    lg, le = povm.log_likelihoods(s)
    a = math.log(pg) + lg
    b = math.log(pe) + le
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ReadoutModelError("likelihoods underflowed")
    # posterior p_g = 1 / (1 + exp(b - a))
    return special.expit(a - b)[()], special.expit(b - a)[()]
