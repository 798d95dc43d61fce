"""Single-excitation dynamics: discretized continuum versus effective modes.

Amplitudes are stored in the frame rotating at the atomic frequency
``omega_A``: ``b_k = exp(-i (omega_k - omega_A) t) c_{g,1}(omega_k, t)``.
The lab-frame atomic amplitude is ``exp(-i omega_A t) c_e0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .coupling import AtomSpec, CouplingResult, eta_continuum, g_effective, mode_window
from .errors import DomainError, NoResonantMode, NumericalInstability
from .geometry import CavityGeometry
from .spectra import LorentzianPeak, fit_nearest

NORM_DRIFT_MAX = 1e-4
DEFAULT_K = 50.0
SAMPLES_PER_FWHM = 200
# dt * (fastest rate); RK4 norm error per step scales as this to the 6th power
DT_SAFETY = 0.05


@dataclass
class ContinuumState:
    omega_grid: np.ndarray
    weights: np.ndarray
    c_g1: np.ndarray
    c_e0: complex = 1.0
    t: float = 0.0

    @classmethod
    def excited(cls, omega_grid, weights):
        """``|e,0>``: atom excited, no photon."""
        return cls(np.asarray(omega_grid, float), np.asarray(weights, float),
                   np.zeros(len(omega_grid), complex), 1.0 + 0j, 0.0)

    def norm(self) -> float:
        return abs(self.c_e0) ** 2 + float(self.weights @ np.abs(self.c_g1) ** 2)


@dataclass
class EffectiveState:
    c_e0: complex
    c_g1_m: np.ndarray
    detunings: np.ndarray
    gammas: np.ndarray
    couplings: np.ndarray

    def norm(self) -> float:
        return abs(self.c_e0) ** 2 + float(np.sum(np.abs(self.c_g1_m) ** 2))


@dataclass
class Trajectory:
    """Sampled run.  ``c_e0`` is in the atom rotating frame."""

    t: np.ndarray
    c_e0: np.ndarray
    mode_pop: np.ndarray  # shape (n_samples, n_modes)
    norm: np.ndarray
    model: str
    omega_A: float
    dt: float
    info: dict = field(default_factory=dict)

    @property
    def population(self) -> np.ndarray:
        return np.abs(self.c_e0) ** 2

    def lab_frame(self) -> np.ndarray:
        return np.exp(-1j * self.omega_A * self.t) * self.c_e0

    def leakage(self) -> np.ndarray:
        return 1.0 - self.norm


def trapezoid_weights(grid) -> np.ndarray:
    g = np.asarray(grid, float)
    w = np.empty_like(g)
    d = np.diff(g)
    w[0] = 0.5 * d[0]
    w[-1] = 0.5 * d[-1]
    w[1:-1] = 0.5 * (d[:-1] + d[1:])
    return w


def continuum_grid(peak: LorentzianPeak, K: float = DEFAULT_K,
                   samples_per_fwhm: int = SAMPLES_PER_FWHM, window=None):
    """Uniform grid over the mode window with trapezoid weights."""
    lo, hi = mode_window(peak, K=K) if window is None else window
    n = int(math.ceil((hi - lo) / peak.gamma * samples_per_fwhm)) + 1
    grid = np.linspace(lo, hi, max(n, 3))
    return grid, trapezoid_weights(grid)


def recommended_dt(max_rate: float, safety: float = DT_SAFETY) -> float:
    """Step resolving the fastest frequency scale of the problem."""
    if max_rate <= 0:
        raise DomainError("need a positive rate to choose dt")
    return safety / max_rate


def _steps(duration, dt, n_samples):
    if duration <= 0 or dt <= 0:
        raise DomainError("duration and dt must be positive")
    n_steps = max(1, int(math.ceil(duration / dt - 1e-9)))
    stride = max(1, int(math.ceil(n_steps / max(1, n_samples - 1))))
    # uniform sampling: whole number of strides
    n_steps = stride * int(math.ceil(n_steps / stride))
    dt = duration / n_steps
    return n_steps, dt, stride


def _sample_times(n_steps, stride, dt):
    idx = list(range(0, n_steps + 1, stride))
    if idx[-1] != n_steps:
        idx.append(n_steps)
    return np.asarray(idx) * dt


def evolve_continuum(init: ContinuumState, eta, omega_A: float, duration: float,
                     dt: float | None = None, n_samples: int = 2001,
                     selected_coupling: complex | None = None,
                     tolerance: float = NORM_DRIFT_MAX) -> Trajectory:
    """RK4 integration of the discretized continuum equations.

    ``eta`` are the coupling-density samples on ``init.omega_grid``.  When
    ``selected_coupling`` (a ``g_m``) is given the mode-selective amplitude
    ``(1/g_m) sum_k w_k eta_k b_k`` is recorded as the mode population.
    """
    eta = np.asarray(eta, complex)
    det = init.omega_grid - omega_A
    if dt is None:
        g_tot = math.sqrt(float(init.weights @ np.abs(eta) ** 2))
        dt = recommended_dt(max(np.max(np.abs(det)), g_tot, 1e-300))
    n_steps, dt, stride = _steps(duration, dt, n_samples)
    cs, ss, ns, b = _kernels.rk4_continuum(
        complex(init.c_e0), np.asarray(init.c_g1, complex), eta, init.weights, det, dt, n_steps, stride)
    t = init.t + _sample_times(n_steps, stride, dt)
    n0 = init.norm()
    drift = float(np.max(np.abs(ns - n0)))
    if not np.isfinite(drift) or drift > tolerance:
        raise NumericalInstability(
            f"continuum norm drift {drift:.3g} exceeds {tolerance:g}; retry with dt < {dt / 2:.3g}")
    if selected_coupling is not None and selected_coupling != 0:
        mode_pop = (np.abs(ss / selected_coupling) ** 2)[:, None]
    else:
        mode_pop = np.zeros((t.size, 0))
    return Trajectory(t, cs, mode_pop, ns, "continuum", omega_A, dt,
                      {"n_steps": n_steps, "M": init.omega_grid.size, "norm_drift": drift,
                       "b_final": b, "backend": _kernels.BACKEND_NAME})


# --------------------------------------------------------------------------
# effective model


def effective_generator(detunings, gammas, couplings) -> np.ndarray:
    """Matrix ``A`` with ``dy/dt = A y`` for ``y = (c_e0, c_1, ..., c_M)``."""
    Dz = np.asarray(detunings, float) - 0.5j * np.asarray(gammas, float)
    g = np.asarray(couplings, complex)
    M = g.size
    A = np.zeros((M + 1, M + 1), complex)
    A[0, 1:] = g
    A[1:, 0] = -np.conj(g)
    A[1:, 1:] = np.diag(-1j * Dz)
    return A


def _fock_basis(n_modes: int, n_max: int):
    """Basis of (atom, n_1..n_M) with total occupation up to n_max per mode."""
    states = []
    for atom in (0, 1):
        for occ in np.ndindex(*([n_max + 1] * n_modes)):
            states.append((atom,) + tuple(occ))
    return states, {s: i for i, s in enumerate(states)}


def counter_rotating_generator(omega_A, omegas, gammas, couplings, g_bars, n_max: int = 4):
    """Lab-frame ``-i H_eff`` on a truncated Fock space including ``g_bar`` terms.

    ``H = w_A s+s- + sum (w_m - i g_m/2) a+a + i g s+ a - i g* s- a+
    + i gbar s- a - i gbar* s+ a+``.
    """
    M = len(omegas)
    states, index = _fock_basis(M, n_max)
    H = np.zeros((len(states), len(states)), complex)
    for i, s in enumerate(states):
        atom, occ = s[0], s[1:]
        H[i, i] = omega_A * atom + sum((omegas[m] - 0.5j * gammas[m]) * occ[m] for m in range(M))
        for m in range(M):
            n = occ[m]
            pl = list(occ); mi = list(occ)
            pl[m] += 1; mi[m] -= 1
            if atom == 0:
                # s+ a |g,n> -> sqrt(n) |e,n-1>
                if n > 0:
                    H[index[(1,) + tuple(mi)], i] += 1j * couplings[m] * math.sqrt(n)
                # s+ a+ |g,n> -> sqrt(n+1) |e,n+1>
                if n < n_max:
                    H[index[(1,) + tuple(pl)], i] += -1j * np.conj(g_bars[m]) * math.sqrt(n + 1)
            else:
                # s- a+ |e,n> -> sqrt(n+1) |g,n+1>
                if n < n_max:
                    H[index[(0,) + tuple(pl)], i] += -1j * np.conj(couplings[m]) * math.sqrt(n + 1)
                # s- a |e,n> -> sqrt(n) |g,n-1>
                if n > 0:
                    H[index[(0,) + tuple(mi)], i] += 1j * g_bars[m] * math.sqrt(n)
    return -1j * H, states, index


def _rk4_linear(A, y0, dt, n_steps, stride):
    y = np.array(y0, complex)
    out = [y.copy()]
    h2 = 0.5 * dt
    for step in range(1, n_steps + 1):
        k1 = A @ y
        k2 = A @ (y + h2 * k1)
        k3 = A @ (y + h2 * k2)
        k4 = A @ (y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % stride == 0 or step == n_steps:
            out.append(y.copy())
    return np.array(out)


def evolve_effective(omega_A: float, detunings, gammas, couplings, duration: float,
                     dt: float | None = None, n_samples: int = 2001,
                     counter_rotating: bool = False, g_bars=None, omegas=None,
                     n_max: int = 4, tolerance: float = NORM_DRIFT_MAX) -> Trajectory:
    """RK4 integration of the non-Hermitian few-mode model from ``|e,0>``.

    With ``counter_rotating`` the ``g_bar`` terms are kept; the run is then
    done in the lab frame on a Fock space truncated at ``n_max`` photons per
    mode and ``c_e0`` is returned rotated back to the atom frame.
    """
    det = np.atleast_1d(np.asarray(detunings, float))
    gam = np.atleast_1d(np.asarray(gammas, float))
    g = np.atleast_1d(np.asarray(couplings, complex))
    M = g.size
    if counter_rotating:
        gb = np.atleast_1d(np.asarray(g if g_bars is None else g_bars, complex))
        om = det + omega_A if omegas is None else np.atleast_1d(np.asarray(omegas, float))
        A, states, index = counter_rotating_generator(omega_A, om, gam, g, gb, n_max)
        y0 = np.zeros(len(states), complex)
        y0[index[(1,) + (0,) * M]] = 1.0
        rate = max(omega_A, np.max(om)) + np.sum(np.abs(g) + np.abs(gb)) * math.sqrt(n_max + 1)
    else:
        A = effective_generator(det, gam, g)
        y0 = np.zeros(M + 1, complex)
        y0[0] = 1.0
        rate = max(np.max(np.abs(det)), np.sqrt(np.sum(np.abs(g) ** 2)), np.max(gam), 1e-300)
    if dt is None:
        dt = recommended_dt(rate)
    n_steps, dt, stride = _steps(duration, dt, n_samples)
    Y = _rk4_linear(A, y0, dt, n_steps, stride)
    t = _sample_times(n_steps, stride, dt)
    norm = np.sum(np.abs(Y) ** 2, axis=1)
    if not np.all(np.isfinite(norm)):
        raise NumericalInstability(f"effective model diverged; retry with dt < {dt / 2:.3g}")
    # norm can only decrease for a dissipative generator
    rise = float(np.max(np.diff(norm), initial=0.0))
    if rise > tolerance:
        raise NumericalInstability(f"effective norm increased by {rise:.3g}; retry with dt < {dt / 2:.3g}")
    if counter_rotating:
        ce = Y[:, index[(1,) + (0,) * M]] * np.exp(1j * omega_A * t)
        pops = np.empty((t.size, M))
        for m in range(M):
            one = list((0,) + (0,) * M)
            one[1 + m] = 1
            pops[:, m] = np.abs(Y[:, index[tuple(one)]]) ** 2
        rwa = [index[(1,) + (0,) * M]] + [index[(0,) + tuple(int(j == m) for j in range(M))] for m in range(M)]
        outside = np.ones(len(states), bool)
        outside[rwa] = False
        info = {"n_max": n_max, "dimension": len(states),
                "truncation_population": float(np.max(_edge_population(Y, states, n_max))),
                "beyond_rwa_population": float(np.max(np.sum(np.abs(Y[:, outside]) ** 2, axis=1)))}
    else:
        ce = Y[:, 0]
        pops = np.abs(Y[:, 1:]) ** 2
        info = {}
    return Trajectory(t, ce, pops, norm, "effective", omega_A, dt, info)


def _edge_population(Y, states, n_max):
    edge = [i for i, s in enumerate(states) if max(s[1:]) == n_max]
    return np.sum(np.abs(Y[:, edge]) ** 2, axis=1)


def damped_rabi(g_abs: float, detuning: float, gamma: float, t):
    """Closed-form ``c_e0(t)`` of the single-mode effective model from ``|e,0>``."""
    t = np.asarray(t, float)
    Dp = detuning - 0.5j * gamma
    s = np.sqrt(-Dp ** 2 - 4 * g_abs ** 2 + 0j) / 2
    if abs(s) < 1e-300:
        return np.exp(-0.5j * Dp * t) * (1 + 0.5j * Dp * t)
    return np.exp(-0.5j * Dp * t) * (np.cosh(s * t) + (0.5j * Dp / s) * np.sinh(s * t))


def golden_rule_rate(eta_abs2_at_omega_A: float) -> float:
    """Population decay rate ``2 pi |eta(omega_A)|^2`` of a flat continuum."""
    return 2 * math.pi * eta_abs2_at_omega_A


# --------------------------------------------------------------------------
# cross-validation


@dataclass
class ComparisonReport:
    peak: LorentzianPeak
    coupling: CouplingResult
    continuum: Trajectory
    effective: Trajectory
    max_population_error: float
    max_phase_error: float
    duration: float

    @property
    def epsilon(self) -> float:
        return self.coupling.epsilon

    def as_record(self) -> dict:
        return {
            "m": self.peak.m,
            "omega_eff": self.peak.omega_m_eff,
            "gamma": self.peak.gamma,
            "g_abs": abs(self.coupling.g_m),
            "epsilon": self.epsilon,
            "duration": self.duration,
            "max_population_error": self.max_population_error,
            "max_phase_error": self.max_phase_error,
            "continuum_norm_drift": self.continuum.info["norm_drift"],
            "grid_size": self.continuum.info["M"],
            "dt_continuum": self.continuum.dt,
            "dt_effective": self.effective.dt,
        }


def phase_error(a, b, floor: float = 1e-3) -> float:
    """Largest phase difference where both amplitudes exceed ``floor``."""
    a = np.asarray(a)
    b = np.asarray(b)
    ok = (np.abs(a) > floor) & (np.abs(b) > floor)
    if not np.any(ok):
        return 0.0
    return float(np.max(np.abs(np.angle(a[ok] * np.conj(b[ok])))))


def compare_models(geom: CavityGeometry, atom: AtomSpec, duration: float | None = None,
                   rabi_periods: float = 5.0, K: float = DEFAULT_K,
                   samples_per_fwhm: int = SAMPLES_PER_FWHM, n_samples: int = 2001,
                   span: float = 0.3, peak: LorentzianPeak | None = None,
                   max_detuning_widths: float | None = None, dt: float | None = None,
                   counter_rotating: bool = False, n_max: int = 4) -> ComparisonReport:
    """Run both models from ``|e,0>`` and report their sup-norm disagreement.

    The default duration is ``rabi_periods`` periods of ``cos^2(|g| t)``,
    i.e. ``rabi_periods * pi / |g|``.
    """
    if peak is None:
        try:
            peak = fit_nearest(geom, atom.omega_A, span=span)
        except LookupError as exc:
            raise NoResonantMode(f"no resonance near omega_A = {atom.omega_A}") from exc
    det = peak.omega_m_eff - atom.omega_A
    # the single-mode description needs |omega - omega_A| << omega
    if abs(det) > 0.5 * peak.omega_m_eff * min(1.0, span):
        raise NoResonantMode(f"nearest resonance at {peak.omega_m_eff:.6g} is far from omega_A")
    if max_detuning_widths is not None and abs(det) > max_detuning_widths * peak.gamma:
        raise NoResonantMode("resonance detuned by more than the allowed number of widths")
    cpl = g_effective(atom, peak, geom)
    g = cpl.g_m
    if duration is None:
        if abs(g) == 0:
            raise DomainError("zero coupling; give an explicit duration")
        duration = rabi_periods * math.pi / abs(g)

    grid, w = continuum_grid(peak, K=K, samples_per_fwhm=samples_per_fwhm)
    eta = eta_continuum(atom, geom, grid)
    cont = evolve_continuum(ContinuumState.excited(grid, w), eta, atom.omega_A, duration,
                            dt=dt, n_samples=n_samples, selected_coupling=g)
    eff = evolve_effective(atom.omega_A, [det], [peak.gamma], [g], duration, dt=dt,
                           n_samples=n_samples, counter_rotating=counter_rotating,
                           g_bars=[cpl.g_bar_m], omegas=[peak.omega_m_eff], n_max=n_max)
    # both runs use identical duration and n_samples; align by time anyway
    ce_eff = np.interp(cont.t, eff.t, eff.c_e0.real) + 1j * np.interp(cont.t, eff.t, eff.c_e0.imag)
    perr = float(np.max(np.abs(cont.population - np.abs(ce_eff) ** 2)))
    pherr = phase_error(cont.c_e0, ce_eff)
    return ComparisonReport(peak, cpl, cont, eff, perr, pherr, duration)
