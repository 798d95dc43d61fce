"""Atom-field coupling: continuum density, mode-selective form, discrete g_m.

With ``hbar = eps0 = 1`` the coupling density of the global mode at
frequency ``omega`` is ``eta = sqrt(omega/2) d Phi_in(x_A)`` and a fitted
resonance yields the discrete coupling

    g_m = i sqrt(omega_m / (L_m A)) d exp(i omega_m ell_c / c) sin(omega_m (x_A + ell_c) / c)

which satisfies ``|g_m|^2 = int |eta_m|^2 domega`` up to ``O(eps^2)``,
``eps = gamma_m (x_A + ell_c) / c``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .constants import EPS0, HBAR, SPEED_OF_LIGHT as c
from .errors import DomainError, ValidityWarning
from .geometry import CavityGeometry
from .modes import response, wavenumber
from .spectra import LorentzianPeak

EPS_WARN = 0.1
EPS_FAIL = 1.0


@dataclass(frozen=True)
class AtomSpec:
    """Two-level emitter.

    ``linewidth`` is the optional free-space atomic decay rate used only for
    the cooperativity estimate.
    """

    omega_A: float
    x_A: float
    d: complex = 1.0
    linewidth: float | None = None

    def __post_init__(self):
        if not self.omega_A > 0:
            raise DomainError("omega_A must be positive")
        if self.x_A > 0:
            raise DomainError("the atom must sit between the mirrors (x_A <= 0)")
        object.__setattr__(self, "d", complex(self.d))

    def check_inside(self, geom: CavityGeometry, closed: bool = False):
        lo_ok = self.x_A >= -geom.ell_c if closed else self.x_A > -geom.ell_c
        hi_ok = self.x_A <= 0 if closed else self.x_A < 0
        if not (lo_ok and hi_ok):
            raise DomainError(f"x_A={self.x_A} not inside the cavity (-{geom.ell_c}, 0)")


def antinode_position(geom: CavityGeometry, omega: float, order: int = 0) -> float:
    """Position of the ``order``-th field crest counted from the perfect mirror."""
    return -geom.ell_c + (math.pi / 2 + order * math.pi) * c / omega


def inside_field(geom: CavityGeometry, omega, x_A):
    """``Phi_in(x_A)`` for every ``omega`` using the exact response."""
    k = wavenumber(omega)
    pre = 1.0 / math.sqrt(2 * math.pi * c * geom.area)
    return pre * 2j * np.exp(1j * k * geom.ell_c) * response(geom, omega) * np.sin(k * (x_A + geom.ell_c))


def eta_continuum(atom: AtomSpec, geom: CavityGeometry, omega):
    """Exact coupling density ``eta_omega`` (units of sqrt(omega0))."""
    atom.check_inside(geom)
    w = np.asarray(omega, dtype=float)
    return np.sqrt(w / (2 * HBAR * EPS0)) * atom.d * inside_field(geom, w, atom.x_A)


def eta_lorentzian(atom: AtomSpec, geom: CavityGeometry, peak: LorentzianPeak, omega):
    """Single-resonance approximation of ``eta_omega`` built from a fitted peak."""
    w = np.asarray(omega, dtype=float)
    k = wavenumber(w)
    amp = np.sqrt(w / (HBAR * EPS0 * peak.L_coupling * geom.area))
    shape = np.sqrt(peak.gamma / (2 * math.pi)) / ((w - peak.omega_m_eff) + 0.5j * peak.gamma)
    return 1j * amp * atom.d * np.exp(1j * k * geom.ell_c) * np.sin(k * (atom.x_A + geom.ell_c)) * shape


def mode_window(peak: LorentzianPeak, half_width: float | None = None, K: float = 50.0):
    """Frequency window assigned to one resonance, ``+- K gamma`` by default.

    The default window is clipped to half a free spectral range so that
    broad resonances never claim their neighbours, and to positive ``omega``.
    """
    if half_width is None:
        half_fsr = 0.5 * math.pi * c / peak.ell_eff
        hw = min(K * peak.gamma, half_fsr)
    else:
        hw = half_width
    lo = max(peak.omega_m_eff - hw, 1e-9 * peak.omega_m_eff)
    return lo, peak.omega_m_eff + hw


def mode_selective_eta(atom, geom, peak, omega, window=None):
    """``eta_omega`` restricted to the resonance window (zero outside)."""
    lo, hi = mode_window(peak) if window is None else window
    w = np.asarray(omega, dtype=float)
    inside = (w >= lo) & (w <= hi)
    out = np.zeros(w.shape, dtype=complex)
    out[inside] = eta_continuum(atom, geom, w[inside])
    return out


@dataclass(frozen=True)
class CouplingResult:
    g_m: complex
    g_bar_m: complex
    epsilon: float
    mode: LorentzianPeak
    g_perfect: complex
    omega_m: float
    warning: str | None = None

    def cooperativity(self, atom_linewidth: float) -> float:
        """``2|g|^2 / (gamma_cavity gamma_atom)``."""
        return 2 * abs(self.g_m) ** 2 / (self.mode.gamma * atom_linewidth)

    def as_record(self, atom_linewidth=None) -> dict:
        rec = {
            "m": self.mode.m,
            "omega_eff": self.mode.omega_m_eff,
            "gamma": self.mode.gamma,
            "L_coupling": self.mode.L_coupling,
            "g": [self.g_m.real, self.g_m.imag],
            "g_abs": abs(self.g_m),
            "g_bar": [self.g_bar_m.real, self.g_bar_m.imag],
            "epsilon": self.epsilon,
            "perfect_cavity": {
                "omega_m": self.omega_m,
                "g": [self.g_perfect.real, self.g_perfect.imag],
                "g_abs": abs(self.g_perfect),
            },
            "cooperativity": None if atom_linewidth is None else self.cooperativity(atom_linewidth),
            "warnings": [] if self.warning is None else [self.warning],
        }
        return rec


def smallness(atom: AtomSpec, geom: CavityGeometry, peak: LorentzianPeak) -> float:
    """``eps = gamma (x_A + ell_c) / c``."""
    return peak.gamma * (atom.x_A + geom.ell_c) / c


def _discrete_coupling(dipole, omega, L, geom, x_A):
    return (1j * math.sqrt(omega / (HBAR * EPS0 * L * geom.area)) * dipole
            * np.exp(1j * omega * geom.ell_c / c) * math.sin(omega * (x_A + geom.ell_c) / c))


def _validate(atom, geom, peak):
    atom.check_inside(geom, closed=True)
    eps = smallness(atom, geom, peak)
    if eps >= EPS_FAIL:
        raise DomainError(f"eps = {eps:.3g} >= 1: single-mode description invalid")
    msg = None
    if eps >= EPS_WARN:
        msg = f"eps = {eps:.3g} >= {EPS_WARN}: O(eps^2) corrections may be significant"
        warnings.warn(msg, ValidityWarning, stacklevel=3)
    return eps, msg


def g_effective(atom: AtomSpec, peak: LorentzianPeak, geom: CavityGeometry) -> CouplingResult:
    """Discrete coupling to one fitted resonance, with the hard-mirror comparator."""
    eps, msg = _validate(atom, geom, peak)
    g = _discrete_coupling(atom.d, peak.omega_m_eff, peak.L_coupling, geom, atom.x_A)
    g_bar = _discrete_coupling(atom.d.conjugate(), peak.omega_m_eff, peak.L_coupling, geom, atom.x_A)
    wm = peak.m * math.pi * c / geom.ell_c
    g0 = _discrete_coupling(atom.d, wm, geom.ell_c, geom, atom.x_A)
    return CouplingResult(complex(g), complex(g_bar), eps, peak, complex(g0), wm, msg)


def g_counter_rotating(atom: AtomSpec, peak: LorentzianPeak, geom: CavityGeometry) -> complex:
    """Coupling of the counter-rotating terms (``d`` replaced by its conjugate)."""
    _validate(atom, geom, peak)
    return complex(_discrete_coupling(atom.d.conjugate(), peak.omega_m_eff, peak.L_coupling, geom, atom.x_A))


# --------------------------------------------------------------------------
# integrals over one resonance


def quadrature_grid(lo: float, hi: float, gamma: float, samples_per_fwhm: int = 200):
    """Uniform grid and trapezoid weights with the requested density."""
    n = int(math.ceil((hi - lo) / gamma * samples_per_fwhm)) + 1
    w = np.linspace(lo, hi, max(n, 3))
    wt = np.full(w.size, w[1] - w[0])
    wt[0] = wt[-1] = 0.5 * (w[1] - w[0])
    return w, wt


def coupling_integral(atom, geom, peak, window=None, samples_per_fwhm=200):
    """``I1 = int |eta_m|^2 domega`` by trapezoid quadrature of the exact density."""
    lo, hi = mode_window(peak) if window is None else window
    w, _ = quadrature_grid(lo, hi, peak.gamma, samples_per_fwhm)
    return float(trapezoid(np.abs(eta_continuum(atom, geom, w)) ** 2, w))


def memory_integral(atom, geom, peak, tau, window=None, samples_per_fwhm=200):
    """``I2(tau) = int |eta_m|^2 (omega - omega_A) exp(-i (omega - omega_A) tau) domega``."""
    lo, hi = mode_window(peak) if window is None else window
    w, _ = quadrature_grid(lo, hi, peak.gamma, samples_per_fwhm)
    det = w - atom.omega_A
    f = np.abs(eta_continuum(atom, geom, w)) ** 2 * det * np.exp(-1j * det * tau)
    return complex(trapezoid(f, w))


def memory_kernel(g_abs2: float, detuning: float, gamma: float, tau):
    """Closed form ``|g|^2 (D - i gamma/2) exp(-i (D - i gamma/2) tau)``."""
    z = detuning - 0.5j * gamma
    return g_abs2 * z * np.exp(-1j * z * np.asarray(tau))


def modes_overlap(atom, geom, peaks, couplings, samples_per_fwhm=200, K=50.0):
    """Matrix ``int eta*_m eta_m' / (g*_m g_m') domega`` of the windowed densities.

    Each entry is integrated over the intersection of the two windows, so
    disjoint windows give exactly zero.
    """
    M = len(peaks)
    out = np.zeros((M, M), dtype=complex)
    wins = [mode_window(p, K=K) for p in peaks]
    for a in range(M):
        for b in range(a, M):
            lo = max(wins[a][0], wins[b][0])
            hi = min(wins[a][1], wins[b][1])
            if hi <= lo:
                continue
            w, _ = quadrature_grid(lo, hi, min(peaks[a].gamma, peaks[b].gamma), samples_per_fwhm)
            eta = eta_continuum(atom, geom, w)
            val = trapezoid(np.abs(eta) ** 2, w)
            out[a, b] = val / (np.conj(couplings[a]) * couplings[b])
            out[b, a] = np.conj(out[a, b])
    return out
