"""Response spectra, Lorentzian decomposition and resonance fitting.

The exact intensity ratio ``|T(omega)|^2`` of the cavity is scanned on a
frequency grid, local maxima are refined, and each well separated peak is
fitted by

    (c / 2L) * gamma / ((omega - omega_eff)^2 + (gamma/2)^2)

which defines the resonance frequency ``omega_eff``, the linewidth ``gamma``
and the coupling-factor length ``L``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares, minimize_scalar

from .constants import SPEED_OF_LIGHT as c
from .errors import DomainError, FitDiverged, NoResonatorError, OverlappingPeaks
from .geometry import CavityGeometry
from .modes import intensity_ratio, single_layer_coeffs

log = logging.getLogger(__name__)

FIT_HALF_WIDTHS = 5.0
FIT_ITERATIONS = 2
SAMPLES_PER_FWHM = 50
DEGRADED_RESIDUAL = 0.01
MAX_RESIDUAL = 0.5
SEPARATION_WIDTHS = 10.0
# slack when counting half-waves, so that omega_eff == m*pi*c/ell_c labels m
_LABEL_SLACK = 1e-6


# --------------------------------------------------------------------------
# single layer: exact Lorentzian decomposition and its high-Q limit


@dataclass(frozen=True)
class SingleLayerDecomposition:
    """Frequency-dependent Lorentzian parameters of the single-layer response."""

    omega: np.ndarray
    L1: float
    gamma: np.ndarray
    phi_r: np.ndarray

    @property
    def fsr(self) -> float:
        return math.pi * c / self.L1

    def omega_tilde(self, m):
        return m * self.fsr + c / (2 * self.L1) * (math.pi - self.phi_r)

    def lorentzian_sum(self, n_terms: int = 2000, tail_correction: bool = True):
        """Sum the Lorentzian terms nearest to each ``omega``.

        ``2 * n_terms + 1`` terms are summed around the term centred closest
        to ``omega``.  With ``tail_correction`` the remaining terms are
        replaced by the midpoint-rule integral over ``m``, which leaves an
        ``O(n_terms^-3)`` error.
        """
        w = np.atleast_1d(self.omega)
        gam = np.atleast_1d(self.gamma)
        u = w - np.atleast_1d(self.omega_tilde(0))
        F = self.fsr
        amp = c / (2 * self.L1)
        hw = gam / 2
        mc = np.rint(u / F)
        m = mc[:, None] + np.arange(-n_terms, n_terms + 1)[None, :]
        y = m * F - u[:, None]
        total = (amp * gam[:, None] / (y**2 + hw[:, None] ** 2)).sum(axis=1)
        if tail_correction:
            y_hi = (mc + n_terms + 0.5) * F - u
            y_lo = (mc - n_terms - 0.5) * F - u
            scale = amp * gam / (F * hw)
            total += scale * (math.pi / 2 - np.arctan(y_hi / hw))
            total += scale * (np.arctan(y_lo / hw) + math.pi / 2)
        return total if np.ndim(self.omega) else total[0]


def poisson_decomposition_single(geom: CavityGeometry, omega) -> SingleLayerDecomposition:
    """Lorentzian parameters ``L1``, ``gamma_1(omega)``, ``phi_r(omega)``."""
    if geom.N != 1:
        raise DomainError("poisson decomposition applies to a single-layer mirror")
    bs = single_layer_coeffs(geom, omega)
    mag = np.abs(bs.r)
    if np.any(mag == 0):
        raise NoResonatorError("|r(omega)| = 0: no resonator, linewidth undefined")
    L1 = geom.ell_c + geom.stack.delta / 2
    gamma = -(c / L1) * np.log(mag)
    return SingleLayerDecomposition(np.asarray(omega, dtype=float), L1, gamma, bs.phi_r)


@dataclass(frozen=True)
class HighQParams:
    m: int
    omega_m: float
    Gamma_m: float
    omega_tilde_m: float

    @property
    def no_resonator(self) -> bool:
        return math.isinf(self.Gamma_m)


def high_q_params_single(geom: CavityGeometry, m: int) -> HighQParams:
    """High-Q width and centre evaluated at the classical ``omega_m``.

    ``Gamma_m`` is ``inf`` when the slab does not reflect (``n1 = 1``).
    """
    if m < 1:
        raise DomainError("mode index m must be >= 1")
    wm = m * math.pi * c / geom.ell_c
    bs = single_layer_coeffs(geom, wm)
    mag = float(abs(bs.r))
    gam = math.inf if mag == 0 else -(c / geom.ell_c) * math.log(mag)
    wt = wm + c / (2 * geom.ell_c) * (math.pi - float(bs.phi_r))
    return HighQParams(m, wm, gam, wt)


# --------------------------------------------------------------------------
# scanning and peak location


@dataclass(frozen=True)
class PeakCandidate:
    """A refined local maximum of ``|T|^2`` with its half-maximum width."""

    omega: float
    height: float
    fwhm: float


@dataclass(frozen=True)
class LorentzianPeak:
    m: int
    omega_m_eff: float
    gamma: float
    L_coupling: float
    ell_eff: float
    fit_residual: float
    height: float
    ell_c: float
    window: tuple[float, float]

    @property
    def degraded(self) -> bool:
        return self.fit_residual > DEGRADED_RESIDUAL

    def lorentzian(self, omega):
        return lorentzian(omega, self.omega_m_eff, self.gamma, self.L_coupling)

    def as_record(self) -> dict:
        return {
            "m": self.m,
            "omega_eff": self.omega_m_eff,
            "gamma": self.gamma,
            "L_coupling": self.L_coupling,
            "ell_eff": self.ell_eff,
            "ell_c": self.ell_c,
            "ell_eff_over_ell_c": self.ell_eff / self.ell_c,
            "L_over_ell_c": self.L_coupling / self.ell_c,
            "height": self.height,
            "fit_residual": self.fit_residual,
            "degraded": self.degraded,
            "window": list(self.window),
        }


@dataclass
class ResponseSpectrum:
    geom: CavityGeometry
    grid: np.ndarray
    values: np.ndarray
    candidates: list[PeakCandidate] = field(default_factory=list)
    peaks: list[LorentzianPeak] = field(default_factory=list)
    rejected: list[dict] = field(default_factory=list)

    def nearest_candidate(self, omega: float) -> PeakCandidate:
        if not self.candidates:
            raise LookupError("no peaks located")
        return min(self.candidates, key=lambda p: abs(p.omega - omega))

    def highest_candidate(self) -> PeakCandidate:
        if not self.candidates:
            raise LookupError("no peaks located")
        return max(self.candidates, key=lambda p: p.height)

    def nearest_peak(self, omega: float) -> LorentzianPeak:
        if not self.peaks:
            raise LookupError("no fitted peaks")
        return min(self.peaks, key=lambda p: abs(p.omega_m_eff - omega))

    def highest_peak(self) -> LorentzianPeak:
        if not self.peaks:
            raise LookupError("no fitted peaks")
        return max(self.peaks, key=lambda p: p.height)


def lorentzian(omega, center, gamma, L):
    return (c / (2 * L)) * gamma / ((np.asarray(omega) - center) ** 2 + (gamma / 2) ** 2)


def mode_label(omega: float, ell_c: float) -> int:
    """Number of half-waves of the intracavity field, ``floor(omega ell_c / pi c)``.

    Counts the field nodes in ``(-ell_c, 0]``; never below 1.
    """
    return max(1, int(math.floor(omega * ell_c / (math.pi * c) + _LABEL_SLACK)))


def classical_resonances(ell_c: float, omega_min: float, omega_max: float) -> np.ndarray:
    """Hard-mirror resonances ``m*pi*c/ell_c`` inside the range."""
    f = math.pi * c / ell_c
    m = np.arange(max(1, math.ceil(omega_min / f)), math.floor(omega_max / f) + 1)
    return m * f


def _half_max_crossing(f, x0, h, direction, dmin, dmax):
    target = 0.5 * h
    prev_x, prev_v = x0, h
    d = dmin
    while d <= dmax:
        x = x0 + direction * d
        v = f(x)
        if v < target:
            return brentq(lambda z: f(z) - target, *sorted((prev_x, x)), xtol=1e-15, rtol=1e-15)
        if v > prev_v and prev_v < 0.99 * h:
            return None  # rises again before reaching half maximum
        prev_x, prev_v = x, v
        d *= 2.0
    return None


def locate_peaks(geom: CavityGeometry, grid, values) -> list[PeakCandidate]:
    """Refine every interior local maximum of the sampled spectrum.

    Maxima without a half-maximum crossing on both sides, such as shallow
    ripples outside the stop band, are dropped.
    """
    grid = np.asarray(grid)
    values = np.asarray(values)
    inner = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] >= values[2:])) + 1
    f = lambda w: float(intensity_ratio(geom, w))  # noqa: E731
    out = []
    for i in inner:
        lo, hi = grid[i - 1], grid[i + 1]
        res = minimize_scalar(lambda w: -f(w), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, grid[i])})
        w0 = float(res.x) if -res.fun >= values[i] else float(grid[i])
        h = f(w0)
        dmin = 1e-13 * max(1.0, w0)
        dmax = grid[-1] - grid[0]
        left = _half_max_crossing(f, w0, h, -1.0, dmin, min(dmax, w0))
        right = _half_max_crossing(f, w0, h, +1.0, dmin, dmax)
        if left is None or right is None:
            continue
        out.append(PeakCandidate(w0, h, right - left))
    # two neighbouring grid maxima can refine onto the same peak
    out.sort(key=lambda p: p.omega)
    merged = []
    for p in out:
        if merged and abs(p.omega - merged[-1].omega) < 1e-3 * p.fwhm:
            if p.height > merged[-1].height:
                merged[-1] = p
            continue
        merged.append(p)
    return merged


def frequency_grid(omega_min: float, omega_max: float, resolution: float) -> np.ndarray:
    if not (0 < omega_min < omega_max):
        raise DomainError("need 0 < omega_min < omega_max")
    if not resolution > 0:
        raise DomainError("resolution must be positive")
    n = int(math.ceil((omega_max - omega_min) / resolution - 1e-9)) + 1
    return np.linspace(omega_min, omega_max, n)


def scan_response(geom: CavityGeometry, omega_range, resolution: float = 1e-4,
                  fit: bool = False, on_overlap: str = "skip") -> ResponseSpectrum:
    """Sample ``|T|^2`` on a uniform grid and locate its peaks.

    With ``fit=True`` the located peaks are also fitted (see :func:`fit_peaks`).
    """
    grid = frequency_grid(*omega_range, resolution)
    values = intensity_ratio(geom, grid)
    spec = ResponseSpectrum(geom, grid, values, locate_peaks(geom, grid, values))
    if fit:
        spec.peaks = fit_peaks(spec, on_overlap=on_overlap)
    return spec


# --------------------------------------------------------------------------
# fitting


def fit_window(geom, center, fwhm, half_widths=FIT_HALF_WIDTHS):
    """Window of ``+-half_widths`` half-widths with >= 50 samples per FWHM."""
    span = half_widths * fwhm / 2
    # the window spans half_widths FWHMs in total
    n = int(half_widths * SAMPLES_PER_FWHM) + 1
    if center - span <= 0:
        raise FitDiverged(f"peak at omega={center:.6g} too broad for a Lorentzian fit (fwhm {fwhm:.3g})",
                          window=(center - span, center + span))
    w = np.linspace(center - span, center + span, max(n, 501))
    return w, intensity_ratio(geom, w)


def fit_candidate(geom: CavityGeometry, cand: PeakCandidate,
                  half_widths: float = FIT_HALF_WIDTHS,
                  iterations: int = FIT_ITERATIONS,
                  max_residual: float = MAX_RESIDUAL) -> LorentzianPeak:
    """Least-squares Lorentzian fit of one located peak of the exact response."""
    center, gam = cand.omega, cand.fwhm
    L = 2 * c / (cand.height * gam)
    for _ in range(iterations):
        w, y = fit_window(geom, center, gam, half_widths)
        x0, s0, h0 = center, gam, y.max()

        def model(p):
            return lorentzian(w, x0 + p[0] * s0, p[1] * s0, L * p[2])

        res = least_squares(lambda p: (model(p) - y) / h0, [0.0, 1.0, 1.0],
                            x_scale=[1e-2, 1e-2, 1e-2], xtol=1e-14, ftol=1e-14, gtol=1e-14)
        if not res.success or res.x[1] <= 0 or res.x[2] <= 0:
            raise FitDiverged(f"Lorentzian fit failed near omega={cand.omega:.6g}",
                              window=(w[0], w[-1]))
        center, gam, L = x0 + res.x[0] * s0, res.x[1] * s0, L * res.x[2]
    w, y = fit_window(geom, center, gam, half_widths)
    resid = float(np.max(np.abs(lorentzian(w, center, gam, L) - y) / y))
    if not np.isfinite(resid) or resid > max_residual:
        raise FitDiverged(f"fit residual {resid:.3g} exceeds {max_residual}",
                          window=(w[0], w[-1]), residual=resid)
    if resid > DEGRADED_RESIDUAL:
        log.info("degraded Lorentzian fit at omega=%.6g (residual %.3g)", center, resid)
    m = mode_label(center, geom.ell_c)
    return LorentzianPeak(
        m=m,
        omega_m_eff=float(center),
        gamma=float(gam),
        L_coupling=float(L),
        ell_eff=float(math.pi * c * m / center),
        fit_residual=resid,
        height=float(cand.height),
        ell_c=geom.ell_c,
        window=(float(w[0]), float(w[-1])),
    )


def fit_peaks(spectrum: ResponseSpectrum, on_overlap: str = "raise",
              **kwargs) -> list[LorentzianPeak]:
    """Fit every located peak that is separated from its neighbours.

    Peaks closer than ``10 * max(fwhm)`` to a neighbour are not single
    Lorentzians; ``on_overlap='raise'`` refuses with :class:`OverlappingPeaks`,
    ``'skip'`` leaves them out and records them in ``spectrum.rejected``.
    """
    if on_overlap not in ("raise", "skip"):
        raise ValueError("on_overlap must be 'raise' or 'skip'")
    cands = sorted(spectrum.candidates, key=lambda p: p.omega)
    crowded = set()
    for i in range(len(cands) - 1):
        a, b = cands[i], cands[i + 1]
        if b.omega - a.omega <= SEPARATION_WIDTHS * max(a.fwhm, b.fwhm):
            if on_overlap == "raise":
                raise OverlappingPeaks(
                    f"peaks at {a.omega:.6g} and {b.omega:.6g} overlap", candidates=(a, b))
            crowded.update((i, i + 1))
    peaks = []
    for i, cand in enumerate(cands):
        if i in crowded:
            spectrum.rejected.append({"omega": cand.omega, "reason": "overlapping"})
            continue
        try:
            peaks.append(fit_candidate(spectrum.geom, cand, **kwargs))
        except FitDiverged as exc:
            if on_overlap == "raise":
                raise
            spectrum.rejected.append({"omega": cand.omega, "reason": str(exc)})
    return peaks


# --------------------------------------------------------------------------
# effective lengths


@dataclass(frozen=True)
class EffectiveLengths:
    ell_eff: float
    L_coupling: float
    ell_eff_ratio: float
    L_ratio: float

    @property
    def discrepancy_ratio(self) -> float:
        """Coupling length over resonance length."""
        return self.L_coupling / self.ell_eff


def effective_lengths(peak: LorentzianPeak) -> EffectiveLengths:
    return EffectiveLengths(
        peak.ell_eff,
        peak.L_coupling,
        peak.ell_eff / peak.ell_c,
        peak.L_coupling / peak.ell_c,
    )


def fit_nearest(geom: CavityGeometry, omega: float, span: float = 0.3,
                resolution: float = 1e-4) -> LorentzianPeak:
    """Fit the located peak closest to ``omega``."""
    lo = max(omega - span, 1e-3)
    spec = scan_response(geom, (lo, omega + span), resolution)
    return fit_candidate(geom, spec.nearest_candidate(omega))


def fit_highest(geom: CavityGeometry, omega_range=(0.5, 1.5),
                resolution: float = 1e-4) -> LorentzianPeak:
    """Fit the peak with the largest intensity ratio in the range."""
    spec = scan_response(geom, omega_range, resolution)
    return fit_candidate(geom, spec.highest_candidate())


def sweep_n1(n1_values, N: int, cases, omega_range=(0.5, 1.5), resolution=1e-4):
    """Length ratios of the highest peak for each ``n1`` and cavity length.

    ``cases`` maps ``ell_c`` to target ``(ell_eff/ell_c, L/ell_c)``.  Returns
    a list of ``(n1, worst_relative_error, {ell_c: (ratio_eff, ratio_L)})``
    sorted by the worst error, so the first entry is the best match.
    """
    rows = []
    for n1 in n1_values:
        got = {}
        worst = 0.0
        for ell_c, (t_eff, t_L) in cases.items():
            geom = CavityGeometry.build(n1, N, ell_c)
            e = effective_lengths(fit_highest(geom, omega_range, resolution))
            got[ell_c] = (e.ell_eff_ratio, e.L_ratio)
            for val, tgt in ((e.ell_eff_ratio, t_eff), (e.L_ratio, t_L)):
                if tgt is not None:
                    worst = max(worst, abs(val / tgt - 1))
        rows.append((float(n1), worst, got))
    rows.sort(key=lambda r: r[1])
    return rows

