import math

import numpy as np
import pytest

from opencavity.constants import SPEED_OF_LIGHT as c
from opencavity.errors import DomainError, NoResonatorError, OverlappingPeaks
from opencavity.geometry import CavityGeometry
from opencavity.modes import intensity_ratio
from opencavity.spectra import (classical_resonances, effective_lengths, fit_candidate, fit_highest,
                                fit_nearest, fit_peaks, frequency_grid, high_q_params_single, locate_peaks,
                                lorentzian, mode_label, poisson_decomposition_single, scan_response)

import oracles

SINGLE_LAYER = [(3.0, 2.0), (5.0, 1.0), (4.0, 3.3)]


def test_lorentzian_area_is_pi_c_over_L():
    w = np.linspace(0.3 - 2.0, 0.3 + 2.0, 400_001)
    y = lorentzian(w, 0.3, 0.05, 1.7)
    finite = oracles.lorentzian_area(c / (2 * 1.7), 0.05, 2.0)
    assert np.trapezoid(y, w) == pytest.approx(finite, rel=1e-7)
    assert oracles.lorentzian_area(c / (2 * 1.7), 0.05, 1e12) == pytest.approx(math.pi * c / 1.7)
    assert lorentzian(0.3, 0.3, 0.05, 1.7) == pytest.approx(2 * c / (0.05 * 1.7))


@pytest.mark.parametrize("n1,ell_c", SINGLE_LAYER)
def test_lorentzian_series_reproduces_single_layer_response(n1, ell_c):
    g = CavityGeometry.build(n1, 1, ell_c)
    w = np.linspace(0.3, 2.0, 37)
    d = poisson_decomposition_single(g, w)
    ref = np.array([oracles.response_intensity(x, n1, 1, ell_c) for x in w])
    assert np.allclose(d.lorentzian_sum(), ref, rtol=1e-9)


def test_tail_correction_improves_truncated_series():
    g = CavityGeometry.build(3.0, 1, 2.0)
    w = np.linspace(0.6, 1.4, 9)
    d = poisson_decomposition_single(g, w)
    exact = intensity_ratio(g, w)
    bare = np.max(np.abs(d.lorentzian_sum(50, tail_correction=False) / exact - 1))
    fixed = np.max(np.abs(d.lorentzian_sum(50, tail_correction=True) / exact - 1))
    assert fixed < 1e-3 * bare


@pytest.mark.parametrize("n1,ell_c", SINGLE_LAYER)
def test_fit_agrees_with_single_layer_decomposition(n1, ell_c):
    g = CavityGeometry.build(n1, 1, ell_c)
    p = fit_nearest(g, 1.0)
    d = poisson_decomposition_single(g, p.omega_m_eff)
    assert p.gamma == pytest.approx(float(d.gamma), rel=0.03)
    assert p.L_coupling == pytest.approx(d.L1, rel=0.03)
    # the exact Lorentzian centre at the peak frequency is the peak itself
    m_near = round((p.omega_m_eff - float(d.omega_tilde(0))) / d.fsr)
    assert float(d.omega_tilde(m_near)) == pytest.approx(p.omega_m_eff, abs=1e-6)


@pytest.mark.parametrize("n1,ell_c", SINGLE_LAYER)
def test_high_q_limit_close_to_fit(n1, ell_c):
    g = CavityGeometry.build(n1, 1, ell_c)
    p = fit_nearest(g, 1.0)
    # pair the peak with the nearest hard-mirror resonance; a peak pulled just
    # below m*pi*c/ell_c still carries floor label m - 1
    m = round(p.omega_m_eff * ell_c / (math.pi * c))
    assert p.m in (m - 1, m)
    hq = high_q_params_single(g, m)
    assert hq.Gamma_m == pytest.approx(p.gamma, rel=0.06)
    assert abs(hq.omega_tilde_m - p.omega_m_eff) < 0.03


def test_unit_index_slab_has_no_resonator():
    g = CavityGeometry.build(1.0, 1, 0.5)
    assert high_q_params_single(g, 1).no_resonator
    with pytest.raises(NoResonatorError):
        poisson_decomposition_single(g, 1.0)


def test_decomposition_domain():
    with pytest.raises(DomainError):
        poisson_decomposition_single(CavityGeometry.build(2.0, 3, 0.5), 1.0)
    with pytest.raises(DomainError):
        high_q_params_single(CavityGeometry.build(2.0, 1, 0.5), 0)


def test_mode_label_counts_half_waves():
    ell = 0.5
    f = math.pi * c / ell
    assert mode_label(1.0, ell) == 1
    assert mode_label(2 * f, ell) == 2
    assert mode_label(2 * f * (1 - 1e-9), ell) == 2
    assert mode_label(2 * f * 0.99, ell) == 1
    assert mode_label(0.1, ell) == 1


def test_classical_resonances():
    r = classical_resonances(2.0, 0.5, 1.5)
    assert np.allclose(r, [0.5, 0.75, 1.0, 1.25, 1.5])


def test_frequency_grid_resolution():
    g = frequency_grid(0.5, 1.5, 1e-3)
    assert g[0] == 0.5 and g[-1] == 1.5
    assert np.max(np.diff(g)) <= 1e-3 + 1e-15
    with pytest.raises(DomainError):
        frequency_grid(1.5, 0.5, 1e-3)
    with pytest.raises(DomainError):
        frequency_grid(0.5, 1.5, 0)


def test_located_peak_is_local_maximum(fig3_stack):
    spec = scan_response(fig3_stack, (0.8, 1.2), 1e-3)
    for cand in spec.candidates:
        h = 1e-7
        assert cand.height >= intensity_ratio(fig3_stack, cand.omega - h)
        assert cand.height >= intensity_ratio(fig3_stack, cand.omega + h)
        half = intensity_ratio(fig3_stack, np.array([cand.omega - cand.fwhm / 2, cand.omega + cand.fwhm / 2]))
        assert cand.fwhm > 0 and np.all(half < cand.height)


def test_design_resonance_of_fig3_stack(fig3_stack):
    p = fit_nearest(fig3_stack, 1.0)
    assert p.omega_m_eff == pytest.approx(1.0, abs=1e-6)
    assert p.m == 1
    assert p.fit_residual < 0.01
    assert not p.degraded


def test_high_q_fit_reproduces_response(high_q):
    p = fit_nearest(high_q, 1.0)
    w = np.linspace(p.omega_m_eff - p.gamma, p.omega_m_eff + p.gamma, 51)
    assert np.allclose(p.lorentzian(w), intensity_ratio(high_q, w), rtol=1e-3)
    e = effective_lengths(p)
    assert e.ell_eff_ratio == pytest.approx(p.ell_eff / 0.5)
    assert e.discrepancy_ratio == pytest.approx(p.L_coupling / p.ell_eff)


def test_peak_height_relation(high_q):
    p = fit_nearest(high_q, 1.0)
    assert p.height == pytest.approx(2 * c / (p.gamma * p.L_coupling), rel=1e-3)


def test_more_pairs_narrow_the_line():
    widths = [fit_nearest(CavityGeometry.build(1.25, N, 0.5), 1.0).gamma for N in (4, 6, 8, 10)]
    assert all(a > b for a, b in zip(widths, widths[1:]))


@pytest.mark.parametrize("N,ell_c", [(2, 15.0), (1, 20.0), (3, 10.0)])
def test_overlapping_peaks_refused(N, ell_c):
    g = CavityGeometry.build(1.25, N, ell_c)
    spec = scan_response(g, (0.9, 1.1), 1e-4)
    with pytest.raises(OverlappingPeaks):
        fit_peaks(spec, on_overlap="raise")
    spec = scan_response(g, (0.9, 1.1), 1e-4)
    fit_peaks(spec, on_overlap="skip")
    assert any(r["reason"] == "overlapping" for r in spec.rejected)


def test_fit_peaks_bad_policy(fig3_stack):
    with pytest.raises(ValueError):
        fit_peaks(scan_response(fig3_stack, (0.9, 1.1), 1e-3), on_overlap="maybe")


def test_peak_record_fields(high_q):
    rec = fit_highest(high_q, (0.8, 1.2), 1e-4).as_record()
    assert set(rec) >= {"m", "omega_eff", "gamma", "L_coupling", "ell_eff", "fit_residual", "degraded"}
    assert all(isinstance(rec[k], (int, float, bool, list)) for k in rec)


def test_spectrum_lookup_errors():
    g = CavityGeometry.build(1.0, 1, 0.5)
    spec = scan_response(g, (0.9, 1.1), 1e-3)
    assert spec.candidates == []
    with pytest.raises(LookupError):
        spec.nearest_candidate(1.0)
    with pytest.raises(LookupError):
        spec.highest_peak()
