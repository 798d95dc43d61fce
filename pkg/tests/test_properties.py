import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from opencavity.config import SCHEMA, _convert, _format
from opencavity.constants import SPEED_OF_LIGHT as c
from opencavity.coupling import AtomSpec, eta_continuum, g_effective
from opencavity.dynamics import damped_rabi, evolve_effective
from opencavity.geometry import CavityGeometry
from opencavity.modes import assemble_mode, intensity_ratio, slab_coefficients
from opencavity.spectra import LorentzianPeak, mode_label

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])

n1s = st.floats(1.05, 3.0)
Ns = st.integers(1, 12)
ells = st.floats(0.1, 5.0)
omegas = st.floats(0.05, 3.0)


@st.composite
def geometries(draw, n2=True):
    n1 = draw(n1s)
    return CavityGeometry.build(n1, draw(Ns), draw(ells), draw(st.floats(1.0, n1)) if n2 else 1.0)


@FAST
@given(geometries())
def test_layer_widths_sum(g):
    s = g.stack
    assert g.widths[1:].sum() == pytest.approx(s.N * s.delta + (s.N - 1) * s.alpha, rel=1e-12)
    assert g.indices[2 * s.N - 1] == s.n1
    assert g.stack_end == pytest.approx(g.widths[1:].sum(), rel=1e-12)


@settings(max_examples=10, deadline=None)
@given(geometries(), st.integers(0, 2**32 - 1))
def test_permittivity_agrees_with_region_assignment(g, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-g.ell_c, g.stack_end + 1.0, 10**5)
    j = g.region_index(x)
    eps = g.permittivity_at(x)
    assert np.array_equal(eps, g.indices[j] ** 2)
    lo = g.starts[j]
    hi = np.append(g.starts[1:], np.inf)[j]
    assert np.all((lo <= x) & (x < hi))


def test_permittivity_million_points(rng):
    g = CavityGeometry.build(1.25, 11, 0.75)
    x = rng.uniform(-g.ell_c, g.stack_end + 2.0, 10**6)
    j = g.region_index(x)
    assert np.array_equal(g.permittivity_at(x), g.indices[j] ** 2)
    for r in range(g.n_regions):
        lo, hi = g.layer_bounds(r)
        sel = x[j == r]
        assert np.all((sel >= lo) & (sel < hi))


@FAST
@given(n1s, omegas)
def test_beam_splitter_relations(n1, w):
    t, r = slab_coefficients(n1, 1 / (4 * n1), w)
    assert abs(abs(t) ** 2 + abs(r) ** 2 - 1) < 1e-12
    assert abs(np.conj(r) * t + np.conj(t) * r) < 1e-12


@FAST
@given(geometries(), omegas)
def test_response_nonnegative_and_flux_balanced(g, w):
    assert intensity_ratio(g, w) >= 0
    mode = assemble_mode(g, w)
    a_plus, a_minus = mode.coefficients[-1]
    assert abs(abs(a_plus) - abs(a_minus)) < 1e-12 * abs(a_minus)


@FAST
@given(geometries(), omegas)
def test_continuity_and_node(g, w):
    mode = assemble_mode(g, w)
    scale = math.sqrt(max(mode.peak_intensity("in"), mode.peak_intensity("stack"), mode.peak_intensity("out")))
    for j in range(1, g.n_regions):
        x = g.starts[j]
        a = mode.side_values(j - 1, x)
        b = mode.side_values(j, x)
        assert abs(a[0] - b[0]) <= 1e-10 * scale
        assert abs(a[1] - b[1]) <= 1e-10 * scale * mode.k * g.stack.n1
    assert abs(mode(-g.ell_c)) < 1e-14 * math.sqrt(mode.peak_intensity("in")) + 1e-300


@FAST
@given(st.floats(0.05, 3.0), st.floats(0.1, 5.0))
def test_mode_label_counts_interior_nodes(w, ell):
    # nodes of sin(w (x + ell_c)/c) strictly inside the cavity, plus the node at the stack face
    spacing = math.pi * c / w
    nodes = math.floor(ell / spacing * (1 + 1e-12))
    assert mode_label(w, ell) == max(1, nodes)


@FAST
@given(st.floats(0.0, 2 * math.pi), st.floats(0.1, 2.0), st.floats(0.05, 0.95))
def test_counter_rotating_modulus_independent_of_dipole_phase(phase, mag, frac):
    g = CavityGeometry.build(2.0, 6, 0.5)
    p = LorentzianPeak(1, 1.0, 1e-4, 0.75, 0.5, 0.0, 1.0, 0.5, (0.99, 1.01))
    a = g_effective(AtomSpec(1.0, -frac * 0.5, mag * complex(math.cos(phase), math.sin(phase))), p, g)
    b = g_effective(AtomSpec(1.0, -frac * 0.5, mag), p, g)
    assert abs(a.g_bar_m) == pytest.approx(abs(b.g_bar_m), rel=1e-12)
    assert abs(a.g_m) == pytest.approx(abs(b.g_m), rel=1e-12)


@FAST
@given(st.floats(0.0, 0.5), st.floats(-0.5, 0.5), st.floats(0.0, 0.5), st.floats(0.0, 50.0))
def test_damped_rabi_is_contractive(g, det, gam, t):
    assert abs(damped_rabi(g, det, gam, t)) <= 1 + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.2, 0.2), st.floats(0.0, 0.3), st.floats(0.0, 0.2)), min_size=1, max_size=3))
def test_effective_leakage_nonnegative_nondecreasing(modes):
    det, gam, g = zip(*modes)
    tr = evolve_effective(1.0, det, gam, g, duration=30.0, n_samples=61)
    leak = tr.leakage()
    assert np.all(leak >= -1e-9)
    assert np.all(np.diff(leak) >= -1e-9)


@FAST
@given(geometries(n2=False), st.floats(0.05, 0.95), st.floats(0.3, 2.0))
def test_eta_scales_with_dipole(g, frac, w):
    x = -frac * g.ell_c
    a = eta_continuum(AtomSpec(1.0, x, 1.0), g, w)
    b = eta_continuum(AtomSpec(1.0, x, 2.5j), g, w)
    assert b == pytest.approx(2.5j * a, rel=1e-12, abs=1e-300)


@FAST
@given(st.floats(1e-6, 1e6, allow_nan=False))
def test_config_float_roundtrip(v):
    assert _convert("float", _format(v)) == v


@FAST
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_config_complex_roundtrip(z):
    assert _convert("complex", _format(complex(z))) == complex(z)


def test_schema_defaults_are_representable():
    for sec, keys in SCHEMA.items():
        for key, (tag, default) in keys.items():
            if default is not None:
                assert _convert(tag, _format(default)) == default
