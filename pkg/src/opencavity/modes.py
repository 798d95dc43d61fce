"""Continuum field modes of the mirror-plus-stack cavity.

Every region ``j`` carries a real standing wave
``Phi_j(x) = C * (B_j(x) - conj(B_j(x)))`` with
``B_j(x) = beta_j * exp(i k n_j (x - s_j))``, where ``s_j`` is the left edge of
the region and ``k = omega / c``.  The coefficients follow from continuity of
``Phi`` and ``Phi'`` at every interface, starting from ``B_0 = exp(ik(x+ell_c))``
which enforces the node at the perfect mirror.  For ``n2 = 1`` each step is
exactly the ``1/(1 +- r1)`` recursion for the alternating quarter-wave stack.

``C`` is fixed so that the incoming plane wave outside the stack has amplitude
``-1/sqrt(2 pi c A)``, which gives the delta-orthonormalized scattering modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import SPEED_OF_LIGHT
from .errors import DomainError
from .geometry import CavityGeometry


def wavenumber(omega):
    return np.asarray(omega, dtype=float) / SPEED_OF_LIGHT


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError("angular frequency must be positive")
    return w


def _mode_prefactor(geom: CavityGeometry) -> float:
    return 1.0 / math.sqrt(2.0 * math.pi * SPEED_OF_LIGHT * geom.area)


# --------------------------------------------------------------------------
# single dielectric slab


@dataclass(frozen=True)
class BeamSplitterCoeffs:
    """Spectral transmission ``t`` and reflection ``r`` of one slab.

    ``phi_r`` is the phase of ``r``, unwrapped along the frequency axis when
    ``omega`` is an array.
    """

    t: np.ndarray
    r: np.ndarray
    phi_r: np.ndarray


def interface_reflectivity(n1: float, n2: float = 1.0) -> float:
    return (n1 - n2) / (n1 + n2)


def slab_coefficients(n1: float, delta: float, omega):
    """Closed forms of ``t(omega)`` and ``r(omega)`` for a slab in vacuum."""
    k = wavenumber(omega)
    r1 = interface_reflectivity(n1)
    e2 = np.exp(2j * n1 * k * delta)
    den = 1.0 - e2 * r1**2
    t = (1.0 - r1**2) * np.exp(1j * (n1 - 1.0) * k * delta) / den
    r = np.exp(-1j * k * delta) * r1 * (e2 - 1.0) / den
    return t, r


def unwrap_phase(phase):
    """Principal value plus 2*pi jump correction along the last axis."""
    phase = np.asarray(phase, dtype=float)
    return np.unwrap(phase) if phase.ndim else phase


def single_layer_coeffs(geom: CavityGeometry, omega) -> BeamSplitterCoeffs:
    """Beam-splitter coefficients of the single-layer mirror (``N = 1``)."""
    if geom.N != 1:
        raise DomainError("single_layer_coeffs needs a single-layer mirror (N = 1)")
    _check_omega(omega)
    s = geom.stack
    t, r = slab_coefficients(s.n1, s.delta, omega)
    # r vanishes identically for n1 == 1; keep phi_r defined as zero there
    phi = np.where(np.abs(r) > 0, np.angle(r), 0.0)
    return BeamSplitterCoeffs(t, r, unwrap_phase(phi))


def single_layer_response(geom: CavityGeometry, omega):
    """Cavity response ``T = t / (1 + r exp(2ik(ell_c + delta/2)))``."""
    bs = single_layer_coeffs(geom, omega)
    k = wavenumber(omega)
    L1 = geom.ell_c + 0.5 * geom.stack.delta
    return bs.t / (1.0 + bs.r * np.exp(2j * k * L1))


def single_layer_mode(geom: CavityGeometry, omega: float, x):
    """Normalized single-layer mode from the closed forms, region by region."""
    if geom.N != 1:
        raise DomainError("single_layer_mode needs N = 1")
    _check_omega(omega)
    s = geom.stack
    k = float(wavenumber(omega))
    x = np.asarray(x, dtype=float)
    T = single_layer_response(geom, omega)
    r1 = interface_reflectivity(s.n1)
    pre = _mode_prefactor(geom)
    el = np.exp(1j * k * geom.ell_c)
    inside = 2j * el * T * np.sin(k * (x + geom.ell_c))
    stack = el * T / (1 + r1) * (
        (el - r1 / el) * np.exp(1j * k * s.n1 * x) + (r1 * el - 1 / el) * np.exp(-1j * k * s.n1 * x)
    )
    out = el**2 * T / np.conj(T) * np.exp(1j * k * x) - np.exp(-1j * k * x)
    j = geom.region_index(x)
    return pre * np.where(j == 0, inside, np.where(j == 1, stack, out))


# --------------------------------------------------------------------------
# multilayer recursion


@dataclass(frozen=True)
class BRecursion:
    """Coefficients ``beta_j`` of ``B_j(omega, x)`` for every region.

    ``beta`` has shape ``(len(omega), 2N + 1)``; scalar ``omega`` gives one row.
    """

    geom: CavityGeometry
    omega: np.ndarray
    beta: np.ndarray

    def value(self, j: int, x):
        """``B_j(omega, x)``; broadcasts ``omega`` rows against ``x``."""
        g = self.geom
        n = g.indices[j]
        s = g.starts[j]
        k = wavenumber(self.omega)[:, None]
        x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
        return self.beta[:, j, None] * np.exp(1j * k * n * (x - s))

    def at_end(self, j: int):
        """``B_j`` at the right edge of region ``j`` (one value per omega)."""
        g = self.geom
        k = wavenumber(self.omega)
        return self.beta[:, j] * np.exp(1j * k * g.indices[j] * g.widths[j])


def bj_recursion(geom: CavityGeometry, omega) -> BRecursion:
    w = np.atleast_1d(_check_omega(omega))
    beta = _kernels.recursion(wavenumber(w), geom.indices, geom.widths)
    return BRecursion(geom, w, beta)


@dataclass(frozen=True)
class ModeField:
    """Normalized piecewise mode for one frequency.

    ``beta`` holds the recursion coefficients and ``norm_const`` the common
    normalization ``C``.  Evaluation at any ``x`` is O(1) per point.
    """

    omega: float
    geom: CavityGeometry
    beta: np.ndarray
    norm_const: complex

    @property
    def k(self) -> float:
        return self.omega / SPEED_OF_LIGHT

    @property
    def coefficients(self) -> np.ndarray:
        """Plane-wave pairs ``(A+, A-)`` per region: ``A+ e^{iknx} + A- e^{-iknx}``."""
        n = self.geom.indices
        s = self.geom.starts
        ph = np.exp(-1j * self.k * n * s)
        C = self.norm_const
        return np.stack([C * self.beta * ph, -C * np.conj(self.beta) / ph], axis=1)

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        j = self.geom.region_index(x)
        n = self.geom.indices[j]
        b = self.beta[j]
        e = np.exp(1j * self.k * n * (x - self.geom.starts[j]))
        return j, n, b * e

    def __call__(self, x):
        _, _, B = self._parts(x)
        return self.norm_const * (B - np.conj(B))

    def derivative(self, x):
        _, n, B = self._parts(x)
        return self.norm_const * 1j * self.k * n * (B + np.conj(B))

    def side_values(self, j: int, x: float):
        """``(Phi, Phi')`` of the region-``j`` expression at ``x``, even off-region."""
        n = self.geom.indices[j]
        B = self.beta[j] * np.exp(1j * self.k * n * (x - self.geom.starts[j]))
        C = self.norm_const
        return C * (B - np.conj(B)), C * 1j * self.k * n * (B + np.conj(B))

    def intensity(self, x):
        return np.abs(self(x)) ** 2

    def region_peak_intensity(self, j: int) -> float:
        """Exact maximum of ``|Phi|^2`` over region ``j``.

        In every region ``Phi = 2iC |beta| sin(theta + arg beta)`` with
        ``theta = k n (x - s_j)``.  The outside region is unbounded, so its
        maximum is the full standing-wave amplitude.
        """
        g = self.geom
        amp2 = 4.0 * abs(self.norm_const) ** 2 * abs(self.beta[j]) ** 2
        if j == g.n_regions - 1:
            return amp2
        span = self.k * g.indices[j] * g.widths[j]
        a = np.angle(self.beta[j])
        # first crest of sin^2 at or after theta = 0
        crest = (math.pi / 2 - a) % math.pi
        if crest <= span:
            return amp2
        return amp2 * max(math.sin(a) ** 2, math.sin(span + a) ** 2)

    def peak_intensity(self, region: str) -> float:
        """Maximum ``|Phi|^2`` in ``'in'``, ``'stack'`` or ``'out'``."""
        last = self.geom.n_regions - 1
        if region == "in":
            js = [0]
        elif region == "stack":
            js = range(1, last)
        elif region == "out":
            js = [last]
        else:
            raise ValueError(f"unknown region {region!r}")
        return max(self.region_peak_intensity(j) for j in js)

    def sample(self, n_samples: int, outside: float = 1.0):
        """Positions from the mirror to ``outside`` past the stack, with values."""
        x = np.linspace(-self.geom.ell_c, self.geom.stack_end + outside, n_samples)
        return x, self(x), self.geom.region_index(x)


def assemble_mode(geom: CavityGeometry, omega: float) -> ModeField:
    w = float(_check_omega(omega))
    beta = bj_recursion(geom, w).beta[0]
    k = w / SPEED_OF_LIGHT
    beta_out = beta[-1] * np.exp(-1j * k * geom.stack_end)
    C = _mode_prefactor(geom) / np.conj(beta_out)
    return ModeField(w, geom, beta, complex(C))


# --------------------------------------------------------------------------
# response functions


@dataclass(frozen=True)
class ResponseValue:
    """Field amplitude ratio ``T`` of the cavity and the stack phase ``phi_B``."""

    T: np.ndarray
    phi_B: np.ndarray

    @property
    def intensity_ratio(self):
        return np.abs(self.T) ** 2


def response(geom: CavityGeometry, omega):
    """Complex ``T(omega)`` straight from the outgoing coefficient.

    Cheaper than :func:`multilayer_response` because intermediate regions
    are not stored; used for spectral scans.
    """
    w = _check_omega(omega)
    k = wavenumber(np.atleast_1d(w))
    b = _kernels.outgoing(k, geom.indices, geom.widths)
    T = np.exp(-1j * k * (geom.ell_c + geom.stack_end)) / np.conj(b)
    return T if np.ndim(w) else T[0]


def intensity_ratio(geom: CavityGeometry, omega):
    """``|T(omega)|^2`` = inside over outside peak intensity."""
    return np.abs(response(geom, omega)) ** 2


def _last_junction(rec: BRecursion):
    """``B_{2N-2}`` at the start of the last high-index layer."""
    return rec.at_end(2 * rec.geom.N - 2)


def multilayer_response(geom: CavityGeometry, omega) -> ResponseValue:
    w = _check_omega(omega)
    rec = bj_recursion(geom, w)
    k = wavenumber(rec.omega)
    T = np.exp(-1j * k * (geom.ell_c + geom.stack_end)) / np.conj(rec.beta[:, -1])
    B = _last_junction(rec)
    phi_B = unwrap_phase(2.0 * np.angle(B))
    if not np.ndim(w):
        return ResponseValue(T[0], phi_B[0])
    return ResponseValue(T, phi_B)


def response_prefactor(geom: CavityGeometry, omega):
    """``exp(-ik(ell_c + (N-1)(delta+alpha))) / conj(B_{2N-2})``.

    For ``n2 = 1`` this equals the response of the same cavity with one
    pair of layers fewer.
    """
    rec = bj_recursion(geom, omega)
    k = wavenumber(rec.omega)
    x_last = geom.starts[2 * geom.N - 1]
    val = np.exp(-1j * k * (geom.ell_c + x_last)) / np.conj(_last_junction(rec))
    return val if np.ndim(omega) else val[0]


def factored_response(geom: CavityGeometry, omega) -> ResponseValue:
    """Response assembled as prefactor times the last-slab factor.

    ``T_N = T_{N-1} * t / (1 + exp(ik delta) exp(i phi_B) r)``, valid for
    ``n2 = 1`` where every high-index layer is a slab in vacuum.
    """
    if geom.stack.n2 != 1.0:
        raise DomainError("factored response requires n2 = 1")
    rec = bj_recursion(geom, omega)
    k = wavenumber(rec.omega)
    B = _last_junction(rec)
    phi_B = 2.0 * np.angle(B)
    t, r = slab_coefficients(geom.stack.n1, geom.stack.delta, rec.omega)
    x_last = geom.starts[2 * geom.N - 1]
    pre = np.exp(-1j * k * (geom.ell_c + x_last)) / np.conj(B)
    T = pre * t / (1.0 + np.exp(1j * k * geom.stack.delta) * np.exp(1j * phi_B) * r)
    phi_B = unwrap_phase(phi_B)
    if not np.ndim(omega):
        return ResponseValue(T[0], phi_B[0])
    return ResponseValue(T, phi_B)
