"""Resonator eigenmodes with capacitive qubit loading and a lossy line impedance.

The resonator is a transmission line of length L with open (Neumann) ends,
magnetic inductance per unit length ``ell_m`` and capacitance per unit length
``c(x) = c + sum_j C_sj delta(x - x_j)``: each qubit contributes a lumped
series capacitance at its position.  The spatial eigenproblem is material
independent: wave numbers ``k_n`` solve a secular equation fixed entirely by
the boundary conditions and the delta jumps, and the mode functions are
piecewise combinations of cos(kx), sin(kx) normalized with the delta-weighted
inner product ``int ell_m c(x) Psi^2 dx = 1``.

The material enters through the dispersion relation: the complex mode
frequency is the fixed point of

    omega^2 = (k_n^2 + i g omega c Z_s(omega)) / (ell_m c),

solved by under-relaxed Picard iteration with a secant fallback.  With the
e^{+i omega t} Fourier convention a decaying mode has omega = nu + i kappa,
kappa > 0; the solver picks the Re omega > 0 branch and reports kappa with
this sign.

In the Green's function ``G = sum_n Psi_n(x) Psi_n(x') / (omega^2 -
omega_n^2(omega))`` the denominator is evaluated at the probe frequency.
Because the anti-hermitian part of the operator is spatially constant, left
and right eigenfunctions share spatial profiles and the numerator reduces to
``Psi_n(x) Psi_n(x')``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from .errors import (
    BracketingFailure,
    DomainError,
    GapStraddle,
    NoConvergence,
    PoleProximity,
)
from .impedance import Material, surface_impedance
from .mattis_bardeen import ComplexFreq

_TWO_PI_GHZ = 2.0 * math.pi * 1e9  # rad/s per GHz


@dataclass(frozen=True)
class QubitLoad:
    """One capacitive load: position (m), series capacitance (F), charge ratio."""

    position: float
    c_series: float
    gamma: float = 1.0


@dataclass(frozen=True)
class ResonatorGeometry:
    length: float  # L, meters
    ell_m: float  # magnetic inductance per unit length, H/m
    c_per_len: float  # capacitance per unit length, F/m
    g_geom: float  # geometric factor multiplying Z_s, 1/m
    qubits: tuple[QubitLoad, ...] = ()

    def __post_init__(self) -> None:
        for name in ("length", "ell_m", "c_per_len"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive, got {v}")
        if not (self.g_geom >= 0.0 and math.isfinite(self.g_geom)):
            raise DomainError(f"g_geom must be >= 0, got {self.g_geom}")
        object.__setattr__(self, "qubits", tuple(self.qubits))
        last = -math.inf
        for q in self.qubits:
            if not (0.0 <= q.position <= self.length):
                raise DomainError(f"qubit position {q.position} outside [0, {self.length}]")
            if not (q.c_series > 0.0 and math.isfinite(q.c_series)):
                raise DomainError(f"qubit series capacitance must be positive, got {q.c_series}")
            if q.position <= last:
                raise DomainError("qubit positions must be strictly increasing")
            last = q.position

    @property
    def bare_velocity(self) -> float:
        """Propagation speed 1/sqrt(ell_m c) of the unloaded line, m/s."""
        return 1.0 / math.sqrt(self.ell_m * self.c_per_len)

    def bare_frequency_ghz(self, k: float) -> float:
        """Lossless mode frequency k v / (2 pi) in GHz."""
        return k * self.bare_velocity / _TWO_PI_GHZ


def derive_line_constants(
    f0_ghz: float, z0_ohm: float = 50.0, length: float = 0.01
) -> tuple[float, float]:
    """(ell_m, c) of a line whose unloaded fundamental is f0 at impedance Z0.

    Reconstruction helper: published data sheets usually quote (f0, Z0, L)
    rather than per-unit-length constants.  From v = 2 L f0 and
    Z0 = sqrt(ell_m / c):  ell_m = Z0 / v,  c = 1 / (Z0 v).
    """
    if f0_ghz <= 0.0 or z0_ohm <= 0.0 or length <= 0.0:
        raise DomainError("f0, Z0 and length must all be positive")
    v = 2.0 * length * f0_ghz * 1e9
    return z0_ohm / v, 1.0 / (z0_ohm * v)


@dataclass(frozen=True)
class Mode:
    """One resonator mode.

    ``omega_n`` holds the complex eigenfrequency in GHz (ordinary frequency):
    nu component = oscillation frequency, kappa component = decay rate.  For a
    lossless construction kappa is exactly 0.  ``segment_amplitudes`` holds
    (P_i, Q_i) with Psi(x) = norm * (P_i cos(k x) + Q_i sin(k x)) on the i-th
    inter-qubit segment.
    """

    n: int
    k_n: float
    omega_n: ComplexFreq
    norm: float
    segment_amplitudes: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"mode index must be >= 1, got {self.n}")


def _segment_breaks(geometry: ResonatorGeometry) -> np.ndarray:
    interior = [q.position for q in geometry.qubits if 0.0 < q.position < geometry.length]
    return np.array([0.0] + interior + [geometry.length])


def secular_value(k, geometry: ResonatorGeometry):
    """Pole-free secular function whose positive zeros are the wave numbers.

    For a single load the closed form is
    ``sin(kL) + k (C_s/c) cos(k x_q) cos(k (L - x_q))``; in general the same
    quantity is the relevant entry of the 2x2 transfer matrix propagating
    (Psi, Psi'/k) from the x=0 Neumann condition through every capacitive
    jump to x=L (the two agree identically; the closed form is kept for the
    common case).  Accepts scalar or ndarray ``k``.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0.0):
        raise DomainError("secular_value requires k > 0")
    L = geometry.length
    c = geometry.c_per_len
    if len(geometry.qubits) == 1:
        q = geometry.qubits[0]
        out = np.sin(k * L) + k * (q.c_series / c) * np.cos(k * q.position) * np.cos(
            k * (L - q.position)
        )
        return out if out.ndim else float(out)
    u = np.ones_like(k)
    v = np.zeros_like(k)
    x_prev = 0.0
    for q in geometry.qubits:
        theta = k * (q.position - x_prev)
        u, v = u * np.cos(theta) + v * np.sin(theta), -u * np.sin(theta) + v * np.cos(theta)
        v = v - k * (q.c_series / c) * u
        x_prev = q.position
    theta = k * (L - x_prev)
    v_end = -u * np.sin(theta) + v * np.cos(theta)
    out = -v_end
    return out if out.ndim else float(out)


def secular_roots(geometry: ResonatorGeometry, n_max: int) -> np.ndarray:
    """First ``n_max`` positive wave numbers, bisected to |dk| L <= 1e-12.

    Brackets come from consecutive sign changes on a grid of resolution
    pi/(8L); if fewer than ``n_max`` brackets appear below the expected
    spectral extent, the grid is refined by successive factors up to x16
    before giving up with BracketingFailure (pathological loading).
    """
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    L = geometry.length
    base = math.pi / L
    for refine in (1, 2, 4, 8, 16):
        step = base / (8 * refine)
        k_grid = np.arange(step, (n_max + 2) * base + step, step)
        vals = np.asarray(secular_value(k_grid, geometry))
        sign = np.sign(vals)
        exact = np.flatnonzero(vals == 0.0)
        flips = np.flatnonzero((sign[:-1] * sign[1:]) < 0.0)
        roots = list(k_grid[exact])
        lo, hi = k_grid[flips], k_grid[flips + 1]
        if lo.size:
            f_lo = vals[flips]
            for _ in range(64):
                mid = 0.5 * (lo + hi)
                f_mid = np.asarray(secular_value(mid, geometry))
                take_low = (f_lo * f_mid) <= 0.0
                hi = np.where(take_low, mid, hi)
                lo = np.where(take_low, lo, mid)
                f_lo = np.where(take_low, f_lo, f_mid)
                if np.max(hi - lo) * L <= 1e-12:
                    break
            roots.extend(0.5 * (lo + hi))
        roots = np.sort(np.array(roots))
        if roots.size >= n_max:
            return roots[:n_max]
    raise BracketingFailure(
        f"found only {roots.size} of {n_max} secular roots at x16 grid refinement; "
        "the loading is pathological"
    )


def _raw_segments(k: float, geometry: ResonatorGeometry) -> list[tuple[float, float]]:
    """Un-normalized (P, Q) per segment: continuity plus the derivative jumps."""
    c = geometry.c_per_len
    p, q = 1.0, 0.0
    segments = []
    for load in geometry.qubits:
        xq, ctilde = load.position, load.c_series / c
        if xq == 0.0:
            # Load at the Neumann end: the jump acts before any propagation.
            q = q - k * ctilde * p
            continue
        if xq == geometry.length:
            # Load at the far end only modifies the secular condition; the
            # interior amplitudes are unaffected.
            continue
        segments.append((p, q))
        psi = p * math.cos(k * xq) + q * math.sin(k * xq)
        # Psi'(x+) = Psi'(x-) - k^2 (C_s/c) Psi(x); in (P, Q) form the slope
        # coefficient is Psi'/k = -P sin + Q cos, so Q jumps in the
        # cos-projection: dQ = -k Ctilde Psi * cos, dP = +k Ctilde Psi * sin.
        p = p + k * ctilde * psi * math.sin(k * xq)
        q = q - k * ctilde * psi * math.cos(k * xq)
    segments.append((p, q))
    return segments


def _segment_square_integral(p: float, q: float, k: float, a: float, b: float) -> float:
    """Exact integral of (P cos kx + Q sin kx)^2 over [a, b]."""
    s = (p * p + q * q) * 0.5 * (b - a)
    s += (p * p - q * q) * (math.sin(2 * k * b) - math.sin(2 * k * a)) / (4 * k)
    s += p * q * (math.cos(2 * k * a) - math.cos(2 * k * b)) / (2 * k)
    return s


def _normalization(k: float, geometry: ResonatorGeometry, segments) -> float:
    breaks = _segment_breaks(geometry)
    total = 0.0
    for (p, q), a, b in zip(segments, breaks[:-1], breaks[1:]):
        total += geometry.c_per_len * _segment_square_integral(p, q, k, a, b)
    for load in geometry.qubits:
        psi = _eval_segments(np.array([load.position]), k, geometry, segments, 1.0)[0]
        total += load.c_series * psi * psi
    total *= geometry.ell_m
    return 1.0 / math.sqrt(total)


def _eval_segments(x: np.ndarray, k: float, geometry: ResonatorGeometry, segments, norm):
    breaks = _segment_breaks(geometry)
    idx = np.clip(np.searchsorted(breaks, x, side="right") - 1, 0, len(segments) - 1)
    p = np.array([segments[i][0] for i in range(len(segments))])[idx]
    q = np.array([segments[i][1] for i in range(len(segments))])[idx]
    return norm * (p * np.cos(k * x) + q * np.sin(k * x))


def build_mode(n: int, k: float, geometry: ResonatorGeometry) -> Mode:
    """Assemble a lossless Mode (kappa = 0) for wave number ``k``."""
    segments = _raw_segments(k, geometry)
    norm = _normalization(k, geometry, segments)
    return Mode(
        n=n,
        k_n=k,
        omega_n=ComplexFreq(geometry.bare_frequency_ghz(k), 0.0),
        norm=norm,
        segment_amplitudes=tuple((p, q) for p, q in segments),
    )


def resonator_modes(geometry: ResonatorGeometry, n_max: int) -> list[Mode]:
    """Lossless modes 1..n_max from the secular roots."""
    return [build_mode(n + 1, k, geometry) for n, k in enumerate(secular_roots(geometry, n_max))]


def mode_function(mode: Mode, geometry: ResonatorGeometry, x) -> np.ndarray | float:
    """Normalized mode amplitude Psi_n(x); scalar or ndarray ``x`` in [0, L]."""
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.0) | (x_arr > geometry.length)):
        raise DomainError("x outside the resonator")
    out = _eval_segments(np.atleast_1d(x_arr), mode.k_n, geometry, mode.segment_amplitudes, mode.norm)
    return out if x_arr.ndim else float(out[0])


@dataclass(frozen=True)
class FixedPointOptions:
    tol: float = 1e-10
    max_iter: int = 200
    relaxation: float = 0.5
    epsilon_gap: float = 1e-3


def _dispersion_rhs(
    omega: complex, k: float, material: Material, geometry: ResonatorGeometry
) -> complex:
    """(k^2 + i g omega c Z_s(omega)) / (ell_m c), with omega in rad/s."""
    if material.impedance_prefactor == 0.0:
        z_s = 0.0j
    else:
        z_s = surface_impedance(material, omega / _TWO_PI_GHZ)
    num = k * k + 1j * geometry.g_geom * omega * geometry.c_per_len * z_s
    return num / (geometry.ell_m * geometry.c_per_len)


def fixed_point_eigenfrequency(
    k_n: float,
    material: Material,
    geometry: ResonatorGeometry,
    options: FixedPointOptions = FixedPointOptions(),
    seed_ghz: complex | None = None,
) -> ComplexFreq:
    """Complex eigenfrequency (GHz) solving omega^2 = rhs(omega) for one mode.

    Under-relaxed Picard iteration on omega <- sqrt(rhs(omega)) (principal
    branch, Re > 0), falling back to secant iteration on the residual if the
    Picard updates stall.  Below-gap solutions stay exactly real: the surface
    impedance is purely imaginary there, making rhs real and positive.
    ``seed_ghz`` overrides the default starting point (the bare frequency
    k_n v); the fixed point must not depend on it.

    Warns GapStraddle and restarts from just across the gap if an iterate
    crosses the pair-breaking edge; a second crossing raises NoConvergence.
    """
    gap_rad = material.gap_frequency * _TWO_PI_GHZ  # reduced nu = 2 in rad/s
    if seed_ghz is None:
        omega = complex(k_n * geometry.bare_velocity)
    else:
        omega = complex(seed_ghz) * _TWO_PI_GHZ
        if omega.real <= 0.0:
            raise DomainError(f"seed must have a positive real part, got {seed_ghz}")
    residuals: list[float] = []
    restarted = False

    def _residual(w: complex) -> complex:
        return w * w - _dispersion_rhs(w, k_n, material, geometry)

    def _side(w: complex) -> bool:
        return w.real > gap_rad

    side0 = _side(omega)
    prev: tuple[complex, complex] | None = None
    for it in range(options.max_iter):
        f = _residual(omega)
        rel = abs(f) / max(abs(omega) ** 2, 1e-300)
        residuals.append(rel)
        if rel <= options.tol:
            nu_ghz = omega.real / _TWO_PI_GHZ
            kap_ghz = omega.imag / _TWO_PI_GHZ
            if abs(kap_ghz) < 1e-14 * max(1.0, abs(nu_ghz)):
                kap_ghz = 0.0
            return ComplexFreq(nu_ghz, kap_ghz)
        stalled = (
            len(residuals) >= 8
            and residuals[-1] > 0.5 * residuals[-8]
            and prev is not None
        )
        if stalled:
            w0, f0 = prev
            denom = f - f0
            if denom != 0.0:
                omega_new = omega - f * (omega - w0) / denom
            else:
                omega_new = omega
        else:
            target = np.sqrt(complex(_dispersion_rhs(omega, k_n, material, geometry)))
            if target.real < 0.0:
                target = -target
            lam = options.relaxation
            omega_new = (1.0 - lam) * omega + lam * target
        prev = (omega, f)
        if _side(omega_new) != side0:
            if restarted:
                raise NoConvergence(
                    "fixed-point iterate re-crossed the gap edge", residual_history=residuals
                )
            warnings.warn(
                f"fixed-point iterate crossed the gap edge at k={k_n:.6g}; "
                "restarting from the across-gap side",
                GapStraddle,
                stacklevel=2,
            )
            restarted = True
            side0 = not side0
            if side0:
                omega_new = complex(gap_rad * (1.0 + options.epsilon_gap), max(omega_new.imag, 0.0))
            else:
                omega_new = complex(gap_rad * (1.0 - options.epsilon_gap))
            prev = None
            residuals.clear()
        omega = omega_new
    raise NoConvergence(
        f"dispersion fixed point did not reach tol={options.tol} in "
        f"{options.max_iter} iterations",
        residual_history=residuals,
    )


def dispersive_modes(
    geometry: ResonatorGeometry,
    material: Material,
    n_max: int,
    options: FixedPointOptions = FixedPointOptions(),
) -> list[Mode]:
    """Modes 1..n_max with complex eigenfrequencies from the dispersion fixed point."""
    out = []
    for mode in resonator_modes(geometry, n_max):
        omega = fixed_point_eigenfrequency(mode.k_n, material, geometry, options)
        out.append(replace(mode, omega_n=omega))
    return out


def _mode_matrix(modes, geometry: ResonatorGeometry, x: np.ndarray) -> np.ndarray:
    """Psi_n(x) stacked as shape (n_modes, x.size)."""
    return np.vstack([mode_function(m, geometry, x) for m in modes])


def greens_function(
    x,
    x_prime,
    omega_ghz: complex,
    modes,
    material: Material,
    geometry: ResonatorGeometry,
) -> complex:
    """Truncated bi-orthogonal Green's function at probe frequency omega (GHz).

    G(x, x'; omega) = sum_n Psi_n(x) Psi_n(x') / (omega^2 - omega_n^2(omega)),
    with omega_n^2(omega) = (k_n^2 + i g omega c Z_s(omega)) / (ell_m c)
    evaluated at the probe frequency.  Frequencies in rad/s internally; the
    result carries the SI normalization of the modes.

    Probes with a negative real part are evaluated through the reality
    reflection of the impedance, Z_s(-conj(omega)) = conj(Z_s(omega)), which
    gives the response function its conjugation symmetry
    G(x, x'; -conj(omega)) = conj(G(x, x'; omega)).
    """
    omega = complex(omega_ghz) * _TWO_PI_GHZ
    ks = np.array([m.k_n for m in modes])
    if material.impedance_prefactor == 0.0:
        z_s = 0.0j
    elif complex(omega_ghz).real < 0.0:
        z_s = np.conj(surface_impedance(material, -complex(omega_ghz).conjugate()))
    else:
        z_s = surface_impedance(material, complex(omega_ghz))
    omega_n_sq = (
        ks**2 + 1j * geometry.g_geom * omega * geometry.c_per_len * z_s
    ) / (geometry.ell_m * geometry.c_per_len)
    roots = np.sqrt(omega_n_sq.astype(complex))
    if np.any(np.abs(omega - roots) <= 1e-9 * np.abs(roots)):
        raise PoleProximity(f"probe frequency {omega_ghz} GHz within 1e-9 of a pole")
    den = omega * omega - omega_n_sq
    psi_x = _mode_matrix(modes, geometry, np.atleast_1d(np.asarray(x, dtype=float)))[:, 0]
    psi_xp = _mode_matrix(modes, geometry, np.atleast_1d(np.asarray(x_prime, dtype=float)))[:, 0]
    return complex(np.sum(psi_x * psi_xp / den))


def _weighted_inner(
    geometry: ResonatorGeometry, x_grid: np.ndarray, f_vals: np.ndarray, g_vals: np.ndarray,
    f_at_loads: np.ndarray, g_at_loads: np.ndarray,
) -> float | complex:
    """<f, g> with weight ell_m c(x), delta terms included; Simpson in x."""
    bulk = simpson(f_vals * g_vals, x=x_grid) * geometry.c_per_len
    point = sum(
        load.c_series * fa * ga
        for load, fa, ga in zip(geometry.qubits, f_at_loads, g_at_loads)
    )
    return geometry.ell_m * (bulk + point)


def zero_mode_amplitude(geometry: ResonatorGeometry) -> float:
    """Amplitude of the uniform zero-frequency mode of the open line.

    An open (Neumann) line always carries a k = 0 solution, Psi = const, with
    eigenfrequency exactly zero even in the presence of capacitive loads (the
    derivative jump -k^2 (C_s/c) Psi vanishes with k).  It is not part of the
    dynamical mode list, which starts at n = 1, but it does belong to the
    basis the completeness relation sums over; its normalized amplitude under
    the delta-weighted inner product is 1/sqrt(ell_m (c L + sum C_s)).
    """
    total_c = geometry.c_per_len * geometry.length + sum(q.c_series for q in geometry.qubits)
    return 1.0 / math.sqrt(geometry.ell_m * total_c)


def completeness_residual(geometry: ResonatorGeometry, modes, test_function) -> float:
    """Relative L^2 defect of expanding ``test_function`` in the first modes.

    Coefficients use the delta-weighted inner product the modes are
    orthonormal under; the residual norm uses the same weight.  The uniform
    zero mode (see :func:`zero_mode_amplitude`) is included in the expansion
    automatically: it carries the mean of the test function, which no k > 0
    mode can represent.
    """
    n_grid = max(4097, 16 * len(modes) + 1)
    x = np.linspace(0.0, geometry.length, n_grid)
    x_loads = np.array([q.position for q in geometry.qubits])
    f = np.asarray([test_function(xi) for xi in x], dtype=float)
    f_loads = np.asarray([test_function(xi) for xi in x_loads], dtype=float)
    psi = _mode_matrix(modes, geometry, x)
    psi_loads = (
        _mode_matrix(modes, geometry, x_loads) if x_loads.size else np.zeros((len(modes), 0))
    )
    psi0 = zero_mode_amplitude(geometry)
    coeffs = np.array(
        [
            _weighted_inner(
                geometry, x, np.full_like(x, psi0), f, np.full_like(x_loads, psi0), f_loads
            )
        ]
        + [
            _weighted_inner(geometry, x, psi[i], f, psi_loads[i], f_loads)
            for i in range(len(modes))
        ]
    )
    recon = coeffs[0] * psi0 + coeffs[1:] @ psi
    recon_loads = coeffs[0] * psi0 + (coeffs[1:] @ psi_loads if x_loads.size else 0.0)
    defect = f - recon
    defect_loads = f_loads - recon_loads
    num = _weighted_inner(geometry, x, defect, defect, defect_loads, defect_loads)
    den = _weighted_inner(geometry, x, f, f, f_loads, f_loads)
    return math.sqrt(max(num, 0.0) / den)


def greens_identity_residual(
    x1: float,
    x: float,
    omega_ghz: float,
    geometry: ResonatorGeometry,
    material: Material,
    modes,
    n_max: int | None = None,
) -> float:
    """Residual of the lossy-resonator Green's identity at a real above-gap probe.

    Checks  g omega R_s int c(x') G*(x1,x') G(x,x') dx'  =
    i (G*(x1,x) - G(x,x1)) / 2,  with the left side integrated over x' using
    every supplied mode and the right side truncated at ``n_max`` modes.  The
    identity is exact term by term, so with ``n_max = len(modes)`` the
    residual is pure roundoff; a smaller ``n_max`` isolates the truncation
    tail of the right side, which is how convergence in mode count is probed.
    """
    nu = 2.0 * omega_ghz / material.gap_frequency
    if nu <= 2.0:
        raise DomainError(f"probe must lie above the gap, got reduced {nu}")
    if n_max is None:
        n_max = len(modes)
    if not (1 <= n_max <= len(modes)):
        raise DomainError(f"n_max must be in [1, {len(modes)}], got {n_max}")
    omega = omega_ghz * _TWO_PI_GHZ
    z_s = surface_impedance(material, omega_ghz)
    r_s = z_s.real

    n_grid = max(4097, 12 * len(modes) + 1)
    xg = np.linspace(0.0, geometry.length, n_grid)
    ks = np.array([m.k_n for m in modes])
    omega_n_sq = (
        ks**2 + 1j * geometry.g_geom * omega * geometry.c_per_len * z_s
    ) / (geometry.ell_m * geometry.c_per_len)
    den = omega * omega - omega_n_sq
    psi = _mode_matrix(modes, geometry, xg)
    psi1 = _mode_matrix(modes, geometry, np.array([x1]))[:, 0]
    psix = _mode_matrix(modes, geometry, np.array([x]))[:, 0]
    g1 = (psi1 / den) @ psi  # G(x1, x') on the grid
    gx = (psix / den) @ psi
    x_loads = np.array([q.position for q in geometry.qubits])
    if x_loads.size:
        psi_l = _mode_matrix(modes, geometry, x_loads)
        g1_l = (psi1 / den) @ psi_l
        gx_l = (psix / den) @ psi_l
    else:
        g1_l = gx_l = np.zeros(0, dtype=complex)
    bulk = simpson(np.conj(g1) * gx, x=xg) * geometry.c_per_len
    point = sum(
        load.c_series * np.conj(a) * b for load, a, b in zip(geometry.qubits, g1_l, gx_l)
    )
    lhs = geometry.g_geom * omega * r_s * (bulk + point)

    den_t, psi1_t, psix_t = den[:n_max], psi1[:n_max], psix[:n_max]
    g_x1_x = np.sum(psi1_t * psix_t / den_t)
    g_x_x1 = np.sum(psix_t * psi1_t / den_t)
    rhs = 0.5j * (np.conj(g_x1_x) - g_x_x1)

    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale
