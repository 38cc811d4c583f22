"""Surface impedance of a thick superconducting film and the refractive index it induces.

Two closed-form limiting regimes are supported, both driven by the complex
Mattis-Bardeen conductivity ``sigma = sigma1 - i*sigma2``:

* extreme anomalous limit (coherence length >> penetration depth),
  ``Z_s ~ omega * (omega*sigma/sigma_n)**(-1/3)``,
* dirty (local) limit (penetration depth >> coherence length),
  ``Z_s ~ omega * (omega*sigma/sigma_n)**(-1/2)``.

The overall scale of ``Z_s`` is an input (``impedance_prefactor``, in Ohms,
with frequencies in reduced gap units), because it depends on normal-state
material constants that are not part of this model.  ``calibrate_prefactor``
pins it to a chosen kinetic-inductance red-shift of a resonator fundamental.

Phase convention: we evaluate ``Z_s = A * (i*nu) * (i*nu*sigma/sigma_n)**(-1/q)``
with principal fractional powers.  Below the gap ``i*nu*sigma = nu*sigma2`` is
real and positive, so Z_s comes out *exactly* purely imaginary (a lossless
kinetic reactance), and above the gap Re Z_s > 0.  The constant phase factor
relative to writing the prefactor as a plain ``omega`` is absorbed into A; it
is fixed by requiring a lossless superconductor below the gap rather than by
the (undetermined) normal-state proportionality constant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchCut, DomainError, GridTooCoarse
from .mattis_bardeen import ComplexFreq, sigma_real_axis, sigma_tilde


class LimitRegime(enum.Enum):
    """Thick-film limiting regime selecting the fractional power in Z_s."""

    EXTREME_ANOMALOUS = "extreme_anomalous"
    DIRTY = "dirty"

    @property
    def power(self) -> int:
        return 3 if self is LimitRegime.EXTREME_ANOMALOUS else 2


@dataclass(frozen=True)
class Material:
    """Superconductor description.

    gap_frequency is the pair-breaking edge 2*Delta/h in GHz (ordinary
    frequency), so a photon of frequency f has reduced frequency
    nu = 2 f / gap_frequency and the gap edge sits at nu = 2.
    """

    gap_frequency: float
    limit_regime: LimitRegime
    impedance_prefactor: float
    name: str = "custom"
    from_defaults: bool = False

    def __post_init__(self) -> None:
        if not (self.gap_frequency > 0.0 and math.isfinite(self.gap_frequency)):
            raise DomainError(f"gap_frequency must be positive, got {self.gap_frequency}")
        if not (self.impedance_prefactor >= 0.0 and math.isfinite(self.impedance_prefactor)):
            raise DomainError(
                f"impedance_prefactor must be >= 0, got {self.impedance_prefactor}"
            )
        if not isinstance(self.limit_regime, LimitRegime):
            raise DomainError(f"limit_regime must be a LimitRegime, got {self.limit_regime!r}")

    def reduced(self, frequency_ghz: complex) -> complex:
        """Reduced frequency 2 f / f_gap; complex frequencies map component-wise."""
        return 2.0 * frequency_ghz / self.gap_frequency


# Literature-default gap frequencies (2*Delta/h).  These are *defaults*: any
# serious comparison should override them with measured film values, and the
# CLI flags materials built from these presets in its output metadata.
_AL_GAP_GHZ = 87.0
_NB_GAP_GHZ = 725.0


def aluminum(impedance_prefactor: float = 1.0, gap_frequency: float = _AL_GAP_GHZ) -> Material:
    """Aluminum preset: extreme anomalous limit, 2*Delta/h ~ 87 GHz."""
    return Material(
        gap_frequency=gap_frequency,
        limit_regime=LimitRegime.EXTREME_ANOMALOUS,
        impedance_prefactor=impedance_prefactor,
        name="aluminum",
        from_defaults=True,
    )


def niobium(impedance_prefactor: float = 1.0, gap_frequency: float = _NB_GAP_GHZ) -> Material:
    """Niobium preset: dirty limit, 2*Delta/h ~ 725 GHz."""
    return Material(
        gap_frequency=gap_frequency,
        limit_regime=LimitRegime.DIRTY,
        impedance_prefactor=impedance_prefactor,
        name="niobium",
        from_defaults=True,
    )


@dataclass(frozen=True)
class RefractiveIndex:
    """Complex epsilon(omega) = 1 + g Z_s / (i omega l_m) at one frequency (GHz)."""

    value: complex
    frequency: complex


_IMAG_TOL = 1e-12


def _split_frequency(material: Material, frequency_ghz: complex) -> ComplexFreq:
    """Map a (possibly complex) frequency in GHz to a reduced-unit ComplexFreq.

    The decaying-mode convention puts poles at nu + i*kappa with kappa >= 0;
    a tiny negative imaginary part (roundoff from upstream solvers) is snapped
    to zero rather than rejected.
    """
    nu = 2.0 * float(np.real(frequency_ghz)) / material.gap_frequency
    kap = 2.0 * float(np.imag(frequency_ghz)) / material.gap_frequency
    if abs(kap) <= _IMAG_TOL * max(1.0, abs(nu)):
        kap = 0.0
    if kap < 0.0:
        raise DomainError(
            f"frequency must lie in the decaying (Im f >= 0) half plane, got {frequency_ghz}"
        )
    if nu <= 0.0:
        raise DomainError(f"frequency must have a positive real part, got {frequency_ghz}")
    if nu <= 2.0 and kap > 0.0:
        raise DomainError(
            "below-gap surface impedance is defined for real frequencies only "
            f"(got reduced {nu} + {kap}i)"
        )
    return ComplexFreq(nu, kap)


def surface_impedance(material: Material, frequency_ghz: complex) -> complex:
    """Z_s at a real or complex frequency (GHz), in Ohms.

    Below the gap the result is purely imaginary (Re Z_s = 0 exactly in
    floating point): the below-gap branch is evaluated in real arithmetic.
    Above the gap, complex frequencies in the decaying half plane are allowed
    and both the conductivity and the frequency prefactor are continued.
    """
    freq = _split_frequency(material, frequency_ghz)
    a_ohm = material.impedance_prefactor
    q = material.limit_regime.power
    if freq.nu <= 2.0:
        # Lossless branch: sigma = -i sigma2, so i*nu*sigma = nu*sigma2 > 0.
        sigma2 = -sigma_real_axis(freq.nu).imag
        arg = freq.nu * sigma2
        if arg <= 0.0:
            raise BranchCut(f"fractional-power argument {arg} not positive below gap")
        return 1j * (a_ohm * freq.nu * arg ** (-1.0 / q))
    sigma = sigma_tilde(freq)
    nu_c = freq.nu + 1j * freq.kappa
    arg = 1j * nu_c * sigma
    if arg.imag == 0.0 and arg.real <= 0.0:
        raise BranchCut(f"fractional-power argument {arg} lies on the negative real axis")
    return a_ohm * (1j * nu_c) * arg ** (-1.0 / q)


def epsilon(
    material: Material,
    g_geom: float,
    ell_m: float,
    frequency_ghz: complex,
) -> RefractiveIndex:
    """Refractive index epsilon = 1 + g Z_s / (i omega l_m).

    g_geom is the geometric factor (1/m) and ell_m the magnetic inductance per
    unit length (H/m); omega is the angular frequency 2*pi*f corresponding to
    frequency_ghz.  Below the gap the result is exactly real (epsilon > 1, a
    kinetic-inductance slow-down); above the gap Im epsilon < 0 encodes loss.
    """
    if g_geom < 0.0 or ell_m <= 0.0:
        raise DomainError(f"need g_geom >= 0 and ell_m > 0, got {g_geom}, {ell_m}")
    if material.impedance_prefactor == 0.0:
        return RefractiveIndex(value=1.0 + 0.0j, frequency=frequency_ghz)
    z_s = surface_impedance(material, frequency_ghz)
    omega = 2.0 * math.pi * 1e9 * frequency_ghz
    if np.imag(frequency_ghz) == 0.0 and z_s.real == 0.0:
        # 1 + g X_s / (omega l_m), kept in real arithmetic.
        value = complex(1.0 + g_geom * z_s.imag / (float(np.real(omega)) * ell_m), 0.0)
    else:
        value = 1.0 + g_geom * z_s / (1j * omega * ell_m)
        if 2.0 * float(np.real(frequency_ghz)) / material.gap_frequency > 2.0:
            if value.imag > 0.0 and float(np.imag(frequency_ghz)) == 0.0:
                raise DomainError(
                    f"above-gap epsilon acquired a gain-like sign: {value} at {frequency_ghz} GHz"
                )
    return RefractiveIndex(value=value, frequency=frequency_ghz)


def _real_part_on_grid(material: Material, nu_grid: np.ndarray) -> np.ndarray:
    """Re Z_s / A on a real reduced-frequency grid (vectorised point loop)."""
    out = np.zeros_like(nu_grid)
    q = material.limit_regime.power
    for i, nu in enumerate(nu_grid):
        if nu <= 2.0:
            continue
        arg = 1j * nu * sigma_real_axis(float(nu))
        out[i] = (1j * nu * arg ** (-1.0 / q)).real
    return out


def kk_parts(
    material: Material,
    probe_frequency_ghz: float,
    grid: np.ndarray | None = None,
    *,
    f_max_ghz: float | None = None,
    n_grid: int = 4001,
    tail_decades: float = 3.0,
) -> tuple[float, float]:
    """Both sides of the dispersion (Kramers-Kronig) relation at one probe.

    Returns (lhs, rhs) with
    lhs = P int_0^inf Re Z_s(w) / (w^2 - w'^2) dw  and
    rhs = (pi/2) Im Z_s(w') / w',
    both divided by the impedance prefactor (the relation is homogeneous in
    it, so the residual is scale invariant; a lossless material returns
    (0, 0)), using trapezoid quadrature on a uniform grid with a symmetric
    excision around the probe (evaluated by the odd-part quadrature of the
    principal value) plus an analytic power-law tail Re Z_s ~ C w^(1-1/q)
    fitted over the last decade of the grid.  Without the tail the truncation
    error decays only like f_max^(-1/q); with it, doubling f_max roughly
    halves the residual.

    The relation is scale invariant, so everything is computed in reduced
    units.  A uniform grid of frequencies in GHz may be supplied; otherwise
    one spanning [0, f_max_ghz] (default 50x the gap frequency) is built.
    """
    if probe_frequency_ghz <= 0.0:
        raise DomainError(f"probe frequency must be positive, got {probe_frequency_ghz}")
    if grid is None:
        if f_max_ghz is None:
            f_max_ghz = 50.0 * material.gap_frequency
        grid = np.linspace(0.0, f_max_ghz, n_grid)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 16:
        raise DomainError("grid must be a 1-D array with at least 16 points")
    spacing = np.diff(grid)
    h = spacing[0]
    if h <= 0.0 or not np.allclose(spacing, h, rtol=1e-8):
        raise DomainError("grid must be uniformly spaced and increasing")
    if grid[-1] < 50.0 * material.gap_frequency * (1.0 - 1e-9):
        raise GridTooCoarse("grid must extend to at least 50x the gap frequency")

    nu_probe = material.reduced(probe_frequency_ghz)
    nu_grid = material.reduced(grid)
    h_nu = material.reduced(h)
    q = material.limit_regime.power

    if material.impedance_prefactor == 0.0:
        return 0.0, 0.0

    r_grid = _real_part_on_grid(material, nu_grid)

    above_gap_probe = nu_probe > 2.0
    if above_gap_probe:
        if probe_frequency_ghz > grid[-1] - 2.0 * h:
            raise GridTooCoarse(
                "probe too close to the grid edge for a symmetric two-cell excision"
            )
        # The excision window is always one cell on each side of the probe; a
        # grid too coarse to keep that window clear of the gap edge (where
        # Re Z_s has a kink) cannot resolve the principal value.
        if nu_probe - h_nu <= 2.0 < nu_probe + h_nu or (nu_probe - 2.0) < 2.0 * h_nu:
            raise GridTooCoarse(
                f"excision window of width 2x{h} GHz around the probe spans the gap edge; "
                "refine the grid"
            )

    def _integrand(nu: np.ndarray, r: np.ndarray) -> np.ndarray:
        # A below-gap probe may land exactly on a grid node; Re Z_s vanishes
        # identically in that whole region, so the 0/0 there is genuinely 0.
        with np.errstate(divide="ignore", invalid="ignore"):
            out = r / (nu**2 - nu_probe**2)
        return np.where(r == 0.0, 0.0, out)

    if not above_gap_probe:
        lhs = float(np.trapezoid(_integrand(nu_grid, r_grid), nu_grid))
    else:
        lo, hi = nu_probe - h_nu, nu_probe + h_nu
        inside = (nu_grid > lo) & (nu_grid < hi)
        vals = _integrand(nu_grid, r_grid)
        # Piecewise trapezoid on the full cells outside the window, plus the
        # two partial cells truncated exactly at the window edges (linear
        # interpolation of Re Z_s, consistent with the trapezoid rule).
        lhs = 0.0
        for j in range(nu_grid.size - 1):
            a, b = nu_grid[j], nu_grid[j + 1]
            if b <= lo or a >= hi:
                lhs += 0.5 * (vals[j] + vals[j + 1]) * (b - a)
            elif a < lo < b:
                f_lo = _integrand(
                    np.array([lo]), np.interp([lo], nu_grid, r_grid)
                )[0]
                lhs += 0.5 * (vals[j] + f_lo) * (lo - a)
            elif a < hi < b:
                f_hi = _integrand(
                    np.array([hi]), np.interp([hi], nu_grid, r_grid)
                )[0]
                lhs += 0.5 * (f_hi + vals[j + 1]) * (b - hi)
        # Principal value over the symmetric window [probe-h, probe+h]:
        # substituting w = probe + t and keeping the odd-in-t combination
        # leaves a regular even integrand on (0, h].
        def _window_odd(t: np.ndarray) -> np.ndarray:
            rp = np.interp(nu_probe + t, nu_grid, r_grid)
            rm = np.interp(nu_probe - t, nu_grid, r_grid)
            fp = rp / (t * (2.0 * nu_probe + t))
            fm = rm / (t * (2.0 * nu_probe - t))
            return fp - fm

        # 8-point Gauss-Legendre on (0, h); the integrand is smooth there.
        x_gl, w_gl = np.polynomial.legendre.leggauss(8)
        t_nodes = 0.5 * h_nu * (x_gl + 1.0)
        lhs += float(0.5 * h_nu * np.sum(w_gl * _window_odd(t_nodes)))

    # Analytic tail: fit Re Z_s ~ C nu^(1-1/q) over the last decade of the
    # grid and integrate the fitted law from the grid end outward.
    alpha = 1.0 - 1.0 / q
    last_decade = nu_grid >= nu_grid[-1] / 10.0
    c_fit = float(np.mean(r_grid[last_decade] * nu_grid[last_decade] ** (-alpha)))
    nu_far = np.geomspace(nu_grid[-1], nu_grid[-1] * 10.0**tail_decades, 400)
    tail = float(np.trapezoid(c_fit * nu_far**alpha / (nu_far**2 - nu_probe**2), nu_far))
    # Remainder beyond the far cutoff, to leading order in 1/nu.
    tail += c_fit * nu_far[-1] ** (alpha - 1.0) / (1.0 - alpha)
    lhs += tail

    z_probe = surface_impedance(material, probe_frequency_ghz)
    rhs = 0.5 * math.pi * (z_probe.imag / material.impedance_prefactor) / nu_probe
    return lhs, rhs


def kk_residual(
    material: Material,
    probe_frequency_ghz: float,
    grid: np.ndarray | None = None,
    *,
    f_max_ghz: float | None = None,
    n_grid: int = 4001,
    tail_decades: float = 3.0,
) -> float:
    """Relative residual |lhs - rhs| / |rhs| of the relation in :func:`kk_parts`.

    Returns 0 for a lossless material (both sides identically zero) and +inf
    if only the direct side vanishes.
    """
    lhs, rhs = kk_parts(
        material,
        probe_frequency_ghz,
        grid,
        f_max_ghz=f_max_ghz,
        n_grid=n_grid,
        tail_decades=tail_decades,
    )
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return abs(lhs - rhs) / abs(rhs)


def calibrate_prefactor(
    material: Material,
    g_geom: float,
    ell_m: float,
    f0_bare_ghz: float,
    red_shift: float = 0.02,
) -> Material:
    """Return a copy of ``material`` with the impedance prefactor fixed so the
    kinetic reactance red-shifts a bare resonator fundamental by ``red_shift``.

    Uses the scalar dispersion relation for a below-gap mode,
    f = f_bare / sqrt(epsilon(f)): the target f = (1 - red_shift) * f_bare
    determines epsilon and hence A in closed form (epsilon - 1 scales linearly
    with A at fixed frequency).  This pins only the overall impedance scale;
    the frequency dependence is the Mattis-Bardeen form.
    """
    if not (0.0 < red_shift < 0.5):
        raise DomainError(f"red_shift must be in (0, 0.5), got {red_shift}")
    f_target = (1.0 - red_shift) * f0_bare_ghz
    if material.reduced(f_target) >= 2.0:
        raise DomainError("calibration target frequency must sit below the gap")
    eps_target = 1.0 / (1.0 - red_shift) ** 2
    probe = Material(
        gap_frequency=material.gap_frequency,
        limit_regime=material.limit_regime,
        impedance_prefactor=1.0,
        name=material.name,
        from_defaults=material.from_defaults,
    )
    slope = epsilon(probe, g_geom, ell_m, f_target).value.real - 1.0
    a_ohm = (eps_target - 1.0) / slope
    return Material(
        gap_frequency=material.gap_frequency,
        limit_regime=material.limit_regime,
        impedance_prefactor=a_ohm,
        name=material.name,
        from_defaults=material.from_defaults,
    )
