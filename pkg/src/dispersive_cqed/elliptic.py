"""Elliptic integrals on complex paths.

Provides the numerical core used by the conductivity closed forms:

* adaptive Gauss-Kronrod (G7,K15) quadrature along straight contours in the
  complex plane, with an explicit error contract,
* Carlson symmetric integrals R_F and R_D for complex arguments via the
  duplication theorem (B. C. Carlson, Numer. Math. 33, 1 (1979); Numerical
  Algorithms 10, 13 (1995)),
* complete integrals K(k), E(k) in the modulus convention, plus an
  independent AGM evaluation of K used for cross-checking,
* incomplete integrals in the convention of the conductivity derivation,
  defined by quadrature of the literal integrands and accelerated by a
  Carlson fast path that is validated against a cheap quadrature probe.

All square roots are principal-branch (`numpy.sqrt` on complex arguments)
evaluated pointwise; this fixes the meaning of every integrand below.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import (
    BranchPointOnPath,
    DomainError,
    NonConvergence,
    SingularInterior,
)

__all__ = [
    "ContourSegment",
    "contour_quadrature",
    "carlson_rf",
    "carlson_rd",
    "ellip_complete_k",
    "ellip_complete_e",
    "complete_k_agm",
    "ellip_incomplete_f",
    "ellip_incomplete_e",
    "endpoint_regularized",
]

# 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 abscissae).
_XGK_HALF = np.array(
    [
        0.991455371120813,
        0.949107912342759,
        0.864864423359769,
        0.741531185599394,
        0.586087235467691,
        0.405845151377397,
        0.207784955007898,
        0.000000000000000,
    ]
)
_WGK_HALF = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
    ]
)
_WG_HALF = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
    ]
)

_XGK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])  # 15 nodes, ascending
_WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
_WG = np.zeros(15)
_WG[1:-1:2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


@dataclass(frozen=True)
class ContourSegment:
    """Straight line from ``start`` to ``end`` in the complex plane."""

    start: complex
    end: complex
    tol: float = 1e-10
    max_panels: int = 4096

    def __post_init__(self):
        if self.start == self.end:
            raise DomainError("contour segment has zero length")
        if not (0.0 < self.tol <= 1e-2):
            raise DomainError(f"tolerance {self.tol} outside (0, 1e-2]")
        if self.max_panels < 1:
            raise DomainError("panel budget must be positive")


def _gk15_panel(f: Callable, a: complex, b: complex) -> Tuple[complex, float]:
    """One (G7,K15) evaluation on the sub-segment [a, b].

    Returns the Kronrod estimate and |K15 - G7| as the error indicator.  The
    rule is open at the panel endpoints, so integrable endpoint singularities
    are never evaluated directly.
    """
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    z = center + half * _XGK
    fv = np.asarray(f(z), dtype=complex)
    if fv.shape != z.shape:
        raise TypeError("integrand must map an ndarray of points to an ndarray")
    if not np.all(np.isfinite(fv)):
        bad = z[~np.isfinite(fv)][0]
        raise SingularInterior(f"integrand not finite at interior node {bad}")
    k15 = half * np.sum(_WGK * fv)
    g7 = half * np.sum(_WG * fv)
    return k15, abs(k15 - g7)


def contour_quadrature(
    integrand: Callable, segment: ContourSegment
) -> Tuple[complex, float]:
    """Adaptively integrate ``integrand`` along a straight complex segment.

    The integrand must accept a complex ndarray and return an ndarray of the
    same shape.  Panels with the largest error indicator are bisected until

        sum(panel errors) <= tol * max(1, |integral|)

    or the panel budget is exhausted, in which case :class:`NonConvergence`
    is raised carrying the best estimate and the achieved error bound.
    Integrable endpoint singularities are admissible (the nested rule never
    samples panel endpoints); non-finite values at interior nodes raise
    :class:`SingularInterior`.
    """
    a, b = complex(segment.start), complex(segment.end)
    val, err = _gk15_panel(integrand, a, b)
    # heap of (-error, tiebreak, a, b, value, error)
    counter = 0
    heap = [(-err, counter, a, b, val, err)]
    total = val
    total_err = err
    panels = 1
    while total_err > segment.tol * max(1.0, abs(total)):
        if panels >= segment.max_panels:
            raise NonConvergence(
                f"panel budget {segment.max_panels} exhausted "
                f"(error {total_err:.3e}, target "
                f"{segment.tol * max(1.0, abs(total)):.3e})",
                best_estimate=total,
                error_estimate=total_err,
            )
        neg_e, _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        lval, lerr = _gk15_panel(integrand, pa, mid)
        rval, rerr = _gk15_panel(integrand, mid, pb)
        total += lval + rval - pval
        total_err += lerr + rerr - perr
        counter += 1
        heapq.heappush(heap, (-lerr, counter, pa, mid, lval, lerr))
        counter += 1
        heapq.heappush(heap, (-rerr, counter, mid, pb, rval, rerr))
        panels += 1
    return total, total_err


def endpoint_regularized(
    integrand: Callable, a: complex, b: complex
) -> Callable:
    """Absorb inverse-square-root endpoint singularities of ``integrand``.

    Maps x = m + h*sin(theta) with m, h the midpoint and half-width of
    (a, b); the Jacobian h*cos(theta) vanishes linearly at theta = +-pi/2
    and cancels a 1/sqrt singularity at either endpoint.  The returned
    callable should be integrated over theta in [-pi/2, pi/2].
    """
    m = 0.5 * (a + b)
    h = 0.5 * (b - a)

    def regularized(theta):
        s = np.sin(theta)
        return integrand(m + h * s) * h * np.cos(theta)

    return regularized


# ---------------------------------------------------------------------------
# Carlson symmetric integrals
# ---------------------------------------------------------------------------

_CARLSON_MAX_ITER = 120


def carlson_rf(x: complex, y: complex, z: complex, rtol: float = 1e-16) -> complex:
    """Carlson R_F(x, y, z) for complex arguments off (-inf, 0).

    Duplication-theorem iteration with the degree-7 series tail of Carlson
    (1995).  Arguments exactly on the negative real axis are taken as limits
    from the upper half plane (consistent with principal `numpy.sqrt`).
    At most one argument may vanish.
    """
    x, y, z = complex(x), complex(y), complex(z)
    if sum(1 for t in (x, y, z) if t == 0) >= 2:
        raise DomainError("carlson_rf: at least two arguments vanish")
    a = (x + y + z) / 3.0
    a0 = a
    q = (3.0 * rtol) ** (-1.0 / 8.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    for _ in range(_CARLSON_MAX_ITER):
        if q <= abs(a):
            break
        sx, sy, sz = np.sqrt(complex(x)), np.sqrt(complex(y)), np.sqrt(complex(z))
        lam = sx * sy + sy * sz + sz * sx
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        q *= 0.25
    # With A_m = (x_m + y_m + z_m)/3 preserved by the recurrence, Carlson's
    # normalized deviations (A0 - x0)/(4^m A_m) equal (A_m - x_m)/A_m.
    X = (a - x) / a
    Y = (a - y) / a
    Z = -X - Y
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    series = (
        1.0
        - e2 / 10.0
        + e3 / 14.0
        + e2 * e2 / 24.0
        - 3.0 * e2 * e3 / 44.0
        - 5.0 * e2 ** 3 / 208.0
        + 3.0 * e3 * e3 / 104.0
        + e2 * e2 * e3 / 16.0
    )
    return series / np.sqrt(complex(a))


def carlson_rd(x: complex, y: complex, z: complex, rtol: float = 1e-16) -> complex:
    """Carlson R_D(x, y, z) = R_J(x, y, z, z) for complex arguments.

    Same duplication scheme as :func:`carlson_rf`; ``z`` must be nonzero and
    at most one of ``x``, ``y`` may vanish.
    """
    x, y, z = complex(x), complex(y), complex(z)
    if z == 0:
        raise DomainError("carlson_rd: third argument must be nonzero")
    if x == 0 and y == 0:
        raise DomainError("carlson_rd: x and y both vanish")
    a = (x + y + 3.0 * z) / 5.0
    a0 = a
    q = (0.25 * rtol) ** (-1.0 / 8.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    acc = 0.0 + 0.0j
    fac = 1.0
    for _ in range(_CARLSON_MAX_ITER):
        if q <= abs(a):
            break
        sx, sy, sz = np.sqrt(complex(x)), np.sqrt(complex(y)), np.sqrt(complex(z))
        lam = sx * sy + sy * sz + sz * sx
        acc += fac / (sz * (z + lam))
        fac *= 0.25
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        q *= 0.25
    # For R_D the mean A_m = (x_m + y_m + 3 z_m)/5 is preserved as well, so
    # (A0 - x0)/(4^m A_m) = (A_m - x_m)/A_m exactly.
    X = (a - x) / a
    Y = (a - y) / a
    Z = -(X + Y) / 3.0
    e2 = X * Y - 6.0 * Z * Z
    e3 = (3.0 * X * Y - 8.0 * Z * Z) * Z
    e4 = 3.0 * (X * Y - Z * Z) * Z * Z
    e5 = X * Y * Z ** 3
    series = (
        1.0
        - 3.0 * e2 / 14.0
        + e3 / 6.0
        + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0
    )
    return fac * series / (complex(a) * np.sqrt(complex(a))) + 3.0 * acc


# ---------------------------------------------------------------------------
# Complete integrals (modulus convention)
# ---------------------------------------------------------------------------


def _check_modulus(k: complex) -> complex:
    k = complex(k)
    k2 = k * k
    if k2.imag == 0.0 and k2.real >= 1.0:
        raise DomainError(f"modulus k={k} lies on the branch cut k^2 in [1, inf)")
    return k


def ellip_complete_k(k: complex) -> complex:
    """Complete elliptic integral K(k), modulus convention, via Carlson R_F."""
    k = _check_modulus(k)
    return carlson_rf(0.0, 1.0 - k * k, 1.0)


def ellip_complete_e(k: complex) -> complex:
    """Complete elliptic integral E(k), modulus convention, via R_F and R_D."""
    k = complex(k)
    if k * k == 1.0:
        # endpoint of the k^2 branch cut; E (unlike K) stays finite: E(1) = 1
        return complex(1.0)
    k = _check_modulus(k)
    if k == 0:
        return complex(math.pi / 2.0)
    kc2 = 1.0 - k * k
    return carlson_rf(0.0, kc2, 1.0) - (k * k / 3.0) * carlson_rd(0.0, kc2, 1.0)


def complete_k_agm(k: complex, maxiter: int = 64) -> complex:
    """K(k) by the arithmetic-geometric mean; independent of the Carlson route.

    The square-root branch in the AGM recursion is chosen so that
    |a - b| <= |a + b| at every step ("optimal" AGM), which reproduces the
    principal value for all moduli off the cut k^2 in [1, inf).
    """
    k = _check_modulus(k)
    a = 1.0 + 0.0j
    b = np.sqrt(complex(1.0 - k * k))
    for _ in range(maxiter):
        if abs(a - b) <= 1e-17 * abs(a):
            break
        a_next = 0.5 * (a + b)
        b_next = np.sqrt(a * b)
        if abs(a_next - b_next) > abs(a_next + b_next):
            b_next = -b_next
        a, b = a_next, b_next
    return math.pi / (2.0 * a)


# ---------------------------------------------------------------------------
# Incomplete integrals in the conductivity-derivation convention
# ---------------------------------------------------------------------------


def _branch_points(k: complex):
    k = complex(k)
    bps = [1.0 + 0.0j, -1.0 + 0.0j]
    if k != 0:
        bps += [1.0 / k, -1.0 / k]
    return bps


def _segment_distance(p: complex, a: complex, b: complex) -> float:
    """Distance from point p to the closed segment [a, b]."""
    d = b - a
    t = ((p - a) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _guard_path(z: complex, k: complex) -> complex | None:
    """Validate the straight path 0 -> z against the branch points.

    Returns the branch point coinciding with the terminal point (an
    admissible, integrably singular endpoint) or None; raises
    :class:`BranchPointOnPath` if a branch point sits on the open path.
    """
    z = complex(z)
    tol = 1e-9 * max(1.0, abs(z))
    terminal = None
    for bp in _branch_points(k):
        if abs(bp - z) <= tol:
            terminal = bp
            continue
        if _segment_distance(bp, 0.0, z) <= tol:
            raise BranchPointOnPath(
                f"path 0 -> {z} passes through branch point {bp} (modulus k={k})"
            )
    return terminal


def _defining_f_integrand(k: complex) -> Callable:
    if k == 0:
        # The second factor degenerates to sqrt(-1) exactly; pin it to the
        # principal value +i rather than letting a signed zero from the
        # complex product (0j * x * x) pick a side of the cut per point.
        def f0(x):
            x = np.asarray(x, dtype=complex)
            return 1.0 / (np.sqrt(x * x - 1.0) * 1j)

        return f0

    def f(x):
        x = np.asarray(x, dtype=complex)
        return 1.0 / (np.sqrt(x * x - 1.0) * np.sqrt(k * k * x * x - 1.0))

    return f


def _defining_e_integrand(k: complex) -> Callable:
    def f(x):
        x = np.asarray(x, dtype=complex)
        return np.sqrt(1.0 - k * k * x * x) / np.sqrt(1.0 - x * x)

    return f


def _incomplete_quadrature(
    integrand: Callable, z: complex, terminal_singular: bool, tol: float
) -> complex:
    if terminal_singular:
        # x = z*sin(theta): the Jacobian z*cos(theta) cancels the terminal
        # 1/sqrt singularity; the start x=0 is regular.
        def g(theta):
            s = np.sin(theta)
            return integrand(z * s) * z * np.cos(theta)

        seg = ContourSegment(0.0, math.pi / 2.0, tol=tol)
        val, _ = contour_quadrature(g, seg)
        return val
    seg = ContourSegment(0.0, z, tol=tol)
    val, _ = contour_quadrature(integrand, seg)
    return val


def _probe_agrees(fast: complex, cheap: complex, scale: float) -> bool:
    return abs(fast - cheap) <= 1e-3 * max(scale, abs(fast), abs(cheap))


def ellip_incomplete_f(z: complex, k: complex, method: str = "auto") -> complex:
    """Incomplete first-kind integral int_0^z dx / (sqrt(x^2-1) sqrt(k^2 x^2 - 1)).

    The defining evaluation is adaptive quadrature of the literal integrand
    with pointwise principal square roots along the straight path 0 -> z.
    ``method="carlson"`` uses -z*R_F(1-z^2, 1-k^2 z^2, 1), which equals the
    quadrature value up to a branch-dependent constant; ``"auto"`` (default)
    validates the Carlson value against a cheap low-tolerance quadrature
    probe and falls back to full quadrature on disagreement.

    Raises :class:`BranchPointOnPath` if the open path hits +-1 or +-1/k;
    a terminal point *at* a branch point is admissible (integrable).
    """
    z, k = complex(z), complex(k)
    if z == 0:
        return 0.0 + 0.0j
    terminal = _guard_path(z, k)
    integrand = _defining_f_integrand(k)
    if method == "quadrature":
        return _incomplete_quadrature(integrand, z, terminal is not None, 1e-12)
    zz = z * z
    fast = -z * carlson_rf(1.0 - zz, 1.0 - k * k * zz, 1.0)
    if method == "carlson":
        return fast
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    cheap = _incomplete_quadrature(integrand, z, terminal is not None, 1e-4)
    if _probe_agrees(fast, cheap, 1.0):
        return fast
    return _incomplete_quadrature(integrand, z, terminal is not None, 1e-12)


def ellip_incomplete_e(z: complex, k: complex, method: str = "auto") -> complex:
    """Incomplete second-kind integral int_0^z sqrt(1-k^2 x^2)/sqrt(1-x^2) dx.

    Same evaluation strategy and error contract as :func:`ellip_incomplete_f`;
    the Carlson fast path is z*R_F - (k^2 z^3/3)*R_D on the shifted arguments.
    """
    z, k = complex(z), complex(k)
    if z == 0:
        return 0.0 + 0.0j
    terminal = _guard_path(z, k)
    integrand = _defining_e_integrand(k)
    if method == "quadrature":
        return _incomplete_quadrature(integrand, z, terminal is not None, 1e-12)
    zz = z * z
    args = (1.0 - zz, 1.0 - k * k * zz, 1.0)
    fast = z * carlson_rf(*args)
    if k != 0:
        fast -= (k * k * z * zz / 3.0) * carlson_rd(*args)
    if method == "carlson":
        return fast
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    cheap = _incomplete_quadrature(integrand, z, terminal is not None, 1e-4)
    if _probe_agrees(fast, cheap, 1.0):
        return fast
    return _incomplete_quadrature(integrand, z, terminal is not None, 1e-12)
