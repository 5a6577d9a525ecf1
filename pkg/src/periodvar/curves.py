"""Numerical period matrices and Abel-Jacobi integrals for hyperelliptic curves.

A curve is y^2 = prod_i (x - b_i) over m >= 3 distinct finite branch points
(odd m means one more branch point sits at infinity); the genus is
floor((m-1)/2).

Homology convention
-------------------
Branch points are sorted lexicographically by (Re, Im).  For consecutive
sorted points b_i, b_{i+1} let gamma_i be the cycle that runs from b_i to
b_{i+1} on one sheet and back on the other; the branch of y is propagated
along the chain of segment midpoints, detouring counterclockwise around
each branch point, so all gamma_i are lifted consistently.  These cycles
form a chain in which only neighbours meet, once; a canonical basis is then

    a_i = gamma_{2i-1},        b_i = -(gamma_{2i} + gamma_{2i+2} + ...),

for i = 1..g (1-based), which gives Im(tau) positive definite.  Everything
asserted downstream is either invariant under the symplectic group or uses
this one fixed convention consistently.

Each cycle period reduces to an integral between two branch points; the
substitution x = c + r s maps it to a weight 1/sqrt(1-s^2) integral of an
analytic integrand, which Gauss-Chebyshev nodes handle with exponential
convergence.  Point-to-point integrals (Abel-Jacobi legs) use
Gauss-Legendre with the square-root substitution at branch-point endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    ConditioningError,
    DomainError,
    PathError,
    PrecisionError,
)

#: Orientation of the b-cycles relative to the raw even-index chain cycles.
_B_SIGN = -1.0

_MIN_SEPARATION = 1e-10
_NODE_START = 32
_NODE_CAP = 16384
_LEG_NODE_START = 16
_LEG_NODE_CAP = 8192


class _NeedMoreNodes(Exception):
    """Internal signal: sheet tracking at the current node count is unsafe."""


def _lex_order(points):
    pts = np.asarray(points, dtype=complex)
    return np.lexsort((pts.imag, pts.real))


class HyperellipticCurve:
    """Curve y^2 = prod (x - b) for a list of distinct finite branch points."""

    def __init__(self, branch_points):
        pts = [complex(b) for b in branch_points]
        if len(pts) < 3:
            raise ArgumentError("need at least 3 finite branch points")
        self.branch_points = np.asarray(pts, dtype=complex)
        m = len(pts)
        diam = max(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
        if diam == 0.0:
            raise ConditioningError("all branch points coincide")
        sep = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
        if sep <= _MIN_SEPARATION * diam:
            raise ConditioningError(
                f"branch points too close: separation {sep:.3g} vs diameter {diam:.3g}"
            )
        self.genus = (m - 1) // 2
        if self.genus < 1:
            raise ArgumentError("configuration has genus 0")
        self._order = _lex_order(self.branch_points)
        self.sorted_branch_points = self.branch_points[self._order]
        self.diameter = diam
        # affine rescaling of x used for the monomial differential basis
        self.basis_center = complex(np.mean(self.branch_points))
        self.basis_scale = max(abs(b - self.basis_center) for b in pts)
        self._period_cache = {}

    def __repr__(self):
        return f"HyperellipticCurve(m={len(self.branch_points)}, genus={self.genus})"

    @property
    def has_infinite_branch_point(self):
        return len(self.branch_points) % 2 == 1

    def f(self, x):
        """The defining polynomial prod (x - b) at x (scalar or array)."""
        x = np.asarray(x, dtype=complex)
        return np.prod(x[..., None] - self.branch_points, axis=-1)

    def scaled(self, x):
        """Monomial coordinate (x - center)/scale used by the differential basis."""
        return (np.asarray(x, dtype=complex) - self.basis_center) / self.basis_scale

    def principal_y(self, x):
        """One square root of f(x); the sign convention for sheet +1."""
        return np.exp(0.5 * np.log(self.f(x)))

    def period_matrix(self, precision=1e-10):
        cached = self._period_cache.get(precision)
        if cached is None:
            cached = period_matrix(self, precision)
            self._period_cache[precision] = cached
        return cached


@dataclass
class RiemannMatrix:
    """Period data of a curve: tau together with the raw cycle periods.

    ``a_periods`` and ``b_periods`` hold the integrals of the scaled
    monomial differentials x_s^{k-1} dx / y over the canonical cycles
    (columns indexed by cycle); tau solves a_periods @ tau = b_periods.
    """

    curve: HyperellipticCurve
    tau: np.ndarray
    a_periods: np.ndarray
    b_periods: np.ndarray
    node_count: int
    precision_estimate: float

    @property
    def g(self):
        return self.tau.shape[0]

    def normalize(self, raw_values):
        """Coefficients of a raw-basis covector against the normalized basis."""
        return np.linalg.solve(self.a_periods.T, np.asarray(raw_values, dtype=complex))


# ---------------------------------------------------------------------------
# branch continuation along the chain


def _point_segment_distances(points, za, zb):
    """Distances from each point to the closed segment [za, zb]."""
    points = np.asarray(points, dtype=complex)
    d = zb - za
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return np.abs(points - za)
    t = np.clip(((points - za) * np.conj(d)).real / L2, 0.0, 1.0)
    return np.abs(points - (za + t * d))


def _chord_phase_bounds(path, singular_points):
    """Per-chord bounds on the argument change of a square root of f.

    Along a chord of length L staying at distance d_j from each zero b_j of
    f, the argument of any continuous branch of sqrt(f) moves by at most
    (L/2) sum_j 1/d_j.  Keeping this below 1 radian (< pi/2) makes the
    nearest-sign choice between chord endpoints provably correct.
    """
    path = np.asarray(path, dtype=complex)
    sp = np.asarray(singular_points, dtype=complex)
    za = path[:-1]
    delta = path[1:] - za
    L2 = np.abs(delta) ** 2
    safe = np.where(L2 == 0.0, 1.0, L2)
    t = ((sp[None, :] - za[:, None]) * np.conj(delta)[:, None]).real / safe[:, None]
    t = np.clip(t, 0.0, 1.0)
    proj = za[:, None] + t * delta[:, None]
    dist = np.abs(sp[None, :] - proj)
    if dist.size and float(dist.min()) <= 0.0:
        raise PathError("integration path passes through a branch point")
    return 0.5 * np.abs(delta) * (1.0 / dist).sum(axis=1)


_PHASE_SAFE = 1.0  # radians; below pi/2 with margin


def _continue_segment(curve, z0, y0, z1, depth=0):
    """Analytic continuation of y along the straight segment z0 -> z1.

    Subdivides until the argument of y provably moves by less than pi/2 per
    step, so the nearest-sign choice is unambiguous.
    """
    if z1 == z0:
        return y0
    dists = _point_segment_distances(curve.branch_points, z0, z1)
    if float(dists.min()) <= 0.0:
        raise PathError("integration path passes through a branch point")
    bound = 0.5 * abs(z1 - z0) * float((1.0 / dists).sum())
    if bound > _PHASE_SAFE:
        if depth > 60:
            raise PathError(f"sheet tracking failed near {z1}")
        mid = (z0 + z1) / 2
        ym = _continue_segment(curve, z0, y0, mid, depth + 1)
        return _continue_segment(curve, mid, ym, z1, depth + 1)
    w = np.exp(0.5 * np.log(curve.f(z1)))
    if abs(w - y0) > abs(w + y0):
        w = -w
    return w


def _continue_polyline(curve, points, y0):
    y = y0
    for a, b in zip(points, points[1:]):
        y = _continue_segment(curve, a, y, b)
    return y


def _continue_arc(curve, center, radius, theta0, dtheta, y0, samples=24):
    thetas = theta0 + dtheta * np.linspace(0.0, 1.0, samples)
    pts = center + radius * np.exp(1j * thetas)
    return _continue_polyline(curve, pts, y0)


def _chain_references(curve, n_segments):
    """Value of the propagated branch of y at each segment midpoint.

    The path runs midpoint to midpoint, detouring counterclockwise around
    the intermediate branch point on a circle of radius a quarter of its
    distance to the nearest other branch point.
    """
    bp = curve.sorted_branch_points
    mids = (bp[:-1] + bp[1:]) / 2
    y = curve.principal_y(mids[0])
    refs = [y]
    for i in range(n_segments - 1):
        pivot = bp[i + 1]
        others = np.delete(bp, i + 1)
        eps = 0.25 * np.abs(others - pivot).min()
        d_in = (pivot - bp[i]) / abs(pivot - bp[i])
        d_out = (bp[i + 2] - pivot) / abs(bp[i + 2] - pivot)
        entry = pivot - eps * d_in
        exit_ = pivot + eps * d_out
        y = _continue_segment(curve, mids[i], refs[-1], entry)
        theta0 = math.atan2((-d_in).imag, (-d_in).real)
        theta1 = math.atan2(d_out.imag, d_out.real)
        dtheta = (theta1 - theta0) % (2 * math.pi)
        y = _continue_arc(curve, pivot, eps, theta0, dtheta, y)
        y = _continue_segment(curve, exit_, y, mids[i + 1])
        refs.append(y)
    return refs


# ---------------------------------------------------------------------------
# cycle periods


def _require_resolvable(path, singular_points):
    """Raise _NeedMoreNodes unless consecutive path chords are phase-safe."""
    bounds = _chord_phase_bounds(path, singular_points)
    if bounds.size and float(bounds.max()) > _PHASE_SAFE:
        raise _NeedMoreNodes


def _fix_sign_chain(values, anchor_index, anchor_value):
    """Resolve square-root signs along node values by nearest-sign walking.

    Callers must first establish (via :func:`_require_resolvable`) that the
    underlying phase moves by less than pi/2 between neighbouring nodes;
    the nearest-sign choice is then provably correct.
    """
    fixed = values.copy()
    if abs(fixed[anchor_index] - anchor_value) > abs(fixed[anchor_index] + anchor_value):
        fixed[anchor_index] = -fixed[anchor_index]
    for idx in range(anchor_index + 1, len(fixed)):
        if abs(fixed[idx] - fixed[idx - 1]) > abs(fixed[idx] + fixed[idx - 1]):
            fixed[idx] = -fixed[idx]
    for idx in range(anchor_index - 1, -1, -1):
        if abs(fixed[idx] - fixed[idx + 1]) > abs(fixed[idx] + fixed[idx + 1]):
            fixed[idx] = -fixed[idx]
    return fixed


def _segment_moments(curve, seg_index, ref_y, n_nodes, n_powers):
    """Integrals of x_s^k dx / y from b_i to b_{i+1} on the propagated branch.

    With x = c + r s the square-root endpoint factors come out exactly and
    Gauss-Chebyshev handles the weight 1/sqrt(1 - s^2); the remaining factor
    g(s) = y / (i r sqrt(1-s^2)) is smooth and tracked by continuity from
    the midpoint reference value.
    """
    bp = curve.sorted_branch_points
    b0, b1 = bp[seg_index], bp[seg_index + 1]
    c = (b0 + b1) / 2
    r = (b1 - b0) / 2
    others = np.delete(bp, [seg_index, seg_index + 1])
    k = np.arange(1, n_nodes + 1)
    s = np.cos((2 * k - 1) * math.pi / (2 * n_nodes))  # descending
    x = c + r * s
    anchor = int(np.argmin(np.abs(s)))
    _require_resolvable(x, others)
    _require_resolvable(np.array([c, x[anchor]]), others)
    fvals = np.prod(x[:, None] - others[None, :], axis=1)
    g = np.exp(0.5 * np.log(fvals))
    g = _fix_sign_chain(g, anchor, ref_y / (1j * r))
    xs = curve.scaled(x)
    powers = xs[None, :] ** np.arange(n_powers)[:, None]
    sums = (powers / g[None, :]).sum(axis=1) * (math.pi / n_nodes)
    return (2.0 / 1j) * sums


def _raw_chain_periods(curve, refs, n_nodes):
    g = curve.genus
    periods = np.empty((g, 2 * g), dtype=complex)
    for i in range(2 * g):
        periods[:, i] = _segment_moments(curve, i, refs[i], n_nodes, g)
    return periods


def _assemble_tau(periods, g):
    a = periods[:, 0::2][:, :g]
    odd = periods[:, 1::2][:, :g]
    b = _B_SIGN * np.cumsum(odd[:, ::-1], axis=1)[:, ::-1]
    tau = np.linalg.solve(a, b)
    return tau, a, b


def period_matrix(curve, precision=1e-10):
    """Period matrix tau = A^-1 B for the fixed homology convention.

    Node counts double until tau moves by less than ``precision``; the last
    observed change is reported as the precision estimate.  Raises
    :class:`PrecisionError` if the doubling cap is reached and
    :class:`ConditioningError` for invalid curves.
    """
    if precision < 1e-13:
        raise ArgumentError("precision cannot be tighter than 1e-13")
    g = curve.genus
    refs = _chain_references(curve, 2 * g)
    prev = None
    n = _NODE_START
    while n <= _NODE_CAP:
        try:
            periods = _raw_chain_periods(curve, refs, n)
            tau, a, b = _assemble_tau(periods, g)
        except _NeedMoreNodes:
            n *= 2
            continue
        if prev is not None:
            change = float(np.abs(tau - prev).max())
            if change < precision * max(1.0, float(np.abs(tau).max())):
                rm = RiemannMatrix(
                    curve=curve,
                    tau=tau,
                    a_periods=a,
                    b_periods=b,
                    node_count=n,
                    precision_estimate=change,
                )
                _check_riemann(rm)
                return rm
        prev = tau
        n *= 2
    raise PrecisionError(f"period quadrature did not converge below {precision} within {_NODE_CAP} nodes")


def _check_riemann(rm):
    tau = rm.tau
    scale = float(np.linalg.norm(tau))
    asym = float(np.linalg.norm(tau - tau.T))
    if asym > 1e-6 * max(scale, 1e-30):
        raise PrecisionError(f"period matrix asymmetry {asym:.3g} exceeds tolerance")
    if float(np.linalg.eigvalsh(tau.imag)[0]) <= 0.0:
        raise PrecisionError("imaginary part of the period matrix is not positive definite")


# ---------------------------------------------------------------------------
# points on the curve


@dataclass(frozen=True)
class CurvePoint:
    x: complex
    y: complex
    branch_index: int = -1  # index into curve.branch_points, or -1

    @property
    def is_branch(self):
        return self.branch_index >= 0


def curve_point(curve, point, sheet=+1):
    """Normalise a point description to a :class:`CurvePoint`.

    Accepts an integer branch index, a bare x value (the sheet argument
    selects y = sheet * principal_y(x)), or an (x, y) pair which is checked
    against the curve equation.  The point at infinity is not supported.
    """
    if isinstance(point, CurvePoint):
        return point
    if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
        idx = int(point)
        if not (0 <= idx < len(curve.branch_points)):
            raise ArgumentError(f"branch index {idx} out of range")
        return CurvePoint(x=complex(curve.branch_points[idx]), y=0j, branch_index=idx)
    if isinstance(point, (tuple, list)) and len(point) == 2:
        x, y = complex(point[0]), complex(point[1])
        if not (np.isfinite(x.real) and np.isfinite(x.imag)):
            raise DomainError("the point at infinity is not supported")
        fx = curve.f(x)
        if abs(y * y - fx) > 1e-6 * (1.0 + abs(fx)):
            raise ArgumentError("y^2 does not match the curve equation at x")
        idx = _branch_index_of(curve, x)
        return CurvePoint(x=x, y=y, branch_index=idx)
    x = complex(point)
    if not (np.isfinite(x.real) and np.isfinite(x.imag)):
        raise DomainError("the point at infinity is not supported")
    idx = _branch_index_of(curve, x)
    if idx >= 0:
        return CurvePoint(x=complex(curve.branch_points[idx]), y=0j, branch_index=idx)
    y = complex(sheet) * complex(curve.principal_y(x))
    return CurvePoint(x=x, y=y, branch_index=-1)


def _branch_index_of(curve, x):
    dists = np.abs(curve.branch_points - x)
    idx = int(np.argmin(dists))
    if dists[idx] <= 1e-12 * curve.diameter:
        return idx
    return -1


def raw_differentials_at(curve, point, sheet=+1):
    """Values of the scaled monomial differentials against the local coordinate.

    At a regular point the coordinate is z = x - x0 and the value of
    x_s^{k-1} dx / y is x_s^{k-1} / y0.  At a branch point b the coordinate
    is z = sqrt(x - b); substituting x = b + z^2 gives the value
    2 x_s^{k-1} / sqrt(prod_{other} (b - b_j)), with the principal root.
    """
    pt = curve_point(curve, point, sheet)
    g = curve.genus
    k = np.arange(g)
    xs = curve.scaled(pt.x)
    if pt.is_branch:
        others = np.delete(curve.branch_points, pt.branch_index)
        root = np.exp(0.5 * np.log(np.prod(pt.x - others)))
        return 2.0 * xs ** k / root
    if pt.y == 0:
        raise ArgumentError("regular point has y = 0")
    return xs ** k / pt.y


def normalized_differentials_at(curve, point, sheet=+1, precision=1e-10):
    """Values of the normalized differential basis at a point of the curve.

    The normalized basis is the raw monomial basis recombined so that its
    a-periods form the identity; the values transform with the same matrix.
    """
    rm = curve.period_matrix(precision) if isinstance(curve, HyperellipticCurve) else curve
    if isinstance(curve, RiemannMatrix):
        rm, curve = curve, curve.curve
    raw = raw_differentials_at(curve, point, sheet)
    return np.linalg.solve(rm.a_periods, raw)


# ---------------------------------------------------------------------------
# Abel-Jacobi integration


def _gl_nodes(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0  # on [0, 1]


def _segment_clearance(curve, z0, z1, exclude=()):
    """Minimum distance from the branch points (minus exclusions) to the segment."""
    keep = np.ones(len(curve.branch_points), dtype=bool)
    for idx in exclude:
        keep[idx] = False
    pts = curve.branch_points[keep]
    if pts.size == 0:
        return float("inf")
    d = z1 - z0
    L2 = abs(d) ** 2
    if L2 == 0.0:
        return float(np.abs(pts - z0).min())
    t = np.clip(((pts - z0) * np.conj(d)).real / L2, 0.0, 1.0)
    return float(np.abs(pts - (z0 + t * d)).min())


def _leg_to_branch(curve, start, branch_idx, n_nodes, n_powers):
    """Integral of the raw differentials from a regular point to a branch point.

    Substituting x = b + (x0 - b) v^2 removes the square-root endpoint
    singularity; the branch of y is anchored at the regular endpoint and
    tracked down to the branch point.  Returns the integral of the scaled
    monomial basis along the straight segment, start -> branch.
    """
    b = complex(curve.branch_points[branch_idx])
    x0, y0 = start.x, start.y
    others = np.delete(curve.branch_points, branch_idx)
    v, w = _gl_nodes(n_nodes)
    v = v[::-1]  # anchor first at v = 1 (the regular endpoint)
    w = w[::-1]
    x = b + (x0 - b) * v ** 2
    _require_resolvable(np.concatenate([[x0], x]), others)
    h = np.prod(x[:, None] - others[None, :], axis=1)
    sval = np.exp(0.5 * np.log((x0 - b) * h))
    sval = _fix_sign_chain(sval, 0, y0)
    xs = curve.scaled(x)
    powers = xs[None, :] ** np.arange(n_powers)[:, None]
    integral = 2.0 * (x0 - b) * (powers / sval[None, :] * w[None, :]).sum(axis=1)
    return -integral  # orientation start -> branch


def _leg_from_branch(curve, branch_idx, end_x, n_nodes, n_powers):
    """Integral from a branch point to a regular x, plus the arrival y value.

    The branch of y is anchored by the principal root at the branch point;
    callers reconcile the overall sign against their target sheet.
    """
    b = complex(curve.branch_points[branch_idx])
    others = np.delete(curve.branch_points, branch_idx)
    v, w = _gl_nodes(n_nodes)
    x = b + (end_x - b) * v ** 2
    h = np.prod(x[:, None] - others[None, :], axis=1)
    anchor = np.exp(0.5 * np.log((end_x - b) * np.prod(b - others)))
    sval = np.exp(0.5 * np.log((end_x - b) * h))
    sval = _fix_sign_chain(sval, 0, anchor)
    xs = curve.scaled(x)
    powers = xs[None, :] ** np.arange(n_powers)[:, None]
    integral = 2.0 * (end_x - b) * (powers / sval[None, :] * w[None, :]).sum(axis=1)
    y_end = _continue_segment(curve, x[-1], v[-1] * sval[-1], end_x) if v[-1] != 1.0 else sval[-1]
    return integral, y_end


def _route_via_waypoint(curve, pt_a, pt_b):
    """Waypoint insertion when the straight connection runs too close to a branch point."""
    exclude = [i for i in (pt_a.branch_index, pt_b.branch_index) if i >= 0]
    direct = _segment_clearance(curve, pt_a.x, pt_b.x, exclude)
    guard = 1e-3 * curve.diameter
    if direct >= guard:
        return None
    mid = (pt_a.x + pt_b.x) / 2
    span = pt_b.x - pt_a.x
    if span == 0:
        span = curve.diameter
    best = None
    for kappa in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        w = mid + 1j * span * kappa
        clearance = min(
            _segment_clearance(curve, pt_a.x, w, exclude),
            _segment_clearance(curve, w, pt_b.x, exclude),
            float(np.abs(curve.branch_points - w).min()),
        )
        if best is None or clearance > best[1]:
            best = (w, clearance)
    if best[1] < 1e-8 * curve.diameter:
        raise PathError("no integration path clears the branch points")
    return best[0]


@dataclass
class AbelJacobiValue:
    """Normalized Abel-Jacobi integral with its reduction modulo the lattice."""

    vector: np.ndarray
    reduced: np.ndarray
    lattice_coefficients: np.ndarray
    residual: float


def lattice_reduce(vector, tau):
    """Reduce a vector in C^g modulo Z^g + tau Z^g (Babai rounding)."""
    vector = np.asarray(vector, dtype=complex)
    g = len(vector)
    M = np.zeros((2 * g, 2 * g))
    M[:g, :g] = np.eye(g)
    M[:g, g:] = tau.real
    M[g:, g:] = tau.imag
    rhs = np.concatenate([vector.real, vector.imag])
    coeff = np.linalg.solve(M, rhs)
    ints = np.rint(coeff)
    reduced = vector - (ints[:g] + tau @ ints[g:])
    return reduced, ints


def lattice_distance(vector, tau):
    """Norm of the lattice reduction of a vector."""
    reduced, _ = lattice_reduce(vector, tau)
    return float(np.linalg.norm(reduced))


def equal_mod_lattice(u, v, tau, tol=1e-8):
    return lattice_distance(np.asarray(u, dtype=complex) - np.asarray(v, dtype=complex), tau) <= tol


def _raw_abel_jacobi(curve, pt_a, pt_b, n_nodes):
    """Raw-basis integral from pt_a to pt_b routed through branch points.

    Routing every path through a branch-point hub resolves sheets at both
    endpoints and makes reversal an exact negation.
    """
    g = curve.genus
    if pt_a.is_branch and pt_b.is_branch:
        if pt_a.branch_index == pt_b.branch_index:
            return np.zeros(g, dtype=complex)
        mid = (pt_a.x + pt_b.x) / 2
        span = pt_b.x - pt_a.x
        exclude = [pt_a.branch_index, pt_b.branch_index]
        best = None
        for kappa in (0.5, -0.5, 1.0, -1.0, 0.25, -0.25, 2.0, -2.0):
            w = mid + 1j * span * kappa
            clearance = min(
                _segment_clearance(curve, pt_a.x, w, exclude),
                _segment_clearance(curve, w, pt_b.x, exclude),
            )
            own = float(np.abs(curve.branch_points[exclude] - w).min())
            clearance = min(clearance, own)
            if best is None or clearance > best[1]:
                best = (w, clearance)
        if best[1] < 1e-8 * curve.diameter:
            raise PathError("no integration path clears the branch points")
        w = best[0]
        leg1, y_w = _leg_from_branch(curve, pt_a.branch_index, w, n_nodes, g)
        waypoint = CurvePoint(x=w, y=y_w)
        leg2 = _leg_to_branch(curve, waypoint, pt_b.branch_index, n_nodes, g)
        return leg1 + leg2
    if pt_a.is_branch:
        return -_raw_abel_jacobi(curve, pt_b, pt_a, n_nodes)
    if pt_b.is_branch:
        waypoint = _route_via_waypoint(curve, pt_a, pt_b)
        if waypoint is None:
            return _leg_to_branch(curve, pt_a, pt_b.branch_index, n_nodes, g)
        y_w = _continue_segment(curve, pt_a.x, pt_a.y, waypoint)
        wp = CurvePoint(x=waypoint, y=y_w)
        leg1 = _integrate_regular_segment(curve, pt_a, waypoint, n_nodes, g)
        leg2 = _leg_to_branch(curve, wp, pt_b.branch_index, n_nodes, g)
        return leg1 + leg2
    # regular to regular: hub through the branch point with the best clearance
    hub = _best_hub(curve, pt_a, pt_b)
    to_hub_a = _raw_abel_jacobi(curve, pt_a, CurvePoint(curve.branch_points[hub], 0j, hub), n_nodes)
    to_hub_b = _raw_abel_jacobi(curve, pt_b, CurvePoint(curve.branch_points[hub], 0j, hub), n_nodes)
    return to_hub_a - to_hub_b


def _integrate_regular_segment(curve, start, end_x, n_nodes, n_powers):
    v, w = _gl_nodes(n_nodes)
    x = start.x + (end_x - start.x) * v
    f = np.prod(x[:, None] - curve.branch_points[None, :], axis=1)
    y = np.exp(0.5 * np.log(f))
    y = _fix_sign_chain(y, 0, _continue_segment(curve, start.x, start.y, x[0]))
    xs = curve.scaled(x)
    powers = xs[None, :] ** np.arange(n_powers)[:, None]
    return (end_x - start.x) * (powers / y[None, :] * w[None, :]).sum(axis=1)


def _best_hub(curve, pt_a, pt_b):
    best = None
    for idx in range(len(curve.branch_points)):
        b = curve.branch_points[idx]
        clearance = min(
            _segment_clearance(curve, pt_a.x, b, [idx]),
            _segment_clearance(curve, pt_b.x, b, [idx]),
        )
        if best is None or clearance > best[1]:
            best = (idx, clearance)
    if best[1] < 1e-8 * curve.diameter:
        raise PathError("no hub branch point clears the remaining branch points")
    return best[0]


def abel_jacobi(curve, p, q, precision=1e-10):
    """Normalized integral from p to q with its reduction modulo the lattice.

    Deterministic path choice; node counts double until the result settles
    below ``precision``.  Reversal of the endpoints negates the vector
    exactly, and the reduction is idempotent.
    """
    rm = curve.period_matrix(precision)
    pt_a = curve_point(curve, p)
    pt_b = curve_point(curve, q)
    g = curve.genus
    if pt_a == pt_b:
        zeros = np.zeros(g, dtype=complex)
        return AbelJacobiValue(vector=zeros, reduced=zeros.copy(), lattice_coefficients=np.zeros(2 * g), residual=0.0)
    prev = None
    n = _LEG_NODE_START
    while n <= _LEG_NODE_CAP:
        try:
            raw = _raw_abel_jacobi(curve, pt_a, pt_b, n)
        except _NeedMoreNodes:
            n *= 2
            continue
        if prev is not None and float(np.abs(raw - prev).max()) < precision:
            vec = np.linalg.solve(rm.a_periods, raw)
            reduced, ints = lattice_reduce(vec, rm.tau)
            return AbelJacobiValue(
                vector=vec,
                reduced=reduced,
                lattice_coefficients=ints,
                residual=float(np.linalg.norm(reduced)),
            )
        prev = raw
        n *= 2
    raise PrecisionError("path integral did not converge at the requested precision")


# ---------------------------------------------------------------------------
# genus-1 oracle


def j_algebraic(curve):
    """j-invariant of a genus-1 curve from the cross-ratio of its branch points.

    With the four branch points (mu_1, mu_2, mu_3, mu_4), mu_4 = infinity
    for an odd model, the cross-ratio lam maps them to (0, 1, lam, inf) and

        j = 256 (lam^2 - lam + 1)^3 / (lam^2 (lam - 1)^2).
    """
    if curve.genus != 1:
        raise DomainError("the cross-ratio j-invariant needs genus 1")
    mu = list(curve.sorted_branch_points)
    if len(mu) == 3:
        lam = (mu[2] - mu[0]) / (mu[1] - mu[0])
    else:
        m1, m2, m3, m4 = mu
        lam = ((m3 - m1) * (m2 - m4)) / ((m3 - m4) * (m2 - m1))
    return complex(256 * (lam ** 2 - lam + 1) ** 3 / (lam ** 2 * (lam - 1) ** 2))
