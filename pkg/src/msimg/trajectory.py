"""Orbit representations and observability analysis for moving point sources.

A moving point source is described by an orbit a(t) on an emission interval
[t_min, t_max].  For an observation direction x_hat the retarded-phase
function

    h(t) = t + x_hat . a(t)

controls what multi-frequency far-field data measured along x_hat can
reveal.  The range [xi_min, xi_max] of h over the interval decides whether
the direction is *observable* (range width >= interval duration) and, when
it is, yields the recoverable strip

    { y : xi_min - t_min <= x_hat . y <= xi_max - t_max },

a subset of the smallest slab containing the orbit and perpendicular to
x_hat.  Intersecting the strips of several observable directions gives a
convex bounding domain of the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# Absolute tolerance on (xi_max - xi_min) - T when deciding observability;
# boundary equality counts as observable.
CLASSIFICATION_TOL = 1e-9

# |h'| below this is treated as zero when hunting sign changes / plateaus.
PLATEAU_TOL = 1e-10

# Bisection / ternary refinement stops once the bracket is this narrow.
REFINE_TOL = 1e-10

# Default sample counts for the generic (non closed-form) extremum path.
DIVISION_SAMPLES = 4096
EXTREMUM_SAMPLES = 10_000


@dataclass(frozen=True)
class TimeInterval:
    """Emission interval [t_min, t_max] of the source."""

    t_min: float
    t_max: float

    def __post_init__(self):
        if not (0.0 <= self.t_min < self.t_max):
            raise ValueError(
                f"need 0 <= t_min < t_max, got [{self.t_min}, {self.t_max}]")

    @property
    def duration(self) -> float:
        return self.t_max - self.t_min

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_min + self.t_max)

    def contains(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit observation direction on the circle (2D) or sphere (3D)."""

    vec: np.ndarray
    theta: float | None = None
    phi: float | None = None

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=float)
        if v.shape not in ((2,), (3,)):
            raise ValueError(f"direction must be a 2- or 3-vector, got shape {v.shape}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("direction vector is not unit length")
        object.__setattr__(self, "vec", v)

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        """Planar direction (cos theta, sin theta)."""
        return cls(np.array([math.cos(theta), math.sin(theta)]), theta=theta)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "Direction":
        """Spherical direction (sin t cos p, sin t sin p, cos t)."""
        st = math.sin(theta)
        v = np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])
        return cls(v, theta=theta, phi=phi)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / n)

    def __repr__(self):
        return f"Direction({np.array2string(self.vec, precision=6)})"


# ---------------------------------------------------------------------------
# Orbit variants
# ---------------------------------------------------------------------------

class Trajectory:
    """Base orbit type: position/velocity over a TimeInterval."""

    interval: TimeInterval
    dim: int

    def position(self, t: float) -> np.ndarray:
        return self.positions(np.array([float(t)]))[0]

    def positions(self, ts: np.ndarray) -> np.ndarray:
        """Positions at an array of times, shape (len(ts), dim)."""
        raise NotImplementedError

    def velocity(self, t: float, side: str = "right") -> np.ndarray:
        """One-sided derivative of the orbit; `side` matters at breakpoints."""
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        """Interior times where the velocity may jump (empty for smooth orbits)."""
        return np.array([])

    def speed_bound(self) -> float:
        """Upper bound on |a'(t)| over the interval."""
        raise NotImplementedError

    def _check_time(self, t: float):
        if not self.interval.contains(t):
            raise ValueError(
                f"t={t} outside emission interval "
                f"[{self.interval.t_min}, {self.interval.t_max}]")


@dataclass(frozen=True, eq=False)
class Line(Trajectory):
    """Uniform straight-line motion offset + speed*t*unit.

    2D lines are built from a heading angle, 3D lines from a unit axis.
    """

    speed: float
    interval: TimeInterval
    angle: float | None = None
    axis: np.ndarray | None = None
    offset: np.ndarray | None = None

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be nonnegative")
        if (self.angle is None) == (self.axis is None):
            raise ValueError("give exactly one of angle (2D) or axis (3D)")
        if self.angle is not None:
            unit = np.array([math.cos(self.angle), math.sin(self.angle)])
        else:
            unit = np.asarray(self.axis, dtype=float)
            if unit.shape != (3,):
                raise ValueError("axis must be a 3-vector")
            n = np.linalg.norm(unit)
            if abs(n - 1.0) > 1e-12:
                raise ValueError("axis must be a unit vector")
        off = (np.zeros(unit.shape[0]) if self.offset is None
               else np.asarray(self.offset, dtype=float))
        if off.shape != unit.shape:
            raise ValueError("offset dimension does not match direction")
        object.__setattr__(self, "axis", unit if self.angle is None else None)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "_unit", unit)

    @property
    def dim(self) -> int:
        return self._unit.shape[0]

    @property
    def unit(self) -> np.ndarray:
        return self._unit

    def positions(self, ts):
        ts = np.asarray(ts, dtype=float)
        return self.offset[None, :] + self.speed * ts[:, None] * self._unit[None, :]

    def velocity(self, t, side="right"):
        self._check_time(t)
        return self.speed * self._unit.copy()

    def speed_bound(self):
        return self.speed


@dataclass(frozen=True, eq=False)
class Arc(Trajectory):
    """Circular motion center + radius*(cos(s*t + phase), sin(s*t + phase)).

    `orientation` s = +1 traverses counterclockwise, -1 clockwise; phase
    shifts the starting angle.  2D only; unit angular rate, so |a'| = radius.
    """

    center: np.ndarray
    interval: TimeInterval
    radius: float = 1.0
    phase: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (2,):
            raise ValueError("arc center must be a 2-vector")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        object.__setattr__(self, "center", c)

    dim = 2

    def positions(self, ts):
        ts = np.asarray(ts, dtype=float)
        u = self.orientation * ts + self.phase
        return self.center[None, :] + self.radius * np.stack(
            [np.cos(u), np.sin(u)], axis=1)

    def velocity(self, t, side="right"):
        self._check_time(t)
        u = self.orientation * t + self.phase
        return self.radius * self.orientation * np.array([-math.sin(u), math.cos(u)])

    def speed_bound(self):
        return self.radius


@dataclass(frozen=True, eq=False)
class PiecewiseLinear(Trajectory):
    """Polyline orbit through (time, point) breakpoints, linear in between."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        ps = np.asarray(self.points, dtype=float)
        if ts.ndim != 1 or len(ts) < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("breakpoint times must be strictly increasing")
        if ps.shape[0] != len(ts) or ps.ndim != 2 or ps.shape[1] not in (2, 3):
            raise ValueError("points must be (n, 2) or (n, 3) matching times")
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "points", ps)
        object.__setattr__(self, "interval", TimeInterval(ts[0], ts[-1]))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def positions(self, ts):
        ts = np.asarray(ts, dtype=float)
        out = np.empty((len(ts), self.dim))
        for d in range(self.dim):
            out[:, d] = np.interp(ts, self.times, self.points[:, d])
        return out

    def _segment_index(self, t, side="right"):
        # segment i covers [times[i], times[i+1]]
        look = "right" if side == "right" else "left"
        i = int(np.searchsorted(self.times, t, side=look)) - 1
        return min(max(i, 0), len(self.times) - 2)

    def velocity(self, t, side="right"):
        self._check_time(t)
        i = self._segment_index(t, side)
        dt = self.times[i + 1] - self.times[i]
        return (self.points[i + 1] - self.points[i]) / dt

    def breakpoints(self):
        return self.times[1:-1].copy()

    def speed_bound(self):
        seg = np.diff(self.points, axis=0) / np.diff(self.times)[:, None]
        return float(np.max(np.linalg.norm(seg, axis=1)))


class Sampled(PiecewiseLinear):
    """Orbit given by a dense (time, point) table, linearly interpolated."""


# ---------------------------------------------------------------------------
# Retarded phase h and its derivative
# ---------------------------------------------------------------------------

def eval_position(traj: Trajectory, t: float) -> np.ndarray:
    """Orbit position a(t); t must lie in the emission interval."""
    traj._check_time(t)
    return traj.position(t)


def eval_velocity(traj: Trajectory, t: float, side: str = "right") -> np.ndarray:
    """Orbit velocity a'(t); the right derivative at velocity breakpoints."""
    return traj.velocity(t, side)


def _check_dims(traj: Trajectory, direction: Direction):
    if traj.dim != direction.dim:
        raise ValueError(f"trajectory is {traj.dim}D but direction is {direction.dim}D")


def h_value(traj: Trajectory, direction: Direction, t: float) -> float:
    """Retarded phase h(t) = t + x_hat . a(t)."""
    _check_dims(traj, direction)
    return float(t) + float(direction.vec @ eval_position(traj, t))


def h_values(traj: Trajectory, direction: Direction, ts: np.ndarray) -> np.ndarray:
    """Vectorized h over an array of times."""
    _check_dims(traj, direction)
    ts = np.asarray(ts, dtype=float)
    return ts + traj.positions(ts) @ direction.vec


def h_derivative(traj: Trajectory, direction: Direction, t: float,
                 side: str = "right") -> float:
    """h'(t) = 1 + x_hat . a'(t), one-sided at velocity breakpoints."""
    _check_dims(traj, direction)
    return 1.0 + float(direction.vec @ eval_velocity(traj, t, side))


# ---------------------------------------------------------------------------
# Division points of h'
# ---------------------------------------------------------------------------

def _sign3(x: float) -> int:
    if x > PLATEAU_TOL:
        return 1
    if x < -PLATEAU_TOL:
        return -1
    return 0


def _bisect_sign_change(f, a, b, fa, fb):
    while b - a > REFINE_TOL:
        m = 0.5 * (a + b)
        fm = f(m)
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


def _bisect_plateau_edge(f, inside, outside):
    """Locate the boundary between |f| <= tol (at `inside`) and |f| > tol."""
    a, b = inside, outside
    while abs(b - a) > REFINE_TOL:
        m = 0.5 * (a + b)
        if abs(f(m)) <= PLATEAU_TOL:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def division_points(traj: Trajectory, direction: Direction,
                    sampling_density: int = DIVISION_SAMPLES) -> list[float]:
    """Interior times where h' changes sign or a zero plateau starts/ends.

    Found by dense midpoint sampling of each smooth piece plus bisection
    refinement.  Isolated tangential zeros of h' (no sign change, no
    plateau of measurable width) are not reported.  Velocity breakpoints
    where the one-sided signs of h' differ are included.
    """
    if sampling_density < 1000:
        raise ValueError("sampling_density must be at least 1000")
    _check_dims(traj, direction)
    iv = traj.interval
    bks = [float(b) for b in traj.breakpoints() if iv.t_min < b < iv.t_max]
    bounds = [iv.t_min, *bks, iv.t_max]

    def hp(t):
        return h_derivative(traj, direction, t)

    found: list[float] = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        n = max(16, int(math.ceil(sampling_density * (b - a) / iv.duration)))
        step = (b - a) / n
        ts = a + step * (np.arange(n) + 0.5)
        vals = np.array([hp(t) for t in ts])
        signs = np.array([_sign3(v) for v in vals])

        # compress equal-sign runs into (sign, first index, last index)
        runs = []
        start = 0
        for i in range(1, n):
            if signs[i] != signs[start]:
                runs.append((signs[start], start, i - 1))
                start = i
        runs.append((signs[start], start, n - 1))

        for r, (s, i0, i1) in enumerate(runs):
            if s != 0:
                # direct sign change against the next nonzero run
                if r + 1 < len(runs) and runs[r + 1][0] == -s:
                    j = runs[r + 1][1]
                    found.append(_bisect_sign_change(
                        hp, ts[i1], ts[j], vals[i1], vals[j]))
                continue
            # zero run: refine its edges, decide plateau vs tangential touch
            left = (ts[i0] if i0 == 0 and a == iv.t_min else None)
            right = (ts[i1] if i1 == n - 1 and b == iv.t_max else None)
            if i0 > 0:
                left = _bisect_plateau_edge(hp, ts[i0], ts[i0 - 1])
            elif a != iv.t_min:
                left = a  # plateau reaches the breakpoint
            if i1 < n - 1:
                right = _bisect_plateau_edge(hp, ts[i1], ts[i1 + 1])
            elif b != iv.t_max:
                right = b
            width = right - left
            flank_l = runs[r - 1][0] if r > 0 else None
            flank_r = runs[r + 1][0] if r + 1 < len(runs) else None
            if width >= step:
                # genuine plateau: its interior edges are division points
                if i0 > 0:
                    found.append(left)
                if i1 < n - 1:
                    found.append(right)
            elif flank_l is not None and flank_r is not None and flank_l == -flank_r:
                # narrow zero band crossed with a sign change
                found.append(_bisect_sign_change(
                    hp, ts[i0 - 1], ts[i1 + 1], vals[i0 - 1], vals[i1 + 1]))

    for b in bks:
        if _sign3(h_derivative(traj, direction, b, "left")) != \
           _sign3(h_derivative(traj, direction, b, "right")):
            found.append(b)

    found.sort()
    merged: list[float] = []
    for t in found:
        if not merged or t - merged[-1] > 1e-8:
            merged.append(t)
    return merged


# ---------------------------------------------------------------------------
# Extrema of h and of the direction projection
# ---------------------------------------------------------------------------

def _arc_critical_times(traj: Arc, direction: Direction, with_time_term: bool):
    """Closed-form interior roots of h' (or of the projection derivative)."""
    theta = math.atan2(direction.vec[1], direction.vec[0])
    s = traj.orientation
    iv = traj.interval
    # phase argument u(t) = s*t + phase - theta;  d/dt x_hat.a = -s*r*sin(u)
    roots_u: list[float] = []
    if with_time_term:
        # h' = 1 - s*r*sin(u) = 0  =>  sin(u) = s / r  (needs r >= 1)
        if traj.radius >= 1.0:
            base = math.asin(s / traj.radius)
            roots_u = [base, math.pi - base]
    else:
        roots_u = [0.0, math.pi]
    out = []
    span = iv.t_max - iv.t_min
    for u0 in roots_u:
        # t = s * (u0 + 2 pi n + theta - phase); enumerate n covering interval
        n_center = (s * iv.midpoint - theta + traj.phase - u0) / TWO_PI
        for n in range(int(math.floor(n_center - span / TWO_PI) - 1),
                       int(math.ceil(n_center + span / TWO_PI) + 2)):
            t = s * (u0 + TWO_PI * n + theta - traj.phase)
            if iv.t_min < t < iv.t_max:
                out.append(t)
    return out


def _ternary_refine(f, a, b, maximize):
    sgn = 1.0 if maximize else -1.0
    while b - a > 1e-12:
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if sgn * f(m1) < sgn * f(m2):
            a = m1
        else:
            b = m2
    return 0.5 * (a + b)


def _range_of(traj: Trajectory, direction: Direction, with_time_term: bool):
    """Exact-where-possible range of h (or of x_hat . a) over the interval."""
    iv = traj.interval

    if with_time_term:
        f_vec = lambda ts: h_values(traj, direction, ts)
    else:
        f_vec = lambda ts: traj.positions(np.asarray(ts, dtype=float)) @ direction.vec
    f = lambda t: float(f_vec(np.array([t]))[0])

    cands = [iv.t_min, iv.t_max]
    if isinstance(traj, Line):
        pass  # affine in t: endpoint evaluation is exact
    elif isinstance(traj, Arc):
        cands += _arc_critical_times(traj, direction, with_time_term)
    else:
        cands += [float(b) for b in traj.breakpoints()]
        ts = np.linspace(iv.t_min, iv.t_max, EXTREMUM_SAMPLES)
        vals = f_vec(ts)
        for maximize in (True, False):
            i = int(np.argmax(vals) if maximize else np.argmin(vals))
            a = ts[max(i - 1, 0)]
            b = ts[min(i + 1, len(ts) - 1)]
            cands.append(_ternary_refine(f, a, b, maximize))

    vals = f_vec(np.array(cands))
    return float(np.min(vals)), float(np.max(vals))


@dataclass(frozen=True)
class ObservabilityReport:
    """Range of h over the interval and the resulting classification."""

    xi_min: float
    xi_max: float
    duration: float
    observable: bool

    @property
    def width(self) -> float:
        return self.xi_max - self.xi_min


def xi_extrema(traj: Trajectory, direction: Direction,
               tol: float = CLASSIFICATION_TOL) -> ObservabilityReport:
    """Minimum and maximum of h(t) = t + x_hat . a(t) over the interval.

    Closed-form candidates are used for Line (affine h) and Arc (endpoints
    plus interior roots of h'); polyline orbits use dense sampling with
    ternary refinement plus breakpoint candidates.
    """
    lo, hi = _range_of(traj, direction, with_time_term=True)
    T = traj.interval.duration
    return ObservabilityReport(lo, hi, T, observable=(hi - lo >= T - tol))


def classify(traj: Trajectory, direction: Direction,
             tol: float = CLASSIFICATION_TOL) -> bool:
    """True when the direction is observable: xi_max - xi_min >= T - tol."""
    return xi_extrema(traj, direction, tol).observable


def projection_hull(traj: Trajectory, direction: Direction) -> tuple[float, float]:
    """Range [inf, sup] of x_hat . a(t): the smallest slab holding the orbit."""
    return _range_of(traj, direction, with_time_term=False)


# ---------------------------------------------------------------------------
# Strips and their intersection
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Strip:
    """Constraint lo <= x_hat . y <= hi; empty when hi < lo."""

    direction: Direction
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.hi < self.lo

    def contains(self, y) -> bool:
        if self.empty:
            return False
        p = float(self.direction.vec @ np.asarray(y, dtype=float))
        return self.lo <= p <= self.hi

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        if self.empty:
            return np.zeros(len(points), dtype=bool)
        p = np.asarray(points, dtype=float) @ self.direction.vec
        return (p >= self.lo) & (p <= self.hi)


def strip(traj: Trajectory, direction: Direction) -> Strip:
    """Recoverable strip [xi_min - t_min, xi_max - t_max] along x_hat.

    Empty (hi < lo) exactly when the direction is non-observable; callers
    in multi-direction pipelines skip empty strips silently.
    """
    rep = xi_extrema(traj, direction)
    return Strip(direction,
                 rep.xi_min - traj.interval.t_min,
                 rep.xi_max - traj.interval.t_max)


@dataclass(frozen=True)
class ThetaDomain:
    """Intersection of the strips of the observable directions used."""

    strips: tuple

    @property
    def empty(self) -> bool:
        return len(self.strips) == 0

    def contains(self, y) -> bool:
        if self.empty:
            return False
        return all(s.contains(y) for s in self.strips)

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.empty:
            return np.zeros(len(points), dtype=bool)
        out = np.ones(len(points), dtype=bool)
        for s in self.strips:
            out &= s.contains_many(points)
        return out


def theta_domain(traj: Trajectory, directions) -> ThetaDomain:
    """Strip intersection over the observable members of `directions`."""
    if not directions:
        raise ValueError("need at least one direction")
    kept = []
    for d in directions:
        if classify(traj, d):
            kept.append(strip(traj, d))
    return ThetaDomain(tuple(kept))


def contains(domain: ThetaDomain, y) -> bool:
    return domain.contains(y)


# ---------------------------------------------------------------------------
# Closed-form observable sets (line and unit-rate arc)
# ---------------------------------------------------------------------------

def _canonical_intervals(raw: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Reduce angle intervals mod 2 pi, splitting wraparounds in two."""
    out = []
    for lo, hi in raw:
        if hi - lo >= TWO_PI:
            out.append((0.0, TWO_PI))
            continue
        lo = lo % TWO_PI
        hi = hi % TWO_PI
        if hi == 0.0:
            hi = TWO_PI
        if lo <= hi:
            out.append((lo, hi))
        else:
            out.append((0.0, hi))
            out.append((lo, TWO_PI))
    return sorted(out)


def observable_set_line(speed: float, angle: float) -> list[tuple[float, float]]:
    """Observable heading angles for straight motion speed*t*(cos a, sin a).

    Always contains [angle - pi/2, angle + pi/2]; for speed > 2 a second
    band [angle + arccos(-2/speed), angle + 2 pi - arccos(-2/speed)] opens
    up.  Intervals are canonical in [0, 2 pi) with wraparounds split.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    raw = [(angle - math.pi / 2, angle + math.pi / 2)]
    if speed > 2:
        gap = math.acos(-2.0 / speed)
        raw.append((angle + gap, angle + TWO_PI - gap))
    return _canonical_intervals(raw)


def observable_set_arc(interval: TimeInterval) -> list[tuple[float, float]]:
    """Observable angles for a unit-radius counterclockwise arc.

    Valid for durations below a full turn; the observable band is the
    half-circle starting at the mean arc parameter.
    """
    if interval.duration >= TWO_PI:
        raise ValueError("closed form requires duration < 2 pi")
    mid = 0.5 * (interval.t_min + interval.t_max)
    return _canonical_intervals([(mid, mid + math.pi)])


def angle_in_set(intervals: list[tuple[float, float]], theta: float,
                 tol: float = 0.0) -> bool:
    """Membership of theta modulo 2 pi in a canonical interval list."""
    th = theta % TWO_PI
    for lo, hi in intervals:
        if lo - tol <= th <= hi + tol:
            return True
        # endpoints touching the wrap seam
        if th + TWO_PI <= hi + tol or th - TWO_PI >= lo - tol:
            return True
    return False
