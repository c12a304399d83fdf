"""Radial wave propagation: method-of-lines evolution of
u_tt = lap u + a|u_t|^p + b|u_r|^p + F, the exact n=3 free-wave oracle,
the zero-data source solve, and blow-up detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .core import (
    ProblemSpec,
    RadialField,
    RadialGrid,
    Trajectory,
    WaveState,
    _derivative_values,
    _laplacian_values,
    _require_finite,
    _weighted_square_integral,
)
from .errors import (
    PreconditionViolation,
    RangeViolation,
    StepUnderflow,
    SupportOverflow,
)

BLOWUP_THRESHOLD = 1e6
CAUSALITY_MARGIN = 2.0
VANISH_FACTOR = 1e-14

_FAMILIES = ("gaussian", "smooth_bump", "from_file")
_ASSIGNS = ("to_u0", "to_u1", "split")
FILE_HEADER = "# radial-field v1"


@dataclass(frozen=True)
class DataProfile:
    """Initial-data template: a shape family scaled by the amplitude epsilon."""

    family: str
    epsilon: float
    width: float = 1.0
    center: float = 0.0
    assigns: str = "to_u0"
    path: str = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise PreconditionViolation(f"unknown profile family {self.family!r}")
        if self.assigns not in _ASSIGNS:
            raise PreconditionViolation(f"unknown assigns {self.assigns!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise PreconditionViolation(f"epsilon must be >= 0, got {self.epsilon}")
        if not (math.isfinite(self.width) and self.width > 0.0):
            raise PreconditionViolation(f"width must be positive, got {self.width}")
        if not (math.isfinite(self.center) and self.center >= 0.0):
            raise PreconditionViolation(f"center must be >= 0, got {self.center}")
        if self.family == "from_file" and not self.path:
            raise PreconditionViolation("from_file profile needs a path")


def _bump_shape(r: np.ndarray, center: float, width: float) -> np.ndarray:
    xi = (r - center) / width
    out = np.zeros_like(r)
    inside = np.abs(xi) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - xi[inside] ** 2))
    return out


def _load_field_file(path: str, grid: RadialGrid) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    if not lines or lines[0] != FILE_HEADER:
        raise PreconditionViolation(f"{path}: first line must be {FILE_HEADER!r}")
    rs, vals = [], []
    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise PreconditionViolation(f"{path}: expected 'r value' rows, got {ln!r}")
        rs.append(float(parts[0]))
        vals.append(float(parts[1]))
    rs = np.array(rs)
    vals = np.array(vals)
    if rs.size < 4:
        raise PreconditionViolation(f"{path}: need at least 4 samples")
    if np.any(np.diff(rs) <= 0.0):
        raise PreconditionViolation(f"{path}: radii must be strictly increasing")
    if rs[0] > 1e-12:
        raise PreconditionViolation(f"{path}: radii must start at r = 0")
    _require_finite(vals, f"{path} values")
    interp = PchipInterpolator(rs, vals, extrapolate=False)
    out = interp(grid.nodes)
    out[grid.nodes > rs[-1]] = 0.0
    out = np.nan_to_num(out, nan=0.0)
    return out


@dataclass(frozen=True)
class ProfileData:
    u0: RadialField
    u1: RadialField


def make_profile(profile: DataProfile, grid: RadialGrid) -> ProfileData:
    """Realize a data template on a grid; rejects data reaching the boundary."""
    r = grid.nodes
    if profile.family == "gaussian":
        shape = np.exp(-(((r - profile.center) / profile.width) ** 2))
        edge = math.exp(-(((grid.r_max - profile.center) / profile.width) ** 2))
        if edge > 1e-16:
            raise SupportOverflow(
                f"gaussian tail {edge:.3g} at r_max exceeds 1e-16 of peak"
            )
    elif profile.family == "smooth_bump":
        if profile.center + profile.width >= grid.r_max:
            raise SupportOverflow("bump support reaches the outer boundary")
        shape = _bump_shape(r, profile.center, profile.width)
    else:
        shape = _load_field_file(profile.path, grid)
        peak = np.max(np.abs(shape)) or 1.0
        if abs(shape[-1]) > VANISH_FACTOR * peak:
            raise SupportOverflow("file data does not vanish before r_max")

    data = profile.epsilon * shape
    if abs(data[-1]) > VANISH_FACTOR * profile.epsilon:
        raise SupportOverflow("data does not vanish before r_max")
    zero = np.zeros_like(data)
    u0 = data if profile.assigns in ("to_u0", "split") else zero
    u1 = data if profile.assigns in ("to_u1", "split") else zero
    return ProfileData(u0=RadialField(grid, u0), u1=RadialField(grid, u1))


def support_radius(u0: RadialField, u1: RadialField) -> float:
    """Largest node radius at which the data is not numerically negligible."""
    mags = np.maximum(np.abs(u0.values), np.abs(u1.values))
    peak = float(np.max(mags))
    if peak == 0.0:
        return 0.0
    live = np.nonzero(mags > VANISH_FACTOR * peak)[0]
    return float(u0.grid.nodes[live[-1]]) if live.size else 0.0


def nonlinearity(state: WaveState, spec: ProblemSpec) -> RadialField:
    """a|u_t|^p + b|u_r|^p evaluated nodewise."""
    du = _derivative_values(state.u.values, state.grid.spacing)
    vals = spec.a * np.abs(state.v.values) ** spec.p + spec.b * np.abs(du) ** spec.p
    return RadialField(state.grid, vals)


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # "completed" | "blew_up"
    trajectory: Trajectory
    t_blowup: float
    peak_gradient: float

    def __post_init__(self):
        if self.status not in ("completed", "blew_up"):
            raise PreconditionViolation(f"unknown status {self.status!r}")
        if self.status == "blew_up" and self.t_blowup is None:
            raise PreconditionViolation("blew_up outcome needs t_blowup")


class LinearSeries:
    """Piecewise-linear-in-time nodal forcing built from sampled fields."""

    def __init__(self, times, fields):
        self.times = np.asarray(times, dtype=float)
        self.fields = np.asarray(fields, dtype=float)
        if self.times.ndim != 1 or self.fields.shape[0] != self.times.size:
            raise PreconditionViolation("times and fields are inconsistent")

    def __call__(self, t: float) -> np.ndarray:
        ts = self.times
        if t <= ts[0]:
            return self.fields[0]
        if t >= ts[-1]:
            return self.fields[-1]
        k = int(np.searchsorted(ts, t) - 1)
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        return (1.0 - w) * self.fields[k] + w * self.fields[k + 1]


def evolve(
    spec: ProblemSpec,
    u0: RadialField,
    u1: RadialField,
    grid: RadialGrid,
    t_end: float,
    forcing=None,
    linear_only: bool = False,
    cfl: float = 0.25,
    sample_stride: int = 10,
    blowup_threshold: float = BLOWUP_THRESHOLD,
    forcing_support: float = 0.0,
) -> SolveOutcome:
    """March (u, v) with classical RK4 at dt = cfl*dr.

    Neumann symmetry closes the origin, the outer node is clamped, and the
    causality precondition keeps the boundary causally inert.  The run aborts
    as blown-up the first time max(|v|, |u_r|) passes the threshold or any
    value stops being finite.
    """
    if u0.grid != grid or u1.grid != grid:
        raise PreconditionViolation("data must live on the target grid")
    if not (math.isfinite(t_end) and t_end >= 0.0):
        raise PreconditionViolation(f"t_end must be >= 0, got {t_end}")
    if not (0.0 < cfl <= 0.75):
        raise PreconditionViolation(f"cfl must lie in (0, 0.75], got {cfl}")
    if sample_stride < 1:
        raise PreconditionViolation("sample_stride must be >= 1")

    reach = max(support_radius(u0, u1), forcing_support)
    if reach + t_end + CAUSALITY_MARGIN > grid.r_max:
        raise PreconditionViolation(
            f"causality: support {reach:.3g} + t_end {t_end:.3g} + "
            f"{CAUSALITY_MARGIN} exceeds r_max {grid.r_max:.3g}"
        )

    state0 = WaveState(0.0, u0, u1)
    if t_end == 0.0:
        traj = Trajectory(problem=spec, states=(state0,), dt_sample=1.0)
        return SolveOutcome("completed", traj, None, 0.0)

    dr = grid.spacing
    nsteps = max(1, math.ceil(t_end / (cfl * dr)))
    nsteps = sample_stride * math.ceil(nsteps / sample_stride)
    dt = t_end / nsteps
    if dt < 1e-12:
        raise StepUnderflow(f"dt = {dt:.3g} below 1e-12")

    r = grid.nodes
    n = spec.n_dim
    a, b, p = spec.a, spec.b, spec.p
    nonlinear = not linear_only and (a != 0.0 or b != 0.0)

    def rhs(t, u, v):
        du_t = v.copy()
        du_t[-1] = 0.0
        acc = _laplacian_values(u, r, dr, n)
        if nonlinear:
            if a != 0.0:
                acc += a * np.abs(v) ** p
            if b != 0.0:
                acc += b * np.abs(_derivative_values(u, dr)) ** p
        if forcing is not None:
            acc = acc + forcing(t)
        acc[-1] = 0.0
        return du_t, acc

    u = u0.values.copy()
    v = u1.values.copy()
    states = [state0]
    peak = max(
        float(np.max(np.abs(v))),
        float(np.max(np.abs(_derivative_values(u, dr)))),
    )
    status, t_blow = "completed", None

    t = 0.0
    for k in range(nsteps):
        k1u, k1v = rhs(t, u, v)
        k2u, k2v = rhs(t + 0.5 * dt, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
        k3u, k3v = rhs(t + 0.5 * dt, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
        k4u, k4v = rhs(t + dt, u + dt * k3u, v + dt * k3v)
        u += (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t = (k + 1) * dt

        vmax = float(np.max(np.abs(v)))
        gmax = float(np.max(np.abs(_derivative_values(u, dr))))
        size = max(vmax, gmax)
        if not math.isfinite(size) or size > blowup_threshold:
            status, t_blow = "blew_up", t
            peak = max(peak, size) if math.isfinite(size) else math.inf
            break
        peak = max(peak, size)
        if (k + 1) % sample_stride == 0:
            states.append(WaveState(t, RadialField(grid, u), RadialField(grid, v)))

    traj = Trajectory(problem=spec, states=tuple(states), dt_sample=sample_stride * dt)
    return SolveOutcome(status, traj, t_blow, peak)


def duhamel(
    forcing,
    t_end: float,
    spec: ProblemSpec,
    grid: RadialGrid,
    forcing_support: float = 0.0,
    **kwargs,
) -> Trajectory:
    """Zero-data linear solve driven by the source term."""
    zero = RadialField.zeros(grid)
    outcome = evolve(
        spec,
        zero,
        zero,
        grid,
        t_end,
        forcing=forcing,
        linear_only=True,
        forcing_support=forcing_support,
        **kwargs,
    )
    return outcome.trajectory


def energy(state: WaveState, n: int) -> float:
    """(1/2) * int (v^2 + u_r^2) over R^n."""
    du = _derivative_values(state.u.values, state.grid.spacing)
    return 0.5 * (
        _weighted_square_integral(state.v.values, state.grid, n, 0.0, 0.0)
        + _weighted_square_integral(du, state.grid, n, 0.0, 0.0)
    )


def exact_free_n3(
    u0: RadialField, u1: RadialField, t: float, grid: RadialGrid
) -> WaveState:
    """Exact n=3 free radial wave via the reduction of r*u to a line wave.

    With PHI(s) = s*phi(s) and PSI(s) = s*psi(s) extended oddly,
    r u(t,r) = [PHI(r+t) + PHI(r-t)]/2 + (1/2) int_{r-t}^{r+t} PSI, and
    u(t,0) = PHI'(t) + PSI(t).  Cubic interpolation supplies phi and psi off
    the nodes; beyond r_max the data must have vanished, in which case the
    extensions are zero there.
    """
    if u0.grid != grid or u1.grid != grid:
        raise PreconditionViolation("data must live on the target grid")
    if not (math.isfinite(t) and t >= 0.0):
        raise PreconditionViolation(f"t must be >= 0, got {t}")

    r = grid.nodes
    # radial symmetry forces phi'(0) = psi'(0) = 0
    phi = CubicSpline(r, u0.values, bc_type=((1, 0.0), "not-a-knot"))
    psi = CubicSpline(r, u1.values, bc_type=((1, 0.0), "not-a-knot"))
    phi_d = phi.derivative()
    phi_dd = phi_d.derivative()
    psi_d = psi.derivative()
    big_psi = CubicSpline(
        r, r * u1.values, bc_type=((1, float(u1.values[0])), "not-a-knot")
    )
    big_psi_int = big_psi.antiderivative()

    scale = max(
        float(np.max(np.abs(u0.values))), float(np.max(np.abs(u1.values))), 1e-300
    )
    tail = max(abs(float(u0.values[-1])), abs(float(u1.values[-1])))
    vanishes = tail <= 1e-12 * scale
    if t > 0.0 and not vanishes:
        raise RangeViolation(
            "r + t exceeds the interpolant domain and the data has not vanished "
            "before r_max"
        )

    def PHI(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        out = np.where(a <= grid.r_max, s * phi(np.minimum(a, grid.r_max)), 0.0)
        return out

    def PHI_D(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        inside = a <= grid.r_max
        ac = np.minimum(a, grid.r_max)
        return np.where(inside, phi(ac) + ac * phi_d(ac), 0.0)

    def PSI(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        return np.where(a <= grid.r_max, np.sign(s) * big_psi(np.minimum(a, grid.r_max)), 0.0)

    def PSI_AD(s):
        # even antiderivative of the odd PSI
        s = np.asarray(s, dtype=float)
        a = np.minimum(np.abs(s), grid.r_max)
        return big_psi_int(a)

    rp = r[1:] + t
    rm = r[1:] - t
    u_vals = np.empty_like(r)
    v_vals = np.empty_like(r)
    u_vals[1:] = (
        0.5 * (PHI(rp) + PHI(rm)) + 0.5 * (PSI_AD(rp) - PSI_AD(rm))
    ) / r[1:]
    v_vals[1:] = (0.5 * (PHI_D(rp) - PHI_D(rm)) + 0.5 * (PSI(rp) + PSI(rm))) / r[1:]

    if t <= grid.r_max:
        u_vals[0] = float(phi(t) + t * phi_d(t) + t * psi(t))
        v_vals[0] = float(2.0 * phi_d(t) + t * phi_dd(t) + psi(t) + t * psi_d(t))
    else:
        u_vals[0] = 0.0
        v_vals[0] = 0.0

    return WaveState(t, RadialField(grid, u_vals), RadialField(grid, v_vals))
