"""Radial grids and fields, discrete radial calculus, and weighted norms.

Everything in this module is immutable after construction and every operation
is a pure function, so values can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    HorizonMismatch,
    NonIntegrable,
    PreconditionViolation,
)

# |S^{n-1}| for the small dimensions the experiments actually use; the gamma
# fallback covers the rest.
_SPHERE_AREA = {
    2: 2.0 * math.pi,
    3: 4.0 * math.pi,
    4: 2.0 * math.pi**2,
    5: 8.0 * math.pi**2 / 3.0,
    6: math.pi**3,
    7: 16.0 * math.pi**3 / 15.0,
    8: math.pi**4 / 3.0,
}


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    if n < 2:
        raise PreconditionViolation(f"dimension must be >= 2, got {n}")
    if n in _SPHERE_AREA:
        return _SPHERE_AREA[n]
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _require_finite(values, label):
    if not np.all(np.isfinite(values)):
        raise PreconditionViolation(f"{label} contains NaN or infinite entries")


@dataclass(frozen=True)
class ProblemSpec:
    """The equation under study: box u = a|u_t|^p + b|grad u|^p in n dimensions."""

    n_dim: int
    p: float
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if self.n_dim < 2:
            raise PreconditionViolation(f"n_dim must be >= 2, got {self.n_dim}")
        if not (math.isfinite(self.p) and self.p > 1.0):
            raise PreconditionViolation(f"p must be finite and > 1, got {self.p}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise PreconditionViolation("coefficients a, b must be finite")

    @property
    def p_critical(self) -> float:
        return 1.0 + 2.0 / (self.n_dim - 1)

    @property
    def s_scaling(self) -> float:
        return self.n_dim / 2.0 + 1.0 - 1.0 / (self.p - 1.0)


@dataclass(frozen=True)
class CriticalExponents:
    p_c: float
    s_c: float


def critical_exponents(spec: ProblemSpec) -> CriticalExponents:
    """Blow-up/global threshold power and the scaling-invariant Sobolev order."""
    return CriticalExponents(p_c=spec.p_critical, s_c=spec.s_scaling)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes r_j = j*dr on [0, r_max]."""

    r_max: float
    num_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.r_max) and self.r_max > 0.0):
            raise PreconditionViolation(f"r_max must be positive, got {self.r_max}")
        if self.num_cells < 16:
            raise PreconditionViolation(f"num_cells must be >= 16, got {self.num_cells}")

    @property
    def spacing(self) -> float:
        return self.r_max / self.num_cells

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.linspace(0.0, self.r_max, self.num_cells + 1)
        r.flags.writeable = False
        return r


@dataclass(frozen=True)
class RadialField:
    """Nodal values of a radial function on a grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.num_cells + 1,):
            raise PreconditionViolation(
                f"field length {vals.shape} does not match grid "
                f"({self.grid.num_cells + 1} nodes)"
            )
        _require_finite(vals, "radial field")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @staticmethod
    def zeros(grid: RadialGrid) -> "RadialField":
        return RadialField(grid, np.zeros(grid.num_cells + 1))

    @staticmethod
    def from_function(grid: RadialGrid, fn) -> "RadialField":
        return RadialField(grid, fn(grid.nodes))

    def scaled(self, c: float) -> "RadialField":
        return RadialField(self.grid, c * self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True)
class WaveState:
    """A (u, u_t) snapshot at one time."""

    time: float
    u: RadialField
    v: RadialField

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time >= 0.0):
            raise PreconditionViolation(f"state time must be finite and >= 0, got {self.time}")
        if self.u.grid != self.v.grid:
            raise PreconditionViolation("u and v must share one grid")

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered wave states sampled at a fixed stride."""

    problem: ProblemSpec
    states: tuple
    dt_sample: float

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise PreconditionViolation("trajectory must contain at least one state")
        times = np.array([s.time for s in states])
        gaps = np.diff(times)
        if np.any(gaps <= 0.0):
            raise PreconditionViolation("trajectory times must be strictly increasing")
        if gaps.size:
            if not (math.isfinite(self.dt_sample) and self.dt_sample > 0.0):
                raise PreconditionViolation("dt_sample must be positive")
            if np.any(np.abs(gaps - self.dt_sample) > 1e-12 * max(1.0, self.dt_sample)):
                raise PreconditionViolation("trajectory gaps must equal dt_sample")
        grid = states[0].grid
        for s in states:
            if s.grid != grid:
                raise PreconditionViolation("all states must share one grid")
        object.__setattr__(self, "states", states)

    @property
    def grid(self) -> RadialGrid:
        return self.states[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    @property
    def t_end(self) -> float:
        return self.states[-1].time


def trajectory_difference(a: Trajectory, b: Trajectory) -> Trajectory:
    """Statewise a - b; trajectories must share grid and sample times."""
    if len(a.states) != len(b.states):
        raise PreconditionViolation("trajectories have different lengths")
    if a.grid != b.grid:
        raise PreconditionViolation("trajectories live on different grids")
    states = []
    for sa, sb in zip(a.states, b.states):
        if abs(sa.time - sb.time) > 1e-9 * max(1.0, sa.time):
            raise PreconditionViolation("trajectories have different sample times")
        states.append(
            WaveState(
                time=sa.time,
                u=RadialField(a.grid, sa.u.values - sb.u.values),
                v=RadialField(a.grid, sa.v.values - sb.v.values),
            )
        )
    return Trajectory(problem=a.problem, states=tuple(states), dt_sample=a.dt_sample)


@dataclass(frozen=True)
class WeightParams:
    """One concrete choice of local-energy weights and horizon."""

    delta: float
    delta_prime: float
    horizon: float

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise PreconditionViolation(f"delta must lie in (0, 1/2), got {self.delta}")
        if not self.delta_prime < self.delta:
            raise PreconditionViolation(
                f"delta_prime must be < delta, got {self.delta_prime} >= {self.delta}"
            )
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise PreconditionViolation(f"horizon must be positive, got {self.horizon}")


@dataclass(frozen=True)
class WeightChoice:
    """Regime-resolved weight exponents; `governing` names the dominant term."""

    delta: float
    delta_prime: float
    regime: str
    governing: str


def weight_exponents(regime: str, spec: ProblemSpec, s1: float = None, s2: float = None) -> WeightChoice:
    """Weight exponents for the three lifespan regimes.

    supercritical: requires 1/2 <= s1 < n/2 - 1/(p-1) < s2 <= 1.
    critical: p must equal the threshold power; s2 in (1/2, 1] (s1 is pinned
    to 1/2); the log-weighted term governs and delta_prime = delta is reported.
    subcritical: requires p below the threshold power; s1, s2 are ignored.
    """
    n, p = spec.n_dim, spec.p
    p_c = spec.p_critical
    if regime == "supercritical":
        if s1 is None or s2 is None:
            raise PreconditionViolation("supercritical regime needs s1 and s2")
        pivot = n / 2.0 - 1.0 / (p - 1.0)
        if not (0.5 <= s1 < pivot < s2 <= 1.0):
            raise PreconditionViolation(
                f"(s1, s2)=({s1}, {s2}) violates 1/2 <= s1 < {pivot:.6g} < s2 <= 1"
            )
        delta = (n - 2.0 * s2) * (p - 1.0) / 4.0
        delta_prime = (1.0 - (s2 - s1) * (p - 1.0)) / 2.0
        governing = "deriv"
    elif regime == "critical":
        if abs(p - p_c) > 1e-9:
            raise PreconditionViolation(f"critical regime needs p = {p_c:.6g}, got {p}")
        s = 1.0 if s2 is None else s2
        if not (0.5 < s <= 1.0):
            raise PreconditionViolation(f"critical regime needs s in (1/2, 1], got {s}")
        delta = (n - 2.0 * s) * (p - 1.0) / 4.0
        delta_prime = delta
        governing = "log"
    elif regime == "subcritical":
        if not p < p_c - 1e-12:
            raise PreconditionViolation(f"subcritical regime needs p < {p_c:.6g}, got {p}")
        if p < 1.0 + 1.0 / (n - 1):
            delta = (n - 1) * (p - 1.0) / 2.0
        else:
            delta = (n - 1) * (p - 1.0) / 4.0
        delta_prime = 0.0
        governing = "horizon"
    else:
        raise PreconditionViolation(f"unknown regime {regime!r}")

    if not (0.0 < delta < 0.5):
        raise PreconditionViolation(f"derived delta {delta:.6g} escapes (0, 1/2)")
    if regime == "supercritical" and not delta_prime < delta:
        raise PreconditionViolation("derived delta_prime >= delta")
    return WeightChoice(delta=delta, delta_prime=delta_prime, regime=regime, governing=governing)


# ---------------------------------------------------------------------------
# discrete radial calculus
# ---------------------------------------------------------------------------

def _derivative_values(values: np.ndarray, dr: float) -> np.ndarray:
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dr)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dr)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dr)
    return out


def _laplacian_values(values: np.ndarray, r: np.ndarray, dr: float, n: int) -> np.ndarray:
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dr**2 + (
        (n - 1) / r[1:-1]
    ) * (values[2:] - values[:-2]) / (2.0 * dr)
    # r = 0: symmetric extension gives lap f(0) = n f''(0)
    out[0] = 2.0 * n * (values[1] - values[0]) / dr**2
    out[-1] = (
        2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]
    ) / dr**2 + ((n - 1) / r[-1]) * (
        3.0 * values[-1] - 4.0 * values[-2] + values[-3]
    ) / (2.0 * dr)
    return out


def radial_derivative(f: RadialField) -> RadialField:
    """Second-order d/dr: centered inside, one-sided at both ends."""
    _require_finite(f.values, "radial field")
    return RadialField(f.grid, _derivative_values(f.values, f.grid.spacing))


def radial_laplacian(f: RadialField, n: int) -> RadialField:
    """Radial Laplacian f'' + (n-1)/r f', with the n f''(0) origin limit."""
    if n < 2:
        raise PreconditionViolation(f"dimension must be >= 2, got {n}")
    _require_finite(f.values, "radial field")
    return RadialField(f.grid, _laplacian_values(f.values, f.grid.nodes, f.grid.spacing, n))


# ---------------------------------------------------------------------------
# weighted quadrature
# ---------------------------------------------------------------------------

def _power_cell(dr: float, m: float) -> float:
    # int_0^dr r^m dr for m > -1
    if m <= -1.0:
        raise NonIntegrable(f"radial power r^{m:.4g} is not integrable at the origin")
    return dr ** (m + 1.0) / (m + 1.0)


def _weighted_square_integral(values, grid, n, mu, nu, inv_r_coeff=0.0):
    """A_{n-1} * int_0^rmax r^(2mu) <r>^(2nu) f(r)^2 r^(n-1) dr.

    values[0] holds the regular part of f at the origin; a nonzero
    inv_r_coeff alpha declares f ~ alpha/r + regular there.  Composite
    trapezoid everywhere, except that the first cell is integrated against
    the exact power weight whenever the integrand is unbounded at r = 0.
    """
    r = grid.nodes
    dr = grid.spacing
    q = 2.0 * mu + (n - 1)
    if q <= -1.0:
        raise NonIntegrable(f"weight exponent 2mu + n - 1 = {q:.4g} <= -1")

    tail = r[1:]
    g = tail**q * (1.0 + tail**2) ** nu * np.asarray(values)[1:] ** 2
    total = dr * (0.5 * g[0] + g[1:-1].sum() + 0.5 * g[-1])

    if inv_r_coeff != 0.0:
        # f ~ alpha/r + beta on the first cell, beta matched at the first node
        alpha = inv_r_coeff
        beta = values[1] - alpha / dr
        first = (
            alpha**2 * _power_cell(dr, q - 2.0)
            + 2.0 * alpha * beta * _power_cell(dr, q - 1.0)
            + beta**2 * _power_cell(dr, q)
        )
    elif q < -1e-12:
        # integrand unbounded at r = 0: integrate a linear field model exactly
        c0 = values[0]
        c1 = (values[1] - values[0]) / dr
        first = (
            c0**2 * _power_cell(dr, q)
            + 2.0 * c0 * c1 * _power_cell(dr, q + 1.0)
            + c1**2 * _power_cell(dr, q + 2.0)
        )
    elif abs(q) <= 1e-12:
        # finite limiting integrand f(0)^2 at the origin
        first = 0.5 * dr * (values[0] ** 2 + g[0])
    else:
        # limiting integrand 0 at the origin
        first = 0.5 * dr * g[0]

    return sphere_area(n) * (total + first)


def weighted_l2(f: RadialField, n: int, mu: float, nu: float) -> float:
    """|| r^mu <r>^nu f ||_{L^2(R^n)} by weight-aware composite trapezoid."""
    if mu <= -n / 2.0:
        raise PreconditionViolation(f"mu must exceed -n/2 = {-n / 2.0}, got {mu}")
    _require_finite(f.values, "radial field")
    return math.sqrt(_weighted_square_integral(f.values, f.grid, n, mu, nu))


def weighted_sup(f: RadialField, n: int, power: float) -> float:
    """A_{n-1}^{1/2} * max_{j>=1} r_j^power |f(r_j)|."""
    _require_finite(f.values, "radial field")
    r = f.grid.nodes[1:]
    return math.sqrt(sphere_area(n)) * float(np.max(r**power * np.abs(f.values[1:])))


def sup_trace_norm(f: RadialField, n: int, s: float) -> float:
    """|| r^{n/2-s} f ||_{L_r^inf L_omega^2} for radial f."""
    return weighted_sup(f, n, n / 2.0 - s)


# ---------------------------------------------------------------------------
# data and energy norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaNorms:
    lambda1: float
    lambda2: float
    parts: dict = field(default_factory=dict)


def lambda_norms(u0: RadialField, u1: RadialField, n: int) -> LambdaNorms:
    """Homogeneous data sizes: grad/time pieces at first and second order."""
    du0 = weighted_l2(radial_derivative(u0), n, 0.0, 0.0)
    n_u1 = weighted_l2(u1, n, 0.0, 0.0)
    lap_u0 = weighted_l2(radial_laplacian(u0, n), n, 0.0, 0.0)
    du1 = weighted_l2(radial_derivative(u1), n, 0.0, 0.0)
    return LambdaNorms(
        lambda1=du0 + n_u1,
        lambda2=lap_u0 + du1,
        parts={"grad_u0": du0, "u1": n_u1, "lap_u0": lap_u0, "grad_u1": du1},
    )


@dataclass(frozen=True)
class EnergyNorms:
    e1: float
    e2: float


def _state_slopes(state: WaveState, n: int):
    dr = state.grid.spacing
    du = _derivative_values(state.u.values, dr)
    dv = _derivative_values(state.v.values, dr)
    lap = _laplacian_values(state.u.values, state.grid.nodes, dr, n)
    return du, dv, lap


def e_norms(traj: Trajectory, t_max: float = None) -> EnergyNorms:
    """Sup-in-time energy norms of first and second order."""
    n = traj.problem.n_dim
    e1 = 0.0
    e2 = 0.0
    for state in traj.states:
        if t_max is not None and state.time > t_max + 1e-9 * max(1.0, t_max):
            break
        du, dv, lap = _state_slopes(state, n)
        grid = state.grid
        a1 = _weighted_square_integral(state.v.values, grid, n, 0.0, 0.0)
        b1 = _weighted_square_integral(du, grid, n, 0.0, 0.0)
        a2 = _weighted_square_integral(dv, grid, n, 0.0, 0.0)
        b2 = _weighted_square_integral(lap, grid, n, 0.0, 0.0)
        e1 = max(e1, math.sqrt(a1 + b1))
        e2 = max(e2, math.sqrt(a2 + b2))
    return EnergyNorms(e1=e1, e2=e2)


# ---------------------------------------------------------------------------
# local energy norms
# ---------------------------------------------------------------------------

def _integrate_to_horizon(times: np.ndarray, series: np.ndarray, horizon: float) -> float:
    """Trapezoid of series(t) over [0, horizon], interpolating the last cell."""
    tol = 1e-9 * max(1.0, horizon)
    if times[-1] < horizon - tol:
        raise HorizonMismatch(
            f"trajectory ends at t={times[-1]:.6g} before horizon T={horizon:.6g}"
        )
    inside = times <= horizon + tol
    t_in = times[inside]
    y_in = series[inside]
    total = float(np.trapezoid(y_in, t_in))
    if t_in[-1] < horizon - tol:
        y_end = float(np.interp(horizon, times, series))
        total += 0.5 * (horizon - t_in[-1]) * (y_in[-1] + y_end)
    return total


@dataclass(frozen=True)
class LocalEnergyNorm:
    total: float
    components: dict


def le_norm(traj: Trajectory, w: WeightParams, second_order: bool = False) -> LocalEnergyNorm:
    """Local energy norm over [0, T]: weighted derivative term, weighted field
    term, log-in-T term and T-power term (only derivative terms when n <= 2).

    With second_order the norm is applied to the spatial gradient: time slot
    d_r v, gradient slot lap u, field slot d_r u.
    """
    n = traj.problem.n_dim
    d, dp, horizon = w.delta, w.delta_prime, w.horizon
    grid = traj.grid

    s_deriv, s_field, s_log, s_hor = [], [], [], []
    for state in traj.states:
        du, dv, lap = _state_slopes(state, n)
        if second_order:
            du_abs = np.sqrt(dv**2 + lap**2)
            u_abs = np.abs(du)
        else:
            du_abs = np.sqrt(state.v.values**2 + du**2)
            u_abs = np.abs(state.u.values)
        s_deriv.append(_weighted_square_integral(du_abs, grid, n, -d, -0.5 + dp))
        if n >= 3:
            alpha = u_abs[0]
            comp = du_abs.copy()
            comp[1:] += u_abs[1:] / grid.nodes[1:]
            s_field.append(_weighted_square_integral(u_abs, grid, n, -1.0 - d, -0.5 + dp))
            s_log.append(
                _weighted_square_integral(comp, grid, n, -d, -0.5 + d, inv_r_coeff=alpha)
            )
            s_hor.append(
                _weighted_square_integral(comp, grid, n, -d, 0.0, inv_r_coeff=alpha)
            )
        else:
            s_log.append(_weighted_square_integral(du_abs, grid, n, -d, -0.5 + d))
            s_hor.append(_weighted_square_integral(du_abs, grid, n, -d, 0.0))

    times = traj.times
    comps = {}
    comps["deriv"] = math.sqrt(_integrate_to_horizon(times, np.array(s_deriv), horizon))
    if n >= 3:
        comps["field"] = math.sqrt(_integrate_to_horizon(times, np.array(s_field), horizon))
    comps["log"] = (math.log(2.0 + horizon)) ** -0.5 * math.sqrt(
        _integrate_to_horizon(times, np.array(s_log), horizon)
    )
    comps["horizon"] = horizon ** (d - 0.5) * math.sqrt(
        _integrate_to_horizon(times, np.array(s_hor), horizon)
    )
    return LocalEnergyNorm(total=sum(comps.values()), components=comps)


@dataclass(frozen=True)
class NormReport:
    """Energy and local-energy norms of one trajectory."""

    e1: float
    e2: float
    le1: float
    le2: float
    components: dict

    def __post_init__(self):
        total = sum(self.components.values())
        if abs(total - self.le1) > 1e-12 * max(1.0, abs(self.le1)):
            raise PreconditionViolation("le1 must equal the sum of its components")


def norm_report(traj: Trajectory, w: WeightParams) -> NormReport:
    e = e_norms(traj, t_max=w.horizon)
    first = le_norm(traj, w)
    second = le_norm(traj, w, second_order=True)
    return NormReport(
        e1=e.e1, e2=e.e2, le1=first.total, le2=second.total, components=first.components
    )


def lestar_upper(forcing_traj: Trajectory, w: WeightParams) -> float:
    """Upper bound on the dual-space source norm: minimum over the three
    single-term decompositions of the forcing (held in the u slot)."""
    n = forcing_traj.problem.n_dim
    d, dp, horizon = w.delta, w.delta_prime, w.horizon
    grid = forcing_traj.grid

    s_a, s_b, s_c = [], [], []
    for state in forcing_traj.states:
        vals = np.abs(state.u.values)
        s_a.append(_weighted_square_integral(vals, grid, n, d, 0.5 - dp))
        s_b.append(_weighted_square_integral(vals, grid, n, d, 0.5 - d))
        s_c.append(_weighted_square_integral(vals, grid, n, d, 0.0))

    times = forcing_traj.times
    cand = (
        math.sqrt(_integrate_to_horizon(times, np.array(s_a), horizon)),
        math.sqrt(math.log(2.0 + horizon))
        * math.sqrt(_integrate_to_horizon(times, np.array(s_b), horizon)),
        horizon ** (0.5 - d)
        * math.sqrt(_integrate_to_horizon(times, np.array(s_c), horizon)),
    )
    return min(cand)
