"""Closed-loop sampled-data simulation with exact per-interval
integration, plus runtime monitoring of the quadratic decay the
synthesized bound promises.

All trajectories live on a uniform time grid of pitch grid_h. Sampling
instants, the horizon, and the output pitch must all be whole numbers
of grid steps, so every time in the result is an exact grid multiple
and repeated runs are bit-identical.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import IncompleteTrace, InvalidSchedule
from .graph import SwitchingSignal, build_H, signal_mode
from .numerics import config, kernels
from .numerics.linalg import _as_matrix, _square, expm, kron
from .synthesis import SynthesisResult

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator with a fixed, documented update.

    State advance adds 0x9E3779B97F4A7C15; output mixing is
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
    z *= 0x94D049BB133111EB; z ^= z >> 31, all modulo 2^64.
    Pure integer arithmetic, so identical seeds give identical streams
    on every platform and in every language that pins these constants.
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self._state = int(seed) & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + self.GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] by modular reduction."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Shared agent dynamics: followers x' = A x + B u, leader x' = A x."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        a = _square(self.A, "A")
        b = _as_matrix(self.B, "B")
        if b.shape[0] != a.shape[0]:
            raise ValueError(
                f"B must have {a.shape[0]} rows, got {b.shape[0]}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class SamplingSchedule:
    """Strictly increasing sampling instants on the grid lattice.

    instants[0] is 0.0 and the final instant is at or beyond the
    horizon, so the instants tile [0, horizon]. Gaps lie in
    [T_low, T_high] and every instant is a whole number of grid steps.
    """

    instants: np.ndarray
    T_low: float
    T_high: float
    grid_h: float
    seed: int
    horizon: float

    def __post_init__(self):
        a = np.array(self.instants, dtype=float)
        a.flags.writeable = False
        object.__setattr__(self, "instants", a)


def _grid_ticks(value: float, grid_h: float, what: str) -> int:
    """Snap a time to its grid step count, rejecting off-grid values."""
    k = int(round(value / grid_h))
    if abs(k * grid_h - value) > config.GRID_DIV_TOL * max(1.0, abs(value)):
        raise InvalidSchedule(
            f"{what} = {value} is not a whole number of grid steps "
            f"(grid_h = {grid_h})")
    return k


def gen_schedule(T_low: float, T_high: float, grid_h: float, horizon: float,
                 seed: int) -> SamplingSchedule:
    """Draw a deterministic aperiodic schedule covering the horizon.

    Each gap is l * grid_h with l drawn uniformly from
    {T_low/grid_h, ..., T_high/grid_h} by SplitMix64(seed). The same
    arguments always reproduce the same instants bit for bit.
    """
    if not grid_h > 0.0:
        raise InvalidSchedule(f"grid_h must be positive, got {grid_h}")
    if not T_low > 0.0:
        raise InvalidSchedule(f"T_low must be positive, got {T_low}")
    if T_low > T_high:
        raise InvalidSchedule(
            f"T_low = {T_low} exceeds T_high = {T_high}")
    if not horizon > 0.0:
        raise InvalidSchedule(f"horizon must be positive, got {horizon}")
    lo = _grid_ticks(T_low, grid_h, "T_low")
    hi = _grid_ticks(T_high, grid_h, "T_high")
    rng = SplitMix64(seed)
    ticks = [0]
    while ticks[-1] * grid_h < horizon:
        ticks.append(ticks[-1] + rng.randint(lo, hi))
    instants = np.array(ticks, dtype=float) * grid_h
    return SamplingSchedule(instants=instants, T_low=float(T_low),
                            T_high=float(T_high), grid_h=float(grid_h),
                            seed=int(seed) & MASK64, horizon=float(horizon))


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Dense closed-loop trajectories plus the sampling record.

    times are the selected output instants; leader, followers, and
    errors are the states there, with errors[k, i] = followers[k, i]
    - leader[k] identically. u_held has one row per simulated
    interval (the input is constant on each). instants and modes list
    the sampling instants that occurred within the horizon and the
    graph mode active on each interval; boundary_idx maps each such
    instant to its row in times. n_complete counts the intervals whose
    right endpoint also lies within the horizon.
    """

    times: np.ndarray
    leader: np.ndarray
    followers: np.ndarray
    errors: np.ndarray
    u_held: np.ndarray
    instants: np.ndarray
    modes: np.ndarray
    boundary_idx: np.ndarray
    n_complete: int
    schedule: SamplingSchedule


def simulate(model: SystemModel, topologies, signal: SwitchingSignal, K,
             schedule: SamplingSchedule, x0_leader, x0_followers,
             output_dt: float | None = None, pure: bool = False) -> SimulationResult:
    """Integrate the sampled closed loop exactly over the schedule.

    On each interval the active graph is the one the switching signal
    selects at the interval's opening instant, the input is the error
    feedback frozen there, and the error state advances through the
    exact transition of the held-input linear dynamics, one grid step
    at a time. The leader advances through its own exact one-step
    transition. Outputs are taken at every multiple of output_dt
    (default grid_h), at every sampling instant, and at the horizon.
    pure=True forces the plain array path even when the compiled
    kernels are available.
    """
    topologies = list(topologies)
    if len(topologies) != signal.mode_count:
        raise ValueError(
            f"signal selects among {signal.mode_count} modes but "
            f"{len(topologies)} topologies were given")
    N = topologies[0].N
    for t in topologies:
        if t.N != N:
            raise ValueError("all topologies must share one follower count")
    n, m = model.n, model.m
    Km = _as_matrix(K, "K")
    if Km.shape != (m, n):
        raise ValueError(f"K must be {m}x{n}, got {Km.shape[0]}x{Km.shape[1]}")
    lead0 = np.asarray(x0_leader, dtype=float).reshape(-1)
    if lead0.shape[0] != n:
        raise ValueError(f"x0_leader must have {n} entries")
    foll0 = np.asarray(x0_followers, dtype=float)
    if foll0.shape != (N, n):
        raise ValueError(f"x0_followers must be {N}x{n}, got {foll0.shape}")

    grid_h = schedule.grid_h
    hor = _grid_ticks(schedule.horizon, grid_h, "horizon")
    out_dt = grid_h if output_dt is None else float(output_dt)
    if not out_dt > 0.0:
        raise InvalidSchedule(f"output_dt must be positive, got {out_dt}")
    stride = _grid_ticks(out_dt, grid_h, "output_dt")
    if stride < 1:
        raise InvalidSchedule(f"output_dt = {out_dt} is below the grid pitch")

    ticks = [_grid_ticks(t, grid_h, "sampling instant")
             for t in schedule.instants]
    if not ticks or ticks[0] != 0:
        raise InvalidSchedule("schedule must start at t = 0")
    for a, b in zip(ticks, ticks[1:]):
        if b <= a:
            raise InvalidSchedule("sampling instants must strictly increase")
    if ticks[-1] < hor:
        raise InvalidSchedule(
            f"schedule ends at {ticks[-1] * grid_h} but the horizon is "
            f"{schedule.horizon}")

    # intervals that open inside the window, truncated at the horizon
    mode_list = []
    step_list = []
    s_used = 0
    for s in range(len(ticks) - 1):
        if ticks[s] >= hor:
            break
        end = min(ticks[s + 1], hor)
        mode_list.append(signal_mode(signal, float(schedule.instants[s])))
        step_list.append(end - ticks[s])
        s_used = s + 1
    n_complete = sum(1 for s in range(s_used) if ticks[s + 1] <= hor)
    used_ticks = [t for t in ticks if t <= hor]

    d = N * n
    Hs = [build_H(t).H for t in topologies]
    Fs = np.empty((len(Hs), d, d))
    Gs = np.empty((len(Hs), d, d))
    I_N = np.eye(N)
    for p, H in enumerate(Hs):
        top = np.hstack([kron(I_N, model.A), -kron(H, model.B @ Km)])
        M = np.vstack([top, np.zeros((d, 2 * d))])
        E = expm(M, grid_h)
        Fs[p] = E[:d, :d]
        Gs[p] = E[:d, d:]

    xbar0 = (foll0 - lead0[None, :]).reshape(-1)
    mode_idx = np.array(mode_list, dtype=np.int64)
    steps = np.array(step_list, dtype=np.int64)
    prop_grid = kernels.propagate_grid_py if pure else kernels.propagate_grid
    prop_lin = kernels.propagate_linear_py if pure else kernels.propagate_linear
    err_trace = prop_grid(Fs, Gs, mode_idx, steps, xbar0)
    lead_trace = prop_lin(expm(model.A, grid_h), lead0, hor)

    out_ticks = sorted(set(range(0, hor + 1, stride)) | {hor} | set(used_ticks))
    out_ticks = np.array(out_ticks, dtype=np.int64)
    times = out_ticks.astype(float) * grid_h
    errors = err_trace[out_ticks].reshape(-1, N, n)
    leader = lead_trace[out_ticks]
    followers = errors + leader[:, None, :]

    pos = {int(g): k for k, g in enumerate(out_ticks)}
    boundary_idx = np.array([pos[g] for g in used_ticks], dtype=np.int64)

    u_held = np.empty((len(mode_list), N, m))
    for s, p in enumerate(mode_list):
        xs = err_trace[ticks[s]]
        u_held[s] = (-(kron(Hs[p], Km) @ xs)).reshape(N, m)

    return SimulationResult(
        times=times, leader=leader, followers=followers, errors=errors,
        u_held=u_held, instants=np.array([g * grid_h for g in used_ticks]),
        modes=mode_idx, boundary_idx=boundary_idx, n_complete=n_complete,
        schedule=schedule)


def leader_trajectory(A, x0, times) -> np.ndarray:
    """Exact autonomous states e^(A t) x0 at each requested time."""
    a = _square(A, "A")
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != a.shape[0]:
        raise ValueError(f"x0 must have {a.shape[0]} entries")
    out = np.empty((len(times), a.shape[0]))
    for k, t in enumerate(times):
        out[k] = expm(a, float(t)) @ x
    return out


@dataclass(frozen=True, eq=False)
class ContractionReport:
    """Runtime check of the per-interval quadratic decay.

    V is x_err^T (D kron P) x_err at every output row and V_samples
    its values at the sampling instants. ratios[s] is
    V_samples[s+1] / V_samples[s] for each complete interval, NaN when
    V_samples[s] = 0 (vacuously passing). interval_violations counts
    intervals whose interior dense maximum exceeded the opening value
    beyond the allowed slack, and worst_interval_slack is the largest
    relative excess seen (negative when V strictly decayed inside
    every interval).

    rho evaluates (1 - beta2/beta1) e^(-beta1 T_low) + beta2/beta1
    with beta1 = c1 and beta2 = c2 * T_high^2, the decay factor the
    synthesis guarantees when every gap is at most T_high. When
    T_high is too large for that bound (beta2 >= beta1, so the formula
    no longer certifies decay), bound_feasible is False and the
    applied rho_threshold falls back to 1.0, which still detects
    growth at the samples.
    """

    V: np.ndarray
    V_samples: np.ndarray
    ratios: np.ndarray
    interval_violations: int
    worst_interval_slack: float
    rho: float
    bound_feasible: bool
    rho_threshold: float

    @property
    def worst_ratio(self) -> float:
        finite = self.ratios[np.isfinite(self.ratios)]
        return float(np.max(finite)) if finite.size else 0.0

    @property
    def ratios_ok(self) -> bool:
        finite = self.ratios[np.isfinite(self.ratios)]
        bound = self.rho_threshold * (1.0 + config.RATIO_REL_SLACK)
        return bool(np.all(finite <= bound))

    @property
    def passed(self) -> bool:
        return self.interval_violations == 0 and self.ratios_ok


def lyapunov_trace(result: SimulationResult, D, P,
                   synth: SynthesisResult) -> ContractionReport:
    """Evaluate the quadratic certificate along a simulated run.

    Checks two properties the synthesized bound implies when every
    gap is at most T_high: inside each interval the dense values of V
    never exceed V at the interval's opening instant (slack
    INTERVAL_SLACK), and across each complete interval V contracts by
    at least the factor rho (see ContractionReport). The monitor is
    observational: violations are reported, never raised.
    """
    d_vec = np.asarray(D, dtype=float)
    if d_vec.ndim == 2:
        d_vec = np.diag(d_vec)
    d_vec = d_vec.reshape(-1)
    N = result.errors.shape[1]
    n = result.errors.shape[2]
    if d_vec.shape[0] != N:
        raise ValueError(f"D must have {N} entries, got {d_vec.shape[0]}")
    Pm = _square(P, "P")
    if Pm.shape[0] != n:
        raise ValueError(f"P must be {n}x{n}")

    bidx = np.asarray(result.boundary_idx, dtype=np.int64)
    if bidx.shape[0] != result.instants.shape[0]:
        raise IncompleteTrace(
            "boundary index does not cover every sampling instant")
    if bidx.size > 1 and np.any(np.diff(bidx) <= 0):
        raise IncompleteTrace("boundary indices must strictly increase")
    for k, idx in enumerate(bidx):
        if idx < 0 or idx >= result.times.shape[0] or \
                abs(result.times[idx] - result.instants[k]) > 1e-9:
            raise IncompleteTrace(
                f"sampling instant {result.instants[k]} is missing from "
                f"the dense output times")

    W = kron(np.diag(d_vec), Pm)
    flat = result.errors.reshape(result.errors.shape[0], N * n)
    V = np.einsum("ki,ij,kj->k", flat, W, flat)
    V_samples = V[bidx]

    violations = 0
    worst = -math.inf
    for s in range(bidx.shape[0]):
        lo = int(bidx[s])
        hi = int(bidx[s + 1]) if s + 1 < bidx.shape[0] else V.shape[0]
        seg_max = float(np.max(V[lo:hi]))
        Vs = float(V[lo])
        if Vs > 0.0:
            excess = (seg_max - Vs) / Vs
        else:
            excess = math.inf if seg_max > 0.0 else 0.0
        worst = max(worst, excess)
        if excess > config.INTERVAL_SLACK:
            violations += 1
    if not math.isfinite(worst) and worst < 0:
        worst = 0.0

    ratios = np.full(result.n_complete, math.nan)
    for s in range(result.n_complete):
        V0 = float(V_samples[s])
        if V0 > 0.0:
            ratios[s] = float(V_samples[s + 1]) / V0

    beta1 = synth.c1
    beta2 = synth.c2 * result.schedule.T_high ** 2
    h = result.schedule.T_low
    r = beta2 / beta1
    rho = (1.0 - r) * math.exp(-beta1 * h) + r
    feasible = beta2 < beta1
    threshold = rho if feasible else 1.0
    return ContractionReport(
        V=V, V_samples=V_samples, ratios=ratios,
        interval_violations=violations, worst_interval_slack=worst,
        rho=float(rho), bound_feasible=feasible,
        rho_threshold=float(threshold))


def _fmt(x: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


def write_trajectory_csv(path, result: SimulationResult, V=None) -> None:
    """One row per output time: leader state, every follower state,
    per-follower error norms, and the monitored quadratic V (NaN when
    no certificate was available)."""
    n_out, N, n = result.followers.shape
    cols = ["t"]
    cols += [f"x0_{j}" for j in range(1, n + 1)]
    for i in range(1, N + 1):
        cols += [f"x{i}_{j}" for j in range(1, n + 1)]
    cols += [f"err_norm_{i}" for i in range(1, N + 1)]
    cols.append("V")
    vcol = np.full(n_out, math.nan) if V is None else np.asarray(V, dtype=float)
    norms = np.linalg.norm(result.errors, axis=2)
    with open(path, "w", newline="\n") as f:
        f.write(",".join(cols) + "\n")
        for k in range(n_out):
            row = [_fmt(result.times[k])]
            row += [_fmt(v) for v in result.leader[k]]
            for i in range(N):
                row += [_fmt(v) for v in result.followers[k, i]]
            row += [_fmt(v) for v in norms[k]]
            row.append(_fmt(vcol[k]))
            f.write(",".join(row) + "\n")


def write_schedule_csv(path, result: SimulationResult) -> None:
    """One row per simulated interval: index, opening instant,
    scheduled gap, and the graph mode in force."""
    sched = result.schedule.instants
    with open(path, "w", newline="\n") as f:
        f.write("s,t_s,T_s,mode\n")
        for s in range(result.modes.shape[0]):
            f.write(",".join([
                str(s), _fmt(sched[s]), _fmt(sched[s + 1] - sched[s]),
                str(int(result.modes[s]))]) + "\n")
