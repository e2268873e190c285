"""Yule process with rare mutations, simulated as an embedded jump chain.

The clone (ancestral) population and the pooled mutant mass are tracked as a
triple ``(z0, z_mut, mutations)``.  All mutant sub-populations share the same
per-unit dynamics, so their sum is all that size-based statistics need.

Masses are kept exactly as integer pairs ``ones + a_units * a``.  For b-ary
systems ``a_units`` is always zero; for scale-free systems it lets the
coupling identities be checked without floating-point drift.

Draw order per transition (shared by :func:`step` and the compiled kernel,
so both produce bit-identical trajectories from the same generator):

1. continuous-time mode only: holding time ``-log(1 - U) / total``;
2. ``U`` selects the acting population (clone iff ``U * total < z0``);
3. clone acts: ``U < p`` is a clonal birth, otherwise a mutation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Union

import numpy as np
from numba import njit
from scipy.integrate import cumulative_trapezoid

from .errors import InvariantViolation, ParameterError
from .models import BAry, Family, ScaleFree, p_of
from . import seeding

_NO_CAP = 2**62

RULE_STEPS = 0
RULE_ANCESTRAL = 1
RULE_TIME = 2


class Mass(NamedTuple):
    """Exact mass ``ones + a_units * a``."""

    ones: int
    a_units: int = 0

    def value(self, a: float) -> float:
        return self.ones + self.a_units * a


class _Moves(NamedTuple):
    birth: Mass
    clone_on_mutation: Mass
    new_mutant: Mass
    start: Mass
    a: float


def _moves(family: Family) -> _Moves:
    if isinstance(family, BAry):
        b = family.b
        return _Moves(Mass(b - 1), Mass(-1), Mass(b), Mass(b), 0.0)
    if isinstance(family, ScaleFree):
        # A mutation leaves a half-edge (+1) on the clone side and starts a
        # mutant of mass 1 + a; total jump stays 2 + a.
        return _Moves(Mass(2, 1), Mass(1, 0), Mass(1, 1), Mass(2, 2), family.a)
    raise ParameterError(f"unsupported branching family {family!r}")


@dataclass(frozen=True)
class BranchingParams:
    family: Family
    n: int
    p: float
    c: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.family, (BAry, ScaleFree)):
            raise ParameterError(f"unsupported branching family {self.family!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be an integer >= 1, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (0.0 < self.p <= 1.0):
            raise ParameterError(f"p must lie in (0, 1], got {self.p!r}")

    @classmethod
    def from_c(cls, family: Family, c: float, n: int) -> "BranchingParams":
        """Parameters with ``p = 1 - c / ln n``."""
        return cls(family, n, p_of(c, n), float(c))

    @classmethod
    def with_p(cls, family: Family, p: float, n: int = 1) -> "BranchingParams":
        """Bypass ``p_of``; used by diagnostics such as the p = 1 cases."""
        return cls(family, n, float(p), None)

    @property
    def shape(self) -> float:
        """beta = b/(b-1) for b-ary systems, alpha = (1+a)/(2+a) for scale-free."""
        if isinstance(self.family, BAry):
            return self.family.beta
        return self.family.alpha

    def total_for_size(self, n: Optional[int] = None) -> float:
        """Total mass once the coupled tree has size ``n`` (default ``self.n``)."""
        n = self.n if n is None else n
        if isinstance(self.family, BAry):
            return float((self.family.b - 1) * n + 1)
        a = self.family.a
        return (2.0 + a) * n + a


@dataclass(frozen=True)
class BranchingState:
    z0_mass: Mass
    zmut_mass: Mass
    mutations: int = 0
    steps: int = 0
    time: Optional[float] = None
    a: float = 0.0

    @property
    def z0(self) -> float:
        return self.z0_mass.value(self.a)

    @property
    def z_mut(self) -> float:
        return self.zmut_mass.value(self.a)

    @property
    def total(self) -> float:
        return self.z0 + self.z_mut


@dataclass(frozen=True)
class TotalReaches:
    target: float


@dataclass(frozen=True)
class AncestralReaches:
    target: float


@dataclass(frozen=True)
class TimeReaches:
    """Stop at a fixed continuous time (state just before the next jump)."""

    t: float


StopRule = Union[TotalReaches, AncestralReaches, TimeReaches]


class StopReason(str, Enum):
    RULE_MET = "rule_met"
    ANCESTRAL_EXTINCT = "ancestral_extinct"


@dataclass(frozen=True)
class BranchingOutcome:
    final: BranchingState
    stopped_by: StopReason
    derived_cluster: Optional[int] = None


class Mode(str, Enum):
    JUMP = "jump"
    CONTINUOUS = "continuous"


def initial_state(
    params: BranchingParams,
    rng: Optional[np.random.Generator] = None,
    seed_edge: str = "percolate",
    continuous: bool = False,
) -> BranchingState:
    """Starting state of the branching system.

    b-ary: ``(z0=b, z_mut=0)``.  Scale-free with ``seed_edge="intact"``:
    ``(z0=2+2a, z_mut=0)``.  With ``seed_edge="percolate"`` the seed edge
    {0, 1} of the coupled tree is itself percolated: one uniform is drawn and,
    if the edge is cut, the system starts from ``(1+a, 1+a, mutations=1)``.
    That keeps the coupled root cluster equal in law to the directly
    percolated tree.
    """
    mv = _moves(params.family)
    time = 0.0 if continuous else None
    start = BranchingState(mv.start, Mass(0, 0), 0, 0, time, mv.a)
    if isinstance(params.family, ScaleFree):
        if seed_edge not in ("percolate", "intact"):
            raise ParameterError(f"seed_edge must be 'percolate' or 'intact', got {seed_edge!r}")
        if seed_edge == "percolate":
            if rng is None:
                raise ParameterError("seed_edge='percolate' needs a random source")
            if not rng.random() < params.p:
                return BranchingState(Mass(1, 1), Mass(1, 1), 1, 0, time, mv.a)
    return start


def step(
    state: BranchingState,
    params: BranchingParams,
    rng: np.random.Generator,
    continuous: bool = False,
) -> BranchingState:
    """One embedded-jump transition (reference implementation)."""
    mv = _moves(params.family)
    a = mv.a
    z0 = state.z0_mass.ones + state.z0_mass.a_units * a
    tot = z0 + state.zmut_mass.ones + state.zmut_mass.a_units * a
    if not tot > 0:
        raise InvariantViolation("step called on an empty population")
    time = state.time
    if continuous:
        time = (0.0 if time is None else time) + (-math.log(1.0 - rng.random()) / tot)
    x0, y0 = state.z0_mass
    xm, ym = state.zmut_mass
    muts = state.mutations
    if rng.random() * tot < z0:
        if rng.random() < params.p:
            x0, y0 = x0 + mv.birth.ones, y0 + mv.birth.a_units
        else:
            x0, y0 = x0 + mv.clone_on_mutation.ones, y0 + mv.clone_on_mutation.a_units
            xm, ym = xm + mv.new_mutant.ones, ym + mv.new_mutant.a_units
            muts += 1
    else:
        xm, ym = xm + mv.birth.ones, ym + mv.birth.a_units
    return BranchingState(Mass(x0, y0), Mass(xm, ym), muts, state.steps + 1, time, a)


@njit(nogil=True, cache=True)
def _evolve(x0, y0, xm, ym, muts, steps, time,
            bx, by, cx, cy, nx, ny, a, p,
            rule, k_steps, target, t_end, continuous, max_steps, rng):
    # status: 0 rule met, 1 clone population extinct, 2 step cap reached
    status = 0
    tol = 1e-9 * max(1.0, abs(target))
    done = 0
    while True:
        z0 = x0 + y0 * a
        if rule == RULE_STEPS:
            if done >= k_steps:
                break
        elif rule == RULE_ANCESTRAL:
            if z0 >= target - tol:
                break
            if x0 == 0 and y0 == 0:
                status = 1
                break
        if done >= max_steps:
            status = 2
            break
        tot = z0 + xm + ym * a
        if continuous:
            dt = -np.log(1.0 - rng.random()) / tot
            if rule == RULE_TIME and time + dt > t_end:
                time = t_end
                break
            time += dt
        if rng.random() * tot < z0:
            if rng.random() < p:
                x0 += bx
                y0 += by
            else:
                x0 += cx
                y0 += cy
                xm += nx
                ym += ny
                muts += 1
        else:
            xm += bx
            ym += by
        steps += 1
        done += 1
    return x0, y0, xm, ym, muts, steps, time, status


def _steps_to_total(params: BranchingParams, start_total: float, target: float) -> int:
    jump = params.family.jump
    k = (target - start_total) / jump
    k_int = int(round(k))
    if k_int < 0 or abs(k - k_int) > 1e-9 * max(1.0, abs(k)):
        raise ParameterError(
            f"total mass {target} is not reachable from {start_total} by jumps of {jump}"
        )
    return k_int


def _advance(state: BranchingState, params: BranchingParams, rule: int, *,
             k_steps: int = 0, target: float = 0.0, t_end: float = 0.0,
             continuous: bool = False, max_steps: int = _NO_CAP,
             rng: np.random.Generator) -> tuple[BranchingState, int]:
    mv = _moves(params.family)
    time = 0.0 if state.time is None else state.time
    x0, y0, xm, ym, muts, steps, time, status = _evolve(
        state.z0_mass.ones, state.z0_mass.a_units,
        state.zmut_mass.ones, state.zmut_mass.a_units,
        state.mutations, state.steps, time,
        mv.birth.ones, mv.birth.a_units,
        mv.clone_on_mutation.ones, mv.clone_on_mutation.a_units,
        mv.new_mutant.ones, mv.new_mutant.a_units,
        mv.a, params.p, rule, k_steps, float(target), float(t_end),
        continuous, max_steps, rng,
    )
    out = BranchingState(Mass(int(x0), int(y0)), Mass(int(xm), int(ym)), int(muts), int(steps),
                         float(time) if continuous else None, mv.a)
    return out, int(status)


def run_until(
    params: BranchingParams,
    stop: StopRule,
    mode: Union[Mode, str] = Mode.JUMP,
    rng: Optional[np.random.Generator] = None,
    *,
    seed_edge: str = "percolate",
    initial: Optional[BranchingState] = None,
    max_steps: Optional[int] = None,
) -> BranchingOutcome:
    """Iterate transitions until ``stop`` holds.

    Under :class:`AncestralReaches` the clone population may die out first;
    that is reported as ``StopReason.ANCESTRAL_EXTINCT``, never raised.
    ``initial`` overrides the family's starting state (e.g. a single mutant
    founder for characteristic-function checks).
    """
    mode = Mode(mode)
    continuous = mode is Mode.CONTINUOUS
    if rng is None:
        raise ParameterError("run_until needs a random source")
    cap = _NO_CAP if max_steps is None else int(max_steps)

    if isinstance(stop, TimeReaches):
        if not continuous:
            raise ParameterError("TimeReaches needs mode='continuous'")
        if not stop.t >= 0:
            raise ParameterError("stop time must be >= 0")
    if isinstance(stop, AncestralReaches) and not stop.target > 0:
        raise ParameterError("ancestral target must be positive")

    if initial is None:
        # Validate the total target before drawing anything.
        if isinstance(stop, TotalReaches):
            mv = _moves(params.family)
            _steps_to_total(params, mv.start.value(mv.a), stop.target)
        state = initial_state(params, rng, seed_edge, continuous)
    else:
        state = replace(initial, time=(initial.time or 0.0) if continuous else None)

    if isinstance(stop, TotalReaches):
        k = _steps_to_total(params, state.total, stop.target)
        final, status = _advance(state, params, RULE_STEPS, k_steps=k,
                                 continuous=continuous, max_steps=cap, rng=rng)
    elif isinstance(stop, AncestralReaches):
        final, status = _advance(state, params, RULE_ANCESTRAL, target=stop.target,
                                 continuous=continuous, max_steps=cap, rng=rng)
    elif isinstance(stop, TimeReaches):
        final, status = _advance(state, params, RULE_TIME, t_end=stop.t,
                                 continuous=True, max_steps=cap, rng=rng)
    else:
        raise ParameterError(f"unknown stop rule {stop!r}")
    if status == 2:
        raise ParameterError(f"step cap {cap} reached before the stop rule held")
    reason = StopReason.ANCESTRAL_EXTINCT if status == 1 else StopReason.RULE_MET
    if initial is None:
        cluster = coupled_cluster(final, params.family)
    else:
        # custom starts (e.g. a lone mutant founder) need not come from a tree
        try:
            cluster = coupled_cluster(final, params.family)
        except InvariantViolation:
            cluster = None
    return BranchingOutcome(final, reason, cluster)


def coupled_cluster(state: BranchingState, family: Family) -> int:
    """Root-cluster size of the coupled tree for the current state.

    b-ary: ``(z0 - 1 + H0) / (b - 1)``; scale-free: ``(z0 - H0 + 2) / (2 + a)``,
    where ``H0`` (half-edges at the root cluster) equals the mutation count.
    """
    x0, y0 = state.z0_mass
    m = state.mutations
    if isinstance(family, BAry):
        num = x0 - 1 + m
        if y0 != 0 or num % (family.b - 1) != 0 or num < family.b - 1:
            raise InvariantViolation(f"b-ary coupling integrality broken: z0={x0}, M={m}")
        return num // (family.b - 1)
    # z0 = (2 + a) * cluster + H0 - 2, i.e. ones = 2 * cluster + H0 - 2 and a_units = cluster
    if x0 - m + 2 != 2 * y0 or y0 < 1:
        raise InvariantViolation(f"scale-free coupling integrality broken: z0=({x0},{y0}), M={m}")
    return y0


def cluster_from_coupling(outcome: BranchingOutcome, params: BranchingParams) -> int:
    """Root-cluster size C0 (b-ary) or Gamma_n (scale-free) at tree size ``params.n``."""
    if outcome.final.steps != params.n - 1:
        raise ParameterError(
            "outcome was not stopped at the total mass of tree size n "
            f"(steps={outcome.final.steps}, n={params.n})"
        )
    cluster = coupled_cluster(outcome.final, params.family)
    if not 1 <= cluster <= params.n + (0 if isinstance(params.family, BAry) else 1):
        raise InvariantViolation(f"cluster {cluster} outside [1, n]")
    return cluster


def check_state(state: BranchingState, family: Family) -> None:
    """Raise :class:`InvariantViolation` if a bookkeeping identity fails."""
    x0, y0 = state.z0_mass
    xm, ym = state.zmut_mass
    k = state.steps
    if isinstance(family, BAry):
        if y0 or ym:
            raise InvariantViolation("b-ary masses must have no a-units")
        if x0 + xm != family.b + (family.b - 1) * k:
            raise InvariantViolation("mass conservation")
    else:
        # both starts (intact / cut seed edge) carry 2 ones and 2 a-units
        if x0 + xm != 2 + 2 * k or y0 + ym != 2 + k:
            raise InvariantViolation("mass conservation")
    if x0 < 0 or xm < 0 or y0 < 0 or ym < 0:
        raise InvariantViolation("negative mass")
    if state.mutations > k + (1 if isinstance(family, ScaleFree) else 0):
        raise InvariantViolation("more mutations than transitions")
    if (xm or ym) and state.mutations < 1:
        raise InvariantViolation("mutant mass without a mutation")
    coupled_cluster(state, family)


class GermSample(NamedTuple):
    delta0: float
    delta: float
    extinct: bool


def germ_thresholds(params: BranchingParams) -> tuple[int, float]:
    """``(L, threshold)`` with ``L = floor(ln^4 n)``."""
    if params.n < 3:
        raise ParameterError("germ statistics need n >= 3")
    big_l = int(math.floor(math.log(params.n) ** 4))
    return big_l, params.total_for_size(big_l)


def germ_statistics(
    params: BranchingParams,
    rng: np.random.Generator,
    seed_edge: str = "percolate",
) -> GermSample:
    """Mutant mass when the total, then the clone population, first reach the germ threshold.

    ``delta`` is read when the total mass equals the threshold (an exact hit
    after ``L - 1`` transitions).  ``delta0`` is read the first time the clone
    mass is at or above the threshold; if the clones die out first the sample
    is flagged ``extinct`` and ``delta0`` holds the mutant mass at extinction.
    """
    big_l, threshold = germ_thresholds(params)
    state = initial_state(params, rng, seed_edge)
    k = _steps_to_total(params, state.total, threshold)
    at_total, _ = _advance(state, params, RULE_STEPS, k_steps=k, rng=rng)
    at_clone, status = _advance(at_total, params, RULE_ANCESTRAL, target=threshold, rng=rng)
    return GermSample(at_clone.z_mut, at_total.z_mut, status == 1)


# ---------------------------------------------------------------------------
# replica batches


@dataclass
class BranchingBatch:
    family: Family
    z0_ones: np.ndarray
    z0_as: np.ndarray
    zmut_ones: np.ndarray
    zmut_as: np.ndarray
    mutations: np.ndarray
    steps: np.ndarray
    time: np.ndarray
    extinct: np.ndarray
    cluster: np.ndarray  # -1 where the state has no coupled tree

    @property
    def a(self) -> float:
        return self.family.a if isinstance(self.family, ScaleFree) else 0.0

    @property
    def z0(self) -> np.ndarray:
        return self.z0_ones + self.z0_as * self.a

    @property
    def z_mut(self) -> np.ndarray:
        return self.zmut_ones + self.zmut_as * self.a

    def __len__(self) -> int:
        return len(self.steps)


def run_replicas(
    params: BranchingParams,
    stop: StopRule,
    reps: int,
    seed: int,
    mode: Union[Mode, str] = Mode.JUMP,
    threads: int = 1,
    seed_edge: str = "percolate",
    initial: Optional[BranchingState] = None,
) -> BranchingBatch:
    """``reps`` independent :func:`run_until` outcomes, replica ``r`` on stream BRANCH."""

    def one(rng):
        out = run_until(params, stop, mode, rng, seed_edge=seed_edge, initial=initial)
        f = out.final
        return (f.z0_mass.ones, f.z0_mass.a_units, f.zmut_mass.ones, f.zmut_mass.a_units,
                f.mutations, f.steps, np.nan if f.time is None else f.time,
                out.stopped_by is StopReason.ANCESTRAL_EXTINCT,
                -1 if out.derived_cluster is None else out.derived_cluster)

    rows = seeding.map_replicas(one, reps, seed, seeding.BRANCH, threads)
    cols = list(zip(*rows)) if rows else [()] * 9
    ints = [np.asarray(c, dtype=np.int64) for c in cols[:6]]
    return BranchingBatch(
        params.family, *ints,
        time=np.asarray(cols[6], dtype=float),
        extinct=np.asarray(cols[7], dtype=bool),
        cluster=np.asarray(cols[8], dtype=np.int64),
    )


def germ_replicas(params: BranchingParams, reps: int, seed: int, threads: int = 1,
                  seed_edge: str = "percolate") -> list[GermSample]:
    return seeding.map_replicas(lambda rng: germ_statistics(params, rng, seed_edge),
                                reps, seed, seeding.GERM, threads)


# ---------------------------------------------------------------------------
# filtered-Poisson representation of the mutant mass


def mutant_founder_cf(theta: float, s: float, family: Family) -> complex:
    """CF at time ``s`` of the progeny of one mutant founder."""
    from .limit_laws import yule_cf, yule_cf_scalefree

    if isinstance(family, BAry):
        return yule_cf(theta, s, family.b)
    return yule_cf_scalefree(theta, s, family.a)


def _cumulative_mutant_integral(theta: float, t: float, family: Family, points: int):
    s = np.linspace(0.0, t, points)
    g = np.array([mutant_founder_cf(theta, si, family) - 1.0 for si in s])
    cum = cumulative_trapezoid(g, s, initial=0.0)
    return np.ascontiguousarray(cum.real), np.ascontiguousarray(cum.imag), s[1] - s[0]


@njit(nogil=True, cache=True)
def _interp(grid, h, x):
    pos = x / h
    i = int(pos)
    if i >= grid.shape[0] - 1:
        return grid[grid.shape[0] - 1]
    if i < 0:
        return grid[0]
    f = pos - i
    return grid[i] * (1.0 - f) + grid[i + 1] * f


@njit(nogil=True, cache=True)
def _clone_path_exponent(x0, y0, bx, by, cx, cy, a, p, t, g_re, g_im, h, rng):
    # Integral of z0(r) * (phi_{t-r} - 1) over [0, t] along one clone-only path,
    # using the cumulative grid G(s) = int_0^s (phi_u - 1) du.
    r = 0.0
    acc_re = 0.0
    acc_im = 0.0
    while True:
        z0 = x0 + y0 * a
        if x0 == 0 and y0 == 0:
            break
        dt = -np.log(1.0 - rng.random()) / z0
        r_next = r + dt
        last = r_next >= t
        if last:
            r_next = t
        acc_re += z0 * (_interp(g_re, h, t - r) - _interp(g_re, h, t - r_next))
        acc_im += z0 * (_interp(g_im, h, t - r) - _interp(g_im, h, t - r_next))
        if last:
            break
        r = r_next
        if rng.random() < p:
            x0 += bx
            y0 += by
        else:
            x0 += cx
            y0 += cy
    return (1.0 - p) * acc_re, (1.0 - p) * acc_im


@njit(nogil=True, cache=True)
def _clone_path_mutation_log_cf(x0, y0, bx, by, cx, cy, a, p, t, theta, jump, shape, rng):
    # log prod_i phi_{t - r_i}(theta) over the mutation times r_i of one clone path
    r = 0.0
    acc = 0j
    y = np.exp(1j * theta * jump)
    while True:
        z0 = x0 + y0 * a
        if x0 == 0 and y0 == 0:
            break
        r += -np.log(1.0 - rng.random()) / z0
        if r >= t:
            break
        if rng.random() < p:
            x0 += bx
            y0 += by
        else:
            x0 += cx
            y0 += cy
            s = t - r
            d = 1.0 - y + y * np.exp(-jump * s)
            acc += shape * (1j * theta * jump - jump * s - np.log(d))
    return acc.real, acc.imag


class CFEstimate(NamedTuple):
    theta: float
    value: complex
    se_re: float
    se_im: float


def filtered_poisson_estimates(
    params: BranchingParams,
    t: float,
    thetas,
    reps: int,
    seed: int,
    threads: int = 1,
    grid_points: int = 20001,
) -> tuple[list[CFEstimate], list[CFEstimate]]:
    """Two independent estimates of ``E[exp(i theta z_mut(t))]``.

    The first is the empirical CF of ``z_mut`` from full-system runs.  The
    second averages ``exp((1-p) * int_0^t Z0(t-s) (phi_s(theta) - 1) ds)`` over
    independently simulated clone-only paths, ``phi`` being the founder CF.
    Both use the paper's deterministic start (no seed-edge draw).
    """
    from .stats import empirical_cf

    thetas = [float(th) for th in thetas]
    batch = run_replicas(params, TimeReaches(t), reps, seed, Mode.CONTINUOUS, threads,
                         seed_edge="intact")
    direct = [CFEstimate(th, v, se_re, se_im)
              for th, (v, se_re, se_im) in zip(thetas, empirical_cf(batch.z_mut, thetas))]

    mv = _moves(params.family)
    mixed = []
    for th in thetas:
        g_re, g_im, h = _cumulative_mutant_integral(th, t, params.family, grid_points)

        def one(rng, g_re=g_re, g_im=g_im, h=h):
            return _clone_path_exponent(mv.start.ones, mv.start.a_units, mv.birth.ones,
                                        mv.birth.a_units, mv.clone_on_mutation.ones,
                                        mv.clone_on_mutation.a_units, mv.a, params.p, t,
                                        g_re, g_im, h, rng)

        expo = np.array(seeding.map_replicas(one, reps, seed, seeding.ANCESTRAL, threads))
        vals = np.exp(expo[:, 0] + 1j * expo[:, 1])
        n = len(vals)
        se_re = float(np.std(vals.real, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        se_im = float(np.std(vals.imag, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        mixed.append(CFEstimate(th, complex(vals.mean()), se_re, se_im))
    return direct, mixed


def conditional_mutation_estimates(
    params: BranchingParams,
    t: float,
    thetas,
    reps: int,
    seed: int,
    threads: int = 1,
) -> list[CFEstimate]:
    """Average of ``prod_i phi_{t - r_i}(theta)`` over clone-only paths.

    ``r_i`` are the mutation times of the path.  Given the clone path the
    mutant families are independent Yule processes started at those times,
    so this is an unbiased estimate of ``E[exp(i theta z_mut(t))]``.  The
    filtered-Poisson average treats mutation times as a Cox process driven
    by the clone path, which ignores that each mutation also moves the clone
    mass; this estimator is the exact counterpart used to quantify the gap.
    """
    mv = _moves(params.family)
    jump = float(params.family.jump)
    shape = params.shape
    out = []
    for th in (float(x) for x in thetas):
        def one(rng, th=th):
            return _clone_path_mutation_log_cf(mv.start.ones, mv.start.a_units, mv.birth.ones,
                                               mv.birth.a_units, mv.clone_on_mutation.ones,
                                               mv.clone_on_mutation.a_units, mv.a, params.p, t,
                                               th, jump, shape, rng)

        expo = np.array(seeding.map_replicas(one, reps, seed, seeding.ANCESTRAL, threads))
        vals = np.exp(expo[:, 0] + 1j * expo[:, 1])
        n = len(vals)
        se_re = float(np.std(vals.real, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        se_im = float(np.std(vals.imag, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        out.append(CFEstimate(th, complex(vals.mean()), se_re, se_im))
    return out
