"""Wealth paths and drawdown statistics.

The wealth recursion V(k+1) = (1 + K'X(k)) V(k) drives everything here:

* Monte Carlo estimation of expected maximum drawdown and of the probability
  that drawdown stays below a level, with common random numbers across
  betting fractions so sweeps and set-membership comparisons stay coherent;
* exact enumeration of all outcome sequences at desk scale (atom_count^N up
  to a fixed budget), used as the oracle for every estimator;
* the closed-form ruin-chance 1 - p^N for the even-money coin;
* growth maximization under three drawdown constraint styles, including the
  concave log-complementary surrogate;
* an empirical convexity probe for two-asset drawdown constraint sets.

Relative wealth level is tracked by the recursion r <- min(1, r * factor)
rather than by dividing V by its running peak: the first drop from a peak is
then the exact float factor, so threshold events classify exactly and the
even-coin enumeration matches 1 - p^N to summation accuracy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import ENUM_BUDGET, GRID_STEP, REFINE_TOL
from .gamble import GambleModel, as_allocation, is_feasible, sample_indices, wealth_factors
from .growth import growth_gradient, log_growth, maximize_growth, project_allocation


class EnumerationBudgetError(ValueError):
    """atom_count^N exceeds the exact-enumeration budget."""


class InfeasibleConstraintError(ValueError):
    """No feasible betting fraction satisfies the drawdown constraint."""


@dataclass(frozen=True, eq=False)
class WealthPath:
    """Realized wealth trajectory V(0..N) plus the outcome sequence behind it."""

    values: np.ndarray       # (N+1,)
    outcomes: np.ndarray     # (N, n)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        outcomes = np.atleast_2d(np.asarray(self.outcomes, dtype=float))
        if values.ndim != 1 or values.size != outcomes.shape[0] + 1:
            raise ValueError("values must have one more entry than outcomes")
        if values[0] <= 0.0:
            raise ValueError("initial wealth must be positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "outcomes", outcomes)


@dataclass(frozen=True)
class DrawdownStats:
    """Maximum percentage drawdown of a path, its complement, and log complement."""

    max_drawdown: float      # in [0, 1]
    complementary: float     # 1 - max_drawdown
    log_complementary: float  # log(complementary), -inf on ruin


@dataclass(frozen=True)
class ConstraintSpec:
    """Drawdown constraint: E[D] <= eps, P(D <= eps) >= 1 - delta, or the
    concave surrogate E[log(1 - D)] >= log(1 - eps)."""

    kind: str                      # "expected" | "probabilistic" | "surrogate"
    epsilon: float
    delta: Optional[float] = None  # probabilistic only

    def __post_init__(self):
        if self.kind not in ("expected", "probabilistic", "surrogate"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.kind == "probabilistic":
            if self.delta is None or not (0.0 < self.delta < 1.0):
                raise ValueError(f"delta must be in (0, 1), got {self.delta!r}")


@dataclass(frozen=True)
class MonteCarloConfig:
    paths: int = 10_000
    seed: int = 0


@dataclass(frozen=True)
class LogDrawdownEstimate:
    """E[log(1 - D)] value; exact=False flags a Monte Carlo fallback."""

    value: float
    exact: bool
    std_error: Optional[float] = None


# ---------------------------------------------------------------------------
# Paths and per-path statistics
# ---------------------------------------------------------------------------

def simulate_path(model: GambleModel, k, n_steps: int, v0: float,
                  rng: np.random.Generator) -> WealthPath:
    """Simulate V(0..N) under fraction k; wealth absorbed at 0 after total loss."""
    kv = as_allocation(k, model.n_assets)
    if not is_feasible(kv, model):
        raise ValueError(f"allocation {kv!r} is infeasible for this model")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if v0 <= 0.0:
        raise ValueError("v0 must be positive")
    outcomes = model.xs[sample_indices(model, n_steps, rng)]
    factors = np.maximum(1.0 + outcomes @ kv, 0.0)
    values = np.empty(n_steps + 1)
    values[0] = v0
    values[1:] = v0 * np.cumprod(factors)
    return WealthPath(values=values, outcomes=outcomes)


def max_drawdown(path) -> DrawdownStats:
    """Largest peak-to-trough relative decline, via a single running-peak pass.

    Accepts a WealthPath or a bare value sequence.
    """
    values = np.asarray(getattr(path, "values", path), dtype=float)
    if values[0] <= 0.0:
        raise ValueError("initial wealth must be positive")
    peak = np.maximum.accumulate(values)
    dbar = float(np.min(values / peak))
    return DrawdownStats(
        max_drawdown=1.0 - dbar,
        complementary=dbar,
        log_complementary=math.log(dbar) if dbar > 0.0 else -math.inf,
    )


def coin_drawdown_probability(p: float, n_steps: int) -> float:
    """For the even-money coin bet at any fraction in (0, 1): P(D >= K) = 1 - p^N."""
    if not (0.0 < p < 1.0):
        raise ValueError("p must be in (0, 1)")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    return 1.0 - p ** n_steps


# ---------------------------------------------------------------------------
# Monte Carlo engine (common random numbers = shared index matrix)
# ---------------------------------------------------------------------------

def sample_path_indices(model: GambleModel, paths: int, n_steps: int, seed: int) -> np.ndarray:
    """(paths, n_steps) atom-index matrix; reuse it across fractions for CRN."""
    rng = np.random.default_rng(seed)
    return sample_indices(model, (paths, n_steps), rng)


def dbar_samples(model: GambleModel, k, indices: np.ndarray) -> np.ndarray:
    """Per-path complementary drawdown min V(k)/V(l) for the given outcome indices."""
    kv = as_allocation(k, model.n_assets)
    if not is_feasible(kv, model):
        raise ValueError(f"allocation {kv!r} is infeasible for this model")
    f_atom = wealth_factors(model, kv)
    paths, n_steps = indices.shape
    r = np.ones(paths)
    dbar = np.ones(paths)
    for j in range(n_steps):
        r *= f_atom[indices[:, j]]
        np.minimum(r, 1.0, out=r)
        np.minimum(dbar, r, out=dbar)
    return dbar


def _mean_se(samples: np.ndarray) -> tuple:
    n = samples.size
    est = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return est, se


def expected_drawdown_mc(model: GambleModel, k, n_steps: int, paths: int,
                         seed: int) -> tuple:
    """(estimate, std_error) of E[D] from `paths` independently sampled paths."""
    if paths < 100:
        raise ValueError("need at least 100 paths")
    indices = sample_path_indices(model, paths, n_steps, seed)
    return _mean_se(1.0 - dbar_samples(model, k, indices))


def drawdown_probability_mc(model: GambleModel, k, n_steps: int, epsilon: float,
                            paths: int, seed: int) -> tuple:
    """(estimate, std_error) of P(D <= epsilon)."""
    if paths < 100:
        raise ValueError("need at least 100 paths")
    if not (0.0 < epsilon <= 1.0):
        raise ValueError("epsilon must be in (0, 1]")
    indices = sample_path_indices(model, paths, n_steps, seed)
    hit = (dbar_samples(model, k, indices) >= 1.0 - epsilon).astype(float)
    return _mean_se(hit)


# ---------------------------------------------------------------------------
# Exact enumeration engine
# ---------------------------------------------------------------------------

def enumerate_dbar(model: GambleModel, k, n_steps: int,
                   budget: int = ENUM_BUDGET) -> tuple:
    """(probability, complementary drawdown) over every outcome sequence.

    Raises EnumerationBudgetError when atom_count^n_steps exceeds the budget.
    """
    kv = as_allocation(k, model.n_assets)
    if not is_feasible(kv, model):
        raise ValueError(f"allocation {kv!r} is infeasible for this model")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    m = model.n_atoms
    total = m ** n_steps
    if total > budget:
        raise EnumerationBudgetError(
            f"{m}^{n_steps} = {total} sequences exceed the budget of {budget}"
        )
    f_atom = wealth_factors(model, kv)
    seq = np.arange(total, dtype=np.int64)
    r = np.ones(total)
    dbar = np.ones(total)
    prob = np.ones(total)
    stride = total
    for _ in range(n_steps):
        stride //= m
        idx = (seq // stride) % m
        r = r * f_atom[idx]
        np.minimum(r, 1.0, out=r)
        np.minimum(dbar, r, out=dbar)
        prob = prob * model.probs[idx]
    return prob, dbar


def expected_drawdown_exact(model: GambleModel, k, n_steps: int,
                            budget: int = ENUM_BUDGET) -> float:
    """Probability-weighted E[D] over all outcome sequences."""
    prob, dbar = enumerate_dbar(model, k, n_steps, budget)
    return float(prob @ (1.0 - dbar))


def expected_complementary_exact(model: GambleModel, k, n_steps: int,
                                 budget: int = ENUM_BUDGET) -> float:
    """Probability-weighted E[1 - D]."""
    prob, dbar = enumerate_dbar(model, k, n_steps, budget)
    return float(prob @ dbar)


def drawdown_exceedance_exact(model: GambleModel, k, n_steps: int, threshold: float,
                              budget: int = ENUM_BUDGET) -> float:
    """Exact P(D >= threshold), classified in complementary space for float
    consistency with the Monte Carlo estimators."""
    prob, dbar = enumerate_dbar(model, k, n_steps, budget)
    return float(prob[dbar <= 1.0 - threshold].sum())


def expected_log_complementary(model: GambleModel, k, n_steps: int,
                               budget: int = ENUM_BUDGET,
                               mc: MonteCarloConfig = MonteCarloConfig()) -> LogDrawdownEstimate:
    """E[log(1 - D)]: exact by enumeration when it fits the budget, otherwise a
    flagged Monte Carlo estimate. -inf whenever ruin has positive probability."""
    kv = as_allocation(k, model.n_assets)
    if not is_feasible(kv, model):
        raise ValueError(f"allocation {kv!r} is infeasible for this model")
    if np.min(wealth_factors(model, kv)) <= 0.0:
        # Some atom wipes the account; that sequence has positive mass.
        return LogDrawdownEstimate(value=-math.inf, exact=True)
    try:
        prob, dbar = enumerate_dbar(model, kv, n_steps, budget)
        return LogDrawdownEstimate(value=float(prob @ np.log(dbar)), exact=True)
    except EnumerationBudgetError:
        indices = sample_path_indices(model, mc.paths, n_steps, mc.seed)
        logs = np.log(dbar_samples(model, kv, indices))
        est, se = _mean_se(logs)
        return LogDrawdownEstimate(value=est, exact=False, std_error=se)


# ---------------------------------------------------------------------------
# Constrained growth maximization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConstrainedResult:
    """GrowthResult fields plus how the constraint was handled."""

    k_star: np.ndarray
    g_star: float
    iterations: int
    converged: bool
    method: str
    constraint_estimate: float
    constraint_std_error: Optional[float] = None


def _grid_1d(step: float = GRID_STEP) -> np.ndarray:
    count = int(round(1.0 / step)) + 1
    return np.linspace(0.0, 1.0, count)


def _constraint_evaluator(model, n_steps, spec, mc):
    """Returns feasible(k) -> (ok, estimate, std_error) under CRN."""
    indices = sample_path_indices(model, mc.paths, n_steps, mc.seed)

    def evaluate(kv):
        dbar = dbar_samples(model, kv, indices)
        if spec.kind == "expected":
            est, se = _mean_se(1.0 - dbar)
            return est <= spec.epsilon, est, se
        hit = (dbar >= 1.0 - spec.epsilon).astype(float)
        est, se = _mean_se(hit)
        # Conservative: require the whole 3-sigma band above the floor.
        return est - 3.0 * se >= 1.0 - spec.delta, est, se

    return evaluate


def _constrained_mc_1d(model, n_steps, spec, mc, unconstrained):
    evaluate = _constraint_evaluator(model, n_steps, spec, mc)
    evals = 0

    k_un = float(unconstrained.k_star[0])
    ok, est, se = evaluate(np.array([k_un]))
    evals += 1
    if ok:
        return ConstrainedResult(unconstrained.k_star, unconstrained.g_star,
                                 evals, True, "unconstrained-feasible", est, se)

    grid = _grid_1d()
    flags, stats = [], []
    for kk in grid:
        ok, est, se = evaluate(np.array([kk]))
        evals += 1
        flags.append(ok)
        stats.append((est, se))
    feasible_idx = [i for i, ok in enumerate(flags) if ok]
    if not feasible_idx:
        raise InfeasibleConstraintError(
            f"no fraction on the grid satisfies {spec.kind} <= {spec.epsilon}"
        )
    growths = [log_growth(np.array([grid[i]]), model) for i in feasible_idx]
    i_best = feasible_idx[int(np.argmax(growths))]

    lo = grid[i_best]
    # Refine toward the infeasible neighbor on the ascending-growth side.
    if i_best + 1 < grid.size and not flags[i_best + 1] and lo < k_un:
        hi = grid[i_best + 1]
        while hi - lo > REFINE_TOL:
            mid = 0.5 * (lo + hi)
            ok, _, _ = evaluate(np.array([mid]))
            evals += 1
            if ok:
                lo = mid
            else:
                hi = mid
    k_out = np.array([min(lo, k_un)])
    ok, est, se = evaluate(k_out)
    evals += 1
    return ConstrainedResult(k_out, log_growth(k_out, model), evals, True,
                             "grid-refine", est, se)


def _constrained_mc_2d(model, n_steps, spec, mc, unconstrained):
    evaluate = _constraint_evaluator(model, n_steps, spec, mc)
    evals = 0

    ok, est, se = evaluate(unconstrained.k_star)
    evals += 1
    if ok:
        return ConstrainedResult(unconstrained.k_star, unconstrained.g_star,
                                 evals, True, "unconstrained-feasible", est, se)

    axis = np.arange(0.0, 1.0 + 1e-12, 2 * GRID_STEP)
    best = None
    for k1 in axis:
        for k2 in axis:
            if k1 + k2 > 1.0 + 1e-12:
                continue
            kv = np.array([k1, k2])
            if not is_feasible(kv, model):
                continue
            ok, est, se = evaluate(kv)
            evals += 1
            if not ok:
                continue
            g = log_growth(kv, model)
            if best is None or g > best[1]:
                best = (kv, g, est, se)
    if best is None:
        raise InfeasibleConstraintError(
            f"no grid point satisfies {spec.kind} <= {spec.epsilon}"
        )
    kv, g, est, se = best
    return ConstrainedResult(kv, g, evals, True, "grid-scan", est, se)


def _constrained_surrogate(model, n_steps, spec, mc, budget, unconstrained):
    target = math.log(1.0 - spec.epsilon)

    def h(kv):
        return expected_log_complementary(model, kv, n_steps, budget=budget, mc=mc).value

    evals = 1
    if h(unconstrained.k_star) >= target:
        return ConstrainedResult(unconstrained.k_star, unconstrained.g_star,
                                 evals, True, "unconstrained-feasible",
                                 h(unconstrained.k_star))

    if model.n_assets == 1:
        # h is concave with h(0) = 0 > target, so {h >= target} on [0, k_un]
        # is an interval starting at 0; bisect for its right end.
        lo, hi = 0.0, float(unconstrained.k_star[0])
        while hi - lo > REFINE_TOL * 1e-2:
            mid = 0.5 * (lo + hi)
            evals += 1
            if h(np.array([mid])) >= target:
                lo = mid
            else:
                hi = mid
        k_out = np.array([lo])
        return ConstrainedResult(k_out, log_growth(k_out, model), evals, True,
                                 "surrogate-bisect", h(k_out))

    # Ascent on g with a restoration step: shrink any step that leaves the
    # surrogate-feasible region (which is convex, so shrinking works).
    kv = np.zeros(model.n_assets)
    g = 0.0
    for _ in range(500):
        grad = growth_gradient(kv, model)
        t = 0.5
        moved = False
        while t > 1e-10:
            trial = project_allocation(kv + t * grad)
            evals += 1
            if (np.min(1.0 + model.xs @ trial) > 0.0 and h(trial) >= target
                    and log_growth(trial, model) > g + 1e-12):
                kv, g = trial, log_growth(trial, model)
                moved = True
                break
            t *= 0.5
        if not moved:
            break
    return ConstrainedResult(kv, g, evals, True, "surrogate-ascent", h(kv))


def maximize_growth_constrained(model: GambleModel, n_steps: int, spec: ConstraintSpec,
                                mc: MonteCarloConfig = MonteCarloConfig(),
                                budget: int = ENUM_BUDGET) -> ConstrainedResult:
    """Maximize log growth subject to a drawdown constraint.

    surrogate: concave program (objective and constraint both concave) solved
    exactly-at-desk-scale; expected/probabilistic: grid plus boundary
    refinement for one asset, grid scan for two (no convexity guarantee is
    claimed for those constraint sets, so no interior method is used).
    Raises InfeasibleConstraintError when nothing on the grid qualifies.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    unconstrained = maximize_growth(model)
    if spec.kind == "surrogate":
        return _constrained_surrogate(model, n_steps, spec, mc, budget, unconstrained)
    if model.n_assets == 1:
        return _constrained_mc_1d(model, n_steps, spec, mc, unconstrained)
    if model.n_assets == 2:
        return _constrained_mc_2d(model, n_steps, spec, mc, unconstrained)
    raise ValueError("Monte Carlo constrained search supports 1 or 2 assets")


# ---------------------------------------------------------------------------
# Convexity probe for two-asset constraint sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbePoint:
    k1: float
    k2: float
    estimate: float
    std_error: float
    in_set: bool


@dataclass(frozen=True)
class MidpointCheck:
    k_a: tuple
    k_b: tuple
    k_mid: tuple
    estimate: float
    std_error: float
    violation: bool
    significant: bool


@dataclass(frozen=True)
class ProbeReport:
    spec: ConstraintSpec
    n_steps: int
    paths: int
    seed: int
    grid: list = field(default_factory=list)        # ProbePoint
    checks: list = field(default_factory=list)      # MidpointCheck
    pairs_tested: int = 0

    @property
    def violations(self) -> list:
        return [c for c in self.checks if c.violation]

    @property
    def significant_violations(self) -> int:
        return sum(1 for c in self.checks if c.violation and c.significant)

    @property
    def inconclusive_violations(self) -> int:
        return sum(1 for c in self.checks if c.violation and not c.significant)


def _probe_stat(spec, dbar):
    if spec.kind == "expected":
        return _mean_se(1.0 - dbar)
    return _mean_se((dbar >= 1.0 - spec.epsilon).astype(float))


def _probe_in_set(spec, est):
    if spec.kind == "expected":
        return est <= spec.epsilon
    return est >= 1.0 - spec.delta


def _probe_boundary_gap(spec, est):
    """How far past the boundary a violating estimate sits."""
    if spec.kind == "expected":
        return est - spec.epsilon
    return (1.0 - spec.delta) - est


def convexity_probe(model: GambleModel, n_steps: int, spec: ConstraintSpec,
                    grid_resolution: int = 20, pair_samples: int = 50,
                    mc: MonteCarloConfig = MonteCarloConfig()) -> ProbeReport:
    """Estimate a two-asset drawdown constraint set on a grid, then test
    midpoints of random in-set pairs for membership.

    A midpoint falling outside the estimated set is a violation; violations
    within 3 standard errors of the boundary are tagged inconclusive. The
    output is data for inspection, not a verdict: a significant violation is
    a finding about the set, not an error.
    """
    if model.n_assets != 2:
        raise ValueError("convexity probe requires a 2-asset model")
    if spec.kind == "surrogate":
        raise ValueError("probe applies to expected/probabilistic sets")
    if grid_resolution < 20:
        raise ValueError("grid_resolution must be >= 20")
    indices = sample_path_indices(model, mc.paths, n_steps, mc.seed)

    axis = np.linspace(0.0, 1.0, grid_resolution)
    grid = []
    in_points = []
    for k1 in axis:
        for k2 in axis:
            if k1 + k2 > 1.0 + 1e-12:
                continue
            kv = np.array([k1, k2])
            if not is_feasible(kv, model):
                continue
            est, se = _probe_stat(spec, dbar_samples(model, kv, indices))
            inside = _probe_in_set(spec, est)
            grid.append(ProbePoint(float(k1), float(k2), est, se, inside))
            if inside:
                in_points.append(kv)

    checks = []
    pairs = 0
    if len(in_points) >= 2:
        rng = np.random.default_rng(mc.seed + 1)
        for _ in range(pair_samples):
            ia, ib = rng.choice(len(in_points), size=2, replace=False)
            a, b = in_points[ia], in_points[ib]
            mid = 0.5 * (a + b)
            est, se = _probe_stat(spec, dbar_samples(model, mid, indices))
            violation = not _probe_in_set(spec, est)
            significant = violation and _probe_boundary_gap(spec, est) > 3.0 * se
            pairs += 1
            checks.append(MidpointCheck(
                k_a=(float(a[0]), float(a[1])),
                k_b=(float(b[0]), float(b[1])),
                k_mid=(float(mid[0]), float(mid[1])),
                estimate=est, std_error=se,
                violation=violation, significant=significant,
            ))

    return ProbeReport(spec=spec, n_steps=n_steps, paths=mc.paths, seed=mc.seed,
                       grid=grid, checks=checks, pairs_tested=pairs)


def write_level_set_csv(report: ProbeReport, path) -> None:
    """Grid CSV with columns k1, k2, estimate, std_error, in_set."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k1", "k2", "estimate", "std_error", "in_set"])
        for pt in report.grid:
            writer.writerow([repr(pt.k1), repr(pt.k2), repr(pt.estimate),
                             repr(pt.std_error), int(pt.in_set)])
