"""Optimal measurement angles, closed-form maxima, and phase search.

The maximal GHZ violation has a closed form: the two-party value scales by
2^(N-2), the violation ratio against the 2^(N-1) bound fixes the critical
visibility, and a linear phase ramp attains it.  A derivative-free coordinate
search confirms the optimum numerically and probes asymmetric settings.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quantum import PhaseConfiguration, ghz_bell_value
from .scenario import BellScenario

SVETLICHNY_VISIBILITY = 1.0 / math.sqrt(2.0)

GOLDEN_RATIO_STEP = (math.sqrt(5.0) - 1.0) / 2.0

__all__ = [
    "SVETLICHNY_VISIBILITY",
    "PhaseSearchResult",
    "ViolationReport",
    "cglmp_max_closed_form",
    "critical_visibility",
    "max_violation",
    "optimal_angles",
    "optimize_phases",
    "optimize_with_restarts",
]


def optimal_angles(scenario: BellScenario) -> PhaseConfiguration:
    """Linear phase ramps attaining the maximal GHZ violation.

    Every party uses the same two vectors: entry l is l*m*pi/(2d) with slope
    m1 = 15/N for the first setting and m2 = m1 - 6 for the second.
    """
    d = scenario.dimension
    m1 = 15.0 / scenario.n_parties
    m2 = m1 - 6.0
    ramp = np.arange(d) * math.pi / (2.0 * d)
    return PhaseConfiguration.from_party_vectors(scenario, m1 * ramp, m2 * ramp)


def cglmp_max_closed_form(dimension: int) -> float:
    """Maximal quantum value of the two-qudit functional.

    4d * sum_{k=0}^{floor(d/2)-1} (1 - 2k/(d-1)) (q_k - q_{-(k+1)}) with
    q_c = 1/(2 d^3 sin^2(pi (c + 1/4)/d)).  Strictly increasing in d; the
    d=2 value is 2*sqrt(2).
    """
    if dimension < 2:
        raise ValueError(f"need outcome dimension >= 2, got {dimension}")
    d = dimension

    def q(c):
        return 1.0 / (2.0 * d**3 * math.sin(math.pi * (c + 0.25) / d) ** 2)

    total = sum(
        (1.0 - 2.0 * k / (d - 1)) * (q(k) - q(-(k + 1))) for k in range(d // 2)
    )
    return 4.0 * d * total


def max_violation(scenario: BellScenario) -> float:
    """Maximal quantum value for N qudits: 2^(N-2) times the two-qudit one."""
    return 2.0 ** (scenario.n_parties - 2) * cglmp_max_closed_form(scenario.dimension)


@dataclass(frozen=True)
class ViolationReport:
    """Maximal violation, its ratio against the 2^(N-1) bound, and thresholds."""

    scenario: BellScenario
    max_value: float
    angles: PhaseConfiguration
    ratio: float
    critical_visibility: float
    svetlichny_visibility: float
    angles_mode: str = "optimal"

    @property
    def beats_svetlichny(self) -> bool:
        """True when the noise threshold lies strictly below 1/sqrt(2)."""
        return self.critical_visibility < self.svetlichny_visibility

    def to_json_dict(self) -> dict:
        return {
            "n": self.scenario.n_parties,
            "d": self.scenario.dimension,
            "max_value": self.max_value,
            "ratio": self.ratio,
            "critical_visibility": self.critical_visibility,
            "svetlichny_visibility": self.svetlichny_visibility,
            "beats_svetlichny": self.beats_svetlichny,
            "angles_mode": self.angles_mode,
            "angles": self.angles.to_json_dict(),
        }


def critical_visibility(scenario: BellScenario) -> ViolationReport:
    """Noise threshold above which the white-noise GHZ mixture still violates.

    The Bell value is affine in the visibility, so the crossover with the
    2^(N-1) bound sits at the reciprocal of the violation ratio; the ratio
    itself is half the two-qudit maximum, independent of N.
    """
    value = max_violation(scenario)
    ratio = value / 2.0 ** (scenario.n_parties - 1)
    return ViolationReport(
        scenario=scenario,
        max_value=value,
        angles=optimal_angles(scenario),
        ratio=ratio,
        critical_visibility=1.0 / ratio,
        svetlichny_visibility=SVETLICHNY_VISIBILITY,
    )


class _BudgetExhausted(Exception):
    pass


class _CountedObjective:
    """Objective wrapper that stops the search when evaluations run out."""

    def __init__(self, func, budget: int):
        self.func = func
        self.remaining = budget
        self.used = 0

    def __call__(self, x):
        if self.remaining <= 0:
            raise _BudgetExhausted
        self.remaining -= 1
        self.used += 1
        return self.func(x)


def _golden_section_max(f, lo: float, hi: float, xtol: float = 1e-7):
    """Golden-section maximum of f on [lo, hi]; returns (x, f(x))."""
    x1 = hi - GOLDEN_RATIO_STEP * (hi - lo)
    x2 = lo + GOLDEN_RATIO_STEP * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN_RATIO_STEP * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN_RATIO_STEP * (hi - lo)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


_LINE_SCAN_POINTS = 12  # coarse bracket over one 2*pi period before refining


def _line_search(f, params, coord, f0):
    """Maximize f along one coordinate in place; returns the new best value."""
    x0 = params[coord]
    step = 2.0 * math.pi / _LINE_SCAN_POINTS

    def along(x):
        params[coord] = x
        return f(params)

    best_x, best_f = x0, f0
    for i in range(_LINE_SCAN_POINTS):
        x = x0 - math.pi + (i + 0.5) * step
        fx = along(x)
        if fx > best_f:
            best_x, best_f = x, fx
    x, fx = _golden_section_max(along, best_x - step, best_x + step)
    if fx > best_f:
        best_x, best_f = x, fx
    params[coord] = best_x
    return best_f


def optimize_phases(
    scenario: BellScenario,
    start: PhaseConfiguration,
    budget: int,
    mode: str = "free",
    tol: float = 1e-9,
) -> tuple[PhaseConfiguration, float]:
    """Derivative-free search for phases maximizing the GHZ Bell value.

    Cycles through the phase entries (all 2*N*d in "free" mode, the 2*d
    party-shared ones in "symmetric" mode), running a golden-section line
    search per coordinate bracketed by a coarse scan of one full period.
    Sweeps repeat until a full cycle improves by less than tol or the
    evaluation budget is spent.  The returned value never drops below the
    start's; symmetric mode reads the start's party-1 vectors as the shared
    parameters.
    """
    if budget <= 0:
        raise ValueError(f"evaluation budget must be positive, got {budget}")
    if mode not in ("free", "symmetric"):
        raise ValueError(f"mode must be 'free' or 'symmetric', got {mode!r}")
    n, d = scenario.n_parties, scenario.dimension

    if mode == "free":
        params = start.phases.copy().reshape(-1)

        def build(p):
            return PhaseConfiguration(scenario, p.reshape(n, 2, d))

    else:
        # party 1's vectors parameterize all parties
        params = start.phases[0].copy().reshape(-1)

        def build(p):
            return PhaseConfiguration(scenario, np.tile(p.reshape(2, d), (n, 1, 1)))

    objective = _CountedObjective(lambda p: ghz_bell_value(build(p)), budget)

    best = objective(params)
    best_params = params.copy()
    try:
        improved = True
        while improved:
            sweep_start = best
            for coord in range(params.size):
                best = _line_search(objective, params, coord, best)
                best_params[coord] = params[coord]
            improved = best - sweep_start > tol
    except _BudgetExhausted:
        # a probe value may still sit in the interrupted coordinate
        params[:] = best_params

    ceiling = max_violation(scenario)
    if best > ceiling + 1e-6:
        warnings.warn(
            f"phase search exceeded the closed-form maximum: {best!r} > {ceiling!r}",
            stacklevel=2,
        )
    return build(params), best


@dataclass(frozen=True)
class PhaseSearchResult:
    config: PhaseConfiguration
    value: float
    restart_values: tuple[float, ...]


def optimize_with_restarts(
    scenario: BellScenario,
    restarts: int = 20,
    budget: int = 20_000,
    mode: str = "free",
    seed: int = 0,
    tol: float = 1e-9,
) -> PhaseSearchResult:
    """Run optimize_phases from uniformly random starts and keep the best.

    Restarts are independent; ties go to the earliest restart, so the result
    is a deterministic function of the seed.
    """
    if restarts < 1:
        raise ValueError(f"need at least one restart, got {restarts}")
    rng = np.random.default_rng(seed)
    n, d = scenario.n_parties, scenario.dimension
    best_config, best_value = None, -math.inf
    values = []
    for _ in range(restarts):
        start = PhaseConfiguration(scenario, rng.uniform(0.0, 2.0 * math.pi, (n, 2, d)))
        config, value = optimize_phases(scenario, start, budget, mode=mode, tol=tol)
        values.append(value)
        if value > best_value:
            best_config, best_value = config, value
    return PhaseSearchResult(best_config, best_value, tuple(values))
