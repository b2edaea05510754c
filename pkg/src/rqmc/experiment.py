"""Replicated-scramble error estimation and convergence-rate studies.

The quantity under study is E|I - Ihat| where Ihat is the equal-weight
average of an integrand over n points.  Each replicate rescrambles the
same digital net (or redraws plain-uniform points for the Monte Carlo
baseline), so the R replicate estimates are independent and identically
distributed and their absolute errors estimate the expected error
directly, with a standard error of their own.

Rates are read off a log2-log2 ordinary-least-squares fit of the mean
absolute error against n, and compared with the predicted exponent

    gamma * (1/2 + 1/(4 d_u - 2)),   gamma = 1 - maxA,

where d_u is the irregular dimension of the discontinuity set (how many
axes its boundary is not parallel to) and maxA the worst boundary growth
exponent.  The prediction is an upper bound up to log factors, so the
verdict allows a configurable slack and treats steeper-than-predicted
slopes as consistent.

A small catalog of integrands with exact or closed-form reference values
covers the regimes of interest: smooth, discontinuous, discontinuous
with boundary singularities (axis-parallel and not), and option payoffs
driven by the finance module under both path factorizations.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .digital_nets import PRECISION_DEPTH, PointSet, generate_points
from .errors import ContractError, InfeasibleRegimeError, InsufficientDataError
from .finance import (
    GbmModel,
    PayoffSpec,
    generate_path,
    geometric_asian_price,
    path_factor,
)
from .scrambling import ScrambleSeed, scramble, uniform_points

SAMPLERS = ("scrambled_net", "plain_mc")

DEFAULT_N_GRID = tuple(2**k for k in range(6, 17))
DEFAULT_REPLICATIONS = 32
DEFAULT_SLOPE_SLACK = 0.12  # absorbs the theorem's poly-log factor at desk scale

# Market constants shared by the shipped payoff studies.
STANDARD_MODEL = GbmModel(s0=1.0, r=0.05, sigma=0.2, maturity=1.0, d=4, strike=1.0)


def theoretical_exponent(d: int, d_u: int, max_growth: float) -> float:
    """Predicted |error| decay exponent: (1 - maxA) * (1/2 + 1/(4 d_u - 2)).

    d_u = d recovers the general-position prediction; d_u = 1
    (QMC-friendly, axis-parallel discontinuity) gives exponent 1 - maxA.
    """
    if not 1 <= d_u <= d:
        raise ContractError("need 1 <= d_u <= d")
    if max_growth < 0:
        raise ContractError("growth exponent must be >= 0")
    if max_growth >= 1:
        raise InfeasibleRegimeError(
            f"max growth exponent {max_growth} >= 1: the singularity bound "
            "is not even integrable, no rate is predicted"
        )
    return (1.0 - max_growth) * (0.5 + 1.0 / (4 * d_u - 2))


@dataclass(frozen=True)
class StudyConfig:
    """Everything needed to reproduce one rate study.

    ``integrand`` is a catalog name or a payoff bound to a model;
    ``reference_value`` is the exact integral, either as a number or as
    an ``"oracle:<name>"`` tag resolved at run time.
    """

    integrand: str | PayoffSpec
    dimension: int
    irregular_dimension: int
    max_growth: float
    reference_value: float | str
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    replications: int = DEFAULT_REPLICATIONS
    master_seed: int = 0
    sampler: str = "scrambled_net"
    factor_method: str = "ot"
    slack: float = DEFAULT_SLOPE_SLACK

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.n_grid:
            raise ContractError("n_grid must be nonempty")
        for n in self.n_grid:
            if n < 1 or n & (n - 1):
                raise ContractError(f"n_grid entry {n} is not a power of 2")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ContractError("n_grid must be strictly increasing")
        if self.replications < 8:
            raise ContractError("need at least 8 replications")
        if self.sampler not in SAMPLERS:
            raise ContractError(f"unknown sampler {self.sampler!r}")
        if not 1 <= self.irregular_dimension <= self.dimension:
            raise ContractError("need 1 <= irregular_dimension <= dimension")
        if self.slack < 0:
            raise ContractError("slack must be >= 0")
        if isinstance(self.reference_value, str):
            if not self.reference_value.startswith("oracle:"):
                raise ContractError(
                    "reference_value must be a number or an 'oracle:<name>' tag"
                )
        elif not math.isfinite(self.reference_value):
            raise ContractError("reference_value must be finite")

    @property
    def integrand_name(self) -> str:
        if isinstance(self.integrand, PayoffSpec):
            return f"{self.integrand.kind}[{self.factor_method}]"
        return self.integrand


@dataclass(frozen=True)
class ErrorRecord:
    """Replicate estimates at one sample size, against a known reference."""

    n: int
    reference: float
    estimates: tuple[float, ...]

    @property
    def replications(self) -> int:
        return len(self.estimates)

    @property
    def abs_errors(self) -> np.ndarray:
        return np.abs(np.array(self.estimates) - self.reference)

    @property
    def mean_abs_error(self) -> float:
        return float(self.abs_errors.mean())

    @property
    def std_error(self) -> float:
        e = self.abs_errors
        return float(e.std(ddof=1) / math.sqrt(len(e)))


@dataclass(frozen=True)
class RateFit:
    """OLS fit of log2(mean absolute error) on log2(n)."""

    slope: float
    intercept: float
    r_squared: float
    n_range: tuple[int, int]
    theoretical_exponent: float | None = None
    excluded_n: tuple[int, ...] = ()


def _resolve_reference(config: StudyConfig) -> float:
    ref = config.reference_value
    if isinstance(ref, str):
        name = ref.removeprefix("oracle:")
        if name == "geometric_asian":
            if not (
                isinstance(config.integrand, PayoffSpec)
                and config.integrand.kind == "geometric_indicator_payoff"
            ):
                raise ContractError(
                    "the geometric_asian oracle applies only to the geometric "
                    "indicator payoff"
                )
            return geometric_asian_price(config.integrand.model)
        raise ContractError(f"no oracle named {name!r}")
    return float(ref)


def _resolve_integrand(config: StudyConfig) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(config.integrand, PayoffSpec):
        spec = config.integrand
        if spec.model.d != config.dimension:
            raise ContractError("model dimension does not match the study")
        factor = path_factor(spec.model, config.factor_method)

        def f(u: np.ndarray) -> np.ndarray:
            return payoff_values(spec, factor, u)

        return f
    entry = CATALOG.get(config.integrand)
    if entry is None:
        raise ContractError(f"unknown integrand {config.integrand!r}")
    return entry.build(config.dimension)


def payoff_values(spec: PayoffSpec, factor, u: np.ndarray) -> np.ndarray:
    """Discounted payoff at each u-point (the composed integrand)."""
    from .finance import payoff_eval

    return payoff_eval(spec, generate_path(u, spec.model, factor))


_net_cache: dict[tuple[int, int], PointSet] = {}


def _net_points(n: int, d: int) -> PointSet:
    key = (n, d)
    if key not in _net_cache:
        _net_cache[key] = generate_points(
            np.arange(n, dtype=np.uint64), d, depth=PRECISION_DEPTH
        )
    return _net_cache[key]


def _replicate_points(config: StudyConfig, n: int, k: int) -> np.ndarray:
    seed = ScrambleSeed(config.master_seed, k)
    if config.sampler == "scrambled_net":
        return scramble(_net_points(n, config.dimension), seed).coords
    return uniform_points(seed, n, config.dimension)


def replicate_estimates(
    config: StudyConfig, n: int, workers: int = 1
) -> np.ndarray:
    """The R independent estimates Ihat_k at sample size n.

    Replicate k is a pure function of (config, n, k); the aggregation
    order is fixed by k, so results match for any worker count.
    """
    f = _resolve_integrand(config)

    def one(k: int) -> float:
        u = _replicate_points(config, n, k)
        vals = np.asarray(f(u), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            i = int(np.argmin(np.isfinite(vals)))
            raise ContractError(
                f"integrand returned a non-finite value at point {u[i].tolist()} "
                f"(replicate {k})"
            )
        return float(vals.mean())

    ks = range(config.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(one, ks)))
    return np.array([one(k) for k in ks])


def expected_abs_error(config: StudyConfig, n: int, workers: int = 1) -> ErrorRecord:
    """Mean over replicates of |I - Ihat| at sample size n."""
    reference = _resolve_reference(config)
    estimates = replicate_estimates(config, n, workers)
    return ErrorRecord(n=n, reference=reference, estimates=tuple(estimates))


def fit_rate(
    records: Sequence[ErrorRecord],
    n_min: int | None = None,
    theoretical_exponent: float | None = None,
) -> RateFit:
    """Least-squares slope of the error decay on the log2-log2 scale.

    Records with zero mean absolute error carry no log-scale information
    and are excluded (their n values are reported on the fit).
    """
    usable, excluded = [], []
    for rec in records:
        if n_min is not None and rec.n < n_min:
            continue
        (excluded if rec.mean_abs_error == 0.0 else usable).append(rec)
    if len(usable) < 4:
        raise InsufficientDataError(
            f"rate fit needs >= 4 usable records, got {len(usable)}"
        )
    x = np.log2([rec.n for rec in usable])
    y = np.log2([rec.mean_abs_error for rec in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        n_range=(usable[0].n, usable[-1].n),
        theoretical_exponent=theoretical_exponent,
        excluded_n=tuple(rec.n for rec in excluded),
    )


@dataclass(frozen=True)
class StudyReport:
    """Full outcome of one rate study: records, fit, prediction, verdict."""

    config: StudyConfig
    records: tuple[ErrorRecord, ...]
    fit: RateFit
    exponent: float
    verdict: str

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"


def run_study(config: StudyConfig, workers: int = 1) -> StudyReport:
    """Measure errors across the n-grid, fit the rate, compare with theory.

    The prediction is an upper bound: the verdict is "consistent" when
    the empirical slope is at most -exponent + slack, so steeper decay
    also passes.
    """
    exponent = theoretical_exponent(
        config.dimension, config.irregular_dimension, config.max_growth
    )
    records = tuple(expected_abs_error(config, n, workers) for n in config.n_grid)
    fit = fit_rate(records, theoretical_exponent=exponent)
    consistent = fit.slope <= -exponent + config.slack
    return StudyReport(
        config=config,
        records=records,
        fit=fit,
        exponent=exponent,
        verdict="consistent" if consistent else "inconsistent",
    )


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def report_to_csv(report: StudyReport) -> str:
    """Per-n error table; one row per sample size."""
    lines = ["integrand,sampler,n,R,mean_abs_error,std_error"]
    for rec in report.records:
        lines.append(
            ",".join(
                [
                    report.config.integrand_name,
                    report.config.sampler,
                    str(rec.n),
                    str(rec.replications),
                    _g17(rec.mean_abs_error),
                    _g17(rec.std_error),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def report_to_json(report: StudyReport) -> str:
    """Full machine-readable report, deterministic for a given config."""
    cfg = report.config
    echo: dict = {
        "integrand": cfg.integrand_name,
        "dimension": cfg.dimension,
        "irregular_dimension": cfg.irregular_dimension,
        "max_growth": cfg.max_growth,
        "reference_value": cfg.reference_value,
        "n_grid": list(cfg.n_grid),
        "replications": cfg.replications,
        "master_seed": cfg.master_seed,
        "sampler": cfg.sampler,
        "slack": cfg.slack,
    }
    if isinstance(cfg.integrand, PayoffSpec):
        m = cfg.integrand.model
        echo["factor_method"] = cfg.factor_method
        echo["model"] = {
            "s0": m.s0,
            "r": m.r,
            "sigma": m.sigma,
            "T": m.maturity,
            "d": m.d,
            "K": m.strike,
        }
    obj = {
        "config": echo,
        "reference": report.records[0].reference if report.records else None,
        "records": [
            {
                "n": rec.n,
                "R": rec.replications,
                "mean_abs_error": rec.mean_abs_error,
                "std_error": rec.std_error,
                "abs_errors": rec.abs_errors.tolist(),
            }
            for rec in report.records
        ],
        "fit": {
            "slope": report.fit.slope,
            "intercept": report.fit.intercept,
            "r_squared": report.fit.r_squared,
            "n_range": list(report.fit.n_range),
            "excluded_n": list(report.fit.excluded_n),
        },
        "theoretical_exponent": report.exponent,
        "verdict": report.verdict,
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# Integrand catalog.  Reference values are exact closed forms except where
# a frozen high-precision quadrature constant is noted.


@dataclass(frozen=True)
class CatalogEntry:
    """A named test integrand with its declared geometry and exact mean."""

    name: str
    dimension: int | None  # None: any d >= 1
    irregular_dimension: int
    max_growth: float
    reference: Callable[[int], float]
    factory: Callable[[int], Callable[[np.ndarray], np.ndarray]]
    description: str = ""

    def build(self, d: int) -> Callable[[np.ndarray], np.ndarray]:
        if self.dimension is not None and d != self.dimension:
            raise ContractError(
                f"integrand {self.name!r} is defined for d={self.dimension}"
            )
        return self.factory(d)


def _smooth_product(d: int):
    scale = 1.5**-d

    def f(u: np.ndarray) -> np.ndarray:
        return np.prod(1.0 + u, axis=1) * scale

    return f


def _halfspace(d: int):
    def f(u: np.ndarray) -> np.ndarray:
        return (u[:, 0] + u[:, 1] < 1.0).astype(np.float64)

    return f


def _axis_box(d: int):
    def f(u: np.ndarray) -> np.ndarray:
        inside = (u[:, 0] < 0.5) & (u[:, 1] < 0.75)
        return (u[:, 0] * u[:, 1]) ** -0.1 * inside

    return f


def _axis_singular(d: int):
    def f(u: np.ndarray) -> np.ndarray:
        return (u[:, 0] * u[:, 1]) ** -0.1 * (u[:, 0] > 1.0 / 3.0)

    return f


def _corner_singular(d: int):
    def f(u: np.ndarray) -> np.ndarray:
        return (u[:, 0] * u[:, 1]) ** -0.4 * (u[:, 0] + u[:, 1] < 1.5)

    return f


# integral of (u1 u2)^-0.4 over {u1 + u2 < 3/2}; frozen from 40-digit
# quadrature of (1/0.6)^2 - int_{1/2}^1 u^-0.4 (1 - (3/2-u)^0.6)/0.6 du
_CORNER_SINGULAR_REF = 2.631626082020582

CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry(
            name="smooth_product",
            dimension=None,
            irregular_dimension=1,
            max_growth=0.0,
            reference=lambda d: 1.0,
            factory=_smooth_product,
            description="prod (1+u_i)/(3/2)^d: smooth, bounded variation",
        ),
        CatalogEntry(
            name="halfspace",
            dimension=2,
            irregular_dimension=2,
            max_growth=0.0,
            reference=lambda d: 0.5,
            factory=_halfspace,
            description="1{u1+u2<1}: discontinuity not axis-parallel",
        ),
        CatalogEntry(
            name="axis_box",
            dimension=2,
            irregular_dimension=1,
            max_growth=0.1,
            reference=lambda d: (0.5**0.9 / 0.9) * (0.75**0.9 / 0.9),
            factory=_axis_box,
            description="(u1 u2)^-0.1 on [0,1/2)x[0,3/4): fully axis-parallel",
        ),
        CatalogEntry(
            name="axis_singular",
            dimension=2,
            irregular_dimension=1,
            max_growth=0.1,
            reference=lambda d: ((1.0 - 3.0**-0.9) / 0.9) * (1.0 / 0.9),
            factory=_axis_singular,
            description="(u1 u2)^-0.1 1{u1>1/3}: one axis-parallel cut",
        ),
        CatalogEntry(
            name="corner_singular",
            dimension=2,
            irregular_dimension=2,
            max_growth=0.4,
            reference=lambda d: _CORNER_SINGULAR_REF,
            factory=_corner_singular,
            description="(u1 u2)^-0.4 1{u1+u2<3/2}: diagonal cut, strong corner",
        ),
    ]
}

# Payoff studies built on the shared market constants; the reference is the
# exact lognormal mean of the geometric payoff.
_PAYOFF_STUDIES = {
    "geometric_ot": ("ot", 1),
    "geometric_cholesky": ("cholesky", STANDARD_MODEL.d),
}

CATALOG_NAMES = tuple(CATALOG) + tuple(_PAYOFF_STUDIES)


def catalog_config(name: str, **overrides) -> StudyConfig:
    """StudyConfig for a named catalog integrand, with field overrides."""
    if name in _PAYOFF_STUDIES:
        method, d_u = _PAYOFF_STUDIES[name]
        base = dict(
            integrand=PayoffSpec("geometric_indicator_payoff", STANDARD_MODEL),
            dimension=STANDARD_MODEL.d,
            irregular_dimension=d_u,
            max_growth=0.0,
            reference_value="oracle:geometric_asian",
            factor_method=method,
        )
    elif name in CATALOG:
        entry = CATALOG[name]
        d = int(overrides.pop("dimension", entry.dimension or 2))
        base = dict(
            integrand=name,
            dimension=d,
            irregular_dimension=entry.irregular_dimension,
            max_growth=entry.max_growth,
            reference_value=entry.reference(d),
        )
    else:
        raise ContractError(f"unknown integrand {name!r}")
    base.update(overrides)
    return StudyConfig(**base)
