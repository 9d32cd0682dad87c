"""Dirichlet-process posterior-predictive distributions.

The posterior expectation of a DP-distributed random CDF with
concentration c and base distribution B, given observations x_1..x_m, is
the mixture

    (c / (c + m)) * B(t)  +  (m / (c + m)) * ECDF(t),

a PredictiveCDF here: a base-distribution weight plus point masses at the
distinct observed values. The probability that a draw from one predictive
distribution is <= an independent draw from another is the Stieltjes
integral of the first CDF against the second, computed exactly over the
atomic parts and by adaptive Gauss-Legendre quadrature in the quantile
domain for the base-against-base cross term. As both concentrations go to
zero the probability reduces to the tie-inclusive pair-counting statistic
(number of pairs x_i <= y_j) / (m n), which prob_leq_weak_limit computes
with exact integer arithmetic.

All operations are pure functions of immutable inputs; callers may
evaluate many probes in parallel with no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .errors import (
    EmptyWeakPrior,
    InputError,
    MissingQuantile,
    NumericalError,
    QuadratureFailure,
)

_RAW_RESULT_SLACK = 1e-9  # beyond this, an out-of-range probability is a bug


@dataclass(frozen=True)
class BaseDistribution:
    """An evaluable CDF usable as a DP base measure.

    ``cdf`` and ``left_limit_cdf`` must accept numpy arrays and return
    arrays; ``left_limit_cdf`` is the left limit t -> cdf(t-), equal to
    ``cdf`` for continuous distributions. ``quantile`` (inverse CDF on
    (0,1)) is optional but required for the quadrature path and for
    Monte Carlo sampling.
    """

    cdf: Callable[[np.ndarray], np.ndarray]
    left_limit_cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    is_continuous: bool = True
    label: str = ""

    def check_on_grid(self, grid) -> None:
        """Verify CDF behavior on a sorted probe grid; raise InputError."""
        t = np.sort(np.asarray(grid, dtype=np.float64))
        f = np.asarray(self.cdf(t), dtype=np.float64)
        left = np.asarray(self.left_limit_cdf(t), dtype=np.float64)
        if np.any(f < -1e-12) or np.any(f > 1 + 1e-12):
            raise InputError(f"base {self.label!r}: cdf leaves [0,1] on grid")
        if np.any(np.diff(f) < -1e-12):
            raise InputError(f"base {self.label!r}: cdf is decreasing on grid")
        if np.any(left > f + 1e-12):
            raise InputError(
                f"base {self.label!r}: left limit exceeds cdf on grid")
        if self.is_continuous and np.any(np.abs(left - f) > 1e-12):
            raise InputError(
                f"base {self.label!r}: marked continuous but left limit "
                f"differs from cdf on grid")


def continuous_base(cdf, quantile=None, label="", vectorized=True
                    ) -> BaseDistribution:
    """Wrap a continuous CDF (and optional quantile) as a BaseDistribution.

    Pass vectorized=False for plain scalar callables; they are wrapped
    with numpy so the quadrature can evaluate them on arrays.
    """
    if not vectorized:
        cdf = np.vectorize(cdf, otypes=[np.float64])
        if quantile is not None:
            quantile = np.vectorize(quantile, otypes=[np.float64])
    return BaseDistribution(cdf=cdf, left_limit_cdf=cdf, quantile=quantile,
                            is_continuous=True, label=label)


def _from_scipy(dist, label) -> BaseDistribution:
    return BaseDistribution(cdf=dist.cdf, left_limit_cdf=dist.cdf,
                            quantile=dist.ppf, is_continuous=True,
                            label=label)


def normal_base(mu: float, sigma: float) -> BaseDistribution:
    if sigma <= 0:
        raise InputError(f"normal base needs sigma > 0, got {sigma}")
    return _from_scipy(stats.norm(mu, sigma), f"normal:{mu:g},{sigma:g}")


def uniform_base(a: float, b: float) -> BaseDistribution:
    if not b > a:
        raise InputError(f"uniform base needs a < b, got a={a}, b={b}")
    return _from_scipy(stats.uniform(a, b - a), f"uniform:{a:g},{b:g}")


def lognormal_base(mu: float, sigma: float) -> BaseDistribution:
    """Distribution of exp(N(mu, sigma^2))."""
    if sigma <= 0:
        raise InputError(f"lognormal base needs sigma > 0, got {sigma}")
    return _from_scipy(stats.lognorm(s=sigma, scale=np.exp(mu)),
                       f"lognormal:{mu:g},{sigma:g}")


@dataclass(frozen=True)
class DPConfig:
    """Concentrations and base distributions for the two groups.

    weak_prior=True takes the exact limit of both concentrations to zero,
    under which every probability becomes a pair-counting statistic and
    c, d and the bases are ignored.
    """

    c: float = 0.0
    d: float = 0.0
    f0: Optional[BaseDistribution] = None
    g0: Optional[BaseDistribution] = None
    weak_prior: bool = True

    def __post_init__(self):
        if self.c < 0 or self.d < 0:
            raise InputError(
                f"concentrations must be nonnegative, got c={self.c}, "
                f"d={self.d}")
        if not self.weak_prior:
            if self.c > 0 and self.f0 is None:
                raise InputError("c > 0 requires a case base distribution")
            if self.d > 0 and self.g0 is None:
                raise InputError("d > 0 requires a control base distribution")


@dataclass(frozen=True)
class QuadratureSpec:
    """Budget for the base-against-base integral."""

    tolerance: float = 1e-9
    max_evals: int = 100_000
    panel_order: int = 16


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class PredictiveCDF:
    """Mixture of a weighted base distribution and sorted point masses.

    With base_weight 0 this is the empirical distribution function of the
    observations; ``counts`` retains the integer multiplicity of each
    distinct location when the CDF was built from samples, which lets the
    all-atomic probability path stay integer-exact.
    """

    base_weight: float
    base: Optional[BaseDistribution]
    locations: np.ndarray
    masses: np.ndarray
    counts: Optional[np.ndarray] = None
    sample_size: int = 0
    cum_masses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=np.float64)
        mass = np.asarray(self.masses, dtype=np.float64)
        if loc.shape != mass.shape or loc.ndim != 1:
            raise InputError("atom locations and masses must be 1-d and "
                             "of equal length")
        if np.any(np.diff(loc) <= 0):
            raise InputError("atom locations must be strictly increasing")
        if np.any(mass <= 0):
            raise InputError("atom masses must be positive")
        if not 0.0 <= self.base_weight <= 1.0:
            raise InputError(f"base weight {self.base_weight} outside [0,1]")
        total = self.base_weight + mass.sum()
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"base weight plus atom masses is {total!r}, "
                             f"not 1")
        if self.base_weight > 0 and self.base is None:
            raise InputError("positive base weight requires a base "
                             "distribution")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)
        object.__setattr__(self, "cum_masses",
                           np.concatenate(([0.0], np.cumsum(mass))))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.masses.tolist()))


def posterior_predictive_cdf(samples, concentration: float,
                             base: Optional[BaseDistribution] = None
                             ) -> PredictiveCDF:
    """Posterior-expectation CDF given observed samples.

    The base distribution keeps weight c/(c+m) and each distinct sample
    value x gets mass count(x)/(c+m). With concentration 0 this is the
    empirical CDF; with no samples it is the base itself.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        x = x.reshape(-1)
    if not np.all(np.isfinite(x)):
        raise InputError("samples must be finite")
    if concentration < 0:
        raise InputError(f"concentration must be nonnegative, got "
                         f"{concentration}")
    m = x.size
    if concentration == 0 and m == 0:
        raise EmptyWeakPrior()
    if concentration > 0 and base is None:
        raise InputError("positive concentration requires a base "
                         "distribution")
    locations, counts = np.unique(x, return_counts=True)
    denom = concentration + m
    return PredictiveCDF(
        base_weight=concentration / denom,
        base=base,
        locations=locations,
        masses=counts / denom,
        counts=counts,
        sample_size=m,
    )


def empirical_cdf(samples) -> PredictiveCDF:
    """Empirical distribution function as a PredictiveCDF."""
    return posterior_predictive_cdf(samples, 0.0)


def eval_cdf(f: PredictiveCDF, t):
    """Evaluate the CDF at t (scalar or array); right-continuous."""
    return _eval(f, t, side="right")


def eval_cdf_left(f: PredictiveCDF, t):
    """Left limit of the CDF at t: base left limit plus mass strictly
    below t."""
    return _eval(f, t, side="left")


def _eval(f: PredictiveCDF, t, side):
    t_arr = np.asarray(t, dtype=np.float64)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    out = f.cum_masses[np.searchsorted(f.locations, t_arr, side=side)]
    if f.base_weight > 0:
        base_fn = f.base.cdf if side == "right" else f.base.left_limit_cdf
        out = out + f.base_weight * np.asarray(base_fn(t_arr),
                                               dtype=np.float64)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def prob_leq_weak_limit(x, y) -> float:
    """Fraction of pairs with x_i <= y_j, ties counting as <=.

    Exact integer pair count over m*n; equals the zero-concentration limit
    of prob_leq.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size == 0 or y.size == 0:
        raise EmptyWeakPrior()
    count = leq_pair_count(x, y)
    return count / (x.size * y.size)


def leq_pair_count(x, y) -> int:
    """Number of pairs (i, j) with x_i <= y_j."""
    sorted_x = np.sort(np.asarray(x, dtype=np.float64).reshape(-1))
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    return int(np.searchsorted(sorted_x, y, side="right").sum())


def prob_leq(fhat: PredictiveCDF, ghat: PredictiveCDF,
             quadrature: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability that a draw from fhat is <= an independent draw from
    ghat.

    Decomposes the Stieltjes integral of fhat's CDF against ghat's
    measure: ghat's atoms contribute mass times fhat's CDF at the atom;
    ghat's base part contributes fhat's atoms against the base survival
    at their left limits plus the base-against-base integral, which uses
    the closed form 1/2 when both bases are the same continuous object
    and quantile-domain quadrature otherwise.
    """
    if (fhat.base_weight == 0.0 and ghat.base_weight == 0.0
            and fhat.counts is not None and ghat.counts is not None):
        # all-atomic with known multiplicities: integer-exact path
        prefix = np.concatenate(([0], np.cumsum(fhat.counts)))
        below = prefix[np.searchsorted(fhat.locations, ghat.locations,
                                       side="right")]
        count = int(np.dot(below, ghat.counts))
        return count / (fhat.sample_size * ghat.sample_size)

    raw = 0.0
    if ghat.locations.size:
        raw += float(np.dot(ghat.masses,
                            _eval(fhat, ghat.locations, side="right")))
    if ghat.base_weight > 0:
        base_part = 0.0
        if fhat.locations.size:
            g0_left = np.asarray(
                ghat.base.left_limit_cdf(fhat.locations), dtype=np.float64)
            base_part += float(np.dot(fhat.masses, 1.0 - g0_left))
        if fhat.base_weight > 0:
            base_part += fhat.base_weight * _base_cross_integral(
                fhat.base, ghat.base, quadrature)
        raw += ghat.base_weight * base_part

    if raw < -_RAW_RESULT_SLACK or raw > 1.0 + _RAW_RESULT_SLACK:
        raise NumericalError(
            f"probability {raw!r} outside [0,1] beyond rounding slack")
    return min(max(raw, 0.0), 1.0)


def _base_cross_integral(f0: BaseDistribution, g0: BaseDistribution,
                         quadrature: QuadratureSpec) -> float:
    """Integral of f0's CDF against g0's measure."""
    if f0 is g0 and f0.is_continuous:
        return 0.5
    if g0.quantile is None:
        raise MissingQuantile()

    def integrand(u):
        return np.asarray(f0.cdf(np.asarray(g0.quantile(u),
                                            dtype=np.float64)),
                          dtype=np.float64)

    return integrate_unit_interval(integrand, quadrature)


def integrate_unit_interval(f, quadrature: QuadratureSpec = DEFAULT_QUADRATURE
                            ) -> float:
    """Integrate a bounded vectorized function over (0, 1).

    Adaptive interval bisection with a fixed-order Gauss-Legendre rule per
    panel; a panel is accepted when the whole-panel estimate and the sum
    of its halves agree within tolerance scaled by panel width. Nodes are
    strictly interior, so integrands defined only on the open interval
    (quantile compositions) are safe.
    """
    nodes, weights = np.polynomial.legendre.leggauss(quadrature.panel_order)
    evals = 0

    def panel(a, b):
        nonlocal evals
        half = 0.5 * (b - a)
        u = 0.5 * (a + b) + half * nodes
        vals = np.asarray(f(u), dtype=np.float64)
        evals += u.size
        return half * float(np.dot(weights, vals))

    total = 0.0
    stack = [(0.0, 1.0, panel(0.0, 1.0))]
    while stack:
        a, b, whole = stack.pop()
        if evals > quadrature.max_evals:
            raise QuadratureFailure(quadrature.tolerance,
                                    quadrature.max_evals)
        mid = 0.5 * (a + b)
        left = panel(a, mid)
        right = panel(mid, b)
        refined = left + right
        width = b - a
        if abs(refined - whole) <= quadrature.tolerance * width \
                or width < 1e-14:
            total += refined
        else:
            stack.append((a, mid, left))
            stack.append((mid, b, right))
    return total
