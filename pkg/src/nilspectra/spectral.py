"""Counting exponents, eigenvalue growth, exponent fits and multiplier exponents.

For a positive Rockland form of homogeneous degree nu on a group whose
generic orbits are flat, the eigenvalue counting function of the operator
in the representation with central parameter rho behaves like the orbital
ball measure at radius lambda^(1/nu):

    N(lambda) ~ d_pi^-1 lambda^((Q - Q_center) / nu)

All exponents are exact Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import IncompatibleOperands, InvalidParameter, TooFewPoints
from .homogeneous import DilationFamily, canonical_dilations, validate_weights
from .lie import build_heisenberg


@dataclass(frozen=True)
class CountEstimate:
    lambda_exponent: Fraction
    rho_power: Fraction | None
    threshold: str
    source: str
    prefactor: float | None = None

    def to_json(self) -> dict:
        return {
            "lambda_exponent": self.lambda_exponent,
            "rho_power": self.rho_power,
            "threshold": self.threshold,
            "source": self.source,
            "prefactor": self.prefactor,
        }


def _positive_nu(nu) -> Fraction:
    nu = Fraction(nu)
    if nu <= 0:
        raise InvalidParameter("nu must be positive", nu=str(nu))
    return nu


def predict_counting(group: str, D: DilationFamily | None = None, nu=2, n: int | None = None,
                     Q: int | None = None, Q_center: int | None = None, d_pi: float | None = None) -> CountEstimate:
    """Predicted growth N(lambda) ~ |rho|^rho_power lambda^lambda_exponent.

    ``group`` is "df", "heisenberg" or "siz-generic"; the generic case takes
    (Q, Q_center, d_pi) directly and reports 1/d_pi as the prefactor.
    """
    nu = _positive_nu(nu)
    g = group.lower()
    if g in ("df", "dynin-folland"):
        if D is None or D.algebra.family != "dynin-folland":
            raise IncompatibleOperands("a Dynin-Folland dilation family is required")
        if n is not None and n != D.algebra.n:
            raise IncompatibleOperands("n does not match the dilation family", n=n, family_n=D.algebra.n)
        n = D.algebra.n
        exp = Fraction(D.Q - D.Q_center) / nu
        th = D.thetas
        closed = Fraction((2 * n + 1) * (th[0] + th[n] + th[2 * n])) / nu
        if closed != exp:
            raise IncompatibleOperands("dilation family fails the Dynin-Folland weight pattern")
        return CountEstimate(exp, Fraction(-(2 * n + 1)), _threshold(nu, D.Q_center), "dynin-folland")
    if g in ("heisenberg", "hn"):
        if D is None:
            D = canonical_dilations(build_heisenberg(n or 1))
        if D.algebra.family != "heisenberg":
            raise IncompatibleOperands("a Heisenberg dilation family is required")
        n = D.algebra.n
        exp = Fraction(D.Q - D.Q_center) / nu
        return CountEstimate(exp, Fraction(-n), _threshold(nu, D.Q_center), "heisenberg")
    if g in ("siz-generic", "generic"):
        if Q is None or Q_center is None or d_pi is None:
            if D is None:
                raise InvalidParameter("siz-generic needs (Q, Q_center, d_pi) or a dilation family and d_pi")
            Q, Q_center = D.Q, D.Q_center
        if d_pi is None or not d_pi > 0:
            raise InvalidParameter("formal dimension d_pi must be positive")
        if not 0 < Q_center < Q:
            raise InvalidParameter("need 0 < Q_center < Q", Q=Q, Q_center=Q_center)
        exp = Fraction(Q - Q_center) / nu
        return CountEstimate(exp, None, _threshold(nu, Q_center), "siz-generic", 1.0 / float(d_pi))
    raise InvalidParameter(f"unknown group {group!r}")


def _threshold(nu, q_center) -> str:
    p = Fraction(nu) / q_center
    return f"N = 0 for lambda < |rho|^({p})"


def predict_eigengrowth(estimate: CountEstimate) -> tuple[Fraction, Fraction | None]:
    """lambda_s ~ (|rho|^(-rho_power) s)^(1 / lambda_exponent)."""
    if estimate.lambda_exponent <= 0:
        raise InvalidParameter("counting exponent must be positive")
    s_exp = 1 / estimate.lambda_exponent
    rho = None if estimate.rho_power is None else -estimate.rho_power * s_exp
    return s_exp, rho


def anharmonic_r_exponents(theta1: int, theta2: int) -> CountEstimate:
    """Counting exponent of (-1)^theta2 d^(2 theta2) + (2 pi rho t)^(2 theta1) on R.

    Obtained from the Heisenberg group H_1 with weights (theta1, theta2,
    theta1 + theta2) and homogeneous degree nu = 2 theta1 theta2.
    """
    if int(theta1) != theta1 or int(theta2) != theta2 or theta1 < 1 or theta2 < 1:
        raise InvalidParameter("theta1 and theta2 must be positive integers")
    theta1, theta2 = int(theta1), int(theta2)
    D = validate_weights(build_heisenberg(1), (theta1, theta2, theta1 + theta2))
    g = math.gcd(theta1, theta2)
    # D is gcd-normalized, so nu scales with it
    est = predict_counting("heisenberg", D, Fraction(2 * theta1 * theta2, g))
    return replace(est, source="anharmonic-R")


def counting_pairs(eigenvalues: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """(lambda_s, N(lambda_s)) with N the number of eigenvalues <= lambda_s."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    counts = np.searchsorted(lam, lam, side="right")
    return lam, counts.astype(float)


def default_window(count: int, converged: int | None = None) -> tuple[int, int]:
    """Drop the first 10% and everything beyond the converged window (1-based, inclusive)."""
    hi = count if converged is None else min(count, converged)
    lo = int(0.1 * hi) + 1
    return lo, hi


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    intercept: float
    window: tuple[int, int]
    points: int

    def to_json(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr, "intercept": self.intercept,
                "window": list(self.window), "points": self.points}


def fit_exponent(data, window: tuple[int, int] | None = None, min_points: int = 10) -> ExponentFit:
    """Least-squares slope of log N against log lambda.

    ``data`` is either a sequence of eigenvalues (converted to counting pairs
    by rank) or an ``(m, 2)`` array of (lambda, N) pairs.  ``window`` is a
    1-based inclusive index range into the sorted data.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        arr = arr[np.argsort(arr[:, 0])]
        lam, N = arr[:, 0], arr[:, 1]
    else:
        lam, N = counting_pairs(arr)
    lo, hi = window if window is not None else (1, len(lam))
    if not 1 <= lo <= hi <= len(lam):
        raise InvalidParameter("window out of range", window=(lo, hi), size=len(lam))
    x = np.log(lam[lo - 1:hi])
    y = np.log(N[lo - 1:hi])
    if x.size < min_points:
        raise TooFewPoints(f"need at least {min_points} points in the fit window", points=int(x.size))
    if np.ptp(x) == 0:
        raise TooFewPoints("all eigenvalues in the window coincide")
    fit = stats.linregress(x, y)
    return ExponentFit(float(fit.slope), float(fit.stderr), float(fit.intercept), (lo, hi), int(x.size))


def fit_growth(eigenvalues: Sequence[float], window: tuple[int, int], min_points: int = 10) -> ExponentFit:
    """Slope of log lambda_s against log s over a 1-based rank window."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    lo, hi = window
    if not 1 <= lo <= hi <= len(lam):
        raise InvalidParameter("window out of range", window=(lo, hi), size=len(lam))
    s = np.arange(lo, hi + 1, dtype=float)
    if s.size < min_points:
        raise TooFewPoints(f"need at least {min_points} points in the fit window", points=int(s.size))
    fit = stats.linregress(np.log(s), np.log(lam[lo - 1:hi]))
    return ExponentFit(float(fit.slope), float(fit.stderr), float(fit.intercept), (lo, hi), int(s.size))


def _rational(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidParameter("exponents must be finite", value=x)
        return Fraction(x).limit_denominator(10**9)
    return Fraction(x)


@dataclass(frozen=True)
class MultiplierQuery:
    p: Fraction
    q: Fraction
    Q: int
    nu: int
    alpha: Fraction | None = None
    heat_exponent: Fraction | None = None
    gamma_threshold: Fraction | None = None
    sobolev_gap_displayed: Fraction | None = None
    sobolev_gap_normalized: Fraction | None = None

    @classmethod
    def make(cls, p, q, Q, nu) -> "MultiplierQuery":
        return cls(_rational(p), _rational(q), int(Q), int(nu))

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in (
            "p", "q", "Q", "nu", "alpha", "heat_exponent", "gamma_threshold",
            "sobolev_gap_displayed", "sobolev_gap_normalized")}


def multiplier_bounds(query: MultiplierQuery) -> MultiplierQuery:
    """Fill in alpha = Q/nu and the derived L^p -> L^q exponents.

    heat_exponent is the power of t in the heat semigroup bound,
    gamma_threshold the smallest admissible Bessel order, and the Sobolev gap
    s_1 - s_2 is given both as alpha (1/p - 1/q) and as Q (1/p - 1/q); the
    second matches Sobolev spaces normalized with (I + R)^(s/nu).
    """
    p, q = query.p, query.q
    if not (1 < p <= 2 <= q) or q == math.inf:
        raise InvalidParameter("need 1 < p <= 2 <= q < infinity", p=str(p), q=str(q))
    if query.Q <= 0 or query.nu <= 0:
        raise InvalidParameter("Q and nu must be positive", Q=query.Q, nu=query.nu)
    alpha = Fraction(query.Q, query.nu)
    gap = 1 / p - 1 / q
    return replace(
        query,
        alpha=alpha,
        heat_exponent=-alpha * gap,
        gamma_threshold=alpha * gap,
        sobolev_gap_displayed=alpha * gap,
        sobolev_gap_normalized=query.Q * gap,
    )
