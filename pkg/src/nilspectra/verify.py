"""Self-checks bundled for the CLI and the acceptance suite.

Each suite returns a dict with the worst residual found, the tolerance it
was held to and a ``passed`` flag.
"""

from __future__ import annotations

import numpy as np

from .homogeneous import canonical_dilations, enumerate_df_weights
from .lie import (
    EXPONENTIAL,
    SPLIT,
    GroupElement,
    bch_multiply,
    build_dynin_folland,
    build_engel,
    build_heisenberg,
    df_group_inverse,
    df_group_multiply,
    gradation_defects,
    heisenberg_multiply,
    jacobi_residual,
    split_to_exponential,
)
from .oscillators.representation import random_split_element, verify_commutators, verify_homomorphism


def _report(name, residual, tol, **extra):
    return {"suite": name, "residual": float(residual), "tol": tol, "passed": bool(residual <= tol), **extra}


def standard_algebras(max_n: int = 4):
    out = [build_heisenberg(n) for n in range(1, max_n + 1)]
    out += [build_dynin_folland(n) for n in range(1, max_n + 1)]
    out.append(build_engel())
    return out


def jacobi_suite(max_n: int = 4) -> dict:
    worst = 0
    defects = 0
    for alg in standard_algebras(max_n):
        worst = max(worst, abs(jacobi_residual(alg)))
        defects += len(gradation_defects(alg))
    # exact arithmetic: anything but zero fails
    return {**_report("jacobi", worst, 0.0), "gradation_defects": defects,
            "passed": worst == 0 and defects == 0}


def dilation_suite(n: int = 1, max_weight: int = 3) -> dict:
    count = 0
    for alg in standard_algebras(n):
        canonical_dilations(alg)
        count += 1
    families = enumerate_df_weights(n, max_weight)
    return {"suite": "dilations", "algebras": count, "df_families": len(families), "passed": True}


def _elements(alg, chart, rng, scale=1.0):
    return GroupElement(alg, chart, tuple(rng.uniform(-scale, scale, alg.dim)))


def _gap(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def bch_suite(n: int = 1, trials: int = 100, seed: int = 0, tol: float = 1e-12) -> dict:
    """BCH product against the explicit Heisenberg law."""
    alg = build_heisenberg(n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g, h = _elements(alg, EXPONENTIAL, rng), _elements(alg, EXPONENTIAL, rng)
        c = bch_multiply(alg.element(g.coords), alg.element(h.coords))
        worst = max(worst, _gap(c.array(), heisenberg_multiply(g, h).array()))
    return _report("bch", worst, tol, trials=trials)


def df_law_suite(n: int = 1, trials: int = 100, seed: int = 0, tol: float = 1e-12) -> dict:
    """Identity, inverse and associativity of the split-coordinate law, plus the BCH cross-check."""
    alg = build_dynin_folland(n)
    rng = np.random.default_rng(seed)
    e = GroupElement.identity(alg, SPLIT)
    worst = {"identity": 0.0, "inverse": 0.0, "associativity": 0.0, "bch": 0.0}
    for _ in range(trials):
        a, b, c = (random_split_element(n, rng) for _ in range(3))
        worst["identity"] = max(worst["identity"], _gap(df_group_multiply(a, e).array(), a.array()),
                                _gap(df_group_multiply(e, a).array(), a.array()))
        zero = np.zeros(alg.dim)
        worst["inverse"] = max(worst["inverse"], _gap(df_group_multiply(a, df_group_inverse(a)).array(), zero),
                               _gap(df_group_multiply(df_group_inverse(a), a).array(), zero))
        left = df_group_multiply(df_group_multiply(a, b), c)
        right = df_group_multiply(a, df_group_multiply(b, c))
        worst["associativity"] = max(worst["associativity"], _gap(left.array(), right.array()))
        ea, eb = split_to_exponential(a), split_to_exponential(b)
        prod = bch_multiply(alg.element(ea.coords), alg.element(eb.coords))
        worst["bch"] = max(worst["bch"], _gap(split_to_exponential(df_group_multiply(a, b)).array(), prod.array()))
    return {**_report("df-law", max(worst.values()), tol, trials=trials), "parts": worst}


def rep_suite(n: int = 1, rhos=(1, -2, 0.5), trials: int = 50, seed: int = 7, tol: float = 1e-9) -> dict:
    worst = {str(r): verify_homomorphism(r, n, trials, seed) for r in rhos}
    return {**_report("rep", max(worst.values()), tol, trials=trials), "by_rho": worst}


def commutator_suite(n: int = 1, rhos=(1, -2, 0.5), tol: float = 1e-9) -> dict:
    worst = {str(r): verify_commutators(r, n) for r in rhos}
    return {**_report("commutators", max(worst.values()), tol), "by_rho": worst}

