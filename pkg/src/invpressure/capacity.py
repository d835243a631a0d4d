"""Upper capacity pressure of weighted word languages and its Bowen-equation root.

The separated-set sum over length-n words, log sum_{s in L^n} exp(sum_k w(s_k)),
is finite-horizon data; its (1/(n*tau))-normalized limsup is the pressure.  For
transition-relation languages the limit equals (1/tau) log of the spectral
radius of the weighted transition matrix, which serves as the oracle.  The
root solver inverts beta -> pressure(phi - beta*psi) by bisection, with an
a-priori error certificate from the slope bound min_i w_psi(i)/tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, PreconditionError
from .symbolic import (
    MAX_TREE_NODES,
    MAX_WORDS,
    NEG_INF,
    ItineraryLanguage,
    PerSymbolWeights,
    SftLanguage,
    WordLanguage,
    build_cylinder_tree,
    combine_weights,
    logsumexp,
    word_weight,
)


def level_log_sums(lang: WordLanguage, weights: PerSymbolWeights, n_max: int) -> list[float]:
    """log sum_{s in L^n} exp(weight(s)) for n = 1..n_max, by forward recursion.

    Masses are aggregated per continuation unit, which is exact for additive
    weights; no word is ever enumerated, so n_max in the hundreds is cheap.
    """
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    masses: dict[object, float] = {}
    for unit, sym in lang.initial_units():
        w = weights[sym]
        masses[unit] = w if unit not in masses else np.logaddexp(masses[unit], w)
    out = [logsumexp(masses.values())]
    for _ in range(n_max - 1):
        nxt: dict[object, float] = {}
        for unit, mass in masses.items():
            for u2, sym in lang.unit_successors(unit):
                v = mass + weights[sym]
                nxt[u2] = v if u2 not in nxt else float(np.logaddexp(nxt[u2], v))
        masses = nxt
        out.append(logsumexp(masses.values()))
    return out


def separated_sum(
    lang: WordLanguage, weights: PerSymbolWeights, n: int, max_words: int = MAX_WORDS
) -> float:
    """log of the maximal separated-set sum at horizon n.

    Maximal separated sets pick exactly one point per nonempty cylinder, so
    this is the plain sum over admissible length-n words, enumerated
    explicitly (the brute-force route; see ``level_log_sums`` for the fast one).
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    vals = [word_weight(s, weights) for s in lang.iter_words(n, max_words)]
    return logsumexp(vals)


def spanning_sum(
    lang: WordLanguage, weights: PerSymbolWeights, n: int, max_nodes: int = MAX_TREE_NODES
) -> float:
    """log of the minimal spanning-set sum at horizon n.

    Minimal spanning sets also take one representative per cylinder; computed
    independently of ``separated_sum`` by a greedy cover of level-n cylinder
    tree nodes (one representative each, weights read off the tree).
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    tree = build_cylinder_tree(lang, [weights], n, max_nodes)
    covered: set[tuple[int, ...]] = set()
    vals = []
    for node in tree.level(n):
        if node.word not in covered:
            covered.add(node.word)
            vals.append(node.cum[0])
    return logsumexp(vals)


@dataclass(frozen=True)
class PressureEstimate:
    """Finite-horizon pressure sequence with tail-window limsup/liminf estimates."""

    values: tuple[tuple[int, float], ...]
    limsup_estimate: float
    liminf_estimate: float
    oracle: float | None
    tail_window: int

    def __post_init__(self):
        if self.liminf_estimate > self.limsup_estimate:
            raise PreconditionError("liminf estimate exceeds limsup estimate")


def spectral_pressure(lang: SftLanguage, weights: PerSymbolWeights) -> float:
    """(1/tau) log of the spectral radius of M[i,j] = [i->j] * exp(w(i)).

    Power iteration from the all-ones vector, with Collatz-Wielandt quotient
    brackets as the stopping test at relative tolerance 1e-12.  The iteration
    runs on M + I so that imprimitive relations still converge; the radius of
    M is recovered by subtracting the shift.
    """
    if not isinstance(lang, SftLanguage):
        raise PreconditionError("spectral pressure needs a transition-relation language")
    syms = lang.symbols
    q = len(syms)
    idx = {s: k for k, s in enumerate(syms)}
    M = np.zeros((q, q))
    for i in syms:
        for j in lang.successors(i):
            M[idx[i], idx[j]] = math.exp(weights[i])
    rtol = 1e-12
    x = np.ones(q)
    rho = None
    for _ in range(200_000):
        y = M @ x
        quot = y / x
        lo, hi = float(quot.min()), float(quot.max())
        if hi <= 0.0:
            return NEG_INF
        if hi - lo <= rtol * hi:
            rho = 0.5 * (lo + hi)
            break
        x = y + x
        x /= x.max()
    if rho is None:
        # reducible relation: quotient brackets stall; fall back to the dense spectrum
        eigs = np.linalg.eigvals(M)
        rho = float(np.max(np.abs(eigs)))
        if rho == 0.0:
            return NEG_INF
    return math.log(rho) / weights.tau


def cycle_mean_pressure(lang: ItineraryLanguage, weights: PerSymbolWeights) -> float:
    """Exact pressure of an itinerary language: best per-step rate over cycles.

    Deterministic itineraries are eventually periodic, so the level sums are
    finitely many exponentials and the limit is the largest cycle mean of the
    symbol weights, divided by tau.
    """
    best = NEG_INF
    for cycle in lang.cycles():
        mean = math.fsum(weights[lang.label[x]] for x in cycle) / len(cycle)
        best = max(best, mean / weights.tau)
    return best


def pressure_oracle(lang: WordLanguage, weights: PerSymbolWeights) -> float | None:
    """Exact limiting pressure when the presentation admits one."""
    if isinstance(lang, SftLanguage):
        return spectral_pressure(lang, weights)
    if isinstance(lang, ItineraryLanguage):
        return cycle_mean_pressure(lang, weights)
    return None


def capacity_pressure(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    n_max: int,
    tail_window: int = 10,
) -> PressureEstimate:
    """Finite-horizon capacity pressure with tail-window limsup/liminf.

    The limsup is estimated, never extrapolated: the reported value is the
    max of the final ``tail_window`` entries of (1/(n*tau)) log m(n), and the
    exact spectral (or cycle-mean) limit is attached as the oracle when the
    presentation provides one.
    """
    if not 1 <= tail_window <= n_max:
        raise PreconditionError("need n_max >= tail_window >= 1")
    tau = weights.tau
    sums = level_log_sums(lang, weights, n_max)
    values = tuple((n, sums[n - 1] / (n * tau)) for n in range(1, n_max + 1))
    tail = [v for _, v in values[-tail_window:]]
    return PressureEstimate(
        values=values,
        limsup_estimate=max(tail),
        liminf_estimate=min(tail),
        oracle=pressure_oracle(lang, weights),
        tail_window=tail_window,
    )


def pressure_difference(
    lang: WordLanguage,
    w_phi: PerSymbolWeights,
    w_psi: PerSymbolWeights,
    beta: float,
    n_max: int = 120,
    tail_window: int = 10,
) -> float:
    """Pressure of the tilted weights phi - beta*psi (cocycle linearity is exact).

    Uses the exact oracle when the language admits one, otherwise the
    finite-horizon limsup estimate at n_max.
    """
    w_psi.require_positive("psi weights")
    tilted = combine_weights(w_phi, w_psi, beta)
    exact = pressure_oracle(lang, tilted)
    if exact is not None:
        return exact
    return capacity_pressure(lang, tilted, n_max, tail_window).limsup_estimate


@dataclass(frozen=True)
class RootCertificate:
    """Approximate Bowen root with residual and a slope-based error bound."""

    beta_hat: float
    residual: float
    error_bound: float
    bracket: tuple[float, float]
    iterations: int

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo <= self.beta_hat <= hi:
            raise PreconditionError("root estimate outside its bracket")


def bowen_root(
    lang: WordLanguage,
    w_phi: PerSymbolWeights,
    w_psi: PerSymbolWeights,
    tol: float = 1e-9,
    n_max: int = 120,
) -> RootCertificate:
    """Unique root of pressure(phi - beta*psi) = 0 by certified bisection.

    The map is strictly decreasing with slope at most -m where
    m = min_i w_psi(i)/tau, so the initial bracket
    [min(0, P/m), max(0, P/m)] with P = pressure(phi) is rigorous and
    |Phi(beta_hat)|/m bounds the distance to the true root.  Stops when that
    bound drops below ``tol`` (200-iteration hard cap).
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    w_psi.require_positive("psi weights")
    m = w_psi.rate_min()

    def phi(beta: float) -> float:
        return pressure_difference(lang, w_phi, w_psi, beta, n_max)

    p0 = phi(0.0)
    lo = min(0.0, p0 / m)
    hi = max(0.0, p0 / m)
    pad = max(tol, 1e-3 * max(1.0, abs(p0) / m))
    lo -= pad
    hi += pad
    f_lo, f_hi = phi(lo), phi(hi)
    expansions = 0
    while f_lo < 0.0 or f_hi > 0.0:
        expansions += 1
        if expansions > 60:
            raise GuardError(
                f"no sign change on [{lo}, {hi}]: Phi({lo})={f_lo}, Phi({hi})={f_hi}"
            )
        width = hi - lo
        if f_lo < 0.0:
            lo -= width
            f_lo = phi(lo)
        if f_hi > 0.0:
            hi += width
            f_hi = phi(hi)

    beta = 0.5 * (lo + hi)
    res = phi(beta)
    iters = 0
    while abs(res) / m > tol and iters < 200:
        iters += 1
        if res > 0.0:
            lo = beta
        else:
            hi = beta
        beta = 0.5 * (lo + hi)
        res = phi(beta)
    return RootCertificate(beta, res, abs(res) / m, (lo, hi), iters)
