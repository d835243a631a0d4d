"""Cylinder-cover outer sums, critical exponents, and the exact tree dual.

All quantities here are infima of weighted sums over covers of a target set
by cylinders with depths in [N, D].  Finite resolution D replaces countable
families: reported values are exact for the truncated problem and monotone
in D.  On the laminar cylinder family the fractional cover optimum equals
the antichain optimum (min-cut on a tree), and the max-flow that certifies
it doubles as the Frostman-type measure.

Critical exponents (the pressure-like jump locations) are found by
bisection on the lambda at which the truncated optimum crosses 1.  For
cylinder-presented targets the crossing is measured relative to the target
words' own cover cost, which removes the fixed head prefactor and makes the
detector track the subtree jump (the whole-space case keeps the literal
threshold 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import GuardError, PreconditionError
from .symbolic import (
    MAX_TREE_NODES,
    NEG_INF,
    CylinderNode,
    PerSymbolWeights,
    WordLanguage,
    build_cylinder_tree,
    logsumexp,
    zero_weights,
)
from .capacity import RootCertificate


@dataclass(frozen=True)
class SubsetSpec:
    """Target set: the whole space, or a union of admissible cylinders.

    Cylinder lists are normalized to prefix-free antichains (a word with a
    listed prefix is redundant and dropped).
    """

    words: tuple[tuple[int, ...], ...] | None

    @staticmethod
    def whole_space() -> "SubsetSpec":
        return SubsetSpec(None)

    @staticmethod
    def cylinders(words: Sequence[Sequence[int]]) -> "SubsetSpec":
        uniq = sorted({tuple(w) for w in words}, key=lambda w: (len(w), w))
        kept: list[tuple[int, ...]] = []
        for w in uniq:
            if not any(w[: len(p)] == p for p in kept):
                kept.append(w)
        return SubsetSpec(tuple(sorted(kept)))

    @property
    def is_whole_space(self) -> bool:
        return self.words is None

    @property
    def is_empty(self) -> bool:
        return self.words is not None and not self.words


def _advance(lang: WordLanguage, unit: object, sym: int) -> object | None:
    succ = lang.initial_units() if unit is None else lang.unit_successors(unit)
    for u, s in succ:
        if s == sym:
            return u
    return None


class _Trie:
    """Prefix tree of the target words, annotated with continuation units."""

    __slots__ = ("children", "terminal", "unit", "depth", "acc")

    def __init__(self, unit, depth):
        self.children: dict[int, _Trie] = {}
        self.terminal = False
        self.unit = unit
        self.depth = depth
        self.acc = 0.0  # absolute log cost of the word ending here


def _build_trie(lang: WordLanguage, Z: SubsetSpec, step: Mapping[int, float], D: int) -> _Trie:
    root = _Trie(None, 0)
    for word in Z.words or ():
        if not word:
            raise PreconditionError("empty word cannot present a cylinder")
        if len(word) > D:
            raise PreconditionError(f"target word {word} deeper than resolution D={D}")
        node, unit = root, None
        for sym in word:
            unit = _advance(lang, unit, sym)
            if unit is None:
                raise PreconditionError(f"target word {word} is not admissible")
            if sym not in node.children:
                child = _Trie(unit, node.depth + 1)
                child.acc = node.acc + step[sym]
                node.children[sym] = child
            node = node.children[sym]
        node.terminal = True
    return root


def _steps(weights: PerSymbolWeights, length_coeff: float, weight_coeff: float) -> dict[int, float]:
    return {s: length_coeff + weight_coeff * weights[s] for s in weights.symbols}


def _log_cover_optimum(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    length_coeff: float,
    weight_coeff: float,
    Z: SubsetSpec,
    N: int,
    D: int,
) -> float:
    """log of the optimal cover cost, by a unit-factored min recursion.

    The cost of a word factors into per-symbol steps, so the optimal
    multiplier below a node depends only on (continuation unit, depth);
    memoizing it makes one evaluation O(units * D) regardless of |L^D|.
    """
    if not 1 <= N <= D:
        raise PreconditionError(f"need 1 <= N <= D, got N={N}, D={D}")
    if Z.is_empty:
        return NEG_INF
    step = _steps(weights, length_coeff, weight_coeff)
    memo: dict[tuple[object, int], float] = {}

    def alpha(unit: object, n: int) -> float:
        if n == D:
            return 0.0
        key = (unit, n)
        if key in memo:
            return memo[key]
        ls = logsumexp(
            step[s] + alpha(u2, n + 1) for u2, s in lang.unit_successors(unit)
        )
        val = min(0.0, ls) if n >= N else ls
        memo[key] = val
        return val

    if Z.is_whole_space:
        return logsumexp(step[s] + alpha(u, 1) for u, s in lang.initial_units())

    trie = _build_trie(lang, Z, step, D)

    def tval(node: _Trie) -> float:
        if node.terminal:
            return node.acc + alpha(node.unit, node.depth)
        ls = logsumexp(tval(c) for c in node.children.values())
        return min(node.acc, ls) if node.depth >= N else ls

    return logsumexp(tval(c) for c in trie.children.values())


def _log_head(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    length_coeff: float,
    weight_coeff: float,
    Z: SubsetSpec,
    D: int,
) -> float:
    """log cost of covering Z by its own defining words (the head prefactor)."""
    if Z.is_whole_space:
        return 0.0
    step = _steps(weights, length_coeff, weight_coeff)
    total = NEG_INF
    for word in Z.words:
        acc = 0.0
        unit = None
        for sym in word:
            unit = _advance(lang, unit, sym)
            if unit is None:
                raise PreconditionError(f"target word {word} is not admissible")
            acc += step[sym]
        total = logsumexp([total, acc])
    return total


def cover_value(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
) -> float:
    """Optimal cover cost with per-cylinder cost exp(-lam*n*tau + weight(s))."""
    return math.exp(_log_cover_optimum(lang, weights, -lam * weights.tau, 1.0, Z, N, D))


def bs_cover_value(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
) -> float:
    """Optimal cover cost with per-cylinder cost exp(-lam*weight(s)); weights > 0."""
    weights.require_positive("dimension weight")
    return math.exp(_log_cover_optimum(lang, weights, 0.0, -lam, Z, N, D))


def word_cover_value(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
    max_nodes: int = MAX_TREE_NODES,
) -> float:
    """Same optimum expressed over explicit admissible words.

    Walks the materialized cylinder tree with no factoring, as an
    independent route; the word/cylinder bijection makes it agree with
    ``cover_value`` on every instance.
    """
    if not 1 <= N <= D:
        raise PreconditionError(f"need 1 <= N <= D, got N={N}, D={D}")
    if Z.is_empty:
        return 0.0
    length_coeff = -lam * weights.tau
    tree = build_cylinder_tree(lang, [weights], D, max_nodes)
    trie = _build_trie(lang, Z, _steps(weights, length_coeff, 1.0), D)

    def value(node: CylinderNode, zstate) -> float:
        if zstate is None:
            return NEG_INF
        if isinstance(zstate, _Trie) and zstate.terminal:
            zstate = "inside"
        own = length_coeff * node.depth + node.cum[0]
        if node.depth == D:
            return own
        parts = []
        for child in node.children:
            sym = child.word[-1]
            sub = zstate if zstate == "inside" else zstate.children.get(sym)
            parts.append(value(child, sub))
        ls = logsumexp(parts)
        return min(own, ls) if node.depth >= N else ls

    zroot = "inside" if Z.is_whole_space else trie
    parts = []
    for child in tree.root.children:
        sub = zroot if zroot == "inside" else zroot.children.get(child.word[-1])
        parts.append(value(child, sub))
    return math.exp(logsumexp(parts))


@dataclass(frozen=True)
class CoverSolution:
    """An optimal antichain cover at one (lam, N, D), with per-word costs."""

    words: tuple[tuple[int, ...], ...]
    costs: tuple[float, ...]
    cost: float
    lam: float
    N: int
    D: int


def cover_solution(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
    variant: str = "time",
    max_nodes: int = MAX_TREE_NODES,
) -> CoverSolution:
    """Materialize one optimal cover (ties resolve to the shallower cylinder)."""
    if variant == "time":
        length_coeff, weight_coeff = -lam * weights.tau, 1.0
    elif variant == "weight":
        weights.require_positive("dimension weight")
        length_coeff, weight_coeff = 0.0, -lam
    else:
        raise PreconditionError(f"unknown cover variant {variant!r}")
    if not 1 <= N <= D:
        raise PreconditionError(f"need 1 <= N <= D, got N={N}, D={D}")
    chosen: list[tuple[tuple[int, ...], float]] = []
    if not Z.is_empty:
        tree = build_cylinder_tree(lang, [weights], D, max_nodes)
        trie = _build_trie(lang, Z, _steps(weights, length_coeff, weight_coeff), D)

        def logval(node: CylinderNode, zstate) -> float:
            if zstate is None:
                return NEG_INF
            if isinstance(zstate, _Trie) and zstate.terminal:
                zstate = "inside"
            own = length_coeff * node.depth + weight_coeff * node.cum[0]
            if node.depth == D:
                return own
            ls = logsumexp(
                logval(c, zstate if zstate == "inside" else zstate.children.get(c.word[-1]))
                for c in node.children
            )
            return min(own, ls) if node.depth >= N else ls

        def collect(node: CylinderNode, zstate) -> None:
            if zstate is None:
                return
            if isinstance(zstate, _Trie) and zstate.terminal:
                zstate = "inside"
            own = length_coeff * node.depth + weight_coeff * node.cum[0]
            take_own = node.depth >= N and (
                node.depth == D
                or own
                <= logsumexp(
                    logval(c, zstate if zstate == "inside" else zstate.children.get(c.word[-1]))
                    for c in node.children
                )
            )
            if take_own:
                chosen.append((node.word, math.exp(own)))
                return
            for c in node.children:
                collect(c, zstate if zstate == "inside" else zstate.children.get(c.word[-1]))

        zroot = "inside" if Z.is_whole_space else trie
        for child in tree.root.children:
            collect(child, zroot if zroot == "inside" else zroot.children.get(child.word[-1]))
    chosen.sort()
    words = tuple(w for w, _ in chosen)
    costs = tuple(c for _, c in chosen)
    return CoverSolution(words, costs, math.fsum(costs), lam, N, D)


# ---------------------------------------------------------------------------
# critical exponents


@dataclass(frozen=True)
class JumpEstimate:
    """Bisected location of the infinity-to-zero jump of a cover sum."""

    critical: float
    value_below: float
    value_above: float
    iterations: int
    bracket: tuple[float, float]


def _bisect_jump(detect, lo: float, hi: float, tol: float) -> tuple[float, int, tuple[float, float]]:
    """Bisect the sign change of ``detect`` (positive below, negative above)."""
    g_lo, g_hi = detect(lo), detect(hi)
    expansions = 0
    while g_lo < 0.0 or g_hi > 0.0:
        expansions += 1
        if expansions > 80:
            raise GuardError(f"no jump bracket found on [{lo}, {hi}]")
        width = max(hi - lo, 1.0)
        if g_lo < 0.0:
            lo -= width
            g_lo = detect(lo)
        if g_hi > 0.0:
            hi += width
            g_hi = detect(hi)
    iters = 0
    while hi - lo > tol and iters < 200:
        iters += 1
        mid = 0.5 * (lo + hi)
        if detect(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), iters, (lo, hi)


@dataclass(frozen=True)
class PpPressure:
    """Critical time exponent of the lam-discounted cover sums."""

    value: float
    value_below: float
    value_above: float
    iterations: int
    N: int
    D: int


def pp_pressure(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec | None = None,
    N: int = 1,
    D: int = 12,
    tol: float = 1e-9,
) -> PpPressure:
    """Critical lambda of the cover sums with cost exp(-lam*n*tau + weight).

    Bisects where the truncated optimum crosses the head-normalized
    threshold; detection ignores cover elements at or above the target
    words' own depths, which is where the limit lives.
    """
    Z = Z or SubsetSpec.whole_space()
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    if Z.is_empty:
        raise PreconditionError("critical exponent of the empty set is undefined")
    tau = weights.tau
    n_detect = N if Z.is_whole_space else max(N, max(len(w) for w in Z.words) + 1)
    if n_detect > D:
        raise PreconditionError("resolution D too shallow for the target words")

    def detect(lam: float) -> float:
        val = _log_cover_optimum(lang, weights, -lam * tau, 1.0, Z, n_detect, D)
        head = _log_head(lang, weights, -lam * tau, 1.0, Z, D)
        return val - head

    span = weights.rate_absmax() + math.log(max(2, len(lang.symbols))) / tau + 1.0
    crit, iters, bracket = _bisect_jump(detect, -span, span, tol)
    return PpPressure(
        value=crit,
        value_below=cover_value(lang, weights, Z, max(bracket[0] - tol, crit - 2 * tol), N, D),
        value_above=cover_value(lang, weights, Z, bracket[1] + tol, N, D),
        iterations=iters,
        N=N,
        D=D,
    )


def bs_jump(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec | None = None,
    N: int = 1,
    D: int = 12,
    tol: float = 1e-9,
) -> JumpEstimate:
    """Direct jump of the weight-cost cover sums exp(-lam*weight(s))."""
    Z = Z or SubsetSpec.whole_space()
    weights.require_positive("dimension weight")
    if Z.is_empty:
        raise PreconditionError("critical exponent of the empty set is undefined")
    n_detect = N if Z.is_whole_space else max(N, max(len(w) for w in Z.words) + 1)
    if n_detect > D:
        raise PreconditionError("resolution D too shallow for the target words")

    def detect(lam: float) -> float:
        val = _log_cover_optimum(lang, weights, 0.0, -lam, Z, n_detect, D)
        head = _log_head(lang, weights, 0.0, -lam, Z, D)
        return val - head

    hi0 = math.log(max(2, len(lang.symbols))) / (weights.tau * weights.rate_min()) + 1.0
    crit, iters, bracket = _bisect_jump(detect, -1.0, hi0, tol)
    return JumpEstimate(
        critical=crit,
        value_below=bs_cover_value(lang, weights, Z, max(bracket[0] - tol, crit - 2 * tol), N, D),
        value_above=bs_cover_value(lang, weights, Z, bracket[1] + tol, N, D),
        iterations=iters,
        bracket=bracket,
    )


@dataclass(frozen=True)
class BsDimension:
    """Dimension via the pressure root, with the direct jump as cross-check."""

    value: float
    certificate: RootCertificate
    jump: JumpEstimate

    @property
    def root_jump_gap(self) -> float:
        return abs(self.value - self.jump.critical)


def bs_dimension(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec | None = None,
    tol: float = 1e-6,
    N: int = 1,
    D: int = 12,
) -> BsDimension:
    """Unique root t* of pp_pressure(-t*weights) = 0, certified by bisection.

    The critical-exponent map t -> pp_pressure(-t*w) decreases with slope in
    [-max_rate, -min_rate], so t* lies in [dim/max_rate, dim/min_rate] where
    dim is the zero-potential critical exponent; |residual|/min_rate bounds
    the root error.  The direct weight-cost jump is computed alongside and
    reported for agreement checks.
    """
    Z = Z or SubsetSpec.whole_space()
    weights.require_positive("dimension weight")
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    inner = tol / 16.0
    m_rate, big_rate = weights.rate_min(), weights.rate_max()

    def phi(t: float) -> float:
        return pp_pressure(lang, weights.scaled(-t), Z, N, D, inner).value

    dim = pp_pressure(lang, zero_weights(weights.symbols, weights.tau), Z, N, D, inner).value
    lo = dim / big_rate
    hi = dim / m_rate
    pad = max(tol, 0.05 * (hi - lo) + 1e-3)
    lo, hi = lo - pad, hi + pad
    f_lo, f_hi = phi(lo), phi(hi)
    expansions = 0
    while f_lo < 0.0 or f_hi > 0.0:
        expansions += 1
        if expansions > 60:
            raise GuardError(f"no root bracket on [{lo}, {hi}]")
        width = max(hi - lo, 1.0)
        if f_lo < 0.0:
            lo -= width
            f_lo = phi(lo)
        if f_hi > 0.0:
            hi += width
            f_hi = phi(hi)
    t = 0.5 * (lo + hi)
    res = phi(t)
    iters = 0
    while abs(res) / m_rate > tol and hi - lo > tol / 4 and iters < 200:
        iters += 1
        if res > 0.0:
            lo = t
        else:
            hi = t
        t = 0.5 * (lo + hi)
        res = phi(t)
    cert = RootCertificate(t, res, abs(res) / m_rate + inner, (lo, hi), iters)
    jump = bs_jump(lang, weights, Z, N, D, inner)
    return BsDimension(t, cert, jump)


# ---------------------------------------------------------------------------
# fractional covers, tree flows, Frostman measure


@dataclass(frozen=True)
class FrostmanWeights:
    """Max-flow witness: leaf masses capped by exp(-lam*weight) on every node."""

    masses: Mapping[tuple[int, ...], float]
    total: float
    lam: float
    N: int
    D: int

    def normalized(self) -> dict[tuple[int, ...], float]:
        if self.total <= 0.0:
            raise PreconditionError("cannot normalize a null flow")
        return {w: m / self.total for w, m in self.masses.items()}


def _flow_tree(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
    max_nodes: int,
):
    """Greedy capacity propagation on the cylinder tree restricted to Z."""
    weights.require_positive("dimension weight")
    if not 1 <= N <= D:
        raise PreconditionError(f"need 1 <= N <= D, got N={N}, D={D}")
    tree = build_cylinder_tree(lang, [weights], D, max_nodes)
    trie = None if Z.is_whole_space else _build_trie(lang, Z, _steps(weights, 0.0, -lam), D)
    logrho: dict[int, float] = {}

    def rho(node: CylinderNode, zstate) -> float:
        if zstate is None:
            return NEG_INF
        if isinstance(zstate, _Trie) and zstate.terminal:
            zstate = "inside"
        cap = -lam * node.cum[0]
        if node.depth == D:
            val = cap
        else:
            ls = logsumexp(
                rho(c, zstate if zstate == "inside" else zstate.children.get(c.word[-1]))
                for c in node.children
            )
            val = min(cap, ls) if node.depth >= N else ls
        logrho[id(node)] = val
        return val

    zroot = "inside" if Z.is_whole_space else trie
    top = [
        (c, zroot if zroot == "inside" else zroot.children.get(c.word[-1]))
        for c in tree.root.children
    ]
    total = logsumexp(rho(c, z) for c, z in top)
    return tree, top, logrho, total


def weighted_cover_value(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
    max_nodes: int = MAX_TREE_NODES,
) -> float:
    """Fractional cover optimum at resolution D.

    On the laminar cylinder family the fractional and antichain optima
    coincide (min-cut on a tree); the value is computed as the matching
    max flow under caps exp(-lam*weight(s)).
    """
    if Z.is_empty:
        return 0.0
    _, _, _, total = _flow_tree(lang, weights, Z, lam, N, D, max_nodes)
    return math.exp(total) if total != NEG_INF else 0.0


def frostman_measure(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    N: int,
    D: int,
    max_nodes: int = MAX_TREE_NODES,
) -> FrostmanWeights:
    """Depth-D leaf masses of the maximal flow under the cover caps.

    The flow saturates to total = weighted_cover_value (strong duality on
    trees), and every cylinder with N <= depth <= D holds mass at most
    exp(-lam*weight): dividing by the total yields the Frostman-type bounds
    with constant 1/total.
    """
    if Z.is_empty:
        raise PreconditionError("target set is empty at this resolution")
    tree, top, logrho, total = _flow_tree(lang, weights, Z, lam, N, D, max_nodes)
    if total == NEG_INF:
        raise PreconditionError("target set carries no flow at this lambda")
    masses: dict[tuple[int, ...], float] = {}

    def push(node: CylinderNode, zstate, logf: float) -> None:
        if isinstance(zstate, _Trie) and zstate.terminal:
            zstate = "inside"
        if node.depth == D:
            masses[node.word] = math.exp(logf)
            return
        parts = [
            (c, zstate if zstate == "inside" else zstate.children.get(c.word[-1]))
            for c in node.children
        ]
        ls = logsumexp(logrho[id(c)] for c, z in parts if z is not None and id(c) in logrho)
        for c, z in parts:
            if z is None or logrho.get(id(c), NEG_INF) == NEG_INF:
                continue
            push(c, z, logf + logrho[id(c)] - ls)

    ls_top = logsumexp(logrho[id(c)] for c, z in top if z is not None)
    for c, z in top:
        if z is None or logrho.get(id(c), NEG_INF) == NEG_INF:
            continue
        push(c, z, total + logrho[id(c)] - ls_top)
    return FrostmanWeights(masses, math.exp(total), lam, N, D)


@dataclass(frozen=True)
class SandwichReport:
    """Computed two-sided comparison of weight-cost and fractional optima."""

    lam: float
    eps: float
    r_at_lam_plus_eps: float
    w_at_lam: float
    r_at_lam: float

    @property
    def holds(self) -> bool:
        slack = 1e-9 * max(1.0, abs(self.r_at_lam)) + 1e-12
        return (
            self.r_at_lam_plus_eps <= self.w_at_lam + slack
            and self.w_at_lam <= self.r_at_lam + slack
        )


def sandwich_check(
    lang: WordLanguage,
    weights: PerSymbolWeights,
    Z: SubsetSpec,
    lam: float,
    eps: float,
    N: int,
    D: int,
) -> SandwichReport:
    """R(lam+eps, N) <= W(lam, N) <= R(lam, N) on computed values."""
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    return SandwichReport(
        lam=lam,
        eps=eps,
        r_at_lam_plus_eps=bs_cover_value(lang, weights, Z, lam + eps, N, D),
        w_at_lam=weighted_cover_value(lang, weights, Z, lam, N, D),
        r_at_lam=bs_cover_value(lang, weights, Z, lam, N, D),
    )


@dataclass(frozen=True)
class CorollaryReport:
    """Both routes to the same number: dimension of the scaling weight vs Bowen root."""

    bs_value: float
    root_value: float

    @property
    def gap(self) -> float:
        return abs(self.bs_value - self.root_value)


def corollary_check(
    lang: WordLanguage,
    w_psi: PerSymbolWeights,
    D: int = 12,
    tol: float = 1e-7,
) -> CorollaryReport:
    """dim(psi, whole space) against the zero-potential Bowen root."""
    from .capacity import bowen_root

    w_psi.require_positive("scaling weight")
    left = bs_dimension(lang, w_psi, SubsetSpec.whole_space(), tol, 1, D).value
    right = bowen_root(lang, zero_weights(w_psi.symbols, w_psi.tau), w_psi, tol).beta_hat
    return CorollaryReport(left, right)
