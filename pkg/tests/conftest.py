"""Shared builders and independent oracles for the test suite.

Oracles here never call the code paths they check: word sets come from
filtered cartesian products, cover optima from explicit antichain
enumeration or an LP solver, roots from generic bisection on closed forms.
"""

import itertools
import math
import random

import pytest

import invpressure as ip


# ---------------------------------------------------------------------------
# instance builders


def full_shift(q: int) -> ip.SftLanguage:
    syms = list(range(1, q + 1))
    return ip.compile_sft(syms, [(i, j) for i in syms for j in syms])


def golden_mean() -> ip.SftLanguage:
    # forbid symbol 2 after symbol 2
    return ip.compile_sft([1, 2], [(1, 1), (1, 2), (2, 1)])


def single_branch() -> ip.SftLanguage:
    return ip.compile_sft([1], [(1, 1)])


def weights(table: dict, tau: int = 1) -> ip.PerSymbolWeights:
    return ip.PerSymbolWeights(table, tau)


def const_weights(lang: ip.SftLanguage, c: float, tau: int = 1) -> ip.PerSymbolWeights:
    return ip.PerSymbolWeights({s: c for s in lang.symbols}, tau)


def random_sft(rng: random.Random, q: int, extra: float = 0.5) -> ip.SftLanguage:
    """Random relation containing the full cycle 1->2->...->q->1 (irreducible)."""
    syms = list(range(1, q + 1))
    edges = {(i, i % q + 1) for i in syms}
    for i in syms:
        for j in syms:
            if rng.random() < extra:
                edges.add((i, j))
    return ip.compile_sft(syms, sorted(edges))


def sparse_sft(rng: random.Random, q: int) -> ip.SftLanguage:
    """Cycle plus at most one extra edge per symbol (keeps antichain counts tiny)."""
    syms = list(range(1, q + 1))
    edges = {(i, i % q + 1) for i in syms}
    for i in syms:
        if rng.random() < 0.6:
            edges.add((i, rng.choice(syms)))
    return ip.compile_sft(syms, sorted(edges))


def random_weights(rng: random.Random, lang, lo: float, hi: float, tau: int = 1):
    return ip.PerSymbolWeights({s: rng.uniform(lo, hi) for s in lang.symbols}, tau)


# ---------------------------------------------------------------------------
# oracles


def brute_words(lang: ip.SftLanguage, n: int) -> set:
    """All length-n paths of the relation, by filtering the full product."""
    allowed = set()
    for i in lang.symbols:
        for j in lang.successors(i):
            allowed.add((i, j))
    out = set()
    for cand in itertools.product(lang.symbols, repeat=n):
        if all(p in allowed for p in zip(cand, cand[1:])):
            out.add(cand)
    return out


def bisect_root(f, lo: float, hi: float, iters: int = 200) -> float:
    """Generic sign-change bisection (f decreasing or increasing)."""
    f_lo, f_hi = f(lo), f(hi)
    assert f_lo * f_hi <= 0, "oracle bracket has no sign change"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if (v > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cubic_time_scale_root() -> float:
    """Root of x^3 + x = 1 by bisection; the golden-mean weighted root is -ln(x*)."""
    return bisect_root(lambda x: 1.0 - x - x**3, 0.0, 1.0)


def enumerate_antichain_covers(lang, z_words, N, D, limit=300_000):
    """Every antichain of cylinder words (depths in [N, D]) covering the target.

    Yields lists of words; redundant covers (a chosen word inside another)
    are not generated, which cannot change the minimum.
    """
    count = 0

    def z_state_for(word, zstate):
        if zstate == "inside":
            return "inside"
        matched = []
        for z in zstate:
            if word[: len(z)] == z:
                return "inside"
            if z[: len(word)] == word:
                matched.append(z)
        return matched or None

    def expand(word, unit, zstate):
        nonlocal count
        if zstate is None:
            yield []
            return
        opts = []
        if len(word) >= N:
            opts.append([word])
        if len(word) < D:
            succ = lang.initial_units() if unit is None else lang.unit_successors(unit)
            child_opts = []
            for u2, sym in sorted(succ, key=lambda p: p[1]):
                w2 = word + (sym,)
                child_opts.append(list(expand(w2, u2, z_state_for(w2, zstate))))
            for combo in itertools.product(*child_opts):
                count += 1
                if count > limit:
                    raise RuntimeError("oracle antichain enumeration exploded")
                opts.append([w for part in combo for w in part])
        yield from opts

    zroot = "inside" if z_words is None else [tuple(z) for z in z_words]
    tops = []
    for unit, sym in sorted(lang.initial_units(), key=lambda p: p[1]):
        w = (sym,)
        tops.append(list(expand(w, unit, z_state_for(w, zroot))))
    for combo in itertools.product(*tops):
        yield [w for part in combo for w in part]


def brute_cover_min(lang, cost_fn, z_words, N, D) -> float:
    """Exhaustive minimum of sum(cost_fn(word)) over antichain covers."""
    best = math.inf
    for cover in enumerate_antichain_covers(lang, z_words, N, D):
        best = min(best, math.fsum(cost_fn(w) for w in cover))
    return best


def lp_cover_min(lang, cost_fn, z_words, N, D) -> float:
    """Fractional cover optimum by linear programming (laminar constraint matrix)."""
    from scipy.optimize import linprog

    tree = ip.build_cylinder_tree(lang, [ip.zero_weights(lang.symbols, 1)], D)
    words = [node.word for node in tree.nodes()]

    def under_z(word):
        if z_words is None:
            return True
        return any(
            word[: len(z)] == tuple(z) or tuple(z)[: len(word)] == word for z in z_words
        )

    variables = [w for w in words if N <= len(w) <= D and under_z(w)]
    leaves = [
        w for w in words
        if len(w) == D and (z_words is None or any(w[: len(z)] == tuple(z) for z in z_words))
    ]
    if not leaves:
        return 0.0
    a_ub = []
    for leaf in leaves:
        a_ub.append([-1.0 if leaf[: len(v)] == v else 0.0 for v in variables])
    res = linprog(
        c=[cost_fn(v) for v in variables],
        A_ub=a_ub,
        b_ub=[-1.0] * len(leaves),
        bounds=[(0, None)] * len(variables),
        method="highs",
    )
    assert res.status == 0, res.message
    return float(res.fun)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
