"""Commutator calculus on platform groups.

Conventions: ``[a, b] = a^-1 b^-1 a b``, conjugation ``a^y = y^-1 a y``, and
simple commutators are left-normed, ``[g1, ..., gn] = [[g1, ..., g_{n-1}], gn]``.
In a group of nilpotency class n the weight-n commutator is multilinear in
the generalized sense: raising any slot to a nonzero power ``a`` raises the
value to ``a``. The ``verify_*`` helpers check those identities exactly and
the ``certify_*`` functions produce re-checkable evidence for class and Engel
claims.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .groups import GroupElement, Platform


def commutator(a: GroupElement, b: GroupElement) -> GroupElement:
    G = a.group
    G.check(b)
    return G.multiply(G.multiply(G.inverse(a), G.inverse(b)), G.multiply(a, b))


def conjugate(a: GroupElement, y: GroupElement) -> GroupElement:
    G = a.group
    return G.multiply(G.multiply(G.inverse(y), a), y)


def simple_commutator(args: Sequence[GroupElement]) -> GroupElement:
    if not args:
        raise ValueError("simple commutator needs at least one argument")
    c = args[0]
    for g in args[1:]:
        c = commutator(c, g)
    return c


def engel_commutator(x: GroupElement, g: GroupElement, n: int) -> GroupElement:
    """[x, g, ..., g] with n trailing copies of g."""
    if n < 1:
        raise ValueError(f"Engel length must be >= 1, got {n}")
    return simple_commutator([x] + [g] * n)


def _nonzero(a: int, what: str = "exponent") -> None:
    if a == 0:
        raise ValueError(f"{what} must be a nonzero integer")


def verify_property_1(x: GroupElement, y: GroupElement, z: GroupElement) -> bool:
    """Check [xy, z] = [x, z]^y [y, z] and [x, yz] = [x, z] [x, y]^z."""
    G = x.group
    G.check(y, z)
    first = commutator(G.multiply(x, y), z) == G.multiply(
        conjugate(commutator(x, z), y), commutator(y, z)
    )
    second = commutator(x, G.multiply(y, z)) == G.multiply(
        commutator(x, z), conjugate(commutator(x, y), z)
    )
    return first and second


def _require_class_at_most(platform: Platform, n: int) -> None:
    if platform.claimed_class > n:
        raise ValueError(
            f"{platform.name} has class {platform.claimed_class}; identity needs class <= {n}"
        )


def verify_lemma1(args: Sequence[GroupElement], a: int) -> bool:
    """Both exponent-sliding identities for weight n = len(args) >= 2.

    ``[[g1..g_{n-1}]^a, gn]`` and ``[g1..g_{n-1}, gn^a]`` must each equal
    ``[g1..gn]^a``.
    """
    _nonzero(a)
    args = list(args)
    if len(args) < 2:
        raise ValueError("need at least two arguments")
    G = args[0].group
    _require_class_at_most(G, len(args))
    target = G.power(simple_commutator(args), a)
    prefix = G.power(simple_commutator(args[:-1]), a)
    return (
        commutator(prefix, args[-1]) == target
        and simple_commutator(args[:-1] + [G.power(args[-1], a)]) == target
    )


def verify_proposition(args: Sequence[GroupElement], i: int, a_i: int) -> bool:
    """Slot i (1-based) raised to a_i pulls out as an outer exponent."""
    _nonzero(a_i)
    args = list(args)
    n = len(args)
    if not 1 <= i <= n:
        raise ValueError(f"slot index {i} outside 1..{n}")
    G = args[0].group
    _require_class_at_most(G, n)
    lifted = list(args)
    lifted[i - 1] = G.power(args[i - 1], a_i)
    return simple_commutator(lifted) == G.power(simple_commutator(args), a_i)


def verify_product_form(args: Sequence[GroupElement], exponents: Sequence[int]) -> bool:
    """[g1^a1, ..., gn^an] = [g1, ..., gn]^(a1*...*an)."""
    args = list(args)
    if len(args) != len(exponents):
        raise ValueError("one exponent per argument")
    for a in exponents:
        _nonzero(a)
    G = args[0].group
    _require_class_at_most(G, len(args))
    lhs = simple_commutator([G.power(g, a) for g, a in zip(args, exponents)])
    return lhs == G.power(simple_commutator(args), math.prod(exponents))


def multilinear_e(args: Sequence[GroupElement]) -> GroupElement:
    """The n-linear map on a class-n platform: the weight-n simple commutator."""
    args = list(args)
    if not args:
        raise ValueError("no arguments")
    n = args[0].group.claimed_class
    if len(args) != n:
        raise ValueError(f"e takes {n} arguments on a class-{n} platform, got {len(args)}")
    return simple_commutator(args)


def multilinear_e_prime(x: GroupElement, args: Sequence[GroupElement]) -> GroupElement:
    """(n-1)-linear map g1..g_{n-1} -> [x, g1, ..., g_{n-1}] with x fixed."""
    n = x.group.claimed_class
    if len(args) != n - 1:
        raise ValueError(f"e' takes {n - 1} arguments on a class-{n} platform, got {len(args)}")
    return simple_commutator([x, *args])


# exhaustive searches above this order are too slow for desk use
EXHAUSTIVE_ORDER_LIMIT = 256


def find_nondegenerate_witness(
    platform: Platform,
    n: int,
    budget: int = 1000,
    seed: int = 0,
    exhaustive: bool | None = None,
) -> tuple[GroupElement, GroupElement] | None:
    """Search for (x, g) with [x, _(n-1) g] != 1, i.e. a non-degenerate e'.

    Returns None when nothing is found: after ``budget`` random pairs, or after
    the full pair scan in exhaustive mode (the default for tiny platforms).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if exhaustive is None:
        exhaustive = platform.order <= EXHAUSTIVE_ORDER_LIMIT
    identity = platform.identity()
    if exhaustive:
        elements = list(platform.elements())
        for x in elements:
            for g in elements:
                if engel_commutator(x, g, n - 1) != identity:
                    return x, g
        return None
    rng = random.Random(seed)
    for _ in range(budget):
        x, g = platform.random_element(rng), platform.random_element(rng)
        if engel_commutator(x, g, n - 1) != identity:
            return x, g
    return None


# ---------------------------------------------------------------------------
# certificates


def _hex(elements) -> list[str] | None:
    if elements is None:
        return None
    return [g.to_bytes().hex() for g in elements]


@dataclass
class ClassCertificate:
    """Evidence that ``platform`` has nilpotency class ``class_upper``.

    ``counterexample`` is a nontrivial commutator of weight claimed_class + 1
    when the claim is refuted upward; a missing ``class_witness`` refutes it
    downward. ``gamma_orders`` lists |gamma_1|, |gamma_2|, ... (exhaustive mode).
    """

    platform: Platform
    claimed_class: int
    class_upper: int
    class_witness: tuple[GroupElement, ...] | None
    mode: str
    seed: int | None = None
    samples: int | None = None
    gamma_orders: list[int] | None = None
    counterexample: tuple[GroupElement, ...] | None = None

    @property
    def refuted(self) -> bool:
        return (
            self.counterexample is not None
            or self.class_witness is None
            or self.class_upper != self.claimed_class
        )

    def recheck(self) -> bool:
        """Re-evaluate the stored witnesses from scratch."""
        identity = self.platform.identity()
        if self.class_witness is not None:
            if len(self.class_witness) != self.class_upper:
                return False
            if simple_commutator(list(self.class_witness)) == identity:
                return False
        if self.counterexample is not None:
            return simple_commutator(list(self.counterexample)) != identity
        return True

    def to_dict(self) -> dict:
        return {
            "kind": "class",
            "platform": self.platform.name,
            "platform_header": self.platform.header().hex(),
            "mode": self.mode,
            "seed": self.seed,
            "samples": self.samples,
            "claimed_class": self.claimed_class,
            "class_upper": self.class_upper,
            "class_witness": _hex(self.class_witness),
            "gamma_orders": self.gamma_orders,
            "counterexample": _hex(self.counterexample),
            "status": "refuted" if self.refuted else "certified",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class EngelCertificate:
    platform: Platform
    k: int
    verdict: str  # "is_k_engel" | "not_k_engel"
    witness: tuple[GroupElement, GroupElement] | None
    mode: str
    seed: int | None = None
    pairs_checked: int = 0

    @property
    def is_engel(self) -> bool:
        return self.verdict == "is_k_engel"

    def recheck(self) -> bool:
        if self.is_engel:
            return self.witness is None
        x, g = self.witness
        return engel_commutator(x, g, self.k) != self.platform.identity()

    def to_dict(self) -> dict:
        return {
            "kind": "engel",
            "platform": self.platform.name,
            "platform_header": self.platform.header().hex(),
            "mode": self.mode,
            "seed": self.seed,
            "k": self.k,
            "verdict": self.verdict,
            "witness": _hex(self.witness),
            "pairs_checked": self.pairs_checked,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def subgroup_closure(platform: Platform, generators) -> set:
    """The subgroup generated by ``generators`` (finite group: products suffice)."""
    gens = set(generators)
    seen = {platform.identity()} | gens
    frontier = list(seen)
    while frontier:
        nxt = []
        for h in frontier:
            for s in gens:
                p = platform.multiply(h, s)
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
    return seen


def lower_central_series(platform: Platform) -> list[set]:
    """[gamma_1, gamma_2, ...] by closure, ending at {1} or where the series stalls."""
    elements = list(platform.elements())
    series = [set(elements)]
    while len(series[-1]) > 1:
        gens = {commutator(a, b) for a in series[-1] for b in elements}
        nxt = subgroup_closure(platform, gens)
        if nxt == series[-1]:
            break
        series.append(nxt)
    return series


def _left_normed_levels(platform: Platform, depth: int) -> list[dict]:
    """Every value of a weight-k left-normed commutator, k = 1..depth, each with one witness tuple."""
    elements = list(platform.elements())
    levels = [{g: (g,) for g in elements}]
    for _ in range(depth - 1):
        level = {}
        for c, word in levels[-1].items():
            for g in elements:
                v = commutator(c, g)
                if v not in level:
                    level[v] = word + (g,)
        levels.append(level)
    return levels


def certify_class(
    platform: Platform,
    *,
    exhaustive: bool = False,
    samples: int = 500,
    seed: int = 0,
) -> ClassCertificate:
    """Validate ``platform.claimed_class``.

    Exhaustive mode computes the lower central series by subgroup closure and
    every left-normed commutator value up to weight claimed_class + 1, so the
    result is a proof. Sampled mode evaluates ``samples`` random weight
    (c + 1) commutators and hunts for a nontrivial weight-c one.
    """
    c = platform.claimed_class
    identity = platform.identity()
    if exhaustive:
        series = lower_central_series(platform)
        true_class = len(series) - 1 if len(series[-1]) == 1 else None
        levels = _left_normed_levels(platform, c + 1)
        witness = next((w for v, w in levels[c - 1].items() if v != identity), None)
        counterexample = next((w for v, w in levels[c].items() if v != identity), None)
        return ClassCertificate(
            platform,
            claimed_class=c,
            class_upper=true_class if true_class is not None else -1,
            class_witness=witness,
            mode="exhaustive",
            gamma_orders=[len(s) for s in series],
            counterexample=counterexample,
        )

    rng = random.Random(seed)
    counterexample = None
    for _ in range(samples):
        word = tuple(platform.random_element(rng) for _ in range(c + 1))
        if simple_commutator(list(word)) != identity:
            counterexample = word
            break
    witness = None
    for _ in range(samples):
        word = tuple(platform.random_element(rng) for _ in range(c))
        if simple_commutator(list(word)) != identity:
            witness = word
            break
    return ClassCertificate(
        platform,
        claimed_class=c,
        class_upper=c,
        class_witness=witness,
        mode="sampled",
        seed=seed,
        samples=samples,
        counterexample=counterexample,
    )


def certify_engel(
    platform: Platform,
    k: int,
    *,
    exhaustive: bool = False,
    samples: int = 500,
    seed: int = 0,
) -> EngelCertificate:
    """Decide (exhaustively) or estimate (by sampling) whether the platform is k-Engel."""
    if k < 1:
        raise ValueError("k must be >= 1")
    identity = platform.identity()
    checked = 0
    if exhaustive:
        elements = list(platform.elements())
        pairs = ((x, g) for x in elements for g in elements)
    else:
        rng = random.Random(seed)
        pairs = (
            (platform.random_element(rng), platform.random_element(rng)) for _ in range(samples)
        )
    for x, g in pairs:
        checked += 1
        if engel_commutator(x, g, k) != identity:
            return EngelCertificate(
                platform, k, "not_k_engel", (x, g),
                mode="exhaustive" if exhaustive else "sampled",
                seed=None if exhaustive else seed,
                pairs_checked=checked,
            )
    return EngelCertificate(
        platform, k, "is_k_engel", None,
        mode="exhaustive" if exhaustive else "sampled",
        seed=None if exhaustive else seed,
        pairs_checked=checked,
    )


def run_identity_suite(platform: Platform, samples: int = 500, seed: int = 0) -> dict[str, tuple[int, int]]:
    """Random-instance run of every commutator identity; maps check name to (passed, total).

    Weight-n checks use n = claimed class and are skipped on abelian platforms.
    Exponents are drawn from [1, characteristic).
    """
    rng = random.Random(seed)
    q = platform.characteristic
    n = platform.claimed_class
    rand = platform.random_element
    results = {}

    def record(name, ok):
        passed, total = results.get(name, (0, 0))
        results[name] = (passed + bool(ok), total + 1)

    for _ in range(samples):
        record("property_1", verify_property_1(rand(rng), rand(rng), rand(rng)))
    if n < 2:
        return results
    for _ in range(samples):
        args = [rand(rng) for _ in range(n)]
        record("lemma_1", verify_lemma1(args, rng.randrange(1, q)))
        record(
            "proposition",
            all(verify_proposition(args, i, rng.randrange(1, q)) for i in range(1, n + 1)),
        )
        record("product_form", verify_product_form(args, [rng.randrange(1, q) for _ in range(n)]))
    return results
