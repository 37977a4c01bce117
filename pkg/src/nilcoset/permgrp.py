"""Finite permutation groups.

Permutations compose left-to-right: (p * q) applies p first, then q, so
right cosets Hx carry the natural right action x -> xg.  Points are 0-based
internally and 1-based in all external text formats.

PermGroup owns a deterministic stabilizer chain (base points chosen as the
smallest moved point at each level), giving exact orders, membership tests
and element enumeration.  On top of that sit the constructions the rest of
the package needs: PSL(2, q) on the projective line, the pair of
non-conjugate Alt(5) subgroups of PSL(2, 29), conjugacy classes, coset
actions with permutation characters, subgroup enumeration up to conjugacy
by cyclic extension, and lower-central-series machinery.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache, reduce
from math import gcd
from random import Random
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .exactla import AbelianInvariants


class Permutation:
    """Immutable permutation of {0, ..., degree-1} stored as an image tuple."""

    __slots__ = ("imgs",)

    def __init__(self, imgs: Iterable[int]):
        imgs = tuple(imgs)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError("images do not form a bijection")
        object.__setattr__(self, "imgs", imgs)

    def __setattr__(self, *a):
        raise AttributeError("Permutation is immutable")

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(range(degree))

    @classmethod
    def from_cycles(cls, degree: int, cycles: Sequence[Sequence[int]]) -> "Permutation":
        """Build from 0-based cycles."""
        imgs = list(range(degree))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + type(cyc)([cyc[0]])):
                imgs[a] = b
        return cls(imgs)

    @property
    def degree(self) -> int:
        return len(self.imgs)

    def __mul__(self, other: "Permutation") -> "Permutation":
        # apply self first, then other
        oi = other.imgs
        return Permutation(oi[i] for i in self.imgs)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.imgs)
        for i, j in enumerate(self.imgs):
            inv[j] = i
        return Permutation(inv)

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return self.inverse() ** (-k)
        result = Permutation.identity(self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self, g: "Permutation") -> "Permutation":
        """g^-1 * self * g."""
        return g.inverse() * self * g

    def __call__(self, point: int) -> int:
        return self.imgs[point]

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.imgs))

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = [False] * len(self.imgs)
        out = []
        for s in range(len(self.imgs)):
            if seen[s]:
                continue
            cyc = [s]
            seen[s] = True
            t = self.imgs[s]
            while t != s:
                seen[t] = True
                cyc.append(t)
                t = self.imgs[t]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        return tuple(sorted(len(c) for c in self.cycles(include_fixed=True)))

    def order(self) -> int:
        return reduce(lambda a, b: a // gcd(a, b) * b, (len(c) for c in self.cycles()), 1)

    def n_fixed(self) -> int:
        return sum(1 for i, j in enumerate(self.imgs) if i == j)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.imgs == other.imgs

    def __lt__(self, other):
        return self.imgs < other.imgs

    def __hash__(self):
        return hash(self.imgs)

    def __repr__(self):
        return f"Permutation({format_cycles(self)})"


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse 1-based cycle notation, e.g. ``(1 2 3)(4 5)``; ``()`` is identity."""
    stripped = text.strip()
    if not re.fullmatch(r"(\s*\([\d\s,]*\)\s*)+", stripped):
        raise ValueError(f"cannot parse permutation: {text!r}")
    cycles = []
    for m in _CYCLE_RE.finditer(stripped):
        body = m.group(1).replace(",", " ").split()
        if not body:
            continue
        pts = [int(x) - 1 for x in body]
        if any(p < 0 or p >= degree for p in pts):
            raise ValueError(f"point out of range in {text!r} (degree {degree})")
        if len(set(pts)) != len(pts):
            raise ValueError(f"repeated point in cycle {text!r}")
        cycles.append(pts)
    return Permutation.from_cycles(degree, cycles)


def format_cycles(p: Permutation) -> str:
    cycs = p.cycles()
    if not cycs:
        return "()"
    return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cycs)


# ---------------------------------------------------------------------------
# PermGroup and stabilizer chains
# ---------------------------------------------------------------------------

class _ChainLevel:
    __slots__ = ("base", "gens", "orbit")

    def __init__(self, base: int):
        self.base = base
        self.gens: list[Permutation] = []
        # orbit maps point -> transversal element u with u(base) = point
        self.orbit: dict[int, Permutation] = {}


class PermGroup:
    """Finite permutation group with a cached deterministic stabilizer chain."""

    def __init__(self, degree: int, generators: Iterable[Permutation]):
        self.degree = degree
        gens = []
        seen = set()
        for g in generators:
            if g.degree != degree:
                raise ValueError("generator degree mismatch")
            if g.is_identity() or g.imgs in seen:
                continue
            seen.add(g.imgs)
            gens.append(g)
        self.gens: tuple[Permutation, ...] = tuple(gens)
        self._chain: list[_ChainLevel] | None = None
        self._elements: list[Permutation] | None = None
        self._classes: "ConjClasses | None" = None

    # -- stabilizer chain ---------------------------------------------------

    def _build_chain(self) -> list[_ChainLevel]:
        if self._chain is not None:
            return self._chain
        ident = Permutation.identity(self.degree)
        bases: list[int] = []
        strong: list[Permutation] = []
        strong_keys: set[tuple] = set()
        orbit_cache: dict[int, dict[int, Permutation]] = {}

        def ensure_base(g: Permutation) -> None:
            if all(g.imgs[b] == b for b in bases):
                bases.append(min(p for p in range(self.degree) if g.imgs[p] != p))

        def add_strong(g: Permutation) -> None:
            strong.append(g)
            strong_keys.add(g.imgs)
            ensure_base(g)
            orbit_cache.clear()

        def gens_at(i: int) -> list[Permutation]:
            prefix = bases[:i]
            return [g for g in strong if all(g.imgs[b] == b for b in prefix)]

        def orbit_at(i: int) -> dict[int, Permutation]:
            if i in orbit_cache:
                return orbit_cache[i]
            gens = gens_at(i)
            orbit = {bases[i]: ident}
            frontier = [bases[i]]
            while frontier:
                new = []
                for pt in frontier:
                    u = orbit[pt]
                    for g in gens:
                        q = g.imgs[pt]
                        if q not in orbit:
                            orbit[q] = u * g
                            new.append(q)
                frontier = new
            orbit_cache[i] = orbit
            return orbit

        for g in self.gens:
            if g.imgs not in strong_keys:
                add_strong(g)

        # verify levels bottom-up; on failure add the stripped residue and
        # resume at its level (Schreier-Sims)
        i = len(bases) - 1
        while i >= 0:
            base = bases[i]
            orbit = orbit_at(i)
            gens_i = gens_at(i)
            resume = None
            for pt in sorted(orbit):
                u = orbit[pt]
                for h in gens_i:
                    uh = u * h
                    v = orbit[uh.imgs[base]]
                    r = uh * v.inverse()
                    if r.is_identity():
                        continue
                    j = i + 1
                    while j < len(bases):
                        bj = bases[j]
                        p = r.imgs[bj]
                        if p == bj:
                            j += 1
                            continue
                        t = orbit_at(j).get(p)
                        if t is None:
                            break
                        r = r * t.inverse()
                        if r.is_identity():
                            break
                        j += 1
                    if r.is_identity() or r.imgs in strong_keys:
                        continue
                    add_strong(r)
                    resume = min(j, len(bases) - 1)
                    break
                if resume is not None:
                    break
            if resume is not None:
                i = resume
            else:
                i -= 1

        chain = []
        for k, b in enumerate(bases):
            level = _ChainLevel(b)
            level.gens = gens_at(k)
            level.orbit = orbit_at(k)
            chain.append(level)
        self._chain = chain
        return chain

    def order(self) -> int:
        return reduce(lambda a, lvl: a * len(lvl.orbit), self._build_chain(), 1)

    def sift(self, g: Permutation) -> Permutation:
        """Residue of g after dividing out transversal elements; identity iff g in G."""
        for level in self._build_chain():
            p = g.imgs[level.base]
            if p == level.base:
                continue
            u = level.orbit.get(p)
            if u is None:
                return g
            g = g * u.inverse()
        return g

    def contains(self, g: Permutation) -> bool:
        if g.degree != self.degree:
            return False
        return self.sift(g).is_identity()

    def has_subgroup(self, other: "PermGroup") -> bool:
        return all(self.contains(g) for g in other.gens)

    def same_group(self, other: "PermGroup") -> bool:
        return self.has_subgroup(other) and other.has_subgroup(self)

    def base_points(self) -> list[int]:
        return [lvl.base for lvl in self._build_chain()]

    # -- elements -----------------------------------------------------------

    def elements(self, limit: int | None = None) -> list[Permutation]:
        """All elements, lexicographically sorted (deterministic).

        Raises GroupTooLarge when the order exceeds `limit`.
        """
        if self._elements is None:
            n = self.order()
            if limit is not None and n > limit:
                raise GroupTooLarge(f"group order {n} exceeds limit {limit}")
            elems = {Permutation.identity(self.degree).imgs}
            frontier = [Permutation.identity(self.degree)]
            while frontier:
                new = []
                for x in frontier:
                    for g in self.gens:
                        y = x * g
                        if y.imgs not in elems:
                            elems.add(y.imgs)
                            new.append(y)
                frontier = new
            out = [Permutation(t) for t in sorted(elems)]
            assert len(out) == n, "closure disagrees with stabilizer-chain order"
            self._elements = out
        if limit is not None and len(self._elements) > limit:
            raise GroupTooLarge(f"group order {len(self._elements)} exceeds limit {limit}")
        return self._elements

    def random_element(self, rng: Random, word_length: int = 12) -> Permutation:
        if not self.gens:
            return Permutation.identity(self.degree)
        x = Permutation.identity(self.degree)
        for _ in range(word_length):
            g = rng.choice(self.gens)
            if rng.random() < 0.5:
                g = g.inverse()
            x = x * g
        return x

    # -- structural subgroups -------------------------------------------------

    def normal_closure(self, seed_gens: Sequence[Permutation]) -> "PermGroup":
        """Normal closure of <seed_gens> in self."""
        gens = [g for g in seed_gens if not g.is_identity()]
        closure = PermGroup(self.degree, gens)
        changed = True
        while changed:
            changed = False
            for g in self.gens:
                for h in closure.gens:
                    c = h.conjugate(g)
                    if not closure.contains(c):
                        gens.append(c)
                        closure = PermGroup(self.degree, gens)
                        changed = True
        return closure

    def commutator_subgroup(self, other: "PermGroup") -> "PermGroup":
        """[self_ambient, other] = normal closure of generator commutators.

        Used as [G, N] with N normal in G; the closure is taken in self.
        """
        comms = []
        for g in self.gens:
            for h in other.gens:
                comms.append(g.inverse() * h.inverse() * g * h)
        return self.normal_closure(comms)

    def derived_subgroup(self) -> "PermGroup":
        return self.commutator_subgroup(self)

    def lower_central_series(self, max_terms: int = 20) -> list["PermGroup"]:
        """[G, [G,G], [G,[G,G]], ...] until stable or max_terms reached.

        Indexing follows G_0 = G, G_{j+1} = [G, G_j].
        """
        series = [self]
        while len(series) < max_terms:
            nxt = self.commutator_subgroup(series[-1])
            if nxt.order() == series[-1].order():
                series.append(nxt)
                break
            series.append(nxt)
        return series

    def is_abelian(self) -> bool:
        return all((a * b).imgs == (b * a).imgs
                   for i, a in enumerate(self.gens) for b in self.gens[i + 1:])

    def is_perfect(self) -> bool:
        return self.derived_subgroup().order() == self.order()

    def is_solvable(self) -> bool:
        cur = self
        while True:
            nxt = cur.derived_subgroup()
            if nxt.order() == 1:
                return True
            if nxt.order() == cur.order():
                return False
            cur = nxt

    def is_nilpotent(self) -> bool:
        series = self.lower_central_series()
        return series[-1].order() == 1

    def is_trivial(self) -> bool:
        return self.order() == 1

    def __repr__(self):
        return f"PermGroup(degree={self.degree}, ngens={len(self.gens)}, order={self.order()})"


class GroupTooLarge(Exception):
    """A configured order or index bound was exceeded."""


# ---------------------------------------------------------------------------
# conjugacy classes and characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjClasses:
    """Conjugacy class data; representatives are the lex-least class members."""
    representatives: tuple[Permutation, ...]
    class_sizes: tuple[int, ...]
    centralizer_orders: tuple[int, ...]
    class_of: dict  # element image tuple -> class index

    def __len__(self):
        return len(self.representatives)


@dataclass(frozen=True)
class PermChar:
    """Permutation character: fixed-point counts per conjugacy class."""
    values: tuple[int, ...]


DEFAULT_ORDER_BOUND = 10 ** 7


def conjugacy_classes(G: PermGroup, order_bound: int = DEFAULT_ORDER_BOUND) -> ConjClasses:
    """One representative per class, classes ordered by lex-least member."""
    if G._classes is not None:
        return G._classes
    if G.order() > order_bound:
        raise GroupTooLarge(f"order {G.order()} exceeds bound {order_bound}")
    elems = G.elements(limit=order_bound)
    class_of: dict[tuple, int] = {}
    reps: list[Permutation] = []
    sizes: list[int] = []
    for x in elems:  # lex order: first unseen member is the class minimum
        if x.imgs in class_of:
            continue
        idx = len(reps)
        members = {x.imgs}
        frontier = [x]
        while frontier:
            new = []
            for y in frontier:
                for g in G.gens:
                    z = y.conjugate(g)
                    if z.imgs not in members:
                        members.add(z.imgs)
                        new.append(z)
            frontier = new
        for t in members:
            class_of[t] = idx
        reps.append(x)
        sizes.append(len(members))
    n = G.order()
    cents = tuple(n // s for s in sizes)
    out = ConjClasses(tuple(reps), tuple(sizes), cents, class_of)
    G._classes = out
    return out


def group_order(G: PermGroup) -> int:
    """Exact group order from the stabilizer chain."""
    return G.order()


# ---------------------------------------------------------------------------
# coset spaces, actions, characters
# ---------------------------------------------------------------------------

DEFAULT_INDEX_BOUND = 10 ** 5


class CosetSpace:
    """Right cosets Hx of H in G with the right-multiplication action of G.

    Coset keys are the lex-least member of the coset, which requires H to be
    enumerable; reps[i] is the chosen representative of point i (rep of the
    coset containing it), with reps[0] = identity for the coset H itself.
    """

    def __init__(self, G: PermGroup, H: PermGroup,
                 index_bound: int = DEFAULT_INDEX_BOUND,
                 subgroup_order_bound: int = 10 ** 5):
        if not G.has_subgroup(H):
            raise ValueError("H is not a subgroup of G")
        self.group = G
        self.subgroup = H
        self._h_elems = H.elements(limit=subgroup_order_bound)
        ident = Permutation.identity(G.degree)
        self.reps: list[Permutation] = [ident]
        self.key_to_index: dict[tuple, int] = {self.key(ident): 0}
        i = 0
        while i < len(self.reps):
            x = self.reps[i]
            for g in G.gens:
                y = x * g
                k = self.key(y)
                if k not in self.key_to_index:
                    if len(self.reps) >= index_bound:
                        raise GroupTooLarge(f"index exceeds bound {index_bound}")
                    self.key_to_index[k] = len(self.reps)
                    self.reps.append(y)
            i += 1

    @property
    def index(self) -> int:
        return len(self.reps)

    def key(self, x: Permutation) -> tuple:
        return min((h * x).imgs for h in self._h_elems)

    def point_of(self, x: Permutation) -> int:
        return self.key_to_index[self.key(x)]

    def act(self, g: Permutation) -> Permutation:
        """Permutation induced by g on the coset space."""
        return Permutation(self.point_of(x * g) for x in self.reps)

    def fixed_points(self, g: Permutation) -> int:
        H = self.subgroup
        return sum(1 for x in self.reps if H.contains(x * g * x.inverse()))


def coset_action(G: PermGroup, H: PermGroup,
                 index_bound: int = DEFAULT_INDEX_BOUND) -> tuple[PermGroup, PermChar]:
    """Transitive action of G on the cosets of H, with its permutation character.

    The character lists fixed-point counts per conjugacy class of G, in the
    canonical class order of conjugacy_classes(G).
    """
    space = CosetSpace(G, H, index_bound=index_bound)
    action = PermGroup(space.index, [space.act(g) for g in G.gens])
    classes = conjugacy_classes(G)
    char = PermChar(tuple(space.fixed_points(r) for r in classes.representatives))
    return action, char


def permutation_character(G: PermGroup, H: PermGroup,
                          classes: ConjClasses | None = None) -> PermChar:
    """Character of G on G/H via class intersections (no coset enumeration).

    fix(g) = |class(g) meet H| * |centralizer(g)| / |H|.
    """
    if classes is None:
        classes = conjugacy_classes(G)
    h_elems = H.elements()
    counts = [0] * len(classes)
    for h in h_elems:
        counts[classes.class_of[h.imgs]] += 1
    nH = len(h_elems)
    values = []
    for k in range(len(classes)):
        num = counts[k] * classes.centralizer_orders[k]
        assert num % nH == 0
        values.append(num // nH)
    return PermChar(tuple(values))


# ---------------------------------------------------------------------------
# subgroup conjugacy and enumeration
# ---------------------------------------------------------------------------

def _subgroup_key(elems: Iterable[Permutation]) -> frozenset:
    return frozenset(e.imgs for e in elems)


def _orbit_signature(H: PermGroup) -> tuple:
    seen = set()
    sizes = []
    for s in range(H.degree):
        if s in seen:
            continue
        orb = {s}
        frontier = [s]
        while frontier:
            new = []
            for p in frontier:
                for g in H.gens:
                    q = g.imgs[p]
                    if q not in orb:
                        orb.add(q)
                        new.append(q)
            frontier = new
        seen |= orb
        sizes.append(len(orb))
    return tuple(sorted(sizes))


def _element_order_multiset(H: PermGroup, limit: int = 10 ** 5) -> tuple:
    return tuple(sorted(e.order() for e in H.elements(limit=limit)))


def is_conjugate_subgroups(G: PermGroup, H1: PermGroup, H2: PermGroup,
                           orbit_cap: int = 200_000) -> tuple[bool, Permutation | None]:
    """Whether H1^g = H2 for some g in G; returns (flag, witness or None).

    Cheap invariants (order, element-order multiset, orbit-length multiset)
    prune before the orbit search over conjugates of H1.
    """
    for H in (H1, H2):
        if not G.has_subgroup(H):
            raise ValueError("not a subgroup of G")
    if H1.order() != H2.order():
        return False, None
    if _orbit_signature(H1) != _orbit_signature(H2):
        return False, None
    if _element_order_multiset(H1) != _element_order_multiset(H2):
        return False, None
    h1_elems = H1.elements()
    target = _subgroup_key(H2.elements())
    start = _subgroup_key(h1_elems)
    if start == target:
        return True, Permutation.identity(G.degree)
    seen = {start: Permutation.identity(G.degree)}
    frontier = [(start, Permutation.identity(G.degree), h1_elems)]
    while frontier:
        new = []
        for key, conj, elems in frontier:
            for g in G.gens:
                celems = [e.conjugate(g) for e in elems]
                ckey = _subgroup_key(celems)
                if ckey in seen:
                    continue
                if len(seen) >= orbit_cap:
                    raise GroupTooLarge("conjugacy orbit exceeds cap")
                w = conj * g
                if ckey == target:
                    return True, w
                seen[ckey] = w
                new.append((ckey, w, celems))
        frontier = new
    return False, None


def _closure_elements(degree: int, gens: Sequence[Permutation],
                      cap: int) -> list[Permutation] | None:
    """Subgroup closure as an element list, or None if it exceeds cap."""
    ident = Permutation.identity(degree)
    elems = {ident.imgs: ident}
    frontier = [ident]
    gen_list = [g for g in gens if not g.is_identity()]
    while frontier:
        new = []
        for x in frontier:
            for g in gen_list:
                y = x * g
                if y.imgs not in elems:
                    if len(elems) >= cap:
                        return None
                    elems[y.imgs] = y
                    new.append(y)
        frontier = new
    return [elems[t] for t in sorted(elems)]


def subgroups_up_to_conjugacy(G: PermGroup, seed: int = 0,
                              order_bound: int = 2000,
                              verify_complete: bool | None = None) -> list[PermGroup]:
    """Conjugacy-class representatives of subgroups of G.

    Solvable subgroups are built by cyclic extension from the trivial group;
    perfect subgroups are seeded by bounded random 2-generation (seeded RNG,
    deterministic).  For solvable G the list is complete.  For nonsolvable G
    completeness is asserted only when the brute-force closure check runs
    (|G| <= 360, controlled by verify_complete; None = automatic).
    """
    n = G.order()
    if n > order_bound:
        raise GroupTooLarge(f"order {n} exceeds bound {order_bound}")
    elems = G.elements()
    elem_index = {e.imgs: i for i, e in enumerate(elems)}

    classes: list[dict] = []
    key_to_class: dict[frozenset, int] = {}

    def register(member_elems: list[Permutation], gens: list[Permutation]) -> int:
        key = _subgroup_key(member_elems)
        if key in key_to_class:
            return key_to_class[key]
        idx = len(classes)
        orbit = {key}
        frontier = [member_elems]
        while frontier:
            new = []
            for es in frontier:
                for g in G.gens:
                    ces = [e.conjugate(g) for e in es]
                    ckey = _subgroup_key(ces)
                    if ckey not in orbit:
                        orbit.add(ckey)
                        new.append(ces)
            frontier = new
        rep = PermGroup(G.degree, gens)
        classes.append({"rep": rep, "elems": member_elems, "key": key})
        for k in orbit:
            key_to_class[k] = idx
        return idx

    ident = Permutation.identity(G.degree)
    register([ident], [])

    solvable = G.is_solvable()
    if not solvable:
        rng = Random(seed)
        trials = 60 * len(elems) // 10
        for _ in range(max(trials, 500)):
            x = elems[rng.randrange(len(elems))]
            y = elems[rng.randrange(len(elems))]
            sub = _closure_elements(G.degree, [x, y], cap=n + 1)
            if sub is None or len(sub) == 1:
                continue
            S = PermGroup(G.degree, [x, y])
            if S.is_perfect():
                register(sub, [x, y])

    # cyclic extension sweep: process classes in discovery order; the list
    # grows as new classes are registered
    i = 0
    while i < len(classes):
        entry = classes[i]
        H_elems = entry["elems"]
        H_key = entry["key"]
        H_gens = list(entry["rep"].gens)
        # normalizer elements
        gen_list = H_gens if H_gens else []
        normalizer = []
        for g in elems:
            if all((h.conjugate(g)).imgs in H_key for h in gen_list):
                normalizer.append(g)
        for g in normalizer:
            if g.imgs in H_key:
                continue
            # order of g modulo H
            m = 1
            power = g
            while power.imgs not in H_key:
                m += 1
                power = power * g
            if not _is_prime(m):
                continue
            new_elems: dict[tuple, Permutation] = {}
            gp = ident
            for _ in range(m):
                for h in H_elems:
                    prod = h * gp
                    new_elems[prod.imgs] = prod
                gp = gp * g
            member_list = [new_elems[t] for t in sorted(new_elems)]
            assert len(member_list) == m * len(H_elems)
            register(member_list, H_gens + [g])
        i += 1

    result = [c["rep"] for c in sorted(
        classes, key=lambda c: (c["rep"].order(), sorted(c["key"])))]

    if verify_complete is None:
        verify_complete = (not solvable) and n <= 360
    if verify_complete:
        brute = all_subgroups_bruteforce(G)
        found = set(key_to_class)
        missing = [k for k in brute if k not in found]
        if missing:
            raise RuntimeError(
                f"cyclic extension missed {len(missing)} subgroups; "
                "perfect-subgroup seeding incomplete")
    return result


def all_subgroups_bruteforce(G: PermGroup) -> set[frozenset]:
    """Every subgroup of G (as element-key sets) by closure of joins."""
    n = G.order()
    elems = G.elements()
    subs: dict[frozenset, list[Permutation]] = {}
    ident = Permutation.identity(G.degree)
    subs[frozenset([ident.imgs])] = [ident]
    worklist = [(frozenset([ident.imgs]), [ident])]
    while worklist:
        key, members = worklist.pop()
        for g in elems:
            if g.imgs in key:
                continue
            closure = _closure_elements(G.degree, [m for m in members if not m.is_identity()] + [g],
                                        cap=n + 1)
            ckey = _subgroup_key(closure)
            if ckey not in subs:
                subs[ckey] = closure
                worklist.append((ckey, closure))
    return set(subs)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# abelian quotients of finite groups
# ---------------------------------------------------------------------------

def _divides_p_power(o: int, p: int, i: int) -> bool:
    """Whether o divides p^i."""
    while o % p == 0:
        o //= p
        i -= 1
    return o == 1 and i >= 0


def _primary_counting_invariants(element_orders: list[int]) -> AbelianInvariants:
    """Invariants of a finite abelian group from its element-order multiset.

    For each prime p, the count of solutions of x^(p^i) = 1 is p^(s_i) with
    s_i = sum_j min(i, lambda_j), which pins down the partition lambda of the
    p-primary component.
    """
    n = len(element_orders)
    primes = set()
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            primes.add(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        primes.add(m)
    orders: list[int] = []
    for p in sorted(primes):
        s = [0]
        i = 1
        while True:
            cnt = sum(1 for o in element_orders if _divides_p_power(o, p, i))
            e = 0
            c = cnt
            while c > 1:
                assert c % p == 0, "solution count must be a p-power"
                c //= p
                e += 1
            s.append(e)
            if e == s[i - 1]:
                break
            i += 1
        parts_ge = [s[k] - s[k - 1] for k in range(1, len(s))]
        for k in range(len(parts_ge)):
            nxt = parts_ge[k + 1] if k + 1 < len(parts_ge) else 0
            orders.extend([p ** (k + 1)] * (parts_ge[k] - nxt))
    return AbelianInvariants.from_orders(orders)


def abelian_section_invariants(H: PermGroup, K: PermGroup,
                               order_bound: int = 10 ** 5) -> AbelianInvariants:
    """Invariants of the abelian section H/K (K normal in H, [H,H] <= K).

    Element orders in the quotient are computed by sifting powers into K,
    so K is never enumerated; coset representatives are enumerated once.
    """
    nH, nK = H.order(), K.order()
    if nH == nK:
        return AbelianInvariants(0, ())
    if nH % nK:
        raise ValueError("K does not have index dividing |H|")
    index = nH // nK
    if index > order_bound:
        raise GroupTooLarge(f"section order {index} exceeds bound {order_bound}")
    k_elems = K.elements(limit=order_bound * 100)

    def key(x: Permutation) -> tuple:
        return min((k * x).imgs for k in k_elems)

    ident = Permutation.identity(H.degree)
    reps = [ident]
    seen = {key(ident)}
    i = 0
    while i < len(reps):
        x = reps[i]
        for g in H.gens:
            y = x * g
            ky = key(y)
            if ky not in seen:
                seen.add(ky)
                reps.append(y)
        i += 1
    assert len(reps) == index, "coset count disagrees with index"
    orders = []
    for x in reps:
        m = 1
        power = x
        while not K.contains(power):
            m += 1
            power = power * x
        orders.append(m)
    return _primary_counting_invariants(orders)


def abelianization_finite(G: PermGroup, order_bound: int = 10 ** 5) -> AbelianInvariants:
    """Invariants of G / [G, G]."""
    D = G.derived_subgroup()
    return abelian_section_invariants(G, D, order_bound=order_bound)


def derived_subgroup(G: PermGroup) -> PermGroup:
    """Commutator subgroup, normally closed in G."""
    return G.derived_subgroup()


# ---------------------------------------------------------------------------
# catalog constructors
# ---------------------------------------------------------------------------

def trivial_group(degree: int = 1) -> PermGroup:
    return PermGroup(degree, [])


def cyclic(n: int) -> PermGroup:
    """Cyclic group of order n in its natural action on n points."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return trivial_group()
    return PermGroup(n, [Permutation.from_cycles(n, [list(range(n))])])


def symmetric(n: int) -> PermGroup:
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return trivial_group()
    gens = [Permutation.from_cycles(n, [[0, 1]])]
    if n > 2:
        gens.append(Permutation.from_cycles(n, [list(range(n))]))
    return PermGroup(n, gens)


def alternating(n: int) -> PermGroup:
    if n < 1:
        raise ValueError("n must be positive")
    if n <= 2:
        return trivial_group(max(n, 1))
    gens = [Permutation.from_cycles(n, [[i, i + 1, i + 2]]) for i in range(n - 2)]
    return PermGroup(n, gens)


def dihedral(n: int) -> PermGroup:
    """Symmetries of the regular n-gon: order 2n, degree n (n >= 3)."""
    if n < 3:
        raise ValueError("dihedral(n) needs n >= 3")
    rot = Permutation.from_cycles(n, [list(range(n))])
    ref = Permutation([(n - i) % n for i in range(n)])
    return PermGroup(n, [rot, ref])


def klein_four() -> PermGroup:
    return direct_product(cyclic(2), cyclic(2))


def dicyclic(n: int) -> PermGroup:
    """Dicyclic group of order 4n (n >= 2); dicyclic(2) is the quaternion Q8.

    Elements are a^i and a^i b with a of order 2n, b^2 = a^n and
    b^-1 a b = a^-1, realized by right multiplication on the 4n elements.
    """
    if n < 2:
        raise ValueError("dicyclic(n) needs n >= 2")
    m = 2 * n
    elems = [(i, j) for j in (0, 1) for i in range(m)]
    index = {e: k for k, e in enumerate(elems)}

    def mul(x, y):
        i, j = x
        k, l = y
        if j == 0:
            return ((i + k) % m, l)
        if l == 0:
            return ((i - k) % m, 1)
        return ((i - k + n) % m, 0)

    def right_mult(y):
        return Permutation(index[mul(e, y)] for e in elems)

    return PermGroup(len(elems), [right_mult((1, 0)), right_mult((0, 1))])


def quaternion8() -> PermGroup:
    return dicyclic(2)


def direct_product(G: PermGroup, H: PermGroup) -> PermGroup:
    """Natural action on the disjoint union of the two domains."""
    n, m = G.degree, H.degree
    gens = []
    for g in G.gens:
        gens.append(Permutation(list(g.imgs) + list(range(n, n + m))))
    for h in H.gens:
        gens.append(Permutation(list(range(n)) + [n + i for i in h.imgs]))
    return PermGroup(n + m, gens)


def semidirect_product(N: PermGroup, H: PermGroup,
                       action: Sequence[Sequence[Permutation]]) -> PermGroup:
    """Semidirect product N x| H from explicit action data.

    action[k] lists the images of N's generators under the automorphism
    attached to H's k-th generator.  The result acts by right multiplication
    on the |N| * |H| abstract pairs (n, h), so the degree is |N| * |H|.
    """
    n_elems = N.elements()
    n_index = {e.imgs: i for i, e in enumerate(n_elems)}
    h_elems = H.elements()
    h_index = {e.imgs: i for i, e in enumerate(h_elems)}
    if len(action) != len(H.gens):
        raise ValueError("need one automorphism per generator of H")

    # expand each generator automorphism from generator images to all of N
    def automorphism_from_images(images: Sequence[Permutation]) -> list[int]:
        if len(images) != len(N.gens):
            raise ValueError("need one image per generator of N")
        for img in images:
            if not N.contains(img):
                raise ValueError("automorphism image lies outside N")
        # BFS over N expressing each element in terms of generators
        ident = Permutation.identity(N.degree)
        value = {ident.imgs: ident}
        frontier = [ident]
        while frontier:
            new = []
            for x in frontier:
                fx = value[x.imgs]
                for g, fg in zip(N.gens, images):
                    y = x * g
                    if y.imgs not in value:
                        value[y.imgs] = fx * fg
                        new.append(y)
            frontier = new
        table = [n_index[value[e.imgs].imgs] for e in n_elems]
        if sorted(table) != list(range(len(n_elems))):
            raise ValueError("generator images do not define a bijection of N")
        # homomorphism check
        for a in range(len(n_elems)):
            for b in range(len(n_elems)):
                ab = n_index[(n_elems[a] * n_elems[b]).imgs]
                if table[ab] != n_index[(n_elems[table[a]] * n_elems[table[b]]).imgs]:
                    raise ValueError("action data is not an automorphism of N")
        return table

    gen_tables = [automorphism_from_images(imgs) for imgs in action]

    # phi: H element index -> permutation table of N element indices
    phi: dict[int, tuple[int, ...]] = {h_index[Permutation.identity(H.degree).imgs]:
                                       tuple(range(len(n_elems)))}
    frontier = [Permutation.identity(H.degree)]
    while frontier:
        new = []
        for x in frontier:
            fx = phi[h_index[x.imgs]]
            for g, table in zip(H.gens, gen_tables):
                y = x * g
                yi = h_index[y.imgs]
                composed = tuple(table[i] for i in fx)
                if yi not in phi:
                    phi[yi] = composed
                    new.append(y)
                elif phi[yi] != composed:
                    raise ValueError("action data does not define a homomorphism H -> Aut(N)")
        frontier = new

    pairs = [(i, j) for j in range(len(h_elems)) for i in range(len(n_elems))]
    pair_index = {p: k for k, p in enumerate(pairs)}

    def right_mult_n(g_idx: int) -> Permutation:
        out = []
        for (i, j) in pairs:
            gj = phi[j][g_idx]
            out.append(pair_index[(n_index[(n_elems[i] * n_elems[gj]).imgs], j)])
        return Permutation(out)

    def right_mult_h(h_idx: int) -> Permutation:
        out = []
        for (i, j) in pairs:
            hj = h_index[(h_elems[j] * h_elems[h_idx]).imgs]
            out.append(pair_index[(i, hj)])
        return Permutation(out)

    gens = [right_mult_n(n_index[g.imgs]) for g in N.gens]
    gens += [right_mult_h(h_index[h.imgs]) for h in H.gens]
    G = PermGroup(len(pairs), gens)
    assert G.order() == len(n_elems) * len(h_elems), \
        "semidirect product order mismatch (action not faithful on pairs?)"
    return G


# ---------------------------------------------------------------------------
# PSL(2, q) and the Alt(5) pair in PSL(2, 29)
# ---------------------------------------------------------------------------

def psl2(q: int) -> PermGroup:
    """PSL(2, q) acting on the q + 1 points of the projective line (q odd prime).

    Point 0 is infinity, point 1 + z is z in F_q.  Generators are the images
    of the unipotent z -> z + 1 and the Weyl element z -> -1/z; the order is
    q (q^2 - 1) / 2.
    """
    if not _is_prime(q):
        raise ValueError(f"{q} is not prime")
    if q == 2:
        raise ValueError("q = 2 is excluded (q must be an odd prime)")
    deg = q + 1
    t_imgs = [0] + [1 + ((z + 1) % q) for z in range(q)]
    s_imgs = [1]  # infinity -> 0
    for z in range(q):
        if z == 0:
            s_imgs.append(0)  # 0 -> infinity
        else:
            s_imgs.append(1 + (-pow(z, q - 2, q)) % q)
    T = Permutation(t_imgs)
    S = Permutation(s_imgs)
    G = PermGroup(deg, [T, S])
    expected = q * (q * q - 1) // 2
    assert G.order() == expected, "PSL(2,q) construction has wrong order"
    return G


@lru_cache(maxsize=1)
def scott_pair() -> tuple[PermGroup, PermGroup, PermGroup]:
    """The two non-conjugate Alt(5) subgroup classes of PSL(2, 29).

    Deterministic construction: scan pairs (x, y) with |x| = 2, |y| = 3 in
    lexicographic element order; any pair with |xy| = 5 generates an Alt(5).
    The first subgroup found represents the class called L0; the first one
    outside the conjugation orbit of L0 represents L1.  Both have order 60
    and index 203.
    """
    omega = psl2(29)
    elems = omega.elements()
    invs = [e for e in elems if e.order() == 2]
    threes = [e for e in elems if e.order() == 3]
    xs = np.array([e.imgs for e in invs], dtype=np.int64)
    ys = np.array([e.imgs for e in threes], dtype=np.int64)
    table = _kernels.product_order_table(xs, ys)
    good = np.argwhere(table == 5)

    first_orbit: set[frozenset] | None = None
    L0 = L1 = None
    for i, j in good:
        x, y = invs[int(i)], threes[int(j)]
        sub_elems = _closure_elements(omega.degree, [x, y], cap=61)
        assert sub_elems is not None and len(sub_elems) == 60, \
            "(2,3,5) pair must generate Alt(5)"
        key = _subgroup_key(sub_elems)
        if L0 is None:
            L0 = PermGroup(omega.degree, [x, y])
            first_orbit = _conjugation_orbit(omega, sub_elems)
            continue
        if key not in first_orbit:
            L1 = PermGroup(omega.degree, [x, y])
            break
    assert L0 is not None and L1 is not None, "Alt(5) pair search failed"
    return omega, L0, L1


def _conjugation_orbit(G: PermGroup, sub_elems: list[Permutation]) -> set[frozenset]:
    orbit = {_subgroup_key(sub_elems)}
    frontier = [sub_elems]
    while frontier:
        new = []
        for es in frontier:
            for g in G.gens:
                ces = [e.conjugate(g) for e in es]
                key = _subgroup_key(ces)
                if key not in orbit:
                    orbit.add(key)
                    new.append(ces)
        frontier = new
    return orbit


def is_simple(G: PermGroup, order_bound: int = DEFAULT_ORDER_BOUND) -> bool:
    """Simplicity test: the normal closure of every nontrivial class is G."""
    n = G.order()
    if n == 1:
        return False
    classes = conjugacy_classes(G, order_bound=order_bound)
    for rep in classes.representatives:
        if rep.is_identity():
            continue
        if G.normal_closure([rep]).order() != n:
            return False
    return True


# ---------------------------------------------------------------------------
# text format: "degree n" then one generator per line in cycle notation
# ---------------------------------------------------------------------------

def parse_group(text: str) -> PermGroup:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("degree"):
        raise ValueError("group file must start with 'degree n'")
    try:
        degree = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ValueError("malformed degree line") from None
    gens = [parse_cycles(ln, degree) for ln in lines[1:]]
    return PermGroup(degree, gens)


def format_group(G: PermGroup) -> str:
    lines = [f"degree {G.degree}"]
    if G.gens:
        lines.extend(format_cycles(g) for g in G.gens)
    else:
        lines.append("()")
    return "\n".join(lines) + "\n"
