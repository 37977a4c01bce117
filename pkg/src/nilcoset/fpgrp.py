"""Finitely presented groups.

Words over a generator alphabet, presentations, homomorphisms, Todd-Coxeter
coset enumeration (HLT with lookahead, Felsch behind a flag) and
Reidemeister-Schreier rewriting of finite-index subgroup presentations.

Coset 1 is the subgroup in all external formats; internally cosets are
0-based.  Tables are canonicalized by breadth-first renumbering with
generator columns scanned before inverse columns, so the two enumeration
strategies produce byte-identical results.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .exactla import IntMatrix
from .permgrp import PermGroup, Permutation


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------

def _reduce_syllables(syllables: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for g, e in syllables:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([g, e])
    return tuple((g, e) for g, e in out)


@dataclass(frozen=True)
class Word:
    """Freely reduced word: syllables (generator index, nonzero exponent)."""
    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "syllables", _reduce_syllables(self.syllables))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.syllables + other.syllables)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.syllables)))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        out = Word()
        for _ in range(k):
            out = out * self
        return out

    def is_identity(self) -> bool:
        return not self.syllables

    def length(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def max_gen(self) -> int:
        return max((g for g, _ in self.syllables), default=-1)

    def letters(self) -> list[tuple[int, int]]:
        """Expand to single letters (gen, +1 or -1)."""
        out = []
        for g, e in self.syllables:
            s = 1 if e > 0 else -1
            out.extend([(g, s)] * abs(e))
        return out

    def exponent_sums(self, n_gens: int) -> list[int]:
        sums = [0] * n_gens
        for g, e in self.syllables:
            sums[g] += e
        return sums


def commutator(x: Word, y: Word) -> Word:
    """[x, y] = x^-1 y^-1 x y."""
    return x.inverse() * y.inverse() * x * y


# -- word text syntax ---------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|-?\d+|[\^\*\(\)\[\],])")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"cannot tokenize {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _WordParser:
    """letters with optional ^k, * or juxtaposition, [x,y], parentheses."""

    def __init__(self, tokens: list[str], names: dict[str, int]):
        self.tokens = tokens
        self.pos = 0
        self.names = names

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse_expr(self, stop: tuple[str, ...] = ()) -> Word:
        out = Word()
        while True:
            tok = self.peek()
            if tok is None or tok in stop:
                return out
            if tok == "*":
                self.take()
                continue
            out = out * self.parse_term()

    def parse_term(self) -> Word:
        atom = self.parse_atom()
        if self.peek() == "^":
            self.take()
            tok = self.take()
            try:
                k = int(tok)
            except ValueError:
                raise ValueError(f"expected integer exponent, got {tok!r}") from None
            return atom ** k
        return atom

    def parse_atom(self) -> Word:
        tok = self.take()
        if tok == "(":
            inner = self.parse_expr(stop=(")",))
            if self.take() != ")":
                raise ValueError("unbalanced parenthesis")
            return inner
        if tok == "[":
            left = self.parse_expr(stop=(",",))
            if self.take() != ",":
                raise ValueError("expected ',' in commutator")
            right = self.parse_expr(stop=("]",))
            if self.take() != "]":
                raise ValueError("unbalanced bracket")
            return commutator(left, right)
        if tok in self.names:
            return Word(((self.names[tok], 1),))
        raise ValueError(f"unknown generator {tok!r}")


def parse_word(text: str, names: Sequence[str]) -> Word:
    name_map = {n: i for i, n in enumerate(names)}
    parser = _WordParser(_tokenize(text), name_map)
    w = parser.parse_expr()
    if parser.peek() is not None:
        raise ValueError(f"trailing tokens in word {text!r}")
    return w


def format_word(w: Word, names: Sequence[str]) -> str:
    if w.is_identity():
        return "()"
    parts = []
    for g, e in w.syllables:
        parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
    return "*".join(parts)


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------

def _default_names(n: int) -> tuple[str, ...]:
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    if n <= len(alphabet):
        return tuple(alphabet[:n])
    return tuple(f"x{i + 1}" for i in range(n))


@dataclass(frozen=True)
class FinitePresentation:
    n_gens: int
    relators: tuple[Word, ...] = ()
    names: tuple[str, ...] = ()

    def __post_init__(self):
        names = self.names or _default_names(self.n_gens)
        if len(names) != self.n_gens or len(set(names)) != self.n_gens:
            raise ValueError("need n_gens distinct generator names")
        for r in self.relators:
            if r.max_gen() >= self.n_gens:
                raise ValueError("relator uses an unknown generator")
        object.__setattr__(self, "names", tuple(names))
        object.__setattr__(self, "relators",
                           tuple(r for r in self.relators if not r.is_identity()))

    def word(self, text: str) -> Word:
        return parse_word(text, self.names)

    def __str__(self):
        rel = ", ".join(format_word(r, self.names) for r in self.relators)
        return f"< {' '.join(self.names)} | {rel} >"


def free_group(n: int, names: Sequence[str] | None = None) -> FinitePresentation:
    return FinitePresentation(n, (), tuple(names) if names else ())


def parse_presentation(text: str) -> FinitePresentation:
    """Text format: first line ``gens a b c ...``, then one relator per line."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("gens"):
        raise ValueError("presentation file must start with 'gens ...'")
    names = tuple(lines[0].split()[1:])
    if not names:
        raise ValueError("no generators declared")
    relators = tuple(parse_word(ln, names) for ln in lines[1:])
    return FinitePresentation(len(names), relators, names)


def format_presentation(pres: FinitePresentation) -> str:
    lines = ["gens " + " ".join(pres.names)]
    lines.extend(format_word(r, pres.names) for r in pres.relators)
    return "\n".join(lines) + "\n"


def abelianization_matrix(pres: FinitePresentation) -> IntMatrix:
    """Relators-by-generators matrix of exponent sums."""
    rows = [r.exponent_sums(pres.n_gens) for r in pres.relators]
    return IntMatrix.from_rows(rows, cols=pres.n_gens)


# ---------------------------------------------------------------------------
# homomorphisms
# ---------------------------------------------------------------------------

class RelatorViolation(ValueError):
    def __init__(self, index: int, msg: str):
        super().__init__(msg)
        self.index = index


def evaluate_word_perm(w: Word, images: Sequence[Permutation], degree: int) -> Permutation:
    out = Permutation.identity(degree)
    for g, e in w.syllables:
        out = out * (images[g] ** e)
    return out


def evaluate_word_words(w: Word, images: Sequence[Word]) -> Word:
    out = Word()
    for g, e in w.syllables:
        out = out * (images[g] ** e)
    return out


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism from a finitely presented group.

    The target is a PermGroup (images are permutations, relator triviality
    checked exactly) or a FinitePresentation (images are words; relator
    triviality is checked by free reduction, falling back to a bounded coset
    enumeration of the target when needed).
    """
    source: FinitePresentation
    target: Union[FinitePresentation, PermGroup]
    images: tuple

    def __post_init__(self):
        images = tuple(self.images)
        if len(images) != self.source.n_gens:
            raise ValueError("need one image per source generator")
        object.__setattr__(self, "images", images)
        self._validate()

    def _validate(self):
        if isinstance(self.target, PermGroup):
            deg = self.target.degree
            for img in self.images:
                if not self.target.contains(img):
                    raise ValueError("image lies outside the target group")
            for idx, r in enumerate(self.source.relators):
                if not evaluate_word_perm(r, self.images, deg).is_identity():
                    raise RelatorViolation(
                        idx, f"relator {idx} does not map to the identity")
        else:
            unresolved = []
            for idx, r in enumerate(self.source.relators):
                if not evaluate_word_words(r, self.images).is_identity():
                    unresolved.append(idx)
            if unresolved:
                perm = _try_finite_realization(self.target)
                if perm is None:
                    raise RelatorViolation(
                        unresolved[0],
                        f"relator {unresolved[0]} is not freely trivial in the "
                        "target and the target could not be realized as a "
                        "finite group within budget")
                target_gens, degree = perm
                for idx in unresolved:
                    w = evaluate_word_words(self.source.relators[idx], self.images)
                    if not evaluate_word_perm(w, target_gens, degree).is_identity():
                        raise RelatorViolation(
                            idx, f"relator {idx} does not map to the identity")

    def map_word(self, w: Word):
        if isinstance(self.target, PermGroup):
            return evaluate_word_perm(w, self.images, self.target.degree)
        return evaluate_word_words(w, self.images)


def _try_finite_realization(pres: FinitePresentation,
                            max_cosets: int = 4096) -> tuple[list[Permutation], int] | None:
    """Regular permutation representation via coset enumeration, or None."""
    try:
        table = todd_coxeter(pres, [], max_cosets=max_cosets)
    except EnumerationExceeded:
        return None
    return table.generator_permutations(), table.n_cosets


def perm_image(hom: GroupHom) -> PermGroup:
    """Image subgroup of a homomorphism into a permutation group."""
    if not isinstance(hom.target, PermGroup):
        raise TypeError("perm_image needs a permutation-group target")
    return PermGroup(hom.target.degree, list(hom.images))


# ---------------------------------------------------------------------------
# coset tables
# ---------------------------------------------------------------------------

class EnumerationExceeded(RuntimeError):
    """Coset limit hit before the enumeration completed.

    This signals "index unknown or above the budget", never nonexistence.
    """


@dataclass(frozen=True)
class CosetTable:
    """Complete coset table: row per coset, column 2i for generator i and
    column 2i + 1 for its inverse; coset 0 is the subgroup (coset 1 in
    1-based external formats)."""
    n_gens: int
    table: tuple[tuple[int, ...], ...]

    @property
    def n_cosets(self) -> int:
        return len(self.table)

    def generator_permutations(self) -> list[Permutation]:
        return [Permutation(row[2 * i] for row in self.table)
                for i in range(self.n_gens)]

    def trace(self, coset: int, w: Word) -> int:
        for g, s in w.letters():
            coset = self.table[coset][2 * g if s > 0 else 2 * g + 1]
        return coset


def _word_cols(w: Word) -> list[int]:
    return [2 * g if s > 0 else 2 * g + 1 for g, s in w.letters()]


class _Enumerator:
    def __init__(self, pres: FinitePresentation, subgroup_gens: Sequence[Word],
                 max_cosets: int):
        self.pres = pres
        self.ncols = 2 * pres.n_gens
        self.max_cosets = max_cosets
        self.table: list[list[int | None]] = [[None] * self.ncols]
        self.p = [0]
        self.n_alive = 1
        self.sub_cols = [_word_cols(w) for w in subgroup_gens]
        self.rel_cols = [_word_cols(r) for r in pres.relators]

    # -- union-find --------------------------------------------------------

    def rep(self, k: int) -> int:
        r = k
        while self.p[r] != r:
            r = self.p[r]
        while self.p[k] != r:
            self.p[k], k = r, self.p[k]
        return r

    def _merge(self, k: int, l: int, queue: list[int]) -> None:
        k, l = self.rep(k), self.rep(l)
        if k == l:
            return
        lo, hi = min(k, l), max(k, l)
        self.p[hi] = lo
        self.n_alive -= 1
        queue.append(hi)

    def coincidence(self, a: int, b: int) -> None:
        queue: list[int] = []
        self._merge(a, b, queue)
        qi = 0
        while qi < len(queue):
            gamma = queue[qi]
            qi += 1
            row = self.table[gamma]
            for x in range(self.ncols):
                delta = row[x]
                if delta is None:
                    continue
                self.table[delta][x ^ 1] = None
                mu, nu = self.rep(gamma), self.rep(delta)
                t = self.table[mu][x]
                if t is not None:
                    self._merge(nu, t, queue)
                else:
                    t2 = self.table[nu][x ^ 1]
                    if t2 is not None:
                        self._merge(mu, t2, queue)
                    else:
                        self.table[mu][x] = nu
                        self.table[nu][x ^ 1] = mu

    # -- definitions and scanning -------------------------------------------

    def define(self, alpha: int, x: int) -> int:
        if self.n_alive >= self.max_cosets:
            raise _NeedLookahead
        beta = len(self.table)
        self.table.append([None] * self.ncols)
        self.p.append(beta)
        self.n_alive += 1
        self.table[alpha][x] = beta
        self.table[beta][x ^ 1] = alpha
        return beta

    def scan(self, alpha: int, cols: list[int], fill: bool) -> None:
        f, i = alpha, 0
        b, j = alpha, len(cols) - 1
        while True:
            while i <= j and self.table[f][cols[i]] is not None:
                f = self.table[f][cols[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and self.table[b][cols[j] ^ 1] is not None:
                b = self.table[b][cols[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                self.table[f][cols[i]] = b
                self.table[b][cols[i] ^ 1] = f
                return
            if not fill:
                return
            self.define(f, cols[i])

    def lookahead(self) -> None:
        for alpha in range(len(self.table)):
            if self.p[alpha] != alpha:
                continue
            for cols in self.rel_cols:
                if self.p[alpha] != alpha:
                    break
                self.scan(alpha, cols, fill=False)

    def compress(self) -> None:
        live = [a for a in range(len(self.table)) if self.p[a] == a]
        remap = {a: i for i, a in enumerate(live)}
        new_table: list[list[int | None]] = []
        for a in live:
            row = self.table[a]
            new_table.append([remap[self.rep(v)] if v is not None else None
                              for v in row])
        self.table = new_table
        self.p = list(range(len(live)))
        self.n_alive = len(live)

    # -- strategies ----------------------------------------------------------

    def run_hlt(self) -> None:
        restarts = 0
        while True:
            try:
                for cols in self.sub_cols:
                    self.scan(self.rep(0), cols, fill=True)
                alpha = 0
                while alpha < len(self.table):
                    if self.p[alpha] == alpha:
                        for cols in self.rel_cols:
                            if self.p[alpha] != alpha:
                                break
                            self.scan(alpha, cols, fill=True)
                    alpha += 1
                return
            except _NeedLookahead:
                # the coset cap was hit mid-scan: deduce/collapse without new
                # definitions, then compress and rescan from the top
                before = self.n_alive
                self.lookahead()
                if self.n_alive == before:
                    raise EnumerationExceeded(
                        f"coset limit {self.max_cosets} reached") from None
                self.compress()
                restarts += 1
                if restarts > 200:
                    raise EnumerationExceeded(
                        "enumeration is thrashing at the coset limit") from None

    def run_felsch(self) -> None:
        try:
            for cols in self.sub_cols:
                self.scan(self.rep(0), cols, fill=True)
        except _NeedLookahead:
            raise EnumerationExceeded(
                f"coset limit {self.max_cosets} reached") from None
        while True:
            # deduction closure: rescan all relators everywhere, no filling
            changed = True
            while changed:
                before = (self.n_alive, self._defined_count())
                self.lookahead()
                changed = (self.n_alive, self._defined_count()) != before
            gap = self._first_gap()
            if gap is None:
                return
            alpha, x = gap
            try:
                self.define(alpha, x)
            except _NeedLookahead:
                raise EnumerationExceeded(
                    f"coset limit {self.max_cosets} reached") from None

    def _defined_count(self) -> int:
        return sum(1 for a in range(len(self.table)) if self.p[a] == a
                   for v in self.table[a] if v is not None)

    def _first_gap(self) -> tuple[int, int] | None:
        # generators before inverses within each coset
        col_order = [2 * i for i in range(self.pres.n_gens)] + \
                    [2 * i + 1 for i in range(self.pres.n_gens)]
        for alpha in range(len(self.table)):
            if self.p[alpha] != alpha:
                continue
            for x in col_order:
                if self.table[alpha][x] is None:
                    return alpha, x
        return None

    def result(self) -> CosetTable:
        self.compress()
        if any(v is None for row in self.table for v in row):
            raise EnumerationExceeded("table incomplete after enumeration")
        return _standardize(self.pres.n_gens, self.table)


class _NeedLookahead(Exception):
    pass


def _standardize(n_gens: int, table: list[list[int]]) -> CosetTable:
    """Breadth-first renumbering from coset 0, generators before inverses."""
    col_order = [2 * i for i in range(n_gens)] + [2 * i + 1 for i in range(n_gens)]
    remap = {0: 0}
    order = [0]
    qi = 0
    while qi < len(order):
        a = order[qi]
        qi += 1
        for x in col_order:
            b = table[a][x]
            if b not in remap:
                remap[b] = len(order)
                order.append(b)
    if len(order) != len(table):
        raise ValueError("coset table is not transitive")
    new = [[0] * (2 * n_gens) for _ in range(len(table))]
    for a in range(len(table)):
        for x in range(2 * n_gens):
            new[remap[a]][x] = remap[table[a][x]]
    return CosetTable(n_gens, tuple(tuple(r) for r in new))


def todd_coxeter(pres: FinitePresentation, subgroup_gens: Sequence[Word],
                 max_cosets: int, strategy: str = "hlt") -> CosetTable:
    """Coset table of <subgroup_gens> in the presented group.

    Raises EnumerationExceeded when the enumeration does not complete within
    max_cosets live cosets (which never proves the index infinite).  HLT
    with lookahead is the default; 'felsch' must produce the identical
    canonical table.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be at least 1")
    for w in subgroup_gens:
        if w.max_gen() >= pres.n_gens:
            raise ValueError("subgroup generator uses an unknown generator")
    enum = _Enumerator(pres, subgroup_gens, max_cosets)
    if strategy == "hlt":
        enum.run_hlt()
    elif strategy == "felsch":
        enum.run_felsch()
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    out = enum.result()
    validate_table(pres, subgroup_gens, out)
    return out


def validate_table(pres: FinitePresentation, subgroup_gens: Sequence[Word],
                   table: CosetTable) -> None:
    """Completeness, compatibility, relator closure, subgroup stabilization."""
    n = table.n_cosets
    for a in range(n):
        for i in range(pres.n_gens):
            fwd = table.table[a][2 * i]
            if table.table[fwd][2 * i + 1] != a:
                raise ValueError("generator and inverse actions are not mutually inverse")
    for a in range(n):
        for r in pres.relators:
            if table.trace(a, r) != a:
                raise ValueError("a relator does not act trivially")
    for w in subgroup_gens:
        if table.trace(0, w) != 0:
            raise ValueError("a subgroup generator moves coset 1")


# ---------------------------------------------------------------------------
# Reidemeister-Schreier
# ---------------------------------------------------------------------------

def _bfs_transversal(table: CosetTable) -> tuple[list[Word], set[tuple[int, int]]]:
    """Breadth-first Schreier transversal; returns (coset words, tree edges).

    Tree edges are stored as (coset, gen) pairs oriented along generators.
    """
    n_gens = table.n_gens
    col_order = [2 * i for i in range(n_gens)] + [2 * i + 1 for i in range(n_gens)]
    words: list[Word | None] = [None] * table.n_cosets
    words[0] = Word()
    tree: set[tuple[int, int]] = set()
    order = [0]
    qi = 0
    while qi < len(order):
        a = order[qi]
        qi += 1
        for x in col_order:
            b = table.table[a][x]
            if words[b] is None:
                g, s = divmod(x, 2)
                step = Word(((g, 1 if s == 0 else -1),))
                words[b] = words[a] * step
                if s == 0:
                    tree.add((a, g))
                else:
                    tree.add((b, g))
                order.append(b)
    return words, tree


def _schreier_data(table: CosetTable) -> tuple[list[Word], dict[tuple[int, int], Word]]:
    """Transversal words plus the Schreier generator word for each non-tree edge."""
    words, tree = _bfs_transversal(table)
    sgens: dict[tuple[int, int], Word] = {}
    for a in range(table.n_cosets):
        for g in range(table.n_gens):
            if (a, g) in tree:
                continue
            b = table.table[a][2 * g]
            w = words[a] * Word(((g, 1),)) * words[b].inverse()
            sgens[(a, g)] = w
    return words, sgens


def reidemeister_schreier(pres: FinitePresentation, table: CosetTable) -> FinitePresentation:
    """Presentation of the subgroup the coset table describes.

    Generators are the Schreier generators of the breadth-first transversal
    (trivial ones from tree edges are eliminated); relators are the
    conjugated original relators rewritten over them.
    """
    if table.n_gens != pres.n_gens:
        raise ValueError("table does not match the presentation")
    _check_table_compatible(pres, table)
    words, sgens = _schreier_data(table)
    index_of = {}
    k = 0
    for edge in sorted(sgens):
        if sgens[edge].is_identity():
            continue
        index_of[edge] = k
        k += 1

    def rewrite(start: int, r: Word) -> Word:
        out: list[tuple[int, int]] = []
        v = start
        for g, s in r.letters():
            if s > 0:
                edge = (v, g)
                nxt = table.table[v][2 * g]
            else:
                nxt = table.table[v][2 * g + 1]
                edge = (nxt, g)
            if edge in index_of:
                out.append((index_of[edge], s))
            v = nxt
        assert v == start
        return Word(tuple(out))

    relators = []
    seen = set()
    for a in range(table.n_cosets):
        for r in pres.relators:
            w = rewrite(a, r)
            if not w.is_identity() and w.syllables not in seen:
                seen.add(w.syllables)
                relators.append(w)
    return FinitePresentation(k, tuple(relators))


def _check_table_compatible(pres: FinitePresentation, table: CosetTable) -> None:
    for a in range(table.n_cosets):
        for i in range(pres.n_gens):
            if table.table[table.table[a][2 * i]][2 * i + 1] != a:
                raise ValueError("incompatible table")
        for r in pres.relators:
            if table.trace(a, r) != a:
                raise ValueError("incompatible table: relator does not close")


def presentation_from_perm(G: PermGroup, order_bound: int = 20000) -> FinitePresentation:
    """Presentation of a finite permutation group on its own generators.

    The regular action of G on itself is a complete coset table over the
    free group on the generators; the Schreier generators of its kernel,
    read as words, are defining relators for G (the Cayley-graph
    presentation).
    """
    elems = G.elements(limit=order_bound)
    index = {e.imgs: i for i, e in enumerate(elems)}
    rows = []
    for e in elems:
        row = []
        for g in G.gens:
            row.extend([index[(e * g).imgs], index[(e * g.inverse()).imgs]])
        rows.append(tuple(row))
    table = CosetTable(len(G.gens), tuple(rows))
    _, sgens = _schreier_data(table)
    relators = []
    seen = set()
    for edge in sorted(sgens):
        w = sgens[edge]
        if not w.is_identity() and w.syllables not in seen:
            seen.add(w.syllables)
            relators.append(w)
    return FinitePresentation(len(G.gens), tuple(relators))
