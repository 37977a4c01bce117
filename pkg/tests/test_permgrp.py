import random
from math import factorial

import pytest

from nilcoset.exactla import AbelianInvariants
from nilcoset.permgrp import (
    CosetSpace, GroupTooLarge, Permutation, PermGroup, abelian_section_invariants,
    abelianization_finite, alternating, conjugacy_classes, coset_action, cyclic,
    dicyclic, dihedral, direct_product, format_cycles, format_group, group_order,
    is_conjugate_subgroups, is_simple, klein_four, parse_cycles, parse_group,
    permutation_character, psl2, quaternion8, scott_pair, semidirect_product,
    subgroups_up_to_conjugacy, symmetric, trivial_group,
)
from nilcoset.permgrp import _closure_elements, all_subgroups_bruteforce


# -- Permutation --------------------------------------------------------------

def test_permutation_compose_left_to_right():
    p = parse_cycles("(1 2)", 3)
    q = parse_cycles("(2 3)", 3)
    # apply p first: 1 -> 2 -> 3
    assert (p * q)(0) == 2


def test_permutation_roundtrip_and_order():
    p = parse_cycles("(1 2 3)(4 5)", 6)
    assert parse_cycles(format_cycles(p), 6) == p
    assert p.order() == 6
    assert p.cycle_type() == (1, 2, 3)
    assert (p * p.inverse()).is_identity()
    assert p ** 6 == Permutation.identity(6)
    assert p ** -1 == p.inverse()


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation([0, 0, 1])
    with pytest.raises(ValueError):
        parse_cycles("(1 1 2)", 3)


# -- orders -------------------------------------------------------------------

def test_group_order_psl2_29():
    assert group_order(psl2(29)) == 12180


def test_group_order_trivial():
    assert group_order(trivial_group(4)) == 1


def test_group_order_psl2_7_formula():
    q = 7
    assert group_order(psl2(7)) == q * (q * q - 1) // 2  # 168


def test_psl2_family_against_formula():
    for q in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61):
        G = psl2(q)
        assert G.degree == q + 1
        assert G.order() == q * (q * q - 1) // 2


def test_psl2_rejects_bad_q():
    with pytest.raises(ValueError):
        psl2(9)
    with pytest.raises(ValueError):
        psl2(2)


def test_chain_order_matches_bruteforce_closure():
    for G in [symmetric(4), dihedral(6), dicyclic(3), alternating(4),
              dicyclic(4), direct_product(symmetric(3), cyclic(4)),
              dihedral(8), psl2(5)]:
        elems = _closure_elements(G.degree, list(G.gens), cap=1001)
        assert elems is not None and len(elems) == G.order()


def test_membership_agrees_with_enumeration():
    G = dihedral(6)
    elems = set(e.imgs for e in G.elements())
    S = symmetric(6)
    for x in S.elements():
        assert G.contains(x) == (x.imgs in elems)


# -- catalog constructors -----------------------------------------------------

def test_direct_product_small():
    G = direct_product(cyclic(2), cyclic(3))
    assert G.order() == 6
    assert G.is_abelian()


def test_direct_product_psl29_squared():
    G = direct_product(psl2(29), psl2(29))
    assert G.order() == 12180 ** 2


def test_symmetric_factorial():
    assert symmetric(6).order() == factorial(6)


def test_quaternion_structure():
    q8 = quaternion8()
    assert q8.order() == 8
    assert sum(1 for e in q8.elements() if e.order() == 2) == 1


def test_dicyclic_orders():
    for n in (2, 3, 4):
        assert dicyclic(n).order() == 4 * n


def test_semidirect_d4_from_action():
    # C4 x| C2 with inversion is dihedral of order 8
    c4, c2 = cyclic(4), cyclic(2)
    inv = c4.gens[0].inverse()
    G = semidirect_product(c4, c2, [[inv]])
    assert G.order() == 8
    assert abelianization_finite(G) == AbelianInvariants(0, (2, 2))
    assert not G.is_abelian()


def test_semidirect_distinguishes_sd16_m16():
    c8, c2 = cyclic(8), cyclic(2)
    sd16 = semidirect_product(c8, c2, [[c8.gens[0] ** 3]])
    m16 = semidirect_product(c8, c2, [[c8.gens[0] ** 5]])
    assert sd16.order() == m16.order() == 16
    orders_sd = sorted(e.order() for e in sd16.elements())
    orders_m = sorted(e.order() for e in m16.elements())
    assert orders_sd != orders_m


def test_semidirect_rejects_non_automorphism():
    c4, c2 = cyclic(4), cyclic(2)
    with pytest.raises(ValueError):
        semidirect_product(c4, c2, [[c4.gens[0] ** 2]])  # a -> a^2 not bijective


# -- conjugacy classes --------------------------------------------------------

def test_conjugacy_classes_s3():
    cc = conjugacy_classes(symmetric(3))
    assert sorted(cc.class_sizes) == [1, 2, 3]
    assert sum(cc.class_sizes) == 6
    assert cc.representatives[0].is_identity()


def test_conjugacy_classes_trivial():
    cc = conjugacy_classes(trivial_group(2))
    assert len(cc) == 1


def test_conjugacy_classes_psl29_consistency():
    cc = conjugacy_classes(psl2(29))
    assert sum(cc.class_sizes) == 12180
    for s, c in zip(cc.class_sizes, cc.centralizer_orders):
        assert s * c == 12180


# -- coset actions ------------------------------------------------------------

def test_coset_action_whole_group():
    G = symmetric(3)
    act, char = coset_action(G, G)
    assert act.degree == 1
    assert all(v == 1 for v in char.values)


def test_coset_action_regular():
    G = symmetric(3)
    act, char = coset_action(G, trivial_group(3))
    assert act.degree == 6
    assert char.values == (6, 0, 0)


def test_coset_action_transitive_and_kernel_is_core():
    rng = random.Random(5)
    for G in [symmetric(4), dihedral(6), alternating(4)]:
        subs = subgroups_up_to_conjugacy(G)
        for H in subs:
            space = CosetSpace(G, H)
            act = PermGroup(space.index, [space.act(g) for g in G.gens])
            # transitivity: orbit of point 0 is everything
            orbit = {0}
            frontier = [0]
            while frontier:
                new = []
                for p in frontier:
                    for g in act.gens:
                        if g.imgs[p] not in orbit:
                            orbit.add(g.imgs[p])
                            new.append(g.imgs[p])
                frontier = new
            assert len(orbit) == space.index
            # kernel of the action equals the normal core of H
            kernel = [x for x in G.elements() if space.act(x).is_identity()]
            core_elems = set(e.imgs for e in H.elements())
            for x in space.reps[1:]:
                conj = {(x * h * x.inverse()).imgs for h in H.elements()}
                core_elems &= conj
            assert set(k.imgs for k in kernel) == core_elems


def test_character_identity_value_and_burnside():
    G = symmetric(4)
    cc = conjugacy_classes(G)
    for H in subgroups_up_to_conjugacy(G):
        act, char = coset_action(G, H)
        index = G.order() // H.order()
        assert char.values[0] == index
        # Burnside: average fixed points = number of orbits = 1 (transitive)
        total = sum(s * v for s, v in zip(cc.class_sizes, char.values))
        assert total == G.order()


def test_permutation_character_matches_coset_action():
    G = symmetric(4)
    for H in subgroups_up_to_conjugacy(G):
        _, char = coset_action(G, H)
        assert permutation_character(G, H) == char


# -- subgroup conjugacy -------------------------------------------------------

def test_is_conjugate_identity_case():
    G = symmetric(4)
    H = PermGroup(4, [parse_cycles("(1 2)(3 4)", 4)])
    ok, w = is_conjugate_subgroups(G, H, H)
    assert ok and w.is_identity()


def test_klein_pair_in_s6_not_conjugate():
    G = symmetric(6)
    H1 = PermGroup(6, [parse_cycles("(1 2)(3 4)", 6), parse_cycles("(1 3)(2 4)", 6)])
    H2 = PermGroup(6, [parse_cycles("(1 2)(3 4)", 6), parse_cycles("(1 2)(5 6)", 6)])
    assert H1.order() == H2.order() == 4
    ok, w = is_conjugate_subgroups(G, H1, H2)
    assert not ok and w is None


def test_conjugate_by_construction():
    rng = random.Random(9)
    G = symmetric(5)
    H = PermGroup(5, [parse_cycles("(1 2 3)", 5)])
    for _ in range(5):
        g = G.random_element(rng)
        Hg = PermGroup(5, [h.conjugate(g) for h in H.gens])
        ok, w = is_conjugate_subgroups(G, H, Hg)
        assert ok
        for h in H.gens:
            assert Hg.contains(h.conjugate(w))


# -- subgroup enumeration -----------------------------------------------------

def test_subgroups_s3():
    assert len(subgroups_up_to_conjugacy(symmetric(3))) == 4


def test_subgroups_q8():
    assert len(subgroups_up_to_conjugacy(quaternion8())) == 6


def test_subgroups_trivial():
    assert len(subgroups_up_to_conjugacy(trivial_group(1))) == 1


def test_subgroups_s4_against_bruteforce():
    G = symmetric(4)
    classes = subgroups_up_to_conjugacy(G)
    brute = all_subgroups_bruteforce(G)
    assert len(brute) == 30  # textbook subgroup count of S4
    assert len(classes) == 11
    # the conjugation orbits of the class representatives partition the
    # brute-force subgroup list
    covered = set()
    elems = G.elements()
    for H in classes:
        h_elems = H.elements()
        for g in elems:
            covered.add(frozenset((e.conjugate(g)).imgs for e in h_elems))
    assert covered == brute


def test_subgroups_a5_complete():
    # nonsolvable, order 60: the brute-force completeness check runs inside
    assert len(subgroups_up_to_conjugacy(alternating(5))) == 9


def test_subgroups_order_bound():
    with pytest.raises(GroupTooLarge):
        subgroups_up_to_conjugacy(psl2(29))


# -- derived subgroups and abelianizations ------------------------------------

def test_abelianization_a5_trivial():
    G = alternating(5)
    assert G.derived_subgroup().order() == 60
    assert abelianization_finite(G).is_trivial()


def test_abelianization_cyclic12():
    assert abelianization_finite(cyclic(12)) == AbelianInvariants(0, (12,))


def test_abelianization_d4_exhaustive_oracle():
    G = dihedral(4)
    # oracle: exhaustive commutator closure over all element pairs
    elems = G.elements()
    comms = [a.inverse() * b.inverse() * a * b for a in elems for b in elems]
    D = PermGroup(G.degree, comms)
    assert D.order() == G.derived_subgroup().order() == 2
    assert abelianization_finite(G) == AbelianInvariants(0, (2, 2))


def test_abelian_section_lcs_of_d4():
    G = dihedral(4)
    series = G.lower_central_series()
    assert [H.order() for H in series[:3]] == [8, 2, 1]
    assert abelian_section_invariants(series[0], series[1]) == AbelianInvariants(0, (2, 2))
    assert abelian_section_invariants(series[1], series[2]) == AbelianInvariants(0, (2,))


def test_nilpotency_flags():
    assert dihedral(4).is_nilpotent()
    assert not symmetric(3).is_nilpotent()
    assert symmetric(4).is_solvable()
    assert not alternating(5).is_solvable()
    assert alternating(5).is_perfect()
    assert is_simple(alternating(5))
    assert not is_simple(symmetric(4))


# -- Scott pair ---------------------------------------------------------------

def test_scott_pair_orders_and_index():
    omega, L0, L1 = scott_pair()
    assert L0.order() == 60 and L1.order() == 60
    assert omega.order() // L0.order() == 203
    assert omega.order() // L1.order() == 203
    assert omega.has_subgroup(L0) and omega.has_subgroup(L1)


def test_scott_pair_not_conjugate():
    omega, L0, L1 = scott_pair()
    ok, _ = is_conjugate_subgroups(omega, L0, L1)
    assert not ok


def test_scott_pair_characters_equal():
    omega, L0, L1 = scott_pair()
    cc = conjugacy_classes(omega)
    assert permutation_character(omega, L0, cc) == permutation_character(omega, L1, cc)


def test_scott_pair_deterministic():
    omega, L0, L1 = scott_pair()
    first = ([g.imgs for g in L0.gens], [g.imgs for g in L1.gens])
    scott_pair.cache_clear()
    omega2, M0, M1 = scott_pair()
    second = ([g.imgs for g in M0.gens], [g.imgs for g in M1.gens])
    assert first == second


# -- text format ---------------------------------------------------------------

def test_group_text_roundtrip():
    G = dihedral(5)
    text = format_group(G)
    H = parse_group(text)
    assert H.degree == G.degree
    assert H.same_group(G)


def test_group_text_trivial():
    G = parse_group("degree 3\n()\n")
    assert G.order() == 1


def test_group_text_rejects_garbage():
    with pytest.raises(ValueError):
        parse_group("gens a b\n")
    with pytest.raises(ValueError):
        parse_group("degree 3\n(1 5)\n")
