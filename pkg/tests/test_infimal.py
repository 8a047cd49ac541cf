import random
from fractions import Fraction

import pytest

from pdesctl import (
    EpsProb,
    NotSublanguageError,
    Pdes,
    ZERO,
    check_controllable,
    check_observable,
    infimal_co_support,
    infimal_pipeline,
    infimal_superlanguage,
    is_subautomaton,
    is_sublanguage,
    language_equivalent,
    observer,
    product,
    refine_to_normal,
    strip_eps_edges,
)
from conftest import (
    E,
    observation_scaled_spec,
    random_alphabet,
    random_plant,
    random_subspec,
)

F = Fraction


def ratio(a, word, e):
    lw = a.eval_language(word)
    le = a.eval_language(word + (e,))
    if lw.is_zero:
        return None
    return le / lw if not le.is_zero else ZERO


# -- support-level (non-probabilistic) oracles ---------------------------


def support_controllable_brute(k, m, depth):
    """Classic controllability of supp(k) w.r.t. supp(m): every plant
    uncontrollable extension of a supported string stays supported."""
    queue = [((), k.initial, m.initial)]
    seen = {(k.initial, m.initial)}
    while queue:
        word, sk, sm = queue.pop(0)
        for e in k.alphabet.uncontrollable_events():
            if m.target(sm, e) is not None and k.target(sk, e) is None:
                return False
        if len(word) >= depth:
            continue
        for e in k.alphabet.events:
            tk, tm = k.target(sk, e), m.target(sm, e)
            if tk is None:
                continue
            assert tm is not None
            if (tk, tm) not in seen:
                seen.add((tk, tm))
                queue.append((word + (e,), tk, tm))
    return True


def support_observable_brute(k, m, depth):
    """Classic observability of supp(k) w.r.t. supp(m): observation-equal
    supported strings enable the same controllable continuations whenever
    the plant allows them."""
    init = (k.initial, m.initial, k.initial, m.initial)
    queue = [((), (), *init)]
    seen = {init}
    unobservable = k.alphabet.unobservable
    while queue:
        s1, s2, k1, m1, k2, m2 = queue.pop(0)
        for e in k.alphabet.controllable_events():
            if k.target(k1, e) is not None and m.target(m2, e) is not None:
                if k.target(k2, e) is None:
                    return False
        if max(len(s1), len(s2)) >= depth:
            continue
        moves = []
        for e in k.alphabet.events:
            t1, u1 = k.target(k1, e), m.target(m1, e)
            t2, u2 = k.target(k2, e), m.target(m2, e)
            if t1 is not None and t2 is not None:
                moves.append((s1 + (e,), s2 + (e,), t1, u1, t2, u2))
            if e in unobservable:
                if t1 is not None:
                    moves.append((s1 + (e,), s2, t1, u1, k2, m2))
                if t2 is not None:
                    moves.append((s1, s2 + (e,), k1, m1, t2, u2))
        for item in moves:
            cfg = item[2:]
            if cfg not in seen:
                seen.add(cfg)
                queue.append(item)
    return True


def random_superspec_logic(rng, plant, spec):
    """Logic automaton whose support contains the spec's, built by keeping
    every spec transition and a random sprinkling of plant-only ones."""
    initial = (plant.initial, spec.initial)
    from pdesctl import ONE

    trans = {}
    queue = [initial]
    seen = {initial}
    while queue:
        x, q = queue.pop(0)
        for e in plant.alphabet.events:
            xt = plant.target(x, e)
            if xt is None:
                continue
            qt = spec.target(q, e) if q is not None else None
            if qt is None and (q is None or spec.rho(q, e).is_zero):
                if rng.random() < 0.7:
                    continue
                qt = None
            dst = (xt, qt)
            trans[((x, q), e)] = (dst, ONE)
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return Pdes(plant.alphabet, initial, trans, check_liveness=False)


BRANCH_ADDED = [
    ("s2",),
    ("s3",),
    ("s2", "s2"),
    ("s3", "s2"),
    ("s2", "s2", "s3"),
    ("s3", "s2", "s3"),
    ("s3", "s2", "s3", "s2"),
    ("s3", "s2", "s3", "s2", "s2"),
    ("s3", "s2", "s3", "s2", "s3"),
]

BRANCH_EXCLUDED = [
    ("s2", "s2", "s2"),
    ("s1", "s2", "s2", "s2"),
    ("s3", "s2", "s2"),
    ("s3", "s2", "s3", "s2", "s1"),
]


class TestCoSupport:
    def test_achievable_spec_is_fixpoint(self, robot):
        plant, spec = robot
        support = infimal_co_support(plant.logic(), spec.logic())
        assert language_equivalent(support, spec.logic())

    def test_branch_saturation(self, branches):
        plant, spec = branches
        support = infimal_co_support(plant.logic(), spec.logic())
        for word in BRANCH_ADDED:
            assert support.supports(word), word
        for word in BRANCH_EXCLUDED:
            assert not support.supports(word), word
        # the original support is preserved
        for word in [(), ("s1",), ("s1", "s2", "s2", "s3", "s2")]:
            assert support.supports(word)

    def test_fully_controllable_observable_alphabet_is_noop(self):
        rng = random.Random(211)
        from pdesctl import Alphabet

        for _ in range(20):
            events = ["e0", "e1", "e2"]
            alphabet = Alphabet.make(events, [], events)
            plant = random_plant(rng, alphabet, max_states=4)
            spec = random_subspec(rng, plant)
            support = infimal_co_support(plant.logic(), spec.logic())
            assert language_equivalent(support, spec.logic())

    def test_rejects_support_escaping_plant(self, loops):
        plant, spec = loops
        with pytest.raises(NotSublanguageError):
            infimal_co_support(spec.logic(), plant.logic())

    def test_result_is_controllable_and_observable(self):
        rng = random.Random(223)
        for _ in range(40):
            alphabet = random_alphabet(rng, max_events=3)
            plant = random_plant(rng, alphabet, max_states=4)
            spec = random_subspec(rng, plant)
            support = infimal_co_support(plant.logic(), spec.logic())
            depth = len(support.states) * len(plant.states) + 2
            assert support_controllable_brute(support, plant.logic(), depth)
            assert support_observable_brute(support, plant.logic(), min(depth, 12))

    def test_contained_in_sampled_superlanguages(self):
        rng = random.Random(227)
        for _ in range(25):
            alphabet = random_alphabet(rng, max_events=3)
            plant = random_plant(rng, alphabet, max_states=4)
            spec = random_subspec(rng, plant)
            inf_support = infimal_co_support(plant.logic(), spec.logic())
            for _ in range(3):
                seed = random_superspec_logic(rng, plant, spec)
                member = infimal_co_support(plant.logic(), seed)
                assert is_sublanguage(inf_support, member).holds


class TestRefineToNormal:
    def test_branch_shapes(self, branches):
        plant, spec = branches
        support = infimal_co_support(plant.logic(), spec.logic())
        pair = refine_to_normal(plant, spec, support)
        assert is_subautomaton(pair.h_n, pair.g_n)
        assert language_equivalent(pair.g_n, plant)
        assert language_equivalent(pair.h_n.logic(), support)
        for a in (pair.g_n, pair.h_n):
            assert observer(a).is_partition(a.states)
        # original spec values survive; added strings are infinitesimal
        assert pair.h_n.eval_language(("s1",)) == E(1, 5)
        assert pair.h_n.eval_language(("s1", "s2")) == E(1, 20)
        assert pair.h_n.eval_language(("s3",)) == EpsProb(F(1), 1)
        assert pair.h_n.eval_language(("s3", "s2")) == EpsProb(F(1), 2)

    def test_trivial_when_spec_equals_plant(self, robot):
        plant, _ = robot
        support = infimal_co_support(plant.logic(), plant.logic())
        pair = refine_to_normal(plant, plant, support)
        assert language_equivalent(pair.g_n, plant)
        assert language_equivalent(pair.h_n, plant)
        assert not pair.h_n.has_eps_probabilities()


BRANCH_RESULT_RATIOS = [
    ((), "s1", F(1, 5)),
    ((), "s2", F(1, 10)),
    ((), "s3", F(2, 5)),
    (("s1",), "s2", F(1, 4)),
    (("s1",), "s3", F(1, 2)),
    (("s1", "s2"), "s2", F(1, 2)),
    (("s1", "s2", "s2"), "s3", F(1, 2)),
    (("s1", "s2", "s2", "s3"), "s2", F(3, 4)),
    (("s3",), "s2", F(1, 2)),
    (("s3", "s2"), "s3", F(1, 2)),
    (("s3", "s2", "s3"), "s2", F(3, 5)),
    (("s3", "s2", "s3", "s2"), "s2", F(1, 10)),
    (("s3", "s2", "s3", "s2"), "s3", F(2, 5)),
]


class TestReweight:
    def test_branch_golden_ratios(self, branches):
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        for word, e, expect in BRANCH_RESULT_RATIOS:
            assert ratio(res.result, word, e) == EpsProb(expect), (word, e)

    def test_identity_when_spec_normal_equals_plant_normal(self, robot):
        plant, _ = robot
        res = infimal_pipeline(plant, plant)
        assert language_equivalent(res.result, plant)

    def test_cell_maximum_hand_check(self, branches):
        # the first observation cell mixes the infinitesimal branch entry
        # with an ordinary ratio of 1/2, so the scaled entry probability
        # is 1/2 of the plant's 1/5
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        assert res.result.eval_language(("s2",)) == E(1, 10)

    def test_structure_identical_to_spec_normal(self, branches):
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        assert set(res.result.states) == set(res.spec_normal.states)
        tilde = {k: v[0] for k, v in res.result.transition_map().items()}
        normal = {k: v[0] for k, v in res.spec_normal.transition_map().items()}
        assert tilde == normal

    def test_sandwich(self, branches):
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        assert is_sublanguage(res.spec_normal, res.result).holds
        assert is_sublanguage(res.result, res.plant_normal).holds

    def test_result_achievable_wrt_normal_plant(self, branches):
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        assert check_controllable(res.plant_normal, res.result).holds
        assert check_observable(res.plant_normal, res.result).holds

    def test_argmax_witness_exists(self, branches):
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        g_n, h_n, tilde = res.plant_normal, res.spec_normal, res.result
        cells = observer(h_n).cells
        cell_of = {s: cell for cell in cells for s in cell}
        for (x, e), (dst, p) in tilde.transition_map().items():
            if e not in tilde.alphabet.controllable or not p.is_ordinary:
                continue
            k = p / g_n.rho(x, e)
            achieved = any(
                not h_n.rho(y, e).is_zero and h_n.rho(y, e) / g_n.rho(y, e) == k
                for y in cell_of[x]
            )
            assert achieved, (x, e)


class TestPipeline:
    def test_spec_equals_plant(self, robot):
        plant, _ = robot
        assert language_equivalent(infimal_superlanguage(plant, plant), plant)

    def test_achievable_spec_returned_unchanged(self, robot):
        plant, spec = robot
        assert language_equivalent(infimal_superlanguage(plant, spec), spec)

    def test_rejects_non_sublanguage(self, robot):
        plant, spec = robot
        with pytest.raises(NotSublanguageError):
            infimal_superlanguage(spec, plant)

    def test_random_pipelines_validate(self):
        rng = random.Random(229)
        done = 0
        while done < 30:
            alphabet = random_alphabet(rng, max_events=3)
            plant = random_plant(rng, alphabet, max_states=4)
            spec = random_subspec(rng, plant)
            res = infimal_pipeline(plant, spec)
            assert is_subautomaton(res.spec_normal, res.plant_normal)
            assert is_sublanguage(res.spec_normal, res.result).holds
            assert is_sublanguage(res.result, res.plant_normal).holds
            assert check_controllable(res.plant_normal, res.result).holds
            assert check_observable(res.plant_normal, res.result).holds
            # the reweighting never alters the logical structure
            assert set(res.result.states) == set(res.spec_normal.states)
            assert {k: v[0] for k, v in res.result.transition_map().items()} == {
                k: v[0] for k, v in res.spec_normal.transition_map().items()
            }
            done += 1


class TestClosureUnderIntersection:
    def test_controllable_closed_under_product(self):
        rng = random.Random(233)
        done = 0
        while done < 40:
            alphabet = random_alphabet(rng, max_events=3)
            plant = random_plant(rng, alphabet, max_states=4)
            spec1 = observation_scaled_spec(rng, plant)
            spec2 = observation_scaled_spec(rng, plant)
            assert check_controllable(plant, spec1).holds
            assert check_controllable(plant, spec2).holds
            both = product(spec1, spec2)
            assert check_controllable(plant, both).holds
            done += 1

    def test_observable_closed_under_product(self):
        rng = random.Random(239)
        done = 0
        while done < 40:
            alphabet = random_alphabet(rng, max_events=3)
            plant = random_plant(rng, alphabet, max_states=4)
            spec1 = observation_scaled_spec(rng, plant, scale_uncontrollable=True)
            spec2 = observation_scaled_spec(rng, plant, scale_uncontrollable=True)
            assert check_observable(plant, spec1).holds
            assert check_observable(plant, spec2).holds
            both = product(spec1, spec2)
            assert check_observable(plant, both).holds
            done += 1


class TestStripEps:
    def test_strips_only_infinitesimal_edges(self, branches):
        plant, spec = branches
        res = infimal_pipeline(plant, spec)
        pair_h = res.spec_normal
        stripped = strip_eps_edges(pair_h)
        assert not stripped.has_eps_probabilities()
        assert language_equivalent(stripped, spec)
        # the tightened result has no infinitesimal edges here, so the
        # stripper leaves it alone
        assert language_equivalent(strip_eps_edges(res.result), res.result)
