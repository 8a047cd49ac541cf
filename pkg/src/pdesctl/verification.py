"""Decision procedures for probabilistic controllability and observability.

Each check builds a testing automaton whose dump state is reachable
exactly when the property fails; breadth-first construction makes the
extracted witness shortest (ties broken by event order).  The brute
variants re-decide the same questions directly from the property
definitions, using language values rather than stored transition
probabilities, and serve as independent oracles.

Both procedures compare probabilities at spec-defined transitions: a
transition the specification never asks for does not, by itself, make
the specification uncontrollable.  (Synthesis is stricter; see
`scaling_from_spec`.)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .automata import (
    Pdes,
    State,
    Verdict,
    Witness,
    Word,
    require_same_alphabet,
)
from .values import EpsProb

Pair = Tuple[State, State]
Quad = Tuple[State, State, State, State]


@dataclass
class TestingAutomatonTC:
    """Pair-graph testing automaton for probabilistic controllability."""

    pairs: List[Pair]
    initial: Pair
    trans: Dict[Tuple[Pair, str], Pair]
    dump_edges: List[Tuple[Pair, str, EpsProb, EpsProb]]
    access: Dict[Pair, Word]

    @property
    def state_count(self) -> int:
        return len(self.pairs) + (1 if self.dump_edges else 0)

    @property
    def dump_reachable(self) -> bool:
        return bool(self.dump_edges)


@dataclass
class TestingAutomatonTO:
    """Quadruple testing automaton for probabilistic observability.

    Moves carry label pairs over the alphabet extended with the empty
    label (None); a one-sided move is only available for unobservable
    events, so reachable quadruples correspond exactly to string pairs
    with equal observations.
    """

    quads: List[Quad]
    initial: Quad
    trans: Dict[Tuple[Quad, Tuple[Optional[str], Optional[str]]], Quad]
    dump_edges: List[Tuple[Quad, str, EpsProb, EpsProb]]
    access: Dict[Quad, Tuple[Word, Word]]

    @property
    def state_count(self) -> int:
        return len(self.quads) + (1 if self.dump_edges else 0)

    @property
    def dump_reachable(self) -> bool:
        return bool(self.dump_edges)


def build_tc(plant: Pdes, spec: Pdes) -> TestingAutomatonTC:
    require_same_alphabet(plant, spec)
    alphabet = plant.alphabet
    initial = (plant.initial, spec.initial)
    access: Dict[Pair, Word] = {initial: ()}
    pairs = [initial]
    trans: Dict[Tuple[Pair, str], Pair] = {}
    dump_edges: List[Tuple[Pair, str, EpsProb, EpsProb]] = []
    queue = [initial]
    while queue:
        pair = queue.pop(0)
        x, q = pair
        for e in alphabet.uncontrollable_events():
            rs = spec.rho(q, e)
            if rs.is_zero:
                continue
            rp = plant.rho(x, e)
            if rp != rs:
                dump_edges.append((pair, e, rp, rs))
        for e in alphabet.events:
            rp = plant.rho(x, e)
            rs = spec.rho(q, e)
            if rp.is_zero or rs.is_zero:
                continue
            if e not in alphabet.controllable and rp != rs:
                continue  # this move dumps instead of advancing
            dst = (plant.target(x, e), spec.target(q, e))
            trans[(pair, e)] = dst
            if dst not in access:
                access[dst] = access[pair] + (e,)
                pairs.append(dst)
                queue.append(dst)
    return TestingAutomatonTC(pairs, initial, trans, dump_edges, access)


def check_controllable(plant: Pdes, spec: Pdes) -> Verdict:
    """Probabilistic controllability: along the spec's support, every
    spec-defined uncontrollable transition carries exactly the plant's
    probability."""
    tc = build_tc(plant, spec)
    if not tc.dump_edges:
        return Verdict(True)
    pair, e, rp, rs = tc.dump_edges[0]
    return Verdict(False, Witness((tc.access[pair],), e, rp, rs))


def build_to(plant: Pdes, spec: Pdes) -> TestingAutomatonTO:
    require_same_alphabet(plant, spec)
    alphabet = plant.alphabet
    initial = (plant.initial, spec.initial, plant.initial, spec.initial)
    access: Dict[Quad, Tuple[Word, Word]] = {initial: ((), ())}
    quads = [initial]
    trans: Dict[Tuple[Quad, Tuple[Optional[str], Optional[str]]], Quad] = {}
    dump_edges: List[Tuple[Quad, str, EpsProb, EpsProb]] = []
    queue = [initial]

    def defined(x, q, e):
        return not plant.rho(x, e).is_zero and not spec.rho(q, e).is_zero

    while queue:
        quad = queue.pop(0)
        x1, q1, x2, q2 = quad
        s1, s2 = access[quad]
        for e in alphabet.controllable_events():
            lhs = plant.rho(x1, e) * spec.rho(q2, e)
            rhs = plant.rho(x2, e) * spec.rho(q1, e)
            if lhs != rhs:
                dump_edges.append((quad, e, lhs, rhs))
        moves: List[Tuple[Tuple[Optional[str], Optional[str]], Quad]] = []
        for e in alphabet.events:
            if not (defined(x1, q1, e) and defined(x2, q2, e)):
                continue
            if e in alphabet.controllable:
                if plant.rho(x1, e) * spec.rho(q2, e) != plant.rho(x2, e) * spec.rho(q1, e):
                    continue  # dumps instead of advancing
            moves.append(
                ((e, e), (plant.target(x1, e), spec.target(q1, e), plant.target(x2, e), spec.target(q2, e)))
            )
        for e in alphabet.events:
            if e in alphabet.observable:
                continue
            if defined(x1, q1, e):
                moves.append(((e, None), (plant.target(x1, e), spec.target(q1, e), x2, q2)))
            if defined(x2, q2, e):
                moves.append(((None, e), (x1, q1, plant.target(x2, e), spec.target(q2, e))))
        for label, dst in moves:
            trans[(quad, label)] = dst
            if dst not in access:
                l1, l2 = label
                access[dst] = (
                    s1 + ((l1,) if l1 else ()),
                    s2 + ((l2,) if l2 else ()),
                )
                quads.append(dst)
                queue.append(dst)
    return TestingAutomatonTO(quads, initial, trans, dump_edges, access)


def check_observable(plant: Pdes, spec: Pdes) -> Verdict:
    """Probabilistic observability: any two support strings with the same
    observation induce proportionally consistent controllable transition
    probabilities (equal cross-products)."""
    to = build_to(plant, spec)
    if not to.dump_edges:
        return Verdict(True)
    quad, e, lhs, rhs = to.dump_edges[0]
    s1, s2 = to.access[quad]
    return Verdict(False, Witness((s1, s2), e, lhs, rhs))


# -- definitional brute forces ----------------------------------------


def brute_controllable(plant: Pdes, spec: Pdes, depth: int) -> Verdict:
    """Check the controllability definition directly, string by string.

    Enumerates support strings up to the given length in breadth-first
    order and compares one-step language ratios via cross-products of
    `eval_language` values.  Revisited state configurations are pruned:
    the checked condition depends on a string only through the pair of
    states it reaches, so the verdict saturates once every reachable
    configuration has been seen.
    """
    require_same_alphabet(plant, spec)
    alphabet = plant.alphabet
    queue: List[Tuple[Word, State, State]] = [((), plant.initial, spec.initial)]
    seen = {(plant.initial, spec.initial)}
    while queue:
        word, x, q = queue.pop(0)
        lg = plant.eval_language(word)
        lh = spec.eval_language(word)
        for e in alphabet.uncontrollable_events():
            lh_ext = spec.eval_language(word + (e,))
            if lh_ext.is_zero:
                continue
            lg_ext = plant.eval_language(word + (e,))
            if lh_ext * lg != lg_ext * lh:
                return Verdict(
                    False,
                    Witness((word,), e, plant.rho(x, e), spec.rho(q, e)),
                )
        if len(word) >= depth:
            continue
        for e in alphabet.events:
            if spec.rho(q, e).is_zero or plant.rho(x, e).is_zero:
                continue
            dst = (plant.target(x, e), spec.target(q, e))
            if dst not in seen:
                seen.add(dst)
                queue.append((word + (e,), dst[0], dst[1]))
    return Verdict(True)


def brute_observable(plant: Pdes, spec: Pdes, depth: int) -> Verdict:
    """Check the observability definition directly on string pairs.

    Enumerates pairs of support strings with equal observations (growing
    either both sides by one event or one side by an unobservable event)
    and compares the defining cross-products of language ratios, cleared
    of denominators.  Configuration pruning as in `brute_controllable`.
    """
    require_same_alphabet(plant, spec)
    alphabet = plant.alphabet
    start = ((), (), plant.initial, spec.initial, plant.initial, spec.initial)
    queue = [start]
    seen = {(plant.initial, spec.initial, plant.initial, spec.initial)}

    def ok(x, q, e):
        return not plant.rho(x, e).is_zero and not spec.rho(q, e).is_zero

    while queue:
        s1, s2, x1, q1, x2, q2 = queue.pop(0)
        g1, h1 = plant.eval_language(s1), spec.eval_language(s1)
        g2, h2 = plant.eval_language(s2), spec.eval_language(s2)
        for e in alphabet.controllable_events():
            g1e = plant.eval_language(s1 + (e,))
            g2e = plant.eval_language(s2 + (e,))
            h1e = spec.eval_language(s1 + (e,))
            h2e = spec.eval_language(s2 + (e,))
            if g1e * h2e * g2 * h1 != g2e * h1e * g1 * h2:
                return Verdict(
                    False,
                    Witness(
                        (s1, s2),
                        e,
                        plant.rho(x1, e) * spec.rho(q2, e),
                        plant.rho(x2, e) * spec.rho(q1, e),
                    ),
                )
        if max(len(s1), len(s2)) >= depth:
            continue
        extensions = []
        for e in alphabet.events:
            if ok(x1, q1, e) and ok(x2, q2, e):
                extensions.append(
                    (
                        s1 + (e,),
                        s2 + (e,),
                        plant.target(x1, e),
                        spec.target(q1, e),
                        plant.target(x2, e),
                        spec.target(q2, e),
                    )
                )
            if e not in alphabet.observable:
                if ok(x1, q1, e):
                    extensions.append(
                        (s1 + (e,), s2, plant.target(x1, e), spec.target(q1, e), x2, q2)
                    )
                if ok(x2, q2, e):
                    extensions.append(
                        (s1, s2 + (e,), x1, q1, plant.target(x2, e), spec.target(q2, e))
                    )
        for item in extensions:
            cfg = item[2:]
            if cfg not in seen:
                seen.add(cfg)
                queue.append(item)
    return Verdict(True)
