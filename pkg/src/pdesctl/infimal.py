"""Infimal probabilistic controllable and observable superlanguage.

When a specification is unachievable, the best achievable approximation
from above is computed in three stages:

1. `infimal_co_support` saturates the spec's support into the least
   prefix-closed language, inside the plant's support, that is closed
   under uncontrollable extension and under observational saturation
   (if one of two observation-equivalent strings may continue with a
   controllable event, the other must be allowed to as well).
2. `refine_to_normal` rebuilds the plant and the saturated spec as a
   pair of normal automata (observer cells partition the state set),
   with the strings added by saturation carrying infinitesimal
   probabilities so they are present logically but weightless.
3. `reweight_infimal` raises probabilities the minimal amount needed:
   uncontrollable transitions adopt the plant's probabilities, and each
   controllable event is scaled, uniformly on every observation cell,
   by the largest spec/plant ratio occurring in the cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Set, Tuple

from .automata import (
    InvariantError,
    Pdes,
    PdesError,
    State,
    add_self_loops,
    is_subautomaton,
    is_sublanguage,
    language_equivalent,
    minimize_logic,
    observer,
    observer_automaton,
    product,
    require_same_alphabet,
)
from .supervisor import NotSublanguageError
from .values import EPS, ONE, ZERO, EpsProb


class ClosureDivergenceError(PdesError):
    """The support saturation failed to stabilize within the round budget."""


@dataclass(frozen=True)
class NormalPair:
    """Normal plant/spec automata with the spec a subautomaton of the plant."""

    g_n: Pdes
    h_n: Pdes

    def validate(self):
        if not is_subautomaton(self.h_n, self.g_n):
            raise InvariantError("spec refinement is not a subautomaton of the plant refinement")
        for a in (self.g_n, self.h_n):
            if not observer(a).is_partition(a.states):
                raise InvariantError("refined automaton is not normal")


def _pair_support(plant: Pdes, spec: Pdes) -> Pdes:
    """Logic automaton for the spec's support, as plant/spec state pairs.
    Rejects specs whose support leaves the plant's."""
    require_same_alphabet(plant, spec)
    initial = (plant.initial, spec.initial)
    trans = {}
    queue = [initial]
    seen = {initial}
    while queue:
        x, q = queue.pop(0)
        for e in plant.alphabet.events:
            if spec.rho(q, e).is_zero:
                continue
            if plant.rho(x, e).is_zero:
                raise NotSublanguageError(
                    f"specification support leaves the plant support on {e!r}"
                )
            dst = (plant.target(x, e), spec.target(q, e))
            trans[((x, q), e)] = (dst, ONE)
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return Pdes(plant.alphabet, initial, trans, check_liveness=False)


def _saturate_once(support: Pdes, plant: Pdes) -> Tuple[Pdes, bool]:
    """One closure round.  Strings are tracked as (support state or None,
    plant state, observation cell of the current support or None); a
    frontier transition is added when the plant allows an uncontrollable
    extension, or a controllable one that some observation-equivalent
    support string already performs."""
    alphabet = plant.alphabet
    obs = observer(support)
    enabled: List[Set[str]] = []
    for cell in obs.cells:
        evs: Set[str] = set()
        for s in cell:
            for e in alphabet.controllable_events():
                if not support.rho(s, e).is_zero:
                    evs.add(e)
        enabled.append(evs)

    initial = (support.initial, plant.initial, obs.initial)
    trans: Dict[Tuple[State, str], Tuple[State, EpsProb]] = {}
    queue = [initial]
    seen = {initial}
    added = False
    while queue:
        state = queue.pop(0)
        k, x, o = state
        for e in alphabet.events:
            kt = support.target(k, e) if k is not None else None
            xt = plant.target(x, e)
            if kt is not None:
                if xt is None:
                    raise InvariantError("support left the plant during saturation")
                o2 = o if e not in alphabet.observable else obs.step(o, e)
            elif xt is not None and (
                e not in alphabet.controllable
                or (o is not None and e in enabled[o])
            ):
                added = True
                if e not in alphabet.observable:
                    o2 = o
                else:
                    o2 = obs.step(o, e) if o is not None else None
            else:
                continue
            dst = (kt, xt, o2)
            trans[(state, e)] = (dst, ONE)
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return Pdes(alphabet, initial, trans, check_liveness=False), added


def infimal_co_support(plant_logic: Pdes, spec_logic: Pdes, max_rounds: int = 64) -> Pdes:
    """Generator of the infimal prefix-closed controllable and observable
    superlanguage of the spec's support, within the plant's support.

    Iterates saturation rounds until a fixpoint; on return, no
    uncontrollable extension and no observational saturation obligation
    remains open (the final round is itself the check).
    """
    plant = plant_logic.logic()
    support = _pair_support(plant, spec_logic.logic())
    for _ in range(max_rounds):
        support = minimize_logic(support)
        grown, added = _saturate_once(support, plant)
        if not added:
            return support
        support = grown
    raise ClosureDivergenceError(
        f"support saturation still growing after {max_rounds} rounds"
    )


class _Sink:
    """Absorbing completion state: reached as soon as a run leaves the
    automaton it completes, and never left again."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "<off>"


SINK = _Sink()


def _complete_to_sink(a: Pdes) -> Pdes:
    """Total completion of a logic automaton: undefined events lead to an
    absorbing sink.  Unlike self-loop completion this keeps 'the run has
    left the original automaton' decidable from the state, which the
    probability assignment below relies on."""
    trans = a.transition_map()
    missing = [
        (s, e) for s in a.states for e in a.alphabet.events if (s, e) not in trans
    ]
    if not missing:
        return a
    for key in missing:
        trans[key] = (SINK, ONE)
    for e in a.alphabet.events:
        trans[(SINK, e)] = (SINK, ONE)
    return Pdes(a.alphabet, a.initial, trans, states=list(a.states) + [SINK], check_liveness=False)


def _triple_product(a: Pdes, b: Pdes, c: Pdes) -> Pdes:
    require_same_alphabet(a, b)
    require_same_alphabet(a, c)
    initial = (a.initial, b.initial, c.initial)
    trans = {}
    queue = [initial]
    seen = {initial}
    while queue:
        sa, sb, sc = queue.pop(0)
        for e in a.alphabet.events:
            ta, tb, tc = a.target(sa, e), b.target(sb, e), c.target(sc, e)
            if ta is None or tb is None or tc is None:
                continue
            dst = (ta, tb, tc)
            trans[((sa, sb, sc), e)] = (dst, ONE)
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return Pdes(a.alphabet, initial, trans, check_liveness=False)


def _assign_probs(base: Pdes, prob_fn) -> Pdes:
    trans = {}
    for src, e, dst, _ in base.transitions():
        p = prob_fn(src, e)
        if p.is_zero:
            raise InvariantError(f"assigned probability must be positive at {src!r} on {e!r}")
        trans[(src, e)] = (dst, p)
    return Pdes(base.alphabet, base.initial, trans, states=base.states)


def _pair_with_observer(base: Pdes, obs_dfa: Pdes) -> Pdes:
    """Normalization: pair each state with its observation class; observable
    events advance the class, unobservable ones keep it."""
    initial = (base.initial, obs_dfa.initial)
    observable = base.alphabet.observable
    trans = {}
    queue = [initial]
    seen = {initial}
    while queue:
        x, o = queue.pop(0)
        for e in base.alphabet.events:
            edge = base.step(x, e)
            if edge is None:
                continue
            if e in observable:
                o2 = obs_dfa.target(o, e)
                if o2 is None:
                    raise InvariantError("observer lacks a transition during normalization")
            else:
                o2 = o
            dst = (edge[0], o2)
            trans[((x, o), e)] = (dst, edge[1])
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return Pdes(base.alphabet, initial, trans)


def refine_to_normal(plant: Pdes, spec: Pdes, support: Pdes) -> NormalPair:
    """Rebuild plant and (saturated) spec as normal automata.

    The plant side keeps its language; the spec side generates the given
    support language, keeping the original spec probabilities on the
    spec's own support and infinitesimal probabilities on the strings the
    saturation added.  The spec side is a subautomaton of the plant side
    and both observers partition their state sets.
    """
    require_same_alphabet(plant, spec)
    require_same_alphabet(plant, support)
    logic_g = plant.logic()
    logic_h = spec.logic()
    support = support.logic()
    if not is_sublanguage(logic_h, support):
        raise InvariantError("the support automaton does not contain the spec's support")
    if not is_sublanguage(support, logic_g):
        raise InvariantError("the support automaton is not contained in the plant's support")

    logic_h_total = _complete_to_sink(logic_h)
    support_total = _complete_to_sink(support)

    def spec_prob(state, event):
        h = state[2]
        if h is SINK:
            return EPS
        p = spec.rho(h, event)
        return p if not p.is_zero else EPS

    spec_refined = _assign_probs(
        _triple_product(logic_g, support, logic_h),
        lambda s, e: spec.rho(s[2], e),
    )
    spec_extended = _assign_probs(
        _triple_product(logic_g, support, logic_h_total), spec_prob
    )
    plant_refined = _assign_probs(
        _triple_product(logic_g, support_total, logic_h_total),
        lambda s, e: plant.rho(s[0], e),
    )

    obs_plant = observer_automaton(plant_refined)
    obs_spec = observer_automaton(spec_extended)
    obs_spec_sl = add_self_loops(obs_spec, obs_spec.alphabet.events)
    g_n = _pair_with_observer(plant_refined, product(obs_plant, obs_spec_sl))
    h_n = _pair_with_observer(spec_extended, product(obs_plant, obs_spec))

    pair = NormalPair(g_n, h_n)
    pair.validate()
    if not language_equivalent(g_n, plant):
        raise InvariantError("plant refinement changed the plant's language")
    if not language_equivalent(h_n.logic(), support):
        raise InvariantError("spec refinement changed the saturated support")
    _check_spec_values(spec, h_n)
    if not language_equivalent(spec_refined, spec):
        raise InvariantError("spec refinement changed the spec's language")
    return pair


def _check_spec_values(spec: Pdes, h_n: Pdes):
    """On the spec's support, the refined automaton must carry exactly the
    spec's probabilities."""
    queue = [(spec.initial, h_n.initial)]
    seen = {queue[0]}
    while queue:
        q, y = queue.pop(0)
        for e in spec.alphabet.events:
            rs = spec.rho(q, e)
            if rs.is_zero:
                continue
            if h_n.rho(y, e) != rs:
                raise InvariantError("spec refinement altered a spec probability")
            dst = (spec.target(q, e), h_n.target(y, e))
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)


def reweight_infimal(pair: NormalPair) -> Pdes:
    """Minimal probability lift of the refined spec.

    Uncontrollable transitions take the plant's probabilities verbatim.
    For each observation cell and controllable event, every member state
    is scaled to the same fraction of its plant probability: the largest
    spec/plant ratio achieved inside the cell (infinitesimal ratios rank
    below every ordinary one).  Transitions whose scaled probability is
    zero are dropped; a transition forced where the refined spec had none
    is adopted from the plant (with its target), though on a valid normal
    pair that never happens.
    """
    g_n, h_n = pair.g_n, pair.h_n
    alphabet = g_n.alphabet
    trans = h_n.transition_map()
    extra: List[State] = []
    known = set(h_n.states)

    def adopt(state):
        if state not in known:
            known.add(state)
            extra.append(state)

    for x in h_n.states:
        for e in alphabet.uncontrollable_events():
            gp = g_n.rho(x, e)
            if gp.is_zero:
                continue
            target = g_n.target(x, e)
            trans[(x, e)] = (target, gp)
            adopt(target)

    obs = observer(h_n)
    if not obs.is_partition(h_n.states):
        raise InvariantError("refined spec is not normal")
    for cell in obs.cells:
        for e in alphabet.controllable_events():
            best = ZERO
            for x in cell:
                hp = h_n.rho(x, e)
                if hp.is_zero:
                    continue
                best = max(best, hp / g_n.rho(x, e))
            if best.is_zero:
                continue
            for x in cell:
                gp = g_n.rho(x, e)
                if gp.is_zero:
                    continue
                target = g_n.target(x, e)
                trans[(x, e)] = (target, best * gp)
                adopt(target)

    states = list(h_n.states) + extra
    return Pdes(alphabet, h_n.initial, trans, states=states)


@dataclass(frozen=True)
class InfimalResult:
    support: Pdes
    plant_normal: Pdes
    spec_normal: Pdes
    result: Pdes


def infimal_pipeline(plant: Pdes, spec: Pdes) -> InfimalResult:
    """Full pipeline; the result generates the infimal probabilistic
    controllable and observable superlanguage of the spec w.r.t. the plant."""
    verdict = is_sublanguage(spec, plant)
    if not verdict:
        w = verdict.witness
        raise NotSublanguageError(
            f"specification is not a sublanguage of the plant at {w.strings[0]!r} on {w.event!r}",
            w,
        )
    support = infimal_co_support(plant.logic(), spec.logic())
    pair = refine_to_normal(plant, spec, support)
    result = reweight_infimal(pair)
    return InfimalResult(support, pair.g_n, pair.h_n, result)


def infimal_superlanguage(plant: Pdes, spec: Pdes) -> Pdes:
    return infimal_pipeline(plant, spec).result


def strip_eps_edges(a: Pdes) -> Pdes:
    """Drop infinitesimal-probability transitions (display helper)."""
    trans = {
        key: edge for key, edge in a.transition_map().items() if edge[1].is_ordinary
    }
    keep = Pdes._reach(trans, a.initial)
    trans = {key: edge for key, edge in trans.items() if key[0] in keep}
    return Pdes(a.alphabet, a.initial, trans, check_liveness=False)
