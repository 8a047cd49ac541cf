"""Partial-observation probabilistic supervisors.

A supervisor reacts only to the projection of the executed string.  Its
compact form is a scaling-factor map: for each observation class, a
vector of per-event multipliers in [0,1] that is identically 1 on
uncontrollable events.  The equivalent roulette form attaches to each
observation class a probability distribution over control patterns
whose per-event marginals reproduce the scaling vector.

Observation classes are represented finitely by the observer of the
synchronized plant/specification pair graph; observations that fall
outside the mapped classes use a configurable default vector (all-ones
unless stated otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .automata import (
    Alphabet,
    FormatError,
    InvariantError,
    Pdes,
    PdesError,
    State,
    Witness,
    Word,
    is_sublanguage,
    require_same_alphabet,
)
from .patterns import (
    PatternDistribution,
    distribution_from_marginals,
    marginals_of,
    pattern_enables,
    validate_scaling_vector,
)
from .values import EpsProb, ONE, ZERO, format_rat, parse_rat


class SynthesisError(PdesError):
    """A specification is not achievable by any supervisor."""

    def __init__(self, message, witness: Optional[Witness] = None):
        self.witness = witness
        super().__init__(message)


class NotSublanguageError(SynthesisError):
    pass


class NotControllableError(SynthesisError):
    pass


class NotObservableError(SynthesisError):
    pass


@dataclass(frozen=True)
class ObservationClasses:
    """Observer of the plant/spec pair graph, indexing observation classes.

    ``members`` holds, per class, the reachable (plant state, spec state)
    pairs; it is absent for maps reloaded from disk, where only the class
    transition structure is needed.
    """

    alphabet: Alphabet
    initial: int
    count: int
    trans: Dict[Tuple[int, str], int]
    members: Optional[Tuple[FrozenSet[Tuple[State, State]], ...]] = None

    def step(self, cls: Optional[int], event: str) -> Optional[int]:
        """Advance one event: unobservable events keep the class, observable
        ones follow the class DFA (None once outside the mapped classes)."""
        if cls is None:
            return None
        if event not in self.alphabet.observable:
            return cls
        return self.trans.get((cls, event))

    def locate(self, word: Iterable[str]) -> Optional[int]:
        """Class of the observation of a full event string."""
        cls: Optional[int] = self.initial
        for e in word:
            cls = self.step(cls, e)
            if cls is None:
                return None
        return cls


def _pair_graph(plant: Pdes, spec: Pdes):
    """Reachable (plant, spec) state pairs over the common support, with a
    shortest access string for each pair."""
    require_same_alphabet(plant, spec)
    initial = (plant.initial, spec.initial)
    access: Dict[Tuple[State, State], Word] = {initial: ()}
    order = [initial]
    queue = [initial]
    while queue:
        x, q = queue.pop(0)
        for e in plant.alphabet.events:
            if spec.rho(q, e).is_zero or plant.rho(x, e).is_zero:
                continue
            dst = (plant.target(x, e), spec.target(q, e))
            if dst not in access:
                access[dst] = access[(x, q)] + (e,)
                order.append(dst)
                queue.append(dst)
    return order, access


def observation_classes(plant: Pdes, spec: Optional[Pdes] = None) -> ObservationClasses:
    """Observation classes of the synchronized pair graph (the plant is
    paired with itself when no specification is given)."""
    spec = spec if spec is not None else plant
    pairs, _ = _pair_graph(plant, spec)
    alphabet = plant.alphabet
    unobs = alphabet.unobservable

    def closure(seed):
        reach = set(seed)
        frontier = list(seed)
        while frontier:
            x, q = frontier.pop()
            for e in unobs:
                if plant.rho(x, e).is_zero or spec.rho(q, e).is_zero:
                    continue
                dst = (plant.target(x, e), spec.target(q, e))
                if dst not in reach:
                    reach.add(dst)
                    frontier.append(dst)
        return frozenset(reach)

    first = closure([(plant.initial, spec.initial)])
    cells = [first]
    index = {first: 0}
    trans: Dict[Tuple[int, str], int] = {}
    queue = [first]
    observable = [e for e in alphabet.events if e in alphabet.observable]
    while queue:
        cell = queue.pop(0)
        i = index[cell]
        for e in observable:
            targets = set()
            for x, q in cell:
                if plant.rho(x, e).is_zero or spec.rho(q, e).is_zero:
                    continue
                targets.add((plant.target(x, e), spec.target(q, e)))
            if not targets:
                continue
            nxt = closure(targets)
            if nxt not in index:
                index[nxt] = len(cells)
                cells.append(nxt)
                queue.append(nxt)
            trans[(i, e)] = index[nxt]
    return ObservationClasses(alphabet, 0, len(cells), trans, tuple(cells))


def _all_ones(alphabet: Alphabet) -> Tuple[Fraction, ...]:
    return tuple(Fraction(1) for _ in alphabet.events)


@dataclass(frozen=True)
class ScalingMap:
    """Per-observation-class scaling vectors plus a default vector."""

    classes: ObservationClasses
    vectors: Dict[int, Tuple[Fraction, ...]]
    default: Tuple[Fraction, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        alphabet = self.classes.alphabet
        if self.default is None:
            object.__setattr__(self, "default", _all_ones(alphabet))
        validate_scaling_vector(self.default, alphabet.m, alphabet.n)
        for cls, vec in self.vectors.items():
            self.vectors[cls] = validate_scaling_vector(vec, alphabet.m, alphabet.n)

    @property
    def alphabet(self) -> Alphabet:
        return self.classes.alphabet

    def vector(self, cls: Optional[int]) -> Tuple[Fraction, ...]:
        if cls is None:
            return self.default
        return self.vectors.get(cls, self.default)

    def factor(self, cls: Optional[int], event: str) -> Fraction:
        return self.vector(cls)[self.alphabet.index(event)]


@dataclass(frozen=True)
class SupervisorMap:
    """Per-observation-class pattern distributions (the roulette form)."""

    classes: ObservationClasses
    dists: Dict[int, PatternDistribution]
    default: PatternDistribution = None  # type: ignore[assignment]

    def __post_init__(self):
        alphabet = self.classes.alphabet
        if self.default is None:
            object.__setattr__(
                self, "default", distribution_from_marginals(_all_ones(alphabet), alphabet.m, alphabet.n)
            )
        for dist in list(self.dists.values()) + [self.default]:
            if dist.m != alphabet.m:
                raise InvariantError("pattern distribution does not match the alphabet")

    @property
    def alphabet(self) -> Alphabet:
        return self.classes.alphabet

    def distribution(self, cls: Optional[int]) -> PatternDistribution:
        if cls is None:
            return self.default
        return self.dists.get(cls, self.default)


def scaling_from_spec(plant: Pdes, spec: Pdes) -> ScalingMap:
    """Synthesize the scaling-factor map realizing the specification.

    Requires the spec to be a probabilistic sublanguage of the plant.
    Per observation class and controllable event, the factor is the
    spec/plant probability ratio at any representative pair with the
    plant transition defined (zero when no representative defines it);
    conflicting ratios mean the spec is not probabilistic observable,
    and any uncontrollable-probability mismatch means it is not
    probabilistic controllable.
    """
    verdict = is_sublanguage(spec, plant)
    if not verdict:
        w = verdict.witness
        raise NotSublanguageError(
            f"specification is not a sublanguage of the plant at {w.strings[0]!r} on {w.event!r}",
            w,
        )
    alphabet = plant.alphabet
    pairs, access = _pair_graph(plant, spec)
    for x, q in pairs:
        for e in alphabet.uncontrollable_events():
            rp = plant.rho(x, e)
            rs = spec.rho(q, e)
            if rp != rs:
                raise NotControllableError(
                    f"uncontrollable event {e!r} after {access[(x, q)]!r}: "
                    f"plant probability {rp} != spec probability {rs}",
                    Witness((access[(x, q)],), e, rp, rs),
                )
    classes = observation_classes(plant, spec)
    vectors: Dict[int, Tuple[Fraction, ...]] = {}
    for cls in range(classes.count):
        members = classes.members[cls]
        factors: List[Fraction] = []
        for i, e in enumerate(alphabet.events):
            if i >= alphabet.m:
                factors.append(Fraction(1))
                continue
            ratio: Optional[Fraction] = None
            first: Optional[Tuple[State, State]] = None
            for x, q in sorted(members, key=lambda p: access[p]):
                rp = plant.rho(x, e)
                if rp.is_zero:
                    continue
                rs = spec.rho(q, e)
                if not (rp.is_ordinary and rs.is_ordinary):
                    raise InvariantError("synthesis requires ordinary probabilities")
                r = rs.magnitude / rp.magnitude
                if ratio is None:
                    ratio, first = r, (x, q)
                elif r != ratio:
                    raise NotObservableError(
                        f"event {e!r} demands factor {ratio} after {access[first]!r} "
                        f"but {r} after {access[(x, q)]!r}",
                        Witness(
                            (access[first], access[(x, q)]),
                            e,
                            plant.rho(first[0], e) * spec.rho(q, e),
                            rp * spec.rho(first[1], e),
                        ),
                    )
            factors.append(ratio if ratio is not None else Fraction(0))
        vectors[cls] = tuple(factors)
    return ScalingMap(classes, vectors)


def supervisor_from_scaling(scaling: ScalingMap) -> SupervisorMap:
    """Roulette form of a scaling map: one pattern distribution per class,
    constructed so its marginals equal the class vector exactly."""
    alphabet = scaling.alphabet
    dists = {
        cls: distribution_from_marginals(vec, alphabet.m, alphabet.n)
        for cls, vec in scaling.vectors.items()
    }
    default = distribution_from_marginals(scaling.default, alphabet.m, alphabet.n)
    return SupervisorMap(scaling.classes, dists, default)


def scaling_from_supervisor(sup: SupervisorMap) -> ScalingMap:
    """Compact form of a supervisor map, via per-class marginals."""
    alphabet = sup.alphabet
    vectors = {
        cls: marginals_of(dist, alphabet.m, alphabet.n) for cls, dist in sup.dists.items()
    }
    default = marginals_of(sup.default, alphabet.m, alphabet.n)
    return ScalingMap(sup.classes, vectors, default)


def controlled_automaton(plant: Pdes, scaling: ScalingMap) -> Pdes:
    """The controlled plant as an automaton over (plant state, class)
    pairs: each transition probability is the plant's scaled by the class
    factor, and zero-probability transitions are dropped."""
    if scaling.alphabet != plant.alphabet:
        raise InvariantError("scaling map alphabet does not match the plant")
    initial = (plant.initial, scaling.classes.initial)
    trans = {}
    queue = [initial]
    seen = {initial}
    while queue:
        x, cls = queue.pop(0)
        for e in plant.alphabet.events:
            rp = plant.rho(x, e)
            if rp.is_zero:
                continue
            p = rp * scaling.factor(cls, e)
            if p.is_zero:
                continue
            dst = (plant.target(x, e), scaling.classes.step(cls, e))
            trans[((x, cls), e)] = (dst, p)
            if dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return Pdes(plant.alphabet, initial, trans)


def controlled_xi(plant: Pdes, sup: SupervisorMap, word: Iterable[str], event: str) -> EpsProb:
    """One-step controlled transition probability after an executed string:
    the plant probability times the total enable probability of the event
    under the class roulette."""
    word = tuple(word)
    x = plant.delta(plant.initial, word)
    if x is None:
        raise InvariantError(f"string {word!r} is not in the plant's support")
    i = plant.alphabet.index(event)
    cls = sup.classes.locate(word)
    dist = sup.distribution(cls)
    enable = Fraction(0)
    for j, pj in enumerate(dist.probs):
        if i >= plant.alphabet.m or pattern_enables(j, i):
            enable += pj
    return plant.rho(x, event) * EpsProb(enable)


def controlled_language_value(plant: Pdes, sup: SupervisorMap, word: Iterable[str]) -> EpsProb:
    """Value of the controlled language on a string (recursive product of
    one-step controlled probabilities; zero once the plant support is left)."""
    value = ONE
    prefix: Word = ()
    for e in word:
        if not plant.supports(prefix + (e,)):
            return ZERO
        value = value * controlled_xi(plant, sup, prefix, e)
        if value.is_zero:
            return ZERO
        prefix += (e,)
    return value


# -- serialization -----------------------------------------------------


def _dump_header(alphabet: Alphabet, classes: ObservationClasses) -> List[str]:
    lines = [
        "controllable: " + " ".join(alphabet.controllable_events()),
        "uncontrollable: " + " ".join(alphabet.uncontrollable_events()),
        "observable: " + " ".join(e for e in alphabet.events if e in alphabet.observable),
        "unobservable: " + " ".join(e for e in alphabet.events if e not in alphabet.observable),
        f"obs-classes: {classes.count}",
        f"obs-initial: t{classes.initial}",
    ]
    for (i, e), j in sorted(classes.trans.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        lines.append(f"obs-trans: t{i} {e} t{j}")
    return lines


def _parse_header(text: str):
    controllable: List[str] = []
    uncontrollable: List[str] = []
    observable: List[str] = []
    count = None
    initial = None
    trans: Dict[Tuple[int, str], int] = {}
    body: List[Tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if ":" in head:
            key, _, rest = line.partition(":")
        else:
            key, _, rest = line.partition(" ")
        key = key.strip()
        fields = rest.split()
        if key == "controllable":
            controllable += fields
        elif key == "uncontrollable":
            uncontrollable += fields
        elif key == "observable":
            observable += fields
        elif key == "unobservable":
            pass
        elif key == "obs-classes":
            count = int(fields[0])
        elif key == "obs-initial":
            initial = int(fields[0].lstrip("t"))
        elif key == "obs-trans":
            if len(fields) != 3:
                raise FormatError("obs-trans takes: <src> <event> <dst>", lineno)
            trans[(int(fields[0].lstrip("t")), fields[1])] = int(fields[2].lstrip("t"))
        else:
            body.append((lineno, key, rest.strip()))
    if count is None or initial is None:
        raise FormatError("missing obs-classes/obs-initial lines")
    alphabet = Alphabet.make(controllable, uncontrollable, observable)
    classes = ObservationClasses(alphabet, initial, count, trans)
    return alphabet, classes, body


def dumps_scaling_map(scaling: ScalingMap) -> str:
    lines = _dump_header(scaling.alphabet, scaling.classes)
    for cls in sorted(scaling.vectors):
        vec = " ".join(format_rat(f) for f in scaling.vectors[cls])
        lines.append(f"class t{cls} {vec}")
    lines.append("default " + " ".join(format_rat(f) for f in scaling.default))
    return "\n".join(lines) + "\n"


def loads_scaling_map(text: str) -> ScalingMap:
    alphabet, classes, body = _parse_header(text)
    vectors: Dict[int, Tuple[Fraction, ...]] = {}
    default = None
    for lineno, key, rest in body:
        fields = rest.split()
        if key == "class":
            cls = int(fields[0].lstrip("t"))
            vectors[cls] = tuple(parse_rat(f) for f in fields[1:])
        elif key == "default":
            default = tuple(parse_rat(f) for f in fields)
        else:
            raise FormatError(f"unknown directive {key!r}", lineno)
    try:
        return ScalingMap(classes, vectors, default)
    except InvariantError as e:
        raise FormatError(str(e)) from None


def dumps_supervisor_map(sup: SupervisorMap) -> str:
    lines = _dump_header(sup.alphabet, sup.classes)
    m = sup.alphabet.m

    def pattern_lines(dist: PatternDistribution) -> List[str]:
        out = []
        for j, p in dist.support():
            bits = format(j, f"0{m}b") if m else "-"
            out.append(f"pattern {bits} {format_rat(p, 'fraction')}")
        return out

    for cls in sorted(sup.dists):
        lines.append(f"class t{cls}")
        lines += pattern_lines(sup.dists[cls])
    lines.append("default")
    lines += pattern_lines(sup.default)
    return "\n".join(lines) + "\n"


def loads_supervisor_map(text: str) -> SupervisorMap:
    alphabet, classes, body = _parse_header(text)
    m = alphabet.m
    dists: Dict[int, PatternDistribution] = {}
    current: Optional[int] = None
    in_default = False
    pending: Dict[int, Fraction] = {}
    default = None

    def flush():
        nonlocal pending, default
        if current is None and not in_default:
            return
        probs = [Fraction(0)] * (2**m)
        for j, p in pending.items():
            probs[j] = p
        dist = PatternDistribution(tuple(probs))
        if in_default:
            default = dist
        else:
            dists[current] = dist
        pending = {}

    for lineno, key, rest in body:
        fields = rest.split()
        if key == "class":
            flush()
            in_default = False
            current = int(fields[0].lstrip("t"))
        elif key == "default":
            flush()
            current = None
            in_default = True
        elif key == "pattern":
            bits, prob = fields
            j = 0 if bits == "-" else int(bits, 2)
            pending[j] = parse_rat(prob)
        else:
            raise FormatError(f"unknown directive {key!r}", lineno)
    flush()
    try:
        return SupervisorMap(classes, dists, default)
    except InvariantError as e:
        raise FormatError(str(e)) from None
