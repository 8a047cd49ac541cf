"""Monte-Carlo execution of a plant under a supervisor map.

Each trial replays the roulette semantics: at every step the supervisor
samples a control pattern for the current observation class, then the
plant fires one of the enabled transitions (or terminates with the
residual probability mass).  Trials draw from independent generators
keyed by (seed, trial index), so reports are reproducible and
aggregation order does not matter.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .automata import InvariantError, Pdes, Word
from .patterns import pattern_enables
from .supervisor import SupervisorMap, controlled_language_value


@dataclass(frozen=True)
class TrialConfig:
    trials: int
    max_depth: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise InvariantError("trials must be at least 1")
        if self.max_depth < 1:
            raise InvariantError("max_depth must be at least 1")


@dataclass(frozen=True)
class ReportRow:
    count: int
    empirical: float
    target: Fraction
    stderr: float


@dataclass(frozen=True)
class FrequencyReport:
    trials: int
    rows: Dict[Word, ReportRow]

    def to_tsv(self) -> str:
        lines = ["string\tcount\tempirical\ttarget\tstderr"]
        for word in sorted(self.rows, key=lambda w: (len(w), w)):
            row = self.rows[word]
            name = ".".join(word) if word else "eps"
            lines.append(
                f"{name}\t{row.count}\t{row.empirical:.6g}\t{float(row.target):.6g}\t{row.stderr:.6g}"
            )
        return "\n".join(lines) + "\n"


def _trial_rng(seed: int, trial: int) -> random.Random:
    digest = hashlib.blake2b(f"{seed}:{trial}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def run_trials(plant: Pdes, sup: SupervisorMap, cfg: TrialConfig) -> FrequencyReport:
    if sup.alphabet != plant.alphabet:
        raise InvariantError("supervisor alphabet does not match the plant")
    if plant.has_eps_probabilities():
        raise InvariantError("simulation requires ordinary probabilities")
    alphabet = plant.alphabet
    m = alphabet.m

    # per-class cumulative pattern table
    pattern_cdf: Dict[Optional[int], List[Tuple[float, int]]] = {}

    def cdf_for(cls: Optional[int]) -> List[Tuple[float, int]]:
        table = pattern_cdf.get(cls)
        if table is None:
            acc = 0.0
            table = []
            for j, p in sup.distribution(cls).support():
                acc += float(p)
                table.append((acc, j))
            pattern_cdf[cls] = table
        return table

    counts: Dict[Word, int] = {(): cfg.trials}
    for trial in range(cfg.trials):
        rng = _trial_rng(cfg.seed, trial)
        state = plant.initial
        cls = sup.classes.initial
        word: Word = ()
        for _ in range(cfg.max_depth):
            u = rng.random()
            pattern = None
            for acc, j in cdf_for(cls):
                if u <= acc:
                    pattern = j
                    break
            if pattern is None:  # numeric slack on the last bucket
                pattern = cdf_for(cls)[-1][1]
            u = rng.random()
            acc = 0.0
            fired = None
            for e in alphabet.events:
                edge = plant.step(state, e)
                if edge is None:
                    continue
                i = alphabet.index(e)
                if i < m and not pattern_enables(pattern, i):
                    continue
                acc += float(edge[1].magnitude)
                if u < acc:
                    fired = (e, edge[0])
                    break
            if fired is None:
                break  # terminated with the residual mass
            e, state = fired
            cls = sup.classes.step(cls, e)
            word += (e,)
            counts[word] = counts.get(word, 0) + 1

    rows = {}
    for word, count in counts.items():
        empirical = count / cfg.trials
        target = controlled_language_value(plant, sup, word)
        if not target.is_ordinary:
            raise InvariantError("simulation requires ordinary probabilities")
        stderr = (empirical * (1.0 - empirical) / cfg.trials) ** 0.5
        rows[word] = ReportRow(count, empirical, target.magnitude, stderr)
    return FrequencyReport(cfg.trials, rows)
