"""LOCC execution engine.

A protocol is a :class:`Script`: an initial joint state, a set of parties that
own disjoint qubits, and an ordered list of steps. Steps are data:

* :class:`LocalGate` - unconditional gate on qubits owned by one party,
* :class:`Measure` - projective or Kraus measurement by one party,
* :class:`Broadcast` - a classical message carrying a measurement outcome,
* :class:`Halt` - ends the branch as a failure for the listed outcomes,
* :class:`Conditional` - a gate chosen from outcomes the party has received.

:func:`run_protocol` either expands every measurement into all of its
outcomes (``"enumerate"``) or draws one path with a seeded generator
(``"sample"``). Both modes walk the same steps, so test and production paths
cannot diverge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, LocalityError
from .qstate import (
    ZERO_PROB,
    KrausMeasurement,
    MeasurementBasis,
    StateVector,
    apply_unitary,
    fidelity,
    measure,
    partial_trace,
    pure_state_of,
    reduced_pure_state,
)

ROLES = ("Alice", "Claire", "Bob")


@dataclass(frozen=True)
class Party:
    name: str
    role: str
    qubits: tuple

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigurationError(f"unknown role {self.role!r}")
        object.__setattr__(self, "qubits", tuple(self.qubits))


# -- script steps -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalGate:
    party: str
    labels: tuple
    gate: np.ndarray
    name: str


@dataclass(frozen=True, eq=False)
class Measure:
    party: str
    labels: tuple
    measurement: MeasurementBasis | KrausMeasurement
    key: str
    name: str = ""


@dataclass(frozen=True)
class Broadcast:
    sender: str
    recipients: tuple
    key: str


@dataclass(frozen=True)
class Halt:
    """Terminate the branch (as a failure) when ``key`` took one of ``outcomes``."""

    key: str
    outcomes: frozenset
    reason: str = "failure"


@dataclass(frozen=True, eq=False)
class Conditional:
    """Gate selected by ``rule(outcomes)`` from previously received results.

    ``rule`` receives a mapping ``key -> outcome index`` restricted to
    ``depends`` and returns ``(gate, name)``.
    """

    party: str
    label: object
    depends: tuple
    rule: Callable[[Mapping[str, int]], tuple]


Step = LocalGate | Measure | Broadcast | Halt | Conditional


# -- transcript records -----------------------------------------------------


@dataclass(frozen=True)
class ClassicalMessage:
    sender: str
    recipients: tuple
    key: str
    payload: int
    payload_name: str
    bit_count: int


@dataclass(frozen=True, eq=False)
class GateRecord:
    party: str
    labels: tuple
    name: str
    depends: tuple = ()
    gate: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class MeasurementRecord:
    party: str
    labels: tuple
    key: str
    basis: str
    outcome: int
    outcome_name: str
    probability: float


@dataclass(frozen=True)
class MessageRecord:
    message: ClassicalMessage


@dataclass(frozen=True)
class HaltRecord:
    key: str
    reason: str


Record = GateRecord | MeasurementRecord | MessageRecord | HaltRecord


@dataclass(frozen=True, eq=False)
class Transcript:
    """Ordered events of one run plus the final joint state."""

    protocol: str
    parties: tuple
    events: tuple
    final_state: StateVector | None

    def ownership(self) -> dict:
        return {q: p.name for p in self.parties for q in p.qubits}

    def messages(self) -> list[ClassicalMessage]:
        return [e.message for e in self.events if isinstance(e, MessageRecord)]


@dataclass(frozen=True, eq=False)
class Branch:
    """One leaf of the outcome tree.

    ``outcomes`` is a tuple of ``(key, index)`` in the order measured;
    ``conditional_state`` is the output-qubit state once every measurement is
    done and before any correction is applied.
    """

    outcomes: tuple
    outcome_names: tuple
    probability: float
    success: bool
    final_state: StateVector | None
    fidelity: float | None
    conditional_state: StateVector | None
    transcript: Transcript

    def outcome(self, key: str) -> int:
        return dict(self.outcomes)[key]

    @property
    def outcome_map(self) -> dict:
        return dict(self.outcomes)

    @property
    def name_map(self) -> dict:
        return dict(zip((k for k, _ in self.outcomes), self.outcome_names))


@dataclass(frozen=True, eq=False)
class Script:
    """A protocol as data.

    Parameters
    ----------
    name : str
    initial_state : StateVector
    parties : sequence of Party
        Ownership must partition ``initial_state.labels``.
    steps : sequence of steps
    output_labels : tuple
        Qubits holding the teleported state at the end (the Bobs').
    target : StateVector or None
        State expected on ``output_labels`` for successful branches.
    """

    name: str
    initial_state: StateVector
    parties: tuple
    steps: tuple
    output_labels: tuple
    target: StateVector | None = None

    def __post_init__(self):
        object.__setattr__(self, "parties", tuple(self.parties))
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        check_ownership(self.parties, self.initial_state.labels)
        names = [p.name for p in self.parties]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate party names {names}")
        # outcome count still announceable per key, after earlier Halt steps
        live: dict = {}
        bits: dict = {}
        for i, step in enumerate(self.steps):
            if isinstance(step, Measure):
                live[step.key] = set(range(len(step.measurement.outcome_names)))
            elif isinstance(step, Halt):
                live[step.key] = live.get(step.key, set()) - set(step.outcomes)
            elif isinstance(step, Broadcast):
                if step.key not in live:
                    raise ConfigurationError(f"message for unmeasured key {step.key!r}")
                n = max(len(live[step.key]), 1)
                bits[i] = math.ceil(math.log2(n)) if n > 1 else 0
        object.__setattr__(self, "_bits", bits)
        last = max((i for i, s in enumerate(self.steps) if isinstance(s, Measure)), default=-1)
        object.__setattr__(self, "_correction_start", last + 1)

    def party(self, name: str) -> Party:
        for p in self.parties:
            if p.name == name:
                return p
        raise ConfigurationError(f"unknown party {name!r}")

    def ownership(self) -> dict:
        return {q: p.name for p in self.parties for q in p.qubits}

    def bit_count(self, step_index: int) -> int:
        return self._bits[step_index]

    def measurement_rounds(self) -> list[tuple[int, int]]:
        """``(start, stop)`` step ranges of each Measure and its trailing Halt/Broadcast steps."""
        rounds = []
        i = 0
        while i < len(self.steps):
            if isinstance(self.steps[i], Measure):
                key = self.steps[i].key
                j = i + 1
                while j < len(self.steps) and isinstance(self.steps[j], (Halt, Broadcast)) and self.steps[j].key == key:
                    j += 1
                rounds.append((i, j))
                i = j
            else:
                i += 1
        return rounds

    def reorder_measurements(self, parties_first: Sequence[str]) -> "Script":
        """Copy of the script with the rounds of ``parties_first`` moved ahead.

        Rounds must be contiguous; relative order within each group is kept.
        """
        rounds = self.measurement_rounds()
        if not rounds:
            return self
        start, stop = rounds[0][0], rounds[-1][1]
        if sum(b - a for a, b in rounds) != stop - start:
            raise ConfigurationError("measurement rounds are not contiguous")
        blocks = [self.steps[a:b] for a, b in rounds]
        first = [blk for blk in blocks if blk[0].party in parties_first]
        rest = [blk for blk in blocks if blk[0].party not in parties_first]
        middle = tuple(s for blk in first + rest for s in blk)
        return replace(self, steps=self.steps[:start] + middle + self.steps[stop:])


def check_ownership(parties: Sequence[Party], labels: Sequence) -> None:
    """Raise unless the parties' qubits partition ``labels``."""
    owned = [q for p in parties for q in p.qubits]
    if len(set(owned)) != len(owned):
        raise ConfigurationError("a qubit is owned by more than one party")
    if set(owned) != set(labels):
        raise ConfigurationError(
            f"ownership {sorted(map(str, owned))} does not cover {sorted(map(str, labels))}"
        )


# -- engine -----------------------------------------------------------------


@dataclass
class _Cursor:
    state: StateVector | None
    outcomes: tuple = ()
    names: tuple = ()
    probability: float = 1.0
    records: tuple = ()
    delivered: dict = field(default_factory=dict)
    conditional: StateVector | None = None


def _require_owned(script: Script, party: str, labels, step) -> None:
    owned = set(script.party(party).qubits)
    foreign = [l for l in labels if l not in owned]
    if foreign:
        raise LocalityError(
            f"{party} acts on qubits {foreign} it does not own", event=step
        )


def _output_state(script: Script, state: StateVector | None):
    """``(reduced state, pure state or None)`` of the output qubits."""
    if state is None:
        return None, None
    pure = reduced_pure_state(state, script.output_labels)
    if pure is not None:
        return pure, pure
    rho = partial_trace(state, script.output_labels)
    return rho, pure_state_of(rho)


def _leaf(script: Script, cur: _Cursor, success: bool) -> Branch:
    rho, pure = _output_state(script, cur.state)
    fid = None
    if rho is not None and script.target is not None and success:
        fid = fidelity(rho, script.target)
    cond = cur.conditional
    if cond is None and cur.state is not None:
        cond = pure
    transcript = Transcript(script.name, script.parties, cur.records, cur.state)
    return Branch(
        outcomes=cur.outcomes,
        outcome_names=cur.names,
        probability=cur.probability,
        success=success and cur.state is not None,
        final_state=pure,
        fidelity=fid,
        conditional_state=cond,
        transcript=transcript,
    )


def _advance(script: Script, i: int, cur: _Cursor, choose):
    """Walk steps from ``i``; ``choose`` maps outcome lists to the ones to follow."""
    steps = script.steps
    while i < len(steps):
        if i == script._correction_start and cur.state is not None:
            cur.conditional = _output_state(script, cur.state)[1]
        step = steps[i]
        if isinstance(step, LocalGate):
            _require_owned(script, step.party, step.labels, step)
            cur.state = apply_unitary(cur.state, step.labels, step.gate)
            cur.records += (GateRecord(step.party, step.labels, step.name, (), step.gate),)
        elif isinstance(step, Conditional):
            _require_owned(script, step.party, (step.label,), step)
            known = cur.delivered.get(step.party, set())
            missing = [k for k in step.depends if k not in known]
            if missing:
                raise LocalityError(
                    f"{step.party} applies a correction before receiving {missing}", event=step
                )
            values = {k: v for k, v in cur.outcomes if k in step.depends}
            gate, name = step.rule(values)
            cur.state = apply_unitary(cur.state, (step.label,), gate)
            cur.records += (GateRecord(step.party, (step.label,), name, tuple(step.depends), gate),)
        elif isinstance(step, Broadcast):
            value = dict(cur.outcomes)[step.key]
            msg = ClassicalMessage(
                step.sender,
                tuple(step.recipients),
                step.key,
                value,
                dict(zip((k for k, _ in cur.outcomes), cur.names))[step.key],
                script.bit_count(i),
            )
            delivered = {p: set(s) for p, s in cur.delivered.items()}
            for rcpt in step.recipients:
                delivered.setdefault(rcpt, set()).add(step.key)
            cur.delivered = delivered
            cur.records += (MessageRecord(msg),)
        elif isinstance(step, Halt):
            if dict(cur.outcomes)[step.key] in step.outcomes:
                cur.records += (HaltRecord(step.key, step.reason),)
                yield _leaf(script, cur, success=False)
                return
        elif isinstance(step, Measure):
            _require_owned(script, step.party, step.labels, step)
            results = measure(cur.state, step.labels, step.measurement)
            delivered = {p: set(s) for p, s in cur.delivered.items()}
            delivered.setdefault(step.party, set()).add(step.key)
            basis_name = step.name or type(step.measurement).__name__
            for out in choose(results):
                child = _Cursor(
                    state=out.state,
                    outcomes=cur.outcomes + ((step.key, out.index),),
                    names=cur.names + (out.name,),
                    probability=cur.probability * out.probability,
                    records=cur.records
                    + (
                        MeasurementRecord(
                            step.party, step.labels, step.key, basis_name,
                            out.index, out.name, out.probability,
                        ),
                    ),
                    delivered=delivered,
                )
                if out.state is None:
                    yield _leaf(script, child, success=False)
                else:
                    yield from _advance(script, i + 1, child, choose)
            return
        else:  # pragma: no cover - defensive
            raise ConfigurationError(f"unknown step {step!r}")
        i += 1
    yield _leaf(script, cur, success=True)


def enumerate_branches(script: Script) -> list[Branch]:
    """Expand every measurement outcome depth-first."""
    return list(_advance(script, 0, _Cursor(script.initial_state), lambda results: results))


def sample_branch(script: Script, rng: np.random.Generator) -> Branch:
    """Draw a single path, choosing each outcome with its conditional probability."""

    def choose(results):
        probs = np.array([o.probability for o in results])
        pick = rng.choice(len(results), p=probs / probs.sum())
        return [results[pick]]

    return next(_advance(script, 0, _Cursor(script.initial_state), choose))


def run_protocol(script: Script, mode: str = "enumerate", seed: int | None = None):
    """Run ``script``.

    ``mode="enumerate"`` returns the list of every :class:`Branch`;
    ``mode="sample"`` returns one :class:`Branch` drawn with ``seed``.
    """
    if mode == "enumerate":
        return enumerate_branches(script)
    if mode == "sample":
        if seed is None:
            raise ConfigurationError("sample mode needs a seed")
        return sample_branch(script, np.random.default_rng(seed))
    raise ConfigurationError(f"unknown mode {mode!r}")


def sample_outcomes(script: Script, shots: int, seed: int) -> dict:
    """Outcome-tuple frequencies of ``shots`` seeded runs.

    Walks the same outcome tree as :func:`sample_branch`, drawing each outcome
    from its conditional probability, with tree nodes computed once and cached.
    """
    rng = np.random.default_rng(seed)
    leaves = enumerate_branches(script)
    children: dict = {}
    for br in leaves:
        for depth in range(len(br.outcomes)):
            prefix = br.outcomes[:depth]
            children.setdefault(prefix, {})
            children[prefix][br.outcomes[depth]] = children[prefix].get(br.outcomes[depth], 0.0) + br.probability
    counts: dict = {}
    for _ in range(shots):
        prefix: tuple = ()
        while prefix in children:
            options = list(children[prefix].items())
            weights = np.array([w for _, w in options])
            total = weights.sum()
            pick = rng.choice(len(options), p=weights / total)
            prefix = prefix + (options[pick][0],)
        counts[prefix] = counts.get(prefix, 0) + 1
    return counts


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class LocalityReport:
    ok: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_locality(transcript: Transcript) -> LocalityReport:
    """Check ownership of every event and causality of every conditional gate."""
    owner = transcript.ownership()
    known: dict = {}
    violations = []
    for n, ev in enumerate(transcript.events):
        if isinstance(ev, (GateRecord, MeasurementRecord)):
            foreign = [l for l in ev.labels if owner.get(l) != ev.party]
            if foreign:
                violations.append(f"event {n}: {ev.party} touches non-owned qubits {foreign} ({ev})")
        if isinstance(ev, MeasurementRecord):
            known.setdefault(ev.party, set()).add(ev.key)
        elif isinstance(ev, MessageRecord):
            msg = ev.message
            if msg.key not in known.get(msg.sender, set()):
                violations.append(f"event {n}: {msg.sender} sends outcome {msg.key!r} it does not know")
            for rcpt in msg.recipients:
                known.setdefault(rcpt, set()).add(msg.key)
        elif isinstance(ev, GateRecord) and ev.depends:
            missing = [k for k in ev.depends if k not in known.get(ev.party, set())]
            if missing:
                violations.append(
                    f"event {n}: causality - {ev.party} applies {ev.name} before receiving {missing}"
                )
    return LocalityReport(not violations, tuple(violations))


def global_phase_fidelity(x: StateVector | None, y: StateVector | None) -> float:
    if x is None or y is None:
        return 0.0
    return fidelity(x, y)


@dataclass(frozen=True)
class OrderReport:
    ok: bool
    max_probability_defect: float
    min_conditional_fidelity: float
    min_final_fidelity: float
    outcomes_compared: int


def order_permutation_check(script: Script, first_group: Sequence[str], second_group: Sequence[str],
                            prob_tol: float = 1e-12, fid_tol: float = 1e-10) -> OrderReport:
    """Compare enumeration with ``first_group`` measuring first vs ``second_group`` first.

    Outcome tuples are compared as sets of ``(key, index)`` pairs; for each
    the conditional output state and the final state must agree up to global
    phase.
    """
    a = run_protocol(script.reorder_measurements(first_group))
    b = run_protocol(script.reorder_measurements(second_group))
    index_a = {frozenset(br.outcomes): br for br in a}
    index_b = {frozenset(br.outcomes): br for br in b}
    keys = set(index_a) | set(index_b)
    max_defect, min_cond, min_final = 0.0, 1.0, 1.0
    for key in keys:
        pa = index_a[key].probability if key in index_a else 0.0
        pb = index_b[key].probability if key in index_b else 0.0
        max_defect = max(max_defect, abs(pa - pb))
        if key in index_a and key in index_b and min(pa, pb) > ZERO_PROB:
            ba, bb = index_a[key], index_b[key]
            min_cond = min(min_cond, global_phase_fidelity(ba.conditional_state, bb.conditional_state))
            min_final = min(min_final, global_phase_fidelity(ba.final_state, bb.final_state))
    ok = max_defect < prob_tol and min_cond >= 1 - fid_tol and min_final >= 1 - fid_tol
    return OrderReport(ok, max_defect, min_cond, min_final, len(keys))
