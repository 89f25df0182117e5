"""Teleportation protocols through GHZ, GHZ-class and cat-like channels.

Qubit labels for an N-party run (N >= 2):

* ``"1" .. "N-1"`` - input qubits of Claire1 .. Claire(N-1),
* ``"N"`` - Alice's input qubit, ``"A"`` - Alice's channel qubit,
* ``"B1" .. "BN"`` - the Bobs' channel qubits, which end up holding the state.

The GHZ protocol (N = 2) gives both input qubits to Alice and uses no Claire.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError
from .locc import (
    Branch,
    Broadcast,
    Conditional,
    Halt,
    LocalGate,
    Measure,
    Party,
    Script,
    run_protocol,
)
from .protocol_math import (
    CorrectionAction,
    OverlapFrame,
    SchmidtFrame,
    bell_basis,
    cat_correction,
    claire_basis,
    filter_measurement,
    gauge_unitaries,
    ghz_basis,
    ghz_correction,
    overlap_frame,
    restore_unitaries,
)
from .qstate import KET0, KET1, NORM_TOL, StateVector, qubit_vector, tensor

MAX_PARTIES = 8
MATCH_TOL = 1e-10

FAMILIES = ("GHZ", "ghz-class", "cat")


@dataclass(frozen=True, eq=False)
class TeleportInput:
    """The state to teleport, ``alpha |phi_1..phi_{N-1} 0'> + beta |phi'_1..phi'_{N-1} 1'>``.

    For the GHZ protocol ``phis == [|0'>]`` and ``phi_primes == [|1'>]`` (an
    orthonormal pair) and ``frame`` is ``(|0''>, |1''>)``.
    """

    alpha: complex
    beta: complex
    phis: tuple
    phi_primes: tuple
    frame: SchmidtFrame = field(default_factory=SchmidtFrame.computational)

    def __post_init__(self):
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0) > NORM_TOL:
            raise ConfigurationError("|alpha|^2 + |beta|^2 must equal 1")
        phis = tuple(qubit_vector(v) for v in self.phis)
        primes = tuple(qubit_vector(v) for v in self.phi_primes)
        if len(phis) != len(primes) or not phis:
            raise ConfigurationError("phis and phi_primes must be non-empty and equally long")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "phi_primes", primes)

    @classmethod
    def schmidt(cls, alpha, beta, first: SchmidtFrame, second: SchmidtFrame) -> "TeleportInput":
        """``alpha|0'0''> + beta|1'1''>`` for the GHZ protocol."""
        return cls(alpha, beta, (first.zero,), (first.one,), second)

    @property
    def n(self) -> int:
        return len(self.phis) + 1

    def state(self, labels: Sequence[str]) -> StateVector:
        zero = _product(list(self.phis) + [self.frame.zero])
        one = _product(list(self.phi_primes) + [self.frame.one])
        return StateVector(self.alpha * zero + self.beta * one, labels)


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """``a |0 phi_1..phi_{N-1} 0> + b |1 phi'_1..phi'_{N-1} 1>`` shared by Alice and N Bobs."""

    family: str
    phis: tuple
    phi_primes: tuple
    a: complex = 1 / np.sqrt(2)
    b: complex = 1 / np.sqrt(2)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown channel family {self.family!r}")
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > NORM_TOL:
            raise ConfigurationError("|a|^2 + |b|^2 must equal 1")
        phis = tuple(qubit_vector(v) for v in self.phis)
        primes = tuple(qubit_vector(v) for v in self.phi_primes)
        if len(phis) != len(primes) or not phis:
            raise ConfigurationError("phis and phi_primes must be non-empty and equally long")
        if self.family in ("GHZ", "ghz-class") and len(phis) != 1:
            raise ConfigurationError(f"{self.family} channels have N = 2")
        if self.family == "GHZ" and (
            np.linalg.norm(phis[0] - KET0) > NORM_TOL or np.linalg.norm(primes[0] - KET1) > NORM_TOL
        ):
            raise ConfigurationError("the GHZ channel uses |0> and |1> on Bob1")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "phi_primes", primes)

    @classmethod
    def ghz(cls, a=1 / np.sqrt(2), b=1 / np.sqrt(2)) -> "ChannelSpec":
        return cls("GHZ", (KET0,), (KET1,), a, b)

    @classmethod
    def ghz_class(cls, phi, phi_prime, a=1 / np.sqrt(2), b=1 / np.sqrt(2)) -> "ChannelSpec":
        return cls("ghz-class", (phi,), (phi_prime,), a, b)

    @classmethod
    def cat(cls, phis, phi_primes, a=1 / np.sqrt(2), b=1 / np.sqrt(2)) -> "ChannelSpec":
        return cls("cat", tuple(phis), tuple(phi_primes), a, b)

    @property
    def n(self) -> int:
        return len(self.phis) + 1

    @property
    def balanced(self) -> bool:
        return abs(self.a - self.b) < NORM_TOL and abs(abs(self.a) ** 2 - 0.5) < NORM_TOL

    def frames(self) -> list[OverlapFrame]:
        return [overlap_frame(p, q) for p, q in zip(self.phis, self.phi_primes)]

    def state(self, labels: Sequence[str]) -> StateVector:
        zero = _product([KET0, *self.phis, KET0])
        one = _product([KET1, *self.phi_primes, KET1])
        return StateVector(self.a * zero + self.b * one, labels)


def _product(vectors) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for v in vectors:
        out = np.kron(out, v)
    return out


def input_labels(n: int) -> tuple:
    return tuple(str(i) for i in range(1, n + 1))


def channel_labels(n: int) -> tuple:
    return ("A",) + bob_labels(n)


def bob_labels(n: int) -> tuple:
    return tuple(f"B{j}" for j in range(1, n + 1))


def parties_for(n: int, claires: bool = True) -> tuple:
    """Alice, Claire1..Claire(N-1) (if any) and Bob1..BobN with their qubits."""
    parties = []
    if claires:
        parties += [Party(f"Claire{i}", "Claire", (str(i),)) for i in range(1, n)]
        parties.append(Party("Alice", "Alice", (str(n), "A")))
    else:
        parties.append(Party("Alice", "Alice", input_labels(n) + ("A",)))
    parties += [Party(f"Bob{j}", "Bob", (f"B{j}",)) for j in range(1, n + 1)]
    return tuple(parties)


def build_initial_state(inp: TeleportInput, channel: ChannelSpec):
    """Joint initial state ``input (1..N) (x) channel (A, B1..BN)`` and its ownership map."""
    if inp.n != channel.n:
        raise ConfigurationError(f"input has N = {inp.n} but the channel has N = {channel.n}")
    n = inp.n
    state = tensor(inp.state(input_labels(n)), channel.state(channel_labels(n)))
    parties = parties_for(n, claires=channel.family != "GHZ")
    return state, {q: p.name for p in parties for q in p.qubits}


def target_state(inp: TeleportInput) -> StateVector:
    return inp.state(bob_labels(inp.n))


# -- script builders --------------------------------------------------------

CorrectionTable = Callable[[int, Sequence[int]], CorrectionAction]


def _check_ghz_input(inp: TeleportInput) -> None:
    if inp.n != 2:
        raise ConfigurationError("the GHZ protocol teleports two-qubit states")
    if abs(np.vdot(inp.phis[0], inp.phi_primes[0])) > MATCH_TOL:
        raise ConfigurationError("GHZ protocol input must be written in a Schmidt basis |0'0''>, |1'1''>")


def _check_plane(inp: TeleportInput, channel: ChannelSpec) -> None:
    for i, (p, q, cp, cq) in enumerate(zip(inp.phis, inp.phi_primes, channel.phis, channel.phi_primes), 1):
        if np.linalg.norm(p - cp) > MATCH_TOL or np.linalg.norm(q - cq) > MATCH_TOL:
            raise ConfigurationError(
                f"input vectors for qubit {i} are outside the channel's teleportable plane"
            )


def _ghz_steps(inp: TeleportInput, table=None) -> list:
    first = SchmidtFrame(inp.phis[0], inp.phi_primes[0])
    u1, u2 = restore_unitaries([first, inp.frame])
    table = table or (lambda outcome: ghz_correction(outcome + 1))
    bobs = ("Bob1", "Bob2")

    def rule(j):
        def pick(values):
            action = table(values["alice"])
            return action.gates[j], action.names[j]
        return pick

    return [
        LocalGate("Alice", ("1",), u1.conj().T, "U1^-1"),
        LocalGate("Alice", ("2",), u2.conj().T, "U2^-1"),
        Measure("Alice", ("1", "2", "A"), ghz_basis(), "alice", "GHZ"),
        Halt("alice", frozenset({4}), "P5 clicked"),
        Broadcast("Alice", bobs, "alice"),
        Conditional("Bob1", "B1", ("alice",), rule(0)),
        Conditional("Bob2", "B2", ("alice",), rule(1)),
        LocalGate("Bob1", ("B1",), u1, "U1"),
        LocalGate("Bob2", ("B2",), u2, "U2"),
    ]


def _cat_steps(inp: TeleportInput, frames: list[OverlapFrame], table: CorrectionTable | None = None) -> list:
    n = inp.n
    u_prime, alice_phase = gauge_unitaries(frames, inp.frame)
    restore = restore_unitaries([inp.frame], frames)
    bobs = tuple(f"Bob{j}" for j in range(1, n + 1))
    claire_keys = tuple(f"claire{i}" for i in range(1, n))
    keys = ("alice",) + claire_keys
    table = table or (lambda bell, claires: cat_correction(bell, claires, frames))

    def rule(j):
        def pick(values):
            action = table(values["alice"], [values[k] for k in claire_keys])
            return action.gates[j], action.names[j]
        return pick

    steps = [
        LocalGate("Alice", (str(n),), u_prime, "U'"),
        LocalGate("Alice", ("A",), alice_phase, "phase"),
        Measure("Alice", (str(n), "A"), bell_basis(), "alice", "Bell"),
        Broadcast("Alice", bobs, "alice"),
    ]
    for i, f in enumerate(frames, 1):
        steps.append(Measure(f"Claire{i}", (str(i),), claire_basis(f), f"claire{i}", "a/a_bar"))
        steps.append(Broadcast(f"Claire{i}", bobs, f"claire{i}"))
    for j in range(n):
        steps.append(Conditional(bobs[j], f"B{j + 1}", keys, rule(j)))
    steps.append(LocalGate(bobs[-1], (f"B{n}",), restore[-1], "U'^-1"))
    return steps


def _filter_steps(channel: ChannelSpec, bobs: tuple) -> list:
    return [
        Measure("Alice", ("A",), filter_measurement(channel.a, channel.b), "filter", "filter"),
        Broadcast("Alice", bobs, "filter"),
        Halt("filter", frozenset({1}), "filter failed"),
    ]


def build_script(inp: TeleportInput, channel: ChannelSpec, *, table=None, name: str | None = None) -> Script:
    """Script for any supported channel; weighted channels get the filtering prefix.

    ``table`` replaces the correction table (used to inject faults in tests).
    """
    if channel.n != inp.n:
        raise ConfigurationError(f"input has N = {inp.n} but the channel has N = {channel.n}")
    n = inp.n
    if not 2 <= n <= MAX_PARTIES:
        raise ConfigurationError(f"N must be in 2..{MAX_PARTIES}, got {n}")
    if channel.family == "GHZ":
        _check_ghz_input(inp)
        steps = _ghz_steps(inp, table)
    else:
        _check_plane(inp, channel)
        steps = _cat_steps(inp, channel.frames(), table)
    if not channel.balanced:
        steps = _filter_steps(channel, tuple(f"Bob{j}" for j in range(1, n + 1))) + steps
    state, _ = build_initial_state(inp, channel)
    return Script(
        name=name or _default_name(channel),
        initial_state=state,
        parties=parties_for(n, claires=channel.family != "GHZ"),
        steps=steps,
        output_labels=bob_labels(n),
        target=target_state(inp),
    )


def _default_name(channel: ChannelSpec) -> str:
    base = channel.family if channel.family != "cat" else f"cat(N={channel.n})"
    return base if channel.balanced else f"probabilistic {base}"


def _require_balanced(channel: ChannelSpec) -> None:
    if not channel.balanced:
        raise ConfigurationError("weighted channel: use probabilistic_protocol")


def ghz_protocol(inp: TeleportInput, channel: ChannelSpec | None = None, **kw) -> list[Branch]:
    """All branches of the GHZ-basis protocol through ``(|000> + |111>)/sqrt(2)``."""
    channel = channel or ChannelSpec.ghz()
    if channel.family != "GHZ":
        raise ConfigurationError(f"ghz_protocol needs a GHZ channel, got {channel.family}")
    _require_balanced(channel)
    return run_protocol(build_script(inp, channel, **kw))


def ghz_class_protocol(inp: TeleportInput, channel: ChannelSpec, **kw) -> list[Branch]:
    """All 8 branches of the Bell + ``{a, a_bar}`` protocol through ``(|0 phi 0> + |1 phi' 1>)/sqrt(2)``."""
    if channel.family != "ghz-class":
        raise ConfigurationError(f"ghz_class_protocol needs a ghz-class channel, got {channel.family}")
    _require_balanced(channel)
    return run_protocol(build_script(inp, channel, **kw))


def cat_protocol(inp: TeleportInput, channel: ChannelSpec, **kw) -> list[Branch]:
    """All ``4 * 2**(N-1)`` branches of the N-party cat protocol."""
    if channel.family not in ("cat", "ghz-class"):
        raise ConfigurationError(f"cat_protocol needs a cat channel, got {channel.family}")
    _require_balanced(channel)
    return run_protocol(build_script(inp, channel, **kw))


def probabilistic_protocol(inp: TeleportInput, channel: ChannelSpec, **kw) -> list[Branch]:
    """Filter qubit A, then run the deterministic protocol on success.

    A balanced channel still gets the (trivial) filter so both cases share one
    branch structure: a zero-probability failure branch plus the deterministic
    branches.
    """
    filt = _filter_steps(channel, tuple(f"Bob{j}" for j in range(1, inp.n + 1)))
    script = build_script(inp, channel, **kw)
    if channel.balanced:
        script = Script(
            name=f"probabilistic {script.name}",
            initial_state=script.initial_state,
            parties=script.parties,
            steps=tuple(filt) + script.steps,
            output_labels=script.output_labels,
            target=script.target,
        )
    return run_protocol(script)


def success_probability(branches: Sequence[Branch]) -> float:
    return float(sum(b.probability for b in branches if b.success))


def min_fidelity(branches: Sequence[Branch]) -> float:
    fids = [b.fidelity for b in branches if b.success]
    return float(min(fids)) if fids else float("nan")
