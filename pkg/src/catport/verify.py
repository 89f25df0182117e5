"""Randomized exhaustive verification of every protocol.

Each ``check_*`` function draws random inputs from a seeded generator,
enumerates every branch and returns a :class:`CheckResult`. ``verify_all``
runs the whole suite; the CLI ``verify`` command and the acceptance tests
both call into here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analysis import channel_negativity_report, closed_form_emax, frame_for_overlap, teleportable_entanglement_range
from .locc import order_permutation_check, validate_locality
from .protocol_math import BELL_NAMES, CLAIRE_NAMES, I2, CorrectionAction, SchmidtFrame, cat_correction
from .protocols import (
    ChannelSpec,
    TeleportInput,
    build_script,
    probabilistic_protocol,
    success_probability,
)
from .locc import run_protocol
from .qstate import entanglement_entropy, schmidt

FID_TOL = 1e-10
PROB_TOL = 1e-12
EBIT_TOL = 1e-9
DEFAULT_SEED = 20011


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    runs: int = 0
    branches: int = 0
    min_fidelity: float = 1.0
    max_probability_defect: float = 0.0
    seconds: float = 0.0
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def fail(self, message: str) -> None:
        self.passed = False
        if len(self.failures) < 20:
            self.failures.append(message)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: runs={self.runs} branches={self.branches} "
            f"min_fidelity={self.min_fidelity:.15f} max_prob_defect={self.max_probability_defect:.3e} "
            f"time={self.seconds:.2f}s"
        )


# -- random draws -----------------------------------------------------------


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_frame(rng: np.random.Generator) -> SchmidtFrame:
    return SchmidtFrame.from_unitary(random_unitary(rng))


def random_pair(rng: np.random.Generator, r: float | None = None):
    """Random ``(phi, phi')`` with overlap modulus ``r`` (uniform in [0, 1] if None)."""
    if r is None:
        r = float(rng.uniform())
    phi = random_qubit(rng)
    perp = np.array([-phi[1].conjugate(), phi[0].conjugate()])
    eps = rng.uniform(-np.pi, np.pi)
    phi_prime = np.exp(1j * eps) * (r * phi + np.sqrt(max(1 - r * r, 0.0)) * perp)
    return phi, phi_prime / np.linalg.norm(phi_prime)


def random_coefficients(rng: np.random.Generator):
    v = random_qubit(rng)
    return v[0], v[1]


def random_cat(rng: np.random.Generator, n: int, rs: Sequence[float] | None = None):
    """Random ``(TeleportInput, ChannelSpec)`` for N parties (ghz-class family at N = 2)."""
    pairs = [random_pair(rng, None if rs is None else rs[i]) for i in range(n - 1)]
    phis = [p for p, _ in pairs]
    primes = [q for _, q in pairs]
    alpha, beta = random_coefficients(rng)
    inp = TeleportInput(alpha, beta, phis, primes, random_frame(rng))
    channel = ChannelSpec.ghz_class(phis[0], primes[0]) if n == 2 else ChannelSpec.cat(phis, primes)
    return inp, channel


def random_ghz_input(rng: np.random.Generator) -> TeleportInput:
    alpha, beta = random_coefficients(rng)
    return TeleportInput.schmidt(alpha, beta, random_frame(rng), random_frame(rng))


# -- shared branch checks ---------------------------------------------------


def _label(branch) -> str:
    return "(" + ", ".join(branch.outcome_names) + ")"


def _check_branches(res: CheckResult, branches, *, expect_bits: dict | None = None) -> None:
    res.runs += 1
    res.branches += len(branches)
    total = sum(b.probability for b in branches)
    res.max_probability_defect = max(res.max_probability_defect, abs(total - 1.0))
    if abs(total - 1.0) > PROB_TOL:
        res.fail(f"probabilities sum to {total!r}")
    for br in branches:
        report = validate_locality(br.transcript)
        if not report.ok:
            res.fail(f"locality violation in {_label(br)}: {report.violations[0]}")
        if not br.success:
            continue
        res.min_fidelity = min(res.min_fidelity, br.fidelity)
        if br.fidelity < 1 - FID_TOL:
            res.fail(f"branch {_label(br)} fidelity {br.fidelity!r}")
        ent = entanglement_entropy(schmidt(br.final_state, br.final_state.labels[-1:]))
        if ent > 1 + EBIT_TOL:
            res.fail(f"branch {_label(br)} carries {ent} ebits")
        if expect_bits is not None:
            got: dict = {}
            for msg in br.transcript.messages():
                got.setdefault(msg.sender, []).append(msg.bit_count)
            if got != expect_bits:
                res.fail(f"branch {_label(br)} messages {got} != {expect_bits}")


def _cat_bits(n: int) -> dict:
    bits = {"Alice": [2]}
    bits.update({f"Claire{i}": [1] for i in range(1, n)})
    return bits


# -- checks -----------------------------------------------------------------


def check_ghz(trials: int, rng: np.random.Generator) -> CheckResult:
    res = CheckResult("ghz")
    t0 = time.perf_counter()
    max_p5 = 0.0
    channel = ChannelSpec.ghz()
    for k in range(trials):
        inp = random_ghz_input(rng)
        branches = run_protocol(build_script(inp, channel))
        _check_branches(res, branches, expect_bits={"Alice": [2]})
        for br in branches:
            if br.outcome("alice") == 4:
                max_p5 = max(max_p5, br.probability)
            elif abs(br.probability - 0.25) > PROB_TOL:
                res.fail(f"draw {k}: GHZ outcome {_label(br)} probability {br.probability!r}")
        if sum(br.success for br in branches) != 4:
            res.fail(f"draw {k}: expected 4 successful branches")
    if max_p5 >= PROB_TOL:
        res.fail(f"P5 clicked with probability {max_p5!r}")
    res.extra["max_p5_probability"] = max_p5
    res.seconds = time.perf_counter() - t0
    return res


GHZ_CLASS_FIXED_R = (0.0, 0.3, 1 / np.sqrt(2), 0.95, 1.0)


def check_ghz_class(trials: int, rng: np.random.Generator) -> CheckResult:
    res = CheckResult("ghz-class")
    t0 = time.perf_counter()
    for k in range(trials):
        r = GHZ_CLASS_FIXED_R[k] if k < len(GHZ_CLASS_FIXED_R) else None
        inp, channel = random_cat(rng, 2, None if r is None else [r])
        r = channel.frames()[0].r
        branches = run_protocol(build_script(inp, channel))
        _check_branches(res, branches, expect_bits=_cat_bits(2))
        if len(branches) != 8:
            res.fail(f"draw {k}: {len(branches)} branches instead of 8")
        for bell in range(4):
            sub = [b for b in branches if b.outcome("alice") == bell]
            p_bell = sum(b.probability for b in sub)
            defect = abs(p_bell - 0.25)
            for b in sub:
                expected = (1 + r) / 2 if b.outcome("claire1") == 0 else (1 - r) / 2
                defect = max(defect, abs(b.probability / 0.25 - expected))
            res.max_probability_defect = max(res.max_probability_defect, defect)
            if defect > PROB_TOL:
                res.fail(f"draw {k}: Bell outcome {BELL_NAMES[bell]} probability defect {defect:.3e}")
    res.seconds = time.perf_counter() - t0
    return res


def cat_leaf_probability(frames, claire_outcomes) -> float:
    p = 0.25
    for f, c in zip(frames, claire_outcomes):
        p *= np.cos(f.theta / 2) ** 2 if c == 0 else np.sin(f.theta / 2) ** 2
    return float(p)


def check_cat(n: int, trials: int, rng: np.random.Generator) -> CheckResult:
    res = CheckResult(f"cat N={n}")
    t0 = time.perf_counter()
    for k in range(trials):
        inp, channel = random_cat(rng, n)
        frames = channel.frames()
        branches = run_protocol(build_script(inp, channel))
        _check_branches(res, branches, expect_bits=_cat_bits(n))
        res.extra["branches_per_run"] = len(branches)
        if len(branches) != 4 * 2 ** (n - 1):
            res.fail(f"draw {k}: {len(branches)} branches instead of {4 * 2 ** (n - 1)}")
        for br in branches:
            claires = [br.outcome(f"claire{i}") for i in range(1, n)]
            expected = cat_leaf_probability(frames, claires)
            defect = abs(br.probability - expected)
            res.max_probability_defect = max(res.max_probability_defect, defect)
            if defect > PROB_TOL:
                res.fail(f"draw {k}: leaf {_label(br)} probability {br.probability!r} vs {expected!r}")
    res.seconds = time.perf_counter() - t0
    return res


def check_order(trials_ghz_class: int, trials_cat: int, rng: np.random.Generator, n_cat: int = 3) -> CheckResult:
    res = CheckResult("order invariance")
    t0 = time.perf_counter()
    for n, trials in ((2, trials_ghz_class), (n_cat, trials_cat)):
        claires = [f"Claire{i}" for i in range(1, n)]
        for k in range(trials):
            inp, channel = random_cat(rng, n)
            script = build_script(inp, channel)
            rep = order_permutation_check(script, ["Alice"], claires)
            res.runs += 1
            res.branches += rep.outcomes_compared
            res.max_probability_defect = max(res.max_probability_defect, rep.max_probability_defect)
            res.min_fidelity = min(res.min_fidelity, rep.min_conditional_fidelity, rep.min_final_fidelity)
            if not rep.ok:
                res.fail(f"N={n} draw {k}: orderings disagree ({rep})")
    res.seconds = time.perf_counter() - t0
    return res


PROBABILISTIC_A2 = (0.5, 0.6, 0.8, 0.99)


def check_probabilistic(trials: int, rng: np.random.Generator) -> CheckResult:
    res = CheckResult("probabilistic")
    t0 = time.perf_counter()
    for a2 in PROBABILISTIC_A2:
        a, b = np.sqrt(a2), np.sqrt(1 - a2)
        for k in range(trials):
            n = 2 + k % 2
            inp, det_channel = random_cat(rng, n)
            weighted = ChannelSpec(det_channel.family, det_channel.phis, det_channel.phi_primes, a, b)
            branches = probabilistic_protocol(inp, weighted)
            _check_branches(res, branches)
            expected = 2 * min(a2, 1 - a2)
            got = success_probability(branches)
            defect = abs(got - expected)
            res.max_probability_defect = max(res.max_probability_defect, defect)
            if defect > PROB_TOL:
                res.fail(f"|a|^2={a2}: success probability {got!r} vs {expected!r}")
            for br in branches:
                if br.success or br.probability < 1e-14:
                    continue
                joint = br.transcript.final_state
                cut = [l for l in joint.labels if l.startswith("B")]
                ent = entanglement_entropy(schmidt(joint, cut))
                if ent > 1e-10:
                    res.fail(f"|a|^2={a2}: failure branch keeps {ent} ebits across the Bob cut")
            if a2 == 0.5:
                det = run_protocol(build_script(inp, det_channel))
                succ = [br for br in branches if br.success]
                if len(succ) != len(det):
                    res.fail("balanced channel: branch count differs from deterministic run")
                for s, d in zip(succ, det):
                    same = s.outcomes[1:] == d.outcomes and abs(s.probability - d.probability) <= PROB_TOL
                    if not same or abs(s.fidelity - d.fidelity) > FID_TOL:
                        res.fail(f"balanced channel: branch {_label(d)} differs from deterministic run")
    res.seconds = time.perf_counter() - t0
    return res


R_GRID = tuple(np.round(np.arange(0, 11) / 10, 10))


def check_analysis() -> CheckResult:
    res = CheckResult("channel analysis")
    t0 = time.perf_counter()
    for r in R_GRID:
        frame = frame_for_overlap(r)
        rep = channel_negativity_report(ChannelSpec.ghz_class(frame.phi, frame.phi_prime))
        res.runs += 1
        for name, got, want in (("N(A:B2)", rep.negativity_AB2, r / 2), ("N(A:B1)", rep.negativity_AB1, 0.0)):
            res.max_probability_defect = max(res.max_probability_defect, abs(got - want))
            if abs(got - want) > 1e-10:
                res.fail(f"r={r}: {name}={got!r}, expected {want!r}")
    ghz = channel_negativity_report(ChannelSpec.ghz())
    if abs(ghz.negativity_AB2) > 1e-10 or abs(ghz.negativity_AB1) > 1e-10:
        res.fail(f"GHZ channel negativities {ghz}")
    res.seconds = time.perf_counter() - t0
    return res


def check_entanglement_range(points: int = 101) -> CheckResult:
    res = CheckResult("entanglement range")
    t0 = time.perf_counter()
    maxima = []
    for r in R_GRID:
        rng_ = teleportable_entanglement_range(frame_for_overlap(r), points)
        res.runs += 1
        maxima.append(rng_.e_max)
        diff = abs(rng_.e_max - closed_form_emax(r))
        res.max_probability_defect = max(res.max_probability_defect, diff)
        if diff > 1e-6:
            res.fail(f"r={r}: grid e_max {rng_.e_max!r} vs H((1+r)/2) {closed_form_emax(r)!r}")
        if rng_.e_max > 1 + EBIT_TOL:
            res.fail(f"r={r}: e_max {rng_.e_max!r} exceeds one ebit")
        if abs(rng_.e_max - 1.0) <= 1e-9 and r != 0:
            res.fail(f"r={r}: e_max reaches 1 away from r = 0")
    if any(b >= a for a, b in zip(maxima, maxima[1:])):
        res.fail("e_max is not strictly decreasing in r")
    res.extra["e_max"] = [float(m) for m in maxima]
    res.seconds = time.perf_counter() - t0
    return res


# -- fault injection --------------------------------------------------------


def faulty_table(frames, bell: int, claire: int) -> Callable:
    """Correction table with the ``(bell, claire)`` entry replaced by identities."""

    def table(b, claires):
        action = cat_correction(b, claires, frames)
        if b == bell and list(claires) == [claire]:
            return CorrectionAction(tuple(I2.copy() for _ in action.gates), tuple("I" for _ in action.gates))
        return action

    return table


def parse_fault(spec: str) -> tuple[int, int]:
    """``"psi+,a"`` -> ``(2, 0)``."""
    try:
        bell, claire = (s.strip() for s in spec.split(","))
        return BELL_NAMES.index(bell), CLAIRE_NAMES.index(claire)
    except ValueError:
        raise ValueError(f"fault must look like 'psi+,a', got {spec!r}") from None


def check_ghz_class_with_fault(trials: int, rng: np.random.Generator, fault: tuple[int, int]) -> CheckResult:
    """ghz-class check with one correction-table entry sabotaged."""
    res = CheckResult("ghz-class (fault injected)")
    t0 = time.perf_counter()
    for k in range(trials):
        inp, channel = random_cat(rng, 2)
        table = faulty_table(channel.frames(), *fault)
        _check_branches(res, run_protocol(build_script(inp, channel, table=table)))
    res.seconds = time.perf_counter() - t0
    return res


def verify_all(trials: int = 200, seed: int = DEFAULT_SEED, cat_trials: int = 50, max_n: int = 6) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = [check_ghz(trials, rng), check_ghz_class(trials, rng)]
    results += [check_cat(n, cat_trials, rng) for n in range(2, max_n + 1)]
    results.append(check_order(min(trials, 100), 20, rng))
    results.append(check_probabilistic(max(trials // 20, 2), rng))
    results.append(check_analysis())
    results.append(check_entanglement_range())
    return results
