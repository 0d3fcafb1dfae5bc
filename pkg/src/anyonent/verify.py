"""Randomized verification suites for the structural identities of the measures.

Each suite draws seeded random states (Fibonacci and Ising two-plus-two-anyon
layouts), evaluates one identity or inequality, and reports the worst
violation over the trials.  Tolerances are fixed here; the command line can
only tighten or relax them explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channels, measures
from .model import builtin_model
from .states import (
    AnyonicDensityMatrix,
    build_space,
    maximally_mixed,
    mix,
    partial_quantum_trace,
    product_state,
    random_single_state,
    random_state,
)

DEFAULT_TOLS = {
    "thm1": 1e-8,
    "thm2": 1e-9,
    "thm3": 1e-9,
    "thm4": 1e-9,
    "prop1": 1e-10,
    "prop2": 1e-9,
    "prop3": 1e-9,
    "lemma1": 1e-9,
}

SUITE_NAMES = tuple(DEFAULT_TOLS)


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    trials: int
    max_violation: float
    tol: float
    passed: bool


def _spaces():
    fib = builtin_model("fibonacci")
    isg = builtin_model("ising")
    tau, sg = fib.charge("tau"), isg.charge("sigma")
    return (
        build_space(fib, [tau, tau], [tau, tau]),
        build_space(isg, [sg, sg], [sg, sg]),
    )


def _space_for(trial: int):
    spaces = _spaces()
    return spaces[trial % len(spaces)]


def random_separable(space, seed: int, terms: int = 3) -> AnyonicDensityMatrix:
    """Full-support separable state: products of random locals plus a mixed floor."""
    rng = np.random.default_rng(seed)
    states = [
        product_state(
            random_single_state(space.layout_a, int(rng.integers(2**31))),
            random_single_state(space.layout_b, int(rng.integers(2**31))),
        )
        for _ in range(terms)
    ]
    states.append(maximally_mixed(space))
    raw = rng.random(terms + 1) + 0.1
    weights = raw / raw.sum()
    return mix(states, list(weights))


def random_free(space, seed: int) -> AnyonicDensityMatrix:
    return channels.apply_D(random_state(space, seed))


def _block_deviation(x: AnyonicDensityMatrix, y: AnyonicDensityMatrix) -> float:
    return max(
        float(np.max(np.abs(x.blocks[c] - y.blocks[c]))) if x.blocks[c].size else 0.0
        for c in x.blocks
    )


def suite_thm1(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Pythagorean split of the relative entropy across the decohered state."""
    tol = DEFAULT_TOLS["thm1"] if tol is None else tol
    worst = 0.0
    for t in range(trials):
        space = _space_for(t)
        rho = random_state(space, seed + 7 * t)
        sigma = random_separable(space, seed + 7 * t + 1)
        lhs = measures.relative_entropy(rho, sigma)
        rhs = measures.e_ace(rho).value + measures.relative_entropy(channels.apply_D(rho), sigma)
        worst = max(worst, abs(lhs - rhs))
    return SuiteReport("thm1", trials, worst, tol, worst <= tol)


def suite_thm2(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Charge entanglement lower-bounds the relative entropy to any free state."""
    tol = DEFAULT_TOLS["thm2"] if tol is None else tol
    worst = 0.0
    for t in range(trials):
        space = _space_for(t)
        rho = random_state(space, seed + 11 * t)
        free = random_free(space, seed + 11 * t + 5)
        gap = measures.e_ace(rho).value - measures.relative_entropy(rho, free)
        worst = max(worst, max(gap, 0.0))
    return SuiteReport("thm2", trials, worst, tol, worst <= tol)


def suite_thm3(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Relative-entropy and entropy-difference forms of charge entanglement agree."""
    tol = DEFAULT_TOLS["thm3"] if tol is None else tol
    worst = 0.0
    for t in range(trials):
        rho = random_state(_space_for(t), seed + 13 * t)
        worst = max(worst, abs(measures.e_ace(rho).value - measures.s_ace(rho)))
    return SuiteReport("thm3", trials, worst, tol, worst <= tol)


def suite_thm4(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Average charge entanglement never grows under local charge measurement."""
    tol = DEFAULT_TOLS["thm4"] if tol is None else tol
    worst = 0.0
    for t in range(trials):
        rho = random_state(_space_for(t), seed + 17 * t)
        party = "A" if t % 2 == 0 else "B"
        before = measures.e_ace(rho).value
        after = sum(
            p * measures.e_ace(post).value
            for _, p, post in channels.measure_local_charge(rho, party)
        )
        worst = max(worst, max(after - before, 0.0))
    return SuiteReport("thm4", trials, worst, tol, worst <= tol)


def suite_prop1(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Decoherence commutes with the implemented free operations."""
    tol = DEFAULT_TOLS["prop1"] if tol is None else tol
    worst = 0.0
    for t in range(trials):
        space = _space_for(t)
        rho = random_state(space, seed + 19 * t)
        drho = channels.apply_D(rho)
        party = "A" if t % 2 == 0 else "B"
        # party trace: decohering first must not change the marginal
        ma = partial_quantum_trace(rho, party)
        mb = partial_quantum_trace(drho, party)
        worst = max(
            worst,
            max(float(np.max(np.abs(ma.blocks[c] - mb.blocks[c]))) for c in ma.blocks),
        )
        # charge-measurement branches (unnormalized)
        left = {a: st.map_blocks(lambda c, m: p * m) for a, p, st in
                channels.measure_local_charge(rho, party)}
        right = {a: st.map_blocks(lambda c, m: p * m) for a, p, st in
                 channels.measure_local_charge(drho, party)}
        for a, st in left.items():
            worst = max(worst, _block_deviation(channels.apply_D(st), right[a]))
        # vacuum ancilla
        worst = max(
            worst,
            _block_deviation(
                channels.apply_D(channels.adjoin_vacuum_ancilla(rho, party, 2)),
                channels.adjoin_vacuum_ancilla(drho, party, 2),
            ),
        )
        # charge-preserving local channel
        ch = channels.random_local_channel(space, party, seed + 19 * t + 3)
        worst = max(
            worst,
            _block_deviation(
                channels.apply_D(channels.apply_channel(rho, ch)),
                channels.apply_channel(drho, ch),
            ),
        )
    return SuiteReport("prop1", trials, worst, tol, worst <= tol)


def suite_prop2(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Relative entropy contracts under charge-preserving local channels."""
    tol = DEFAULT_TOLS["prop2"] if tol is None else tol
    worst = 0.0
    for t in range(trials):
        space = _space_for(t)
        rho = random_state(space, seed + 23 * t)
        sigma = random_state(space, seed + 23 * t + 1)
        ch = channels.random_local_channel(space, "A" if t % 2 else "B", seed + 23 * t + 2)
        before = measures.relative_entropy(rho, sigma)
        after = measures.relative_entropy(
            channels.apply_channel(rho, ch), channels.apply_channel(sigma, ch)
        )
        worst = max(worst, max(after - before, 0.0))
    return SuiteReport("prop2", trials, worst, tol, worst <= tol)


def suite_prop3(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Charge entanglement is convex under mixing."""
    tol = DEFAULT_TOLS["prop3"] if tol is None else tol
    worst = 0.0
    lambdas = (0.25, 0.5, 0.75)
    for t in range(trials):
        space = _space_for(t)
        r1 = random_state(space, seed + 29 * t)
        r2 = random_state(space, seed + 29 * t + 1)
        lam = lambdas[t % 3]
        mixed = measures.e_ace(mix([r1, r2], [lam, 1 - lam])).value
        bound = lam * measures.e_ace(r1).value + (1 - lam) * measures.e_ace(r2).value
        worst = max(worst, max(mixed - bound, 0.0))
    return SuiteReport("prop3", trials, worst, tol, worst <= tol)


def suite_lemma1(trials: int, seed: int, tol: float | None = None) -> SuiteReport:
    """Joint convexity of the anyonic relative entropy."""
    tol = DEFAULT_TOLS["lemma1"] if tol is None else tol
    worst = 0.0
    lambdas = (0.25, 0.5, 0.75)
    for t in range(trials):
        space = _space_for(t)
        r1, r2 = random_state(space, seed + 31 * t), random_state(space, seed + 31 * t + 1)
        s1, s2 = random_state(space, seed + 31 * t + 2), random_state(space, seed + 31 * t + 3)
        lam = lambdas[t % 3]
        lhs = measures.relative_entropy(
            mix([r1, r2], [lam, 1 - lam]), mix([s1, s2], [lam, 1 - lam])
        )
        rhs = lam * measures.relative_entropy(r1, s1) + (1 - lam) * measures.relative_entropy(r2, s2)
        worst = max(worst, max(lhs - rhs, 0.0))
    return SuiteReport("lemma1", trials, worst, tol, worst <= tol)


_SUITES = {
    "thm1": suite_thm1,
    "thm2": suite_thm2,
    "thm3": suite_thm3,
    "thm4": suite_thm4,
    "prop1": suite_prop1,
    "prop2": suite_prop2,
    "prop3": suite_prop3,
    "lemma1": suite_lemma1,
}


def run_suites(
    which: str, trials: int, seed: int, tol: float | None = None
) -> list[SuiteReport]:
    names = SUITE_NAMES if which == "all" else (which,)
    if any(nm not in _SUITES for nm in names):
        raise ValueError(f"unknown suite {which!r}")
    return [_SUITES[nm](trials, seed, tol) for nm in names]
