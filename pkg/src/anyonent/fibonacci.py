"""Fibonacci-anyon benchmark states and closed-form measures.

Builds the maximally entangled and isotropic states on 2n Fibonacci anyons
(n per party), evaluates the closed-form expressions for the charge and
conventional entanglement of the isotropic family, and produces the
three-measure sweep over the mixing parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import measures
from .model import AnyonModel, builtin_model, enumerate_paths
from .parallel import parallel_map
from .states import (
    AnyonicDensityMatrix,
    BipartiteSpace,
    build_space,
    maximally_mixed,
    mix,
    zero_blocks,
)

MAX_N = 8
PSD_ADMISSIBLE_TOL = 1e-10


class NotPositive(Exception):
    """Mixing parameter outside the positive-semidefinite range."""


def fib(k: int) -> int:
    """Fibonacci numbers with F_1 = F_2 = 1 (F_0 = 0)."""
    if k < 0:
        raise ValueError("negative Fibonacci index")
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def fibonacci_model() -> AnyonModel:
    return builtin_model("fibonacci")


def _xlogx(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log(x)


@dataclass(frozen=True)
class IsotropicParams:
    """Parameters of the isotropic family on 2n Fibonacci anyons."""

    n: int
    alpha: float
    fib_prev: int
    fib: int
    d: float

    @staticmethod
    def make(n: int, alpha: float) -> "IsotropicParams":
        if not 1 <= n <= MAX_N:
            raise ValueError(f"n must be in 1..{MAX_N}")
        model = fibonacci_model()
        tau = model.charge("tau")
        counts = (
            len(enumerate_paths(model, [tau] * n, model.vacuum)),
            len(enumerate_paths(model, [tau] * n, tau)),
        )
        if counts != (fib(n - 1), fib(n)):
            raise AssertionError(f"path counts {counts} disagree with Fibonacci numbers")
        return IsotropicParams(n, float(alpha), fib(n - 1), fib(n), model.d(tau))

    def e_ace_closed(self) -> float:
        return e_ace_closed(self)

    def e_ce_closed(self) -> float:
        return e_ce_closed(self)


@dataclass(frozen=True)
class MesDecomposition:
    """The three canonical vectors under decoherence of the maximally entangled state.

    phi1 pairs the vacuum-fused local bases (total charge 1), phi2 the
    tau-fused bases joined to total charge 1, phi3 the same joined to total
    charge tau.  Quantum-trace norms are 1, 1 and d_tau.  weights are the
    decohered-state coefficients on the three projectors.
    """

    space: BipartiteSpace
    phi1: dict
    phi2: dict
    phi3: dict
    weights: tuple[float, float, float]


def _mes_space(n: int) -> BipartiteSpace:
    model = fibonacci_model()
    tau = model.charge("tau")
    return build_space(model, [tau] * n, [tau] * n)


def _sector_vectors(space: BipartiteSpace, n: int):
    """Unit vectors phi1, phi2 (total charge 1) and phi3 (total charge tau)."""
    model = space.model
    one, tau = model.charge("1"), model.charge("tau")
    vecs = {}
    for name, c, local in (("phi1", one, one), ("phi2", one, tau), ("phi3", tau, tau)):
        sector = space.sector(c)
        seg = sector.segment(local, local, 1)
        v = np.zeros(sector.dim, dtype=complex)
        if seg is not None:
            count = seg.dim_a
            for i in range(count):
                v[seg.offset + i * seg.dim_b + i] = 1.0 / math.sqrt(count)
        vecs[name] = {c: v}
    return vecs


def mes_decomposition(n: int) -> MesDecomposition:
    space = _mes_space(n)
    d = space.model.d(space.model.charge("tau"))
    vecs = _sector_vectors(space, n)
    w1 = fib(n - 1) / d**n
    w2 = fib(n) / d ** (n + 1)
    return MesDecomposition(space, vecs["phi1"], vecs["phi2"], vecs["phi3"], (w1, w2, w2))


def build_mes(n: int) -> AnyonicDensityMatrix:
    """Maximally entangled state of n + n Fibonacci anyons (pure, total charge 1).

    Matched local fusion paths are paired diagonally: vacuum-fused pairs carry
    amplitude d^-n/2 and tau-fused pairs carry d^(1-n)/2, which normalizes the
    quantum trace to one.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in 1..{MAX_N}")
    space = _mes_space(n)
    model = space.model
    one, tau = model.charge("1"), model.charge("tau")
    d = model.d(tau)
    sector = space.sector(one)
    v = np.zeros(sector.dim, dtype=complex)
    seg = sector.segment(one, one, 1)
    if seg is not None:
        for i in range(seg.dim_a):
            v[seg.offset + i * seg.dim_b + i] = 1.0 / d ** (n / 2)
    seg = sector.segment(tau, tau, 1)
    for i in range(seg.dim_a):
        v[seg.offset + i * seg.dim_b + i] = math.sqrt(d) / d ** (n / 2)
    blocks = zero_blocks(space)
    blocks[one] = np.outer(v, v.conj())
    return AnyonicDensityMatrix(space, blocks, origin=IsotropicParams.make(n, 1.0))


def build_isotropic(n: int, alpha: float) -> AnyonicDensityMatrix:
    """Mixture alpha * MES + (1 - alpha) * maximally mixed on 2n Fibonacci anyons.

    Admissibility is decided by a numerical positivity check of the result;
    inadmissible alpha raises NotPositive.
    """
    params = IsotropicParams.make(n, alpha)
    mes = build_mes(n)
    state = mix([mes, maximally_mixed(mes.space)], [alpha, 1.0 - alpha])
    mineig = min(
        float(np.linalg.eigvalsh(m).min()) for m in state.blocks.values() if m.size
    )
    if mineig < -PSD_ADMISSIBLE_TOL:
        raise NotPositive(f"alpha={alpha} gives minimum eigenvalue {mineig:.3e}")
    return AnyonicDensityMatrix(state.space, state.blocks, origin=params)


def check_admissible(p: IsotropicParams) -> None:
    """Numerical positivity check of the isotropic matrix without building it.

    The family has exactly two distinct eigenvalue branches: the coupled
    two-by-two corner spanned by the matched-pair directions and the flat
    remainder (1 - alpha) / d^(2n).
    """
    d, n, a = p.d, p.n, p.alpha
    z = (1.0 - a) / d ** (2 * n)
    corner = np.array(
        [
            [a * p.fib_prev / d**n + z, a * math.sqrt(d * p.fib_prev * p.fib) / d**n],
            [a * math.sqrt(d * p.fib_prev * p.fib) / d**n, a * p.fib / d ** (n - 1) + z],
        ]
    )
    mineig = min(float(np.linalg.eigvalsh(corner).min()), z)
    if mineig < -PSD_ADMISSIBLE_TOL:
        raise NotPositive(f"alpha={a} gives minimum eigenvalue {mineig:.3e}")


def e_ace_closed(p: IsotropicParams) -> float:
    """Closed-form charge entanglement of the isotropic family."""
    d, n, a = p.d, p.n, p.alpha
    z = (1.0 - a) / d ** (2 * n)
    value = (
        _xlogx(a + z)
        + (1.0 + d) * _xlogx(z)
        - _xlogx(a * p.fib_prev / d**n + z)
    )
    arg = a * p.fib / d ** (n + 1) + z
    coeff = a * p.fib / d ** (n - 1) + (1.0 + d) * z
    if coeff > 0.0:
        value -= coeff * math.log(arg)
    return max(value, 0.0)


def rains_bound(dim: int, fidelity: float) -> float:
    """Relative entropy of entanglement of an isotropic state with the given
    maximally-entangled-state fidelity on dim x dim; zero at or below 1/dim."""
    if dim < 2 or fidelity <= 1.0 / dim:
        return 0.0
    y, x = fidelity, float(dim)
    value = _xlogx(y) + _xlogx(1.0 - y) + math.log(x)
    if y < 1.0:
        value -= (1.0 - y) * math.log(x - 1.0)
    return value


def _ce_blocks(p: IsotropicParams):
    """(block dimension, mixed weight of the entangled direction, d-weight) triples."""
    d, n = p.d, p.n
    return (
        (p.fib_prev, p.alpha * p.fib_prev / d**n, 1.0),
        (p.fib, p.alpha * p.fib / d ** (n + 1), 1.0),
        (p.fib, p.alpha * p.fib / d ** (n + 1), d),
    )


def e_ce_closed(p: IsotropicParams) -> float:
    """Closed-form conventional entanglement of the isotropic family.

    The decohered state splits into blocks that are isotropic states in their
    own right; each contributes its quantum-trace weight times the Rains bound
    at its block fidelity.  Blocks proportional to the identity and blocks of
    dimension one contribute nothing.
    """
    z = (1.0 - p.alpha) / p.d ** (2 * p.n)
    total = 0.0
    for m, w, dwt in _ce_blocks(p):
        if m < 2:
            continue
        trace = w + m * m * z
        if trace <= 0.0:
            continue
        total += dwt * trace * rains_bound(m, (w + z) / trace)
    return total


def e_ce_onset(n: int) -> float:
    """Smallest alpha at which any block of the decohered isotropic state
    becomes entangled (block fidelity crossing 1/dim)."""
    d = fibonacci_model().d(fibonacci_model().charge("tau"))
    p = IsotropicParams.make(n, 1.0)
    thresholds = []
    for m, w, _ in _ce_blocks(p):
        if m < 2:
            continue
        q = w  # linear coefficient of alpha in the entangled-direction weight
        thresholds.append(m / (q * d ** (2 * n) + m))
    if not thresholds:
        return 1.0
    return min(thresholds)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    e_ace: float
    e_ce: float
    e_total: float
    method: str
    gap: float | None = None


CSV_HEADER = "alpha,E_ACE,E_CE,E_total,method,gap"


def sweep(n: int, alphas, method: str = "closed", config=None) -> list[SweepRow]:
    """Evaluate the three measures over an alpha grid.

    closed:  both closed forms (exact; decomposition holds by construction).
    generic: eigendecomposition pipeline for the charge part, closed form for
             the conventional part.
    fw:      eigendecomposition charge part and Frank-Wolfe conventional part
             with its duality gap.
    """
    if method not in ("closed", "generic", "fw"):
        raise ValueError(f"unknown sweep method {method!r}")

    def row(alpha: float) -> SweepRow:
        params = IsotropicParams.make(n, alpha)
        check_admissible(params)
        if method == "closed":
            ace, ce, gap = e_ace_closed(params), e_ce_closed(params), None
        else:
            state = build_isotropic(n, alpha)
            ace = measures.e_ace(state).value
            if method == "generic":
                ce, gap = e_ce_closed(params), None
            else:
                res = measures.e_ce(state, method="frank_wolfe", config=config)
                ce, gap = res.value, res.gap
        return SweepRow(float(alpha), ace, ce, ace + ce, method, gap)

    return parallel_map(row, list(alphas))


def render_sweep_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        gap = "" if r.gap is None else f"{r.gap:.12g}"
        lines.append(
            f"{r.alpha:.12g},{r.e_ace:.12g},{r.e_ce:.12g},{r.e_total:.12g},{r.method},{gap}"
        )
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows: list[SweepRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_sweep_csv(rows))
