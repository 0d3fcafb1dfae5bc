"""Superoperators on anyonic states.

Implements the charge-decoherence projector D acting between parties A and B
(the omega-loop action in matrix form), anyonic Kraus channels with the
quantum-dimension-weighted normalization, local-charge measurements, vacuum
ancillas, and the two conversions to conventional density matrices:

* map_F rescales every total-charge block by d_c; it preserves relative
  entropies for arbitrary states.
* map_G is defined on decoherence-fixed states only and contracts the
  replicated (c, mu) structure to one block per local-charge pair (a, b),
  also preserving relative entropies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Charge
from .states import (
    AnyonicDensityMatrix,
    BipartiteSpace,
    PartyLayout,
    zero_blocks,
)

KRAUS_NORM_TOL = 1e-10
FREE_STATE_TOL = 1e-10
MEASUREMENT_PROB_FLOOR = 1e-14


class ChannelError(Exception):
    pass


class ShapeMismatch(ChannelError):
    pass


class NotNormalized(ChannelError):
    pass


class NotFree(ChannelError):
    """map_G input still carries anyonic charge entanglement."""


@dataclass(frozen=True)
class KrausOp:
    """One Kraus piece mapping the total-charge ``source`` sector to ``target``."""

    target: Charge
    source: Charge
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class KrausChannel:
    ops: tuple[KrausOp, ...]


@dataclass(frozen=True, eq=False)
class ConventionalDensityMatrix:
    """Block-diagonal conventional density matrix, ordinary trace one.

    ``factor_dims`` carries the bipartite factorization of each block when the
    matrix came from map_G (keys are (a, b) pairs); map_F images have no
    factorization (keys are total charges).
    """

    blocks: dict
    factor_dims: dict | None = None

    def trace(self) -> float:
        return float(sum(np.trace(m).real for m in self.blocks.values()))


def apply_D(rho: AnyonicDensityMatrix) -> AnyonicDensityMatrix:
    """Erase anyonic charge correlations between the parties.

    For each local-charge pair (a, b), the d_c-weighted average of the
    (c, mu)-diagonal segments, divided by d_a d_b, replaces every compatible
    segment; all other matrix elements vanish.  The map is an idempotent
    quantum-trace-preserving projector, and its fixed points are exactly the
    states with no charge line connecting the parties.
    """
    space = rho.space
    model = space.model
    averages: dict[tuple[Charge, Charge], np.ndarray] = {}
    for sector in space.sectors:
        dc = model.d(sector.charge)
        for s in sector.segments:
            blk = rho.blocks[sector.charge][s.sl, s.sl]
            key = (s.a, s.b)
            acc = averages.get(key)
            averages[key] = dc * blk if acc is None else acc + dc * blk
    for (a, b), acc in averages.items():
        averages[(a, b)] = acc / (model.d(a) * model.d(b))
    blocks = zero_blocks(space)
    for sector in space.sectors:
        for s in sector.segments:
            blocks[sector.charge][s.sl, s.sl] = averages[(s.a, s.b)]
    return AnyonicDensityMatrix(space, blocks)


def free_state_deviation(rho: AnyonicDensityMatrix) -> float:
    d = apply_D(rho)
    return max(
        float(np.max(np.abs(rho.blocks[c] - d.blocks[c]))) if rho.blocks[c].size else 0.0
        for c in rho.blocks
    )


def channel_normalization_residual(space: BipartiteSpace, channel: KrausChannel) -> float:
    """Deviation of sum_{a,i} (d_a/d_b) K^dag K from the identity, per source charge."""
    model = space.model
    residual = 0.0
    for sector in space.sectors:
        b = sector.charge
        acc = np.zeros((sector.dim, sector.dim), dtype=complex)
        for op in channel.ops:
            if op.source != b:
                continue
            if op.matrix.shape[1] != sector.dim:
                raise ShapeMismatch(
                    f"Kraus op {op.target.name}<-{op.source.name} has "
                    f"{op.matrix.shape[1]} columns, sector needs {sector.dim}"
                )
            acc += (model.d(op.target) / model.d(b)) * (op.matrix.conj().T @ op.matrix)
        residual = max(residual, float(np.max(np.abs(acc - np.eye(sector.dim)))))
    return residual


def apply_channel(rho: AnyonicDensityMatrix, channel: KrausChannel) -> AnyonicDensityMatrix:
    """Apply a charge-superselection-respecting CPTP map; preserves quantum trace."""
    space = rho.space
    by_charge = {s.charge: s for s in space.sectors}
    for op in channel.ops:
        if op.source not in by_charge or op.target not in by_charge:
            raise ShapeMismatch("Kraus op references a charge sector absent from the state space")
        if op.matrix.shape != (by_charge[op.target].dim, by_charge[op.source].dim):
            raise ShapeMismatch(
                f"Kraus op {op.target.name}<-{op.source.name} has shape {op.matrix.shape}"
            )
    residual = channel_normalization_residual(space, channel)
    if residual > KRAUS_NORM_TOL:
        raise NotNormalized(f"Kraus normalization residual {residual:.3e}")
    blocks = zero_blocks(space)
    for op in channel.ops:
        blocks[op.target] += op.matrix @ rho.blocks[op.source] @ op.matrix.conj().T
    return AnyonicDensityMatrix(space, blocks)


def identity_channel(space: BipartiteSpace) -> KrausChannel:
    return KrausChannel(
        tuple(KrausOp(s.charge, s.charge, np.eye(s.dim, dtype=complex)) for s in space.sectors)
    )


def _local_ops_to_kraus(space: BipartiteSpace, party: str, locals_: list[dict]) -> KrausChannel:
    """Lift local operators (one matrix per local charge, charge-preserving) to global Kraus ops."""
    ops = []
    for loc in locals_:
        for sector in space.sectors:
            k = np.zeros((sector.dim, sector.dim), dtype=complex)
            for s in sector.segments:
                a = s.a if party == "A" else s.b
                m = loc[a]
                piece = np.kron(m, np.eye(s.dim_b)) if party == "A" else np.kron(np.eye(s.dim_a), m)
                k[s.sl, s.sl] = piece
            ops.append(KrausOp(sector.charge, sector.charge, k))
    return KrausChannel(tuple(ops))


def local_charge_projector_channel(space: BipartiteSpace, party: str) -> KrausChannel:
    """Projective measurement of the party's total charge, outcomes discarded."""
    layout = space.layout(party)
    locals_ = []
    for a in layout.charges():
        proj = {c: np.zeros((layout.dim(c), layout.dim(c)), dtype=complex) for c in layout.charges()}
        proj[a] = np.eye(layout.dim(a), dtype=complex)
        locals_.append(proj)
    return _local_ops_to_kraus(space, party, locals_)


def random_local_channel(
    space: BipartiteSpace, party: str, seed: int, n_kraus: int = 2
) -> KrausChannel:
    """Random charge-preserving local CPTP map on one party."""
    rng = np.random.default_rng(seed)
    layout = space.layout(party)
    raw = {
        a: [
            rng.standard_normal((layout.dim(a), layout.dim(a)))
            + 1j * rng.standard_normal((layout.dim(a), layout.dim(a)))
            for _ in range(n_kraus)
        ]
        for a in layout.charges()
    }
    locals_ = []
    for i in range(n_kraus):
        locals_.append({})
    for a, mats in raw.items():
        gram = sum(m.conj().T @ m for m in mats)
        w, v = np.linalg.eigh(gram)
        inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.conj().T
        for i, m in enumerate(mats):
            locals_[i][a] = m @ inv_sqrt
    return _local_ops_to_kraus(space, party, locals_)


def measure_local_charge(
    rho: AnyonicDensityMatrix, party: str
) -> list[tuple[Charge, float, AnyonicDensityMatrix]]:
    """Measure one party's total charge.

    Returns (outcome, probability, normalized post-state) triples; outcomes
    with probability below MEASUREMENT_PROB_FLOOR are omitted.  Probabilities
    are quantum traces of the projected states and sum to one.
    """
    space = rho.space
    model = space.model
    results = []
    for a in space.layout(party).charges():
        blocks = zero_blocks(space)
        prob = 0.0
        for sector in space.sectors:
            for s in sector.segments:
                local = s.a if party == "A" else s.b
                if local != a:
                    continue
                blk = rho.blocks[sector.charge][s.sl, s.sl]
                blocks[sector.charge][s.sl, s.sl] = blk
                prob += model.d(sector.charge) * float(np.trace(blk).real)
        if prob < MEASUREMENT_PROB_FLOOR:
            continue
        post = AnyonicDensityMatrix(space, {c: m / prob for c, m in blocks.items()})
        results.append((a, prob, post))
    return results


def _with_party_ancilla(space: BipartiteSpace, party: str, factor: int) -> BipartiteSpace:
    la, lb = space.layout_a, space.layout_b
    if party == "A":
        la = PartyLayout.build(space.model, list(la.anyons), la.ancilla_dim * factor)
    else:
        lb = PartyLayout.build(space.model, list(lb.anyons), lb.ancilla_dim * factor)
    return BipartiteSpace.build(space.model, la, lb)


def _ancilla_positions(small: BipartiteSpace, big: BipartiteSpace, party: str, dim: int, x: int):
    """Per sector, the flat positions in the big space that carry ancilla index x.

    Ordered so that position j of the returned array corresponds to flat index
    j of the small sector; cross-segment elements are covered by construction.
    """
    maps = {}
    for sector in small.sectors:
        big_sector = big.sector(sector.charge)
        pos = np.empty(sector.dim, dtype=np.intp)
        for s in sector.segments:
            ns = big_sector.segment(s.a, s.b, s.mu)
            i = np.arange(s.dim_a)[:, None]
            j = np.arange(s.dim_b)[None, :]
            if party == "A":
                flat = (i * dim + x) * ns.dim_b + j
            else:
                flat = i * ns.dim_b + (j * dim + x)
            pos[s.offset : s.offset + s.dim] = (ns.offset + flat).reshape(-1)
        maps[sector.charge] = pos
    return maps


def adjoin_vacuum_ancilla(rho: AnyonicDensityMatrix, party: str, dim: int) -> AnyonicDensityMatrix:
    """Tensor one party with a dim-dimensional vacuum-charge internal factor.

    The ancilla is held in a fixed pure internal state (the first internal
    basis vector), so every entanglement measure is unchanged; the inverse is
    trace_vacuum_ancilla.
    """
    if dim < 1:
        raise ValueError("ancilla dimension must be >= 1")
    if dim == 1:
        return rho
    space = rho.space
    new_space = _with_party_ancilla(space, party, dim)
    positions = _ancilla_positions(space, new_space, party, dim, 0)
    blocks = zero_blocks(new_space)
    for sector in space.sectors:
        pos = positions[sector.charge]
        blocks[sector.charge][np.ix_(pos, pos)] = rho.blocks[sector.charge]
    return AnyonicDensityMatrix(new_space, blocks)


def trace_vacuum_ancilla(rho: AnyonicDensityMatrix, party: str, dim: int) -> AnyonicDensityMatrix:
    """Trace out a dim-dimensional internal vacuum factor adjoined to one party."""
    if dim == 1:
        return rho
    space = rho.space
    layout = space.layout(party)
    if layout.ancilla_dim % dim != 0:
        raise ShapeMismatch("party does not carry an internal factor of that dimension")
    if party == "A":
        la = PartyLayout.build(space.model, list(space.layout_a.anyons), layout.ancilla_dim // dim)
        new_space = BipartiteSpace.build(space.model, la, space.layout_b)
    else:
        lb = PartyLayout.build(space.model, list(space.layout_b.anyons), layout.ancilla_dim // dim)
        new_space = BipartiteSpace.build(space.model, space.layout_a, lb)
    blocks = zero_blocks(new_space)
    for x in range(dim):
        positions = _ancilla_positions(new_space, space, party, dim, x)
        for sector in new_space.sectors:
            pos = positions[sector.charge]
            blocks[sector.charge] += rho.blocks[sector.charge][np.ix_(pos, pos)]
    return AnyonicDensityMatrix(new_space, blocks)


def map_F(rho: AnyonicDensityMatrix) -> ConventionalDensityMatrix:
    """Rescale each total-charge block by d_c; ordinary trace becomes one.

    Relative entropies between images equal the anyonic relative entropies of
    the originals, for arbitrary states.
    """
    model = rho.space.model
    return ConventionalDensityMatrix({c: model.d(c) * m for c, m in rho.blocks.items()})


def map_G(sigma: AnyonicDensityMatrix) -> ConventionalDensityMatrix:
    """Contract a decoherence-fixed state to one conventional block per (a, b).

    The (a, b) block is the d_c-weighted sum over (c, mu) of the replicated
    segments, i.e. d_a d_b times the common segment matrix; ordinary trace is
    one and relative entropies between images of fixed states are preserved.
    Raises NotFree when the input is not fixed by the decoherence projector.
    """
    dev = free_state_deviation(sigma)
    if dev > FREE_STATE_TOL:
        raise NotFree(f"state carries anyonic charge entanglement (deviation {dev:.3e})")
    space = sigma.space
    model = space.model
    blocks: dict = {}
    dims: dict = {}
    for sector in space.sectors:
        dc = model.d(sector.charge)
        for s in sector.segments:
            key = (s.a, s.b)
            blk = dc * sigma.blocks[sector.charge][s.sl, s.sl]
            if key in blocks:
                blocks[key] += blk
            else:
                blocks[key] = blk.copy()
                dims[key] = (s.dim_a, s.dim_b)
    return ConventionalDensityMatrix(blocks, dims)
