"""Bipartite anyonic density matrices in the charge-sector basis.

A bipartite state lives on a direct sum of total-charge sectors.  A sector c
decomposes into segments labelled (a, b, mu): party A fused to charge a, party
B to charge b, joined into c through fusion channel mu.  Each segment is
spanned by pairs (i, j) of local fusion paths, row-major.  Superselection is
structural: no matrix ever spans two total charges.

Normalization uses the quantum trace sum_c d_c * tr(rho_c) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import AnyonModel, Charge, FusionPath, enumerate_paths

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
QTRACE_TOL = 1e-10


class StateError(Exception):
    pass


class LayoutMismatch(StateError):
    pass


@dataclass(frozen=True)
class PartyLayout:
    """Anyons held by one party, with the fusion-path basis of every reachable charge.

    ancilla_dim > 1 tensors every charge sector with an internal vacuum-charge
    factor of that dimension (used by vacuum-ancilla adjunction).
    """

    model: AnyonModel
    anyons: tuple[Charge, ...]
    sectors: tuple[tuple[Charge, tuple[FusionPath, ...]], ...]
    ancilla_dim: int = 1

    @staticmethod
    def build(model: AnyonModel, anyons: list[Charge], ancilla_dim: int = 1) -> "PartyLayout":
        sectors = []
        for c in model.charges:
            paths = enumerate_paths(model, list(anyons), c)
            if paths:
                sectors.append((c, paths))
        return PartyLayout(model, tuple(anyons), tuple(sectors), ancilla_dim)

    @cached_property
    def basis(self) -> dict[Charge, tuple[FusionPath, ...]]:
        return dict(self.sectors)

    def charges(self) -> tuple[Charge, ...]:
        return tuple(c for c, _ in self.sectors)

    def npaths(self, c: Charge) -> int:
        return len(self.basis.get(c, ()))

    def dim(self, c: Charge) -> int:
        return self.npaths(c) * self.ancilla_dim

    def signature(self) -> tuple:
        return (self.model.name, tuple(c.name for c in self.anyons), self.ancilla_dim)


@dataclass(frozen=True)
class SectorKey:
    """Block label: party totals a and b, global total c, fusion channel mu (1-based)."""

    a: Charge
    b: Charge
    c: Charge
    mu: int


@dataclass(frozen=True)
class Segment:
    a: Charge
    b: Charge
    mu: int
    offset: int
    dim_a: int
    dim_b: int

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def sl(self) -> slice:
        return slice(self.offset, self.offset + self.dim)


@dataclass(frozen=True)
class Sector:
    charge: Charge
    segments: tuple[Segment, ...]
    dim: int

    @cached_property
    def _index(self) -> dict[tuple[Charge, Charge, int], Segment]:
        return {(s.a, s.b, s.mu): s for s in self.segments}

    def segment(self, a: Charge, b: Charge, mu: int) -> Segment | None:
        return self._index.get((a, b, mu))


@dataclass(frozen=True)
class BipartiteSpace:
    model: AnyonModel
    layout_a: PartyLayout
    layout_b: PartyLayout
    sectors: tuple[Sector, ...]

    @staticmethod
    def build(model: AnyonModel, layout_a: PartyLayout, layout_b: PartyLayout) -> "BipartiteSpace":
        sectors = []
        for c in model.charges:
            segs, offset = [], 0
            for a in layout_a.charges():
                for b in layout_b.charges():
                    for mu in range(1, model.mult(a, b, c) + 1):
                        seg = Segment(a, b, mu, offset, layout_a.dim(a), layout_b.dim(b))
                        segs.append(seg)
                        offset += seg.dim
            if segs:
                sectors.append(Sector(c, tuple(segs), offset))
        return BipartiteSpace(model, layout_a, layout_b, tuple(sectors))

    def sector(self, c: Charge) -> Sector:
        for s in self.sectors:
            if s.charge == c:
                return s
        raise KeyError(c)

    def keys(self) -> tuple[SectorKey, ...]:
        """Every block label (a, b, c, mu) of the space, in canonical order."""
        return tuple(
            SectorKey(seg.a, seg.b, s.charge, seg.mu) for s in self.sectors for seg in s.segments
        )

    def layout(self, party: str) -> PartyLayout:
        if party not in ("A", "B"):
            raise ValueError("party must be 'A' or 'B'")
        return self.layout_a if party == "A" else self.layout_b

    def signature(self) -> tuple:
        return (self.layout_a.signature(), self.layout_b.signature())

    def compatible(self, other: "BipartiteSpace") -> bool:
        return self.signature() == other.signature()

    def total_qdim(self) -> float:
        return sum(self.model.d(s.charge) * s.dim for s in self.sectors)


def build_space(model: AnyonModel, anyons_a: list[Charge], anyons_b: list[Charge]) -> BipartiteSpace:
    return BipartiteSpace.build(
        model, PartyLayout.build(model, anyons_a), PartyLayout.build(model, anyons_b)
    )


@dataclass(frozen=True, eq=False)
class AnyonicDensityMatrix:
    """Bipartite anyonic density matrix: one Hermitian block per total charge."""

    space: BipartiteSpace
    blocks: dict[Charge, np.ndarray]
    origin: object = None  # closed-form tag (e.g. isotropic parameters), if any

    def block(self, c: Charge) -> np.ndarray:
        return self.blocks[c]

    def seg(self, c: Charge, a: Charge, b: Charge, mu: int) -> np.ndarray:
        """Diagonal sub-block of sector c at segment (a, b, mu)."""
        s = self.space.sector(c).segment(a, b, mu)
        if s is None:
            raise KeyError((c, a, b, mu))
        return self.blocks[c][s.sl, s.sl]

    def sector_block(self, key: SectorKey) -> np.ndarray:
        """Diagonal sub-block addressed by a full block label."""
        return self.seg(key.c, key.a, key.b, key.mu)

    def qtrace(self) -> float:
        return quantum_trace(self)

    def map_blocks(self, fn) -> "AnyonicDensityMatrix":
        return AnyonicDensityMatrix(self.space, {c: fn(c, m) for c, m in self.blocks.items()})


@dataclass(frozen=True, eq=False)
class SingleSystemDensityMatrix:
    """Single-party anyonic density matrix: one Hermitian block per local charge."""

    layout: PartyLayout
    blocks: dict[Charge, np.ndarray]

    @property
    def model(self) -> AnyonModel:
        return self.layout.model

    def qtrace(self) -> float:
        return quantum_trace(self)


def zero_blocks(space: BipartiteSpace) -> dict[Charge, np.ndarray]:
    return {s.charge: np.zeros((s.dim, s.dim), dtype=complex) for s in space.sectors}


def quantum_trace(rho) -> float:
    """Quantum trace: sum over charge blocks of d_c times the ordinary trace."""
    if isinstance(rho, AnyonicDensityMatrix):
        model = rho.space.model
    else:
        model = rho.model
    return float(sum(model.d(c) * np.trace(m).real for c, m in rho.blocks.items()))


def partial_quantum_trace(rho: AnyonicDensityMatrix, keep: str) -> SingleSystemDensityMatrix:
    """Trace out one party.

    Tracing out B sends a segment (a, b, mu) of sector c to d_c/d_a times its
    ordinary partial trace over the B path index; cross-segment elements drop.
    The result has quantum trace equal to the input's.
    """
    space = rho.space
    model = space.model
    layout = space.layout(keep)
    out = {c: np.zeros((layout.dim(c), layout.dim(c)), dtype=complex) for c in layout.charges()}
    for sector in space.sectors:
        dc = model.d(sector.charge)
        for s in sector.segments:
            blk = rho.blocks[sector.charge][s.sl, s.sl].reshape(s.dim_a, s.dim_b, s.dim_a, s.dim_b)
            if keep == "A":
                out[s.a] += (dc / model.d(s.a)) * np.einsum("ijkj->ik", blk)
            else:
                out[s.b] += (dc / model.d(s.b)) * np.einsum("ijil->jl", blk)
    return SingleSystemDensityMatrix(layout, out)


@dataclass(frozen=True)
class StateDiagnostics:
    hermiticity_residual: float
    min_eigenvalue: float
    qtrace_deviation: float
    superselection_violation: float  # structurally zero; reported for completeness

    def ok(
        self,
        hermiticity_tol: float = HERMITICITY_TOL,
        psd_tol: float = PSD_TOL,
        qtrace_tol: float = QTRACE_TOL,
    ) -> bool:
        return (
            self.hermiticity_residual <= hermiticity_tol
            and self.min_eigenvalue >= -psd_tol
            and self.qtrace_deviation <= qtrace_tol
            and self.superselection_violation == 0.0
        )


def validate(rho) -> StateDiagnostics:
    """Pure diagnostic report; never raises."""
    herm = 0.0
    mineig = np.inf
    for m in rho.blocks.values():
        if m.size == 0:
            continue
        herm = max(herm, float(np.max(np.abs(m - m.conj().T))))
        mineig = min(mineig, float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min()))
    qdev = abs(quantum_trace(rho) - 1.0)
    return StateDiagnostics(herm, float(mineig), qdev, 0.0)


def random_state(space: BipartiteSpace, seed: int) -> AnyonicDensityMatrix:
    """Full-support random state: per-sector G G^dagger, quantum-trace normalized."""
    rng = np.random.default_rng(seed)
    blocks = {}
    for s in space.sectors:
        g = rng.standard_normal((s.dim, s.dim)) + 1j * rng.standard_normal((s.dim, s.dim))
        blocks[s.charge] = g @ g.conj().T
    total = sum(space.model.d(c) * np.trace(m).real for c, m in blocks.items())
    return AnyonicDensityMatrix(space, {c: m / total for c, m in blocks.items()})


def random_single_state(layout: PartyLayout, seed: int) -> SingleSystemDensityMatrix:
    rng = np.random.default_rng(seed)
    blocks = {}
    for c in layout.charges():
        n = layout.dim(c)
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks[c] = g @ g.conj().T
    total = sum(layout.model.d(c) * np.trace(m).real for c, m in blocks.items())
    return SingleSystemDensityMatrix(layout, {c: m / total for c, m in blocks.items()})


def product_state(
    rho_a: SingleSystemDensityMatrix, rho_b: SingleSystemDensityMatrix
) -> AnyonicDensityMatrix:
    """Anyonic tensor product of two single-party states.

    Every segment (a, b, mu) of every compatible sector receives the same
    matrix rho_a[a] (x) rho_b[b]; this replication across (c, mu) is exactly
    what makes the result invariant under the charge-decoherence projector.
    """
    model = rho_a.model
    if rho_b.model is not model and rho_b.model.name != model.name:
        raise LayoutMismatch("product factors come from different models")
    space = BipartiteSpace.build(model, rho_a.layout, rho_b.layout)
    blocks = zero_blocks(space)
    for sector in space.sectors:
        for s in sector.segments:
            blocks[sector.charge][s.sl, s.sl] = np.kron(rho_a.blocks[s.a], rho_b.blocks[s.b])
    return AnyonicDensityMatrix(space, blocks)


def maximally_mixed(space: BipartiteSpace) -> AnyonicDensityMatrix:
    total = space.total_qdim()
    return AnyonicDensityMatrix(
        space, {s.charge: np.eye(s.dim, dtype=complex) / total for s in space.sectors}
    )


def mix(states: list[AnyonicDensityMatrix], weights: list[float]) -> AnyonicDensityMatrix:
    space = states[0].space
    for st in states[1:]:
        if not st.space.compatible(space):
            raise LayoutMismatch("cannot mix states on different layouts")
    blocks = zero_blocks(space)
    for st, w in zip(states, weights):
        for c, m in st.blocks.items():
            blocks[c] += w * m
    return AnyonicDensityMatrix(space, blocks)


# --- state file format -------------------------------------------------------
#
#   state <model-name> A=<charges> B=<charges>     (charge lists comma-separated)
#   sector c=<charge>
#   dim <n>
#   <n> lines of <n> whitespace-separated complex entries re+imj
#
# '#' starts a comment; an index legend is emitted as comments.


def save_state(rho: AnyonicDensityMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_state(rho))


def render_state(rho: AnyonicDensityMatrix) -> str:
    space = rho.space
    names_a = ",".join(c.name for c in space.layout_a.anyons)
    names_b = ",".join(c.name for c in space.layout_b.anyons)
    lines = [f"state {space.model.name} A={names_a} B={names_b}"]
    for sector in space.sectors:
        lines.append(f"sector c={sector.charge.name}")
        lines.append(f"dim {sector.dim}")
        for s in sector.segments:
            lines.append(
                f"# segment a={s.a.name} b={s.b.name} mu={s.mu} "
                f"offset={s.offset} dimA={s.dim_a} dimB={s.dim_b}"
            )
        m = rho.blocks[sector.charge]
        for row in m:
            lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    return "\n".join(lines) + "\n"


def parse_state(text: str, model: AnyonModel) -> AnyonicDensityMatrix:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not lines or not lines[0][1].startswith("state "):
        raise StateError("missing state header")
    header = lines[0][1].split()
    if len(header) != 4 or not header[2].startswith("A=") or not header[3].startswith("B="):
        raise StateError("malformed state header")
    if header[1] != model.name:
        raise StateError(f"state file is for model {header[1]!r}, not {model.name!r}")
    anyons_a = [model.charge(nm) for nm in header[2][2:].split(",") if nm]
    anyons_b = [model.charge(nm) for nm in header[3][2:].split(",") if nm]
    space = build_space(model, anyons_a, anyons_b)
    blocks = zero_blocks(space)
    idx = 1
    seen = set()
    while idx < len(lines):
        lineno, ln = lines[idx]
        if not ln.startswith("sector c="):
            raise StateError(f"line {lineno}: expected sector header")
        cname = ln[len("sector c=") :].strip()
        c = model.charge(cname)
        sector = space.sector(c)
        lineno, ln = lines[idx + 1]
        if not ln.startswith("dim "):
            raise StateError(f"line {lineno}: expected dim line")
        n = int(ln.split()[1])
        if n != sector.dim:
            raise StateError(f"line {lineno}: sector {cname} has dimension {sector.dim}, not {n}")
        rows = []
        for r in range(n):
            lineno, ln = lines[idx + 2 + r]
            entries = ln.split()
            if len(entries) != n:
                raise StateError(f"line {lineno}: expected {n} entries")
            rows.append([complex(tok) for tok in entries])
        blocks[c] = np.array(rows, dtype=complex)
        seen.add(c)
        idx += 2 + n
    for sector in space.sectors:
        if sector.charge not in seen:
            raise StateError(f"missing sector {sector.charge.name}")
    return AnyonicDensityMatrix(space, blocks)


def load_state(path: str, model: AnyonModel) -> AnyonicDensityMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_state(fh.read(), model)
