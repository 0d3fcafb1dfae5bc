"""Anyon models: charges, fusion multiplicities, quantum dimensions, fusion paths.

A model is a finite charge set containing the vacuum ``1``, a commutative and
associative fusion table of multiplicities N[a,b,c], and positive quantum
dimensions d_a solving d_a * d_b = sum_c N[a,b,c] * d_c.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

QDIM_RESIDUAL_TOL = 1e-10
_POWER_ITER_TOL = 1e-12
_POWER_ITER_CAP = 100_000


class ModelError(Exception):
    """Base class for anyon-model failures."""


class MissingVacuum(ModelError):
    pass


class DuplicateCharge(ModelError):
    pass


class AssociativityViolation(ModelError):
    pass


class UnknownCharge(ModelError):
    pass


class NoConvergence(ModelError):
    pass


class ModelSyntaxError(ModelError):
    """Malformed or incomplete model-spec text; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


VACUUM_NAME = "1"


@dataclass(frozen=True, order=True)
class Charge:
    id: int
    name: str

    def __repr__(self):
        return f"Charge({self.id}, {self.name!r})"


@dataclass(frozen=True)
class FusionTable:
    """Fusion multiplicities N[a,b,c], indexed by charge ids."""

    charges: tuple[Charge, ...]
    n: tuple[tuple[tuple[int, ...], ...], ...]

    @cached_property
    def tensor(self) -> np.ndarray:
        return np.asarray(self.n, dtype=np.int64)

    def mult(self, a: Charge, b: Charge, c: Charge) -> int:
        return self.n[a.id][b.id][c.id]

    def outcomes(self, a: Charge, b: Charge) -> tuple[tuple[Charge, int], ...]:
        """Fusion products of a x b as (charge, multiplicity) pairs, id order."""
        row = self.n[a.id][b.id]
        return tuple((c, row[c.id]) for c in self.charges if row[c.id] > 0)

    def validate(self, vacuum: Charge) -> None:
        t = self.tensor
        k = len(self.charges)
        eye = np.eye(k, dtype=np.int64)
        if not (np.array_equal(t[vacuum.id], eye) and np.array_equal(t[:, vacuum.id], eye)):
            raise AssociativityViolation("vacuum fusion is not trivial")
        if not np.array_equal(t, t.transpose(1, 0, 2)):
            raise AssociativityViolation("fusion table is not commutative")
        # sum_e N[a,b,e] N[e,c,d] == sum_f N[b,c,f] N[a,f,d] for all a,b,c,d
        left = np.einsum("abe,ecd->abcd", t, t)
        right = np.einsum("bcf,afd->abcd", t, t)
        if not np.array_equal(left, right):
            bad = np.argwhere(left != right)[0]
            names = tuple(self.charges[i].name for i in bad)
            raise AssociativityViolation(f"associativity fails at (a,b,c,d)={names}")


def solve_qdims(fusion: FusionTable) -> dict[Charge, float]:
    """Positive quantum dimensions of a validated fusion table.

    Power iteration on the summed fusion matrix M[b,c] = sum_a N[a,b,c], which
    is strictly positive for any fusion ring with duals, so the iteration
    converges to the unique positive eigenvector; normalizing at the vacuum
    entry yields d.  Every identity d_a d_b = sum_c N d_c is then checked to
    QDIM_RESIDUAL_TOL.
    """
    t = fusion.tensor
    vac = next(c for c in fusion.charges if c.name == VACUUM_NAME)
    m = t.sum(axis=0).astype(float)
    v = np.ones(len(fusion.charges))
    for _ in range(_POWER_ITER_CAP):
        w = m @ v
        if w[vac.id] <= 0:
            raise NoConvergence("summed fusion matrix lost positivity")
        w = w / w[vac.id]
        delta = np.max(np.abs(w - v))
        v = w
        if delta <= _POWER_ITER_TOL * 1e-2:
            break
    else:
        raise NoConvergence(f"quantum dimensions did not converge in {_POWER_ITER_CAP} iterations")
    residual = np.max(np.abs(np.outer(v, v) - np.einsum("abc,c->ab", t, v)))
    if residual > QDIM_RESIDUAL_TOL:
        raise NoConvergence(f"quantum-dimension identities violated (residual {residual:.3e})")
    if np.min(v) < 1.0 - 1e-9:
        raise NoConvergence("quantum dimensions below 1")
    return {c: float(v[c.id]) for c in fusion.charges}


@dataclass(frozen=True, eq=False)
class AnyonModel:
    name: str
    charges: tuple[Charge, ...]
    fusion: FusionTable
    qdim: tuple[float, ...]
    duals: tuple[int, ...] | None = None

    @property
    def vacuum(self) -> Charge:
        return self.charges[self._vacuum_id]

    @cached_property
    def _vacuum_id(self) -> int:
        return next(c.id for c in self.charges if c.name == VACUUM_NAME)

    def charge(self, name: str) -> Charge:
        for c in self.charges:
            if c.name == name:
                return c
        raise UnknownCharge(f"model {self.name!r} has no charge {name!r}")

    def d(self, c: Charge) -> float:
        return self.qdim[c.id]

    def mult(self, a: Charge, b: Charge, c: Charge) -> int:
        return self.fusion.mult(a, b, c)

    def outcomes(self, a: Charge, b: Charge) -> tuple[tuple[Charge, int], ...]:
        return self.fusion.outcomes(a, b)

    def equivalent(self, other: "AnyonModel") -> bool:
        """Structural equality (names, fusion table, dimensions)."""
        return (
            self.name == other.name
            and tuple(c.name for c in self.charges) == tuple(c.name for c in other.charges)
            and np.array_equal(self.fusion.tensor, other.fusion.tensor)
            and np.allclose(self.qdim, other.qdim, atol=1e-12)
            and self.duals == other.duals
        )

    @staticmethod
    def build(
        name: str,
        charge_names: list[str],
        rules: dict[tuple[str, str], dict[str, int]],
        duals: dict[str, str] | None = None,
    ) -> "AnyonModel":
        """Assemble and validate a model from charge names and non-vacuum fusion rules.

        ``rules`` maps an unordered non-vacuum pair to its outcome multiplicities;
        vacuum fusions are implied. Every non-vacuum pair must be covered.
        """
        if len(set(charge_names)) != len(charge_names):
            dup = next(c for c in charge_names if charge_names.count(c) > 1)
            raise DuplicateCharge(f"charge {dup!r} declared twice")
        if VACUUM_NAME not in charge_names:
            raise MissingVacuum(f"no charge named {VACUUM_NAME!r}")
        charges = tuple(Charge(i, nm) for i, nm in enumerate(charge_names))
        by_name = {c.name: c for c in charges}
        k = len(charges)
        tensor = np.zeros((k, k, k), dtype=np.int64)
        vac = by_name[VACUUM_NAME]
        for c in charges:
            tensor[vac.id, c.id, c.id] = 1
            tensor[c.id, vac.id, c.id] = 1
        seen: set[frozenset[str]] = set()
        for (an, bn), outs in rules.items():
            for nm in (an, bn, *outs):
                if nm not in by_name:
                    raise UnknownCharge(f"fusion rule references unknown charge {nm!r}")
            a, b = by_name[an], by_name[bn]
            if vac in (a, b):
                expected = b if a is vac else a
                if outs != {expected.name: 1}:
                    raise ModelSyntaxError(f"vacuum fusion with {expected.name!r} must be trivial")
                continue
            key = frozenset((an, bn))
            if key in seen:
                raise ModelSyntaxError(f"fusion rule for {an} x {bn} declared twice")
            seen.add(key)
            for cn, m in outs.items():
                if m < 1:
                    raise ModelSyntaxError(f"multiplicity for {an} x {bn} -> {cn} must be positive")
                tensor[a.id, b.id, by_name[cn].id] = m
                tensor[b.id, a.id, by_name[cn].id] = m
        for a in charges:
            for b in charges:
                if vac in (a, b):
                    continue
                if frozenset((a.name, b.name)) not in seen:
                    raise ModelSyntaxError(f"no fusion rule for non-vacuum pair {a.name} x {b.name}")
        table = FusionTable(charges, _freeze(tensor))
        table.validate(vac)
        qd = solve_qdims(table)
        dual_ids: tuple[int, ...] | None = None
        if duals:
            pairs = dict(duals)
            for an, bn in list(pairs.items()):
                pairs.setdefault(bn, an)
            full = [pairs.get(c.name, c.name) for c in charges]
            for c in charges:
                partner = by_name.get(full[c.id])
                if partner is None:
                    raise UnknownCharge(f"dual declaration references unknown charge {full[c.id]!r}")
                if full[partner.id] != c.name:
                    raise ModelSyntaxError(f"dual map is not an involution at {c.name!r}")
                if tensor[c.id, partner.id, vac.id] < 1:
                    raise ModelSyntaxError(
                        f"{c.name} cannot fuse with declared dual {partner.name} to the vacuum"
                    )
            dual_ids = tuple(by_name[nm].id for nm in full)
        return AnyonModel(name, charges, table, tuple(qd[c] for c in charges), dual_ids)


def _freeze(tensor: np.ndarray) -> tuple:
    return tuple(tuple(tuple(int(x) for x in row) for row in plane) for plane in tensor)


@dataclass(frozen=True)
class FusionPath:
    """Left-to-right fusion of an ordered anyon list to a total charge.

    intermediates[k] is the charge after absorbing leaves[k]; the first entry
    equals leaves[0] and the last the total charge.  vertex_mults[k-1] indexes
    the fusion channel used at step k (1-based).
    """

    leaves: tuple[Charge, ...]
    intermediates: tuple[Charge, ...]
    vertex_mults: tuple[int, ...]

    @property
    def total(self) -> Charge:
        return self.intermediates[-1]


def enumerate_paths(model: AnyonModel, leaves: list[Charge], total: Charge) -> tuple[FusionPath, ...]:
    """All fusion paths of ``leaves`` to ``total``, lexicographic in (intermediates, mults)."""
    for c in (*leaves, total):
        if c.id >= len(model.charges) or model.charges[c.id] != c:
            raise UnknownCharge(f"charge {c.name!r} does not belong to model {model.name!r}")
    if not leaves:
        raise ValueError("leaves must be non-empty")
    leaves = tuple(leaves)
    partial: list[tuple[tuple[Charge, ...], tuple[int, ...]]] = [((leaves[0],), ())]
    for leaf in leaves[1:]:
        grown = []
        for inter, mults in partial:
            for c, m in model.outcomes(inter[-1], leaf):
                for mu in range(1, m + 1):
                    grown.append((inter + (c,), mults + (mu,)))
        partial = grown
    paths = [FusionPath(leaves, inter, mults) for inter, mults in partial if inter[-1] == total]
    paths.sort(key=lambda p: (tuple(c.id for c in p.intermediates), p.vertex_mults))
    return tuple(paths)


def count_paths(model: AnyonModel, leaves: list[Charge], total: Charge) -> int:
    """Path count by fusion-tensor contraction (no enumeration)."""
    t = model.fusion.tensor
    vec = np.zeros(len(model.charges), dtype=np.int64)
    vec[leaves[0].id] = 1
    for leaf in leaves[1:]:
        vec = np.einsum("e,ec->c", vec, t[:, leaf.id, :])
    return int(vec[total.id])


# --- model-spec text format -------------------------------------------------
#
#   model <name>
#   charges <name1> <name2> ...          (must include "1")
#   fuse <a> <b> -> <c>:<mult> [...]     (vacuum fusions implied)
#   dual <a>=<b>                         (optional)
#
# '#' starts a comment; blank lines ignored.


def parse_model(text: str) -> AnyonModel:
    """Parse model-spec text into a validated AnyonModel."""
    name = None
    charge_names: list[str] | None = None
    rules: dict[tuple[str, str], dict[str, int]] = {}
    duals: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kw = fields[0]
        if kw == "model":
            if len(fields) != 2:
                raise ModelSyntaxError("expected: model <name>", lineno)
            if name is not None:
                raise ModelSyntaxError("duplicate model line", lineno)
            name = fields[1]
        elif kw == "charges":
            if name is None:
                raise ModelSyntaxError("charges before model line", lineno)
            if charge_names is not None:
                raise ModelSyntaxError("duplicate charges line", lineno)
            if len(fields) < 2:
                raise ModelSyntaxError("expected: charges <name> ...", lineno)
            charge_names = fields[1:]
            if len(set(charge_names)) != len(charge_names):
                dup = next(c for c in charge_names if charge_names.count(c) > 1)
                raise DuplicateCharge(f"line {lineno}: charge {dup!r} declared twice")
        elif kw == "fuse":
            if charge_names is None:
                raise ModelSyntaxError("fuse before charges line", lineno)
            try:
                arrow = fields.index("->")
            except ValueError:
                raise ModelSyntaxError("expected: fuse <a> <b> -> <c>:<mult> ...", lineno) from None
            if arrow != 3 or len(fields) < 5:
                raise ModelSyntaxError("expected: fuse <a> <b> -> <c>:<mult> ...", lineno)
            a, b = fields[1], fields[2]
            outs: dict[str, int] = {}
            for tok in fields[4:]:
                cn, sep, ms = tok.partition(":")
                if not sep or not ms.isdigit() or int(ms) < 1:
                    raise ModelSyntaxError(f"bad outcome token {tok!r}", lineno)
                if cn in outs:
                    raise ModelSyntaxError(f"outcome {cn!r} repeated", lineno)
                outs[cn] = int(ms)
            key = (a, b) if (a, b) in rules else (b, a)
            if key in rules:
                if rules[key] != outs:
                    raise ModelSyntaxError(f"conflicting rules for {a} x {b}", lineno)
            else:
                rules[(a, b)] = outs
        elif kw == "dual":
            if charge_names is None:
                raise ModelSyntaxError("dual before charges line", lineno)
            pair = line[len("dual") :].strip()
            a, sep, b = pair.partition("=")
            if not sep or not a.strip() or not b.strip():
                raise ModelSyntaxError("expected: dual <a>=<b>", lineno)
            duals[a.strip()] = b.strip()
        else:
            raise ModelSyntaxError(f"unknown directive {kw!r}", lineno)
    if name is None:
        raise ModelSyntaxError("missing model line")
    if charge_names is None:
        raise ModelSyntaxError("missing charges line")
    if VACUUM_NAME not in charge_names:
        raise MissingVacuum(f"no charge named {VACUUM_NAME!r}")
    return AnyonModel.build(name, charge_names, rules, duals or None)


def render_model(model: AnyonModel) -> str:
    """Canonical model-spec text; parse_model(render_model(m)) round-trips."""
    lines = [f"model {model.name}", "charges " + " ".join(c.name for c in model.charges)]
    for i, a in enumerate(model.charges):
        for b in model.charges[i:]:
            if model.vacuum in (a, b):
                continue
            outs = model.outcomes(a, b)
            toks = " ".join(f"{c.name}:{m}" for c, m in outs)
            lines.append(f"fuse {a.name} {b.name} -> {toks}")
    if model.duals is not None:
        for c in model.charges:
            partner = model.charges[model.duals[c.id]]
            if partner.id >= c.id:
                lines.append(f"dual {c.name}={partner.name}")
    return "\n".join(lines) + "\n"


def load_model(path: str) -> AnyonModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


BUILTIN_MODELS = {
    "fibonacci": "model fibonacci\ncharges 1 tau\nfuse tau tau -> 1:1 tau:1\n",
    "ising": (
        "model ising\ncharges 1 sigma psi\n"
        "fuse sigma sigma -> 1:1 psi:1\nfuse sigma psi -> sigma:1\nfuse psi psi -> 1:1\n"
    ),
}


def builtin_model(name: str) -> AnyonModel:
    if name not in BUILTIN_MODELS:
        raise UnknownCharge(f"no builtin model {name!r}; have {sorted(BUILTIN_MODELS)}")
    return parse_model(BUILTIN_MODELS[name])
