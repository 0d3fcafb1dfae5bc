"""Relative entropy of entanglement by Frank-Wolfe over separable states.

The feasible set is the convex hull of charge-definite product pure states.
Because the objective and the extreme points factor over local-charge pairs,
the minimization decomposes blockwise: within each (a, b) block the extreme
points are ordinary product states psi (x) phi, the optimal cross-block
weights equal the input block weights, and the certificates add up.

The linear minimization oracle is the bilinear problem
min_{psi, phi} <psi (x) phi | grad | psi (x) phi>, solved by alternating
minimum-eigenvector iterations from multiple restarts (batched); steps use an
exact line search on the convex segment objective, evaluated as a
golden-section-style bracket refinement over vectorized eigendecompositions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ConventionalDensityMatrix
from .measures import EIG_FLOOR, MeasureResult

_F_FLOOR = 1e-13
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FrankWolfeConfig:
    gap_tol: float = 1e-7
    max_iters: int = 5000
    restarts: int = 16
    inner_tol: float = 1e-10
    inner_iters: int = 40
    line_search_tol: float = 1e-10
    polish_iters: int = 40
    seed: int = 0


DEFAULT_CONFIG = FrankWolfeConfig()


@dataclass(frozen=True)
class BlockwiseResult:
    value: float
    gap: float
    iterations: int
    sigma_blocks: dict  # key -> weighted separable block (traces sum to one)


def _entropy_term(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > EIG_FLOOR]
    return float(np.sum(w * np.log(w)))


def _neg_trlog(rho: np.ndarray, sigma: np.ndarray) -> float:
    """-tr(rho log sigma); +inf when rho has weight outside sigma's support."""
    w, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    good = w > EIG_FLOOR
    if not np.all(good):
        bad = v[:, ~good]
        leak = float(np.einsum("ik,ij,jk->", bad.conj(), rho, bad).real)
        if leak > 1e-12:
            return math.inf
    vg = v[:, good]
    overlaps = np.einsum("ik,ij,jk->k", vg.conj(), rho, vg).real
    return -float(np.sum(overlaps * np.log(w[good])))


def _gradient(rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Gradient of -tr(rho log sigma) at sigma: minus the log Frechet derivative of rho."""
    w, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    w = np.maximum(w, 1e-18)
    lw = np.log(w)
    diff = w[:, None] - w[None, :]
    kernel = np.where(np.abs(diff) > 1e-14, (lw[:, None] - lw[None, :]) / np.where(diff == 0, 1.0, diff), 1.0 / w[:, None])
    r = v.conj().T @ rho @ v
    g = v @ (kernel * r) @ v.conj().T
    return -0.5 * (g + g.conj().T)


def _min_product_vector(
    grad: np.ndarray, m: int, k: int, rng: np.random.Generator, config: FrankWolfeConfig
) -> tuple[np.ndarray, float]:
    """Minimize the quadratic form of grad over product unit vectors psi (x) phi."""
    g4 = grad.reshape(m, k, m, k)
    r = config.restarts
    # one spectral warm start plus random restarts
    _, vecs = np.linalg.eigh(grad)
    u = vecs[:, 0].reshape(m, k)
    uw, _, uvh = np.linalg.svd(u)
    psi = np.empty((r, m), dtype=complex)
    phi = np.empty((r, k), dtype=complex)
    psi[0], phi[0] = uw[:, 0], uvh[0].conj()
    rand = rng.standard_normal((2, r - 1, max(m, k))) + 1j * rng.standard_normal((2, r - 1, max(m, k)))
    psi[1:] = rand[0][:, :m]
    phi[1:] = rand[1][:, :k]
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    vals = np.full(r, np.inf)
    for _ in range(config.inner_iters):
        a = np.einsum("rj,ijkl,rl->rik", phi.conj(), g4, phi)
        a = 0.5 * (a + a.conj().transpose(0, 2, 1))
        psi = np.linalg.eigh(a)[1][:, :, 0]
        b = np.einsum("ri,ijkl,rk->rjl", psi.conj(), g4, psi)
        b = 0.5 * (b + b.conj().transpose(0, 2, 1))
        wb, vb = np.linalg.eigh(b)
        phi = vb[:, :, 0]
        new_vals = wb[:, 0]
        if np.max(np.abs(new_vals - vals)) < config.inner_tol:
            vals = new_vals
            break
        vals = new_vals
    best = int(np.argmin(vals))
    bp, bf, bv = psi[best], phi[best], float(vals[best])
    # refine the winner alone; certificate quality depends on oracle precision
    for _ in range(200):
        a = np.einsum("j,ijkl,l->ik", bf.conj(), g4, bf)
        wp, vp = np.linalg.eigh(0.5 * (a + a.conj().T))
        bp = vp[:, 0]
        b = np.einsum("i,ijkl,k->jl", bp.conj(), g4, bp)
        wb2, vb2 = np.linalg.eigh(0.5 * (b + b.conj().T))
        bf = vb2[:, 0]
        if abs(float(wb2[0]) - bv) < 1e-15:
            bv = float(wb2[0])
            break
        bv = float(wb2[0])
    return np.kron(bp, bf), bv


def _grid_values(rho: np.ndarray, sigma: np.ndarray, direction: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """-tr(rho log(sigma + gamma direction)) on a gamma grid via one stacked eigh."""
    mats = sigma[None, :, :] + gammas[:, None, None] * direction[None, :, :]
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2)))
    w, v = np.linalg.eigh(mats)
    overlaps = np.einsum("gik,ij,gjk->gk", v.conj(), rho, v).real
    dead = w <= EIG_FLOOR
    vals = -np.sum(np.where(dead, 0.0, overlaps) * np.log(np.maximum(w, EIG_FLOOR)), axis=1)
    leaked = np.any(dead & (overlaps > 1e-12), axis=1)
    return np.where(leaked, np.inf, vals)


def _segment_min(rho: np.ndarray, sigma: np.ndarray, direction: np.ndarray, hi: float, tol: float) -> float:
    """Minimize gamma -> -tr(rho log(sigma + gamma direction)) on [0, hi].

    Bracket refinement on vectorized grids; the objective is convex in gamma,
    so shrinking around the grid argmin converges like a batched golden
    section at a fraction of the eigendecomposition calls.
    """
    lo, cur_hi = 0.0, hi
    npts = 17
    for _ in range(24):
        gammas = np.linspace(lo, cur_hi, npts)
        vals = _grid_values(rho, sigma, direction, gammas)
        best = int(np.argmin(vals))
        lo = gammas[max(best - 1, 0)]
        cur_hi = gammas[min(best + 1, npts - 1)]
        if cur_hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + cur_hi)


class _AtomicMixture:
    """Separable iterate kept as an explicit mixture of product atoms."""

    def __init__(self, rho: np.ndarray, atoms: np.ndarray, weights: np.ndarray):
        self.rho = rho
        self.atoms = atoms  # columns are product unit vectors
        self.weights = weights

    def sigma(self) -> np.ndarray:
        s = (self.atoms * self.weights) @ self.atoms.conj().T
        return 0.5 * (s + s.conj().T)

    def pairwise_step(self, grad: np.ndarray, atom_vals: np.ndarray, vec: np.ndarray, ls_tol: float) -> bool:
        """Move weight from the worst active atom onto ``vec``; True on progress."""
        away = int(np.argmax(np.where(self.weights > 0, atom_vals, -np.inf)))
        x_fw = np.outer(vec, vec.conj())
        x_away = np.outer(self.atoms[:, away], self.atoms[:, away].conj())
        hi = float(self.weights[away])
        step = _segment_min(self.rho, self.sigma(), x_fw - x_away, hi, ls_tol)
        if step <= 0.0:
            return False
        overlaps = np.abs(self.atoms.conj().T @ vec) ** 2
        hit = int(np.argmax(overlaps))
        if overlaps[hit] > 1.0 - 1e-12:
            self.weights[hit] += step
        else:
            self.atoms = np.concatenate([self.atoms, vec[:, None]], axis=1)
            self.weights = np.concatenate([self.weights, [step]])
        self.weights[away] -= step
        keep = self.weights > 1e-16
        if not np.all(keep):
            self.atoms, self.weights = self.atoms[:, keep], self.weights[keep]
        self.weights = self.weights / self.weights.sum()
        return True

    def polish(self, max_rounds: int, target_gap: float, ls_tol: float) -> None:
        """Re-optimize the weights over the current atoms (pairwise steps on the
        finite atom polytope, where convergence is linear)."""
        for _ in range(max_rounds):
            grad = _gradient(self.rho, self.sigma())
            atom_vals = np.einsum("in,ij,jn->n", self.atoms.conj(), grad, self.atoms).real
            inner_gap = float(np.sum(self.weights * atom_vals) - np.min(atom_vals))
            if inner_gap <= target_gap:
                return
            best = int(np.argmin(atom_vals))
            if not self.pairwise_step(grad, atom_vals, self.atoms[:, best], ls_tol):
                return


def ree_block(
    rho_hat: np.ndarray, dims: tuple[int, int], config: FrankWolfeConfig, rng: np.random.Generator
) -> tuple[float, float, int, np.ndarray]:
    """REE of one normalized block; returns (value, gap, iterations, sigma).

    Frank-Wolfe over an explicit atomic decomposition.  Each outer iteration
    calls the product-state oracle, takes a pairwise step (weight moves from
    the worst active atom onto the oracle atom), then re-optimizes the weights
    over the active set; plain steps zig-zag without limit at boundary optima,
    while the corrective variant reaches tight duality gaps in few oracle
    calls.  Certificates are the standard oracle gaps.  The start is the
    maximally mixed state, the uniform mixture of computational product atoms.
    """
    m, k = dims
    n = m * k
    if n != rho_hat.shape[0]:
        raise ValueError("factor dimensions do not match the block")
    if m == 1 or k == 1:
        # every state of a one-sided block is a mixture of products
        return 0.0, 0.0, 0, rho_hat.copy()
    t1 = _entropy_term(rho_hat)
    state = _AtomicMixture(rho_hat, np.eye(n, dtype=complex), np.full(n, 1.0 / n))
    sigma = state.sigma()
    f_cur = t1 + _neg_trlog(rho_hat, sigma)
    if f_cur < _F_FLOOR:
        return max(f_cur, 0.0), max(f_cur, 0.0), 0, sigma
    gap_best = math.inf
    iters = 0
    stagnant = 0
    gap_plateau = 0
    for it in range(1, config.max_iters + 1):
        iters = it
        grad = _gradient(rho_hat, sigma)
        vec, _ = _min_product_vector(grad, m, k, rng, config)
        atom_vals = np.einsum("in,ij,jn->n", state.atoms.conj(), grad, state.atoms).real
        fw_val = float((vec.conj() @ grad @ vec).real)
        gap = float(np.sum(state.weights * atom_vals) - fw_val)
        if max(gap, 0.0) < 0.95 * gap_best:
            gap_plateau = 0
        else:
            gap_plateau += 1
        gap_best = min(gap_best, max(gap, 0.0))
        if gap_best <= config.gap_tol or gap_plateau >= 50:
            break
        if not state.pairwise_step(grad, atom_vals, vec, config.line_search_tol):
            break
        state.polish(
            config.polish_iters,
            max(0.25 * config.gap_tol, 0.02 * gap),
            config.line_search_tol,
        )
        sigma = state.sigma()
        f_new = t1 + _neg_trlog(rho_hat, sigma)
        stagnant = stagnant + 1 if f_cur - f_new < 0.01 * config.gap_tol else 0
        f_cur = f_new
        if f_cur < _F_FLOOR:
            gap_best = min(gap_best, max(f_cur, 0.0))
            break
        if stagnant >= 25:
            # objective progress far below the target tolerance; keep the
            # certificate we have (soft stop, gap still reported)
            break
    return max(f_cur, 0.0), gap_best, iters, sigma


def minimize_blockwise(image: ConventionalDensityMatrix, config: FrankWolfeConfig | None = None) -> BlockwiseResult:
    """Minimize relative entropy to separable states of a block-diagonal matrix.

    Block weights of the minimizer equal the input block weights; within each
    block an independent Frank-Wolfe run supplies the value and certificate.
    Deterministic for a fixed config seed.
    """
    if image.factor_dims is None:
        raise ValueError("input carries no bipartite factorization per block")
    config = config or DEFAULT_CONFIG
    rng = np.random.default_rng(config.seed)
    value = gap = 0.0
    iterations = 0
    sigma_blocks: dict = {}
    for key in image.blocks:
        blk = image.blocks[key]
        p = float(np.trace(blk).real)
        if p <= 1e-15:
            sigma_blocks[key] = np.zeros_like(blk)
            continue
        val_b, gap_b, it_b, sig_b = ree_block(blk / p, image.factor_dims[key], config, rng)
        value += p * val_b
        gap += p * gap_b
        iterations += it_b
        sigma_blocks[key] = p * sig_b
    return BlockwiseResult(value, gap, iterations, sigma_blocks)


def ree_frank_wolfe(image: ConventionalDensityMatrix, config: FrankWolfeConfig | None = None) -> MeasureResult:
    """Relative entropy of entanglement with a duality-gap certificate."""
    res = minimize_blockwise(image, config)
    return MeasureResult(max(res.value, 0.0), "frank_wolfe", res.gap, res.iterations)
