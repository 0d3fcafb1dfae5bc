import math

import numpy as np
import pytest

from anyonent.channels import (
    KrausChannel,
    KrausOp,
    NotFree,
    NotNormalized,
    adjoin_vacuum_ancilla,
    apply_channel,
    apply_D,
    channel_normalization_residual,
    free_state_deviation,
    identity_channel,
    local_charge_projector_channel,
    map_F,
    map_G,
    measure_local_charge,
    random_local_channel,
    trace_vacuum_ancilla,
)
from anyonent.fibonacci import build_isotropic, build_mes, fib, mes_decomposition
from anyonent.measures import conv_relative_entropy, e_ace, relative_entropy
from anyonent.states import (
    build_space,
    maximally_mixed,
    product_state,
    quantum_trace,
    random_single_state,
    random_state,
    validate,
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def brute_force_decohere(rho):
    """Oracle: per-element loops of the charge-line erasure rule.

    Keeps only local-charge-diagonal, channel-diagonal elements, averages them
    over the total charge with d_c weights, divides by d_a d_b, and writes the
    average into every compatible channel.
    """
    space = rho.space
    model = space.model
    out = {s.charge: np.zeros((s.dim, s.dim), dtype=complex) for s in space.sectors}
    pairs = {(seg.a, seg.b) for sector in space.sectors for seg in sector.segments}
    for a, b in pairs:
        acc = None
        for sector in space.sectors:
            for seg in sector.segments:
                if (seg.a, seg.b) != (a, b):
                    continue
                blk = rho.blocks[sector.charge][seg.sl, seg.sl] * model.d(sector.charge)
                acc = blk if acc is None else acc + blk
        acc = acc / (model.d(a) * model.d(b))
        for sector in space.sectors:
            for seg in sector.segments:
                if (seg.a, seg.b) == (a, b):
                    out[sector.charge][seg.sl, seg.sl] = acc
    return out


def max_block_dev(x, y):
    return max(
        float(np.max(np.abs(x.blocks[c] - y.blocks[c]))) if x.blocks[c].size else 0.0
        for c in x.blocks
    )


class TestDecoherence:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_idempotent(self, fib_space, seed):
        rho = random_state(fib_space, seed)
        once = apply_D(rho)
        twice = apply_D(once)
        assert max_block_dev(once, twice) <= 1e-12

    @pytest.mark.parametrize("seed", [0, 5])
    def test_preserves_quantum_trace(self, fib_space3, seed):
        rho = random_state(fib_space3, seed)
        assert abs(quantum_trace(apply_D(rho)) - quantum_trace(rho)) <= 1e-12

    def test_fixes_products(self, fib_space):
        rho = product_state(
            random_single_state(fib_space.layout_a, 1),
            random_single_state(fib_space.layout_b, 2),
        )
        assert max_block_dev(rho, apply_D(rho)) <= 1e-12

    @pytest.mark.parametrize("seed", [3, 4])
    def test_matches_brute_force(self, fib_space3, seed):
        rho = random_state(fib_space3, seed)
        got = apply_D(rho)
        want = brute_force_decohere(rho)
        for c in want:
            assert np.max(np.abs(got.blocks[c] - want[c])) <= 1e-12

    def test_mult2_channels_replicated(self, mult2_space):
        # with a doubled fusion channel both mu segments must carry the average
        rho = random_state(mult2_space, 9)
        got = apply_D(rho)
        want = brute_force_decohere(rho)
        for c in want:
            assert np.max(np.abs(got.blocks[c] - want[c])) <= 1e-12
        x = mult2_space.model.charge("x")
        sector = got.space.sector(x)
        s1, s2 = sector.segment(x, x, 1), sector.segment(x, x, 2)
        assert np.max(np.abs(got.blocks[x][s1.sl, s1.sl] - got.blocks[x][s2.sl, s2.sl])) <= 1e-14

    @pytest.mark.parametrize("n", [2, 3])
    def test_mes_decoherence_weights(self, n):
        # the decohered maximally entangled state carries F_{n-1}/d^n on the
        # vacuum-pair direction and F_n/d^(n+1) on each tau-pair direction
        rho = build_mes(n)
        dm = apply_D(rho)
        want = brute_force_decohere(rho)
        for c in want:
            assert np.max(np.abs(dm.blocks[c] - want[c])) <= 1e-12
        dec = mes_decomposition(n)
        model = rho.space.model
        one, tau = model.charge("1"), model.charge("tau")
        d = model.d(tau)
        w1 = dec.phi1[one] @ dm.blocks[one] @ dec.phi1[one].conj()
        w2 = dec.phi2[one] @ dm.blocks[one] @ dec.phi2[one].conj()
        w3 = dec.phi3[tau] @ dm.blocks[tau] @ dec.phi3[tau].conj()
        assert abs(w1 - fib(n - 1) / d**n) <= 1e-12
        assert abs(w2 - fib(n) / d ** (n + 1)) <= 1e-12
        assert abs(w3 - fib(n) / d ** (n + 1)) <= 1e-12


class TestKrausChannels:
    def test_identity_channel(self, fib_space):
        rho = random_state(fib_space, 0)
        out = apply_channel(rho, identity_channel(fib_space))
        assert max_block_dev(rho, out) <= 1e-14

    def test_projector_channel_zeroes_cross_charge(self, fib_space):
        rho = random_state(fib_space, 1)
        out = apply_channel(rho, local_charge_projector_channel(fib_space, "A"))
        assert abs(quantum_trace(out) - quantum_trace(rho)) <= 1e-10
        for sector in fib_space.sectors:
            blk = out.blocks[sector.charge]
            for s1 in sector.segments:
                for s2 in sector.segments:
                    if s1.a != s2.a:
                        assert np.max(np.abs(blk[s1.sl, s2.sl])) <= 1e-14

    @pytest.mark.parametrize("party", ["A", "B"])
    @pytest.mark.parametrize("seed", [0, 1])
    def test_random_channel_normalized_and_valid(self, fib_space, party, seed):
        ch = random_local_channel(fib_space, party, seed)
        assert channel_normalization_residual(fib_space, ch) <= 1e-10
        out = apply_channel(random_state(fib_space, seed), ch)
        assert validate(out).ok()

    def test_unnormalized_rejected(self, fib_space):
        ops = tuple(
            KrausOp(s.charge, s.charge, 0.5 * np.eye(s.dim, dtype=complex))
            for s in fib_space.sectors
        )
        with pytest.raises(NotNormalized):
            apply_channel(random_state(fib_space, 0), KrausChannel(ops))

    def test_shape_mismatch_rejected(self, fib_space):
        from anyonent.channels import ShapeMismatch

        ops = tuple(
            KrausOp(s.charge, s.charge, np.eye(s.dim + 1, dtype=complex))
            for s in fib_space.sectors
        )
        with pytest.raises(ShapeMismatch):
            apply_channel(random_state(fib_space, 0), KrausChannel(ops))

    def test_charge_changing_ops_use_dimension_weights(self, fib):
        # map the vacuum sector into the tau sector; normalization carries d_a/d_b
        tau = fib.charge("tau")
        space = build_space(fib, [tau, tau], [tau, tau])
        one = fib.vacuum
        dim1 = space.sector(one).dim
        dimt = space.sector(tau).dim
        d = fib.d(tau)
        x = 0.6
        y = math.sqrt((1.0 - x * x) / d)
        iso = np.zeros((dimt, dim1), dtype=complex)
        iso[:dim1, :dim1] = np.eye(dim1)
        ops = (
            KrausOp(one, one, x * np.eye(dim1, dtype=complex)),
            KrausOp(tau, one, y * iso),
            KrausOp(tau, tau, np.eye(dimt, dtype=complex)),
        )
        ch = KrausChannel(ops)
        assert channel_normalization_residual(space, ch) <= 1e-12
        rho = random_state(space, 2)
        out = apply_channel(rho, ch)
        assert abs(quantum_trace(out) - quantum_trace(rho)) <= 1e-10


class TestMeasurement:
    def test_definite_charge_product(self, fib):
        tau = fib.charge("tau")
        space = build_space(fib, [tau], [tau])
        from anyonent.states import SingleSystemDensityMatrix

        d = fib.d(tau)
        pa = SingleSystemDensityMatrix(space.layout_a, {tau: np.array([[1 / d]], dtype=complex)})
        pb = SingleSystemDensityMatrix(space.layout_b, {tau: np.array([[1 / d]], dtype=complex)})
        outcomes = measure_local_charge(product_state(pa, pb), "A")
        assert len(outcomes) == 1
        charge, prob, _ = outcomes[0]
        assert charge == tau and abs(prob - 1.0) <= 1e-12

    def test_mes_outcome_probabilities(self):
        # vacuum branch weight F_{n-1}/d^n, tau branch weight d F_n/d^n
        n = 3
        rho = build_mes(n)
        model = rho.space.model
        d = model.d(model.charge("tau"))
        outcomes = {c.name: p for c, p, _ in measure_local_charge(rho, "A")}
        assert abs(sum(outcomes.values()) - 1.0) <= 1e-10
        assert abs(outcomes["1"] - fib(n - 1) / d**n) <= 1e-12
        assert abs(outcomes["tau"] - fib(n) * d / d**n) <= 1e-12

    def test_maximally_mixed_probabilities(self, fib_space3):
        # share of local charge a is (number of a-paths) d_a / d^n
        model = fib_space3.model
        tau = model.charge("tau")
        d = model.d(tau)
        outcomes = {c.name: p for c, p, _ in measure_local_charge(maximally_mixed(fib_space3), "A")}
        assert abs(outcomes["1"] - fib(2) / d**3) <= 1e-12
        assert abs(outcomes["tau"] - fib(3) * d / d**3) <= 1e-12

    @pytest.mark.parametrize("party", ["A", "B"])
    def test_posteriors_valid(self, fib_space, party):
        rho = random_state(fib_space, 5)
        outcomes = measure_local_charge(rho, party)
        assert abs(sum(p for _, p, _ in outcomes) - 1.0) <= 1e-10
        for _, _, post in outcomes:
            assert validate(post).ok()


class TestVacuumAncilla:
    def test_dim_one_identity(self, fib_space):
        rho = random_state(fib_space, 0)
        assert adjoin_vacuum_ancilla(rho, "A", 1) is rho

    @pytest.mark.parametrize("party", ["A", "B"])
    def test_measure_invariant(self, fib_space, party):
        rho = random_state(fib_space, 6)
        big = adjoin_vacuum_ancilla(rho, party, 3)
        assert abs(e_ace(big).value - e_ace(rho).value) <= 1e-12

    @pytest.mark.parametrize("party", ["A", "B"])
    def test_adjoin_then_trace_recovers(self, fib_space3, party):
        rho = random_state(fib_space3, 7)
        back = trace_vacuum_ancilla(adjoin_vacuum_ancilla(rho, party, 2), party, 2)
        assert max_block_dev(rho, back) == 0.0


class TestConversionMaps:
    def test_map_f_vacuum_sector_unchanged(self, fib):
        space = build_space(fib, [fib.vacuum], [fib.vacuum])
        rho = random_state(space, 0)
        image = map_F(rho)
        assert np.max(np.abs(image.blocks[fib.vacuum] - rho.blocks[fib.vacuum])) <= 1e-15

    def test_map_f_on_maximally_mixed_two_tau(self, fib):
        tau = fib.charge("tau")
        space = build_space(fib, [tau], [tau])
        image = map_F(maximally_mixed(space))
        d = fib.d(tau)
        assert abs(image.blocks[fib.vacuum][0, 0] - 1.0 / d**2) <= 1e-14
        assert abs(image.blocks[tau][0, 0] - d / d**2) <= 1e-14
        assert abs(image.trace() - 1.0) <= 1e-12

    def test_map_f_preserves_relative_entropy(self, fib_space):
        # oracle: quantum-trace-weighted eigenvalue sums computed from scratch
        rho, sigma = random_state(fib_space, 1), random_state(fib_space, 2)
        got = conv_relative_entropy(map_F(rho), map_F(sigma))
        model = fib_space.model
        want = 0.0
        for c in rho.blocks:
            p, s = rho.blocks[c], sigma.blocks[c]
            wp, vp = np.linalg.eigh(p)
            ws, vs = np.linalg.eigh(s)
            term = sum(w * math.log(w) for w in wp if w > 1e-14)
            term -= sum(
                math.log(ws[k]) * float((vs[:, k].conj() @ p @ vs[:, k]).real)
                for k in range(len(ws))
                if ws[k] > 1e-14
            )
            want += model.d(c) * term
        assert abs(got - want) <= 1e-10
        assert abs(got - relative_entropy(rho, sigma)) <= 1e-12

    def test_map_g_requires_free_state(self, fib_space):
        with pytest.raises(NotFree):
            map_G(build_mes(2))

    def test_map_g_of_mixed_product(self, fib_space):
        rho = maximally_mixed(fib_space)
        image = map_G(rho)
        assert abs(image.trace() - 1.0) <= 1e-12
        for key, blk in image.blocks.items():
            off = blk - np.diag(np.diag(blk))
            assert np.max(np.abs(off)) <= 1e-14
            diag = np.diag(blk).real
            assert np.max(diag) - np.min(diag) <= 1e-14

    def test_map_g_block_relation(self, fib_space3):
        # each (a, b) block is d_a d_b times the common decohered segment
        model = fib_space3.model
        sigma = apply_D(random_state(fib_space3, 8))
        image = map_G(sigma)
        for sector in fib_space3.sectors:
            for seg in sector.segments:
                want = model.d(seg.a) * model.d(seg.b) * sigma.blocks[sector.charge][seg.sl, seg.sl]
                assert np.max(np.abs(image.blocks[(seg.a, seg.b)] - want)) <= 1e-12

    @pytest.mark.parametrize("seed", [0, 3])
    def test_map_g_preserves_relative_entropy(self, fib_space3, seed):
        s1 = apply_D(random_state(fib_space3, seed))
        s2 = apply_D(random_state(fib_space3, seed + 100))
        lhs = conv_relative_entropy(map_G(s1), map_G(s2))
        rhs = relative_entropy(s1, s2)
        assert abs(lhs - rhs) <= 1e-10

    def test_free_state_deviation(self, fib_space):
        assert free_state_deviation(maximally_mixed(fib_space)) <= 1e-14
        assert free_state_deviation(build_isotropic(2, 0.9)) > 1e-3
