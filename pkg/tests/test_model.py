import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonent.model import (
    AssociativityViolation,
    MissingVacuum,
    ModelSyntaxError,
    UnknownCharge,
    builtin_model,
    count_paths,
    enumerate_paths,
    parse_model,
    render_model,
    solve_qdims,
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def brute_force_associativity(model):
    """Independent oracle: check sum_e N[a,b,e] N[e,c,d] == sum_f N[b,c,f] N[a,f,d]."""
    cs = model.charges
    for a in cs:
        for b in cs:
            for c in cs:
                for d in cs:
                    left = sum(model.mult(a, b, e) * model.mult(e, c, d) for e in cs)
                    right = sum(model.mult(b, c, f) * model.mult(a, f, d) for f in cs)
                    if left != right:
                        return False
    return True


def brute_force_paths(model, leaves, total):
    """Independent oracle: count fusion trees by plain recursion."""
    if len(leaves) == 1:
        return 1 if leaves[0] == total else 0
    count = 0

    def walk(current, rest):
        nonlocal count
        if not rest:
            if current == total:
                count += 1
            return
        for c, m in model.outcomes(current, rest[0]):
            for _ in range(m):
                walk(c, rest[1:])

    walk(leaves[0], list(leaves[1:]))
    return count


class TestParse:
    def test_fibonacci(self, fib):
        tau = fib.charge("tau")
        one = fib.vacuum
        assert fib.mult(tau, tau, one) == 1
        assert fib.mult(tau, tau, tau) == 1
        assert fib.mult(one, tau, tau) == 1
        assert fib.mult(one, tau, one) == 0

    def test_missing_vacuum(self):
        with pytest.raises(MissingVacuum):
            parse_model("model bad\ncharges a b\nfuse a b -> a:1\n")

    def test_ising_passes_associativity(self, ising):
        assert brute_force_associativity(ising)
        assert ising.mult(ising.charge("sigma"), ising.charge("sigma"), ising.charge("psi")) == 1

    def test_duplicate_charge(self):
        from anyonent.model import DuplicateCharge

        with pytest.raises(DuplicateCharge):
            parse_model("model bad\ncharges 1 a a\n")

    def test_incomplete_rules_rejected(self):
        with pytest.raises(ModelSyntaxError):
            parse_model("model bad\ncharges 1 a b\nfuse a a -> 1:1\n")

    def test_associativity_violation(self):
        # a*a = 1, a*b = a, b*b = b is not associative: (aa)b = b vs a(ab) = 1
        text = "model bad\ncharges 1 a b\nfuse a a -> 1:1\nfuse a b -> a:1\nfuse b b -> b:1\n"
        with pytest.raises(AssociativityViolation):
            parse_model(text)

    def test_syntax_error_carries_line(self):
        with pytest.raises(ModelSyntaxError) as err:
            parse_model("model ok\ncharges 1 a\nfuse a a => 1:1\n")
        assert err.value.line == 3

    def test_dual_declaration_validated(self):
        text = "model z3\ncharges 1 w v\nfuse w w -> v:1\nfuse w v -> 1:1\nfuse v v -> w:1\ndual w=v\n"
        model = parse_model(text)
        w, v = model.charge("w"), model.charge("v")
        assert model.duals[w.id] == v.id and model.duals[v.id] == w.id
        bad = text.replace("dual w=v", "dual w=w")
        with pytest.raises(ModelSyntaxError):
            parse_model(bad)

    def test_mult2_supported(self, mult2):
        x = mult2.charge("x")
        assert mult2.mult(x, x, x) == 2
        assert brute_force_associativity(mult2)


class TestQdims:
    def test_vacuum_only(self):
        model = parse_model("model trivial\ncharges 1\n")
        assert model.d(model.vacuum) == 1.0

    def test_fibonacci_golden_ratio(self, fib):
        assert abs(fib.d(fib.charge("tau")) - GOLDEN) <= 1e-12

    def test_ising_dims(self, ising):
        assert abs(ising.d(ising.charge("sigma")) - math.sqrt(2.0)) <= 1e-12
        assert abs(ising.d(ising.charge("psi")) - 1.0) <= 1e-12

    def test_mult2_dims(self, mult2):
        # positive root of d^2 = 1 + 2 d
        assert abs(mult2.d(mult2.charge("x")) - (1.0 + math.sqrt(2.0))) <= 1e-12

    @pytest.mark.parametrize("name", ["fibonacci", "ising"])
    def test_identity_residuals(self, name):
        model = builtin_model(name)
        qd = solve_qdims(model.fusion)
        for a in model.charges:
            for b in model.charges:
                total = sum(m * qd[c] for c, m in model.outcomes(a, b))
                assert abs(qd[a] * qd[b] - total) <= 1e-10


class TestPaths:
    def test_three_tau_to_tau(self, fib):
        tau = fib.charge("tau")
        assert len(enumerate_paths(fib, [tau] * 3, tau)) == 2

    def test_single_leaf(self, fib):
        tau = fib.charge("tau")
        assert len(enumerate_paths(fib, [tau], tau)) == 1
        assert len(enumerate_paths(fib, [tau], fib.vacuum)) == 0

    def test_ising_four_sigma_to_vacuum(self, ising):
        sg = ising.charge("sigma")
        got = len(enumerate_paths(ising, [sg] * 4, ising.vacuum))
        assert got == brute_force_paths(ising, [sg] * 4, ising.vacuum) == 2

    def test_fibonacci_counts_match_fibonacci_numbers(self, fib):
        tau = fib.charge("tau")
        f = [0, 1, 1]
        while len(f) < 12:
            f.append(f[-1] + f[-2])
        for n in range(2, 11):
            assert len(enumerate_paths(fib, [tau] * n, fib.vacuum)) == f[n - 1]
            assert len(enumerate_paths(fib, [tau] * n, tau)) == f[n]

    def test_count_matches_enumeration(self, fib, ising, mult2):
        for model, name in ((fib, "tau"), (ising, "sigma"), (mult2, "x")):
            leaf = model.charge(name)
            for total in model.charges:
                got = len(enumerate_paths(model, [leaf] * 4, total))
                assert got == count_paths(model, [leaf] * 4, total)
                assert got == brute_force_paths(model, [leaf] * 4, total)

    def test_deterministic_lexicographic_order(self, fib):
        tau = fib.charge("tau")
        paths = enumerate_paths(fib, [tau] * 5, tau)
        keys = [(tuple(c.id for c in p.intermediates), p.vertex_mults) for p in paths]
        assert keys == sorted(keys)

    def test_unknown_charge(self, fib, ising):
        with pytest.raises(UnknownCharge):
            enumerate_paths(fib, [ising.charge("sigma")], fib.vacuum)

    def test_path_invariants(self, mult2):
        x = mult2.charge("x")
        for p in enumerate_paths(mult2, [x] * 3, x):
            assert p.intermediates[0] == x
            assert p.total == x
            for k, mu in enumerate(p.vertex_mults, start=1):
                allowed = mult2.mult(p.intermediates[k - 1], x, p.intermediates[k])
                assert 1 <= mu <= allowed


class TestRoundTrip:
    @pytest.mark.parametrize("name", ["fibonacci", "ising"])
    def test_builtin_round_trip(self, name):
        model = builtin_model(name)
        again = parse_model(render_model(model))
        assert model.equivalent(again)

    @settings(max_examples=20, deadline=None)
    @given(n=st.integers(min_value=2, max_value=6))
    def test_cyclic_group_round_trip(self, n):
        # Z_n fusion: all quantum dimensions one, associativity automatic
        names = ["1"] + [f"g{k}" for k in range(1, n)]
        lines = [f"model z{n}", "charges " + " ".join(names)]
        for i in range(1, n):
            for j in range(i, n):
                k = (i + j) % n
                lines.append(f"fuse {names[i]} {names[j]} -> {names[k]}:1")
        model = parse_model("\n".join(lines))
        assert all(abs(d - 1.0) < 1e-12 for d in model.qdim)
        assert model.equivalent(parse_model(render_model(model)))
