import random

import pytest

from sralloc import (
    CapExceededError,
    POLICIES,
    critical_path_aware,
    full_reuse,
    manual_allocation,
    oracle_alpha,
    oracle_carrier,
    oracle_replay,
    oracle_residency_cycles,
    parse_kernel,
    random_kernel,
    run_allocator,
    steady_state_cycles,
    trace,
)


def ref_of(kernel, array, access="read"):
    return next(r for r in kernel.refs if r.array == array and r.access == access
                and not r.implicit)


def test_trace_example_a(example):
    t = trace(example, ref_of(example, "a"))
    assert len(t) == 60000
    assert len(t.addresses()) == 30


def test_trace_single_iteration():
    k = parse_kernel("loop i = 0..1 { S: y[i] = x[i]; }")
    t = trace(k, ref_of(k, "x"))
    assert len(t) == 1


def test_trace_mat_b(kernels):
    mat = kernels["mat"]
    t = trace(mat, ref_of(mat, "b"))
    assert len(t) == 4096
    assert len(t.addresses()) == 256


def test_trace_cap(example):
    with pytest.raises(CapExceededError):
        trace(example, ref_of(example, "a"), cap=100)


def test_oracle_alpha_examples(example, kernels):
    assert oracle_alpha(trace(example, ref_of(example, "b")), carrier=0) == 600
    fir = kernels["fir"]
    assert oracle_alpha(trace(fir, ref_of(fir, "in")), carrier=0) == 51
    # a full-rank reference never overlaps + the carrier scan floors at one
    e_trace = trace(example, ref_of(example, "e", "write"))
    assert oracle_alpha(e_trace, carrier=0) == 0
    assert oracle_carrier(example, [e_trace]) == (None, 1)


def test_oracle_residency_cycles_example(example, example_reuse):
    cpa = critical_path_aware(example, example_reuse, 64)
    assert oracle_residency_cycles(example, cpa) == 1184
    beta = {a: i.required_regs for a, i in example_reuse.items()}
    assert oracle_residency_cycles(
        example, manual_allocation(example_reuse, beta, 681)) == 600
    ones = {a: 1 for a in example_reuse}
    alloc = manual_allocation(example_reuse, ones, 64)
    assert oracle_residency_cycles(example, alloc) == \
        steady_state_cycles(example, example_reuse, alloc).memory_cycles


def test_oracle_agreement_bundled(kernels, reuse_map, oracle_map):
    for name, kernel in kernels.items():
        reuse, expected = reuse_map[name], oracle_map[name]
        for array, info in reuse.items():
            got = expected[array]
            assert got["carrier"] == info.carrier, (name, array)
            assert got["required_regs"] == info.required_regs, (name, array)
            assert got["total"] == info.total_accesses, (name, array)
            assert got["after"] == info.after_accesses, (name, array)


def test_oracle_cycles_agreement_bundled(kernels, reuse_map):
    for name, kernel in kernels.items():
        reuse = reuse_map[name]
        for alg in ("fr", "pr", "cpa"):
            alloc = run_allocator(alg, kernel, reuse, 64)
            for policy in POLICIES:
                mine = steady_state_cycles(kernel, reuse, alloc, policy).memory_cycles
                assert oracle_residency_cycles(kernel, alloc, policy) == mine, \
                    (name, alg, policy)


def test_random_kernel_generator_bounds():
    rng = random.Random(5)
    for _ in range(50):
        k = random_kernel(rng)
        assert 1 <= k.depth <= 3
        assert all(lp.trip <= 16 for lp in k.loops)
        for r in k.refs:
            for expr in r.subscripts:
                assert all(-2 <= c <= 2 for _, c in expr.terms)


def test_oracle_replay_hit_map(example, example_reuse):
    fr = full_reuse(example_reuse, 64)
    cycles, hits = oracle_replay(example, fr)
    assert cycles == 1799
    # b holds one register: only the first element of the window hits
    assert hits[("b", (50, 0, 0))] is True
    assert hits[("b", (50, 0, 1))] is False
    assert hits[("a", (50, 7, 21))] is True
