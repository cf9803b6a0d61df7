import numpy as np
import pytest

from qhistories.contexts import State, born_probability, check_decomposition, complement, join, meet, validate_context
from qhistories.errors import ValidationError, ZeroConditioningError
from qhistories.histories import (
    GeneralizedContext,
    IncompatibleVerdict,
    TimedContext,
    build_generalized_context,
    generalized_conditional,
    generalized_probability,
    heisenberg_translate,
    marginal_atom,
    translate_context,
)
from qhistories.linalg import TOL, Projector, Propagator, commutes, ray
from qhistories.sampling import compatible_family, random_context, random_hermitian, random_state

import oracles

E = np.eye(3)


def coordinate_context(d=3):
    return validate_context([np.diag(row) for row in np.eye(d)])


def test_translate_trivial_and_same_time():
    p = ray([1, 1, 0])
    assert heisenberg_translate(p, Propagator.trivial(3), 4.0, 0.0) is p
    u = Propagator.from_hamiltonian(np.diag([0.0, 1.0, 2.0]))
    assert heisenberg_translate(p, u, 1.5, 1.5) is p


def test_translate_quarter_turn():
    e_ = 1.0
    dt = np.pi / 2 / e_
    u = Propagator.from_hamiltonian(np.diag([0.0, e_]))
    got = heisenberg_translate(ray([1, 1]), u, dt, 0.0)
    # oracle: U(t0, t_i) P U(t_i, t0) with U(t_i, t0) = expm(-i H dt) from scipy
    v = oracles.unitary(np.diag([0.0, e_]), dt)
    ref = v.conj().T @ oracles.outer([1, 1]) @ v
    np.testing.assert_allclose(got.matrix, ref, atol=1e-15)
    np.testing.assert_allclose(got.matrix, oracles.outer([1, 1j]), atol=1e-15)
    assert got.rank == 1


def test_translate_preserves_rank_and_projector(rng):
    for _ in range(100):
        d = int(rng.integers(2, 9))
        u = Propagator.from_hamiltonian(random_hermitian(d, rng))
        ctx = random_context(d, rng)
        for a in ctx.atoms:
            b = heisenberg_translate(a, u, rng.uniform(-5, 5), rng.uniform(-5, 5))
            assert b.rank == a.rank
            assert Projector.from_matrix(b.matrix).rank == a.rank


def test_translated_atoms_remain_decomposition_500(rng):
    for _ in range(500):
        d = int(rng.integers(1, 9))
        u = Propagator.from_hamiltonian(random_hermitian(d, rng))
        tc = TimedContext(float(rng.uniform(0, 5)), random_context(d, rng))
        atoms = translate_context(tc, u, float(rng.uniform(-5, 0)))
        check_decomposition([a.matrix for a in atoms], 5 * TOL)


def test_single_context_always_compatible(rng):
    d = 4
    u = Propagator.from_hamiltonian(random_hermitian(d, rng))
    ctx = random_context(d, rng)
    gc = build_generalized_context(0.0, [TimedContext(1.0, ctx)], u)
    assert isinstance(gc, GeneralizedContext)
    for k, a in enumerate(ctx.atoms):
        np.testing.assert_allclose(gc.atoms[(k,)].matrix, heisenberg_translate(a, u, 1.0, 0.0).matrix, atol=1e-14)


def test_two_diagonal_contexts_compatible():
    c1 = coordinate_context()
    c2 = validate_context([np.diag([1, 1, 0]), np.diag([0, 0, 1])])
    gc = build_generalized_context(0.0, [TimedContext(1.0, c1), TimedContext(2.0, c2)], Propagator.trivial(3))
    assert gc
    assert gc.shape == (3, 2)
    for (k1, k2), a in gc.atoms.items():
        np.testing.assert_array_equal(a.matrix, c1.atoms[k1].matrix @ c2.atoms[k2].matrix)
    assert gc.zero_atoms == {(0, 1), (1, 1), (2, 0)}


def test_three_box_incompatible():
    p = validate_context([ray(E[0]), ray(E[0]).complement()])
    r = validate_context([ray(oracles.R_VEC), ray(oracles.R_VEC).complement()])
    verdict = build_generalized_context(0.0, [TimedContext(1.0, p), TimedContext(2.0, r)], Propagator.trivial(3))
    assert isinstance(verdict, IncompatibleVerdict)
    assert not verdict
    first = verdict.pairs[0]
    assert (first.i, first.k_i, first.j, first.k_j) == (0, 0, 1, 0)
    assert first.norm == pytest.approx(oracles.THREE_BOX_COMMUTATOR, abs=1e-12)
    assert not first.marginal
    # every cross pair fails: commutators of P with R equal those of complements up to sign
    assert len(verdict.pairs) == 4


def test_marginal_flag():
    theta = 3e-8
    v = np.array([np.cos(theta), np.sin(theta)])
    a = validate_context([ray([1, 0]), ray([0, 1])])
    b = validate_context([ray(v), ray([-v[1], v[0]])])
    verdict = build_generalized_context(0.0, [TimedContext(1.0, a), TimedContext(2.0, b)], Propagator.trivial(2))
    assert not verdict
    assert verdict.marginal
    assert all(p.marginal for p in verdict.pairs)


def test_times_must_increase():
    c = coordinate_context()
    with pytest.raises(ValidationError):
        build_generalized_context(0.0, [TimedContext(2.0, c), TimedContext(1.0, c)], Propagator.trivial(3))
    with pytest.raises(ValidationError):
        build_generalized_context(0.0, [TimedContext(1.0, c), TimedContext(1.0, c)], Propagator.trivial(3))


def test_reference_time_after_contexts_allowed(rng):
    u = Propagator.from_hamiltonian(random_hermitian(3, rng))
    tcs = compatible_family(3, rng, [1.0, 2.0], u, t0=5.0)
    assert build_generalized_context(5.0, tcs, u)


def test_generalized_probability_examples():
    c1 = coordinate_context()
    gc = build_generalized_context(0.0, [TimedContext(1.0, c1), TimedContext(2.0, coordinate_context())], Propagator.trivial(3))
    rho = State.from_density(np.diag([0.5, 0.5, 0.0]))
    assert generalized_probability(rho, gc.full()) == pytest.approx(1.0, abs=1e-15)
    assert generalized_probability(rho, gc.empty()) == 0.0
    assert generalized_probability(rho, gc.atom((0, 0))) == pytest.approx(0.5, abs=1e-15)
    # conditional: atom 0 at t1 given atom 0 at t2
    assert generalized_conditional(rho, gc.at(0, 0), gc.at(1, 0)) == pytest.approx(1.0, abs=1e-15)
    b = gc.at(1, 0)
    assert generalized_conditional(rho, b, b) == pytest.approx(1.0, abs=1e-15)
    assert generalized_conditional(rho, complement(b), b) == 0.0
    with pytest.raises(ZeroConditioningError):
        generalized_conditional(rho, gc.full(), gc.at(0, 2))


def _random_gc(rng, n_times=2):
    d = int(rng.integers(2, 7))
    u = Propagator.from_hamiltonian(random_hermitian(d, rng))
    times = sorted(rng.uniform(0, 5, size=n_times))
    tcs = compatible_family(d, rng, times, u)
    gc = build_generalized_context(0.0, tcs, u)
    assert gc
    return d, u, tcs, gc


def test_generalized_atoms_form_decomposition(rng):
    for _ in range(200):
        _, _, _, gc = _random_gc(rng, int(rng.integers(1, 4)))
        nonzero = [a for k, a in gc.atoms.items() if k not in gc.zero_atoms]
        validate_context(nonzero, tol=5 * TOL)
        check_decomposition([a.matrix for a in gc.atoms.values()], 5 * TOL)
        for k in gc.zero_atoms:
            assert np.linalg.norm(gc.atoms[k].matrix) <= 5 * TOL


def test_marginals_recover_heisenberg_atoms_and_born(rng):
    for _ in range(200):
        d, u, tcs, gc = _random_gc(rng, int(rng.integers(1, 4)))
        rho = random_state(d, rng)
        for i, tc in enumerate(tcs):
            for k, atom in enumerate(tc.context.atoms):
                heis = heisenberg_translate(atom, u, tc.time, 0.0)
                assert np.linalg.norm(marginal_atom(gc, i, k) - heis.matrix) <= 5 * TOL
                # Schroedinger picture: evolve the state to t_i instead
                born_at_ti = born_probability(rho.conjugate(u(0.0, tc.time)), atom)
                assert abs(generalized_probability(rho, gc.at(i, k)) - born_at_ti) <= 5 * TOL


def test_generalized_probability_normalized_and_additive(rng):
    for _ in range(200):
        d, _, _, gc = _random_gc(rng)
        rho = random_state(d, rng)
        probs = [generalized_probability(rho, gc.atom(k)) for k in gc.atoms]
        assert abs(sum(probs) - 1) <= 5 * TOL
        assert min(probs) >= -TOL
        keys = list(gc.atoms)
        mask = rng.random(len(keys))
        a = gc.property(k for k, m in zip(keys, mask) if m < 0.4)
        b = gc.property(k for k, m in zip(keys, mask) if m > 0.7)
        lhs = generalized_probability(rho, join(a, b))
        assert abs(lhs - generalized_probability(rho, a) - generalized_probability(rho, b)) <= 5 * TOL


def test_generalized_conditional_equals_conditioned_state(rng):
    for _ in range(100):
        d, _, _, gc = _random_gc(rng)
        rho = random_state(d, rng)
        keys = list(gc.atoms)
        a = gc.property(k for k in keys if rng.random() < 0.5)
        b = gc.property(k for k in keys if rng.random() < 0.6)
        pb = generalized_probability(rho, b)
        if pb <= 1e-3:
            continue
        bm = b.projector.matrix
        star = bm @ rho.rho @ bm / np.trace(bm @ rho.rho @ bm).real
        ref = np.trace(star @ a.projector.matrix).real
        assert abs(generalized_conditional(rho, a, b) - ref) <= 5 * TOL


def test_generalized_lattice_laws(rng):
    _, _, _, gc = _random_gc(rng, 3)
    keys = list(gc.atoms)
    for _ in range(50):
        p, q, s = (gc.property(k for k in keys if rng.random() < 0.5) for _ in range(3))
        assert meet(p, join(q, s)) == join(meet(p, q), meet(p, s))
        assert complement(join(p, q)) == meet(complement(p), complement(q))
        assert complement(complement(p)) == p
        assert meet(p, complement(p)) == gc.empty()
        assert join(p, complement(p)) == gc.full()
        pm, qm = p.projector.matrix, q.projector.matrix
        assert np.linalg.norm(meet(p, q).projector.matrix - pm @ qm) <= 5 * TOL
        assert np.linalg.norm(complement(p).projector.matrix - (np.eye(gc.dim) - pm)) <= 5 * TOL


def test_sums_commute_when_atoms_do(rng):
    """Compatibility is checked on atoms; sums then commute by bilinearity."""
    for _ in range(50):
        d, u, tcs, gc = _random_gc(rng)
        heis = gc.heisenberg_atoms
        s1 = sum(heis[0][k].matrix for k in range(len(heis[0])) if rng.random() < 0.5) + np.zeros((d, d))
        s2 = sum(heis[1][k].matrix for k in range(len(heis[1])) if rng.random() < 0.5) + np.zeros((d, d))
        assert commutes(s1, s2, 5 * TOL)


def test_compatibility_is_state_independent(rng):
    """The builder takes no state: identical inputs give identical verdicts before and after any state is used."""
    for _ in range(20):
        d = int(rng.integers(2, 6))
        u = Propagator.from_hamiltonian(random_hermitian(d, rng))
        tcs = [TimedContext(1.0, random_context(d, rng)), TimedContext(2.0, random_context(d, rng))]
        first = build_generalized_context(0.0, tcs, u)
        for _ in range(5):
            rho = random_state(d, rng)
            if first:
                generalized_probability(rho, first.full())
            again = build_generalized_context(0.0, tcs, u)
            assert bool(again) == bool(first)
            if not first:
                assert again.pairs == first.pairs
            else:
                for k in first.atoms:
                    np.testing.assert_array_equal(again.atoms[k].matrix, first.atoms[k].matrix)
