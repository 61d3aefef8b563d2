"""Oracle bundle, four-step verifier, and instance randomization."""

import math

import numpy as np
import pytest

from hsmoney import f2lin, hsmini
from hsmoney.f2lin import Subspace
from hsmoney.qsim import StateVector, subspace_state


@pytest.fixture
def bundle():
    rng = np.random.default_rng(70)
    return hsmini.make_bundle(8, rng), rng


def test_generator_memoized(bundle):
    b, rng = bundle
    s1, a1 = b.generator(42)
    s2, a2 = b.generator(42)
    assert s1 == s2 and a1 == a2
    assert a1.dim == 4
    assert len(s1) == (3 * 8 + 7) // 8


def test_serials_distinct(bundle):
    b, rng = bundle
    serials = {b.generator(r)[0] for r in range(64)}
    assert len(serials) == 64


def test_serial_checker(bundle):
    b, rng = bundle
    s, _ = b.generator(7)
    assert b.check_serial(s)
    fresh_invalid = 0
    trials = 2000
    for _ in range(trials):
        cand = hsmini._sample_serial(8, rng)
        if not b.check_serial(cand):
            fresh_invalid += 1
    assert fresh_invalid / trials >= 1 - 2 ** -8


def test_primal_oracle_flips_exactly_members(bundle):
    b, rng = bundle
    s, a = b.generator(3)
    oracle = b.primal_oracle(s)
    members = set(a.members())
    assert set(np.flatnonzero(oracle.mask)) == members
    dual_oracle = b.dual_oracle(s)
    assert set(np.flatnonzero(dual_oracle.mask)) == set(a.dual().members())


def test_invalid_serial_oracle_is_identity(bundle):
    b, rng = bundle
    oracle = b.primal_oracle(b"\x00" * 3)
    assert not oracle.mask.any()


def test_bank_and_verify_honest(bundle):
    b, rng = bundle
    for _ in range(20):
        note = hsmini.bank(b, rng)
        ok, post = hsmini.verify_circuit(b, note.serial, note.state, rng)
        assert ok
        assert post.overlap(note.state) == pytest.approx(1.0, abs=1e-9)


def test_bank_note_shape(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    nz = np.abs(note.state.amps) > 1e-12
    assert nz.sum() == 2 ** 4
    vals = note.state.amps[nz]
    assert np.allclose(vals, vals[0])


def test_verify_charges_two_subspace_queries(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    before = b.subspace_queries
    hsmini.verify_circuit(b, note.serial, note.state, rng)
    assert b.subspace_queries == before + 2


def test_verify_invalid_serial_rejects(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    ok, _ = hsmini.verify_circuit(b, b"\xff" * 3, note.state, rng)
    assert not ok


def test_verify_orthogonal_rejects(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    entry = b.lookup(note.serial)
    outside = next(x for x in range(1 << 8) if not entry.subspace.contains(x))
    for _ in range(20):
        ok, _ = hsmini.verify_circuit(b, note.serial, StateVector.basis(8, outside), rng)
        assert not ok


def test_verify_neighbor_quarter_rate(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    a = b.lookup(note.serial).subspace
    keep = list(a.basis[:3])
    while True:
        x = int(rng.integers(0, 1 << 8))
        if not a.contains(x):
            break
    nb = Subspace.from_rows(keep + [x], 8)
    state = subspace_state(nb)
    trials = 1500
    hits = sum(hsmini.verify_circuit(b, note.serial, state, rng)[0] for _ in range(trials))
    sigma = math.sqrt(0.25 * 0.75 / trials)
    assert abs(hits / trials - 0.25) < 4 * sigma


def test_verifier_matrix_equality_n6():
    rng = np.random.default_rng(71)
    b = hsmini.make_bundle(6, rng)
    note = hsmini.bank(b, rng)
    circuit = hsmini.verifier_circuit_matrix(b, note.serial)
    rank1 = hsmini.verifier_as_projector(b, note.serial).matrix()
    assert np.abs(circuit - rank1).max() < 1e-9


def test_verifier_operator_distance_small(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    assert hsmini.verifier_operator_distance(b, note.serial) < 1e-9


def test_projector_idempotent_and_dual_acceptance(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    p = hsmini.verifier_as_projector(b, note.serial)
    once = p.project(note.state.amps)
    twice = p.project(once)
    assert np.allclose(once, twice)
    # Hadamard-transformed dual state is exactly the money state
    entry = b.lookup(note.serial)
    from hsmoney.qsim import hadamard_all

    dual_state = hadamard_all(subspace_state(entry.subspace.dual()))
    assert np.linalg.norm(p.project(dual_state.amps)) == pytest.approx(1.0, abs=1e-9)


def test_randomize_instance_identity_map(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    a = b.lookup(note.serial).subspace
    pair = (b.primal_oracle(note.serial), b.dual_oracle(note.serial))
    inst = hsmini.randomize_instance(a, note.state, pair, rng)
    # conjugated primal flips exactly f(A)
    assert set(np.flatnonzero(inst.primal.mask)) == set(inst.subspace.members())
    assert set(np.flatnonzero(inst.dual.mask)) == set(inst.subspace.dual().members())
    # relabeled state is the new subspace state
    assert inst.state.overlap(subspace_state(inst.subspace)) == pytest.approx(1.0, abs=1e-9)
    # round trip
    undone = inst.undo_state(inst.state)
    assert undone.overlap(note.state) == pytest.approx(1.0, abs=1e-9)


def test_randomize_instance_charges_base(bundle):
    b, rng = bundle
    note = hsmini.bank(b, rng)
    a = b.lookup(note.serial).subspace
    primal = b.primal_oracle(note.serial)
    inst = hsmini.randomize_instance(a, note.state, (primal, b.dual_oracle(note.serial)), rng)
    before = primal.query_count
    inst.primal.apply(inst.state)
    assert primal.query_count == before + 1


def test_randomize_verification_statistics_roundtrip(bundle):
    # verifying the randomized instance with relabeled oracles behaves like
    # verifying the original
    b, rng = bundle
    note = hsmini.bank(b, rng)
    a = b.lookup(note.serial).subspace
    pair = (b.primal_oracle(note.serial), b.dual_oracle(note.serial))
    inst = hsmini.randomize_instance(a, note.state, pair, rng)
    from hsmoney.qsim import Projector, hadamard_all, measure_projector

    hits = 0
    trials = 50
    for _ in range(trials):
        p1 = Projector.from_mask(8, inst.primal.mask)
        ok1, s, _ = measure_projector(p1, inst.state, rng)
        s = hadamard_all(s)
        p2 = Projector.from_mask(8, inst.dual.mask)
        ok2, s, _ = measure_projector(p2, s, rng)
        hits += ok1 and ok2
    assert hits == trials


def test_snapshot_roundtrip(bundle):
    b, rng = bundle
    b.generator(1)
    b.generator(2)
    text = b.export_json()
    back = hsmini.OracleBundle.import_json(text, np.random.default_rng(0))
    assert back.export_json() == text


def test_mini_scheme_interface(bundle):
    b, rng = bundle
    scheme = hsmini.HsMiniScheme(b)
    note = scheme.bank(rng)
    assert scheme.verify(note.serial, note.state, rng)
    target = scheme.target_state(note.serial)
    assert target.overlap(note.state) == pytest.approx(1.0)
    assert scheme.target_state(b"nope") is None


def test_neighbor_collision_bound_sampled():
    # for random neighbors B of A, no point outside the combined member sets
    # is hit much more often than 2^{-n/2}
    n = 12
    rng = np.random.default_rng(72)
    a = f2lin.random_subspace(n, n // 2, rng)
    from hsmoney.advlab import SubspaceNeighborRelation

    rel = SubspaceNeighborRelation(n)
    probes = []
    a_star = set(a.members()) | {x | (1 << n) for x in a.dual().members()}
    while len(probes) < 40:
        x = int(rng.integers(0, 1 << (n + 1)))
        if x not in a_star:
            probes.append(x)
    samples = 1500
    counts = np.zeros(len(probes))
    for _ in range(samples):
        nb = rel._neighbor(a, rng)
        nb_star = None
        for j, x in enumerate(probes):
            hi, lo = x >> n, x & ((1 << n) - 1)
            member = nb.dual().contains(lo) if hi else nb.contains(lo)
            counts[j] += member
    rates = counts / samples
    bound = 2 ** (-n // 2)
    sigma = math.sqrt(bound * (1 - bound) / samples)
    assert rates.max() <= bound + 3 * sigma + 2 / samples
