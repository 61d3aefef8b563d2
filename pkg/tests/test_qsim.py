"""Statevector, oracle, and fidelity utilities."""

import numpy as np
import pytest

from hsmoney import f2lin, qsim
from hsmoney.f2lin import Subspace
from hsmoney.qsim import (
    DensityOp,
    PhaseOracle,
    Projector,
    ReflectAboutState,
    StateVector,
    fidelity,
    hadamard_all,
    haar_random_state,
    measure_projector,
    subspace_state,
    trace_distance,
)


def test_subspace_state_small():
    # span{e_0} in n=2 -> (|00> + |01 as index 1>)/sqrt2 ; index = vector
    a = Subspace.from_rows([0b01], 2)
    s = subspace_state(a)
    expect = np.zeros(4, dtype=complex)
    expect[0] = expect[1] = 1 / np.sqrt(2)
    assert np.allclose(s.amps, expect)

    zero = subspace_state(Subspace.zero(3))
    assert np.allclose(zero.amps, StateVector.basis(3, 0).amps)


def test_subspace_state_overlap_formula():
    # <A|B> = 2^{dim(A cap B)} / 2^{n/2} for dim-n/2 subspaces
    rng = np.random.default_rng(21)
    n = 8
    for _ in range(30):
        a = f2lin.random_subspace(n, 4, rng)
        b = f2lin.random_subspace(n, 4, rng)
        ov = subspace_state(a).overlap(subspace_state(b))
        k = f2lin.intersection_dim(a, b)
        assert ov == pytest.approx(2 ** k / 2 ** (n // 2), abs=1e-12)


def test_neighbor_subspace_overlap_half():
    rng = np.random.default_rng(22)
    n = 8
    a = f2lin.random_subspace(n, 4, rng)
    keep = list(a.basis[:3])
    while True:
        x = int(rng.integers(0, 1 << n))
        if not a.contains(x):
            break
    b = Subspace.from_rows(keep + [x], n)
    assert subspace_state(a).overlap(subspace_state(b)) == pytest.approx(0.5)


def test_hadamard_uniform_and_involution():
    s = StateVector.basis(4, 0)
    u = hadamard_all(s)
    assert np.allclose(u.amps, np.full(16, 0.25))
    rng = np.random.default_rng(23)
    psi = haar_random_state(5, rng)
    back = hadamard_all(hadamard_all(psi))
    assert np.allclose(back.amps, psi.amps, atol=1e-12)


def test_hadamard_duality_n8():
    rng = np.random.default_rng(24)
    for _ in range(25):
        a = f2lin.random_subspace(8, 4, rng)
        lhs = hadamard_all(subspace_state(a))
        rhs = subspace_state(a.dual())
        assert lhs.overlap(rhs) == pytest.approx(1.0, abs=1e-9)


def test_hadamard_duality_all_dims_n12():
    rng = np.random.default_rng(25)
    for dim in (0, 3, 6, 9, 12):
        a = f2lin.random_subspace(12, dim, rng)
        assert hadamard_all(subspace_state(a)).overlap(subspace_state(a.dual())) == pytest.approx(1.0, abs=1e-9)


def test_phase_oracle_action_and_count():
    rng = np.random.default_rng(26)
    a = f2lin.random_subspace(6, 3, rng)
    u = PhaseOracle.from_subspace(a)
    x = next(m for m in a.members() if m)
    s = StateVector.basis(6, x)
    out = u.apply(s)
    assert np.allclose(out.amps, -s.amps)
    assert u.query_count == 1

    sa = subspace_state(a)
    out = u.apply(sa)
    assert np.allclose(out.amps, -sa.amps)

    # two applications = identity, and the counter adds exactly k
    twice = u.apply(u.apply(sa))
    assert np.allclose(twice.amps, sa.amps)
    assert u.query_count == 4


def test_phase_oracle_controlled_counts_once():
    rng = np.random.default_rng(27)
    a = f2lin.random_subspace(4, 2, rng)
    u = PhaseOracle.from_subspace(a)
    # control qubit 4 on a 5-qubit register: |1>_c |x in A> flips
    member = next(m for m in a.members() if m)
    s = StateVector.basis(5, member | (1 << 4))
    out = u.apply(s, control=4)
    assert np.allclose(out.amps, -s.amps)
    assert u.query_count == 1
    s0 = StateVector.basis(5, member)  # control off
    out0 = u.apply(s0, control=4)
    assert np.allclose(out0.amps, s0.amps)


def test_measure_projector_certain_cases():
    rng = np.random.default_rng(28)
    a = f2lin.random_subspace(6, 3, rng)
    sa = subspace_state(a)
    u = PhaseOracle.from_subspace(a)
    p = Projector.from_oracle(u)
    ok, post, prob = measure_projector(p, sa, rng)
    assert ok and prob == pytest.approx(1.0)
    assert post.overlap(sa) == pytest.approx(1.0)
    assert u.query_count == 1  # measurement charged one query

    r1 = Projector.onto_state(sa)
    ok, post, prob = measure_projector(r1, sa, rng)
    assert ok and prob == pytest.approx(1.0)
    assert post.overlap(sa) == pytest.approx(1.0)


def test_measure_projector_uniform_acceptance_rate():
    # P_A on the uniform superposition accepts with prob 2^{-n/2}
    rng = np.random.default_rng(29)
    n = 8
    a = f2lin.random_subspace(n, 4, rng)
    p = Projector.from_subspace(a)
    _, _, prob = measure_projector(p, StateVector.uniform(n), rng)
    assert prob == pytest.approx(2 ** (-n // 2), abs=1e-12)


def test_postselect_zero_probability_raises():
    p = Projector.from_mask(2, np.array([True, False, False, False]))
    s = StateVector.basis(2, 3)
    with pytest.raises(ValueError):
        qsim.postselect_projector(p, s, True)


def test_reflect_about_state():
    rng = np.random.default_rng(30)
    psi = haar_random_state(4, rng)
    refl = ReflectAboutState(psi)
    out = refl.apply(psi)
    assert np.allclose(out.amps, -psi.amps)
    phi = haar_random_state(4, rng)
    # orthogonal component is fixed
    perp = phi.amps - psi.inner(phi) * psi.amps
    perp = StateVector(4, perp / np.linalg.norm(perp))
    out = refl.apply(perp)
    assert np.allclose(out.amps, perp.amps, atol=1e-12)
    assert refl.query_count == 2


def test_fidelity_pure_cases():
    s0 = StateVector.basis(1, 0)
    s1 = StateVector.basis(1, 1)
    assert fidelity(s0, s0) == pytest.approx(1.0)
    assert fidelity(s0, s1) == pytest.approx(0.0)


def test_fidelity_pure_vs_mixed():
    rng = np.random.default_rng(31)
    psi = haar_random_state(2, rng)
    phi = haar_random_state(2, rng)
    rho = DensityOp.mixture([(0.3, psi), (0.7, phi)])
    want = np.sqrt(np.vdot(psi.amps, rho.matrix @ psi.amps).real)
    assert fidelity(psi, rho) == pytest.approx(want)
    assert fidelity(rho, psi) == pytest.approx(want)


def test_trace_distance_axioms():
    rng = np.random.default_rng(32)
    s0 = StateVector.basis(1, 0)
    s1 = StateVector.basis(1, 1)
    assert trace_distance(s0, s0) == pytest.approx(0.0)
    assert trace_distance(s0, s1) == pytest.approx(1.0)
    for _ in range(20):
        a = haar_random_state(2, rng)
        b = haar_random_state(2, rng)
        c = haar_random_state(2, rng)
        dab = trace_distance(a, b)
        assert dab == pytest.approx(trace_distance(b, a))
        assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12


def test_fuchs_van_de_graaf_bound():
    # D <= sqrt(1 - F^2), equality when one side is pure
    rng = np.random.default_rng(33)
    for _ in range(100):
        psi = haar_random_state(2, rng)
        phi = haar_random_state(2, rng)
        rho = DensityOp.mixture([(0.5, psi), (0.5, phi)])
        sigma = DensityOp.mixture([(0.2, haar_random_state(2, rng)), (0.8, haar_random_state(2, rng))])
        f = fidelity(rho, sigma)
        d = trace_distance(rho, sigma)
        assert d <= np.sqrt(1 - f ** 2) + 1e-9
        # pure-pure equality
        fp = fidelity(psi, phi)
        dp = trace_distance(psi, phi)
        assert dp == pytest.approx(np.sqrt(1 - fp ** 2), abs=1e-9)


def test_fidelity_triangle_style_bound():
    # if <psi|rho|psi> >= 1-eps and <phi|sigma|phi> >= 1-eps then
    # F(rho, sigma) <= |<psi|phi>| + 2 eps^{1/4}
    rng = np.random.default_rng(34)
    for _ in range(50):
        psi = haar_random_state(2, rng)
        phi = haar_random_state(2, rng)
        eps = float(rng.uniform(0.001, 0.2))
        noise1 = haar_random_state(2, rng)
        noise2 = haar_random_state(2, rng)
        rho = DensityOp.mixture([(1 - eps, psi), (eps, noise1)])
        sigma = DensityOp.mixture([(1 - eps, phi), (eps, noise2)])
        # mixture weights guarantee the premises
        assert np.vdot(psi.amps, rho.matrix @ psi.amps).real >= 1 - eps - 1e-12
        assert fidelity(rho, sigma) <= psi.overlap(phi) + 2 * eps ** 0.25 + 1e-9


def test_almost_as_good_as_new():
    # accepting measurement with prob 1-eps perturbs the state by <= sqrt(eps)
    rng = np.random.default_rng(35)
    n = 3
    for _ in range(50):
        psi = haar_random_state(n, rng)
        mask = rng.random(1 << n) < 0.7
        if not mask.any() or mask.all():
            continue
        p = Projector.from_mask(n, mask)
        post, prob = qsim.postselect_projector(p, psi, True)
        eps = 1 - prob
        if eps <= 0:
            continue
        assert trace_distance(psi, post) <= np.sqrt(eps) + 1e-9


def test_haar_moments():
    rng = np.random.default_rng(36)
    n = 4
    samples = 10_000
    vals = np.empty(samples)
    zero = StateVector.basis(n, 0)
    for i in range(samples):
        vals[i] = haar_random_state(n, rng).overlap(zero) ** 2
    mean = vals.mean()
    # E|<psi|0>|^2 = 2^-n, Var = (1-2^-n) * 2^-n / (2^n + 1) approx
    sigma = vals.std(ddof=1) / np.sqrt(samples)
    assert abs(mean - 2 ** -n) < 5 * sigma

    pair = np.empty(2000)
    for i in range(2000):
        pair[i] = haar_random_state(n, rng).overlap(haar_random_state(n, rng)) ** 2
    sigma = pair.std(ddof=1) / np.sqrt(len(pair))
    assert abs(pair.mean() - 2 ** -n) < 5 * sigma


def test_norm_validation_and_immutability():
    with pytest.raises(ValueError):
        StateVector(2, np.array([1.0, 1.0, 0, 0]))
    s = StateVector.uniform(2)
    with pytest.raises(ValueError):
        s.amps[0] = 9.0


def test_dump_load_roundtrip():
    rng = np.random.default_rng(37)
    a = f2lin.random_subspace(6, 3, rng)
    s = subspace_state(a)
    text = s.dump()
    assert text.splitlines()[0] == "n=6"
    back = StateVector.load(text)
    assert back.overlap(s) == pytest.approx(1.0, abs=1e-9)


def test_tensor_register_layout():
    # tensor puts the second factor in the high bits
    s = StateVector.basis(2, 0b01)
    t = StateVector.basis(2, 0b10)
    joint = s.tensor(t)
    assert joint.amps[0b01 | (0b10 << 2)] == pytest.approx(1.0)


def test_apply_projector_on_register():
    rng = np.random.default_rng(38)
    a = f2lin.random_subspace(4, 2, rng)
    sa = subspace_state(a)
    psi = haar_random_state(4, rng)
    joint = sa.tensor(psi)
    p = Projector.onto_state(sa)
    out0 = qsim.apply_projector_on_register(joint.amps, 4, 0, p)
    assert np.vdot(out0, out0).real == pytest.approx(1.0)  # register 0 already |A>
    out1 = qsim.apply_projector_on_register(joint.amps, 4, 1, p)
    assert np.vdot(out1, out1).real == pytest.approx(psi.overlap(sa) ** 2)
