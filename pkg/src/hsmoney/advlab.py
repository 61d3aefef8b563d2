"""Empirical adversary laboratory.

Tracks the cross-oracle inner-product progress measure of oracle-parametric
probe algorithms, amplifies weak counterfeiters into strong ones with the
monotone fixed-point backend, and measures the query cost of cloning by
search (single-target and k-copy variants).

Lower bounds are not "tested" here: the per-query progress bound is checked
because it is universally quantified (a violation would be a bug), and the
cloning costs are checked from the upper-bound side only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import config
from .f2lin import Subspace, random_subspace
from .money import Banknote, MiniScheme
from .qsim import (
    Projector,
    ReflectAboutState,
    StateVector,
    haar_random_state,
    hadamard_all,
    measure_projector,
    oracle_for_dual_pair,
    subspace_state,
)


# ---------------------------------------------------------------------------
# pair relations and the progress tracker


@dataclass
class PairSample:
    oracle_u: object
    oracle_v: object
    init_u: StateVector
    init_v: StateVector
    meta: dict


class SubspaceNeighborRelation:
    """Pairs (U, V) of combined subspace oracles over n+1 bits whose hidden
    subspaces intersect in dimension n/2 - 1; initial states are the two
    money states. The cross-fidelity bound for this relation is 2^{-n/2}."""

    def __init__(self, n: int):
        if n % 2:
            raise ValueError("ambient dimension must be even")
        self.n = n
        self.eps_bound = 2.0 ** (-n // 2)

    def sample(self, rng: np.random.Generator) -> PairSample:
        n = self.n
        a = random_subspace(n, n // 2, rng)
        b = self._neighbor(a, rng)
        init_u = self._lifted_state(a)
        init_v = self._lifted_state(b)
        return PairSample(
            oracle_u=oracle_for_dual_pair(a, "U_A*"),
            oracle_v=oracle_for_dual_pair(b, "U_B*"),
            init_u=init_u,
            init_v=init_v,
            meta={"subspace_u": a, "subspace_v": b},
        )

    def _neighbor(self, a: Subspace, rng: np.random.Generator) -> Subspace:
        # random hyperplane of A, then adjoin a vector from outside A
        members = a.member_array()
        while True:
            rows = [int(members[rng.integers(0, len(members))]) for _ in range(a.dim - 1)]
            core = Subspace.from_rows(rows, a.n)
            if core.dim == a.dim - 1:
                break
        while True:
            x = int(rng.integers(0, 1 << a.n))
            if not a.contains(x):
                return Subspace.from_rows(list(core.basis) + [x], a.n)

    def _lifted_state(self, a: Subspace) -> StateVector:
        base = subspace_state(a)
        amps = np.zeros(1 << (a.n + 1), dtype=np.complex128)
        amps[: 1 << a.n] = base.amps
        return StateVector._wrap(a.n + 1, amps)


class HaarPairRelation:
    """Pairs of rank-1 reflection oracles about Haar states at fixed overlap c."""

    def __init__(self, n: int, c: float = 0.5):
        if not 0 < c < 1:
            raise ValueError("overlap must lie in (0, 1)")
        self.n = n
        self.c = c
        self.eps_bound = (1 - c ** 2) / ((1 << n) - 1)

    def sample(self, rng: np.random.Generator) -> PairSample:
        psi = haar_random_state(self.n, rng)
        chi = haar_random_state(self.n, rng)
        ortho = chi.amps - psi.inner(chi) * psi.amps
        ortho /= np.linalg.norm(ortho)
        phi = StateVector(self.n, self.c * psi.amps + math.sqrt(1 - self.c ** 2) * ortho)
        return PairSample(
            oracle_u=ReflectAboutState(psi, "U_psi"),
            oracle_v=ReflectAboutState(phi, "U_phi"),
            init_u=psi,
            init_v=phi,
            meta={"overlap": self.c},
        )


@dataclass
class ProgressTrace:
    """Per-query averages p_t = E |<Psi_t^U | Psi_t^V>|; p_values[0] is p_0."""

    p_values: List[float]
    eps_bound: float
    stderr: List[float] = field(default_factory=list)

    @property
    def drops(self) -> List[float]:
        return [
            self.p_values[t] - self.p_values[t + 1] for t in range(len(self.p_values) - 1)
        ]

    @property
    def max_drop(self) -> float:
        return max(self.drops, default=0.0)

    @property
    def drop_bound(self) -> float:
        return 4 * math.sqrt(self.eps_bound)


class Probe:
    """Oracle-parametric circuit: same gates, different oracle.

    run_pair returns |<Psi_t^U|Psi_t^V>| for t = 0..queries; unitaries
    applied between queries are shared by both runs, so snapshots taken
    right after each query capture the full inner-product evolution.
    """

    name = "probe"
    queries = 0

    def run_pair(self, sample: PairSample, rng: np.random.Generator) -> List[float]:
        raise NotImplementedError


class IdleProbe(Probe):
    name = "idle"
    queries = 0

    def run_pair(self, sample: PairSample, rng: np.random.Generator) -> List[float]:
        return [sample.init_u.overlap(sample.init_v)]


class OracleEchoProbe(Probe):
    """Alternates the oracle with the full Hadamard transform."""

    name = "oracle-echo"

    def __init__(self, queries: int = 6):
        self.queries = queries

    def run_pair(self, sample: PairSample, rng: np.random.Generator) -> List[float]:
        su, sv = sample.init_u, sample.init_v
        out = [su.overlap(sv)]
        for _ in range(self.queries):
            su = hadamard_all(sample.oracle_u.apply(su))
            sv = hadamard_all(sample.oracle_v.apply(sv))
            out.append(su.overlap(sv))
        return out


class ScrambleProbe(Probe):
    """Oracle followed by a fixed random phase-mix unitary (diagonal, Hadamard,
    diagonal); the unitary is drawn once per pair and shared by both runs."""

    name = "scramble"

    def __init__(self, queries: int = 6):
        self.queries = queries

    def run_pair(self, sample: PairSample, rng: np.random.Generator) -> List[float]:
        dim = len(sample.init_u.amps)
        d1 = np.exp(2j * np.pi * rng.random(dim))
        d2 = np.exp(2j * np.pi * rng.random(dim))

        def mix(s: StateVector) -> StateVector:
            return StateVector._wrap(
                s.n_qubits, d2 * hadamard_all(StateVector._wrap(s.n_qubits, d1 * s.amps)).amps
            )

        su, sv = sample.init_u, sample.init_v
        out = [su.overlap(sv)]
        for _ in range(self.queries):
            su = mix(sample.oracle_u.apply(su))
            sv = mix(sample.oracle_v.apply(sv))
            out.append(su.overlap(sv))
        return out


class CloneSearchProbe(Probe):
    """Grover-style search for a fresh money state in a second register.

    The held note is untouched, so the joint inner product factorizes into
    the constant note overlap times the active-register overlap.
    """

    name = "clone-search"

    def __init__(self, queries: int = 8):
        self.queries = queries

    def run_pair(self, sample: PairSample, rng: np.random.Generator) -> List[float]:
        held = sample.init_u.overlap(sample.init_v)
        n = sample.init_u.n_qubits
        uniform = StateVector.uniform(n)

        def diffuse(s: StateVector) -> StateVector:
            c = np.vdot(uniform.amps, s.amps)
            return StateVector._wrap(n, 2.0 * c * uniform.amps - s.amps)

        au, av = uniform, uniform
        out = [held * au.overlap(av)]
        for _ in range(self.queries):
            au = diffuse(sample.oracle_u.apply(au))
            av = diffuse(sample.oracle_v.apply(av))
            out.append(held * au.overlap(av))
        return out


def default_probes() -> List[Probe]:
    return [IdleProbe(), OracleEchoProbe(6), ScrambleProbe(6), CloneSearchProbe(8)]


def track_progress(
    probe: Probe, relation, trials: int, rng: np.random.Generator
) -> ProgressTrace:
    """Average the cross-oracle inner product after every query over sampled
    oracle pairs; reports standard errors alongside."""
    rows: Optional[np.ndarray] = None
    for i in range(trials):
        sample = relation.sample(rng)
        vals = np.asarray(probe.run_pair(sample, rng))
        if rows is None:
            rows = np.empty((trials, len(vals)))
        rows[i] = vals
    assert rows is not None
    means = rows.mean(axis=0)
    sems = rows.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros_like(means)
    return ProgressTrace(list(map(float, means)), relation.eps_bound, list(map(float, sems)))


# ---------------------------------------------------------------------------
# counterfeiter amplification


class TwoPointUnitary:
    """Unitary sending a designated unit vector exactly to another.

    Acts as a 2x2 rotation on the span of the two vectors and as the
    identity on its orthogonal complement, so applications cost O(dim).
    """

    def __init__(self, src: StateVector, dst: StateVector):
        self.n_qubits = src.n_qubits
        a = src.amps
        t = complex(np.vdot(a, dst.amps))
        w = dst.amps - t * a
        s = float(np.linalg.norm(w))
        self._u1 = a
        if s < 1e-12:
            # destination is a phase multiple of the source
            self._u2 = None
            self._v = np.array([[t, 0.0], [0.0, np.conj(t)]], dtype=np.complex128)
        else:
            self._u2 = w / s
            self._v = np.array([[t, -s], [s, np.conj(t)]], dtype=np.complex128)

    def _apply_block(self, amps: np.ndarray, block: np.ndarray) -> np.ndarray:
        c1 = np.vdot(self._u1, amps)
        c2 = np.vdot(self._u2, amps) if self._u2 is not None else 0.0
        d1 = block[0, 0] * c1 + block[0, 1] * c2
        d2 = block[1, 0] * c1 + block[1, 1] * c2
        out = amps - c1 * self._u1 + d1 * self._u1
        if self._u2 is not None:
            out = out - c2 * self._u2 + d2 * self._u2
        return out

    def apply(self, s: StateVector) -> StateVector:
        return StateVector._wrap(s.n_qubits, self._apply_block(s.amps, self._v))

    def apply_inverse(self, s: StateVector) -> StateVector:
        return StateVector._wrap(s.n_qubits, self._apply_block(s.amps, self._v.conj().T))


def _orthogonal_partner(target: StateVector) -> StateVector:
    """A unit vector orthogonal to the target (basis state when possible)."""
    amps = target.amps
    j = int(np.argmin(np.abs(amps)))
    if abs(amps[j]) < 1e-12:
        return StateVector.basis(target.n_qubits, j)
    e = np.zeros_like(amps)
    e[j] = 1.0
    w = e - np.conj(amps[j]) * amps
    return StateVector(target.n_qubits, w / np.linalg.norm(w))


class Counterfeiter:
    """Unitary circuit on the doubled register with a query counter."""

    name = "counterfeiter"

    def __init__(self):
        self.query_count = 0

    def charge(self, k: int = 1) -> None:
        self.query_count += k

    def apply(self, s: StateVector) -> StateVector:
        raise NotImplementedError

    def apply_inverse(self, s: StateVector) -> StateVector:
        raise NotImplementedError


class PlantedCloner(Counterfeiter):
    """Test fixture built from the scheme's secret: maps |psi>|0> to
    |psi> (cos(gamma) |psi> + sin(gamma) |junk>)."""

    name = "planted-cloner"

    def __init__(self, target: StateVector, pass2: float):
        super().__init__()
        if not 0 <= pass2 <= 1:
            raise ValueError("double-verification pass rate must lie in [0, 1]")
        n = target.n_qubits
        src = target.tensor(StateVector.basis(n, 0))
        cos_g = math.sqrt(pass2)  # amplitude of the clean copy in the second register
        junk = _orthogonal_partner(target)
        second = cos_g * target.amps + math.sqrt(1 - cos_g ** 2) * junk.amps
        dst = target.tensor(StateVector(n, second / np.linalg.norm(second)))
        self._u = TwoPointUnitary(src, dst)

    def apply(self, s: StateVector) -> StateVector:
        self.charge()
        return self._u.apply(s)

    def apply_inverse(self, s: StateVector) -> StateVector:
        self.charge()
        return self._u.apply_inverse(s)


class JunkEmitter(Counterfeiter):
    """Outputs a fixed state orthogonal to the doubled target."""

    name = "junk-emitter"

    def __init__(self, target: StateVector):
        super().__init__()
        junk = _orthogonal_partner(target)
        src = target.tensor(StateVector.basis(target.n_qubits, 0))
        dst = junk.tensor(junk)
        self._u = TwoPointUnitary(src, dst)

    def apply(self, s: StateVector) -> StateVector:
        self.charge()
        return self._u.apply(s)

    def apply_inverse(self, s: StateVector) -> StateVector:
        self.charge()
        return self._u.apply_inverse(s)


@dataclass
class AmplifyResult:
    state: StateVector
    queries: int
    rounds: int
    converged: bool


def amplify_counterfeiter(
    c: Counterfeiter,
    scheme: MiniScheme,
    note: Banknote,
    eps: float,
    delta: float,
    rng: np.random.Generator,
) -> AmplifyResult:
    """Boost a counterfeiter with double-verification pass rate >= eps to one
    passing with probability >= 1 - delta.

    C(|note>|0>) is the start state and the doubled verification target the
    goal; the backend is the monotone fixed-point search, or the randomized
    hybrid schedule when delta >= 2 sqrt(eps) makes it cheaper. Each goal
    measurement is a double verification (two verifier queries); reflecting
    about or restoring the start state costs one C, one C inverse, and one
    verifier query.
    """
    target = scheme.target_state(note.serial)
    if target is None:
        raise ValueError("amplification needs a projective scheme")
    n = scheme.n
    blank = StateVector.basis(n, 0)
    init = c.apply(note.state.tensor(blank))
    goal_state = target.tensor(target)
    goal = Projector.onto_state(goal_state)
    start_fidelity = goal_state.overlap(init)
    if start_fidelity ** 2 < eps * 0.5:
        warnings.warn(
            f"claimed pass rate {eps} looks violated (measured fidelity^2 "
            f"{start_fidelity ** 2:.4f})",
            RuntimeWarning,
        )
    eps_fid = math.sqrt(eps)
    if delta >= 2 * eps_fid:
        return _amplify_hybrid(c, init, goal_state, eps_fid, delta, rng)
    rounds_budget = max(1, math.ceil(math.log(1 / delta) / (config.FIXED_POINT_RATE * eps_fid ** 2)))
    restore = Projector.onto_state(init)
    ver_queries = 0
    s = init
    converged = False
    rounds = 0
    for _ in range(rounds_budget):
        rounds += 1
        ok, s, _ = measure_projector(goal, s, rng)
        ver_queries += 2
        if ok:
            converged = True
            break
        _, s, _ = measure_projector(restore, s, rng)
        c.charge(2)  # one forward and one inverse call
        ver_queries += 1
    return AmplifyResult(state=s, queries=ver_queries + c.query_count, rounds=rounds, converged=converged)


def _amplify_hybrid(
    c: Counterfeiter,
    init: StateVector,
    goal_state: StateVector,
    eps_fid: float,
    delta: float,
    rng: np.random.Generator,
) -> AmplifyResult:
    """Hybrid-schedule amplification for the delta >= 2 sqrt(eps) regime.

    The search's init-oracle calls translate to one C, one C inverse, and one
    verifier query each (reflecting about C's output); goal calls are double
    verifications.
    """
    from .search import SearchParams, SearchProblem, hybrid_search

    problem = SearchProblem.with_state_goal(init, goal_state)
    params = SearchParams(eps=eps_fid, delta=delta)
    trace: dict = {}
    out, _ = hybrid_search(problem, params, rng, trace=trace)
    init_calls = problem.init_reflection.query_count
    goal_calls = problem.goal_reflection.query_count
    c.charge(2 * init_calls)
    ver_queries = 2 * goal_calls + init_calls
    converged = goal_state.overlap(out) >= 1 - delta
    return AmplifyResult(
        state=out,
        queries=ver_queries + c.query_count,
        rounds=trace.get("rounds", 0),
        converged=converged,
    )


def amplify_counterfeiter_state(
    doubled: StateVector,
    target: StateVector,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    max_rounds: int = 200,
) -> Tuple[StateVector, int]:
    """State-level fixed-point amplification toward target x target."""
    goal = Projector.onto_state(target.tensor(target))
    restore = Projector.onto_state(doubled)
    eps_fid = math.sqrt(max(eps, 1e-6))
    budget = min(
        max_rounds,
        max(1, math.ceil(math.log(1 / delta) / (config.FIXED_POINT_RATE * eps_fid ** 2))),
    )
    s = doubled
    rounds = 0
    for _ in range(budget):
        rounds += 1
        ok, s, _ = measure_projector(goal, s, rng)
        if ok:
            break
        _, s, _ = measure_projector(restore, s, rng)
    return s, rounds


def amplification_budget(eps: float, delta: float) -> float:
    """Reference query budget: K log(1/delta) / (sqrt(eps) (sqrt(eps) + delta^2))."""
    return config.AMPLIFY_QUERY_K * math.log(1 / delta) / (
        math.sqrt(eps) * (math.sqrt(eps) + delta ** 2)
    )


# ---------------------------------------------------------------------------
# cloning experiments


@dataclass
class CloneRunResult:
    queries: int
    attempts: int
    fidelity: float


def clone_by_search(
    target_oracle: ReflectAboutState,
    n: int,
    rng: np.random.Generator,
    overlap_guess: Optional[float] = None,
    max_attempts: int = 64,
) -> Tuple[StateVector, int]:
    """Prepare the oracle's target by amplitude amplification from the
    uniform superposition, retrying with fresh starts on failure.

    The diffusion about the uniform state is query-free; each iteration
    charges one target-oracle call, and each final check charges one more.
    """
    uniform = StateVector.uniform(n)
    if overlap_guess is None:
        overlap_guess = 2.0 ** (-n / 2)
    theta = math.asin(min(1.0, overlap_guess))
    t_star = max(0, round(math.pi / (4 * theta) - 0.5))
    goal = Projector.onto_state(target_oracle.target, charge_to=target_oracle)

    def diffuse(s: StateVector) -> StateVector:
        cc = np.vdot(uniform.amps, s.amps)
        return StateVector._wrap(n, 2.0 * cc * uniform.amps - s.amps)

    before = target_oracle.query_count
    for attempt in range(1, max_attempts + 1):
        s = uniform
        for _ in range(t_star):
            s = diffuse(target_oracle.apply(s))
        ok, s, _ = measure_projector(goal, s, rng)
        if ok:
            return s, target_oracle.query_count - before
    return s, target_oracle.query_count - before


def clone_run(
    target: StateVector, rng: np.random.Generator, overlap_guess: Optional[float] = None
) -> CloneRunResult:
    oracle = ReflectAboutState(target, "U_target")
    state, queries = clone_by_search(oracle, target.n_qubits, rng, overlap_guess)
    return CloneRunResult(queries=queries, attempts=0, fidelity=state.overlap(target))


@dataclass
class KCopyReport:
    n: int
    k: int
    queries: List[int]

    @property
    def median_queries(self) -> float:
        return float(np.median(self.queries))


def kcopy_run(n: int, k: int, rng: np.random.Generator, max_attempts: int = 256) -> int:
    """Query cost of producing copy k+1 from k held copies of a Haar state.

    Symmetrizing the k copies with a fresh uniform register boosts the
    initial goal overlap by sqrt(k+1); the amplification then runs exactly
    in the two-dimensional span of the start and goal states, with one
    target-oracle query charged per iteration and per final check.
    The symmetrization itself is query-free.
    """
    queries = 0
    for _ in range(max_attempts):
        psi = haar_random_state(n, rng)
        alpha = abs(StateVector.uniform(n).inner(psi))
        beta = math.sqrt(max(0.0, 1 - alpha ** 2))
        boosted = alpha * math.sqrt(k + 1) / math.sqrt((k + 1) * alpha ** 2 + beta ** 2)
        theta = math.asin(min(1.0, boosted))
        guess = math.asin(min(1.0, 2.0 ** (-n / 2) * math.sqrt(k + 1)))
        t_star = max(0, round(math.pi / (4 * guess) - 0.5))
        queries += t_star + 1
        if rng.random() < math.sin((2 * t_star + 1) * theta) ** 2:
            return queries
    return queries


def kcopy_experiment(n: int, k: int, rng: np.random.Generator, trials: int = 40) -> KCopyReport:
    if n > config.qubit_cap():
        raise ValueError("register size exceeds the simulator cap")
    return KCopyReport(n=n, k=k, queries=[kcopy_run(n, k, rng) for _ in range(trials)])
