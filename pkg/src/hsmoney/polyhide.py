"""Subspace hiding with multilinear F_2 polynomials.

A polynomial is a set of multilinear monomials (variable bitmasks); systems
are stored as stacked algebraic-normal-form coefficient tables of shape
(m, 2^n) so that truth tables, zero-count tables, and basis changes run as
vectorized XOR butterflies over all 2^n points at once. The butterfly (the
binary Moebius transform) is an involution: it maps coefficient tables to
truth tables and back.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np

from .f2lin import LinMap, Subspace, complete_to_invertible, random_subspace, rref
from .qsim import Projector, StateVector, hadamard_all, measure_projector, subspace_state


class DegreeOneAttackError(RuntimeError):
    """The linear-system attack could not assemble a spanning set."""


def xor_mobius_inplace(mat: np.ndarray) -> np.ndarray:
    """Binary Moebius transform along the last axis (involution).

    Maps ANF coefficients to truth tables and back: out[v] = XOR of in[m]
    over all m that are subsets of v.
    """
    size = mat.shape[-1]
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("last axis must have power-of-two length")
    flat = mat.reshape(-1)
    for i in range(n):
        step = 1 << i
        view = flat.reshape(-1, 2, step)
        view[:, 1, :] ^= view[:, 0, :]
    return mat


@lru_cache(maxsize=64)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int8)
    for i in range(n):
        counts += ((idx >> i) & 1).astype(np.int8)
    return counts


@lru_cache(maxsize=256)
def _allowed_masks(n: int, frame_dim: int, d: int) -> np.ndarray:
    """Monomial masks of size <= d that touch coordinates frame_dim..n-1.

    These are exactly the monomials of polynomials vanishing on the
    coordinate subspace spanned by the first frame_dim coordinates.
    """
    pc = _popcounts(n)
    idx = np.arange(1 << n, dtype=np.int64)
    high = ~((1 << frame_dim) - 1)
    return idx[(pc <= d) & ((idx & high) != 0)]


@dataclass(frozen=True)
class MultilinearPoly:
    """Multilinear polynomial over F_2: a set of monomial variable-masks."""

    n_vars: int
    degree_bound: int
    monomials: frozenset

    def __post_init__(self) -> None:
        for m in self.monomials:
            if m < 0 or m >> self.n_vars:
                raise ValueError("monomial uses variables outside the range")
            if bin(m).count("1") > self.degree_bound:
                raise ValueError("monomial exceeds the degree bound")

    @classmethod
    def from_masks(cls, n_vars: int, d: int, masks) -> "MultilinearPoly":
        return cls(n_vars, d, frozenset(int(m) for m in masks))

    @classmethod
    def zero(cls, n_vars: int, d: int) -> "MultilinearPoly":
        return cls(n_vars, d, frozenset())

    def eval(self, v: int) -> int:
        if v < 0 or v >> self.n_vars:
            raise ValueError("point does not fit the variable count")
        acc = 0
        for m in self.monomials:
            acc ^= (v & m) == m
        return acc & 1

    def coeff_row(self) -> np.ndarray:
        row = np.zeros(1 << self.n_vars, dtype=np.uint8)
        for m in self.monomials:
            row[m] = 1
        return row

    def truth_table(self) -> np.ndarray:
        return xor_mobius_inplace(self.coeff_row())

    def degree(self) -> int:
        return max((bin(m).count("1") for m in self.monomials), default=0)

    def change_basis(self, L: LinMap) -> "MultilinearPoly":
        """q with q(v) = p(Lv); degree is preserved for invertible L."""
        if L.n != self.n_vars:
            raise ValueError("map dimension mismatch")
        if not L.is_invertible():
            raise ValueError("matrix is singular")
        truth = self.truth_table()
        perm = L.permutation_table()
        coeffs = xor_mobius_inplace(truth[perm])
        return MultilinearPoly.from_masks(self.n_vars, self.degree_bound, np.flatnonzero(coeffs))


def eval_poly(p: MultilinearPoly, v: int) -> int:
    return p.eval(v)


def change_basis(p: MultilinearPoly, L: LinMap) -> MultilinearPoly:
    return p.change_basis(L)


def _vanishing_coeff_batch(
    a: Subspace, d: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """count uniform samples from the vanishing ideal, as ANF coefficient rows.

    Samples in the coordinate frame (each admissible monomial independently
    with probability 1/2), then permutes truth tables through a basis map
    sending the subspace onto the coordinate frame.
    """
    n = a.n
    if d < 1:
        raise ValueError("degree bound must be at least 1")
    allowed = _allowed_masks(n, a.dim, d)
    coeffs = np.zeros((count, 1 << n), dtype=np.uint8)
    if len(allowed):
        coeffs[:, allowed] = rng.integers(0, 2, size=(count, len(allowed)), dtype=np.uint8)
    if a.dim in (0, a.n) or a.basis == tuple(1 << i for i in range(a.dim)):
        if a.dim == a.n:
            # only the zero polynomial vanishes on the full space
            return np.zeros((count, 1 << n), dtype=np.uint8)
        return coeffs
    to_frame = complete_to_invertible(a, rng).inverse()  # maps A onto the frame
    perm = to_frame.permutation_table()
    xor_mobius_inplace(coeffs)
    gathered = np.ascontiguousarray(coeffs[:, perm])
    return xor_mobius_inplace(gathered)


def sample_vanishing(a: Subspace, d: int, rng: np.random.Generator) -> MultilinearPoly:
    """One uniform degree-<=d polynomial vanishing on the subspace."""
    row = _vanishing_coeff_batch(a, d, 1, rng)[0]
    return MultilinearPoly.from_masks(a.n, d, np.flatnonzero(row))


@dataclass
class PolySystem:
    """m multilinear polynomials, (1-eps)m of which vanish on a hidden subspace."""

    n_vars: int
    degree_bound: int
    eps: float
    hidden_dim: int
    coeffs: np.ndarray  # (m, 2^n) uint8 ANF rows
    noise_positions: Optional[Tuple[int, ...]] = None  # sampler diagnostic

    def __post_init__(self) -> None:
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != 1 << self.n_vars:
            raise ValueError("coefficient table shape mismatch")

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def beta(self) -> float:
        return self.m / self.n_vars

    @property
    def polys(self) -> List[MultilinearPoly]:
        return [
            MultilinearPoly.from_masks(self.n_vars, self.degree_bound, np.flatnonzero(row))
            for row in self.coeffs
        ]

    def standard_threshold(self) -> int:
        return math.floor(self.eps * self.m + 1e-9)

    def variant_threshold(self) -> int:
        return math.floor((1 + self.eps) * self.m / 4 + 1e-9)

    def zero_count_table(self) -> np.ndarray:
        """w(v) for every point v, as an int array of length 2^n."""
        truth = self.coeffs.copy()
        xor_mobius_inplace(truth)
        return truth.sum(axis=0, dtype=np.int32)

    def weight(self, v: int) -> int:
        if v < 0 or v >> self.n_vars:
            raise ValueError("point does not fit the variable count")
        total = 0
        for row in self.coeffs:
            masks = np.flatnonzero(row)
            total += int(((v & masks) == masks).sum() & 1)
        return total

    def is_degenerate(self) -> bool:
        return not self.coeffs.any()

    def serialize(self) -> str:
        lines = [f"n={self.n_vars} d={self.degree_bound} m={self.m} eps={self.eps!r}"]
        for row in self.coeffs:
            masks = np.flatnonzero(row)
            if len(masks) == 0:
                lines.append("-")
                continue
            terms = []
            for mask in masks:
                if mask == 0:
                    terms.append("1")
                else:
                    terms.append(".".join(f"x{i}" for i in range(self.n_vars) if (mask >> i) & 1))
            lines.append(",".join(terms))
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str, hidden_dim: Optional[int] = None) -> "PolySystem":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = dict(part.split("=", 1) for part in lines[0].split())
        n = int(head["n"])
        d = int(head["d"])
        m = int(head["m"])
        eps = float(head["eps"])
        if len(lines) - 1 != m:
            raise ValueError(f"header claims {m} polynomials, found {len(lines) - 1}")
        coeffs = np.zeros((m, 1 << n), dtype=np.uint8)
        for i, ln in enumerate(lines[1:]):
            if ln.strip() == "-":
                continue
            for term in ln.strip().split(","):
                if term == "1":
                    coeffs[i, 0] ^= 1
                else:
                    mask = 0
                    for tok in term.split("."):
                        if not tok.startswith("x"):
                            raise ValueError(f"bad monomial token {tok!r}")
                        mask |= 1 << int(tok[1:])
                    coeffs[i, mask] ^= 1
        return cls(n, d, eps, hidden_dim if hidden_dim is not None else n // 2, coeffs)


def sample_noisy_system(
    a: Subspace, d: int, m: int, eps: float, rng: np.random.Generator
) -> PolySystem:
    """floor(eps m) noisy rows (each from a fresh uniform subspace of the same
    dimension) at uniformly shuffled positions; the rest vanish on the input."""
    if not 0 <= eps < 1:
        raise ValueError("noise rate must lie in [0, 1)")
    n_noisy = math.floor(eps * m + 1e-9)
    order = rng.permutation(m)
    noisy_positions = tuple(int(i) for i in order[:n_noisy])
    coeffs = np.zeros((m, 1 << a.n), dtype=np.uint8)
    honest_positions = order[n_noisy:]
    if len(honest_positions):
        coeffs[honest_positions] = _vanishing_coeff_batch(a, d, len(honest_positions), rng)
    for pos in noisy_positions:
        decoy = random_subspace(a.n, a.dim, rng)
        coeffs[pos] = _vanishing_coeff_batch(decoy, d, 1, rng)[0]
    return PolySystem(a.n, d, eps, a.dim, coeffs, noise_positions=noisy_positions)


def _warn_if_degenerate(sys: PolySystem) -> None:
    if sys.is_degenerate():
        warnings.warn("all-zero polynomial system accepts every point", RuntimeWarning)


def zset_membership(sys: PolySystem, v: int) -> bool:
    """Standard rule: v is in Z when at most floor(eps m) polynomials hit it."""
    _warn_if_degenerate(sys)
    return sys.weight(v) <= sys.standard_threshold()


def zset_membership_variant(sys: PolySystem, v: int) -> bool:
    """High-noise rule: threshold (1 + eps) m / 4; works for any eps < 1 at the
    cost of an exponentially small completeness error."""
    _warn_if_degenerate(sys)
    return sys.weight(v) <= sys.variant_threshold()


def zset_mask(sys: PolySystem, variant: Optional[bool] = None) -> np.ndarray:
    """Boolean Z-set membership over all 2^n points.

    The standard rule keeps the hidden subspace in Z with certainty while
    eps < 1/3; beyond that the variant threshold is used.
    """
    _warn_if_degenerate(sys)
    if variant is None:
        variant = sys.eps >= 1 / 3
    thr = sys.variant_threshold() if variant else sys.standard_threshold()
    return sys.zero_count_table() <= thr


def zset_subspace(sys: PolySystem, variant: Optional[bool] = None) -> Optional[Subspace]:
    """The Z-set as a subspace, or None when it is not one."""
    mask = zset_mask(sys, variant)
    members = np.flatnonzero(mask)
    size = len(members)
    if size == 0 or size & (size - 1):
        return None
    dim = size.bit_length() - 1
    sub = Subspace.from_rows([int(x) for x in members], sys.n_vars)
    if sub.dim != dim:
        return None
    sub_mask = np.zeros(1 << sys.n_vars, dtype=np.bool_)
    sub_mask[sub.member_array()] = True
    if not np.array_equal(sub_mask, mask):
        return None
    return sub


@dataclass
class ExplicitNote:
    primal_system: PolySystem
    dual_system: PolySystem
    state: StateVector

    def serial_bytes(self) -> bytes:
        return (self.primal_system.serialize() + "--\n" + self.dual_system.serialize()).encode()


def bank_explicit_with_secret(
    n: int, d: int, eps: float, beta: float, rng: np.random.Generator
) -> Tuple[ExplicitNote, Subspace]:
    if n % 2:
        raise ValueError("ambient dimension must be even")
    m = math.ceil(beta * n)
    a = random_subspace(n, n // 2, rng)
    primal = sample_noisy_system(a, d, m, eps, rng)
    dual = sample_noisy_system(a.dual(), d, m, eps, rng)
    return ExplicitNote(primal, dual, subspace_state(a)), a


def bank_explicit(
    n: int, d: int, eps: float, beta: float, rng: np.random.Generator
) -> ExplicitNote:
    note, _ = bank_explicit_with_secret(n, d, eps, beta, rng)
    return note


def _systems_well_formed(primal: PolySystem, dual: PolySystem) -> bool:
    return (
        primal.n_vars == dual.n_vars
        and primal.degree_bound == dual.degree_bound
        and primal.m == dual.m
        and primal.eps == dual.eps
        and primal.m == math.ceil(primal.beta * primal.n_vars)
    )


def verify_explicit_post(
    note: ExplicitNote, rng: np.random.Generator
) -> Tuple[bool, StateVector]:
    """Format check, then the four-step circuit with Z-set projectors."""
    primal, dual = note.primal_system, note.dual_system
    if not _systems_well_formed(primal, dual):
        return False, note.state
    if note.state.n_qubits != primal.n_vars:
        return False, note.state
    n = primal.n_vars
    p_z = Projector.from_mask(n, zset_mask(primal))
    p_zperp = Projector.from_mask(n, zset_mask(dual))
    ok1, s, _ = measure_projector(p_z, note.state, rng)
    s = hadamard_all(s)
    ok2, s, _ = measure_projector(p_zperp, s, rng)
    s = hadamard_all(s)
    return ok1 and ok2, s


def verify_explicit(note: ExplicitNote, rng: np.random.Generator) -> bool:
    ok, _ = verify_explicit_post(note, rng)
    return ok


def degree1_attack(primal: PolySystem, dual: PolySystem) -> Subspace:
    """Recover the hidden subspace from homogeneous linear systems.

    A linear form vanishing on A is a dot product against a dual vector, so
    each dual-system row proposes a candidate member of A, screened through
    the primal system's zero-count rule. Raises when the accepted candidates
    do not span a dim-n/2 subspace.
    """
    n = primal.n_vars
    for sys in (primal, dual):
        if sys.degree_bound != 1:
            raise ValueError("attack applies to degree-1 systems only")
        pc = _popcounts(n)
        masks = np.flatnonzero(sys.coeffs.any(axis=0))
        if len(masks) and pc[masks].max() > 1:
            raise ValueError("attack applies to degree-1 systems only")
        if sys.coeffs[:, 0].any():
            raise ValueError("attack expects homogeneous systems")

    primal_weights = primal.zero_count_table()
    thr = primal.standard_threshold()
    accepted = []
    for row in dual.coeffs:
        w_vec = 0
        for mask in np.flatnonzero(row):
            w_vec |= int(mask)  # each mask is a single variable bit
        if w_vec and primal_weights[w_vec] <= thr:
            accepted.append(w_vec)
    span = rref(accepted, n)
    if len(span) < n // 2:
        raise DegreeOneAttackError(
            f"accepted vectors span only dimension {len(span)} of {n // 2}"
        )
    return Subspace(n, span)


@dataclass
class SoundnessReport:
    recovered: bool
    projection_attempts: int
    pipeline_runs: int
    collected: int


def harvest_subspace_elements(
    note: ExplicitNote,
    counterfeiter: Callable[[ExplicitNote, np.random.Generator], StateVector],
    rng: np.random.Generator,
    amplify_delta: float = 0.05,
    claimed_pass: float = 0.5,
    max_rounds: int = 200,
) -> Tuple[List[int], int]:
    """One reduction pass: counterfeit, amplify, verify twice, measure both
    registers in the standard basis. Returns measured vectors (empty when
    verification failed) and the number of amplification rounds used."""
    from .advlab import amplify_counterfeiter_state  # deferred to avoid a cycle

    n = note.primal_system.n_vars
    z_sub = zset_subspace(note.primal_system)
    if z_sub is None:
        return [], 0
    target = subspace_state(z_sub)
    doubled = counterfeiter(note, rng)
    amped, rounds = amplify_counterfeiter_state(
        doubled, target, claimed_pass, amplify_delta, rng, max_rounds=max_rounds
    )
    goal = target.tensor(target)
    ok, post, _ = measure_projector(Projector.onto_state(goal), amped, rng)
    if not ok:
        return [], rounds
    probs = np.abs(post.amps) ** 2
    idx = int(rng.choice(len(probs), p=probs / probs.sum()))
    return [idx & ((1 << n) - 1), idx >> n], rounds


def soundness_experiment(
    counterfeiter: Callable[[ExplicitNote, np.random.Generator], StateVector],
    n: int,
    rng: np.random.Generator,
    d: int = 4,
    eps: float = 0.25,
    beta: float = 12.0,
    max_pipeline_runs: int = 24,
) -> SoundnessReport:
    """Drive the recovery pipeline against a pluggable counterfeiter.

    Repeatedly: mint an instance, prepare the money state by projecting the
    uniform superposition onto the Z-set (success probability 2^{-n/2},
    retried), counterfeit, amplify, verify, and measure. Succeeds when the
    measured vectors span the hidden subspace.
    """
    note, secret = bank_explicit_with_secret(n, d, eps, beta, rng)
    mask = zset_mask(note.primal_system)
    p_z = Projector.from_mask(n, mask)
    uniform = StateVector.uniform(n)
    collected: List[int] = []
    attempts = 0
    runs = 0
    recovered = False
    for _ in range(max_pipeline_runs):
        runs += 1
        while True:
            attempts += 1
            ok, prepared, _ = measure_projector(p_z, uniform, rng)
            if ok:
                break
        run_note = ExplicitNote(note.primal_system, note.dual_system, prepared)
        vectors, _ = harvest_subspace_elements(run_note, counterfeiter, rng)
        collected.extend(vectors)
        span = rref(collected, n)
        if len(span) == secret.dim and all(secret.contains(v) for v in span):
            recovered = True
            break
    return SoundnessReport(
        recovered=recovered,
        projection_attempts=attempts,
        pipeline_runs=runs,
        collected=len(collected),
    )
