"""Private-key money: Wiesner notes and the naive-and-trusting bank, the
adaptive swap-out attack, measure-and-resend / optimized cloning baselines,
and the keyed hidden-subspace variant that resists the adaptive attack.

Wiesner qubits stay inside the four-state family {|0>, |1>, |+>, |->} under
every operation used here (bank measurements collapse onto recorded bases,
attackers insert fresh family states), so notes are held as int codes with
exact transition probabilities.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from . import config
from .f2lin import Subspace, random_subspace
from .qsim import Projector, StateVector, measure_projector, subspace_state

# BB84 codes: 0 -> |0>, 1 -> |1>, 2 -> |+>, 3 -> |->
BB84_VECTORS = (
    np.array([1.0, 0.0], dtype=np.complex128),
    np.array([0.0, 1.0], dtype=np.complex128),
    np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2),
    np.array([1.0, -1.0], dtype=np.complex128) / math.sqrt(2),
)

_ORTH = {0: 1, 1: 0, 2: 3, 3: 2}


def overlap2(a: int, b: int) -> Fraction:
    """|<a|b>|^2 on the four-state family, exactly."""
    if a == b:
        return Fraction(1)
    if _ORTH[a] == b:
        return Fraction(0)
    return Fraction(1, 2)


@dataclass
class WiesnerNote:
    serial: bytes
    qubits: List[int]


class NaiveBank:
    """Wiesner bank that verifies in the recorded bases and hands the
    post-measurement qubits back, accepted or not."""

    def __init__(self, n: int):
        self.n = n
        self._records: Dict[bytes, Tuple[int, ...]] = {}
        self.verify_queries = 0

    def mint(self, rng: np.random.Generator) -> WiesnerNote:
        serial = rng.bytes(8)
        while serial in self._records:
            serial = rng.bytes(8)
        record = tuple(int(q) for q in rng.integers(0, 4, size=self.n))
        self._records[serial] = record
        return WiesnerNote(serial, list(record))

    def record_for(self, serial: bytes) -> Tuple[int, ...]:
        return self._records[serial]

    def verify(
        self, serial: bytes, qubits: Sequence[int], rng: np.random.Generator
    ) -> Tuple[bool, List[int]]:
        """Measure every qubit in its recorded basis; accept iff all outcomes
        match; always return the post-measurement qubits."""
        if serial not in self._records:
            raise KeyError("unknown serial")
        self.verify_queries += 1
        record = self._records[serial]
        ok = True
        post: List[int] = []
        for r, c in zip(record, qubits):
            if rng.random() < float(overlap2(r, c)):
                post.append(r)
            else:
                post.append(_ORTH[r])
                ok = False
        return ok, post


def wiesner_bank(n: int, rng: np.random.Generator) -> Tuple[NaiveBank, WiesnerNote]:
    bank = NaiveBank(n)
    return bank, bank.mint(rng)


def wiesner_verify(
    bank: NaiveBank, serial: bytes, qubits: Sequence[int], rng: np.random.Generator
) -> Tuple[bool, List[int]]:
    return bank.verify(serial, qubits, rng)


# ---------------------------------------------------------------------------
# cloning baselines


def measure_resend_clone(
    note: WiesnerNote, rng: np.random.Generator
) -> Tuple[WiesnerNote, WiesnerNote]:
    """Measure every qubit in the computational basis and resend two copies."""
    copies: List[int] = []
    for c in note.qubits:
        if c in (0, 1):
            copies.append(c)
        else:
            copies.append(int(rng.integers(0, 2)))
    return WiesnerNote(note.serial, list(copies)), WiesnerNote(note.serial, list(copies))


naive_clone_attack = measure_resend_clone


def measure_resend_per_qubit_exact() -> Fraction:
    """Both-copies-pass probability per qubit, enumerated over the 4 states."""
    total = Fraction(0)
    for r in range(4):
        for outcome in (0, 1):
            p_outcome = overlap2(r, outcome)
            total += p_outcome * overlap2(r, outcome) * overlap2(r, outcome)
    return total / 4


def random_guess_per_qubit_exact() -> Fraction:
    """Accept probability per qubit for a uniformly random four-state guess."""
    total = Fraction(0)
    for r in range(4):
        for g in range(4):
            total += overlap2(r, g)
    return total / 16


def _isometry_from_params(x: np.ndarray, out_dim: int) -> np.ndarray:
    m = (x[: out_dim * 2] + 1j * x[out_dim * 2 :]).reshape(out_dim, 2)
    q, _ = np.linalg.qr(m)
    return q[:, :2]


def _cloner_score(v: np.ndarray, ancilla: int) -> float:
    total = 0.0
    for theta in BB84_VECTORS:
        out = (v @ theta).reshape(2, 2, ancilla)
        kept = np.einsum("i,j,ija->a", theta.conj(), theta.conj(), out)
        total += float(np.vdot(kept, kept).real)
    return total / 4


@dataclass
class ClonerSearchResult:
    value: float
    isometry: np.ndarray
    ancilla_dim: int
    restarts_used: int


def optimize_cloning_channel(
    rng: np.random.Generator,
    restarts: int = config.CLONER_RESTARTS,
    ancilla_dim: int = 2,
    stop_at: float = 0.7499,
) -> ClonerSearchResult:
    """Derivative-free search over isometries C^2 -> C^2 x C^2 x C^ancilla
    maximizing the average both-copies-pass probability on the four states.

    This is an experiment, not a guarantee; the search restarts from random
    points and stops early once the known ceiling is essentially reached.
    """
    out_dim = 4 * ancilla_dim
    best_val = -1.0
    best_v = None
    used = 0
    for _ in range(max(1, restarts)):
        used += 1
        x0 = rng.normal(size=out_dim * 4)
        res = minimize(
            lambda x: -_cloner_score(_isometry_from_params(x, out_dim), ancilla_dim),
            x0,
            method="Powell",
            options={"maxiter": 20000, "xtol": 1e-10, "ftol": 1e-12},
        )
        if -res.fun > best_val:
            best_val = -res.fun
            best_v = _isometry_from_params(res.x, out_dim)
        if best_val >= stop_at:
            break
    return ClonerSearchResult(best_val, best_v, ancilla_dim, used)


# ---------------------------------------------------------------------------
# adaptive swap-out attack


def default_samples_per_candidate(n: int) -> int:
    return math.ceil(8 * math.log2(4 * n))


@dataclass
class AdaptiveAttackResult:
    recovered: List[int]
    rates: np.ndarray  # (n, 4) estimated pass rates
    queries: int


def adaptive_attack(
    bank: NaiveBank,
    note: WiesnerNote,
    samples_per_candidate: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> AdaptiveAttackResult:
    """Recover the note qubit by qubit by swapping in candidate states.

    For qubit i and candidate b, the attacker submits the note with its own
    fresh |b> in slot i (keeping the original qubit aside) and estimates the
    acceptance rate; the bank measures the other qubits in their correct
    bases, so they come back undamaged and the same note serves every query.
    """
    if rng is None:
        raise ValueError("a generator is required")
    n = bank.n
    samples = samples_per_candidate or default_samples_per_candidate(n)
    before = bank.verify_queries
    rates = np.zeros((n, 4))
    for i in range(n):
        kept = note.qubits[i]
        for b in range(4):
            hits = 0
            for _ in range(samples):
                probe = list(note.qubits)
                probe[i] = b
                ok, post = bank.verify(note.serial, probe, rng)
                hits += ok
                # reclaim everything except the sacrificed candidate slot
                note.qubits = post
                note.qubits[i] = kept
            rates[i, b] = hits / samples
        note.qubits[i] = kept
    recovered = [int(np.argmax(rates[i])) for i in range(n)]
    return AdaptiveAttackResult(recovered, rates, bank.verify_queries - before)


# ---------------------------------------------------------------------------
# keyed-subspace variant


class KeyedSubspaceBank:
    """Private-key scheme whose notes are hidden-subspace states derived from
    a keyed function of the serial; verification is the rank-1 projector and
    returns the post-measurement state.

    Backends: "prf" expands a keyed hash into basis rows (rejection-resampled
    to full rank); "random" lazily samples and memoizes a true random
    function. Swapping backends changes no observable statistics at test
    sample sizes.
    """

    def __init__(self, n: int, key: bytes, backend: str = "prf",
                 rng: Optional[np.random.Generator] = None):
        if n % 2:
            raise ValueError("ambient dimension must be even")
        if backend not in ("prf", "random"):
            raise ValueError("backend must be 'prf' or 'random'")
        self.n = n
        self.key = key
        self.backend = backend
        self._memo: Dict[bytes, Subspace] = {}
        self._lazy_rng = rng
        self.verify_queries = 0

    def subspace_for(self, serial: bytes) -> Subspace:
        sub = self._memo.get(serial)
        if sub is None:
            if self.backend == "prf":
                digest = hashlib.sha256(self.key + b"|" + serial).digest()
                local = np.random.default_rng(int.from_bytes(digest, "big"))
                sub = random_subspace(self.n, self.n // 2, local)
            else:
                if self._lazy_rng is None:
                    raise ValueError("random backend needs a generator")
                sub = random_subspace(self.n, self.n // 2, self._lazy_rng)
            self._memo[serial] = sub
        return sub

    def mint(self, rng: np.random.Generator) -> Tuple[bytes, StateVector]:
        serial = rng.bytes((self.n + 7) // 8)
        return serial, subspace_state(self.subspace_for(serial))

    def verify(
        self, serial: bytes, state: StateVector, rng: np.random.Generator
    ) -> Tuple[bool, StateVector]:
        self.verify_queries += 1
        target = subspace_state(self.subspace_for(serial))
        ok, post, _ = measure_projector(Projector.onto_state(target), state, rng)
        return ok, post

    def verify_note_register(
        self, serial: bytes, joint: StateVector, rng: np.random.Generator
    ) -> Tuple[bool, StateVector]:
        """Verify qubits 0..n-1 of a larger register, leaving the rest alone."""
        self.verify_queries += 1
        target = subspace_state(self.subspace_for(serial)).amps
        rows = joint.amps.reshape(-1, 1 << self.n)
        coeff = rows @ np.conj(target)
        prob = min(1.0, float(np.vdot(coeff, coeff).real))
        if rng.random() < prob:
            post = np.kron(coeff / math.sqrt(prob), target)
            return True, StateVector._wrap(joint.n_qubits, post)
        rest = rows - np.outer(coeff, target)
        rest /= np.linalg.norm(rest)
        return False, StateVector._wrap(joint.n_qubits, rest.reshape(-1))


def keyed_bank(bank: KeyedSubspaceBank, rng: np.random.Generator) -> Tuple[bytes, StateVector]:
    return bank.mint(rng)


def keyed_verify(
    bank: KeyedSubspaceBank, serial: bytes, state: StateVector, rng: np.random.Generator
) -> Tuple[bool, StateVector]:
    return bank.verify(serial, state, rng)


def _swap_qubits(amps: np.ndarray, n_qubits: int, q1: int, q2: int) -> np.ndarray:
    if q1 == q2:
        return amps
    idx = np.arange(len(amps))
    b1 = (idx >> q1) & 1
    b2 = (idx >> q2) & 1
    swapped = idx ^ ((b1 ^ b2) << q1) ^ ((b1 ^ b2) << q2)
    return amps[swapped]


def _insert_candidate(state: StateVector, i: int, code: int) -> StateVector:
    """Move qubit i to a fresh top ancilla and put the candidate state at i."""
    n = state.n_qubits
    anc = StateVector(1, BB84_VECTORS[code].copy())
    joint = state.tensor(anc)  # ancilla is qubit n
    return StateVector._wrap(n + 1, _swap_qubits(joint.amps, n + 1, i, n))


def _discard_top_qubit(state: StateVector, rng: np.random.Generator) -> StateVector:
    """Trace out the top qubit by measuring it in the computational basis."""
    n = state.n_qubits
    half = 1 << (n - 1)
    low = state.amps[:half]
    high = state.amps[half:]
    p0 = float(np.vdot(low, low).real)
    if rng.random() < p0:
        kept = low / math.sqrt(p0)
    else:
        kept = high / math.sqrt(max(1e-300, 1.0 - p0))
    return StateVector._wrap(n - 1, np.array(kept))


def transplanted_adaptive_attack(
    bank: KeyedSubspaceBank,
    serial: bytes,
    state: StateVector,
    samples_per_candidate: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> AdaptiveAttackResult:
    """The swap-out attack run verbatim against the keyed-subspace scheme.

    The attacker pockets qubit i, inserts a fresh candidate, submits, and
    puts the pocketed qubit back (discarding the returned candidate slot).
    Projective verification collapses the whole register on every rejection,
    so candidate pass rates carry no per-qubit signal.
    """
    if rng is None:
        raise ValueError("a generator is required")
    n = bank.n
    samples = samples_per_candidate or default_samples_per_candidate(n)
    before = bank.verify_queries
    rates = np.zeros((n, 4))
    current = state
    for i in range(n):
        for b in range(4):
            hits = 0
            for _ in range(samples):
                probe = _insert_candidate(current, i, b)
                ok, post = bank.verify_note_register(serial, probe, rng)
                hits += ok
                restored = _swap_qubits(post.amps, n + 1, i, n)
                current = _discard_top_qubit(StateVector._wrap(n + 1, restored), rng)
            rates[i, b] = hits / samples
    recovered = [int(np.argmax(rates[i])) for i in range(n)]
    return AdaptiveAttackResult(recovered, rates, bank.verify_queries - before)
