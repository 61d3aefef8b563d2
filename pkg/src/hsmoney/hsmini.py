"""Hidden-subspace mini-scheme backed by a four-part classical oracle.

The oracle bundle holds a banknote generator G (r -> serial, subspace), a
serial checker H, and serial-indexed primal/dual subspace testers. G is
materialized lazily and memoized per r; serial collisions are resampled so
serials stay pairwise distinct. Verification runs the four-step circuit
project / transform / project / transform, charging exactly one primal and
one dual oracle query.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import config
from .f2lin import LinMap, Subspace, random_invertible, random_subspace, image
from .money import Banknote, MiniScheme
from .qsim import (
    PhaseOracle,
    Projector,
    StateVector,
    hadamard_all,
    measure_projector,
    subspace_state,
    walsh_hadamard_raw,
)


def _serial_nbytes(n: int) -> int:
    return (3 * n + 7) // 8


def _sample_serial(n: int, rng: np.random.Generator) -> bytes:
    nbits = 3 * n
    raw = bytearray(rng.bytes(_serial_nbytes(n)))
    extra = 8 * len(raw) - nbits
    if extra:
        raw[0] &= 0xFF >> extra
    return bytes(raw)


@dataclass
class BundleEntry:
    r: int
    serial: bytes
    subspace: Subspace


class OracleBundle:
    """Lazily populated random banknote world over F_2^n, n even."""

    def __init__(self, n: int, rng: np.random.Generator):
        if n % 2:
            raise ValueError("ambient dimension must be even")
        if n > config.qubit_cap():
            raise ValueError("ambient dimension exceeds the simulator cap")
        self.n = n
        self._rng = rng
        self._lock = threading.Lock()
        self._by_r: Dict[int, BundleEntry] = {}
        self._by_serial: Dict[bytes, BundleEntry] = {}
        self._primal: Dict[bytes, PhaseOracle] = {}
        self._dual: Dict[bytes, PhaseOracle] = {}
        self.g_queries = 0
        self.h_queries = 0

    def generator(self, r: int) -> Tuple[bytes, Subspace]:
        """G(r): independent uniform (serial, dim-n/2 subspace) per fresh r."""
        self.g_queries += 1
        entry = self._entry(r)
        return entry.serial, entry.subspace

    def _entry(self, r: int) -> BundleEntry:
        if not 0 <= r < (1 << self.n):
            raise ValueError("r outside {0,1}^n")
        with self._lock:
            entry = self._by_r.get(r)
            if entry is None:
                serial = _sample_serial(self.n, self._rng)
                while serial in self._by_serial:
                    serial = _sample_serial(self.n, self._rng)
                entry = BundleEntry(r, serial, random_subspace(self.n, self.n // 2, self._rng))
                self._by_r[r] = entry
                self._by_serial[serial] = entry
        return entry

    def check_serial(self, serial: bytes) -> bool:
        """H(s): 1 exactly on issued serial numbers."""
        self.h_queries += 1
        return serial in self._by_serial

    def lookup(self, serial: bytes) -> Optional[BundleEntry]:
        return self._by_serial.get(serial)

    def primal_oracle(self, serial: bytes) -> PhaseOracle:
        """Phase oracle for the serial's subspace; identity on invalid serials."""
        oracle = self._primal.get(serial)
        if oracle is None:
            entry = self._by_serial.get(serial)
            if entry is None:
                oracle = PhaseOracle(self.n, np.zeros(1 << self.n, dtype=np.bool_), "T_primal[invalid]")
            else:
                oracle = PhaseOracle.from_subspace(entry.subspace, "T_primal")
            self._primal[serial] = oracle
        return oracle

    def dual_oracle(self, serial: bytes) -> PhaseOracle:
        oracle = self._dual.get(serial)
        if oracle is None:
            entry = self._by_serial.get(serial)
            if entry is None:
                oracle = PhaseOracle(self.n, np.zeros(1 << self.n, dtype=np.bool_), "T_dual[invalid]")
            else:
                oracle = PhaseOracle.from_subspace(entry.subspace.dual(), "T_dual")
            self._dual[serial] = oracle
        return oracle

    @property
    def primal_queries(self) -> int:
        return sum(o.query_count for o in self._primal.values())

    @property
    def dual_queries(self) -> int:
        return sum(o.query_count for o in self._dual.values())

    @property
    def subspace_queries(self) -> int:
        return self.primal_queries + self.dual_queries

    def snapshot(self) -> dict:
        return {
            "n": self.n,
            "entries": {
                str(r): {
                    "serial": e.serial.hex(),
                    "basis": [format(row, f"0{self.n}b")[::-1] for row in e.subspace.basis],
                }
                for r, e in self._by_r.items()
            },
        }

    def export_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    @classmethod
    def import_json(cls, text: str, rng: np.random.Generator) -> "OracleBundle":
        data = json.loads(text)
        bundle = cls(int(data["n"]), rng)
        for r_s, entry in data["entries"].items():
            r = int(r_s)
            serial = bytes.fromhex(entry["serial"])
            rows = [int(row[::-1], 2) for row in entry["basis"]]
            sub = Subspace.from_rows(rows, bundle.n)
            be = BundleEntry(r, serial, sub)
            bundle._by_r[r] = be
            bundle._by_serial[serial] = be
        return bundle


def make_bundle(n: int, rng: np.random.Generator) -> OracleBundle:
    return OracleBundle(n, rng)


def bank(bundle: OracleBundle, rng: np.random.Generator) -> Banknote:
    """Draw r uniformly and mint (s_r, |A_r>)."""
    r = int(rng.integers(0, 1 << bundle.n))
    serial, sub = bundle.generator(r)
    return Banknote(serial, subspace_state(sub))


def verify_circuit(
    bundle: OracleBundle, serial: bytes, state: StateVector, rng: np.random.Generator
) -> Tuple[bool, StateVector]:
    """Project onto the subspace, transform, project onto the dual, transform.

    Rejects invalid serials outright; otherwise charges exactly one primal
    and one dual query, and accepts a pure state with probability equal to
    its squared overlap with the money state.
    """
    if not bundle.check_serial(serial):
        return False, state
    primal = Projector.from_oracle(bundle.primal_oracle(serial))
    dual = Projector.from_oracle(bundle.dual_oracle(serial))
    ok1, s, _ = measure_projector(primal, state, rng)
    s = hadamard_all(s)
    ok2, s, _ = measure_projector(dual, s, rng)
    s = hadamard_all(s)
    return ok1 and ok2, s


def verify(
    bundle: OracleBundle, serial: bytes, state: StateVector, rng: np.random.Generator
) -> bool:
    ok, _ = verify_circuit(bundle, serial, state, rng)
    return ok


def verifier_as_projector(bundle: OracleBundle, serial: bytes) -> Projector:
    """Rank-1 projector onto the money state (bank-side view of the verifier)."""
    entry = bundle.lookup(serial)
    if entry is None:
        raise ValueError("invalid serial")
    return Projector.onto_state(subspace_state(entry.subspace))


def verifier_circuit_matrix(bundle: OracleBundle, serial: bytes) -> np.ndarray:
    """Dense operator H P_dual H P_primal for operator-identity checks."""
    entry = bundle.lookup(serial)
    if entry is None:
        raise ValueError("invalid serial")
    n = bundle.n
    dim = 1 << n
    if n > 10:
        raise ValueError("dense circuit matrix only built for n <= 10")
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    had = np.array([[1.0]])
    for _ in range(n):
        had = np.kron(had, h)
    mask_a = np.zeros(dim)
    mask_a[entry.subspace.member_array()] = 1.0
    mask_d = np.zeros(dim)
    mask_d[entry.subspace.dual().member_array()] = 1.0
    return had @ np.diag(mask_d) @ had @ np.diag(mask_a)


def verifier_operator_distance(bundle: OracleBundle, serial: bytes) -> float:
    """Max entrywise |circuit - rank-1 projector| over the full operator.

    Columns indexed outside the subspace vanish identically for both
    operators (the first projection kills them and the target state has no
    amplitude there), so only member columns need computing; each one is two
    transforms and a mask away.
    """
    entry = bundle.lookup(serial)
    if entry is None:
        raise ValueError("invalid serial")
    n = bundle.n
    target = subspace_state(entry.subspace)
    dual_mask = np.zeros(1 << n, dtype=np.bool_)
    dual_mask[entry.subspace.dual().member_array()] = True
    worst = 0.0
    basis_col = np.zeros(1 << n, dtype=np.complex128)
    for x in entry.subspace.members():
        basis_col[:] = 0.0
        basis_col[x] = 1.0
        col = walsh_hadamard_raw(basis_col)
        col[~dual_mask] = 0.0
        col = walsh_hadamard_raw(col)
        rank1_col = target.amps * np.conj(target.amps[x])
        worst = max(worst, float(np.abs(col - rank1_col).max()))
    return worst


class HsMiniScheme(MiniScheme):
    """Mini-scheme interface over an oracle bundle; projective with perfect
    completeness (the four-step circuit equals the rank-1 projector)."""

    def __init__(self, bundle: OracleBundle):
        self.bundle = bundle
        self.n = bundle.n
        self.completeness_error = 0.0

    def bank(self, rng: np.random.Generator) -> Banknote:
        return bank(self.bundle, rng)

    def target_state(self, serial: bytes) -> Optional[StateVector]:
        entry = self.bundle.lookup(serial)
        if entry is None:
            return None
        return subspace_state(entry.subspace)

    def verify_post(self, serial, state, rng):
        return verify_circuit(self.bundle, serial, state, rng)


class ConjugatedOracle:
    """Base subspace oracle composed with a basis permutation.

    Applying it charges the base oracle: the composed map is implemented by
    relabeling inputs and calling the base oracle once.
    """

    def __init__(self, base: PhaseOracle, relabel: np.ndarray, label: str = ""):
        self.base = base
        self.n_qubits = base.n_qubits
        self.mask = base.mask[relabel]
        self.label = label
        self.query_count = 0

    def charge(self, k: int = 1) -> None:
        self.query_count += k
        self.base.charge(k)

    def apply(self, s: StateVector) -> StateVector:
        self.charge()
        amps = s.amps.copy()
        amps[self.mask] = -amps[self.mask]
        return StateVector._wrap(s.n_qubits, amps)


@dataclass
class RandomizedInstance:
    map: LinMap
    subspace: Subspace
    state: StateVector
    primal: ConjugatedOracle
    dual: ConjugatedOracle
    undo: LinMap

    def undo_state(self, s: StateVector) -> StateVector:
        # forward map sent amps[x] to slot f(x); reading back through f undoes it
        perm = self.map.permutation_table()
        return StateVector._wrap(s.n_qubits, s.amps[perm])


def randomize_instance(
    a: Subspace,
    state: StateVector,
    oracle_pair: Tuple[PhaseOracle, PhaseOracle],
    rng: np.random.Generator,
) -> RandomizedInstance:
    """Rerandomize a worst-case instance to a uniformly random one.

    Returns f(A), the state with amplitudes relabeled by f, membership
    oracles for f(A) and f(A)^perp built from the originals (x in f(A) iff
    f^{-1}(x) in A; x in f(A)^perp iff f^T x in A^perp), and the inverse map.
    """
    if a.dim * 2 != a.n:
        raise ValueError("instance randomization expects a dim-n/2 subspace")
    primal_base, dual_base = oracle_pair
    f = random_invertible(a.n, rng)
    f_inv = f.inverse()
    inv_table = f_inv.permutation_table()
    ft_table = f.transpose().permutation_table()
    new_amps = state.amps[inv_table]
    return RandomizedInstance(
        map=f,
        subspace=image(f, a),
        state=StateVector._wrap(state.n_qubits, new_amps),
        primal=ConjugatedOracle(primal_base, inv_table, "U_fA"),
        dual=ConjugatedOracle(dual_base, ft_table, "U_fA_perp"),
        undo=f_inv,
    )
