"""Money-scheme framework: mini-scheme and signature interfaces, the double
verifier and money counter, the serial-signing composition into a full
public-key scheme, and threshold-repetition completeness amplification.

Serial numbers are opaque bytes; nothing here parses them. Verification of
multiple (possibly entangled) registers is sequential in index order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .qsim import (
    Projector,
    StateVector,
    apply_projector_on_register,
    measure_projector,
)


class KeyExhaustionError(RuntimeError):
    """All one-time signing keys have been used."""


class MalformedSignatureError(ValueError):
    """Signature blob is structurally invalid."""


@dataclass
class Banknote:
    serial: bytes
    state: StateVector


class MiniScheme:
    """Bank/Ver pair issuing (serial, money state) banknotes.

    Subclasses set `n` (qubits per money state) and `completeness_error`.
    Projective schemes return their rank-1 target from `target_state`;
    `classical_accept` lets wrappers add classical accept/reject coins.
    """

    n: int
    completeness_error: float = 0.0

    def bank(self, rng: np.random.Generator) -> Banknote:
        raise NotImplementedError

    def target_state(self, serial: bytes) -> Optional[StateVector]:
        """Rank-1 verification target, or None for non-projective schemes."""
        return None

    @property
    def is_projective(self) -> bool:
        return True

    def classical_accept(self, rng: np.random.Generator) -> bool:
        return True

    def verify_post(
        self, serial: bytes, state: StateVector, rng: np.random.Generator
    ) -> Tuple[bool, StateVector]:
        target = self.target_state(serial)
        if target is None:
            return False, state
        ok, post, _ = measure_projector(Projector.onto_state(target), state, rng)
        return ok and self.classical_accept(rng), post

    def verify(self, serial: bytes, state: StateVector, rng: np.random.Generator) -> bool:
        ok, _ = self.verify_post(serial, state, rng)
        return ok


def _measure_target_on_register(
    joint: np.ndarray,
    n: int,
    reg: int,
    target: StateVector,
    rng: np.random.Generator,
) -> Tuple[bool, np.ndarray]:
    if len(joint) == 1 << (2 * n):
        # two-register fast path: view the joint state as a (high, low) matrix
        # and reduce the measured register to its overlap vector first
        m = joint.reshape(1 << n, 1 << n)
        t = target.amps
        c = m @ t.conj() if reg == 0 else t.conj() @ m
        prob = min(max(float(np.vdot(c, c).real), 0.0), 1.0)
        if rng.random() < prob:
            cn = c / np.sqrt(prob)
            post = np.outer(cn, t) if reg == 0 else np.outer(t, cn)
            return True, post.reshape(-1)
        kept = (np.outer(c, t) if reg == 0 else np.outer(t, c)).reshape(-1)
        rest = joint - kept
    else:
        kept = apply_projector_on_register(joint, n, reg, Projector.onto_state(target))
        prob = min(max(float(np.vdot(kept, kept).real), 0.0), 1.0)
        if rng.random() < prob:
            return True, kept / np.sqrt(prob)
        rest = joint - kept
    rnorm = np.linalg.norm(rest)
    if rnorm < 1e-15:
        raise ValueError("zero-probability branch requested deterministically")
    return False, rest / rnorm


JointInput = Union[StateVector, Tuple[StateVector, StateVector]]


def _as_joint(m: MiniScheme, states: JointInput) -> StateVector:
    if isinstance(states, StateVector):
        if states.n_qubits != 2 * m.n:
            raise ValueError("joint register must hold exactly two money states")
        return states
    s1, s2 = states
    return s1.tensor(s2)


def verify2(
    m: MiniScheme, serial: bytes, states: JointInput, rng: np.random.Generator
) -> bool:
    ok, _ = verify2_post(m, serial, states, rng)
    return ok


def verify2_post(
    m: MiniScheme, serial: bytes, states: JointInput, rng: np.random.Generator
) -> Tuple[bool, StateVector]:
    """Double verifier: both single verifications, sequential on the joint state."""
    target = m.target_state(serial)
    if target is None:
        raise ValueError("double verification needs a projective scheme")
    joint = _as_joint(m, states)
    amps = joint.amps
    ok1, amps = _measure_target_on_register(amps, m.n, 0, target, rng)
    ok1 = ok1 and m.classical_accept(rng)
    ok2, amps = _measure_target_on_register(amps, m.n, 1, target, rng)
    ok2 = ok2 and m.classical_accept(rng)
    return ok1 and ok2, StateVector._wrap(joint.n_qubits, amps)


class SignatureScheme:
    """Classical signature interface: keygen / sign / sverify."""

    def keygen(self, rng: np.random.Generator):
        raise NotImplementedError

    def sign(self, sk, message: bytes) -> bytes:
        raise NotImplementedError

    def sverify(self, pk, message: bytes, signature: bytes) -> bool:
        raise NotImplementedError


def _h(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


_DIGEST = 32
_MSG_BITS = 256
MAX_MESSAGE_BYTES = 1 << 20


@dataclass
class _LamportPrivateKey:
    master: bytes
    height: int
    next_leaf: int = 0
    levels: Optional[List[List[bytes]]] = None  # cached Merkle levels

    def leaf_count(self) -> int:
        return 1 << self.height


class LamportMerkleSigner(SignatureScheme):
    """Hash-based one-time signatures under a Merkle index tree.

    Messages are hashed to 256 bits and signed with a fresh Lamport leaf;
    the public key is the tree root, so many messages can be signed until
    the leaves run out.
    """

    def __init__(self, tree_height: int = 6):
        if not 1 <= tree_height <= 16:
            raise ValueError("tree height out of range")
        self.height = tree_height

    def _secret(self, master: bytes, leaf: int, bit: int, value: int) -> bytes:
        return _h(master + leaf.to_bytes(4, "big") + bit.to_bytes(2, "big") + bytes([value]))

    def _leaf_pk_halves(self, master: bytes, leaf: int) -> Tuple[List[bytes], List[bytes]]:
        zeros = [_h(self._secret(master, leaf, j, 0)) for j in range(_MSG_BITS)]
        ones = [_h(self._secret(master, leaf, j, 1)) for j in range(_MSG_BITS)]
        return zeros, ones

    def _leaf_hash(self, zeros: Sequence[bytes], ones: Sequence[bytes]) -> bytes:
        return _h(b"".join(zeros) + b"".join(ones))

    def _tree_levels(self, master: bytes) -> List[List[bytes]]:
        leaves = []
        for leaf in range(1 << self.height):
            zeros, ones = self._leaf_pk_halves(master, leaf)
            leaves.append(self._leaf_hash(zeros, ones))
        levels = [leaves]
        while len(levels[-1]) > 1:
            prev = levels[-1]
            levels.append([_h(prev[i] + prev[i + 1]) for i in range(0, len(prev), 2)])
        return levels

    def keygen(self, rng: np.random.Generator) -> Tuple[_LamportPrivateKey, bytes]:
        master = rng.bytes(32)
        levels = self._tree_levels(master)
        sk = _LamportPrivateKey(master=master, height=self.height, levels=levels)
        return sk, levels[-1][0]

    def sign(self, sk: _LamportPrivateKey, message: bytes) -> bytes:
        if len(message) > MAX_MESSAGE_BYTES:
            raise ValueError("message exceeds the configured length bound")
        if sk.next_leaf >= sk.leaf_count():
            raise KeyExhaustionError("no unused one-time keys remain")
        leaf = sk.next_leaf
        sk.next_leaf += 1
        digest = _h(message)
        bits = [(digest[j // 8] >> (7 - j % 8)) & 1 for j in range(_MSG_BITS)]
        reveals = [self._secret(sk.master, leaf, j, bits[j]) for j in range(_MSG_BITS)]
        zeros, ones = self._leaf_pk_halves(sk.master, leaf)
        complements = [ones[j] if bits[j] == 0 else zeros[j] for j in range(_MSG_BITS)]
        if sk.levels is None:
            sk.levels = self._tree_levels(sk.master)
        levels = sk.levels
        path = []
        idx = leaf
        for level in levels[:-1]:
            path.append(level[idx ^ 1])
            idx >>= 1
        blob = leaf.to_bytes(4, "big") + b"".join(reveals) + b"".join(complements) + b"".join(path)
        return blob

    def sverify(self, pk: bytes, message: bytes, signature: bytes) -> bool:
        expected = 4 + 2 * _MSG_BITS * _DIGEST + self.height * _DIGEST
        if not isinstance(signature, (bytes, bytearray)) or len(signature) != expected:
            raise MalformedSignatureError(
                f"signature must be {expected} bytes, got {len(signature) if isinstance(signature, (bytes, bytearray)) else type(signature)}"
            )
        leaf = int.from_bytes(signature[:4], "big")
        if leaf >= (1 << self.height):
            raise MalformedSignatureError("leaf index out of range")
        off = 4
        reveals = [signature[off + j * _DIGEST : off + (j + 1) * _DIGEST] for j in range(_MSG_BITS)]
        off += _MSG_BITS * _DIGEST
        complements = [signature[off + j * _DIGEST : off + (j + 1) * _DIGEST] for j in range(_MSG_BITS)]
        off += _MSG_BITS * _DIGEST
        path = [signature[off + j * _DIGEST : off + (j + 1) * _DIGEST] for j in range(self.height)]

        digest = _h(message)
        bits = [(digest[j // 8] >> (7 - j % 8)) & 1 for j in range(_MSG_BITS)]
        zeros = [b""] * _MSG_BITS
        ones = [b""] * _MSG_BITS
        for j in range(_MSG_BITS):
            if bits[j] == 0:
                zeros[j] = _h(reveals[j])
                ones[j] = complements[j]
            else:
                zeros[j] = complements[j]
                ones[j] = _h(reveals[j])
        node = self._leaf_hash(zeros, ones)
        idx = leaf
        for sibling in path:
            node = _h(node + sibling) if idx % 2 == 0 else _h(sibling + node)
            idx >>= 1
        return node == pk


def lamport_keygen(rng: np.random.Generator, tree_height: int = 6):
    signer = LamportMerkleSigner(tree_height)
    sk, pk = signer.keygen(rng)
    return signer, sk, pk


def lamport_sign(signer: LamportMerkleSigner, sk, message: bytes) -> bytes:
    return signer.sign(sk, message)


def lamport_sverify(signer: LamportMerkleSigner, pk, message: bytes, signature: bytes) -> bool:
    return signer.sverify(pk, message, signature)


@dataclass
class MoneyNote:
    serial: bytes
    signature: bytes
    state: StateVector


def note_to_wire(serial: bytes, state: StateVector, state_path: str,
                 signature: Optional[bytes] = None) -> str:
    """Banknote wire record: JSON with hex serial, optional hex signature,
    and a path reference to the state dump written alongside."""
    with open(state_path, "w") as fh:
        fh.write(state.dump())
    record = {"serial": serial.hex(), "state_ref": state_path}
    if signature is not None:
        record["sig"] = signature.hex()
    return json.dumps(record, sort_keys=True)


def note_from_wire(text: str) -> Tuple[bytes, Optional[bytes], StateVector]:
    record = json.loads(text)
    serial = bytes.fromhex(record["serial"])
    signature = bytes.fromhex(record["sig"]) if "sig" in record else None
    with open(record["state_ref"]) as fh:
        state = StateVector.load(fh.read())
    return serial, signature, state


class MoneyScheme:
    """Full public-key scheme: keygen / bank / verify."""

    n: int
    completeness_error: float = 0.0

    def keygen(self, rng: np.random.Generator):
        raise NotImplementedError

    def bank(self, sk, rng: np.random.Generator) -> MoneyNote:
        raise NotImplementedError

    def verify(self, pk, note: MoneyNote, rng: np.random.Generator) -> bool:
        raise NotImplementedError


class ComposedScheme(MoneyScheme):
    """Mini-scheme plus a signature on the serial number."""

    def __init__(self, mini: MiniScheme, signer: SignatureScheme):
        self.mini = mini
        self.signer = signer
        self.n = mini.n
        self.completeness_error = mini.completeness_error

    def keygen(self, rng: np.random.Generator):
        return self.signer.keygen(rng)

    def bank(self, sk, rng: np.random.Generator) -> MoneyNote:
        note = self.mini.bank(rng)
        return MoneyNote(note.serial, self.signer.sign(sk, note.serial), note.state)

    def verify(self, pk, note: MoneyNote, rng: np.random.Generator) -> bool:
        try:
            sig_ok = self.signer.sverify(pk, note.serial, note.signature)
        except MalformedSignatureError:
            return False
        if not sig_ok:
            return False
        return self.mini.verify(note.serial, note.state, rng)

    def verify_post(self, pk, note: MoneyNote, rng: np.random.Generator) -> Tuple[bool, StateVector]:
        try:
            sig_ok = self.signer.sverify(pk, note.serial, note.signature)
        except MalformedSignatureError:
            return False, note.state
        mini_ok, post = self.mini.verify_post(note.serial, note.state, rng)
        return sig_ok and mini_ok, post


def standard_construction(mini: MiniScheme, signer: SignatureScheme) -> ComposedScheme:
    return ComposedScheme(mini, signer)


def count_notes(
    scheme: MoneyScheme, pk, notes: Sequence[MoneyNote], rng: np.random.Generator
) -> int:
    """Money counter: sequential verification, one count per accept."""
    total = 0
    for note in notes:
        if scheme.verify(pk, note, rng):
            total += 1
    return total


class WrappedAsMini(MiniScheme):
    """A full money scheme repackaged as a mini-scheme (serial := pk || serial || sig).

    A fresh key pair backs every banknote, so the wrapper never needs a key
    of its own.
    """

    def __init__(self, scheme: ComposedScheme):
        self.scheme = scheme
        self.n = scheme.n
        self.completeness_error = scheme.completeness_error

    @staticmethod
    def _pack(parts: Sequence[bytes]) -> bytes:
        out = b""
        for p in parts:
            out += len(p).to_bytes(4, "big") + p
        return out

    @staticmethod
    def _unpack(blob: bytes) -> List[bytes]:
        parts = []
        off = 0
        while off < len(blob):
            ln = int.from_bytes(blob[off : off + 4], "big")
            off += 4
            parts.append(blob[off : off + ln])
            off += ln
        return parts

    def bank(self, rng: np.random.Generator) -> Banknote:
        sk, pk = self.scheme.keygen(rng)
        note = self.scheme.bank(sk, rng)
        return Banknote(self._pack([pk, note.serial, note.signature]), note.state)

    def target_state(self, serial: bytes) -> Optional[StateVector]:
        _, inner_serial, _ = self._unpack(serial)
        return self.scheme.mini.target_state(inner_serial)

    def verify_post(self, serial, state, rng):
        pk, inner_serial, sig = self._unpack(serial)
        return self.scheme.verify_post(pk, MoneyNote(inner_serial, sig, state), rng)


class ArtificiallyNoisyScheme(MiniScheme):
    """Wrap a projective scheme with an extra classical rejection coin."""

    def __init__(self, base: MiniScheme, extra_reject: float):
        if not 0 <= extra_reject < 1:
            raise ValueError("rejection rate must lie in [0, 1)")
        self.base = base
        self.extra_reject = extra_reject
        self.n = base.n
        self.completeness_error = 1 - (1 - base.completeness_error) * (1 - extra_reject)

    def bank(self, rng: np.random.Generator) -> Banknote:
        return self.base.bank(rng)

    def target_state(self, serial: bytes) -> Optional[StateVector]:
        return self.base.target_state(serial)

    def classical_accept(self, rng: np.random.Generator) -> bool:
        return bool(rng.random() >= self.extra_reject) and self.base.classical_accept(rng)


@dataclass
class CompositeNote:
    serials: Tuple[bytes, ...]
    states: Tuple[StateVector, ...]


class CompositeScheme:
    """Threshold repetition of a mini-scheme: k sub-notes, accept when at
    least ceil((1 - eps - eta) k) sub-verifications accept."""

    def __init__(self, base: MiniScheme, k: int, eta: float):
        if k < 1:
            raise ValueError("repetition count must be at least 1")
        eps = base.completeness_error
        if eps >= 0.5:
            raise ValueError("base completeness error must be below 1/2")
        if not 0 < eta < 0.5 - eps:
            raise ValueError("eta must lie in (0, 1/2 - eps)")
        self.base = base
        self.k = k
        self.eta = eta
        # ceil with a nudge so exact-integer thresholds are not pushed up
        # by float representation error
        self.threshold = math.ceil(k * (1 - eps - eta) - 1e-9)
        self.completeness_error_bound = math.exp(-2 * k * eta ** 2)

    def bank(self, rng: np.random.Generator) -> CompositeNote:
        notes = [self.base.bank(rng) for _ in range(self.k)]
        return CompositeNote(tuple(n.serial for n in notes), tuple(n.state for n in notes))

    def verify(self, note: CompositeNote, rng: np.random.Generator) -> bool:
        return self.count_accepts(note, rng) >= self.threshold

    def count_accepts(self, note: CompositeNote, rng: np.random.Generator) -> int:
        total = 0
        for serial, state in zip(note.serials, note.states):
            if self.base.verify(serial, state, rng):
                total += 1
        return total

    def verify2(
        self,
        serials: Sequence[bytes],
        sigma: Sequence[StateVector],
        xi: Sequence[StateVector],
        rng: np.random.Generator,
    ) -> bool:
        a = CompositeNote(tuple(serials), tuple(sigma))
        b = CompositeNote(tuple(serials), tuple(xi))
        return self.verify(a, rng) and self.verify(b, rng)


def amplify_completeness(base: MiniScheme, k: int, eta: float) -> CompositeScheme:
    return CompositeScheme(base, k, eta)


CompositeCounterfeiter = Callable[
    [CompositeNote, np.random.Generator],
    Tuple[Sequence[StateVector], Sequence[StateVector]],
]


def composite_reduction_attempt(
    composite: CompositeScheme,
    counterfeiter: CompositeCounterfeiter,
    note: Banknote,
    rng: np.random.Generator,
) -> Tuple[bytes, StateVector, StateVector]:
    """One run of the single-note counterfeiter built from a composite one.

    Generates a fresh composite note, swaps the target banknote into a
    uniformly random slot, runs the composite counterfeiter, and returns the
    swapped slot's output pair.
    """
    fresh = composite.bank(rng)
    i = int(rng.integers(0, composite.k))
    serials = list(fresh.serials)
    states = list(fresh.states)
    serials[i] = note.serial
    states[i] = note.state
    swapped = CompositeNote(tuple(serials), tuple(states))
    sigma, xi = counterfeiter(swapped, rng)
    return serials[i], sigma[i], xi[i]
