"""Dense statevector simulation with query-counted oracles.

Index convention: bit i of a basis-state index is qubit i (little endian),
matching the F_2^n vector convention in `f2lin`, so a subspace element is
directly an amplitude index. All operations return new states; amplitudes
are frozen after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from . import config
from .f2lin import Subspace


def _check_qubits(n: int) -> None:
    cap = config.qubit_cap()
    if not 0 < n <= cap:
        raise ValueError(f"{n} qubits outside (0, {cap}]")


class StateVector:
    """Immutable n-qubit pure state; 2^n complex amplitudes."""

    __slots__ = ("n_qubits", "amps")

    def __init__(self, n_qubits: int, amps: np.ndarray, _checked: bool = False):
        _check_qubits(n_qubits)
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.shape != (1 << n_qubits,):
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {amps.shape}")
        if not _checked:
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > config.ATOL:
                raise ValueError(f"state norm {norm} deviates from 1 beyond {config.ATOL}")
            amps = amps.copy()
        amps.setflags(write=False)
        self.n_qubits = n_qubits
        self.amps = amps

    @classmethod
    def _wrap(cls, n_qubits: int, amps: np.ndarray) -> "StateVector":
        """Internal: adopt an array that is already normalized and owned."""
        return cls(n_qubits, amps, _checked=True)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls._wrap(n_qubits, amps)

    @classmethod
    def uniform(cls, n_qubits: int) -> "StateVector":
        dim = 1 << n_qubits
        return cls._wrap(n_qubits, np.full(dim, dim ** -0.5, dtype=np.complex128))

    def inner(self, other: "StateVector") -> complex:
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        return complex(np.vdot(self.amps, other.amps))

    def overlap(self, other: "StateVector") -> float:
        return abs(self.inner(other))

    def tensor(self, other: "StateVector") -> "StateVector":
        # other's index bits go above self's: index = x_self + 2^n * y_other
        joint = np.kron(other.amps, self.amps)
        return StateVector._wrap(self.n_qubits + other.n_qubits, joint)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def dump(self, threshold: float = 1e-12) -> str:
        lines = [f"n={self.n_qubits}"]
        for idx in np.flatnonzero(np.abs(self.amps) > threshold):
            a = self.amps[idx]
            lines.append(f"{idx} {float(a.real)!r} {float(a.imag)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "StateVector":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n="):
            raise ValueError("bad state dump header")
        n = int(lines[0][2:])
        amps = np.zeros(1 << n, dtype=np.complex128)
        for ln in lines[1:]:
            idx_s, re_s, im_s = ln.split()
            amps[int(idx_s)] = float(re_s) + 1j * float(im_s)
        return cls(n, amps)


def subspace_state(a: Subspace) -> StateVector:
    """Uniform superposition over the 2^dim elements of the subspace."""
    _check_qubits(a.n)
    amps = np.zeros(1 << a.n, dtype=np.complex128)
    members = a.member_array()
    amps[members] = len(members) ** -0.5
    return StateVector._wrap(a.n, amps)


def walsh_hadamard_raw(amps: np.ndarray) -> np.ndarray:
    """Normalized Walsh-Hadamard butterfly on a raw amplitude array."""
    n = len(amps).bit_length() - 1
    h = amps.astype(np.complex128, copy=True)
    for i in range(n):
        h = h.reshape(-1, 2, 1 << i)
        top = h[:, 0, :].copy()
        h[:, 0, :] = top + h[:, 1, :]
        h[:, 1, :] = top - h[:, 1, :]
        h = h.reshape(-1)
    h *= 2 ** (-n / 2)
    return h


def hadamard_all(s: StateVector) -> StateVector:
    """Walsh-Hadamard transform on every qubit; exchanges |A> and |A_perp>."""
    return StateVector._wrap(s.n_qubits, walsh_hadamard_raw(s.amps))


class PhaseOracle:
    """Classical oracle |x> -> (-1)^{f(x)} |x>, with a monotone query counter."""

    def __init__(self, n_qubits: int, mask: np.ndarray, label: str = ""):
        if mask.shape != (1 << n_qubits,) or mask.dtype != np.bool_:
            raise ValueError("mask must be a boolean array over all basis states")
        self.n_qubits = n_qubits
        self.mask = mask
        self.label = label
        self.query_count = 0

    @classmethod
    def from_predicate(cls, n_qubits: int, pred: Callable[[int], bool], label: str = "") -> "PhaseOracle":
        mask = np.fromiter((bool(pred(x)) for x in range(1 << n_qubits)), dtype=np.bool_)
        return cls(n_qubits, mask, label)

    @classmethod
    def from_indices(cls, n_qubits: int, indices, label: str = "") -> "PhaseOracle":
        mask = np.zeros(1 << n_qubits, dtype=np.bool_)
        mask[np.asarray(indices, dtype=np.int64)] = True
        return cls(n_qubits, mask, label)

    @classmethod
    def from_subspace(cls, a: Subspace, label: str = "") -> "PhaseOracle":
        return cls.from_indices(a.n, a.member_array(), label or f"U_dim{a.dim}")

    def charge(self, k: int = 1) -> None:
        self.query_count += k

    def apply(self, s: StateVector, control: Optional[int] = None) -> StateVector:
        """Phase-flip accepted basis states; one query per call, controlled or not."""
        self.charge()
        amps = s.amps.copy()
        if control is None:
            if s.n_qubits != self.n_qubits:
                raise ValueError("state and oracle sizes differ")
            amps[self.mask] = -amps[self.mask]
        else:
            if not self.n_qubits <= control < s.n_qubits:
                raise ValueError("control qubit must lie above the oracle's register")
            idx = np.arange(1 << s.n_qubits)
            low = idx & ((1 << self.n_qubits) - 1)
            hit = self.mask[low] & (((idx >> control) & 1) == 1)
            amps[hit] = -amps[hit]
        return StateVector._wrap(s.n_qubits, amps)


def apply_oracle(u: PhaseOracle, s: StateVector, control: Optional[int] = None) -> StateVector:
    """Apply a phase oracle (optionally controlled); charges one query."""
    return u.apply(s, control)


def oracle_for_dual_pair(a: Subspace, label: str = "") -> PhaseOracle:
    """Oracle over n+1 bits flipping (0, A) union (1, A_perp)."""
    n = a.n
    mask = np.zeros(1 << (n + 1), dtype=np.bool_)
    mask[a.member_array()] = True
    mask[a.dual().member_array() + (1 << n)] = True
    return PhaseOracle(n + 1, mask, label or "U_pair")


class ReflectAboutState:
    """Query-counted reflection I - 2|psi><psi| about a fixed state."""

    def __init__(self, target: StateVector, label: str = ""):
        self.target = target
        self.n_qubits = target.n_qubits
        self.label = label
        self.query_count = 0

    def charge(self, k: int = 1) -> None:
        self.query_count += k

    def apply(self, s: StateVector) -> StateVector:
        self.charge()
        c = np.vdot(self.target.amps, s.amps)
        return StateVector._wrap(s.n_qubits, s.amps - 2.0 * c * self.target.amps)


class Projector:
    """Diagonal (basis-subset) or rank-1 (target-state) projector.

    When built from a PhaseOracle, measuring charges one query to that oracle
    (the control-qubit implementation uses a single controlled call).
    """

    def __init__(
        self,
        n_qubits: int,
        mask: Optional[np.ndarray] = None,
        target: Optional[StateVector] = None,
        charge_to=None,
    ):
        if (mask is None) == (target is None):
            raise ValueError("exactly one of mask / target must be given")
        self.n_qubits = n_qubits
        self.mask = mask
        self.target = target
        self.charge_to = charge_to

    @classmethod
    def from_mask(cls, n_qubits: int, mask: np.ndarray, charge_to=None) -> "Projector":
        return cls(n_qubits, mask=mask.astype(np.bool_), charge_to=charge_to)

    @classmethod
    def from_oracle(cls, oracle: PhaseOracle) -> "Projector":
        return cls(oracle.n_qubits, mask=oracle.mask, charge_to=oracle)

    @classmethod
    def onto_state(cls, target: StateVector, charge_to=None) -> "Projector":
        return cls(target.n_qubits, target=target, charge_to=charge_to)

    @classmethod
    def from_subspace(cls, a: Subspace, charge_to=None) -> "Projector":
        mask = np.zeros(1 << a.n, dtype=np.bool_)
        mask[a.member_array()] = True
        return cls(a.n, mask=mask, charge_to=charge_to)

    def project(self, amps: np.ndarray) -> np.ndarray:
        """P @ amps, unnormalized."""
        if self.mask is not None:
            return np.where(self.mask, amps, 0.0)
        t = self.target.amps
        return np.vdot(t, amps) * t

    def matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        if dim > 4096:
            raise ValueError("dense projector matrix only built for small registers")
        if self.mask is not None:
            return np.diag(self.mask.astype(np.complex128))
        t = self.target.amps
        return np.outer(t, t.conj())


def measure_projector(
    p: Projector, s: StateVector, rng: np.random.Generator
) -> Tuple[bool, StateVector, float]:
    """Born-rule measurement of {P, I-P}; returns (outcome, post state, P-prob)."""
    if p.charge_to is not None:
        p.charge_to.charge()
    kept = p.project(s.amps)
    prob = float(np.vdot(kept, kept).real)
    prob = min(max(prob, 0.0), 1.0)
    if rng.random() < prob:
        return True, StateVector._wrap(s.n_qubits, kept / np.sqrt(prob)), prob
    rest = s.amps - kept
    rnorm = np.linalg.norm(rest)
    if rnorm < 1e-15:
        raise ValueError("zero-probability branch requested deterministically")
    return False, StateVector._wrap(s.n_qubits, rest / rnorm), prob


def postselect_projector(p: Projector, s: StateVector, outcome: bool) -> Tuple[StateVector, float]:
    """Deterministically take one branch; raises on a zero-probability branch."""
    if p.charge_to is not None:
        p.charge_to.charge()
    kept = p.project(s.amps)
    prob = float(np.vdot(kept, kept).real)
    branch = kept if outcome else s.amps - kept
    bnorm = np.linalg.norm(branch)
    if bnorm < 1e-12:
        raise ValueError("zero-probability branch requested deterministically")
    return StateVector._wrap(s.n_qubits, branch / bnorm), prob if outcome else 1.0 - prob


@dataclass
class DensityOp:
    """Hermitian PSD trace-1 operator on a small register."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density operator must be square")
        if np.abs(m - m.conj().T).max() > 1e-9:
            raise ValueError("density operator is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError("density operator trace deviates from 1")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -1e-9:
            raise ValueError("density operator has a negative eigenvalue beyond tolerance")
        self.matrix = m

    @classmethod
    def from_state(cls, s: StateVector) -> "DensityOp":
        return cls(np.outer(s.amps, s.amps.conj()))

    @classmethod
    def mixture(cls, pairs) -> "DensityOp":
        dim = len(pairs[0][1].amps)
        m = np.zeros((dim, dim), dtype=np.complex128)
        for w, s in pairs:
            m += w * np.outer(s.amps, s.amps.conj())
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


StateLike = Union[StateVector, DensityOp]


def _as_density(x: StateLike) -> np.ndarray:
    if isinstance(x, StateVector):
        return np.outer(x.amps, x.amps.conj())
    return x.matrix


def fidelity(rho: StateLike, sigma: StateLike) -> float:
    """Uhlmann fidelity max |<psi|phi>| over purifications; in [0, 1]."""
    if isinstance(rho, StateVector) and isinstance(sigma, StateVector):
        return rho.overlap(sigma)
    if isinstance(rho, StateVector):
        rho, sigma = sigma, rho
    if isinstance(sigma, StateVector):
        m = rho.matrix if isinstance(rho, DensityOp) else rho
        if m.shape[0] != len(sigma.amps):
            raise ValueError("dimension mismatch")
        val = np.vdot(sigma.amps, m @ sigma.amps).real
        return float(np.sqrt(min(max(val, 0.0), 1.0)))
    a = _as_density(rho)
    b = _as_density(sigma)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    if a.shape[0] > config.MIXED_FIDELITY_DIM_CAP:
        raise ValueError("mixed-state fidelity restricted to small dimensions")
    evals, vecs = np.linalg.eigh(a)
    if evals.min() < -1e-9:
        raise ValueError("input is not PSD within tolerance")
    sq = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
    inner = sq @ b @ sq
    ev = np.linalg.eigvalsh(inner)
    f = float(np.sqrt(np.clip(ev, 0.0, None)).sum())
    return min(max(f, 0.0), 1.0)


def trace_distance(rho: StateLike, sigma: StateLike) -> float:
    """Half the sum of |eigenvalues| of rho - sigma."""
    a = _as_density(rho)
    b = _as_density(sigma)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    ev = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.abs(ev).sum())


def fidelity_to_goal(s: StateVector, goal: Projector) -> float:
    """F(|s>, G) = ||P_G s|| for a goal subspace given as a projector."""
    kept = goal.project(s.amps)
    return float(np.linalg.norm(kept))


def haar_random_state(n: int, rng: np.random.Generator) -> StateVector:
    """Normalized complex-Gaussian vector (Haar-distributed direction)."""
    _check_qubits(n)
    dim = 1 << n
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector._wrap(n, v / np.linalg.norm(v))


def apply_projector_on_register(
    joint: np.ndarray, n_per_reg: int, reg: int, p: Projector
) -> np.ndarray:
    """Apply P on one register of a multi-register pure state (unnormalized).

    Register r occupies index bits [r*n, (r+1)*n); the joint array is
    reshaped so that axis -1-r addresses register r.
    """
    total_qubits = len(joint).bit_length() - 1
    if total_qubits % n_per_reg:
        raise ValueError("joint register size is not a multiple of the note size")
    regs = total_qubits // n_per_reg
    if not 0 <= reg < regs:
        raise ValueError("register index out of range")
    shaped = joint.reshape([1 << n_per_reg] * regs)
    # axis for register r: with C order, axis (regs-1-r) runs over that register
    axis = regs - 1 - reg
    if p.mask is not None:
        shaped = np.moveaxis(shaped.copy(), axis, -1)
        shaped[..., ~p.mask] = 0.0
        shaped = np.moveaxis(shaped, -1, axis)
        return shaped.reshape(-1)
    t = p.target.amps
    moved = np.moveaxis(shaped, axis, -1)
    coeff = moved @ t.conj()
    out = coeff[..., None] * t
    return np.moveaxis(out, -1, axis).reshape(-1)
