"""Dense complex linear algebra on labelled tensor-product Hilbert spaces.

All objects are immutable: arrays are stored read-only and every operation
returns a new object. Matrix exponentials of Hermitian generators are taken
through the eigendecomposition, which is exact up to rounding for the small
(<= 4096) dimensions used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .constants import HBAR
from .errors import InputError

MAX_DIM = 4096
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class NonHermitianInput(InputError):
    pass


class SpaceMismatch(InputError):
    pass


class InvalidPartition(InputError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered list of ``(label, dimension)`` tensor factors."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        object.__setattr__(self, "factors", factors)
        if not factors:
            raise InputError("a Hilbert space needs at least one factor")
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise InputError(f"factor labels must be unique, got {labels}")
        for label, dim in factors:
            if dim < 2:
                raise InputError(f"factor {label!r} has dimension {dim} < 2")
        if self.dim > MAX_DIM:
            raise InputError(f"total dimension {self.dim} exceeds {MAX_DIM}")

    @classmethod
    def of(cls, *factors: tuple[str, int]) -> "HilbertSpace":
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"no factor labelled {label!r} in {self.labels}") from None

    def tensor(self, other: "HilbertSpace") -> "HilbertSpace":
        """Concatenate factors; clashing labels from ``other`` get a numeric suffix."""
        taken = set(self.labels)
        out = list(self.factors)
        for label, dim in other.factors:
            new = label
            k = 2
            while new in taken:
                new = f"{label}_{k}"
                k += 1
            taken.add(new)
            out.append((new, dim))
        return HilbertSpace(tuple(out))

    def basis_index(self, **digits: int) -> int:
        """Flat index of the product basis state with the given per-factor indices."""
        missing = set(self.labels) - set(digits)
        if missing or set(digits) - set(self.labels):
            raise InputError(f"basis_index needs exactly the labels {self.labels}")
        return int(np.ravel_multi_index([digits[l] for l in self.labels], self.dims))


@dataclass(frozen=True)
class QuantumState:
    """Normalised ket on a :class:`HilbertSpace`."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (self.space.dim,):
            raise SpaceMismatch(
                f"amplitude vector of length {amps.size} does not fit space of dim {self.space.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"state is not normalised (norm = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, space: HilbertSpace, vector) -> "QuantumState":
        """Build a state from an unnormalised vector."""
        v = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InputError("cannot normalise the zero vector")
        return cls(space, v / norm)

    @classmethod
    def basis(cls, space: HilbertSpace, index: int) -> "QuantumState":
        v = np.zeros(space.dim, dtype=complex)
        v[index] = 1.0
        return cls(space, v)

    def overlap(self, other: "QuantumState") -> complex:
        """``<self|other>``."""
        _check_same(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def tensor(self, other: "QuantumState") -> "QuantumState":
        return QuantumState(self.space.tensor(other.space), np.kron(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Operator:
    """Square matrix acting on a :class:`HilbertSpace`.

    When ``hermitian`` is set the matrix is checked on construction.
    """

    space: HilbertSpace
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = _frozen(self.entries)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceMismatch(f"matrix of shape {m.shape} does not act on space of dim {d}")
        if self.hermitian and hermiticity_error(m) >= HERMITIAN_TOL:
            raise NonHermitianInput(f"max|A - A†| = {hermiticity_error(m):.3e}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.eye(space.dim), hermitian=True)

    @classmethod
    def zeros(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.zeros((space.dim, space.dim)), hermitian=True)

    def dagger(self) -> "Operator":
        return Operator(self.space, self.entries.conj().T, self.hermitian)

    def apply(self, psi: QuantumState) -> np.ndarray:
        """Unnormalised image ``A|psi>``."""
        _check_same(self.space, psi.space)
        return self.entries @ psi.amplitudes

    def expectation(self, psi: QuantumState) -> complex:
        _check_same(self.space, psi.space)
        return complex(np.vdot(psi.amplitudes, self.entries @ psi.amplitudes))

    def is_unitary(self, tol: float = 1e-10) -> bool:
        m = self.entries
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) < tol)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same(self.space, other.space)
        return Operator(self.space, self.entries + other.entries, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same(self.space, other.space)
        return Operator(self.space, self.entries - other.entries, self.hermitian and other.hermitian)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.entries, self.hermitian)

    def __mul__(self, scalar) -> "Operator":
        scalar = complex(scalar)
        return Operator(self.space, scalar * self.entries, self.hermitian and scalar.imag == 0)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same(self.space, other.space)
        return Operator(self.space, self.entries @ other.entries)


def _check_same(a: HilbertSpace, b: HilbertSpace) -> None:
    if a.dims != b.dims:
        raise SpaceMismatch(f"spaces differ: {a.factors} vs {b.factors}")


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def local_operator(space: HilbertSpace, ops: Mapping[str, np.ndarray], hermitian: bool = False) -> Operator:
    """Tensor product of the given single-factor matrices with identities elsewhere."""
    for label in ops:
        space.index(label)
    full = np.ones((1, 1), dtype=complex)
    for label, dim in space.factors:
        m = np.asarray(ops.get(label, np.eye(dim)), dtype=complex)
        if m.shape != (dim, dim):
            raise SpaceMismatch(f"matrix for {label!r} has shape {m.shape}, factor dim is {dim}")
        full = np.kron(full, m)
    return Operator(space, full, hermitian=hermitian)


def kron(a: Operator, b: Operator) -> Operator:
    return Operator(a.space.tensor(b.space), np.kron(a.entries, b.entries), a.hermitian and b.hermitian)


def eigh(h: Operator) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian operator."""
    m = h.entries
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if hermiticity_error(m) >= HERMITIAN_TOL * scale:
        raise NonHermitianInput(f"max|A - A†| = {hermiticity_error(m):.3e}")
    return np.linalg.eigh(0.5 * (m + m.conj().T))


def propagator(h: Operator, t: float) -> Operator:
    """``exp(-i h t / ħ)`` with ``h`` in μeV and ``t`` in ns."""
    w, v = eigh(h)
    return Operator(h.space, (v * np.exp(-1j * w * t / HBAR)) @ v.conj().T)


def evolve(h: Operator, psi: QuantumState, t: float) -> QuantumState:
    """Evolve ``psi`` for a time ``t`` (ns) under the time-independent Hamiltonian ``h``."""
    _check_same(h.space, psi.space)
    w, v = eigh(h)
    out = v @ (np.exp(-1j * w * t / HBAR) * (v.conj().T @ psi.amplitudes))
    # re-normalise away the last few ulps so the result passes the state invariant
    return QuantumState(psi.space, out / np.linalg.norm(out))


def evolve_many(h: Operator, psi: QuantumState, times: Sequence[float]) -> np.ndarray:
    """Amplitudes at each of ``times`` as a ``(len(times), dim)`` array (one diagonalisation)."""
    _check_same(h.space, psi.space)
    w, v = eigh(h)
    c0 = v.conj().T @ psi.amplitudes
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w) / HBAR)
    return (phases * c0) @ v.T


def _split(space: HilbertSpace, keep: Iterable[str]) -> tuple[list[int], list[int]]:
    keep = list(keep)
    idx = [space.index(label) for label in keep]
    if len(set(idx)) != len(idx):
        raise InvalidPartition(f"repeated labels in {keep}")
    rest = [i for i in range(len(space.factors)) if i not in idx]
    return idx, rest


def reduced_density_matrix(psi: QuantumState | np.ndarray, keep: Iterable[str], space: HilbertSpace | None = None) -> np.ndarray:
    """Partial trace onto the factors in ``keep`` (in the order given).

    ``psi`` is either a state or a density matrix; a density matrix needs
    ``space``.
    """
    if isinstance(psi, QuantumState):
        space = psi.space
        rho = None
        vec = psi.amplitudes
    else:
        if space is None:
            raise InputError("a density matrix needs its HilbertSpace")
        rho = np.asarray(psi, dtype=complex)
        if rho.shape != (space.dim, space.dim):
            raise SpaceMismatch(f"density matrix shape {rho.shape} vs dim {space.dim}")
    idx, rest = _split(space, keep)
    dims = space.dims
    dk = int(np.prod([dims[i] for i in idx])) if idx else 1
    dr = int(np.prod([dims[i] for i in rest])) if rest else 1
    if rho is None:
        t = vec.reshape(dims).transpose(idx + rest).reshape(dk, dr)
        return t @ t.conj().T
    n = len(dims)
    t = rho.reshape(dims + dims).transpose(idx + rest + [n + i for i in idx] + [n + i for i in rest])
    t = t.reshape(dk, dr, dk, dr)
    return np.einsum("arbr->ab", t)


def entanglement_entropy(psi: QuantumState, cut: Iterable[str]) -> float:
    """Von Neumann entropy (bits) of the factors in ``cut`` for a pure bipartite state."""
    cut = list(cut)
    idx, rest = _split(psi.space, cut)
    if not idx or not rest:
        raise InvalidPartition("both sides of the cut must be non-empty")
    dims = psi.space.dims
    da = int(np.prod([dims[i] for i in idx]))
    m = psi.amplitudes.reshape(dims).transpose(idx + rest).reshape(da, -1)
    p = np.linalg.svd(m, compute_uv=False) ** 2
    p = p[p > 1e-300]
    s = float(-np.sum(p * np.log2(p)))
    return max(s, 0.0)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    # round-off eigenvalues would otherwise enter as sqrt(eps)
    w = np.where(w > 1e-14 * max(float(w.max()), 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``, via the nuclear norm of ``sqrt(rho) sqrt(sigma)``."""
    s = np.linalg.svd(_psd_sqrt(np.asarray(rho, complex)) @ _psd_sqrt(np.asarray(sigma, complex)), compute_uv=False)
    return float(np.sum(s) ** 2)
