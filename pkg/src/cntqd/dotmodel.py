"""Single-electron spin⊗valley model of a nanotube quantum dot.

Basis ordering is ``spin ⊗ valley`` with index 0 = ``|+1/2>`` / ``|↑>`` (m_l = +1)
and index 1 = ``|-1/2>`` / ``|↓>`` (m_l = -1), so the four product states are

====  =========  ===============
idx   name       ket
====  =========  ===============
0     alpha      |+1/2>_S |↑>_L
1     delta      |+1/2>_S |↓>_L
2     beta       |-1/2>_S |↑>_L
3     gamma      |-1/2>_S |↓>_L
====  =========  ===============
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .angmom import clebsch_gordan
from .constants import MU_B
from .errors import InputError, NumericalError
from .qstate import (
    SIGMA_X,
    SIGMA_Z,
    HilbertSpace,
    Operator,
    QuantumState,
    SpaceMismatch,
    eigh,
    local_operator,
)

DOT_SPACE = HilbertSpace.of(("spin", 2), ("valley", 2))

PRODUCT_INDEX = {"alpha": 0, "delta": 1, "beta": 2, "gamma": 3}
PRODUCT_LABELS = ("alpha", "delta", "beta", "gamma")


class EmptyGrid(InputError):
    pass


class NoCrossingFound(NumericalError):
    pass


@dataclass(frozen=True)
class DotParameters:
    """Physical constants of one dot.

    Energies in μeV, ``mu_orb`` in μeV/T, ``lever_arm`` in μeV/V.
    ``so_sign`` and ``zeeman_sign`` pick the sign convention of the
    spin-orbit and Zeeman terms; the defaults make {alpha, gamma} the lower
    Kramers doublet and put the alpha/delta anti-crossing at positive field.
    """

    delta_so: float = 400.0
    delta_kk: float = 65.0
    g_s: float = 2.0
    mu_orb: float = 330.0
    lever_arm: float = 1000.0
    so_sign: int = -1
    zeeman_sign: int = 1

    def __post_init__(self):
        if not self.delta_so > 0:
            raise InputError(f"delta_so must be > 0, got {self.delta_so!r}")
        if not self.delta_kk >= 0:
            raise InputError(f"delta_kk must be >= 0, got {self.delta_kk!r}")
        if not self.g_s > 0:
            raise InputError(f"g_s must be > 0, got {self.g_s!r}")
        if not self.mu_orb > 0:
            raise InputError(f"mu_orb must be > 0, got {self.mu_orb!r}")
        if self.so_sign not in (-1, 1):
            raise InputError(f"so_sign must be +1 or -1, got {self.so_sign!r}")
        if self.zeeman_sign not in (-1, 1):
            raise InputError(f"zeeman_sign must be +1 or -1, got {self.zeeman_sign!r}")

    @property
    def spin_moment(self) -> float:
        """Spin Zeeman coefficient ``g_s·μ_B/2`` in μeV/T."""
        return 0.5 * self.g_s * MU_B


def _matrix(p: DotParameters, b: float, vg: float, delta_kk: float) -> np.ndarray:
    sz = np.diag([1.0, 1.0, -1.0, -1.0])  # spin
    lz = np.diag([1.0, -1.0, 1.0, -1.0])  # valley
    lx = np.kron(np.eye(2), SIGMA_X.real)
    h = (
        p.so_sign * 0.5 * p.delta_so * sz @ lz
        + p.zeeman_sign * b * (p.mu_orb * lz + p.spin_moment * sz)
        + 0.5 * delta_kk * lx
        + p.lever_arm * vg * np.eye(4)
    )
    return h.astype(complex)


def build_hamiltonian(p: DotParameters, b: float, vg: float = 0.0) -> Operator:
    """4×4 dot Hamiltonian in μeV at field ``b`` (T) and gate voltage ``vg`` (V)."""
    return Operator(DOT_SPACE, _matrix(p, b, vg, p.delta_kk), hermitian=True)


def diagonal_energies(p: DotParameters, b: float, vg: float = 0.0) -> dict[str, float]:
    """Energies of the four product states with valley mixing dropped."""
    d = np.diag(_matrix(p, b, vg, 0.0)).real
    return {name: float(d[i]) for name, i in PRODUCT_INDEX.items()}


def valley_operator(space: HilbertSpace = DOT_SPACE, label: str = "valley") -> Operator:
    """σ_x on the valley factor (the microwave drive channel)."""
    return local_operator(space, {label: SIGMA_X}, hermitian=True)


def valley_z(space: HilbertSpace = DOT_SPACE, label: str = "valley") -> Operator:
    return local_operator(space, {label: SIGMA_Z}, hermitian=True)


@dataclass(frozen=True)
class SpectrumPoint:
    b_field: float
    gate_v: float
    energies: np.ndarray
    states: np.ndarray


def spectrum_sweep(p: DotParameters, b_grid: Sequence[float], vg: float = 0.0) -> list[SpectrumPoint]:
    b_grid = np.asarray(b_grid, dtype=float).ravel()
    if b_grid.size == 0:
        raise EmptyGrid("field grid is empty")
    if np.any(np.diff(b_grid) <= 0):
        raise InputError("field grid must be strictly increasing")
    out = []
    for b in b_grid:
        w, v = eigh(build_hamiltonian(p, float(b), vg))
        w.setflags(write=False)
        v.setflags(write=False)
        out.append(SpectrumPoint(float(b), float(vg), w, v))
    return out


@dataclass(frozen=True)
class Crossing:
    b_star: float
    gap: float
    pair: tuple[str, str]
    levels: tuple[int, int]


def _pair_labels(vectors: np.ndarray) -> tuple[str, str]:
    weight = np.sum(np.abs(vectors) ** 2, axis=1)
    top = np.argsort(-weight, kind="stable")[:2]
    return tuple(sorted((PRODUCT_LABELS[i] for i in top), key=PRODUCT_LABELS.index))


def find_crossings(
    p: DotParameters,
    b_range: tuple[float, float],
    vg: float = 0.0,
    points: int = 2001,
    xtol: float = 1e-10,
) -> list[Crossing]:
    """Local minima of every adjacent level gap inside ``b_range``.

    A coarse scan brackets each minimum, then a bounded scalar minimiser
    refines it to ``xtol`` tesla.
    """
    lo, hi = map(float, b_range)
    if not hi > lo:
        raise InputError(f"b_range must be increasing, got {b_range}")
    grid = np.linspace(lo, hi, points)
    levels = np.array([np.linalg.eigvalsh(_matrix(p, b, vg, p.delta_kk)) for b in grid])
    gaps = np.diff(levels, axis=1)

    found = []
    for k in range(3):
        g = gaps[:, k]
        for i in range(1, points - 1):
            if g[i] <= g[i - 1] and g[i] < g[i + 1]:
                def gap(b, k=k):
                    w = np.linalg.eigvalsh(_matrix(p, b, vg, p.delta_kk))
                    return w[k + 1] - w[k]

                res = minimize_scalar(gap, bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                      options={"xatol": xtol})
                b_star = float(res.x)
                _, v = np.linalg.eigh(_matrix(p, b_star, vg, p.delta_kk))
                found.append(Crossing(b_star, float(gap(b_star)), _pair_labels(v[:, k:k + 2]), (k, k + 1)))
    if not found:
        raise NoCrossingFound(f"no level-gap minimum inside [{lo}, {hi}] T")
    found.sort(key=lambda c: (c.b_star, c.levels))
    return found


def crossing_field(p: DotParameters, pair: tuple[str, str] = ("alpha", "delta")) -> float:
    """Field where the two product states' diagonal energies coincide."""
    e0 = diagonal_energies(p, 0.0)
    e1 = diagonal_energies(p, 1.0)
    a, b = pair
    slope = (e1[a] - e0[a]) - (e1[b] - e0[b])
    if slope == 0:
        raise NoCrossingFound(f"{a} and {b} run parallel in field")
    return -(e0[a] - e0[b]) / slope


class Regime(str, enum.Enum):
    B_ZERO = "B_zero"
    B_PLUS = "B_plus"


@dataclass(frozen=True)
class NamedState:
    label: str
    state: QuantumState
    phase: float = 0.0


def _ket(*terms: tuple[str, complex]) -> QuantumState:
    v = np.zeros(4, dtype=complex)
    for name, c in terms:
        v[PRODUCT_INDEX[name]] += c
    return QuantumState.from_vector(DOT_SPACE, v)


def named_state(label: str, phase: float = 0.0) -> NamedState:
    """One of the product states, Kramers doublets or valley-superposition states.

    ``phase`` is the relative phase of the second component; it is ignored
    for the four product states.
    """
    e = np.exp(1j * phase)
    if label in PRODUCT_INDEX:
        return NamedState(label, _ket((label, 1.0)), 0.0)
    builders = {
        "kramers1": (("alpha", 1.0), ("gamma", e)),
        "kramers2": (("beta", 1.0), ("delta", e)),
        "omega1": (("gamma", 1.0), ("beta", e)),  # |-1/2>(|↓> + e^{iφ}|↑>)
        "omega2": (("alpha", 1.0), ("delta", e)),  # |+1/2>(|↑> + e^{iφ}|↓>)
    }
    if label not in builders:
        raise InputError(f"unknown state label {label!r}")
    return NamedState(label, _ket(*builders[label]), float(phase))


def kramers_states(phi1: float, phi2: float) -> tuple[NamedState, NamedState]:
    return named_state("kramers1", phi1), named_state("kramers2", phi2)


def logical_encoding(regime: Regime | str) -> tuple[NamedState, NamedState]:
    """``(ket0, ket1)`` of the requested logical encoding."""
    regime = Regime(regime)
    if regime is Regime.B_ZERO:
        return named_state("gamma"), named_state("alpha")
    return named_state("beta"), named_state("gamma")


# |J, m_j> labels of the L=1 ⊗ S=1/2 coupled basis
COUPLED_BASIS = ((1.5, 1.5), (1.5, 0.5), (1.5, -0.5), (1.5, -1.5), (0.5, 0.5), (0.5, -0.5))
# uncoupled |m_l, m_s> ordering of the 6-dim L=1 ⊗ S=1/2 space
UNCOUPLED_BASIS = tuple((ml, ms) for ml in (1, 0, -1) for ms in (0.5, -0.5))


def coupled_basis_matrix() -> np.ndarray:
    """6×6 unitary mapping uncoupled ``|m_l, m_s>`` amplitudes to ``|J, m_j>`` amplitudes."""
    u = np.zeros((6, 6))
    for r, (j, mj) in enumerate(COUPLED_BASIS):
        for c, (ml, ms) in enumerate(UNCOUPLED_BASIS):
            u[r, c] = clebsch_gordan(1, ml, 0.5, ms, j, mj)
    return u


def valley_embedding() -> np.ndarray:
    """6×4 isometry placing the dot basis inside L=1 ⊗ S=1/2 (m_l = 0 left empty)."""
    e = np.zeros((6, 4))
    for idx in range(4):
        spin, valley = divmod(idx, 2)
        ms = 0.5 if spin == 0 else -0.5
        ml = 1 if valley == 0 else -1
        e[UNCOUPLED_BASIS.index((ml, ms)), idx] = 1.0
    return e


def coupled_basis_transform(s: QuantumState) -> np.ndarray:
    """Amplitudes of ``s`` on :data:`COUPLED_BASIS`."""
    if s.space.dims != DOT_SPACE.dims:
        raise SpaceMismatch(f"expected the 4-dim dot space, got {s.space.factors}")
    return coupled_basis_matrix() @ (valley_embedding() @ s.amplitudes)

