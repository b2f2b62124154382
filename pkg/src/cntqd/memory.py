"""Central-spin model of the dot electron coupled to an on-axis nuclear-spin chain.

The joint space is ``spin_e ⊗ valley_e ⊗ n1 ⊗ … ⊗ nN`` (each nucleus I = 1/2).
Per site the coupling is

    H_k = -(coupling_scale / r_k³)·[I_z^k L_z + 3 (I^k·n)(S·n) - I^k·S]

with n along the tube axis and L_z = ±1 on the valley factor. Only the
axial component of L survives in the two-dimensional valley space. The
write protocol is a Hartmann-Hahn flip-flop swap: the field is tuned until
``|↓_e ↑_n>`` and ``|↑_e ↓_n>`` are degenerate and the system is then left
alone for half a flip-flop period.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .constants import G_PROTON, HBAR, MU_N
from .dotmodel import DotParameters
from .errors import InputError, NumericalError
from .qstate import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    HilbertSpace,
    Operator,
    QuantumState,
    SpaceMismatch,
    evolve,
    evolve_many,
    local_operator,
    reduced_density_matrix,
    state_fidelity,
)

MAX_SITES = 10
UP, DOWN = 0, 1


class CoincidentPositions(InputError):
    pass


class NoResonanceFound(NumericalError):
    pass


@dataclass(frozen=True)
class NuclearChain:
    """Axial positions (Å) of the trapped spin-1/2 nuclei."""

    positions: tuple[float, ...]
    g_n: float = G_PROTON

    def __post_init__(self):
        pos = tuple(float(z) for z in np.atleast_1d(self.positions))
        object.__setattr__(self, "positions", pos)
        if not 1 <= len(pos) <= MAX_SITES:
            raise InputError(f"chain needs between 1 and {MAX_SITES} sites, got {len(pos)}")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise InputError("nuclear positions must be strictly increasing")

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def spin(self) -> float:
        return 0.5

    @classmethod
    def uniform(cls, n: int, spacing: float, start: float, g_n: float = G_PROTON) -> "NuclearChain":
        return cls(tuple(start + spacing * k for k in range(n)), g_n)


@dataclass(frozen=True)
class MemoryScenario:
    """Electron + chain configuration.

    ``coupling_scale`` (μeV·Å³) is the prefactor of the 1/r³ law. Left as
    ``None`` it is set so that the nearest nucleus couples with 1 μeV.
    """

    chain: NuclearChain
    dot: DotParameters = field(default_factory=DotParameters)
    electron_position: float = 0.0
    b_field: float = 0.0
    coupling_scale: float | None = None

    def __post_init__(self):
        d = self.distances
        if np.any(d < 1e-9):
            raise CoincidentPositions("electron sits on a nuclear site")
        if self.coupling_scale is None:
            object.__setattr__(self, "coupling_scale", float(d.min() ** 3))
        if not self.coupling_scale >= 0:
            raise InputError(f"coupling_scale must be >= 0, got {self.coupling_scale!r}")

    @property
    def distances(self) -> np.ndarray:
        return np.abs(np.asarray(self.chain.positions) - self.electron_position)

    @property
    def space(self) -> HilbertSpace:
        return memory_space(self.chain.count)

    @property
    def couplings(self) -> np.ndarray:
        """``coupling_scale / r_k³`` per site, μeV."""
        return self.coupling_scale / self.distances**3


def memory_space(n: int) -> HilbertSpace:
    return HilbertSpace((("spin_e", 2), ("valley_e", 2)) + tuple((f"n{k + 1}", 2) for k in range(n)))


def nuclear_labels(n: int) -> list[str]:
    return [f"n{k + 1}" for k in range(n)]


def hyperfine_hamiltonian(s: MemoryScenario) -> Operator:
    space = s.space
    sx, sy, sz = 0.5 * SIGMA_X, 0.5 * SIGMA_Y, 0.5 * SIGMA_Z
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for label, a in zip(nuclear_labels(s.chain.count), s.couplings):
        orbital = local_operator(space, {label: sz, "valley_e": SIGMA_Z}).entries
        ising = local_operator(space, {label: sz, "spin_e": sz}).entries
        flip_x = local_operator(space, {label: sx, "spin_e": sx}).entries
        flip_y = local_operator(space, {label: sy, "spin_e": sy}).entries
        # n along z: 3(I·n)(S·n) - I·S = 2 I_z S_z - I_x S_x - I_y S_y
        h -= a * (orbital + 2 * ising - flip_x - flip_y)
    return Operator(space, h, hermitian=True)


def zeeman_hamiltonian(s: MemoryScenario) -> Operator:
    """Electron (dot Zeeman) plus nuclear ``-g_n·μ_N·B·I_z`` terms."""
    p, b, space = s.dot, s.b_field, s.space
    electron = p.zeeman_sign * b * (
        p.mu_orb * local_operator(space, {"valley_e": SIGMA_Z}).entries
        + p.spin_moment * local_operator(space, {"spin_e": SIGMA_Z}).entries
    )
    nuclear = sum(local_operator(space, {label: 0.5 * SIGMA_Z}).entries for label in nuclear_labels(s.chain.count))
    return Operator(space, electron - s.chain.g_n * MU_N * b * nuclear, hermitian=True)


def add_zeeman(s: MemoryScenario, h: Operator) -> Operator:
    return h + zeeman_hamiltonian(s)


def memory_hamiltonian(s: MemoryScenario) -> Operator:
    return add_zeeman(s, hyperfine_hamiltonian(s))


def magnetization(space: HilbertSpace) -> Operator:
    """Total ``S_z + Σ I_z``."""
    labels = ["spin_e"] + [l for l in space.labels if l.startswith("n")]
    return Operator(space, sum(local_operator(space, {l: 0.5 * SIGMA_Z}).entries for l in labels), hermitian=True)


def secular_part(h: Operator) -> Operator:
    """Keep only matrix elements between basis states of equal total magnetisation."""
    m = np.real(np.diag(magnetization(h.space).entries))
    mask = np.isclose(m[:, None], m[None, :])
    return Operator(h.space, np.where(mask, h.entries, 0.0), h.hermitian)


def product_index(space: HilbertSpace, electron: int, valley: int, nuclei: Sequence[int]) -> int:
    digits = {"spin_e": electron, "valley_e": valley}
    digits.update(dict(zip(nuclear_labels(len(nuclei)), nuclei)))
    return space.basis_index(**digits)


def _valley_digit(valley: int) -> int:
    if valley not in (1, -1):
        raise InputError(f"valley must be +1 or -1, got {valley!r}")
    return UP if valley == 1 else DOWN


def flipflop_element(s: MemoryScenario, site: int = 0, valley: int = 1) -> complex:
    """``<↑_e ↓_k | H | ↓_e ↑_k>`` with every other nucleus up."""
    n = s.chain.count
    v = _valley_digit(valley)
    before = [UP] * n
    after = [UP] * n
    after[site] = DOWN
    h = hyperfine_hamiltonian(s).entries
    return complex(h[product_index(s.space, UP, v, after), product_index(s.space, DOWN, v, before)])


class WriteMode(str, enum.Enum):
    SWAP = "swap"
    COLLECTIVE = "collective"


def _bright_vector(s: MemoryScenario, valley: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Electron-excited start vector, the matching nuclear-excited target and their coupling."""
    n, v = s.chain.count, _valley_digit(valley)
    space = s.space
    start = np.zeros(space.dim, dtype=complex)
    start[product_index(space, DOWN, v, [UP] * n)] = 1.0
    amps = np.array([flipflop_element(s, k, valley) for k in range(n)])
    coupling = float(np.linalg.norm(amps))
    target = np.zeros(space.dim, dtype=complex)
    if coupling == 0:
        return start, target, 0.0
    for k, a in enumerate(amps):
        digits = [UP] * n
        digits[k] = DOWN
        target[product_index(space, UP, v, digits)] = a / coupling
    return start, target, coupling


def resonance_detuning(s: MemoryScenario, b: float, valley: int = 1) -> float:
    """Diagonal energy of the electron-excited state minus that of the bright nuclear state."""
    scen = replace(s, b_field=b)
    h = memory_hamiltonian(scen).entries
    start, target, _ = _bright_vector(scen, valley)
    return float(np.real(np.vdot(start, h @ start) - np.vdot(target, h @ target)))


def hartmann_hahn_field(s: MemoryScenario, valley: int = 1, b_range: tuple[float, float] = (-1.0, 1.0)) -> float:
    """Field (T) inside ``b_range`` where the flip-flop pair is degenerate."""
    lo, hi = b_range
    if s.coupling_scale == 0:
        raise NoResonanceFound("no flip-flop coupling without hyperfine interaction")
    f_lo, f_hi = resonance_detuning(s, lo, valley), resonance_detuning(s, hi, valley)
    if f_lo == 0:
        return float(lo)
    if f_hi == 0:
        return float(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoResonanceFound(f"flip-flop pair never degenerate inside [{lo}, {hi}] T")
    return float(brentq(lambda b: resonance_detuning(s, b, valley), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def swap_time(coupling: float) -> float:
    """Time (ns) for a complete flip-flop transfer with matrix element ``coupling`` (μeV)."""
    return np.pi * HBAR / (2 * abs(coupling))


@dataclass(frozen=True)
class WriteResult:
    final_state: QuantumState
    transfer_fidelity: float
    b_field: float
    t_swap: float
    coupling: float  # |flip-flop matrix element|, μeV (bright-mode value for collective writes)


def write_protocol(
    s: MemoryScenario,
    electron_qubit: QuantumState,
    valley: int = 1,
    mode: WriteMode | str = WriteMode.SWAP,
    b_range: tuple[float, float] = (-1.0, 1.0),
    correct_phase: bool = True,
) -> WriteResult:
    """Swap the electron spin qubit into the nuclear chain (initially all up).

    ``|↑_e>`` maps to the all-up chain and ``|↓_e>`` to the single-flip
    state (the bright mode for a collective write). ``transfer_fidelity`` is
    ``<q|ρ_n|q>`` with ``q`` the electron amplitudes in that encoding. With
    ``correct_phase`` the deterministic relative phase picked up during the
    swap is removed by a frame update on the nuclear encoding. This matters
    only for superposition inputs.
    """
    mode = WriteMode(mode)
    n = s.chain.count
    if mode is WriteMode.SWAP and n != 1:
        raise InputError("swap mode needs exactly one nucleus; use mode='collective'")
    if electron_qubit.space.dim != 2:
        raise SpaceMismatch("electron_qubit must be a single spin-1/2 state")

    if s.coupling_scale == 0:
        # nothing drives the transfer: report the untouched initial state
        b, t_swap = s.b_field, 0.0
    else:
        b = hartmann_hahn_field(s, valley, b_range)
    scen = replace(s, b_field=b)
    space = scen.space
    h = memory_hamiltonian(scen)
    start, target, coupling = _bright_vector(scen, valley)
    if coupling > 0:
        t_swap = swap_time(coupling)
    else:
        target = np.zeros(space.dim, dtype=complex)
        target[product_index(space, UP, _valley_digit(valley), [DOWN] + [UP] * (n - 1))] = 1.0

    v = _valley_digit(valley)
    up_state = np.zeros(space.dim, dtype=complex)
    up_state[product_index(space, UP, v, [UP] * n)] = 1.0
    c_up, c_down = electron_qubit.amplitudes
    psi0 = QuantumState(space, c_up * up_state + c_down * start)
    final = evolve(h, psi0, t_swap)

    rho_n = reduced_density_matrix(final, nuclear_labels(n))
    enc_up = up_state.reshape(4, -1)[v]  # all-up chain
    enc_down = target.reshape(4, -1)[v]  # single flip / bright mode
    if correct_phase:
        a_up = np.vdot(up_state, evolve(h, QuantumState(space, up_state), t_swap).amplitudes)
        a_down = np.vdot(target, evolve(h, QuantumState(space, start), t_swap).amplitudes)
        rel = a_down / a_up if abs(a_up) > 0 and abs(a_down) > 0 else 1.0
        enc_down = enc_down * rel / abs(rel) if rel != 0 else enc_down
    q = c_up * enc_up + c_down * enc_down
    fidelity = float(np.real(np.vdot(q, rho_n @ q)))
    return WriteResult(final, min(max(fidelity, 0.0), 1.0), b, t_swap, coupling)


def faraday_readout(joint, chain: NuclearChain) -> float:
    """Collective nuclear polarisation ``<Σ I_z>/N`` of a joint state or density matrix."""
    space = memory_space(chain.count)
    if isinstance(joint, QuantumState):
        if joint.space.dims != space.dims:
            raise SpaceMismatch(f"state space {joint.space.factors} does not match a {chain.count}-site chain")
        rho = joint.density_matrix()
    else:
        rho = np.asarray(joint, dtype=complex)
        if rho.shape != (space.dim, space.dim):
            raise SpaceMismatch(f"density matrix shape {rho.shape} does not match dim {space.dim}")
    total = sum(local_operator(space, {l: 0.5 * SIGMA_Z}).entries for l in nuclear_labels(chain.count))
    return float(np.real(np.trace(rho @ total))) / chain.count


@dataclass(frozen=True)
class CoherenceTrajectory:
    """Electron coherence along a free evolution.

    ``overlap`` is the fidelity between the electron's reduced state and the
    state it would have under its own Zeeman Hamiltonian alone, so a
    decoupled electron stays at 1. ``offloaded`` repeats the calculation
    with the hyperfine coupling switched off.
    """

    times: np.ndarray
    overlap: np.ndarray
    offloaded: np.ndarray
    faraday: np.ndarray


def _electron_zeeman(p: DotParameters, b: float) -> np.ndarray:
    sz = np.diag([1.0, 1.0, -1.0, -1.0])
    lz = np.diag([1.0, -1.0, 1.0, -1.0])
    return p.zeeman_sign * b * (p.mu_orb * lz + p.spin_moment * sz)


def _overlaps(s: MemoryScenario, psi0: QuantumState, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    amps = evolve_many(memory_hamiltonian(s), psi0, times)
    rho_e0 = reduced_density_matrix(psi0, ["spin_e", "valley_e"])
    w = np.diag(_electron_zeeman(s.dot, s.b_field)).real
    overlap = np.empty(len(times))
    faraday = np.empty(len(times))
    for i, (t, a) in enumerate(zip(times, amps)):
        state = QuantumState(s.space, a / np.linalg.norm(a))
        rho_e = reduced_density_matrix(state, ["spin_e", "valley_e"])
        u0 = np.exp(-1j * w * t / HBAR)
        ref = u0[:, None] * rho_e0 * u0.conj()[None, :]
        overlap[i] = state_fidelity(ref, rho_e)
        faraday[i] = faraday_readout(state, s.chain)
    return overlap, faraday


def coherence_trajectory(s: MemoryScenario, psi0: QuantumState, times: Sequence[float]) -> CoherenceTrajectory:
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise InputError("times must be ascending")
    if psi0.space.dims != s.space.dims:
        raise SpaceMismatch(f"psi0 lives in {psi0.space.factors}, scenario space is {s.space.factors}")
    overlap, faraday = _overlaps(s, psi0, times)
    offloaded, _ = _overlaps(replace(s, coupling_scale=0.0), psi0, times)
    return CoherenceTrajectory(times, overlap, offloaded, faraday)


def initial_state(s: MemoryScenario, electron_qubit: QuantumState, valley: int = 1) -> QuantumState:
    """``electron_qubit ⊗ |valley> ⊗ |↑…↑>``."""
    v = np.zeros(2, dtype=complex)
    v[_valley_digit(valley)] = 1.0
    chain = np.zeros(2**s.chain.count, dtype=complex)
    chain[0] = 1.0
    return QuantumState(s.space, np.kron(np.kron(electron_qubit.amplitudes, v), chain))
