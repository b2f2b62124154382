"""Statics of an atom chain inside a continuum carbon cylinder.

Each atom feels a 12-6 Lennard-Jones wall smeared over the tube surface at
areal density ``surface_density`` plus pairwise 12-6 Lennard-Jones forces
from the other atoms. The axial integral over the surface is done in closed
form (infinite or finite tube) and the azimuthal one by the periodic
trapezoid rule, which converges geometrically for this smooth integrand.

Units: Å, meV, amu, cm⁻¹. The tube axis is ``z`` and a finite tube spans
``[-tube_length/2, tube_length/2]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .constants import WAVENUMBER_PER_SQRT_MEV_A2_AMU
from .errors import InputError, NumericalError

MIN_TUBE_RADIUS = 3.0
DEFAULT_ORDER = 128
MAX_ITER = 100_000
GRAD_TOL = 1e-8
FD_STEP = 1e-4


class OutsideTube(InputError):
    pass


class NonConvergence(NumericalError):
    pass


class NotConverged(InputError):
    pass


@dataclass(frozen=True)
class TrapConfig:
    """Tube geometry and Lennard-Jones constants.

    ``tube_length=inf`` selects the infinite-tube approximation.
    ``element`` and ``mass`` only label the XYZ output and set the default
    mass for :func:`normal_modes`.
    """

    tube_radius: float = 3.39
    tube_length: float = math.inf
    wall_epsilon: float = 2.14
    wall_sigma: float = 3.05
    surface_density: float = 0.38
    atom_epsilon: float = 1.9
    atom_sigma: float = 2.7
    element: str = "H"
    mass: float = 1.008
    quadrature_order: int = DEFAULT_ORDER

    def __post_init__(self):
        for name in ("tube_radius", "tube_length", "wall_epsilon", "wall_sigma", "surface_density",
                     "atom_epsilon", "atom_sigma", "mass"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise InputError(f"{name} must be > 0, got {v!r}")
        if self.tube_radius < MIN_TUBE_RADIUS:
            raise InputError(f"tube_radius must be >= {MIN_TUBE_RADIUS} Å, got {self.tube_radius!r}")
        if not (isinstance(self.quadrature_order, int) and self.quadrature_order >= 4 and self.quadrature_order % 2 == 0):
            raise InputError(f"quadrature_order must be an even integer >= 4, got {self.quadrature_order!r}")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.tube_length)

    @property
    def pair_minimum(self) -> float:
        return 2 ** (1 / 6) * self.atom_sigma

    @classmethod
    def preset(cls, name: str, **overrides) -> "TrapConfig":
        table = load_parameters()
        if name not in table:
            raise InputError(f"unknown trap preset {name!r}; known: {sorted(table)}")
        return cls(**{**table[name], **overrides})


def load_parameters(path: str | Path | None = None) -> dict[str, dict]:
    """Read a parameters file: ``{preset: {field: value}}`` as JSON.

    Without ``path`` the bundled defaults are returned. Keys starting with
    ``_`` are comments and are dropped.
    """
    if path is None:
        text = resources.files("cntqd").joinpath("data/trap_parameters.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    known = {f for f in TrapConfig.__dataclass_fields__}
    out = {}
    for name, entry in raw.items():
        if name.startswith("_"):
            continue
        entry = {k: v for k, v in entry.items() if not k.startswith("_")}
        bad = set(entry) - known
        if bad:
            raise InputError(f"preset {name!r} has unknown keys {sorted(bad)}")
        out[name] = entry
    return out


def _nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Cos/sin of the first half of the azimuthal nodes; the rest are their negatives."""
    theta = 2 * np.pi * np.arange(order // 2) / order
    return np.cos(theta), np.sin(theta)


# ∫_{-∞}^{∞} (a² + u²)^{-n} du = K_n a^{1-2n}
_K6 = 63 * np.pi / 256
_K3 = 3 * np.pi / 8


def _antiderivatives(a: np.ndarray, u: np.ndarray, n_max: int) -> list[np.ndarray]:
    """``I_n(u) = ∫_0^u (a²+u²)^{-n}`` for n = 1..n_max via the standard recursion."""
    a2 = a * a
    q = a2 + u * u
    out = [np.arctan(u / a) / a]
    for n in range(2, n_max + 1):
        out.append(u / (2 * (n - 1) * a2 * q ** (n - 1)) + (2 * n - 3) / (2 * (n - 1) * a2) * out[-1])
    return out


def _axial(a: np.ndarray, z: float, c: TrapConfig):
    """Axial integrals and derivatives.

    Returns ``(J, dJ/da, dJ/dz)`` with ``J = σ¹² J_6 - σ⁶ J_3``.
    """
    s6 = c.wall_sigma**6
    s12 = s6 * s6
    if c.infinite:
        j6, j3 = _K6 * a**-11, _K3 * a**-5
        val = s12 * j6 - s6 * j3
        dval = s12 * (-11 * j6 / a) - s6 * (-5 * j3 / a)
        return val, dval, np.zeros_like(a)
    half = 0.5 * c.tube_length
    u_hi, u_lo = half - z, -half - z
    hi = _antiderivatives(a, np.full_like(a, u_hi), 7)
    lo = _antiderivatives(a, np.full_like(a, u_lo), 7)
    j = [h - l for h, l in zip(hi, lo)]  # j[n-1] = J_n
    val = s12 * j[5] - s6 * j[2]
    dval = s12 * (-12 * a * j[6]) - s6 * (-6 * a * j[3])

    def f(u, n):
        return (a * a + u * u) ** -n

    dz = s12 * (f(u_lo, 6) - f(u_hi, 6)) - s6 * (f(u_lo, 3) - f(u_hi, 3))
    return val, dval, dz


def _wall(point: np.ndarray, c: TrapConfig) -> tuple[float, np.ndarray]:
    x, y, z = map(float, point)
    r = math.hypot(x, y)
    if not r < c.tube_radius:
        raise OutsideTube(f"radial coordinate {r} Å is not inside the tube (R = {c.tube_radius} Å)")
    if not c.infinite and not abs(z) < 0.5 * c.tube_length:
        raise OutsideTube(f"axial coordinate {z} Å lies beyond the tube ends")
    R = c.tube_radius
    cos, sin = _nodes(c.quadrature_order)
    proj = x * cos + y * sin
    base = x * x + y * y + R * R
    # node pairs θ and θ+π: a² = base ∓ 2R·proj
    a_p = np.sqrt(base - 2 * R * proj)
    a_m = np.sqrt(base + 2 * R * proj)
    v_p, dv_p, dz_p = _axial(a_p, z, c)
    v_m, dv_m, dz_m = _axial(a_m, z, c)
    pref = 4 * c.wall_epsilon * c.surface_density * R * (2 * np.pi / c.quadrature_order)
    energy = pref * float(np.sum(v_p + v_m))
    # ∂a/∂x = (x - R cosθ)/a; the pair contributions cancel exactly on the axis
    gp, gm = dv_p / a_p, dv_m / a_m
    gx = np.sum(gp * (x - R * cos) + gm * (x + R * cos))
    gy = np.sum(gp * (y - R * sin) + gm * (y + R * sin))
    gz = np.sum(dz_p + dz_m)
    return energy, pref * np.array([gx, gy, gz])


def wall_potential(radial: float, axial: float, c: TrapConfig) -> tuple[float, tuple[float, float]]:
    """Wall energy (meV) and ``(∂E/∂radial, ∂E/∂axial)`` (meV/Å) at one point."""
    if radial < 0:
        raise InputError(f"radial must be >= 0, got {radial!r}")
    e, g = _wall(np.array([radial, 0.0, axial]), c)
    return e, (float(g[0]), float(g[2]))


def wall_curvature(c: TrapConfig, h: float = 1e-4) -> float:
    """On-axis transverse curvature ``∂²E/∂x²`` (meV/Å²) by central differences of the gradient."""
    return (_wall(np.array([h, 0, 0]), c)[1][0] - _wall(np.array([-h, 0, 0]), c)[1][0]) / (2 * h)


def pair_energy(r: np.ndarray, c: TrapConfig) -> np.ndarray:
    sr6 = (c.atom_sigma / r) ** 6
    return 4 * c.atom_epsilon * (sr6 * sr6 - sr6)


def chain_energy(coords, c: TrapConfig) -> tuple[float, np.ndarray]:
    """Total energy (meV) and gradient (N×3, meV/Å) of a set of atoms."""
    x = np.asarray(coords, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3:
        raise InputError(f"coords must be N×3, got shape {x.shape}")
    energy = 0.0
    grad = np.zeros_like(x)
    for k, point in enumerate(x):
        e, g = _wall(point, c)
        energy += e
        grad[k] = g
    if len(x) > 1:
        i, j = np.triu_indices(len(x), 1)
        d = x[i] - x[j]
        r = np.linalg.norm(d, axis=1)
        if np.any(r == 0):
            raise InputError("two atoms share a position")
        sr6 = (c.atom_sigma / r) ** 6
        energy += float(np.sum(4 * c.atom_epsilon * (sr6 * sr6 - sr6)))
        dedr = 4 * c.atom_epsilon * (-12 * sr6 * sr6 + 6 * sr6) / r
        f = (dedr / r)[:, None] * d
        np.add.at(grad, i, f)
        np.add.at(grad, j, -f)
    return float(energy), grad


@dataclass(frozen=True)
class ChainState:
    coordinates: np.ndarray
    energy: float
    converged: bool
    gradient_norm: float
    energy_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(np.sort(self.coordinates[:, 2]))

    @property
    def max_radial(self) -> float:
        return float(np.max(np.hypot(self.coordinates[:, 0], self.coordinates[:, 1])))


def seed_chain(n_atoms: int, c: TrapConfig, seed_jitter: float = 0.0, seed: int = 0,
               spacing: float | None = None) -> np.ndarray:
    """Uniform on-axis chain centred at z=0 with uniform jitter in every coordinate."""
    if n_atoms < 1:
        raise InputError(f"n_atoms must be >= 1, got {n_atoms!r}")
    if seed_jitter < 0:
        raise InputError(f"seed_jitter must be >= 0, got {seed_jitter!r}")
    a = c.pair_minimum if spacing is None else spacing
    x = np.zeros((n_atoms, 3))
    x[:, 2] = a * (np.arange(n_atoms) - 0.5 * (n_atoms - 1))
    rng = np.random.default_rng(seed)
    return x + rng.uniform(-seed_jitter, seed_jitter, size=x.shape)


def hessian(coords, c: TrapConfig, step: float = FD_STEP) -> np.ndarray:
    """3N×3N Hessian from central differences of the analytic gradient."""
    x = np.asarray(coords, dtype=float).ravel()
    h = np.empty((x.size, x.size))
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[k] += step
        xm[k] -= step
        gp = chain_energy(xp.reshape(-1, 3), c)[1].ravel()
        gm = chain_energy(xm.reshape(-1, 3), c)[1].ravel()
        h[:, k] = (gp - gm) / (2 * step)
    return 0.5 * (h + h.T)


def relax_chain(
    n_atoms: int,
    c: TrapConfig,
    seed_jitter: float = 0.0,
    seed: int = 0,
    initial=None,
    max_iter: int = MAX_ITER,
) -> ChainState:
    """Relax a chain from a jittered uniform seed (or from ``initial``).

    Quasi-Newton descent (BFGS with a Wolfe line search) followed by damped
    Newton steps on the finite-difference Hessian. The axial translation of
    an infinite tube is a zero mode, so the Newton solve uses a
    pseudo-inverse. Newton steps are halved until the energy does not rise.
    """
    x0 = seed_chain(n_atoms, c, seed_jitter, seed) if initial is None else np.array(initial, dtype=float)
    if x0.ndim != 2 or x0.shape[1] != 3:
        raise InputError(f"initial must be N×3, got shape {x0.shape}")
    history: list[float] = []

    def fun(v):
        try:
            e, g = chain_energy(v.reshape(-1, 3), c)
        except OutsideTube:
            # the wall energy diverges at the tube surface; line searches back off
            return np.inf, np.zeros_like(v)
        return e, g.ravel()

    e0, _ = chain_energy(x0, c)
    history.append(e0)
    res = minimize(fun, x0.ravel(), jac=True, method="BFGS",
                   callback=lambda xk: history.append(fun(xk)[0]),
                   options={"gtol": 1e-7, "maxiter": max_iter})
    x = res.x
    e, g = fun(x)
    if history[-1] != e:
        history.append(e)
    iterations = res.nit

    while np.linalg.norm(g) >= GRAD_TOL and iterations < max_iter:
        iterations += 1
        h = hessian(x.reshape(-1, 3), c)
        step = -np.linalg.pinv(h, rcond=1e-10, hermitian=True) @ g
        lam = 1.0
        for _ in range(60):
            e_new, g_new = fun(x + lam * step)
            if e_new <= e:
                break
            lam *= 0.5
        else:
            break
        x, e, g = x + lam * step, e_new, g_new
        history.append(e)
        if lam * np.linalg.norm(step) < 1e-14:
            break

    gnorm = float(np.linalg.norm(g))
    if iterations >= max_iter and gnorm >= GRAD_TOL:
        raise NonConvergence(f"relaxation hit the {max_iter}-iteration cap at |g| = {gnorm:.3e} meV/Å")
    return ChainState(x.reshape(-1, 3), float(e), gnorm < 1e-6, gnorm, tuple(history))


@dataclass(frozen=True)
class NormalModes:
    """Harmonic modes of a relaxed chain.

    ``frequencies`` (cm⁻¹) are ascending; unstable directions carry a
    negative sign. ``translation_mode`` indexes the mode with the largest
    rigid axial-shift overlap when the tube is infinite (``None`` otherwise).
    """

    frequencies: np.ndarray
    vectors: np.ndarray
    translation_mode: int | None

    @property
    def internal(self) -> np.ndarray:
        keep = np.ones(len(self.frequencies), bool)
        if self.translation_mode is not None:
            keep[self.translation_mode] = False
        return self.frequencies[keep]


def _require_converged(state: ChainState):
    if not state.converged:
        raise NotConverged(f"chain is not converged (|g| = {state.gradient_norm:.3e} meV/Å)")


def normal_modes(state: ChainState, c: TrapConfig, mass: float | None = None) -> NormalModes:
    _require_converged(state)
    m = c.mass if mass is None else float(mass)
    if not m > 0:
        raise InputError(f"mass must be > 0, got {mass!r}")
    lam, vec = np.linalg.eigh(hessian(state.coordinates, c) / m)
    freq = np.sign(lam) * np.sqrt(np.abs(lam)) * WAVENUMBER_PER_SQRT_MEV_A2_AMU
    translation = None
    if c.infinite:
        shift = np.zeros_like(state.coordinates)
        shift[:, 2] = 1.0
        shift = shift.ravel() / np.linalg.norm(shift)
        translation = int(np.argmax(np.abs(shift @ vec)))
    return NormalModes(freq, vec, translation)


def transverse_stability(state: ChainState, c: TrapConfig) -> float:
    """Smallest eigenvalue (meV/Å²) of the Hessian restricted to x, y displacements."""
    _require_converged(state)
    h = hessian(state.coordinates, c)
    idx = np.array([3 * k + d for k in range(len(state.coordinates)) for d in (0, 1)])
    return float(np.linalg.eigvalsh(h[np.ix_(idx, idx)])[0])


def to_xyz(state: ChainState, c: TrapConfig, comment: str = "") -> str:
    """XYZ text: atom count, comment line, then ``element x y z`` in Å."""
    lines = [str(len(state.coordinates)), comment.replace("\n", " ")]
    for x, y, z in state.coordinates:
        lines.append(f"{c.element} {x:.10f} {y:.10f} {z:.10f}")
    return "\n".join(lines) + "\n"


def config_dict(c: TrapConfig) -> dict:
    return asdict(c)

