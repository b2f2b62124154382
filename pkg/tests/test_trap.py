import json
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from cntqd.constants import WAVENUMBER_PER_SQRT_MEV_A2_AMU
from cntqd.errors import InputError
from cntqd.trap import (
    NonConvergence,
    NotConverged,
    OutsideTube,
    TrapConfig,
    chain_energy,
    load_parameters,
    normal_modes,
    relax_chain,
    seed_chain,
    to_xyz,
    transverse_stability,
    wall_curvature,
    wall_potential,
)

from oracles import fd_gradient

H = TrapConfig.preset("hydrogen")


def wall_by_brute_force(radial, axial, c):
    """Direct 2D quadrature of the surface-smeared LJ wall (no closed-form axial integral)."""
    R = c.tube_radius

    def lj(d2):
        s6 = (c.wall_sigma**2 / d2) ** 3
        return 4 * c.wall_epsilon * (s6 * s6 - s6)

    def ring(theta):
        a2 = radial**2 + R**2 - 2 * radial * R * math.cos(theta)
        lo, hi = (-c.tube_length / 2, c.tube_length / 2) if not c.infinite else (-np.inf, np.inf)
        f = lambda z: lj(a2 + (z - axial) ** 2)
        kw = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
        return quad(f, lo, axial, **kw)[0] + quad(f, axial, hi, **kw)[0]

    return c.surface_density * R * quad(ring, 0, 2 * math.pi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]


class TestConfig:
    def test_presets_load(self):
        table = load_parameters()
        assert {"hydrogen", "nitrogen"} <= set(table)
        assert TrapConfig.preset("nitrogen").element == "N"

    def test_unknown_preset(self):
        with pytest.raises(InputError):
            TrapConfig.preset("helium")

    @pytest.mark.parametrize("kw", [{"tube_radius": 2.9}, {"wall_sigma": 0}, {"atom_epsilon": -1},
                                    {"surface_density": 0}, {"quadrature_order": 7}])
    def test_invalid(self, kw):
        with pytest.raises(InputError):
            TrapConfig(**kw)

    def test_parameter_file(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"_doc": "x", "mine": {"tube_radius": 4.0, "_note": "y"}}))
        assert load_parameters(path) == {"mine": {"tube_radius": 4.0}}
        path.write_text(json.dumps({"bad": {"radius": 4.0}}))
        with pytest.raises(InputError):
            load_parameters(path)


class TestWall:
    @pytest.mark.parametrize("radial", [0.0, 0.3, 0.8])
    def test_infinite_against_brute_force(self, radial):
        e, _ = wall_potential(radial, 0.0, H)
        assert e == pytest.approx(wall_by_brute_force(radial, 0.0, H), rel=1e-7)

    @pytest.mark.parametrize("radial, axial", [(0.0, 0.0), (0.4, 7.0), (0.2, -9.5)])
    def test_finite_against_brute_force(self, radial, axial):
        c = TrapConfig.preset("hydrogen", tube_length=24.0)
        e, _ = wall_potential(radial, axial, c)
        assert e == pytest.approx(wall_by_brute_force(radial, axial, c), rel=1e-7)

    def test_on_axis_well(self):
        e, (gr, gz) = wall_potential(0.0, 0.0, H)
        assert e < 0 and math.isfinite(e)
        assert gr == 0.0 and gz == 0.0

    def test_quadrature_converged(self):
        fine = TrapConfig.preset("hydrogen", quadrature_order=10 * H.quadrature_order)
        double = TrapConfig.preset("hydrogen", quadrature_order=2 * H.quadrature_order)
        for r in np.linspace(0, 1.6, 9):
            e = wall_potential(r, 0, H)[0]
            assert abs(e - wall_potential(r, 0, fine)[0]) < 1e-9
            assert abs(e - wall_potential(r, 0, double)[0]) < 1e-9

    def test_repulsive_core(self):
        radials = np.linspace(0.5, H.tube_radius - H.wall_sigma / 2, 8)
        e = [wall_potential(r, 0, H)[0] for r in radials]
        assert np.all(np.diff(e) > 0)
        assert e[-1] > 1e4

    def test_translation_invariant_infinite(self):
        assert wall_potential(0.3, 0.0, H)[0] == wall_potential(0.3, 123.4, H)[0]

    def test_finite_tube_ends_weaken_binding(self):
        c = TrapConfig.preset("hydrogen", tube_length=30.0)
        centre = wall_potential(0, 0, c)[0]
        assert centre == pytest.approx(wall_potential(0, 0, H)[0], rel=1e-3)
        assert centre > wall_potential(0, 0, H)[0]
        assert wall_potential(0, 14.0, c)[0] > centre

    def test_outside(self):
        with pytest.raises(OutsideTube):
            wall_potential(H.tube_radius, 0, H)
        with pytest.raises(OutsideTube):
            wall_potential(0, 20.0, TrapConfig.preset("hydrogen", tube_length=30.0))

    def test_radial_gradient_against_fd(self):
        rng = np.random.default_rng(0)
        for cfg in (H, TrapConfig.preset("hydrogen", tube_length=20.0)):
            for _ in range(10):
                r, z = rng.uniform(0.01, 1.4), rng.uniform(-8, 8)
                _, (gr, gz) = wall_potential(r, z, cfg)
                h = 1e-5
                fr = (wall_potential(r + h, z, cfg)[0] - wall_potential(r - h, z, cfg)[0]) / (2 * h)
                fz = (wall_potential(r, z + h, cfg)[0] - wall_potential(r, z - h, cfg)[0]) / (2 * h)
                assert gr == pytest.approx(fr, rel=1e-6, abs=1e-7)
                assert gz == pytest.approx(fz, rel=1e-6, abs=1e-7)

    def test_wide_tube_loses_axial_minimum(self):
        assert wall_curvature(H) > 0
        wide = TrapConfig.preset("hydrogen", tube_radius=10.0)
        assert wall_curvature(wide) < 0
        # the radial scan oracle finds the minimum off-axis
        radials = np.linspace(0, 9.0 - wide.wall_sigma / 2, 400)
        energies = [wall_potential(r, 0, wide)[0] for r in radials]
        assert radials[int(np.argmin(energies))] > 4.0


class TestChainEnergy:
    def test_single_atom_is_well(self):
        assert chain_energy([[0, 0, 0]], H)[0] == wall_potential(0, 0, H)[0]

    def test_pair_at_minimum(self):
        d = H.pair_minimum
        e, _ = chain_energy([[0, 0, 0], [0, 0, d]], H)
        assert e - 2 * wall_potential(0, 0, H)[0] == pytest.approx(-H.atom_epsilon, abs=1e-12)

    def test_axial_translation(self):
        x = seed_chain(6, H, 0.2, seed=4)
        shifted = x + np.array([0, 0, 17.3])
        assert abs(chain_energy(x, H)[0] - chain_energy(shifted, H)[0]) < 1e-6

    def test_gradients_against_fd(self):
        rng = np.random.default_rng(11)
        for cfg in (H, TrapConfig.preset("hydrogen", tube_length=40.0)):
            for _ in range(5):
                x = seed_chain(4, cfg, 0.4, seed=int(rng.integers(1 << 30)))
                g = chain_energy(x, cfg)[1]
                ref = fd_gradient(x, cfg)
                assert np.max(np.abs(g - ref)) <= 1e-6 * max(1.0, np.max(np.abs(ref)))

    def test_shape_checked(self):
        with pytest.raises(InputError):
            chain_energy(np.zeros((3, 2)), H)

    def test_overlap(self):
        with pytest.raises(InputError):
            chain_energy([[0, 0, 1], [0, 0, 1]], H)


def scan_spacing(c, n):
    """1D oracle: best uniform on-axis spacing by bounded scalar search."""
    def energy(a):
        x = np.zeros((n, 3))
        x[:, 2] = a * np.arange(n)
        return chain_energy(x, c)[0]

    return minimize_scalar(energy, bounds=(0.9 * c.atom_sigma, 1.3 * c.atom_sigma), method="bounded",
                           options={"xatol": 1e-10}).x


class TestRelax:
    @pytest.fixture(scope="class")
    @classmethod
    def eight(cls):
        return relax_chain(8, H, seed_jitter=0.1, seed=3)

    def test_converged(self, eight):
        assert eight.converged and eight.gradient_norm < 1e-6

    def test_uniform_interior(self, eight):
        interior = eight.spacings[1:-1]
        assert np.ptp(interior) / interior.mean() < 0.01
        assert interior.mean() == pytest.approx(H.pair_minimum, rel=0.02)
        # end spacings relax outward while the interior stays flat
        assert eight.spacings[0] > interior.max()

    def test_spacing_against_scan(self, eight):
        assert eight.spacings.mean() == pytest.approx(scan_spacing(H, 8), rel=2e-3)

    def test_energy_monotone(self, eight):
        assert np.all(np.diff(eight.energy_history) <= 0)

    def test_on_axis(self, eight):
        assert eight.max_radial < 1e-4

    def test_off_axis_seed_recovers(self):
        x = seed_chain(8, H)
        x[:, 0] = 0.5 * np.cos(np.arange(8))
        x[:, 1] = 0.5 * np.sin(np.arange(8))
        s = relax_chain(8, H, initial=x)
        assert s.converged and s.max_radial < 1e-4

    def test_random_off_axis_seeds_recover(self):
        # large first quasi-Newton steps can probe points beyond the wall
        rng = np.random.default_rng(10)
        for _ in range(5):
            x = seed_chain(8, H)
            radius, angle = rng.uniform(0, 0.5, 8), rng.uniform(0, 2 * np.pi, 8)
            x[:, 0], x[:, 1] = radius * np.cos(angle), radius * np.sin(angle)
            s = relax_chain(8, H, initial=x)
            assert s.converged and s.max_radial < 1e-4
            assert np.all(np.diff(s.energy_history) <= 0)

    def test_seed_outside_tube(self):
        x = seed_chain(2, H)
        x[0, 0] = H.tube_radius + 0.1
        with pytest.raises(OutsideTube):
            relax_chain(2, H, initial=x)

    def test_jitter_invariance(self, eight):
        ref = eight.coordinates[:, 2] - eight.coordinates[:, 2].mean()
        for jitter in (0.0, 0.05, 0.2):
            s = relax_chain(8, H, seed_jitter=jitter, seed=9)
            assert s.energy == pytest.approx(eight.energy, abs=1e-8)
            z = s.coordinates[:, 2] - s.coordinates[:, 2].mean()
            assert np.max(np.abs(np.sort(z) - np.sort(ref))) < 1e-4

    def test_single_atom(self):
        s = relax_chain(1, H, seed_jitter=0.3)
        assert s.max_radial < 1e-4
        assert s.energy == pytest.approx(wall_potential(0, 0, H)[0], abs=1e-8)

    def test_nitrogen_spacing(self):
        c = TrapConfig.preset("nitrogen")
        s = relax_chain(8, c)
        assert s.spacings[1:-1].mean() == pytest.approx(3.5, abs=0.05)

    def test_iteration_cap(self):
        with pytest.raises(NonConvergence):
            relax_chain(4, H, seed_jitter=0.3, max_iter=2)

    def test_bad_inputs(self):
        with pytest.raises(InputError):
            relax_chain(0, H)
        with pytest.raises(InputError):
            relax_chain(2, H, seed_jitter=-1)


class TestModes:
    def test_single_atom(self):
        s = relax_chain(1, H)
        m = normal_modes(s, H)
        assert len(m.frequencies) == 3
        assert abs(m.frequencies[m.translation_mode]) < 1e-2
        transverse = np.delete(m.frequencies, m.translation_mode)
        assert transverse[0] == pytest.approx(transverse[1], rel=1e-8)
        k = wall_curvature(H)
        assert transverse[0] == pytest.approx(WAVENUMBER_PER_SQRT_MEV_A2_AMU * math.sqrt(k / H.mass), rel=1e-6)

    def test_pair_stretch(self):
        s = relax_chain(2, H)
        m = normal_modes(s, H)
        k = 72 * H.atom_epsilon / (2 ** (1 / 3) * H.atom_sigma**2)
        expected = WAVENUMBER_PER_SQRT_MEV_A2_AMU * math.sqrt(2 * k / H.mass)
        axial = [f for f, v in zip(m.frequencies, m.vectors.T) if np.sum(v.reshape(2, 3)[:, 2] ** 2) > 0.99]
        assert any(abs(f - expected) / expected < 1e-3 for f in axial)

    def test_interior_modes_stable(self):
        s = relax_chain(8, H)
        m = normal_modes(s, H)
        assert np.all(m.internal > 0)
        assert np.all(np.diff(m.frequencies) >= 0)

    def test_mass_scaling(self):
        s = relax_chain(3, H)
        light, heavy = normal_modes(s, H, 1.0).internal, normal_modes(s, H, 4.0).internal
        assert np.allclose(heavy, light / 2, rtol=1e-10)

    def test_not_converged(self):
        s = relax_chain(2, H)
        from dataclasses import replace

        bad = replace(s, converged=False)
        with pytest.raises(NotConverged):
            normal_modes(bad, H)
        with pytest.raises(NotConverged):
            transverse_stability(bad, H)


class TestStability:
    def test_positive_for_default(self):
        assert transverse_stability(relax_chain(8, H), H) > 0

    def test_single_atom_equals_wall_curvature(self):
        assert transverse_stability(relax_chain(1, H), H) == pytest.approx(wall_curvature(H), rel=1e-6)

    def test_wide_tube_unstable(self):
        wide = TrapConfig.preset("hydrogen", tube_radius=10.0)
        assert transverse_stability(relax_chain(1, wide), wide) < 0


def test_xyz_export():
    s = relax_chain(3, H)
    text = to_xyz(s, H, "three")
    lines = text.splitlines()
    assert lines[0] == "3" and lines[1] == "three"
    assert len(lines) == 5
    for line, xyz in zip(lines[2:], s.coordinates):
        el, *vals = line.split()
        assert el == "H"
        assert np.allclose([float(v) for v in vals], xyz, atol=1e-10)
