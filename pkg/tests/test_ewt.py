"""Scale-space boundary detection, Otsu split, Meyer-type bank, decomposition."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from affectkit.errors import (
    DegenerateInput,
    InvalidSpec,
    InvalidXi,
    SpectrumTooShort,
)
from affectkit.ewt import (
    SCALE_COUNT,
    BoundarySet,
    build_filter_bank,
    decompose,
    detect_boundaries,
    otsu_threshold,
    scale_space_persistence,
)
from affectkit.fbse import fbse_forward


def brute_force_otsu(values):
    """Reference threshold: literal max of between-class variance.

    Exact rationals, because distinct splits can tie exactly and the contract
    is "smallest maximizer" — float noise must not break ties.
    """
    v = sorted(values)
    n = len(v)
    best_t, best_var = None, Fraction(-1)
    for t in range(min(v) + 1, max(v) + 1):
        lower = [x for x in v if x < t]
        upper = [x for x in v if x >= t]
        if not lower or not upper:
            continue
        w0 = Fraction(len(lower), n)
        w1 = Fraction(len(upper), n)
        mu0 = Fraction(sum(lower), len(lower))
        mu1 = Fraction(sum(upper), len(upper))
        var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return best_t


class TestOtsu:
    def test_two_well_separated_groups(self):
        t = otsu_threshold([1, 1, 1, 9, 9, 9])
        assert t == brute_force_otsu([1, 1, 1, 9, 9, 9])
        v = np.array([1, 1, 1, 9, 9, 9])
        assert set(v[v >= t]) == {9} and set(v[v < t]) == {1}

    def test_two_values_separate(self):
        t = otsu_threshold([0, 10])
        assert t == brute_force_otsu([0, 10])
        assert 0 < t <= 10  # {0} below, {10} at-or-above

    def test_degenerate_all_equal(self):
        with pytest.raises(DegenerateInput):
            otsu_threshold([5, 5, 5, 5])

    def test_too_few_values(self):
        with pytest.raises(InvalidSpec):
            otsu_threshold([3])

    def test_non_integer_rejected(self):
        with pytest.raises(InvalidSpec):
            otsu_threshold([1.5, 2.0])
        with pytest.raises(InvalidSpec):
            otsu_threshold([-1, 2])

    def test_matches_brute_force_small_multisets(self):
        # module-scale check; the exhaustive sweep lives in the gate suite
        for size in (2, 3, 4):
            for combo in itertools.combinations_with_replacement(range(7), size):
                if len(set(combo)) == 1:
                    continue
                assert otsu_threshold(list(combo)) == brute_force_otsu(combo), combo

    def test_random_larger_multisets(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            vals = rng.integers(0, 32, size=rng.integers(2, 40)).tolist()
            if len(set(vals)) == 1:
                continue
            assert otsu_threshold(vals) == brute_force_otsu(vals)


def _two_bump_magnitude(u=128, p1=25, p2=85):
    grid = np.arange(u, dtype=float)
    return np.exp(-0.5 * ((grid - p1) / 6.0) ** 2) + np.exp(
        -0.5 * ((grid - p2) / 6.0) ** 2
    )


class TestScaleSpace:
    def test_two_bump_valley_survives_most_scales(self):
        # the inter-bump valley persists until the bumps merge at coarse
        # scales, so its chain must outlive at least half the ladder
        chains = scale_space_persistence(_two_bump_magnitude())
        best = max(chains, key=lambda c: c[1])
        assert best[1] >= (SCALE_COUNT + 1) // 2
        assert 25 < best[0] < 85

    def test_constant_spectrum_has_no_minima(self):
        assert scale_space_persistence(np.ones(64)) == []

    def test_deterministic(self):
        mag = np.abs(np.random.default_rng(0).standard_normal(100))
        assert scale_space_persistence(mag) == scale_space_persistence(mag)


class TestDetectBoundaries:
    def test_two_bumps_give_one_interior_boundary(self):
        bset = detect_boundaries(_two_bump_magnitude(), 5)
        assert bset.band_count == 2
        interior = bset.omegas[1]
        # boundary sits in the valley, i.e. between the two bump positions
        assert np.pi * 26 / 128 < interior < np.pi * 86 / 128

    def test_flat_spectrum_single_band(self):
        bset = detect_boundaries(np.ones(64), 5)
        assert bset.band_count == 1
        np.testing.assert_allclose(bset.omegas, [0.0, np.pi])

    def test_mode_cap_respected(self):
        # five bumps but max_modes=3 -> at most 2 interior boundaries
        grid = np.arange(256, dtype=float)
        mag = sum(
            np.exp(-0.5 * ((grid - c) / 5.0) ** 2) for c in (30, 80, 130, 180, 230)
        )
        bset = detect_boundaries(mag, 3)
        assert bset.band_count <= 3

    def test_max_modes_one_forces_single_band(self):
        bset = detect_boundaries(_two_bump_magnitude(), 1)
        assert bset.band_count == 1

    def test_xi_respects_tight_frame_bound(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            mag = np.abs(rng.standard_normal(128)) + 0.1
            bset = detect_boundaries(mag, 5)
            om = bset.omegas
            if om.size > 2:
                ratios = np.diff(om) / (om[1:] + om[:-1])
                assert bset.xi < ratios.min()

    def test_short_spectrum_rejected(self):
        with pytest.raises(SpectrumTooShort):
            detect_boundaries(np.ones(7), 5)

    def test_bad_max_modes(self):
        with pytest.raises(InvalidSpec):
            detect_boundaries(np.ones(64), 0)


class TestFilterBank:
    def _random_boundaries(self, rng, max_interior=4):
        n = int(rng.integers(0, max_interior + 1))
        interior = np.sort(rng.uniform(0.2, np.pi - 0.2, size=n))
        # keep edges separated so the auto-xi stays comfortably positive
        while np.any(np.diff(interior) < 0.15):
            interior = np.sort(rng.uniform(0.2, np.pi - 0.2, size=n))
        omegas = np.array([0.0, *interior, np.pi])
        ratios = np.diff(omegas) / (omegas[1:] + omegas[:-1])
        return BoundarySet(omegas, 0.9 * float(ratios.min()))

    def test_partition_of_unity_random_banks(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            bset = self._random_boundaries(rng)
            bank = build_filter_bank(bset, 256)
            total = np.sum(bank.responses**2, axis=0)
            assert np.max(np.abs(total - 1.0)) < 1e-6

    def test_single_band_is_all_pass(self):
        bank = build_filter_bank(BoundarySet(np.array([0.0, np.pi]), 0.5), 64)
        np.testing.assert_array_equal(bank.responses, np.ones((1, 64)))

    def test_responses_within_unit_interval(self):
        rng = np.random.default_rng(4)
        bset = self._random_boundaries(rng)
        bank = build_filter_bank(bset, 200)
        assert bank.responses.min() >= 0.0
        assert bank.responses.max() <= 1.0 + 1e-12

    def test_band_supports_ordered(self):
        bset = BoundarySet(np.array([0.0, 1.0, 2.0, np.pi]), 0.1)
        bank = build_filter_bank(bset, 512)
        grid = np.pi * np.arange(1, 513) / 512
        centers = [
            float(np.sum(grid * r**2) / np.sum(r**2)) for r in bank.responses
        ]
        assert centers == sorted(centers)

    def test_xi_violating_bound_rejected(self):
        bset = BoundarySet(np.array([0.0, 1.0, 1.2, np.pi]), 0.05)
        # min ratio = (1.2-1.0)/2.2 ~ 0.0909 : xi=0.05 fine, xi=0.1 not
        build_filter_bank(bset, 64)
        with pytest.raises(InvalidXi):
            build_filter_bank(BoundarySet(np.array([0.0, 1.0, 1.2, np.pi]), 0.1), 64)


class TestDecompose:
    def test_modes_sum_to_demeaned_window(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            u = int(rng.choice([64, 128, 200]))
            y = rng.standard_normal(u) + rng.uniform(-2, 2)
            ms = decompose(y, 64.0, 5)
            recon = ms.modes.sum(axis=0)
            target = y - y.mean()
            rel = np.sqrt(np.mean((recon - target) ** 2)) / np.sqrt(
                np.mean(target**2)
            )
            assert rel < 1e-8
            assert 1 <= ms.mode_count <= 5

    def test_zero_window_all_modes_zero(self):
        ms = decompose(np.zeros(64), 64.0, 5)
        assert np.max(np.abs(ms.modes)) == 0.0

    def test_single_tone_concentrates_in_one_mode(self):
        fs, u = 64.0, 256
        y = np.sin(2 * np.pi * 8.0 * np.arange(u) / fs)
        ms = decompose(y, fs, 5)
        energies = np.array([np.mean(m**2) for m in ms.modes])
        assert energies.max() / energies.sum() >= 0.95

    def test_two_tone_split_by_band(self):
        fs, u = 64.0, 256
        t = np.arange(u) / fs
        y = np.sin(2 * np.pi * 5.0 * t) + np.sin(2 * np.pi * 20.0 * t)
        ms = decompose(y, fs, 5)
        assert ms.mode_count >= 2
        # map each tone to the band containing it, then check the mode's
        # coefficient energy is concentrated on that tone's side of the
        # midpoint order (100 = (40+160)/2)
        split = np.pi * 100 / u
        tone_axis = [np.pi * 40 / u, np.pi * 160 / u]
        hit_modes = []
        for pos in tone_axis:
            r = int(np.searchsorted(ms.boundaries.omegas, pos, side="right") - 1)
            hit_modes.append(r)
            coeffs = fbse_forward(ms.modes[r], fs).coeffs
            grid = np.pi * np.arange(1, u + 1) / u
            low = float(np.sum(coeffs[grid <= split] ** 2))
            high = float(np.sum(coeffs[grid > split] ** 2))
            share = low / (low + high) if pos < split else high / (low + high)
            assert share >= 0.9
        assert hit_modes[0] != hit_modes[1]

    def test_demean_flag(self):
        y = np.ones(64) * 5.0 + np.sin(np.arange(64))
        with_mean = decompose(y, 64.0, 5, demean=False)
        recon = with_mean.modes.sum(axis=0)
        np.testing.assert_allclose(recon, y, atol=1e-8)

    def test_window_too_short(self):
        with pytest.raises(SpectrumTooShort):
            decompose(np.ones(7), 64.0, 5)
