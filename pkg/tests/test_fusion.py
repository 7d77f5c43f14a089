"""Decision-fusion algebra and team enumeration."""

import itertools
import math

import numpy as np
import pytest

from affectkit.errors import (
    EmptyTeam,
    InvalidDistribution,
    InvalidSpec,
    MissingModality,
    SizeOutOfRange,
)
from affectkit.fusion import (
    enumerate_teams,
    feature_level_fuse,
    fuse,
    normalized_entropy,
)
from affectkit.mlp import SspOutput


def _ssp(probs, f1):
    return SspOutput(np.asarray(probs, dtype=float), f1)


def _scalar_entropy(p):
    # independent scalar-arithmetic route (implementation is vectorized)
    h = 0.0
    for v in p:
        if v > 0:
            h -= v * math.log(v)
    return h / math.log(len(p))


def _scalar_weight(p, f1):
    confidence = max(0.0, 1.0 - _scalar_entropy(p))
    if confidence < 1e-12:  # sub-floor residue counts as exactly zero
        confidence = 0.0
    return confidence**f1


class TestNormalizedEntropy:
    def test_uniform_is_one(self):
        for n in (2, 3, 7):
            assert normalized_entropy(np.full(n, 1.0 / n)) == pytest.approx(1.0)

    def test_point_mass_is_zero(self):
        assert normalized_entropy([1.0, 0.0, 0.0]) == 0.0

    def test_matches_scalar_route(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = rng.dirichlet(np.ones(int(rng.integers(2, 6))))
            assert normalized_entropy(p) == pytest.approx(
                _scalar_entropy(p), abs=1e-12
            )

    def test_invalid_distributions(self):
        with pytest.raises(InvalidDistribution):
            normalized_entropy([0.5, 0.6])
        with pytest.raises(InvalidDistribution):
            normalized_entropy([1.2, -0.2])
        with pytest.raises(InvalidDistribution):
            normalized_entropy([np.nan, 1.0])
        with pytest.raises(InvalidDistribution):
            normalized_entropy([1.0])


class TestFuseByHand:
    def test_two_member_example_longhand(self):
        p_a = [0.7, 0.2, 0.1]
        p_b = [0.2, 0.5, 0.3]
        decision = fuse({"A": _ssp(p_a, 1.0), "B": _ssp(p_b, 0.5)})
        w_a = _scalar_weight(p_a, 1.0)
        w_b = _scalar_weight(p_b, 0.5)
        gamma = w_a + w_b
        expected = [(w_a * a + w_b * b) / gamma for a, b in zip(p_a, p_b)]
        np.testing.assert_allclose(decision.probs, expected, atol=1e-12)
        np.testing.assert_allclose(decision.weights, [w_a, w_b], atol=1e-12)
        assert decision.gamma == pytest.approx(gamma, abs=1e-12)
        assert not decision.fallback
        assert decision.predicted_class == int(np.argmax(expected))

    def test_confident_member_dominates_uncertain_one(self):
        sharp = _ssp([0.97, 0.02, 0.01], 0.9)
        vague = _ssp([0.4, 0.35, 0.25], 0.9)
        decision = fuse({"s": sharp, "v": vague})
        assert decision.weights[0] > decision.weights[1]
        assert decision.predicted_class == 0


class TestFuseProperties:
    def test_property_suite_1000_random_teams(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            n_members = int(rng.integers(1, 7))
            n_classes = int(rng.integers(2, 5))
            team = {
                f"m{i}": _ssp(rng.dirichlet(np.ones(n_classes) * rng.uniform(0.3, 4)),
                              float(rng.uniform(0, 1)))
                for i in range(n_members)
            }
            decision = fuse(team)
            # output validity
            assert decision.probs.shape == (n_classes,)
            assert decision.probs.min() >= 0.0
            assert decision.probs.sum() == pytest.approx(1.0, abs=1e-9)
            # weights match the scalar formula
            for i, name in enumerate(team):
                expected = _scalar_weight(team[name].probs, team[name].f1)
                assert decision.weights[i] == pytest.approx(expected, abs=1e-12)
            # convex combination recomputed independently
            if not decision.fallback:
                member_probs = np.vstack([team[m].probs for m in team])
                expected = decision.weights @ member_probs / decision.weights.sum()
                np.testing.assert_allclose(decision.probs, expected, atol=1e-12)
            # permutation invariance
            names = list(team)
            shuffled = {m: team[m] for m in reversed(names)}
            other = fuse(shuffled)
            np.testing.assert_allclose(
                np.sort(other.weights), np.sort(decision.weights), atol=1e-12
            )
            np.testing.assert_allclose(other.probs, decision.probs, atol=1e-12)

    def test_identical_members_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = rng.dirichlet(np.ones(3))
            team = {f"m{i}": _ssp(p, float(rng.uniform(0, 1))) for i in range(4)}
            decision = fuse(team)
            np.testing.assert_allclose(decision.probs, p, atol=1e-12)

    def test_single_member_identity(self):
        p = np.array([0.6, 0.3, 0.1])
        decision = fuse({"only": _ssp(p, 0.42)})
        np.testing.assert_allclose(decision.probs, p, atol=1e-12)

    def test_max_entropy_member_invisible(self):
        rng = np.random.default_rng(2)
        uniform = np.full(3, 1.0 / 3.0)
        for _ in range(100):
            team = {
                f"m{i}": _ssp(rng.dirichlet(np.ones(3)), float(rng.uniform(0, 1)))
                for i in range(3)
            }
            base = fuse(team)
            team["blank"] = _ssp(uniform, float(rng.uniform(0.1, 1.0)))
            widened = fuse(team)
            np.testing.assert_allclose(widened.probs, base.probs, atol=1e-12)

    def test_zero_f1_uniform_member_gets_weight_one(self):
        # 0**0 == 1: zero confidence with zero skill still contributes
        decision = fuse(
            {
                "a": _ssp([0.9, 0.05, 0.05], 1.0),
                "blank": _ssp([1 / 3, 1 / 3, 1 / 3], 0.0),
            }
        )
        assert decision.weights[1] == 1.0
        assert not decision.fallback

    def test_all_uniform_positive_f1_falls_back_to_mean(self):
        uniform = np.full(3, 1.0 / 3.0)
        decision = fuse({"a": _ssp(uniform, 0.8), "b": _ssp(uniform, 0.3)})
        assert decision.fallback
        np.testing.assert_allclose(decision.probs, uniform, atol=1e-12)

    def test_sharpening_helps_when_others_not_concentrated_there(self):
        # fixed members put at most uniform mass on class 0; then pushing a
        # member's distribution toward class 0 never lowers the fused P[0]
        rng = np.random.default_rng(3)
        for _ in range(200):
            fixed = {}
            for i in range(int(rng.integers(1, 4))):
                extra = rng.dirichlet(np.ones(2)) * (2.0 / 3.0)
                p = np.array([1.0 / 3.0, *extra])
                p = p / p.sum()
                fixed[f"f{i}"] = _ssp(p, float(rng.uniform(0, 1)))
            f1 = float(rng.uniform(0.2, 1.0))
            base = rng.dirichlet(np.ones(3))
            levels = np.linspace(0.0, 1.0, 6)
            previous = None
            for lam in levels:
                p_a = (1 - lam) * base + lam * np.array([1.0, 0.0, 0.0])
                p_a = p_a / p_a.sum()
                team = dict(fixed)
                team["A"] = _ssp(p_a, f1)
                fused = fuse(team).probs[0]
                if previous is not None:
                    assert fused >= previous - 1e-9
                previous = fused

    def test_audit_record_round_trips_to_json(self):
        import json

        decision = fuse({"a": _ssp([0.5, 0.25, 0.25], 0.7)})
        record = json.loads(json.dumps(decision.to_dict()))
        assert record["members"] == ["a"]
        assert record["predicted_class"] == 0
        assert len(record["probs"]) == 3


class TestFuseValidation:
    def test_empty_team(self):
        with pytest.raises(EmptyTeam):
            fuse({})

    def test_bad_distribution(self):
        with pytest.raises(InvalidDistribution):
            fuse({"a": _ssp([0.5, 0.4], 0.5), "b": _ssp([2.0, -1.0], 0.5)})

    def test_mismatched_class_counts(self):
        with pytest.raises(InvalidDistribution):
            fuse({"a": _ssp([0.5, 0.5], 0.5), "b": _ssp([0.4, 0.3, 0.3], 0.5)})

    def test_f1_out_of_range(self):
        with pytest.raises(InvalidSpec):
            fuse({"a": _ssp([0.5, 0.5], 1.5)})


class TestEnumerateTeams:
    def test_all_teams_of_five(self):
        mods = ("ECG", "EDA", "EMG", "BVP", "ACC")
        teams = enumerate_teams(mods)
        assert len(teams) == 31  # 2^5 - 1
        sizes = [len(t) for t in teams]
        assert sizes == sorted(sizes)
        assert teams[0] == ("ECG",)
        assert teams[-1] == mods

    def test_fixed_size_lexicographic(self):
        teams = enumerate_teams(("a", "b", "c", "d"), size=2)
        assert teams == list(itertools.combinations(("a", "b", "c", "d"), 2))
        assert len(teams) == 6

    def test_size_bounds(self):
        with pytest.raises(SizeOutOfRange):
            enumerate_teams(("a", "b"), size=0)
        with pytest.raises(SizeOutOfRange):
            enumerate_teams(("a", "b"), size=3)

    def test_duplicates_rejected(self):
        with pytest.raises(InvalidSpec):
            enumerate_teams(("a", "a"))


class TestFeatureLevelFuse:
    def test_concatenation_length_and_order(self):
        vectors = {m: np.full(15, i, dtype=float) for i, m in enumerate("abcde")}
        fused = feature_level_fuse(vectors, order=tuple("abcde"))
        assert fused.shape == (75,)
        assert fused[0] == 0.0 and fused[-1] == 4.0

    def test_input_map_order_irrelevant(self):
        v1 = {"x": np.array([1.0]), "y": np.array([2.0])}
        v2 = {"y": np.array([2.0]), "x": np.array([1.0])}
        order = ("x", "y")
        np.testing.assert_array_equal(
            feature_level_fuse(v1, order), feature_level_fuse(v2, order)
        )

    def test_missing_modality(self):
        with pytest.raises(MissingModality):
            feature_level_fuse({"x": np.ones(3)}, order=("x", "y"))
