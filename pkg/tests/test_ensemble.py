import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import power_temperature
from uqkit.ensemble import (
    actual_class_confidence,
    average_probs,
    soften_ensemble,
    temperature_scale,
)


@st.composite
def distributions(draw, max_classes=10):
    # integer weights: exact ties are common, but no two distinct entries sit
    # within a few ulps of each other, where any float implementation of a
    # strictly monotone map may collapse them and move the argmax
    k = draw(st.integers(min_value=2, max_value=max_classes))
    raw = draw(st.lists(st.integers(1, 1_000_000), min_size=k, max_size=k))
    arr = np.asarray(raw, dtype=np.float64)
    return arr / arr.sum()


class TestAverageProbs:
    def test_opposite_one_hots_average_to_uniform(self):
        assert np.array_equal(average_probs([[1.0, 0.0], [0.0, 1.0]]), [0.5, 0.5])

    def test_single_member_is_identity(self):
        out = average_probs([[0.7, 0.3]])
        assert out[0] == 0.7 and out[1] == 0.3

    def test_hand_mean(self):
        out = average_probs([[0.8, 0.2], [0.6, 0.4]])
        assert np.allclose(out, [0.7, 0.3], atol=1e-12)

    def test_empty_member_list(self):
        with pytest.raises(ValueError, match="no ensemble members"):
            average_probs([])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            average_probs([[0.5, 0.5], [0.2, 0.3, 0.5]])

    def test_invalid_member_distribution(self):
        with pytest.raises(ValueError, match="sums to"):
            average_probs([[0.9, 0.3]])

    def test_permutation_invariance_and_idempotence(self):
        a, b = [0.8, 0.2], [0.1, 0.9]
        assert np.array_equal(average_probs([a, b]), average_probs([b, a]))
        # summation order costs at most one ulp
        assert np.allclose(average_probs([a, a, a]), a, rtol=0, atol=1e-15)

    @given(distributions())
    @settings(max_examples=40, deadline=None)
    def test_output_sums_to_one(self, p):
        out = average_probs([p, p[::-1].copy()])
        assert abs(out.sum() - 1.0) <= 1e-9


class TestTemperatureScale:
    def test_unit_temperature_is_identity(self):
        p = np.array([0.6, 0.3, 0.1])
        assert np.max(np.abs(temperature_scale(p, 1.0) - p)) <= 1e-12

    def test_known_binary_value(self):
        out = temperature_scale([0.8, 0.2], 2.0)
        assert np.max(np.abs(out - [2.0 / 3.0, 1.0 / 3.0])) <= 1e-9

    def test_huge_temperature_tends_to_uniform(self):
        out = temperature_scale([0.8, 0.2], 1e6)
        assert np.max(np.abs(out - 0.5)) <= 1e-4

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(ValueError, match="temperature"):
            temperature_scale([0.5, 0.5], 0.0)

    def test_handles_exact_zero_probability(self):
        out = temperature_scale([1.0, 0.0], 2.0)
        assert np.all(np.isfinite(out))
        assert abs(out.sum() - 1.0) <= 1e-9
        assert out.argmax() == 0

    @given(distributions(), st.sampled_from([0.5, 2.0, 3.0, 8.0, 10.0]))
    @settings(max_examples=80, deadline=None)
    def test_matches_power_closed_form(self, p, temperature):
        out = temperature_scale(p, temperature)
        oracle = power_temperature(p, temperature)
        assert np.max(np.abs(out - oracle)) <= 1e-9
        assert abs(out.sum() - 1.0) <= 1e-9
        assert out.argmax() == np.argmax(p)

    def test_sharpens_below_one_flattens_above(self):
        p = np.array([0.7, 0.3])
        assert temperature_scale(p, 0.5).max() >= p.max()
        assert temperature_scale(p, 4.0).max() <= p.max()


class TestActualClassConfidence:
    def test_indexing(self):
        assert actual_class_confidence([0.6, 0.4], 0) == 0.6
        assert actual_class_confidence([0.6, 0.4], 1) == 0.4

    def test_out_of_range_label(self):
        with pytest.raises(ValueError, match="out of range"):
            actual_class_confidence([0.6, 0.4], 2)

    def test_composed_with_temperature_scale(self):
        softened = temperature_scale([0.8, 0.2], 2.0)
        assert actual_class_confidence(softened, 0) == pytest.approx(2.0 / 3.0, abs=1e-9)


class TestSoftenEnsemble:
    def test_bundles_members_mean_and_softened(self):
        out = soften_ensemble([[0.8, 0.2], [0.6, 0.4]], 2.0)
        assert out.members.shape == (2, 2)
        assert np.allclose(out.mean, [0.7, 0.3])
        assert np.allclose(out.softened, power_temperature([0.7, 0.3], 2.0), atol=1e-9)
        assert out.temperature == 2.0

    def test_requires_at_least_two_classes(self):
        with pytest.raises(ValueError, match="two classes"):
            soften_ensemble([[1.0]], 2.0)
