import math

import numpy as np
import pytest

from smalldet.priors import (
    LevelSpec,
    PyramidSpec,
    generate_priors,
    one_stage_spec,
    pyramid_spec_from_dict,
    pyramid_spec_to_dict,
    two_stage_spec,
)


def closed_form_count(spec):
    total = 0
    for lv in spec.levels:
        cells = math.ceil(spec.image_h / lv.stride) * math.ceil(spec.image_w / lv.stride)
        total += cells * len(lv.scales) * len(lv.ratios)
    return total


class TestSpecs:
    def test_one_stage_layout(self):
        spec = one_stage_spec(800, 800)
        assert len(spec.levels) == 5
        assert [lv.stride for lv in spec.levels] == [8, 16, 32, 64, 128]
        assert spec.levels[0].base_size == 32
        assert spec.anchors_per_location == (9, 9, 9, 9, 9)

    def test_two_stage_layout(self):
        spec = two_stage_spec(800, 800)
        assert len(spec.levels) == 5
        assert [lv.stride for lv in spec.levels] == [4, 8, 16, 32, 64]
        assert spec.anchors_per_location == (3, 3, 3, 3, 3)
        # ratio-1 anchor side at the finest level: stride 4 x scale 8.
        priors = generate_priors(spec)
        lvl0 = priors.boxes[priors.level_index == 0]
        ratio1 = lvl0[1]  # scale-major, ratio-minor; ratios (0.5, 1, 2)
        assert ratio1[2] - ratio1[0] == pytest.approx(32.0, abs=1e-9)
        assert ratio1[3] - ratio1[1] == pytest.approx(32.0, abs=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            PyramidSpec(0, 10, (LevelSpec(8, 8, (1.0,), (1.0,)),))
        with pytest.raises(ValueError):
            PyramidSpec(10, 10, ())
        with pytest.raises(ValueError):
            PyramidSpec(
                10, 10,
                (LevelSpec(8, 8, (1.0,), (1.0,)), LevelSpec(8, 8, (1.0,), (1.0,))),
            )
        with pytest.raises(ValueError):
            LevelSpec(8, 8, (1.0, -1.0), (1.0,))

    def test_dict_round_trip(self):
        spec = one_stage_spec(640, 480)
        again = pyramid_spec_from_dict(pyramid_spec_to_dict(spec))
        assert again == spec


class TestGeneratePriors:
    def test_single_cell_case(self):
        spec = PyramidSpec(8, 8, (LevelSpec(8, 8, (1.0,), (1.0,)),))
        priors = generate_priors(spec)
        assert len(priors) == 1
        np.testing.assert_allclose(priors.boxes[0], [0, 0, 8, 8], atol=1e-12)

    def test_one_stage_count_matches_closed_form(self):
        spec = one_stage_spec(800, 800)
        priors = generate_priors(spec)
        assert closed_form_count(spec) == 120_087
        assert len(priors) == 120_087
        counts = np.bincount(priors.level_index)
        np.testing.assert_array_equal(
            counts, [10000 * 9, 2500 * 9, 625 * 9, 169 * 9, 49 * 9]
        )

    def test_ratio_two_shape(self):
        spec = PyramidSpec(8, 8, (LevelSpec(8, 8, (1.0,), (2.0,)),))
        box = generate_priors(spec).boxes[0]
        w, h = box[2] - box[0], box[3] - box[1]
        assert w / h == pytest.approx(2.0, abs=1e-9)
        assert w * h == pytest.approx(64.0, abs=1e-9)

    def test_anchors_share_cell_center(self):
        spec = PyramidSpec(32, 32, (LevelSpec(16, 16, (1.0, 1.5), (0.5, 1.0, 2.0)),))
        priors = generate_priors(spec)
        centers_x = (priors.boxes[:, 0] + priors.boxes[:, 2]) / 2
        centers_y = (priors.boxes[:, 1] + priors.boxes[:, 3]) / 2
        for loc in range(4):
            group_x = centers_x[loc * 6:(loc + 1) * 6]
            group_y = centers_y[loc * 6:(loc + 1) * 6]
            assert np.ptp(group_x) < 1e-9
            assert np.ptp(group_y) < 1e-9

    def test_area_preserved_across_ratios(self):
        spec = PyramidSpec(64, 64, (LevelSpec(32, 24, (1.0, 2.0), (0.5, 1.0, 2.0)),))
        priors = generate_priors(spec)
        w = priors.boxes[:, 2] - priors.boxes[:, 0]
        h = priors.boxes[:, 3] - priors.boxes[:, 1]
        areas = (w * h).reshape(-1, 2, 3)
        for s_idx, scale in enumerate((1.0, 2.0)):
            expected = (24 * scale) ** 2
            np.testing.assert_allclose(
                areas[:, s_idx, :], expected, rtol=1e-6
            )

    def test_deterministic_generation(self):
        spec = one_stage_spec(160, 160)
        a = generate_priors(spec)
        b = generate_priors(spec)
        np.testing.assert_array_equal(a.boxes, b.boxes)
        np.testing.assert_array_equal(a.level_index, b.level_index)

    def test_ordering_is_level_then_row_major(self):
        spec = PyramidSpec(16, 16, (LevelSpec(8, 8, (1.0,), (1.0,)),))
        boxes = generate_priors(spec).boxes
        centers = [( (b[0]+b[2])/2, (b[1]+b[3])/2 ) for b in boxes]
        assert centers == [(4.0, 4.0), (12.0, 4.0), (4.0, 12.0), (12.0, 12.0)]
