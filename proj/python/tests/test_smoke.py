import numpy as np
import pytest

import corridor_depth as cd


def test_estimate_synthetic_frame():
    image, truth = cd.render(width_m=2.0, yaw_rad=0.1, pitch_rad=0.06)
    assert image.shape == (360, 420) and image.dtype == np.uint8
    out = cd.estimate(image, cd.synthetic_config())
    assert abs(out["yaw_rad"] - 0.1) <= 0.05 + 1e-9
    assert abs(out["pitch_rad"] - 0.06) <= 0.01 + 1e-9
    assert cd.width_error(out["width_m"], 2.0) <= 0.01
    m = cd.depth_metrics(out["depth"], truth, 5.0)
    assert m["abs_rel"] < 0.03


def test_metrics_hand_case():
    m = cd.depth_metrics(np.array([[2.2]]), np.array([[2.0]]), 5.0)
    assert m["abs_rel"] == pytest.approx(0.1, abs=1e-12)
    assert m["rmse"] == pytest.approx(0.2, abs=1e-12)


def test_blank_image_raises():
    with pytest.raises(cd.CorridorError, match="edge-pair-not-found"):
        cd.estimate(np.full((360, 420), 100, np.uint8), cd.synthetic_config())


def test_config_round_trip():
    c = cd.Config.parse("camera.height_m = 0.66\nsearch.samples = 32\n")
    assert c.height_m == 0.66
    assert cd.Config.parse(c.to_text()).to_text() == c.to_text()
    c.height_m = -1
    assert any("height_m" in s for s in c.issues())
