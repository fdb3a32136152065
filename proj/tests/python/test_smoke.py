import math

import numpy as np
import pytest

import odis


@pytest.fixture(scope="module")
def pano():
    return odis.render_scene(seed=4, height=64, supersample=1)


@pytest.fixture(scope="module")
def codebook(pano):
    views = [odis.extract_view(pano, k, size=32) for k in range(26)]
    return odis.train_codebook(views + [pano], k=96, patch=8, seed=1)


def test_directions_are_unit_and_distinct():
    d = odis.directions()
    assert d.shape == (26, 3)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-15)
    assert len({tuple(np.round(r, 12)) for r in d}) == 26


def test_erp_round_trip():
    u, v = odis.direction_to_erp_pixel(0.3, -0.4, 0.8, 256, 128)
    x, y, z = odis.erp_pixel_to_direction(u, v, 256, 128)
    n = math.sqrt(0.3**2 + 0.4**2 + 0.8**2)
    assert np.allclose([x, y, z], [0.3 / n, -0.4 / n, 0.8 / n], atol=1e-12)


def test_render_shape_and_range(pano):
    assert pano.shape == (64, 128, 3) and pano.dtype == np.float32
    assert 0.0 <= pano.min() and pano.max() <= 1.0


def test_views_blend_back(pano):
    views = [odis.extract_view(pano, k, size=64) for k in range(26)]
    back = odis.blend_views(views, height=64)
    assert back.shape == pano.shape
    assert np.median(np.abs(back - pano)) <= 3 / 255
    assert odis.coverage(64, size=64).min() >= 1


def test_codebook_round_trip(pano, codebook, tmp_path):
    grid = codebook.encode(pano)
    assert grid.shape == (8, 16)
    np.testing.assert_array_equal(codebook.encode(codebook.decode(grid)), grid)
    path = tmp_path / "cb.bin"
    codebook.save(str(path))
    assert odis.Codebook.load(str(path)) == codebook
    masked = grid.copy()
    masked[0, 0] = codebook.mask_code
    with pytest.raises(odis.DataError):
        codebook.decode(masked)


def test_schedule_and_oracle_sampler():
    assert odis.mask_ratio(16, 16) == 0.0
    assert odis.scheduled_mask_count(8, 16, 256) == math.ceil(256 * math.cos(math.pi / 4))
    truth = np.arange(64, dtype=np.int32).reshape(8, 8) % 10
    masked = np.full_like(truth, 10)
    codes, counts = odis.sample_oracle(masked, truth, k=10)
    np.testing.assert_array_equal(codes, truth)
    assert counts[-1] == 0 and len(counts) == 16


def test_conditioned_synthesis(pano, codebook):
    cond, known = odis.condition(pano, "center")
    assert known.any() and not known.all()
    assert np.all(cond[~known] == 0)
    kwargs = dict(low_height=32, height=64, nfov_size=32, seed=5, threads=1)
    out, coarse = odis.synthesize(cond, known, codebook, predictor="oracle", truth=pano, **kwargs)
    assert out.shape == pano.shape and coarse.shape == (32, 64, 3)
    assert np.median(np.abs(out - pano)) <= 6 / 255
    a, _ = odis.synthesize(cond, known, codebook, predictor="marginal", corpus=[pano], **kwargs)
    b, _ = odis.synthesize(cond, known, codebook, predictor="marginal", corpus=[pano], **kwargs)
    np.testing.assert_array_equal(a, b)
    assert not np.any(np.all(a[~known] == 0, axis=-1))


def test_metrics_and_reconstruction(pano, codebook):
    m = odis.metrics(pano, pano)
    assert m["global_mse"] == 0.0 and math.isinf(m["psnr"])
    r = odis.reconstruct_compare(pano, codebook, nfov_size=32)
    assert set(r) == {"direct", "via_views"}
    assert r["direct"]["global_mse"] > 0.0


def test_bad_input_raises(pano):
    with pytest.raises(ValueError):
        odis.extract_view(pano, 26)
    with pytest.raises(ValueError):
        odis.condition(pano, "sideways")
