"""
Tests for point clouds, neighbor search, patches and synthetic noise
"""
import numpy as np
import pytest
from hypothesis import given
from hypothesis.strategies import integers

from geometry.cloud import (
    PointCloud, add_gaussian_noise, bounding_box_diagonal, build_index, denormalize,
    extract_patch, normalize, patch_matrices,
)
from geometry.errors import EmptyCloudError, NonFiniteError, PatchSizeError
from geometry.synthetic import (
    DEMO_MODELS, generate_demo_models, load_model, sample_cube, sample_ridged_plane,
)


def brute_force_knn(points, query, k):
    dist = np.linalg.norm(query - points, axis=1)
    order = np.lexsort((np.arange(len(points)), dist))
    return order[:k]


def test_point_cloud_is_read_only_copy():
    raw = np.zeros((2, 3))
    cloud = PointCloud(raw)
    raw[0, 0] = 5.0
    assert cloud.points[0, 0] == 0.0
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 1.0


def test_point_cloud_rejects_bad_input():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 2)))
    with pytest.raises(NonFiniteError):
        PointCloud([[0.0, np.nan, 0.0]])
    assert len(PointCloud(np.empty((0, 3)))) == 0


def test_index_singleton():
    index = build_index(PointCloud([[1.0, 2.0, 3.0]]))
    assert index.query([0.0, 0.0, 0.0], 1).tolist() == [0]


def test_index_collinear_points():
    cloud = PointCloud([[float(i), 0.0, 0.0] for i in range(10)])
    assert set(build_index(cloud).query(cloud.points[0], 3).tolist()) == {0, 1, 2}


def test_index_empty_cloud():
    with pytest.raises(EmptyCloudError, match="empty input"):
        build_index(PointCloud(np.empty((0, 3))))


def test_index_patch_larger_than_cloud(random_cloud):
    with pytest.raises(PatchSizeError, match="patch larger than cloud"):
        build_index(random_cloud).query(random_cloud.points[0], 500)


def test_index_matches_exhaustive_search(random_cloud, rng):
    index = build_index(random_cloud)
    for _ in range(20):
        query = rng.random(3)
        k = int(rng.integers(1, 30))
        assert index.query(query, k).tolist() == brute_force_knn(random_cloud.points, query, k).tolist()


@given(integers(0, 2**32 - 1), integers(2, 500), integers(1, 40))
def test_index_ties_broken_by_index(seed, n, k):
    rng = np.random.default_rng(seed)
    # Integer grid coordinates give many equal distances and duplicates
    points = rng.integers(0, 4, size=(n, 3)).astype(float)
    k = min(k, n)
    index = build_index(PointCloud(points))
    query = points[int(rng.integers(0, n))]
    assert index.query(query, k).tolist() == brute_force_knn(points, query, k).tolist()


def test_query_all_keeps_center_with_duplicates():
    points = np.zeros((6, 3))
    points[5] = [1.0, 0.0, 0.0]
    neighbors = build_index(PointCloud(points)).query_all(2)
    for i, row in enumerate(neighbors):
        assert i in row


def test_query_ball_sorted(random_cloud):
    found = build_index(random_cloud).query_ball(random_cloud.points[0], 0.3)
    assert np.all(np.diff(found) > 0)
    d = np.linalg.norm(random_cloud.points - random_cloud.points[0], axis=1)
    assert set(found.tolist()) == set(np.flatnonzero(d <= 0.3).tolist())


def test_extract_patch_symmetric_line():
    cloud = PointCloud([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
    patch = extract_patch(cloud, 1, 3)
    assert np.allclose(patch.centroid, [1.0, 0.0, 0.0])
    columns = sorted(map(tuple, patch.matrix.T))
    assert columns == [(-1.0, 0.0, 0.0), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]
    assert patch.k == 3


def test_extract_patch_self_only(random_cloud):
    patch = extract_patch(random_cloud, 7, 1)
    assert patch.matrix.shape == (3, 1)
    assert np.all(patch.matrix == 0.0)


def test_extract_patch_is_centered(random_cloud):
    patch = extract_patch(random_cloud, 3, 10)
    scale = np.abs(patch.matrix).max()
    assert np.all(np.abs(patch.matrix.mean(axis=1)) <= 1e-12 * scale)
    assert np.allclose(patch.centroid, random_cloud.points[patch.neighbor_indices].mean(axis=0))
    assert patch.neighbor_indices[0] == 3


def test_extract_patch_errors(random_cloud):
    with pytest.raises(PatchSizeError):
        extract_patch(random_cloud, 0, 201)
    with pytest.raises(IndexError):
        extract_patch(random_cloud, 200, 5)


def test_patch_matrices_match_extract_patch(random_cloud):
    index = build_index(random_cloud)
    neighbors = index.query_all(8)
    matrices, centroids = patch_matrices(random_cloud.points, neighbors)
    patch = extract_patch(random_cloud, 11, 8, index)
    assert np.allclose(matrices[11], patch.matrix)
    assert np.allclose(centroids[11], patch.centroid)


def test_bounding_box_diagonal():
    corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    assert np.isclose(bounding_box_diagonal(PointCloud(corners)), np.sqrt(3))
    assert bounding_box_diagonal(PointCloud([[2.0, 2.0, 2.0]])) == 0.0
    assert np.isclose(bounding_box_diagonal(PointCloud([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])), 5.0)
    with pytest.raises(EmptyCloudError):
        bounding_box_diagonal(PointCloud(np.empty((0, 3))))


def test_noise_zero_and_determinism(random_cloud):
    assert np.array_equal(add_gaussian_noise(random_cloud, 0.0, 1).points, random_cloud.points)
    a = add_gaussian_noise(random_cloud, 0.01, 7)
    b = add_gaussian_noise(random_cloud, 0.01, 7)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, add_gaussian_noise(random_cloud, 0.01, 8).points)


def test_noise_standard_deviation(rng):
    cloud = PointCloud(rng.random((10000, 3)))
    noisy = add_gaussian_noise(cloud, 0.005, 42)
    expected = 0.005 * bounding_box_diagonal(cloud)
    spread = (noisy.points - cloud.points).std(axis=0)
    assert np.all(np.abs(spread - expected) <= 0.05 * expected)


def test_noise_negative_fraction(random_cloud):
    with pytest.raises(ValueError):
        add_gaussian_noise(random_cloud, -0.1, 0)


def test_normalize_round_trip(random_cloud):
    scaled, center, scale = normalize(PointCloud(random_cloud.points * 40.0 + 7.0))
    assert np.isclose(bounding_box_diagonal(scaled), 1.0)
    restored = denormalize(scaled, center, scale)
    assert np.allclose(restored.points, random_cloud.points * 40.0 + 7.0, atol=1e-10)


def test_synthetic_models_are_deterministic():
    for name in DEMO_MODELS:
        a = load_model(name, 500, seed=1)
        assert len(a) == 500
        assert np.array_equal(a.points, load_model(name, 500, seed=1).points)
    with pytest.raises(ValueError):
        load_model('teapot')


def test_ridged_plane_has_ridge():
    cloud = sample_ridged_plane(3000, seed=0)
    ridge = np.abs(cloud.points[:, 0] - 0.5) < 0.02
    assert cloud.points[ridge, 2].min() > 0.1
    assert np.all(cloud.points[np.abs(cloud.points[:, 0] - 0.5) > 0.15, 2] == 0.0)


def test_generate_demo_models(tmp_path, monkeypatch):
    monkeypatch.setitem(DEMO_MODELS, 'cube', (DEMO_MODELS['cube'][0], 300))
    monkeypatch.setitem(DEMO_MODELS, 'sphere', (DEMO_MODELS['sphere'][0], 300))
    monkeypatch.setitem(DEMO_MODELS, 'ridged_plane', (DEMO_MODELS['ridged_plane'][0], 300))
    written = generate_demo_models(str(tmp_path))
    assert len(written) == 12
    assert (tmp_path / 'cube.xyz').exists()
    assert (tmp_path / 'sphere_noise0.5.xyz').exists()


@pytest.mark.parametrize('n', [600, 2003])
def test_cube_faces_are_balanced_grids(n):
    points = sample_cube(n, seed=4).points
    assert points.shape == (n, 3)
    assert points.min() >= 0.0 and points.max() <= 1.0
    on_face = (points == 0.0) | (points == 1.0)
    assert np.all(on_face.sum(axis=1) == 1)

    axis = np.argmax(on_face, axis=1)
    face = 2 * axis + points[np.arange(n), axis].astype(int)
    sizes = np.bincount(face, minlength=6)
    assert sizes.sum() == n and sizes.max() - sizes.min() <= 1
    for f in range(6):
        side = int(np.ceil(np.sqrt(sizes[f])))
        free = [b for b in range(3) if b != f // 2]
        cells = np.floor(points[face == f][:, free] * side).astype(int)
        assert len(np.unique(cells, axis=0)) == sizes[f]
