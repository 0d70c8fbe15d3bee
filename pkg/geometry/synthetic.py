"""
Synthetic Model Generator
Deterministic desk-scale models used by tests, the CLI demo data and the dashboard
"""
import os

import numpy as np

from geometry.cloud import PointCloud, add_gaussian_noise


def sample_cube(n: int, seed: int = 0) -> PointCloud:
    """
    Samples on the surface of the unit cube [0, 1]^3

    Each face gets an equal share of the points, at most one per cell of a
    jittered grid.

    Args:
        n: Number of points
        seed: Random seed

    Returns:
        PointCloud: Points in random order
    """
    rng = np.random.default_rng(seed)
    counts = np.full(6, n // 6)
    counts[:n % 6] += 1

    blocks = []
    for face, count in enumerate(counts):
        if count == 0:
            continue
        side = int(np.ceil(np.sqrt(count)))
        cells = rng.choice(side * side, size=count, replace=False)
        uv = (np.column_stack([cells // side, cells % side]) + rng.random((count, 2))) / side
        axis, level = divmod(face, 2)
        free = [b for b in range(3) if b != axis]
        block = np.empty((count, 3))
        block[:, axis] = float(level)
        block[:, free] = uv
        blocks.append(block)

    points = np.concatenate(blocks) if blocks else np.empty((0, 3))
    return PointCloud(points[rng.permutation(len(points))])


def sample_sphere(n: int, seed: int = 0, radius: float = 1.0) -> PointCloud:
    """Uniform samples on a sphere centered at the origin"""
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return PointCloud(directions * radius)


def sample_ridged_plane(n: int, seed: int = 0, height: float = 0.15,
                        half_width: float = 0.15) -> PointCloud:
    """
    Unit square in the xy-plane carrying a sharp V-shaped ridge along y

    Args:
        n: Number of points
        seed: Random seed
        height: Ridge height at x = 0.5
        half_width: Half width of the ridge footprint

    Returns:
        PointCloud: Samples uniform in x and y
    """
    rng = np.random.default_rng(seed)
    xy = rng.random((n, 2))
    z = height * np.maximum(0.0, 1.0 - np.abs(xy[:, 0] - 0.5) / half_width)
    return PointCloud(np.column_stack([xy, z]))


def sample_plane(n: int, seed: int = 0) -> PointCloud:
    """Uniform samples on the unit square at z = 0"""
    rng = np.random.default_rng(seed)
    return PointCloud(np.column_stack([rng.random((n, 2)), np.zeros(n)]))


# Bundled models: name -> (sampler, point count)
DEMO_MODELS = {
    'cube': (sample_cube, 20000),
    'sphere': (sample_sphere, 20000),
    'ridged_plane': (sample_ridged_plane, 10000),
}

NOISE_LEVELS = (0.005, 0.01, 0.015)


def load_model(name: str, n: int = None, seed: int = 0) -> PointCloud:
    """Sample one of the bundled models"""
    if name not in DEMO_MODELS:
        raise ValueError(f"unknown model '{name}', expected one of {sorted(DEMO_MODELS)}")
    sampler, default_n = DEMO_MODELS[name]
    return sampler(n or default_n, seed)


def generate_demo_models(directory: str = 'data', seed: int = 0) -> list:
    """
    Write every bundled model, clean and at each noise level, as XYZ files

    Args:
        directory: Output directory (created if needed)
        seed: Seed for sampling and noise

    Returns:
        list: Paths written
    """
    from cloud_io.files import write_cloud

    os.makedirs(directory, exist_ok=True)
    written = []
    for name in DEMO_MODELS:
        clean = load_model(name, seed=seed)
        path = os.path.join(directory, f"{name}.xyz")
        write_cloud(clean, path)
        written.append(path)
        for level in NOISE_LEVELS:
            noisy = add_gaussian_noise(clean, level, seed)
            path = os.path.join(directory, f"{name}_noise{level * 100:.1f}.xyz")
            write_cloud(noisy, path)
            written.append(path)

    print(f"✅ {len(written)} demo clouds written to {directory}")
    return written


if __name__ == "__main__":
    generate_demo_models()
