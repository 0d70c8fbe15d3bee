"""
Filter Configuration
Defaults, parameter presets and logging setup
"""
import logging
import os

LOG_LEVEL = os.getenv('NLPF_LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# Solver settings
RPCA_DEFAULTS = {
    'tol': 1e-7,
    'max_iter': 500,
}

FILTER_DEFAULTS = {
    'k': 50,
    'theta': 0.1,
    'iterations': 1,
    'scheme': 2,
    'local_radius_factor': 3.0,
}

# Recommended ranges; values outside are accepted with a warning
PARAM_RANGES = {
    'k': (50, 150),
    'theta': (0.01, 0.5),
    'iterations': (1, 3),
}

FILTER_PRESETS = {
    'dense_synthetic': {'k': 100, 'theta': 0.05, 'scheme': 1, 'iterations': 2},
    'sharp_synthetic': {'k': 120, 'theta': 0.05, 'scheme': 1, 'iterations': 1},
    'smooth_synthetic': {'k': 80, 'theta': 0.1, 'scheme': 1, 'iterations': 3},
    'raw_scan': {'k': 80, 'theta': 0.05, 'scheme': 2, 'iterations': 1},
    'large_scan': {'k': 120, 'theta': 0.05, 'scheme': 2, 'iterations': 1},
    # Bundled 10k-20k point models; theta follows from the set size
    'desk_synthetic': {'k': 25, 'theta': 0.01, 'set_size': 40, 'scheme': 2, 'iterations': 1},
}

SCHEME_ADVICE = {
    1: "Scheme 1 (re-find similar patches every iteration) suits clouds with relatively large noise.",
    2: "Scheme 2 (reuse the first search) preserves sharp features better on lightly noisy clouds.",
}

_configured = False


def configure_logging(level: str = None):
    """Install one stream handler on the root logger"""
    global _configured
    level_name = (level or LOG_LEVEL).upper()
    root = logging.getLogger()
    root.setLevel(getattr(logging, level_name, logging.INFO))
    if not _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        _configured = True
