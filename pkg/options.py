from dotenv import load_dotenv

import os

load_dotenv()


def _env_flag(name, default):
    return os.getenv(name, default).lower() in ("1", "true", "yes")


options = {
    "threads": max(1, int(os.getenv("NHLAT_THREADS", "1"))),
    "cache_dir": os.getenv("NHLAT_CACHE_DIR", "./.cache"),
    "use_cache": _env_flag("NHLAT_CACHE", "1"),
    "reports_dir": os.getenv("NHLAT_REPORTS_DIR", "reports"),
    "verbose": _env_flag("VERBOSE_LOGGING", "false"),

    "spectral": {
        "n_k": 1024,
        "ep_condition": 1e8,  # eigenvector-matrix condition number flagging a Jordan block
        "obc_condition": 1e6,
        "tol_gap": 1e-8,
        "winding_det_floor": 1e-10,
        "max_refinements": 6,
    },
    "asymptotics": {
        "cauchy_nodes": 64,
        "order_tol": 1e-6,
        "max_order": 8,
        "newton_tol": 1e-9,
        "newton_restarts": 8,
        "cluster_tol": 1e-4,
        "branch_tol": 1e-8,
    },
    "dynamics": {
        "points_per_decade": 128,
        "rk_tolerance": 1e-10,
        "amplitude_floor": 1e-14,
        "default_L": 150,
        "default_x0": 75,
    },
    "analysis": {
        "prominence": 1.2,
        "min_points": 10,
    },
}

if options["use_cache"]:
    os.makedirs(options["cache_dir"], exist_ok=True)
