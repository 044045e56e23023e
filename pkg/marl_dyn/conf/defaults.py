DEFAULTS = {
    # Process-level settings, read from settings.MARL_DYN
    "WORKERS": None,  # None means the number of available CPUs; MARL_DYN_WORKERS overrides
    "OUTPUT_DIR": "marl_dyn_out",  # Default --out when a command gets none
    "PLOT_WIDTH": 640,
    "PLOT_HEIGHT": 480,
    "PLOT_PRECISION": 3,  # Decimals for SVG coordinates
    "FORCE_MIXED_TRACES": False,  # Default of `diagnose --force`
}

SCHEMA_VERSION = 1

MATRIX_GAME_NAMES = ("prisoners_dilemma", "matching_pennies", "stag_hunt", "chicken")
GRIDWORLD_NAME = "gridworld"
CUSTOM_GAME_NAME = "custom"

GRIDWORLD_DEFAULTS = {
    "width": 5,
    "height": 5,
    "start_positions": [[0, 0], [4, 0]],
    "goal_cells": [[0, 4], [4, 4]],
    "max_episode_steps": 50,
    "step_penalty": -0.01,
    "joint_goal_reward": 1.0,
}

SIMULATION_DEFAULTS = {
    "seed": 0,
    "n_steps": 50_000,
    "n_burn": 10_000,
    "n_runs": 16,
    "record_stride": 10,
    "projection_mode": "raw_params",
    "bootstrap_repeated": True,
    "divergence_threshold": 1e6,
}

# Gridworld runs are longer; applied when the config leaves these keys out
GRIDWORLD_SIMULATION_DEFAULTS = {
    "n_steps": 200_000,
    "n_burn": 40_000,
}

EXPLORATION_DEFAULTS = {
    "mode": "boltzmann",
    "temperature": 1.0,
    "eps_start": 0.9,
    "eps_end": 0.05,
    "decay_rate": None,  # None means 5 / n_steps
}

LEARNER_DEFAULTS = {
    "gamma": 0.9,
    "baseline": "none",
    "baseline_decay": 0.01,
    "hidden_sizes": [32, 32],
    "buffer_capacity": 10_000,
    "batch_size": 32,
    "target_sync_every": 100,
    "use_replay": True,
}

LEARNING_RATE_DEFAULTS = {
    "tabular_q": 0.1,
    "policy_gradient": 0.1,
    "idqn": 1e-3,
}

# Small-step profile under which tabular and policy-gradient learners follow replicator dynamics
LEARNER_PRESETS = {
    "replicator": {"learning_rate": 1e-3},
}

DIAGNOSTICS_DEFAULTS = {
    "bins": 20,
    "density_range": None,
    "density_dims": None,
    "theiler_w": 20,
    "z_min": 1,
    "z_max": 30,
    "target_rate": 0.08,
    "theiler_mask_width": None,  # None means theiler_w
    "n_radii": 24,
    "min_window": 5,
    "embedding": "auto",
    "embed_m": 4,
    "embed_tau": 5,
    "resolution": 1e-8,
}

SWEEP_GRIDS = {
    "gamma": [0.5, 0.7, 0.9, 0.95, 0.99],
    "eps_end": [0.0, 0.05, 0.1, 0.2, 0.4],
}
