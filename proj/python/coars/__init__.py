"""Co-evolving recommender / user-simulator harness (native module wrapper)."""

try:
    from ._coars import *  # noqa: F401,F403  (installed layout)
except ImportError:  # in-tree builds put _coars next to the build dir
    from _coars import *  # noqa: F401,F403

__all__ = [
    "rec_reward",
    "user_reward",
    "depth_factor",
    "rl_eligible",
    "score_to_action",
    "token_advantages",
    "kl_divergence",
    "TokenCodec",
    "synth_world",
    "run_toy_episodes",
    "replay",
    "train_toy",
]
