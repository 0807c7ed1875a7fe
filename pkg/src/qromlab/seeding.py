"""Counter-based seed splitting.

Trial ``t`` of a run with master seed ``s`` uses
``np.random.default_rng(np.random.SeedSequence([s, t]))``; sub-streams of a
trial append further counters.  Results therefore do not depend on the order in
which trials are executed.
"""

from __future__ import annotations

import numpy as np


def trial_rng(master_seed: int, *counters: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, counters)]))


def frequency(hits: int, trials: int) -> tuple[float, float]:
    """Empirical frequency and its binomial standard error."""
    p = hits / trials
    return p, (p * (1 - p) / trials) ** 0.5
