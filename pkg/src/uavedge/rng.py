"""Named deterministic random streams.

Every source of randomness in the package is a numpy PCG64 generator keyed
by ``SeedSequence([seed, stream_tag, *extra])``. Keeping the streams
separate means, for example, that the device layout drawn for a seed does
not shift when outage counts change, and the per-episode task volumes do
not depend on how many exploration draws training has consumed. PCG64 with
explicit seed sequences is reproducible across platforms and processes.

Stream tags:
  SCENARIO  device layout, kinds, tasks, capacities
  OUTAGE    which devices keep power / communication
  EPISODE   per-slot task volumes; extra key = episode index
  TRAIN     learner randomness; extra key = 0 init, 1 exploration, 2 replay
  POLICY    seeded baseline policies (random action stream)
"""

from __future__ import annotations

import numpy as np

SCENARIO = 1
OUTAGE = 2
EPISODE = 3
TRAIN = 4
POLICY = 5

TRAIN_INIT = 0
TRAIN_EXPLORE = 1
TRAIN_REPLAY = 2


def stream(seed: int, tag: int, *extra: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), tag, *map(int, extra)])))


def scenario_stream(seed):
    return stream(seed, SCENARIO)


def outage_stream(seed):
    return stream(seed, OUTAGE)


def episode_stream(seed, episode_index):
    return stream(seed, EPISODE, episode_index)


def train_stream(seed, sub):
    return stream(seed, TRAIN, sub)


def policy_stream(seed):
    return stream(seed, POLICY)
