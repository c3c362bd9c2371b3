"""From-scratch deep Q-learning over the slot simulator.

The Q-network is a dense 2n -> 64 -> 64 -> n MLP (ReLU hidden, linear
head) over the state vector of battery fractions and data ages. Training
follows the standard recipe: epsilon-greedy rollouts into a ring replay
buffer, batch updates toward r + gamma * max_a' Q_target(s', a') with the
bootstrap zeroed on terminal transitions, and a target network refreshed
from the online network every fixed number of gradient steps. All heavy
math runs through the selected kernel backend.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as streams
from ._kernels import get_backend
from .rewards import RewardInputs, RewardSpec, compute_reward
from .scenario import Scenario
from .simcore import Simulation

WEIGHTS_FORMAT_VERSION = "1"
HIDDEN_SIZES = (64, 64)


@dataclass
class TrainConfig:
    batch_size: int = 16
    gamma: float = 0.98
    learning_rate: float = 0.0071
    iterations: int = 1_000_000
    exploration_fraction: float = 0.35
    min_epsilon: float = 0.05
    buffer_capacity: int = 50_000
    target_sync_interval: int = 1_000   # gradient steps between target refreshes
    warmup: int = 1_000                 # transitions before learning starts
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    normalize_age: bool = False


class QNetwork:
    """Dense ReLU MLP with a linear head; parameters live in numpy arrays."""

    def __init__(self, layer_sizes, ws, bs, backend=None):
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        self.ws = [np.ascontiguousarray(w, dtype=np.float64) for w in ws]
        self.bs = [np.ascontiguousarray(b, dtype=np.float64) for b in bs]
        self.kernel = backend if backend is not None else get_backend()

    @classmethod
    def zeros(cls, layer_sizes, backend=None) -> "QNetwork":
        ws = [np.zeros((a, b)) for a, b in zip(layer_sizes[:-1], layer_sizes[1:])]
        bs = [np.zeros(b) for b in layer_sizes[1:]]
        return cls(layer_sizes, ws, bs, backend)

    @classmethod
    def initialize(cls, layer_sizes, gen: np.random.Generator, backend=None) -> "QNetwork":
        """He-style uniform fan-in init for the weights, zero biases."""
        ws = []
        for a, b in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = math.sqrt(6.0 / a)
            ws.append(gen.uniform(-bound, bound, (a, b)))
        bs = [np.zeros(b) for b in layer_sizes[1:]]
        return cls(layer_sizes, ws, bs, backend)

    @classmethod
    def for_scenario(cls, n_devices: int, gen: np.random.Generator, backend=None) -> "QNetwork":
        sizes = (2 * n_devices, *HIDDEN_SIZES, n_devices)
        return cls.initialize(sizes, gen, backend)

    @property
    def n_actions(self) -> int:
        return self.layer_sizes[-1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if len(x) != self.layer_sizes[0]:
            raise ValueError(f"state length {len(x)} != input size {self.layer_sizes[0]}")
        return self.kernel.forward(self.ws, self.bs, x)

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.layer_sizes[0]:
            raise ValueError(f"state width {X.shape[1]} != input size {self.layer_sizes[0]}")
        return self.kernel.forward_batch(self.ws, self.bs, X)

    def clone(self) -> "QNetwork":
        return QNetwork(self.layer_sizes,
                        [w.copy() for w in self.ws],
                        [b.copy() for b in self.bs],
                        self.kernel)

    def copy_from(self, other: "QNetwork") -> None:
        for dst, src in zip(self.ws, other.ws):
            np.copyto(dst, src)
        for dst, src in zip(self.bs, other.bs):
            np.copyto(dst, src)

    # -- persistence ----------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "version": WEIGHTS_FORMAT_VERSION,
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.reshape(-1).tolist() for w in self.ws],
            "biases": [b.tolist() for b in self.bs],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path, backend=None) -> "QNetwork":
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("version") != WEIGHTS_FORMAT_VERSION:
            raise ValueError(f"unsupported weights format version {payload.get('version')!r}")
        sizes = payload["layer_sizes"]
        ws = []
        for flat, a, b in zip(payload["weights"], sizes[:-1], sizes[1:]):
            arr = np.asarray(flat, dtype=np.float64)
            if arr.size != a * b:
                raise ValueError(f"weight block has {arr.size} values, expected {a}x{b}")
            ws.append(arr.reshape(a, b))
        bs = [np.asarray(flat, dtype=np.float64) for flat in payload["biases"]]
        return cls(sizes, ws, bs, backend)


class AdamState:
    def __init__(self, net: QNetwork):
        self.mws = [np.zeros_like(w) for w in net.ws]
        self.mbs = [np.zeros_like(b) for b in net.bs]
        self.vws = [np.zeros_like(w) for w in net.ws]
        self.vbs = [np.zeros_like(b) for b in net.bs]
        self.t = 0


class ReplayBuffer:
    """Fixed-capacity ring of transitions in preallocated arrays."""

    def __init__(self, capacity: int, state_dim: int):
        self.capacity = capacity
        self.s = np.empty((capacity, state_dim))
        self.a = np.empty(capacity, dtype=np.int64)
        self.r = np.empty(capacity)
        self.s2 = np.empty((capacity, state_dim))
        self.done = np.empty(capacity, dtype=bool)
        self.size = 0
        self._head = 0

    def __len__(self) -> int:
        return self.size

    def push(self, s, a, r, s2, done) -> None:
        i = self._head
        self.s[i] = s
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = s2
        self.done[i] = done
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, gen: np.random.Generator, batch_size: int):
        """Uniform batch without replacement within the batch."""
        idx = gen.choice(self.size, size=batch_size, replace=False)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx], self.done[idx]


def epsilon(i: int, cfg: TrainConfig) -> float:
    """Linear decay from 1 to min_epsilon over the exploration fraction, then flat."""
    horizon = cfg.exploration_fraction * cfg.iterations
    if horizon <= 0:
        return cfg.min_epsilon
    return max(cfg.min_epsilon, 1.0 - (1.0 - cfg.min_epsilon) * i / horizon)


def q_target(rewards, next_states, dones, target_net: QNetwork, gamma: float) -> np.ndarray:
    """Bootstrap targets r + gamma * max_a' Q_target(s', a'), zeroed when done."""
    q_next = target_net.forward_batch(np.asarray(next_states))
    return np.asarray(rewards) + gamma * q_next.max(axis=1) * (1.0 - np.asarray(dones, dtype=float))


def train_step(net: QNetwork, target_net: QNetwork, buffer: ReplayBuffer,
               cfg: TrainConfig, adam: AdamState, gen: np.random.Generator) -> float | None:
    """One sampled batch update on net; returns the batch loss, or None if
    the buffer has not reached warmup yet."""
    if len(buffer) < max(cfg.batch_size, cfg.warmup):
        return None
    s, a, r, s2, done = buffer.sample(gen, cfg.batch_size)
    targets = q_target(r, s2, done, target_net, cfg.gamma)
    loss, dws, dbs = net.kernel.loss_and_grads(net.ws, net.bs, s, a, targets)
    adam.t += 1
    net.kernel.adam_step(net.ws, net.bs, dws, dbs, adam.mws, adam.mbs,
                         adam.vws, adam.vbs, adam.t, cfg.learning_rate,
                         cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    return loss


@dataclass
class EpisodeLog:
    episode: int
    end_iteration: int
    length: int
    mean_loss: float
    epsilon: float


def reward_for_slot(spec: RewardSpec, sim: Simulation, action: int,
                    pre_ages: np.ndarray, weights=None) -> float:
    """Assemble reward inputs around one committed step.

    A and O come from the pre-step ages (so A <= O always holds), U and M
    from the post-step state.
    """
    w = weights[action] if weights is not None else 0.0
    inputs = RewardInputs(
        A=float(pre_ages[action]),
        U=float(sim.slot_count),
        M=sim.min_battery_fraction(),
        O=float(pre_ages.max()),
        priority_w=float(w),
    )
    return compute_reward(spec, inputs)


def train(scenario: Scenario, reward_spec: RewardSpec, cfg: TrainConfig,
          seed: int, backend=None) -> tuple[QNetwork, list[EpisodeLog]]:
    """Run cfg.iterations environment steps of epsilon-greedy DQN training.

    Episodes reset on termination with a fresh task-volume stream derived
    from (seed, episode index). Returns the trained network and one log row
    per completed episode. Deterministic in (scenario, cfg, seed) for a
    fixed kernel backend.
    """
    kernel = backend if backend is not None else get_backend()
    init_gen = streams.train_stream(seed, streams.TRAIN_INIT)
    explore_gen = streams.train_stream(seed, streams.TRAIN_EXPLORE)
    replay_gen = streams.train_stream(seed, streams.TRAIN_REPLAY)

    n = scenario.n_devices
    net = QNetwork.for_scenario(n, init_gen, kernel)
    target_net = net.clone()
    adam = AdamState(net)
    buffer = ReplayBuffer(cfg.buffer_capacity, 2 * n)
    log: list[EpisodeLog] = []

    weights = scenario.priority_weights
    episode = 0
    sim = Simulation(scenario, streams.episode_stream(seed, episode))
    state = sim.state_vector(cfg.normalize_age)
    ep_loss_sum = 0.0
    ep_loss_n = 0
    grad_steps = 0

    for i in range(cfg.iterations):
        eps = epsilon(i, cfg)
        if explore_gen.random() < eps:
            action = int(explore_gen.integers(0, n))
        else:
            action = int(np.argmax(net.forward(state)))

        pre_ages = sim.ages.copy()
        outcome = sim.step(action)
        reward = reward_for_slot(reward_spec, sim, action, pre_ages, weights)
        done = outcome.terminated is not None
        next_state = sim.state_vector(cfg.normalize_age)

        buffer.push(state, action, reward, next_state, done)

        loss = train_step(net, target_net, buffer, cfg, adam, replay_gen)
        if loss is not None:
            ep_loss_sum += loss
            ep_loss_n += 1
            grad_steps += 1
            if grad_steps % cfg.target_sync_interval == 0:
                target_net.copy_from(net)

        if done:
            log.append(EpisodeLog(
                episode=episode,
                end_iteration=i + 1,
                length=sim.slot_count,
                mean_loss=ep_loss_sum / ep_loss_n if ep_loss_n else 0.0,
                epsilon=eps,
            ))
            episode += 1
            sim.reset(streams.episode_stream(seed, episode))
            state = sim.state_vector(cfg.normalize_age)
            ep_loss_sum = 0.0
            ep_loss_n = 0
        else:
            state = next_state

    return net, log


def save_training_log(log: list[EpisodeLog], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("episode,end_iteration,length,mean_loss,epsilon\n")
        for row in log:
            fh.write(f"{row.episode},{row.end_iteration},{row.length},"
                     f"{row.mean_loss!r},{row.epsilon!r}\n")
