"""Deep cross-entropy search over word-encoded constructions.

Each iteration samples a batch of words from the policy network, scores
them with a black-box reward, trains the network on the (state, action)
pairs of the top-scoring sessions, and carries the very best sessions over
to the next iteration, where they stay until they are outscored.

Randomness is split into independent streams keyed by
``(seed, iteration, purpose, index)``, and sessions are sampled in fixed-size
blocks, so a run is bit-for-bit reproducible whatever the worker count.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .encoding import ConstructionSpace, decode, encode_states, format_word
from .nn import PolicyNetwork, TrainBatch, backward, save_checkpoint, sgd_step

__all__ = [
    "CemConfig",
    "Session",
    "RunResult",
    "CrossEntropySearch",
    "sample_session",
    "sample_sessions",
    "select_elites",
    "elite_cutoff",
    "survivor_count",
    "score_sessions",
    "trajectory_states",
    "run",
]

log = logging.getLogger(__name__)

SAMPLE_BLOCK = 64
_STREAM_SESSION, _STREAM_TRAIN, _STREAM_INIT = 0, 1, 2


@dataclass
class CemConfig:
    batch_size: int = 200
    select_percentile: float = 10.0
    survive_percentile: float = 3.0
    lr: float = 0.005
    max_iterations: int = 1000
    rng_seed: int = 0
    target_threshold: Optional[float] = None
    penalty: float = -10000.0
    hidden_layer_sizes: tuple = (128, 64, 4)
    minibatch_size: int = 32
    momentum: float = 0.0
    workers: int = 1
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.batch_size < 10:
            raise ValueError("batch_size must be at least 10")
        if not 0 < self.survive_percentile <= self.select_percentile <= 100:
            raise ValueError("need 0 < survive_percentile <= select_percentile <= 100")
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.minibatch_size < 1:
            raise ValueError("minibatch_size must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be non-negative")


@dataclass
class Session:
    """A complete word together with its score.

    The trajectory is a pure function of the word, so it is rebuilt on
    demand instead of being stored.
    """

    word: tuple
    space: ConstructionSpace
    reward: float = float("nan")
    birth_iteration: int = 0

    def states(self) -> np.ndarray:
        return trajectory_states(self.space, self.word)

    @property
    def trajectory(self) -> list[tuple[np.ndarray, int]]:
        return list(zip(self.states(), self.word))


@dataclass
class RunResult:
    best: Session
    history: list[dict] = field(default_factory=list)
    survivors: list[Session] = field(default_factory=list)
    policy: Optional[PolicyNetwork] = None
    reached_threshold: bool = False


def trajectory_states(space: ConstructionSpace, word: Sequence[int]) -> np.ndarray:
    """Row ``k`` is the encoded state seen before letter ``k`` was chosen."""
    L, w = space.word_len, space.letter_width
    word = np.asarray(word, dtype=np.int64)
    states = np.zeros((L, space.state_dim))
    below = np.tril(np.ones((L, L), dtype=bool), -1)
    if w == 1:
        states[:, :L] = below * word
    else:
        rows, pos = np.nonzero(below)
        states[rows, pos * w + word[pos]] = 1.0
    states[np.arange(L), L * w + np.arange(L)] = 1.0
    return states


def _session_rng(seed: int, iteration: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, iteration, _STREAM_SESSION, index])


def _sample_block(net: PolicyNetwork, space: ConstructionSpace, uniforms: np.ndarray) -> np.ndarray:
    b, L = uniforms.shape
    s = space.alphabet_size
    words = np.zeros((b, L), dtype=np.int64)
    for step in range(L):
        probs = net.predict_proba(encode_states(space, words, step))
        cdf = np.cumsum(probs, axis=1)
        letters = (uniforms[:, step:step + 1] >= cdf[:, :-1]).sum(axis=1)
        words[:, step] = np.minimum(letters, s - 1)
    return words


def sample_sessions(
    net: PolicyNetwork,
    space: ConstructionSpace,
    count: int,
    *,
    seed: int,
    iteration: int,
    workers: int = 1,
) -> list[Session]:
    """Draw ``count`` sessions; session ``i`` uses its own random substream."""
    L = space.word_len
    uniforms = np.array([_session_rng(seed, iteration, i).random(L) for i in range(count)]).reshape(count, L)
    blocks = [uniforms[i:i + SAMPLE_BLOCK] for i in range(0, count, SAMPLE_BLOCK)]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda u: _sample_block(net, space, u), blocks))
    else:
        chunks = [_sample_block(net, space, u) for u in blocks]
    words = np.vstack(chunks) if chunks else np.zeros((0, L), dtype=np.int64)
    return [Session(tuple(int(x) for x in w), space, birth_iteration=iteration) for w in words]


def sample_session(net: PolicyNetwork, space: ConstructionSpace, rng: np.random.Generator) -> Session:
    """Generate one word letter by letter from the policy."""
    if net.n_features_in_ != space.state_dim:
        from .nn import DimMismatch

        raise DimMismatch(f"network expects {net.n_features_in_} inputs, space has {space.state_dim}")
    words = _sample_block(net, space, rng.random((1, space.word_len)))
    return Session(tuple(int(x) for x in words[0]), space)


def score_sessions(
    sessions: Sequence[Session],
    reward_fn: Callable,
    *,
    penalty: float = -10000.0,
    workers: int = 1,
) -> None:
    """Fill in ``session.reward``; failures and non-finite scores get ``penalty``."""

    def score(sess: Session) -> float:
        try:
            r = float(reward_fn(decode(sess.space, sess.word)))
        except Exception as exc:  # noqa: BLE001 - any reward failure is a bad construction
            log.debug("reward failed for %s: %s", sess.word, exc)
            return penalty
        return r if math.isfinite(r) else penalty

    todo = [s for s in sessions if math.isnan(s.reward)]
    if workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rewards = list(pool.map(score, todo))
    else:
        rewards = [score(s) for s in todo]
    for s, r in zip(todo, rewards):
        s.reward = r


def elite_cutoff(rewards: Sequence[float], percentile: float) -> float:
    """Smallest reward that still belongs to the top ``percentile`` percent."""
    if not len(rewards):
        raise ValueError("no rewards")
    k = max(1, math.ceil(percentile * len(rewards) / 100))
    return sorted(rewards, reverse=True)[k - 1]


def survivor_count(pool_size: int, percentile: float) -> int:
    return max(1, math.ceil(percentile * pool_size / 100))


def _elite_sessions(sessions: Sequence[Session], percentile: float) -> list[Session]:
    cut = elite_cutoff([s.reward for s in sessions], percentile)
    return [s for s in sessions if s.reward >= cut]


def select_elites(sessions: Sequence[Session], y: float) -> TrainBatch:
    """(state, action) pairs of every session scoring at least the top-``y``% cutoff."""
    if not sessions:
        raise ValueError("no sessions to select from")
    elites = _elite_sessions(sessions, y)
    states = np.vstack([s.states() for s in elites])
    actions = np.concatenate([np.asarray(s.word, dtype=np.int64) for s in elites])
    return TrainBatch(states, actions)


def _survivors(ranked: Sequence[Session], x: float) -> list[Session]:
    keep = survivor_count(len(ranked), x)
    out, seen = [], set()
    for s in ranked:
        if s.word in seen:
            continue
        seen.add(s.word)
        out.append(s)
        if len(out) == keep:
            break
    return out


def _train_pass(net: PolicyNetwork, batch: TrainBatch, cfg: CemConfig, rng: np.random.Generator) -> None:
    order = rng.permutation(len(batch.actions))
    for start in range(0, len(order), cfg.minibatch_size):
        sel = order[start:start + cfg.minibatch_size]
        grads = backward(net, TrainBatch(batch.states[sel], batch.actions[sel]), encoded=True)
        sgd_step(net, grads, cfg.lr)


def run(
    cfg: CemConfig,
    space: ConstructionSpace,
    reward_fn: Callable,
    *,
    log_path=None,
    csv_path=None,
    out_dir=None,
    on_improve: Optional[Callable[[Session], None]] = None,
) -> RunResult:
    """Run the cross-entropy search until ``max_iterations`` or the target is beaten."""
    net = PolicyNetwork(
        hidden_layer_sizes=tuple(cfg.hidden_layer_sizes),
        learning_rate=cfg.lr,
        momentum=cfg.momentum,
        batch_size=cfg.minibatch_size,
        random_state=np.random.default_rng([cfg.rng_seed, 0, _STREAM_INIT, 0]),
    )
    net.initialize(space.state_dim, np.arange(space.alphabet_size))

    log_fh = open(log_path, "a", encoding="utf-8", buffering=1) if log_path else None
    csv_fh = None
    if csv_path:
        fresh = not os.path.exists(csv_path) or os.path.getsize(csv_path) == 0
        csv_fh = open(csv_path, "a", encoding="utf-8", buffering=1)
        if fresh:
            csv_fh.write("iteration,mean_elite_reward,best_reward\n")

    survivors: list[Session] = []
    best: Optional[Session] = None
    history: list[dict] = []
    reached = False
    start = time.perf_counter()
    try:
        for it in range(1, cfg.max_iterations + 1):
            fresh_sessions = sample_sessions(
                net, space, cfg.batch_size, seed=cfg.rng_seed, iteration=it, workers=cfg.workers
            )
            score_sessions(fresh_sessions, reward_fn, penalty=cfg.penalty, workers=cfg.workers)
            pool = survivors + fresh_sessions
            # stable sort: on ties, older survivors stay ahead of newcomers
            ranked = sorted(pool, key=lambda s: -s.reward)

            elites = _elite_sessions(ranked, cfg.select_percentile)
            batch = select_elites(ranked, cfg.select_percentile)
            _train_pass(net, batch, cfg, np.random.default_rng([cfg.rng_seed, it, _STREAM_TRAIN, 0]))
            survivors = _survivors(ranked, cfg.survive_percentile)

            if best is None or ranked[0].reward > best.reward:
                best = ranked[0]
                if on_improve is not None:
                    on_improve(best)
            stats = {
                "iteration": it,
                "mean_elite_reward": float(np.mean([s.reward for s in elites])),
                "best_reward": best.reward,
                "best_word": format_word(space, best.word),
                "elapsed_ms": int((time.perf_counter() - start) * 1000),
            }
            history.append(stats)
            if log_fh:
                log_fh.write(json.dumps(stats) + "\n")
            if csv_fh:
                csv_fh.write(f"{it},{stats['mean_elite_reward']!r},{stats['best_reward']!r}\n")
            if out_dir and cfg.checkpoint_every and it % cfg.checkpoint_every == 0:
                save_checkpoint(net, os.path.join(out_dir, f"checkpoint_{it:06d}.bin"))
            log.info("iteration %d: mean elite %.6g, best %.6g", it, stats["mean_elite_reward"], best.reward)
            if cfg.target_threshold is not None and best.reward > cfg.target_threshold:
                reached = True
                break
    finally:
        if log_fh:
            log_fh.close()
        if csv_fh:
            csv_fh.close()

    if best is None:
        best = Session(tuple(), space, reward=float("-inf"))
    return RunResult(best=best, history=history, survivors=survivors, policy=net, reached_threshold=reached)


class CrossEntropySearch(BaseEstimator):
    """Estimator-style wrapper around :func:`run`.

    ``fit(space, reward_fn)`` performs the search and exposes ``best_word_``,
    ``best_reward_``, ``best_construction_``, ``history_`` and ``policy_``.
    """

    def __init__(
        self,
        batch_size=200,
        select_percentile=10.0,
        survive_percentile=3.0,
        lr=0.005,
        max_iterations=1000,
        random_state=0,
        target_threshold=None,
        penalty=-10000.0,
        hidden_layer_sizes=(128, 64, 4),
        minibatch_size=32,
        momentum=0.0,
        workers=1,
    ):
        self.batch_size = batch_size
        self.select_percentile = select_percentile
        self.survive_percentile = survive_percentile
        self.lr = lr
        self.max_iterations = max_iterations
        self.random_state = random_state
        self.target_threshold = target_threshold
        self.penalty = penalty
        self.hidden_layer_sizes = hidden_layer_sizes
        self.minibatch_size = minibatch_size
        self.momentum = momentum
        self.workers = workers

    def _config(self) -> CemConfig:
        return CemConfig(
            batch_size=self.batch_size,
            select_percentile=self.select_percentile,
            survive_percentile=self.survive_percentile,
            lr=self.lr,
            max_iterations=self.max_iterations,
            rng_seed=int(self.random_state or 0),
            target_threshold=self.target_threshold,
            penalty=self.penalty,
            hidden_layer_sizes=tuple(self.hidden_layer_sizes),
            minibatch_size=self.minibatch_size,
            momentum=self.momentum,
            workers=self.workers,
        )

    def fit(self, space: ConstructionSpace, reward_fn: Callable, **run_kwargs) -> "CrossEntropySearch":
        result = run(self._config(), space, reward_fn, **run_kwargs)
        self.space_ = space
        self.result_ = result
        self.best_word_ = result.best.word
        self.best_reward_ = result.best.reward
        self.best_construction_ = decode(space, result.best.word) if result.best.word else None
        self.history_ = result.history
        self.policy_ = result.policy
        self.reached_threshold_ = result.reached_threshold
        self.n_iter_ = len(result.history)
        return self

    def sample(self, count: int, *, iteration: int = 0) -> list[Session]:
        """Draw fresh words from the trained policy."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "policy_")
        # iteration tags past 2**31 never collide with those used during fit
        return sample_sessions(
            self.policy_, self.space_, count, seed=int(self.random_state or 0), iteration=2**31 + iteration
        )
