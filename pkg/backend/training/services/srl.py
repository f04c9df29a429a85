"""
Imitation-regularized actor-critic updates.

The actor is pushed by two signals at once:

- evaluation signal: the deterministic policy gradient grad_a Q(c, mu(c))
- indicator signal: the multi-label cross-entropy gradient toward the
  doctor's prescription, per medication
  ``g_k = (1/K) (a_doctor_k - a_k) / ((1 - a_k) a_k)``

mixed as ``(1 - epsilon) grad_a Q + epsilon g`` at the actor output and
backpropagated through the actor head and the history encoder. The critic
is fitted by TD regression at the doctor's actions against targets from the
target networks. Every per-trajectory contribution is weighted by
1 / (batch size * trajectory length).
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar, Union

import numpy as np

from core.exceptions import DimensionError, EmptyInputError, NumericalError
from core.params import ParamSet, apply_step, clip_by_global_norm, sum_in_order
from data_pipeline.trajectories import Trajectory
from networks.actor import PROBABILITY_FLOOR, PolicyCache, PolicyNetwork
from networks.critic import Critic
from networks.targets import TargetPair

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def ordered_map(fn: Callable[[T], R], items: Iterable[T], executor: Optional[Executor] = None) -> List[R]:
    """Map in parallel when an executor is given; results keep input order."""
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


# ---------------------------------------------------------------------------
# Indicator signal
# ---------------------------------------------------------------------------

def _check_action_pair(a_doctor, a_actor):
    a_doctor = np.asarray(a_doctor, dtype=np.float64)
    a_actor = np.asarray(a_actor, dtype=np.float64)
    if a_doctor.shape != a_actor.shape:
        raise DimensionError(f"doctor actions {a_doctor.shape} and actor actions {a_actor.shape} differ in shape")
    if np.any(a_actor < PROBABILITY_FLOOR) or np.any(a_actor > 1.0 - PROBABILITY_FLOOR):
        raise ValueError(f"actor probabilities must lie in [{PROBABILITY_FLOOR}, {1.0 - PROBABILITY_FLOOR}]")
    return a_doctor, a_actor


def sl_gradient(a_doctor, a_actor) -> np.ndarray:
    """
    Per-medication ascent direction of the negative cross entropy, same shape
    as the inputs: ``(1/K)(a_doctor - a_actor) / ((1 - a_actor) a_actor)``.
    """
    a_doctor, a_actor = _check_action_pair(a_doctor, a_actor)
    n_medications = a_actor.shape[-1]
    return (a_doctor - a_actor) / ((1.0 - a_actor) * a_actor) / n_medications


def sl_weight(a_doctor, a_actor) -> Union[float, np.ndarray]:
    """
    Summed indicator weight phi = sum_k g_k.

    Returns a float for one action vector and one value per row for a
    (T, K) batch.

    >>> sl_weight([1.0], [0.5])
    2.0
    >>> sl_weight([1.0, 0.0], [0.5, 0.5])
    0.0
    """
    phi = sl_gradient(a_doctor, a_actor).sum(axis=-1)
    return float(phi) if np.ndim(phi) == 0 else phi


# ---------------------------------------------------------------------------
# TD targets
# ---------------------------------------------------------------------------

def critic_td_target(reward: float, terminal: bool, next_encoded: Optional[np.ndarray],
                     targets: TargetPair, gamma: float) -> float:
    """
    y = r                                   at the terminal step
    y = r + gamma Q'(c', mu'(c'))           otherwise
    where c' is the next encoded state from the target encoder.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    if terminal:
        return float(reward)
    next_encoded = np.atleast_2d(next_encoded)
    bootstrap = targets.critic.q_value(next_encoded, targets.policy.act(next_encoded))[0]
    return float(reward + gamma * bootstrap)


def td_targets(trajectory: Trajectory, targets: TargetPair, gamma: float) -> np.ndarray:
    """TD targets for every step of one admission, shape (T,)."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    y = np.array(trajectory.rewards, dtype=np.float64, copy=True)
    if trajectory.length > 1:
        target_encoded, _ = targets.policy.encoder.encode(trajectory)
        following = target_encoded[1:]
        bootstrap = targets.critic.q_value(following, targets.policy.act(following))
        y[:-1] += gamma * bootstrap
    return y


# ---------------------------------------------------------------------------
# Batch preparation
# ---------------------------------------------------------------------------

@dataclass
class EncodedTrajectory:
    """One sampled admission with everything the two updates need."""

    trajectory: Trajectory
    encoded: np.ndarray
    actions: np.ndarray
    policy_cache: PolicyCache
    td_targets: np.ndarray

    @property
    def length(self) -> int:
        return self.trajectory.length


def encode_trajectory(policy: PolicyNetwork, targets: TargetPair, trajectory: Trajectory,
                      gamma: float) -> EncodedTrajectory:
    actions, cache = policy.forward(trajectory)
    return EncodedTrajectory(
        trajectory=trajectory,
        encoded=cache.encoded,
        actions=actions,
        policy_cache=cache,
        td_targets=td_targets(trajectory, targets, gamma),
    )


def encode_batch(policy: PolicyNetwork, targets: TargetPair, batch: Sequence[Trajectory], gamma: float,
                 executor: Optional[Executor] = None) -> List[EncodedTrajectory]:
    if not batch:
        raise EmptyInputError("cannot encode an empty batch")
    return ordered_map(lambda traj: encode_trajectory(policy, targets, traj, gamma), batch, executor)


# ---------------------------------------------------------------------------
# Updates
# ---------------------------------------------------------------------------

@dataclass
class CriticUpdate:
    critic: Critic
    mean_squared_td_error: float


def critic_gradients(critic: Critic, batch: Sequence[EncodedTrajectory],
                     executor: Optional[Executor] = None):
    """Averaged gradient of the squared TD error and the averaged squared TD error."""
    if not batch:
        raise EmptyInputError("critic update needs a non-empty batch")
    size = len(batch)

    def one(item: EncodedTrajectory):
        q, cache = critic.forward(item.encoded, item.trajectory.actions)
        delta = q - item.td_targets
        weight = 1.0 / (size * item.length)
        grads = critic.backward(cache, weight * delta).params
        return grads, weight * float(np.sum(delta * delta))

    results = ordered_map(one, batch, executor)
    grads = sum_in_order((g for g, _ in results), critic.params)
    loss = float(sum(value for _, value in results))
    if not np.isfinite(loss):
        raise NumericalError("non-finite TD error in critic update")
    return grads, loss


def critic_update(critic: Critic, batch: Sequence[EncodedTrajectory], critic_lr: float,
                  grad_clip: Optional[float] = None, executor: Optional[Executor] = None) -> CriticUpdate:
    """One descent step on the mean squared TD error, taken at the doctor's actions."""
    grads, loss = critic_gradients(critic, batch, executor)
    grads = clip_by_global_norm(grads, grad_clip)
    return CriticUpdate(
        critic=critic.with_params(apply_step(critic.params, grads, -critic_lr)),
        mean_squared_td_error=loss,
    )


def actor_gradients(policy: PolicyNetwork, batch: Sequence[EncodedTrajectory], critic: Critic,
                    epsilon: float, executor: Optional[Executor] = None) -> ParamSet:
    """
    Ascent direction for the policy parameters.

    ``batch`` must have been encoded with ``policy``; its caches are reused.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if not batch:
        raise EmptyInputError("actor update needs a non-empty batch")
    size = len(batch)

    def one(item: EncodedTrajectory) -> ParamSet:
        upstream = np.zeros_like(item.actions)
        if epsilon < 1.0:
            upstream += (1.0 - epsilon) * critic.action_gradient(item.encoded, item.actions)
        if epsilon > 0.0:
            upstream += epsilon * sl_gradient(item.trajectory.actions, item.actions)
        return policy.backward(item.policy_cache, upstream / (size * item.length))

    return sum_in_order(ordered_map(one, batch, executor), policy.params)


def actor_update(policy: PolicyNetwork, batch: Sequence[EncodedTrajectory], critic: Critic, epsilon: float,
                 actor_lr: float, grad_clip: Optional[float] = None,
                 executor: Optional[Executor] = None) -> PolicyNetwork:
    """theta <- theta + actor_lr * [(1 - epsilon) grad_a Q + epsilon g] grad_theta mu."""
    grads = clip_by_global_norm(actor_gradients(policy, batch, critic, epsilon, executor), grad_clip)
    return policy.with_params(apply_step(policy.params, grads, actor_lr))
