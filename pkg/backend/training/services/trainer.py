"""
Epoch loop for the imitation-regularized actor-critic.

Per mini-batch:

1. sample I complete admissions from the replay buffer
2. encode histories with the live encoder, actor actions mu(c_t)
3. TD targets from the target encoder, target actor and target critic
4. critic step on the squared TD error at the doctor's actions
5. soft update of the target critic
6. actor step with the mixed gradient, using the updated critic
7. soft update of the target policy

An epoch is ``steps_per_epoch`` mini-batches (default: one pass over the
buffer). After every epoch the trainer records the mean squared TD error,
the critic's estimate of the policy's return at admission start and the
mean Jaccard on the validation admissions.
"""
import logging
import math
from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from core.exceptions import EmptyInputError, NumericalError
from data_pipeline.trajectories import Trajectory
from evaluation.services.metrics import mean_jaccard
from networks.bundle import NetworkBundle
from training.config import TrainConfig
from training.policy import TrainedPolicy
from training.replay import ReplayBuffer
from training.services.srl import actor_update, critic_update, encode_batch, ordered_map

logger = logging.getLogger(__name__)


@dataclass
class EpochMetrics:
    epoch: int
    mean_td_error: float
    mean_return: float
    jaccard: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainingResult:
    policy: TrainedPolicy
    bundle: NetworkBundle
    trace: List[EpochMetrics] = field(default_factory=list)


class SrlTrainer:
    """
    Runs the epoch loop over a replay buffer.

    The trainer owns the network bundle and replaces it with updated values
    after every mini-batch; networks are never mutated in place.
    """

    def __init__(self, config: TrainConfig, buffer: ReplayBuffer, bundle: NetworkBundle,
                 validation: Sequence[Trajectory] = ()):
        if len(buffer) == 0:
            raise EmptyInputError("training needs a non-empty replay buffer")
        self.config = config
        self.buffer = buffer
        self.bundle = bundle
        self.validation = list(validation) or [buffer[i] for i in range(min(len(buffer), config.validation_limit))]
        self.executor: Optional[Executor] = None

    @property
    def steps_per_epoch(self) -> int:
        if self.config.steps_per_epoch is not None:
            return self.config.steps_per_epoch
        return math.ceil(len(self.buffer) / self.config.batch_size)

    def train_step(self, batch: Sequence[Trajectory]) -> float:
        """One mini-batch update of all four networks; returns the batch mean squared TD error."""
        cfg = self.config
        bundle = self.bundle
        encoded = encode_batch(bundle.policy, bundle.targets, batch, cfg.gamma, self.executor)

        critic_result = critic_update(bundle.critic, encoded, cfg.critic_lr, cfg.grad_clip, self.executor)
        targets = bundle.targets.update_critic(critic_result.critic, cfg.tau)

        policy = actor_update(
            bundle.policy, encoded, critic_result.critic, cfg.epsilon, cfg.actor_lr, cfg.grad_clip, self.executor,
        )
        targets = targets.update_policy(policy, cfg.tau)

        self.bundle = NetworkBundle(bundle.architecture, policy, critic_result.critic, targets)
        return critic_result.mean_squared_td_error

    def validation_metrics(self):
        """(mean Q(c_1, mu(c_1)), mean Jaccard) over the validation admissions."""
        trained = TrainedPolicy.from_bundle(self.bundle, self.config.threshold)

        def one(trajectory: Trajectory):
            probabilities, cache = trained.policy.forward(trajectory)
            start_q = trained.critic.q_value(cache.encoded[:1], probabilities[:1])[0]
            recommended = (probabilities >= trained.threshold).astype(np.float64)
            return float(start_q), recommended

        results = ordered_map(one, self.validation, self.executor)
        report = mean_jaccard([r for _, r in results], [t.actions for t in self.validation])
        return float(np.mean([q for q, _ in results])), report.mean

    def run_epoch(self, epoch: int) -> EpochMetrics:
        rng = self.buffer.epoch_rng(epoch)
        losses = []
        for step in range(self.steps_per_epoch):
            batch = self.buffer.sample(self.config.batch_size, rng)
            try:
                losses.append(self.train_step(batch))
            except NumericalError as e:
                raise NumericalError(f"epoch {epoch + 1}, step {step + 1}: {e}") from e
        mean_return, jaccard = self.validation_metrics()
        metrics = EpochMetrics(
            epoch=epoch + 1,
            mean_td_error=float(np.mean(losses)),
            mean_return=mean_return,
            jaccard=jaccard,
        )
        if not all(np.isfinite([metrics.mean_td_error, metrics.mean_return])):
            raise NumericalError(f"epoch {epoch + 1}: non-finite metrics {metrics.as_dict()}")
        return metrics

    def train(self, start_epoch: int = 0, trace: Optional[Sequence[EpochMetrics]] = None,
              on_epoch_end: Optional[Callable[['SrlTrainer', List[EpochMetrics]], None]] = None) -> TrainingResult:
        """
        Train epochs ``start_epoch .. config.epochs - 1``.

        Args:
            start_epoch: epochs already completed (resume)
            trace: metrics of the completed epochs
            on_epoch_end: called after every epoch with the trainer and the trace so far
        """
        trace = list(trace or [])
        pool = ThreadPoolExecutor(max_workers=self.config.workers) if self.config.workers > 1 else nullcontext()
        with pool as executor:
            self.executor = executor
            try:
                for epoch in range(start_epoch, self.config.epochs):
                    metrics = self.run_epoch(epoch)
                    trace.append(metrics)
                    logger.info(
                        f"Epoch {metrics.epoch}/{self.config.epochs}: td={metrics.mean_td_error:.4f} "
                        f"return={metrics.mean_return:.3f} jaccard={metrics.jaccard:.4f}",
                        extra=metrics.as_dict(),
                    )
                    if on_epoch_end is not None:
                        on_epoch_end(self, trace)
            finally:
                self.executor = None
        return TrainingResult(
            policy=TrainedPolicy.from_bundle(self.bundle, self.config.threshold),
            bundle=self.bundle,
            trace=trace,
        )


def train_epochs(config: TrainConfig, buffer: ReplayBuffer, bundle: NetworkBundle,
                 validation: Sequence[Trajectory] = (), start_epoch: int = 0,
                 trace: Optional[Sequence[EpochMetrics]] = None,
                 on_epoch_end: Optional[Callable] = None) -> TrainingResult:
    """Run the epoch loop; with ``config.epochs == start_epoch`` the networks come back unchanged."""
    trainer = SrlTrainer(config, buffer, bundle, validation)
    return trainer.train(start_epoch=start_epoch, trace=trace, on_epoch_end=on_epoch_end)
