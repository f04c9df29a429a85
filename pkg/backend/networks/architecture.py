"""
Network shapes shared by the encoder, actor and critic.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

from core.exceptions import ConfigurationError


@dataclass(frozen=True)
class Architecture:
    """
    Input dimensions (from the dataset manifest) plus layer sizes (from the
    training config). Stored in every checkpoint so a policy can be rebuilt
    without the config that trained it.
    """

    series_dim: int
    static_dim: int
    disease_dim: int
    n_medications: int
    lstm_hidden: int = 64
    static_hidden: int = 32
    disease_hidden: int = 64
    actor_hidden: Tuple[int, ...] = (128, 128)
    critic_hidden: Tuple[int, ...] = (128, 128)
    recurrent: bool = True
    use_static: bool = True
    use_diseases: bool = True

    def __post_init__(self):
        if self.series_dim < 1:
            raise ConfigurationError(f"series_dim must be >= 1, got {self.series_dim}")
        if self.n_medications < 1:
            raise ConfigurationError(f"n_medications must be >= 1, got {self.n_medications}")
        if self.static_dim < 0 or self.disease_dim < 0:
            raise ConfigurationError(
                f"static_dim and disease_dim must be >= 0, got {self.static_dim}, {self.disease_dim}"
            )
        object.__setattr__(self, 'actor_hidden', tuple(int(h) for h in self.actor_hidden))
        object.__setattr__(self, 'critic_hidden', tuple(int(h) for h in self.critic_hidden))

    @classmethod
    def from_config(cls, config, series_dim: int, static_dim: int, disease_dim: int,
                    n_medications: int) -> 'Architecture':
        """Combine dataset dimensions with the layer sizes of a TrainConfig."""
        return cls(
            series_dim=series_dim,
            static_dim=static_dim,
            disease_dim=disease_dim,
            n_medications=n_medications,
            lstm_hidden=config.lstm_hidden,
            static_hidden=config.static_hidden,
            disease_hidden=config.disease_hidden,
            actor_hidden=tuple(config.actor_hidden),
            critic_hidden=tuple(config.critic_hidden),
            recurrent=config.recurrent,
            use_static=config.use_static,
            use_diseases=config.use_diseases,
        )

    @property
    def has_static_branch(self) -> bool:
        return self.use_static and self.static_dim > 0

    @property
    def has_disease_branch(self) -> bool:
        return self.use_diseases and self.disease_dim > 0

    @property
    def encoded_dim(self) -> int:
        dim = self.lstm_hidden
        if self.has_static_branch:
            dim += self.static_hidden
        if self.has_disease_branch:
            dim += self.disease_hidden
        return dim

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload['actor_hidden'] = list(self.actor_hidden)
        payload['critic_hidden'] = list(self.critic_hidden)
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> 'Architecture':
        return cls(**payload)
