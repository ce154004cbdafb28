"""External system model ``(X, U, f, h, Y)``."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .core import TransitionSystem, check_determinism, check_fullness
from .errors import AlphabetMismatch, InvalidInput


@dataclass(frozen=True)
class ExternalModel:
    """Deterministic full state transitions over actions plus a state-based sensor.

    ``obs[x]`` is the observation id emitted in state ``x``; ``observations``
    holds the observation names.
    """

    ts: TransitionSystem
    obs: tuple[int, ...]
    observations: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "obs", tuple(int(v) for v in self.obs))
        object.__setattr__(self, "observations", tuple(map(str, self.observations)))
        if len(self.obs) != self.ts.n_states:
            raise InvalidInput("sensor map must cover every state")
        if any(not 0 <= v < len(self.observations) for v in self.obs):
            raise InvalidInput("observation id out of range")
        if check_determinism(self.ts) is not None or check_fullness(self.ts) is not None:
            raise InvalidInput("external transitions must be deterministic and full")
        for name in self.actions + self.observations:
            if "/" in name:
                raise InvalidInput(f"name {name!r} may not contain '/'")

    @property
    def n_states(self) -> int:
        return self.ts.n_states

    @property
    def actions(self) -> tuple[str, ...]:
        return self.ts.alphabet

    @property
    def states(self) -> tuple[str, ...]:
        return self.ts.states

    def f(self, x: int, u: int) -> int:
        return self.ts.successors(x, u)[0]

    def h(self, x: int) -> int:
        return self.obs[x]

    def action_id(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise AlphabetMismatch(f"unknown action {name!r}") from None

    def obs_id(self, name: str) -> int:
        try:
            return self.observations.index(name)
        except ValueError:
            raise AlphabetMismatch(f"unknown observation {name!r}") from None

    @cached_property
    def _preimages(self) -> tuple[frozenset, ...]:
        out = [set() for _ in self.observations]
        for x, y in enumerate(self.obs):
            out[y].add(x)
        return tuple(frozenset(s) for s in out)

    def preimage(self, y: int) -> frozenset:
        """``H(y)``: every state that could yield ``y``."""
        return self._preimages[y]

    def image(self, xs: Sequence[int], u: int) -> frozenset:
        return frozenset(self.f(x, u) for x in xs)
