from abc import ABC, abstractmethod
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from models.factory import ModelRegistryMeta
from models.params import params_with_overrides


def stack_last(*columns) -> np.ndarray:
    """Stacks per-component arrays on a new last axis, broadcasting leading axes."""
    return np.stack(np.broadcast_arrays(*columns), axis=-1)


def ratio_or_zero(num, den):
    """num/den for a positive gain, zero when the gain is switched off."""
    return num / den if den > 0 else 0.0


class DynamicModel(ABC, metaclass=ModelRegistryMeta):
    """
    Abstract continuous-time component ẋ = f(x, u), z = h(x, u).

    f and h act on the last axis and broadcast over leading axes, so a
    whole sigma set of shape (N, n) is evaluated in one call.
    """

    model_name: str = ""
    params_type: type = None

    state_names: Tuple[str, ...] = ()
    input_names: Tuple[str, ...] = ()
    output_names: Tuple[str, ...] = ()

    # Named groups of states for per-block process noise
    state_blocks: Dict[str, Tuple[str, ...]] = {}
    # States shown in cost reports
    report_states: Tuple[str, ...] = ()

    def __init__(self, params=None):
        self.params = params if params is not None else self.params_type()

    @classmethod
    def from_overrides(cls, overrides: Optional[Mapping[str, Any]] = None) -> "DynamicModel":
        return cls(params_with_overrides(cls.params_type, overrides))

    @property
    def n(self) -> int:
        return len(self.state_names)

    @property
    def m(self) -> int:
        return len(self.input_names)

    @property
    def p(self) -> int:
        return len(self.output_names)

    @abstractmethod
    def f(self, x, u) -> np.ndarray:
        """State derivative, shape (..., n)."""
        pass

    @abstractmethod
    def h(self, x, u) -> np.ndarray:
        """Measured output, shape (..., p)."""
        pass

    @abstractmethod
    def nominal_input(self) -> np.ndarray:
        """Input at the nominal operating point."""
        pass

    @abstractmethod
    def flat_start(self, u0) -> np.ndarray:
        """Initial guess for the steady-state solve at input u0."""
        pass

    def closed_form_equilibrium(self, u0) -> Optional[np.ndarray]:
        """Analytic equilibrium where one exists, else None."""
        return None

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise KeyError(f"{self.model_name} has no state {name!r}") from None

    def block_of(self, state: str) -> Optional[str]:
        for block, members in self.state_blocks.items():
            if state in members:
                return block
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, m={self.m}, p={self.p})"
