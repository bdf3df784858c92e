from typing import Any, Dict, List, Mapping, Optional, Type
from abc import ABCMeta
import logging

from decorators.logging_decorators import log_calls
from numkit.errors import ScenarioError

logger = logging.getLogger(__name__)


class ModelRegistryMeta(ABCMeta):
    """Metaclass that registers every concrete model under its model_name."""

    _registry: Dict[str, Type] = {}

    def __new__(mcs, name, bases, attrs):
        cls = super().__new__(mcs, name, bases, attrs)

        # Abstract bases and classes without a name stay out of the registry
        model_name = attrs.get('model_name')
        if model_name and not cls.__abstractmethods__:
            mcs._registry[model_name] = cls

        return cls


class ModelFactory:
    """Factory for creating dynamic models by name."""

    @staticmethod
    def available() -> List[str]:
        """Registered model names, sorted."""
        return sorted(ModelRegistryMeta._registry)

    @staticmethod
    @log_calls
    def create(model_name: str, overrides: Optional[Mapping[str, Any]] = None):
        """
        Creates a model instance with default parameters plus overrides.

        Args:
            model_name: Registered name ("smib", "gfm", "gfl", "linear")
            overrides: Parameter name -> value map

        Returns:
            Instance of the corresponding model class

        Raises:
            ScenarioError: If the model is not registered or an override is invalid
        """
        model_class = ModelRegistryMeta._registry.get(model_name)

        if model_class is None:
            raise ScenarioError(
                f"unknown model {model_name!r}; "
                f"available models: {', '.join(ModelFactory.available())}",
                "model",
            )

        model = model_class.from_overrides(overrides)
        logger.info(f"Created model {model_name} (n={model.n}, m={model.m}, p={model.p})")
        return model
