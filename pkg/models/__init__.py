"""Models package: dynamic components, parameters and steady-state tools."""

# Import model classes to register them with the factory
from models.factory import ModelFactory
from models.base import DynamicModel
from models.params import SmibParams, GfmParams, GflParams, LinearParams
from models.smib import SmibModel, smib_f, smib_h
from models.gfm import GfmModel, gfm_f, gfm_h
from models.gfl import GflModel, gfl_f, gfl_h
from models.linear import LinearModel
from models.steady_state import numerical_jacobian, forward_difference_jacobian, steady_state

__all__ = [
    'ModelFactory',
    'DynamicModel',
    'SmibParams',
    'GfmParams',
    'GflParams',
    'LinearParams',
    'SmibModel',
    'GfmModel',
    'GflModel',
    'LinearModel',
    'smib_f',
    'smib_h',
    'gfm_f',
    'gfm_h',
    'gfl_f',
    'gfl_h',
    'numerical_jacobian',
    'forward_difference_jacobian',
    'steady_state',
]
