"""Stochastic inverse eigenvalue solver on the product manifold OB(n) × O(n) × V_t × ℝ₊ᵗ × ℝᵗ."""

__version__ = "1.0.0"

# Importing error types
from .errors import StiepError, InputError, NumericalError

# Importing solver components
from .components import *

# Importing solver and experiment drivers
from .algorithms import *

from . import components as _components
from . import algorithms as _algorithms

__all__ = ["StiepError", "InputError", "NumericalError"] + list(_components.__all__) + list(_algorithms.__all__)
