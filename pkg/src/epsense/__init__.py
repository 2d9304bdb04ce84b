"""Quantum Fisher information of waveguide-probed coupled cavities near exceptional points."""
from .errors import *  # noqa: F401,F403
from .model import PassiveParams, SYMMETRIC, CAVITY_A_ONLY
from .scattering import InputField
from .numerics import QuadratureSpec
from .active import ActiveSystem, GainParams
from .sensing import qfi_total, qfi_splitting
from .active import qfi_active, lasing_threshold

__version__ = "0.1.0"
