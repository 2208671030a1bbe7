"""Riccati equations for negative-imaginary systems and linear quantum systems."""
__version__ = "0.1.0"

from . import coherent_hinf, ni, ni_synth, numlin, qlin  # noqa: E402
from .exceptions import *  # noqa: E402,F401,F403
from .ni import (  # noqa: E402
    Classification,
    RealStateSpace,
    interconnection_stability,
    ni_frequency_oracle,
    ni_riccati_test,
    sni_check,
)
from .numlin import (  # noqa: E402
    StateSpace,
    hinf_norm,
    solve_are,
    solve_care,
    solve_lyapunov,
    solve_sylvester,
)
