"""Energy-efficiency analytics and simulation for ultra-dense cellular networks."""

from .analytics import (ConvergenceReport, EEReport, check_convergence_conditions,
                        ee_report, min_ho_window, optimal_ho_window, optimal_p0,
                        optimal_p1, power_fixed_point)
from .errors import (ConfigError, ConvergenceError, NumericDomainError,
                     ProtocolError, UdneeError)
from .params import ScenarioParams, parse_config
from .simulator import init_network, run_episode
from .specfun import bessel_i0, c1, lambert_w, marcum_q1

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "ConvergenceReport", "EEReport",
    "NumericDomainError", "ProtocolError", "ScenarioParams", "UdneeError",
    "bessel_i0", "c1", "check_convergence_conditions", "ee_report",
    "init_network", "lambert_w", "marcum_q1", "min_ho_window",
    "optimal_ho_window", "optimal_p0", "optimal_p1", "parse_config",
    "power_fixed_point", "run_episode",
]
