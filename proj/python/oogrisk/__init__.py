"""Risk of stealthy data-injection attacks on uncertain control loops."""

from ._core import (
    OogriskError,
    Realization,
    SystemSpec,
    assess_expected_loss,
    assess_var,
    boundedness,
    build_realization,
    campi_epsilon,
    coupled_gain,
    finite_horizon_oracle,
    hoeffding_sample_count,
    load_config,
    make_realization,
    min_samples_for_epsilon,
    oog_gain,
    parse_config,
    sample_scenarios,
)

__all__ = [
    "OogriskError",
    "Realization",
    "SystemSpec",
    "assess_expected_loss",
    "assess_var",
    "boundedness",
    "build_realization",
    "campi_epsilon",
    "coupled_gain",
    "finite_horizon_oracle",
    "hoeffding_sample_count",
    "load_config",
    "make_realization",
    "min_samples_for_epsilon",
    "oog_gain",
    "parse_config",
    "sample_scenarios",
]
