"""Layered parametric flood catastrophe bond."""

from .pricing import (
    BondTerms,
    CalibrationResult,
    PriceResult,
    Scenarios,
    SweepRow,
    calibrate_kappa,
    closed_form_coupon_bond,
    par_spread,
    price_bond,
    sensitivity_sweep,
)
from .rates import (
    DEFAULT_RATES,
    VasicekFactor,
    VasicekPair,
    affine_coefficients,
    coupon_factor,
    discount_factor_expectation,
    discounted_shibor_expectation,
    euler_expectations,
)
from .trigger import (
    DEFAULT_TRIGGER,
    TriggerModel,
    TriggerPath,
    build_path,
    distorted_quantile,
    payoff,
    sample_severity_distorted,
    simulate_event_times,
    simulate_path,
    trigger_increment,
    wipeout_time,
)
