"""Zero Intelligence / Non-Markovian Zero Intelligence limit order book simulator."""

from ._core import (
    DEFAULT_LEVELS,
    Error,
    EstimationDegenerate,
    ExecutionResult,
    FitFailed,
    InternalConsistency,
    InvalidConfiguration,
    LiquidityExhausted,
    ModelParams,
    NmziParams,
    NumericInstability,
    ParseError,
    RejectedOrder,
    analyze,
    equilibrium_spread,
    estimate,
    evolve_mid,
    evolve_spread,
    run_metaorder,
    sell_lo_probability,
    simulate,
    theoretical_k,
)

__all__ = [
    "DEFAULT_LEVELS",
    "Error",
    "EstimationDegenerate",
    "ExecutionResult",
    "FitFailed",
    "InternalConsistency",
    "InvalidConfiguration",
    "LiquidityExhausted",
    "ModelParams",
    "NmziParams",
    "NumericInstability",
    "ParseError",
    "RejectedOrder",
    "analyze",
    "equilibrium_spread",
    "estimate",
    "evolve_mid",
    "evolve_spread",
    "run_metaorder",
    "sell_lo_probability",
    "simulate",
    "theoretical_k",
]
