"""Predict multi-walk parallel speedup of SAT local search from sequential runtime distributions."""

__version__ = "0.1.0"

from .cnf import CnfFormula, count_unsat, generate_uniform_ksat, parse_dimacs, write_dimacs
from .fit import (Exponential, FitReport, Lognormal, ShiftedExponential, fit_exponential,
                  fit_lognormal, fit_shifted_exponential, ks_test, model_cdf, model_mean,
                  select_model)
from .multiwalk import (ParallelResult, ReplayRunner, empirical_speedup,
                        run_parallel_wallclock, sequential_rtd, simulate_logical)
from .orderstats import (SpeedupCurve, empirical_expected_min, expected_min, min_cdf,
                         min_pdf, predicted_speedup, speedup_curve, speedup_limit)
from .rtd import Rtd, ecdf, quantile, summary
from .sls import RunOutcome, SolverConfig, collect_rtd, solve

__all__ = [
    "CnfFormula", "count_unsat", "generate_uniform_ksat", "parse_dimacs", "write_dimacs",
    "Exponential", "FitReport", "Lognormal", "ShiftedExponential", "fit_exponential",
    "fit_lognormal", "fit_shifted_exponential", "ks_test", "model_cdf", "model_mean",
    "select_model", "ParallelResult", "ReplayRunner", "empirical_speedup",
    "run_parallel_wallclock", "sequential_rtd", "simulate_logical", "SpeedupCurve", "empirical_expected_min",
    "expected_min", "min_cdf", "min_pdf", "predicted_speedup", "speedup_curve",
    "speedup_limit", "Rtd", "ecdf", "quantile", "summary", "RunOutcome", "SolverConfig",
    "collect_rtd", "solve",
]
