from .risk_lab import (ExperimentConfig, RiskRecord, QuantileCurve, RateFit,
                       ExperimentResult, strong_excess_risk, run_replication,
                       risk_quantile, quantile_curve, fit_rate, delta_ratio,
                       replication_tasks, run_experiment, default_threads)
