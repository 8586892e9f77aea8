from .shifted_process import (ShiftedProcessConfig, LocalizationConstants,
                              ShiftedGrid, localization_lambda,
                              log_moment_bound, signed_weights,
                              population_saddle, shifted_process_value,
                              sup_shifted_process, moment_check_draws,
                              exp_moment_check,
                              excess_risk_chain, check_excess_risk_chain,
                              excess_risk_chain_sweep,
                              check_localization, grid_refinement_gap)
