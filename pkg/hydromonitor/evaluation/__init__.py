# This file makes the evaluation directory a Python package
from hydromonitor.evaluation.export import export, export_summaries, summary_header
from hydromonitor.evaluation.metrics import EvalSummary, aggregate, first_visit_matrix, visit_intervals
from hydromonitor.evaluation.policies import DSACPolicy, Policy, StationaryPolicy, make_policy
from hydromonitor.evaluation.trials import EvalConfig, TrialRecord, run_trial, run_trials
