from ._psg import (
    FeasibleSet,
    GeneratedProblem,
    InnerPerturbationPlan,
    IterationRecord,
    ObjectiveModel,
    OracleSolution,
    OuterPerturbationPlan,
    PsgError,
    RunReport,
    ScalingStrategy,
    StepsizePolicy,
    SuperiorizationInfo,
    Verdict,
    apply_scaling,
    bruteforce_em_trace,
    c_omega_bound,
    certificate_names,
    inner_to_outer,
    make_test_problem,
    project,
    psg_step,
    residual,
    run,
    run_superiorized,
    solve_reference,
)

__all__ = [
    "FeasibleSet",
    "GeneratedProblem",
    "InnerPerturbationPlan",
    "IterationRecord",
    "ObjectiveModel",
    "OracleSolution",
    "OuterPerturbationPlan",
    "PsgError",
    "RunReport",
    "ScalingStrategy",
    "StepsizePolicy",
    "SuperiorizationInfo",
    "Verdict",
    "apply_scaling",
    "bruteforce_em_trace",
    "c_omega_bound",
    "certificate_names",
    "inner_to_outer",
    "make_test_problem",
    "project",
    "psg_step",
    "residual",
    "run",
    "run_superiorized",
    "solve_reference",
]
