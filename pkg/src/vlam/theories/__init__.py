from .cases import (
    BUILTINS, CaseStudy, CaseStudyError, Probe, ProbeResult, Report, builtin, data_path, run_case_study,
    run_probe, seq_term, walk_term,
)
