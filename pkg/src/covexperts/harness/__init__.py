from covexperts.harness.certificates import (
    DualCertificate,
    check_dual_certificate,
    check_competitive_ratio,
)
from covexperts.harness.runner import (
    CheckResult,
    RunConfig,
    RunReport,
    run_experiment,
    emit_table,
    verify_report,
)

__all__ = [
    "DualCertificate",
    "check_dual_certificate",
    "check_competitive_ratio",
    "CheckResult",
    "RunConfig",
    "RunReport",
    "run_experiment",
    "emit_table",
    "verify_report",
]
