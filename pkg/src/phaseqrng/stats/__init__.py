from .autocorrelation import autocorrelation, null_band
from .battery import (
    IMPLEMENTED,
    TestConfig,
    TestReport,
    proportion_bounds,
    proportion_gate,
    pvalue_uniformity,
    run_battery,
)
from .nist import (
    InsufficientDataError,
    approximate_entropy,
    block_frequency,
    cumulative_sums,
    longest_run,
    monobit_frequency,
    runs_test,
    serial,
)
