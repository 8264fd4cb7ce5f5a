from .scan import (ConfigError, ScanConfig, SessionSummary, bidi_prefilter, prefilter,
                   walk_and_scan)
from .report import emit_report, fingerprints, load_baseline, rules_reference, write_baseline
from .main import main

__all__ = ["ConfigError", "ScanConfig", "SessionSummary", "bidi_prefilter", "prefilter",
           "walk_and_scan", "emit_report", "fingerprints", "load_baseline", "rules_reference",
           "write_baseline", "main"]
