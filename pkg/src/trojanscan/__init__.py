"""Trojan Source scanner: bidi reordering, homoglyph identifiers and invisible characters."""

__version__ = "0.1.0"

from .tables import (BidiClass, TableLoadError, UnicodeTables, bidi_class, is_bidi_control,
                     is_invisible, load_tables, script_of, skeleton)
from .bidi import BidiLine, Direction, display_order, line_reorders, resolve_levels
from .lexing import (IdentifierOccurrence, LanguageProfile, ProfileError, Span, SpanKind,
                     classify_spans, default_registry, extract_identifiers, load_profiles,
                     profile_for_path)
from .detection import (RULES, Finding, Policy, Rule, ScanReport, Severity, detect_bidi,
                        detect_homoglyphs, detect_invisible, detect_terminator_spoof, scan_unit)
from .rendering import RenderStyle, render_preview, sanitize, visualize
from .forge import ForgeError, ForgeSpec, forge, forge_corpus

__all__ = [
    "BidiClass", "TableLoadError", "UnicodeTables", "bidi_class", "is_bidi_control",
    "is_invisible", "load_tables", "script_of", "skeleton",
    "BidiLine", "Direction", "display_order", "line_reorders", "resolve_levels",
    "IdentifierOccurrence", "LanguageProfile", "ProfileError", "Span", "SpanKind",
    "classify_spans", "default_registry", "extract_identifiers", "load_profiles",
    "profile_for_path",
    "RULES", "Finding", "Policy", "Rule", "ScanReport", "Severity", "detect_bidi",
    "detect_homoglyphs", "detect_invisible", "detect_terminator_spoof", "scan_unit",
    "RenderStyle", "render_preview", "sanitize", "visualize",
    "ForgeError", "ForgeSpec", "forge", "forge_corpus",
]
