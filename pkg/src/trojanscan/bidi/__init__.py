from .engine import BidiLine, Direction, display_order, line_reorders, resolve_levels

__all__ = ["BidiLine", "Direction", "display_order", "line_reorders", "resolve_levels"]
