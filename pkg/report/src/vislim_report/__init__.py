"""Figure generation for vislim sweep outputs (read-only consumer)."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureSpec, build
