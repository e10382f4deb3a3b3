from .runner import run, MetricsRow, CSV_HEADER
from .compare import compare, quantile

__all__ = ["run", "MetricsRow", "CSV_HEADER", "compare", "quantile"]
