"""JSON adapters implementing the domain ports."""

from tools.adapters.json_model_spec import JsonModelSpecSource
from tools.adapters.json_report_sink import JsonReportSink
from tools.adapters.json_scattering_table import JsonScatteringTable

__all__ = ["JsonModelSpecSource", "JsonReportSink", "JsonScatteringTable"]
