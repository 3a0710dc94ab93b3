"""
Report output for geostab: JSON and CSV writers and output-path checks.
"""
from .writer import emit_report, render_json, to_plain, format_float
from .safety import validate_output_name, output_path

__all__ = [
    'emit_report',
    'render_json',
    'to_plain',
    'format_float',
    'validate_output_name',
    'output_path'
]
