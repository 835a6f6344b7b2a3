"""服务模块"""
from src.services.harness import SUITES, ReportRow, run_suites
from src.services.reporting import format_summary, write_manifest, write_report_csv, write_report_json

__all__ = ['SUITES', 'ReportRow', 'run_suites', 'format_summary', 'write_manifest', 'write_report_csv',
           'write_report_json']
