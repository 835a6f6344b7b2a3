"""
报表服务
ReportRow 与核函数表的 CSV/JSON 输出，以及每次运行的清单文件
"""
import csv
import json
import logging
import platform
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from src.constants import KERNEL_CSV_COLUMNS, REPORT_CSV_COLUMNS
from src.services.harness import ReportRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MANIFEST_PACKAGES = ('numpy', 'scipy', 'flet')


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(rows: Iterable[ReportRow], path: PathLike) -> Path:
    """按固定列写出结果，首行为表头"""
    path = _prepare(path)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, quoting=csv.QUOTE_MINIMAL, lineterminator='\n')
        writer.writerow(REPORT_CSV_COLUMNS)
        for row in rows:
            record = row.to_record()
            writer.writerow([_cell(record[column]) for column in REPORT_CSV_COLUMNS])
    logger.info(f"写出报表: {path}")
    return path


def summarize(rows: Sequence[ReportRow]) -> Dict[str, Any]:
    """按套件统计通过情况"""
    suites: Dict[str, Dict[str, int]] = {}
    for row in rows:
        entry = suites.setdefault(row.suite, {'rows': 0, 'failed': 0})
        entry['rows'] += 1
        entry['failed'] += int(not row.passed)
    return {
        'passed': all(row.passed for row in rows),
        'rows': len(rows),
        'failed': sum(entry['failed'] for entry in suites.values()),
        'suites': suites,
    }


def write_report_json(rows: Sequence[ReportRow], path: PathLike) -> Path:
    path = _prepare(path)
    data = {'summary': summarize(rows), 'rows': [row.to_record() for row in rows]}
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True)
        handle.write('\n')
    logger.info(f"写出报表: {path}")
    return path


def describe_target(row: ReportRow) -> str:
    if row.comparison == 'band':
        return f"∈ [{row.target_low:.6g}, {row.target:.6g}]"
    return f"{row.comparison} {row.target:.6g}"


def format_summary(rows: Sequence[ReportRow]) -> str:
    """给人看的摘要：每个套件一行，随后列出未通过的条目"""
    summary = summarize(rows)
    lines = []
    for suite, entry in sorted(summary['suites'].items()):
        status = 'PASS' if entry['failed'] == 0 else 'FAIL'
        lines.append(f"{status}  {suite:<20} {entry['rows'] - entry['failed']}/{entry['rows']}")
    for row in rows:
        if not row.passed:
            lines.append(f"  失败: {row.suite} [{row.parameters}] {row.quantity} = {row.measured:.6g} "
                         f"(要求 {describe_target(row)}, {row.target_kind})")
    lines.append(f"总计: {summary['rows'] - summary['failed']}/{summary['rows']} 通过")
    return '\n'.join(lines)


def write_kernel_csv(records: Iterable[Sequence[float]], path: PathLike) -> Path:
    """核函数表，列为 lambda,x,y,kernel"""
    path = _prepare(path)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(KERNEL_CSV_COLUMNS)
        for record in records:
            writer.writerow([repr(float(v)) for v in record])
    return path


def package_versions() -> Dict[str, str]:
    versions = {'python': platform.python_version()}
    for name in MANIFEST_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'not installed'
    return versions


def write_manifest(output_dir: PathLike, subcommand: str, parameters: Dict[str, Any],
                   tolerances: Dict[str, Any] = None, seed: int = None,
                   outputs: List[str] = None) -> Path:
    """
    写出 <output_dir>/<subcommand>_manifest.json

    不含时间戳，相同输入得到逐字节相同的文件。
    """
    path = _prepare(Path(output_dir) / f"{subcommand}_manifest.json")
    data = {
        'subcommand': subcommand,
        'parameters': parameters,
        'tolerances': tolerances or {},
        'seed': seed,
        'outputs': sorted(outputs or []),
        'versions': package_versions(),
    }
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2, sort_keys=True, ensure_ascii=False, default=str)
        handle.write('\n')
    logger.debug(f"写出运行清单: {path}")
    return path
