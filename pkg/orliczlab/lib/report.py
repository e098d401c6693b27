"""
Writes experiment reports as CSV tables and JSON documents and renders
them on the terminal.
"""
import csv
import json
import sys
from dataclasses import dataclass
from typing import Dict, List

from pygments import highlight, lexers, formatters

from orliczlab.lib.experiments import (
    ConstantSearchReport,
    GrowthReport,
    VerificationReport,
    bound_holds,
)

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

CSV_COLUMNS = [
    'experiment_id', 'n', 'seed', 'mixed_norm', 'opnorm', 'opnorm_exact',
    'ratio', 'slope', 'verdict',
]
SIGNIFICANT_DIGITS = 12


def format_number(value) -> str:
    """Fixed 12 significant digit rendering; empty for missing values."""
    if value is None:
        return ''
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def report_records(report, experiment_id: str = 'experiment') -> List[Dict]:
    """One record per ratio row; growth reports put slope and verdict on
    the final row."""
    if isinstance(report, ConstantSearchReport):
        return [{
            'experiment_id': experiment_id,
            'n': report.n,
            'seed': None,
            'mixed_norm': report.mixed_norm,
            'opnorm': report.opnorm,
            'opnorm_exact': True,
            'ratio': report.best_ratio,
            'slope': None,
            'verdict': None,
        }]

    records = []
    for row in report.rows:
        verdict = None
        if isinstance(report, VerificationReport) and report.bound is not None:
            verdict = 'pass' if bound_holds(row.ratio, report.bound) else 'fail'
        records.append({
            'experiment_id': experiment_id,
            'n': row.n,
            'seed': row.seed,
            'mixed_norm': row.mixed_norm,
            'opnorm': row.opnorm,
            'opnorm_exact': row.opnorm_exact,
            'ratio': row.ratio,
            'slope': None,
            'verdict': verdict,
        })
    if isinstance(report, GrowthReport) and records:
        records[-1]['slope'] = report.slope
        records[-1]['verdict'] = report.verdict.value
    return records


def write_csv(report, path, experiment_id: str = 'experiment'):
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for record in report_records(report, experiment_id):
            writer.writerow({k: format_number(v) for k, v in record.items()})
    logger.debug(f"csv report written to {path}")


@dataclass
class JsonRecord:
    """A result without a ratio table, such as a single norm value."""
    data: Dict

    def to_json(self):
        return self.data


def write_json(report, path, config=None):
    """JSON mirror of a report with the config that produced it."""
    document = {
        'config': config.to_json() if config is not None else None,
        'report': report.to_json(),
    }
    with open(path, 'w') as f:
        json.dump(document, f, indent=2)
    logger.debug(f"json report written to {path}")


def render_json(obj, colored: bool = None) -> str:
    """Pretty JSON, syntax highlighted when printing to a terminal."""
    text = json.dumps(obj, indent=2)
    if colored is None:
        colored = sys.stdout.isatty()
    if colored:
        return highlight(text, lexers.JsonLexer(), formatters.TerminalFormatter())
    return text


def log_table(report, experiment_id: str = 'experiment'):
    """Aligned ratio table on the info log."""
    records = report_records(report, experiment_id)
    columns = CSV_COLUMNS[1:]
    cells = [[format_number(r[c]) for c in columns] for r in records]
    widths = [max([len(c)] + [len(row[i]) for row in cells])
              for i, c in enumerate(columns)]
    logger.info('  '.join(c.rjust(w) for c, w in zip(columns, widths)))
    for row in cells:
        logger.info('  '.join(v.rjust(w) for v, w in zip(row, widths)))
