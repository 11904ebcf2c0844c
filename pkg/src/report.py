#!/usr/bin/env python3
"""Run reports: the summary derived from per-sample records, and their serialization.

The records format is JSON Lines with a `kind` field: one `scenario` line, one
line per record, then one `summary` line. Keys are sorted and every float is
written with 17 significant digits, so a run is byte-identical for a fixed
scenario and seed and the summary can be recomputed from the parsed records.
Field names are documented in SCENARIOS.md.
"""

from dataclasses import dataclass
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple

import constants as c
from exceptions import ReportIoError

logger = logging.getLogger(__name__)

# Residual fields and the tolerance (a key of the scenario's [tolerances], or a number) they must stay under.
RESIDUAL_LIMITS = {
    'acs_residual': 'tol_acs',
    'nijenhuis_vjv': 'tol_residual',
    'nijenhuis_oracle_error': c.TOL_NIJENHUIS_ORACLE,
    'distribution_invariance': 'tol_residual',
    'levi_oracle_error': c.TOL_FD_ORACLE,
    'levi_extension_error': c.TOL_FD_ORACLE,
    'lift_square_residual': 'tol_residual',
    'route_difference': 'tol_residual',
    'projection_residual': 'tol_residual',
    'vertical_leak': 'tol_residual',
    'g_expansion_difference': 'tol_residual',
    'eq32_residual': 'tol_residual',
    'lagrangian_residual': 'tol_residual',
    'constraint_residual': 'tol_residual',
    'annihilation_residual': 'tol_residual',
    'lemma31_residual': 'tol_residual',
    'eq35_certificate_error': c.TOL_CERTIFICATE,
}


@dataclass
class RunReport:
    scenario: dict
    mode: str
    records: List[dict]
    summary: dict


def _limit(name: str, tolerances: dict) -> float:
    limit = RESIDUAL_LIMITS[name]
    return float(tolerances.get(limit, getattr(c, limit.upper()))) if isinstance(limit, str) else limit


def _histogram(records: List[dict]) -> dict:
    per_point = [r for r in records if 'levi_classification' in r and r.get('lambda_index') in (None, 0)]
    if not per_point:
        return {}
    histogram = {name: 0 for name in c.LEVI_CLASSES}
    for r in per_point:
        histogram[r['levi_classification']] += 1
    return histogram


def summarize(records: List[dict], tolerances: Optional[dict] = None, expect: Optional[dict] = None) -> dict:
    """Everything in the summary is a function of the records, the tolerances and the expectations."""
    tolerances = tolerances or {}
    expect = expect or {}
    breaches = []

    acs = [r['acs_residual'] for r in records if 'acs_residual' in r]
    acs_ok = all(v <= _limit('acs_residual', tolerances) for v in acs)
    norms = [r['nijenhuis_norm'] for r in records if 'nijenhuis_norm' in r]

    worst_residuals = {}
    for name in RESIDUAL_LIMITS:
        values = [r[name] for r in records if name in r]
        if not values:
            continue
        worst_residuals[name] = max(values)
        if worst_residuals[name] > _limit(name, tolerances):
            breaches.append(name)

    corrupted = [r['corrupted_lagrangian_residual'] for r in records if 'corrupted_lagrangian_residual' in r]
    if corrupted:
        worst_residuals['corrupted_lagrangian_residual'] = min(corrupted)
        if min(corrupted) <= c.CORRUPTION_FLOOR:
            breaches.append('corrupted_lagrangian_residual')

    conormal = [r for r in records if 'dim_intersection' in r]
    verdict = None
    worst_margin = {'margin': None, 'sample': None, 'lambda': None}
    if conormal:
        verdict = c.TOTALLY_REAL if all(r['dim_intersection'] == 0 for r in conormal) else c.NOT_TOTALLY_REAL
        worst = min(conormal, key=lambda r: (r['margin'], r['sample'], r['lambda_index']))
        worst_margin = {'margin': worst['margin'], 'sample': worst['sample'], 'lambda': worst['lambda']}
        if any(r['dim_intersection'] % 2 for r in conormal):
            breaches.append('dim_intersection_parity')
        if not all(r['lemma31_passed'] for r in conormal):
            breaches.append('lemma31')

    histogram = _histogram(records)
    verdict_matches = None
    if expect.get('verdict') and verdict is not None:
        verdict_matches = verdict == expect['verdict']
    classification_matches = None
    if expect.get('classification') and histogram:
        classification_matches = histogram[expect['classification']] == sum(histogram.values())

    checks_passed = acs_ok and not breaches
    return {
        'n_records': len(records),
        'acs_ok': acs_ok,
        'nijenhuis_norm_max': max(norms) if norms else None,
        'levi_classification_histogram': histogram,
        'total_reality_verdict': verdict,
        'worst_margins': worst_margin,
        'worst_residuals': worst_residuals,
        'breaches': sorted(breaches),
        'checks_passed': checks_passed,
        'verdict_matches': verdict_matches,
        'classification_matches': classification_matches,
        'ok': checks_passed and verdict_matches is not False and classification_matches is not False,
    }


def _encode(value) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ReportIoError(f'Cannot serialize non-finite number {value}')
        text = format(value, '.17g')
        return text if any(ch in text for ch in '.eE') else text + '.0'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = sorted(value.items())
        return '{' + ', '.join(f'{json.dumps(str(k))}: {_encode(v)}' for k, v in items) + '}'
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_encode(v) for v in value) + ']'
    raise ReportIoError(f'Cannot serialize {type(value).__name__}')


def _records_lines(report: RunReport) -> List[str]:
    lines = [_encode({'kind': 'scenario', 'mode': report.mode, 'scenario': report.scenario})]
    lines.extend(_encode(dict(record, kind='record')) for record in report.records)
    lines.append(_encode({'kind': 'summary', 'summary': report.summary}))
    return lines


def _human_lines(report: RunReport) -> List[str]:
    s = report.summary
    rows = [
        ('scenario', report.scenario.get('scenario', {}).get('name', '')),
        ('mode', report.mode),
        ('records', s['n_records']),
        ('acs ok', s['acs_ok']),
        ('max |N|', s['nijenhuis_norm_max']),
        ('verdict', s['total_reality_verdict']),
        ('smallest margin', s['worst_margins']['margin']),
    ]
    rows.extend((f'levi {name}', count) for name, count in s['levi_classification_histogram'].items())
    rows.extend((name, value) for name, value in sorted(s['worst_residuals'].items()))
    rows.extend([
        ('breaches', ', '.join(s['breaches']) or 'none'),
        ('verdict matches', s['verdict_matches']),
        ('classification matches', s['classification_matches']),
        ('result', 'OK' if s['ok'] else 'FAILED'),
    ])
    width = max(len(name) for name, _ in rows)
    lines = []
    for name, value in rows:
        if isinstance(value, float):
            value = f'{value:.6g}'
        elif value is None:
            value = '-'
        lines.append(f'{name.ljust(width)}  {value}')
    return lines


def emit_report(report: RunReport, fmt: str = 'human') -> bytes:
    if fmt == 'records':
        lines = _records_lines(report)
    elif fmt == 'human':
        lines = _human_lines(report)
    else:
        raise ValueError(f'Unknown report format {fmt!r}, choose from {", ".join(c.FORMATS)}')
    return ('\n'.join(lines) + '\n').encode('utf-8')


def write_report(data: bytes, out) -> None:
    try:
        Path(out).write_bytes(data)
    except OSError as e:
        raise ReportIoError(f'Cannot write report to {out}: {e}') from e
    logger.info('Wrote %d bytes to %s', len(data), out)


def parse_records(data) -> Tuple[dict, List[dict], dict]:
    """Inverse of the records format: (scenario line, records without `kind`, summary)."""
    text = data.decode('utf-8') if isinstance(data, bytes) else data
    header, records, summary = None, [], None
    for line in text.splitlines():
        if not line.strip():
            continue
        entry = json.loads(line)
        kind = entry.pop('kind')
        if kind == 'scenario':
            header = entry
        elif kind == 'record':
            records.append(entry)
        elif kind == 'summary':
            summary = entry['summary']
    if header is None or summary is None:
        raise ReportIoError('Records output is missing its scenario or summary line')
    return header, records, summary
