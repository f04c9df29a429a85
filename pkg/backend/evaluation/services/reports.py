"""
CSV reports of an evaluation run.

    jaccard.csv           admission_id, jaccard, aggregated_jaccard
    mortality_curve.csv   bin_center, rate, support   (rate empty for unsupported bins)
    difference_curve.csv  difference, rate, support
    returns.csv           admission_id, logged_return, expected_return, died
    summary.json          scalar metrics

Floats are written with 17 significant digits, so repeated evaluations of
the same checkpoint and data produce byte-identical files.
"""
import logging
from pathlib import Path
from typing import Dict

import pandas as pd

from core.run_directory import RunDirectory
from evaluation.services.evaluator import EvaluationReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
SUMMARY_FILENAME = 'summary.json'


def jaccard_frame(report: EvaluationReport) -> pd.DataFrame:
    return pd.DataFrame({
        'admission_id': [a.admission_id for a in report.admissions],
        'jaccard': report.jaccard.per_patient,
        'aggregated_jaccard': report.jaccard.per_patient_aggregated,
    })


def mortality_curve_frame(report: EvaluationReport) -> pd.DataFrame:
    curve = report.mortality.curve
    return pd.DataFrame({
        'bin_center': curve.centers,
        'rate': curve.rates,
        'support': curve.supports,
    })


def difference_curve_frame(report: EvaluationReport) -> pd.DataFrame:
    curve = report.differences
    return pd.DataFrame({
        'difference': curve.differences,
        'rate': curve.rates,
        'support': curve.supports,
    })


def returns_frame(report: EvaluationReport) -> pd.DataFrame:
    """Logged return and the critic's estimate Q(c_1, mu(c_1)) of the policy's return, per admission."""
    return pd.DataFrame({
        'admission_id': [a.admission_id for a in report.admissions],
        'logged_return': [a.logged_return for a in report.admissions],
        'expected_return': [float(a.policy_q[0]) for a in report.admissions],
        'died': [int(a.died) for a in report.admissions],
    })


REPORTS = {
    'jaccard.csv': jaccard_frame,
    'mortality_curve.csv': mortality_curve_frame,
    'difference_curve.csv': difference_curve_frame,
    'returns.csv': returns_frame,
}


def write_reports(run: RunDirectory, report: EvaluationReport) -> Dict[str, Path]:
    written = {}
    for name, build in REPORTS.items():
        target = run.file(name)
        build(report).to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        written[name] = target
    written[SUMMARY_FILENAME] = run.write_json(SUMMARY_FILENAME, report.summary())
    logger.info(f"Wrote {len(written)} evaluation reports to {run.path}")
    return written
