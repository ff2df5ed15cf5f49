"""
Experiment reports.

A report is a JSON document (schema ``v1``) holding the configuration
echo, one verdict per check in check-name order, a summary and the
timing. Everything but the ``timing`` block is a function of the
configuration and its seed.
"""
import json
import logging
import os
import tempfile
from collections import namedtuple

import numpy as np

from .exceptions import InputError

LOGGER = logging.getLogger(__name__)

SCHEMA = "v1"

PASS = "pass"
VIOLATION = "violation"
INCONCLUSIVE = "inconclusive"

VERDICTS = (PASS, VIOLATION, INCONCLUSIVE)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2


class Verdict(namedtuple("Verdict", "check verdict residual seed witness measured")):
    """
    check - check name, ``<suite>.<name>``
    verdict - pass, violation or inconclusive
    residual - signed worst residual (None when nothing could be measured)
    seed - per-check seed derived from the master seed
    witness - replayable configuration, always present for violations
    measured - mapping of measured constants
    """

    __slots__ = ()

    def __new__(cls, check, verdict, residual=None, seed=0, witness=None, measured=None):
        if verdict not in VERDICTS:
            raise InputError("Unknown verdict {}".format(verdict))
        if verdict == VIOLATION and witness is None:
            raise InputError("Violation of {} needs a witness".format(check))
        return super().__new__(
            cls, check, verdict, residual, seed, witness, dict(measured or {})
        )

    def to_dict(self):
        result = {
            "check": self.check,
            "verdict": self.verdict,
            "residual": self.residual,
            "seed": self.seed,
            "measured": self.measured,
        }
        if self.witness is not None:
            result["witness"] = self.witness
        return result


def from_residual(check, report, seed, measured=None, threshold=None):
    """
    Turn a :class:`pybusemann.curvature.ResidualReport` into a verdict.
    """
    if report.worst_residual is None:
        return Verdict(check, INCONCLUSIVE, None, seed, measured=measured)
    held = report.held if threshold is None else report.worst_residual >= threshold
    return Verdict(
        check,
        PASS if held else VIOLATION,
        float(report.worst_residual),
        seed,
        report.worst_witness,
        measured,
    )


class NumpyEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        return super().default(obj)


def summarize(verdicts):
    counts = {name: 0 for name in VERDICTS}
    for verdict in verdicts:
        counts[verdict.verdict] += 1
    counts["overall"] = VIOLATION if counts[VIOLATION] else PASS
    return counts


def build_report(config, verdicts, seeds, elapsed, version):
    """
    Assemble the report mapping.

    :param config: the :class:`pybusemann.config.ExperimentConfig` that ran
    :param verdicts: iterable of :class:`Verdict`
    :param seeds: mapping of check name to derived seed
    :param elapsed: mapping of check name to seconds, plus ``"total"``
    :param version: package version stamped on the report and its witnesses
    """
    verdicts = sorted(verdicts, key=lambda verdict: verdict.check)
    items = []
    for verdict in verdicts:
        item = verdict.to_dict()
        if "witness" in item:
            item["witness"] = dict(item["witness"], version=version)
        items.append(item)
    return {
        "schema": SCHEMA,
        "version": version,
        "config": config.to_dict(),
        "seeds": dict(sorted(seeds.items())),
        "verdicts": items,
        "summary": summarize(verdicts),
        "timing": elapsed,
    }


def dumps(report):
    return json.dumps(report, cls=NumpyEncoder, sort_keys=True, indent=2)


def write_report(report, path):
    """
    Write the report so that readers see either the old file or the
    complete new one.
    """
    directory = os.path.dirname(os.path.abspath(path))
    handle, temporary = tempfile.mkstemp(prefix=".report-", suffix=".json", dir=directory)
    try:
        with os.fdopen(handle, "w") as stream:
            stream.write(dumps(report))
            stream.write("\n")
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise
    LOGGER.debug("report written to %s", path)


def exit_status(report):
    return EXIT_VIOLATION if report["summary"]["overall"] == VIOLATION else EXIT_PASS


def load_witness(path, check=None):
    """
    Read a witness from a witness file or from a full report.

    A report yields the witness of ``check`` when given, otherwise the
    first violation (or, failing that, the first verdict carrying one).
    A witness stamped with another package version is still returned,
    with a warning.
    """
    from . import __version__

    try:
        with open(path) as handle:
            document = json.load(handle)
    except (OSError, ValueError) as error:
        raise InputError("Cannot read witness {}: {}".format(path, error))

    if "verdicts" in document:
        candidates = [item for item in document["verdicts"] if "witness" in item]
        if check is not None:
            candidates = [item for item in candidates if item["check"] == check]
        candidates.sort(key=lambda item: item["verdict"] != VIOLATION)
        if not candidates:
            raise InputError("No witness in report {}".format(path))
        witness = candidates[0]["witness"]
    else:
        witness = document

    version = witness.get("version")
    if version is not None and version != __version__:
        LOGGER.warning(
            "Witness was written by version %s, replaying with %s", version, __version__
        )
    return witness
