"""Experiment runner, verification checks, persistence and CLI."""

from .config import RunConfig
from .reporting import CheckResult, Report, export
from .runner import pep_campaign, sweep, verify

__all__ = ["RunConfig", "CheckResult", "Report", "export", "verify", "sweep", "pep_campaign"]
