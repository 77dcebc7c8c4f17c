"""Shared checks used by several test modules."""

from zero_regrets.game import MAXIMIZE


def trace_is_monotone(report) -> bool:
    """The master optimum never improves as rows are added."""
    t = report.objective_trace
    if report.objective_sense == MAXIMIZE:
        return all(a >= b for a, b in zip(t, t[1:]))
    return all(a <= b for a, b in zip(t, t[1:]))


def incumbents_distinct(report) -> bool:
    """No master point is visited twice.  The objective is part of the key
    because a minimized epsilon can revisit a profile at a larger value."""
    points = list(zip(report.incumbent_trace, report.objective_trace))
    return len(set(points)) == len(points)
