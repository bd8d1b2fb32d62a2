"""Deterministic laboratory for exploratory GUI defect discovery."""

try:
    from ._guitest import (
        GuitestError,
        InputError,
        ValidationError,
        bench_hash,
        evaluate,
        load_report,
        load_trajectory,
        render_report,
        run,
        synth,
        validate,
    )
except ImportError:  # extension built standalone by CMake, found on sys.path
    from _guitest import (
        GuitestError,
        InputError,
        ValidationError,
        bench_hash,
        evaluate,
        load_report,
        load_trajectory,
        render_report,
        run,
        synth,
        validate,
    )

__all__ = [
    "GuitestError",
    "InputError",
    "ValidationError",
    "bench_hash",
    "evaluate",
    "load_report",
    "load_trajectory",
    "render_report",
    "run",
    "synth",
    "validate",
]
