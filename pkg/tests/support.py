"""Shared helpers for the test suite."""

from __future__ import annotations

from admrelay.network import (
    FaultKind,
    FaultSpec,
    MicrogridModel,
    SourceModel,
    default_ideal_source,
    default_inverter_source,
    reference_model,
)

RF_GRID_20 = [3.68 * (1000.0 / 3.68) ** (i / 19.0) for i in range(20)]


def close(a: complex, b: complex, rel: float, abs_tol: float = 0.0) -> bool:
    return abs(a - b) <= max(rel * abs(b), abs_tol)


def rel_err(a: complex, b: complex) -> float:
    return abs(a - b) / abs(b)


def lg_model(rf: float, source: SourceModel | None = None, **kw) -> MicrogridModel:
    src = source if source is not None else default_inverter_source()
    return reference_model(FaultSpec(FaultKind.LINE_GROUND_A, rf), src, **kw)


def ll_model(rf: float, source: SourceModel | None = None, **kw) -> MicrogridModel:
    src = source if source is not None else default_inverter_source()
    return reference_model(FaultSpec(FaultKind.LINE_LINE_BC, rf), src, **kw)


def ideal() -> SourceModel:
    return default_ideal_source()


def inverter(**kw) -> SourceModel:
    return default_inverter_source(**kw)
