"""Throughput model of the pipelined EASI datapath.

Depth grows with the reduction tree of the m*n-wide products:
``stages = 10 + ceil(log2(m*n))``. Throughput is reported in MIPS (million
iterations per second) using the in-flight accounting of the published
results table, ``clock * stages`` for the SMBGD pipeline. The plain
completion rate (samples leaving the pipeline per microsecond) is reported
alongside as ``completion_msps``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class PipelineMode(str, enum.Enum):
    SGD_MULTICYCLE = "sgd_multicycle"
    SGD_PIPELINED_STALLED = "sgd_pipelined_stalled"
    SMBGD_PIPELINED = "smbgd_pipelined"


FIXED_STAGES = 10

# Published synthesis results for m=4, n=2 (clock in MHz, throughput in MIPS).
PUBLISHED_TABLE1 = {
    "sgd_clock_mhz": 4.81,
    "smbgd_clock_mhz": 55.17,
    "sgd_mips": 4.81,
    "smbgd_mips": 717.21,
    "clock_speedup": 11.46,
    "throughput_speedup": 149.11,
}


@dataclass(frozen=True)
class PipelineSpec:
    m: int = 4
    n: int = 2
    clock_mhz: float = 55.17
    mode: PipelineMode = PipelineMode.SMBGD_PIPELINED

    def __post_init__(self):
        object.__setattr__(self, "mode", PipelineMode(self.mode))
        _check_dims(self.m, self.n)
        if not self.clock_mhz > 0:
            raise ValueError(f"clock_mhz must be > 0, got {self.clock_mhz}")


@dataclass(frozen=True)
class ThroughputReport:
    stages: int
    throughput_mips: float
    completion_msps: float
    clock_speedup: float = 1.0
    throughput_speedup: float = 1.0


def _check_dims(m, n) -> None:
    if int(m) != m or int(n) != n or not m >= n >= 1:
        raise ValueError(f"need integers m >= n >= 1, got m={m}, n={n}")


def stage_count(m: int, n: int) -> int:
    _check_dims(m, n)
    # ceil(log2(mn)) for integers
    return FIXED_STAGES + (m * n - 1).bit_length()


def throughput(spec: PipelineSpec) -> ThroughputReport:
    stages = stage_count(spec.m, spec.n)
    f = spec.clock_mhz
    if spec.mode is PipelineMode.SMBGD_PIPELINED:
        mips, done = f * stages, f
    elif spec.mode is PipelineMode.SGD_MULTICYCLE:
        mips, done = f, f
    else:
        # pipeline drains before each new sample
        mips, done = f / stages, f / stages
    return ThroughputReport(stages=stages, throughput_mips=mips, completion_msps=done)


def speedup_report(base: PipelineSpec, improved: PipelineSpec) -> ThroughputReport:
    b, i = throughput(base), throughput(improved)
    return ThroughputReport(
        stages=i.stages,
        throughput_mips=i.throughput_mips,
        completion_msps=i.completion_msps,
        clock_speedup=improved.clock_mhz / base.clock_mhz,
        throughput_speedup=i.throughput_mips / b.throughput_mips,
    )
