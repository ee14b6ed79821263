"""Run configuration shared by the command-line front end, the self-test and the benchmark."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError


@dataclass
class RunConfig:
    """Seed, resource caps and switches of one command invocation."""

    seed: int = 42
    max_quantifier_depth: int = 6
    max_templates: int = 200_000
    max_d0: int = 4
    counters: bool = False
    quiet: bool = False
    trials: int = 20  # per self-test suite
    fault: str | None = None  # fault injection for the self-test harness
    grid_sides: tuple[int, ...] = (10, 32, 100)
    bench_d0: int = 2
    bench_palette: int = 8
    script: list[str] | None = None
    outputs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("max_quantifier_depth", "max_templates", "max_d0", "trials", "bench_d0"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if self.fault not in (None, "skip-list3"):
            raise InputError(f"unknown fault {self.fault!r} (known: skip-list3)")
