"""Run reports: typed check results, JSON emission, and an aligned text
summary. Every stochastic row carries its seed list and sample size; rows
are labeled exact, bound, or monte-carlo so provenance is never ambiguous.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class CheckResult:
    name: str
    kind: str  # "exact" | "bound" | "monte-carlo"
    value: float
    passed: bool
    threshold: float | None = None
    comparator: str = "info"
    sample_size: int | None = None
    seeds: list[int] | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "value": self.value,
            "passed": self.passed,
            "comparator": self.comparator,
        }
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.sample_size is not None:
            out["sample_size"] = self.sample_size
        if self.seeds is not None:
            out["seeds"] = list(self.seeds)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class RunReport:
    command: str
    config: dict
    checks: list[CheckResult] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: CheckResult) -> None:
        self.checks.append(check)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "artifacts": sorted(self.artifacts),
        }
        return json.dumps(payload, sort_keys=True, indent=2, default=str)

    def text_summary(self) -> str:
        lines = [f"command: {self.command}", ""]
        name_w = max((len(c.name) for c in self.checks), default=4)
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            bound = (
                f"{c.comparator} {c.threshold:g}" if c.threshold is not None else "-"
            )
            extra = []
            if c.sample_size is not None:
                extra.append(f"n={c.sample_size}")
            if c.seeds is not None:
                shown = ",".join(str(s) for s in c.seeds[:4])
                if len(c.seeds) > 4:
                    shown += f",..({len(c.seeds)})"
                extra.append(f"seeds={shown}")
            lines.append(
                f"{mark}  {c.name:<{name_w}}  {c.kind:<11}  "
                f"value={c.value:.6g}  {bound}  {' '.join(extra)}"
            )
        lines.append("")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def write(self, out_dir) -> tuple[str, str]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        json_path = out / f"{self.command}_report.json"
        text_path = out / f"{self.command}_report.txt"
        json_path.write_text(self.to_json() + "\n")
        text_path.write_text(self.text_summary() + "\n")
        return str(json_path), str(text_path)
