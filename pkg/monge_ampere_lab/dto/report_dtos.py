from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from dataclasses_json import dataclass_json


#### CHECKS ############################################################################################################
@dataclass_json
@dataclass
class CheckRecord:
    name: str
    lhs: float
    rhs: float
    passed: bool
    relation: str = '<='

    @staticmethod
    def compare(name: str, lhs: float, rhs: float, relation: str = '<=', slack: float = 1e-12) -> 'CheckRecord':
        lhs, rhs = float(lhs), float(rhs)
        if relation == '<=':
            passed = lhs <= rhs + slack
        elif relation == '>=':
            passed = lhs >= rhs - slack
        elif relation == '>':
            passed = lhs > rhs
        else:
            passed = lhs < rhs
        return CheckRecord(name, lhs, rhs, bool(passed), relation)


@dataclass_json
@dataclass
class AdmissibilityReport:
    variant: str
    records: List[CheckRecord]
    implied_bound: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failed(self) -> List[str]:
        return [r.name for r in self.records if not r.passed]

    def as_text(self) -> str:
        lines = [f'variant = {self.variant}']
        for record in self.records:
            lines.append(f'{record.name} = {record.lhs:.12g} {record.relation} {record.rhs:.12g} '
                         f'[{"pass" if record.passed else "FAIL"}]')
        lines.append(f'pass = {str(self.passed).lower()}')
        if self.implied_bound is not None:
            lines.append(f'implied_bound = {self.implied_bound:.12g}')
        return '\n'.join(lines)


#### SOLVER ############################################################################################################
@dataclass_json
@dataclass
class SweepRecord:
    sweep: int
    max_lift: float
    max_residual: float
    skipped: int = 0


@dataclass_json
@dataclass
class VerificationReport:
    checks: List[CheckRecord] = field(default_factory=list)
    section_heights: List[float] = field(default_factory=list)
    section_ratios: List[float] = field(default_factory=list)
    flat_pieces: int = 0
    frame: str = 'epsilon rescaled'

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckRecord:
        matches = [c for c in self.checks if c.name == name]
        if len(matches) != 1:
            raise KeyError(name)
        return matches[0]


#### TRANSPORT #########################################################################################################
@dataclass_json
@dataclass
class NewtonRecord:
    step: int
    residual: float
    damping: float
    method: str = 'newton'
    max_error: float = 0.0


#### RUN ###############################################################################################################
@dataclass_json
@dataclass
class RunReport:
    command: str
    config: Dict[str, Any]
    versions: Dict[str, str]
    checks: List[CheckRecord] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)
    timing: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def payload(self) -> dict:
        """Report without the timing block, stable across reruns."""
        data = self.to_dict()
        data.pop('timing', None)
        data['passed'] = self.passed
        return data
