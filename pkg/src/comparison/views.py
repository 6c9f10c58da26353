import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from ..utils.errors import InvalidConfig
from ..utils.report_writer import rows_to_csv

CSV_HEADER = ("r", "area", "volume", "ratio", "f_lower", "F_upper", "within")


@dataclass(frozen=True)
class BoundParams:
    """Curvature pinch -k2^2 <= K <= -k1^2 and S-curvature pinch n*delta1 <= S <= n*delta2."""

    n: int
    k1: float
    k2: float
    delta1: float
    delta2: float

    def __post_init__(self):
        errors = []
        if self.n < 1:
            errors.append(("n", "must be at least 1"))
        if self.k1 <= 0 or self.k2 <= 0:
            errors.append(("k", "k1 and k2 must be positive"))
        if self.k1 > self.k2:
            errors.append(("k1", "k1 must not exceed k2"))
        if self.delta1 > self.delta2:
            errors.append(("delta1", "delta1 must not exceed delta2"))
        if errors:
            raise InvalidConfig(errors)

    @property
    def admissible(self) -> bool:
        return self.delta1 < self.k1 and self.delta2 < self.k2

    @property
    def lower_limit(self) -> float:
        """lim f(r) = 1 / (n (k2 - delta2))."""
        return 1.0 / (self.n * (self.k2 - self.delta2))

    @property
    def upper_limit(self) -> float:
        """lim F(r) = 1 / (n (k1 - delta1))."""
        return 1.0 / (self.n * (self.k1 - self.delta1))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ComparisonRow:
    r: float
    area: float
    volume: float
    ratio: float
    f_lower: Optional[float]
    F_upper: Optional[float]
    # None when the model is inadmissible and the check is suppressed
    within: Optional[bool]

    def csv_cells(self) -> List[Any]:
        within = "suppressed" if self.within is None else bool(self.within)
        return [self.r, self.area, self.volume, self.ratio, self.f_lower, self.F_upper, within]


@dataclass
class ComparisonReport:
    model: str
    params: Optional[BoundParams]
    rows: List[ComparisonRow] = field(default_factory=list)
    all_pass: Optional[bool] = None
    tolerances: Dict[str, Any] = field(default_factory=dict)
    seeds: Dict[str, int] = field(default_factory=dict)
    quadrature: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "params": None if self.params is None else self.params.to_dict(),
            "rows": [asdict(row) for row in self.rows],
            "all_pass": self.all_pass,
            "tolerances": self.tolerances,
            "seeds": self.seeds,
            "quadrature": self.quadrature,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        return rows_to_csv(CSV_HEADER, (row.csv_cells() for row in self.rows))


@dataclass
class IsoperimetricRow:
    """One radius of the Vol(B_r) <= Area(S_r) / ((d - 1)(k1 - delta1)) check."""

    r: float
    volume: float
    area: float
    bound: float
    passed: bool


@dataclass
class CheckResult:
    """One entry of the verification suite; status is pass, fail, inadmissible or skipped."""

    name: str
    status: str
    value: Optional[float] = None
    expected: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "fail"


@dataclass
class VerifyReport:
    model: str
    config: Dict[str, Any]
    seed: int
    checks: List[CheckResult] = field(default_factory=list)
    tolerances: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(check.failed for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "config": self.config,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [asdict(check) for check in self.checks],
            "tolerances": self.tolerances,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        return rows_to_csv(
            ("name", "status", "value", "expected", "tolerance"),
            ((check.name, check.status, check.value, check.expected, check.tolerance) for check in self.checks),
        )
