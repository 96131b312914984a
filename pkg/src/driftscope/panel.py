"""Seeded multi-year lending panel with controlled covariate and label drift.

The generator produces, per calendar year, a slice of synthetic loan
applications whose marginals drift slowly (income location, credit-score
mean) and jump during configured recession years (unemployment share,
income dispersion, debt load). Labels come from a yearly latent logistic
model whose coefficients shift during recessions, with the intercept
calibrated so each year's realized default rate tracks a linear path from
``base_default_rate`` to ``final_default_rate``.

Sensitive attributes (race, gender) never enter the latent model directly;
they influence outcomes only through a configurable coupling of race to the
income location (``proxy_strength``), which is what downstream proxy
detection is meant to find.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from ._rng import child_rng
from .errors import CalibrationError, ConfigError, InputError, ShapeError
from .io import fmt_value, read_csv, write_json, read_json

RACE_LEVELS = ("group_a", "group_b", "group_c", "group_d")
RACE_PROPORTIONS = (0.55, 0.20, 0.15, 0.10)
# log-income offsets per race level, scaled by proxy_strength
RACE_INCOME_OFFSETS = (0.0, -0.20, -0.34, 0.14)
GENDER_LEVELS = ("female", "male")
GENDER_PROPORTIONS = (0.52, 0.48)
REGION_LEVELS = ("northeast", "south", "midwest", "west")
REGION_PROPORTIONS = (0.30, 0.30, 0.25, 0.15)
EMPLOYMENT_LEVELS = ("employed", "unemployed", "self_employed")
PRIOR_DEFAULT_LEVELS = ("no", "yes")

# anchors used to standardize features inside the latent label model; kept
# fixed across years so the coefficient schedule has a stable meaning
_ANCHORS = {
    "annual_income": (np.log(48000.0), 0.30),
    "credit_score": (690.0, 55.0),
    "age": (46.5, 16.7),
    "employment_length": (6.0, 6.0),
    "dti": (0.30, 0.13),
    "loan_amount": (np.log(16000.0), 0.50),
    "interest_rate": (0.12, 0.03),
    "num_credit_lines": (6.0, 2.5),
    "utilization": (0.45, 0.20),
}

# base-year latent coefficients; recession years rescale the income term
# and the unemployed term (concept drift in the label mechanism)
BASE_COEFFICIENTS = {
    "annual_income": -0.28,
    "credit_score": -0.36,
    "age": -0.03,
    "employment_length": -0.10,
    "dti": 0.42,
    "loan_amount": 0.48,
    "interest_rate": 0.18,
    "num_credit_lines": 0.03,
    "utilization": 0.15,
    "employment_status=unemployed": 0.55,
    "employment_status=self_employed": 0.10,
    "region=south": 0.07,
    "region=midwest": -0.05,
    "region=west": 0.03,
    "prior_default=yes": 0.22,
}


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str  # "numeric" | "categorical"
    levels: tuple = ()
    sensitive: bool = False
    lower: float = -np.inf
    upper: float = np.inf


@dataclass(frozen=True)
class Schema:
    """Ordered feature schema; sensitive features are excluded from the
    model-feature view unless explicitly requested."""

    features: tuple

    def names(self) -> list:
        return [f.name for f in self.features]

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise InputError(f"unknown feature: {name}")

    def model_features(self, include_sensitive: bool = False) -> list:
        return [
            f for f in self.features if include_sensitive or not f.sensitive
        ]

    def to_dict(self) -> list:
        out = []
        for f in self.features:
            d = {"name": f.name, "kind": f.kind, "sensitive": f.sensitive}
            if f.kind == "categorical":
                d["levels"] = list(f.levels)
            else:
                d["lower"] = None if np.isneginf(f.lower) else f.lower
                d["upper"] = None if np.isposinf(f.upper) else f.upper
            out.append(d)
        return out

    @staticmethod
    def from_dict(items) -> "Schema":
        feats = []
        for d in items:
            if d["kind"] == "categorical":
                feats.append(
                    FeatureSpec(d["name"], "categorical", tuple(d["levels"]), d["sensitive"])
                )
            else:
                lo = -np.inf if d.get("lower") is None else float(d["lower"])
                hi = np.inf if d.get("upper") is None else float(d["upper"])
                feats.append(
                    FeatureSpec(d["name"], "numeric", (), d["sensitive"], lo, hi)
                )
        return Schema(tuple(feats))


def default_schema() -> Schema:
    return Schema(
        (
            FeatureSpec("annual_income", "numeric", lower=500.0),
            FeatureSpec("credit_score", "numeric", lower=300.0, upper=850.0),
            FeatureSpec("age", "numeric", lower=18.0, upper=90.0),
            FeatureSpec("employment_status", "categorical", EMPLOYMENT_LEVELS),
            FeatureSpec("employment_length", "numeric", lower=0.0),
            FeatureSpec("dti", "numeric", lower=0.0, upper=0.8),
            FeatureSpec("loan_amount", "numeric", lower=500.0),
            FeatureSpec("interest_rate", "numeric", lower=0.01, upper=0.40),
            FeatureSpec("num_credit_lines", "numeric", lower=0.0, upper=30.0),
            FeatureSpec("utilization", "numeric", lower=0.0, upper=1.0),
            FeatureSpec("region", "categorical", REGION_LEVELS),
            FeatureSpec("prior_default", "categorical", PRIOR_DEFAULT_LEVELS),
            FeatureSpec("race", "categorical", RACE_LEVELS, sensitive=True),
            FeatureSpec("gender", "categorical", GENDER_LEVELS, sensitive=True),
        )
    )


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 42
    years: tuple = tuple(range(2015, 2025))
    rows_per_year: int = 2000
    base_default_rate: float = 0.15
    final_default_rate: float = 0.23
    recession_years: frozenset = frozenset({2020, 2021})
    base_unemployment: float = 0.05
    recession_unemployment: float = 0.15
    base_self_employed: float = 0.12
    recession_self_employed: float = 0.28
    income_drift_per_year: float = 0.03
    score_drift_per_year: float = -2.0
    proxy_strength: float = 0.4
    coefficients: dict = field(default_factory=lambda: dict(BASE_COEFFICIENTS))
    recession_income_multiplier: float = 1.5
    recession_unemployed_multiplier: float = 2.0

    def validate(self) -> None:
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        years = tuple(self.years)
        if len(years) == 0:
            raise ConfigError("years must be non-empty")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ConfigError("years must be strictly ascending")
        if self.rows_per_year < 50:
            raise ConfigError("rows_per_year must be at least 50")
        for name in (
            "base_default_rate",
            "final_default_rate",
            "base_unemployment",
            "recession_unemployment",
            "base_self_employed",
            "recession_self_employed",
        ):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.final_default_rate < self.base_default_rate:
            raise ConfigError("final_default_rate must be >= base_default_rate")
        if self.base_unemployment + self.base_self_employed >= 1.0:
            raise ConfigError("base_unemployment plus base_self_employed must be < 1")
        if self.recession_unemployment + self.recession_self_employed >= 1.0:
            raise ConfigError(
                "recession_unemployment plus recession_self_employed must be < 1"
            )
        if self.proxy_strength < 0:
            raise ConfigError("proxy_strength must be >= 0")

    def target_rate(self, year: int) -> float:
        years = tuple(self.years)
        if len(years) == 1:
            return self.base_default_rate
        frac = years.index(year) / (len(years) - 1)
        return self.base_default_rate + frac * (
            self.final_default_rate - self.base_default_rate
        )

    def coefficient_schedule(self, year: int) -> dict:
        coeffs = dict(self.coefficients)
        if year in self.recession_years:
            coeffs["annual_income"] *= self.recession_income_multiplier
            coeffs["employment_status=unemployed"] *= self.recession_unemployed_multiplier
        return coeffs


@dataclass
class YearSlice:
    year: int
    columns: dict  # feature name -> np.ndarray (float64 or unicode)

    @property
    def n(self) -> int:
        return len(self.columns["default"])

    def default_rate(self) -> float:
        return float(np.mean(self.columns["default"]))


@dataclass
class Panel:
    schema: Schema
    slices: dict  # year -> YearSlice

    @property
    def years(self) -> list:
        return sorted(self.slices)

    def slice(self, year: int) -> YearSlice:
        if year not in self.slices:
            raise InputError(f"panel has no year {year}")
        return self.slices[year]

    def stack(self, years) -> YearSlice:
        """Concatenate slices (ascending year order) into one pseudo-slice."""
        years = sorted(years)
        if not years:
            raise InputError("no years to stack")
        cols = {}
        names = list(self.slices[years[0]].columns)
        for name in names:
            cols[name] = np.concatenate(
                [self.slices[y].columns[name] for y in years]
            )
        return YearSlice(year=years[-1], columns=cols)


def latent_default_prob(features, coeffs) -> float:
    """Sigmoid of ``features . coeffs[:-1] + coeffs[-1]`` (intercept last)."""
    x = np.asarray(features, dtype=np.float64)
    w = np.asarray(coeffs, dtype=np.float64)
    if x.ndim != 1 or w.ndim != 1 or w.size != x.size + 1:
        raise ShapeError(
            f"coefficient vector must have length {x.size + 1}, got {w.size}"
        )
    return float(expit(np.dot(x, w[:-1]) + w[-1]))


def calibrate_intercept(target_rate: float, scores, tol: float = 1e-6) -> float:
    """Find c with mean(sigmoid(scores + c)) within ``tol`` of target_rate.

    Bisection on c in [-30, 30]; the mean response is continuous and
    strictly increasing in c, so the bracket either contains the solution
    or the target is unreachable.
    """
    if not (0.0 < target_rate < 1.0):
        raise InputError(f"target_rate must lie in (0, 1), got {target_rate}")
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise InputError("scores must be non-empty")
    lo, hi = -30.0, 30.0

    def realized(c):
        return float(np.mean(expit(s + c)))

    if realized(lo) > target_rate or realized(hi) < target_rate:
        raise CalibrationError(
            f"target rate {target_rate} unreachable within intercept bracket"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = realized(mid)
        if abs(r - target_rate) <= tol:
            return mid
        if r < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _largest_remainder_counts(proportions, n: int) -> np.ndarray:
    """Integer allocation of n across categories, deterministic ties."""
    p = np.asarray(proportions, dtype=np.float64)
    raw = p * n
    counts = np.floor(raw).astype(np.int64)
    short = n - int(counts.sum())
    if short > 0:
        order = np.lexsort((np.arange(len(p)), -(raw - counts)))
        counts[order[:short]] += 1
    return counts


def _categorical_column(levels, proportions, n: int, rng) -> np.ndarray:
    counts = _largest_remainder_counts(proportions, n)
    codes = np.repeat(np.arange(len(levels)), counts)
    rng.shuffle(codes)
    return np.asarray(levels)[codes]


def _employment_proportions(cfg: GeneratorConfig, year: int):
    if year in cfg.recession_years:
        u, s = cfg.recession_unemployment, cfg.recession_self_employed
    else:
        u, s = cfg.base_unemployment, cfg.base_self_employed
    return (1.0 - u - s, u, s)


def _standardized(name: str, values: np.ndarray) -> np.ndarray:
    center, scale = _ANCHORS[name]
    if name in ("annual_income", "loan_amount"):
        return (np.log(values) - center) / scale
    return (values - center) / scale


def _latent_scores(cfg: GeneratorConfig, year: int, cols: dict) -> np.ndarray:
    coeffs = cfg.coefficient_schedule(year)
    n = len(cols["annual_income"])
    score = np.zeros(n)
    for term, w in coeffs.items():
        if "=" in term:
            feat, level = term.split("=", 1)
            score += w * (cols[feat] == level)
        else:
            score += w * _standardized(term, cols[term])
    return score


def _refine_intercept(scores: np.ndarray, uniforms: np.ndarray, target: float,
                      c0: float) -> float:
    """Shift c0 so the realized (sampled) rate lands within 1/n of target.

    The realized rate mean(u < sigmoid(s + c)) is a monotone step function
    of c; a short bisection pins it to the nearest achievable step, which
    keeps every year's default rate on the configured path regardless of
    the label-noise draw.
    """
    lo, hi = c0 - 4.0, c0 + 4.0

    def rate(c):
        return float(np.mean(uniforms < expit(scores + c)))

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if rate(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi if abs(rate(hi) - target) <= abs(rate(lo) - target) else lo


def _generate_year(cfg: GeneratorConfig, year: int) -> YearSlice:
    n = cfg.rows_per_year
    years = tuple(cfg.years)
    year_idx = years.index(year)
    recession = year in cfg.recession_years

    race = _categorical_column(
        RACE_LEVELS, RACE_PROPORTIONS, n, child_rng(cfg.seed, year, "race")
    )
    gender = _categorical_column(
        GENDER_LEVELS, GENDER_PROPORTIONS, n, child_rng(cfg.seed, year, "gender")
    )
    region = _categorical_column(
        REGION_LEVELS, REGION_PROPORTIONS, n, child_rng(cfg.seed, year, "region")
    )
    employment = _categorical_column(
        EMPLOYMENT_LEVELS,
        _employment_proportions(cfg, year),
        n,
        child_rng(cfg.seed, year, "employment"),
    )

    race_offset = np.asarray(RACE_INCOME_OFFSETS)[
        np.searchsorted(np.asarray(RACE_LEVELS), race)
    ]

    mu_inc = np.log(48000.0) + cfg.income_drift_per_year * year_idx
    sd_inc = 0.27 * (1.3 if recession else 1.0)
    z_inc = child_rng(cfg.seed, year, "income").standard_normal(n)
    log_income = mu_inc + cfg.proxy_strength * race_offset + sd_inc * z_inc
    annual_income = np.clip(np.exp(log_income), 500.0, None)
    # standardized latent income signal reused by the correlated features
    z_wealth = (log_income - mu_inc) / 0.30

    mu_cs = 690.0 + cfg.score_drift_per_year * year_idx
    z_cs = child_rng(cfg.seed, year, "credit_score").standard_normal(n)
    credit_score = np.clip(
        mu_cs + 55.0 * (0.30 * z_wealth + np.sqrt(1.0 - 0.09) * z_cs), 300.0, 850.0
    )

    age = child_rng(cfg.seed, year, "age").integers(18, 76, size=n).astype(np.float64)

    emp_len = child_rng(cfg.seed, year, "employment_length").exponential(6.0, size=n)
    emp_len = np.minimum(emp_len, age - 18.0)
    emp_len[employment == "unemployed"] = 0.0

    dti_mean = (0.35 if recession else 0.30) / 0.8
    kappa = 8.0
    mean_i = np.clip(dti_mean - 0.045 * z_wealth, 0.05, 0.95)
    dti = 0.8 * child_rng(cfg.seed, year, "dti").beta(
        kappa * mean_i, kappa * (1.0 - mean_i)
    )

    z_loan = child_rng(cfg.seed, year, "loan_amount").standard_normal(n)
    log_loan = np.log(16000.0) + 0.50 * (
        0.5 * z_wealth + np.sqrt(0.75) * z_loan
    )
    loan_amount = np.clip(np.exp(log_loan), 500.0, None)

    z_ir = child_rng(cfg.seed, year, "interest_rate").standard_normal(n)
    interest_rate = np.clip(
        0.12 - 0.00025 * (credit_score - 690.0) + (0.01 if recession else 0.0)
        + 0.02 * z_ir,
        0.01,
        0.40,
    )

    lines_rng = child_rng(cfg.seed, year, "num_credit_lines")
    num_credit_lines = np.clip(
        lines_rng.poisson(np.clip(6.0 + 0.8 * z_wealth, 1.0, 20.0)), 0, 30
    ).astype(np.float64)

    util_mean = np.clip((0.50 if recession else 0.45) - 0.05 * z_wealth, 0.05, 0.95)
    utilization = child_rng(cfg.seed, year, "utilization").beta(
        5.0 * util_mean, 5.0 * (1.0 - util_mean)
    )

    pd_rng = child_rng(cfg.seed, year, "prior_default")
    p_prior = np.clip(0.10 + 0.30 * dti + 0.05 * (employment == "unemployed"), 0.01, 0.6)
    prior_default = np.where(
        pd_rng.random(n) < p_prior, "yes", "no"
    ).astype("U3")

    cols = {
        "annual_income": annual_income,
        "credit_score": credit_score,
        "age": age,
        "employment_status": employment,
        "employment_length": emp_len,
        "dti": dti,
        "loan_amount": loan_amount,
        "interest_rate": interest_rate,
        "num_credit_lines": num_credit_lines,
        "utilization": utilization,
        "region": region,
        "prior_default": prior_default,
        "race": race,
        "gender": gender,
    }

    scores = _latent_scores(cfg, year, cols)
    target = cfg.target_rate(year)
    c0 = calibrate_intercept(target, scores)
    uniforms = child_rng(cfg.seed, year, "label").random(n)
    c = _refine_intercept(scores, uniforms, target, c0)
    cols["default"] = (uniforms < expit(scores + c)).astype(np.float64)
    return YearSlice(year=year, columns=cols)


def generate_panel(config: GeneratorConfig) -> Panel:
    """Generate the full panel; a pure function of the config."""
    config.validate()
    slices = {year: _generate_year(config, year) for year in config.years}
    return Panel(schema=default_schema(), slices=slices)


# ---------------------------------------------------------------------------
# serialization

def write_panel(panel: Panel, out_dir) -> list:
    """Write panel.csv and schema.json; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = panel.schema.names()
    header = ["year"] + names + ["default"]
    lines = [",".join(header)]
    for year in panel.years:
        sl = panel.slices[year]
        cols = [sl.columns[n] for n in names]
        kinds = [panel.schema.feature(n).kind for n in names]
        default = sl.columns["default"]
        for i in range(sl.n):
            cells = [str(year)]
            for kind, col in zip(kinds, cols):
                cells.append(col[i] if kind == "categorical" else fmt_value(col[i]))
            cells.append(str(int(default[i])))
            lines.append(",".join(cells))
    panel_path = out_dir / "panel.csv"
    panel_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    schema_path = out_dir / "schema.json"
    write_json(schema_path, panel.schema.to_dict())
    return [panel_path, schema_path]


def read_panel(out_dir) -> Panel:
    out_dir = Path(out_dir)
    schema = Schema.from_dict(read_json(out_dir / "schema.json"))
    header, rows = read_csv(out_dir / "panel.csv")
    names = schema.names()
    if header != ["year"] + names + ["default"]:
        raise ShapeError("panel.csv header does not match schema")
    years = sorted({int(r[0]) for r in rows})
    slices = {}
    for year in years:
        yrows = [r for r in rows if int(r[0]) == year]
        cols = {}
        for j, name in enumerate(names, start=1):
            spec = schema.feature(name)
            if spec.kind == "categorical":
                cols[name] = np.asarray([r[j] for r in yrows])
            else:
                cols[name] = np.asarray([float(r[j]) for r in yrows])
        cols["default"] = np.asarray([float(r[-1]) for r in yrows])
        slices[year] = YearSlice(year=year, columns=cols)
    return Panel(schema=schema, slices=slices)


def config_with(config: GeneratorConfig, **kwargs) -> GeneratorConfig:
    return replace(config, **kwargs)
