"""Run configuration, trajectory/summary emission and parameter scans."""

import csv
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .ermakov import DEFAULT_MAX_P, check_periodicity
from .errors import ErmakovQubitError, ParameterError, SingularityError
from .families import FamilyParams, PinneyFamily, inversion_from_propagator, make_family
from .oracle import DEFAULT_THRESHOLDS, default_config, verify_family
from .su2 import unitarity_defect

log = logging.getLogger(__name__)

FAMILIES = ("circular", "decaying", "oscillating", "custom-pinney")
OUTPUTS = ("field", "factorization", "state", "inversion", "verify")
MAX_SCAN_CELLS = 10_000

TRAJECTORY_COLUMNS = (
    "t", "re_R", "im_R", "abs_R", "re_V", "im_V", "pop_p", "pop_q", "P", "unitarity_defect",
)
FACTORIZATION_COLUMNS = (
    "re_alpha", "im_alpha", "re_delta_f", "im_delta_f", "re_beta", "im_beta",
)
SUMMARY_COLUMNS = (
    "family", "g_re", "g_im", "delta", "Delta", "omega1", "Omega0", "kappa", "p", "P_min", "P_period",
)


class UsageError(ErmakovQubitError, ValueError):
    """Invalid run configuration (CLI exit status 2)."""


def fmt(x):
    """17 significant digits, so CSV output round-trips exactly."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    family: str = "oscillating"
    g_re: float = 1.0
    g_im: float = 0.0
    delta: float = 0.0
    Delta: float = 0.0
    omega1: Optional[float] = None
    kappa: Optional[float] = None
    r0_re: Optional[float] = None
    r0_im: Optional[float] = None
    r0p_re: float = 0.0
    r0p_im: float = 0.0
    c1: Optional[float] = None
    c2: Optional[float] = None
    t_max: Optional[float] = None
    n_points: int = 501
    outputs: tuple = ("field", "state", "inversion")
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    max_p: int = DEFAULT_MAX_P
    out: str = "."
    corrupt_alpha: float = 1.0

    def validate(self):
        if self.family not in FAMILIES:
            raise UsageError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise UsageError("points must be an integer >= 2")
        if self.t_max is not None and not self.t_max > 0:
            raise UsageError("t-max must be positive")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise UsageError(f"unknown outputs {sorted(bad)}")
        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            raise UsageError(f"unknown thresholds {sorted(unknown)}")
        if self.max_p < 1:
            raise UsageError("max-p must be positive")
        if self.omega1 is not None and self.kappa is not None:
            raise UsageError("give either omega1 or kappa, not both")
        if self.family == "oscillating" and self.omega1 is None and self.kappa is None:
            raise UsageError("oscillating family needs omega1 or kappa")
        return self

    @property
    def g(self):
        return complex(self.g_re, self.g_im)

    def family_params(self):
        if self.family == "oscillating":
            if self.kappa is not None:
                return FamilyParams.from_kappa(self.g, self.delta, self.kappa, self.Delta)
            return FamilyParams(self.g, self.delta, self.Delta, self.omega1)
        return FamilyParams(self.g, self.delta, self.Delta)

    def build_family(self):
        try:
            if self.family == "custom-pinney":
                R0 = complex(self.r0_re, self.r0_im) if self.r0_re is not None else -1j * np.conj(self.g)
                R0p = complex(self.r0p_re, self.r0p_im)
                omega1 = self.omega1 if self.omega1 is not None else 0.0
                fam = PinneyFamily(omega1, R0, R0p, self.Delta, self.c1, self.c2)
            else:
                fam = make_family(self.family, self.family_params())
        except ParameterError as exc:
            raise UsageError(str(exc)) from exc
        if self.corrupt_alpha != 1.0:
            fam = fam.corrupted(self.corrupt_alpha)
        return fam

    def grid(self, family):
        t_max = self.t_max if self.t_max is not None else 5 * family.characteristic_period
        return np.linspace(0.0, t_max, int(self.n_points))

    @classmethod
    def from_mapping(cls, data):
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise UsageError(f"unknown config keys {sorted(extra)}")
        data = dict(data)
        if "outputs" in data:
            data["outputs"] = tuple(data["outputs"])
        if "thresholds" in data:
            th = dict(DEFAULT_THRESHOLDS)
            th.update(data["thresholds"])
            data["thresholds"] = th
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        return cls.from_mapping(data)


def _su2_from_column(cp, cq):
    """The SU(2) matrix whose first column is (cp, cq)."""
    return np.array([[cp, -np.conj(cq)], [cq, np.conj(cp)]])


def propagator_samples(family, t):
    """U(t) on a grid, tolerating instants where the factorization is singular.

    At such instants (e.g. quarter periods at δ = 0) U is rebuilt from the
    closed-form state, which fixes an SU(2) matrix completely.
    """
    try:
        return family.propagator(t)
    except SingularityError:
        if not hasattr(family, "state"):
            raise
    u = np.empty(np.shape(t) + (2, 2), dtype=complex)
    for i, ti in enumerate(t):
        try:
            u[i] = family.propagator(np.array([ti]))[0]
        except SingularityError:
            cp, cq = family.state(np.float64(ti))
            u[i] = _su2_from_column(complex(cp), complex(cq))
    return u


def trajectory_rows(family, t):
    """TrajectoryRow tuples: field, populations and unitarity defect at each t.

    Populations come from the closed-form state when the family has one and
    from the first column of U otherwise.
    """
    u = propagator_samples(family, t)
    r = family.R(t)
    v = family.V(t)
    if hasattr(family, "state"):
        amp_p, amp_q = family.state(t)
    else:
        amp_p, amp_q = u[..., 0, 0], u[..., 1, 0]
    pop_p = np.abs(amp_p) ** 2
    pop_q = np.abs(amp_q) ** 2
    defect = unitarity_defect(u)
    rows = []
    for i, ti in enumerate(t):
        rows.append(
            (ti, r[i].real, r[i].imag, abs(r[i]), v[i].real, v[i].imag,
             pop_p[i], pop_q[i], pop_p[i] - pop_q[i], defect[i])
        )
    return rows


def factorization_rows(family, t):
    f = family.factorization(t)
    return [
        (a.real, a.imag, d.real, d.imag, b.real, b.imag)
        for a, d, b in zip(f.alpha, f.delta_f, f.beta)
    ]


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])
    return path


def summarize(family, max_p=DEFAULT_MAX_P):
    """Ω0, κ, least p, P_min and the period of P for one family."""
    params = getattr(family, "params", None)
    kappa = getattr(family, "kappa", None)
    p = None
    if getattr(family, "mu_period", None):
        spec = check_periodicity(family.ermakov(), max_p=max_p)
        p = spec.p if spec else None
    p_min = getattr(family, "P_min", None)
    if p_min is None and family.name == "circular":
        d2, g2 = params.delta**2, 4 * abs(params.g) ** 2
        p_min = (d2 - g2) / (d2 + g2)
    if family.name == "decaying":
        p_min = family.asymptotic_inversion
    period = getattr(family, "inversion_period", None)
    if period is None and family.name == "circular":
        period = np.pi / family.Omega0
    g = params.g if params is not None else None
    return {
        "family": family.name,
        "g_re": g.real if g is not None else None,
        "g_im": g.imag if g is not None else None,
        "delta": params.delta if params is not None else family.lam,
        "Delta": family.Delta,
        "omega1": getattr(family, "omega1", None) if params is None else params.Omega1,
        "Omega0": family.Omega0,
        "kappa": kappa,
        "p": p,
        "P_min": p_min,
        "P_period": period,
    }


def run(config: RunConfig):
    """Emit the requested files for one configuration.

    Returns ``(status, paths)``; status is 0 unless a requested verification
    fails, in which case it is 1.
    """
    config.validate()
    family = config.build_family()
    t = config.grid(family)
    out = Path(config.out)
    stem = family.name
    paths = []
    status = 0
    wanted = set(config.outputs)
    if wanted & {"field", "state", "inversion"}:
        paths.append(write_csv(out / f"{stem}_trajectory.csv", TRAJECTORY_COLUMNS, trajectory_rows(family, t)))
    if "factorization" in wanted:
        rows = [
            (ti, *tr[1:6], *fr)
            for ti, tr, fr in zip(t, trajectory_rows(family, t), factorization_rows(family, t))
        ]
        header = TRAJECTORY_COLUMNS[:6] + FACTORIZATION_COLUMNS
        paths.append(write_csv(out / f"{stem}_factorization.csv", header, rows))
    summary = summarize(family, config.max_p) if family.name != "custom-pinney" else None
    if summary is not None:
        paths.append(_write_json(out / f"{stem}_summary.json", summary))
    if "verify" in wanted:
        icfg = default_config(family, t_max=float(t[-1]))
        report = verify_family(family, icfg, n_points=len(t), thresholds=config.thresholds)
        paths.append(_write_json(out / f"{stem}_verify.json", report.as_dict()))
        if not report.passed:
            log.warning("verification failed for %s: %s", stem, report.as_dict())
            status = 1
    return status, paths


def _write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n")
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def parse_range(text):
    """'a,b,c' -> explicit values; 'start:stop:num' -> inclusive linspace."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            n = int(num)
            if n < 1:
                raise ValueError("num must be >= 1")
            return [float(x) for x in np.linspace(float(start), float(stop), n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}: {exc}") from exc


def scan(config: RunConfig, ranges, jobs=1):
    """One summary row per point of the Cartesian product of ``ranges``.

    ``ranges`` maps RunConfig field names (g_re, g_im, delta, Delta, omega1,
    kappa) to value lists; unspecified fields keep the config's values.
    Ordering follows the product order of the keys as given.
    """
    allowed = {"g_re", "g_im", "delta", "Delta", "omega1", "kappa"}
    bad = set(ranges) - allowed
    if bad:
        raise UsageError(f"cannot scan over {sorted(bad)}")
    if config.family == "custom-pinney":
        raise UsageError("scan supports the closed-form families only")
    keys = list(ranges)
    cells = 1
    for k in keys:
        if not ranges[k]:
            raise UsageError(f"empty range for {k}")
        if not all(np.isfinite(ranges[k])):
            raise UsageError(f"non-finite value in range for {k}")
        cells *= len(ranges[k])
    if cells > MAX_SCAN_CELLS:
        raise UsageError(f"scan grid has {cells} cells, limit is {MAX_SCAN_CELLS}")
    combos = list(itertools.product(*(ranges[k] for k in keys)))

    def one(values):
        cfg = replace(config, **dict(zip(keys, values)))
        if "kappa" in keys:
            cfg.omega1 = None
        if "omega1" in keys:
            cfg.kappa = None
        cfg.validate()
        return summarize(cfg.build_family(), cfg.max_p)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, combos))
    return [one(c) for c in combos]


def write_summary_csv(path, rows):
    return write_csv(path, SUMMARY_COLUMNS, [[row[c] for c in SUMMARY_COLUMNS] for row in rows])
