"""
Command-line front end.

Subcommands ``distribution``, ``sojourn``, ``genfun`` and ``scan`` share one
flag set. Exit codes: 0 success, 1 invalid configuration, 2 resource or
order limits. Defaults reproduce the Grover walk from [0, i]^T under the
midpoint sojourn rule.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction

import click

from . import __version__
from .algebra import (
    EXACT,
    FLOAT,
    ExactComplex,
    Mat2,
    Vec2,
    build_basis,
    named_coin,
    split_coin,
)
from .errors import (
    InsufficientOrder,
    NonUnitaryCoin,
    NotInField,
    NotNormalized,
    QWSojournError,
    ResourceLimit,
)
from .formats import (
    csv_text,
    fmt17,
    json_text,
    mat_json,
    scalar_json,
    sidecar_path,
    write_output,
)
from .oracle import ORACLE_MAX_STEPS, oracle_tables
from .series import (
    build_X,
    convergence_diagnostics,
    gamma_bar_direct,
    neumann_inverse_times,
    series_from_table,
    symmetrize,
)
from .sojourn import (
    MIDPOINT,
    SOJOURN_CONVENTIONS,
    decompose_psi,
    first_return_excursions,
    gamma_table,
    psi_table,
    verify_renewal,
)
from .spectral import OFF_DIAGONAL, RANDOM_UNITARY, conjecture_scan
from .walk import WalkConfig, evolve_xi, position_distribution

__all__ = ["ConfigError", "RunConfig", "build_config", "cli", "main", "run"]

NAMED_COINS = ("grover", "hadamard", "identity")
DEFAULT_STEPS = {"distribution": 10, "sojourn": 20, "genfun": None, "scan": 100}
MATRIX_ORDERS = (100, 100)
SCALAR_ORDERS = (200, 200)


class ConfigError(QWSojournError, ValueError):
    """Invalid command-line configuration."""


@dataclass
class RunConfig:
    coin_name: str
    coin: Mat2
    initial: Vec2
    backend: str
    steps: int | None
    convention: str
    truncation: tuple[int, int] | None
    grid: int
    tol: float
    seed: int
    family: str
    names: list[str]
    count: int
    eval_points: list[tuple] = field(default_factory=list)
    fmt: str = "csv"
    output: str = "-"
    oracle: bool = False

    def describe(self) -> dict:
        return {
            "coin": self.coin_name,
            "coin_entries": [scalar_json(x) for x in self.coin],
            "initial": [scalar_json(x) for x in self.initial],
            "backend": self.backend,
            "steps": self.steps,
            "convention": self.convention,
            "truncation": list(self.truncation) if self.truncation else None,
            "grid": self.grid,
            "tol": self.tol,
            "seed": self.seed,
            "family": self.family,
            "names": self.names,
            "count": self.count,
            "eval": [[scalar_json(z), scalar_json(t)] for z, t in self.eval_points],
        }


# parsing ------------------------------------------------------------------------


def _numbers(text: str, n: int, what: str) -> list[str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n or not all(parts):
        raise ConfigError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return parts


def _complex_value(re: str, im: str, backend: str):
    try:
        if backend == EXACT:
            return ExactComplex.from_parts(Fraction(re), 0, Fraction(im), 0)
        return complex(float(re), float(im))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad number in {re!r}, {im!r}: {exc}") from None


def _eval_point(text: str):
    re_z, im_z, re_t, im_t = _numbers(text, 4, "--eval")
    out = []
    for re, im in ((re_z, im_z), (re_t, im_t)):
        try:
            fr, fi = Fraction(re), Fraction(im)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad --eval value {text!r}") from None
        if fi == 0:
            out.append(fr.numerator if fr.denominator == 1 else fr)
        else:
            out.append(ExactComplex.from_parts(fr, 0, fi, 0))
    return tuple(out)


def build_config(
    *,
    coin: str = "grover",
    coin_entries: str | None = None,
    initial: str = "0,0,0,1",
    backend: str = EXACT,
    steps: int | None = None,
    convention: str = MIDPOINT,
    truncation: str | None = None,
    grid: int = 1024,
    tol: float = 1e-10,
    seed: int = 0,
    family: str = OFF_DIAGONAL,
    count: int = 20,
    eval_points=(),
    fmt: str = "csv",
    output: str = "-",
    oracle: bool = False,
) -> RunConfig:
    """
    Validate flag values into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        For any invalid value, including non-unitary coins and unnormalized
        initial states. Nothing downstream runs on an invalid config.
    """
    if backend not in (EXACT, FLOAT):
        raise ConfigError(f"unknown backend {backend!r}")
    if convention not in SOJOURN_CONVENTIONS:
        raise ConfigError(f"unknown convention {convention!r}")
    if steps is not None and steps < 0:
        raise ConfigError("--steps must be nonnegative")
    if grid < 16:
        raise ConfigError("--grid must be at least 16")
    if count < 0:
        raise ConfigError("--count must be nonnegative")
    if tol <= 0:
        raise ConfigError("--tol must be positive")

    if coin_entries:
        vals = _numbers(coin_entries, 8, "--coin-entries")
        entries = [_complex_value(vals[2 * i], vals[2 * i + 1], backend) for i in range(4)]
        u = Mat2(*entries)
        coin_name = "custom"
    else:
        if coin.lower() not in NAMED_COINS:
            raise ConfigError(f"unknown coin {coin!r}; expected one of {NAMED_COINS}")
        u = named_coin(coin, backend)
        coin_name = coin.lower()
    try:
        split_coin(u, tol)
    except NonUnitaryCoin as exc:
        hint = " (entries are taken literally on the exact backend; try --backend float)" \
            if backend == EXACT else ""
        raise ConfigError(f"{exc}{hint}") from None

    vals = _numbers(initial, 4, "--initial")
    state = Vec2(
        _complex_value(vals[0], vals[1], backend), _complex_value(vals[2], vals[3], backend)
    )
    try:
        state.check_normalized(tol)
    except NotNormalized as exc:
        raise ConfigError(f"initial state: {exc}") from None

    orders = None
    if truncation:
        nz, nt = _numbers(truncation, 2, "--truncation")
        try:
            orders = (int(nz), int(nt))
        except ValueError:
            raise ConfigError(f"--truncation needs integers, got {truncation!r}") from None
        if min(orders) < 0:
            raise ConfigError("--truncation orders must be nonnegative")

    names: list[str] = []
    fam = family.strip().lower()
    if fam not in (OFF_DIAGONAL, RANDOM_UNITARY):
        names = [n.strip() for n in fam.removeprefix("named:").split(",") if n.strip()]
        if fam == "named":
            names = ["grover", "hadamard"]
        bad = [n for n in names if n not in NAMED_COINS]
        if bad or not names:
            raise ConfigError(
                f"--family must be {OFF_DIAGONAL}, {RANDOM_UNITARY} or a comma list of "
                f"{NAMED_COINS}, got {family!r}"
            )
        fam = "named"

    points = [_eval_point(e) for e in eval_points] or [(1, 1)]
    return RunConfig(
        coin_name=coin_name,
        coin=u,
        initial=state,
        backend=backend,
        steps=steps,
        convention=convention,
        truncation=orders,
        grid=grid,
        tol=tol,
        seed=seed,
        family=fam,
        names=names,
        count=count,
        eval_points=points,
        fmt=fmt,
        output=output,
        oracle=oracle,
    )


# commands ------------------------------------------------------------------------


def _entry_rows(prefix: list, m: Mat2):
    for idx, x in enumerate(m):
        c = complex(x)
        yield prefix + [idx // 2, idx % 2, fmt17(c.real), fmt17(c.imag)]


def _note(msg: str) -> None:
    click.echo(msg, err=True)


def _oracle_audit(cfg: RunConfig, n_max: int, gamma=None, psi=None, excursions=None, xi=None) -> dict:
    if n_max > ORACLE_MAX_STEPS:
        raise ResourceLimit(f"--oracle supports at most {ORACLE_MAX_STEPS} steps, got {n_max}")
    worst = 0.0
    exact_match = True

    def compare(a: Mat2, b: Mat2):
        nonlocal worst, exact_match
        if a != b:
            exact_match = False
            worst = max(worst, a.max_abs_diff(b))

    zero = Mat2.zeros(cfg.coin.backend)
    for n in range(n_max + 1):
        sl = oracle_tables(cfg.coin, n, cfg.convention)
        if xi is not None:
            for x in xi.positions(n):
                compare(xi.xi(n, x), sl.xi.get(x, zero))
        if gamma is not None and n % 2 == 0:
            for k in range(n + 1):
                compare(gamma[(n, k)], sl.gamma.get(k, zero))
        if psi is not None:
            keys = {(y, k) for (m, y, k) in psi.data if m == n} | set(sl.psi)
            for y, k in keys:
                compare(psi[(n, y, k)], sl.psi.get((y, k), zero))
        if excursions is not None and n >= 2 and n % 2 == 0:
            compare(excursions.plus[n // 2], sl.f_plus)
            compare(excursions.minus[n // 2], sl.f_minus)
    if cfg.coin.backend == FLOAT:
        exact_match = worst <= 1e-12
    return {"checked_steps": n_max, "match": exact_match, "max_abs_diff": worst}


def cmd_distribution(cfg: RunConfig) -> None:
    n_max = cfg.steps if cfg.steps is not None else DEFAULT_STEPS["distribution"]
    table = evolve_xi(WalkConfig(cfg.coin, cfg.initial, n_max))
    rows = []
    for n in range(n_max + 1):
        for x, prob in position_distribution(table, cfg.initial, n):
            rows.append((n, x, prob))
    audit = _oracle_audit(cfg, n_max, xi=table) if cfg.oracle else None
    if cfg.fmt == "json":
        doc = {
            "command": "distribution",
            "version": __version__,
            "config": cfg.describe(),
            "rows": [
                {"n": n, "x": x, "probability": float(p), **_exact_field(p)} for n, x, p in rows
            ],
        }
        if audit:
            doc["oracle"] = audit
        write_output(cfg.output, json_text(doc))
    else:
        write_output(
            cfg.output,
            csv_text(["n", "x", "probability"], ([n, x, fmt17(float(p))] for n, x, p in rows)),
        )
        if audit:
            _note(f"oracle: {audit}")


def _exact_field(p) -> dict:
    if isinstance(p, ExactComplex):
        return {"exact": scalar_json(p)["exact"]}
    return {}


def cmd_sojourn(cfg: RunConfig) -> None:
    n_max = cfg.steps if cfg.steps is not None else DEFAULT_STEPS["sojourn"]
    if n_max % 2:
        raise ConfigError(f"sojourn needs an even --steps, got {n_max}")
    gamma = gamma_table(cfg.coin, n_max, cfg.convention)
    psi = psi_table(cfg.coin, 0, n_max, cfg.convention)
    excursions = first_return_excursions(cfg.coin, n_max)
    renewal = verify_renewal(gamma, excursions)
    audit = (
        _oracle_audit(cfg, n_max, gamma=gamma, psi=psi, excursions=excursions)
        if cfg.oracle
        else None
    )
    renewal_doc = renewal.to_dict()
    if audit:
        renewal_doc["oracle"] = audit

    gamma_rows = []
    for n in range(0, n_max + 1, 2):
        for k in range(n + 1):
            gamma_rows.extend(_entry_rows([n, k], gamma[(n, k)]))
    psi_rows = []
    for (n, y, k), w in sorted(psi.data.items()):
        psi_rows.extend(_entry_rows([n, 0, y, k], w))

    if cfg.fmt == "json":
        doc = {
            "command": "sojourn",
            "version": __version__,
            "config": cfg.describe(),
            "gamma": [
                {"n": n, "k": k, "matrix": mat_json(w)} for (n, k), w in sorted(gamma.data.items())
            ],
            "psi": [
                {"n": n, "x": 0, "y": y, "k": k, "matrix": mat_json(w)}
                for (n, y, k), w in sorted(psi.data.items())
            ],
            "renewal": renewal_doc,
        }
        write_output(cfg.output, json_text(doc))
        return
    write_output(cfg.output, csv_text(["n", "k", "i", "j", "re", "im"], gamma_rows))
    psi_path = sidecar_path(cfg.output, ".psi.csv")
    renewal_path = sidecar_path(cfg.output, ".renewal.json")
    if psi_path is None:
        _note("sojourn: psi table and renewal report need --output (sidecar files); skipped")
    else:
        write_output(psi_path, csv_text(["n", "x", "y", "k", "i", "j", "re", "im"], psi_rows))
        write_output(renewal_path, json_text(renewal_doc))
    _note(
        f"renewal: matching order {renewal.matching_order}; "
        f"max residual right={renewal.max_residual_right:.3g} left={renewal.max_residual_left:.3g}; "
        f"off-diagonal base matrices max residual={renewal.offdiag_max_residual:.3g}"
    )


def _series_rows(name: str, s, kind_matrix: bool):
    for (i, j), c in sorted(s.coeffs.items()):
        if kind_matrix:
            for idx, x in enumerate(c):
                v = complex(x)
                yield [name, i, j, idx // 2, idx % 2, fmt17(v.real), fmt17(v.imag)]
        else:
            v = complex(c)
            yield [name, i, j, "", "", fmt17(v.real), fmt17(v.imag)]


def _series_json(s, kind_matrix: bool) -> list[dict]:
    out = []
    for (i, j), c in sorted(s.coeffs.items()):
        val = mat_json(c) if kind_matrix else scalar_json(c)
        out.append({"z": i, "t": j, "value": val})
    return out


def cmd_genfun(cfg: RunConfig) -> None:
    mat_orders = cfg.truncation or MATRIX_ORDERS
    scal_orders = cfg.truncation or SCALAR_ORDERS
    n_gamma = mat_orders[0] - mat_orders[0] % 2
    gamma = gamma_table(cfg.coin, n_gamma, cfg.convention)
    gbar = gamma_bar_direct(gamma, mat_orders)
    points = cfg.eval_points
    diagnostics = {"gamma_bar": convergence_diagnostics(gbar, points)}

    closed_form = None
    if cfg.convention == MIDPOINT:
        excursions = first_return_excursions(cfg.coin, n_gamma)
        neumann = neumann_inverse_times(build_X(excursions, mat_orders), verify=False)
        if cfg.coin.backend == EXACT:
            closed_form = {"match": neumann == gbar, "max_abs_diff": neumann.max_abs_diff(gbar)}
        else:
            diff = neumann.max_abs_diff(gbar)
            closed_form = {"match": diff <= 1e-9, "max_abs_diff": diff}

    psi = psi_table(cfg.coin, 0, scal_orders[0], cfg.convention, resolve_endpoints=False)
    basis = build_basis(*split_coin(cfg.coin))
    coords = decompose_psi(psi, basis)
    ubar = {}
    for name in "pqrs":
        table = {key: v for key, v in coords[name].items() if key[1] <= scal_orders[1]}
        ubar[name] = symmetrize(series_from_table(table, scal_orders, "scalar", cfg.coin.backend))
        diagnostics[name] = convergence_diagnostics(ubar[name], points, normalization="4x")

    diag_doc = {
        "command": "genfun",
        "version": __version__,
        "config": cfg.describe(),
        "symmetrization": "4x (u_bar keeps the factor 4 from summing the four sign images)",
        "gamma_bar_k0_column": "included",
        "closed_form_check": closed_form,
        "diagnostics": {k: v.to_dict() for k, v in diagnostics.items()},
    }
    summary = "; ".join(
        f"{k}: divergent={v.divergent(0)} decay={v.decay_class}" for k, v in diagnostics.items()
    )
    if cfg.fmt == "json":
        doc = dict(diag_doc)
        doc["gamma_bar"] = _series_json(gbar, True)
        doc["u_bar"] = {name: _series_json(s, False) for name, s in ubar.items()}
        write_output(cfg.output, json_text(doc))
    else:
        rows = list(_series_rows("gamma_bar", gbar, True))
        for name, s in ubar.items():
            rows.extend(_series_rows(f"{name}_bar", s, False))
        write_output(cfg.output, csv_text(["series", "z_deg", "t_deg", "i", "j", "re", "im"], rows))
        path = sidecar_path(cfg.output, ".diagnostics.json")
        if path is None:
            _note("genfun: diagnostics report needs --output (sidecar file); skipped")
        else:
            write_output(path, json_text(diag_doc))
    _note(f"genfun at {points[0]}: {summary}")


SCAN_HEADER = [
    "index", "label",
    "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im",
    "flat_band", "max_deviation", "decay_class", "divergent", "averaged_return",
    "conjecture_consistent", "counterexample_candidate",
]


def cmd_scan(cfg: RunConfig) -> None:
    n_max = cfg.steps if cfg.steps is not None else DEFAULT_STEPS["scan"]
    reports = conjecture_scan(
        cfg.family, cfg.count, cfg.seed, n_max, names=cfg.names, grid=cfg.grid,
        convention=cfg.convention,
    )
    consistent = sum(r.conjecture_consistent for r in reports)
    candidates = sum(r.counterexample_candidate for r in reports)
    summary = {"rows": len(reports), "conjecture_consistent": consistent,
               "counterexample_candidates": candidates}
    if cfg.fmt == "json":
        doc = {
            "command": "scan",
            "version": __version__,
            "config": cfg.describe(),
            "rng": "numpy.random.default_rng (PCG64)",
            "rows": [r.to_dict() for r in reports],
            "summary": summary,
        }
        write_output(cfg.output, json_text(doc))
    else:
        rows = []
        for r in reports:
            coin = [fmt17(v) for pair in r.coin for v in pair]
            rows.append(
                [r.index, r.label, *coin, r.flat_band, fmt17(r.max_deviation), r.decay_class,
                 r.divergent, fmt17(r.averaged_return), r.conjecture_consistent,
                 r.counterexample_candidate]
            )
        write_output(cfg.output, csv_text(SCAN_HEADER, rows))
    _note(
        f"scan: {len(reports)} rows, {consistent} conjecture-consistent, "
        f"{candidates} counterexample candidates"
    )


COMMANDS = {
    "distribution": cmd_distribution,
    "sojourn": cmd_sojourn,
    "genfun": cmd_genfun,
    "scan": cmd_scan,
}


# click wiring ------------------------------------------------------------------------


def _shared_options(func):
    options = [
        click.option("--coin", default="grover", show_default=True,
                     help="Named coin: grover, hadamard or identity."),
        click.option("--coin-entries", default=None,
                     help="Custom coin re0,im0,re1,im1,re2,im2,re3,im3 (row-major)."),
        click.option("--initial", default="0,0,0,1", show_default=True,
                     help="Initial state re0,im0,re1,im1."),
        click.option("--backend", type=click.Choice([EXACT, FLOAT]), default=EXACT,
                     show_default=True),
        click.option("--steps", type=int, default=None, help="Time horizon N."),
        click.option("--convention", type=click.Choice(list(SOJOURN_CONVENTIONS)),
                     default=MIDPOINT, show_default=True, help="Sojourn interval rule."),
        click.option("--truncation", default=None, help="Series orders NZ,NT."),
        click.option("--grid", type=int, default=1024, show_default=True,
                     help="Momentum grid size."),
        click.option("--tol", type=float, default=1e-10, show_default=True,
                     help="Float tolerance for unitarity and normalization checks."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--family", default=OFF_DIAGONAL, show_default=True,
                     help="Scan family: off-diagonal, random-unitary, or names like grover,hadamard."),
        click.option("--count", type=int, default=20, show_default=True),
        click.option("--eval", "eval_points", multiple=True,
                     help="Evaluation point z_re,z_im,t_re,t_im (repeatable)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
                     show_default=True),
        click.option("--output", default="-", show_default=True, help="Output path (- for stdout)."),
        click.option("--oracle", is_flag=True, help="Cross-check against exhaustive enumeration."),
    ]
    for opt in reversed(options):
        func = opt(func)
    return func


@click.group()
@click.version_option(__version__)
def cli():
    """Exact path-sum and sojourn-time toolkit for two-state quantum walks."""


def _make_command(name: str, doc: str):
    @cli.command(name=name, help=doc)
    @_shared_options
    def command(**opts):
        COMMANDS[name](build_config(**opts))

    return command


_make_command("distribution", "Position distribution P(X_n = x) for n = 0..N.")
_make_command("sojourn", "Sojourn tables Gamma and Psi with the renewal report.")
_make_command("genfun", "Generating-function coefficients and divergence diagnostics.")
_make_command("scan", "Flat-band / sojourn-divergence scan over a coin family.")


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        cli.main(args=argv, prog_name="qwsojourn", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        _note("aborted")
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ConfigError, NonUnitaryCoin, NotNormalized, NotInField) as exc:
        _note(f"error: {exc}")
        return 1
    except (ResourceLimit, InsufficientOrder) as exc:
        _note(f"error: {type(exc).__name__}: {exc}")
        return 2
    return 0


def run() -> None:
    sys.exit(main())
