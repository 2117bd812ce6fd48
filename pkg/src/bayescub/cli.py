"""Command-line front door.

Configuration comes from an optional TOML file plus flags, with flags taking
precedence.  Unknown keys are rejected.  Results are emitted as JSON (single
integrals) or CSV with a JSON run manifest (sweeps); CSV bodies are
byte-deterministic for a fixed config, so reruns can be diffed directly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(non-unisolvent nodes or a failed factorization), with a machine-readable
error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, bench
from .cubature import bc, bsc, bsc_square, endow_rule, normalized_bc
from .errors import ConfigError, CubatureError, DimensionMismatch, UnsupportedCombination
from .gp import Dataset, condition, finite_prior, flat_prior, posterior_cov, posterior_mean
from .hyper import EBConfig, eb_lengthscale, studentize
from .kernels import KernelSpec
from .measures import DiagonalGaussian, StandardGaussian, UniformBox, dimension
from .polyspace import empty_space, total_degree_space

THREADS_ENV = "BAYESCUB_THREADS"


# ---------------------------------------------------------------------------
# configuration blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelBlock:
    family: str = "gaussian"
    rho: float = 2.5
    ell: float = 1.0
    lam: float = 1.0
    structure: str = "product"
    eb: bool = False
    ell_min: float = 0.05
    ell_max: float = 20.0
    grid: int = 60


@dataclass(frozen=True)
class MeasureBlock:
    kind: str = "std-gaussian"
    d: int = 1
    lower: tuple = ()
    upper: tuple = ()
    mean: tuple = ()
    var: tuple = ()


@dataclass(frozen=True)
class PiBlock:
    type: str = "total_degree"
    m: int = 1


@dataclass(frozen=True)
class PointsBlock:
    kind: str = "grid"  # grid | uniform | file
    seed: int = 0
    lo: float | None = None
    hi: float | None = None
    file: str | None = None


@dataclass(frozen=True)
class IntegrandBlock:
    name: str = "toy"  # toy | zcb | file
    file: str | None = None
    zcb_d: int = 10


@dataclass(frozen=True)
class OutputBlock:
    out: str | None = None
    weights_csv: str | None = None


@dataclass(frozen=True)
class RunConfig:
    command: str = "integrate"
    method: str = "bsc"
    ns: tuple = (10,)
    seeds: tuple = (0,)
    kernel: KernelBlock = field(default_factory=KernelBlock)
    measure: MeasureBlock = field(default_factory=MeasureBlock)
    pi: PiBlock = field(default_factory=PiBlock)
    points: PointsBlock = field(default_factory=PointsBlock)
    integrand: IntegrandBlock = field(default_factory=IntegrandBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def to_dict(self) -> dict:
        return _serialize(self)

    def echo_dict(self) -> dict:
        """Config echo embedded in CSV bodies: everything except output paths,
        so identical runs written to different locations stay byte-identical."""
        d = self.to_dict()
        d.pop("output", None)
        return d

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        return _from_mapping(RunConfig, raw, path="")


def _serialize(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _serialize(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, tuple):
        return [_serialize(v) for v in obj]
    return obj


_NESTED_BLOCKS = {
    "kernel": KernelBlock,
    "measure": MeasureBlock,
    "pi": PiBlock,
    "points": PointsBlock,
    "integrand": IntegrandBlock,
    "output": OutputBlock,
}


def _from_mapping(cls, raw: dict, path: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"expected a table at {path or 'top level'}")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        where = path or "top level"
        raise ConfigError(f"unknown configuration key(s) at {where}: {sorted(unknown)}")
    kwargs = {}
    for name, value in raw.items():
        sub = f"{path}.{name}" if path else name
        if cls is RunConfig and name in _NESTED_BLOCKS:
            kwargs[name] = _from_mapping(_NESTED_BLOCKS[name], value, sub)
        elif isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad configuration near {path or 'top level'}: {exc}") from exc


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_kernel(block: KernelBlock) -> KernelSpec:
    if block.family == "gaussian":
        return KernelSpec(family="gaussian", lengthscale=block.ell, amplitude=block.lam)
    if block.family == "matern":
        return KernelSpec(
            family="matern",
            lengthscale=block.ell,
            amplitude=block.lam,
            rho=block.rho,
            structure=block.structure,
        )
    raise ConfigError(f"unknown kernel family {block.family!r}")


def build_measure(block: MeasureBlock):
    if block.kind == "std-gaussian":
        return StandardGaussian(block.d)
    if block.kind == "uniform-box":
        lower = block.lower or tuple([0.0] * block.d)
        upper = block.upper or tuple([1.0] * block.d)
        return UniformBox(tuple(float(v) for v in lower), tuple(float(v) for v in upper))
    if block.kind == "diag-gaussian":
        if not block.mean or not block.var:
            raise ConfigError("diag-gaussian requires mean and var")
        return DiagonalGaussian(tuple(float(v) for v in block.mean), tuple(float(v) for v in block.var))
    raise ConfigError(f"unknown measure kind {block.kind!r}")


def build_space(block: PiBlock, d: int):
    if block.type == "empty":
        return empty_space(d)
    if block.type == "total_degree":
        return total_degree_space(block.m, d)
    raise ConfigError(f"unknown pi type {block.type!r}")


def build_points(block: PointsBlock, n: int, d: int, measure, seed: int | None = None):
    if block.kind == "grid":
        if block.lo is not None and block.hi is not None:
            kind = bench.EquispacedGrid(block.lo, block.hi)
        elif isinstance(measure, UniformBox):
            kind = bench.EquispacedGrid(float(measure.lower[0]), float(measure.upper[0]))
        else:
            kind = bench.ScaledSymmetricGrid()
        return bench.point_set(kind, n, d)
    if block.kind == "uniform":
        lo = block.lo if block.lo is not None else (measure.lower[0] if isinstance(measure, UniformBox) else 0.0)
        hi = block.hi if block.hi is not None else (measure.upper[0] if isinstance(measure, UniformBox) else 1.0)
        kind = bench.RandomUniformBox(float(lo), float(hi), seed if seed is not None else block.seed)
        return bench.point_set(kind, n, d)
    if block.kind == "file":
        if not block.file:
            raise ConfigError("points.kind = 'file' requires points.file")
        X = _read_matrix_csv(block.file)
        if X.shape[1] != d:
            raise ConfigError(f"points file has dimension {X.shape[1]}, expected {d}")
        return X
    raise ConfigError(f"unknown points kind {block.kind!r}")


def _read_matrix_csv(path: str) -> np.ndarray:
    try:
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    rows.append([float(v) for v in line.split(",")])
                except ValueError:
                    continue  # header row
        return np.asarray(rows, dtype=float)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def resolve_integrand(block: IntegrandBlock):
    """Return (callable, truth-or-None) for a builtin integrand."""
    if block.name == "toy":
        return bench.toy_integrand, bench.toy_truth()
    if block.name == "zcb":
        model = bench.vasicek_paper_model(block.zcb_d + 1)
        return (lambda u: bench.zcb_integrand(u, model)), bench.zcb_truth(model)
    if block.name == "file":
        return None, None
    raise ConfigError(f"unknown integrand {block.name!r}")


def load_dataset(cfg: RunConfig, n: int, d: int, measure, seed: int | None = None) -> Dataset:
    if cfg.integrand.name == "file":
        if not cfg.integrand.file:
            raise ConfigError("integrand.name = 'file' requires integrand.file")
        table = _read_matrix_csv(cfg.integrand.file)
        if table.shape[1] != d + 1:
            raise ConfigError(
                f"pre-evaluated integrand file needs d+1 = {d + 1} columns, got {table.shape[1]}"
            )
        return Dataset(X=table[:, :d], f=table[:, d])
    fn, _ = resolve_integrand(cfg.integrand)
    X = build_points(cfg.points, n, d, measure, seed=seed)
    if d == 1:
        f = np.array([float(fn(float(p[0]))) for p in X])
    else:
        f = np.array([float(fn(p)) for p in X])
    return Dataset(X=X, f=f)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _result_payload(result, cfg: RunConfig) -> dict:
    return {
        "mean": result.mean,
        "variance": result.variance,
        "stddev": result.stddev,
        "weights": [float(w) for w in result.weights],
        "poly_weights": [float(w) for w in result.poly_weights],
        "method": result.method,
        "diagnostics": {
            "jitter": result.diagnostics.jitter,
            "vandermonde_rank": result.diagnostics.vandermonde_rank,
            "wall_time": result.diagnostics.wall_time,
            "variance_clamped": result.diagnostics.variance_clamped,
        },
        "config": cfg.to_dict(),
    }


def cmd_integrate(cfg: RunConfig) -> int:
    measure = build_measure(cfg.measure)
    d = dimension(measure)
    n = int(cfg.ns[0])
    data = load_dataset(cfg, n, d, measure)
    kernel = build_kernel(cfg.kernel)
    payload_extra: dict = {}
    if cfg.kernel.eb:
        eb = eb_lengthscale(
            kernel.with_amplitude(1.0),
            data,
            EBConfig(cfg.kernel.ell_min, cfg.kernel.ell_max, cfg.kernel.grid),
        )
        kernel = kernel.with_lengthscale(eb.ell).with_amplitude(1.0)
        payload_extra["eb"] = {
            "ell_hat": eb.ell,
            "log_marginal_at_hat": eb.log_marginal,
            "lambda_hat": eb.lambda_hat,
            "non_identifiable": eb.non_identifiable,
        }
    space = build_space(cfg.pi, d)
    if cfg.method == "bc":
        result = bc(kernel, measure, data)
    elif cfg.method == "bsc":
        result = bsc(kernel, measure, space, data)
    elif cfg.method == "nbc":
        result = normalized_bc(kernel, measure, data)
    elif cfg.method == "square":
        result = bsc_square(kernel, measure, space, data)
    elif cfg.method == "endow":
        raise ConfigError("use the 'endow' command for external rules")
    else:
        raise ConfigError(f"unknown method {cfg.method!r}")
    payload = _result_payload(result, cfg)
    payload.update(payload_extra)
    if cfg.kernel.eb:
        t = studentize(result, data, kernel)
        payload["student_t"] = {"location": t.location, "scale2": t.scale2, "dof": t.dof}
    _emit_json(payload, cfg.output.out)
    if cfg.output.weights_csv:
        _write_weights_csv(cfg.output.weights_csv, data.X, result.weights, cfg)
    return 0


def _write_weights_csv(path: str, X: np.ndarray, w: np.ndarray, cfg: RunConfig) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# config: " + json.dumps(cfg.echo_dict(), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{j + 1}" for j in range(X.shape[1])] + ["weight"])
        for row, wi in zip(X, w):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(wi))])


def cmd_endow(cfg: RunConfig, weights_file: str | None, uniform: bool) -> int:
    measure = build_measure(cfg.measure)
    d = dimension(measure)
    n = int(cfg.ns[0])
    data = load_dataset(cfg, n, d, measure)
    kernel = build_kernel(cfg.kernel)
    if uniform:
        w = np.full(data.n, 1.0 / data.n)
    elif weights_file:
        w = _read_matrix_csv(weights_file).reshape(-1)
    else:
        raise ConfigError("endow requires --weights-file or --uniform-weights")
    result = endow_rule(data.X, w, kernel, measure, data)
    _emit_json(_result_payload(result, cfg), cfg.output.out)
    return 0


def cmd_posterior(cfg: RunConfig, grid_lo: float, grid_hi: float, grid_n: int, sigma2: float | None) -> int:
    measure = build_measure(cfg.measure)
    d = dimension(measure)
    if d != 1:
        raise ConfigError("the posterior command emits 1-d profiles only")
    n = int(cfg.ns[0])
    data = load_dataset(cfg, n, d, measure)
    kernel = build_kernel(cfg.kernel)
    space = build_space(cfg.pi, d)
    prior = flat_prior(space) if sigma2 is None else finite_prior(space, sigma2 * np.eye(space.Q))
    post = condition(prior, kernel, data)
    xs = np.linspace(grid_lo, grid_hi, grid_n)
    means = posterior_mean(post, xs)
    stds = np.sqrt(np.maximum(0.0, np.array([posterior_cov(post, x, x) for x in xs])))
    out = cfg.output.out or "posterior.csv"
    with open(out, "w", newline="", encoding="utf-8") as fh:
        fh.write("# config: " + json.dumps(cfg.echo_dict(), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "mean", "stddev"])
        for x, m, s in zip(xs, means, stds):
            writer.writerow([repr(float(x)), repr(float(m)), repr(float(s))])
    return 0


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _run_convergence(config: bench.ConvergenceConfig, cfg: RunConfig, out: str) -> int:
    report = bench.convergence_run(config, max_workers=_threads())
    bench.rows_to_csv(report.rows, out, cfg.echo_dict())
    bench.write_manifest(
        out + ".manifest.json",
        cfg.to_dict(),
        extra={
            "slopes": {
                key: {"slope": s.slope, "residual": s.residual, "ns_used": list(s.ns_used)}
                for key, s in report.slopes.items()
            }
        },
    )
    return 0


def cmd_toy(cfg: RunConfig) -> int:
    measure = StandardGaussian(1)
    kernel = build_kernel(cfg.kernel).with_amplitude(1.0)
    config = bench.ConvergenceConfig(
        integrand=bench.toy_integrand,
        truth=bench.toy_truth(),
        measure=measure,
        methods=("bc", "bsc"),
        kernels=(kernel,),
        ns=tuple(int(n) for n in cfg.ns),
        point_kind=bench.ScaledSymmetricGrid(),
        seeds=tuple(int(s) for s in cfg.seeds),
        space_degree=cfg.pi.m,
        use_eb=cfg.kernel.eb,
        eb_config=EBConfig(cfg.kernel.ell_min, cfg.kernel.ell_max, cfg.kernel.grid),
    )
    return _run_convergence(config, cfg, cfg.output.out or "toy.csv")


def cmd_zcb(cfg: RunConfig) -> int:
    d = cfg.integrand.zcb_d
    model = bench.vasicek_paper_model(d + 1)
    measure = UniformBox(tuple([0.0] * d), tuple([1.0] * d))
    kernel = build_kernel(cfg.kernel).with_amplitude(1.0)
    config = bench.ConvergenceConfig(
        integrand=lambda u: bench.zcb_integrand(u, model),
        truth=bench.zcb_truth(model),
        measure=measure,
        methods=("bc", "bsc", "mc"),
        kernels=(kernel,),
        ns=tuple(int(n) for n in cfg.ns),
        point_kind=bench.RandomUniformBox(0.0, 1.0, cfg.points.seed),
        seeds=tuple(int(s) for s in cfg.seeds),
        space_degree=cfg.pi.m,
        use_eb=cfg.kernel.eb,
        eb_config=EBConfig(cfg.kernel.ell_min, cfg.kernel.ell_max, cfg.kernel.grid),
    )
    return _run_convergence(config, cfg, cfg.output.out or "zcb.csv")


def cmd_convergence(cfg: RunConfig) -> int:
    measure = build_measure(cfg.measure)
    fn, truth = resolve_integrand(cfg.integrand)
    if fn is None:
        raise ConfigError("convergence requires a builtin integrand (toy or zcb)")
    kernel = build_kernel(cfg.kernel).with_amplitude(1.0)
    if cfg.points.kind == "uniform":
        kind: bench.PointSetKind = bench.RandomUniformBox(
            cfg.points.lo if cfg.points.lo is not None else 0.0,
            cfg.points.hi if cfg.points.hi is not None else 1.0,
            cfg.points.seed,
        )
    elif isinstance(measure, UniformBox):
        kind = bench.EquispacedGrid(float(measure.lower[0]), float(measure.upper[0]))
    else:
        kind = bench.ScaledSymmetricGrid()
    config = bench.ConvergenceConfig(
        integrand=fn,
        truth=truth,
        measure=measure,
        methods=("bc", "bsc", "mc"),
        kernels=(kernel,),
        ns=tuple(int(n) for n in cfg.ns),
        point_kind=kind,
        seeds=tuple(int(s) for s in cfg.seeds),
        space_degree=cfg.pi.m,
        use_eb=cfg.kernel.eb,
        eb_config=EBConfig(cfg.kernel.ell_min, cfg.kernel.ell_max, cfg.kernel.grid),
    )
    return _run_convergence(config, cfg, cfg.output.out or "convergence.csv")


def cmd_lengthscale_sweep(cfg: RunConfig, ell_lo: float, ell_hi: float, ell_count: int, ms: tuple) -> int:
    measure = build_measure(cfg.measure)
    d = dimension(measure)
    fn, truth = resolve_integrand(cfg.integrand)
    if fn is None or truth is None:
        raise ConfigError("lengthscale-sweep requires a builtin integrand with a known truth")
    n = int(cfg.ns[0])
    data = load_dataset(cfg, n, d, measure)
    rows = []
    for ell in np.geomspace(ell_lo, ell_hi, ell_count):
        kernel = build_kernel(cfg.kernel).with_lengthscale(float(ell)).with_amplitude(1.0)
        variants = [("bc", None)] + [(f"bsc-m{m}", int(m)) for m in ms]
        for label, m in variants:
            try:
                if m is None:
                    result = bc(kernel, measure, data)
                else:
                    result = bsc(kernel, measure, total_degree_space(m, d), data)
            except CubatureError:
                rows.append(
                    bench.ConvergenceRow(label, n, d, float(ell), None, None, None, None,
                                         cfg.points.seed, flag="failed")
                )
                continue
            err = abs(result.mean - truth)
            rows.append(
                bench.ConvergenceRow(
                    label, n, d, float(ell), err, err / abs(truth),
                    result.stddev, result.diagnostics.jitter, cfg.points.seed,
                )
            )
    rows.sort(key=lambda r: (r.method, r.ell, r.n, r.seed))
    out = cfg.output.out or "lengthscale_sweep.csv"
    bench.rows_to_csv(rows, out, cfg.echo_dict())
    bench.write_manifest(out + ".manifest.json", cfg.to_dict())
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # machine-readable config errors, exit code 2
        _fail("ConfigError", message, 2)


def _fail(kind: str, message: str, code: int):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    raise SystemExit(code)


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in str(text).split(",") if v != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bayescub", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML configuration file; flags override its values")
        p.add_argument("--kernel", dest="kernel_family", choices=["gaussian", "matern"])
        p.add_argument("--rho", type=float, help="matern smoothness (0.5, 1.5, 2.5)")
        p.add_argument("--ell", type=float, help="kernel length-scale")
        p.add_argument("--lambda", dest="lam", type=float, help="kernel amplitude")
        p.add_argument("--eb", action="store_true", default=None, help="select ell by empirical Bayes")
        p.add_argument("--ell-min", type=float)
        p.add_argument("--ell-max", type=float)
        p.add_argument("--grid", type=int, help="EB log-grid size")
        p.add_argument("--m", type=int, help="total degree of the exactness space")
        p.add_argument("--pi-empty", action="store_true", default=None, help="use the empty space")
        p.add_argument("--n", type=_int_list, help="node count(s), comma separated")
        p.add_argument("--points", choices=["grid", "uniform", "file"])
        p.add_argument("--points-file")
        p.add_argument("--lo", type=float)
        p.add_argument("--hi", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--seeds", type=_int_list, help="seeds for sweeps, comma separated")
        p.add_argument("--measure", choices=["std-gaussian", "uniform-box", "diag-gaussian"])
        p.add_argument("-d", "--dim", type=int, help="measure dimension")
        p.add_argument("--integrand", choices=["toy", "zcb", "file"])
        p.add_argument("--data", help="pre-evaluated (node, value) CSV")
        p.add_argument("--zcb-d", type=int, help="bond-price integral dimension")
        p.add_argument("--out")
        p.add_argument("--weights-csv", help="also write node weights as CSV")

    p_int = sub.add_parser("integrate", help="run one cubature rule")
    add_common(p_int)
    p_int.add_argument("--method", choices=["bc", "bsc", "nbc", "square"])

    p_end = sub.add_parser("endow", help="endow an external rule with a posterior")
    add_common(p_end)
    p_end.add_argument("--weights-file", help="CSV of rule weights, one per node")
    p_end.add_argument("--uniform-weights", action="store_true")

    p_post = sub.add_parser("posterior", help="emit (x, mean, stddev) over a grid")
    add_common(p_post)
    p_post.add_argument("--grid-lo", type=float, default=-3.0)
    p_post.add_argument("--grid-hi", type=float, default=3.0)
    p_post.add_argument("--grid-n", type=int, default=201)
    p_post.add_argument("--sigma2", type=float, help="finite coefficient variance (flat limit if omitted)")

    for name, help_text in [
        ("toy", "toy-problem error sweep over n"),
        ("zcb", "bond-price error sweep over n"),
        ("convergence", "generic convergence run from config"),
    ]:
        p = sub.add_parser(name, help=help_text)
        add_common(p)

    p_ls = sub.add_parser("lengthscale-sweep", help="errors as a function of the length-scale")
    add_common(p_ls)
    p_ls.add_argument("--ell-lo", type=float, default=0.05)
    p_ls.add_argument("--ell-hi", type=float, default=20.0)
    p_ls.add_argument("--ell-count", type=int, default=40)
    p_ls.add_argument("--m-list", type=_int_list, default=(1, 3, 5))
    return parser


_FLAG_MAP = {
    "kernel_family": ("kernel", "family"),
    "rho": ("kernel", "rho"),
    "ell": ("kernel", "ell"),
    "lam": ("kernel", "lam"),
    "eb": ("kernel", "eb"),
    "ell_min": ("kernel", "ell_min"),
    "ell_max": ("kernel", "ell_max"),
    "grid": ("kernel", "grid"),
    "m": ("pi", "m"),
    "points": ("points", "kind"),
    "points_file": ("points", "file"),
    "lo": ("points", "lo"),
    "hi": ("points", "hi"),
    "seed": ("points", "seed"),
    "measure": ("measure", "kind"),
    "dim": ("measure", "d"),
    "integrand": ("integrand", "name"),
    "data": ("integrand", "file"),
    "zcb_d": ("integrand", "zcb_d"),
    "out": ("output", "out"),
    "weights_csv": ("output", "weights_csv"),
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
    raw.setdefault("command", args.command)

    def put(section: str, key: str, value):
        raw.setdefault(section, {})[key] = value

    for flag, (section, key) in _FLAG_MAP.items():
        value = getattr(args, flag, None)
        if value is not None:
            put(section, key, value)
    if getattr(args, "n", None) is not None:
        raw["ns"] = list(args.n)
    if getattr(args, "seeds", None) is not None:
        raw["seeds"] = list(args.seeds)
    if getattr(args, "method", None) is not None:
        raw["method"] = args.method
    if getattr(args, "pi_empty", None):
        raw.setdefault("pi", {})["type"] = "empty"
    if getattr(args, "data", None) is not None:
        raw.setdefault("integrand", {})["name"] = "file"
    if args.command == "zcb":
        raw.setdefault("integrand", {}).setdefault("name", "zcb")
    return RunConfig.from_dict(raw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "integrate":
            return cmd_integrate(cfg)
        if args.command == "endow":
            return cmd_endow(cfg, args.weights_file, args.uniform_weights)
        if args.command == "posterior":
            return cmd_posterior(cfg, args.grid_lo, args.grid_hi, args.grid_n, args.sigma2)
        if args.command == "toy":
            return cmd_toy(cfg)
        if args.command == "zcb":
            return cmd_zcb(cfg)
        if args.command == "convergence":
            return cmd_convergence(cfg)
        if args.command == "lengthscale-sweep":
            return cmd_lengthscale_sweep(cfg, args.ell_lo, args.ell_hi, args.ell_count, args.m_list)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, DimensionMismatch, UnsupportedCombination) as exc:
        _fail(type(exc).__name__, str(exc), 2)
    except CubatureError as exc:
        _fail(type(exc).__name__, str(exc), 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
