# app/cli.py
"""
Línea de comandos del laboratorio: sample, soliton, model, universality,
verify, goodset y serve
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from .adapters.output import read_json, write_csv, write_dict_rows, write_field, write_json
from .core.config import settings
from .core.errors import ConfigError, LabError
from .models.field import PrecisionPolicy
from .models.report import RunConfig
from .models.spectral import Distribution, RandomEnsembleConfig, SpectralData

logger = logging.getLogger(__name__)

LIST_FIELDS = {"n_values": int, "t_values": float}
FLAG_TO_FIELD = {
    "n": "n_values", "mu": "amplitude", "v": "velocity", "t": "t_values",
    "data": "data_file", "mu_mean": "mu_mean",
}


def _validation_message(e: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())


def _from_file(path: str) -> Dict[str, Any]:
    """Archivo clave=valor; claves en mayúsculas o minúsculas, listas separadas por comas"""
    if not Path(path).exists():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, Any] = {}
    for key, raw in dotenv_values(path).items():
        if raw is None:
            continue
        name = key.strip().lower().replace("-", "_")
        name = FLAG_TO_FIELD.get(name, name)
        if name in LIST_FIELDS:
            values[name] = [LIST_FIELDS[name](v) for v in raw.replace(",", " ").split()]
        else:
            values[name] = raw
    return values


COMMAND_DEFAULTS = {
    "universality": {"n_values": [25, 50, 100], "realizations": 10},
    "goodset": {"n_values": [50, 200, 800]},
}


def build_config(args: argparse.Namespace) -> RunConfig:
    """Valores por defecto del comando, luego archivo de configuración, luego flags; y valida"""
    merged: Dict[str, Any] = {"out": settings.OUTPUT_DIR, **COMMAND_DEFAULTS.get(args.command, {})}
    if getattr(args, "config", None):
        merged.update(_from_file(args.config))
    for key, value in vars(args).items():
        if key in ("config", "log_level", "workers", "X", "T") or value is None:
            continue
        merged[FLAG_TO_FIELD.get(key, key)] = value
    if getattr(args, "X", None) is not None:
        merged.update(x_min=args.X, x_max=args.X, points=1)
    if getattr(args, "T", None) is not None:
        merged["t_values"] = [args.T]
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e


def _distribution(text: str) -> Distribution:
    try:
        return Distribution.parse(text)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"invalid distribution '{text}': {e}") from e


def _precision(text: str) -> PrecisionPolicy:
    try:
        return PrecisionPolicy.parse(text)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"invalid precision policy '{text}': {e}") from e


def _ensemble(cfg: RunConfig, n: int) -> RandomEnsembleConfig:
    try:
        return RandomEnsembleConfig(
            case=cfg.case, n=n, amplitude_dist=_distribution(cfg.amplitude),
            velocity_dist=_distribution(cfg.velocity), realizations=cfg.realizations,
            seed=cfg.seed, zeta=cfg.zeta, eta=cfg.eta,
        )
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e


# --- Comandos --------------------------------------------------------------

def cmd_sample(cfg: RunConfig) -> List[Path]:
    from .core.spectral import sample_ensemble

    written = []
    for n in cfg.n_values:
        ensemble = _ensemble(cfg, n)
        for r in range(ensemble.realizations):
            data = sample_ensemble(ensemble, r)
            path = Path(cfg.out) / f"sample_{cfg.case.lower()}_N{n}_seed{cfg.seed}_r{r}.json"
            written.append(write_json(path, data.to_json_dict()))
    print(f"✅ {len(written)} archivo(s) de datos espectrales en {cfg.out}")
    return written


def cmd_soliton(cfg: RunConfig) -> List[Path]:
    from .core.soliton import check_extremality, evaluate_field, max_deviation, oracle_field

    if not cfg.data_file:
        raise ConfigError("--data is required for the soliton command")
    data = SpectralData.from_json_dict(read_json(cfg.data_file))
    precision = _precision(cfg.precision)
    field = evaluate_field(data, cfg.x_grid, cfg.t_values, precision)
    stem = Path(cfg.data_file).stem
    ext = "json" if cfg.format == "json" else "csv"
    written = [write_field(Path(cfg.out) / f"soliton_{stem}.{ext}", field, cfg.format)]

    summary: Dict[str, Any] = {"n": data.n, "grid": field.metadata()}
    if data.n:
        value, peak, bits = check_extremality(data)
        summary.update(abs_psi_00=value, peak=peak, bits=bits)
    if cfg.compare_oracle:
        # el oráculo siempre escala: su condición crece con N y con |x|
        oracle = oracle_field(data, cfg.x_grid, cfg.t_values, PrecisionPolicy.auto(settings.max_precision))
        summary["oracle_max_deviation"] = max_deviation(field, oracle)
        print(f"🔍 Darboux vs oráculo: {summary['oracle_max_deviation']:.3e}")
    written.append(write_json(Path(cfg.out) / f"soliton_{stem}_summary.json", summary))
    return written


def cmd_model(cfg: RunConfig) -> List[Path]:
    from .core.model_problems import model_solution
    from .models.problems import ModelParams

    mu_mean = cfg.mu_mean if cfg.mu_mean is not None else _distribution(cfg.amplitude).mean
    base = ModelParams(case=cfg.case, zeta=cfg.zeta, mu_mean=mu_mean if cfg.case == "PV" else 2.0)
    rows = []
    for T in cfg.t_values:
        for X in cfg.x_grid:
            point = model_solution(base.at(X, T), cfg.modes)
            d = point.diagnostics
            rows.append([X, T, point.psi[0], point.psi[1], abs(point.value), point.mass, d.M, d.residual])
    header = ("X", "T", "re_psi", "im_psi", "abs_psi", "mass", "modes_M", "residual")
    path = Path(cfg.out) / f"model_{cfg.case.lower()}.csv"
    written = [write_csv(path, header, rows)]

    peak = model_solution(base.at(0.0, 0.0), cfg.modes)
    diagnostics = {
        "case": cfg.case, "zeta": cfg.zeta, "mu_mean": base.mu_mean,
        "abs_psi_00": abs(peak.value), "psi_00": peak.psi, "mass_00": peak.mass,
        "solver": peak.diagnostics.model_dump(),
    }
    written.append(write_json(Path(cfg.out) / f"model_{cfg.case.lower()}_diagnostics.json", diagnostics))
    print(f"📊 |Ψ(0,0)| = {abs(peak.value):.10f}")
    return written


def cmd_universality(cfg: RunConfig) -> List[Path]:
    from .core.experiments import convergence_table, run_jump_convergence, run_universality

    ensemble = _ensemble(cfg, cfg.n_values[0])
    report = run_universality(ensemble, cfg.n_values, cfg.x_grid, cfg.t_values[0], cfg.modes,
                              _precision(cfg.precision))
    out = Path(cfg.out)
    tag = cfg.case.lower()
    written = [
        write_csv(out / f"universality_{tag}.csv", ("case", "N", "realization", "seed", "l2_error"),
                  ([cfg.case, r.N, r.realization, r.seed, r.l2_error] for r in report.records)),
        write_dict_rows(out / f"universality_{tag}_summary.csv", report.summary(),
                        ("case", "N", "mean_error", "std_error")),
        write_dict_rows(out / f"universality_{tag}_convergence.csv", convergence_table(report),
                        ("N", "mean_error", "rate")),
    ]
    profile = report.profile
    if "abs_psi_N_mean" in profile:
        written.append(write_csv(out / f"universality_{tag}_profile.csv", ("X", "abs_psi_model", "abs_psi_N_mean"),
                                 zip(profile["X"], profile["abs_psi_model"], profile["abs_psi_N_mean"])))
    if cfg.jump_check:
        rows = run_jump_convergence(ensemble, cfg.n_values)
        written.append(write_dict_rows(out / f"universality_{tag}_jump.csv", rows,
                                       ("N", "mean_discrepancy", "std_discrepancy", "count")))
    written.append(write_json(out / f"universality_{tag}_report.json", report.model_dump()))
    for row in report.summary():
        print(f"📉 N={row['N']}: error medio {row['mean_error']:.4e} (±{row['std_error']:.2e})")
    return written


def cmd_verify(cfg: RunConfig) -> List[Path]:
    from .core.painleve import VERIFY_HEADER, run_verification

    rows, diagnostics = run_verification(cfg.modes)
    out = Path(cfg.out)
    written = [
        write_dict_rows(out / "verify.csv", rows, VERIFY_HEADER),
        write_json(out / "verify_diagnostics.json", diagnostics),
    ]
    if diagnostics["errors"]:
        print(f"⚠️ {len(diagnostics['errors'])} comprobación(es) fallaron, ver verify_diagnostics.json")
    return written


def cmd_goodset(cfg: RunConfig) -> List[Path]:
    from .core.experiments import good_set_probe

    delta = cfg.delta if cfg.delta is not None else settings.GOODSET_DELTA
    zeta = cfg.zeta if cfg.case == "PV" else None
    rows = []
    for n in cfg.n_values:
        stats = good_set_probe(n, delta, zeta, _distribution(cfg.amplitude), cfg.trials, cfg.seed,
                               _distribution(cfg.velocity))
        rows.append(stats.model_dump())
    path = Path(cfg.out) / f"goodset_{cfg.case.lower()}.csv"
    return [write_dict_rows(path, rows, ("N", "delta", "trials", "omega_fail", "partial_sum_fail", "uniform_fail"))]


def cmd_serve(cfg: RunConfig) -> List[Path]:
    import uvicorn

    print(f"📡 API: http://{settings.API_HOST}:{settings.API_PORT}")
    uvicorn.run("app.main:app", host=settings.API_HOST, port=settings.API_PORT,
                reload=settings.API_DEBUG, log_level=settings.LOG_LEVEL.lower())
    return []


COMMANDS = {
    "sample": cmd_sample,
    "soliton": cmd_soliton,
    "model": cmd_model,
    "universality": cmd_universality,
    "verify": cmd_verify,
    "goodset": cmd_goodset,
    "serve": cmd_serve,
}


# --- Parser ----------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="archivo clave=valor; los flags tienen prioridad")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--modes", type=int, help="truncación M (potencia de dos); estricta si se indica")
    p.add_argument("--precision", help="53, 256, auto o auto:512")
    p.add_argument("--workers", type=int)
    p.add_argument("--log-level", dest="log_level")


def _ensemble_flags(p: argparse.ArgumentParser):
    p.add_argument("--case", type=str.upper, choices=("PIII", "PV"))
    p.add_argument("--zeta", type=float)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--mu", help="ley de amplitudes, p.ej. chi2:4")
    p.add_argument("--v", help="ley de velocidades, p.ej. gauss:0:15")
    p.add_argument("--realizations", type=int)
    p.add_argument("--eta", type=float, help="fase común de los parámetros de Darboux")


def _grid_flags(p: argparse.ArgumentParser):
    p.add_argument("--x-min", dest="x_min", type=float)
    p.add_argument("--x-max", dest="x_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--t", type=float, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soliton-lab", description="Laboratorio de solitones extremales y Painlevé")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="muestra datos espectrales aleatorios")
    _common(p)
    _ensemble_flags(p)

    p = sub.add_parser("soliton", help="evalúa ψ_N desde un archivo de datos")
    _common(p)
    _grid_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--compare-oracle", dest="compare_oracle", action="store_true", default=None)

    p = sub.add_parser("model", help="resuelve el problema modelo PIII / PV")
    _common(p)
    _grid_flags(p)
    p.add_argument("--case", type=str.upper, choices=("PIII", "PV"))
    p.add_argument("--zeta", type=float)
    p.add_argument("--mu-mean", dest="mu_mean", type=float)
    p.add_argument("--X", type=float, help="un solo punto X (atajo de la malla)")
    p.add_argument("--T", type=float, help="un solo tiempo T")

    p = sub.add_parser("universality", help="error L2 de Ψ_N frente al perfil modelo")
    _common(p)
    _ensemble_flags(p)
    _grid_flags(p)
    p.add_argument("--jump-check", dest="jump_check", action="store_true", default=None)

    p = sub.add_parser("verify", help="residuos de NLS, PIII, PV y Λ")
    _common(p)

    p = sub.add_parser("goodset", help="frecuencias Monte-Carlo de los conjuntos buenos")
    _common(p)
    _ensemble_flags(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("serve", help="inicia la API HTTP")
    _common(p)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, (args.log_level or settings.LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    if args.workers:
        settings.WORKERS = args.workers

    try:
        cfg = build_config(args)
        COMMANDS[cfg.command](cfg)
    except LabError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"❌ ConfigError: {_validation_message(e)}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
