"""Command-line front end.

Every run echoes its full configuration (plus the package version) into the
output directory, artifacts contain no timestamps, and all randomness flows
from --seed, so a rerun with the same flags is byte-identical.

Exit codes:
  0  success (for signtest: p < 0.05)
  1  signtest ran but the difference is not significant (p >= 0.05)
  2  input could not be parsed (bad CSV/JSON, bad usage)
  3  invalid parameter value
  4  infeasible request (degenerate data, folds exceeding the minority,
     too little data, zero certainties)
  5  theory verification failed
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from ._version import __version__
from .baselines import make_oversampler
from .classifiers import make_classifier
from .dataset import load_csv, minmax_scaled, save_csv, stratified_folds
from .errors import (
    DegenerateDatasetError,
    InfeasibleError,
    ParameterError,
    ParseError,
    VerificationError,
    ZeroCertaintyError,
)
from .evaluation import DEFAULT_K_GRID, cross_validate, sweep_k_delta, wilcoxon_signed_rank
from .sampling import WeightTable
from .theory import run_verification
from .validation import derive_seed

EXIT_PARSE = 2
EXIT_PARAMETER = 3
EXIT_INFEASIBLE = 4
EXIT_VERIFICATION = 5

_METHODS = ("cgmos", "dup", "smote", "borderline_smote", "adasyn")
_CLASSIFIERS = ("b_kde", "knn")


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as exc:
            _fail(exc, EXIT_PARSE)
        except ParameterError as exc:
            _fail(exc, EXIT_PARAMETER)
        except (InfeasibleError, DegenerateDatasetError, ZeroCertaintyError) as exc:
            _fail(exc, EXIT_INFEASIBLE)
        except VerificationError as exc:
            _fail(exc, EXIT_VERIFICATION)

    return wrapper


def _fail(exc: Exception, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _parse_label_col(text: str | None):
    if text is None:
        return None
    stripped = text.strip()
    if stripped.lstrip("+-").isdigit():
        return int(stripped)
    return text


def _load_dataset(input_path: str, label_col: str | None, minority_label: str | None, scale: bool):
    d = load_csv(input_path, label_column=_parse_label_col(label_col), minority_label=minority_label)
    return minmax_scaled(d) if scale else d


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cell(x: float) -> str:
    return repr(float(x))


def _write_weights_csv(path: Path, table: WeightTable) -> None:
    lines = ["index,weight,probability"]
    for i in range(table.weights.size):
        lines.append(f"{i},{_cell(table.weights[i])},{_cell(table.probabilities[i])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_roc_csv(path: Path, curve) -> None:
    lines = ["threshold,fpr,tpr"]
    for (fpr, tpr), thr in zip(curve.points, curve.thresholds):
        lines.append(f"{_cell(thr)},{_cell(fpr)},{_cell(tpr)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _config_echo(command: str, **params) -> dict:
    cfg = {"command": command, "version": __version__}
    cfg.update(params)
    return cfg


# Flag groups shared across commands.

def _data_options(fn):
    fn = click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Input CSV (header row; label column selected by --label-col).")(fn)
    fn = click.option("--label-col", default=None, help="Label column name or 0-based index (default: last column).")(fn)
    fn = click.option("--minority-label", default=None, help="Treat this label as the minority class (default: the rarer label).")(fn)
    fn = click.option("--scale/--no-scale", default=False, help="Min-max scale features to [0,1] before anything else.")(fn)
    return fn


def _sampler_options(fn):
    fn = click.option("--n-synthetic", default=None, type=int, help="Exact number of synthetic samples (overrides --k-factor).")(fn)
    fn = click.option("--k-factor", default=None, type=float, help="Synthesize round(k * class gap) samples (default 1.0 = balance).")(fn)
    fn = click.option("--q", default=5, type=int, show_default=True, help="Neighbor count for the adaptive bandwidth.")(fn)
    fn = click.option("--sigma", default=1.0, type=float, show_default=True, help="Bandwidth scale factor.")(fn)
    fn = click.option("--k-interp", default=5, type=int, show_default=True, help="Minority neighbors considered for interpolation.")(fn)
    fn = click.option("--k-danger", default=5, type=int, show_default=True, help="Neighborhood size for borderline detection.")(fn)
    fn = click.option("--seed-pool", default="all_samples", type=click.Choice(["all_samples", "minority_only"]), show_default=True, help="Candidate seed rows for the certainty-guided method.")(fn)
    fn = click.option("--refresh-weights/--no-refresh-weights", default=False, help="Recompute certainty weights in installments during synthesis.")(fn)
    return fn


def _common_output(fn):
    fn = click.option("--seed", default=0, type=int, show_default=True, help="Master RNG seed; all randomness derives from it.")(fn)
    fn = click.option("--out", required=True, envvar="CGMOS_OUT", type=click.Path(file_okay=False), help="Output directory (env fallback: CGMOS_OUT).")(fn)
    return fn


def _sampler_params(n_synthetic, k_factor, q, sigma, k_interp, k_danger, seed_pool, refresh_weights, seed):
    return dict(
        n_synthetic=n_synthetic,
        k_factor=k_factor if k_factor is not None else 1.0,
        q=q,
        sigma=sigma,
        k_interp=k_interp,
        k_danger=k_danger,
        seed_pool=seed_pool,
        refresh_weights=refresh_weights,
        random_state=seed,
    )


@click.group()
@click.version_option(version=__version__, prog_name="cgmos")
def main():
    """Certainty guided minority oversampling: resampling, evaluation, sweeps,
    theory verification, and paired significance testing."""


@main.command()
@_data_options
@click.option("--method", default="cgmos", type=click.Choice(_METHODS), show_default=True)
@_sampler_options
@_common_output
@_guarded
def resample(input_path, label_col, minority_label, scale, method, n_synthetic, k_factor, q, sigma,
             k_interp, k_danger, seed_pool, refresh_weights, seed, out):
    """Oversample a dataset; write resampled.csv, weights.csv, config.json."""
    d = _load_dataset(input_path, label_col, minority_label, scale)
    params = _sampler_params(n_synthetic, k_factor, q, sigma, k_interp, k_danger,
                             seed_pool, refresh_weights, seed)
    sampler = make_oversampler(method, **params)
    resampled = sampler.resample(d)
    table = sampler.seed_weight_table(d)
    out_path = _out_dir(out)
    save_csv(resampled, out_path / "resampled.csv")
    _write_weights_csv(out_path / "weights.csv", table)
    cfg = _config_echo(
        "resample", input=str(input_path), label_col=label_col, minority_label=minority_label,
        scale=scale, method=method, seed=seed, out=str(out),
        **{k: v for k, v in params.items() if k != "random_state"},
    )
    _write_json(out_path / "config.json", cfg)
    click.echo(
        f"wrote {resampled.n - d.n} synthetic samples "
        f"({d.minority_count}/{d.majority_count} -> {resampled.minority_count}/{resampled.majority_count})"
    )


@main.command()
@_data_options
@click.option("--method", default="cgmos", type=click.Choice(_METHODS + ("none",)), show_default=True)
@_sampler_options
@click.option("--classifier", default="b_kde", type=click.Choice(_CLASSIFIERS), show_default=True)
@click.option("--knn-k", default=5, type=int, show_default=True, help="Neighbor count for the knn classifier.")
@click.option("--rounds", default=10, type=int, show_default=True)
@click.option("--folds", default=10, type=int, show_default=True)
@_common_output
@_guarded
def evaluate(input_path, label_col, minority_label, scale, method, n_synthetic, k_factor, q, sigma,
             k_interp, k_danger, seed_pool, refresh_weights, classifier, knn_k, rounds, folds, seed, out):
    """Cross-validate one method/classifier pair; write report.json + roc.csv."""
    d = _load_dataset(input_path, label_col, minority_label, scale)
    params = _sampler_params(n_synthetic, k_factor, q, sigma, k_interp, k_danger,
                             seed_pool, refresh_weights, seed)
    sampler = make_oversampler(method, **params)
    clf = make_classifier(classifier, q=q, sigma=sigma, k=knn_k)
    plan = stratified_folds(d, rounds, folds, derive_seed(seed, "plan"))
    cfg = _config_echo(
        "evaluate", input=str(input_path), label_col=label_col, minority_label=minority_label,
        scale=scale, method=method, classifier=classifier, knn_k=knn_k, rounds=rounds,
        folds=folds, seed=seed, out=str(out),
        **{k: v for k, v in params.items() if k != "random_state"},
    )
    report = cross_validate(d, sampler, clf, plan, master_seed=seed, config_echo=cfg)
    out_path = _out_dir(out)
    _write_json(out_path / "report.json", report.to_dict())
    _write_roc_csv(out_path / "roc.csv", report.roc)
    _write_json(out_path / "config.json", cfg)
    click.echo(
        f"auc={report.auc:.6f} over {report.folds_completed} folds"
        + (f" ({report.folds_failed} failed)" if report.folds_failed else "")
    )


@main.command()
@_data_options
@click.option("--method", "methods", multiple=True, type=click.Choice(_METHODS + ("none",)),
              default=("cgmos", "smote"), show_default=True, help="Repeatable; one curve per method.")
@_sampler_options
@click.option("--k-values", default=None, help="Comma-separated k grid (default 0.5,1.0,...,5.0).")
@click.option("--classifier", default="b_kde", type=click.Choice(_CLASSIFIERS), show_default=True)
@click.option("--knn-k", default=5, type=int, show_default=True)
@click.option("--rounds", default=10, type=int, show_default=True)
@click.option("--folds", default=10, type=int, show_default=True)
@_common_output
@_guarded
def sweep(input_path, label_col, minority_label, scale, methods, n_synthetic, k_factor, q, sigma,
          k_interp, k_danger, seed_pool, refresh_weights, k_values, classifier, knn_k, rounds,
          folds, seed, out):
    """Mean AUC per (method, k); k scales the class gap. Writes sweep.csv."""
    d = _load_dataset(input_path, label_col, minority_label, scale)
    if k_values is None:
        ks = list(DEFAULT_K_GRID)
    else:
        try:
            ks = [float(tok) for tok in k_values.split(",") if tok.strip()]
        except ValueError:
            raise ParameterError(f"--k-values must be comma-separated numbers, got {k_values!r}") from None
    params = _sampler_params(n_synthetic, k_factor, q, sigma, k_interp, k_danger, seed_pool,
                             refresh_weights, seed)
    samplers = {name: make_oversampler(name, **params) for name in methods}
    clf = make_classifier(classifier, q=q, sigma=sigma, k=knn_k)
    plan = stratified_folds(d, rounds, folds, derive_seed(seed, "plan"))
    rows = sweep_k_delta(d, samplers, clf, plan, k_values=ks, master_seed=seed)
    out_path = _out_dir(out)
    lines = ["method,k,auc"] + [f"{r['method']},{_cell(r['k'])},{_cell(r['auc'])}" for r in rows]
    (out_path / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfg = _config_echo(
        "sweep", input=str(input_path), label_col=label_col, minority_label=minority_label,
        scale=scale, methods=list(methods), k_values=ks, classifier=classifier, knn_k=knn_k,
        rounds=rounds, folds=folds, seed=seed, out=str(out),
        **{k: v for k, v in params.items() if k not in ("random_state", "n_synthetic", "k_factor")},
    )
    _write_json(out_path / "config.json", cfg)
    click.echo(f"wrote {len(rows)} sweep rows")


@main.command("verify-theory")
@click.option("--n-datasets", default=100, type=int, show_default=True)
@click.option("--q", default=5, type=int, show_default=True)
@click.option("--sigma", default=1.0, type=float, show_default=True)
@click.option("--fixture/--no-fixture", default=True, show_default=True,
              help="Also verify on the built-in two-Gaussian fixture.")
@_common_output
@_guarded
def verify_theory(n_datasets, q, sigma, fixture, seed, out):
    """Check the gain identities and the expected-gain bound; write certificate.json."""
    certificate = run_verification(
        n_datasets=n_datasets, q=q, sigma=sigma, seed=seed, include_fixture=fixture
    )
    certificate["config"] = _config_echo(
        "verify-theory", n_datasets=n_datasets, q=q, sigma=sigma, fixture=fixture,
        seed=seed, out=str(out),
    )
    out_path = _out_dir(out)
    _write_json(out_path / "certificate.json", certificate)
    if not certificate["passed"]:
        raise VerificationError(
            "failed checks: " + ", ".join(certificate["failures"])
        )
    click.echo(f"all checks passed on {len(certificate['datasets'])} datasets")


@main.command()
@click.argument("report_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("report_b", type=click.Path(exists=True, dir_okay=False))
@_guarded
def signtest(report_a, report_b):
    """Wilcoxon signed-rank test over paired per-fold AUCs of two reports.

    Exit code 0 means p < 0.05, exit code 1 means not significant.
    """
    aucs = []
    shapes = []
    for path in (report_a, report_b):
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict) or "folds_detail" not in doc:
            raise ParseError(f"{path}: not an evaluation report (missing folds_detail)")
        shapes.append((doc.get("rounds"), doc.get("folds")))
        aucs.append({
            (rec["round"], rec["fold"]): rec["auc"]
            for rec in doc["folds_detail"]
            if not rec.get("failed")
        })
    if shapes[0] != shapes[1]:
        raise ParameterError(f"fold structures differ: {shapes[0]} vs {shapes[1]}")
    common = sorted(aucs[0].keys() & aucs[1].keys())
    a = [aucs[0][key] for key in common]
    b = [aucs[1][key] for key in common]
    result = wilcoxon_signed_rank(a, b)
    click.echo(
        f"statistic={result.statistic} p_value={result.p_value} "
        f"n={result.n_used} method={result.method}"
    )
    sys.exit(0 if result.p_value < 0.05 else 1)


if __name__ == "__main__":
    main()
