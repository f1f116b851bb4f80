"""Command-line front end.

    farnb benchmark --data a.csv b.csv --methods nb,rnb,farnb --out results/
    farnb ablation  --data a.csv --out results/
    farnb train     --data a.csv --out model.json
    farnb predict   --model model.json --data b.csv --out predictions.txt

Options may also come from ``--config FILE`` holding ``key = value`` lines
(keys are option names without the leading dashes); flags given on the
command line win.  Exit status: 0 success, 1 configuration error, 2 data
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .augment import fit_pipeline, predict_pipeline
from .autoencoder import AETrainConfig
from .classifiers import FARNB, METHOD_NAMES, make_method
from .dataset import load_csv
from .errors import ConfigError, DataError, NumericError
from .evaluation import aggregate_report, run_cv, stratified_folds
from .serialize import load_pipeline, save_pipeline
from .weights import TrainConfig

log = logging.getLogger("farnb")

ABLATION_ARMS = {"rnb": "original_features", "shrink": "baseline", "farnb": "farnb"}
_SWITCHES = {"no-figures"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _kh(value: str):
    if value == "auto":
        return "auto"
    try:
        k, h = (int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or 'K,H', got {value!r}") from None
    return k, h


def _method_list(value: str):
    return [m.strip() for m in value.split(",") if m.strip()]


def _add_model_options(p):
    p.add_argument("--class-col", default=None, help="class column (default: last column)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kh", type=_kh, default="auto", help="'auto' or K,H")
    p.add_argument("--mask-ratio", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=1000, help="auto-encoder epochs")
    p.add_argument("--ae-lr", type=float, default=0.5)
    p.add_argument("--nb-lr", type=float, default=0.1)
    p.add_argument("--max-iter", type=int, default=500, help="weight-learning iterations")
    p.add_argument("--max-bins", type=int, default=10)
    p.add_argument("--inner-folds", type=int, default=3)
    p.add_argument("--config", default=None, help="key = value option file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="farnb", description="Feature-augmented regularized naive Bayes")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("benchmark", "cross-validated comparison of methods"),
                        ("ablation", "original features vs shrink-only codes vs augmented")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--data", nargs="+", required=True)
        if name == "benchmark":
            p.add_argument("--methods", type=_method_list, default=["nb", "rnb", "farnb"])
            p.add_argument("--reference", default=None)
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--out", default="results")
        p.add_argument("--no-figures", action="store_true")
        _add_model_options(p)

    p = sub.add_parser("train", help="fit one pipeline and save it")
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="model.json")
    _add_model_options(p)

    p = sub.add_parser("predict", help="label a CSV with a saved pipeline")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--class-col", default=None)
    p.add_argument("--out", default=None, help="predictions file (default: stdout)")
    p.add_argument("--config", default=None)
    return parser


def read_config(path) -> list[str]:
    """Turn a ``key = value`` file into argument tokens."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    tokens = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key in _SWITCHES:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(f"--{key}")
        elif key == "data":
            tokens += ["--data", *value.split()]
        else:
            tokens += [f"--{key}", value]
    return tokens


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # config tokens go first so explicit flags override them
        argv = [argv[0], *read_config(args.config), *argv[1:]]
        args = parser.parse_args(argv)
    return args


def _configs(args):
    ae_cfg = AETrainConfig(mask_ratio=args.mask_ratio, epochs=args.epochs,
                           learning_rate=args.ae_lr, seed=args.seed)
    nb_cfg = TrainConfig(max_iterations=args.max_iter, learning_rate=args.nb_lr, seed=args.seed)
    return ae_cfg, nb_cfg


def _method(name, args):
    ae_cfg, nb_cfg = _configs(args)
    return make_method(name, kh=args.kh, ae_cfg=ae_cfg, weight_cfg=nb_cfg,
                       inner_folds=args.inner_folds, seed=args.seed, max_bins=args.max_bins)


def _load_all(args):
    datasets = {}
    for path in args.data:
        name = Path(path).stem
        if name in datasets:
            raise ConfigError(f"two datasets named {name!r}")
        datasets[name] = load_csv(path, args.class_col)
    return datasets


def _cross_validate(args, methods):
    if args.folds < 2:
        raise ConfigError("--folds must be at least 2")
    unknown = [m for m in methods if m not in METHOD_NAMES]
    if unknown:
        raise ConfigError(f"unknown methods {unknown}; choose from {', '.join(METHOD_NAMES)}")
    results = {}
    for name, d in _load_all(args).items():
        plan = stratified_folds(d, args.folds, args.seed)
        results[name] = {}
        for method in methods:
            start = time.perf_counter()
            acc = run_cv(d, _method(method, args), plan)
            results[name][method] = acc
            log.info("%s %s mean=%.4f (%.1fs)", name, method, sum(acc) / len(acc),
                     time.perf_counter() - start)
    return results


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def cmd_benchmark(args) -> int:
    methods = list(dict.fromkeys(args.methods))
    if not methods:
        raise ConfigError("empty method list")
    reference = args.reference or ("farnb" if "farnb" in methods else methods[0])
    if reference not in methods:
        raise ConfigError(f"reference {reference!r} is not among the methods")
    results = _cross_validate(args, methods)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, per_method in results.items():
        _write(out / f"{name}.report.tsv", aggregate_report({name: per_method}, reference).to_text())
    report = aggregate_report(results, reference)
    _write(out / "report.tsv", report.to_text())
    _write(out / "summary.tsv", report.summary_text())
    if len(methods) > 1:
        _write(out / "gain.tsv", report.gain_text())
        if not args.no_figures:
            from .plotting import plot_gain, plot_method_means
            against, rows = report.gain_rows()
            plot_gain(rows, reference, against, out / "gain.png")
            plot_method_means(report, out / "accuracy.png")
    return 0


def cmd_ablation(args) -> int:
    results = _cross_validate(args, list(ABLATION_ARMS))
    report = aggregate_report(results, "farnb")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["dataset\t" + "\t".join(ABLATION_ARMS.values())]
    for ds in report.datasets:
        lines.append(ds + "".join(f"\t{report.means[ds, m]:.10f}" for m in ABLATION_ARMS))
    lines.append("AVG" + "".join(f"\t{report.average(m):.10f}" for m in ABLATION_ARMS))
    _write(out / "ablation.tsv", "\n".join(lines) + "\n")
    _write(out / "ablation.report.tsv", report.to_text())
    if not args.no_figures:
        from .plotting import plot_method_means
        plot_method_means(report, out / "ablation.png", labels=ABLATION_ARMS)
    return 0


def cmd_train(args) -> int:
    d = load_csv(args.data, args.class_col)
    ae_cfg, nb_cfg = _configs(args)
    method = FARNB(args.kh, ae_cfg, nb_cfg, args.inner_folds, args.seed, args.max_bins)
    k, h = method.choose_kh(d)
    model = fit_pipeline(d, k, h, ae_cfg, nb_cfg, max_bins=args.max_bins)
    save_pipeline(args.out, model)
    log.info("trained k=%d h=%d on %d instances; saved %s", k, h, d.n, args.out)
    return 0


def cmd_predict(args) -> int:
    model = load_pipeline(args.model)
    d = load_csv(args.data, args.class_col, schema=model.normalizer.schema, classes=model.classes)
    predicted = predict_pipeline(model, d)
    text = "".join(f"{model.classes[i]}\n" for i in predicted)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if d.labels is not None:
        log.info("accuracy %.4f on %d labelled rows", float((predicted == d.labels).mean()), d.n)
    return 0


COMMANDS = {"benchmark": cmd_benchmark, "ablation": cmd_ablation,
            "train": cmd_train, "predict": cmd_predict}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except (DataError, OSError) as exc:
        log.error("data error: %s", exc)
        return 2
    except NumericError as exc:
        log.error("numeric failure: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
