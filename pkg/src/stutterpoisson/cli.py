"""Batch command line: fit count histograms, classify laws, simulate, dump PMFs.

Subcommands:

  fit       Read a "count,frequency" histogram, fit the selected models,
            and report expected counts plus the eta goodness-of-fit
            statistic per model (table, JSON, or CSV).
  classify  Read a "value,probability" law and report whether it carries
            batch-Poisson structure, with extracted rates and residual.
  simulate  Draw from a batch-rate law and emit the sampled histogram.
  pmf       Dump a batch-rate law's probability prefix.

Output is deterministic: fixed field order and floats printed with 10
significant digits, so identical inputs give byte-identical reports.

Expected counts are tabulated at a fixed number of decimals (default one,
like published claim-count tables) and the eta statistic is computed from
the tabulated values; pass --round-expected none for full precision.
"""

import argparse
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .characterize import Pmf, classify
from .distribution import GspdParams, SpdParams, pmf, sample
from .estimate import CountHistogram, FitResult, fit_nbd, fit_poisson, fit_spd, sample_moments
from .gof import GofReport, gof_report

__all__ = ["RunConfig", "ModelRun", "RunBundle", "ingest", "run", "main"]

DEFAULT_MODELS = ("poisson", "spd:3", "spd:4", "nbd")

_MODEL_PARAM_COUNT = {"poisson": 1, "nbd": 2}


@dataclass(frozen=True)
class RunConfig:
    """One batch invocation: input, model selection, binning, output shape."""

    input: str
    models: tuple = DEFAULT_MODELS
    bins: tuple | None = None
    tail: bool = True
    fmt: str = "table"
    seed: int | None = None
    clamp_negative: bool = False
    round_expected: int | None = 1

    def __post_init__(self):
        if not self.models:
            raise ValueError("select at least one model")
        for name in self.models:
            _parse_model(name)
        if self.bins is not None:
            lo, hi = self.bins
            if lo < 0 or hi < lo:
                raise ValueError(f"bin range {lo}..{hi} is empty or negative")
        if self.fmt not in ("table", "json", "csv"):
            raise ValueError(f"unknown output format {self.fmt!r}")


@dataclass(frozen=True)
class ModelRun:
    """One model's outcome inside a bundle; `error` set when the fit failed."""

    name: str
    fit: FitResult | None = None
    report: GofReport | None = None
    expected: tuple | None = None
    labels: tuple | None = None
    error: str | None = None


@dataclass(frozen=True)
class RunBundle:
    hist: CountHistogram
    moments: tuple
    models: tuple
    config: RunConfig

    @property
    def ok(self) -> bool:
        return all(m.error is None for m in self.models)


def _parse_model(name: str) -> tuple:
    """Split a model selector into (kind, order)."""
    if name == "poisson":
        return "poisson", None
    if name == "nbd":
        return "nbd", None
    if name.startswith("spd:"):
        try:
            r = int(name[4:])
        except ValueError:
            raise ValueError(f"bad model order in {name!r}") from None
        if not 2 <= r <= 8:
            raise ValueError(f"spd order must lie in 2..8, got {r}")
        return "spd", r
    raise ValueError(f"unknown model {name!r} (choose poisson, nbd, or spd:R)")


def _open_input(path: str):
    if path == "-":
        return sys.stdin, False
    return open(path, encoding="utf-8"), True


def _split_row(line: str, delim: str | None) -> tuple:
    if delim is None:
        delim = "\t" if "\t" in line else ","
    return tuple(field.strip() for field in line.split(delim)), delim


def _parse_rows(handle, value_type: str):
    """Yield (line_number, value, number) rows from count/probability files."""
    delim = None
    saw_data = False
    for lineno, raw in enumerate(handle, start=1):
        line = raw.strip()
        if not line:
            continue
        fields, delim = _split_row(line, delim)
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected 2 fields, got {len(fields)}")
        try:
            value = int(fields[0])
        except ValueError:
            if not saw_data:
                continue  # header row
            raise ValueError(f"line {lineno}: bad count {fields[0]!r}") from None
        try:
            number = int(fields[1]) if value_type == "int" else float(fields[1])
        except ValueError:
            raise ValueError(f"line {lineno}: bad {value_type} value {fields[1]!r}") from None
        saw_data = True
        yield lineno, value, number


def ingest(path: str) -> CountHistogram:
    """Read a delimiter-separated "count,frequency" histogram file.

    Commas or tabs, optional header, blank lines ignored. Counts must be
    distinct nonnegative integers and frequencies nonnegative integers;
    violations report the offending line number.
    """
    handle, owned = _open_input(path)
    try:
        bins = {}
        for lineno, count, freq in _parse_rows(handle, "int"):
            if count < 0:
                raise ValueError(f"line {lineno}: negative count {count}")
            if freq < 0:
                raise ValueError(f"line {lineno}: negative frequency {freq}")
            if count in bins:
                raise ValueError(f"line {lineno}: duplicate count {count}")
            bins[count] = freq
        if not bins:
            raise ValueError(f"no data rows in {path!r}")
        return CountHistogram(bins)
    finally:
        if owned:
            handle.close()


def ingest_pmf(path: str) -> Pmf:
    """Read a "value,probability" law; renormalizes drift below 1e-6."""
    handle, owned = _open_input(path)
    try:
        probs = {}
        for lineno, value, prob in _parse_rows(handle, "float"):
            if value < 0:
                raise ValueError(f"line {lineno}: negative value {value}")
            if prob < 0:
                raise ValueError(f"line {lineno}: negative probability {prob}")
            if value in probs:
                raise ValueError(f"line {lineno}: duplicate value {value}")
            probs[value] = prob
        if not probs:
            raise ValueError(f"no data rows in {path!r}")
        dense = np.zeros(max(probs) + 1)
        for value, prob in probs.items():
            dense[value] = prob
        total = dense.sum()
        if abs(total - 1.0) >= 1e-6:
            raise ValueError(f"probabilities sum to {total:.8f}, not 1")
        if total != 1.0:
            print(f"note: renormalizing input mass {total:.10f}", file=sys.stderr)
            dense /= total
        return Pmf(tuple(dense))
    finally:
        if owned:
            handle.close()


def _fit_one(hist: CountHistogram, name: str, clamp: bool) -> FitResult:
    kind, order = _parse_model(name)
    if kind == "poisson":
        return fit_poisson(hist)
    if kind == "nbd":
        return fit_nbd(hist)
    return fit_spd(hist, order, clamp_negative=clamp)


def run(config: RunConfig) -> RunBundle:
    """Fit every selected model and assemble its goodness-of-fit report.

    One model failing (for example NBD on equi-dispersed data) is recorded
    as an error entry without aborting the rest.
    """
    hist = ingest(config.input)
    lo, hi = config.bins if config.bins is not None else (0, hist.max_count)
    observed_full = hist.frequencies(upto=max(hi, hist.max_count))
    observed = observed_full[lo : hi + 1]
    observed_tail = float(observed_full[hi + 1 :].sum())
    n = hist.n
    moments = sample_moments(hist, 4)

    runs = []
    for name in config.models:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # diagnostics carry the same facts
                fit = _fit_one(hist, name, config.clamp_negative)
                prefix = fit.pmf_prefix(hi)
        except (ValueError, OverflowError) as exc:
            runs.append(ModelRun(name=name, error=str(exc)))
            continue
        expected = n * prefix[lo : hi + 1]
        tail = max(n * (1.0 - prefix.sum()), 0.0)
        if config.round_expected is not None:
            expected = np.round(expected, config.round_expected)
            tail = round(tail, config.round_expected)
        labels = [str(i) for i in range(lo, hi + 1)]
        kind, order = _parse_model(name)
        n_params = _MODEL_PARAM_COUNT.get(kind, order or 0)
        try:
            report = gof_report(observed, expected, labels=tuple(labels), n_params=n_params)
        except ValueError as exc:
            runs.append(ModelRun(name=name, fit=fit, error=str(exc)))
            continue
        if config.tail:
            expected = np.append(expected, tail)
            labels.append(f">{hi}")
        runs.append(
            ModelRun(
                name=name,
                fit=fit,
                report=report,
                expected=tuple(expected.tolist()),
                labels=tuple(labels),
            )
        )
    return RunBundle(hist=hist, moments=moments, models=tuple(runs), config=config)


# -- deterministic rendering ------------------------------------------------


def _fmt_float(x: float) -> str:
    return f"{x:.10g}"


def _json_value(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f'"{k}": {_json_value(v)}' for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj)}")


def _params_payload(fit: FitResult):
    if fit.params is None:
        return None
    if isinstance(fit.params, (SpdParams, GspdParams)):
        return {"theta": list(fit.params.theta)}
    return dict(fit.params)


def render_json(bundle: RunBundle) -> str:
    m = bundle.moments
    payload = {
        "n": bundle.hist.n,
        "moments": {"m1": m.raw[0], "c2": m.central[1], "c3": m.central[2], "c4": m.central[3]},
        "models": [],
    }
    for entry in bundle.models:
        if entry.error is not None:
            payload["models"].append({"name": entry.name, "error": entry.error})
            continue
        payload["models"].append(
            {
                "name": entry.name,
                "params": _params_payload(entry.fit),
                "lambda_t": entry.fit.lambda_t,
                "alphas": list(entry.fit.alphas) if entry.fit.alphas else None,
                "expected": list(entry.expected),
                "eta": entry.report.eta,
                "df": entry.report.df,
                "p_value": entry.report.p_value,
                "diagnostics": list(entry.fit.diagnostics),
            }
        )
    return _json_value(payload)


def render_csv(bundle: RunBundle) -> str:
    lines = ["model,bin,observed,expected,eta,df,p_value,error"]
    observed = {label: obs for label, obs, _ in _observed_cells(bundle)}
    for entry in bundle.models:
        if entry.error is not None:
            lines.append(f"{entry.name},,,,,,,{entry.error}")
            continue
        stats = (
            _fmt_float(entry.report.eta),
            str(entry.report.df),
            _fmt_float(entry.report.p_value) if entry.report.p_value is not None else "",
        )
        for label, exp in zip(entry.labels, entry.expected):
            obs = observed.get(label, "")
            lines.append(
                f"{entry.name},{label},{obs},{_fmt_float(exp)},{stats[0]},{stats[1]},{stats[2]},"
            )
    return "\n".join(lines) + "\n"


def _observed_cells(bundle: RunBundle):
    lo, hi = bundle.config.bins if bundle.config.bins is not None else (0, bundle.hist.max_count)
    full = bundle.hist.frequencies(upto=max(hi, bundle.hist.max_count))
    cells = [(str(i), int(full[i]), None) for i in range(lo, hi + 1)]
    if bundle.config.tail:
        cells.append((f">{hi}", int(full[hi + 1 :].sum()), None))
    return cells


def render_table(bundle: RunBundle) -> str:
    observed = _observed_cells(bundle)
    headers = ["model"] + [label for label, _, _ in observed] + ["eta", "df", "p_value"]
    rows = [["observed"] + [str(obs) for _, obs, _ in observed] + ["", "", ""]]
    dec = bundle.config.round_expected
    for entry in bundle.models:
        if entry.error is not None:
            rows.append([entry.name, f"error: {entry.error}"] + [""] * (len(headers) - 2))
            continue
        cells = [f"{e:.{dec}f}" if dec is not None else _fmt_float(e) for e in entry.expected]
        if not bundle.config.tail:
            cells = cells[: len(observed)]
        report = entry.report
        p_txt = f"{report.p_value:.4g}" if report.p_value is not None else ""
        df_txt = str(report.df)
        if report.df_adjusted is not None:
            df_txt += f" ({report.df_adjusted})"
        rows.append([entry.name] + cells + [f"{report.eta:.4f}", df_txt, p_txt])
    widths = [max(len(row[i]) for row in rows + [headers]) for i in range(len(headers))]
    out = []
    for row in [headers] + rows:
        out.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(out) + "\n"


RENDERERS = {"table": render_table, "json": render_json, "csv": render_csv}


# -- subcommands -------------------------------------------------------------


def _cmd_fit(args) -> int:
    bins = _parse_bins(args.bins) if args.bins else None
    config = RunConfig(
        input=args.input,
        models=tuple(args.models.split(",")),
        bins=bins,
        tail=args.tail == "include",
        fmt=args.format,
        seed=args.seed,
        clamp_negative=args.clamp_negative,
        round_expected=_parse_round(args.round_expected),
    )
    bundle = run(config)
    sys.stdout.write(RENDERERS[config.fmt](bundle))
    return 0 if bundle.ok else 1


def _cmd_classify(args) -> int:
    law = ingest_pmf(args.input)
    result = classify(law, args.truncation)
    lines = [f"kind: {result.kind.value}"]
    if result.rates is not None:
        shown = result.rates.theta[:10]
        tail = " ..." if result.rates.r > 10 else ""
        lines.append("rates: " + " ".join(_fmt_float(t) for t in shown) + tail)
        lines.append(f"total_rate: {_fmt_float(result.rates.total)}")
    else:
        lines.append("rates: none")
    lines.append(f"residual: {_fmt_float(result.residual)}")
    if result.note:
        lines.append(f"note: {result.note}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _parse_theta(text: str):
    theta = tuple(float(t) for t in text.split(","))
    return GspdParams(theta) if min(theta) < 0 else SpdParams(theta)


def _cmd_simulate(args) -> int:
    params = _parse_theta(args.theta)
    if not isinstance(params, SpdParams):
        raise ValueError("simulation needs nonnegative rates")
    draws = sample(params, args.draws, args.seed)
    hist = CountHistogram.from_samples(draws) if args.draws else CountHistogram({0: 0})
    sys.stdout.write("count,frequency\n")
    for count in sorted(hist.bins):
        sys.stdout.write(f"{count},{hist.bins[count]}\n")
    return 0


def _cmd_pmf(args) -> int:
    params = _parse_theta(args.theta)
    probs = pmf(params, args.n_max)
    sys.stdout.write("count,probability\n")
    for count, prob in enumerate(probs):
        sys.stdout.write(f"{count},{_fmt_float(prob)}\n")
    return 0


def _parse_bins(text: str) -> tuple:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise ValueError(f"bad bin range {text!r}, expected A..B") from None


def _parse_round(text: str) -> int | None:
    if text == "none":
        return None
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"bad --round-expected {text!r}, expected an integer or 'none'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stutterpoisson",
        description="Fit and probe batch-arrival (stuttering) Poisson count models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit models to a count,frequency histogram")
    fit.add_argument("input", nargs="?", default="-", help="histogram file ('-' for stdin)")
    fit.add_argument("--models", default=",".join(DEFAULT_MODELS))
    fit.add_argument("--bins", default=None, help="explicit bin range A..B")
    fit.add_argument("--tail", choices=("include", "exclude"), default="include")
    fit.add_argument("--format", choices=("table", "json", "csv"), default="table")
    fit.add_argument("--seed", type=int, default=None)
    fit.add_argument("--clamp-negative", action="store_true")
    fit.add_argument("--round-expected", default="1", help="decimals for tabulated counts, or 'none'")
    fit.set_defaults(handler=_cmd_fit)

    cls = sub.add_parser("classify", help="classify a value,probability law")
    cls.add_argument("input", nargs="?", default="-")
    cls.add_argument("--truncation", type=int, default=64, metavar="N")
    cls.set_defaults(handler=_cmd_classify)

    sim = sub.add_parser("simulate", help="sample a batch-rate law into a histogram")
    sim.add_argument("--theta", required=True, help="comma-separated batch rates")
    sim.add_argument("--draws", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(handler=_cmd_simulate)

    dump = sub.add_parser("pmf", help="dump a batch-rate law's probability prefix")
    dump.add_argument("--theta", required=True, help="comma-separated batch rates")
    dump.add_argument("--n-max", type=int, default=20)
    dump.set_defaults(handler=_cmd_pmf)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
