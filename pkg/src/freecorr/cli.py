"""Command-line front end.

Subcommands: moments | cumulants | density | verify | mc | examples.
Every command reads a named model (or raw profile jets), emits a
schema-versioned JSON or CSV payload with floats fixed to 17 significant
digits, and — when writing to a file — renders a matplotlib figure next
to the delimited output.

Exit codes: 0 success, 1 an acceptance-style check failed, 2 configuration
error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import engine, models, montecarlo, verify

SCHEMA = "freecorr/1"
_DEFAULT_SEED = 20260816
_COMMANDS = ("moments", "cumulants", "density", "verify", "mc", "examples")


class ConfigError(Exception):
    """Bad flags, files, or parameter combinations (exit 2)."""


# ----------------------------------------------------------------------
# stable serialization


def format_float(x):
    """17-significant-digit rendering; the same value always prints the same."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps_stable(obj, _ind=0):
    """JSON with deterministic float formatting (insertion-ordered keys)."""
    pad = "  " * _ind
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, Fraction):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {dumps_stable(v, _ind + 1)}'
            for k, v in obj.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        body = ",\n".join(f"{pad}  {dumps_stable(v, _ind + 1)}" for v in obj)
        return "[\n" + body + "\n" + pad + "]"
    if hasattr(obj, "item"):  # numpy scalars
        return dumps_stable(obj.item(), _ind)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, Fraction):
        return format_float(float(v))
    if hasattr(v, "item"):
        return _csv_cell(v.item())
    return str(v)


def render_csv(rows, fieldnames):
    """Delimited form: a schema comment line, a header, one line per row."""
    buf = io.StringIO()
    buf.write(f"# {SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_csv_cell(row.get(f)) for f in fieldnames])
    return buf.getvalue()


# ----------------------------------------------------------------------
# input plumbing


def _parse_params(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, _, val = item.partition("=")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"parameter {key!r} needs a numeric value, got {val!r}")
    return out


def _load_json_arg(text, what):
    """Inline JSON or a path to a JSON file."""
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad inline JSON for {what}: {e}")
    if not os.path.exists(text):
        raise ConfigError(f"{what} file not found: {text}")
    with open(text) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad JSON in {text}: {e}")


def _resolve_model(args):
    try:
        return models.get_model(args.model, **_parse_params(args.param))
    except ValueError as e:
        raise ConfigError(str(e))


def _resolve_input(args, K):
    """(AsymptoticInput | Model, metadata dict) from --model or --input."""
    if getattr(args, "model", None) and getattr(args, "input", None):
        raise ConfigError("give either --model or --input, not both")
    if getattr(args, "model", None):
        model = _resolve_model(args)
        return model, {"model": model.name, "params": model.params}
    if getattr(args, "input", None):
        data = _load_json_arg(args.input, "--input")
        try:
            inp = engine.AsymptoticInput.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad input descriptor: {e}")
        return inp, {"input": data}
    raise ConfigError("need --model NAME or --input JSON")


def _require_k(args):
    if args.kmax < 1:
        raise ConfigError("K must be at least 1")
    return args.kmax


def _int_list(text, what):
    try:
        vals = tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r}")
    if not vals:
        raise ConfigError(f"empty {what}")
    return vals


def _float_list(text, what):
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r}")


def _fraction_list(text, what):
    try:
        return tuple(Fraction(v.strip()) for v in str(text).split(",") if v.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad {what}: {text!r}")


# ----------------------------------------------------------------------
# output plumbing


def _emit(payload, rows, fieldnames, args):
    """Serialize, write/echo, and render the figure. Returns the text."""
    if args.format == "json":
        text = dumps_stable(payload) + "\n"
    else:
        text = render_csv(rows, fieldnames)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"wrote {args.output}", file=sys.stderr)
    elif not args.quiet:
        sys.stdout.write(text)
    if args.output and not getattr(args, "no_figures", False):
        fig_path = os.path.splitext(args.output)[0] + ".png"
        _render_figure(args.command, payload, fig_path)
        if not args.quiet:
            print(f"wrote {fig_path}", file=sys.stderr)
    return text


def _render_figure(command, payload, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig = None
    try:
        if command in ("moments", "cumulants"):
            key = "orders" if command == "moments" else "rows"
            rows = payload["result"][key]
            fig, ax = plt.subplots(figsize=(6.4, 4.0))
            for i, row in enumerate(rows):
                ks = list(range(1, len(row) + 1))
                ax.plot(ks, row, marker="o", label=f"order {i}")
            ax.set_xlabel("k")
            ax.set_ylabel("coefficient")
            ax.axhline(0.0, color="0.6", lw=0.8)
            ax.legend()
        elif command == "density":
            m = payload["result"]
            fig, ax = plt.subplots(figsize=(6.4, 4.0))
            ax.plot(m["grid"], m["density"], lw=1.2)
            ax.axhline(0.0, color="0.6", lw=0.8)
            for atom in m["atoms"]:
                x, w = atom["location"], atom["weight"]
                ax.annotate(
                    f"{w:+.3g}",
                    (x, 0),
                    textcoords="offset points",
                    xytext=(0, 12 if w > 0 else -18),
                    ha="center",
                    fontsize=8,
                )
                ax.plot([x, x], [0, w], color="tab:red", lw=2.0)
                ax.plot([x], [w], marker="o", color="tab:red")
            ax.set_xlabel("x")
            ax.set_ylabel("density / atom weight")
        elif command == "mc":
            reports = payload["result"]
            n = len(reports)
            cols = min(2, n)
            rows_ = (n + cols - 1) // cols
            fig, axes = plt.subplots(
                rows_, cols, figsize=(5.4 * cols, 3.4 * rows_), squeeze=False
            )
            for idx, rep in enumerate(reports):
                ax = axes[idx // cols][idx % cols]
                xs = [1.0 / nn for nn in rep["N_grid"]]
                ax.errorbar(xs, rep["means"], yerr=rep["stderrs"], fmt="o", ms=4)
                beta = rep["coefficients"]
                powers = rep["basis"]
                xx = np.linspace(0.0, max(xs) * 1.05, 64)
                yy = sum(b * xx**p for b, p in zip(beta, powers))
                ax.plot(xx, yy, lw=1.0)
                ax.set_title(f"k = {rep['k']}", fontsize=9)
                ax.set_xlabel("1/N")
            for idx in range(n, rows_ * cols):
                axes[idx // cols][idx % cols].set_visible(False)
        elif command == "verify":
            checks = payload["result"]
            fig, ax = plt.subplots(figsize=(6.4, 3.2))
            names = [c["check"] for c in checks]
            errs = [max(c["max_rel_err"], 1e-18) for c in checks]
            colors = ["tab:green" if c["pass"] else "tab:red" for c in checks]
            ax.barh(names, errs, color=colors)
            ax.set_xscale("log")
            ax.set_xlabel("max relative error")
        else:
            return
        fig.tight_layout()
        fig.savefig(path, dpi=110)
    finally:
        if fig is not None:
            plt.close(fig)


# ----------------------------------------------------------------------
# commands


def cmd_moments(args):
    K = _require_k(args)
    source, meta = _resolve_input(args, K)
    try:
        if isinstance(source, models.Model):
            if args.epsilon is not None:
                raise ConfigError(
                    "scale separation is part of a named model; "
                    "set it through --param or use --input"
                )
            res = source.expansion(K, args.order)
        else:
            n = 1 if args.order is None else args.order
            res = engine.expand(source, K, n, epsilon=args.epsilon)
    except ValueError as e:
        # the expansion router rejects unsupported order/regime combinations
        raise ConfigError(str(e))
    payload = {
        "schema": SCHEMA,
        "command": "moments",
        "inputs": {**meta, "K": K, "order": len(res.orders) - 1},
        "result": res.to_dict(),
    }
    rows = [
        {"order": i, "scale": res.scales[i], "k": k + 1, "value": float(row[k])}
        for i, row in enumerate(res.orders)
        for k in range(len(row))
    ]
    _emit(payload, rows, ("order", "scale", "k", "value"), args)
    return 0


def cmd_cumulants(args):
    K = _require_k(args)
    source, meta = _resolve_input(args, K)
    try:
        if isinstance(source, models.Model):
            table = source.cumulants(K, args.order)
        elif source.side == "schur":
            phi = source.profile(1)
            table = engine.quantized_cumulants(source.psi, phi, K)
        else:
            n = args.order if args.order is not None else len(source.series) - 1
            table = engine.hc_cumulants(source.series, n, K)
    except ValueError as e:
        raise ConfigError(str(e))
    payload = {
        "schema": SCHEMA,
        "command": "cumulants",
        "inputs": {**meta, "K": K},
        "result": table.to_dict(),
    }
    rows = [
        {"order": i, "n": n + 1, "value": float(row[n])}
        for i, row in enumerate(table.rows)
        for n in range(len(row))
    ]
    _emit(payload, rows, ("order", "n", "value"), args)
    return 0


def cmd_density(args):
    if not args.model:
        raise ConfigError("density needs --model (raw jets carry no geometry)")
    if args.npoints < 8:
        raise ConfigError("npoints must be at least 8")
    model = _resolve_model(args)
    try:
        measure = model.measure(order=args.order, npoints=args.npoints)
    except ValueError as e:
        raise ConfigError(str(e))
    result = measure.to_dict()
    # the arrays are left out of the compact form; the payload carries them
    result["grid"] = [float(x) for x in measure.grid]
    result["density"] = [float(d) for d in measure.density]
    payload = {
        "schema": SCHEMA,
        "command": "density",
        "inputs": {
            "model": model.name,
            "params": model.params,
            "order": args.order,
            "npoints": args.npoints,
        },
        "result": result,
    }
    rows = [
        {"kind": "density", "x": float(x), "value": float(d)}
        for x, d in zip(measure.grid, measure.density)
    ]
    rows += [
        {"kind": "atom", "x": float(x), "value": float(w)} for x, w in measure.atoms
    ]
    _emit(payload, rows, ("kind", "x", "value"), args)
    return 0


def cmd_verify(args):
    checks = []
    if args.check == "report":
        checks = verify.verification_report(seed=args.seed, instances=args.instances)
    elif args.check == "dk-schur":
        signature = tuple(int(v) for v in _int_list(args.signature, "--signature"))
        us = _fraction_list(args.us, "--us") if args.us else None
        if us is None:
            us = tuple(Fraction(3, 2) ** (i + 1) / 2 for i in range(len(signature)))
        if len(us) != len(signature):
            raise ConfigError("--us must match the signature length")
        err = verify.check_dk_schur_eigenrelation(us, signature, args.k, exact=True)
        checks = [
            {
                "check": f"dk_schur_eigenrelation(signature={list(signature)}, k={args.k})",
                "instances": 1,
                "max_rel_err": float(err),
                "pass": err == 0,
            }
        ]
    elif args.check == "dk-hc":
        xs = _float_list(args.xs, "--xs")
        lams = _float_list(args.lams, "--lams")
        err = verify.check_dk_eigenrelation(xs, lams, args.k)
        checks = [
            {
                "check": f"dk_eigenrelation(n={len(xs)}, k={args.k})",
                "instances": 1,
                "max_rel_err": float(err),
                "pass": err <= 1e-8,
            }
        ]
    elif args.check == "dk-expansion":
        xs = _float_list(args.xs, "--xs")
        polys = [[0.0, 0.0, 1.0]] * len(xs)
        err = verify.check_dk_expansion_equivalence(xs, args.k, polys)
        checks = [
            {
                "check": f"dk_expansion_equivalence(n={len(xs)}, k={args.k})",
                "instances": 1,
                "max_rel_err": float(err),
                "pass": err <= 1e-9,
            }
        ]
    payload = {
        "schema": SCHEMA,
        "command": "verify",
        "inputs": {"check": args.check, "seed": args.seed},
        "result": checks,
    }
    _emit(payload, checks, ("check", "instances", "max_rel_err", "pass"), args)
    return 0 if all(c["pass"] for c in checks) else 1


def cmd_mc(args):
    K = _require_k(args)
    seed = args.seed
    grid = _int_list(args.ngrid, "--ngrid")
    predictions = None
    meta = {"K": K, "N_grid": list(grid), "samples": args.samples, "seed": seed}
    try:
        if args.genus:
            reports = montecarlo.genus_check(
                K=K, N_grid=grid, samples=args.samples, seed=seed
            )
            meta["mode"] = "genus"
        else:
            if args.model and args.ensemble:
                raise ConfigError("give either --model or --ensemble, not both")
            if args.model:
                model = _resolve_model(args)
                wired = model.monte_carlo(K)
                if wired is None:
                    raise ConfigError(
                        f"model {model.name!r} has no matrix construction"
                    )
                spec, predictions = wired
                if args.orders == 2:
                    # model predictions stop at 1/N; leave 1/N^2 unscored
                    predictions = {
                        k: v + (None,) * (args.orders + 1 - len(v))
                        for k, v in predictions.items()
                    }
                meta["model"] = model.name
                meta["params"] = model.params
            elif args.ensemble:
                data = _load_json_arg(args.ensemble, "--ensemble")
                try:
                    spec = montecarlo.EnsembleSpec.from_dict(data)
                except (KeyError, TypeError, ValueError) as e:
                    raise ConfigError(f"bad ensemble descriptor: {e}")
                meta["ensemble"] = data
            else:
                raise ConfigError("need --model, --ensemble, or --genus")
            reports = montecarlo.fit_expansion(
                spec,
                K,
                N_grid=grid,
                samples=args.samples,
                orders_to_fit=args.orders,
                seed=seed,
                predictions=predictions,
                expensive=args.expensive,
            )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e))
    payload = {
        "schema": SCHEMA,
        "command": "mc",
        "inputs": meta,
        "result": [r.to_dict() for r in reports],
    }
    rows = []
    for r in reports:
        for i, p in enumerate(r.basis):
            pred = r.predictions
            z = r.z_scores
            rows.append(
                {
                    "k": r.k,
                    "power": p,
                    "coefficient": r.coefficients[i],
                    "stderr": math.sqrt(max(r.covariance[i][i], 0.0)),
                    "prediction": pred[i] if pred is not None and i < len(pred) else None,
                    "z": z[i] if z is not None and i < len(z) else None,
                }
            )
    _emit(
        payload,
        rows,
        ("k", "power", "coefficient", "stderr", "prediction", "z"),
        args,
    )
    worst = [r.max_abs_z for r in reports if r.max_abs_z is not None]
    return 1 if any(z >= args.ztol or math.isinf(z) for z in worst) else 0


def cmd_examples(args):
    entries = models.list_models()
    rows = []
    for e in entries:
        params = " ".join(
            f"--param {k}={format_float(v)}" for k, v in e["defaults"].items()
        )
        cmd = f"freecorr moments --model {e['name']}" + (f" {params}" if params else "")
        rows.append(
            {
                "name": e["name"],
                "defaults": json.dumps(e["defaults"], sort_keys=True),
                "description": e["description"],
                "sample_command": cmd,
            }
        )
    payload = {
        "schema": SCHEMA,
        "command": "examples",
        "result": rows,
    }
    _emit(payload, rows, ("name", "defaults", "description", "sample_command"), args)
    return 0


# ----------------------------------------------------------------------
# parser


def _add_common(sub, *, needs_seed=False):
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("-o", "--output", default=None, help="write payload to this path")
    sub.add_argument("--quiet", action="store_true", help="suppress stdout echo")
    sub.add_argument(
        "--no-figures",
        action="store_true",
        help="skip the figure rendered next to a file output",
    )
    if needs_seed:
        sub.add_argument("--seed", type=int, default=_DEFAULT_SEED)


def _add_input_flags(sub):
    sub.add_argument("--model", default=None, help="named model (see `examples`)")
    sub.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="model parameter override (repeatable)",
    )
    sub.add_argument(
        "--input",
        default=None,
        help="raw profile descriptor: inline JSON or a path "
        '({"side": "hc", "series": [{"coeffs": [...], "center": 0}, ...]})',
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="freecorr",
        description="Moment expansions, correction measures, operator checks, "
        "and Monte Carlo validation for spectral limit laws.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    registry = {}

    p = subs.add_parser("moments", help="expansion coefficient rows by order")
    _add_input_flags(p)
    p.add_argument("-K", "--kmax", type=int, default=8, help="highest moment degree")
    p.add_argument("-n", "--order", type=int, default=None, help="correction order")
    p.add_argument("--epsilon", type=float, default=None, help="scale separation")
    _add_common(p)
    p.set_defaults(func=cmd_moments)
    registry["moments"] = p

    p = subs.add_parser("cumulants", help="cumulant table rows by order")
    _add_input_flags(p)
    p.add_argument("-K", "--kmax", type=int, default=8)
    p.add_argument("-n", "--order", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_cumulants)
    registry["cumulants"] = p

    p = subs.add_parser("density", help="reconstructed measure for a named model")
    p.add_argument("--model", default=None)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("-n", "--order", type=int, default=None)
    p.add_argument("--npoints", type=int, default=4001)
    _add_common(p)
    p.set_defaults(func=cmd_density)
    registry["density"] = p

    p = subs.add_parser("verify", help="operator-identity checks")
    p.add_argument(
        "--check",
        choices=("report", "dk-hc", "dk-schur", "dk-expansion"),
        default="report",
    )
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--signature", default="2,1,0", help="weakly decreasing integers")
    p.add_argument("--us", default=None, help="evaluation points (fractions ok)")
    p.add_argument("--xs", default="0.8,0.1,-0.5")
    p.add_argument("--lams", default="1.1,0.4,-0.7")
    p.add_argument("-k", type=int, default=2, help="operator degree")
    _add_common(p, needs_seed=True)
    p.set_defaults(func=cmd_verify)
    registry["verify"] = p

    p = subs.add_parser("mc", help="Monte Carlo 1/N-expansion fits")
    p.add_argument("--model", default=None)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--ensemble", default=None, help="ensemble descriptor JSON or path")
    p.add_argument("--genus", action="store_true", help="pure-GUE topological fit")
    p.add_argument("-K", "--kmax", type=int, default=4)
    p.add_argument("--ngrid", default="64,128,256,512")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--orders", type=int, choices=(1, 2), default=1)
    p.add_argument("--expensive", action="store_true")
    p.add_argument("--ztol", type=float, default=3.0)
    _add_common(p, needs_seed=True)
    p.set_defaults(func=cmd_mc)
    registry["mc"] = p

    p = subs.add_parser("examples", help="list the named models")
    _add_common(p)
    p.set_defaults(func=cmd_examples)
    registry["examples"] = p

    return parser, registry


def _load_config_file(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad JSON in {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = {}
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a path")
            config = _load_config_file(argv[i + 1])
            del argv[i : i + 2]
        command = config.pop("command", None)
        if command and (not argv or argv[0] not in _COMMANDS):
            argv.insert(0, str(command))
        parser, registry = build_parser()
        if config:
            if not argv or argv[0] not in registry:
                raise ConfigError("config options need a command")
            sub = registry[argv[0]]
            valid = {a.dest for a in sub._actions}
            unknown = set(config) - valid
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            sub.set_defaults(**config)
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except SystemExit as e:  # argparse errors exit 2, --help exits 0
        return e.code if isinstance(e.code, int) else 2
    except Exception as e:  # numeric/runtime failures inside the engines
        print(f"numeric failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
