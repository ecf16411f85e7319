"""Command-line front end.

``valmod run SPEC.json`` builds a subspace from a JSON instance description,
runs the requested checks and writes ``report.json`` plus CSV tables.
``valmod selftest`` runs the acceptance suite.

All functions are expanded around the origin; to study a subspace at
another base point, translate coordinates before writing the spec.

Exit codes: 0 all checks pass, 2 some checks FAIL (results consistent),
1 usage, parse or size error, 3 integrity error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .beurling import (Verdict, beurling_reconstruct, beurling_verdict, has_full_projection,
                       is_invariant, is_r1_inner_decomposition)
from .inner import (boundary_sample, compare_inner_notions, is_r1_inner_function, sphere_grid,
                    torus_grid, write_boundary_csv)
from .oracle import OracleInstance, OracleSizeError
from .parsing import ParseError, parse_polynomial
from .poly import Polynomial
from .presets import (bidisk_inner_example, blaschke_instance, gap_monomial_instance,
                      submodule_generators)
from .scalars import parse_rational
from .spaces import make_space, write_weights_csv
from .subspace import (Ambient, IntegrityError, Tolerances, orthonormalize, wandering_subspace)

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INTEGRITY = 0, 1, 2, 3

CHECKS = ("series", "decompose", "invariant", "r1inner", "fullproj", "beurling", "wandering",
          "reconstruct", "inner", "a2alpha", "boundary")
EXACT_CHECKS = {"series", "decompose", "invariant", "r1inner", "fullproj", "beurling", "inner"}


class SpecError(ValueError):
    pass


@dataclass
class RunOutcome:
    report: dict
    exit_code: int
    files: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# spec parsing


def _preset(sub: dict):
    preset = sub.get("preset")
    if preset is None:
        return None, {}
    if isinstance(preset, dict):
        (name, args), = preset.items()
        return name.upper(), args if isinstance(args, dict) else {"args": args}
    m = re.fullmatch(r"\s*([A-Za-z0-9_]+)\s*(?:\((.*)\))?\s*", preset)
    if not m:
        raise SpecError(f"bad preset {preset!r}")
    name, inner = m.group(1).upper(), m.group(2)
    args = dict(sub)
    if inner:
        inner = inner.strip()
        if name == "EX_11_7":
            args["a"] = inner
        elif name == "SUBMODULE":
            args["generators"] = [g.strip() for g in inner.strip("[]").split(",") if g.strip()]
    return name, args


def _scalar_arg(text, exact):
    if isinstance(text, str) and re.search(r"[ijI]", text):
        p = parse_polynomial(text, 1, exact)
        return p.coeff((0,))
    if exact:
        return parse_rational(text)
    return complex(float(parse_rational(text))) if isinstance(text, str) else complex(text)


def build_generators(spec: dict, n: int, D: int, exact: bool):
    """Return ``(generators, horizon, label, default_f, approximate)``."""
    sub = spec.get("subspace", {})
    name, args = _preset(sub)
    if name is None:
        gens = [parse_polynomial(g, n, exact) for g in sub.get("generators", [])]
        f = gens[0] if gens else None
        return gens, sub.get("horizon"), "custom", f, False
    if name == "EX_11_1":
        if n != 2:
            raise SpecError("EX_11_1 lives in two variables")
        inst = gap_monomial_instance(D, exact=True)
        gens = inst.generators
        return _mode(gens, exact), None, name, None, False
    if name == "EX_11_7":
        if n != 1:
            raise SpecError("EX_11_7 lives in one variable")
        a = _scalar_arg(args.get("a", "1/2"), True)
        if not 0 < abs(complex(a)) < 1:
            raise SpecError("EX_11_7 needs 0 < |a| < 1")
        inst = blaschke_instance(a, D, exact=True)
        gens = _mode(inst.generators, exact)
        return gens, inst.horizon, name, gens[2] if len(gens) > 2 else None, True
    if name == "EX_18_7":
        if n != 2:
            raise SpecError("EX_18_7 lives in two variables")
        f = bidisk_inner_example(exact)
        return [f], None, name, f, False
    if name == "SUBMODULE":
        seeds = [parse_polynomial(g, n, exact) for g in args.get("generators", [])]
        if not seeds:
            raise SpecError("SUBMODULE needs generators")
        return submodule_generators(seeds, D), None, name, seeds[0], False
    raise SpecError(f"unknown preset {name!r}")


def _mode(gens, exact):
    return list(gens) if exact else [g.to_float() for g in gens]


def _normalize_checks(raw):
    out = []
    for c in raw or ["beurling"]:
        if isinstance(c, str):
            name, args = c, {}
        elif isinstance(c, dict) and len(c) == 1:
            (name, args), = c.items()
            args = args if isinstance(args, dict) else {"value": args}
        else:
            raise SpecError(f"bad check entry {c!r}")
        name = name.lower()
        if name not in CHECKS:
            raise SpecError(f"unknown check {name!r}")
        out.append((name, args))
    return out


def _tolerances(spec, cli_tol, env):
    base = Tolerances()
    over = spec.get("tolerances") or {}
    if over:
        try:
            base = base.override(**{k: float(v) for k, v in over.items()})
        except TypeError as exc:
            raise SpecError(f"bad tolerance override: {exc}") from exc
    tol = cli_tol if cli_tol is not None else env.get("VALMOD_TOL")
    if tol:
        base = Tolerances.uniform(float(tol), reconstruct=base.reconstruct, prune=base.prune)
    return base


# ---------------------------------------------------------------------------
# running


def _poly_out(p: Polynomial):
    return {"text": str(p), "records": p.to_records()}


def _verdict_code(v) -> str:
    return v.value if isinstance(v, Verdict) else str(v)


def run_spec(spec: dict, mode=None, tol=None, out_dir=None, seed=None, env=None) -> RunOutcome:
    env = os.environ if env is None else env
    mode = (mode or env.get("VALMOD_MODE") or spec.get("mode") or "float").lower()
    if mode not in ("float", "exact"):
        raise SpecError(f"mode must be float or exact, got {mode!r}")
    seed = int(seed if seed is not None else env.get("VALMOD_SEED") or spec.get("seed", 0))
    out_dir = Path(out_dir or env.get("VALMOD_OUT_DIR") or "valmod_out")
    tols = _tolerances(spec, tol, env)
    sp = spec.get("space")
    if not isinstance(sp, dict):
        raise SpecError("spec needs a 'space' object")
    try:
        kind, n, D = sp["kind"], int(sp["n"]), int(sp["D"])
    except KeyError as exc:
        raise SpecError(f"space is missing {exc}") from exc
    space = make_space(kind, n, D, alpha=sp.get("alpha"), blocks=sp.get("blocks"),
                       moments=sp.get("moments"))
    exact = mode == "exact"
    checks = _normalize_checks(spec.get("checks"))
    gens, horizon, label, default_f, approx = build_generators(spec, n, D, exact)

    A = Ambient(space)
    V = orthonormalize([g.to_float() for g in gens], A, tols, horizon, label)
    ES = None
    if exact and any(name in EXACT_CHECKS for name, _ in checks):
        if not space.has_exact_weights:
            raise SpecError(f"exact mode needs rational weights; {space.kind} has none")
        alpha = int(space.alpha) if space.kind == "A2_DISK_ALPHA" else None
        ES = OracleInstance(n, D, list(gens), space.kind, alpha, horizon).subspace()

    results, errors, failed, files = {}, [], False, []
    out_dir.mkdir(parents=True, exist_ok=True)

    def fpoly(args):
        src = args.get("f", args.get("value"))
        f = parse_polynomial(src, n, exact) if src is not None else default_f
        if f is None:
            raise SpecError("check needs a function 'f'")
        return f

    for name, args in checks:
        key = name if name not in results else f"{name}_{len(results)}"
        use_exact = ES is not None and name in EXACT_CHECKS
        tag = "exact" if use_exact else ("float-fallback" if exact else "float")
        entry = {"mode": tag}
        if name in ("series", "decompose"):
            if use_exact:
                dims_v, dims_w = ES.series_dims(), ES.dims()
                bases = [[_poly_out(ES.polynomial(u)) for u in comp] for comp in ES.components]
            else:
                dec = V.decomposition()
                dims_v, dims_w = dec.series.dims(), dec.dims()
                bases = [[_poly_out(p) for p in dec.basis_polynomials(k)] for k in range(D + 1)]
            entry.update({"dim_V": dims_v, "dim_W": dims_w})
            if name == "decompose":
                entry["components"] = [{"k": k, "dim": dims_w[k], "basis": bases[k]}
                                       for k in range(D + 1)]
            path = out_dir / "dimensions.csv"
            _write_csv(path, ["k", "dim_V_k", "dim_W_k"],
                       [[k, dims_v[k], dims_w[k] if k <= D else 0] for k in range(D + 2)])
            files.append(path.name)
        elif name in ("invariant", "r1inner", "fullproj", "beurling"):
            if name == "beurling":
                rep = ES.verdict() if use_exact else beurling_verdict(V)
                entry.update(rep.to_dict())
                entry["mode"] = tag
                failed |= any(c.verdict is Verdict.FAIL for c in
                              (rep.invariant, rep.r1_inner_decomposition, rep.full_projection))
                if not rep.consistent:
                    errors.extend(rep.integrity_errors)
            else:
                fn = {"invariant": ("is_invariant", is_invariant),
                      "r1inner": ("is_r1_inner_decomposition", is_r1_inner_decomposition),
                      "fullproj": ("has_full_projection", has_full_projection)}[name]
                res = getattr(ES, fn[0])() if use_exact else fn[1](V)
                entry.update(res.to_dict())
                entry["mode"] = tag
                failed |= res.verdict is Verdict.FAIL
        elif name == "wandering":
            M = wandering_subspace(V)
            entry.update({"dim": M.dim, "truncation_limited": M.flags["truncation_limited"],
                          "basis": [_poly_out(p) for p in M.polynomials()]})
        elif name == "reconstruct":
            r = tuple(int(e) for e in args.get("r", [1] + [0] * (n - 1)))
            hsrc = args.get("h", "first")
            dec = V.decomposition()
            if hsrc == "first":
                h = next((dec.basis_polynomials(k)[0] for k in range(D + 1) if dec.dims()[k]), None)
                if h is None:
                    raise SpecError("subspace is zero; nothing to reconstruct")
            else:
                h = parse_polynomial(hsrc, n, False)
            try:
                out = beurling_reconstruct(V, r, h)
                entry.update(out.to_dict())
                entry["h"] = _poly_out(h)
            except ValueError as exc:
                entry.update({"ok": False, "error": str(exc)})
                failed = True
        elif name == "inner":
            f = fpoly(args)
            out = is_r1_inner_function(f if use_exact else f.to_float(), space,
                                       tols.check if not use_exact else 1e-9)
            if use_exact and not out.exact:
                entry["mode"] = "float-fallback"
            entry.update({"f": _poly_out(f), "verdict": out.verdict.value,
                          "max_pairing": out.max_pairing})
            failed |= not out.passed
        elif name == "a2alpha":
            if n != 1:
                raise SpecError("a2alpha needs a one-variable space")
            f = fpoly(args)
            alpha = float(args.get("alpha", space.alpha if space.alpha is not None else 0.0))
            out = compare_inner_notions(f.to_float(), alpha)
            entry.update({"f": _poly_out(f), "alpha": alpha,
                          "a2alpha_verdict": out.a2alpha.verdict.value,
                          "r1_verdict": out.r1.verdict.value,
                          "route_discrepancy": out.a2alpha.discrepancy,
                          "consistent": out.consistent})
            failed |= not out.a2alpha.passed
            if not out.consistent:
                errors.append(f"a2alpha and r1 verdicts differ for {f}")
        elif name == "boundary":
            f = fpoly(args)
            grids = args.get("grid") or ([{"kind": "TORUS", "per_circle": 64},
                                          {"kind": "SPHERE", "count": 256}])
            grids = grids if isinstance(grids, list) else [grids]
            entry["grids"] = []
            for g in grids:
                gk = g.get("kind", "TORUS").upper()
                if gk == "TORUS":
                    grid = torus_grid(n, int(g.get("per_circle", 64)))
                elif gk == "SPHERE":
                    grid = sphere_grid(n, int(g.get("count", 256)), seed=seed)
                else:
                    raise SpecError(f"unknown grid kind {gk!r}")
                sample = boundary_sample(f, grid, approximate=approx and f is default_f)
                path = out_dir / f"boundary_{gk.lower()}.csv"
                write_boundary_csv(sample, path)
                files.append(path.name)
                entry["grids"].append({"kind": gk, "points": len(grid.points), "csv": path.name,
                                       "min_abs_f": float(sample.values.min()),
                                       "max_abs_f": float(sample.values.max()),
                                       "approximate": sample.approximate})
            entry["f"] = _poly_out(f)
        results[key] = entry

    wpath = out_dir / "weights.csv"
    write_weights_csv(space, wpath)
    files.append(wpath.name)
    code = EXIT_INTEGRITY if errors else (EXIT_FAIL if failed else EXIT_OK)
    report = {
        "version": __version__,
        "mode": mode,
        "seed": seed,
        "space": space.describe(),
        "subspace": {"label": label, "dim": V.dim, "horizon": V.horizon,
                     "generators": len(gens)},
        "tolerances": {k: getattr(tols, k) for k in ("rank", "orth", "trigger", "check",
                                                     "reconstruct", "prune")},
        "results": results,
        "integrity_errors": errors,
        "exit_code": code,
        "files": sorted(set(files)),
    }
    _atomic_json(out_dir / "report.json", report)
    return RunOutcome(report, code, sorted(set(files)))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


def _atomic_json(path: Path, obj):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".report-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, sort_keys=True, indent=2, default=str)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="valmod", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the checks listed in a JSON spec")
    r.add_argument("spec", help="path to the JSON instance spec")
    r.add_argument("--mode", choices=["float", "exact"], help="arithmetic (env VALMOD_MODE)")
    r.add_argument("--tol", type=float, help="uniform rank/orth/trigger/check tolerance (env VALMOD_TOL)")
    r.add_argument("--out-dir", help="output directory (env VALMOD_OUT_DIR, default valmod_out)")
    r.add_argument("--seed", type=int, help="seed for sampled grids (env VALMOD_SEED)")
    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.add_argument("--only", help="comma-separated criterion numbers, e.g. 1,4")
    s.add_argument("--tol", type=float, help="uniform tolerance override (env VALMOD_TOL)")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        from .acceptance import run_criteria

        only = None
        if args.only:
            try:
                only = {int(x) for x in args.only.split(",") if x.strip()}
            except ValueError:
                print("--only expects comma-separated integers", file=sys.stderr)
                return EXIT_USAGE
        tol = Tolerances.uniform(args.tol) if args.tol else None
        results = run_criteria(only, tol, echo=print)
        bad = [r for r in results if not r.passed]
        print(f"{len(results) - len(bad)}/{len(results)} criteria passed")
        return EXIT_INTEGRITY if bad else EXIT_OK
    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
        out = run_spec(spec, args.mode, args.tol, args.out_dir, args.seed)
    except (OSError, json.JSONDecodeError, SpecError, ParseError, OracleSizeError,
            ValueError) as exc:
        if isinstance(exc, IntegrityError):
            raise
        print(f"valmod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrityError as exc:
        print(f"valmod: integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    summary = {k: v.get("verdicts", v.get("verdict")) for k, v in out.report["results"].items()
               if isinstance(v, dict) and ("verdicts" in v or "verdict" in v)}
    print(json.dumps({"exit_code": out.exit_code, "summary": summary}, sort_keys=True))
    return out.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
