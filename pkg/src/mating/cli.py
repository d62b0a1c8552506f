"""Command line entry point: ``mating <command> ...``.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import cmath
import random
import sys
from typing import Any, Dict, List, Optional, Tuple

from .circle import (Angle, RotationNumber, binary_expansion, doubling_orbit, format_angles,
                     parabolic_cycle, preperiod_and_period)
from .combinatorics import (Beta, BetaPre, CritPre, OffSpinePre, OmegaAngle, YPre, Y0,
                            itinerary_of_marked_parabolic, itinerary_of_marked_siegel,
                            itinerary_to_angle, ray_class, verify_gluing)
from .config import RunConfig, emit_json, load_config, save_config, to_jsonable
from .errors import MatingError, NumericalFailure
from .theta import is_bounded_type, parse_theta

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

# keys that steer the invocation but are not part of the persisted run
_CONTROL = ("config", "save_config", "json", "threads", "command")


class UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_help())


# -- parameter helpers ------------------------------------------------------

def _map_spec(params):
    from .maps import MatingRational, ParaQuad, SiegelQuad
    kind = params.get("map")
    if kind == "siegel":
        return SiegelQuad(_need(params, "theta"))
    if kind == "parabolic":
        return ParaQuad(_need(params, "nu"))
    if kind == "mating":
        return MatingRational(_need(params, "theta"), _need(params, "nu"))
    raise UsageError("--map must be siegel, parabolic or mating")


def _need(params, key):
    v = params.get(key)
    if v is None:
        raise UsageError("--%s is required here" % key.replace("_", "-"))
    return v


def _angles(texts) -> List[Angle]:
    return [Angle.parse(t) for t in texts]


def _class_angle(text: str):
    # "w:0110" is the symbolic angle 0.0110 followed by the digits of omega
    if text.startswith("w:"):
        return OmegaAngle(text[2:])
    return Angle.parse(text)


def _complex(text) -> complex:
    if isinstance(text, (list, tuple)):
        return complex(*text)
    return complex(str(text).replace(" ", "").replace("i", "j"))


# -- commands ---------------------------------------------------------------

def cmd_angles(p) -> Tuple[Any, str]:
    action = p["action"]
    if action == "parabolic-cycle":
        cyc = parabolic_cycle(RotationNumber.parse(_need(p, "nu")))
        return {"nu": p["nu"], "cycle": cyc}, format_angles(cyc)
    t = Angle.parse(_need(p, "t"))
    if action == "expansion":
        s = binary_expansion(t)
        pre, per = preperiod_and_period(t)
        res = {"angle": t, "preperiod": s.preperiod, "period": s.period,
               "preperiod_length": pre, "period_length": per}
        return res, "%s = %s" % (t, s)
    if action == "double":
        orb = doubling_orbit(t, int(p.get("steps") or 1))
        return {"angle": t, "orbit": orb}, " ".join(map(str, orb))
    raise UsageError("unknown angles action %r" % action)


def _marked_point(text: str, side: str):
    head, _, rest = text.partition(":")
    if side == "siegel":
        if head == "beta":
            return Beta()
        if head == "betapre":
            return BetaPre(Angle.parse(rest))
        if head == "crit":
            form, k = rest.split(":")
            return CritPre(form, int(k))
    else:
        if head == "y0":
            return Y0()
        if head == "ypre":
            form, k = rest.split(":")
            return YPre(form, int(k))
    raise UsageError("cannot read marked point %r for the %s side" % (text, side))


def cmd_itinerary(p) -> Tuple[Any, str]:
    side = p.get("side") or "parabolic"
    point = _marked_point(_need(p, "point"), side)
    if p.get("prefix"):
        point = OffSpinePre(p["prefix"], point)
    if side == "siegel":
        its = itinerary_of_marked_siegel(point)
        rows = []
        for it in its:
            seq = it.sequence
            ang = None if isinstance(seq, OmegaAngle) else itinerary_to_angle(it)
            rows.append({"itinerary": str(it), "angle": ang, "source": repr(it.source)})
    else:
        nu = RotationNumber.parse(_need(p, "nu"))
        its = itinerary_of_marked_parabolic(point, nu)
        rows = [{"itinerary": str(it), "angle": itinerary_to_angle(it), "source": repr(it.source)}
                for it in its]
    text = "\n".join(("%s  %s" % (r["itinerary"], r["angle"] if r["angle"] is not None else "")).rstrip()
                     for r in rows)
    return {"side": side, "point": p["point"], "itineraries": rows}, text


def cmd_classes(p) -> Tuple[Any, str]:
    nu = RotationNumber.parse(p.get("nu") or "3/5")
    if p.get("random"):
        rng = random.Random(int(p.get("seed") or 0))
        den = int(p.get("max_denominator") or 1024)
        sample = [Angle(rng.randrange(den), rng.randrange(1, den + 1)) for _ in range(int(p["random"]))]
    else:
        sample = [_class_angle(t) for t in (p.get("t") or [])]
        if not sample:
            raise UsageError("give --t angles or --random N")
    if p.get("verify"):
        rep = verify_gluing(sample, None, nu)
        res = {"nu": str(nu), "summary": rep.summary(), "sizes": rep.size_counts,
               "violations": rep.violations}
        return res, rep.summary() + "".join("\n  " + v for v in rep.violations)
    rows = [ray_class(t, None, nu).to_dict(t) for t in sample]
    text = "\n".join("%s -> %s {%s}" % (r["angle"], r["kind"], ", ".join(r["class"])) for r in rows)
    return rows, text


def cmd_ray(p) -> Tuple[Any, str]:
    from .rays import RayOptions, trace_ray
    fmap = _map_spec(p)
    opts = RayOptions(steps_per_halving=int(p.get("steps_per_halving") or 8),
                      min_potential=float(p.get("min_potential") or 1e-8))
    rows = []
    for t in _angles(_need(p, "t")):
        tr = trace_ray(fmap, t, opts)
        rows.append({"angle": t, "landing": tr.landing if tr.converged else None,
                     "last_point": tr.samples[-1][1], "converged": tr.converged,
                     "method": tr.method, "tail": tr.tail})
    text = "\n".join("%s -> %s (%s)" % (r["angle"], _fmt_c(r["landing"] or r["last_point"]),
                                        r["method"] if r["converged"] else "not converged")
                     for r in rows)
    return rows, text


def _fmt_c(z: complex) -> str:
    if cmath.isinf(z):
        return "inf"
    return "%.12g%+.12gi" % (z.real, z.imag)


def cmd_inspect(p) -> Tuple[Any, str]:
    from .maps import MATING, critical_points, fixed_points, petal_data
    from .parabolic import attracting_vectors, fit_germ
    fmap = _map_spec(p)
    res: Dict[str, Any] = {"map": fmap.describe()}
    res["fixed_points"] = [{"location": f.location, "multiplier": f.multiplier, "kind": f.kind}
                           for f in fixed_points(fmap)]
    lines = [fmap.describe()]
    for f in res["fixed_points"]:
        lines.append("fixed %-10s at %s, multiplier %s" % (f["kind"], _fmt_c(f["location"]),
                                                          _fmt_c(f["multiplier"])))
    if fmap.kind == MATING:
        pd = petal_data(fmap, budget=int(p.get("budget") or 100000))
        res["critical_points"] = [{"label": c.label, "location": c.location}
                                  for c in critical_points(fmap)]
        res["petals"] = {"p": pd.p, "a": pd.germ.a, "vectors": list(pd.vectors),
                         "labels": list(pd.labels), "radius": pd.delta, "x0": pd.x0,
                         "siegel_radius_w": pd.r0, "c0_entry_step": pd.c0_entry}
        lines.append("germ z + a z^(p+1): a = %s, p = %d" % (_fmt_c(pd.germ.a), pd.p))
        lines.append("petal radius %.4g, c0 enters a petal at step %d, Siegel radius (w) %.4g"
                     % (pd.delta, pd.c0_entry, pd.r0))
    else:
        res["critical_points"] = [{"label": c.label, "location": c.location}
                                  for c in critical_points(fmap)]
        if fmap.nu is not None:
            g = fit_germ(fmap, 0j, max_p=max(2, fmap.nu.p), iterate=fmap.nu.p)
            res["germ"] = {"a": g.a, "p": g.p, "iterate": g.iterate,
                           "attracting_vectors": attracting_vectors(g)}
            lines.append("germ of f^%d at 0: a = %s, p = %d" % (g.iterate, _fmt_c(g.a), g.p))
    for c in res["critical_points"]:
        lines.append("critical %s at %s" % (c["label"], _fmt_c(c["location"])))
    return res, "\n".join(lines)


def cmd_petal(p) -> Tuple[Any, str]:
    from .maps import MATING, PARA_QUAD, petal_data
    from .parabolic import attracting_vectors, fit_germ, repelling_vectors
    fmap = _map_spec(p)
    if fmap.kind == MATING:
        pd = petal_data(fmap)
        g, radius, x0 = pd.germ, pd.delta, pd.x0
    elif fmap.kind == PARA_QUAD:
        g = fit_germ(fmap, 0j, max_p=max(2, fmap.nu.p), iterate=fmap.nu.p)
        radius, x0 = g.delta, None
    else:
        raise UsageError("petal needs --map parabolic or --map mating")
    att, rep = attracting_vectors(g), repelling_vectors(g)
    res = {"a": g.a, "p": g.p, "iterate": g.iterate, "radius": radius, "x0": x0,
           "attracting": [{"v": v, "residual": abs(g.p * g.a * v ** g.p + 1)} for v in att],
           "repelling": [{"v": v, "residual": abs(g.p * g.a * v ** g.p - 1)} for v in rep]}
    lines = ["germ of f^%d at 0: a = %s, p = %d, radius %.4g" % (g.iterate, _fmt_c(g.a), g.p, radius)]
    lines += ["attracting %s  residual %.2e" % (_fmt_c(r["v"]), r["residual"]) for r in res["attracting"]]
    lines += ["repelling  %s  residual %.2e" % (_fmt_c(r["v"]), r["residual"]) for r in res["repelling"]]
    return res, "\n".join(lines)


def cmd_cf(p) -> Tuple[Any, str]:
    theta = parse_theta(_need(p, "theta"))
    bound = p.get("bound")
    v = is_bounded_type(theta, None if bound is None else int(bound), depth=int(p.get("terms") or 64))
    res = {"theta": theta.text, "exact": v.exact, "bounded": v.bounded,
           "max_partial_quotient": v.max_quotient, "terms_examined": v.terms_examined,
           "period": list(v.period), "partial_quotients": theta.partial_quotients(int(p.get("terms") or 16))}
    return res, "%s: %s" % (theta.text, v.describe())


def cmd_render(p) -> Tuple[Any, str]:
    from .render import ImageSpec, render
    fmap = _map_spec(p)
    mating = fmap.kind == "mating"
    spec = ImageSpec(
        fmap, width=int(p.get("width") or 512), height=int(p.get("height") or 512),
        center=_complex(p.get("center") or "0"), span=float(p.get("span") or 4.0),
        maxiter=int(p.get("maxiter") or (2000 if mating else 1000)),
        escape_radius=float(p.get("escape_radius") or 4.0),
        palette=p.get("palette") or "classic", rays=tuple(p.get("rays") or ()))
    res = render(spec, threads=p.get("_threads"))
    png, side = res.save(_need(p, "out"))
    out = {"png": str(png), "sidecar": str(side), "width": spec.width, "height": spec.height}
    return out, "wrote %s and %s" % (png, side)


COMMANDS = {
    "angles": cmd_angles, "itinerary": cmd_itinerary, "classes": cmd_classes, "ray": cmd_ray,
    "inspect": cmd_inspect, "petal": cmd_petal, "cf": cmd_cf, "render": cmd_render,
}


# -- parser -----------------------------------------------------------------

def _add_map_args(sp, maps=("siegel", "parabolic", "mating")):
    sp.add_argument("--map", choices=maps, required=False)
    sp.add_argument("--theta", help="golden, sqrt2m1, cf:[a1,...] or quad:(a+b*sqrt(d))/c")
    sp.add_argument("--nu", help="rotation number q/p")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mating", description="Siegel / parabolic quadratic matings: "
                 "angles, rays, itineraries, ray classes and pictures.")
    ap.add_argument("--config", help="run a persisted RunConfig JSON instead of the flags")
    ap.add_argument("--save-config", help="write this invocation as a RunConfig JSON")
    ap.add_argument("--json", action="store_true", help="print versioned JSON output")
    ap.add_argument("--threads", type=int, help="render worker threads (else $MATING_THREADS)")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("angles", help="parabolic cycle, binary expansion, doubling orbit")
    sp.add_argument("action", choices=["parabolic-cycle", "expansion", "double"])
    sp.add_argument("--nu")
    sp.add_argument("--t")
    sp.add_argument("--steps", type=int, default=1)

    sp = sub.add_parser("itinerary", help="itineraries of marked points")
    sp.add_argument("--side", choices=["siegel", "parabolic"], default="parabolic")
    sp.add_argument("--point", required=True,
                    help="beta | betapre:a/b | crit:FORM:k (siegel); y0 | ypre:FORM:k (parabolic)")
    sp.add_argument("--prefix", default="", help="off-spine prefix word")
    sp.add_argument("--nu")

    sp = sub.add_parser("classes", help="ray-equivalence classes of the mating")
    sp.add_argument("--nu", default="3/5")
    sp.add_argument("--t", nargs="+", help="angles a/b, or w:WORD for 0.WORD followed by omega")
    sp.add_argument("--random", type=int, help="sample this many random rational angles")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-denominator", type=int, default=1024)
    sp.add_argument("--verify", action="store_true", help="check sizes, partition and equivariance")

    sp = sub.add_parser("ray", help="trace external rays and report landing points")
    _add_map_args(sp, ("siegel", "parabolic"))
    sp.add_argument("--t", nargs="+", required=True)
    sp.add_argument("--steps-per-halving", type=int, default=8)
    sp.add_argument("--min-potential", type=float, default=1e-8)

    sp = sub.add_parser("inspect", help="fixed points, critical points, germ and petal data")
    _add_map_args(sp)
    sp.add_argument("--budget", type=int, default=100000)

    sp = sub.add_parser("petal", help="germ fit, attracting/repelling vectors and residuals")
    _add_map_args(sp, ("parabolic", "mating"))

    sp = sub.add_parser("cf", help="continued fraction and bounded-type check")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--bound", type=int)
    sp.add_argument("--terms", type=int, default=16)

    sp = sub.add_parser("render", help="filled Julia set or mating picture (PNG + JSON sidecar)")
    _add_map_args(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--width", type=int, default=512)
    sp.add_argument("--height", type=int, default=512)
    sp.add_argument("--center", default="0", help="complex centre, e.g. 0.1-0.2j")
    sp.add_argument("--span", type=float, default=4.0)
    sp.add_argument("--maxiter", type=int)
    sp.add_argument("--escape-radius", type=float, default=4.0)
    sp.add_argument("--palette", choices=["classic", "mono"], default="classic")
    sp.add_argument("--rays", nargs="*", default=[], help="angles to overlay (polynomials only)")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _CONTROL and v is not None}
    return RunConfig(ns.command, to_jsonable(params))


def run_config(cfg: RunConfig, threads: Optional[int] = None) -> Tuple[Any, str]:
    if cfg.command not in COMMANDS:
        raise UsageError("unknown command %r" % cfg.command)
    params = dict(cfg.params)
    params["_threads"] = threads
    return COMMANDS[cfg.command](params)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.config:
            cfg = load_config(ns.config)
        elif ns.command is None:
            raise UsageError("a command is required", parser.format_help())
        else:
            cfg = config_from_args(ns)
        if ns.save_config:
            save_config(cfg, ns.save_config)
        result, text = run_config(cfg, ns.threads)
    except UsageError as e:
        sys.stderr.write("error: %s\n" % e)
        if e.usage:
            sys.stderr.write(e.usage)
        return EXIT_USAGE
    except NumericalFailure as e:
        sys.stderr.write("numerical failure (%s): %s\n" % (type(e).__name__, e))
        return EXIT_NUMERIC
    except (MatingError, ValueError, TypeError, KeyError, OSError) as e:
        sys.stderr.write("error: %s\n" % e)
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE
    if ns.json:
        sys.stdout.write(emit_json(result, kind=cfg.command).decode())
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
