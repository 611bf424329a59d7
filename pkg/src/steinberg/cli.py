"""Command-line harness.

Every subcommand prints (and optionally writes) one JSON report.  Exit status:
0 when all checks pass, 1 when a check fails, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

from . import __version__, braid, chevalley, rings, weyl
from .braid import find_good_element, good_decomposition
from .chevalley import ChevalleyError
from .crosssec import (
    build_inverse,
    make_problem,
    orbit_count,
    sigma_unipotent_count,
    spaltenstein_demo,
    symbolic_xi_maps,
    t_w_invariants,
    verify_theorem,
    xi,
    xi_inverse,
)
from .polyfam import jacobian_det, verify_two_sided_inverse
from .rings import RingMap, frobenius, identity_map, make_ring
from .rootdata import RootDatum, build_root_datum, datum_from_json, make_datum_automorphism
from .weyl import TwistedClass, class_of, delta_classes, format_word, parse_word, weyl_group

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    type: str | None = None
    datum_file: str | None = None
    lattice: str = "sc"
    ring: str = "Fq:2"
    delta: str = "id"
    chi: str = "id"
    class_sel: str = "all-elliptic"
    w_sel: str = "all-min"
    output: str | None = None
    csv: str | None = None
    jobs: int = 1
    timings: bool = False
    # ceilings (defaults are the library's)
    braid_state_ceiling: int = braid.STATE_CEILING
    monomial_ceiling: int = rings.DEFAULT_MONOMIAL_CEILING
    weyl_ceiling: int = weyl.ENUMERATION_CEILING
    cell_table_limit: int = chevalley.CELL_TABLE_LIMIT

    def resolved(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("output", "csv", "jobs")}
        out["version"] = __version__
        return out


# ---------------------------------------------------------------------------
# resolution


def resolve_datum(cfg: RunConfig):
    if cfg.datum_file:
        path = Path(cfg.datum_file)
        if not path.exists():
            raise ConfigError(f"datum file {path} does not exist")
        d, delta = datum_from_json(path.read_text())
        if cfg.delta != "id":
            delta = _parse_delta(d, cfg.delta)
        return d, delta
    if not cfg.type:
        raise ConfigError("give --type or --datum")
    d = build_root_datum(cfg.type, cfg.lattice)
    return d, _parse_delta(d, cfg.delta)


def _parse_delta(d: RootDatum, text: str):
    if text == "id":
        return make_datum_automorphism(d)
    perm = [int(t) - 1 for t in text.split(",")]
    return make_datum_automorphism(d, perm)


def resolve_chi(ring, text: str) -> RingMap:
    if text == "id":
        return identity_map(ring)
    if text.startswith("frob:"):
        return frobenius(ring, int(text[5:]))
    raise ConfigError(f"chi must be 'id' or 'frob:<q>', got {text!r}")


def resolve_classes(d: RootDatum, delta, sel: str) -> list[TwistedClass]:
    if sel == "all-elliptic":
        return [c for c in delta_classes(d, delta) if c.elliptic]
    w = weyl_group(d).from_word(parse_word(sel))
    return [class_of(w, delta)]


def resolve_ws(c: TwistedClass, sel: str):
    if sel == "all-min":
        return list(c.min_length_elements)
    w = weyl_group(c.delta.datum).from_word(parse_word(sel))
    if w not in c.min_length_elements:
        raise ConfigError(f"w = {format_word(w.word)} is not in C_min of the selected class")
    return [w]


def _targets(cfg: RunConfig):
    d, delta = resolve_datum(cfg)
    out = []
    for c in resolve_classes(d, delta, cfg.class_sel):
        if not c.elliptic:
            raise ConfigError(f"class of {format_word(c.representative.word)} is not elliptic")
        for w in resolve_ws(c, cfg.w_sel):
            out.append(w.word)
    return d, delta, out


# ---------------------------------------------------------------------------
# workers (module level so a process pool can pickle them)


def apply_ceilings(cfg: RunConfig) -> None:
    """Install the configured ceilings (also called inside worker processes)."""
    braid.STATE_CEILING = cfg.braid_state_ceiling
    rings.DEFAULT_MONOMIAL_CEILING = cfg.monomial_ceiling
    weyl.ENUMERATION_CEILING = cfg.weyl_ceiling
    chevalley.CELL_TABLE_LIMIT = cfg.cell_table_limit


def _problem(cfg: RunConfig, word):
    apply_ceilings(cfg)
    d, delta = resolve_datum(cfg)
    ring = make_ring(cfg.ring)
    w = weyl_group(d).from_word(word)
    return make_problem(d, ring, w, delta, resolve_chi(ring, cfg.chi))


def _verify_job(args):
    cfg, word, check_inverse = args
    p = _problem(cfg, word)
    rep = verify_theorem(p, check_inverse=check_inverse, timings=cfg.timings)
    ok = rep["injective"] and rep["surjective"] and rep.get("inverse_ok", True)
    return ok, rep


def _inverse_job(args):
    cfg, word = args
    p = _problem(cfg, word)
    G = p.group
    inv = build_inverse(p)
    fails = []
    # Ξ' ∘ Ξ on the domain
    for uc, u in G.u_items:
        for zc, z in G.cell(p.w.word).items():
            u2, z2 = xi_inverse(inv, xi(p, u, z))
            if u2 != u or z2 != z:
                fails.append({"u": list(uc), "z": list(zc)})
                break
        if fails:
            break
    # Ξ ∘ Ξ' on the cell
    if not fails:
        for zc, z in G.cell(p.w.word).items():
            for uc, u in G.u_items:
                g = z * u
                u2, z2 = xi_inverse(inv, g)
                if xi(p, u2, z2) != g:
                    fails.append({"cell_point": [list(zc), list(uc)]})
                    break
            if fails:
                break
    rep = {"config": p.config(), "inverse": inv.to_json(), "round_trips_ok": not fails,
           "witnesses": fails}
    return not fails, rep


def _orbit_job(args):
    cfg, word = args
    p = _problem(cfg, word)
    rep = orbit_count(p)
    rep["config"] = p.config()
    ok = rep["free"] and rep["orbits"] == rep["expected_orbits"]
    return ok, rep


def _run_jobs(fn, jobs, n_workers):
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(cfg: RunConfig):
    d, delta = resolve_datum(cfg)
    classes = []
    for c in delta_classes(d, delta):
        entry = c.to_json()
        if c.elliptic:
            g = find_good_element(c)
            e, y_star = good_decomposition(g, delta)
            entry["good_element"] = format_word(g.word)
            entry["y_star"] = [format_word(y.word) for y in y_star]
        classes.append(entry)
    rep = {"classes": classes, "n_classes": len(classes),
           "n_elliptic": sum(1 for c in classes if c["elliptic"])}
    return True, rep


def cmd_verify_xi(cfg: RunConfig):
    _, _, words = _targets(cfg)
    results = _run_jobs(_verify_job, [(cfg, w, True) for w in words], cfg.jobs)
    return all(ok for ok, _ in results), {"results": [r for _, r in results]}


def cmd_inverse_check(cfg: RunConfig):
    _, _, words = _targets(cfg)
    results = _run_jobs(_inverse_job, [(cfg, w) for w in words], cfg.jobs)
    return all(ok for ok, _ in results), {"results": [r for _, r in results]}


def cmd_orbit_count(cfg: RunConfig):
    _, _, words = _targets(cfg)
    results = _run_jobs(_orbit_job, [(cfg, w) for w in words], cfg.jobs)
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["w", "orbits", "expected_orbits", "orbit_size", "free"])
            for _, r in results:
                wr.writerow([format_word([i - 1 for i in r["config"]["w"]]), r["orbits"],
                             r["expected_orbits"], " ".join(map(str, r["orbit_sizes"])), r["free"]])
    return all(ok for ok, _ in results), {"results": [r for _, r in results]}


def cmd_cross_section(cfg: RunConfig):
    d, delta, words = _targets(cfg)
    results = []
    ok = True
    for word in words:
        p = _problem(cfg, word)
        count, _ = sigma_unipotent_count(p)
        coxeter = len(word) == d.rank and len(set(word)) == d.rank
        entry = {"config": p.config(), "sigma_size": p.ring.size ** p.k, "unipotent": count,
                 "coxeter": coxeter}
        if coxeter:
            ok &= count == 1
        results.append(entry)
    return ok, {"results": results}


def cmd_twq(cfg: RunConfig):
    d, delta = resolve_datum(cfg)
    results = []
    constant = True
    for c in resolve_classes(d, delta, cfg.class_sel):
        if not c.elliptic:
            raise ConfigError(f"class of {format_word(c.representative.word)} is not elliptic")
        orders = set()
        for w in resolve_ws(c, cfg.w_sel):
            inv = t_w_invariants(w, delta)
            orders.add(inv.order)
            results.append({"class": format_word(c.representative.word), "w": format_word(w.word),
                            **inv.to_json()})
        constant &= len(orders) == 1
    return constant, {"results": results, "constant_on_C_min": constant}


def cmd_spaltenstein(cfg: RunConfig):
    rep = spaltenstein_demo(make_ring(cfg.ring))
    ok = rep["identity_holds"]
    if "action_free" in rep:
        ok &= not rep["action_free"]
    return ok, rep


def cmd_symbolic(cfg: RunConfig):
    d, delta, words = _targets(cfg)
    if not delta.is_identity or cfg.chi != "id":
        raise ConfigError("the symbolic layer needs δ = χ = id")
    if d.rank > 2:
        raise ConfigError("the symbolic layer is limited to rank <= 2")
    W = weyl_group(d)
    results = []
    ok = True
    for word in words:
        f, g = symbolic_xi_maps(d, W.from_word(word))
        jac = jacobian_det(f)
        two_sided = verify_two_sided_inverse(f, g)
        unit = jac.constant_value() in (1, -1)
        ok &= two_sided and unit
        results.append({"w": format_word(word), "xi": f.format(), "xi_inverse": g.format(),
                        "two_sided_inverse": two_sided,
                        "jacobian_det": jac.format(f.ring.variables)})
    return ok, {"results": results}


COMMANDS = {
    "classify": cmd_classify,
    "verify-xi": cmd_verify_xi,
    "inverse-check": cmd_inverse_check,
    "orbit-count": cmd_orbit_count,
    "cross-section": cmd_cross_section,
    "twq": cmd_twq,
    "spaltenstein": cmd_spaltenstein,
    "symbolic": cmd_symbolic,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steinberg", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--type", help="type string such as A2, B3 or A1xA2")
        sp.add_argument("--datum", dest="datum_file", help="root datum JSON file")
        sp.add_argument("--lattice", default="sc", choices=["sc", "ad"])
        sp.add_argument("--ring", default="PolyZ:x" if name == "spaltenstein" else "Fq:2")
        sp.add_argument("--delta", default="id", help="'id' or a 1-based permutation like 2,1")
        sp.add_argument("--chi", default="id", help="'id' or 'frob:<q>'")
        sp.add_argument("--class", dest="class_sel", default="all-elliptic",
                        help="representative word like 1,2 or 'all-elliptic'")
        sp.add_argument("--w", dest="w_sel", default="all-min", help="'all-min' or a word")
        sp.add_argument("--output", help="write the JSON report here")
        sp.add_argument("--csv", help="orbit-count: also write a CSV table")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--timings", action="store_true", help="include wall-clock timings")
        sp.add_argument("--braid-state-ceiling", type=int, default=braid.STATE_CEILING)
        sp.add_argument("--monomial-ceiling", type=int, default=rings.DEFAULT_MONOMIAL_CEILING)
        sp.add_argument("--weyl-ceiling", type=int, default=weyl.ENUMERATION_CEILING)
        sp.add_argument("--cell-table-limit", type=int, default=chevalley.CELL_TABLE_LIMIT,
                        help="largest q^(l(w)+l(w_I)) for which a full split table is built")
    return ap


def run(command: str, cfg: RunConfig) -> tuple[int, dict]:
    saved = RunConfig(braid_state_ceiling=braid.STATE_CEILING,
                      monomial_ceiling=rings.DEFAULT_MONOMIAL_CEILING,
                      weyl_ceiling=weyl.ENUMERATION_CEILING,
                      cell_table_limit=chevalley.CELL_TABLE_LIMIT)
    apply_ceilings(cfg)
    try:
        ok, rep = COMMANDS[command](cfg)
    except ChevalleyError as exc:
        # a consistency failure inside a check, not a bad configuration
        return EXIT_FAIL, {"command": command, "config": cfg.resolved(), "ok": False,
                           "error": str(exc)}
    except ValueError as exc:
        return EXIT_CONFIG, {"command": command, "config": cfg.resolved(), "error": str(exc)}
    finally:
        apply_ceilings(saved)
    report = {"command": command, "config": cfg.resolved(), "ok": bool(ok), **rep}
    return (EXIT_OK if ok else EXIT_FAIL), report


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    cfg = RunConfig(type=ns.type, datum_file=ns.datum_file, lattice=ns.lattice, ring=ns.ring,
                    delta=ns.delta, chi=ns.chi, class_sel=ns.class_sel, w_sel=ns.w_sel,
                    output=ns.output, csv=ns.csv, jobs=max(1, ns.jobs), timings=ns.timings,
                    braid_state_ceiling=ns.braid_state_ceiling, monomial_ceiling=ns.monomial_ceiling,
                    weyl_ceiling=ns.weyl_ceiling, cell_table_limit=ns.cell_table_limit)
    code, report = run(ns.command, cfg)
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    print(text)
    if "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
