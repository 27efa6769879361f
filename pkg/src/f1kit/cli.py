"""Command-line front end.

Input documents (JSON or TOML) map entity names to tables carrying a
``kind`` field: ``monoid``, ``aset``, ``morphism``, ``sequence``,
``scheme``, ``sheaf`` or ``sheaf_morphism``.  Built-in names need no
input: ``F1``, ``F1[T]`` (alias ``F1T``), ``F1[T,T^-1]``,
``F1[T1,...,Tn]``, ``F1[T]/(T^k)``, ``F1[Z/2xZ/3]``, ``F1e`` (the monoid
``{0, 1, e}``), ``A1``, ``P1``, ``Pn(n)``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import re
import sys
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import abgroup
from . import aset as asets
from . import monoid as mo
from . import scheme as sch
from . import ktheory as kt

log = logging.getLogger("f1kit")

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_UNSUPPORTED = 0, 2, 3, 4


class ParseError(ValueError):
    """Malformed input; ``location`` names the offending entity or file."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class ResolutionError(ParseError):
    pass


# --------------------------------------------------------------------------
# built-in objects

_GROUP_RE = re.compile(r"^F1\[(Z/\d+(?:xZ/\d+)*)\]$")
_POLY_RE = re.compile(r"^F1\[([A-Za-z]\w*(?:,[A-Za-z]\w*)*)\]$")
_TRUNC_RE = re.compile(r"^F1\[T\]/\(T\^(\d+)\)$")
_PN_RE = re.compile(r"^(?:Pn\((\d+)\)|P(\d+))$")


def builtin_monoid(name: str) -> mo.Monoid | None:
    if name == "F1":
        return mo.F1()
    if name in ("F1[T]", "F1T"):
        return mo.polynomial(1)
    if name == "F1[T,T^-1]":
        return mo.laurent(1)
    if name == "F1e":
        return mo.idempotent_monoid()
    m = _TRUNC_RE.match(name)
    if m:
        return mo.truncated_polynomial(int(m.group(1)))
    m = _GROUP_RE.match(name)
    if m:
        return mo.group_monoid([int(p[2:]) for p in m.group(1).split("x")])
    m = _POLY_RE.match(name)
    if m:
        names = m.group(1).split(",")
        return mo.polynomial(len(names), names)
    return None


def builtin_scheme(name: str) -> sch.SchemeAtlas | None:
    m = _PN_RE.match(name)
    if m:
        return sch.projective_space(int(m.group(1) or m.group(2)))
    if name == "A1":
        return sch.spec(mo.polynomial(1), "A1")
    return None


# --------------------------------------------------------------------------
# workspace


def _load_document(path: Path) -> tuple[dict, bytes]:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(str(exc), str(path)) from None
    text = data.decode("utf-8", errors="replace")
    if path.suffix == ".toml":
        loaders = [tomllib.loads]
    elif path.suffix == ".json":
        loaders = [json.loads]
    else:
        loaders = [json.loads, tomllib.loads]
    last = None
    for load in loaders:
        try:
            doc = load(text)
            break
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
            last = exc
    else:
        raise ParseError(f"not valid JSON or TOML ({last})", str(path))
    if not isinstance(doc, dict):
        raise ParseError("top level must be a table of named entities", str(path))
    return doc, data


class Workspace:
    """Named entities from the input documents, resolved on load."""

    KINDS = ("monoid", "aset", "morphism", "sequence", "scheme", "sheaf", "sheaf_morphism")

    def __init__(self, docs: Sequence[tuple[str, dict]] = ()):
        self.raw: dict[str, tuple[str, dict]] = {}
        for origin, doc in docs:
            for name, ent in doc.items():
                loc = f"{origin}:{name}"
                if name in self.raw:
                    raise ParseError("duplicate entity name", loc)
                if not isinstance(ent, dict) or ent.get("kind") not in self.KINDS:
                    raise ParseError(f"entity needs a kind among {', '.join(self.KINDS)}", loc)
                self.raw[name] = (loc, ent)
        self.built: dict[str, Any] = {}
        self._busy: set[str] = set()
        for name in sorted(self.raw):
            self.get(name)

    def kind(self, name: str) -> str | None:
        if name in self.raw:
            return self.raw[name][1]["kind"]
        if builtin_monoid(name) is not None:
            return "monoid"
        if builtin_scheme(name) is not None:
            return "scheme"
        return None

    def get(self, name: str, kind: str | None = None):
        if name not in self.raw:
            obj = builtin_monoid(name) if kind in (None, "monoid") else None
            if obj is None and kind in (None, "scheme"):
                obj = builtin_scheme(name)
            if obj is None and kind == "scheme":
                A = builtin_monoid(name)
                obj = sch.spec(A, name) if A is not None else None
            if obj is None:
                raise ResolutionError(f"unknown {kind or 'entity'} {name!r}")
            key = (name, kind)
            return self.built.setdefault(key, obj)
        loc, ent = self.raw[name]
        if kind is not None and ent["kind"] != kind:
            if kind == "scheme" and ent["kind"] == "monoid":
                return sch.spec(self.get(name, "monoid"), name)
            raise ResolutionError(f"{name!r} is a {ent['kind']}, expected a {kind}")
        if name in self.built:
            return self.built[name]
        if name in self._busy:
            raise ResolutionError("circular reference", loc)
        self._busy.add(name)
        try:
            obj = getattr(self, "_build_" + ent["kind"])(ent, loc)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"missing or malformed field {exc}", loc) from None
        finally:
            self._busy.discard(name)
        self.built[name] = obj
        return obj

    # builders -------------------------------------------------------------
    def _build_monoid(self, ent: dict, loc: str):
        doc = {k: v for k, v in ent.items() if k != "kind"}
        if "builtin" in doc:
            A = builtin_monoid(doc["builtin"])
            if A is None:
                raise ResolutionError(f"unknown built-in monoid {doc['builtin']!r}", loc)
            return A
        return mo.from_dict(doc)

    def _build_aset(self, ent: dict, loc: str):
        return asets.from_dict(self.get(ent["monoid"], "monoid"), ent)

    def _build_morphism(self, ent: dict, loc: str):
        M = self.get(ent["source"], "aset")
        N = self.get(ent["target"], "aset")
        return asets.check_morphism(M, N, ent["map"])

    def _build_sequence(self, ent: dict, loc: str):
        return asets.check_ses(self.get(ent["i"], "morphism"), self.get(ent["j"], "morphism"))

    def _build_scheme(self, ent: dict, loc: str):
        if "builtin" in ent:
            X = builtin_scheme(ent["builtin"])
            if X is None:
                raise ResolutionError(f"unknown built-in scheme {ent['builtin']!r}", loc)
            return X
        charts = [self.get(c, "monoid") for c in ent["charts"]]
        overlaps = {}
        for rec in ent.get("overlaps", []):
            i, j = int(rec["i"]), int(rec["j"])
            phi = _parse_phi(rec["phi"], charts[i], charts[j], loc)
            overlaps[(i, j)] = (_parse_vec(rec["f_i"], charts[i]), phi)
            if "f_j" in rec:
                back = rec.get("phi_back")
                back = _parse_phi(back, charts[j], charts[i], loc) if back is not None else _invert(phi, loc)
                overlaps[(j, i)] = (_parse_vec(rec["f_j"], charts[j]), back)
        return sch.SchemeAtlas(charts, overlaps, ent.get("names"))

    def _build_sheaf(self, ent: dict, loc: str):
        if "wedge" in ent:
            return sch.wedge_sheaves(*[self.get(p, "sheaf") for p in ent["wedge"]])
        X = self.get(ent["scheme"], "scheme")
        if "twist" in ent:
            return sch.twisted(X, int(ent["twist"]))
        data = ent["chart_data"]
        gluing = {}
        if all(isinstance(d, dict) and "free" in d for d in data):
            for rec in ent.get("gluing", []):
                entries = []
                for e in rec["psi"]:
                    to, unit = (e["to"], e["unit"]) if isinstance(e, dict) else e
                    entries.append((int(to), tuple(int(x) for x in unit)))
                gluing[(int(rec["i"]), int(rec["j"]))] = entries
            ranks = {int(d["free"]) for d in data}
            if len(ranks) != 1:
                raise ParseError("free chart data must share one rank", loc)
            return sch.free_sheaf(X, ranks.pop(), gluing)
        charts = [asets.from_dict(X.charts[c], d) for c, d in enumerate(data)]
        for rec in ent.get("gluing", []):
            psi = rec["psi"]
            gluing[(int(rec["i"]), int(rec["j"]))] = (
                {int(k): int(v) for k, v in psi.items()} if isinstance(psi, dict) else [int(v) for v in psi]
            )
        return sch.concrete_sheaf(X, charts, gluing)

    def _build_sheaf_morphism(self, ent: dict, loc: str):
        F = self.get(ent["source"], "sheaf")
        G = self.get(ent["target"], "sheaf")
        maps = []
        for cm in ent["charts"]:
            if F.kind == "free":
                maps.append([(None, None) if e is None or e[0] is None else (int(e[0]), tuple(e[1])) for e in cm])
            else:
                maps.append([int(v) for v in cm])
        return sch.check_sheaf_morphism(F, G, maps)


def _parse_vec(v, A) -> tuple[int, ...]:
    if isinstance(v, dict):
        out = [0] * A.dim
        for nm, x in v.items():
            out[list(A.coord_names).index(nm)] = int(x)
        return tuple(out)
    return tuple(int(x) for x in v)


def _parse_phi(phi, A, B, loc) -> list[list[int]]:
    if isinstance(phi, dict):
        rows = []
        for nm in A.coord_names:
            if nm not in phi:
                raise ParseError(f"phi gives no image for {nm}", loc)
            rows.append(list(_parse_vec(phi[nm], B)))
        return rows
    return [[int(x) for x in r] for r in phi]


def _invert(phi: list[list[int]], loc: str) -> list[list[int]]:
    n = len(phi)
    if any(len(r) != n for r in phi):
        raise ParseError("give phi_back for a non-square phi", loc)
    rows = []
    for k in range(n):
        sol = abgroup.solve_left(phi, [int(i == k) for i in range(n)])
        if sol is None:
            raise ParseError("phi is not invertible over Z; give phi_back", loc)
        rows.append(sol)
    return rows


# --------------------------------------------------------------------------
# commands


def _monoid_summary(A: mo.Monoid) -> Any:
    if isinstance(A, mo.AffineMonoid):
        return A.describe()
    return {"backend": "table", "size": len(A.elements())}


def cmd_spec(ws: Workspace, target: str) -> tuple[dict, str]:
    kind = ws.kind(target)
    X = ws.get(target, "scheme")
    pts = X.points()
    spec_pairs = sorted((a, b) for a, b in X.specialization() if a != b)
    doc = {
        "points": [{"index": p.index, "chart": X.names[p.chart], "prime": p.prime.format()} for p in pts],
        "specializations": [list(p) for p in spec_pairs],
        "stalks": [_monoid_summary(X.stalk(p).monoid) for p in pts],
        "generic_points": [p.index for p in X.generic_points()],
    }
    if kind == "monoid":
        A = X.charts[0]
        doc["nilradical"] = mo.nilradical(A).format()
        doc["units"] = mo.units(A).group.describe()
        doc["idempotents"] = [A.format(e) for e in mo.idempotents(A)]
    return doc, f"Spec {target}: {len(pts)} points"


def cmd_pic(ws: Workspace, target: str) -> tuple[dict, str]:
    X = ws.get(target, "scheme")
    G = sch.picard_group(X).group
    return {"pic": G.to_dict(), "describe": G.describe()}, f"Pic {target} = {G.describe()}"


def cmd_k0(ws: Workspace, target: str) -> tuple[dict, str]:
    if ws.kind(target) == "monoid":
        rep = kt.k0_affine(ws.get(target, "monoid"))
        return rep.to_dict(), f"K0(Spec {target}) = {rep.group.describe()}, ring {rep.ring}"
    X = ws.get(target, "scheme")
    if X.n_charts == 1:
        rep = kt.k0_affine(X.charts[0])
        return rep.to_dict(), f"K0({target}) = {rep.group.describe()}"
    rep = kt.k0_integral_scheme(X)
    if isinstance(rep, kt.GroupRingReport):
        return rep.to_dict(), f"K0({target}) = Z[Pic] with Pic = {rep.pic.describe()}, basis O(m)"
    return rep.to_dict(), f"K0({target}) = {rep.group.describe()}"


def cmd_g0(ws: Workspace, target: str, bound: int) -> tuple[dict, str]:
    X = builtin_scheme(target) if target not in ws.raw else None
    if X is not None and X.projective_dim is not None:
        n = X.projective_dim
        if n == 1:
            rep, cert = kt.g0_p1_truncated(bound)
            doc = rep.to_dict()
            return doc, f"G0(P1) truncated at {bound}: {rep.group.describe()}; certificate ok={cert.ok}"
        cert = kt.k0_image_in_g0_pn(n, max(bound, n + 1))
        return cert.to_dict(), f"image of K0(P{n}) in truncated G0: rank {cert.rank}"
    A = ws.get(target, "monoid")
    if isinstance(A, mo.AffineMonoid) and A.a == 0 and A.b == 0 and not A.ideal:
        rep = kt.burnside(list(A.torsion))
        return rep.to_dict(), f"G0(Spec {target}) = {rep.k0.group.describe()} (Burnside, {len(rep.labels)} subgroups)"
    rep = kt.g0_affine_truncated(A, bound)
    return rep.to_dict(), f"G0(Spec {target}) truncated at {bound}: {rep.group.describe()}"


def cmd_qnerve(ws: Workspace, pointed: int | None, free: str | None, max_size: int, include_nerve: bool) -> tuple[dict, str]:
    if pointed is not None:
        objs, labels = kt.pointed_sets_family(pointed)
        fam = f"pointed sets of cardinality <= {pointed}"
    elif free is not None:
        objs, labels = kt.free_family(ws.get(free, "monoid"), max_size)
        fam = f"free {free}-sets of rank <= {max_size}"
    else:
        raise ParseError("give --pointed-sets N or --free MONOID")
    nerve = kt.build_q_category(objs, labels)
    comps = kt.pi1_of_classifying_space(nerve)
    k0 = kt.family_grothendieck(objs, labels)
    ab = [c.abelianization.describe() for c in comps]
    doc = {
        "family": fam,
        "objects": len(objs),
        "morphisms": len(nerve.morphisms),
        "triangles": len(nerve.triangles),
        "associativity_triples": nerve.triples_checked,
        "pi1_abelianization": ab,
        "grothendieck_group": k0.group.describe(),
        "agree": ab == [k0.group.describe()],
    }
    if include_nerve:
        doc["nerve"] = nerve.to_dict()
    return doc, f"{fam}: pi1(BQ)^ab = {', '.join(ab)}; K0 = {k0.group.describe()}"


def cmd_check(ws: Workspace, target: str) -> tuple[dict, str]:
    kind = ws.kind(target)
    obj = ws.get(target)
    if kind == "sheaf":
        doc = {
            "quasi_coherent": True,
            "coherent": obj.is_coherent(),
            "locally_projective": obj.is_locally_projective(),
            "locally_free": obj.is_locally_free(),
        }
    elif kind == "aset":
        doc = {"valid": True, "projective": asets.is_projective(obj), "generators": obj.generators()}
    elif kind == "morphism":
        norm = asets.is_normal(obj)
        doc = {
            "equivariant": True,
            "mono": obj.injective,
            "epi": obj.surjective,
            "normal": bool(norm),
            "witness": list(norm.witness) if norm.witness else None,
            "z_kernel_rank_agrees": asets.z_kernel_rank_check(obj),
            "admissible_mono": asets.is_admissible_mono(obj),
            "admissible_epi": asets.is_admissible_epi(obj),
        }
    elif kind == "sequence":
        doc = {"exact": obj.is_exact, "admissible": obj.is_admissible}
        doc["split"] = asets.split_ses(obj) is not None if obj.is_exact else None
    elif kind == "sheaf_morphism":
        norm = sch.sheaf_morphism_is_normal(obj)
        doc = {"normal": norm.normal, "chart": norm.chart, "witness": list(norm.witness) if norm.witness else None}
    else:
        raise mo.UnsupportedError(f"nothing to check for a {kind}")
    flags = ", ".join(f"{k}={v}" for k, v in doc.items() if isinstance(v, bool))
    return doc, f"{target} ({kind}): {flags}"


def cmd_zbase(ws: Workspace, target: str) -> tuple[dict, str]:
    if ws.kind(target) == "monoid":
        P = mo.emit_zring_presentation(ws.get(target, "monoid"))
        return {"presentation": P.to_dict(), "ring": P.format()}, P.format()
    X = ws.get(target, "scheme")
    Z = sch.emit_scheme_zpresentation(X)
    return Z.to_dict(), f"{len(Z.charts)} chart rings, {len(Z.gluings)} gluings"


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="f1kit", description="Monoid schemes, A-sets and their K-theory.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", default=[], metavar="FILE", help="JSON or TOML workspace (repeatable)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("spec", "points, specialization and stalks"),
        ("pic", "Picard group by Cech cohomology"),
        ("k0", "K0 report"),
        ("g0", "truncated G0 report"),
        ("check", "validate a sheaf, A-set, morphism or sequence"),
        ("zbase", "presentation after base change to Z"),
    ):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("target", nargs="?")
        if name == "k0":
            c.add_argument("--scheme")
            c.add_argument("--monoid")
        if name == "g0":
            c.add_argument("--truncate", type=int, default=3, metavar="B")
    q = sub.add_parser("qnerve", parents=[common], help="Q-construction nerve and pi1")
    q.add_argument("--pointed-sets", type=int, metavar="N")
    q.add_argument("--free", metavar="MONOID")
    q.add_argument("--max-size", type=int, default=2, metavar="N")
    q.add_argument("--nerve", action="store_true", help="include the full simplicial export")
    return p


def _digest(args: argparse.Namespace, blobs: list[bytes]) -> str:
    h = hashlib.sha256()
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in ("input", "format", "verbose")}
    h.update(json.dumps(opts, sort_keys=True).encode())
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    return h.hexdigest()


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
    try:
        docs, blobs = [], []
        for f in args.input:
            doc, data = _load_document(Path(f))
            docs.append((Path(f).name, doc))
            blobs.append(data)
        ws = Workspace(docs)
        cmd = args.command
        if cmd == "k0":
            target = args.scheme or args.monoid or args.target
            if args.scheme:
                ws.get(args.scheme, "scheme")
            if not target:
                raise ParseError("k0 needs a target")
            result, summary = cmd_k0(ws, target)
        elif cmd == "qnerve":
            result, summary = cmd_qnerve(ws, args.pointed_sets, args.free, args.max_size, args.nerve)
        else:
            if not args.target:
                raise ParseError(f"{cmd} needs a target")
            if cmd == "g0":
                result, summary = cmd_g0(ws, args.target, args.truncate)
            else:
                result, summary = globals()["cmd_" + cmd](ws, args.target)
    except ParseError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PARSE
    except (mo.UnsupportedError, NotImplementedError) as exc:
        print(f"unsupported: {exc}", file=err)
        return EXIT_UNSUPPORTED
    except (mo.MonoidError, asets.ASetError, sch.SchemeError, kt.QuasiExactError, kt.RelationError, ValueError) as exc:
        print(f"invalid: {exc}", file=err)
        return EXIT_VALIDATION
    report = {
        "command": args.command,
        "target": getattr(args, "target", None),
        "input_digest": _digest(args, blobs),
        "result": result,
    }
    if args.format == "json":
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
        print(summary, file=err)
    else:
        out.write(f"{summary}\ninput digest {report['input_digest']}\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
