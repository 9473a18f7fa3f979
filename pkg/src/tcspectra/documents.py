"""JSON configuration documents: validation, parsing and canonical emission.

A document is validated against ``schema/config.schema.json`` (draft
2020-12) and then built into a configuration object. Rationals travel as
reduced ``"p/q"`` strings, so emitting a parsed document reproduces its
rational fields byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

from jsonschema import Draft202012Validator

from .configurations import Configuration, ConfigurationError, FlagIdealConfig, NormalConeConfig, ToricConfig
from .geometry import GeometryError, PLConcave, Polytope
from .rational import RationalFormatError, parse_rat

SCHEMA_VERSION = 1

# canonical key order for emission
_KEY_ORDER = ("schema_version", "name", "description", "kind", "polytope", "affines", "rounding", "vertex", "c", "flag", "degree")


class DocumentError(ValueError):
    """Invalid configuration document; ``pointer`` is a JSON pointer into it."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("tcspectra").joinpath("schema/config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


@dataclass(eq=False)
class ConfigDocument:
    """A validated document and the configuration it describes.

    Two documents are equal when their JSON data are equal.
    """

    data: dict
    config: Configuration = field(repr=False)

    @property
    def kind(self) -> str:
        return self.data["kind"]

    @property
    def name(self) -> str | None:
        return self.data.get("name")

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfigDocument) and self.data == other.data


def _rat(value: str, pointer: str):
    try:
        return parse_rat(value)
    except RationalFormatError as exc:
        raise DocumentError(pointer, str(exc)) from None


def _walk_rats(node: Any, pointer: str, keys=("normal", "offset", "gradient", "constant", "vertex", "c")) -> None:
    """Check every rational string in the document for reducedness."""
    if isinstance(node, dict):
        for k, v in node.items():
            p = f"{pointer}/{k}"
            if k in keys:
                for i, s in enumerate(v if isinstance(v, list) else [v]):
                    _rat(s, f"{p}/{i}" if isinstance(v, list) else p)
            else:
                _walk_rats(v, p, keys)
    elif isinstance(node, list):
        for i, v in enumerate(node):
            _walk_rats(v, f"{pointer}/{i}", keys)


def _build_polytope(doc: dict) -> Polytope:
    pd = doc["polytope"]
    n = pd["dim"]
    rows = []
    for i, h in enumerate(pd["halfspaces"]):
        p = f"/polytope/halfspaces/{i}"
        if len(h["normal"]) != n:
            raise DocumentError(p + "/normal", f"expected {n} entries, got {len(h['normal'])}")
        rows.append((tuple(parse_rat(a) for a in h["normal"]), parse_rat(h["offset"])))
    try:
        return Polytope(rows)
    except (GeometryError, ValueError) as exc:
        raise DocumentError("/polytope", str(exc)) from None


def _build(doc: dict) -> Configuration:
    kind = doc["kind"]
    if kind == "flag_ideal":
        flag = doc["flag"]
        for i, ideal in enumerate(flag):
            lens = {len(g) for g in ideal}
            if len(lens) != 1:
                raise DocumentError(f"/flag/{i}", "generators have different lengths")
        try:
            cfg = FlagIdealConfig([[tuple(g) for g in ideal] for ideal in flag], parse_rat(doc["c"]), doc["degree"])
        except ConfigurationError as exc:
            ptr = "/c" if "c must" in str(exc) else "/flag"
            raise DocumentError(ptr, str(exc)) from None
        if "polytope" in doc and _build_polytope(doc).halfspaces != cfg.polytope.halfspaces:
            raise DocumentError("/polytope", "polytope must be the degree-scaled standard simplex")
        return cfg
    P = _build_polytope(doc)
    n = P.dim
    if kind == "toric_pl":
        affs = []
        for i, a in enumerate(doc["affines"]):
            if len(a["gradient"]) != n:
                raise DocumentError(f"/affines/{i}/gradient", f"expected {n} entries, got {len(a['gradient'])}")
            affs.append((tuple(parse_rat(x) for x in a["gradient"]), parse_rat(a["constant"])))
        try:
            return ToricConfig(P, PLConcave(tuple(affs)), doc.get("rounding", "ceil"))
        except ConfigurationError as exc:
            raise DocumentError("/affines", str(exc)) from None
    vertex = tuple(parse_rat(x) for x in doc["vertex"])
    if vertex not in P.vertices:
        raise DocumentError("/vertex", f"{doc['vertex']} is not a vertex of the polytope")
    try:
        return NormalConeConfig(P, P.vertices.index(vertex), parse_rat(doc["c"]))
    except ConfigurationError as exc:
        ptr = "/c" if str(exc).startswith("c") else "/vertex"
        raise DocumentError(ptr, str(exc)) from None


def validate(data: Any) -> None:
    """Raise :class:`DocumentError` for the first schema violation, if any."""
    validator = Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        if err.validator == "not":
            raise DocumentError(_pointer(err.absolute_path), f"field not allowed for kind {data.get('kind')!r}")
        raise DocumentError(_pointer(err.absolute_path), err.message)
    _walk_rats(data, "")


def from_data(data: dict) -> ConfigDocument:
    validate(data)
    return ConfigDocument(data, _build(data))


def parse_config(text: str | bytes) -> ConfigDocument:
    """Parse UTF-8 JSON text into a validated :class:`ConfigDocument`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_data(data)


def load_config(path: str | Path) -> ConfigDocument:
    return parse_config(Path(path).read_bytes())


def _dump(node: Any, indent: int) -> str:
    pad = "  " * indent
    if isinstance(node, dict):
        if not node:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_dump(v, indent + 1)}' for k, v in node.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(node, list):
        if all(not isinstance(v, (dict, list)) for v in node):
            return "[" + ", ".join(json.dumps(v) for v in node) + "]"
        items = [f"{pad}  {_dump(v, indent + 1)}" for v in node]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return json.dumps(node, ensure_ascii=False)


def _canonical(data: dict) -> dict:
    out = {k: data[k] for k in _KEY_ORDER if k in data}
    if "polytope" in out:
        out["polytope"] = {"dim": data["polytope"]["dim"], "halfspaces": [{"normal": h["normal"], "offset": h["offset"]} for h in data["polytope"]["halfspaces"]]}
    if "affines" in out:
        out["affines"] = [{"gradient": a["gradient"], "constant": a["constant"]} for a in data["affines"]]
    return out


def emit(doc: ConfigDocument | dict) -> str:
    """Canonical JSON text: fixed key order, two-space indent, scalar lists inline."""
    data = doc.data if isinstance(doc, ConfigDocument) else doc
    return _dump(_canonical(data), 0) + "\n"


def corpus_names() -> list[str]:
    root = resources.files("tcspectra").joinpath("corpus")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def corpus_text(name: str) -> str:
    return resources.files("tcspectra").joinpath(f"corpus/{name}.json").read_text(encoding="utf-8")


def load_corpus() -> dict[str, ConfigDocument]:
    """Every shipped configuration document, keyed by file stem."""
    return {name: parse_config(corpus_text(name)) for name in corpus_names()}
