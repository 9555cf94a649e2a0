"""
Model I/O Module

Turns model expressions into validated fusion models and reads/writes the
model data format.

Expression grammar (left-associative tensor product):

    expr := term (("⊗" | "x" | "*") term)*
    term := leaf | "(" expr ")"
    leaf := ising | lattice:<m> | holomorphic:<c> | file:<path>

Model documents are JSON (or YAML for .yaml/.yml) with the fields labels,
vacuum, dual, mult, conf_dim, central_charge and optionally name, aliases,
advisories and lattice (a Gram matrix). Rationals are written as "p/q"
strings; tensor-product labels are lists of their component labels.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import yaml

from core.fusion_ring import Diagnostic, FusionModel, Label, label_name, tensor_product, validate_model
from core.voa_models import InvalidLatticeError, LatticeModel, holomorphic_model, ising_model, lattice_model

logger = logging.getLogger(__name__)

TENSOR_OPERATORS = ("⊗", "x", "*")
REQUIRED_FIELDS = ("labels", "vacuum", "dual", "mult", "conf_dim", "central_charge")
OPTIONAL_FIELDS = ("name", "aliases", "advisories", "lattice")


class ModelExpressionError(ValueError):
    """Raised for a malformed model expression; `position` is the offending character."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ModelFormatError(ValueError):
    """Raised for an unreadable or invalid model document."""

    def __init__(self, message: str, diagnostics: Optional[List[Diagnostic]] = None):
        self.diagnostics = list(diagnostics or [])
        details = "".join(f"\n  {d.law}: {d.message} {tuple(label_name(x) for x in d.witness)}"
                          for d in self.diagnostics)
        super().__init__(message + details)


Token = Tuple[str, int]


def tokenize(expr: str) -> List[Token]:
    """Split an expression into (text, position) tokens."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(expr):
        char = expr[pos]
        if char.isspace():
            pos += 1
        elif char in "()⊗*":
            tokens.append((char, pos))
            pos += 1
        else:
            start = pos
            while pos < len(expr) and not expr[pos].isspace() and expr[pos] not in "()⊗*":
                pos += 1
            tokens.append((expr[start:pos], start))
    return tokens


class _ExpressionParser:
    """Recursive descent over the token list."""

    def __init__(self, expr: str, base_dir: Optional[Path]):
        self.expr = expr
        self.tokens = tokenize(expr)
        self.pos = 0
        self.base_dir = base_dir

    def _peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _end(self) -> int:
        return len(self.expr)

    def parse(self) -> FusionModel:
        if not self.tokens:
            raise ModelExpressionError("Empty model expression", 0)
        model = self._expr()
        extra = self._peek()
        if extra is not None:
            raise ModelExpressionError(f"Unexpected {extra[0]!r}", extra[1])
        return model

    def _expr(self) -> FusionModel:
        model = self._term()
        while self._peek() is not None and self._peek()[0] in TENSOR_OPERATORS:
            self.pos += 1
            model = tensor_product(model, self._term())
        return model

    def _term(self) -> FusionModel:
        token = self._peek()
        if token is None:
            raise ModelExpressionError("Expression ends where a model was expected", self._end())
        text, where = token
        if text == "(":
            self.pos += 1
            model = self._expr()
            closing = self._peek()
            if closing is None or closing[0] != ")":
                raise ModelExpressionError("Missing ')'", closing[1] if closing else self._end())
            self.pos += 1
            return model
        if text in TENSOR_OPERATORS or text == ")":
            raise ModelExpressionError(f"Unexpected {text!r}", where)
        self.pos += 1
        return self._leaf(text, where)

    def _leaf(self, text: str, where: int) -> FusionModel:
        kind, _, arg = text.partition(":")
        if kind == "ising" and not arg:
            return ising_model()
        if kind == "lattice":
            try:
                m = int(arg)
            except ValueError:
                raise ModelExpressionError(f"lattice needs an integer pairing, got {arg!r}", where) from None
            return lattice_model(m)
        if kind == "holomorphic":
            try:
                c = Fraction(arg)
            except (ValueError, ZeroDivisionError):
                raise ModelExpressionError(f"holomorphic needs a rational central charge, got {arg!r}",
                                           where) from None
            return holomorphic_model(c)
        if kind == "file" and arg:
            path = Path(arg)
            if self.base_dir is not None and not path.is_absolute():
                path = self.base_dir / path
            return load_model_file(path)
        raise ModelExpressionError(f"Unknown model {text!r}", where)


def parse_model(expr: str, base_dir: Optional[Path] = None) -> FusionModel:
    """
    Build and validate the model named by an expression.

    Args:
        expr: e.g. "ising", "lattice:8 ⊗ holomorphic:8", "file:models/ising.json"
        base_dir: Directory that relative file: paths are resolved against

    Returns:
        FusionModel that passed validate_model

    Raises:
        ModelExpressionError: If the expression does not parse
        ModelFormatError: If a model file is unreadable or a law fails
        InvalidLatticeError: For lattice:m with m odd or below 2
    """
    model = _ExpressionParser(expr, base_dir).parse()
    diagnostics = validate_model(model)
    if diagnostics:
        raise ModelFormatError(f"Model {model.name} violates {len(diagnostics)} law(s):", diagnostics)
    logger.info("loaded model %s with %d labels", model.name, len(model.labels))
    return model


def _rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ModelFormatError(f"{where}: expected an integer or a \"p/q\" string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ModelFormatError(f"{where}: {value!r} is not a rational number") from None


def _read_document(path: Path) -> Dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                document = yaml.safe_load(f)
            else:
                document = json.load(f)
    except OSError as e:
        raise ModelFormatError(f"Cannot read model file {path}: {e}") from e
    except (ValueError, yaml.YAMLError) as e:
        raise ModelFormatError(f"Model file {path} is not well-formed: {e}") from e
    if not isinstance(document, dict):
        raise ModelFormatError(f"Model file {path} must hold a single object")
    return document


def _document_label(item, where: str) -> Label:
    """Labels are strings, integers, or lists of labels for tensor products."""
    if isinstance(item, list) and item:
        return tuple(_document_label(part, where) for part in item)
    if isinstance(item, bool) or not isinstance(item, (int, str)):
        raise ModelFormatError(f"{where}: label {item!r} must be a string, an integer or a list of labels")
    return item


def _document_lattice(gram, labels: Tuple[Label, ...]) -> LatticeModel:
    if not isinstance(gram, list) or not gram or not all(isinstance(row, list) for row in gram):
        raise ModelFormatError("lattice must be a Gram matrix (list of integer rows)")
    if any(isinstance(x, bool) or not isinstance(x, int) for row in gram for x in row):
        raise ModelFormatError("lattice: Gram matrix entries must be integers")
    try:
        if len(gram) == 1 and len(gram[0]) == 1:
            lattice = LatticeModel(gram[0][0])
        else:
            lattice = LatticeModel.from_gram(gram)
    except InvalidLatticeError as e:
        raise ModelFormatError(f"lattice: {e}") from e
    if lattice.rank == 1 and labels != tuple(range(lattice.m)):
        raise ModelFormatError(f"lattice: a rank-1 lattice model must have labels 0..{lattice.m - 1}")
    return lattice


def model_from_document(document: Dict, default_name: str = "model") -> FusionModel:
    """
    Build a (not yet validated) model from a parsed document.

    Raises:
        ModelFormatError: For missing or unknown fields and malformed entries
    """
    unknown = sorted(set(document) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS))
    if unknown:
        raise ModelFormatError(f"Unknown field(s): {', '.join(unknown)}")
    missing = [key for key in REQUIRED_FIELDS if key not in document]
    if missing:
        raise ModelFormatError(f"Missing field(s): {', '.join(missing)}")

    raw_labels = document["labels"]
    if not isinstance(raw_labels, list) or not raw_labels:
        raise ModelFormatError("labels must be a nonempty list")
    labels = tuple(_document_label(item, "labels") for item in raw_labels)
    by_name: Dict[str, Label] = {}
    for label in labels:
        if label_name(label) in by_name:
            raise ModelFormatError(f"Label {label_name(label)!r} appears twice")
        by_name[label_name(label)] = label

    def resolve(ref, where: str) -> Label:
        if isinstance(ref, list):
            ref = label_name(_document_label(ref, where))
        if isinstance(ref, bool) or str(ref) not in by_name:
            raise ModelFormatError(f"{where}: unknown label {ref!r}")
        return by_name[str(ref)]

    for key in ("dual", "conf_dim"):
        if not isinstance(document[key], dict):
            raise ModelFormatError(f"{key} must map label names to values")
    dual = {resolve(a, "dual"): resolve(b, "dual") for a, b in document["dual"].items()}
    conf_dim = {resolve(a, "conf_dim"): _rational(v, f"conf_dim[{a}]")
                for a, v in document["conf_dim"].items()}

    mult: Dict[Tuple[Label, Label, Label], int] = {}
    if not isinstance(document["mult"], list):
        raise ModelFormatError("mult must be a list of [a, b, c, N] entries")
    for entry in document["mult"]:
        if not isinstance(entry, list) or len(entry) != 4:
            raise ModelFormatError(f"mult entry {entry!r} is not [a, b, c, N]")
        a, b, c, n = entry
        if isinstance(n, bool) or not isinstance(n, int):
            raise ModelFormatError(f"mult entry {entry!r}: N must be an integer")
        key = (resolve(a, "mult"), resolve(b, "mult"), resolve(c, "mult"))
        if key in mult:
            raise ModelFormatError(f"mult entry for {tuple(entry[:3])} appears twice")
        if n:
            mult[key] = n

    aliases = document.get("aliases") or {}
    if not isinstance(aliases, dict):
        raise ModelFormatError("aliases must map alias text to label names")
    advisories = document.get("advisories") or []
    if not isinstance(advisories, list) or not all(isinstance(a, str) for a in advisories):
        raise ModelFormatError("advisories must be a list of strings")
    lattice = _document_lattice(document["lattice"], labels) if "lattice" in document else None

    return FusionModel(
        name=str(document.get("name") or default_name),
        labels=labels,
        vacuum=resolve(document["vacuum"], "vacuum"),
        dual=dual,
        mult=mult,
        conf_dim=conf_dim,
        central_charge=_rational(document["central_charge"], "central_charge"),
        aliases={str(alias): resolve(target, "aliases") for alias, target in aliases.items()},
        advisories=tuple(advisories),
        lattice=lattice,
    )


def load_model_file(path: Union[str, Path]) -> FusionModel:
    """
    Read a model document (JSON, or YAML by suffix).

    The result is not validated here; parse_model validates whole expressions.
    """
    path = Path(path)
    return model_from_document(_read_document(path), default_name=f"file:{path.name}")


def _plain(label: Label):
    if isinstance(label, tuple):
        return [_plain(part) for part in label]
    return label


def model_to_document(model: FusionModel) -> Dict:
    """
    Serializable document for a model.

    Tensor-product labels are written as lists; mapping keys use display names.
    """
    name = label_name
    document = {
        "name": model.name,
        "labels": [_plain(x) for x in model.labels],
        "vacuum": _plain(model.vacuum),
        "dual": {name(x): _plain(model.dual[x]) for x in model.labels},
        "mult": [[_plain(a), _plain(b), _plain(c), n]
                 for (a, b, c), n in sorted(model.mult.items(),
                                            key=lambda item: tuple(model.index(x) for x in item[0]))
                 if n],
        "conf_dim": {name(x): str(model.conf_dim[x]) for x in model.labels},
        "central_charge": str(model.central_charge),
    }
    if model.aliases:
        document["aliases"] = {alias: name(target) for alias, target in sorted(model.aliases.items())}
    if model.advisories:
        document["advisories"] = list(model.advisories)
    if model.lattice is not None:
        document["lattice"] = [list(row) for row in model.lattice.gram_matrix]
    return document


def dump_model(model: FusionModel, path: Optional[Union[str, Path]] = None) -> str:
    """
    Serialize a model, optionally writing it to `path`.

    Returns:
        The document text (YAML when path ends in .yaml/.yml, JSON otherwise)
    """
    document = model_to_document(model)
    if path is not None and Path(path).suffix.lower() in (".yaml", ".yml"):
        text = yaml.safe_dump(document, allow_unicode=True, sort_keys=False)
    else:
        text = json.dumps(document, indent=2, ensure_ascii=False) + "\n"
    if path is not None:
        try:
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text)
        except Exception as e:
            raise IOError(f"Failed to write model to {path}: {e}")
        logger.info("wrote model %s to %s", model.name, path)
    return text


def split_top_level(text: str, separator: str = ",") -> List[str]:
    """Split on separators that are not inside parentheses."""
    parts: List[str] = []
    depth = 0
    current = ""
    for char in text:
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        if char == separator and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += char
    parts.append(current)
    return parts


def parse_labels(model: FusionModel, text: Optional[str]) -> Tuple[Label, ...]:
    """
    Resolve a comma-separated label list such as "s,s,e" or "(1,s),(e,s)".

    An empty or missing list is the empty insertion.
    """
    if text is None or not text.strip():
        return ()
    return tuple(model.resolve_label(token) for token in split_top_level(text))
