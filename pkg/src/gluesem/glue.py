"""Glue-language formulas, the lexicon of meaning constructors, and premise
construction.

A lexical entry pairs a trigger (a PRED or SPEC value) with a constructor
template mentioning the anchor ``up``; instantiating the template against an
f-structure node resolves every sigma path to a concrete semantic structure.
The premises of a derivation are the instantiated constructors of all
triggered entries, one occurrence each.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import terms
from .fstruct import (
    RESTR,
    ROOT,
    VAR,
    FDocument,
    FStructError,
    FStructure,
    MissingAttribute,
    Path,
    SemStruct,
    SemTerm,
    SemVar,
    read_sexps,
    resolve,
    sigma,
    sigma_ant,
)
from .terms import (
    Arrow,
    Base,
    Const,
    GlueError,
    MeaningTerm,
    MeaningType,
    MetaVar,
    TypingContext,
    elaborate,
    standard_context,
    subst_map,
)
from .unify import Substitution

SEM = "sem"  # binder kind for quantification over semantic structures


class NoEntry(GlueError):
    def __init__(self, value, attr):
        super().__init__(f"no lexical entry for {attr} value {value!r}")


class AmbiguousEntry(GlueError):
    def __init__(self, value, attr):
        super().__init__(f"multiple lexical entries match {attr} value {value!r}")


class IllTypedConstructor(GlueError):
    def __init__(self, entry, detail):
        super().__init__(f"ill-typed constructor for {entry!r}: {detail}")


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class SigmaPath:
    """Template-only sigma term: the `slot` projection of the f-structure
    reached from the anchor by `fpath`.  slot ANT resolves through the
    document's anaphor links."""

    fpath: Path
    slot: str


@dataclass(frozen=True)
class Means:
    sem: Union[SemTerm, SigmaPath]
    term: MeaningTerm
    ty: MeaningType


@dataclass(frozen=True)
class PropAtom:
    name: str


@dataclass(frozen=True)
class Tensor:
    left: "GlueFormula"
    right: "GlueFormula"


@dataclass(frozen=True)
class Limp:
    ant: "GlueFormula"
    cons: "GlueFormula"


@dataclass(frozen=True)
class Forall:
    var: str
    kind: Union[MeaningType, str]  # a meaning type, or SEM
    body: "GlueFormula"


GlueFormula = Union[Means, PropAtom, Tensor, Limp, Forall]


def map_formula(f: GlueFormula, on_means) -> GlueFormula:
    match f:
        case Means():
            return on_means(f)
        case Tensor(l, r):
            return Tensor(map_formula(l, on_means), map_formula(r, on_means))
        case Limp(a, c):
            return Limp(map_formula(a, on_means), map_formula(c, on_means))
        case Forall(v, k, b):
            return Forall(v, k, map_formula(b, on_means))
        case _:
            return f


def inst_term_var(f: GlueFormula, name: str, value: MeaningTerm) -> GlueFormula:
    """Replace the quantified meaning variable `name` throughout."""
    return map_formula(
        f, lambda m: Means(m.sem, subst_map(m.term, {name: value}), m.ty)
    )


def inst_sem_var(f: GlueFormula, name: str, value: SemTerm) -> GlueFormula:
    """Replace the quantified structure variable `name` throughout."""

    def on_means(m):
        sem = value if m.sem == SemVar(name) else m.sem
        return Means(sem, m.term, m.ty)

    return map_formula(f, on_means)


def subst_formula(f: GlueFormula, su: Substitution) -> GlueFormula:
    """Apply a unifier substitution to every atom (terms are normalized)."""
    if su.is_empty():
        return f
    return map_formula(
        f, lambda m: Means(su.walk_sem(m.sem), su.nf(m.term), m.ty)
    )


def formula_free_vars(f: GlueFormula, bound=frozenset()) -> set[str]:
    """Free glue-variable names (meaning metavariables and structure
    variables) of a formula."""
    match f:
        case Means(sem, term, _):
            out = {n for n in terms.free_meta_vars(term) if n not in bound}
            if isinstance(sem, SemVar) and sem.name not in bound:
                out.add(sem.name)
            return out
        case Tensor(l, r) | Limp(l, r):
            return formula_free_vars(l, bound) | formula_free_vars(r, bound)
        case Forall(v, _, b):
            return formula_free_vars(b, bound | {v})
        case _:
            return set()


def _ty_text(ty: MeaningType) -> str:
    if isinstance(ty, Arrow):
        left = _ty_atom(ty.left)
        return f"{left} -> {_ty_text(ty.right)}"
    return repr(ty)


def _ty_atom(ty: MeaningType) -> str:
    return f"({_ty_text(ty)})" if isinstance(ty, Arrow) else repr(ty)


def print_formula(f: GlueFormula) -> str:
    def go(g, prec):
        # precedence: 0 forall/limp body, 1 tensor, 2 atom
        match g:
            case Forall():
                binders = []
                while isinstance(g, Forall):
                    kind = "sem" if g.kind == SEM else _ty_text(g.kind)
                    binders.append(f"{g.var}:{kind}")
                    g = g.body
                text = f"forall {', '.join(binders)}. {go(g, 0)}"
                return f"({text})" if prec > 0 else text
            case Limp(a, c):
                text = f"{go(a, 1)} -o {go(c, 0)}"
                return f"({text})" if prec > 0 else text
            case Tensor(l, r):
                text = f"{go(l, 2)} * {go(r, 1)}"
                return f"({text})" if prec > 1 else text
            case Means(sem, term, ty):
                return f"{sem!r} ~>_{_ty_atom(ty)} {terms.print_term(term)}"
            case PropAtom(name):
                return name
        raise AssertionError(f"bad formula {g!r}")

    return go(f, 0)


# ---------------------------------------------------------------------------
# Lexicon


@dataclass(frozen=True)
class LexEntry:
    headword: str
    category: str
    trigger_attr: str  # PRED or SPEC
    trigger_value: str
    variant: Optional[str]  # None (both), "intensional" or "extensional"
    constraints: tuple[tuple[Path, str], ...]
    template: GlueFormula


@dataclass
class Lexicon:
    entries: list[LexEntry]
    ctx: TypingContext
    extensional: bool = False


def _expect_list(node, what):
    val, line = node
    if not isinstance(val, list):
        raise FStructError(f"expected {what}", line)
    return val, line


def _symbol(node, what):
    val, line = node
    if not isinstance(val, str) or val.startswith('"'):
        raise FStructError(f"expected {what}", line)
    return val


def _string(node, what):
    val, line = node
    if not isinstance(val, str) or not val.startswith('"'):
        raise FStructError(f"expected quoted {what}", line)
    return val[1:]


def _parse_type_sexp(node) -> Union[MeaningType, str]:
    val, line = node
    if isinstance(val, str):
        if val == SEM:
            return SEM
        if val in ("e", "t", "s"):
            return Base(val)
        raise FStructError(f"unknown type {val!r}", line)
    if not val or _symbol(val[0], "->") != "->":
        raise FStructError("expected (-> T T ...)", line)
    tys = [_parse_type_sexp(n) for n in val[1:]]
    if len(tys) < 2 or any(t == SEM for t in tys):
        raise FStructError("bad arrow type", line)
    return terms.arrow(*tys)


def _parse_sem_sexp(node, binders) -> Union[SigmaPath, SemVar]:
    val, line = node
    if isinstance(val, str):
        if binders.get(val) == SEM:
            return SemVar(val)
        raise FStructError(f"unbound structure variable {val!r}", line)
    if not val:
        raise FStructError("empty sigma term", line)
    head = _symbol(val[0], "sigma operator")
    if head == "sig":
        if len(val) != 2:
            raise FStructError("(sig F) takes one argument", line)
        fval, fline = val[1]
        if fval == "up":
            return SigmaPath((), ROOT)
        flist, _ = _expect_list(val[1], "(path up ATTR ...)")
        if not flist or _symbol(flist[0], "path") != "path" or _symbol(flist[1], "up") != "up":
            raise FStructError("expected (path up ATTR ...)", fline)
        attrs = tuple(_symbol(n, "attribute").upper() for n in flist[2:])
        return SigmaPath(attrs, ROOT)
    if head in ("svar", "srestr", "sant"):
        inner = _parse_sem_sexp(val[1], binders)
        if not isinstance(inner, SigmaPath) or inner.slot != ROOT:
            raise FStructError(f"({head} ...) needs a (sig ...) argument", line)
        slot = {"svar": VAR, "srestr": RESTR, "sant": "ANT"}[head]
        return SigmaPath(inner.fpath, slot)
    raise FStructError(f"unknown sigma operator {head!r}", line)


def _parse_term_sexp(node, binders, lam_bound) -> MeaningTerm:
    val, line = node
    if isinstance(val, str):
        if val.startswith('"'):
            raise FStructError("strings are not terms", line)
        if val in lam_bound:
            return terms.BVar(lam_bound.index(val))
        kind = binders.get(val)
        if kind is not None and kind != SEM:
            return MetaVar(val, kind)
        return Const(val, None)
    if not val:
        raise FStructError("empty term", line)
    head_val = val[0][0]
    if head_val == "cap":
        return terms.Cap(_parse_term_sexp(val[1], binders, lam_bound))
    if head_val == "cup":
        return terms.Cup(_parse_term_sexp(val[1], binders, lam_bound))
    if head_val == "lam":
        blist, bline = _expect_list(val[1], "(var TYPE)")
        if len(blist) != 2:
            raise FStructError("lambda binder is (var TYPE)", bline)
        name = _symbol(blist[0], "variable")
        ty = _parse_type_sexp(blist[1])
        if ty == SEM:
            raise FStructError("lambda cannot bind structure variables", bline)
        body = _parse_term_sexp(val[2], binders, [name] + lam_bound)
        return terms.Abs(ty, body)
    fn = _parse_term_sexp(val[0], binders, lam_bound)
    return terms.app(fn, *[_parse_term_sexp(n, binders, lam_bound) for n in val[1:]])


def parse_formula_sexp(node, binders=None) -> GlueFormula:
    """Parse a glue formula from its s-expression form."""
    binders = dict(binders or {})
    val, line = node
    lst, _ = _expect_list(node, "glue formula")
    if not lst:
        raise FStructError("empty formula", line)
    head = _symbol(lst[0], "connective")
    if head == "forall":
        blist, _ = _expect_list(lst[1], "binder list")
        if len(lst) != 3:
            raise FStructError("(forall BINDERS BODY)", line)
        names = []
        for b in blist:
            pair, bline = _expect_list(b, "(VAR TYPE)")
            if len(pair) != 2:
                raise FStructError("binder is (VAR TYPE)", bline)
            name = _symbol(pair[0], "variable")
            if name in binders:
                raise FStructError(f"shadowed quantifier variable {name}", bline)
            binders[name] = _parse_type_sexp(pair[1])
            names.append(name)
        body = parse_formula_sexp(lst[2], binders)
        for name in reversed(names):
            body = Forall(name, binders[name], body)
        return body
    if head == "limp":
        if len(lst) != 3:
            raise FStructError("(limp ANT CONS)", line)
        return Limp(
            parse_formula_sexp(lst[1], binders), parse_formula_sexp(lst[2], binders)
        )
    if head == "tensor":
        if len(lst) < 3:
            raise FStructError("(tensor A B ...)", line)
        parts = [parse_formula_sexp(n, binders) for n in lst[1:]]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Tensor(p, out)
        return out
    if head == "means":
        if len(lst) != 4:
            raise FStructError("(means SEM TERM TYPE)", line)
        sem = _parse_sem_sexp(lst[1], binders)
        ty = _parse_type_sexp(lst[3])
        if ty == SEM:
            raise FStructError("atom type cannot be sem", line)
        term = _parse_term_sexp(lst[2], binders, [])
        return Means(sem, term, ty)
    if head == "atom":
        return PropAtom(_symbol(lst[1], "atom name"))
    raise FStructError(f"unknown connective {head!r}", line)


def _check_template(entry_name: str, f: GlueFormula, ctx: TypingContext) -> GlueFormula:
    """Typecheck every atom of a constructor; returns the formula with
    constant types filled in from the context."""

    def on_means(m: Means) -> Means:
        try:
            term, ty = elaborate(m.term, ctx)
        except GlueError as e:
            raise IllTypedConstructor(entry_name, str(e)) from e
        if ty != m.ty:
            raise IllTypedConstructor(
                entry_name,
                f"atom declares type {m.ty!r} but term {terms.print_term(m.term)} "
                f"has type {ty!r}",
            )
        return Means(m.sem, term, m.ty)

    return map_formula(f, on_means)


def parse_lexicon(text: str, extensional: bool = False) -> Lexicon:
    """Parse a lexicon document.  Entries carrying a (variant ...) tag other
    than the selected one are skipped; (const NAME TYPE) forms extend the
    typing context."""
    variant = "extensional" if extensional else "intensional"
    ctx = standard_context(extensional)
    sexps = read_sexps(text)
    for node in sexps:
        lst, line = _expect_list(node, "lexicon form")
        if lst and _symbol(lst[0], "form") == "const":
            if len(lst) != 3:
                raise FStructError("(const NAME TYPE)", line)
            name = _symbol(lst[1], "constant name")
            ty = _parse_type_sexp(lst[2])
            if ty == SEM:
                raise FStructError("constants cannot have type sem", line)
            if name in ctx and ctx[name] != ty:
                raise FStructError(f"constant {name} redeclared at a new type", line)
            ctx[name] = ty

    entries = []
    for node in sexps:
        lst, line = _expect_list(node, "lexicon form")
        if not lst or _symbol(lst[0], "form") != "entry":
            continue
        if len(lst) < 4:
            raise FStructError("(entry \"WORD\" CAT ... (constructor F))", line)
        headword = _string(lst[1], "headword")
        category = _symbol(lst[2], "category")
        trigger_attr, trigger_value = "PRED", headword
        entry_variant = None
        constraints = []
        template_node = None
        for part in lst[3:]:
            plist, pline = _expect_list(part, "entry clause")
            tag = _symbol(plist[0], "entry clause")
            if tag == "trigger":
                trigger_attr = _symbol(plist[1], "attribute").upper()
                if trigger_attr not in ("PRED", "SPEC"):
                    raise FStructError("trigger attribute must be PRED or SPEC", pline)
                trigger_value = (
                    _string(plist[2], "trigger value") if len(plist) > 2 else headword
                )
            elif tag == "variant":
                entry_variant = _symbol(plist[1], "variant")
                if entry_variant not in ("intensional", "extensional"):
                    raise FStructError("variant is intensional or extensional", pline)
            elif tag == "syn":
                sem = _parse_sem_sexp(plist[1], {})
                constraints.append((sem.fpath, _string(plist[2], "value")))
            elif tag == "constructor":
                template_node = plist[1]
            else:
                raise FStructError(f"unknown entry clause {tag!r}", pline)
        if template_node is None:
            raise FStructError(f"entry {headword!r} has no constructor", line)
        if entry_variant is not None and entry_variant != variant:
            continue
        template = _check_template(headword, parse_formula_sexp(template_node), ctx)
        entries.append(
            LexEntry(
                headword,
                category,
                trigger_attr,
                trigger_value,
                entry_variant,
                tuple(constraints),
                template,
            )
        )
    return Lexicon(entries, ctx, extensional)


def load_lexicon(path: str, extensional: bool = False) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read(), extensional)


def parse_formula_document(text: str, ctx: TypingContext) -> GlueFormula:
    """Parse a standalone closed glue formula (for the theorem checker)."""
    sexps = read_sexps(text)
    if len(sexps) != 1:
        raise FStructError("formula file must hold exactly one formula")
    formula = _check_template("<formula>", parse_formula_sexp(sexps[0]), ctx)
    stray = formula_free_vars(formula)
    if stray:
        raise FStructError(f"formula is not closed: {sorted(stray)}")
    return formula


# ---------------------------------------------------------------------------
# Instantiation


def instantiate(entry: LexEntry, node: FStructure, doc: FDocument) -> GlueFormula:
    """Replace the anchor by `node`: every sigma path becomes a concrete
    semantic structure.

    A path into a grammatical function the node lacks (a transitive verb
    with no OBJ, a relational noun with no oblique) resolves to a hole
    structure nothing can ever mean: the constructor survives as an
    unusable premise, so incompleteness surfaces as underivability rather
    than as a parse error.
    """

    def on_means(m: Means) -> Means:
        if not isinstance(m.sem, SigmaPath):
            return m
        try:
            target = resolve(node, m.sem.fpath)
        except MissingAttribute:
            hole = SemStruct(f"{node.label}:{'.'.join(m.sem.fpath)}", "MISSING")
            return Means(hole, m.term, m.ty)
        if not isinstance(target, FStructure):
            raise FStructError(
                f"path {m.sem.fpath} from {node.label} names the atom "
                f"{target!r}, not an f-structure"
            )
        if m.sem.slot == "ANT":
            sem = sigma_ant(target, doc)
        else:
            sem = sigma(target, m.sem.slot)
        return Means(sem, m.term, m.ty)

    out = map_formula(entry.template, on_means)
    stray = formula_free_vars(out)
    assert not stray, f"instantiated constructor left variables open: {stray}"
    return out


def entry_matches(entry: LexEntry, node: FStructure) -> bool:
    if node.get(entry.trigger_attr) != entry.trigger_value:
        return False
    for path, value in entry.constraints:
        try:
            if resolve(node, path) != value:
                return False
        except GlueError:
            return False
    return True


@dataclass(frozen=True)
class Premise:
    word: str
    label: str
    formula: GlueFormula


def premises(doc: FDocument, lexicon: Lexicon) -> list[Premise]:
    """One instantiated constructor per (node, triggered entry) pair, in
    document order; determiners trigger via SPEC and heads via PRED, so a
    quantified NP node contributes twice."""
    out = []
    for node in doc.nodes():
        for attr in ("SPEC", "PRED"):
            value = node.get(attr)
            if value is None or isinstance(value, FStructure):
                continue
            matches = [
                e
                for e in lexicon.entries
                if e.trigger_attr == attr and entry_matches(e, node)
            ]
            if not matches:
                raise NoEntry(value, attr)
            if len(matches) > 1:
                raise AmbiguousEntry(value, attr)
            out.append(
                Premise(matches[0].headword, node.label, instantiate(matches[0], node, doc))
            )
    return out
