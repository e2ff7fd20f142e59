"""Higher-order pattern unification for the meaning language.

Equations are solved modulo alpha/beta/eta and the ^/! reductions, restricted
to the decidable pattern fragment: a unification variable may only be applied
to distinct local constants.  Variables are classified as flex (essentially
existential, to be instantiated) or eigen (essentially universal, local
constants); each carries a birth timestamp, and no flex variable may be bound
to a term mentioning an eigen variable born after it unless that eigen is one
of its pattern arguments.

Flex variables occurring under the extension operator, F in (!F)(x), are
re-parameterized as F = ^F' so every flex occurrence is a plain applied
spine.  Flex subterms on the rigid side of an equation are raised (given the
abstracted eigenvariables they may legally depend on as extra arguments) and
pruned (stripped of dependencies that would escape), which keeps the solved
form most general.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .fstruct import SemTerm, SemVar
from .terms import (
    Abs,
    App,
    Arrow,
    BVar,
    Cap,
    Const,
    Cup,
    GlueError,
    MeaningTerm,
    MetaVar,
    S,
    Var,
    alpha_equal,
    app,
    bind_vars,
    free_vars,
    normalize,
    open_abs,
    spine,
)

FLEX = "flex"
EIGEN = "eigen"

_OLDEST = 0
_NEWEST = 1 << 60


class NonPatternError(GlueError):
    """The problem falls outside the supported pattern fragment; with the
    shipped lexicon this indicates a malformed meaning constructor."""


class InconsistentSubst(GlueError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name} received conflicting bindings")


@dataclass
class VarClass:
    """Classification of glue variables: flex or eigen, with birth stamps."""

    kinds: dict[str, str] = field(default_factory=dict)
    stamps: dict[str, int] = field(default_factory=dict)
    _counter: itertools.count = field(default_factory=lambda: itertools.count(1))

    def classify(self, name: str, kind: str, ts: Optional[int] = None) -> int:
        if name in self.kinds and self.kinds[name] != kind:
            raise GlueError(f"variable {name} classified twice")
        stamp = ts if ts is not None else next(self._counter)
        self.kinds[name] = kind
        self.stamps[name] = stamp
        return stamp

    def fresh_flex(self, hint: str, ty, ts: Optional[int] = None) -> MetaVar:
        name = f"{hint}?{next(self._counter)}"
        self.classify(name, FLEX, ts if ts is not None else next(self._counter))
        return MetaVar(name, ty)

    def fresh_eigen(self, hint: str, ty) -> Var:
        name = f"{hint}!{next(self._counter)}"
        self.classify(name, EIGEN)
        return Var(name, ty)

    def fresh_sem_flex(self, hint: str) -> SemVar:
        name = f"{hint}?{next(self._counter)}"
        self.classify(name, FLEX)
        return SemVar(name)

    def fresh_sem_eigen(self, hint: str) -> SemVar:
        name = f"{hint}!{next(self._counter)}"
        self.classify(name, EIGEN)
        return SemVar(name)

    def kind(self, name: str, default: str) -> str:
        return self.kinds.get(name, default)

    def is_flex_sem(self, v: SemVar) -> bool:
        return self.kind(v.name, FLEX) == FLEX

    def ts(self, name: str) -> int:
        if name in self.stamps:
            return self.stamps[name]
        # unregistered: engine-minted names carry ?/!; anything else is
        # treated as oldest (an unscoped local constant)
        return _NEWEST if "?" in name else _OLDEST


class Substitution:
    """Triangular map from flex variables to terms / semantic structures.

    Bindings may mention other bound variables; application expands them
    recursively (the occurs check keeps the chains acyclic), so observable
    application is idempotent: applying twice equals applying once.
    """

    def __init__(self, terms=None, sems=None):
        self.terms: dict[str, MeaningTerm] = terms or {}
        self.sems: dict[str, SemTerm] = sems or {}

    def __repr__(self):
        from .terms import print_term

        items = [f"{k} -> {print_term(v)}" for k, v in self.terms.items()]
        items += [f"{k} -> {v!r}" for k, v in self.sems.items()]
        return "{" + ", ".join(items) + "}"

    def is_empty(self) -> bool:
        return not self.terms and not self.sems

    def apply_term(self, t: MeaningTerm) -> MeaningTerm:
        if not self.terms:
            return t
        return self._expand(t)

    def _expand(self, t: MeaningTerm) -> MeaningTerm:
        match t:
            case MetaVar(n, _) if n in self.terms:
                return self._expand(self.terms[n])
            case Abs(ty, b):
                return Abs(ty, self._expand(b))
            case App(f, a):
                return App(self._expand(f), self._expand(a))
            case Cap(b):
                return Cap(self._expand(b))
            case Cup(b):
                return Cup(self._expand(b))
            case _:
                return t

    def nf(self, t: MeaningTerm) -> MeaningTerm:
        return normalize(self.apply_term(t))

    def walk_sem(self, s: SemTerm) -> SemTerm:
        while isinstance(s, SemVar) and s.name in self.sems:
            s = self.sems[s.name]
        return s

    def bind(self, name: str, value: MeaningTerm) -> "Substitution":
        assert name not in self.terms, f"{name} bound twice"
        value = normalize(self.apply_term(value))
        assert name not in free_vars(value), f"occurs check slipped for {name}"
        terms = dict(self.terms)
        terms[name] = value
        return Substitution(terms, self.sems)

    def bind_sem(self, name: str, value: SemTerm) -> "Substitution":
        value = self.walk_sem(value)
        sems = dict(self.sems)
        sems[name] = value
        return Substitution(self.terms, sems)


# ---------------------------------------------------------------------------
# Core solver


def _find_cup_flex(t: MeaningTerm) -> Optional[MetaVar]:
    """First flex variable heading a spine under a ! operator, if any."""
    match t:
        case Cup(b):
            head, _ = spine(b)
            if isinstance(head, MetaVar):
                return head
            return _find_cup_flex(b)
        case Abs(_, b) | Cap(b):
            return _find_cup_flex(b)
        case App(f, a):
            return _find_cup_flex(f) or _find_cup_flex(a)
        case _:
            return None


def _reparam_cup(su: Substitution, g: MetaVar, classes: VarClass) -> Substitution:
    """Bind g = \\z... ^g'(z...) so (!g)(x...) spines become plain patterns."""
    arg_tys = []
    ty = g.ty
    while not (isinstance(ty, Arrow) and ty.left == S):
        if not isinstance(ty, Arrow):
            raise NonPatternError(f"! applied to non-intensional flex {g.name}")
        arg_tys.append(ty.left)
        ty = ty.right
    inner_ty = ty.right
    fresh_ty = inner_ty
    for at in reversed(arg_tys):
        fresh_ty = Arrow(at, fresh_ty)
    g2 = classes.fresh_flex(g.name.split("?")[0], fresh_ty, ts=classes.ts(g.name))
    n = len(arg_tys)
    body = app(g2, *[BVar(n - 1 - i) for i in range(n)])
    value: MeaningTerm = Cap(body)
    for at in reversed(arg_tys):
        value = Abs(at, value)
    return su.bind(g.name, value)


def _pattern_args(f: MetaVar, args: list[MeaningTerm]) -> list[Var]:
    seen = set()
    out = []
    for a in args:
        if not isinstance(a, Var) or a.name in seen:
            raise NonPatternError(
                f"{f.name} applied to non-pattern arguments "
                f"(outside the decidable fragment)"
            )
        seen.add(a.name)
        out.append(a)
    return out


def _mixed_pattern_args(f: MetaVar, args: list[MeaningTerm]):
    """Pattern arguments inside a rigid right-hand side: distinct eigens or
    locally bound variables."""
    seen = set()
    out = []
    for a in args:
        key = ("v", a.name) if isinstance(a, Var) else ("b", getattr(a, "index", None))
        if not isinstance(a, (Var, BVar)) or key in seen:
            raise NonPatternError(
                f"{f.name} applied to non-pattern arguments "
                f"(outside the decidable fragment)"
            )
        seen.add(key)
        out.append(a)
    return out


class _Fail(Exception):
    """Internal: the current equation has no solution."""


def _result_ty(ty, n):
    for _ in range(n):
        ty = ty.right
    return ty


def _arg_tys(ty, n):
    out = []
    for _ in range(n):
        out.append(ty.left)
        ty = ty.right
    return out


def _needs_rewrite(g: MetaVar, gargs, f: MetaVar, argnames, classes) -> bool:
    fts = classes.ts(f.name)
    gts = classes.ts(g.name)
    if gts > fts:
        return True  # lowering: g may not outlive f's horizon
    have = set()
    for a in gargs:
        if isinstance(a, Var):
            have.add(a.name)
            if a.name not in argnames and classes.ts(a.name) >= fts:
                return True  # pruning: this dependency could never be abstracted
    # raising: an abstracted eigen old enough for g's solution to mention it
    # must be routed through an explicit argument
    return any(n not in have and classes.ts(n) < gts for n in argnames)


def _scan_rigid(t, f: MetaVar, argnames: set[str], classes: VarClass):
    """Find the first flex subterm of `t` that must be raised, pruned or
    lowered before f can be bound to (an abstraction of) t.  Raises _Fail on
    eigen escape or occurs violation.  Returns (g, g_args) or None."""
    fts = classes.ts(f.name)
    match t:
        case Var(n, _):
            if n not in argnames and classes.ts(n) > fts:
                raise _Fail
            return None
        case MetaVar() | App() if isinstance(spine(t)[0], MetaVar):
            head, args = spine(t)
            if head.name == f.name:
                raise _Fail  # occurs check
            gargs = _mixed_pattern_args(head, args)
            if _needs_rewrite(head, gargs, f, argnames, classes):
                return (head, gargs)
            return None
        case App(fn, a):
            return _scan_rigid(fn, f, argnames, classes) or _scan_rigid(
                a, f, argnames, classes
            )
        case Abs(_, b) | Cap(b) | Cup(b):
            return _scan_rigid(b, f, argnames, classes)
        case _:
            return None


def _rewrite_flex(su, g: MetaVar, gargs, f: MetaVar, argvars: list[Var], classes):
    """Replace g by a fresh variable whose arguments are exactly those it may
    keep (pruning) plus the abstracted eigens it may depend on (raising)."""
    fts = classes.ts(f.name)
    argnames = {v.name for v in argvars}
    by_name = {v.name: v for v in argvars}
    kept_idx = []
    for i, a in enumerate(gargs):
        if isinstance(a, BVar):
            kept_idx.append(i)
        elif a.name in argnames or classes.ts(a.name) < fts:
            kept_idx.append(i)
        # otherwise pruned: such a dependency could never be abstracted
    have = {a.name for a in gargs if isinstance(a, Var)}
    gts = classes.ts(g.name)
    raised = [
        by_name[n]
        for n in sorted(argnames - have, key=lambda n: classes.ts(n))
        if classes.ts(n) < gts
    ]
    n = len(gargs)
    orig_tys = _arg_tys(g.ty, n)
    new_ty = _result_ty(g.ty, n)
    for v in reversed(raised):
        new_ty = Arrow(v.ty, new_ty)
    for i in reversed(kept_idx):
        new_ty = Arrow(orig_tys[i], new_ty)
    g2 = classes.fresh_flex(g.name.split("?")[0], new_ty, ts=min(fts, gts))
    body = app(
        g2,
        *[BVar(n - 1 - i) for i in kept_idx],
        *[v for v in raised],
    )
    value: MeaningTerm = body
    for ty in reversed(orig_tys):
        value = Abs(ty, value)
    return su.bind(g.name, value)


def _flex_rigid(su, f: MetaVar, args, rhs, classes) -> Optional[Substitution]:
    argvars = _pattern_args(f, args)
    argnames = {v.name for v in argvars}
    while True:
        rhs = su.nf(rhs)
        try:
            found = _scan_rigid(rhs, f, argnames, classes)
        except _Fail:
            return None
        if found is None:
            break
        g, gargs = found
        su = _rewrite_flex(su, g, gargs, f, argvars, classes)
    value = bind_vars(argvars, rhs)
    return su.bind(f.name, value)


def _flex_flex(su, f: MetaVar, fargs, g: MetaVar, gargs, classes):
    fvars = _pattern_args(f, fargs)
    gvars = _pattern_args(g, gargs)
    if f.name == g.name:
        if len(fvars) != len(gvars):
            return None
        kept = [i for i in range(len(fvars)) if fvars[i].name == gvars[i].name]
        if len(kept) == len(fvars):
            return su
        n = len(fvars)
        orig_tys = _arg_tys(f.ty, n)
        new_ty = _result_ty(f.ty, n)
        for i in reversed(kept):
            new_ty = Arrow(orig_tys[i], new_ty)
        h = classes.fresh_flex(f.name.split("?")[0], new_ty, ts=classes.ts(f.name))
        body = app(h, *[BVar(n - 1 - i) for i in kept])
        value: MeaningTerm = body
        for ty in reversed(orig_tys):
            value = Abs(ty, value)
        return su.bind(f.name, value)
    if not fvars and not gvars:
        if classes.ts(f.name) < classes.ts(g.name):
            f, g = g, f  # bind the younger to the older
        return _flex_rigid_flexhead(su, f, g, g, [], classes)
    if not fvars:
        return _flex_rigid_flexhead(su, f, app(g, *gvars), g, gvars, classes)
    if not gvars:
        return _flex_rigid_flexhead(su, g, app(f, *fvars), f, fvars, classes)
    # different heads, arguments on both sides: both collapse onto a fresh
    # variable over the arguments they can each still see
    gnames = {v.name for v in gvars}
    shared = [v for v in fvars if v.name in gnames]
    res_ty = _result_ty(f.ty, len(fvars))
    h_ty = res_ty
    for v in reversed(shared):
        h_ty = Arrow(v.ty, h_ty)
    h = classes.fresh_flex(
        f.name.split("?")[0], h_ty, ts=min(classes.ts(f.name), classes.ts(g.name))
    )

    def binding(params, ty):
        n = len(params)
        idx = {v.name: n - 1 - i for i, v in enumerate(params)}
        body = app(h, *[BVar(idx[v.name]) for v in shared])
        value: MeaningTerm = body
        for pty in reversed(_arg_tys(ty, n)):
            value = Abs(pty, value)
        return value

    su = su.bind(f.name, binding(fvars, f.ty))
    return su.bind(g.name, binding(gvars, g.ty))


def _flex_rigid_flexhead(su, f, rhs, g, gvars, classes):
    """Bind the 0-ary f to the flex-headed spine g(ys), lowering/pruning g
    first when needed."""
    fts = classes.ts(f.name)
    bad = [v for v in gvars if classes.ts(v.name) >= fts]
    if classes.ts(g.name) > fts or bad:
        su = _rewrite_flex(su, g, list(gvars), f, [], classes)
        return _flex_rigid(su, f, [], su.nf(rhs), classes)
    return su.bind(f.name, rhs)


def solve(
    su: Substitution, l: MeaningTerm, r: MeaningTerm, classes: VarClass
) -> Optional[Substitution]:
    """Extend `su` to make l and r equal modulo the term theory, or return
    None.  Raises NonPatternError outside the fragment."""
    l, r = su.nf(l), su.nf(r)
    if alpha_equal(l, r):
        return su
    g = _find_cup_flex(l) or _find_cup_flex(r)
    if g is not None:
        return solve(_reparam_cup(su, g, classes), l, r, classes)
    if isinstance(l, Abs) or isinstance(r, Abs):
        return _solve_abs(su, l, r, classes)
    hl, al = spine(l)
    hr, ar = spine(r)
    lfx = isinstance(hl, MetaVar)
    rfx = isinstance(hr, MetaVar)
    if lfx and rfx:
        return _flex_flex(su, hl, al, hr, ar, classes)
    if lfx:
        return _flex_rigid(su, hl, al, r, classes)
    if rfx:
        return _flex_rigid(su, hr, ar, l, classes)
    if isinstance(l, Cap) or isinstance(r, Cap):
        if isinstance(l, Cap) and isinstance(r, Cap):
            return solve(su, l.body, r.body, classes)
        capped, other = (l, r) if isinstance(l, Cap) else (r, l)
        if isinstance(other, Var):
            # ^b = v only if b = !v: variables denote index-independent values
            return solve(su, capped.body, Cup(other), classes)
        return None
    # rigid-rigid
    if len(al) != len(ar):
        return None
    su2 = _solve_head(su, hl, hr, classes)
    if su2 is None:
        return None
    for x, y in zip(al, ar):
        su2 = solve(su2, x, y, classes)
        if su2 is None:
            return None
    return su2


def _solve_abs(su, l, r, classes):
    lty = l.var_ty if isinstance(l, Abs) else r.var_ty
    v = classes.fresh_eigen("w", lty)
    lb = open_abs(l, v) if isinstance(l, Abs) else normalize(App(l, v))
    rb = open_abs(r, v) if isinstance(r, Abs) else normalize(App(r, v))
    return solve(su, lb, rb, classes)


def _solve_head(su, hl, hr, classes):
    match hl, hr:
        case Const(a, _), Const(b, _):
            return su if a == b else None
        case Var(a, _), Var(b, _):
            return su if a == b else None
        case Cup(a), Cup(b):
            return solve(su, a, b, classes)
        case _:
            return None


def solve_sem(
    su: Substitution, a: SemTerm, b: SemTerm, classes: VarClass
) -> Optional[Substitution]:
    """First-order unification over semantic structures."""
    a, b = su.walk_sem(a), su.walk_sem(b)
    if a == b:
        return su
    aflex = isinstance(a, SemVar) and classes.is_flex_sem(a)
    bflex = isinstance(b, SemVar) and classes.is_flex_sem(b)
    if aflex and bflex:
        if classes.ts(a.name) < classes.ts(b.name):
            a, b = b, a
        return su.bind_sem(a.name, b)
    if aflex or bflex:
        var, val = (a, b) if aflex else (b, a)
        if isinstance(val, SemVar) and classes.ts(val.name) > classes.ts(var.name):
            return None  # eigen structure would escape its scope
        return su.bind_sem(var.name, val)
    return None


# ---------------------------------------------------------------------------
# Public operations


def unify(
    equations: list[tuple[MeaningTerm, MeaningTerm]],
    classes: Optional[VarClass] = None,
    subst: Optional[Substitution] = None,
) -> Optional[Substitution]:
    """Most general unifier of the meaning-term equations within the pattern
    fragment, or None when rigid heads clash or a check fails."""
    su = subst or Substitution()
    classes = classes or VarClass()
    for l, r in equations:
        su = solve(su, l, r, classes)
        if su is None:
            return None
    return su


def apply(su: Substitution, target):
    """Apply a substitution to a meaning term (formulas are handled by
    glue.subst_formula)."""
    return su.nf(target)


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """apply(compose(s1, s2), t) == apply(s2, apply(s1, t))."""
    terms = {}
    for k, v in s1.terms.items():
        terms[k] = s2.nf(v)
    for k, v in s2.terms.items():
        if k in terms:
            if not alpha_equal(terms[k], s2.nf(v)):
                raise InconsistentSubst(k)
        else:
            terms[k] = v
    sems = {}
    for k, v in s1.sems.items():
        sems[k] = s2.walk_sem(v)
    for k, v in s2.sems.items():
        if k in sems:
            if sems[k] != s2.walk_sem(v):
                raise InconsistentSubst(k)
        else:
            sems[k] = v
    return Substitution(terms, sems)
