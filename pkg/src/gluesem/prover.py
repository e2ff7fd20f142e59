"""Cut-free sequent proof search over the tensor fragment.

The search is goal-directed: invertible rules (PiR, LimpR, TensorL) are
applied eagerly, and when the goal is atomic one context formula is focused
and decomposed down to its head, which must unify with the goal.  Context
splitting is threaded lazily: each subproof consumes what it needs from the
resources it is handed and returns the leftovers, and a proof of the whole
sequent is one that leaves nothing over.  Universals focused on the left
introduce fresh flex variables; universals proved on the right introduce
fresh eigenvariables whose scope is policed by the unifier's timestamps.

Readings are the normalized meaning terms of the goal structure across all
proofs, deduplicated up to renaming of bound variables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .fstruct import ROOT, SemStruct, SemTerm, SemVar
from .glue import (
    Forall,
    GlueFormula,
    Limp,
    Means,
    Premise,
    PropAtom,
    SEM,
    Tensor,
    inst_sem_var,
    inst_term_var,
    print_formula,
    subst_formula,
)
from .terms import (
    GlueError,
    MeaningTerm,
    MeaningType,
    MetaVar,
    T,
    free_vars,
    print_term,
)
from .unify import Substitution, VarClass, solve, solve_sem


class BudgetExhausted(GlueError):
    def __init__(self, what):
        super().__init__(f"search budget exhausted ({what})")


class UnsolvedVariable(GlueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_steps: int = 100_000
    max_depth: int = 40


@dataclass(frozen=True)
class Sequent:
    context: tuple[GlueFormula, ...]
    goal: GlueFormula


@dataclass(frozen=True)
class Resource:
    rid: int
    formula: GlueFormula
    premise: Optional[int]  # index of the originating premise, if any
    tag: str


@dataclass(frozen=True)
class Derivation:
    rule: str  # Identity | TensorL | TensorR | LimpL | LimpR | PiL | PiR
    info: str
    children: tuple["Derivation", ...]
    consumed: frozenset[int]
    atom: Optional[GlueFormula] = None  # consumed atom, for Identity leaves
    fresh: tuple[str, ...] = ()  # variables introduced at PiL nodes

    def identity_leaves(self) -> list["Derivation"]:
        if self.rule == "Identity":
            return [self]
        return [l for c in self.children for l in c.identity_leaves()]


@dataclass(frozen=True)
class Reading:
    term: MeaningTerm
    text: str
    derivation: Derivation
    goal_sem: SemTerm
    substitution: Substitution


@dataclass
class SearchStats:
    steps: int = 0
    proofs: int = 0
    exhausted: bool = False


@dataclass
class EnumerationResult:
    readings: list[Reading]
    stats: SearchStats
    budget: SearchBudget


def _flatten_tensor(f: GlueFormula) -> list[GlueFormula]:
    if isinstance(f, Tensor):
        return _flatten_tensor(f.left) + _flatten_tensor(f.right)
    return [f]


class Prover:
    """One proof-search session: owns the variable registry and budget."""

    def __init__(self, budget: SearchBudget = SearchBudget()):
        self.budget = budget
        self.classes = VarClass()
        self.stats = SearchStats()
        self._rids = itertools.count(1)

    # -- plumbing -----------------------------------------------------------

    def _step(self, depth: int):
        self.stats.steps += 1
        if self.stats.steps > self.budget.max_steps:
            raise BudgetExhausted(f"max-steps {self.budget.max_steps}")
        if depth > self.budget.max_depth:
            raise BudgetExhausted(f"max-depth {self.budget.max_depth}")

    def _resource(self, formula, premise, tag) -> Resource:
        return Resource(next(self._rids), formula, premise, tag)

    # -- right (goal) rules -------------------------------------------------

    def prove(
        self, su: Substitution, ctx: tuple[Resource, ...], goal: GlueFormula, depth: int
    ) -> Iterator[tuple[Substitution, tuple[Resource, ...], Derivation]]:
        self._step(depth)
        match goal:
            case Forall(var, kind, body):
                if kind == SEM:
                    v: object = self.classes.fresh_sem_eigen(var)
                    inst = inst_sem_var(body, var, v)
                    vname = v.name
                else:
                    v = self.classes.fresh_eigen(var, kind)
                    inst = inst_term_var(body, var, v)
                    vname = v.name
                for su2, left2, d2 in self.prove(su, ctx, inst, depth + 1):
                    yield su2, left2, Derivation(
                        "PiR", f"{var} := {vname}", (d2,), d2.consumed
                    )
            case Limp(ant, cons):
                res = self._resource(ant, None, "assumption")
                for su2, left2, d2 in self.prove(su, ctx + (res,), cons, depth + 1):
                    if any(r.rid == res.rid for r in left2):
                        continue  # linear assumption left unused
                    yield su2, left2, Derivation(
                        "LimpR", f"assume {res.tag}#{res.rid}", (d2,), d2.consumed
                    )
            case Tensor(left, right):
                for su1, mid, d1 in self.prove(su, ctx, left, depth + 1):
                    for su2, out, d2 in self.prove(su1, mid, right, depth + 1):
                        yield su2, out, Derivation(
                            "TensorR", "", (d1, d2), d1.consumed | d2.consumed
                        )
            case Means() | PropAtom():
                seen = set()
                for i, res in enumerate(ctx):
                    # two plain premises with identical instantiated formulas
                    # are interchangeable: focusing the later one would only
                    # permute the proof.  Assumptions and split-out parts are
                    # excluded: they carry region obligations of their own.
                    if res.premise is not None:
                        key = subst_formula(res.formula, su)
                        if key in seen:
                            continue
                        seen.add(key)
                    rest = ctx[:i] + ctx[i + 1 :]
                    yield from self._focus(su, res, rest, goal, depth)
            case _:
                raise AssertionError(f"bad goal {goal!r}")

    # -- left (focused) rules -----------------------------------------------

    def _focus(
        self,
        su: Substitution,
        res: Resource,
        ctx: tuple[Resource, ...],
        goal: GlueFormula,
        depth: int,
    ):
        self._step(depth)
        f = res.formula
        pendings: list[GlueFormula] = []
        fresh_names: list[str] = []
        while True:
            if isinstance(f, Forall):
                if f.kind == SEM:
                    v: object = self.classes.fresh_sem_flex(f.var)
                    f = inst_sem_var(f.body, f.var, v)
                else:
                    v = self.classes.fresh_flex(f.var, f.kind)
                    f = inst_term_var(f.body, f.var, v)
                fresh_names.append(v.name)
            elif isinstance(f, Limp):
                pendings.append(f.ant)
                f = f.cons
            else:
                break

        def wrap(node: Derivation, pending_ds: list[Derivation]) -> Derivation:
            # innermost implication first: pendings were collected outermost-in
            for ant_d, pending in zip(reversed(pending_ds), reversed(pendings)):
                node = Derivation(
                    "LimpL",
                    print_formula(pending),
                    (ant_d, node),
                    ant_d.consumed | node.consumed,
                )
            if fresh_names:
                node = Derivation(
                    "PiL",
                    f"{res.tag}: {', '.join(fresh_names)}",
                    (node,),
                    node.consumed,
                    fresh=tuple(fresh_names),
                )
            return node

        if isinstance(f, (Means, PropAtom)):
            su2 = self._unify_atoms(su, f, goal)
            if su2 is None:
                return
            leaf = Derivation(
                "Identity", f"{res.tag}#{res.rid}", (), frozenset([res.rid]), atom=f
            )
            for su3, left3, pending_ds in self._prove_pendings(
                su2, ctx, pendings, depth
            ):
                yield su3, left3, wrap(leaf, pending_ds)
        elif isinstance(f, Tensor):
            parts = [
                self._resource(p, None, f"{res.tag}.{k}")
                for k, p in enumerate(_flatten_tensor(f), 1)
            ]
            part_ids = {p.rid for p in parts}
            for su2, left2, d2 in self.prove(su, ctx + tuple(parts), goal, depth + 1):
                if any(r.rid in part_ids for r in left2):
                    # like a linear assumption, a split-out conjunct must be
                    # consumed within the branch that introduced it; letting
                    # it feed some other formula's antecedent would cross the
                    # context split of this implication
                    continue
                node = Derivation(
                    "TensorL",
                    f"{res.tag}#{res.rid}",
                    (d2,),
                    d2.consumed | frozenset([res.rid]),
                )
                for su3, left3, pending_ds in self._prove_pendings(
                    su2, left2, pendings, depth
                ):
                    yield su3, left3, wrap(node, pending_ds)
        else:
            raise AssertionError(f"bad focused formula {f!r}")

    def _prove_pendings(
        self,
        su: Substitution,
        ctx: tuple[Resource, ...],
        pendings: list[GlueFormula],
        depth: int,
    ):
        """Prove the collected antecedents left to right on the remaining
        resources."""
        if not pendings:
            yield su, ctx, []
            return

        def chain(su, avail, idx):
            if idx == len(pendings):
                yield su, avail, []
                return
            for su2, left2, d2 in self.prove(su, avail, pendings[idx], depth + 1):
                for su3, left3, ds in chain(su2, left2, idx + 1):
                    yield su3, left3, [d2] + ds

        yield from chain(su, ctx, 0)

    # -- atoms ---------------------------------------------------------------

    def _unify_atoms(self, su, f, goal) -> Optional[Substitution]:
        if isinstance(f, PropAtom) and isinstance(goal, PropAtom):
            return su if f.name == goal.name else None
        if not (isinstance(f, Means) and isinstance(goal, Means)):
            return None
        if f.ty != goal.ty:
            return None  # the type subscript of the meaning relation must agree
        su2 = solve_sem(su, f.sem, goal.sem, self.classes)
        if su2 is None:
            return None
        return solve(su2, f.term, goal.term, self.classes)


# ---------------------------------------------------------------------------
# Entry points


def check_linearity(d: Derivation, ctx: tuple[Resource, ...]) -> None:
    """Every premise consumed exactly once: identity/tensor leaves never share
    a resource, and all premises appear."""
    seen: list[int] = []

    def walk(n: Derivation):
        if n.rule in ("Identity", "TensorL"):
            rid = int(n.info.rsplit("#", 1)[1])
            seen.append(rid)
        for c in n.children:
            walk(c)

    walk(d)
    assert len(seen) == len(set(seen)), "a resource was consumed twice"
    premise_rids = {r.rid for r in ctx}
    assert premise_rids <= set(seen), "a premise escaped consumption"


def prove_sequent(
    sequent: Sequent, budget: SearchBudget = SearchBudget()
) -> Iterator[tuple[Substitution, Derivation]]:
    """All cut-free proofs of the sequent that consume every context formula."""
    prover = Prover(budget)
    ctx = tuple(
        prover._resource(f, i, f"ctx{i}")
        for i, f in enumerate(sequent.context)
    )
    for su, leftover, d in prover.prove(Substitution(), ctx, sequent.goal, 0):
        if leftover:
            continue
        yield su, d


def check_theorem(
    formula: GlueFormula, budget: SearchBudget = SearchBudget()
) -> tuple[bool, Optional[Derivation]]:
    """Is `formula` derivable from the empty context?"""
    for _, d in prove_sequent(Sequent((), formula), budget):
        return True, d
    return False, None


def extract_meaning(su: Substitution, goal_var: MetaVar) -> MeaningTerm:
    term = su.nf(goal_var)
    residue = free_vars(term)
    if residue:
        raise UnsolvedVariable(
            f"reading is not closed: {sorted(residue)} in {print_term(term)}"
        )
    return term


def enumerate_readings(
    prems: list[Premise],
    goal_sem: SemTerm,
    budget: SearchBudget = SearchBudget(),
    goal_type: MeaningType = T,
) -> EnumerationResult:
    """Enumerate every derivable reading of `goal_sem`, deduplicated up to
    renaming of bound variables and sorted by their printed form."""
    prover = Prover(budget)
    ctx = tuple(
        prover._resource(p.formula, i, f"{p.word}[{p.label}]")
        for i, p in enumerate(prems)
    )
    goal_var = prover.classes.fresh_flex("M", goal_type)
    goal = Means(goal_sem, goal_var, goal_type)
    found: dict[str, Reading] = {}
    stats = prover.stats
    try:
        for su, leftover, d in prover.prove(Substitution(), ctx, goal, 0):
            if leftover:
                continue
            stats.proofs += 1
            check_linearity(d, ctx)
            term = extract_meaning(su, goal_var)
            text = print_term(term)
            if text not in found:
                found[text] = Reading(term, text, d, goal_sem, su)
    except BudgetExhausted:
        stats.exhausted = True
    readings = [found[k] for k in sorted(found)]
    return EnumerationResult(readings, stats, budget)


def readings_for_document(
    doc,
    lexicon,
    goal_label: Optional[str] = None,
    budget: SearchBudget = SearchBudget(),
    goal_type: MeaningType = T,
) -> tuple[EnumerationResult, list[Premise]]:
    from .glue import premises

    prems = premises(doc, lexicon)
    label = goal_label or doc.root.label
    if label not in doc.by_label:
        raise GlueError(f"goal label {label!r} not in document")
    goal_sem = SemStruct(label, ROOT)
    return enumerate_readings(prems, goal_sem, budget, goal_type), prems


# ---------------------------------------------------------------------------
# Trace rendering


def render_trace(d: Derivation, su: Optional[Substitution] = None) -> str:
    """Human-readable proof tree, one rule per line; given the proof's
    substitution, fresh variables are annotated with their solutions and
    consumed atoms are shown instantiated."""
    lines: list[str] = []

    def solution(name: str) -> Optional[str]:
        if su is None:
            return None
        if name in su.terms:
            return print_term(su.nf(MetaVar(name, T)))
        if name in su.sems:
            return repr(su.walk_sem(SemVar(name)))
        return None

    def fmt(n: Derivation) -> str:
        text = f"{n.rule}: {n.info}".rstrip(": ")
        if n.fresh and su is not None:
            pairs = []
            for name in n.fresh:
                sol = solution(name)
                pairs.append(f"{name} := {sol}" if sol else name)
            text = f"{n.rule}: {n.info.split(':')[0]}: " + ", ".join(pairs)
        if n.atom is not None and su is not None:
            from .glue import subst_formula

            text += f"   |- {print_formula(subst_formula(n.atom, su))}"
        return text

    def walk(n: Derivation, indent: int):
        lines.append("  " * indent + fmt(n))
        for c in n.children:
            walk(c, indent + 1)

    walk(d, 0)
    return "\n".join(lines)
