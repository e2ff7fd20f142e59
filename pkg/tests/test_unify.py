"""Pattern-unifier tests: worked examples, soundness, generality, escapes."""

import random

import pytest

from gluesem.fstruct import SemStruct, SemVar
from gluesem.terms import (
    Abs,
    App,
    Arrow,
    BVar,
    Cap,
    Const,
    Cup,
    E,
    MetaVar,
    S,
    T,
    Var,
    alpha_equal,
    app,
    arrow,
    normalize,
)
from gluesem.unify import (
    EIGEN,
    FLEX,
    InconsistentSubst,
    NonPatternError,
    Substitution,
    VarClass,
    compose,
    solve_sem,
    unify,
)

from helpers import free_named_terms

APPOINT = Const("appoint", arrow(E, E, T))
CONVINCE = Const("convince", arrow(E, E, T))
VOTER = Const("voter", Arrow(E, T))
MANAGER = Const("manager", Arrow(E, T))
BILL = Const("Bill", E)
HILLARY = Const("Hillary", E)
PROP = Arrow(S, Arrow(E, T))  # intensional property


def classes_for(**kinds):
    vc = VarClass()
    for name, kind in kinds.items():
        vc.classify(name, kind)
    return vc


# ---------------------------------------------------------------------------
# worked examples


def test_scope_extraction():
    # S(x) = appoint(Bill, x) with S flex, x eigen: S := \z. appoint(Bill, z)
    vc = classes_for(S=FLEX, x=EIGEN)
    s = MetaVar("S", Arrow(E, T))
    x = Var("x", E)
    su = unify([(App(s, x), app(APPOINT, BILL, x))], vc)
    assert su is not None
    expected = normalize(Abs(E, app(APPOINT, BILL, BVar(0))))
    assert alpha_equal(su.nf(s), expected)


def test_plain_instantiation():
    vc = classes_for(X=FLEX)
    x = MetaVar("X", E)
    su = unify([(x, BILL)], vc)
    assert su.nf(x) == BILL


def test_identity_is_the_unique_solution():
    # R(x) = x with x born inside R's scope.  Oracle: enumerate all normal
    # e -> e terms of size <= 3 over the empty signature; only \z. z works.
    vc = VarClass()
    vc.classify("R", FLEX)
    vc.classify("x", EIGEN)  # born after R
    r = MetaVar("R", Arrow(E, E))
    x = Var("x", E)
    su = unify([(App(r, x), x)], vc)
    identity = Abs(E, BVar(0))
    assert alpha_equal(su.nf(r), identity)
    # oracle agreement: brute-force candidates (x may not appear in R)
    candidates = [
        c
        for c in free_named_terms(Arrow(E, E), 3, [], [])
        if alpha_equal(normalize(App(c, x)), x)
    ]
    assert candidates == [identity]


def test_rigid_head_clash():
    vc = classes_for(x=EIGEN)
    x = Var("x", E)
    assert unify([(App(VOTER, x), App(MANAGER, x))], vc) is None


def test_occurs_check():
    vc = classes_for(F=FLEX, x=EIGEN)
    f = MetaVar("F", Arrow(E, E))
    x = Var("x", E)
    assert unify([(App(f, x), App(Const("g", Arrow(E, E)), App(f, x)))], vc) is None


def test_non_pattern_is_an_error():
    # a flex variable applied to a compound argument is outside the fragment
    vc = classes_for(Y=FLEX, p=EIGEN)
    y = MetaVar("Y", Arrow(PROP, T))
    p = Var("p", Arrow(E, T))
    with pytest.raises(NonPatternError):
        unify([(App(y, Cap(p)), app(Const("a", arrow(PROP, PROP, T)), MetaVar("R", PROP), MetaVar("R", PROP)))], vc)


def test_restriction_extraction_through_extension():
    # (!R)(x) = voter(x): R := ^voter, as in the intensional determiners
    vc = VarClass()
    vc.classify("R", FLEX)
    vc.classify("x", EIGEN)
    r = MetaVar("R", PROP)
    x = Var("x", E)
    su = unify([(App(Cup(r), x), App(VOTER, x))], vc)
    assert alpha_equal(su.nf(r), Cap(VOTER))


def test_extension_pattern_keeps_variables_plain():
    # (!S)(x) = (!p)(x) solves to S := p itself, not ^(!p)
    vc = VarClass()
    vc.classify("p", EIGEN)
    vc.classify("S", FLEX)
    vc.classify("x", EIGEN)
    s = MetaVar("S", PROP)
    p = Var("p", PROP)
    x = Var("x", E)
    su = unify([(App(Cup(s), x), App(Cup(p), x))], vc)
    assert su.nf(s) == p


def test_eigen_escape_blocked():
    # S was born before x, so S may not swallow x
    vc = VarClass()
    vc.classify("S", FLEX)
    vc.classify("x", EIGEN)
    s = MetaVar("S", E)
    assert unify([(s, Var("x", E))], vc) is None


def test_escape_allowed_for_older_eigens():
    vc = VarClass()
    vc.classify("x", EIGEN)
    vc.classify("S", FLEX)
    s = MetaVar("S", E)
    su = unify([(s, Var("x", E))], vc)
    assert su.nf(s) == Var("x", E)


# ---------------------------------------------------------------------------
# apply / compose


def test_apply_instantiates_and_normalizes():
    vc = classes_for(Y=FLEX)
    y = MetaVar("Y", E)
    su = unify([(y, HILLARY)], vc)
    assert su.nf(app(APPOINT, BILL, y)) == app(APPOINT, BILL, HILLARY)


def test_apply_empty_substitution():
    su = Substitution()
    term = app(APPOINT, BILL, HILLARY)
    assert su.nf(term) == term


def test_apply_touches_structure_variables():
    vc = classes_for(H=FLEX, S=FLEX, x=EIGEN)
    su = Substitution()
    su = solve_sem(su, SemVar("H"), SemStruct("f", "ROOT"), vc)
    scope = Abs(E, app(CONVINCE, BILL, BVar(0)))
    su = su.bind("S", scope)
    x = Var("x", E)
    assert su.walk_sem(SemVar("H")) == SemStruct("f", "ROOT")
    assert su.nf(App(MetaVar("S", Arrow(E, T)), x)) == app(CONVINCE, BILL, x)


def test_compose_disjoint():
    s1 = Substitution().bind("X", BILL)
    s2 = Substitution().bind("Y", HILLARY)
    c = compose(s1, s2)
    assert c.nf(MetaVar("X", E)) == BILL
    assert c.nf(MetaVar("Y", E)) == HILLARY


def test_compose_chains():
    s1 = Substitution().bind("X", MetaVar("Y", E))
    s2 = Substitution().bind("Y", Const("Al", E))
    c = compose(s1, s2)
    assert c.nf(MetaVar("X", E)) == Const("Al", E)
    assert c.nf(MetaVar("Y", E)) == Const("Al", E)


def test_compose_conflict():
    s1 = Substitution().bind("X", BILL)
    s2 = Substitution().bind("X", HILLARY)
    with pytest.raises(InconsistentSubst):
        compose(s1, s2)


def test_compose_contract_on_random_terms():
    rng = random.Random(99)
    s1 = Substitution().bind("X", app(VOTER, MetaVar("Y", E)))
    s2 = Substitution().bind("Y", BILL)
    c = compose(s1, s2)
    for _ in range(50):
        parts = [MetaVar("X", T), app(MANAGER, MetaVar("Y", E)), app(VOTER, BILL)]
        t = rng.choice(parts)
        assert alpha_equal(c.nf(t), s2.nf(s1.nf(t)))


# ---------------------------------------------------------------------------
# structure variables


def test_sem_unification_is_first_order():
    vc = classes_for(H=FLEX)
    su = solve_sem(Substitution(), SemVar("H"), SemStruct("f", "ROOT"), vc)
    assert su.walk_sem(SemVar("H")) == SemStruct("f", "ROOT")
    assert solve_sem(su, SemVar("H"), SemStruct("g", "ROOT"), vc) is None


def test_sem_distinct_slots_never_unify():
    vc = VarClass()
    assert solve_sem(Substitution(), SemStruct("f", "VAR"), SemStruct("f", "RESTR"), vc) is None


def test_sem_eigen_escape():
    vc = VarClass()
    vc.classify("H", FLEX)
    vc.classify("s", EIGEN)  # born after H
    assert solve_sem(Substitution(), SemVar("H"), SemVar("s"), vc) is None
    vc2 = VarClass()
    vc2.classify("s", EIGEN)
    vc2.classify("H", FLEX)  # born after s
    assert solve_sem(Substitution(), SemVar("H"), SemVar("s"), vc2) is not None


# ---------------------------------------------------------------------------
# property suites


SUC = Const("next", Arrow(E, E))


def _random_pattern_problem(rng):
    """A random flex-rigid equation F(args) = t over eigens x, y, z."""
    vc = VarClass()
    old = Var("o", E)
    vc.classify("o", EIGEN)
    vc.classify("F", FLEX)
    eigens = [Var(n, E) for n in ("x", "y", "z")]
    for v in eigens:
        vc.classify(v.name, EIGEN)
    args = rng.sample(eigens, rng.randint(0, 3))
    # entities built only from argument eigens (solvable) or sometimes from
    # all eigens (possibly unsolvable: escape)
    allowed = list(args) if rng.random() < 0.7 else eigens

    def build_e(depth):
        if depth <= 0 or rng.random() < 0.5:
            return rng.choice(allowed + [old, BILL, HILLARY])
        return App(SUC, build_e(depth - 1))

    def build_t(depth):
        roll = rng.random()
        if roll < 0.4:
            return App(VOTER, build_e(depth - 1))
        if roll < 0.8:
            return app(APPOINT, build_e(depth - 1), build_e(depth - 1))
        return app(CONVINCE, build_e(depth - 1), build_e(depth - 1))

    rhs = build_t(3) if rng.random() < 0.6 else build_e(3)
    from gluesem.terms import typecheck

    rty = typecheck(rhs, {})
    f = MetaVar("F", arrow(*([v.ty for v in args] + [rty])))
    lhs = app(f, *args)
    return vc, f, lhs, rhs, args


def test_unifier_soundness_on_random_problems():
    rng = random.Random(424242)
    solved = 0
    for _ in range(1000):
        vc, f, lhs, rhs, args = _random_pattern_problem(rng)
        su = unify([(lhs, rhs)], vc)
        if su is None:
            continue
        solved += 1
        assert alpha_equal(su.nf(lhs), su.nf(rhs))
    assert solved > 400  # the generator mostly produces solvable problems


def test_unifier_generality_against_enumeration():
    # for small solvable problems, every brute-force solution must factor
    # through the returned unifier
    sig = [("Bill", E), ("voter", Arrow(E, T))]
    x = Var("x", E)
    problems = [
        (App(MetaVar("F", Arrow(E, E)), x), x),
        (App(MetaVar("F", Arrow(E, T)), x), App(VOTER, x)),
        (App(MetaVar("F", Arrow(E, T)), x), App(VOTER, BILL)),
        (MetaVar("F", E), BILL),
    ]
    for lhs, rhs in problems:
        vc = VarClass()
        f, _ = (lhs, None) if isinstance(lhs, MetaVar) else (lhs.fn, None)
        while isinstance(f, App):
            f = f.fn
        vc.classify(f.name, FLEX)
        vc.classify("x", EIGEN)
        su = unify([(lhs, rhs)], vc)
        assert su is not None
        mgu_binding = su.nf(f)
        for cand in free_named_terms(f.ty, 5, sig, []):
            if not alpha_equal(normalize(app(cand, *_args_of(lhs))), normalize(rhs)):
                continue
            # cand solves the equation: it must be an instance of the mgu
            inst_vc = VarClass()
            for name in _meta_names(mgu_binding):
                inst_vc.classify(name, FLEX)
            assert unify([(mgu_binding, cand)], inst_vc, Substitution()) is not None, (
                f"solution {cand} does not factor through {mgu_binding}"
            )


def _args_of(lhs):
    args = []
    while isinstance(lhs, App):
        args.append(lhs.arg)
        lhs = lhs.fn
    return list(reversed(args))


def _meta_names(t):
    from gluesem.terms import free_meta_vars

    return free_meta_vars(t)


def test_escape_property_randomized():
    # unify(S(args), t) never lets a newer eigen that is not among the
    # arguments leak into S's binding
    rng = random.Random(777)
    for _ in range(1000):
        vc, f, lhs, rhs, args = _random_pattern_problem(rng)
        su = unify([(lhs, rhs)], vc)
        if su is None:
            continue
        binding = su.nf(f)
        from gluesem.terms import free_vars

        argnames = {a.name for a in args}
        for name in free_vars(binding):
            assert vc.ts(name) < vc.ts(f.name) or name in argnames


def test_unify_always_terminates_quickly():
    # decidability: a batch of random problems completes without budgets
    rng = random.Random(31337)
    for _ in range(500):
        vc, f, lhs, rhs, _ = _random_pattern_problem(rng)
        unify([(lhs, rhs)], vc)
