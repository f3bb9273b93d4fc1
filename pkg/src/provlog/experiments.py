"""Reproducible experiment suites.

Each suite returns a list of named pass/fail rows.  The suites double as
the acceptance tests: the pytest acceptance module calls the same
functions, and the command line exposes five of them by name.  All
randomness is drawn from per-suite fixed seeds, so repeated runs produce
identical results.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from . import ignatiev
from .formula import (
    BOT,
    TOP,
    BoxN,
    Const,
    Formula,
    Implies,
    Rhd,
    Var,
    box,
    box_subformulas,
    conj,
    dia,
    disj,
    instantiate_schema,
    modal_depth,
    neg,
    pretty,
    substitute,
)
from .glprover import (
    Provable,
    Refuted,
    _gn_rows,
    decide_fgl,
    decide_gl,
    decide_gl3,
    decide_gl4,
    decide_gl4_via_frames,
    eval_rank,
    gl4_world_bound,
    is_provable,
    normal_form,
)
from .interp import IL_SCHEMAS, decide_ilw3, il_axiom_instance, translate_tr
from .kripke import (
    Frame,
    Model,
    build_pmorphism_from_G1,
    check,
    countermodel_search,
    enumerate_frames,
    generated_subframe,
    restricted_substitution,
    truth_worlds,
    upward_cone,
    verify_pmorphism,
)


@dataclass
class SuiteRow:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class _Rows:
    rows: list[SuiteRow] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.rows.append(SuiteRow(name, bool(passed), detail))


# ---------------------------------------------------------------------------
# Deterministic formula generation


def random_formula(
    rng: random.Random,
    max_depth: int,
    variables: tuple[str, ...] = ("p", "q"),
    n_consts: int = 0,
    levels: tuple[int, ...] = (0,),
    allow_rhd: bool = False,
    budget: int = 7,
) -> Formula:
    leaves: list[Formula] = [BOT, TOP]
    leaves += [Var(v) for v in variables]
    leaves += [Const(j) for j in range(1, n_consts + 1)]

    def gen(d: int, s: int) -> Formula:
        if s <= 1:
            return rng.choice(leaves)
        ops = ["leaf", "not", "imp", "and", "or"]
        if d > 0:
            ops += ["box", "box", "dia"]
        if allow_rhd and d > 1:
            ops.append("rhd")
        op = rng.choice(ops)
        if op == "leaf":
            return rng.choice(leaves)
        if op == "not":
            return neg(gen(d, s - 1))
        if op == "box":
            return box(gen(d - 1, s - 1), rng.choice(levels))
        if op == "dia":
            return dia(gen(d - 1, s - 1), rng.choice(levels))
        left = rng.randint(1, max(1, s - 2))
        sub_depth = d - 2 if op == "rhd" else d
        a, b = gen(sub_depth, left), gen(sub_depth, s - 1 - left)
        if op == "imp":
            return Implies(a, b)
        if op == "and":
            return conj(a, b)
        if op == "or":
            return disj(a, b)
        return Rhd(a, b)

    return gen(max_depth, budget)


def random_boxbot_combination(rng: random.Random, budget: int = 5) -> Formula:
    """Boolean combination of iterated-box-bot towers (top included)."""
    towers = [BOT, TOP] + [_tower(k) for k in range(1, 5)]

    def gen(s: int) -> Formula:
        if s <= 1:
            return rng.choice(towers)
        op = rng.choice(["leaf", "not", "imp", "and", "or"])
        if op == "leaf":
            return rng.choice(towers)
        if op == "not":
            return neg(gen(s - 1))
        left = rng.randint(1, max(1, s - 2))
        a, b = gen(left), gen(s - 1 - left)
        if op == "imp":
            return Implies(a, b)
        return conj(a, b) if op == "and" else disj(a, b)

    return gen(budget)


def _tower(k: int) -> Formula:
    g: Formula = BOT
    for _ in range(k):
        g = BoxN(0, g)
    return g


def dia_tower(k: int) -> Formula:
    g: Formula = TOP
    for _ in range(k):
        g = dia(g)
    return g


def rank_defining_formula(n: int) -> Formula:
    """Holds at exactly the rank-n point of any descending chain."""
    return conj(dia_tower(n), _tower(n + 1))


def enumerate_formulas(
    variables: tuple[str, ...], max_depth: int, limit: int
) -> list[Formula]:
    """Deterministic small-to-large enumeration over bot, the variables,
    negation, boxes, diamonds, implication, conjunction and disjunction,
    filtered to the requested modal depth."""
    tiers: list[list[Formula]] = [[BOT] + [Var(v) for v in variables]]
    seen: set[Formula] = set(tiers[0])
    out: list[Formula] = [g for g in tiers[0] if modal_depth(g) <= max_depth]
    while len(out) < limit:
        size = len(tiers)
        fresh: list[Formula] = []

        def emit(g: Formula) -> None:
            if g not in seen and modal_depth(g) <= max_depth:
                seen.add(g)
                fresh.append(g)

        for g in tiers[size - 1]:
            emit(neg(g))
            emit(box(g))
            emit(dia(g))
        for la in range(size):
            lb = size - 1 - la
            if lb < 0 or lb >= len(tiers):
                continue
            for a in tiers[la]:
                for b in tiers[lb]:
                    emit(Implies(a, b))
                    emit(conj(a, b))
                    emit(disj(a, b))
        tiers.append(fresh)
        out.extend(fresh)
    return out[:limit]


# ---------------------------------------------------------------------------
# Suite 1: the two engines for plain transitive irreflexive frames


def suite_gl_oracle(count: int = 500, seed: int = 1101) -> list[SuiteRow]:
    rng = random.Random(seed)
    rows = _Rows()
    start = time.perf_counter()
    agreements = 0
    oversized = 0
    for k in range(count):
        f = random_formula(rng, max_depth=3, variables=("p", "q"), budget=9)
        verdict = decide_gl(f)
        hit = countermodel_search(f, "gl", max_worlds=4)
        if hit is not None:
            model, world = hit
            ok = isinstance(verdict, Refuted) and not check(model, world, f)
        elif isinstance(verdict, Provable):
            ok = True
        else:
            # certified refutation the 4-world enumeration cannot reach
            certified = not check(verdict.model, verdict.world, f)
            big = len(verdict.model.frame.worlds) > 4
            ok = certified and big
            oversized += 1
        if not ok:
            rows.add(f"engines disagree on sample {k}", False, pretty(f))
        else:
            agreements += 1
    elapsed = time.perf_counter() - start
    rows.add(
        f"tableau vs 4-world enumeration on {count} samples",
        agreements == count,
        f"{agreements}/{count} consistent, {oversized} refutations beyond "
        f"the enumeration bound, {elapsed:.1f}s",
    )
    rows.add("runtime under 60s", elapsed < 60, f"{elapsed:.1f}s")
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 2: linear orders


def suite_linear_orders(pairs: int = 50, seed: int = 1202) -> list[SuiteRow]:
    rng = random.Random(seed)
    rows = _Rows()
    bad = []
    for _ in range(pairs):
        a = random_formula(rng, 2, ("p", "q"), budget=6)
        b = random_formula(rng, 2, ("p", "q"), budget=6)
        inst = instantiate_schema("linearity", {"A": a, "B": b})
        if not is_provable(decide_gl3(inst)):
            bad.append(inst)
    rows.add(
        f"linearity instances provable on chains ({pairs} pairs)",
        not bad,
        f"{len(bad)} failures",
    )
    defining_ok = True
    for n in range(5):
        d_n = rank_defining_formula(n)
        for r in range(9):
            if eval_rank(d_n, r) != (r == n):
                defining_ok = False
    chain = Model(
        Frame(tuple(range(6)), frozenset((a, b) for a in range(6) for b in range(a))),
        {},
    )
    for n in range(5):
        d_n = rank_defining_formula(n)
        if truth_worlds(chain, d_n) != frozenset({n}):
            defining_ok = False
    rows.add(
        "rank-defining formulas hold at exactly their rank (n <= 4)",
        defining_ok,
    )
    lin = instantiate_schema("linearity", {"A": Var("p"), "B": Var("q")})
    hit = countermodel_search(lin, "gl", 3)
    ok = (
        hit is not None
        and not check(hit[0], hit[1], lin)
        and isinstance(decide_gl(lin), Refuted)
    )
    rows.add("plain transitive frames refute linearity within 3 worlds", ok)
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 3: defining-formula substitution on linear models


def suite_substitution(limit: int = 200) -> list[SuiteRow]:
    rows = _Rows()
    formulas = enumerate_formulas(("p", "q"), max_depth=2, limit=limit)
    checked = 0
    failures = 0
    for length in range(1, 5):
        frame = Frame(
            tuple(range(length)),
            frozenset((a, b) for a in range(length) for b in range(a)),
        )
        closed = Model(frame, {})
        defining = {k: rank_defining_formula(k) for k in range(length)}
        for vbits in range(1 << (2 * length)):
            val = {
                "p": frozenset(k for k in range(length) if (vbits >> k) & 1),
                "q": frozenset(
                    k for k in range(length) if (vbits >> (length + k)) & 1
                ),
            }
            varmodel = Model(frame, val)
            plain_truth = {c: truth_worlds(varmodel, c) for c in formulas}
            for i in range(length):
                subst = restricted_substitution(closed, i, val, defining)
                cone = upward_cone(closed, i)
                for c in formulas:
                    star = substitute(c, subst)
                    star_truth = truth_worlds(closed, star)
                    for j in cone:
                        checked += 1
                        if (j in plain_truth[c]) != (j in star_truth):
                            failures += 1
    rows.add(
        "defining-formula substitution preserves truth on the cone",
        failures == 0,
        f"{checked} point checks over chains of 1..4 ranks, "
        f"{len(formulas)} formulas, all valuations; {failures} failures",
    )
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 4: the ordinal-sequence frame


def suite_universal_frame(seed: int = 1404) -> list[SuiteRow]:
    rng = random.Random(seed)
    rows = _Rows()

    tu4 = ignatiev.build_truncation(bound=4, max_level=3)
    roots = tu4.root_points()
    tri_ok = True
    for p in roots:
        for q in roots:
            flags = [
                ignatiev.rel_n(0, p, q),
                ignatiev.rel_n(0, q, p),
                p == q,
            ]
            if sum(flags) != 1:
                tri_ok = False
            word = ignatiev.roots_trichotomy(p.coord(0), q.coord(0))
            expected = {0: "R0_ab", 1: "R0_ba", 2: "equal"}[flags.index(True)]
            if word != expected:
                tri_ok = False
    rows.add(
        f"root-point trichotomy on the size-4 truncation ({len(roots)} roots)",
        tri_ok,
    )

    tu3 = ignatiev.build_truncation(bound=3, max_level=2)
    schema_ok = True
    bad_instance = ""
    combos_mono = [(m, n) for m in range(3) for n in range(m, 3)]
    combos_neg = [(m, n) for m in range(3) for n in range(m + 1, 3)]
    for k in range(30):
        arg = random_formula(rng, 2, (), levels=(0, 1, 2), budget=5)
        instances = [
            instantiate_schema("glp-lob", {"A": arg}, n=k % 3),
            instantiate_schema(
                "glp-mono", {"A": arg}, m=combos_mono[k % len(combos_mono)][0],
                n=combos_mono[k % len(combos_mono)][1],
            ),
            instantiate_schema(
                "glp-negintro", {"A": arg},
                m=combos_neg[k % len(combos_neg)][0],
                n=combos_neg[k % len(combos_neg)][1],
            ),
        ]
        for inst in instances:
            if not all(ignatiev.eval_d(tu3, p, inst) for p in tu3.points):
                schema_ok = False
                bad_instance = pretty(inst)
    rows.add(
        "polymodal schema instances hold on the size-3 level-2 truncation",
        schema_ok,
        bad_instance,
    )

    violations = 0
    for _ in range(30):
        a = random_formula(rng, 2, (), levels=(0, 1, 2), budget=5)
        b = random_formula(rng, 2, (), levels=(0, 1, 2), budget=5)
        report = ignatiev.linearity_experiment(tu3, a, b)
        violations += len(report.violations)
    rows.add(
        "linearity experiment reports zero violations (30 random pairs)",
        violations == 0,
        f"{violations} violations",
    )
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 5: constant fragments


def suite_constant_fragment(seed: int = 1505) -> list[SuiteRow]:
    rng = random.Random(seed)
    rows = _Rows()

    nf_fail = 0
    for _ in range(200):
        f = random_formula(rng, 3, (), n_consts=1, budget=7)
        nf = normal_form(1, f)
        rendered = nf.to_formula()
        depth = modal_depth(f) + 2
        lhs = _gn_rows(1, f, depth)
        rhs = _gn_rows(1, rendered, depth)
        for m in range(depth + 1):
            if lhs[m][f] != rhs[m][rendered]:
                nf_fail += 1
                break
    rows.add(
        "normal forms evaluate identically up to depth+2 (200 samples)",
        nf_fail == 0,
        f"{nf_fail} mismatches",
    )

    surrogate_fail = 0
    boxed_provable = 0
    for _ in range(200):
        f = random_formula(rng, 3, (), n_consts=1, budget=7)
        if is_provable(decide_fgl(1, box(f))):
            boxed_provable += 1
            if not is_provable(decide_fgl(1, f)):
                surrogate_fail += 1
    rows.add(
        "boxed provability implies provability (200 samples)",
        surrogate_fail == 0,
        f"{boxed_provable} boxed-provable cases, {surrogate_fail} failures",
    )

    axiom_fail = 0
    for _ in range(30):
        b = random_boxbot_combination(rng)
        for i in (0, 1):
            inst = instantiate_schema("fgl", {"B": b}, n=1, i=i)
            if not is_provable(decide_fgl(1, inst)):
                axiom_fail += 1
    rows.add(
        "both constant-absorption axioms provable (30 random towers)",
        axiom_fail == 0,
        f"{axiom_fail} failures",
    )

    p, q, r = Var("p"), Var("q"), Var("r")
    q1 = instantiate_schema("q1", {"A": p, "B": q, "C": r})
    q2 = instantiate_schema("q2", {"A": p, "B": q})
    lin = instantiate_schema("linearity", {"A": p, "B": q})
    rows.add(
        "Q1 and Q2 provable, linearity refuted, on the confluent class",
        is_provable(decide_gl4(q1))
        and is_provable(decide_gl4(q2))
        and isinstance(decide_gl4(lin), Refuted),
        "variable-free fgl-vs-gl4 matching is intentionally not asserted",
    )
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 6: unfolding morphisms


def suite_unfolding(max_worlds: int = 5) -> list[SuiteRow]:
    rows = _Rows()
    start = time.perf_counter()
    total = 0
    failures = 0
    for n in range(1, max_worlds + 1):
        for frame in enumerate_frames(n, "c"):
            for x in frame.worlds:
                total += 1
                point, pm = build_pmorphism_from_G1(frame, x)
                report = verify_pmorphism(pm)
                onto = set(pm.mapping.values()) == set(
                    generated_subframe(frame, x).worlds
                )
                if not (report.ok and onto):
                    failures += 1
    elapsed = time.perf_counter() - start
    rows.add(
        f"unfolding morphism verified on all confluent frames up to "
        f"{max_worlds} worlds",
        failures == 0,
        f"{total} generated subframes, {failures} failures, {elapsed:.1f}s",
    )
    rows.add("runtime under 5 minutes", elapsed < 300, f"{elapsed:.1f}s")
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 7: the two engines for the confluent class


def suite_gl4_agreement(count: int = 200, seed: int = 1707) -> list[SuiteRow]:
    rng = random.Random(seed)
    rows = _Rows()
    agreements = 0
    samples = 0
    while samples < count:
        f = random_formula(rng, 2, ("p", "q"), budget=7)
        if len(box_subformulas(f)) > 3:
            continue  # keeps the frame enumeration bound at 7 worlds
        samples += 1
        sweep = decide_gl4(f)
        frames = decide_gl4_via_frames(f)
        ok = is_provable(sweep) == is_provable(frames)
        if ok and isinstance(sweep, Refuted):
            ok = not check(sweep.model, sweep.world, f) and not check(
                frames.model, frames.world, f
            )
        if ok:
            agreements += 1
        else:
            rows.add(f"engines disagree on {pretty(f)}", False)
    rows.add(
        f"row sweep vs frame enumeration on {count} samples",
        agreements == count,
        f"{agreements}/{count}",
    )
    p, q, r = Var("p"), Var("q"), Var("r")
    q1 = instantiate_schema("q1", {"A": p, "B": q, "C": r})
    q2 = instantiate_schema("q2", {"A": p, "B": q})
    rows.add(
        "Q1 and Q2 provable on both engines",
        is_provable(decide_gl4(q1))
        and is_provable(decide_gl4(q2))
        and countermodel_search(q1, "c", 6) is None
        and countermodel_search(q2, "c", 6) is None,
        "frame enumeration bounded at 6 worlds",
    )
    nb0 = instantiate_schema("nonbranching", {"A1": p, "A2": q}, n=0)
    nb1 = instantiate_schema("nonbranching", {"A1": p, "A2": q, "A3": r}, n=1)
    rows.add(
        "two-successor schema provable on chains",
        is_provable(decide_gl3(nb0)),
    )
    rows.add(
        "three-successor schema provable on the confluent class",
        is_provable(decide_gl4(nb1)),
    )
    return rows.rows


# ---------------------------------------------------------------------------
# Suite 8: the interpretability translation


_IL_LETTERS = {
    "L1": ("A", "B"),
    "L2": ("A",),
    "L3": ("A",),
    "J1": ("A", "B"),
    "J2": ("A", "B", "C"),
    "J3": ("A", "B", "C"),
    "J4": ("A", "B"),
    "J5": ("A",),
    "M": ("A", "B", "C"),
    "P": ("A", "B"),
    "W": ("A", "B"),
    "ilw3-linearity": ("A", "B"),
}


def suite_translation(per_schema: int = 50, seed: int = 1808) -> list[SuiteRow]:
    rng = random.Random(seed)
    rows = _Rows()
    for schema in IL_SCHEMAS:
        letters = _IL_LETTERS[schema]
        failures = 0
        for _ in range(per_schema):
            args = {
                letter: random_formula(
                    rng, 2, ("p", "q", "r"), allow_rhd=True, budget=5
                )
                for letter in letters
            }
            inst = il_axiom_instance(schema, args)
            if not is_provable(decide_ilw3(inst)):
                failures += 1
        rows.add(
            f"schema {schema} provable under translation ({per_schema} tuples)",
            failures == 0,
            f"{failures} failures",
        )

    mp_ok = True
    nec_ok = True
    for _ in range(10):
        a = random_formula(rng, 2, ("p", "q"), allow_rhd=True, budget=4)
        chi = random_formula(rng, 2, ("p", "q"), allow_rhd=True, budget=4)
        phi = il_axiom_instance("J5", {"A": a})
        psi = disj(phi, chi)
        if not is_provable(decide_ilw3(Implies(phi, psi))):
            mp_ok = False
        if not is_provable(decide_ilw3(psi)):
            mp_ok = False
        if not is_provable(decide_ilw3(box(phi))):
            nec_ok = False
    scanned = 0
    for _ in range(60):
        phi = random_formula(rng, 1, ("p", "q"), allow_rhd=False, budget=4)
        psi = random_formula(rng, 1, ("p", "q"), allow_rhd=False, budget=4)
        if is_provable(decide_ilw3(phi)) and is_provable(
            decide_ilw3(Implies(phi, psi))
        ):
            scanned += 1
            if not is_provable(decide_ilw3(psi)):
                mp_ok = False
    rows.add("modus ponens closure spot-checks", mp_ok, f"{scanned} random hits")
    rows.add("necessitation closure spot-checks", nec_ok)

    p, q, r = Var("p"), Var("q"), Var("r")
    j2 = il_axiom_instance("J2", {"A": p, "B": q, "C": r})
    hit = countermodel_search(translate_tr(j2), "irreflexive", 3)
    rows.add(
        "translated J2 fails on a non-transitive 3-world model",
        hit is not None and not check(hit[0], hit[1], translate_tr(j2)),
    )
    return rows.rows


# ---------------------------------------------------------------------------
# Registry


SUITES = {
    "thm2.1": suite_substitution,
    "thm4.5": suite_universal_frame,
    "thm5.4": suite_constant_fragment,
    "prop6.5": suite_unfolding,
    "thm7.12": suite_translation,
}

ALL_SUITES = dict(SUITES)
ALL_SUITES.update(
    {
        "gl-oracle": suite_gl_oracle,
        "gl3-linearity": suite_linear_orders,
        "gl4-agreement": suite_gl4_agreement,
    }
)


def run_suite(name: str) -> list[SuiteRow]:
    if name not in ALL_SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return ALL_SUITES[name]()
