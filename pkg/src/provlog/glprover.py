"""Decision procedures with countermodels.

Four deciders cover validity over: all finite irreflexive transitive
frames (a subformula tableau, optionally cross-checked against bounded
tree enumeration); finite strict linear orders; finite frames that are
additionally non-triple-branching and strongly confluent (a two-column
row sweep, optionally cross-checked against direct frame enumeration);
and the two-column canonical models of the constant fragments, where a
normal-form rewriter reduces every formula to a boolean combination of
constants and iterated-box-bot towers.

The linear and row-frame sweeps never enumerate full valuations over all
worlds.  Truth at a point only depends on the chosen atom valuation there
plus which box subformulas still hold everywhere below, so the search runs
over reachable "surviving box set" states; the survivor set only shrinks,
which bounds every search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .formula import (
    BOT,
    CLOSED_B,
    FULL_GL,
    TOP,
    BoxN,
    Bot,
    Const,
    Formula,
    Implies,
    Rhd,
    Var,
    atoms,
    box_subformulas,
    conj_all,
    disj_all,
    formula_key,
    formula_size,
    fragment_fn,
    modal_depth,
    neg,
    pretty,
    require_fragment,
    subformulas,
)
from .kripke import (
    ConstructionError,
    Frame,
    Model,
    ResourceLimitError,
    countermodel_search,
)


class CrossCheckError(RuntimeError):
    """Two independent engines disagreed; this is a bug, not an input error."""


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class Provable:
    trace: tuple[str, ...] = ()


@dataclass(frozen=True)
class Refuted:
    model: Model
    world: object


Verdict = Union[Provable, Refuted]


def is_provable(v: Verdict) -> bool:
    return isinstance(v, Provable)


# ---------------------------------------------------------------------------
# GL: subformula tableau


@dataclass(frozen=True)
class _TreeNode:
    true_atoms: frozenset[str]
    children: tuple["_TreeNode", ...]


def _eval_modal(g: Formula, assign: dict) -> bool:
    """Boolean evaluation with boxes read off the assignment."""
    match g:
        case Bot():
            return False
        case Var() | Const():
            return assign[g.name]
        case Implies(a, b):
            return (not _eval_modal(a, assign)) or _eval_modal(b, assign)
        case BoxN():
            return assign[g]
        case Rhd():
            raise ValueError("'|>' is not handled by the box deciders")
    raise TypeError(f"not a formula: {g!r}")


def _tableau_satisfy(f: Formula) -> Optional[_TreeNode]:
    """A finite irreflexive transitive tree model satisfying f at its root,
    or None.  Successor worlds re-assert every box claimed true plus the box
    being refuted, so the claimed-box set grows strictly along branches."""
    memo: dict[frozenset, Optional[_TreeNode]] = {}

    def solve(reqs: frozenset) -> Optional[_TreeNode]:
        if reqs in memo:
            return memo[reqs]
        closure = frozenset().union(*(subformulas(r) for r in reqs))
        loc_atoms = sorted(
            {g.name for g in closure if isinstance(g, (Var, Const))}
        )
        loc_boxes = sorted(
            (g for g in closure if isinstance(g, BoxN)), key=formula_key
        )
        ordered_reqs = sorted(reqs, key=formula_key)
        result: Optional[_TreeNode] = None
        keys = loc_atoms + loc_boxes
        for mask in range(1 << len(keys)):
            assign = {k: bool((mask >> j) & 1) for j, k in enumerate(keys)}
            if not all(_eval_modal(r, assign) for r in ordered_reqs):
                continue
            propagated = [b for b in loc_boxes if assign[b]]
            children = []
            ok = True
            for b in loc_boxes:
                if assign[b]:
                    continue
                child_reqs = {neg(b.body), b}
                for t in propagated:
                    child_reqs.add(t)
                    child_reqs.add(t.body)
                child = solve(frozenset(child_reqs))
                if child is None:
                    ok = False
                    break
                children.append(child)
            if ok:
                true_atoms = frozenset(a for a in loc_atoms if assign[a])
                result = _TreeNode(true_atoms, tuple(children))
                break
        memo[reqs] = result
        return result

    return solve(frozenset([f]))


def _materialize_tree(root: _TreeNode, atom_names: Sequence[str]) -> Model:
    worlds: list[int] = []
    edges: set[tuple[int, int]] = set()
    val: dict[str, set[int]] = {a: set() for a in atom_names}

    def walk(node: _TreeNode) -> list[int]:
        wid = len(worlds)
        worlds.append(wid)
        for name in node.true_atoms:
            val.setdefault(name, set()).add(wid)
        below: list[int] = []
        for child in node.children:
            below.extend(walk(child))
        for d in below:
            edges.add((wid, d))
        return [wid] + below

    walk(root)
    frame = Frame(tuple(worlds), frozenset(edges))
    return Model(frame, {k: frozenset(v) for k, v in val.items() if v})


def decide_gl(
    f: Formula, cross_check: bool = False, tree_budget: int = 200_000
) -> Verdict:
    """Validity over all finite irreflexive transitive frames."""
    require_fragment(f, FULL_GL)
    node = _tableau_satisfy(neg(f))
    if node is None:
        verdict: Verdict = Provable(("tableau: negation unsatisfiable",))
    else:
        model = _materialize_tree(node, sorted(atoms(f)))
        verdict = Refuted(model, 0)
    if cross_check:
        other = gl_tree_countermodel(f, budget=tree_budget)
        if (other is None) != isinstance(verdict, Provable):
            raise CrossCheckError(
                f"tableau and tree enumeration disagree on {pretty(f)}"
            )
    return verdict


def gl_tree_countermodel(
    f: Formula, budget: int = 200_000
) -> Optional[tuple[Model, object]]:
    """Brute-force enumeration of tree models bounded by the box count:
    depth at most boxes+1, at most `boxes` distinct child subtrees per node.
    Returns the first falsifying pointed tree model, smallest trees first."""
    require_fragment(f, FULL_GL)
    atom_names = sorted(atoms(f))
    nboxes = len(box_subformulas(f))
    depth = nboxes + 1
    branching = nboxes
    trees: list[_TreeNode] = [
        _TreeNode(frozenset(c), ())
        for r in range(len(atom_names) + 1)
        for c in itertools.combinations(atom_names, r)
    ]
    for _ in range(depth - 1):
        layer: list[_TreeNode] = []
        for vals in range(1 << len(atom_names)):
            true_atoms = frozenset(
                a for k, a in enumerate(atom_names) if (vals >> k) & 1
            )
            for r in range(branching + 1):
                for combo in itertools.combinations(range(len(trees)), r):
                    layer.append(
                        _TreeNode(true_atoms, tuple(trees[k] for k in combo))
                    )
                    if len(layer) > budget:
                        raise ResourceLimitError(
                            f"tree enumeration exceeded {budget} trees"
                        )
        trees = layer

    def node_count(t: _TreeNode) -> int:
        return 1 + sum(node_count(c) for c in t.children)

    def canon(t: _TreeNode):
        return (tuple(sorted(t.true_atoms)), tuple(canon(c) for c in t.children))

    univ = sorted(subformulas(f), key=formula_size)

    def falsified_at_root(t: _TreeNode) -> bool:
        def walk(node: _TreeNode) -> tuple[dict, dict]:
            subs = [walk(c) for c in node.children]
            truth: dict = {}
            everywhere: dict = {}
            for g in univ:
                match g:
                    case Bot():
                        v = False
                    case Var() | Const():
                        v = g.name in node.true_atoms
                    case Implies(a, b):
                        v = (not truth[a]) or truth[b]
                    case BoxN(_, body):
                        v = all(ev[body] for _, ev in subs)
                truth[g] = v
                everywhere[g] = v and all(ev[g] for _, ev in subs)
            return truth, everywhere

        return not walk(t)[0][f]

    for t in sorted(trees, key=lambda t: (node_count(t), canon(t))):
        if falsified_at_root(t):
            return _materialize_tree(t, atom_names), 0
    return None


# ---------------------------------------------------------------------------
# Shared machinery for the chain / row-frame sweeps


def _point_truth(
    univ: Sequence[Formula],
    alive: frozenset,
    vbits: int,
    atom_index: dict[str, int],
) -> dict:
    """Truth of every subformula at a point where a box holds iff it is in
    the surviving set and an atom holds iff its valuation bit is set."""
    truth: dict = {}
    for g in univ:
        match g:
            case Bot():
                v = False
            case Var() | Const():
                idx = atom_index.get(g.name)
                v = idx is not None and bool((vbits >> idx) & 1)
            case Implies(a, b):
                v = (not truth[a]) or truth[b]
            case BoxN():
                v = g in alive
            case Rhd():
                raise ValueError("'|>' is not handled by the box deciders")
        truth[g] = v
    return truth


def _chain_model(path: Sequence[int], atom_names: Sequence[str]) -> Model:
    """Strict linear order with len(path) worlds; world k sees all j < k and
    carries the k-th valuation bitmask."""
    n = len(path)
    frame = Frame(tuple(range(n)), frozenset((a, b) for a in range(n) for b in range(a)))
    val = {
        name: frozenset(k for k in range(n) if (path[k] >> j) & 1)
        for j, name in enumerate(atom_names)
    }
    return Model(frame, val)


def decide_gl3(f: Formula) -> Verdict:
    """Validity over finite strict linear orders; refutations come with the
    shortest falsifying chain (falsified at its top)."""
    require_fragment(f, FULL_GL)
    atom_names = sorted(atoms(f))
    atom_index = {a: k for k, a in enumerate(atom_names)}
    univ = sorted(subformulas(f), key=formula_size)
    boxes = [g for g in univ if isinstance(g, BoxN)]
    start = frozenset(boxes)
    visited = {start}
    frontier: list[tuple[frozenset, tuple[int, ...]]] = [(start, ())]
    states_seen = 1
    while frontier:
        fresh: list[tuple[frozenset, tuple[int, ...]]] = []
        for alive, path in frontier:
            for v in range(1 << len(atom_names)):
                truth = _point_truth(univ, alive, v, atom_index)
                if not truth[f]:
                    chain = path + (v,)
                    return Refuted(_chain_model(chain, atom_names), len(chain) - 1)
                survivors = frozenset(b for b in alive if truth[b.body])
                if survivors not in visited:
                    visited.add(survivors)
                    states_seen += 1
                    fresh.append((survivors, path + (v,)))
        frontier = fresh
    return Provable((f"linear sweep: {states_seen} box-survival states",))


def eval_rank(f: Formula, rank: int) -> bool:
    """Truth of a closed single-box formula at the point of the given rank
    on a descending chain: a box holds at rank r iff its body holds at every
    rank below r."""
    require_fragment(f, CLOSED_B)
    memo: dict[tuple[Formula, int], bool] = {}

    def ev(g: Formula, r: int) -> bool:
        key = (g, r)
        if key in memo:
            return memo[key]
        match g:
            case Bot():
                v = False
            case Implies(a, b):
                v = (not ev(a, r)) or ev(b, r)
            case BoxN(_, body):
                v = all(ev(body, k) for k in range(r))
        memo[key] = v
        return v

    return ev(f, rank)


def decide_gl_closed(f: Formula) -> Verdict:
    """Rank evaluation for closed formulas: provable iff true at every rank
    up to the modal depth (truth is rank-determined and stabilizes there)."""
    require_fragment(f, CLOSED_B)
    for r in range(modal_depth(f) + 1):
        if not eval_rank(f, r):
            chain = tuple(0 for _ in range(r + 1))
            return Refuted(_chain_model(chain, ()), r)
    return Provable((f"rank evaluation up to {modal_depth(f)}",))


# ---------------------------------------------------------------------------
# GL.4: two-column row sweep plus frame enumeration


def _gl4_row_search(f: Formula) -> Verdict:
    atom_names = sorted(atoms(f))
    natoms = len(atom_names)
    atom_index = {a: k for k, a in enumerate(atom_names)}
    univ = sorted(subformulas(f), key=formula_size)
    boxes = [g for g in univ if isinstance(g, BoxN)]
    start = frozenset(boxes)
    visited = {start}
    frontier: list[tuple[frozenset, tuple[tuple[int, int], ...]]] = [(start, ())]
    vmask = (1 << natoms) - 1
    while frontier:
        fresh = []
        for alive, path in frontier:
            for vpair in range(1 << (2 * natoms)):
                v0, v1 = vpair & vmask, vpair >> natoms
                t0 = _point_truth(univ, alive, v0, atom_index)
                t1 = _point_truth(univ, alive, v1, atom_index)
                for col, truth in ((0, t0), (1, t1)):
                    if not truth[f]:
                        row = len(path)
                        model = _row_frame_model(
                            path, (v0, v1)[col], col, atom_names
                        )
                        return Refuted(model, (row, col))
                survivors = frozenset(
                    b for b in alive if t0[b.body] and t1[b.body]
                )
                if survivors not in visited:
                    visited.add(survivors)
                    fresh.append((survivors, path + ((v0, v1),)))
        frontier = fresh
    return Provable(("two-column row sweep exhausted",))


def _row_frame_model(
    path: Sequence[tuple[int, int]],
    top_bits: int,
    top_col: int,
    atom_names: Sequence[str],
) -> Model:
    row = len(path)
    worlds = [(p, j) for p in range(row) for j in (0, 1)]
    worlds.append((row, top_col))
    rel = frozenset((a, b) for a in worlds for b in worlds if a[0] > b[0])
    val = {}
    for k, name in enumerate(atom_names):
        ws = {
            (p, j)
            for p in range(row)
            for j in (0, 1)
            if (path[p][j] >> k) & 1
        }
        if (top_bits >> k) & 1:
            ws.add((row, top_col))
        val[name] = frozenset(ws)
    return Model(Frame(tuple(worlds), rel), val)


def gl4_world_bound(f: Formula) -> int:
    return 1 + 2 * len(box_subformulas(f))


def decide_gl4_via_frames(f: Formula, max_worlds: Optional[int] = None) -> Verdict:
    """Direct enumeration over irreflexive transitive non-triple-branching
    strongly-confluent frames, up to the completeness bound of one plus
    twice the box count."""
    require_fragment(f, FULL_GL)
    bound = gl4_world_bound(f) if max_worlds is None else max_worlds
    hit = countermodel_search(f, "c", bound)
    if hit is None:
        return Provable((f"no countermodel on class-C frames up to {bound} worlds",))
    return Refuted(*hit)


def decide_gl4(
    f: Formula, cross_check: bool = False, frames_cap: int = 7
) -> Verdict:
    """Validity over the non-triple-branching strongly-confluent frames,
    equivalently over the two-column row frame."""
    require_fragment(f, FULL_GL)
    verdict = _gl4_row_search(f)
    if cross_check:
        bound = gl4_world_bound(f)
        if bound > frames_cap:
            raise ResourceLimitError(
                f"frame-enumeration cross-check needs {bound} worlds "
                f"(cap {frames_cap})"
            )
        other = decide_gl4_via_frames(f)
        if isinstance(other, Provable) != isinstance(verdict, Provable):
            raise CrossCheckError(
                f"row sweep and frame enumeration disagree on {pretty(f)}"
            )
    return verdict


# ---------------------------------------------------------------------------
# Constant fragments over the 2^n-column row model


@dataclass(frozen=True)
class GnPoint:
    m: int
    i: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 0 or self.m < 0 or not (0 <= self.i < 2**self.n):
            raise ValueError(f"bad point ({self.m}, {self.i}) for n={self.n}")


_MAX_FRAGMENT = 8


def _check_fragment_index(n: int) -> None:
    if not (0 <= n <= _MAX_FRAGMENT):
        raise ResourceLimitError(
            f"constant fragments are supported for n <= {_MAX_FRAGMENT}"
        )


def _gn_rows(n: int, f: Formula, max_row: int) -> list[dict]:
    """Truth tables row by row: entry [m][g][i] is the truth of subformula g
    at point (m, i).  Constant s_j holds at column i iff bit j-1 of i is
    set; a box holds at row m iff its body held at every point below."""
    ncols = 1 << n
    univ = sorted(subformulas(f), key=formula_size)
    boxes = [g for g in univ if isinstance(g, BoxN)]
    held_below = {b: True for b in boxes}
    rows: list[dict] = []
    for _ in range(max_row + 1):
        truth: dict = {}
        for g in univ:
            match g:
                case Bot():
                    vec = (False,) * ncols
                case Const(index):
                    vec = tuple(bool((i >> (index - 1)) & 1) for i in range(ncols))
                case Implies(a, b):
                    va, vb = truth[a], truth[b]
                    vec = tuple((not va[i]) or vb[i] for i in range(ncols))
                case BoxN(_, _):
                    vec = (held_below[g],) * ncols
                case _:
                    raise TypeError(f"not in the constant fragment: {g!r}")
            truth[g] = vec
        rows.append(truth)
        for b in boxes:
            held_below[b] = held_below[b] and all(truth[b.body])
    return rows


def eval_gn(n: int, m: int, i: int, f: Formula) -> bool:
    """Truth of f at point (m, i) of the 2^n-column row model."""
    _check_fragment_index(n)
    if not (0 <= i < 2**n) or m < 0:
        raise ValueError(f"point ({m}, {i}) is out of bounds for n={n}")
    require_fragment(f, fragment_fn(n))
    return _gn_rows(n, f, m)[m][f][i]


def _gn_counter_model(n: int, m: int, i: int) -> Model:
    ncols = 1 << n
    worlds = [(p, j) for p in range(m) for j in range(ncols)]
    worlds.append((m, i))
    rel = frozenset((a, b) for a in worlds for b in worlds if a[0] > b[0])
    val = {
        f"s{j}": frozenset(w for w in worlds if (w[1] >> (j - 1)) & 1)
        for j in range(1, n + 1)
    }
    return Model(Frame(tuple(worlds), rel), val)


def decide_fgl(n: int, f: Formula) -> Verdict:
    """Validity on the 2^n-column row model, swept to the modal depth of f
    (truth at deeper rows repeats by then)."""
    _check_fragment_index(n)
    require_fragment(f, fragment_fn(n))
    depth = modal_depth(f)
    rows = _gn_rows(n, f, depth)
    for m in range(depth + 1):
        vec = rows[m][f]
        for i in range(1 << n):
            if not vec[i]:
                return Refuted(_gn_counter_model(n, m, i), (m, i))
    return Provable((f"all points up to row {depth} satisfy the formula",))


# ---------------------------------------------------------------------------
# Normal forms for the constant fragments


@dataclass(frozen=True)
class NFLiteral:
    kind: str  # "const" | "boxbot"
    value: Optional[int]  # constant index, or box exponent (None = omega)
    positive: bool

    def key(self):
        return (self.kind, self.value is None, self.value or 0, not self.positive)

    def __str__(self) -> str:
        sign = "" if self.positive else "~"
        if self.kind == "const":
            return f"{sign}s{self.value}"
        exp = "omega" if self.value is None else str(self.value)
        return f"{sign}[]^{exp} bot"


def _normalize_clause(literals) -> Optional[frozenset]:
    """None means the clause is contradictory."""
    consts: dict[int, bool] = {}
    min_pos: Optional[int] = None  # smallest finite positive box exponent
    max_neg = 0  # largest refuted box exponent (0 is vacuous)
    for lit in literals:
        if lit.kind == "const":
            prev = consts.get(lit.value)
            if prev is not None and prev != lit.positive:
                return None
            consts[lit.value] = lit.positive
        else:
            if lit.positive:
                if lit.value is None:
                    continue  # the omega tower is top
                min_pos = lit.value if min_pos is None else min(min_pos, lit.value)
            else:
                if lit.value is None:
                    return None  # refuting top
                max_neg = max(max_neg, lit.value)
    if min_pos is not None and max_neg >= min_pos:
        return None  # needs max_neg <= row < min_pos
    out = [NFLiteral("const", j, pos) for j, pos in consts.items()]
    if min_pos is not None:
        out.append(NFLiteral("boxbot", min_pos, True))
    if max_neg > 0:
        out.append(NFLiteral("boxbot", max_neg, False))
    return frozenset(out)


@dataclass(frozen=True)
class NormalForm:
    clauses: tuple[frozenset, ...]

    def __str__(self) -> str:
        if not self.clauses:
            return "bot"
        parts = []
        for clause in self.clauses:
            if not clause:
                parts.append("top")
            else:
                parts.append(
                    " & ".join(str(l) for l in sorted(clause, key=NFLiteral.key))
                )
        return " | ".join(parts)

    def to_formula(self) -> Formula:
        disjuncts = []
        for clause in self.clauses:
            lits = []
            for lit in sorted(clause, key=NFLiteral.key):
                if lit.kind == "const":
                    g: Formula = Const(lit.value)
                else:
                    g = TOP if lit.value is None else _boxbot(lit.value)
                lits.append(g if lit.positive else neg(g))
            disjuncts.append(conj_all(lits))
        return disj_all(disjuncts)


def _boxbot(alpha: int) -> Formula:
    g: Formula = BOT
    for _ in range(alpha):
        g = BoxN(0, g)
    return g


def _clause_key(clause: frozenset):
    return tuple(sorted(lit.key() for lit in clause))


def _nf(clauses) -> NormalForm:
    cleaned = {c for c in clauses if c is not None}
    if frozenset() in cleaned:
        return NF_TRUE
    return NormalForm(tuple(sorted(cleaned, key=_clause_key)))


NF_FALSE = NormalForm(())
NF_TRUE = NormalForm((frozenset(),))


def _nf_lit(lit: NFLiteral) -> NormalForm:
    return _nf([_normalize_clause([lit])])


def _nf_or(x: NormalForm, y: NormalForm) -> NormalForm:
    return _nf(list(x.clauses) + list(y.clauses))


def _nf_and(x: NormalForm, y: NormalForm) -> NormalForm:
    return _nf(
        _normalize_clause(list(cx) + list(cy))
        for cx in x.clauses
        for cy in y.clauses
    )


def _nf_not(x: NormalForm) -> NormalForm:
    if not x.clauses:
        return NF_TRUE
    picks = itertools.product(
        *[sorted(clause, key=NFLiteral.key) for clause in x.clauses]
    )
    clauses = []
    for pick in picks:
        flipped = [NFLiteral(l.kind, l.value, not l.positive) for l in pick]
        clauses.append(_normalize_clause(flipped))
    return _nf(clauses)


def box_rank(n: int, body: Formula) -> Optional[int]:
    """Least row at which some column falsifies the body, or None when the
    body holds on every row (checked past its stabilization depth)."""
    _check_fragment_index(n)
    require_fragment(body, fragment_fn(n))
    rows = _gn_rows(n, body, modal_depth(body) + 1)
    for m, truth in enumerate(rows):
        if not all(truth[body]):
            return m
    return None


def normal_form(n: int, f: Formula) -> NormalForm:
    """Equivalent boolean combination of constants and box-bot towers.

    A box reduces to the tower one deeper than the least row where its body
    fails (to top when the body never fails).  The result is certified by
    evaluating both formulas at every point up to one row past the modal
    depth; a mismatch is a bug and raises ConstructionError.
    """
    _check_fragment_index(n)
    require_fragment(f, fragment_fn(n))

    def build(g: Formula) -> NormalForm:
        match g:
            case Bot():
                return NF_FALSE
            case Const(index):
                return _nf_lit(NFLiteral("const", index, True))
            case Implies(a, b):
                return _nf_or(_nf_not(build(a)), build(b))
            case BoxN(_, body):
                fail = box_rank(n, body)
                if fail is None:
                    return NF_TRUE
                return _nf_lit(NFLiteral("boxbot", fail + 1, True))
        raise TypeError(f"not in the constant fragment: {g!r}")

    nf = build(f)
    rendered = nf.to_formula()
    depth = modal_depth(f) + 1
    lhs = _gn_rows(n, f, depth)
    rhs = _gn_rows(n, rendered, depth)
    for m in range(depth + 1):
        if lhs[m][f] != rhs[m][rendered]:
            raise ConstructionError(
                f"normal form {nf} is not equivalent to {pretty(f)} at row {m}"
            )
    return nf
