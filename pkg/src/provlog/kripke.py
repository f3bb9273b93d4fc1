"""Finite Kripke frames and models.

Covers model checking, frame-class predicates (irreflexivity, transitivity,
non-triple branching, strong confluence, linearity), generated subframes,
p-morphism verification and construction, brute-force countermodel search,
and the variable-to-defining-formula substitution used to transfer truth
between a model and arbitrary valuations on its frame.

Frame enumeration for the transitive classes runs over "descending"
relations only (an edge always points to a smaller world index), which is
exhaustive up to isomorphism for irreflexive transitive frames.  The
valuation sweep inside the search is vectorized over big integers: bit v of
the truth word for (subformula, world) is the truth value under valuation
number v.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional, Sequence

from .formula import (
    BOT,
    BoxN,
    Bot,
    Const,
    Formula,
    Implies,
    Rhd,
    Var,
    atoms,
    disj_all,
    pretty,
    subformulas,
)


class UnknownWorldError(ValueError):
    pass


class FrameClassError(ValueError):
    """A frame does not satisfy a required frame-class condition."""


class ConstructionError(RuntimeError):
    """An internally built object failed its own verification."""


class ResourceLimitError(RuntimeError):
    """Enumeration exceeded its configured bounds."""

    def __init__(self, message: str, worlds_completed: int = 0) -> None:
        super().__init__(message)
        self.worlds_completed = worlds_completed


class DefiningFormulaError(ValueError):
    """A supplied defining formula does not uniquely pick out its world."""


# ---------------------------------------------------------------------------
# Frames and models


@dataclass(frozen=True)
class Frame:
    worlds: tuple
    rel: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "rel", frozenset(tuple(p) for p in self.rel))
        if not self.worlds:
            raise ValueError("frames need at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise ValueError("duplicate world ids")
        wset = set(self.worlds)
        for a, b in self.rel:
            if a not in wset or b not in wset:
                raise ValueError(f"relation pair ({a!r}, {b!r}) uses unknown worlds")

    def successors(self, w) -> tuple:
        return tuple(y for y in self.worlds if (w, y) in self.rel)


@dataclass(frozen=True)
class Model:
    frame: Frame
    val: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self) -> None:
        wset = set(self.frame.worlds)
        norm = {}
        for name, worlds in self.val.items():
            ws = frozenset(worlds)
            if not ws <= wset:
                raise ValueError(f"valuation of {name!r} mentions unknown worlds")
            norm[name] = ws
        object.__setattr__(self, "val", norm)


@lru_cache(maxsize=None)
def _successor_map(frame: Frame) -> dict:
    return {w: frame.successors(w) for w in frame.worlds}


def check(m: Model, w, f: Formula) -> bool:
    """Truth of f at world w.  Unknown atoms are false everywhere; only
    level-0 boxes are meaningful on a plain frame."""
    if w not in set(m.frame.worlds):
        raise UnknownWorldError(f"unknown world {w!r}")
    succ = _successor_map(m.frame)
    memo: dict = {}

    def ev(g: Formula, x) -> bool:
        key = (g, x)
        if key in memo:
            return memo[key]
        match g:
            case Bot():
                out = False
            case Var(name):
                out = x in m.val.get(name, frozenset())
            case Const():
                out = x in m.val.get(g.name, frozenset())
            case Implies(a, b):
                out = (not ev(a, x)) or ev(b, x)
            case BoxN(level, body):
                if level != 0:
                    raise ValueError(
                        "multi-level boxes are not defined on plain frames"
                    )
                out = all(ev(body, y) for y in succ[x])
            case Rhd():
                raise ValueError("'|>' has no semantics on plain frames")
            case _:
                raise TypeError(f"not a formula: {g!r}")
        memo[key] = out
        return out

    return ev(f, w)


def valid_on_model(m: Model, f: Formula) -> bool:
    return all(check(m, w, f) for w in m.frame.worlds)


def truth_worlds(m: Model, f: Formula) -> frozenset:
    """The set of worlds where f holds, computed bottom-up in one pass."""
    succ = _successor_map(m.frame)
    table: dict[Formula, frozenset] = {}

    def ev(g: Formula) -> frozenset:
        if g in table:
            return table[g]
        match g:
            case Bot():
                out = frozenset()
            case Var() | Const():
                out = m.val.get(g.name, frozenset())
            case Implies(a, b):
                ta, tb = ev(a), ev(b)
                out = frozenset(
                    w for w in m.frame.worlds if w not in ta or w in tb
                )
            case BoxN(level, body):
                if level != 0:
                    raise ValueError(
                        "multi-level boxes are not defined on plain frames"
                    )
                tb = ev(body)
                out = frozenset(
                    w for w in m.frame.worlds if all(y in tb for y in succ[w])
                )
            case Rhd():
                raise ValueError("'|>' has no semantics on plain frames")
            case _:
                raise TypeError(f"not a formula: {g!r}")
        table[g] = out
        return out

    return ev(f)


# ---------------------------------------------------------------------------
# Frame-class predicates


@dataclass(frozen=True)
class FrameClassReport:
    irreflexive: bool
    transitive: bool
    c2: bool
    c3: bool
    linear: bool

    def as_dict(self) -> dict:
        return {
            "irreflexive": self.irreflexive,
            "transitive": self.transitive,
            "c2": self.c2,
            "c3": self.c3,
            "linear": self.linear,
        }

    @property
    def in_class_c(self) -> bool:
        return self.irreflexive and self.transitive and self.c2 and self.c3


def _is_transitive(rel: frozenset, succ: Mapping) -> bool:
    return all((a, c) in rel for a, b in rel for c in succ[b])


def _c2_holds(worlds, rel, succ) -> bool:
    # no world has three pairwise-incomparable, pairwise-distinct successors
    for x in worlds:
        sx = succ[x]
        for i, y in enumerate(sx):
            for j in range(i + 1, len(sx)):
                z = sx[j]
                if (y, z) in rel or (z, y) in rel:
                    continue
                for k in range(j + 1, len(sx)):
                    w = sx[k]
                    if (
                        (w, y) in rel
                        or (y, w) in rel
                        or (z, w) in rel
                        or (w, z) in rel
                    ):
                        continue
                    return False
    return True


def _c3_holds(worlds, rel, succ) -> bool:
    # xRy & xRz & yRw  =>  zRw or wRz or yRz
    for x in worlds:
        sx = succ[x]
        for y in sx:
            for z in sx:
                if (y, z) in rel:
                    continue
                for w in succ[y]:
                    if (z, w) not in rel and (w, z) not in rel:
                        return False
    return True


def frame_class(fr: Frame) -> FrameClassReport:
    succ = _successor_map(fr)
    rel = fr.rel
    irrefl = all((w, w) not in rel for w in fr.worlds)
    trans = _is_transitive(rel, succ)
    c2 = _c2_holds(fr.worlds, rel, succ)
    c3 = _c3_holds(fr.worlds, rel, succ)
    total = all(
        a == b or (a, b) in rel or (b, a) in rel
        for a in fr.worlds
        for b in fr.worlds
    )
    return FrameClassReport(irrefl, trans, c2, c3, irrefl and trans and total)


def transitive_closure(fr: Frame) -> Frame:
    rel = set(fr.rel)
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return Frame(fr.worlds, frozenset(rel))


def generated_subframe(fr: Frame, x) -> Frame:
    """The subframe on x and everything reachable from it."""
    if x not in set(fr.worlds):
        raise UnknownWorldError(f"unknown world {x!r}")
    succ = _successor_map(fr)
    seen = {x}
    stack = [x]
    while stack:
        for y in succ[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    worlds = tuple(w for w in fr.worlds if w in seen)
    rel = frozenset(p for p in fr.rel if p[0] in seen and p[1] in seen)
    return Frame(worlds, rel)


# ---------------------------------------------------------------------------
# p-morphisms


@dataclass(frozen=True)
class PMorphism:
    source: Frame
    target: Frame
    mapping: Mapping

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping", dict(self.mapping))


@dataclass(frozen=True)
class PMorphismReport:
    ok: bool
    reason: Optional[str] = None
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.ok


def verify_pmorphism(pm: PMorphism) -> PMorphismReport:
    """Check totality plus the forth and back conditions by enumeration."""
    src, tgt, f = pm.source, pm.target, pm.mapping
    tgt_worlds = set(tgt.worlds)
    for x in src.worlds:
        if x not in f:
            return PMorphismReport(False, "not total", (x,))
        if f[x] not in tgt_worlds:
            return PMorphismReport(False, "image outside target", (x, f[x]))
    for x, y in src.rel:
        if (f[x], f[y]) not in tgt.rel:
            return PMorphismReport(False, "forth fails", (x, y))
    src_succ = _successor_map(src)
    for x in src.worlds:
        images = {f[y] for y in src_succ[x]}
        for yp in tgt.successors(f[x]):
            if yp not in images:
                return PMorphismReport(False, "back fails", (x, yp))
    return PMorphismReport(True)


def _immediate_successors(fr: Frame, x) -> list:
    succ = _successor_map(fr)
    out = []
    for y in succ[x]:
        if not any((x, z) in fr.rel and (z, y) in fr.rel for z in fr.worlds):
            out.append(y)
    return out


def unfolding_frame(m: int, i: int) -> Frame:
    """The finite generated subframe of the two-column row frame through
    (m, i): all points of rows below m plus (m, i), an edge whenever the
    source row is larger."""
    worlds = [(p, j) for p in range(m) for j in (0, 1)]
    worlds.append((m, i))
    rel = frozenset(
        (a, b) for a in worlds for b in worlds if a[0] > b[0]
    )
    return Frame(tuple(worlds), rel)


def build_pmorphism_from_G1(target: Frame, x) -> tuple[tuple[int, int], PMorphism]:
    """Find a point (m, i) of the two-column row frame and a verified
    p-morphism from its generated subframe onto the subframe of `target`
    generated by `x`.

    Requires that generated subframe to be irreflexive, transitive,
    non-triple-branching and strongly confluent.  The recursion peels the
    generator when it has a single immediate successor, and peels the
    relation-maximal points (mapping the freshly exposed bottom row onto
    them) when it has two.  Every result is re-verified; a verification
    failure is a bug and raises ConstructionError.
    """
    sub = generated_subframe(target, x)
    report = frame_class(sub)
    if not (report.irreflexive and report.transitive):
        raise FrameClassError("generated subframe is not irreflexive-transitive")
    if not report.c2:
        raise FrameClassError("generated subframe branches more than twice")
    if not report.c3:
        raise FrameClassError("generated subframe is not strongly confluent")

    def recurse(fr: Frame, root) -> tuple[int, int, dict]:
        imm = _immediate_successors(fr, root)
        if not imm:
            return 0, 0, {(0, 0): root}
        if len(imm) == 1:
            y = imm[0]
            rest = _drop_worlds(fr, {root})
            m, i, f = recurse(rest, y)
            f = dict(f)
            f[(m + 1, i)] = root
            f[(m, 1 - i)] = y
            return m + 1, i, f
        if len(imm) == 2:
            succ = _successor_map(fr)
            leaves = [w for w in fr.worlds if not succ[w]]
            rest = _drop_worlds(fr, set(leaves))
            m, i, f = recurse(rest, root)
            shifted = {(p + 1, j): w for (p, j), w in f.items()}
            shifted[(0, 0)] = leaves[0]
            shifted[(0, 1)] = leaves[1] if len(leaves) > 1 else leaves[0]
            return m + 1, i, shifted
        raise ConstructionError(
            f"{len(imm)} immediate successors despite the branching check"
        )

    m, i, mapping = recurse(sub, x)
    pm = PMorphism(unfolding_frame(m, i), sub, mapping)
    report = verify_pmorphism(pm)
    if not report:
        raise ConstructionError(
            f"constructed map failed verification: {report.reason} {report.witness}"
        )
    return (m, i), pm


def _drop_worlds(fr: Frame, removed: set) -> Frame:
    worlds = tuple(w for w in fr.worlds if w not in removed)
    rel = frozenset(
        p for p in fr.rel if p[0] not in removed and p[1] not in removed
    )
    return Frame(worlds, rel)


# ---------------------------------------------------------------------------
# Frame enumeration


FRAME_CLASSES = ("gl", "c", "linear", "irreflexive")

_FRAME_CACHE: dict[tuple[int, str], tuple[Frame, ...]] = {}


def _rel_bitmask(n: int, rel: frozenset) -> int:
    mask = 0
    for a, b in rel:
        mask |= 1 << (a * n + b)
    return mask


def _descending_frames(n: int, want_c: bool, linear_only: bool) -> list[Frame]:
    """DFS over successor sets S_i <= {0..i-1} with transitive closure, and
    optionally the branching/confluence conditions, checked incrementally."""
    out: list[Frame] = []
    succ: list[frozenset] = []

    def ok_c2(s: frozenset) -> bool:
        elems = sorted(s)
        for ii, a in enumerate(elems):
            for jj in range(ii + 1, len(elems)):
                b = elems[jj]
                if b in succ[a] or a in succ[b]:
                    continue
                for kk in range(jj + 1, len(elems)):
                    c = elems[kk]
                    if (
                        c in succ[a]
                        or a in succ[c]
                        or c in succ[b]
                        or b in succ[c]
                    ):
                        continue
                    return False
        return True

    def ok_c3(s: frozenset) -> bool:
        for y in s:
            for z in s:
                if z in succ[y]:
                    continue
                for w in succ[y]:
                    if w not in succ[z] and z not in succ[w]:
                        return False
        return True

    def extend(i: int) -> None:
        if i == n:
            worlds = tuple(range(n))
            rel = frozenset(
                (a, b) for a in range(n) for b in succ[a]
            )
            out.append(Frame(worlds, rel))
            return
        if linear_only:
            candidates = [frozenset(range(i))]
        else:
            candidates = [
                frozenset(
                    j for j in range(i) if (mask >> j) & 1
                )
                for mask in range(1 << i)
            ]
        for s in candidates:
            if any(not succ[j] <= s for j in s):
                continue  # not transitive
            if want_c and not ok_c2(s):
                continue
            succ.append(s)
            if want_c and not ok_c3(s):
                succ.pop()
                continue
            extend(i + 1)
            succ.pop()

    extend(0)
    out.sort(key=lambda fr: _rel_bitmask(n, fr.rel))
    return out


def enumerate_frames(n: int, frame_class_name: str = "gl") -> tuple[Frame, ...]:
    """All frames with worlds 0..n-1 in the named class, sorted by relation
    bitmask.  Transitive classes are enumerated up to isomorphism via
    descending relations; the 'irreflexive' class is enumerated in full."""
    if frame_class_name not in FRAME_CLASSES:
        raise ValueError(f"unknown frame class {frame_class_name!r}")
    key = (n, frame_class_name)
    if key in _FRAME_CACHE:
        return _FRAME_CACHE[key]
    if frame_class_name == "irreflexive":
        if n > 4:
            raise ResourceLimitError(
                f"full irreflexive enumeration is capped at 4 worlds (asked {n})"
            )
        pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
        frames = []
        for mask in range(1 << len(pairs)):
            rel = frozenset(p for k, p in enumerate(pairs) if (mask >> k) & 1)
            frames.append(Frame(tuple(range(n)), rel))
        frames.sort(key=lambda fr: _rel_bitmask(n, fr.rel))
        result = tuple(frames)
    else:
        if n > 8:
            raise ResourceLimitError(
                f"descending enumeration is capped at 8 worlds (asked {n})"
            )
        result = tuple(
            _descending_frames(
                n,
                want_c=(frame_class_name == "c"),
                linear_only=(frame_class_name == "linear"),
            )
        )
    _FRAME_CACHE[key] = result
    return result


# ---------------------------------------------------------------------------
# Valuation sweeps (big-integer vectorization)


@lru_cache(maxsize=None)
def _bit_pattern(nbits: int, k: int) -> int:
    """Word of length 2^nbits whose bit v is set iff bit k of v is set."""
    out = ((1 << (1 << k)) - 1) << (1 << k)
    width = 1 << (k + 1)
    total = 1 << nbits
    while width < total:
        out |= out << width
        width *= 2
    return out


def _falsify_on_frame(
    frame: Frame, f: Formula, atom_names: Sequence[str]
) -> Optional[tuple[int, object]]:
    """Least (valuation bitmask, world) falsifying f on the frame, or None.

    Valuation bit layout: bit (a * n + w) of the valuation index makes atom
    a true at world w, with atoms in the given order and worlds in frame
    order."""
    n = len(frame.worlds)
    nbits = len(atom_names) * n
    full = (1 << (1 << nbits)) - 1
    windex = {w: k for k, w in enumerate(frame.worlds)}
    aindex = {name: k for k, name in enumerate(atom_names)}
    succ = _successor_map(frame)
    truth: dict[Formula, list[int]] = {}

    def ev(g: Formula) -> list[int]:
        if g in truth:
            return truth[g]
        match g:
            case Bot():
                words = [0] * n
            case Var() | Const():
                name = g.name
                if name in aindex:
                    words = [
                        _bit_pattern(nbits, aindex[name] * n + k)
                        for k in range(n)
                    ]
                else:
                    words = [0] * n
            case Implies(a, b):
                wa, wb = ev(a), ev(b)
                words = [((~wa[k]) | wb[k]) & full for k in range(n)]
            case BoxN(level, body):
                if level != 0:
                    raise ValueError("only level-0 boxes on plain frames")
                wb = ev(body)
                words = []
                for k, w in enumerate(frame.worlds):
                    acc = full
                    for y in succ[w]:
                        acc &= wb[windex[y]]
                    words.append(acc)
            case Rhd():
                raise ValueError("'|>' has no semantics on plain frames")
            case _:
                raise TypeError(f"not a formula: {g!r}")
        truth[g] = words
        return words

    words = ev(f)
    best: Optional[tuple[int, object]] = None
    for k, w in enumerate(frame.worlds):
        fail = (~words[k]) & full
        if fail:
            v = (fail & -fail).bit_length() - 1
            if best is None or v < best[0]:
                best = (v, w)
    return best


def _model_from_bits(
    frame: Frame, atom_names: Sequence[str], vbits: int
) -> Model:
    n = len(frame.worlds)
    val = {}
    for a, name in enumerate(atom_names):
        worlds = frozenset(
            w for k, w in enumerate(frame.worlds) if (vbits >> (a * n + k)) & 1
        )
        val[name] = worlds
    return Model(frame, val)


def default_thread_count() -> int:
    raw = os.environ.get("PROVLOG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def countermodel_search(
    f: Formula,
    frame_class_name: str = "gl",
    max_worlds: int = 4,
    threads: Optional[int] = None,
) -> Optional[tuple[Model, object]]:
    """Exhaustive falsification search over the named frame class.

    Enumerates frames by world count, then relation bitmask, then valuation
    bitmask, and returns the first falsifying pointed model.  Results are
    independent of the thread count: workers only split the frame list and
    the least witness wins.
    """
    if max_worlds < 1:
        raise ValueError("max_worlds must be >= 1")
    atom_names = sorted(atoms(f))
    threads = default_thread_count() if threads is None else max(1, threads)

    def scan(frame: Frame) -> Optional[tuple[int, object]]:
        return _falsify_on_frame(frame, f, atom_names)

    for n in range(1, max_worlds + 1):
        frames = enumerate_frames(n, frame_class_name)
        hit: Optional[tuple[int, int, object]] = None
        if threads == 1 or len(frames) < 64:
            for idx, frame in enumerate(frames):
                res = scan(frame)
                if res is not None:
                    hit = (idx, res[0], res[1])
                    break
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for idx, res in enumerate(pool.map(scan, frames)):
                    if res is not None:
                        hit = (idx, res[0], res[1])
                        break
        if hit is not None:
            idx, vbits, world = hit
            model = _model_from_bits(frames[idx], atom_names, vbits)
            return model, world
    return None


def frame_validates(
    frame: Frame, f: Formula, extra_atoms: Sequence[str] = ()
) -> bool:
    """True iff f holds at every world under every valuation of its atoms."""
    names = sorted(set(atoms(f)) | set(extra_atoms))
    return _falsify_on_frame(frame, f, names) is None


# ---------------------------------------------------------------------------
# Defining-formula substitution


def upward_cone(m: Model, i) -> tuple:
    """i together with its successors, in frame order."""
    if i not in set(m.frame.worlds):
        raise UnknownWorldError(f"unknown world {i!r}")
    cone = {i} | set(m.frame.successors(i))
    return tuple(w for w in m.frame.worlds if w in cone)


def restricted_substitution(
    m: Model,
    i,
    v: Mapping[str, frozenset],
    defining: Mapping,
) -> dict[str, Formula]:
    """For each variable p, the disjunction of the defining formulas of the
    worlds in v(p) that lie in the cone above i; the empty disjunction is
    bot.  Each defining formula must hold at its world and nowhere else."""
    cone = upward_cone(m, i)
    for x, d in defining.items():
        holds_at = {w for w in m.frame.worlds if check(m, w, d)}
        if holds_at != {x}:
            raise DefiningFormulaError(
                f"formula {pretty(d)} defines {sorted(map(str, holds_at))}, "
                f"not exactly {x!r}"
            )
    out = {}
    for p, worlds in v.items():
        picked = [x for x in cone if x in worlds]
        missing = [x for x in picked if x not in defining]
        if missing:
            raise DefiningFormulaError(f"no defining formula for {missing[0]!r}")
        out[p] = disj_all([defining[x] for x in picked])
    return out


# ---------------------------------------------------------------------------
# Serialization


def _world_to_json(w):
    return list(w) if isinstance(w, tuple) else w


def _world_from_json(w):
    return tuple(w) if isinstance(w, list) else w


def frame_to_json(fr: Frame) -> dict:
    order = {w: k for k, w in enumerate(fr.worlds)}
    rel = sorted(fr.rel, key=lambda p: (order[p[0]], order[p[1]]))
    return {
        "worlds": [_world_to_json(w) for w in fr.worlds],
        "rel": [[_world_to_json(a), _world_to_json(b)] for a, b in rel],
    }


def frame_from_json(data: Mapping) -> Frame:
    worlds = tuple(_world_from_json(w) for w in data["worlds"])
    rel = frozenset(
        (_world_from_json(a), _world_from_json(b)) for a, b in data["rel"]
    )
    return Frame(worlds, rel)


def model_to_json(m: Model) -> dict:
    out = frame_to_json(m.frame)
    order = {w: k for k, w in enumerate(m.frame.worlds)}
    out["val"] = {
        name: [_world_to_json(w) for w in sorted(ws, key=order.get)]
        for name, ws in sorted(m.val.items())
    }
    return out


def model_from_json(data: Mapping) -> Model:
    frame = frame_from_json(data)
    val = {
        name: frozenset(_world_from_json(w) for w in ws)
        for name, ws in data.get("val", {}).items()
    }
    return Model(frame, val)


def _dot_id(w) -> str:
    return '"' + str(w).replace('"', r"\"") + '"'


def to_dot(obj: Frame | Model, highlight=None) -> str:
    """Graphviz rendering; the highlighted (falsifying) world is
    double-circled, model nodes are labelled with their true atoms."""
    if isinstance(obj, Model):
        frame, val = obj.frame, obj.val
    else:
        frame, val = obj, None
    lines = ["digraph {"]
    for w in frame.worlds:
        attrs = []
        if val is not None:
            true_atoms = sorted(name for name, ws in val.items() if w in ws)
            label = str(w) + (" | " + ",".join(true_atoms) if true_atoms else "")
            attrs.append(f'label="{label}"')
        attrs.append(
            "shape=doublecircle" if w == highlight else "shape=circle"
        )
        lines.append(f"  {_dot_id(w)} [{', '.join(attrs)}];")
    order = {w: k for k, w in enumerate(frame.worlds)}
    for a, b in sorted(frame.rel, key=lambda p: (order[p[0]], order[p[1]])):
        lines.append(f"  {_dot_id(a)} -> {_dot_id(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
