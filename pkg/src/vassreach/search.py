"""Backtracking reachability driver over refinement branches.

A node is one constraint graph sequence between the fixed boundary
vectors.  Branches partition the admitted walks soundly:

* walks traversing every edge of every component satisfy the counting
  system with positivity, so they factor through some minimal solution;
  a solution that survives the pumping checks yields a witness, and each
  failure either kills the solution outright (the failure is forced along
  any such walk) or names the decomposition whose children carry them;
* walks skipping an edge have a proper footprint, enumerated from the
  relaxed solution structure and handled by support restriction.

``Unreachable`` therefore requires every branch to close with a definite
"no walk" — any truncated enumeration, clamp, or solver budget downgrades
the whole verdict to ``Unknown``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .core import (
    Cgs,
    Configuration,
    Path,
    State,
    Transition,
    Vass,
    VassError,
    Vec,
    admits,
    validate_walk,
)
from .charsys import (
    CharSolution,
    build_char_system,
    classify,
    homogeneous_basis,
    minimal_char_solutions,
)
from .diophantine import BudgetExceeded
from .geometry import geometric_dimension
from .refine import (
    CHAIN_CAP,
    RefinementStep,
    TwoDimBudget,
    _chain_candidates,
    algebraic_arrangements,
    algebraic_decompose,
    combinatorial_bound,
    combinatorial_children,
    eulerian_simplify,
    record_step,
    two_dim_replacements,
)
from .witness import (
    NotPumpable,
    build_witness_system,
    evaluate_solution,
    solve_witness_system,
    synthesize_witness,
)

BASIS_SUBSET_LIMIT = 10
SUPPORT_FAMILY_CAP = 512


@dataclass(frozen=True)
class TreeStats:
    """Exploration footprint; ``partial`` marks any truncated enumeration."""

    nodes: int = 0
    leaves: int = 0
    max_depth: int = 0
    steps: Mapping[str, int] = field(default_factory=dict)
    max_cgs_size: int = 0
    partial: bool = False


@dataclass(frozen=True)
class Reachable:
    walk: Path
    trace: Tuple[RefinementStep, ...]
    stats: TreeStats


@dataclass(frozen=True)
class Unreachable:
    stats: TreeStats
    trace: Tuple[RefinementStep, ...] = ()


@dataclass(frozen=True)
class Unknown:
    report: Tuple[str, ...]
    stats: TreeStats
    trace: Tuple[RefinementStep, ...] = ()


Verdict = Union[Reachable, Unreachable, Unknown]


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int = 4_000
    max_cgs_size: int = 4_000
    dio_budget: int = 400_000
    pump_budget: int = 20_000
    two_dim: TwoDimBudget = TwoDimBudget()
    seed: int = 0

    def __post_init__(self):
        if min(self.max_nodes, self.max_cgs_size, self.dio_budget, self.pump_budget) < 1:
            raise VassError("budget caps must be positive")

    @classmethod
    def tiny(cls) -> "SearchBudget":
        return cls(
            max_nodes=200,
            max_cgs_size=400,
            dio_budget=50_000,
            pump_budget=2_000,
            two_dim=TwoDimBudget(border=24, max_cycles=2, max_skeleton=3, max_cycle_len=4),
        )

    @classmethod
    def desk(cls) -> "SearchBudget":
        return cls()

    @classmethod
    def stress(cls) -> "SearchBudget":
        return cls(
            max_nodes=50_000,
            max_cgs_size=20_000,
            dio_budget=2_000_000,
            pump_budget=200_000,
            two_dim=TwoDimBudget(border=256, max_cycles=4, max_skeleton=7, max_cycle_len=8),
        )


def tree_stats(verdict_or_trace) -> TreeStats:
    """Statistics of a finished run, or of a bare branch trace."""
    if isinstance(verdict_or_trace, (Reachable, Unreachable, Unknown)):
        return verdict_or_trace.stats
    steps = tuple(verdict_or_trace)
    counts: Counter = Counter(s.kind for s in steps)
    size = 0
    for s in steps:
        size = max(size, s.parent.size(), s.child.size())
    return TreeStats(
        nodes=len(steps) + 1,
        leaves=1,
        max_depth=len(steps),
        steps=dict(counts),
        max_cgs_size=size,
        partial=False,
    )


# Internal subtree outcomes.  "dead" is definitive; "open" carries taint
# reasons that forbid an Unreachable verdict.
_REACH = "reach"
_DEAD = "dead"
_OPEN = "open"


class _Driver:
    def __init__(self, a: Vec, b: Vec, budget: SearchBudget):
        self.a = a
        self.b = b
        self.budget = budget
        self.memo: Dict[Tuple, Tuple] = {}
        self.nodes = 0
        self.leaves = 0
        self.max_depth = 0
        self.max_size = 0
        self.kind_counts: Counter = Counter()
        self.taints: Counter = Counter()
        self.input_dim: Optional[int] = None

    # -- plumbing -------------------------------------------------------

    def _taint(self, reason: str) -> Tuple:
        self.taints[reason] += 1
        return (_OPEN,)

    def stats(self, partial: bool) -> TreeStats:
        return TreeStats(
            nodes=self.nodes,
            leaves=self.leaves,
            max_depth=self.max_depth,
            steps=dict(self.kind_counts),
            max_cgs_size=self.max_size,
            partial=partial or bool(self.taints),
        )

    def _child(
        self,
        kind: str,
        parent: Cgs,
        j: int,
        params: Iterable,
        child: Cgs,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        step = record_step(kind, parent, j, params, child)
        spread = len(child.components) - len(parent.components) + 1
        bump = 1 if kind in ("algebraic", "combinatorial") else 0
        if bump and self.input_dim is not None:
            assert lineage[j] + 1 <= max(0, self.input_dim - 2), (
                "decomposition depth exceeded the dimension bound"
            )
        child_lineage = (
            lineage[:j] + (lineage[j] + bump,) * spread + lineage[j + 1 :]
        )
        self.kind_counts[kind] += 1
        return self.explore(child, depth + 1, child_lineage, trace + (step,))

    # -- node expansion --------------------------------------------------

    def explore(
        self,
        cgs: Cgs,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        key = cgs.canonical_key()
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        self.max_depth = max(self.max_depth, depth)
        self.max_size = max(self.max_size, cgs.size())
        if self.nodes > self.budget.max_nodes:
            return self._leaf(self._taint("node-budget"))
        if cgs.size() > self.budget.max_cgs_size:
            out = self._leaf(self._taint("size-budget"))
            self.memo[key] = out
            return out
        out = self._expand(cgs, depth, lineage, trace)
        if out[0] != _REACH:
            self.memo[key] = out
        return out

    def _expand(
        self,
        cgs: Cgs,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        dio = self.budget.dio_budget
        # 1. cheap pruning: the counting relaxation without edge coverage is
        # implied by any valid admitted walk, so its unsat is a definite no.
        relaxed = build_char_system(cgs, self.a, self.b, positivity=False)
        try:
            rsols = minimal_char_solutions(relaxed, budget=dio)
        except BudgetExceeded:
            return self._leaf(self._taint("dio-budget"))
        if not rsols:
            self.leaves += 1
            return (_DEAD,)

        # 2. fully linear sequences have an exact lap system.
        if all(c.is_linear_piece() for c in cgs.components):
            return self._expand_linear(cgs, depth, lineage, trace)

        # shared by the boundedness report and the support families below
        try:
            basis = homogeneous_basis(cgs, budget=dio)
        except BudgetExceeded:
            return self._leaf(self._taint("dio-budget"))

        opened = False
        # 3. minimal solutions of the full counting system: walks covering
        # every edge factor through one of them.
        sysP = build_char_system(cgs, self.a, self.b, positivity=True)
        try:
            sols = minimal_char_solutions(sysP, budget=dio)
        except BudgetExceeded:
            sols = None
        if sols is None:
            self._taint("dio-budget")
            opened = True
        elif sols:
            out = self._expand_solutions(cgs, sols, basis, depth, lineage, trace)
            if out[0] == _REACH:
                return out
            opened = opened or out[0] == _OPEN

        # 4. proper-footprint walks: restrict supports drawn from the
        # relaxed solution structure.
        out = self._expand_supports(cgs, rsols, basis, depth, lineage, trace)
        if out[0] == _REACH:
            return out
        opened = opened or out[0] == _OPEN
        return (_OPEN,) if opened else (_DEAD,)

    def _leaf(self, out: Tuple) -> Tuple:
        self.leaves += 1
        return out

    def _expand_linear(
        self,
        cgs: Cgs,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        try:
            sol = solve_witness_system(build_witness_system(cgs, self.a, self.b))
        except BudgetExceeded:
            return self._leaf(self._taint("witness-budget"))
        if sol.status == "sat":
            self.leaves += 1
            return (_REACH, sol.path, trace)
        if sol.status == "budget":
            return self._leaf(self._taint("witness-budget"))
        # The lap system holds every cycle to at least one turn; walks
        # skipping a cycle live in the children that drop it.
        opened = False
        branched = False
        for t, comp in enumerate(cgs.components):
            if comp.trivial:
                continue
            child = eulerian_simplify(cgs, t, ())
            if child is None:
                continue
            branched = True
            out = self._child("eulerian", cgs, t, ("drop", t), child, depth, lineage, trace)
            if out[0] == _REACH:
                return out
            opened = opened or out[0] == _OPEN
        if not branched:
            self.leaves += 1
        return (_OPEN,) if opened else (_DEAD,)

    def _expand_solutions(
        self,
        cgs: Cgs,
        sols: Sequence[CharSolution],
        basis: Sequence[CharSolution],
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        report = classify(cgs, basis=basis)
        pump = self.budget.pump_budget
        opened = False
        for sol in sols:
            chk = evaluate_solution(cgs, sol, report, pump, 10 * pump)
            if chk.ok:
                walk = synthesize_witness(cgs, chk.certificate)
                return (_REACH, walk, trace)
            first = next(c for c in chk.checks if c.kind in ("failed", "budget"))
            if first.kind == "budget":
                self._taint("pump-budget")
                opened = True
                continue
            if first.reason in ("lap-threshold", "orthogonal-unsafe"):
                # Any walk covering every edge visits every state, so the
                # forced violation is unavoidable: dead for this solution.
                continue
            out = self._branch_failure(cgs, sol, report, first, depth, lineage, trace)
            if out[0] == _REACH:
                return out
            opened = opened or out[0] == _OPEN
        return (_OPEN,) if opened else (_DEAD,)

    def _branch_failure(
        self,
        cgs: Cgs,
        sol: CharSolution,
        report,
        check,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        j = check.comp
        comp = cgs.components[j]
        if geometric_dimension(comp.graph) <= 2:
            return self._branch_twodim(cgs, j, depth, lineage, trace)
        if check.reason == "bounded-not-linear":
            return self._branch_algebraic(cgs, j, sol, report, depth, lineage, trace)
        assert check.reason in ("not-pumpable-forward", "not-pumpable-backward")
        return self._branch_combinatorial(
            cgs, j, sol, check, depth, lineage, trace
        )

    def _branch_twodim(
        self,
        cgs: Cgs,
        j: int,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        # Flat components take the linear-replacement path; its enumeration
        # is budget-bounded, so a miss can never close the branch.
        for child in two_dim_replacements(cgs, j, self.budget.two_dim):
            out = self._child("twodim", cgs, j, (j,), child, depth, lineage, trace)
            if out[0] == _REACH:
                return out
        return self._taint("twodim-border")

    def _branch_algebraic(
        self,
        cgs: Cgs,
        j: int,
        sol: CharSolution,
        report,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        mult = {
            tid: sol.psi_of(j, tid)
            for tid in sorted(report.bounded_edges[j])
            if sol.psi_of(j, tid) > 0
        }
        if not mult:
            return self._taint("algebraic-degenerate")
        try:
            arrangements = algebraic_arrangements(cgs, j, mult)
        except BudgetExceeded:
            return self._taint("arrangement-cap")
        opened = False
        for arr in arrangements:
            child = algebraic_decompose(cgs, j, sol, arr)
            if child is None:
                continue
            out = self._child("algebraic", cgs, j, arr, child, depth, lineage, trace)
            if out[0] == _REACH:
                return out
            opened = opened or out[0] == _OPEN
        return (_OPEN,) if opened else (_DEAD,)

    def _branch_combinatorial(
        self,
        cgs: Cgs,
        j: int,
        sol: CharSolution,
        check,
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        comp = cgs.components[j]
        detail: NotPumpable = check.detail
        if detail.index is None:
            # No coordinate admits a cap; the range restriction has nothing
            # to pin, so this solution cannot be closed.
            return self._taint("pump-structure")
        i = detail.index
        km_bound = detail.bound
        end = sol.entry[j] if check.reason.endswith("forward") else sol.exit[j]
        theory, clamped_theory = combinatorial_bound(
            comp, max((abs(v) for v in end), default=0)
        )
        exact = km_bound if clamped_theory else min(km_bound, theory)
        comp_weight = len(comp.graph.states) + len(comp.graph.transitions)
        size_cap = max(1, self.budget.max_cgs_size // max(1, comp_weight) - 1)
        window = min(exact, size_cap)
        entry_val = sol.entry[j][i]
        exit_val = sol.exit[j][i]
        if entry_val > exact or exit_val > exact:
            # The cap is a true bound on the coordinate along any walk
            # realizing this solution, so exceeding it is fatal for it.
            return (_DEAD,)
        if entry_val > window or exit_val > window:
            return self._taint("ridge-clamp")
        try:
            kids = combinatorial_children(cgs, j, i, window, entry_val, exit_val)
        except BudgetExceeded:
            return self._taint("chain-cap")
        opened = False
        for child in kids:
            out = self._child(
                "combinatorial", cgs, j, (i, window, entry_val, exit_val), child,
                depth, lineage, trace,
            )
            if out[0] == _REACH:
                return out
            opened = opened or out[0] == _OPEN
        if window < exact:
            return self._taint("ridge-clamp")
        return (_OPEN,) if opened else (_DEAD,)

    def _expand_supports(
        self,
        cgs: Cgs,
        base_sols: Sequence[CharSolution],
        basis: Sequence[CharSolution],
        depth: int,
        lineage: Tuple[int, ...],
        trace: Tuple[RefinementStep, ...],
    ) -> Tuple:
        if len(basis) > BASIS_SUBSET_LIMIT:
            return self._taint("support-enum")
        k = len(cgs.components)
        full = tuple(
            frozenset(t.tid for t in cgs.components[j].graph.transitions)
            for j in range(k)
        )
        families: List[Tuple[frozenset, ...]] = []
        seen: Set[Tuple[frozenset, ...]] = set()
        for m in base_sols:
            for mask in range(1 << len(basis)):
                fam = []
                for j in range(k):
                    sup = {tid for tid, c in m.psi[j].items() if c > 0}
                    for z, o in enumerate(basis):
                        if mask >> z & 1:
                            sup |= {tid for tid, c in o.psi[j].items() if c > 0}
                    fam.append(frozenset(sup))
                famt = tuple(fam)
                if famt == full or famt in seen:
                    continue
                seen.add(famt)
                families.append(famt)
                if len(families) > SUPPORT_FAMILY_CAP:
                    return self._taint("support-enum")
        opened = False
        for fam in families:
            # fold the restrictions right-to-left so earlier indices stay
            # aligned while components spread into chains
            cur: Optional[Cgs] = cgs
            cur_lineage = lineage
            steps: List[RefinementStep] = []
            for j in range(k - 1, -1, -1):
                if fam[j] == full[j]:
                    continue
                nxt = eulerian_simplify(cur, j, fam[j])
                if nxt is None:
                    cur = None
                    break
                steps.append(record_step("eulerian", cur, j, tuple(sorted(fam[j])), nxt))
                spread = len(nxt.components) - len(cur.components) + 1
                cur_lineage = (
                    cur_lineage[:j]
                    + (cur_lineage[j],) * spread
                    + cur_lineage[j + 1 :]
                )
                cur = nxt
            if cur is None or cur.canonical_key() == cgs.canonical_key():
                continue
            self.kind_counts["eulerian"] += len(steps)
            out = self.explore(cur, depth + 1, cur_lineage, trace + tuple(steps))
            if out[0] == _REACH:
                return out
            opened = opened or out[0] == _OPEN
        return (_OPEN,) if opened else (_DEAD,)


def _finish(driver: _Driver, outcome: Tuple) -> Verdict:
    if outcome[0] == _REACH:
        return Reachable(outcome[1], outcome[2], driver.stats(partial=False))
    if outcome[0] == _DEAD and not driver.taints:
        return Unreachable(driver.stats(partial=False))
    report = tuple(
        f"{reason} x{count}" for reason, count in sorted(driver.taints.items())
    )
    return Unknown(report or ("inconclusive",), driver.stats(partial=True))


def decide_cgs(cgs: Cgs, a: Vec, b: Vec, budget: SearchBudget = SearchBudget()) -> Verdict:
    """Decide ``a ->* b`` through the admitted walks of a sequence."""
    a = tuple(a)
    b = tuple(b)
    if len(a) != cgs.dim or len(b) != cgs.dim:
        raise VassError("boundary dimension mismatch")
    if any(x < 0 for x in a) or any(x < 0 for x in b):
        raise VassError("boundary vectors must be nonnegative")
    pinned = Cgs(cgs.components, cgs.connectors, cgs.side_constraints, (a, b))
    driver = _Driver(a, b, budget)
    union = _union_graph(pinned)
    driver.input_dim = geometric_dimension(union)
    outcome = driver.explore(pinned, 0, (0,) * len(pinned.components), ())
    verdict = _finish(driver, outcome)
    if isinstance(verdict, Reachable):
        assert admits(pinned, verdict.walk), "witness not admitted by the instance"
    return verdict


def _union_graph(cgs: Cgs) -> Vass:
    """Disjoint union of the component graphs (for the dimension gauge)."""
    states: List[State] = []
    trans: List[Transition] = []
    tid = 0
    for j, comp in enumerate(cgs.components):
        for s in comp.graph.states:
            states.append((j, s))
        for t in comp.graph.transitions:
            trans.append(Transition(tid, (j, t.src), (j, t.dst), t.disp, t.origin))
            tid += 1
    return Vass(cgs.dim, tuple(states), tuple(trans))


def decide(
    vass: Vass,
    p: State,
    a: Vec,
    q: State,
    b: Vec,
    budget: SearchBudget = SearchBudget(),
) -> Verdict:
    """Decide ``p(a) ->* q(b)`` in a vector addition system with states.

    Roots are the chain decompositions of the graph between the two
    states; each is searched depth-first, and a validated witness walk is
    returned as soon as one branch produces it.
    """
    a = tuple(a)
    b = tuple(b)
    if p not in vass.states or q not in vass.states:
        raise VassError("endpoint states missing from the system")
    if len(a) != vass.dim or len(b) != vass.dim:
        raise VassError("boundary dimension mismatch")
    if any(x < 0 for x in a) or any(x < 0 for x in b):
        raise VassError("boundary vectors must be nonnegative")
    driver = _Driver(a, b, budget)
    driver.input_dim = geometric_dimension(vass)
    try:
        chains = _chain_candidates(
            vass.dim, vass.states, vass.transitions, p, q, exact=False, cap=CHAIN_CAP
        )
    except BudgetExceeded:
        driver.taints["root-enum"] += 1
        chains = []
    outcome: Tuple = (_DEAD,)
    for parts, conns in chains:
        root = Cgs(tuple(parts), tuple(conns), (), (a, b))
        got = driver.explore(root, 0, (0,) * len(parts), ())
        if got[0] == _REACH:
            outcome = got
            break
        if got[0] == _OPEN:
            outcome = (_OPEN,)
    verdict = _finish(driver, outcome)
    if isinstance(verdict, Reachable):
        end = validate_walk(vass, Configuration(p, a), verdict.walk)
        assert end == Configuration(q, b), "witness does not land on the target"
    return verdict
