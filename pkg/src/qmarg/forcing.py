"""Deterministic completion of a global density matrix from its marginals.

The 2^N x 2^N Hermitian global matrix is treated as a grid of unknown
entries tied together by the linear partial-trace identities of a
MarginalSet and by positive semidefiniteness. Named deduction rules fire
to a fixpoint:

  R1  a diagonal entry deduced below -tol is a contradiction
  R2  a zero diagonal wipes its whole row and column
  R3  a linear constraint with a single unknown term forces that term
  R4  when the Cauchy-Schwarz lower bounds |m_kj|^2 / d_j on a group of
      unknown diagonals add up to the group's remaining budget, every
      bound is forced tight and bound-free members drop to zero
  R5  3x3 principal-minor completion: an unknown off-diagonal (i, j) with
      known diagonals and a known pivot column m is forced to
      m_im * conj(m_jm) / d_m when the determinant maximum over the
      unknown is zero
  R6  rank-one propagation along chains of tight pairs
      (|m_pq|^2 = d_p d_q): entries reduce to lambda * base for a common
      base entry; known bases propagate, and a constraint whose unknowns
      all share one unknown base is solved for it
  R7  an off-diagonal marginal entry saturating the aggregated Schwarz
      bound |T|^2 = A * B locks the two diagonal groups into proportion
      d_j = d_i * B / A and phase-aligns the straddling off-diagonals to
      sqrt(d_i d_j) * T / |T|

Rules R2/R3 run from a propagation queue; R4..R7 run as scans between
queue drains, restarting from R4 after any hit. Every deduction lands in
an append-only log that replay_log re-checks independently. A final
verification gate recomputes the input marginals from any fully forced
matrix and downgrades to Contradiction on mismatch, so a FullyForced
answer is sound even for inconsistent inputs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from qmarg import linalg
from qmarg.marginals import DensityMatrix, MarginalSet, ptrace_array
from qmarg.policy import DEFAULT_POLICY, NumericPolicy

FULLY_FORCED = "FullyForced"
UNDERDETERMINED = "Underdetermined"
CONTRADICTION = "Contradiction"


@dataclass
class LogEntry:
    """One deduction: rule id, touched entry or row, forced value.

    cid points at the justifying constraint, aux carries rule-specific
    data (R5 pivot, R6 base, R7 partner, contradiction note).
    """

    rule: str
    rows: tuple
    value: complex
    cid: int | None = None
    aux: tuple | None = None

    @property
    def is_contradiction(self) -> bool:
        return bool(self.aux) and self.aux[0] == "contradiction"


@dataclass
class _Constraint:
    pairs: list
    target: complex
    kind: str                 # "diag" | "offdiag" | "trace"
    ab: tuple | None = None   # (A, B) diagonal budgets of an offdiag entry
    tight: bool = False       # offdiag: |target|^2 == A * B at build time
    n_unknown: int = 0
    known_sum: complex = 0j


def _spread(value: int, positions, n: int) -> int:
    """Place the bits of a subset-local index at the global qubit slots.

    Qubit q owns global bit (n - q); within a subset the smallest label is
    the most significant bit, matching the partial-trace output layout.
    """
    idx = 0
    w = len(positions)
    for rank, q in enumerate(positions):
        bit = (value >> (w - 1 - rank)) & 1
        idx |= bit << (n - q)
    return idx


def build_constraints(ms: MarginalSet, policy: NumericPolicy = DEFAULT_POLICY):
    """Expand a marginal set into scalar linear constraints on global entries.

    Each marginal entry (a, b) with a <= b becomes one constraint: the sum
    of the global entries that trace onto it equals the marginal value.
    Off-diagonal pairs always satisfy i < j. Targets within tol of zero are
    snapped to exact zeros. A global trace constraint is appended last.
    """
    n = ms.n_qubits
    snap = policy.equality
    constraints: list[_Constraint] = []
    for sub, red in zip(ms.subsets, ms.reduced):
        traced = [q for q in range(1, n + 1) if q not in sub]
        ds = 1 << len(sub)
        keep_idx = [_spread(a, sub, n) for a in range(ds)]
        tr_idx = [_spread(t, traced, n) for t in range(1 << len(traced))]
        for a in range(ds):
            for b in range(a, ds):
                target = complex(red[a, b])
                if abs(target) <= snap:
                    target = 0j
                pairs = [(keep_idx[a] | t, keep_idx[b] | t) for t in tr_idx]
                if a == b:
                    constraints.append(_Constraint(pairs, complex(target.real), "diag"))
                else:
                    big_a = float(red[a, a].real)
                    big_b = float(red[b, b].real)
                    tight = (big_a > snap and big_b > snap
                             and abs(abs(target) ** 2 - big_a * big_b) <= snap)
                    constraints.append(_Constraint(pairs, target, "offdiag",
                                                   ab=(big_a, big_b), tight=tight))
    d = 1 << n
    constraints.append(_Constraint([(i, i) for i in range(d)], 1.0 + 0j, "trace"))
    for c in constraints:
        c.n_unknown = len(c.pairs)
    entry_map: dict[tuple[int, int], list[int]] = {}
    for cid, c in enumerate(constraints):
        for p in c.pairs:
            entry_map.setdefault(p, []).append(cid)
    return constraints, entry_map


def _tight_components(known: np.ndarray, value: np.ndarray, tol: float):
    """Group indices whose columns are provably proportional.

    An edge (p, q) exists when the cross entry is known, nonzero, and
    saturates Cauchy-Schwarz: |m_pq|^2 = d_p d_q. Within a component every
    column equals fac[x] times the representative's column, where the
    representative is the smallest member. Returns (rep, fac) dicts over
    indices with known positive diagonals.
    """
    diag = np.real(np.diagonal(value))
    dk = known.diagonal()
    support = np.flatnonzero(dk & (diag > tol))
    rep: dict[int, int] = {}
    fac: dict[int, complex] = {}
    for s in support:
        s = int(s)
        if s in rep:
            continue
        rep[s] = s
        fac[s] = 1.0 + 0j
        todo = deque([s])
        while todo:
            p = todo.popleft()
            for q in support:
                q = int(q)
                if q in rep or not known[p, q]:
                    continue
                m = value[p, q]
                if abs(m) <= tol:
                    continue
                if abs(diag[p] * diag[q] - abs(m) ** 2) > tol:
                    continue
                rep[q] = s
                fac[q] = fac[p] * value[q, p] / diag[p]
                todo.append(q)
    return rep, fac


class _Contradiction(Exception):
    pass


class _BudgetExhausted(Exception):
    pass


class CompletionState:
    """Mutable completion grid: entry values, constraints, deduction log."""

    def __init__(self, ms: MarginalSet, policy: NumericPolicy = DEFAULT_POLICY,
                 budget: int = 500_000):
        self.marginals = ms
        self.n_qubits = ms.n_qubits
        self.dim = 1 << ms.n_qubits
        self.policy = policy
        self.budget = budget
        self.steps = 0
        self.known = np.zeros((self.dim, self.dim), dtype=bool)
        self.value = np.zeros((self.dim, self.dim), dtype=np.complex128)
        self.row_dead = np.zeros(self.dim, dtype=bool)
        self.constraints, self.entry_map = build_constraints(ms, policy)
        self.queue: deque = deque()
        self.log: list[LogEntry] = []
        self.contradiction: str | None = None
        self.exhausted = False
        self._r7_done: set[int] = set()

    # -- primitive operations ------------------------------------------

    def _contradict(self, rule: str, rows: tuple, value: complex,
                    cid: int | None, note: str):
        self.log.append(LogEntry(rule, rows, complex(value), cid,
                                 ("contradiction", note)))
        self.contradiction = note
        raise _Contradiction(note)

    def _set(self, i: int, j: int, v: complex, rule: str,
             cid: int | None = None, aux: tuple | None = None,
             log: bool = True) -> bool:
        """Force entry (i, j) (and its mirror) to v; returns True if new."""
        tol = self.policy.equality
        v = complex(v)
        if i == j:
            if abs(v.imag) > tol:
                self._contradict(rule, (i, j), v, cid, "non-real-diagonal")
            if v.real < -self.policy.psd_slack:
                self._contradict("R1", (i, i), v, cid, "negative-diagonal")
            v = complex(max(v.real, 0.0))
            if v.real <= tol:
                v = 0j
        if self.known[i, j]:
            if abs(self.value[i, j] - v) > tol:
                self._contradict(rule, (i, j), v, cid, "conflict")
            return False
        self.steps += 1
        if self.steps > self.budget:
            raise _BudgetExhausted
        self.known[i, j] = self.known[j, i] = True
        self.value[i, j] = v
        self.value[j, i] = np.conj(v)
        if log:
            self.log.append(LogEntry(rule, (i, j), v, cid, aux))
        self.queue.append((i, j))
        return True

    def _book(self, i: int, j: int):
        """Fold a newly known entry into its constraints; fire R3 / checks."""
        v = self.value[i, j]
        for cid in self.entry_map.get((i, j), ()):
            c = self.constraints[cid]
            c.known_sum += v
            c.n_unknown -= 1
            if c.n_unknown == 1:
                self._resolve_single(cid)
            elif c.n_unknown == 0:
                if abs(c.known_sum - c.target) > self.policy.equality:
                    self._contradict("R3", (i, j), c.known_sum - c.target,
                                     cid, "linear-mismatch")

    def _resolve_single(self, cid: int):
        """R3: one unknown left in a constraint determines it."""
        c = self.constraints[cid]
        unknown = [(a, b) for (a, b) in c.pairs if not self.known[a, b]]
        if len(unknown) != 1:
            return
        a, b = unknown[0]
        have = sum(self.value[p, q] for (p, q) in c.pairs if self.known[p, q])
        self._set(a, b, c.target - have, "R3", cid=cid)

    def _drain(self):
        while self.queue:
            i, j = self.queue.popleft()
            if i == j and self.value[i, i].real == 0.0 and not self.row_dead[i]:
                # R2: zero diagonal wipes row and column i
                self.row_dead[i] = True
                self.log.append(LogEntry("R2", (i,), 0j))
                for k in range(self.dim):
                    if not self.known[min(i, k), max(i, k)]:
                        self._set(min(i, k), max(i, k), 0j, "R2", log=False)
            self._book(i, j)

    # -- scans ------------------------------------------------------------

    def _diag_lower_bound(self, k: int) -> float:
        """Largest Cauchy-Schwarz bound |m_km|^2 / d_m over known columns."""
        tol = self.policy.equality
        diag = np.real(np.diagonal(self.value))
        mask = self.known[k] & self.known.diagonal() & (diag > tol)
        mask[k] = False
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.value[k, mask]) ** 2 / diag[mask]))

    def _scan_r4(self) -> bool:
        fired = False
        tol = self.policy.equality
        for cid, c in enumerate(self.constraints):
            if c.kind == "offdiag" or c.n_unknown <= 0:
                continue
            unknown = [a for (a, _) in c.pairs if not self.known[a, a]]
            if not unknown:
                continue
            have = sum(self.value[a, a].real
                       for (a, _) in c.pairs if self.known[a, a])
            rem = c.target.real - have
            if rem < -tol:
                self._contradict("R4", (unknown[0], unknown[0]), rem, cid,
                                 "negative-budget")
            lbs = [self._diag_lower_bound(k) for k in unknown]
            total = sum(lbs)
            if total > rem + tol:
                self._contradict("R4", (unknown[0], unknown[0]), total - rem,
                                 cid, "bound-overflow")
            if abs(total - rem) <= tol:
                for k, lb in zip(unknown, lbs):
                    if self._set(k, k, lb, "R4", cid=cid):
                        fired = True
        return fired

    def _scan_r7(self) -> bool:
        fired = False
        for cid, c in enumerate(self.constraints):
            # a tight squeeze constrains the pair diagonals, which are not
            # terms of the constraint itself, so do not gate on n_unknown
            if c.kind != "offdiag" or not c.tight or cid in self._r7_done:
                continue
            if all(self.known[i, i] and self.known[j, j] and self.known[i, j]
                   for (i, j) in c.pairs):
                self._r7_done.add(cid)
                continue
            big_a, big_b = c.ab
            phase = c.target / abs(c.target)
            for (i, j) in c.pairs:
                ki = self.known[i, i]
                kj = self.known[j, j]
                if ki and not kj:
                    v = self.value[i, i].real * big_b / big_a
                    if self._set(j, j, v, "R7", cid=cid, aux=(i,)):
                        fired = True
                    kj = True
                elif kj and not ki:
                    v = self.value[j, j].real * big_a / big_b
                    if self._set(i, i, v, "R7", cid=cid, aux=(j,)):
                        fired = True
                    ki = True
                if ki and kj and not self.known[i, j]:
                    amp = math.sqrt(max(self.value[i, i].real, 0.0)
                                    * max(self.value[j, j].real, 0.0))
                    if self._set(i, j, phase * amp, "R7", cid=cid):
                        fired = True
        return fired

    def _scan_r5(self) -> bool:
        fired = False
        tol = self.policy.equality
        diag = np.real(np.diagonal(self.value))
        dk = self.known.diagonal()
        support = [int(s) for s in np.flatnonzero(dk & (diag > tol))]
        for xi in range(len(support)):
            for yi in range(xi + 1, len(support)):
                i, j = support[xi], support[yi]
                if self.known[i, j]:
                    continue
                mask = self.known[i] & self.known[j] & dk & (diag > tol)
                pivots = np.flatnonzero(mask)
                if pivots.size == 0:
                    continue
                a = self.value[i, pivots]
                b = self.value[j, pivots]
                dm = diag[pivots]
                di, dj = diag[i], diag[j]
                slack = (np.abs(a * np.conj(b)) ** 2 / dm + di * dj * dm
                         - di * np.abs(b) ** 2 - dj * np.abs(a) ** 2)
                bad = np.flatnonzero(slack < -tol)
                if bad.size:
                    m = int(pivots[bad[0]])
                    self._contradict("R5", (i, j), slack[bad[0]], None,
                                     "minor-negative")
                hit = np.flatnonzero(np.abs(slack) <= tol)
                if hit.size:
                    m = int(pivots[hit[0]])
                    v = self.value[i, m] * np.conj(self.value[j, m]) / diag[m]
                    if self._set(i, j, v, "R5", aux=(m,)):
                        fired = True
        return fired

    def _scan_r6(self) -> bool:
        tol = self.policy.equality
        rep, fac = _tight_components(self.known, self.value, tol)
        diag = np.real(np.diagonal(self.value))
        fired = False
        # propagate entries whose base entry is already known
        members = sorted(rep)
        for xi in range(len(members)):
            for yi in range(xi + 1, len(members)):
                x, y = members[xi], members[yi]
                if self.known[x, y]:
                    continue
                rx, ry = rep[x], rep[y]
                if (rx, ry) == (x, y):
                    continue
                if rx == ry:
                    base = complex(diag[rx])
                elif self.known[rx, ry]:
                    base = self.value[rx, ry]
                else:
                    continue
                v = fac[x] * np.conj(fac[y]) * base
                if self._set(x, y, v, "R6", aux=("prop", rx, ry)):
                    fired = True
        if fired:
            return True
        # solve constraints whose unknowns all reduce to one unknown base
        for cid, c in enumerate(self.constraints):
            if c.kind != "offdiag" or c.n_unknown <= 0:
                continue
            unknown = [(x, y) for (x, y) in c.pairs if not self.known[x, y]]
            if not unknown:
                continue
            base = None
            lam_sum = 0j
            ok = True
            for (x, y) in unknown:
                if x not in rep or y not in rep:
                    ok = False
                    break
                key = (rep[x], rep[y])
                if base is None:
                    base = key
                elif key != base:
                    ok = False
                    break
                lam_sum += fac[x] * np.conj(fac[y])
            if not ok or base is None:
                continue
            bx, by = base
            if bx == by or self.known[bx, by] or abs(lam_sum) <= 1e-6:
                continue
            have = sum(self.value[p, q] for (p, q) in c.pairs if self.known[p, q])
            base_val = (c.target - have) / lam_sum
            i0, j0 = (bx, by) if bx < by else (by, bx)
            v = base_val if bx < by else np.conj(base_val)
            if self._set(i0, j0, v, "R6", cid=cid, aux=("solve", bx, by)):
                fired = True
                return True
        return fired

    # -- main loop ---------------------------------------------------------

    def run(self):
        try:
            for cid, c in enumerate(self.constraints):
                if abs(c.target) > self.policy.equality and c.kind == "offdiag":
                    big_a, big_b = c.ab
                    if abs(c.target) ** 2 > big_a * big_b + self.policy.equality:
                        self._contradict("R7", c.pairs[0], c.target, cid,
                                         "schwarz-overflow")
                if len(c.pairs) == 1:
                    self._resolve_single(cid)
            self._drain()
            while True:
                if self._scan_r4():
                    self._drain()
                    continue
                if self._scan_r7():
                    self._drain()
                    continue
                if self._scan_r5():
                    self._drain()
                    continue
                if self._scan_r6():
                    self._drain()
                    continue
                break
        except _Contradiction:
            pass
        except _BudgetExhausted:
            self.exhausted = True

    def unknown_entries(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.dim) for j in range(i, self.dim)
                if not self.known[i, j]]


@dataclass
class ForcingOutcome:
    """Result of a forcing run; marginals are carried along for replay."""

    status: str
    n_qubits: int
    matrix: DensityMatrix | None
    free_entries: list
    log: list
    marginals: MarginalSet | None = None
    note: str | None = None


def _verify_forced(eng: CompletionState) -> str | None:
    """Final gate: the forced matrix must reproduce its inputs and be PSD."""
    m = linalg.hermitian_part(eng.value)
    ms = eng.marginals
    tol = eng.policy.equality
    if abs(np.trace(m).real - 1.0) > tol:
        return "verify-trace"
    for sub, red in zip(ms.subsets, ms.reduced):
        dev = float(np.max(np.abs(ptrace_array(m, eng.n_qubits, sub) - red)))
        if dev > tol:
            return "verify-marginal"
    if not linalg.is_psd(m, policy=eng.policy):
        return "verify-psd"
    return None


def force(ms: MarginalSet, budget: int = 500_000,
          policy: NumericPolicy = DEFAULT_POLICY) -> ForcingOutcome:
    """Run the deduction rules to a fixpoint and classify the result.

    FullyForced is returned only when every entry is pinned and the
    resulting matrix passes the verification gate; Underdetermined lists
    the free entries; Contradiction means the input marginals admit no
    PSD completion (or the deductions clashed).
    """
    eng = CompletionState(ms, policy=policy, budget=budget)
    eng.run()
    n = eng.n_qubits
    if eng.contradiction is not None:
        return ForcingOutcome(CONTRADICTION, n, None, [], eng.log, ms,
                              note=eng.contradiction)
    free = eng.unknown_entries()
    if free or eng.exhausted:
        return ForcingOutcome(UNDERDETERMINED, n, None, free, eng.log, ms,
                              note="budget-exhausted" if eng.exhausted else None)
    bad = _verify_forced(eng)
    if bad is not None:
        return ForcingOutcome(CONTRADICTION, n, None, [], eng.log, ms, note=bad)
    rho = DensityMatrix(n, linalg.hermitian_part(eng.value), validate=False)
    return ForcingOutcome(FULLY_FORCED, n, rho, [], eng.log, ms)


def force_chain(ms: MarginalSet, budget: int = 500_000,
                policy: NumericPolicy = DEFAULT_POLICY) -> ForcingOutcome:
    """Force from nearest-neighbor pair marginals.

    Validates that the set is exactly the chain {(K, K+1)} before running;
    the zero-pattern kills, the aggregated squeezes along the chain, and
    the minor completions all fall out of the shared rule engine.
    """
    n = ms.n_qubits
    if n < 3:
        raise ValueError("chain forcing needs n >= 3")
    expected = [(k, k + 1) for k in range(1, n)]
    if sorted(ms.subsets) != expected:
        raise ValueError("marginal set is not the nearest-neighbor chain")
    return force(ms, budget=budget, policy=policy)


# ---------------------------------------------------------------------------
# independent log replay

@dataclass
class ReplayReport:
    passed: bool
    failures: list
    steps: int
    free_entries: list


class _Replayer:
    """Re-checks every logged deduction against an independently grown grid."""

    def __init__(self, ms: MarginalSet, policy: NumericPolicy):
        self.n = ms.n_qubits
        self.dim = 1 << self.n
        self.policy = policy
        self.known = np.zeros((self.dim, self.dim), dtype=bool)
        self.value = np.zeros((self.dim, self.dim), dtype=np.complex128)
        self.constraints, _ = build_constraints(ms, policy)

    def _apply(self, i, j, v):
        self.known[i, j] = self.known[j, i] = True
        self.value[i, j] = v
        self.value[j, i] = np.conj(v)

    def _live_sum_unknowns(self, cid):
        c = self.constraints[cid]
        have = sum(self.value[p, q] for (p, q) in c.pairs if self.known[p, q])
        unknown = [(p, q) for (p, q) in c.pairs if not self.known[p, q]]
        return have, unknown

    def check(self, e: LogEntry) -> str | None:
        tol = self.policy.equality
        if e.is_contradiction:
            return self._check_contradiction(e)
        handler = getattr(self, "_check_" + e.rule.lower(), None)
        if handler is None:
            return f"unknown rule {e.rule}"
        return handler(e)

    def _check_r2(self, e):
        i = e.rows[0]
        if not self.known[i, i] or abs(self.value[i, i]) > self.policy.equality:
            return "row kill without a zero diagonal"
        for k in range(self.dim):
            if not self.known[min(i, k), max(i, k)]:
                self._apply(min(i, k), max(i, k), 0j)
        return None

    def _check_r3(self, e):
        i, j = e.rows
        if e.cid is None:
            return "missing constraint"
        have, unknown = self._live_sum_unknowns(e.cid)
        if unknown != [(i, j)]:
            return "constraint does not single out the entry"
        v = self.constraints[e.cid].target - have
        if abs(v - e.value) > self.policy.equality:
            return f"forced value off by {abs(v - e.value):.3e}"
        self._apply(i, j, e.value)
        return None

    def _check_r4(self, e):
        k = e.rows[0]
        if e.cid is None:
            return "missing constraint"
        c = self.constraints[e.cid]
        have, unknown = self._live_sum_unknowns(e.cid)
        kset = [a for (a, _) in unknown]
        if k not in kset:
            return "entry not an unknown of the group"
        rem = c.target.real - sum(self.value[a, a].real for (a, _) in c.pairs
                                  if self.known[a, a])
        lbs = {a: self._lower_bound(a) for a in kset}
        if abs(sum(lbs.values()) - rem) > self.policy.equality:
            return "squeeze is not tight"
        if abs(lbs[k] - e.value.real) > self.policy.equality:
            return "forced value is not the bound"
        self._apply(k, k, complex(e.value.real))
        return None

    def _lower_bound(self, k):
        tol = self.policy.equality
        diag = np.real(np.diagonal(self.value))
        mask = self.known[k] & self.known.diagonal() & (diag > tol)
        mask[k] = False
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.value[k, mask]) ** 2 / diag[mask]))

    def _check_r5(self, e):
        i, j = e.rows
        if not e.aux:
            return "missing pivot"
        m = e.aux[0]
        tol = self.policy.equality
        need = [(i, i), (j, j), (m, m), (min(i, m), max(i, m)),
                (min(j, m), max(j, m))]
        if not all(self.known[p] for p in need):
            return "pivot data not known"
        di = self.value[i, i].real
        dj = self.value[j, j].real
        dm = self.value[m, m].real
        if dm <= tol:
            return "pivot diagonal not positive"
        a = self.value[i, m]
        b = self.value[j, m]
        slack = (abs(a * np.conj(b)) ** 2 / dm + di * dj * dm
                 - di * abs(b) ** 2 - dj * abs(a) ** 2)
        if abs(slack) > tol:
            return "minor slack not zero"
        v = a * np.conj(b) / dm
        if abs(v - e.value) > tol:
            return f"forced value off by {abs(v - e.value):.3e}"
        self._apply(i, j, e.value)
        return None

    def _check_r6(self, e):
        i, j = e.rows
        tol = self.policy.equality
        rep, fac = _tight_components(self.known, self.value, tol)
        if not e.aux:
            return "missing base"
        if e.aux[0] == "prop":
            _, rx, ry = e.aux
            if i not in rep or j not in rep or rep[i] != rx or rep[j] != ry:
                return "tight chain does not reach the base"
            if rx == ry:
                base = complex(self.value[rx, rx].real)
            elif self.known[rx, ry]:
                base = self.value[rx, ry]
            else:
                return "base entry not known"
            v = fac[i] * np.conj(fac[j]) * base
        elif e.aux[0] == "solve":
            _, bx, by = e.aux
            if e.cid is None:
                return "missing constraint"
            have, unknown = self._live_sum_unknowns(e.cid)
            lam_sum = 0j
            for (x, y) in unknown:
                if x not in rep or y not in rep or (rep[x], rep[y]) != (bx, by):
                    return "unknowns do not share the base"
                lam_sum += fac[x] * np.conj(fac[y])
            if abs(lam_sum) <= 1e-6:
                return "base coefficient vanishes"
            base_val = (self.constraints[e.cid].target - have) / lam_sum
            v = base_val if bx < by else np.conj(base_val)
            if (min(bx, by), max(bx, by)) != (i, j):
                return "logged entry is not the base"
        else:
            return "unknown R6 mode"
        if abs(v - e.value) > tol:
            return f"forced value off by {abs(v - e.value):.3e}"
        self._apply(i, j, e.value)
        return None

    def _check_r7(self, e):
        tol = self.policy.equality
        if e.cid is None:
            return "missing constraint"
        c = self.constraints[e.cid]
        if not c.tight:
            return "constraint is not a tight squeeze"
        big_a, big_b = c.ab
        i, j = e.rows
        if i == j:
            if not e.aux:
                return "missing partner"
            p = e.aux[0]
            if not self.known[p, p]:
                return "partner diagonal not known"
            dp = self.value[p, p].real
            if (p, i) in c.pairs:
                v = dp * big_b / big_a
            elif (i, p) in c.pairs:
                v = dp * big_a / big_b
            else:
                return "pair not in the constraint"
            if abs(v - e.value.real) > tol:
                return f"forced value off by {abs(v - e.value):.3e}"
            self._apply(i, i, complex(e.value.real))
            return None
        if (i, j) not in c.pairs:
            return "pair not in the constraint"
        if not (self.known[i, i] and self.known[j, j]):
            return "diagonals not known"
        amp = math.sqrt(max(self.value[i, i].real, 0.0)
                        * max(self.value[j, j].real, 0.0))
        v = c.target / abs(c.target) * amp
        if abs(v - e.value) > tol:
            return f"forced value off by {abs(v - e.value):.3e}"
        self._apply(i, j, e.value)
        return None

    def _check_contradiction(self, e):
        tol = self.policy.equality
        note = e.aux[1]
        if note == "negative-diagonal":
            return None if e.value.real < -self.policy.psd_slack else \
                "claimed negative diagonal is not negative"
        if note == "schwarz-overflow":
            c = self.constraints[e.cid]
            big_a, big_b = c.ab
            ok = abs(c.target) ** 2 > big_a * big_b + tol
            return None if ok else "claimed overflow is within bounds"
        if note == "minor-negative":
            return None if e.value.real < -tol else "claimed slack not negative"
        if note in ("negative-budget", "bound-overflow"):
            return None if abs(e.value.real) > tol else "claimed gap is tiny"
        if note in ("conflict", "linear-mismatch", "non-real-diagonal"):
            return None  # recorded clash; nothing further to recompute
        if note.startswith("verify"):
            return None
        return f"unknown contradiction note {note}"


def replay_log(outcome: ForcingOutcome,
               policy: NumericPolicy = DEFAULT_POLICY) -> ReplayReport:
    """Independently re-check every deduction in a forcing log.

    Rebuilds the constraint system from the outcome's marginal set, applies
    the logged steps one by one while validating each justification, and
    finally checks the claimed status against the replayed grid.
    """
    if outcome.marginals is None:
        raise ValueError("outcome carries no marginal set to replay against")
    rp = _Replayer(outcome.marginals, policy)
    failures = []
    for k, e in enumerate(outcome.log):
        msg = rp.check(e)
        if msg:
            failures.append(f"step {k} ({e.rule}): {msg}")
    free = [(i, j) for i in range(rp.dim) for j in range(i, rp.dim)
            if not rp.known[i, j]]
    if outcome.status == FULLY_FORCED:
        if free:
            failures.append("status FullyForced but entries are free")
        elif outcome.matrix is None:
            failures.append("status FullyForced without a matrix")
        else:
            dev = float(np.max(np.abs(rp.value - outcome.matrix.matrix)))
            if dev > 1e-12:
                failures.append(f"replayed matrix deviates by {dev:.3e}")
    elif outcome.status == UNDERDETERMINED:
        if outcome.note != "budget-exhausted" and set(free) != set(
                map(tuple, outcome.free_entries)):
            failures.append("free entries do not match the replayed grid")
    elif outcome.status == CONTRADICTION:
        has = any(e.is_contradiction for e in outcome.log)
        if not has and not (outcome.note or "").startswith("verify"):
            failures.append("contradiction status without a logged clash")
    return ReplayReport(not failures, failures, len(outcome.log), free)


__all__ = [
    "CONTRADICTION", "CompletionState", "FULLY_FORCED", "ForcingOutcome",
    "LogEntry", "ReplayReport", "UNDERDETERMINED", "build_constraints",
    "force", "force_chain", "replay_log",
]
