"""Feasibility battery and fusion verification for verified instances.

Six conditions, in increasing cost order: the handshake parity condition,
realizability of closed subsets and quotients, the triangle-count
integrality condition, the absolute bound, nonnegativity of the Krein
parameters, and the matrix Gegenbauer criterion.  The first three are
exact integer computations; the last three read the high-precision Krein
tensor.  ``run_battery`` produces a :class:`FeasibilityReport` with one
verdict per condition and a witness for every failure.

``fusion_check`` verifies that a partition of the basis fuses (the block
sums close multiplicatively, checked exactly) and that the fused character
table satisfies the partial row- and column-sum identities linking it to
the original eigenmatrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from mpmath import mp

from .errors import SitawimError
from .spectra import (
    DEFAULT_PRECISION,
    SpectralData,
    eigenmatrix_P,
    eigenmatrix_Q,
    krein,
    row_multiplicities,
)
from .structcheck import Instance, multiplicities, verify_sita
from .varietygen import InvolutionType

__all__ = [
    "ConditionResult",
    "FeasibilityReport",
    "FusionResult",
    "absolute_bound",
    "closed_subsets_quotients",
    "condition_grid",
    "fusion_check",
    "gegenbauer",
    "handshake",
    "krein_nonneg",
    "run_battery",
    "triangle_count",
]

#: conditions in battery order (the cheap exact ones first)
CONDITIONS = (
    "handshake",
    "closed-subsets",
    "triangle-count",
    "absolute-bound",
    "krein-nonnegativity",
    "gegenbauer",
)

#: default zero-detection tolerance for Krein-support classification
KREIN_ZERO_EPS = "1e-20"
#: multiplier defining the ambiguous near-zero band that downgrades a
#: verdict to "warning"
NEAR_ZERO_BAND = 10**6


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of one feasibility condition.

    ``verdict`` is one of ``pass``, ``fail``, ``skipped``, ``vacuous``, or
    ``warning``; failures always carry a ``witness``.
    """

    name: str
    verdict: str
    witness: Optional[object] = None
    detail: Optional[object] = None

    @property
    def ok(self) -> bool:
        return self.verdict in ("pass", "vacuous")


@dataclass(frozen=True)
class FeasibilityReport:
    """Battery outcome: every condition exactly once, plus the
    configuration it ran under."""

    conditions: tuple[ConditionResult, ...]
    eps: object
    lmax: Optional[int]

    def __post_init__(self):
        names = [c.name for c in self.conditions]
        if len(names) != len(set(names)):
            raise SitawimError("duplicate condition in feasibility report")
        for c in self.conditions:
            if c.verdict == "fail" and c.witness is None:
                raise SitawimError(f"failing condition {c.name} lacks a witness")

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def __getitem__(self, name: str) -> ConditionResult:
        return self.condition(name)

    def failing(self) -> tuple[ConditionResult, ...]:
        return tuple(c for c in self.conditions if c.verdict == "fail")

    def as_dict(self) -> dict:
        return {
            "eps": None if self.eps is None else float(self.eps),
            "lmax": self.lmax,
            "conditions": [
                {
                    "name": c.name,
                    "verdict": c.verdict,
                    "witness": _plain(c.witness),
                    "detail": _plain(c.detail),
                }
                for c in self.conditions
            ],
        }


def _plain(value):
    """Recursively convert witnesses/details to JSON-friendly types."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else str(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_plain(v) for v in value]
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


# ---------------------------------------------------------------------------
# exact integer conditions


def _structural_star(matrices) -> tuple[int, ...]:
    """The involution read off the matrices themselves: i* is the unique j
    whose product with b_i meets the identity.  Independent of (and a
    cross-check on) any declared involution type."""
    r = len(matrices)
    star = []
    for i in range(r):
        hits = [j for j in range(r) if matrices[i][0][j]]
        if len(hits) != 1:
            raise SitawimError(f"element {i} has no unique pseudo-inverse")
        star.append(hits[0])
    if sorted(star) != list(range(r)) or any(star[star[i]] != i for i in range(r)):
        raise SitawimError("pseudo-inverse map is not an involution")
    return tuple(star)


def _induced_itype(name: str, star: Sequence[int]) -> InvolutionType:
    rank = len(star)
    return InvolutionType(name, rank, tuple(star), tuple(range(1, rank)))


def handshake(inst: Instance) -> ConditionResult:
    """Parity condition: (b_i)_{i,j} * k_j must be even for distinct
    nontrivial i, j.  Exact integers; precision-independent.

    The underlying even-degree-sum argument needs undirected graphs, so
    only self-paired (star-fixed) basis elements are constrained; tables
    with no two distinct such elements report ``vacuous``.  (The 16-point
    table with three conjugacy-paired elements of degree 5 is realizable
    yet has (b_2)_{2,3} * k_3 odd — quantifying over asymmetric elements
    would reject it wrongly.)
    """
    r = inst.rank
    star = _structural_star(inst.matrices)
    sym = [i for i in range(1, r) if star[i] == i]
    pairs = [(i, j) for i in sym for j in sym if i != j]
    if not pairs:
        return ConditionResult("handshake", "vacuous", detail={"pairs": 0})
    for i, j in pairs:
        if (inst.matrices[i][i][j] * inst.degrees[j]) % 2:
            return ConditionResult(
                "handshake",
                "fail",
                witness={
                    "i": i,
                    "j": j,
                    "entry": inst.matrices[i][i][j],
                    "degree": inst.degrees[j],
                },
            )
    return ConditionResult("handshake", "pass", detail={"pairs": len(pairs)})


def triangle_count(inst: Instance) -> ConditionResult:
    """Integrality condition: t_j = n * (b_j^3)_{0,0} / 6 must be a
    nonnegative integer for every nontrivial self-paired j.  Exact
    integer cubes.

    Only undirected graphs have 6 ordered closed walks per triangle, so
    asymmetric elements are exempt (the order-3 cyclic group table is
    realizable with n * (b_1^3)_{0,0} / 6 = 1/2); a table with none
    reports ``vacuous``.
    """
    r, n = inst.rank, inst.order
    star = _structural_star(inst.matrices)
    counts = {}
    witness = None
    for j in range(1, r):
        if star[j] != j:
            continue
        M = inst.matrices[j]
        sq = [
            [sum(M[a][t] * M[t][b] for t in range(r)) for b in range(r)]
            for a in range(r)
        ]
        c = sum(sq[0][t] * M[t][0] for t in range(r))
        t = Fraction(n * c, 6)
        counts[j] = int(t) if t.denominator == 1 else t
        if witness is None and (t.denominator != 1 or t < 0):
            witness = {"j": j, "count": _plain(t)}
    if witness is not None:
        return ConditionResult(
            "triangle-count", "fail", witness=witness, detail=counts
        )
    verdict = "pass" if counts else "vacuous"
    return ConditionResult("triangle-count", verdict, detail=counts)


def _closed_subsets(inst: Instance) -> list[tuple[int, ...]]:
    """All star-closed, product-closed subsets containing the identity,
    sorted by size then lexicographically."""
    r = inst.rank
    star = _structural_star(inst.matrices)
    mats = inst.matrices
    found = []
    rest = list(range(1, r))
    for mask in range(1 << len(rest)):
        S = {0} | {rest[t] for t in range(len(rest)) if mask >> t & 1}
        if any(star[i] not in S for i in S):
            continue
        outside = [a for a in range(r) if a not in S]
        if any(mats[i][a][j] for i in S for j in S for a in outside):
            continue
        found.append(tuple(sorted(S)))
    return sorted(found, key=lambda S: (len(S), S))


def sub_instance(inst: Instance, subset: Sequence[int]) -> Instance:
    """The sub-table on a closed subset, re-indexed to 0..len-1."""
    T = tuple(sorted(subset))
    if T[0] != 0:
        raise SitawimError("a closed subset must contain the identity")
    pos = {b: i for i, b in enumerate(T)}
    mats = [
        [[inst.matrices[i][a][j] for j in T] for a in T]
        for i in T
    ]
    # closure guarantee: no products escape the subset
    outside = [a for a in range(inst.rank) if a not in pos]
    if any(inst.matrices[i][a][j] for i in T for j in T for a in outside):
        raise SitawimError("subset is not product-closed")
    star = _structural_star(inst.matrices)
    if any(star[i] not in pos for i in T):
        raise SitawimError("subset is not star-closed")
    induced = _induced_itype("sub", [pos[star[i]] for i in T])
    return Instance(mats, induced)


def quotient_data(inst: Instance, subset: Sequence[int]):
    """Coset blocks, quotient degrees, and quotient structure constants for
    a closed subset.

    Returns ``(blocks, degrees, constants)``: blocks partition the basis
    indices with the subset itself first; degrees are exact Fractions
    (block degree sum over the subset's order); ``constants[B][D][C]`` is
    the exact Fraction coefficient of block D in the product of blocks
    B and C of the quotient basis.
    """
    T = tuple(sorted(subset))
    r = inst.rank
    mats = inst.matrices
    n_T = sum(inst.degrees[t] for t in T)
    # support of (sum_{t in T} b_t) * b_i * (sum_{t' in T} b_t')
    blocks_of = {}
    for i in range(r):
        u = [sum(mats[t][a][i] for t in T) for a in range(r)]
        w = [
            sum(u[a] * sum(mats[a][c][t2] for t2 in T) for a in range(r))
            for c in range(r)
        ]
        blocks_of[i] = frozenset(c for c in range(r) if w[c])
    # merge overlapping supports into the coset partition
    blocks: list[set] = []
    for i in range(r):
        merged = set(blocks_of[i]) | {i}
        keep = []
        for B in blocks:
            if B & merged:
                merged |= B
            else:
                keep.append(B)
        keep.append(merged)
        blocks = keep
    blocks = tuple(
        sorted((tuple(sorted(B)) for B in blocks), key=lambda B: (0 not in B, B))
    )
    if blocks[0] != T:
        raise SitawimError("coset block of the identity is not the subset itself")
    degrees = tuple(
        Fraction(sum(inst.degrees[i] for i in B), n_T) for B in blocks
    )
    d = len(blocks)
    constants = [[[None] * d for _ in range(d)] for _ in range(d)]
    for bi, B in enumerate(blocks):
        for ci, C in enumerate(blocks):
            v = [
                sum(mats[i][a][j] for i in B for j in C) for a in range(r)
            ]
            for di, D in enumerate(blocks):
                vals = {v[a] for a in D}
                if len(vals) != 1:
                    raise SitawimError(
                        "coset block sums do not close; not a closed subset"
                    )
                constants[bi][di][ci] = Fraction(vals.pop(), n_T)
    constants = tuple(tuple(tuple(row) for row in plane) for plane in constants)
    return blocks, degrees, constants


def closed_subsets_quotients(inst: Instance) -> ConditionResult:
    """Realizability of closed subsets and quotients: each nontrivial
    closed subset must have an integral sub-table (integer standard
    multiplicities) and a quotient with integral degrees and structure
    constants."""
    r = inst.rank
    lattice = _closed_subsets(inst)
    quotients = []
    nontrivial = [S for S in lattice if 1 < len(S) < r]
    for T in nontrivial:
        sub = sub_instance(inst, T)
        report = verify_sita(sub)
        if not report.passed:
            return ConditionResult(
                "closed-subsets",
                "fail",
                witness={
                    "kind": "subtable-axioms",
                    "subset": T,
                    "axiom": report.failing()[0].name,
                },
                detail={"lattice": tuple(lattice)},
            )
        mres = multiplicities(sub)
        if not mres.integral:
            return ConditionResult(
                "closed-subsets",
                "fail",
                witness={
                    "kind": "subtable-multiplicity",
                    "subset": T,
                    "values": tuple(map(str, mres.values)),
                },
                detail={"lattice": tuple(lattice)},
            )
        blocks, degrees, constants = quotient_data(inst, T)
        for B, dgr in zip(blocks, degrees):
            if dgr.denominator != 1:
                return ConditionResult(
                    "closed-subsets",
                    "fail",
                    witness={
                        "kind": "quotient-degree",
                        "subset": T,
                        "block": B,
                        "degree": str(dgr),
                    },
                    detail={"lattice": tuple(lattice)},
                )
        flat = [
            c for plane in constants for row in plane for c in row
        ]
        if any(c.denominator != 1 for c in flat):
            bad = next(c for c in flat if c.denominator != 1)
            return ConditionResult(
                "closed-subsets",
                "fail",
                witness={
                    "kind": "quotient-structure",
                    "subset": T,
                    "value": str(bad),
                },
                detail={"lattice": tuple(lattice)},
            )
        quotients.append(
            {
                "subset": T,
                "blocks": tuple(blocks),
                "rank": len(blocks),
                "degrees": tuple(int(dg) for dg in degrees),
            }
        )
    verdict = "pass" if nontrivial else "vacuous"
    return ConditionResult(
        "closed-subsets",
        verdict,
        detail={"lattice": tuple(lattice), "quotients": tuple(quotients)},
    )


# ---------------------------------------------------------------------------
# Krein-tensor conditions


def _need_krein(sd: SpectralData):
    if sd.krein is None or sd.Q is None:
        raise SitawimError("condition requires the Krein tensor; run krein() first")


def _kappa(sd: SpectralData, i: int, j: int, k: int):
    # (L*_i)[k][j] = kappa_{i,j,k}
    return sd.krein[i][k][j]


def absolute_bound(sd: SpectralData, *, eps=None) -> ConditionResult:
    """For every i <= j, the multiplicities of the Krein support of
    (i, j) must fit under m_i*m_j (distinct) or m_i(m_i+1)/2 (equal).

    Entries with magnitude in the ambiguous band (eps, 10^6*eps] downgrade
    the verdict to ``warning`` because the support classification — and
    with it the verdict — could flip under a different tolerance.
    """
    _need_krein(sd)
    r = sd.rank
    with mp.workprec(sd.precision + 32):
        if eps is None:
            eps = mp.mpf(KREIN_ZERO_EPS)
        m = sd.Q[0]
        band = []
        for i in range(r):
            for j in range(i, r):
                support = []
                for k in range(r):
                    mag = abs(_kappa(sd, i, j, k))
                    if mag > eps:
                        support.append(k)
                    if eps < mag <= NEAR_ZERO_BAND * eps:
                        band.append((i, j, k))
                total = sum(m[k] for k in support)
                bound = m[i] * m[j] if i != j else m[i] * (m[i] + 1) / 2
                if total > bound:
                    return ConditionResult(
                        "absolute-bound",
                        "fail",
                        witness={
                            "i": i,
                            "j": j,
                            "support": tuple(support),
                            "total": float(total),
                            "bound": float(bound),
                        },
                    )
    if band:
        return ConditionResult(
            "absolute-bound",
            "warning",
            witness={"near-zero": tuple(band)},
        )
    return ConditionResult("absolute-bound", "pass")


def krein_nonneg(sd: SpectralData, *, eps=None) -> ConditionResult:
    """Every dual intersection number must be >= -eps."""
    _need_krein(sd)
    r = sd.rank
    if eps is None:
        eps = sd.eps
    worst = None
    for i in range(r):
        for k in range(r):
            for j in range(r):
                v = sd.krein[i][k][j]
                if v < -eps and (worst is None or v < worst[3]):
                    worst = (i, j, k, v)
    if worst is not None:
        i, j, k, v = worst
        return ConditionResult(
            "krein-nonnegativity",
            "fail",
            witness={"i": i, "j": j, "k": k, "value": float(v)},
        )
    return ConditionResult("krein-nonnegativity", "pass")


def _has_dual_rank2_subset(sd: SpectralData, i: int, zero_eps) -> bool:
    """True when {0, i} is closed in the dual: kappa_{i,i,k} vanishes for
    every k outside {0, i}, making L*_i block-triangular with a complete
    rank-2 dual block of order m_i + 1."""
    r = sd.rank
    return all(
        abs(_kappa(sd, i, i, k)) <= zero_eps for k in range(r) if k not in (0, i)
    )


def gegenbauer(
    sd: SpectralData,
    i: int,
    lmax: Optional[int] = None,
    *,
    lstar: Optional[int] = None,
    first_column_only: Optional[bool] = None,
    eps=None,
) -> ConditionResult:
    """Matrix Gegenbauer criterion for one dual index.

    Evaluates G_l((1/m_i) L*_i) through the three-term recurrence
    G_0 = 1, G_1(x) = m*x, l*G_l(x) = (2l+m-4)*x*G_{l-1}(x) -
    (l+m-4)*G_{l-2}(x) and requires every entry (or, under the rank-2
    dual-subset shortcut, every first-column entry) to be >= -eps for
    l = 1..bound.  The bound is ``lstar`` when supplied (the externally
    computed threshold), else ``lmax``, else 2*max multiplicity.

    The criterion comes from an embedding into a real unit sphere, which
    exists only when the character row is real; a nonreal row reports
    ``vacuous``.  (The 16-point table with three degree-5 elements is
    realizable yet would "fail" at its conjugate-paired rows.)
    """
    _need_krein(sd)
    r = sd.rank
    if not 1 <= i < r:
        raise SitawimError(f"dual index {i} out of range for rank {r}")
    with mp.workprec(sd.precision + 32):
        if eps is None:
            eps = sd.eps
        if max(abs(mp.im(v)) for v in sd.P[i]) > eps:
            return ConditionResult(
                "gegenbauer",
                "vacuous",
                detail={"i": i, "reason": "nonreal character row"},
            )
        zero_eps = mp.mpf(KREIN_ZERO_EPS)
        if first_column_only is None:
            first_column_only = _has_dual_rank2_subset(sd, i, zero_eps)
        m = sd.Q[0][i]
        if m < 1:
            raise SitawimError("gegenbauer requires multiplicity >= 1")
        bound = lstar if lstar is not None else lmax
        if bound is None:
            bound = int(2 * max(sd.Q[0][k] for k in range(1, r)))
        x = [[sd.krein[i][a][b] / m for b in range(r)] for a in range(r)]
        prev2 = [[mp.mpf(1 if a == b else 0) for b in range(r)] for a in range(r)]
        prev1 = [[m * x[a][b] for b in range(r)] for a in range(r)]
        for l in range(1, bound + 1):
            if l == 1:
                G = prev1
            else:
                xg = [
                    [sum(x[a][t] * prev1[t][b] for t in range(r)) for b in range(r)]
                    for a in range(r)
                ]
                G = [
                    [
                        ((2 * l + m - 4) * xg[a][b] - (l + m - 4) * prev2[a][b]) / l
                        for b in range(r)
                    ]
                    for a in range(r)
                ]
                prev2, prev1 = prev1, G
            cols = (0,) if first_column_only else tuple(range(r))
            low = min(G[a][b] for a in range(r) for b in cols)
            if low < -eps:
                return ConditionResult(
                    "gegenbauer",
                    "fail",
                    witness={"i": i, "l": l, "entry": float(low)},
                    detail={
                        "i": i,
                        "bound": bound,
                        "first_column_only": first_column_only,
                    },
                )
    return ConditionResult(
        "gegenbauer",
        "pass",
        detail={"i": i, "bound": bound, "first_column_only": first_column_only},
    )


def _gegenbauer_all(sd: SpectralData, lmax, lstar, eps) -> ConditionResult:
    details = []
    ran = False
    for i in range(1, sd.rank):
        res = gegenbauer(sd, i, lmax, lstar=lstar, eps=eps)
        details.append(res.detail)
        ran = ran or res.verdict == "pass"
        if res.verdict == "fail":
            return ConditionResult(
                "gegenbauer", "fail", witness=res.witness, detail=tuple(details)
            )
    verdict = "pass" if ran else "vacuous"
    return ConditionResult("gegenbauer", verdict, detail=tuple(details))


# ---------------------------------------------------------------------------
# the battery


def run_battery(
    inst: Instance,
    sd: Optional[SpectralData] = None,
    *,
    precision: int = DEFAULT_PRECISION,
    eps=None,
    lmax: Optional[int] = None,
    lstar: Optional[int] = None,
    stop_on_fail: bool = True,
) -> FeasibilityReport:
    """All six conditions against one instance, cheap exact checks first.

    With ``stop_on_fail`` (the default, mirroring how a screening pipeline
    discards an instance at its first failure) the conditions after the
    first failing one report ``skipped``.  ``eps`` is the numeric zero
    tolerance handed to the Krein-side conditions.
    """
    results = [handshake(inst), closed_subsets_quotients(inst), triangle_count(inst)]
    failed = any(c.verdict == "fail" for c in results)
    spectral = None
    if not (failed and stop_on_fail):
        if sd is None:
            sd = krein(eigenmatrix_Q(eigenmatrix_P(inst, precision), inst), inst)
        elif sd.krein is None:
            sd = krein(sd if sd.Q is not None else eigenmatrix_Q(sd, inst), inst)
        spectral = sd
    for maker in (
        lambda: absolute_bound(spectral),
        lambda: krein_nonneg(spectral, eps=eps),
        lambda: _gegenbauer_all(spectral, lmax, lstar, eps),
    ):
        if failed and stop_on_fail:
            name = CONDITIONS[len(results)]
            results.append(ConditionResult(name, "skipped"))
            continue
        res = maker()
        results.append(res)
        failed = failed or res.verdict == "fail"
    return FeasibilityReport(
        conditions=tuple(results),
        eps=eps,
        lmax=lmax if lstar is None else lstar,
    )


def condition_grid(reports: Mapping[str, FeasibilityReport]) -> str:
    """Compact condition-by-instance table of verdicts."""
    names = list(CONDITIONS)
    width = max(len(n) for n in names)
    cols = list(reports)
    head = " " * width + "  " + "  ".join(f"{c:>8}" for c in cols)
    lines = [head]
    for n in names:
        cells = []
        for c in cols:
            try:
                cells.append(f"{reports[c].condition(n).verdict:>8}")
            except KeyError:
                cells.append(f"{'-':>8}")
        lines.append(f"{n:<{width}}  " + "  ".join(cells))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# fusion verification


@dataclass(frozen=True)
class FusionResult:
    """Outcome of fusing a basis partition.

    ``fuses`` reports exact multiplicative closure of the block sums;
    ``verdict`` is ``not_a_fusion`` when closure fails, else ``pass`` or
    ``fail`` for the partial-sum identities.  On success ``fused`` holds
    the fused instance, ``P_tilde`` its character table (rows aligned with
    ``dual_partition``, the induced grouping of the original rows).
    """

    partition: tuple[tuple[int, ...], ...]
    fuses: bool
    verdict: str
    witness: Optional[object] = None
    fused: Optional[Instance] = None
    P_tilde: Optional[tuple] = None
    dual_partition: Optional[tuple[tuple[int, ...], ...]] = None

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"


def _normalize_partition(partition, r: int) -> tuple[tuple[int, ...], ...]:
    blocks = [tuple(sorted(set(B))) for B in partition]
    seen = [i for B in blocks for i in B]
    if sorted(seen) != list(range(r)):
        raise SitawimError("blocks must partition the basis indices exactly")
    if (0,) not in blocks:
        raise SitawimError("the identity must form its own block")
    return tuple(sorted(blocks, key=lambda B: (B != (0,), B)))


def fusion_check(inst: Instance, sd: SpectralData, partition) -> FusionResult:
    """Exact closure check for a fused basis plus the partial row/column
    sum identities tying the fused character table to the original."""
    r = inst.rank
    mats = inst.matrices
    blocks = _normalize_partition(partition, r)
    d = len(blocks)
    where = {i: bi for bi, B in enumerate(blocks) for i in B}
    # exact closure of block sums
    fused_mats = [[[0] * d for _ in range(d)] for _ in range(d)]
    for bi, B in enumerate(blocks):
        for ci, C in enumerate(blocks):
            v = [sum(mats[i][a][j] for i in B for j in C) for a in range(r)]
            for di, D in enumerate(blocks):
                vals = {v[a] for a in D}
                if len(vals) != 1:
                    return FusionResult(
                        partition=blocks,
                        fuses=False,
                        verdict="not_a_fusion",
                        witness={
                            "blocks": (B, C),
                            "uneven": D,
                            "coefficients": tuple(v[a] for a in D),
                        },
                    )
                fused_mats[bi][di][ci] = vals.pop()
    fused = Instance(
        fused_mats, _induced_itype("fused", _structural_star(fused_mats))
    )
    with mp.workprec(sd.precision + 32):
        tol = sd.eps * max(1, inst.order)
        m = row_multiplicities(sd, inst)
        # group original rows by their block row sums — identity (ii)
        sums = [
            tuple(sum(sd.P[l][j] for j in B) for B in blocks) for l in range(r)
        ]
        groups: list[list[int]] = []
        for l in range(r):
            for g in groups:
                if all(abs(a - b) <= tol for a, b in zip(sums[g[0]], sums[l])):
                    g.append(l)
                    break
            else:
                groups.append([l])
        if len(groups) != d:
            return FusionResult(
                partition=blocks,
                fuses=True,
                verdict="fail",
                witness={
                    "kind": "row-sum-grouping",
                    "groups": len(groups),
                    "expected": d,
                },
                fused=fused,
            )
        dual = tuple(tuple(g) for g in groups)
        P_tilde = tuple(sums[g[0]] for g in dual)
        # identity (i): column sums against the fused table
        k = inst.degrees
        kt = [sum(k[j] for j in B) for B in blocks]
        for gi, I in enumerate(dual):
            mI = sum(m[i] for i in I)
            mI_f = mp.mpf(mI.numerator) / mI.denominator
            for bj, J in enumerate(blocks):
                for j in J:
                    lhs = sum(
                        (mp.mpf(m[i].numerator) / m[i].denominator) * sd.P[i][j]
                        for i in I
                    )
                    rhs = mp.mpf(k[j]) * mI_f / kt[bj] * P_tilde[gi][bj]
                    if abs(lhs - rhs) > tol:
                        return FusionResult(
                            partition=blocks,
                            fuses=True,
                            verdict="fail",
                            witness={
                                "kind": "column-sum-identity",
                                "I": I,
                                "J": J,
                                "j": j,
                                "lhs": float(mp.re(lhs)),
                                "rhs": float(mp.re(rhs)),
                            },
                            fused=fused,
                            P_tilde=P_tilde,
                            dual_partition=dual,
                        )
        # cross-check P_tilde against the fused instance's own eigenmatrix
        sd_f = eigenmatrix_P(fused, precision=sd.precision)
        unmatched = list(range(d))
        for row in P_tilde:
            hit = None
            for c in unmatched:
                if all(abs(row[b] - sd_f.P[c][b]) <= tol for b in range(d)):
                    hit = c
                    break
            if hit is None:
                return FusionResult(
                    partition=blocks,
                    fuses=True,
                    verdict="fail",
                    witness={
                        "kind": "fused-eigenmatrix-mismatch",
                        "row": tuple(float(mp.re(v)) for v in row),
                    },
                    fused=fused,
                    P_tilde=P_tilde,
                    dual_partition=dual,
                )
            unmatched.remove(hit)
    return FusionResult(
        partition=blocks,
        fuses=True,
        verdict="pass",
        fused=fused,
        P_tilde=P_tilde,
        dual_partition=dual,
    )
