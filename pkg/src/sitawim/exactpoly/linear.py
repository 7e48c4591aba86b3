"""Exact linear preprocessing of polynomial systems.

Two tools that do the cheap part of an elimination before any Groebner
machinery runs:

- :func:`rational_span_basis` — deterministic reduced row echelon form
  of the Q-span of a finite set of polynomials (each polynomial viewed
  as a coefficient vector over the union of its monomials).

- :func:`linear_reduce` — repeatedly solve generators that are linear
  in some variable *with a constant rational coefficient* and
  substitute the solution everywhere, recording the substitution
  chain.  This is the "solve the easy equations by hand" step of a
  structure-constant analysis, mechanized.  Degree symbols (say ``m``
  or ``k2``) are only ever solved from generators involving degree
  symbols alone, so accidental mixing of the two variable classes
  cannot happen; variables in ``keep`` are never eliminated.

Content in a strictly positive variable is stripped (each generator is
divided by any degree symbol dividing all its terms), so the returned
system generates the original ideal saturated at the positive symbols
— exactly the ideal whose zero set matches on the locus where degrees
are nonzero, which is the only locus that matters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..errors import InconsistentIdealError
from .core import MPoly, MonomialOrder, Q0, Q1, Ring, format_poly


def rational_span_basis(
    polys: Iterable[MPoly], order: MonomialOrder | None = None
) -> list[MPoly]:
    """Echelonized basis of the Q-vector space spanned by ``polys``.

    Columns are the union of occurring monomials sorted descending under
    ``order``; rows are fully reduced (RREF), then renormalized to integer
    content-1 form.  Output rows are sorted by pivot, so the result is a
    canonical generating set for the span; its length is the span's dimension.
    """
    polys = [p for p in polys if not p.is_zero]
    if not polys:
        return []
    ring = polys[0].ring
    order = order or ring.default_order
    monos = sorted({m for p in polys for m in p.terms}, key=order.key, reverse=True)
    col = {m: i for i, m in enumerate(monos)}
    rows = []
    for p in polys:
        row = [Q0] * len(monos)
        for m, c in p.terms.items():
            row[col[m]] = c
        rows.append(row)

    ncols = len(monos)
    pivots: list[int] = []
    rank = 0
    for j in range(ncols):
        pivot_row = None
        for i in range(rank, len(rows)):
            if rows[i][j]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        inv = Q1 / rows[rank][j]
        rows[rank] = [c * inv for c in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][j]:
                factor = rows[i][j]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        pivots.append(j)
        rank += 1

    out = []
    for i in range(rank):
        terms = {monos[j]: c for j, c in enumerate(rows[i]) if c}
        out.append(MPoly(ring, terms).normalize(order))
    return out


@dataclass
class LinearReduction:
    """Result of :func:`linear_reduce`.

    ``chain`` lists (variable, replacement) pairs in the order applied;
    replacements are written in the variables current at the time of the
    solve, exactly as one would write the elimination out by hand, so
    re-applying the chain start to finish removes every eliminated variable.
    """

    ring: Ring
    chain: list[tuple[str, MPoly]]
    polys: list[MPoly]
    eliminated: tuple[str, ...]

    def apply_chain(self, poly: MPoly) -> MPoly:
        """Substitute the chain, in order, into ``poly``."""
        for name, replacement in self.chain:
            poly = poly.subs({name: replacement})
        return poly

    def survivors(self) -> set[str]:
        used: set[str] = set()
        for p in self.polys:
            used |= p.variables()
        return used


def _strip_positive_content(poly: MPoly, positive_idx: Sequence[int]) -> MPoly:
    """Divide out any strictly positive variable dividing every term."""
    terms = poly.terms
    if not terms:
        return poly
    changed = True
    while changed:
        changed = False
        for i in positive_idx:
            shift = min(m[i] for m in terms)
            if shift:
                terms = {
                    m[:i] + (m[i] - shift,) + m[i + 1 :]: c for m, c in terms.items()
                }
                changed = True
    return MPoly(poly.ring, dict(terms)) if terms is not poly.terms else poly


def _poly_sort_key(poly: MPoly) -> tuple:
    return (poly.total_degree(), poly.num_terms(), format_poly(poly))


def linear_reduce(
    polys: Iterable[MPoly],
    *,
    degree_symbols: Sequence[str] = (),
    positive: Sequence[str] | None = None,
    keep: Iterable[str] = (),
    direction: str = "high",
    mode: str = "full",
) -> LinearReduction:
    """Iteratively eliminate variables solvable by a single linear generator.

    A generator ``f`` solves variable ``v`` when ``f`` has degree exactly 1
    in ``v`` and the coefficient of ``v`` is a nonzero rational constant;
    then ``v := -B/A`` (for ``f = A*v + B``) is substituted into everything.

    Structure-constant variables are eliminated before degree symbols; among
    eligible variables, ``direction='high'`` prefers the latest-listed ring
    variable and ``'low'`` the earliest (degree symbols always eliminate
    latest-listed first).  Ties between generators solving the same variable
    go to the generator with fewest terms, then to canonical text order.

    ``mode='alias'`` restricts the eliminations to pure renamings: only a
    two-term generator ``a*v + b*w`` (two distinct variables, no constant
    term) may fire, replacing one variable by a rational multiple of the
    other.  Multi-term linear relations survive as generators, which is the
    conservative reduction used when downstream certificates need those
    relations kept visible in the ideal.

    Raises :class:`InconsistentIdealError` when a nonzero constant appears:
    the system has no solutions at all.
    """
    if direction not in ("high", "low"):
        raise ValueError("direction must be 'high' or 'low'")
    if mode not in ("full", "alias"):
        raise ValueError("mode must be 'full' or 'alias'")
    work = [p for p in polys if not p.is_zero]
    if not work:
        return LinearReduction(Ring(()), [], [], ())
    ring = work[0].ring
    keep = set(keep)
    degree_set = set(degree_symbols)
    positive = tuple(degree_symbols) if positive is None else tuple(positive)
    positive_idx = [ring.index[name] for name in positive]

    def tidy(batch: Iterable[MPoly]) -> list[MPoly]:
        seen: set[MPoly] = set()
        out = []
        for p in batch:
            p = _strip_positive_content(p, positive_idx).normalize()
            if p.is_zero:
                continue
            if p.is_constant:
                raise InconsistentIdealError(
                    f"reduction produced the nonzero constant {p.constant_value()}"
                )
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out

    work = tidy(work)
    chain: list[tuple[str, MPoly]] = []
    eliminated: list[str] = []

    while True:
        candidates: list[tuple[tuple, str, MPoly, MPoly]] = []
        for f in work:
            if mode == "alias" and not (
                f.num_terms() == 2
                and f.total_degree() == 1
                and len(f.variables()) == 2
            ):
                continue
            for name in f.variables():
                if name in keep:
                    continue
                if f.degree(name) != 1:
                    continue
                is_degree = name in degree_set
                if is_degree and not (f.variables() <= degree_set):
                    continue
                a, b = f.split_linear(name)
                if not a.is_constant:
                    continue
                replacement = b * (-Q1 / a.constant_value())
                idx = ring.index[name]
                pos = -idx if (is_degree or direction == "high") else idx
                rank = (
                    1 if is_degree else 0,  # structure constants first
                    pos,
                    f.num_terms(),
                    format_poly(f),
                )
                candidates.append((rank, name, replacement, f))
        if not candidates:
            break
        candidates.sort(key=lambda c: c[0])
        _, name, replacement, _ = candidates[0]
        chain.append((name, replacement))
        eliminated.append(name)
        work = tidy(p.subs({name: replacement}) for p in work)

    work.sort(key=_poly_sort_key)
    return LinearReduction(ring, chain, work, tuple(eliminated))
