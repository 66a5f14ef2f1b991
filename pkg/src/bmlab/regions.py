"""Classify parameter tuples: difference characterization holds, fails, or is unknown.

The classifier is an ordered decision table. Each row carries a tag that
states its defining condition in words, so a verdict can be audited against
the conditions directly. Rows that prove failure are tried first (in table
order, the first match is the verdict); the sufficient condition comes next;
the remaining rows describe the parameter sets where the answer is unknown.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

EQUIVALENT = "Equivalent"
NOT_EQUIVALENT = "NotEquivalent"
OPEN = "Open"

#: Branches of the sufficient condition: which term of the max is active.
EQUIVALENT_TAGS = ("s>sigma_p", "s>d(1/p-1/v)")

#: Failure rows in table order.
NOT_EQUIVALENT_TAGS = (
    "s<0",
    "s=0,a=inf",
    "s=0,p>=2,q>2",
    "s=0,1<=p<2,q>p",
    "p<1,s<d(p/u)(1/p-1)",
    "p<1,s=d(p/u)(1/p-1),q>1",
    "p<v<inf,s<d(p/u)(1/p-1/v)",
    "N<s",
    "N=s,q<inf",
    "N=s,q=inf,u=p,v>=1",
)

#: Rows of unknown status in table order.
OPEN_TAGS = (
    "s=0,a<inf,q<=min(p,2)",
    "p<1,v<=1,d(p/u)(1/p-1)<=s<=d(1/p-1)",
    "v>max(1,p),d(p/u)(1/p-1/v)<=s<=d(1/p-1/v)",
    "N=s,q=inf,not(u=p,v>=1)",
)

_EPS = 1e-12


def _eq(x, y):
    return math.isclose(x, y, rel_tol=1e-12, abs_tol=_EPS)


def _lt(x, y):
    return x < y and not _eq(x, y)


def _le(x, y):
    return x < y or _eq(x, y)


@dataclass(frozen=True)
class SpaceParams:
    """Parameter tuple ``(d, s, u, p, q, v, a, N)``.

    Use ``math.inf`` for ``q``, ``v`` or ``a`` equal to infinity.
    """

    d: int
    s: float
    u: float
    p: float
    q: float
    v: float
    a: float = math.inf
    N: int = 1

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid parameters: " + "; ".join(problems))

    def problems(self) -> list:
        out = []
        if self.d < 1 or int(self.d) != self.d:
            out.append("d must be a positive integer")
        if not 0 < self.p <= self.u < math.inf:
            out.append("need 0 < p <= u < inf")
        if not self.q > 0:
            out.append("need q > 0")
        if not self.v > 0:
            out.append("need v > 0")
        if not self.a >= 1:
            out.append("need 1 <= a <= inf")
        if int(self.N) != self.N or self.N < 1:
            out.append("N must be a positive integer")
        if not math.isfinite(self.s):
            out.append("s must be finite")
        return out

    @property
    def inv_v(self) -> float:
        return 0.0 if math.isinf(self.v) else 1.0 / self.v

    @property
    def sigma_p(self) -> float:
        return self.d * max(0.0, 1.0 / self.p - 1.0)

    @property
    def sigma_pq(self) -> float:
        inv_q = 0.0 if math.isinf(self.q) else 1.0 / self.q
        return self.d * max(0.0, 1.0 / self.p - 1.0, inv_q - 1.0)

    @property
    def sigma_pv(self) -> float:
        """``d max(0, 1/p - 1, 1/p - 1/v)``, the smoothness threshold of the sufficient condition."""
        return self.d * max(0.0, 1.0 / self.p - 1.0, 1.0 / self.p - self.inv_v)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("d", "s", "u", "p", "q", "v", "a", "N")}


@dataclass(frozen=True)
class RegionVerdict:
    """Classifier output: the verdict, its deciding tag and every matching tag."""

    verdict: str
    tag: str
    all_tags: tuple = field(default_factory=tuple)

    def __str__(self):
        return f"{self.verdict}({self.tag})"


def _not_equivalent_rows(P: SpaceParams):
    d, s, u, p, q, v, a, N = P.d, P.s, P.u, P.p, P.q, P.v, P.a, P.N
    low1 = d * (p / u) * (1.0 / p - 1.0)
    lowv = d * (p / u) * (1.0 / p - P.inv_v)
    return (
        ("s<0", _lt(s, 0.0)),
        ("s=0,a=inf", _eq(s, 0.0) and math.isinf(a)),
        ("s=0,p>=2,q>2", _eq(s, 0.0) and p >= 2 and q > 2),
        ("s=0,1<=p<2,q>p", _eq(s, 0.0) and 1 <= p < 2 and q > p),
        ("p<1,s<d(p/u)(1/p-1)", p < 1 and _lt(s, low1)),
        ("p<1,s=d(p/u)(1/p-1),q>1", p < 1 and _eq(s, low1) and q > 1),
        ("p<v<inf,s<d(p/u)(1/p-1/v)", p < v < math.inf and _lt(s, lowv)),
        ("N<s", _lt(N, s)),
        ("N=s,q<inf", _eq(N, s) and not math.isinf(q)),
        ("N=s,q=inf,u=p,v>=1", _eq(N, s) and math.isinf(q) and _eq(u, p) and v >= 1),
    )


def _open_rows(P: SpaceParams):
    d, s, u, p, q, v, a, N = P.d, P.s, P.u, P.p, P.q, P.v, P.a, P.N
    low1 = d * (p / u) * (1.0 / p - 1.0)
    top1 = d * (1.0 / p - 1.0)
    lowv = d * (p / u) * (1.0 / p - P.inv_v)
    topv = d * (1.0 / p - P.inv_v)
    return (
        ("s=0,a<inf,q<=min(p,2)",
         _eq(s, 0.0) and not math.isinf(a) and ((p >= 2 and q <= 2) or (1 <= p < 2 and q <= p))),
        ("p<1,v<=1,d(p/u)(1/p-1)<=s<=d(1/p-1)",
         p < 1 and v <= 1 and _le(low1, s) and _le(s, top1) and _lt(0.0, s)),
        ("v>max(1,p),d(p/u)(1/p-1/v)<=s<=d(1/p-1/v)",
         v > max(1.0, p) and _lt(0.0, s) and _le(s, topv)
         and (math.isinf(v) or _le(lowv, s))),
        ("N=s,q=inf,not(u=p,v>=1)",
         _eq(N, s) and math.isinf(q) and not (_eq(u, p) and v >= 1)),
    )


def classify_parameters(params: SpaceParams) -> RegionVerdict:
    """Deterministic verdict for an admissible parameter tuple.

    * ``Equivalent`` iff ``s > d max(0, 1/p - 1, 1/p - 1/v)`` and ``N > s``.
    * ``NotEquivalent`` when any failure row matches; the first match in
      table order is the deciding tag.
    * ``Open`` otherwise, tagged by the first matching row of unknown status.

    ``all_tags`` lists every matching failure and unknown-status row.
    """
    neq = [tag for tag, hit in _not_equivalent_rows(params) if hit]
    opn = [tag for tag, hit in _open_rows(params) if hit]
    sufficient = _lt(params.sigma_pv, params.s) and _lt(params.s, params.N)
    if sufficient:
        if neq:
            raise AssertionError(f"table overlap for {params}: sufficient and {neq}")
        inv_p = 1.0 / params.p
        branch = "s>sigma_p" if max(0.0, inv_p - 1.0) >= inv_p - params.inv_v else "s>d(1/p-1/v)"
        return RegionVerdict(EQUIVALENT, branch, (branch,))
    if neq:
        return RegionVerdict(NOT_EQUIVALENT, neq[0], tuple(neq + opn))
    if opn:
        return RegionVerdict(OPEN, opn[0], tuple(opn))
    raise AssertionError(f"decision table is not total at {params}")
