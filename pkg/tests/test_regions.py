import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmlab.regions import (
    EQUIVALENT,
    NOT_EQUIVALENT,
    OPEN,
    SpaceParams,
    classify_parameters,
)

INF = math.inf
EQ, NE, OP = EQUIVALENT, NOT_EQUIVALENT, OPEN

# (d, s, u, p, q, v, a, N) -> verdict, deciding tag; worked out by hand from the
# defining inequalities of each row
TABLE = [
    ((1, -0.5, 2, 2, 2, 2, INF, 1), NE, "s<0"),
    ((1, 0.0, 2, 2, 2, 2, INF, 1), NE, "s=0,a=inf"),
    ((1, 0.0, 3, 2, 3, 2, 1, 1), NE, "s=0,p>=2,q>2"),
    ((1, 0.0, 2, 1.5, 2, 2, 1, 1), NE, "s=0,1<=p<2,q>p"),
    ((1, 0.1, 1, 0.5, 2, 1, INF, 1), NE, "p<1,s<d(p/u)(1/p-1)"),
    ((1, 0.5, 1, 0.5, 2, 1, INF, 1), NE, "p<1,s=d(p/u)(1/p-1),q>1"),
    ((1, 0.2, 2, 1, 2, 4, INF, 1), NE, "p<v<inf,s<d(p/u)(1/p-1/v)"),
    ((1, 2.5, 2, 2, 2, 2, INF, 2), NE, "N<s"),
    ((1, 2.0, 2, 2, 2, 2, INF, 2), NE, "N=s,q<inf"),
    ((1, 1.0, 2, 2, INF, 2, INF, 1), NE, "N=s,q=inf,u=p,v>=1"),
    ((1, 0.3, 0.5, 0.5, 1, 1, INF, 1), NE, "p<1,s<d(p/u)(1/p-1)"),
    ((1, 1.0, 0.5, 0.5, 2, 1, INF, 2), NE, "p<1,s=d(p/u)(1/p-1),q>1"),
    ((2, 0.4, 2, 1, 2, 2, INF, 1), NE, "p<v<inf,s<d(p/u)(1/p-1/v)"),
    ((1, 1.5, 2, 1.5, 2, 2, INF, 2), EQ, "s>d(1/p-1/v)"),
    ((1, 1.5, 1, 0.5, 2, 1, INF, 2), EQ, "s>sigma_p"),
    ((1, 0.5, 2, 2, 2, 1, INF, 1), EQ, "s>sigma_p"),
    ((1, 1.2, 2, 1, 2, INF, INF, 2), EQ, "s>d(1/p-1/v)"),
    ((2, 1.5, 2, 1, 2, 2, 1, 2), EQ, "s>d(1/p-1/v)"),
    ((3, 0.0, 2, 2, 2, 2, INF, 1), NE, "s=0,a=inf"),
    ((1, 0.8, 4, 2, INF, 1, INF, 1), EQ, "s>sigma_p"),
    ((2, 0.8, 2, 0.5, 2, 0.5, INF, 2), OP, "p<1,v<=1,d(p/u)(1/p-1)<=s<=d(1/p-1)"),
    ((1, 0.0, 2, 2, 2, 2, 1, 1), OP, "s=0,a<inf,q<=min(p,2)"),
    ((1, 0.0, 2, 1.5, 1, 1, 4, 1), OP, "s=0,a<inf,q<=min(p,2)"),
    ((1, 0.7, 1, 0.5, 2, 1, INF, 2), OP, "p<1,v<=1,d(p/u)(1/p-1)<=s<=d(1/p-1)"),
    ((1, 1.0, 0.5, 0.5, 1, 1, INF, 2), OP, "p<1,v<=1,d(p/u)(1/p-1)<=s<=d(1/p-1)"),
    ((1, 0.5, 2, 1, 2, 4, INF, 1), OP, "v>max(1,p),d(p/u)(1/p-1/v)<=s<=d(1/p-1/v)"),
    ((1, 0.5, 2, 1, 2, INF, INF, 1), OP, "v>max(1,p),d(p/u)(1/p-1/v)<=s<=d(1/p-1/v)"),
    ((2, 0.5, 2, 1, 2, 2, INF, 1), OP, "v>max(1,p),d(p/u)(1/p-1/v)<=s<=d(1/p-1/v)"),
    ((1, 1.0, 3, 2, INF, 2, INF, 1), OP, "N=s,q=inf,not(u=p,v>=1)"),
    ((1, 1.0, 2, 2, INF, 0.5, INF, 1), OP, "N=s,q=inf,not(u=p,v>=1)"),
]


@pytest.mark.parametrize("args,verdict,tag", TABLE, ids=[f"row{i}" for i in range(len(TABLE))])
def test_decision_table(args, verdict, tag):
    out = classify_parameters(SpaceParams(*args))
    assert (out.verdict, out.tag) == (verdict, tag)
    assert out.all_tags[0] == tag


def test_precedence_keeps_all_matching_tags():
    out = classify_parameters(SpaceParams(1, -1.0, 1, 0.5, 2, 2))
    assert out.all_tags == ("s<0", "p<1,s<d(p/u)(1/p-1)", "p<v<inf,s<d(p/u)(1/p-1/v)")
    out = classify_parameters(SpaceParams(1, 0.0, 2, 2, 4, 2))
    assert out.all_tags == ("s=0,a=inf", "s=0,p>=2,q>2")
    out = classify_parameters(SpaceParams(1, 0.5, 1, 0.5, 2, 1))
    assert out.all_tags == ("p<1,s=d(p/u)(1/p-1),q>1", "p<1,v<=1,d(p/u)(1/p-1)<=s<=d(1/p-1)")


@pytest.mark.parametrize("bad", [
    dict(d=0, s=1, u=2, p=2, q=2, v=2), dict(d=1, s=1, u=1, p=2, q=2, v=2),
    dict(d=1, s=1, u=2, p=2, q=0, v=2), dict(d=1, s=1, u=2, p=2, q=2, v=-1),
    dict(d=1, s=1, u=2, p=2, q=2, v=2, a=0.5), dict(d=1, s=1, u=2, p=2, q=2, v=2, N=0),
    dict(d=1, s=INF, u=2, p=2, q=2, v=2), dict(d=1, s=1, u=INF, p=2, q=2, v=2),
])
def test_inadmissible_tuples_rejected(bad):
    with pytest.raises(ValueError):
        SpaceParams(**bad)


_grid_vals = st.sampled_from([0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0])


@st.composite
def space_params(draw):
    d = draw(st.integers(1, 3))
    p = draw(_grid_vals)
    u = p * draw(st.sampled_from([1.0, 1.5, 2.0, 4.0]))
    q = draw(st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0, INF]))
    v = draw(st.sampled_from([0.5, 1.0, 2.0, 4.0, INF]))
    a = draw(st.sampled_from([1.0, 2.0, INF]))
    N = draw(st.integers(1, 3))
    # mix exact threshold values with generic ones so equality rows are exercised
    inv_v = 0.0 if math.isinf(v) else 1 / v
    specials = [0.0, float(N), d * max(0, 1 / p - 1), d * (p / u) * (1 / p - 1),
                d * (p / u) * (1 / p - inv_v), d * (1 / p - inv_v)]
    s = draw(st.one_of(st.sampled_from(specials), st.floats(-1.0, 4.0)))
    return SpaceParams(d, s, u, p, q, v, a, N)


@given(space_params())
def test_classifier_is_total_and_consistent(P):
    out = classify_parameters(P)
    assert out.verdict in (EQ, NE, OP)
    assert out.tag in out.all_tags
    close = lambda x, y: math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-12)
    sufficient = P.sigma_pv < P.s < P.N and not close(P.s, P.sigma_pv) and not close(P.s, P.N)
    assert (out.verdict == EQ) == sufficient


@given(space_params(), st.floats(0.0, 0.5))
def test_necessary_side(P, bump):
    # s above N or below zero is never Equivalent
    Q = SpaceParams(P.d, P.N + 0.1 + bump, P.u, P.p, P.q, P.v, P.a, P.N)
    assert classify_parameters(Q).verdict == NE
    Q = SpaceParams(P.d, -0.1 - bump, P.u, P.p, P.q, P.v, P.a, P.N)
    assert classify_parameters(Q).tag == "s<0"


def test_boundary_slice_changes_only_at_thresholds():
    # slice with u fixed, p < 1 and v = 1
    d, u, p, q, v, N = 1, 2.0, 0.5, 2.0, 1.0, 3
    sigma_p = d * (1 / p - 1)
    lower = max(0.0, (d / u) * (1 - p))
    thresholds = sorted({sigma_p, lower, 0.0})
    s_values = np.linspace(-0.5, 2.5, 601)
    verdicts = [classify_parameters(SpaceParams(d, float(s), u, p, q, v, INF, N)).verdict
                for s in s_values]
    for i in range(len(s_values) - 1):
        if verdicts[i] != verdicts[i + 1]:
            lo, hi = s_values[i], s_values[i + 1]
            assert any(lo <= t <= hi for t in thresholds), (lo, hi)
    at = lambda s: classify_parameters(SpaceParams(d, s, u, p, q, v, INF, N)).verdict
    assert at(-0.1) == NE and at(0.1) == NE
    assert at(0.5) == OP and at(1.5) == EQ
