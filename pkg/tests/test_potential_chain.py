import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau_eig import periodic_fn as pf
from landau_eig import potential_chain as pc
from landau_eig.cmatrix import make_bundle
from landau_eig.family_solver import iterate_family
from landau_eig.periodic_fn import PeriodicFn

OM = np.sqrt(2.0)


def test_constant_chain():
    ch = pc.build_chain([PeriodicFn.zero(OM)], 1.0, 1)
    assert ch.W[0].allclose(PeriodicFn.constant(OM, -2.0), atol=0)
    assert ch.V.allclose(PeriodicFn.zero(OM), atol=0)
    rep = pc.verify_conditions(ch)
    assert rep["res_c"] == 0 and rep["constant_potential"]


def test_m1_potential_formula(chain_m1):
    u = chain_m1.u[0]
    t = np.linspace(0, chain_m1.V.T, 50)
    assert np.allclose(chain_m1.V(t), 2 * chain_m1.B * (1 - np.exp(u(t))), atol=1e-12)


def test_link_definition(chain_m2):
    t = np.linspace(0, chain_m2.V.T, 50)
    for j in range(1, 3):
        ref = -2 * chain_m2.B * (2 - j + 1) * np.exp(chain_m2.u[j - 1](t))
        assert np.allclose(chain_m2.W[j - 1](t), ref, atol=1e-12)


def test_wrong_length():
    with pytest.raises(ValueError):
        pc.build_chain([PeriodicFn.zero(OM)], 1.0, 2)


@pytest.mark.parametrize("m,eps", [(1, 0.1), (2, 0.05), (3, 0.05)])
def test_conditions_for_family(m, eps):
    sol = iterate_family(eps, make_bundle(m))
    ch = pc.from_family(sol)
    rep = pc.verify_conditions(ch)
    assert rep["passed"]
    assert all(r <= 1e-8 for r in rep["res_b"]) and rep["res_c"] <= 1e-8
    assert all(e <= 1e-9 for e in rep["link_mean_errors"])
    assert abs(rep["V_mean"]) <= 1e-10
    assert rep["negative_everywhere"]
    # margin at least B (m - j)
    assert all(s >= 1.0 for s in rep["scaled_margins"])
    full, diff, coupled = pc.cross_check_systems(ch.u, ch.B, m)
    assert max(full, diff, coupled) <= 1e-8


def test_systems_vanish_for_zero():
    u = [PeriodicFn.zero(OM)] * 3
    assert pc.cross_check_systems(u, 1.0, 3) == (0.0, 0.0, 0.0)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.lists(st.floats(-0.2, 0.2), min_size=1, max_size=4), min_size=3, max_size=3),
       st.floats(0.5, 2.0))
def test_row_reduction_identities(cs, B):
    u = [PeriodicFn(OM, c) for c in cs]
    rows = pc.system_residuals(u, B, 3)
    zero = PeriodicFn.zero(OM)
    for j in range(3):
        prev4 = rows["full"][j - 1] if j else zero
        prev6 = rows["diff"][j - 1] if j else zero
        assert (rows["full"][j] - prev4).allclose(rows["diff"][j], atol=1e-12)
        assert (rows["diff"][j] - prev6).allclose(rows["coupled"][j], atol=1e-12)


def test_inverse_link(chain_m2):
    prod = chain_m2.W[1] * chain_m2.inverse_link(1)
    assert prod.allclose(PeriodicFn.constant(chain_m2.omega, 1.0), atol=1e-13)


def test_json_roundtrip(chain_m2):
    pc.verify_conditions(chain_m2)
    d = json.loads(json.dumps(chain_m2.to_dict()))
    back = pc.PotentialChain.from_dict(d)
    assert back.V.allclose(chain_m2.V, atol=0) and back.m == 2
    assert back.report["passed"]
