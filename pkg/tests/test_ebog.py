import numpy as np
import pytest

from bogospec import desk
from bogospec.ebog import (
    QuadratureSpec,
    ebog_kappa,
    ebog_mollified,
    ebog_reference,
    ground_energy,
)
from bogospec.errors import NumericalError, ValidationError

TERMS = ("T1", "T2", "T3", "T4", "T5", "T6", "Tcomm", "Tcubic")


@pytest.fixture(scope="module")
def desk_ebog():
    return ebog_kappa(desk.bundle(), desk.KAPPA)


def test_free_case_is_exactly_zero():
    bu = desk.bundle(a0=0.0)
    r = ebog_kappa(bu, 5.0)
    assert r.total == 0.0 and all(v == 0.0 for v in r.terms.values())
    assert ebog_mollified(bu).extrapolated == 0.0
    assert ebog_reference(bu) == 0.0


def test_terms_reported(desk_ebog):
    assert tuple(desk_ebog.terms) == TERMS
    assert all(np.isfinite(v) for v in desk_ebog.terms.values())
    assert desk_ebog.terms["T1"] >= 0
    assert desk_ebog.terms["T2"] <= 0


def test_kappa_independence(desk_ebog):
    r2 = ebog_kappa(desk.bundle(), 2 * desk.KAPPA)
    assert abs(r2.total / desk_ebog.total - 1) <= 1e-4


def test_quadrature_self_convergence(desk_ebog):
    r = ebog_kappa(desk.bundle(), desk.KAPPA, QuadratureSpec(64))
    for k in ("Tcomm", "Tcubic"):
        assert abs(r.terms[k] / desk_ebog.terms[k] - 1) <= 1e-6
    assert desk_ebog.closed_form["Tcomm"] == pytest.approx(desk_ebog.terms["Tcomm"], rel=1e-8)


def test_desk_value_frozen(desk_ebog):
    # agreed by the kappa route at kappa = 5, 7.5, 10 and the delta -> 0 limit
    assert desk_ebog.total == pytest.approx(0.0664018, rel=1e-5)


def test_mollified_route(desk_ebog):
    m = ebog_mollified(desk.bundle())
    assert abs(m.extrapolated / desk_ebog.total - 1) <= 1e-3
    assert m.order >= 1
    assert m.monotone


def test_mollified_rejects_unresolved_widths():
    h = desk.bundle().basis.h
    with pytest.raises(ValidationError):
        ebog_mollified(desk.bundle(), [h, 0.5 * h, 0.25 * h])


def test_kappa_too_small_rejected():
    with pytest.raises(NumericalError, match="larger kappa"):
        ebog_kappa(desk.bundle(), 0.1)
    with pytest.raises(ValidationError):
        ebog_kappa(desk.bundle(), -1.0)


def test_ground_energy():
    free = ground_energy(100, desk.state(a0=0.0), 0.0)
    assert free.total == pytest.approx(300.0, abs=1e-9)
    assert free.subleading == 0.0 and free.ebog == 0.0
    st = desk.state()
    g1, g2 = ground_energy(100, st, 0.07), ground_energy(200, st, 0.07)
    assert (g2.total - g1.total) / 100 == pytest.approx(st.E_GP, abs=1e-12)
    assert g1.leading == pytest.approx(100 * st.E_GP)
    assert g1.subleading == pytest.approx(-4 * np.pi * st.a0 * st.norm4)
