"""Compiled core vs numpy fallback: identical trajectories, same results."""

import numpy as np
import pytest

from conftest import random_dataset
from pacbound import HAVE_EXTENSION, KernelSpec, SvmFormulation, C_STYLE, train
from pacbound._backend import get_backend

needs_ext = pytest.mark.skipif(not HAVE_EXTENSION, reason="extension not built")


@needs_ext
@pytest.mark.parametrize("seed,n,c", [(0, 20, 0.5), (1, 45, 2.0), (2, 80, 0.05),
                                      (3, 60, 10.0), (4, 33, 1.0)])
def test_backends_bit_identical(seed, n, c):
    ds = random_dataset(seed, n)
    spec = KernelSpec(1.1)
    f = SvmFormulation(C_STYLE, c)
    m_py = train(ds, spec, f, backend="py", kkt_tol=1e-6)
    m_cy = train(ds, spec, f, backend="cy", kkt_tol=1e-6)
    assert np.array_equal(m_py.alphas, m_cy.alphas)
    assert m_py.dual_objective == m_cy.dual_objective
    assert m_py.kkt_residual == m_cy.kkt_residual


@needs_ext
def test_backend_env_override(monkeypatch):
    import pacbound._smo_cy as cy
    import pacbound._smo_py as py
    monkeypatch.setenv("PACBOUND_BACKEND", "py")
    assert get_backend() is py
    monkeypatch.setenv("PACBOUND_BACKEND", "cy")
    assert get_backend() is cy
    monkeypatch.delenv("PACBOUND_BACKEND")
    assert get_backend() in (py, cy)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        get_backend("fortran")
