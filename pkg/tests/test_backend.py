import os
import subprocess
import sys

import numpy as np
import pytest

import rffsgm
from rffsgm import _backend
from rffsgm.errors import TrainingDivergence
from rffsgm.rff import sample_map
from rffsgm.sgm import SgmConfig, train_features

needs_compiled = pytest.mark.skipif(_backend.compiled_sgm_pass is None, reason="extension not built")


def _problem(seed=0, n=80, D=25):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 4))
    y = np.where(X[:, 0] + 0.3 * rng.standard_normal(n) > 0, 1.0, -1.0)
    return sample_map(4, D, 0.3, seed).transform(X), y


def test_backend_reported():
    assert rffsgm.BACKEND in ("compiled", "python")
    assert _backend.get_sgm_pass("python") is _backend.python_sgm_pass
    with pytest.raises(ValueError):
        _backend.get_sgm_pass("fortran")


@needs_compiled
@pytest.mark.parametrize("lam, eta, epochs", [(0.0, 0.05, 3), (0.01, 0.2, 5), (0.0, 0.0, 1)])
def test_backends_agree(lam, eta, epochs):
    Z, y = _problem(seed=int(eta * 100) + epochs)
    cfg = SgmConfig(eta=eta, epochs=epochs, lam=lam, seed=3)
    a = train_features(Z, y, cfg, backend="compiled", trace=True)
    b = train_features(Z, y, cfg, backend="python", trace=True)
    assert a.t == b.t
    assert np.max(np.abs(a.w - b.w)) <= 1e-10
    assert np.max(np.abs(a.w_bar - b.w_bar)) <= 1e-10
    assert np.max(np.abs(a.trace - b.trace)) <= 1e-10


@pytest.mark.parametrize("backend", ["python", pytest.param("compiled", marks=needs_compiled)])
def test_divergence_step_reported(backend):
    Z, y = _problem(seed=5, n=20, D=5)
    with pytest.raises(TrainingDivergence) as info:
        train_features(Z, y, SgmConfig(eta=1e6, epochs=100, lam=1.0), backend=backend)
    assert 1 <= info.value.step <= 2000


@needs_compiled
def test_divergence_step_matches():
    Z, y = _problem(seed=6, n=20, D=5)
    steps = []
    for backend in ("compiled", "python"):
        with pytest.raises(TrainingDivergence) as info:
            train_features(Z, y, SgmConfig(eta=1e6, epochs=100, lam=1.0), backend=backend)
        steps.append(info.value.step)
    assert steps[0] == steps[1]


def test_pure_python_fallback_selected():
    env = dict(os.environ, RFFSGM_PURE_PYTHON="1")
    code = (
        "import rffsgm, numpy as np\n"
        "from rffsgm.sgm import SgmConfig, train_features\n"
        "Z = np.eye(4); y = np.array([1., -1., 1., -1.])\n"
        "m = train_features(Z, y, SgmConfig(eta=0.1, epochs=2))\n"
        "print(rffsgm.BACKEND, m.t)\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split() == ["python", "8"]
