import os
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from itskit import _pykernels, kernels

from .strategies import automata

needs_cython = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernel not built")


@st.composite
def kernel_inputs(draw):
    ts = draw(automata(max_states=12, max_symbols=3, full=False))
    n = ts.n_states
    labels = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    wild = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    free = [w and draw(st.booleans()) for w in wild]
    return ts, labels, wild, free


@needs_cython
@given(kernel_inputs())
def test_compiled_matches_python(args):
    ts, labels, wild, free = args
    common = (ts.n_states, ts.n_symbols, ts.delta_table(), labels, wild, free, ts.predecessors)
    assert kernels.refine(*common, backend="python") == kernels.refine(*common, backend="cython")


def test_python_kernel_plain_moore():
    # 0 -> 1 -> 2 -> 2 with one label: splits by distance to the end
    succ = [1, 2, 2]
    out, rounds = _pykernels.refine(3, 1, succ, [0, 0, 1], [0] * 3, [0] * 3, [0] * 4, [], [])
    assert out == [0, 1, 2] and rounds == 1


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.refine(1, 1, [0], [0], backend="fortran")


def test_env_var_forces_python():
    env = dict(os.environ, ITSKIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import itskit.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
