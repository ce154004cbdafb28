"""Backend selection for the refinement kernel.

The compiled extension is used when it imports; set ``ITSKIT_PURE_PYTHON=1``
to force the pure-Python implementation.
"""
import os
from array import array

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("ITSKIT_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass


def _ints(values):
    return array("i", values)


def refine(n, k, succ, labels, wild=None, free=None, preds=None, backend=None):
    """Run the refinement kernel on plain int sequences.

    ``preds`` is a per-state sequence of ``(source, symbol)`` pairs and is
    only consulted for ``wild`` states.  Returns ``(block_of, rounds)``.
    """
    wild = [0] * n if wild is None else [1 if w else 0 for w in wild]
    free = [0] * n if free is None else [1 if f else 0 for f in free]
    ptr, src, sym = [0], [], []
    for s in range(n):
        if wild[s] and preds is not None:
            for p, a in preds[s]:
                src.append(p)
                sym.append(a)
        ptr.append(len(src))
    impl = {"python": _pykernels, None: _impl}.get(backend)
    if impl is None:
        if backend != "cython":
            raise ValueError(f"unknown backend {backend!r}")
        from . import _ckernels as impl
    return impl.refine(n, k, _ints(succ), _ints(labels), _ints(wild), _ints(free),
                       _ints(ptr), _ints(src), _ints(sym))
