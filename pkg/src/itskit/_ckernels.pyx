# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled refinement kernel; mirrors ``itskit._pykernels.refine``."""
from cpython.mem cimport PyMem_Malloc, PyMem_Free


cdef int* _alloc(Py_ssize_t count) except NULL:
    cdef int* p = <int*> PyMem_Malloc((count if count > 0 else 1) * sizeof(int))
    if p == NULL:
        raise MemoryError()
    return p


cdef void _place(int n, int k, const int* succ, int* blocks, const char* active,
                 const int* wild, const int* free, const int* labels,
                 const int* blabel, int nb, int maxlab,
                 const int* pred_ptr, const int* pred_src, const int* pred_sym,
                 int* ref, int* first_of_label) noexcept nogil:
    cdef int s, a, t, w, i, bp, r, placed, base
    for i in range(nb * k):
        ref[i] = -1
    for i in range(maxlab + 1):
        first_of_label[i] = -1
    for s in range(n):
        if not active[s]:
            blocks[s] = -1
            continue
        if first_of_label[labels[s]] < 0:
            first_of_label[labels[s]] = blocks[s]
        base = blocks[s] * k
        for a in range(k):
            if ref[base + a] < 0:
                t = succ[s * k + a]
                if t >= 0 and active[t]:
                    ref[base + a] = blocks[t]
    for w in range(n):
        if not wild[w]:
            continue
        placed = -1
        for i in range(pred_ptr[w], pred_ptr[w + 1]):
            bp = blocks[pred_src[i]]
            if bp < 0 or bp >= nb:
                continue
            r = ref[bp * k + pred_sym[i]]
            if r >= 0 and (free[w] or blabel[r] == labels[w]):
                placed = r
                break
        if placed < 0:
            if free[w]:
                placed = nb
            elif first_of_label[labels[w]] >= 0:
                placed = first_of_label[labels[w]]
            else:
                placed = nb + 1 + labels[w]
        blocks[w] = placed


def refine(int n, int k, succ_in, labels_in, wild_in, free_in,
           pred_ptr_in, pred_src_in, pred_sym_in):
    """Moore-style refinement; see ``itskit._pykernels.refine`` for the contract."""
    cdef const int[:] succ_v = succ_in
    cdef const int[:] labels_v = labels_in
    cdef const int[:] wild_v = wild_in
    cdef const int[:] free_v = free_in
    cdef const int[:] pp_v = pred_ptr_in
    cdef const int[:] ps_v = pred_src_in
    cdef const int[:] pa_v = pred_sym_in
    cdef const int* succ = &succ_v[0] if succ_v.shape[0] else NULL
    cdef const int* labels = &labels_v[0] if n else NULL
    cdef const int* wild = &wild_v[0] if n else NULL
    cdef const int* free = &free_v[0] if n else NULL
    cdef const int* pred_ptr = &pp_v[0]
    cdef const int* pred_src = &ps_v[0] if ps_v.shape[0] else NULL
    cdef const int* pred_sym = &pa_v[0] if pa_v.shape[0] else NULL

    cdef int s, a, t, i, g, y, nb, ncur, nnew, maxlab = 0, has_wild = 0, rounds = 0
    cdef int ymax, stamp
    for s in range(n):
        if labels[s] > maxlab:
            maxlab = labels[s]
        if wild[s]:
            has_wild = 1
    ymax = n + maxlab + 4

    cdef char* active = <char*> PyMem_Malloc(n if n else 1)
    cdef int* blocks = _alloc(n)
    cdef int* cur = _alloc(n)
    cdef int* nxt = _alloc(n)
    cdef int* order = _alloc(n)
    cdef int* start = _alloc(n + 2)
    cdef int* blabel = _alloc(n + 1)
    cdef int* ref = _alloc(n * k + 1)
    cdef int* first_of_label = _alloc(maxlab + 1)
    cdef int* lab2block = _alloc(maxlab + 1)
    cdef int* seen = _alloc(ymax + 1)
    cdef int* seen_id = _alloc(ymax + 1)
    if active == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(maxlab + 1):
                lab2block[i] = -1
            nb = 0
            for s in range(n):
                active[s] = 0 if wild[s] else 1
                blocks[s] = -1
                if active[s]:
                    if lab2block[labels[s]] < 0:
                        lab2block[labels[s]] = nb
                        blabel[nb] = labels[s]
                        nb += 1
                    blocks[s] = lab2block[labels[s]]
            while True:
                if has_wild:
                    _place(n, k, succ, blocks, active, wild, free, labels, blabel,
                           nb, maxlab, pred_ptr, pred_src, pred_sym, ref, first_of_label)
                for s in range(n):
                    cur[s] = blocks[s]
                ncur = nb
                for a in range(k):
                    # counting sort of active states by current id, stable in s
                    for g in range(ncur + 1):
                        start[g] = 0
                    for s in range(n):
                        if active[s]:
                            start[cur[s] + 1] += 1
                    for g in range(ncur):
                        start[g + 1] += start[g]
                    for s in range(n):
                        if active[s]:
                            order[start[cur[s]]] = s
                            start[cur[s]] += 1
                    for y in range(ymax + 1):
                        seen[y] = -1
                    nnew = 0
                    stamp = -1
                    for i in range(start[ncur - 1] if ncur > 0 else 0):
                        s = order[i]
                        if cur[s] != stamp:
                            stamp = cur[s]
                        t = succ[s * k + a]
                        y = blocks[t] + 1 if t >= 0 else 0
                        if seen[y] != stamp:
                            seen[y] = stamp
                            seen_id[y] = nnew
                            nnew += 1
                        nxt[s] = seen_id[y]
                    for s in range(n):
                        if active[s]:
                            cur[s] = nxt[s]
                    ncur = nnew
                if ncur == nb:
                    break
                rounds += 1
                nb = ncur
                for s in range(n):
                    if active[s]:
                        blocks[s] = cur[s]
                        blabel[cur[s]] = labels[s]
        ids = {}
        out = [ids.setdefault(blocks[s], len(ids)) for s in range(n)]
        return out, rounds
    finally:
        PyMem_Free(active)
        PyMem_Free(blocks)
        PyMem_Free(cur)
        PyMem_Free(nxt)
        PyMem_Free(order)
        PyMem_Free(start)
        PyMem_Free(blabel)
        PyMem_Free(ref)
        PyMem_Free(first_of_label)
        PyMem_Free(lab2block)
        PyMem_Free(seen)
        PyMem_Free(seen_id)
