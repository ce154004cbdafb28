"""Pure-Python refinement kernel.

Same contract as the compiled ``_ckernels.refine``; selected automatically
when the extension is unavailable or ``ITSKIT_PURE_PYTHON`` is set.
"""


def _place(n, k, succ, blocks, active, wild, free, labels, blabel, nb,
           pred_ptr, pred_src, pred_sym):
    # reference successor block per (block, symbol), taken from the smallest
    # active member whose successor is active
    ref = [-1] * (nb * k)
    first_of_label = {}
    for s in range(n):
        if not active[s]:
            # wild states are re-placed in id order, so a wild predecessor
            # only counts once it has been placed this pass
            blocks[s] = -1
            continue
        first_of_label.setdefault(labels[s], blocks[s])
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
            else:
                placed = first_of_label.get(labels[w], nb + 1 + labels[w])
        blocks[w] = placed


def _canonical(blocks):
    ids = {}
    return [ids.setdefault(b, len(ids)) for b in blocks]


def refine(n, k, succ, labels, wild, free, pred_ptr, pred_src, pred_sym):
    """Moore-style refinement of ``labels`` to a stable partition.

    ``succ`` is the flat ``n*k`` successor table (-1 = absent).  States with
    ``wild`` set never trigger splits; each round they are placed into the
    block their predecessor's block-mates send the same symbol to.  ``free``
    states (a subset of ``wild``) additionally ignore their own label.
    Returns ``(block_of, rounds)`` where ``rounds`` counts splitting rounds.
    """
    active = [not w for w in wild]
    ids = {}
    blocks = [-1] * n
    for s in range(n):
        if active[s]:
            blocks[s] = ids.setdefault(labels[s], len(ids))
    nb = len(ids)
    blabel = [0] * nb
    for lab, b in ids.items():
        blabel[b] = lab
    has_wild = any(wild)
    rounds = 0
    while True:
        if has_wild:
            _place(n, k, succ, blocks, active, wild, free, labels, blabel, nb,
                   pred_ptr, pred_src, pred_sym)
        sigs = {}
        new = blocks[:]
        for s in range(n):
            if not active[s]:
                continue
            row = s * k
            key = (blocks[s],) + tuple(
                blocks[succ[row + a]] if succ[row + a] >= 0 else -1 for a in range(k)
            )
            new[s] = sigs.setdefault(key, len(sigs))
        if len(sigs) == nb:
            break
        rounds += 1
        nb = len(sigs)
        blabel = [0] * nb
        for s in range(n):
            if active[s]:
                blabel[new[s]] = labels[s]
        blocks = new
    return _canonical(blocks), rounds
