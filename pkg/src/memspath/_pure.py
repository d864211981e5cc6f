"""Pure-Python twins of the compiled kernels.

Selected by ``memspath.kernels`` when the ``_core`` extension is missing
(or when MEMSPATH_PURE=1). Semantics must match the extension bit for bit;
the twin-equivalence tests run both on the same programs.
"""

from __future__ import annotations

import numpy as np

from .bytecode import (
    OP_ADD,
    OP_AGET,
    OP_ALLOC,
    OP_AREF,
    OP_ASET,
    OP_BOOL,
    OP_CALL,
    OP_DIV,
    OP_EMIT,
    OP_EQ,
    OP_GE,
    OP_GT,
    OP_JMP,
    OP_JNZ,
    OP_JZ,
    OP_LE,
    OP_LOADC,
    OP_LT,
    OP_MOD,
    OP_MOV,
    OP_MUL,
    OP_NE,
    OP_NEG,
    OP_NOT,
    OP_PLEN,
    OP_PRINT,
    OP_RET,
    OP_STEP,
    OP_SUB,
    RunOutcome,
    STATUS_BAD_ALLOC,
    STATUS_DEPTH,
    STATUS_DIV_ZERO,
    STATUS_OK,
    STATUS_OOB,
    STATUS_STEP_LIMIT,
    render_format,
)

BACKEND_NAME = "pure"

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def _wrap(v):
    return ((v + _SIGN) & _MASK) - _SIGN


def run_vm(program, entry, scalar_args, array_args, max_steps, trace_on,
           max_depth=256, max_cells=1 << 27):
    """Execute ``entry`` and return a RunOutcome.

    scalar_args: int values for the scalar parameters, in parameter order.
    array_args: list-of-ints per array parameter, in parameter order.
    """
    funcs = program.functions
    fn = funcs[entry]

    arrays = []  # registry of python lists

    def new_array(contents):
        arrays.append(contents)
        return len(arrays) - 1

    entry_slots = [new_array(list(map(_wrap, contents))) for contents in array_args]
    cells = sum(len(a) for a in array_args)

    code = fn.tuples()
    regs = [0] * fn.n_regs
    si = 0
    for k, kind in enumerate(fn.param_kinds):
        if kind == "s":
            regs[si] = _wrap(scalar_args[si])
            si += 1
    slots = list(entry_slots)
    slots += [-1] * (fn.n_slots - len(slots))

    frames = []  # saved (fn_idx, pc, regs, slots, dst)
    fn_idx = entry
    pc = 0
    steps = 0
    path_len = 0
    reads = 0
    writes = 0
    events = []
    outputs = []
    ret_value = 0
    status = STATUS_OK

    while True:
        op, a, b, c, d = code[pc]
        pc += 1
        if op == OP_STEP:
            steps += 1
            if steps > max_steps:
                status = STATUS_STEP_LIMIT
                pc -= 1
                break
        elif op == OP_LOADC:
            regs[a] = b
        elif op == OP_MOV:
            regs[a] = regs[b]
        elif op == OP_ADD:
            regs[a] = _wrap(regs[b] + regs[c])
        elif op == OP_SUB:
            regs[a] = _wrap(regs[b] - regs[c])
        elif op == OP_MUL:
            regs[a] = _wrap(regs[b] * regs[c])
        elif op == OP_DIV:
            rb, rc_ = regs[b], regs[c]
            if rc_ == 0:
                status = STATUS_DIV_ZERO
                pc -= 1
                break
            q = abs(rb) // abs(rc_)
            regs[a] = _wrap(-q if (rb < 0) != (rc_ < 0) else q)
        elif op == OP_MOD:
            rb, rc_ = regs[b], regs[c]
            if rc_ == 0:
                status = STATUS_DIV_ZERO
                pc -= 1
                break
            r = abs(rb) % abs(rc_)
            regs[a] = -r if rb < 0 else r
        elif op == OP_LT:
            regs[a] = 1 if regs[b] < regs[c] else 0
        elif op == OP_LE:
            regs[a] = 1 if regs[b] <= regs[c] else 0
        elif op == OP_GT:
            regs[a] = 1 if regs[b] > regs[c] else 0
        elif op == OP_GE:
            regs[a] = 1 if regs[b] >= regs[c] else 0
        elif op == OP_EQ:
            regs[a] = 1 if regs[b] == regs[c] else 0
        elif op == OP_NE:
            regs[a] = 1 if regs[b] != regs[c] else 0
        elif op == OP_NEG:
            regs[a] = _wrap(-regs[b])
        elif op == OP_NOT:
            regs[a] = 1 if regs[b] == 0 else 0
        elif op == OP_BOOL:
            regs[a] = 0 if regs[b] == 0 else 1
        elif op == OP_JMP:
            pc = a
        elif op == OP_JZ:
            if regs[a] == 0:
                pc = b
        elif op == OP_JNZ:
            if regs[a] != 0:
                pc = b
        elif op == OP_AGET:
            arr = arrays[slots[b]]
            idx = regs[c]
            if idx < 0 or idx >= len(arr):
                status = STATUS_OOB
                pc -= 1
                break
            regs[a] = arr[idx]
            reads += 1
        elif op == OP_ASET:
            arr = arrays[slots[a]]
            idx = regs[b]
            if idx < 0 or idx >= len(arr):
                status = STATUS_OOB
                pc -= 1
                break
            arr[idx] = regs[c]
            writes += 1
        elif op == OP_ALLOC:
            size = regs[b]
            if size < 0 or cells + size > max_cells:
                status = STATUS_BAD_ALLOC
                pc -= 1
                break
            cells += size
            slots[a] = new_array([0] * size)
        elif op == OP_PLEN:
            path_len += 1
        elif op == OP_EMIT:
            if trace_on:
                events.append(a)
        elif op == OP_PRINT:
            parts, n_args = program.formats[a]
            outputs.append(render_format(parts, regs[b : b + c]))
        elif op == OP_CALL:
            if len(frames) + 1 >= max_depth:
                status = STATUS_DEPTH
                pc -= 1
                break
            callee = funcs[a]
            new_regs = [0] * callee.n_regs
            new_slots = [-1] * callee.n_slots
            si = 0
            ai = 0
            for k, kind in enumerate(callee.param_kinds):
                if kind == "s":
                    new_regs[si] = regs[b + k]
                    si += 1
                else:
                    new_slots[ai] = regs[b + k]
                    ai += 1
            frames.append((fn_idx, pc, regs, slots, d))
            fn_idx = a
            code = callee.tuples()
            regs = new_regs
            slots = new_slots
            pc = 0
        elif op == OP_RET:
            value = regs[a] if a >= 0 else 0
            if not frames:
                ret_value = value
                break
            fn_idx, pc, regs, slots, dst = frames.pop()
            code = funcs[fn_idx].tuples()
            regs[dst] = value
        elif op == OP_AREF:
            regs[a] = slots[b]
        else:
            raise AssertionError(f"bad opcode {op}")

    final_arrays = {}
    for k, aid in enumerate(entry_slots):
        final_arrays[k] = list(arrays[aid])
    return RunOutcome(
        status=status,
        ret=ret_value,
        steps=steps,
        path_len=path_len,
        reads=reads,
        writes=writes,
        events=events,
        outputs=outputs,
        arrays=final_arrays,
        err_fn=fn_idx if status != STATUS_OK else -1,
        err_pc=pc if status != STATUS_OK else -1,
    )


_REL_EVAL = {
    0: lambda v: v < 0,
    1: lambda v: v <= 0,
    2: lambda v: v > 0,
    3: lambda v: v >= 0,
    4: lambda v: v == 0,
    5: lambda v: v != 0,
}


def count_box(coeffs, consts, rels, lows, highs):
    """Count integer points in a box satisfying every affine constraint.

    coeffs: int64 (k, m); consts: int64 (k,); rels: relation codes
    (0 '<', 1 '<=', 2 '>', 3 '>=', 4 '==', 5 '!='), all against zero;
    lows/highs: inclusive int64 bounds per variable. Vectorized along the
    last variable, chunked so memory stays bounded.
    """
    coeffs = np.asarray(coeffs, dtype=np.int64)
    consts = np.asarray(consts, dtype=np.int64)
    rels = [int(r) for r in rels]
    lows = [int(v) for v in lows]
    highs = [int(v) for v in highs]
    k, m = coeffs.shape
    if m == 0:
        ok = all(_REL_EVAL[rels[i]](int(consts[i])) for i in range(k))
        return 1 if ok else 0
    for lo, hi in zip(lows, highs):
        if hi < lo:
            return 0

    last = np.arange(lows[-1], highs[-1] + 1, dtype=np.int64)
    base = coeffs[:, -1][:, None] * last[None, :]  # (k, w)

    total = 0
    point = list(lows[:-1])
    prefix = consts + coeffs[:, :-1] @ np.asarray(point, dtype=np.int64) if m > 1 else consts.copy()
    while True:
        vals = base + prefix[:, None]
        mask = np.ones(len(last), dtype=bool)
        for i in range(k):
            r = rels[i]
            row = vals[i]
            if r == 0:
                mask &= row < 0
            elif r == 1:
                mask &= row <= 0
            elif r == 2:
                mask &= row > 0
            elif r == 3:
                mask &= row >= 0
            elif r == 4:
                mask &= row == 0
            else:
                mask &= row != 0
        total += int(mask.sum())
        if m == 1:
            break
        # odometer over the leading variables
        j = m - 2
        while j >= 0:
            if point[j] < highs[j]:
                point[j] += 1
                prefix = prefix + coeffs[:, j]
                break
            prefix = prefix - coeffs[:, j] * (point[j] - lows[j])
            point[j] = lows[j]
            j -= 1
        if j < 0:
            break
    return total
