# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: the interpreter step loop and the box-count loop.

Must behave exactly like memspath._pure; the twin-equivalence tests hold
both to that. Arithmetic wraps at 64 bits (unsigned-cast tricks keep the
wrap defined regardless of compiler flags); division truncates toward zero.

Status codes (shared with bytecode.py): 0 ok, 1 step limit, 2 division by
zero, 3 index out of bounds, 4 bad allocation, 5 call depth.
"""

from libc.stdlib cimport calloc, free, malloc
from libc.string cimport memset

from .bytecode import RunOutcome, render_format

BACKEND_NAME = "compiled"

cdef extern from "limits.h":
    long long LLONG_MIN


cdef struct ArrayReg:
    long long *ptr
    long long length


cdef ArrayReg *_grow(ArrayReg *old, int old_cap, int new_cap) except NULL:
    cdef ArrayReg *fresh = <ArrayReg *> malloc(sizeof(ArrayReg) * new_cap)
    cdef int i
    if fresh == NULL:
        raise MemoryError()
    for i in range(old_cap):
        fresh[i] = old[i]
    free(old)
    return fresh


def run_vm(program, int entry, scalar_args, array_args, long long max_steps,
           bint trace_on, int max_depth=256, long long max_cells=(1 << 27)):
    funcs = program.functions
    formats = program.formats

    cdef int max_regs = 1
    cdef int max_slots = 1
    for f in funcs:
        if f.n_regs > max_regs:
            max_regs = f.n_regs
        if f.n_slots > max_slots:
            max_slots = f.n_slots

    # Keep the per-function code arrays alive for zero-copy views.
    code_views = [f.code for f in funcs]
    cdef long long[:, ::1] code = code_views[entry]

    cdef long long *regstack = <long long *> calloc((max_depth + 1) * max_regs + 1, sizeof(long long))
    cdef long long *slotstack = <long long *> malloc(sizeof(long long) * ((max_depth + 1) * max_slots + 1))
    cdef int *fr_fn = <int *> malloc(sizeof(int) * (max_depth + 1))
    cdef long long *fr_pc = <long long *> malloc(sizeof(long long) * (max_depth + 1))
    cdef int *fr_dst = <int *> malloc(sizeof(int) * (max_depth + 1))

    cdef int arr_cap = 64
    cdef ArrayReg *arrs = <ArrayReg *> malloc(sizeof(ArrayReg) * arr_cap)
    cdef int n_arrs = 0
    cdef long long cells = 0

    if regstack == NULL or slotstack == NULL or fr_fn == NULL or fr_pc == NULL or fr_dst == NULL or arrs == NULL:
        raise MemoryError()

    cdef long long *regs = regstack
    cdef long long *slots = slotstack
    cdef long long *newregs
    cdef long long *newslots
    cdef long long *newp
    cdef ArrayReg *arr
    cdef int depth = 0
    cdef int fn_idx = entry
    cdef long long pc = 0
    cdef long long steps = 0
    cdef long long path_len = 0
    cdef long long reads = 0
    cdef long long writes = 0
    cdef long long ret_value = 0
    cdef int status = 0
    cdef int n_entry_arrays = len(array_args)

    cdef long long op, a, b, c, d, rb, rc, idx, size, value
    cdef int i, k, si, ai

    events = []
    outputs = []

    fn = funcs[entry]
    si = 0
    for k in range(len(fn.param_kinds)):
        if fn.param_kinds[k] == "s":
            regs[si] = <long long> scalar_args[si]
            si += 1
    for k in range(fn.n_slots):
        slots[k] = -1

    try:
        for contents in array_args:
            size = len(contents)
            if cells + size > max_cells:
                raise MemoryError("entry arrays exceed the cell budget")
            newp = <long long *> malloc(sizeof(long long) * (size if size > 0 else 1))
            if newp == NULL:
                raise MemoryError()
            for i in range(size):
                newp[i] = <long long> contents[i]
            if n_arrs == arr_cap:
                arrs = _grow(arrs, arr_cap, arr_cap * 2)
                arr_cap *= 2
            arrs[n_arrs].ptr = newp
            arrs[n_arrs].length = size
            slots[n_arrs] = n_arrs
            n_arrs += 1
            cells += size

        while True:
            op = code[pc, 0]
            a = code[pc, 1]
            b = code[pc, 2]
            c = code[pc, 3]
            d = code[pc, 4]
            pc += 1
            if op == 20:  # AGET
                arr = &arrs[slots[b]]
                idx = regs[c]
                if idx < 0 or idx >= arr.length:
                    status = 3
                    pc -= 1
                    break
                regs[a] = arr.ptr[idx]
                reads += 1
            elif op == 21:  # ASET
                arr = &arrs[slots[a]]
                idx = regs[b]
                if idx < 0 or idx >= arr.length:
                    status = 3
                    pc -= 1
                    break
                arr.ptr[idx] = regs[c]
                writes += 1
            elif op == 3:  # ADD
                regs[a] = <long long> ((<unsigned long long> regs[b]) + (<unsigned long long> regs[c]))
            elif op == 4:  # SUB
                regs[a] = <long long> ((<unsigned long long> regs[b]) - (<unsigned long long> regs[c]))
            elif op == 5:  # MUL
                regs[a] = <long long> ((<unsigned long long> regs[b]) * (<unsigned long long> regs[c]))
            elif op == 8:  # LT
                regs[a] = 1 if regs[b] < regs[c] else 0
            elif op == 9:  # LE
                regs[a] = 1 if regs[b] <= regs[c] else 0
            elif op == 10:  # GT
                regs[a] = 1 if regs[b] > regs[c] else 0
            elif op == 11:  # GE
                regs[a] = 1 if regs[b] >= regs[c] else 0
            elif op == 12:  # EQ
                regs[a] = 1 if regs[b] == regs[c] else 0
            elif op == 13:  # NE
                regs[a] = 1 if regs[b] != regs[c] else 0
            elif op == 1:  # LOADC
                regs[a] = b
            elif op == 2:  # MOV
                regs[a] = regs[b]
            elif op == 17:  # JMP
                pc = a
            elif op == 18:  # JZ
                if regs[a] == 0:
                    pc = b
            elif op == 19:  # JNZ
                if regs[a] != 0:
                    pc = b
            elif op == 23:  # STEP
                steps += 1
                if steps > max_steps:
                    status = 1
                    pc -= 1
                    break
            elif op == 24:  # PLEN
                path_len += 1
            elif op == 25:  # EMIT
                if trace_on:
                    events.append(a)
            elif op == 16:  # BOOL
                regs[a] = 0 if regs[b] == 0 else 1
            elif op == 15:  # NOT
                regs[a] = 1 if regs[b] == 0 else 0
            elif op == 14:  # NEG
                regs[a] = <long long> (0 - (<unsigned long long> regs[b]))
            elif op == 6:  # DIV
                rb = regs[b]
                rc = regs[c]
                if rc == 0:
                    status = 2
                    pc -= 1
                    break
                if rb == LLONG_MIN and rc == -1:
                    regs[a] = LLONG_MIN
                else:
                    regs[a] = rb / rc
            elif op == 7:  # MOD
                rb = regs[b]
                rc = regs[c]
                if rc == 0:
                    status = 2
                    pc -= 1
                    break
                if rb == LLONG_MIN and rc == -1:
                    regs[a] = 0
                else:
                    regs[a] = rb % rc
            elif op == 22:  # ALLOC
                size = regs[b]
                if size < 0 or cells + size > max_cells:
                    status = 4
                    pc -= 1
                    break
                cells += size
                newp = <long long *> malloc(sizeof(long long) * (size if size > 0 else 1))
                if newp == NULL:
                    raise MemoryError()
                memset(newp, 0, sizeof(long long) * size)
                if n_arrs == arr_cap:
                    arrs = _grow(arrs, arr_cap, arr_cap * 2)
                    arr_cap *= 2
                arrs[n_arrs].ptr = newp
                arrs[n_arrs].length = size
                slots[a] = n_arrs
                n_arrs += 1
            elif op == 29:  # AREF
                regs[a] = slots[b]
            elif op == 28:  # PRINT
                parts, n_args = formats[a]
                vals = [regs[b + i] for i in range(c)]
                outputs.append(render_format(parts, vals))
            elif op == 26:  # CALL
                if depth + 1 >= max_depth:
                    status = 5
                    pc -= 1
                    break
                callee = funcs[a]
                fr_fn[depth] = fn_idx
                fr_pc[depth] = pc
                fr_dst[depth] = <int> d
                depth += 1
                newregs = regs + max_regs
                newslots = slots + max_slots
                memset(newregs, 0, sizeof(long long) * max_regs)
                si = 0
                ai = 0
                kinds = callee.param_kinds
                for k in range(len(kinds)):
                    if kinds[k] == "s":
                        newregs[si] = regs[b + k]
                        si += 1
                    else:
                        newslots[ai] = regs[b + k]
                        ai += 1
                for k in range(ai, callee.n_slots):
                    newslots[k] = -1
                regs = newregs
                slots = newslots
                fn_idx = <int> a
                code = code_views[fn_idx]
                pc = 0
            elif op == 27:  # RET
                value = regs[a] if a >= 0 else 0
                if depth == 0:
                    ret_value = value
                    break
                depth -= 1
                fn_idx = fr_fn[depth]
                pc = fr_pc[depth]
                regs = regstack + depth * max_regs
                slots = slotstack + depth * max_slots
                regs[fr_dst[depth]] = value
                code = code_views[fn_idx]
            else:
                raise AssertionError(f"bad opcode {op}")

        final_arrays = {}
        for k in range(n_entry_arrays):
            final_arrays[k] = [arrs[k].ptr[i] for i in range(arrs[k].length)]
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
            err_fn=fn_idx if status != 0 else -1,
            err_pc=pc if status != 0 else -1,
        )
    finally:
        for i in range(n_arrs):
            free(arrs[i].ptr)
        free(arrs)
        free(regstack)
        free(slotstack)
        free(fr_fn)
        free(fr_pc)
        free(fr_dst)


def count_box(coeffs, consts, rels, lows, highs):
    """Exact satisfying-point count over an inclusive integer box.

    Same contract as memspath._pure.count_box; plain odometer loop with
    incrementally maintained constraint values.
    """
    import numpy as np

    arr_a = np.ascontiguousarray(coeffs, dtype=np.int64).reshape(len(consts), -1)
    cdef long long[:, ::1] A = arr_a
    cdef long long[::1] C = np.ascontiguousarray(consts, dtype=np.int64)
    cdef long long[::1] R = np.ascontiguousarray(rels, dtype=np.int64)
    cdef long long[::1] LO = np.ascontiguousarray(lows, dtype=np.int64)
    cdef long long[::1] HI = np.ascontiguousarray(highs, dtype=np.int64)

    cdef int k = A.shape[0]
    cdef int m = A.shape[1]
    cdef int i, j
    cdef long long total = 0
    cdef bint ok
    cdef long long v, delta

    if m == 0:
        ok = True
        for i in range(k):
            if not _rel_holds(R[i], C[i]):
                ok = False
                break
        return 1 if ok else 0
    for j in range(m):
        if HI[j] < LO[j]:
            return 0

    cdef long long *vals = <long long *> malloc(sizeof(long long) * (k if k > 0 else 1))
    cdef long long *point = <long long *> malloc(sizeof(long long) * m)
    if vals == NULL or point == NULL:
        free(vals)
        free(point)
        raise MemoryError()
    try:
        for j in range(m):
            point[j] = LO[j]
        for i in range(k):
            v = C[i]
            for j in range(m):
                v += A[i, j] * LO[j]
            vals[i] = v

        while True:
            ok = True
            for i in range(k):
                if not _rel_holds(R[i], vals[i]):
                    ok = False
                    break
            if ok:
                total += 1
            j = m - 1
            while j >= 0:
                if point[j] < HI[j]:
                    point[j] += 1
                    for i in range(k):
                        vals[i] += A[i, j]
                    break
                delta = point[j] - LO[j]
                for i in range(k):
                    vals[i] -= A[i, j] * delta
                point[j] = LO[j]
                j -= 1
            if j < 0:
                break
        return total
    finally:
        free(vals)
        free(point)


cdef inline bint _rel_holds(long long rel, long long v):
    if rel == 0:
        return v < 0
    if rel == 1:
        return v <= 0
    if rel == 2:
        return v > 0
    if rel == 3:
        return v >= 0
    if rel == 4:
        return v == 0
    return v != 0
