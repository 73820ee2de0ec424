# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Counting-only machine loop on C arrays; twin of ``_pykernel.py``."""

from libc.stdlib cimport malloc, realloc, free

cdef enum:
    K_VAR = 0
    K_ABS = 1
    K_APP = 2
    K_FREE = 3
    S_NONE = 0
    S_SUB = 1
    S_SKEL = 2
    S_HOLE = 3
    S_COPY = 4
    NIL = -1


cdef struct IntVec:
    int *data
    Py_ssize_t size
    Py_ssize_t cap


cdef int vec_init(IntVec *v, Py_ssize_t cap) except -1:
    if cap < 16:
        cap = 16
    v.data = <int *> malloc(cap * sizeof(int))
    if v.data == NULL:
        raise MemoryError()
    v.size = 0
    v.cap = cap
    return 0


cdef inline int vec_push(IntVec *v, int x) except -1:
    cdef int *p
    if v.size == v.cap:
        p = <int *> realloc(v.data, 2 * v.cap * sizeof(int))
        if p == NULL:
            raise MemoryError()
        v.data = p
        v.cap *= 2
    v.data[v.size] = x
    v.size += 1
    return 0


cdef inline int vec_pop(IntVec *v):
    v.size -= 1
    return v.data[v.size]


cdef void vec_free(IntVec *v):
    free(v.data)
    v.data = NULL


cdef class _Store:
    # nodes
    cdef IntVec kind, fst, snd, parent, mark, oprev, onext, freelist
    # declarations
    cdef IntVec dorig, sub_kind, sub, prev, next, ohead
    # scratch
    cdef IntVec todo, results, saved

    cdef int setup(self, kind, fst, snd, int ndecls) except -1:
        cdef Py_ssize_t n = len(kind), i
        cdef int k
        vec_init(&self.kind, 2 * n)
        vec_init(&self.fst, 2 * n)
        vec_init(&self.snd, 2 * n)
        vec_init(&self.parent, 2 * n)
        vec_init(&self.mark, 2 * n)
        vec_init(&self.oprev, 2 * n)
        vec_init(&self.onext, 2 * n)
        vec_init(&self.freelist, 64)
        vec_init(&self.dorig, 2 * ndecls)
        vec_init(&self.sub_kind, 2 * ndecls)
        vec_init(&self.sub, 2 * ndecls)
        vec_init(&self.prev, 2 * ndecls)
        vec_init(&self.next, 2 * ndecls)
        vec_init(&self.ohead, 2 * ndecls)
        vec_init(&self.todo, 64)
        vec_init(&self.results, 64)
        vec_init(&self.saved, 64)
        for i in range(ndecls):
            self.new_decl(<int> i)
        for i in range(n):
            vec_push(&self.kind, kind[i])
            vec_push(&self.fst, fst[i])
            vec_push(&self.snd, snd[i])
            vec_push(&self.parent, NIL)
            vec_push(&self.mark, 0)
            vec_push(&self.oprev, NIL)
            vec_push(&self.onext, NIL)
        for i in range(n):
            k = self.kind.data[i]
            if k == K_ABS:
                self.parent.data[self.snd.data[i]] = <int> i
            elif k == K_APP:
                self.parent.data[self.fst.data[i]] = <int> i
                self.parent.data[self.snd.data[i]] = <int> i
            elif k == K_VAR:
                self.occ_add(self.fst.data[i], <int> i)
        return 0

    def __dealloc__(self):
        vec_free(&self.kind)
        vec_free(&self.fst)
        vec_free(&self.snd)
        vec_free(&self.parent)
        vec_free(&self.mark)
        vec_free(&self.oprev)
        vec_free(&self.onext)
        vec_free(&self.freelist)
        vec_free(&self.dorig)
        vec_free(&self.sub_kind)
        vec_free(&self.sub)
        vec_free(&self.prev)
        vec_free(&self.next)
        vec_free(&self.ohead)
        vec_free(&self.todo)
        vec_free(&self.results)
        vec_free(&self.saved)

    cdef inline void occ_add(self, int d, int n):
        cdef int h = self.ohead.data[d]
        self.oprev.data[n] = NIL
        self.onext.data[n] = h
        if h != NIL:
            self.oprev.data[h] = n
        self.ohead.data[d] = n

    cdef inline void occ_remove(self, int d, int n):
        cdef int p = self.oprev.data[n], q = self.onext.data[n]
        if p != NIL:
            self.onext.data[p] = q
        else:
            self.ohead.data[d] = q
        if q != NIL:
            self.oprev.data[q] = p

    cdef int alloc(self, int k, int a, int b) except -1:
        cdef int n
        if self.freelist.size > 0:
            n = vec_pop(&self.freelist)
            self.kind.data[n] = k
            self.fst.data[n] = a
            self.snd.data[n] = b
            self.parent.data[n] = NIL
            self.mark.data[n] = 0
            return n
        vec_push(&self.kind, k)
        vec_push(&self.fst, a)
        vec_push(&self.snd, b)
        vec_push(&self.parent, NIL)
        vec_push(&self.mark, 0)
        vec_push(&self.oprev, NIL)
        vec_push(&self.onext, NIL)
        return <int> (self.kind.size - 1)

    cdef int new_var(self, int d) except -1:
        cdef int n = self.alloc(K_VAR, d, NIL)
        self.occ_add(d, n)
        return n

    cdef int new_decl(self, int orig) except -1:
        vec_push(&self.dorig, orig)
        vec_push(&self.sub_kind, S_NONE)
        vec_push(&self.sub, NIL)
        vec_push(&self.prev, NIL)
        vec_push(&self.next, NIL)
        vec_push(&self.ohead, NIL)
        return <int> (self.sub.size - 1)

    cdef int free_node(self, int n) except -1:
        if self.kind.data[n] == K_VAR:
            self.occ_remove(self.fst.data[n], n)
        self.kind.data[n] = K_FREE
        vec_push(&self.freelist, n)
        return 0

    cdef int rename(self, int root, int *size_out) except -1:
        cdef int n, k, d, nd, stage, body, arg, head, c, s
        cdef int size = 0
        self.todo.size = 0
        self.results.size = 0
        self.saved.size = 0
        vec_push(&self.todo, root)
        vec_push(&self.todo, 0)
        while self.todo.size > 0:
            stage = vec_pop(&self.todo)
            n = vec_pop(&self.todo)
            k = self.kind.data[n]
            if k == K_VAR:
                d = self.fst.data[n]
                if self.sub_kind.data[d] == S_COPY:
                    d = self.sub.data[d]
                vec_push(&self.results, self.new_var(d))
                size += 1
            elif stage == 0:
                if k == K_ABS:
                    d = self.fst.data[n]
                    nd = self.new_decl(self.dorig.data[d])
                    vec_push(&self.saved, d)
                    vec_push(&self.saved, self.sub_kind.data[d])
                    vec_push(&self.saved, self.sub.data[d])
                    self.sub_kind.data[d] = S_COPY
                    self.sub.data[d] = nd
                    vec_push(&self.todo, n)
                    vec_push(&self.todo, 1)
                    vec_push(&self.todo, self.snd.data[n])
                    vec_push(&self.todo, 0)
                else:
                    vec_push(&self.todo, n)
                    vec_push(&self.todo, 1)
                    vec_push(&self.todo, self.snd.data[n])
                    vec_push(&self.todo, 0)
                    vec_push(&self.todo, self.fst.data[n])
                    vec_push(&self.todo, 0)
            elif k == K_ABS:
                body = vec_pop(&self.results)
                c = self.alloc(K_ABS, self.sub.data[self.fst.data[n]], body)
                self.parent.data[body] = c
                vec_push(&self.results, c)
                size += 1
            else:
                arg = vec_pop(&self.results)
                head = vec_pop(&self.results)
                c = self.alloc(K_APP, head, arg)
                self.parent.data[head] = c
                self.parent.data[arg] = c
                vec_push(&self.results, c)
                size += 1
        while self.saved.size > 0:
            s = vec_pop(&self.saved)
            k = vec_pop(&self.saved)
            d = vec_pop(&self.saved)
            self.sub_kind.data[d] = k
            self.sub.data[d] = s
        size_out[0] = size
        return vec_pop(&self.results)

    cdef int mark_skeleton(self, int v) except -1:
        cdef int n, p, o
        self.todo.size = 0
        self.mark.data[v] = 1
        o = self.ohead.data[self.fst.data[v]]
        while o != NIL:
            self.mark.data[o] = 1
            vec_push(&self.todo, o)
            o = self.onext.data[o]
        while self.todo.size > 0:
            n = vec_pop(&self.todo)
            if n == v:
                continue
            p = self.parent.data[n]
            if self.mark.data[p]:
                continue
            self.mark.data[p] = 1
            vec_push(&self.todo, p)
            if self.kind.data[p] == K_ABS:
                o = self.ohead.data[self.fst.data[p]]
                while o != NIL:
                    self.mark.data[o] = 1
                    vec_push(&self.todo, o)
                    o = self.onext.data[o]
        return 0

    cdef int split(self, int v, IntVec *out) except -1:
        cdef int p, c, k, d, x
        self.todo.size = 0
        self.mark.data[v] = 0
        vec_push(&self.todo, v)
        vec_push(&self.todo, self.snd.data[v])
        while self.todo.size > 0:
            c = vec_pop(&self.todo)
            p = vec_pop(&self.todo)
            if self.mark.data[c]:
                self.mark.data[c] = 0
                k = self.kind.data[c]
                if k == K_ABS:
                    vec_push(&self.todo, c)
                    vec_push(&self.todo, self.snd.data[c])
                elif k == K_APP:
                    vec_push(&self.todo, c)
                    vec_push(&self.todo, self.snd.data[c])
                    vec_push(&self.todo, c)
                    vec_push(&self.todo, self.fst.data[c])
            elif self.kind.data[c] != K_VAR:
                d = self.new_decl(NIL)
                x = self.new_var(d)
                if self.kind.data[p] == K_ABS or self.fst.data[p] != c:
                    self.snd.data[p] = x
                else:
                    self.fst.data[p] = x
                self.parent.data[x] = p
                self.parent.data[c] = NIL
                vec_push(out, d)
                vec_push(out, c)
        return 0

    def export(self, int root):
        out = []
        todo = [root]
        cdef int n, k
        while todo:
            n = todo.pop()
            k = self.kind.data[n]
            if k == K_VAR:
                out.append((0, self.fst.data[n], self.dorig.data[self.fst.data[n]]))
            elif k == K_ABS:
                out.append((1, self.fst.data[n], self.dorig.data[self.fst.data[n]]))
                todo.append(self.snd.data[n])
            else:
                out.append((2, NIL, NIL))
                todo.append(self.snd.data[n])
                todo.append(self.fst.data[n])
        return out


def run(kind, fst, snd, int ndecls, bint skeletal, long long fuel):
    """Run to a final state; returns (counts, final_env_len, max_state_size, exhausted, code)."""
    cdef _Store st = _Store()
    st.setup(kind, fst, snd, ndecls)
    cdef long long counts[7]
    cdef IntVec stack, chain, flesh
    cdef int base = 0, env = NIL, code = 0, k, d, sk, t, nxt, head, body, occ
    cdef int after, last, pd, copy, csize = 0, i
    cdef long long size = len(kind), max_size = size, steps = 0
    cdef bint exhausted = False
    cdef long long env_len = 0
    for i in range(7):
        counts[i] = 0
    vec_init(&stack, 64)
    vec_init(&chain, 64)
    vec_init(&flesh, 16)
    try:
        while True:
            k = st.kind.data[code]
            if k == K_ABS and stack.size == base and chain.size == 0:
                break
            if steps >= fuel:
                exhausted = True
                break
            steps += 1
            if k == K_APP:
                head = st.fst.data[code]
                vec_push(&stack, st.snd.data[code])
                st.parent.data[head] = NIL
                st.parent.data[st.snd.data[code]] = NIL
                st.free_node(code)
                code = head
                size -= 1
                counts[4] += 1
            elif k == K_ABS:
                if stack.size > base:
                    d = st.fst.data[code]
                    body = st.snd.data[code]
                    st.sub_kind.data[d] = S_SUB
                    st.sub.data[d] = vec_pop(&stack)
                    st.prev.data[d] = NIL
                    st.next.data[d] = env
                    if env != NIL:
                        st.prev.data[env] = d
                    env = d
                    st.parent.data[body] = NIL
                    st.kind.data[code] = K_FREE
                    vec_push(&st.freelist, code)
                    code = body
                    size -= 1
                    counts[0] += 1
                else:
                    occ = vec_pop(&chain)
                    head = vec_pop(&chain)
                    base = vec_pop(&chain)
                    d = vec_pop(&chain)
                    st.sub_kind.data[d] = S_SUB
                    st.sub.data[d] = code
                    st.next.data[d] = env
                    if env != NIL:
                        st.prev.data[env] = d
                    env = head
                    code = occ
                    size += 1
                    counts[6] += 1
            else:
                d = st.fst.data[code]
                sk = st.sub_kind.data[d]
                if sk == S_SUB:
                    t = st.sub.data[d]
                    if st.kind.data[t] != K_ABS:
                        nxt = st.next.data[d]
                        vec_push(&chain, d)
                        vec_push(&chain, base)
                        vec_push(&chain, env)
                        vec_push(&chain, code)
                        base = <int> stack.size
                        st.sub_kind.data[d] = S_HOLE
                        st.sub.data[d] = NIL
                        st.next.data[d] = NIL
                        if nxt != NIL:
                            st.prev.data[nxt] = NIL
                        env = nxt
                        code = t
                        size -= 1
                        counts[5] += 1
                    elif not skeletal:
                        copy = st.rename(t, &csize)
                        st.free_node(code)
                        code = copy
                        size += csize - 1
                        counts[3] += 1
                    else:
                        st.mark_skeleton(t)
                        flesh.size = 0
                        st.split(t, &flesh)
                        st.sub_kind.data[d] = S_SKEL
                        after = st.next.data[d]
                        last = d
                        for i in range(0, flesh.size, 2):
                            pd = flesh.data[i]
                            st.sub_kind.data[pd] = S_SUB
                            st.sub.data[pd] = flesh.data[i + 1]
                            st.prev.data[pd] = last
                            st.next.data[last] = pd
                            last = pd
                        st.next.data[last] = after
                        if after != NIL:
                            st.prev.data[after] = last
                        size += flesh.size // 2
                        counts[1] += 1
                elif sk == S_SKEL:
                    copy = st.rename(st.sub.data[d], &csize)
                    st.free_node(code)
                    code = copy
                    size += csize - 1
                    counts[2] += 1
                else:
                    raise RuntimeError("demanded variable has no usable entry")
            if size > max_size:
                max_size = size
        d = env
        while d != NIL:
            env_len += 1
            d = st.next.data[d]
        result = st.export(code)
    finally:
        vec_free(&stack)
        vec_free(&chain)
        vec_free(&flesh)
    return [counts[i] for i in range(7)], env_len, max_size, exhausted, result
