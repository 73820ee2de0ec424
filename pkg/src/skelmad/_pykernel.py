"""Counting-only machine loop on flat integer arrays (pure-Python build).

This is a line-by-line twin of ``_ckernel.pyx``.  It drops traces, names and
audits and keeps just what the benchmark needs: transition counts, the final
environment length, the maximal state size and the final code.

Input terms are flat: ``kind[i], fst[i], snd[i]`` for node ``i`` with the root
at index 0; variables and abstractions refer to declarations ``0..ndecls-1``.
"""

from __future__ import annotations

K_VAR, K_ABS, K_APP, K_FREE = 0, 1, 2, 3
S_NONE, S_SUB, S_SKEL, S_HOLE, S_COPY = 0, 1, 2, 3, 4
NIL = -1

# counter slots
C_BETA, C_SK, C_SS, C_SUB, C_SEA1, C_SEA2, C_SEA3 = range(7)


class _State:
    def __init__(self, kind, fst, snd, ndecls):
        n = len(kind)
        self.kind = list(kind)
        self.fst = list(fst)
        self.snd = list(snd)
        self.parent = [NIL] * n
        self.mark = [0] * n
        # intrusive occurrence lists threaded through variable nodes
        self.oprev = [NIL] * n
        self.onext = [NIL] * n
        self.free = []
        self.dorig = list(range(ndecls))
        self.sub_kind = [S_NONE] * ndecls
        self.sub = [NIL] * ndecls
        self.prev = [NIL] * ndecls
        self.next = [NIL] * ndecls
        self.ohead = [NIL] * ndecls
        for i in range(n):
            k = self.kind[i]
            if k == K_ABS:
                self.parent[self.snd[i]] = i
            elif k == K_APP:
                self.parent[self.fst[i]] = i
                self.parent[self.snd[i]] = i
            elif k == K_VAR:
                self._occ_add(self.fst[i], i)

    def _occ_add(self, d, n):
        h = self.ohead[d]
        self.oprev[n] = NIL
        self.onext[n] = h
        if h != NIL:
            self.oprev[h] = n
        self.ohead[d] = n

    def _occ_remove(self, d, n):
        p, q = self.oprev[n], self.onext[n]
        if p != NIL:
            self.onext[p] = q
        else:
            self.ohead[d] = q
        if q != NIL:
            self.oprev[q] = p

    def alloc(self, k, a, b):
        if self.free:
            n = self.free.pop()
            self.kind[n] = k
            self.fst[n] = a
            self.snd[n] = b
            self.parent[n] = NIL
            self.mark[n] = 0
            return n
        self.kind.append(k)
        self.fst.append(a)
        self.snd.append(b)
        self.parent.append(NIL)
        self.mark.append(0)
        self.oprev.append(NIL)
        self.onext.append(NIL)
        return len(self.kind) - 1

    def new_var(self, d):
        n = self.alloc(K_VAR, d, NIL)
        self._occ_add(d, n)
        return n

    def new_decl(self, orig):
        self.dorig.append(orig)
        self.sub_kind.append(S_NONE)
        self.sub.append(NIL)
        self.prev.append(NIL)
        self.next.append(NIL)
        self.ohead.append(NIL)
        return len(self.sub) - 1

    def free_node(self, n):
        if self.kind[n] == K_VAR:
            self._occ_remove(self.fst[n], n)
        self.kind[n] = K_FREE
        self.free.append(n)

    def rename(self, root):
        """Copy ``root`` with fresh binders; returns (copy, size)."""
        kind, fst, snd, sub_kind, sub = self.kind, self.fst, self.snd, self.sub_kind, self.sub
        saved = []
        results = []
        todo = [root, 0]
        size = 0
        while todo:
            stage = todo.pop()
            n = todo.pop()
            k = kind[n]
            if k == K_VAR:
                d = fst[n]
                if sub_kind[d] == S_COPY:
                    d = sub[d]
                results.append(self.new_var(d))
                size += 1
            elif stage == 0:
                if k == K_ABS:
                    d = fst[n]
                    nd = self.new_decl(self.dorig[d])
                    saved.append(d)
                    saved.append(sub_kind[d])
                    saved.append(sub[d])
                    sub_kind[d] = S_COPY
                    sub[d] = nd
                    todo += [n, 1, snd[n], 0]
                else:
                    todo += [n, 1, snd[n], 0, fst[n], 0]
            elif k == K_ABS:
                body = results.pop()
                c = self.alloc(K_ABS, sub[fst[n]], body)
                self.parent[body] = c
                results.append(c)
                size += 1
            else:
                arg = results.pop()
                head = results.pop()
                c = self.alloc(K_APP, head, arg)
                self.parent[head] = c
                self.parent[arg] = c
                results.append(c)
                size += 1
        while saved:
            s = saved.pop()
            k = saved.pop()
            d = saved.pop()
            sub_kind[d] = k
            sub[d] = s
        return results[0], size

    def mark_skeleton(self, v):
        kind, fst, parent, mark, onext = self.kind, self.fst, self.parent, self.mark, self.onext
        mark[v] = 1
        frontier = []
        o = self.ohead[fst[v]]
        while o != NIL:
            mark[o] = 1
            frontier.append(o)
            o = onext[o]
        while frontier:
            n = frontier.pop()
            if n == v:
                continue
            p = parent[n]
            if mark[p]:
                continue
            mark[p] = 1
            frontier.append(p)
            if kind[p] == K_ABS:
                o = self.ohead[fst[p]]
                while o != NIL:
                    mark[o] = 1
                    frontier.append(o)
                    o = onext[o]

    def split(self, v, out):
        """Cut the flesh of a marked value; appends (decl, body) pairs to ``out``."""
        kind, fst, snd, mark = self.kind, self.fst, self.snd, self.mark
        mark[v] = 0
        todo = [v, snd[v]]
        while todo:
            c = todo.pop()
            p = todo.pop()
            if mark[c]:
                mark[c] = 0
                k = kind[c]
                if k == K_ABS:
                    todo += [c, snd[c]]
                elif k == K_APP:
                    todo += [c, snd[c], c, fst[c]]
            elif kind[c] != K_VAR:
                d = self.new_decl(NIL)
                x = self.new_var(d)
                if kind[p] == K_ABS or fst[p] != c:
                    snd[p] = x
                else:
                    fst[p] = x
                self.parent[x] = p
                self.parent[c] = NIL
                out.append(d)
                out.append(c)


def run(kind, fst, snd, ndecls, skeletal, fuel):
    """Run to a final state; returns (counts, final_env_len, max_state_size, exhausted, code, state)."""
    st = _State(kind, fst, snd, ndecls)
    K, F, S = st.kind, st.fst, st.snd
    counts = [0] * 7
    stack = []
    base = 0
    # chain items as flat quadruples: decl, saved base, saved env head, occurrence
    chain = []
    env = NIL
    code = 0
    size = len(kind)
    max_size = size
    steps = 0
    exhausted = False
    flesh = []
    while True:
        k = K[code]
        if k == K_ABS and len(stack) == base and not chain:
            break
        if steps >= fuel:
            exhausted = True
            break
        steps += 1
        if k == K_APP:
            head = F[code]
            stack.append(S[code])
            st.parent[head] = NIL
            st.parent[S[code]] = NIL
            st.free_node(code)
            code = head
            size -= 1
            counts[C_SEA1] += 1
        elif k == K_ABS:
            if len(stack) > base:
                d = F[code]
                body = S[code]
                st.sub_kind[d] = S_SUB
                st.sub[d] = stack.pop()
                st.prev[d] = NIL
                st.next[d] = env
                if env != NIL:
                    st.prev[env] = d
                env = d
                st.parent[body] = NIL
                K[code] = K_FREE
                st.free.append(code)
                code = body
                size -= 1
                counts[C_BETA] += 1
            else:
                occ = chain.pop()
                head = chain.pop()
                base = chain.pop()
                d = chain.pop()
                st.sub_kind[d] = S_SUB
                st.sub[d] = code
                st.next[d] = env
                if env != NIL:
                    st.prev[env] = d
                env = head
                code = occ
                size += 1
                counts[C_SEA3] += 1
        else:
            d = F[code]
            sk = st.sub_kind[d]
            if sk == S_SUB:
                t = st.sub[d]
                if K[t] != K_ABS:
                    nxt = st.next[d]
                    chain += [d, base, env, code]
                    base = len(stack)
                    st.sub_kind[d] = S_HOLE
                    st.sub[d] = NIL
                    st.next[d] = NIL
                    if nxt != NIL:
                        st.prev[nxt] = NIL
                    env = nxt
                    code = t
                    size -= 1
                    counts[C_SEA2] += 1
                elif not skeletal:
                    copy, csize = st.rename(t)
                    st.free_node(code)
                    code = copy
                    size += csize - 1
                    counts[C_SUB] += 1
                else:
                    st.mark_skeleton(t)
                    flesh.clear()
                    st.split(t, flesh)
                    st.sub_kind[d] = S_SKEL
                    after = st.next[d]
                    last = d
                    for i in range(0, len(flesh), 2):
                        pd = flesh[i]
                        st.sub_kind[pd] = S_SUB
                        st.sub[pd] = flesh[i + 1]
                        st.prev[pd] = last
                        st.next[last] = pd
                        last = pd
                    st.next[last] = after
                    if after != NIL:
                        st.prev[after] = last
                    size += len(flesh) // 2
                    counts[C_SK] += 1
            elif sk == S_SKEL:
                copy, csize = st.rename(st.sub[d])
                st.free_node(code)
                code = copy
                size += csize - 1
                counts[C_SS] += 1
            else:
                raise RuntimeError("demanded variable has no usable entry")
        if size > max_size:
            max_size = size
    env_len = 0
    d = env
    while d != NIL:
        env_len += 1
        d = st.next[d]
    return counts, env_len, max_size, exhausted, export(st, code)


def export(st, root):
    """Preorder encoding: (0, decl) variable, (1, decl) abstraction, (2,) application.

    Declarations are reported by their original index, or -1 for copies and
    flesh variables, as ``(orig, decl)`` pairs.
    """
    out = []
    todo = [root]
    while todo:
        n = todo.pop()
        k = st.kind[n]
        if k == K_VAR:
            out.append((0, st.fst[n], st.dorig[st.fst[n]]))
        elif k == K_ABS:
            out.append((1, st.fst[n], st.dorig[st.fst[n]]))
            todo.append(st.snd[n])
        else:
            out.append((2, NIL, NIL))
            todo.append(st.snd[n])
            todo.append(st.fst[n])
    return out
