"""Mixed complexes and the S^1 constructions as windowed u-series complexes.

A mixed complex is a GradedComplex with a square-zero degree -1 operator eps
anticommuting with d (the sign is fixed so that d + u*eps squares to zero).
The u-series functors are built cell-by-cell: a cell (i, p) holds the
underlying bin in cohomological degree i tensored with u^p, |u| = 2; the
total differential sends (i, p) to (i+1, p) by d and to (i-1, p+1) by eps.
Flavors differ in the p-window and in which truncation boundaries are
genuine (quotient/sub structure of the true object) versus artifacts that
must be edge-flagged.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .complexes import GradedComplex
from .grading import Multidegree, Window
from .linalg import (
    NotAComplex,
    SparseMatrix,
    apply_matrix,
    image_basis,
    kernel_basis,
    quotient_rank,
    rank_of_vectors,
)
from .scalars import is_zero
from .tables import HilbertTable

FLAVORS = ("invariants", "coinvariants", "tate", "oplus-tate", "prod-tate")


class MixedComplex:
    def __init__(self, base: GradedComplex, eps=None):
        self.base = base
        self.eps: dict[Multidegree, SparseMatrix] = dict(eps) if eps else {}

    # -- delegation -----------------------------------------------------------
    def dim(self, m):
        return self.base.dim(m)

    def all_bins(self):
        return self.base.all_bins()

    @property
    def window(self):
        return self.base.window

    @property
    def edge(self):
        return self.base.edge

    def eps_target(self, m: Multidegree) -> Multidegree:
        return m.shift(cohdeg=-1)

    def eps_from(self, m: Multidegree) -> SparseMatrix:
        e = self.eps.get(m)
        if e is not None:
            return e
        return SparseMatrix.zero(self.base.dim(self.eps_target(m)), self.base.dim(m))

    def cohomology(self) -> HilbertTable:
        return self.base.cohomology()

    def weight_component(self, w) -> "MixedComplex":
        w = tuple(w)
        gc = self.base.weight_component(w)
        eps = {m: e for m, e in self.eps.items() if m.weight == w}
        return MixedComplex(gc, eps)

    def is_eps_zero(self) -> bool:
        return all(e.is_zero_matrix() for e in self.eps.values())

    # -- laws ---------------------------------------------------------------------
    def check_mixed_laws(self):
        """eps^2 = 0 and d.eps + eps.d = 0 on every bin."""
        gc = self.base
        for m in gc.all_bins():
            e1 = self.eps_from(m)
            e2 = self.eps_from(self.eps_target(m))
            if not (e2 @ e1).is_zero_matrix():
                raise NotAComplex(m, "eps^2 != 0")
            d_then_eps = self.eps_from(gc.d_target(m)) @ gc.diff_from(m)
            eps_then_d = gc.diff_from(self.eps_target(m)) @ self.eps_from(m)
            if not (d_then_eps + eps_then_d).is_zero_matrix():
                raise NotAComplex(m, "d eps + eps d != 0")
        return True

    def strictly_bounded_below(self):
        """Certified lower cohdeg bound within the window, or None."""
        if not self.base.bins:
            return 0
        return min(m.cohdeg for m in self.base.bins)

    def strictly_bounded_above(self):
        if not self.base.bins:
            return 0
        return max(m.cohdeg for m in self.base.bins)

    # Complexes truncated in cohdeg (simplicial depth) set a floor and may
    # supply a structural certifier for bins below it.
    cohdeg_floor = None
    zero_certifier = None

    def certified_zero(self, m: Multidegree) -> bool:
        """The bin is known to vanish (complete enumeration, not edge)."""
        if self.base.dim(m):
            return False
        if m in self.base.edge:
            return False
        win = self.base.window
        if len(m.weight) != len(win.weight):
            return False
        for w, (lo, hi) in zip(m.weight, win.weight):
            if not (lo <= w <= hi):
                return False
        if not (win.aux[0] <= m.aux <= win.aux[1]):
            return False
        # cohdeg is complete by construction of instantiations unless a
        # depth floor was declared.
        if self.cohdeg_floor is not None and m.cohdeg < self.cohdeg_floor:
            return bool(self.zero_certifier and self.zero_certifier(m))
        return True

    # -- induced mixed map on cohomology ---------------------------------------
    def eps_induced_rank(self, m: Multidegree) -> int:
        """Rank of the map induced by eps on cohomology H(m) -> H(m - e1)."""
        _, ker_s, _ = self.base.cohomology_data(m)
        tgt = self.eps_target(m)
        _, _, im_t = self.base.cohomology_data(tgt)
        E = self.eps_from(m)
        images = [apply_matrix(E, v) for v in ker_s]
        return quotient_rank(images, im_t, self.base.dim(tgt))


def direct_sum(a: MixedComplex, b: MixedComplex) -> MixedComplex:
    bins = {}
    for m in set(a.base.bins) | set(b.base.bins):
        bins[m] = [("L", l) for l in a.base.labels(m)] + [("R", l) for l in b.base.labels(m)]

    def _block(m, da, db, tgt):
        na, nb = a.base.dim(m), b.base.dim(m)
        ta, tb = a.base.dim(tgt), b.base.dim(tgt)
        ent = {}
        for (i, j), v in da.entries.items():
            ent[(i, j)] = v
        for (i, j), v in db.entries.items():
            ent[(i + ta, j + na)] = v
        return SparseMatrix(ta + tb, na + nb, ent)

    if a.base.aux_shift != b.base.aux_shift:
        raise ValueError("aux shift mismatch in direct sum")
    diffs = {}
    eps = {}
    for m in bins:
        tgt = Multidegree(m.cohdeg + 1, m.weight, m.aux + a.base.aux_shift, m.upow)
        dmat = _block(m, a.base.diff_from(m), b.base.diff_from(m), tgt)
        if not dmat.is_zero_matrix():
            diffs[m] = dmat
        et = m.shift(cohdeg=-1)
        emat = _block(m, a.eps_from(m), b.eps_from(m), et)
        if not emat.is_zero_matrix():
            eps[m] = emat
    win = a.base.window
    edge = set(a.base.edge) | set(b.base.edge)
    gc = GradedComplex(bins, diffs, win, edge, aux_shift=a.base.aux_shift)
    return MixedComplex(gc, eps)


# ---------------------------------------------------------------------------
# u-series complexes
# ---------------------------------------------------------------------------

class USeriesComplex:
    """Windowed (V[[u]]-style, d + u*eps) complex of a declared flavor."""

    def __init__(self, mixed: MixedComplex, flavor: str, p_range: tuple):
        if flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {flavor}")
        if mixed.base.aux_shift and any(
            not d.is_zero_matrix() for d in mixed.base.diffs.values()
        ):
            raise NotImplementedError("u-series over aux-shifting differentials")
        self.mixed = mixed
        self.flavor = flavor
        self.p_lo, self.p_hi = p_range
        self.boundedness = {
            "below": mixed.strictly_bounded_below(),
            "above": mixed.strictly_bounded_above(),
        }
        self._columns = None
        self._hcache = {}

    # -- cells ---------------------------------------------------------------
    def columns(self):
        """Group cells into total columns keyed (tau, weight, aux)."""
        if self._columns is not None:
            return self._columns
        cols: dict[tuple, list] = {}
        for m in self.mixed.base.bins:
            for p in range(self.p_lo, self.p_hi + 1):
                tau = m.cohdeg + 2 * p
                cols.setdefault((tau, m.weight, m.aux), []).append((m, p))
        for key in cols:
            cols[key].sort(key=lambda mp: (mp[1], mp[0]))
        self._columns = cols
        return cols

    def _column_basis(self, key):
        cols = self.columns()
        cells = cols.get(key, [])
        offset = {}
        total = 0
        for (m, p) in cells:
            offset[(m, p)] = total
            total += self.mixed.base.dim(m)
        return cells, offset, total

    def _column_matrix(self, key):
        """Total differential out of column key into key + e_tau."""
        tau, w, a = key
        cells, offset, total = self._column_basis(key)
        tkey = (tau + 1, w, a)
        tcells, toffset, ttotal = self._column_basis(tkey)
        ent = {}
        base = self.mixed.base
        for (m, p) in cells:
            off = offset[(m, p)]
            d = base.diffs.get(m)
            if d is not None:
                tm = base.d_target(m)
                to = toffset.get((tm, p))
                if to is not None:
                    for (i, j), v in d.entries.items():
                        ent[(to + i, off + j)] = v
            e = self.mixed.eps.get(m)
            if e is not None and p + 1 <= self.p_hi:
                tm = m.shift(cohdeg=-1)
                to = toffset.get((tm, p + 1))
                if to is not None:
                    for (i, j), v in e.entries.items():
                        ent[(to + i, off + j)] = v
        return SparseMatrix(ttotal, total, ent)

    # -- edge / validity ----------------------------------------------------------
    def _column_is_edge(self, key) -> bool:
        tau, w, a = key
        base = self.mixed.base
        cells, _, _ = self._column_basis(key)
        for (m, p) in cells:
            if m in base.edge:
                return True
        # Truncation boundaries.  d preserves p and eps raises it by one, so
        # the only couplings across the p-window are the eps-arrow into our
        # bottom cell (source: column tau-1, cell p_lo - 1) and the dropped
        # eps-arrow out of our top cell (target: column tau+1, cell p_hi + 1).
        # Each is harmless iff the corresponding underlying bin is certified
        # zero.  Invariants levels are honest quotients (no probes);
        # coinvariants genuinely end at p = 0 (no upper probe).
        if self.flavor in ("tate", "oplus-tate", "prod-tate", "coinvariants"):
            m_low = Multidegree(tau + 1 - 2 * self.p_lo, w, a, 0)
            if not self.mixed.certified_zero(m_low):
                return True
        if self.flavor in ("tate", "oplus-tate", "prod-tate"):
            m_high = Multidegree(tau - 2 * self.p_hi - 1, w, a, 0)
            if not self.mixed.certified_zero(m_high):
                return True
        return False

    def boundedness_flags(self):
        """Which strict-boundedness hypotheses hold inside the window."""
        has_edge_bins = bool(self.mixed.base.edge)
        return {
            "strictly_bounded_below": not has_edge_bins,
            "strictly_bounded_above": not has_edge_bins,
            "bound_below": self.boundedness["below"],
            "bound_above": self.boundedness["above"],
        }

    def require_bounded(self):
        flags = self.boundedness_flags()
        if self.flavor == "oplus-tate" and not flags["strictly_bounded_below"]:
            raise ValueError("comparison refused: not strictly bounded below within window")
        if self.flavor == "prod-tate" and not flags["strictly_bounded_above"]:
            raise ValueError("comparison refused: not strictly bounded above within window")

    # -- cohomology ------------------------------------------------------------
    def _column_h(self, key):
        if key in self._hcache:
            return self._hcache[key]
        tau, w, a = key
        D = self._column_matrix(key)
        prev_key = (tau - 1, w, a)
        Dprev = self._column_matrix(prev_key)
        if not (D @ Dprev).is_zero_matrix():
            raise NotAComplex(key, "(d + u eps)^2 != 0")
        ker = kernel_basis(D)
        im = image_basis(Dprev)
        data = (ker, im)
        self._hcache[key] = data
        return data

    def cohomology(self) -> HilbertTable:
        """Table keyed (i, w, a, p); homology classes are attributed to the
        cell of their echelon pivot (canonical in all split cases)."""
        vals: dict[Multidegree, int] = {}
        edge: set[Multidegree] = set()
        for key in sorted(self.columns().keys()):
            tau, w, a = key
            cells, offset, total = self._column_basis(key)
            if total == 0:
                continue
            ker, im = self._column_h(key)
            attributions = _attribute_quotient(ker, im, total)
            cell_of_index = {}
            for (m, p) in cells:
                off = offset[(m, p)]
                for j in range(self.mixed.base.dim(m)):
                    cell_of_index[off + j] = (m, p)
            col_edge = self._column_is_edge(key)
            for idx, count in attributions.items():
                m, p = cell_of_index[idx]
                bkey = Multidegree(m.cohdeg, m.weight, m.aux, p)
                vals[bkey] = vals.get(bkey, 0) + count
            if col_edge:
                for (m, p) in cells:
                    edge.add(Multidegree(m.cohdeg, m.weight, m.aux, p))
        win = self.mixed.base.window
        return HilbertTable(vals, edge, win.with_upow(self.p_lo, self.p_hi))

    def column_h_dim(self, key) -> int:
        cells, offset, total = self._column_basis(key)
        ker, im = self._column_h(key)
        return len(ker) - rank_of_vectors(im, total)

    # -- u multiplication ----------------------------------------------------------
    def u_map_bijective(self):
        """Check u . (-) : H^tau -> H^{tau+2} bijective on non-edge columns.

        Returns (ok, failures); failures name (tau, weight, aux) columns.
        """
        failures = []
        cols = self.columns()
        for key in sorted(cols.keys()):
            tau, w, a = key
            tkey = (tau + 2, w, a)
            if self._column_is_edge(key) or self._column_is_edge(tkey):
                continue
            # u shifts every cell p -> p+1; usable only if the image column
            # retains all shifted cells inside the window.
            cells, offset, total = self._column_basis(key)
            tcells, toffset, ttotal = self._column_basis(tkey)
            if any((m, p + 1) not in toffset for (m, p) in cells):
                continue
            hs = self.column_h_dim(key)
            ht = self.column_h_dim(tkey)
            ker, _ = self._column_h(key)
            _, im_t = self._column_h(tkey)
            shifted = []
            for vec in ker:
                out = {}
                for idx, v in vec.items():
                    m, p = _cell_of(cells, offset, idx, self.mixed.base)
                    ti = toffset[(m, p + 1)] + (idx - offset[(m, p)])
                    out[ti] = v
                shifted.append(out)
            r = quotient_rank(shifted, im_t, ttotal)
            if not (hs == ht == r):
                failures.append((key, hs, ht, r))
        return (not failures, failures)


def _cell_of(cells, offset, idx, base):
    for (m, p) in reversed(cells):
        if idx >= offset[(m, p)]:
            return (m, p)
    raise IndexError(idx)


def _attribute_quotient(ker, im, dim):
    """Dims of ker/im attributed to the echelon pivot index of each class."""
    reducer = _EchelonReducer()
    for v in im:
        reducer.add(dict(v))
    out = {}
    for v in ker:
        lead = reducer.add(dict(v))
        if lead is not None:
            out[lead] = out.get(lead, 0) + 1
    return out


class _EchelonReducer:
    def __init__(self):
        self.rows = {}  # pivot index -> row dict (pivot scaled to 1)

    def add(self, vec):
        while vec:
            lead = min(vec.keys())
            if lead in self.rows:
                coef = vec[lead]
                row = self.rows[lead]
                for c, v in row.items():
                    s = vec.get(c, 0) - coef * v
                    if is_zero(s):
                        vec.pop(c, None)
                    else:
                        vec[c] = s
            else:
                pivot = vec[lead]
                self.rows[lead] = {c: _div(v, pivot) for c, v in vec.items()}
                return lead
        return None


def _div(a, b):
    if isinstance(a, int):
        a = Fraction(a)
    return a / b


# ---------------------------------------------------------------------------
# the S^1 functors
# ---------------------------------------------------------------------------

def s1_invariants_level(V: MixedComplex, n: int) -> USeriesComplex:
    """Level n of the filtered limit for invariants: (V[u]/u^n, d + u eps)."""
    if n < 1:
        raise ValueError("level must be >= 1")
    return USeriesComplex(V, "invariants", (0, n - 1))


def coinvariants(V: MixedComplex, u_window: int) -> USeriesComplex:
    return USeriesComplex(V, "coinvariants", (-u_window, 0))


def tate(V: MixedComplex, u_window: int) -> USeriesComplex:
    return USeriesComplex(V, "tate", (-u_window, u_window))


def oplus_tate(V: MixedComplex, u_window: int) -> USeriesComplex:
    out = USeriesComplex(V, "oplus-tate", (-u_window, u_window))
    out.require_bounded()
    return out


def prod_tate(V: MixedComplex, u_window: int) -> USeriesComplex:
    out = USeriesComplex(V, "prod-tate", (-u_window, u_window))
    out.require_bounded()
    return out


def connes_periodicity_check(V: MixedComplex, u_window: int):
    """u-multiplication is bijective between in-window Tate cohomology bins."""
    t = tate(V, u_window)
    return t.u_map_bijective()


def useries_induced_iso(us_src: USeriesComplex, us_tgt: USeriesComplex, F):
    """The u-linear extension of a chain map induces isomorphisms columnwise.

    F must commute with both differentials (checked elsewhere); columns that
    are edge on either side are skipped.  Returns (ok, failures).
    """
    if (us_src.flavor, us_src.p_lo, us_src.p_hi) != (us_tgt.flavor, us_tgt.p_lo, us_tgt.p_hi):
        raise ValueError("flavor/window mismatch")
    failures = []
    keys = set(us_src.columns()) | set(us_tgt.columns())
    for key in sorted(keys):
        if us_src._column_is_edge(key) or us_tgt._column_is_edge(key):
            continue
        s_cells, s_off, s_total = us_src._column_basis(key)
        t_cells, t_off, t_total = us_tgt._column_basis(key)
        ent = {}
        for (m, p) in s_cells:
            blk = F.blocks.get(m)
            if blk is None:
                continue
            if (m, p) not in t_off:
                continue
            for (i, j), v in blk.entries.items():
                ent[(t_off[(m, p)] + i, s_off[(m, p)] + j)] = v
        Fcol = SparseMatrix(t_total, s_total, ent)
        ker_s, _ = us_src._column_h(key)
        _, im_t = us_tgt._column_h(key)
        hs = us_src.column_h_dim(key)
        ht = us_tgt.column_h_dim(key)
        images = [apply_matrix(Fcol, v) for v in ker_s]
        r = quotient_rank(images, im_t, t_total)
        if not (hs == ht == r):
            failures.append((key, hs, ht, r))
    return (not failures, failures)


# ---------------------------------------------------------------------------
# built-in additive-group presets (for the unipotent-vs-formal check)
# ---------------------------------------------------------------------------

def bga_polynomial_preset(aux_max: int) -> MixedComplex:
    """k[x, eta] with eps = eta d/dx: functions on the unipotent loops of the
    classifying stack of the additive group.  x has weight -1 (the
    contracting scaling action), eta sits in cohdeg -1 with weight -1."""
    from .algebra import FreeAlgebra, Generator
    from .models import SemifreeModel

    alg = FreeAlgebra(
        [
            Generator("x", 0, (-1,), 1),
            Generator("eta", -1, (-1,), 1),
        ],
        1,
    )
    model = SemifreeModel(alg, {}, eps_images={"x": alg.poly_gen("eta")})
    model.check_symbolic()
    return model.instantiate(aux_max)


def bga_completed_preset(aux_max: int, truncation: int) -> MixedComplex:
    """The x-adically completed preset, represented by truncation at x^D.

    Bins with aux >= truncation are edge: they are artifacts of representing
    the power series ring by a finite quotient.
    """
    if truncation > aux_max:
        raise ValueError("truncation must lie inside the aux window")
    full = bga_polynomial_preset(aux_max)
    bins = {m: ls for m, ls in full.base.bins.items() if m.aux < truncation}
    diffs = {
        m: d for m, d in full.base.diffs.items()
        if m.aux < truncation and full.base.d_target(m).aux < truncation
    }
    eps = {
        m: e for m, e in full.eps.items()
        if m.aux < truncation and m.shift(cohdeg=-1).aux < truncation
    }
    # everything at or beyond the truncation frontier is unrepresented
    edge = {m for m in full.base.bins if m.aux >= truncation - 1}
    win = full.base.window
    gc = GradedComplex(bins, diffs, win, edge)
    return MixedComplex(gc, eps)


# ---------------------------------------------------------------------------
# randomized law-suite instances
# ---------------------------------------------------------------------------

def random_mixed_complex(seed: int, rank: int = 1) -> MixedComplex:
    """Small random mixed complex built from law-preserving blocks and a
    random change of basis; used by the structural law suite."""
    rng = random.Random(seed)
    from .complexes import GradedComplex

    pieces = []
    for _ in range(rng.randint(1, 3)):
        kind = rng.choice(["point", "acyclic", "epspair", "chain"])
        i = rng.randint(-2, 1)
        w = tuple(rng.randint(-1, 1) for _ in range(rank))
        a = rng.randint(0, 2)
        m = Multidegree(i, w, a, 0)
        win = Window((-6, 6), tuple((-4, 4) for _ in range(rank)), (0, 6))
        if kind == "point":
            gc = GradedComplex({m: ["v"]}, {}, win)
            pieces.append(MixedComplex(gc, {}))
        elif kind == "acyclic":
            m2 = m.shift(cohdeg=1)
            c = Fraction(rng.randint(1, 3))
            gc = GradedComplex(
                {m: ["v"], m2: ["dv"]},
                {m: SparseMatrix(1, 1, {(0, 0): c})},
                win,
            )
            pieces.append(MixedComplex(gc, {}))
        elif kind == "epspair":
            m2 = m.shift(cohdeg=-1)
            c = Fraction(rng.randint(1, 3))
            gc = GradedComplex({m: ["v"], m2: ["ev"]}, {}, win)
            pieces.append(MixedComplex(gc, {m: SparseMatrix(1, 1, {(0, 0): c})}))
        else:
            # x, eta, x*eta, 1 fragment of the additive-group preset shape
            m0 = Multidegree(0, w, a, 0)
            m1 = Multidegree(-1, w, a, 0)
            gc = GradedComplex({m0: ["x"], m1: ["eta"]}, {}, win)
            pieces.append(
                MixedComplex(gc, {m0: SparseMatrix(1, 1, {(0, 0): Fraction(rng.randint(1, 2))})})
            )
    total = pieces[0]
    for p in pieces[1:]:
        total = direct_sum(total, p)
    return _random_basis_change(total, rng)


def _random_basis_change(V: MixedComplex, rng) -> MixedComplex:
    from .linalg import rank as mat_rank

    S = {}
    Sinv = {}
    for m in V.base.bins:
        n = V.base.dim(m)
        while True:
            rows = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
            M = SparseMatrix.from_rows(rows)
            if mat_rank(M) == n:
                break
        S[m] = M
        Sinv[m] = _matrix_inverse(M)
    diffs = {}
    for m in V.base.bins:
        d = V.base.diff_from(m)
        tgt = V.base.d_target(m)
        if not d.is_zero_matrix():
            diffs[m] = S.get(tgt, SparseMatrix.identity(d.nrows)) @ d @ Sinv[m]
    eps = {}
    for m in V.base.bins:
        e = V.eps_from(m)
        tgt = m.shift(cohdeg=-1)
        if not e.is_zero_matrix():
            eps[m] = S.get(tgt, SparseMatrix.identity(e.nrows)) @ e @ Sinv[m]
    gc = GradedComplex(V.base.bins, diffs, V.base.window, V.base.edge, V.base.aux_shift)
    return MixedComplex(gc, eps)


def _matrix_inverse(M: SparseMatrix) -> SparseMatrix:
    from .linalg import rref

    n = M.nrows
    aug = M.hstack(SparseMatrix.identity(n))
    pivot_cols, rows = rref(aug)
    if pivot_cols != list(range(n)):
        raise ValueError("matrix not invertible")
    ent = {}
    for r, row in enumerate(rows):
        for c, v in row.items():
            if c >= n:
                ent[(r, c - n)] = v
    return SparseMatrix(n, n, ent)
