"""Semifree dg-algebra models for weight-graded affine quotient presentations.

Builds the Koszul resolution model, the loop-space model with Laurent group
coordinates (d eps_i = (w^{lambda_i} - 1) x_i), and the Cartan / odd-tangent
model (d dx_i = <lambda_i, xi> x_i with mixed differential the de Rham
operator), plus classical fixed loci and the finite stabilizer-subgroup
analysis for linear torus actions.

Conventions fixed here once:
  * right coaction c(x_i) = x_i (x) w^{lambda_i}; the loop differential is
    (w^{lambda_i} - 1) x_i.
  * the Lie coordinates xi_l carry weight 0 and one unit of aux, so the
    Cartan differential is homogeneous of aux-degree +1 (declared shift).
  * the de Rham mixed differential and the Cartan differential anticommute
    up to the weight (Euler) operator, hence exactly on weight-0 parts;
    models record this and the engine only uses Cartan mixed structures on
    invariant subcomplexes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra import Derivation, FreeAlgebra, Generator, Polynomial, enumerate_monomials
from .grading import Multidegree, Window
from .linalg import SparseMatrix
from .scalars import BackendMismatch, coerce, is_zero


# ---------------------------------------------------------------------------
# torus data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusData:
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be >= 0")


@dataclass(frozen=True)
class TorusPoint:
    """Point of G_m^r with coordinates q_j * exp(2 pi i theta_j), exact.

    Stored as pairs (q_j, theta_j) with q_j a nonzero rational and theta_j a
    rational mod 1.  Character evaluation happens in Q^x times Q/Z, so
    equality with 1 is decided exactly.
    """

    coords: tuple  # of (Fraction q, Fraction theta in [0,1))

    @staticmethod
    def make(values) -> "TorusPoint":
        out = []
        for v in values:
            if isinstance(v, tuple):
                q, theta = v
            else:
                q, theta = v, 0
            q = Fraction(q)
            if q == 0:
                raise ValueError("torus point coordinate must be nonzero")
            theta = Fraction(theta) % 1
            out.append((q, theta))
        return TorusPoint(tuple(out))

    @property
    def rank(self):
        return len(self.coords)

    def character_value(self, lam):
        """lambda(z) in the value group Q^x x (Q/Z)."""
        q = Fraction(1)
        theta = Fraction(0)
        for (qj, tj), lj in zip(self.coords, lam):
            q *= qj ** lj
            theta += lj * tj
        return q, theta % 1

    def character_is_one(self, lam) -> bool:
        q, theta = self.character_value(lam)
        return q == 1 and theta == 0

    def conductor(self) -> int:
        c = 1
        for _, theta in self.coords:
            if theta:
                c = c * theta.denominator // math.gcd(c, theta.denominator)
        return c

    def coordinate_scalar(self, j, backend):
        """z_j as a scalar in the given backend (None = rational)."""
        q, theta = self.coords[j]
        if theta == 0:
            return coerce(q, backend)
        if backend is None:
            raise BackendMismatch(
                "root-of-unity torus point requires the cyclotomic backend"
            )
        m = backend.conductor
        if (theta * m).denominator != 1:
            raise BackendMismatch(
                f"conductor {m} does not realize theta={theta}"
            )
        return backend.zeta(int(theta * m)) * backend.from_rational(q)

    def character_scalar(self, lam, backend):
        val = None
        for j, lj in enumerate(lam):
            if not lj:
                continue
            zj = self.coordinate_scalar(j, backend)
            p = zj if lj > 0 else 1 / zj
            for _ in range(abs(lj) - 1):
                p = p * (zj if lj > 0 else 1 / zj)
            val = p if val is None else val * p
        if val is None:
            return coerce(1, backend)
        return val


def identity_point(rank: int) -> TorusPoint:
    return TorusPoint.make([(Fraction(1), Fraction(0))] * rank)


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------

@dataclass
class AmbientGenerator:
    name: str
    weight: tuple
    aux: int


class AlgebraPresentation:
    """Weight-graded affine presentation: ambient generators plus relations."""

    def __init__(self, generators, relations=(), rank=None,
                 asserted_regular_sequence=False, asserted_smooth=False):
        self.generators = [
            AmbientGenerator(n, tuple(w), a) for (n, w, a) in generators
        ]
        if rank is None:
            rank = len(self.generators[0].weight) if self.generators else 0
        self.rank = rank
        for g in self.generators:
            if len(g.weight) != rank:
                raise ValueError(f"generator {g.name}: weight length != rank {rank}")
            if g.aux < 1:
                raise ValueError(f"generator {g.name}: ambient aux must be >= 1")
        self.asserted_regular_sequence = asserted_regular_sequence
        self.asserted_smooth = asserted_smooth
        self.ambient = FreeAlgebra(
            [Generator(g.name, 0, g.weight, g.aux) for g in self.generators],
            rank,
        )
        self.relations: list[Polynomial] = []
        for rel in relations:
            self.add_relation(rel)

    def add_relation(self, poly: Polynomial):
        if poly.alg is not self.ambient:
            poly = lift_poly(poly, self.ambient)
        if poly.is_zero():
            return
        if poly.homogeneous_degree() is None:
            raise ValueError(f"relation {poly!r} is not weight/aux homogeneous")
        self.relations.append(poly)

    def gen_names(self):
        return [g.name for g in self.generators]

    def relation_support(self) -> set:
        names = set()
        for rel in self.relations:
            for m in rel.terms:
                for e, g in zip(m, self.ambient.gens):
                    if e:
                        names.add(g.name)
        return names

    def bare_relation_names(self) -> set:
        """Generators cut out by a bare linear relation c * x_i."""
        out = set()
        for rel in self.relations:
            if len(rel.terms) != 1:
                continue
            (m,) = rel.terms
            nz = [(i, e) for i, e in enumerate(m) if e]
            if len(nz) == 1 and nz[0][1] == 1:
                out.add(self.ambient.gens[nz[0][0]].name)
        return out


def lift_poly(poly: Polynomial, new_alg: FreeAlgebra) -> Polynomial:
    """Transplant a polynomial into a larger algebra, matching generator names."""
    src = poly.alg
    pos = []
    for g in src.gens:
        if g.name not in new_alg.index:
            pos.append(None)
        else:
            pos.append(new_alg.index[g.name])
    out = {}
    for m, c in poly.terms.items():
        exps = [0] * len(new_alg.gens)
        for e, p, g in zip(m, pos, src.gens):
            if not e:
                continue
            if p is None:
                raise ValueError(f"generator {g.name} missing in target algebra")
            exps[p] = e
        out[tuple(exps)] = c
    return Polynomial(new_alg, out)


def fixed_points(P: AlgebraPresentation, z: TorusPoint) -> AlgebraPresentation:
    """Presentation of the classical fixed locus pi_0(X^z).

    Adds the relation x_i for every generator whose weight character is
    nontrivial at z; existing relations are retained; the weight lattice is
    unchanged (for diagonalizable G the centralizer is G itself).
    """
    if z.rank != P.rank:
        raise ValueError("torus point rank mismatch")
    Q = AlgebraPresentation(
        [(g.name, g.weight, g.aux) for g in P.generators],
        rank=P.rank,
        asserted_regular_sequence=P.asserted_regular_sequence,
        asserted_smooth=P.asserted_smooth,
    )
    for rel in P.relations:
        Q.add_relation(lift_poly(rel, Q.ambient))
    existing_bare = Q.bare_relation_names()
    for g in P.generators:
        if not z.character_is_one(g.weight) and g.name not in existing_bare:
            Q.add_relation(Q.ambient.poly_gen(g.name))
    return Q


def reduce_linear_relations(P: AlgebraPresentation) -> AlgebraPresentation:
    """Quotient out bare linear relations: drop those generators entirely.

    Remaining relations are reduced modulo the killed generators.
    """
    killed = P.bare_relation_names()
    if not killed:
        return P
    keep = [(g.name, g.weight, g.aux) for g in P.generators if g.name not in killed]
    Q = AlgebraPresentation(
        keep, rank=P.rank,
        asserted_regular_sequence=P.asserted_regular_sequence,
        asserted_smooth=P.asserted_smooth,
    )
    killed_idx = {P.ambient.index[n] for n in killed}
    for rel in P.relations:
        terms = {}
        for m, c in rel.terms.items():
            if any(m[i] for i in killed_idx):
                continue
            terms[m] = c
        red = Polynomial(P.ambient, terms)
        if red.is_zero():
            continue
        Q.add_relation(lift_poly(red, Q.ambient))
    return Q


# ---------------------------------------------------------------------------
# semifree models
# ---------------------------------------------------------------------------

GROUP_COORD = "w{}"
LIE_COORD = "xi{}"


class SemifreeModel:
    """Free graded-commutative dg algebra with differential on generators.

    `eps_images`, when present, is the mixed differential as a derivation.
    `mixed_weight_zero_only` records that d and eps anticommute only up to
    the weight operator (torus Cartan models); such mixed structures are
    used exclusively on weight-0 subcomplexes.
    """

    def __init__(self, alg: FreeAlgebra, d_images, eps_images=None,
                 aux_shift_d=0, mixed_weight_zero_only=False,
                 laurent_names=(), backend=None):
        self.alg = alg
        self.d = Derivation(alg, d_images)
        self.eps = Derivation(alg, eps_images) if eps_images is not None else None
        self.aux_shift_d = aux_shift_d
        self.mixed_weight_zero_only = mixed_weight_zero_only
        self.laurent_names = tuple(laurent_names)
        self.backend = backend
        for n in self.laurent_names:
            if n in self.d.images or (self.eps and n in self.eps.images):
                raise ValueError("laurent coordinates must be closed")

    # -- symbolic validation ---------------------------------------------------
    def check_symbolic(self):
        for name, img in self.d.images.items():
            g = self.alg.gens[self.alg.index[name]]
            deg = img.homogeneous_degree()
            if deg is None:
                raise ValueError(f"d({name}) not homogeneous")
            want = Multidegree(g.cohdeg + 1, g.weight, g.aux + self.aux_shift_d, 0)
            if deg != want:
                raise ValueError(f"d({name}) has degree {deg}, expected {want}")
            if not self.d.apply(img).is_zero():
                raise ValueError(f"d^2 != 0 on generator {name}")
        if self.eps is not None:
            for name, img in self.eps.images.items():
                g = self.alg.gens[self.alg.index[name]]
                deg = img.homogeneous_degree()
                want = Multidegree(g.cohdeg - 1, g.weight, g.aux, 0)
                if deg != want:
                    raise ValueError(f"eps({name}) has degree {deg}, expected {want}")
                if not self.eps.apply(img).is_zero():
                    raise ValueError(f"eps^2 != 0 on generator {name}")
            self._check_anticommute()
        return True

    def _check_anticommute(self):
        for name in set(self.d.images) | set(self.eps.images):
            g = self.alg.poly_gen(name)
            comm = self.d.apply(self.eps.apply(g)) + self.eps.apply(self.d.apply(g))
            if self.mixed_weight_zero_only:
                gen = self.alg.gens[self.alg.index[name]]
                # Euler identity: [d, eps] = <weight, xi> on each generator
                expected = self.alg.poly()
                for l in range(self.alg.rank):
                    wl = gen.weight[l]
                    if wl:
                        xi = self.alg.poly_gen(LIE_COORD.format(l))
                        expected = expected + (xi * g).scaled(wl)
                if not (comm - expected).is_zero():
                    raise ValueError(f"[d,eps] != weight operator on {name}")
            else:
                if not comm.is_zero():
                    raise ValueError(f"d eps + eps d != 0 on generator {name}")

    # -- instantiation -----------------------------------------------------------
    def laurent_shift_bound(self) -> int:
        """Max |Laurent exponent| occurring in any d/eps image term."""
        idxs = [self.alg.index[n] for n in self.laurent_names]
        s = 0
        imgs = list(self.d.images.values())
        if self.eps is not None:
            imgs += list(self.eps.images.values())
        for poly in imgs:
            for m in poly.terms:
                for i in idxs:
                    s = max(s, abs(m[i]))
        return s

    def instantiate(self, aux_max, laurent_cap=None, weight_filter=None):
        """Enumerate bins and assemble differential/mixed matrices.

        Returns a MixedComplex (with zero eps when the model carries none).
        """
        from .mixed import MixedComplex

        enum = enumerate_monomials(
            self.alg, aux_max, laurent_cap=laurent_cap, weight_filter=weight_filter
        )
        bins = enum.bins
        pos = {m: {lbl: i for i, lbl in enumerate(ls)} for m, ls in bins.items()}
        edge: set[Multidegree] = set()

        def assemble(deriv: Derivation, cohshift: int, auxshift: int):
            mats = {}
            for mdeg, labels in bins.items():
                tgt = mdeg.shift(cohdeg=cohshift, aux=auxshift)
                ent = {}
                touched = False
                for j, mono in enumerate(labels):
                    img = deriv.apply_monomial(mono)
                    for tm, c in img.terms.items():
                        ti = pos.get(tgt, {}).get(tm)
                        if ti is None:
                            touched = True
                            continue
                        ent[(ti, j)] = ent.get((ti, j), 0) + c
                if touched:
                    edge.add(mdeg)
                    edge.add(tgt)
                if ent:
                    mats[mdeg] = SparseMatrix(
                        len(bins.get(tgt, ())), len(labels),
                        {k: v for k, v in ent.items() if not is_zero(v)},
                    )
            return mats

        diffs = assemble(self.d, 1, self.aux_shift_d)
        eps_mats = assemble(self.eps, -1, 0) if self.eps is not None else {}

        # Laurent cap shield: bins holding monomials near the cap may receive
        # maps from beyond the cap.  Laurent generators are d-closed, so the
        # exponent-shift pattern is translation invariant and the realized
        # shifts of the assembled matrices bound the unseen ones.
        if enum.laurent_caps:
            idxs = [self.alg.index[n] for n in self.laurent_names]
            s_real = 0
            for mats, cshift, ashift in (
                (diffs, 1, self.aux_shift_d),
                (eps_mats, -1, 0),
            ):
                for mdeg, mat in mats.items():
                    src = bins[mdeg]
                    tgt = bins.get(mdeg.shift(cohdeg=cshift, aux=ashift), [])
                    for (i, j) in mat.entries:
                        for k in idxs:
                            s_real = max(s_real, abs(tgt[i][k] - src[j][k]))
            if s_real:
                cap = min(enum.laurent_caps.values())
                for mdeg, labels in bins.items():
                    for mono in labels:
                        if any(abs(mono[i]) > cap - s_real for i in idxs):
                            edge.add(mdeg)
                            break

        window = self._window_for(bins, aux_max, weight_filter)
        from .complexes import GradedComplex

        gc = GradedComplex(bins, diffs, window, edge, aux_shift=self.aux_shift_d)
        return MixedComplex(gc, eps_mats)

    def _window_for(self, bins, aux_max, weight_filter):
        if bins:
            cohs = [m.cohdeg for m in bins]
            clo, chi = min(cohs) - 1, max(cohs) + 1
        else:
            clo, chi = -1, 1
        r = self.alg.rank
        if weight_filter is not None:
            wr = tuple((w, w) for w in weight_filter)
        elif bins:
            wr = tuple(
                (min(m.weight[k] for m in bins), max(m.weight[k] for m in bins))
                for k in range(r)
            )
        else:
            wr = ((0, 0),) * r
        return Window((clo, chi), wr, (0, aux_max), (0, 0))

    # -- coefficient contexts -------------------------------------------------
    def at_torus_point_level(self, z: TorusPoint, n: int, backend=None) -> "SemifreeModel":
        """Base change along k[w..] -> k[t..]/(t^n), t_j = w_j - z_j.

        Valid because the model is a free module over its Laurent coordinate
        ring; this computes the same cohomology as tensoring with the Koszul
        complex on (w_j - z_j)^n, with finite bins.
        """
        if n < 1:
            raise ValueError("level must be >= 1")
        lnames = list(self.laurent_names)
        if len(lnames) != z.rank:
            raise ValueError("torus point rank mismatch with group coordinates")
        tnames = [f"t{j}" for j in range(z.rank)]
        new_gens = []
        for g in self.alg.gens:
            if g.name in lnames:
                j = lnames.index(g.name)
                new_gens.append(
                    Generator(tnames[j], 0, (0,) * self.alg.rank, 0, exp_range=(0, n - 1))
                )
            else:
                new_gens.append(g)
        new_alg = FreeAlgebra(new_gens, self.alg.rank)

        zvals = [z.coordinate_scalar(j, backend) for j in range(z.rank)]

        def trunc_mul(a, b):
            # multiply truncated univariate t-polynomials (lists, len <= n)
            out = [coerce(0, backend)] * min(n, len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if is_zero(x):
                    continue
                for j2, y in enumerate(b):
                    if i + j2 >= n or is_zero(y):
                        continue
                    out[i + j2] = out[i + j2] + x * y
            return out

        def w_power(j, e):
            # (z_j + t_j)^e mod t^n as a coefficient list
            one = [coerce(1, backend)]
            if e == 0:
                return one
            zj = zvals[j]
            base = [zj, coerce(1, backend)]  # z + t
            if e < 0:
                # (z + t)^-1 = z^-1 sum (-t/z)^i
                inv = []
                zinv = 1 / zj if not isinstance(zj, Fraction) else Fraction(1) / zj
                acc = zinv
                for i in range(n):
                    inv.append(acc)
                    acc = acc * (-1) * zinv
                base = inv
                e = -e
            out = one
            for _ in range(e):
                out = trunc_mul(out, base)
            return out

        lidx = {self.alg.index[nm]: lnames.index(nm) for nm in lnames}
        tidx = {j: new_alg.index[tnames[j]] for j in range(z.rank)}

        def subst(poly: Polynomial) -> Polynomial:
            out = new_alg.poly()
            for m, c in poly.terms.items():
                coeff_list = [coerce(c, backend)]
                base_exps = [0] * len(new_alg.gens)
                for i, e in enumerate(m):
                    if not e:
                        continue
                    if i in lidx:
                        coeff_list = trunc_mul(coeff_list, w_power(lidx[i], e))
                    else:
                        base_exps[new_alg.index[self.alg.gens[i].name]] = e
                add = {}
                for tdeg, cv in self._spread_t(coeff_list, base_exps, tidx, n):
                    add[tdeg] = cv
                out = out + Polynomial(new_alg, add)
            return out

        d_images = {nm: subst(p) for nm, p in self.d.images.items()}
        eps_images = (
            {nm: subst(p) for nm, p in self.eps.images.items()}
            if self.eps is not None
            else None
        )
        return SemifreeModel(
            new_alg, d_images, eps_images,
            aux_shift_d=self.aux_shift_d,
            mixed_weight_zero_only=self.mixed_weight_zero_only,
            laurent_names=(), backend=backend,
        )

    @staticmethod
    def _spread_t(coeff_list, base_exps, tidx, n):
        # distribute a univariate truncated t-polynomial (rank-1 case) or a
        # scalar (rank-0) onto monomials.  Multivariate points are handled by
        # iterated single-variable expansion, so coeff_list is univariate in
        # the sole t index when rank == 1.
        if len(tidx) == 0:
            c = coeff_list[0]
            if not is_zero(c):
                yield tuple(base_exps), c
            return
        if len(tidx) == 1:
            (j, pos), = tidx.items()
            for e, c in enumerate(coeff_list):
                if is_zero(c):
                    continue
                exps = list(base_exps)
                exps[pos] = e
                yield tuple(exps), c
            return
        raise NotImplementedError("torus rank > 1 completion points")


# ---------------------------------------------------------------------------
# model constructors
# ---------------------------------------------------------------------------

def koszul_model(P: AlgebraPresentation) -> SemifreeModel:
    """Koszul resolution: one eta_j of cohdeg -1 per relation, d(eta_j) = f_j."""
    gens = [Generator(g.name, 0, g.weight, g.aux) for g in P.generators]
    for j, rel in enumerate(P.relations):
        deg = rel.homogeneous_degree()
        gens.append(Generator(f"eta{j}", -1, deg.weight, deg.aux))
    alg = FreeAlgebra(gens, P.rank)
    d_images = {f"eta{j}": lift_poly(rel, alg) for j, rel in enumerate(P.relations)}
    return SemifreeModel(alg, d_images)


def regularity_evidence(model: SemifreeModel, aux_max: int):
    """Nonzero negative-degree bins of a Koszul model.

    Empty for a regular sequence (within the window); nonempty output is
    evidence against the asserted_regular_sequence flag.
    """
    t = model.instantiate(aux_max).cohomology()
    return sorted(m for m, v in t.values.items() if m.cohdeg < 0 and v and t.known(m))


def loop_model(P: AlgebraPresentation, T: TorusData) -> SemifreeModel:
    """Model of functions on the derived loop space, before invariants.

    Generators: ambient x_i; loop variables eps_i (cohdeg -1, same
    weight/aux); Koszul eta_j for relations; Laurent group coordinates w_l.
    d(eps_i) = (w^{lambda_i} - 1) x_i and d(eta_j) = f_j.  Invariant
    functions are the weight-0 part.
    """
    if T.rank != P.rank:
        raise ValueError("torus rank mismatch")
    gens = [Generator(g.name, 0, g.weight, g.aux) for g in P.generators]
    gens += [Generator(f"eps_{g.name}", -1, g.weight, g.aux) for g in P.generators]
    for j, rel in enumerate(P.relations):
        deg = rel.homogeneous_degree()
        gens.append(Generator(f"eta{j}", -1, deg.weight, deg.aux))
    wnames = [GROUP_COORD.format(l) for l in range(T.rank)]
    gens += [Generator(n, 0, (0,) * P.rank, 0, laurent=True) for n in wnames]
    alg = FreeAlgebra(gens, P.rank)

    d_images = {}
    for g in P.generators:
        lam = g.weight
        wmono = [0] * len(alg.gens)
        for l, wl in enumerate(lam):
            wmono[alg.index[wnames[l]]] = wl
        coeff = Polynomial(alg, {tuple(wmono): Fraction(1)}) - alg.poly_scalar(1)
        d_images[f"eps_{g.name}"] = coeff * alg.poly_gen(g.name)
    for j, rel in enumerate(P.relations):
        d_images[f"eta{j}"] = lift_poly(rel, alg)

    model = SemifreeModel(alg, d_images, laurent_names=wnames)
    _attach_de_rham(model, P)
    return model


def _attach_de_rham(model: SemifreeModel, P: AlgebraPresentation):
    """Attach eps = de Rham on the largest generator set where it is exact.

    Start from all ambient generators whose loop differential vanishes
    identically, drop any generator appearing in a relation, and verify the
    anticommutation symbolically; offending generators are removed until the
    check passes.  The fallback is the zero mixed structure (exact on
    cohomology for complexes concentrated in one degree).
    """
    alg = model.alg
    support = set()
    for g in P.generators:
        img = model.d.images.get(f"eps_{g.name}")
        if img is None or img.is_zero():
            support.add(g.name)
    support -= P.relation_support()
    while True:
        eps_images = {n: alg.poly_gen(f"eps_{n}") for n in sorted(support)}
        eps = Derivation(alg, eps_images)
        failed = []
        for name in set(model.d.images) | set(eps.images):
            gpoly = alg.poly_gen(name)
            comm = model.d.apply(eps.apply(gpoly)) + eps.apply(model.d.apply(gpoly))
            if not comm.is_zero():
                failed.append(name)
        if not failed:
            model.eps = eps
            return
        bad = set()
        for name in failed:
            base = name.removeprefix("eps_")
            if base in support:
                bad.add(base)
            elif name in support:
                bad.add(name)
        support = (support - bad) if bad else set()


def derived_fiber_model(P: AlgebraPresentation, T: TorusData, z: TorusPoint,
                        backend=None) -> SemifreeModel:
    """Loop model specialized at w = z (tower level 1): the derived z-fiber."""
    model = loop_model(P, T)
    fiber = model.at_torus_point_level(z, 1, backend=backend)
    # re-derive the de Rham support in the specialized context
    _attach_de_rham(fiber, P)
    return fiber


def odd_tangent_model(P: AlgebraPresentation) -> SemifreeModel:
    """Forms on X placed in negative degrees (HKR), keeping the weight lattice.

    No group/Lie coordinates: d = 0 and the mixed differential is de Rham.
    This is the plain odd tangent bundle oracle for fixed loci and bar
    comparisons.
    """
    P = reduce_linear_relations(P)
    if P.relations:
        raise ValueError("odd_tangent_model requires a smooth (relation-free) presentation")
    gens = [Generator(g.name, 0, g.weight, g.aux) for g in P.generators]
    gens += [Generator(f"d{g.name}", -1, g.weight, g.aux) for g in P.generators]
    alg = FreeAlgebra(gens, P.rank)
    eps_images = {g.name: alg.poly_gen(f"d{g.name}") for g in P.generators}
    return SemifreeModel(alg, {}, eps_images)


def cartan_model(P: AlgebraPresentation, T: TorusData) -> SemifreeModel:
    """Cartan / odd-tangent model (Sym g^* (x) forms, Cartan differential).

    Forms dx_i sit in cohdeg -1 with the weight/aux of x_i; Lie coordinates
    xi_l sit in cohdeg 0, weight 0, aux 1.  d(dx_i) = <lambda_i, xi> x_i; the
    mixed differential is de Rham x_i -> dx_i.  Presentations are reduced
    along bare linear relations first; other relations are not supported
    (smoothness hypothesis).
    """
    if T.rank != P.rank:
        raise ValueError("torus rank mismatch")
    P = reduce_linear_relations(P)
    if P.relations:
        raise ValueError("cartan_model requires a smooth (relation-free) presentation")
    gens = [Generator(g.name, 0, g.weight, g.aux) for g in P.generators]
    gens += [Generator(f"d{g.name}", -1, g.weight, g.aux) for g in P.generators]
    xnames = [LIE_COORD.format(l) for l in range(T.rank)]
    gens += [Generator(n, 0, (0,) * P.rank, 1) for n in xnames]
    alg = FreeAlgebra(gens, P.rank)
    d_images = {}
    for g in P.generators:
        acc = alg.poly()
        for l, wl in enumerate(g.weight):
            if wl:
                acc = acc + (alg.poly_gen(xnames[l]) * alg.poly_gen(g.name)).scaled(wl)
        if not acc.is_zero():
            d_images[f"d{g.name}"] = acc
    eps_images = {g.name: alg.poly_gen(f"d{g.name}") for g in P.generators}
    return SemifreeModel(
        alg, d_images, eps_images,
        aux_shift_d=1 if T.rank else 0,
        mixed_weight_zero_only=T.rank > 0,
    )


# ---------------------------------------------------------------------------
# stabilizer analysis
# ---------------------------------------------------------------------------

def _hermite_normal_form(rows, r):
    """Row-style HNF of an integer matrix (list of length-r rows)."""
    mat = [list(row) for row in rows if any(row)]
    out = []
    col = 0
    while mat and col < r:
        cand = [row for row in mat if row[col]]
        if not cand:
            col += 1
            continue
        # reduce the column by gcd steps
        while True:
            cand = sorted((row for row in mat if row[col]), key=lambda rw: abs(rw[col]))
            if len(cand) <= 1:
                break
            a = cand[0]
            changed = False
            for row in cand[1:]:
                q = row[col] // a[col]
                if q:
                    for k in range(r):
                        row[k] -= q * a[k]
                    changed = True
            mat = [row for row in mat if any(row)]
            if not changed:
                break
        pivot_rows = [row for row in mat if row[col]]
        if pivot_rows:
            p = pivot_rows[0]
            if p[col] < 0:
                for k in range(r):
                    p[k] = -p[k]
            mat.remove(p)
            mat = [row for row in mat if not row[col] or _reduce_row(row, p, col, r)]
            mat = [row for row in mat if any(row)]
            # reduce earlier pivots above this one
            for prev in out:
                q = prev[col] // p[col]
                if q:
                    for k in range(r):
                        prev[k] -= q * p[k]
            out.append(p)
        col += 1
    return tuple(tuple(row) for row in out)


def _reduce_row(row, pivot, col, r):
    q = row[col] // pivot[col]
    for k in range(r):
        row[k] -= q * pivot[k]
    return True


@dataclass(frozen=True)
class SubgroupDescriptor:
    """Solution set of character equations {w^lambda = 1 : lambda in lattice}.

    Canonicalized by the Hermite normal form of the character sublattice, so
    two subsets of weights cutting out the same subgroup compare equal.
    """

    rank: int
    equations: tuple  # HNF rows generating the character lattice

    def contains(self, z: TorusPoint) -> bool:
        return all(z.character_is_one(lam) for lam in self.equations)

    @property
    def dimension(self) -> int:
        return self.rank - len(self.equations)

    def describe(self) -> str:
        if not self.equations:
            return "full torus"
        if self.rank == 1:
            d = abs(self.equations[0][0])
            return "trivial" if d == 1 else f"mu_{d}"
        if len(self.equations) == self.rank and all(
            self.equations[i][i] == 1 and all(v == 0 for j, v in enumerate(self.equations[i]) if j > i)
            for i in range(self.rank)
        ):
            return "trivial"
        return f"dim {self.dimension} lattice {self.equations}"

    def __str__(self):
        return self.describe()


def stabilizer_subgroups(T: TorusData, weights) -> list[SubgroupDescriptor]:
    """All subgroups arising as intersections of character kernels.

    Enumerates subsets of the weight set (the possible pointwise stabilizers
    of the linear action) and deduplicates by the lattice they generate.
    """
    weights = [tuple(w) for w in weights]
    seen = {}
    for mask in range(1 << len(weights)):
        subset = [weights[i] for i in range(len(weights)) if mask >> i & 1]
        hnf = _hermite_normal_form(subset, T.rank)
        if hnf not in seen:
            seen[hnf] = SubgroupDescriptor(T.rank, hnf)
    return sorted(seen.values(), key=lambda s: (len(s.equations), s.equations))


def localization_open_set(T: TorusData, weights, z: TorusPoint):
    """U = T minus the stabilizer subgroups not containing z.

    Returns (deleted, kept): the deleted subgroup descriptors and the ones
    containing z.  For w in U, the fixed locus of w is contained in that of
    z at the level of the linear action.
    """
    subs = stabilizer_subgroups(T, weights)
    deleted = [s for s in subs if not s.contains(z)]
    kept = [s for s in subs if s.contains(z)]
    return deleted, kept


def point_in_open_set(w: TorusPoint, deleted) -> bool:
    return all(not s.contains(w) for s in deleted)


# ---------------------------------------------------------------------------
# group-exponent regrading
# ---------------------------------------------------------------------------

def regrade_by_group_exponent(mixed, model: SemifreeModel):
    """Re-key an invariant complex by the Laurent exponent vector.

    Applies when every assembled differential/mixed matrix connects
    monomials of equal group exponents (e.g. the weight-0 part of a loop
    model with no surviving couplings).  The exponent vector is stored in
    the weight slot, which is free after invariants.  Returns None when the
    complex is not exponent-homogeneous.
    """
    from .complexes import GradedComplex
    from .mixed import MixedComplex

    gc = mixed.base
    idxs = [model.alg.index[n] for n in model.laurent_names]
    if not idxs:
        return None

    def expvec(lbl):
        return tuple(lbl[i] for i in idxs)

    for mats, cshift, ashift in (
        (gc.diffs, 1, gc.aux_shift),
        (mixed.eps, -1, 0),
    ):
        for m, mat in mats.items():
            src = gc.labels(m)
            tgt = gc.labels(m.shift(cohdeg=cshift, aux=ashift))
            for (i, j) in mat.entries:
                if expvec(tgt[i]) != expvec(src[j]):
                    return None

    bins = {}
    index = {}
    for m, ls in gc.bins.items():
        for lbl in ls:
            key = Multidegree(m.cohdeg, expvec(lbl), m.aux, m.upow)
            tgt = bins.setdefault(key, [])
            index[(m, lbl)] = (key, len(tgt))
            tgt.append(lbl)

    def split(mats, cshift, ashift):
        out = {}
        for m, mat in mats.items():
            src = gc.labels(m)
            tgt = gc.labels(m.shift(cohdeg=cshift, aux=ashift))
            for (i, j), v in mat.entries.items():
                skey, sj = index[(m, src[j])]
                tkey, ti = index[(m.shift(cohdeg=cshift, aux=ashift), tgt[i])]
                out.setdefault(skey, {})[(ti, sj)] = v
        return {
            m: SparseMatrix(
                len(bins.get(Multidegree(m.cohdeg + cshift, m.weight, m.aux + ashift, m.upow), ())),
                len(bins[m]),
                ent,
            )
            for m, ent in out.items()
        }

    diffs = split(gc.diffs, 1, gc.aux_shift)
    eps = split(mixed.eps, -1, 0)
    edge = set()
    for m in gc.edge:
        for lbl in gc.labels(m):
            edge.add(Multidegree(m.cohdeg, expvec(lbl), m.aux, m.upow))
    win = gc.window
    # weight window: the realized exponent range per coordinate
    wr = []
    for i in idxs:
        exps = [lbl[i] for ls in gc.bins.values() for lbl in ls]
        wr.append((min(exps), max(exps)) if exps else (0, 0))
    new_win = Window(win.cohdeg, tuple(wr), win.aux, win.upow)
    out = GradedComplex(bins, diffs, new_win, edge, aux_shift=gc.aux_shift)
    return MixedComplex(out, eps)
