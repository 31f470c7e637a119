//! Pairs `(Y, W; σ, τ)` with `Y` nilpotent, their decomposition into
//! indecomposable types, reduced types and the index of each type.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{
    height_on, is_zero_vector, kernel_basis, kernel_layer, lift, vec_add, vec_scale, vec_sub, Chain,
    Matrix, Subspace, Vector,
};
use crate::scalars::{ratio, rational_sqrt, sign, Rational, C};
use crate::structured::{
    algebra_membership, AntiLinearMap, Family, Form, FormKind, StructuredSpace,
};

/// `Δ_h(0)` (one chain) or `Δ_h(0,0)` (two chains).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Single,
    Double,
}

impl Kind {
    pub fn chains(self) -> usize {
        match self {
            Kind::Single => 1,
            Kind::Double => 2,
        }
    }
}

/// Shape of the indecomposable nilpotent type of height `h` in a family:
/// its kind and whether it carries a sign `ε`.
pub fn type_shape(family: Family, h: usize) -> (Kind, bool) {
    let even = h % 2 == 0;
    match family {
        Family::GlPlus => (Kind::Single, false),
        Family::GlMinus => (Kind::Double, false),
        Family::GlStar => (Kind::Single, true),
        Family::OPlus if even => (Kind::Single, true),
        Family::OPlus => (Kind::Double, false),
        Family::OMinus => (Kind::Double, !even),
        Family::SpPlus if even => (Kind::Double, false),
        Family::SpPlus => (Kind::Single, true),
        Family::SpMinus => (Kind::Double, even),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeLabel {
    pub family: Family,
    pub h: usize,
    pub kind: Kind,
    pub eps: Option<i8>,
    pub multiplicity: usize,
}

impl TypeLabel {
    /// The unique valid label of the family at height `h` with the given sign.
    pub fn new(family: Family, h: usize, eps: Option<i8>) -> Result<Self, Error> {
        let (kind, has_eps) = type_shape(family, h);
        let l = TypeLabel { family, h, kind, eps, multiplicity: 1 };
        if has_eps != eps.is_some() {
            return Err(Error::InvalidLabel(format!(
                "{family} at h = {h} {} a sign",
                if has_eps { "needs" } else { "takes no" }
            )));
        }
        l.validate()?;
        Ok(l)
    }

    pub fn times(mut self, multiplicity: usize) -> Self {
        self.multiplicity = multiplicity;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let (kind, has_eps) = type_shape(self.family, self.h);
        if kind != self.kind {
            return Err(Error::InvalidLabel(format!(
                "{} at h = {} has kind {kind:?}, not {:?}",
                self.family, self.h, self.kind
            )));
        }
        match self.eps {
            Some(e) if !has_eps || (e != 1 && e != -1) => {
                return Err(Error::InvalidLabel(format!("bad sign {e} for {}", self.family)))
            }
            None if has_eps => return Err(Error::InvalidLabel("missing sign".into())),
            _ => {}
        }
        if self.multiplicity == 0 {
            return Err(Error::InvalidLabel("multiplicity must be positive".into()));
        }
        Ok(())
    }

    /// Complex dimension of one copy.
    pub fn block_dim(&self) -> usize {
        (self.h + 1) * self.kind.chains()
    }

    fn one(&self) -> TypeLabel {
        TypeLabel { multiplicity: 1, ..self.clone() }
    }
}

pub(crate) fn fmt_eps(e: i8) -> &'static str {
    if e > 0 {
        "+1"
    } else {
        "-1"
    }
}

impl TypeLabel {
    /// The term without the family prefix, e.g. `D[eps=+1,h=2](0)`.
    pub fn term(&self) -> String {
        let eps = self.eps.map(|e| format!("eps={},", fmt_eps(e))).unwrap_or_default();
        let args = match self.kind {
            Kind::Single => "(0)",
            Kind::Double => "(0,0)",
        };
        let mult = if self.multiplicity > 1 { format!("{}*", self.multiplicity) } else { String::new() };
        format!("{mult}D[{eps}h={}]{args}", self.h)
    }
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.term())
    }
}

/// Sort and merge equal labels into multiplicities.
pub fn collect_labels(labels: impl IntoIterator<Item = TypeLabel>) -> Vec<TypeLabel> {
    let mut v: Vec<TypeLabel> = Vec::new();
    let mut all: Vec<TypeLabel> = labels.into_iter().collect();
    all.sort_by(|a, b| a.one().cmp(&b.one()));
    for l in all {
        match v.last_mut() {
            Some(last) if last.one() == l.one() => last.multiplicity += l.multiplicity,
            _ => v.push(l),
        }
    }
    v
}

/// `(Y, W; σ|W, τ|W)` with `W` the carrier inside the space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub space: StructuredSpace,
    pub y: Matrix,
    pub carrier: Subspace,
}

impl Pair {
    pub fn new(space: StructuredSpace, y: Matrix, carrier: Subspace) -> Result<Self, Error> {
        let n = space.dim();
        if y.rows() != n || y.cols() != n || carrier.ambient() != n {
            return Err(Error::DimensionMismatch("pair operator and carrier must match the space".into()));
        }
        if !carrier.is_invariant(&y) {
            return Err(Error::NotInvariant);
        }
        if let Some(s) = &space.sigma {
            if !carrier.basis().iter().all(|v| carrier.contains(&s.apply(v))) {
                return Err(Error::Malformed("carrier is not σ-invariant".into()));
            }
        }
        let p = Pair { space, y, carrier };
        let (sub, ysub) = p.restricted()?;
        algebra_membership(&sub, &ysub).into_result(Error::Malformed)?;
        Ok(p)
    }

    pub fn full(space: StructuredSpace, y: Matrix) -> Result<Self, Error> {
        let n = space.dim();
        Pair::new(space, y, Subspace::full(n))
    }

    /// The space and operator in the coordinates of the carrier basis.
    pub fn restricted(&self) -> Result<(StructuredSpace, Matrix), Error> {
        let b = self.carrier.matrix();
        Ok((self.space.restrict(&b)?, self.carrier.restrict(&self.y)?))
    }

    pub fn family(&self) -> Family {
        self.space.family
    }

    /// Block direct sum of pairs on full carriers.
    pub fn direct_sum(parts: &[Pair]) -> Result<Pair, Error> {
        let (space, y) = direct_sum_spaces(&parts.iter().map(|p| (&p.space, &p.y)).collect::<Vec<_>>())?;
        Pair::full(space, y)
    }
}

pub(crate) fn direct_sum_spaces(parts: &[(&StructuredSpace, &Matrix)]) -> Result<(StructuredSpace, Matrix), Error> {
    let first = parts.first().ok_or_else(|| Error::Malformed("empty direct sum".into()))?;
    let family = first.0.family;
    if parts.iter().any(|(s, _)| s.family != family) {
        return Err(Error::FamilyMismatch("summands of different families".into()));
    }
    let y = Matrix::block_diag(&parts.iter().map(|(_, y)| (*y).clone()).collect::<Vec<_>>());
    let form = first.0.form.as_ref().map(|f| Form {
        matrix: Matrix::block_diag(
            &parts.iter().map(|(s, _)| s.form.as_ref().unwrap().matrix.clone()).collect::<Vec<_>>(),
        ),
        kind: f.kind,
    });
    let sigma = first.0.sigma.as_ref().map(|s| AntiLinearMap {
        matrix: Matrix::block_diag(
            &parts.iter().map(|(sp, _)| sp.sigma.as_ref().unwrap().matrix.clone()).collect::<Vec<_>>(),
        ),
        sign: s.sign,
    });
    Ok((StructuredSpace::new(family, form, sigma)?, y))
}

/// How corrected tops must sit relative to `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TopStructure {
    /// No anti-linear map.
    Free,
    /// `σ t_a = s_a t_a`.
    Real(Vec<i8>),
    /// `t_{2k+1} = σ t_{2k}`.
    Paired,
}

impl TopStructure {
    pub(crate) fn for_space(space: &StructuredSpace, r: usize) -> TopStructure {
        match space.sigma.as_ref().map(|s| s.sign) {
            None => TopStructure::Free,
            Some(1) => TopStructure::Real(vec![1; r]),
            Some(_) => TopStructure::Paired,
        }
    }
}

fn independent(vs: &[Vector], n: usize) -> bool {
    Matrix::from_columns(n, vs).rank() == vs.len()
}

/// σ-stable vectors completing `chosen` inside the span of `candidates`:
/// σ-fixed vectors for σ₊, pairs `v, σv` for σ₋.
pub(crate) fn sigma_complement(
    sigma: Option<&AntiLinearMap>,
    chosen: &Subspace,
    candidates: &[Vector],
) -> Vec<Vector> {
    let n = chosen.ambient();
    let mut cur: Vec<Vector> = chosen.basis().to_vec();
    let mut out = Vec::new();
    let try_add = |u: Vector, cur: &mut Vec<Vector>, out: &mut Vec<Vector>| -> bool {
        if is_zero_vector(&u) {
            return false;
        }
        cur.push(u.clone());
        if independent(cur, n) {
            out.push(u);
            true
        } else {
            cur.pop();
            false
        }
    };
    let half = C::real(ratio(1, 2));
    for v in candidates {
        match sigma {
            None => {
                try_add(v.clone(), &mut cur, &mut out);
            }
            Some(s) if s.sign > 0 => {
                let sv = s.apply(v);
                let re = vec_scale(&vec_add(v, &sv), &half);
                let im = vec_scale(&vec_sub(v, &sv), &(&half * &-C::i()));
                try_add(re, &mut cur, &mut out);
                try_add(im, &mut cur, &mut out);
            }
            Some(s) => {
                if try_add(v.clone(), &mut cur, &mut out) {
                    let ok = try_add(s.apply(v), &mut cur, &mut out);
                    debug_assert!(ok, "σ₋ partner is independent");
                }
            }
        }
    }
    out
}

/// Jordan chains spanning `W` with σ-stable tops (fixed for σ₊, in pairs
/// `t, σt` for σ₋). Preset chains `(top, height)` are kept and completed.
pub(crate) fn sigma_chain_basis(
    y: &Matrix,
    w: &Subspace,
    sigma: Option<&AntiLinearMap>,
    preset: &[(Vector, usize)],
) -> Result<Vec<Chain>, Error> {
    let n = y.rows();
    let h = height_on(y, w)?;
    let mut chosen = Subspace::zero(n);
    let mut chains: Vec<Chain> = preset.iter().map(|(t, k)| Chain::from_top(y, t.clone(), *k)).collect();
    let half = C::real(ratio(1, 2));
    for k in (0..=h).rev() {
        let layer = kernel_layer(y, w, k);
        let bottoms: Vec<Vector> = chains.iter().filter(|c| c.height() == k).map(|c| c.bottom().clone()).collect();
        chosen = chosen.sum(&Subspace::span(n, &bottoms));
        let new = sigma_complement(sigma, &chosen, layer.basis());
        let mut idx = 0;
        while idx < new.len() {
            let b = &new[idx];
            let mut t = lift(y, w, k, b).ok_or(Error::NotInvariant)?;
            match sigma {
                Some(s) if s.sign > 0 => {
                    t = vec_scale(&vec_add(&t, &s.apply(&t)), &half);
                    chains.push(Chain::from_top(y, t, k));
                    idx += 1;
                }
                Some(s) => {
                    let st = s.apply(&t);
                    chains.push(Chain::from_top(y, t, k));
                    chains.push(Chain::from_top(y, st, k));
                    idx += 2;
                }
                None => {
                    chains.push(Chain::from_top(y, t, k));
                    idx += 1;
                }
            }
        }
        chosen = chosen.sum(&Subspace::span(n, &new));
    }
    Ok(chains)
}

/// `B(u,v) = τ(u, Y^h v)`.
pub(crate) fn reduced_value(space: &StructuredSpace, yh: &Matrix, u: &[C], v: &[C]) -> C {
    space.tau(u, &yh.apply(v))
}

/// Apply corrections `t_a ↦ t_a + Σ_b x_ab Y^m t_b` so that
/// `τ(t_a, Y^k t_b) = 0` for every `k < h`, keeping the σ-structure and the
/// level-`h` values. Each level is affine in the real parameters of the
/// corrections, so it is solved exactly as a real linear system.
pub(crate) fn normalize_tops(
    space: &StructuredSpace,
    y: &Matrix,
    h: usize,
    tops: &mut [Vector],
    structure: &TopStructure,
) -> Result<(), Error> {
    let r = tops.len();
    if r == 0 || space.form.is_none() {
        return Ok(());
    }
    let powers: Vec<Matrix> = (0..=h).map(|k| y.pow(k)).collect();
    let owners: Vec<usize> = match structure {
        TopStructure::Paired => (0..r).step_by(2).collect(),
        _ => (0..r).collect(),
    };
    let nparams = 2 * owners.len() * r;
    for m in 1..=h {
        let k = h - m;
        let shifted: Vec<Vector> = tops.iter().map(|t| powers[m].apply(t)).collect();
        let build = |theta: &[C]| -> Vec<Vector> {
            let mut out: Vec<Vector> = tops.to_vec();
            for (oi, &a) in owners.iter().enumerate() {
                let mut v = tops[a].clone();
                for b in 0..r {
                    let p = 2 * (oi * r + b);
                    let x = &theta[p] + &theta[p + 1].times_i();
                    if !x.is_zero() {
                        v = vec_add(&v, &vec_scale(&shifted[b], &x));
                    }
                }
                out[a] = v;
            }
            match structure {
                TopStructure::Free => {}
                TopStructure::Real(signs) => {
                    let s = space.sigma.as_ref().unwrap();
                    let half = C::real(ratio(1, 2));
                    for a in 0..r {
                        let sv = vec_scale(&s.apply(&out[a]), &C::int(signs[a] as i64));
                        out[a] = vec_scale(&vec_add(&out[a], &sv), &half);
                    }
                }
                TopStructure::Paired => {
                    let s = space.sigma.as_ref().unwrap();
                    for a in (0..r).step_by(2) {
                        out[a + 1] = s.apply(&out[a]);
                    }
                }
            }
            out
        };
        let eval = |ts: &[Vector]| -> Vec<C> {
            let yk: Vec<Vector> = ts.iter().map(|t| powers[k].apply(t)).collect();
            let mut g = Vec::with_capacity(2 * r * r);
            for a in 0..r {
                for c in 0..r {
                    let v = space.tau(&ts[a], &yk[c]);
                    g.push(C::real(v.re.clone()));
                    g.push(C::real(v.im.clone()));
                }
            }
            g
        };
        let zero = vec![C::zero(); nparams];
        let g0 = eval(&build(&zero));
        if g0.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut cols = Vec::with_capacity(nparams);
        for p in 0..nparams {
            let mut th = zero.clone();
            th[p] = C::one();
            let gp = eval(&build(&th));
            cols.push(vec_sub(&gp, &g0));
        }
        let l = Matrix::from_columns(g0.len(), &cols);
        let rhs: Vector = g0.iter().map(|x| -x.clone()).collect();
        let theta = l
            .solve(&rhs)
            .ok_or_else(|| Error::Malformed(format!("chain normalization has no solution at level {k}")))?;
        let fixed = build(&theta);
        tops.clone_from_slice(&fixed);
    }
    Ok(())
}

/// `{v ∈ W : τ(u, v) = 0 for all u}`.
pub(crate) fn orthogonal_complement(space: &StructuredSpace, w: &Subspace, us: &[Vector]) -> Subspace {
    let n = space.dim();
    if us.is_empty() {
        return w.clone();
    }
    let rows: Vec<Vec<C>> = us.iter().map(|u| w.basis().iter().map(|b| space.tau(u, b)).collect()).collect();
    let m = Matrix::from_rows(rows);
    let wm = w.matrix();
    let vs: Vec<Vector> = m.kernel().iter().map(|c| wm.apply(c)).collect();
    Subspace::span(n, &vs)
}

fn candidate_vectors(basis: &[Vector], complex: bool) -> Vec<Vector> {
    let mut out: Vec<Vector> = basis.to_vec();
    for k in 0..basis.len() {
        for l in k + 1..basis.len() {
            out.push(vec_add(&basis[k], &basis[l]));
            if complex {
                out.push(vec_add(&basis[k], &basis[l].iter().map(|x| x.times_i()).collect::<Vec<_>>()));
            }
        }
    }
    out
}

/// Split the top space into pieces that are `B`-orthogonal and carry one
/// indecomposable reduced type each.
fn split_reduced(space: &StructuredSpace, yh: &Matrix, h: usize, tops: &[Vector]) -> Result<Vec<Vec<Vector>>, Error> {
    let n = space.dim();
    let sigma = space.sigma.as_ref();
    let b = |u: &[C], v: &[C]| reduced_value(space, yh, u, v);
    let bilinear_sym = match space.form_kind() {
        Some(FormKind::Hermitian) | None => None,
        Some(k) => Some(reduced_form_kind(k, h) == FormKind::Symmetric),
    };
    let mut rest: Vec<Vector> = tops.to_vec();
    let mut pieces = Vec::new();
    let fail = || Error::Malformed("degenerate reduced form".into());
    while !rest.is_empty() {
        let piece: Vec<Vector> = match (sigma.map(|s| s.sign), bilinear_sym) {
            (Some(-1), _) => {
                let s = sigma.unwrap();
                candidate_vectors(&rest, true)
                    .into_iter()
                    .map(|t| {
                        let st = s.apply(&t);
                        (t, st)
                    })
                    .find(|(t, st)| {
                        let g = Matrix::from_rows(vec![vec![b(t, t), b(t, st)], vec![b(st, t), b(st, st)]]);
                        !g.det().is_zero()
                    })
                    .map(|(t, st)| vec![t, st])
                    .ok_or_else(fail)?
            }
            (Some(_), Some(false)) => {
                let t = rest[0].clone();
                let u = rest.iter().find(|u| !b(&t, u).is_zero()).cloned().ok_or_else(fail)?;
                vec![t, u]
            }
            _ => vec![candidate_vectors(&rest, sigma.is_none())
                .into_iter()
                .find(|t| !b(t, t).is_zero())
                .ok_or_else(fail)?],
        };
        let span = Subspace::span(n, &rest);
        let rows: Vec<Vec<C>> = piece.iter().map(|p| span.basis().iter().map(|v| b(p, v)).collect()).collect();
        let kernel = Matrix::from_rows(rows).kernel();
        let sm = span.matrix();
        let orth: Vec<Vector> = kernel.iter().map(|c| sm.apply(c)).collect();
        rest = sigma_complement(sigma, &Subspace::zero(n), &orth);
        pieces.push(piece);
    }
    Ok(pieces)
}

/// Rescale normalized tops so the level-`h` values match the canonical
/// model where a rational scale allows it.
fn rescale_piece(space: &StructuredSpace, yh: &Matrix, h: usize, ts: &mut [Vector]) {
    let b = |u: &[C], v: &[C]| reduced_value(space, yh, u, v);
    let scale_all = |ts: &mut [Vector], q: &Rational| {
        if let Some(r) = rational_sqrt(&q.abs()) {
            let c = C::real(r.recip());
            for t in ts.iter_mut() {
                *t = vec_scale(t, &c);
            }
        }
    };
    match (ts.len(), space.sigma.as_ref().map(|s| s.sign)) {
        (1, _) => {
            let d = b(&ts[0], &ts[0]);
            let q = if d.re.is_zero() { d.im.clone() } else { d.re.clone() };
            scale_all(ts, &q);
        }
        (2, Some(1)) => {
            let c = b(&ts[0], &ts[1]);
            ts[1] = vec_scale(&ts[1], &c.inv().expect("nondegenerate piece"));
        }
        (2, _) => {
            let k = b(&ts[1], &ts[0]);
            if reduced_form_kind(space.form_kind().unwrap(), h) == FormKind::Alternating {
                scale_all(ts, &k.re);
            }
        }
        _ => {}
    }
}

/// Sign of an indecomposable piece of reduced type, where the family has one.
fn piece_sign(space: &StructuredSpace, yh: &Matrix, h: usize, piece: &[Vector]) -> Option<i8> {
    let (_, has_eps) = type_shape(space.family, h);
    if !has_eps {
        return None;
    }
    let b = |u: &[C], v: &[C]| reduced_value(space, yh, u, v);
    let v = match space.family {
        Family::GlStar => {
            let x = b(&piece[0], &piece[0]);
            if h % 2 == 1 {
                x.times_i()
            } else {
                x
            }
        }
        Family::OMinus | Family::SpMinus => b(&piece[1], &piece[0]),
        _ => b(&piece[0], &piece[0]),
    };
    Some(sign(&v.re))
}

/// An indecomposable summand with its chain basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub label: TypeLabel,
    pub tops: Vec<Vector>,
    /// Chains of the tops, one after the other.
    pub basis: Vec<Vector>,
}

pub(crate) fn chain_vectors(y: &Matrix, tops: &[Vector], h: usize) -> Vec<Vector> {
    tops.iter().flat_map(|t| Chain::from_top(y, t.clone(), h).vectors).collect()
}

/// Decompose a nilpotent `Y` on the nondegenerate, `Y`- and σ-invariant
/// subspace `W` of the space.
pub(crate) fn decompose_in(space: &StructuredSpace, y: &Matrix, w: &Subspace) -> Result<Vec<Block>, Error> {
    let n = space.dim();
    let mut blocks = Vec::new();
    if space.form.is_none() {
        let chains = sigma_chain_basis(y, w, space.sigma.as_ref(), &[])?;
        let paired = space.family == Family::GlMinus;
        let step = if paired { 2 } else { 1 };
        for group in chains.chunks(step) {
            let h = group[0].height();
            let tops: Vec<Vector> = group.iter().map(|c| c.top().clone()).collect();
            blocks.push(Block {
                label: TypeLabel::new(space.family, h, None)?,
                basis: chain_vectors(y, &tops, h),
                tops,
            });
        }
        return Ok(blocks);
    }
    let mut rest = w.clone();
    while rest.dim() > 0 {
        let h = height_on(y, &rest)?;
        let yh = y.pow(h);
        let k = rest.intersect(&kernel_basis(&yh));
        let tops = sigma_complement(space.sigma.as_ref(), &k, rest.basis());
        let pieces = split_reduced(space, &yh, h, &tops)?;
        let mut all: Vec<Vector> = pieces.iter().flatten().cloned().collect();
        let structure = TopStructure::for_space(space, all.len());
        normalize_tops(space, y, h, &mut all, &structure)?;
        let mut used = Vec::new();
        let mut at = 0;
        for piece in &pieces {
            let mut ts = all[at..at + piece.len()].to_vec();
            at += piece.len();
            rescale_piece(space, &yh, h, &mut ts);
            let eps = piece_sign(space, &yh, h, &ts);
            let label = TypeLabel::new(space.family, h, eps)?;
            if label.kind.chains() != ts.len() {
                return Err(Error::Malformed(format!("piece of size {} at h = {h} in {}", ts.len(), space.family)));
            }
            let basis = chain_vectors(y, &ts, h);
            used.extend(basis.iter().cloned());
            blocks.push(Block { label, tops: ts, basis });
        }
        rest = orthogonal_complement(space, &rest, &used);
        debug_assert!(Subspace::span(n, &used).dim() == used.len());
    }
    Ok(blocks)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecomposition {
    pub labels: Vec<TypeLabel>,
    pub blocks: Vec<Block>,
    /// Columns are the block bases, block after block.
    pub witness: Matrix,
}

impl TypeDecomposition {
    pub(crate) fn from_blocks(n: usize, blocks: Vec<Block>) -> Self {
        let cols: Vec<Vector> = blocks.iter().flat_map(|b| b.basis.iter().cloned()).collect();
        TypeDecomposition {
            labels: collect_labels(blocks.iter().map(|b| b.label.clone())),
            witness: Matrix::from_columns(n, &cols),
            blocks,
        }
    }
}

pub fn decompose_nilpotent_pair(p: &Pair) -> Result<TypeDecomposition, Error> {
    height_on(&p.y, &p.carrier)?;
    let blocks = decompose_in(&p.space, &p.y, &p.carrier)?;
    Ok(TypeDecomposition::from_blocks(p.space.dim(), blocks))
}

/// Kind of `τ̄̄(u,v) = τ(u, Y^h v)`: symmetric when `h` is even and `τ` is
/// symmetric or `h` is odd and `τ` is alternating. Hermitian forms stay
/// hermitian after multiplying by `i` for odd `h`.
pub fn reduced_form_kind(kind: FormKind, h: usize) -> FormKind {
    match (kind, h % 2) {
        (FormKind::Hermitian, _) => FormKind::Hermitian,
        (FormKind::Symmetric, 0) | (FormKind::Alternating, 1) => FormKind::Symmetric,
        _ => FormKind::Alternating,
    }
}

/// `(0, W/YW; σ̄̄, τ̄̄)` written in a basis of σ-stable tops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedPair {
    pub dim: usize,
    pub h: usize,
    pub sigma_bar: Option<AntiLinearMap>,
    /// For hermitian `τ` and odd `h` this is `i·τ̄̄`.
    pub tau_bar: Option<Form>,
    pub tops: Vec<Vector>,
}

pub fn reduced_pair(p: &Pair) -> Result<ReducedPair, Error> {
    let (space, y) = p.restricted()?;
    let n = space.dim();
    let w = Subspace::full(n);
    let h = height_on(&y, &w)?;
    let yh = y.pow(h);
    let yw = w.image(&y);
    if yw.dim() != kernel_basis(&yh).dim() {
        return Err(Error::NotUniform);
    }
    let tops = sigma_complement(space.sigma.as_ref(), &yw, w.basis());
    let r = tops.len();
    let mut frame = tops.clone();
    frame.extend(yw.basis().iter().cloned());
    let fm = Matrix::from_columns(n, &frame);
    let sigma_bar = match &space.sigma {
        Some(s) => {
            let cols: Vec<Vector> =
                tops.iter().map(|t| fm.solve(&s.apply(t)).expect("frame is a basis")[..r].to_vec()).collect();
            Some(AntiLinearMap::new(Matrix::from_columns(r, &cols), s.sign)?)
        }
        None => None,
    };
    let tau_bar = match &space.form {
        Some(f) => {
            let g = Matrix::from_rows(
                tops.iter().map(|u| tops.iter().map(|v| reduced_value(&space, &yh, u, v)).collect()).collect(),
            );
            let kind = reduced_form_kind(f.kind, h);
            let m = match f.kind {
                FormKind::Hermitian if h % 2 == 1 => g.scale(&C::i()),
                FormKind::Hermitian => g,
                _ => g.transpose(),
            };
            let form = Form::new(m, kind)?;
            if !form.is_nondegenerate() {
                return Err(Error::Malformed("reduced form is degenerate".into()));
            }
            Some(form)
        }
        None => None,
    };
    let basis = p.carrier.matrix();
    Ok(ReducedPair { dim: r, h, sigma_bar, tau_bar, tops: tops.iter().map(|t| basis.apply(t)).collect() })
}

/// Number of negative eigenvalues of the hermitian form on one copy of the
/// type: `τ*` for `gl*`, `τ(σ·, ·)` for `o+` and `sp−`.
pub fn type_index(label: &TypeLabel) -> Result<usize, Error> {
    label.validate()?;
    let h = label.h as i64;
    let delta = |e: i8| if (h / 2) % 2 == 0 { e as i64 } else { -(e as i64) };
    let even = h % 2 == 0;
    let v = match (label.family, even) {
        (Family::GlStar, true) | (Family::OPlus, true) => (h + 1 - delta(label.eps.unwrap())) / 2,
        (Family::GlStar, false) => (h + 1) / 2,
        (Family::OPlus, false) => h + 1,
        (Family::SpMinus, true) => h + 1 - delta(label.eps.unwrap()),
        (Family::SpMinus, false) => h + 1,
        _ => return Err(Error::NoIndexDefined),
    };
    Ok(v as usize)
}

/// Space spanned by `r` chains `Y^i t_a` (`i = 0..h`) with
/// `τ(Y^i t_a, Y^j t_b) = (−1)^i R_ab` for `i + j = h` and zero otherwise,
/// and `σ(Σ c_a t_a) = M_top·c̄` on tops.
pub(crate) fn chain_model(
    family: Family,
    h: usize,
    r: usize,
    m_top: Option<&Matrix>,
    gram_top: Option<&Matrix>,
) -> Result<(StructuredSpace, Matrix), Error> {
    let len = h + 1;
    let n = r * len;
    let idx = |a: usize, i: usize| a * len + i;
    let mut y = Matrix::zeros(n, n);
    for a in 0..r {
        for i in 0..h {
            y[(idx(a, i + 1), idx(a, i))] = C::one();
        }
    }
    let sigma = m_top.map(|mt| {
        let mut m = Matrix::zeros(n, n);
        for a in 0..r {
            for b in 0..r {
                for i in 0..len {
                    m[(idx(b, i), idx(a, i))] = mt[(b, a)].clone();
                }
            }
        }
        m
    });
    let sigma = match (sigma, family.sigma_sign()) {
        (Some(m), Some(s)) => Some(AntiLinearMap::new(m, s)?),
        (None, None) => None,
        _ => return Err(Error::Malformed("anti-linear data does not fit the family".into())),
    };
    let form = match (gram_top, family.form_kind()) {
        (Some(rt), Some(kind)) => {
            let mut g = Matrix::zeros(n, n);
            for a in 0..r {
                for b in 0..r {
                    for i in 0..len {
                        let j = h - i;
                        let v = if i % 2 == 0 { rt[(a, b)].clone() } else { -&rt[(a, b)] };
                        g[(idx(a, i), idx(b, j))] = v;
                    }
                }
            }
            let m = if kind == FormKind::Hermitian { g } else { g.transpose() };
            Some(Form::new(m, kind)?)
        }
        (None, None) => None,
        _ => return Err(Error::Malformed("form data does not fit the family".into())),
    };
    Ok((StructuredSpace::new(family, form, sigma)?, y))
}

pub(crate) fn sigma_minus_top() -> Matrix {
    Matrix::from_ints(&[&[0, -1], &[1, 0]])
}

/// Values `B(t_a, t_b)` on the tops of the canonical model of a type.
fn type_top_data(label: &TypeLabel) -> (Option<Matrix>, Option<Matrix>) {
    let h = label.h;
    let e = label.eps.map(|e| C::int(e as i64));
    let symp = Matrix::from_ints(&[&[0, 1], &[-1, 0]]);
    match (label.family, label.kind) {
        (Family::GlPlus, _) => (Some(Matrix::identity(1)), None),
        (Family::GlMinus, _) => (Some(sigma_minus_top()), None),
        (Family::GlStar, _) => {
            let e = e.unwrap();
            let r = if h % 2 == 1 { -e.times_i() } else { e };
            (None, Some(Matrix::scalar(1, &r)))
        }
        (Family::OPlus | Family::SpPlus, Kind::Single) => (Some(Matrix::identity(1)), Some(Matrix::scalar(1, &e.unwrap()))),
        (Family::OPlus | Family::SpPlus, Kind::Double) => (Some(Matrix::identity(2)), Some(symp)),
        (Family::OMinus | Family::SpMinus, _) => {
            let r = match e {
                // B(σt, t) = ε
                Some(e) => symp.scale(&-e),
                None => Matrix::identity(2),
            };
            (Some(sigma_minus_top()), Some(r))
        }
    }
}

/// Canonical model of a type; multiplicities give block direct sums.
pub fn synthesize_type(label: &TypeLabel) -> Result<Pair, Error> {
    label.validate()?;
    let (mt, rt) = type_top_data(label);
    let (space, y) = chain_model(label.family, label.h, label.kind.chains(), mt.as_ref(), rt.as_ref())?;
    let one = Pair::full(space, y)?;
    if label.multiplicity == 1 {
        return Ok(one);
    }
    Pair::direct_sum(&vec![one; label.multiplicity])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemisimpleCase {
    /// The complexification is `Δ₁ + σ(Δ₁)`.
    B,
    /// The complexification is itself indecomposable and σ-stable.
    C,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemisimpleType {
    pub label: TypeLabel,
    pub case: Option<SemisimpleCase>,
    /// Label of the complexified type, where it differs.
    pub complexification: Option<String>,
}

/// Indecomposable semisimple types with `S = 0`, i.e. the height-zero types.
pub fn semisimple_zero_types(space: &StructuredSpace) -> Vec<SemisimpleType> {
    let f = space.family;
    let (kind, has_eps) = type_shape(f, 0);
    let case = match f {
        Family::GlPlus | Family::SpPlus => Some(SemisimpleCase::C),
        Family::GlMinus | Family::OMinus => Some(SemisimpleCase::B),
        _ => None,
    };
    let complexification = match f {
        Family::OPlus => Some("D[h=0](0)".to_string()),
        Family::SpMinus => Some("D[h=0](0,0)".to_string()),
        _ => None,
    };
    let signs: Vec<Option<i8>> = if has_eps { vec![Some(1), Some(-1)] } else { vec![None] };
    signs
        .into_iter()
        .map(|eps| SemisimpleType {
            label: TypeLabel { family: f, h: 0, kind, eps, multiplicity: 1 },
            case,
            complexification: complexification.clone(),
        })
        .collect()
}

/// All valid single-copy labels of a family up to height `max_h`.
pub fn all_type_labels(family: Family, max_h: usize) -> Vec<TypeLabel> {
    let mut out = Vec::new();
    for h in 0..=max_h {
        let (_, has_eps) = type_shape(family, h);
        let signs: Vec<Option<i8>> = if has_eps { vec![Some(1), Some(-1)] } else { vec![None] };
        for eps in signs {
            out.push(TypeLabel::new(family, h, eps).expect("shape is valid"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structured::{negative_index, standard_space};
    use proptest::prelude::*;

    #[test]
    fn shapes_and_display() {
        let l = TypeLabel::new(Family::OPlus, 2, Some(1)).unwrap();
        assert_eq!(l.to_string(), "o+:D[eps=+1,h=2](0)");
        let l = TypeLabel::new(Family::SpMinus, 2, Some(-1)).unwrap();
        assert_eq!(l.to_string(), "sp-:D[eps=-1,h=2](0,0)");
        assert!(TypeLabel::new(Family::OPlus, 1, Some(1)).is_err());
        assert!(TypeLabel::new(Family::GlStar, 1, None).is_err());
        assert_eq!(TypeLabel::new(Family::GlPlus, 0, None).unwrap().times(3).to_string(), "gl+:3*D[h=0](0)");
    }

    #[test]
    fn zero_operator_types() {
        let space = standard_space(Family::GlPlus, 3, 0).unwrap();
        let p = Pair::full(space, Matrix::zeros(3, 3)).unwrap();
        let d = decompose_nilpotent_pair(&p).unwrap();
        assert_eq!(d.labels, vec![TypeLabel::new(Family::GlPlus, 0, None).unwrap().times(3)]);
        let space = standard_space(Family::OPlus, 3, 1).unwrap();
        let p = Pair::full(space, Matrix::zeros(3, 3)).unwrap();
        let d = decompose_nilpotent_pair(&p).unwrap();
        assert_eq!(
            d.labels,
            vec![
                TypeLabel::new(Family::OPlus, 0, Some(-1)).unwrap().times(2),
                TypeLabel::new(Family::OPlus, 0, Some(1)).unwrap(),
            ]
        );
    }

    #[test]
    fn shift_in_sp2() {
        let space = standard_space(Family::SpPlus, 2, 0).unwrap();
        let y = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        let d = decompose_nilpotent_pair(&Pair::full(space.clone(), y).unwrap()).unwrap();
        // τ(e2, Y e2) = τ(e2, e1) = e1ᵀ J e2 = 1
        assert_eq!(d.labels, vec![TypeLabel::new(Family::SpPlus, 1, Some(1)).unwrap()]);
        let y = Matrix::from_ints(&[&[0, 0], &[1, 0]]);
        let d = decompose_nilpotent_pair(&Pair::full(space, y).unwrap()).unwrap();
        assert_eq!(d.labels, vec![TypeLabel::new(Family::SpPlus, 1, Some(-1)).unwrap()]);
    }

    #[test]
    fn round_trip_all_rows() {
        for f in Family::ALL {
            for l in all_type_labels(f, 6) {
                let p = synthesize_type(&l).unwrap();
                let d = decompose_nilpotent_pair(&p).unwrap();
                assert_eq!(d.labels, vec![l.clone()], "{l}");
                let r = reduced_pair(&p).unwrap();
                assert_eq!(r.dim, l.kind.chains(), "{l}");
            }
        }
    }

    #[test]
    fn index_formulas() {
        for f in Family::ALL {
            for l in all_type_labels(f, 6) {
                let p = synthesize_type(&l).unwrap();
                match type_index(&l) {
                    Ok(k) => {
                        let a = p.space.hermitian_matrix().expect("indexed rows carry a hermitian form");
                        assert_eq!(negative_index(&a), k, "{l}");
                    }
                    Err(e) => {
                        assert_eq!(e, Error::NoIndexDefined);
                        assert!(matches!(f, Family::GlPlus | Family::GlMinus | Family::OMinus | Family::SpPlus));
                    }
                }
            }
        }
        let l = TypeLabel::new(Family::GlStar, 2, Some(1)).unwrap();
        assert_eq!(type_index(&l), Ok(2));
        let l = TypeLabel::new(Family::OPlus, 2, Some(-1)).unwrap();
        assert_eq!(type_index(&l), Ok(1));
        let l = TypeLabel::new(Family::SpMinus, 1, None).unwrap();
        assert_eq!(type_index(&l), Ok(2));
    }

    #[test]
    fn reduced_kinds() {
        assert_eq!(reduced_form_kind(FormKind::Symmetric, 0), FormKind::Symmetric);
        assert_eq!(reduced_form_kind(FormKind::Alternating, 1), FormKind::Symmetric);
        assert_eq!(reduced_form_kind(FormKind::Symmetric, 1), FormKind::Alternating);
        for f in [Family::OPlus, Family::OMinus, Family::SpPlus, Family::SpMinus] {
            for l in all_type_labels(f, 5) {
                let p = synthesize_type(&l).unwrap();
                let r = reduced_pair(&p).unwrap();
                let t = r.tau_bar.unwrap();
                let sym = t.matrix.transpose() == t.matrix;
                let expect = reduced_form_kind(p.space.form_kind().unwrap(), l.h) == FormKind::Symmetric;
                assert_eq!(sym, expect, "{l}");
            }
        }
    }

    #[test]
    fn reduced_pair_of_zero_operator() {
        let space = standard_space(Family::OPlus, 2, 1).unwrap();
        let p = Pair::full(space.clone(), Matrix::zeros(2, 2)).unwrap();
        let r = reduced_pair(&p).unwrap();
        assert_eq!(r.dim, 2);
        let tops = Matrix::from_columns(2, &r.tops);
        assert_eq!(r.tau_bar.unwrap(), space.form.unwrap().pullback(&tops));
    }

    #[test]
    fn non_uniform_is_rejected() {
        let a = synthesize_type(&TypeLabel::new(Family::GlPlus, 0, None).unwrap()).unwrap();
        let b = synthesize_type(&TypeLabel::new(Family::GlPlus, 1, None).unwrap()).unwrap();
        let p = Pair::direct_sum(&[a, b]).unwrap();
        assert_eq!(reduced_pair(&p), Err(Error::NotUniform));
    }

    #[test]
    fn semisimple_table() {
        let s = |f| semisimple_zero_types(&standard_space(f, 4, 0).unwrap());
        let g = s(Family::GlMinus);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].label.kind, Kind::Double);
        assert_eq!(g[0].case, Some(SemisimpleCase::B));
        assert_eq!(s(Family::SpPlus)[0].case, Some(SemisimpleCase::C));
        let o = s(Family::OPlus);
        assert_eq!(o.len(), 2);
        assert_eq!(o[0].complexification.as_deref(), Some("D[h=0](0)"));
    }

    fn label_strategy() -> impl Strategy<Value = TypeLabel> {
        (0usize..7, 0usize..4, any::<bool>()).prop_map(|(f, h, e)| {
            let f = Family::ALL[f];
            let (_, has) = type_shape(f, h);
            TypeLabel::new(f, h, has.then_some(if e { 1 } else { -1 })).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sums_decompose_additively(f in 0usize..7, parts in proptest::collection::vec(label_strategy(), 1..4)) {
            let family = Family::ALL[f];
            let labels: Vec<TypeLabel> = parts.into_iter().map(|l| {
                let (_, has) = type_shape(family, l.h);
                TypeLabel::new(family, l.h, if has { Some(l.eps.unwrap_or(1)) } else { None }).unwrap()
            }).collect();
            let pairs: Vec<Pair> = labels.iter().map(|l| synthesize_type(l).unwrap()).collect();
            let sum = Pair::direct_sum(&pairs).unwrap();
            let d = decompose_nilpotent_pair(&sum).unwrap();
            prop_assert_eq!(d.labels, collect_labels(labels.clone()));
            let dims: usize = labels.iter().map(|l| l.block_dim()).sum();
            prop_assert_eq!(dims, sum.space.dim());
            prop_assert_eq!(d.witness.rank(), dims);
        }
    }
}
