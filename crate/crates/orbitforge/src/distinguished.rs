//! Triples `(Y, W, v⁰; σ, τ)`: distinguished height, parameter sets, the
//! decomposition into a distinguished core plus ordinary types, canonical
//! models of the cores, and equivalence of triples.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{
    is_zero_vector, jordan_data, kernel_basis, lift, vec_add, vec_scale, vec_sub, EigenBlock, Matrix,
    Subspace, Vector,
};
use crate::scalars::{ratio, sign, Rational, C};
use crate::structured::{
    group_membership, is_special_vector, Family, FormKind, StructuredSpace,
};
use crate::types::{
    chain_model, chain_vectors, collect_labels, decompose_in, direct_sum_spaces, fmt_eps, normalize_tops,
    orthogonal_complement, reduced_form_kind, reduced_value, sigma_chain_basis, sigma_minus_top,
    synthesize_type, Block, Kind, Pair, TopStructure, TypeLabel,
};

/// A pair with a marked special vector `v⁰` in `ker Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub pair: Pair,
    pub v0: Vector,
}

impl Triple {
    pub fn new(pair: Pair, v0: Vector) -> Result<Self, Error> {
        if v0.len() != pair.space.dim() {
            return Err(Error::DimensionMismatch("v⁰ has the wrong length".into()));
        }
        let sp = is_special_vector(&pair.space, &v0)?;
        if !sp.special {
            return Err(Error::NotSpecial(if sp.isotropic {
                "v⁰ is not an eigenvector of the linear part of σ".into()
            } else {
                "v⁰ is not isotropic".into()
            }));
        }
        if !pair.carrier.contains(&v0) {
            return Err(Error::Malformed("v⁰ lies outside the carrier".into()));
        }
        if !is_zero_vector(&pair.y.apply(&v0)) {
            return Err(Error::Malformed("Y v⁰ ≠ 0".into()));
        }
        Ok(Triple { pair, v0 })
    }

    pub fn space(&self) -> &StructuredSpace {
        &self.pair.space
    }

    pub fn family(&self) -> Family {
        self.pair.space.family
    }

    pub fn dim(&self) -> usize {
        self.pair.space.dim()
    }
}

/// Shape of a distinguished core row: whether it carries a sign and a modulus.
pub fn core_shape(family: Family, h: usize, kind: Kind) -> Option<(bool, bool)> {
    let even = h % 2 == 0;
    match (family, kind) {
        (Family::GlPlus, Kind::Single) => Some((false, false)),
        (Family::GlMinus, Kind::Double) => Some((false, false)),
        (Family::GlStar, Kind::Single) => Some((true, true)),
        (Family::GlStar, Kind::Double) => Some((false, false)),
        (Family::OPlus, Kind::Single) if even => Some((true, true)),
        (Family::OPlus, Kind::Double) => Some((false, false)),
        (Family::SpPlus, Kind::Single) if !even => Some((true, true)),
        (Family::SpPlus, Kind::Double) => Some((false, false)),
        (Family::OMinus | Family::SpMinus, Kind::Double) => Some((true, true)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistinguishedLabel {
    pub family: Family,
    pub h: usize,
    pub kind: Kind,
    pub eps: Option<i8>,
    /// Positive when present.
    pub modulus: Option<Rational>,
}

impl DistinguishedLabel {
    pub fn new(family: Family, h: usize, kind: Kind, eps: Option<i8>, modulus: Option<Rational>) -> Result<Self, Error> {
        let l = DistinguishedLabel { family, h, kind, eps, modulus };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let (has_eps, has_mod) = core_shape(self.family, self.h, self.kind).ok_or_else(|| {
            Error::InvalidLabel(format!("no distinguished row {:?} for {} at h = {}", self.kind, self.family, self.h))
        })?;
        match self.eps {
            Some(e) if e != 1 && e != -1 => return Err(Error::InvalidLabel(format!("bad sign {e}"))),
            Some(_) if !has_eps => return Err(Error::InvalidLabel("row takes no sign".into())),
            None if has_eps => return Err(Error::InvalidLabel("row needs a sign".into())),
            _ => {}
        }
        match &self.modulus {
            Some(m) if !m.is_positive() => return Err(Error::InvalidLabel("modulus must be positive".into())),
            Some(_) if !has_mod => return Err(Error::InvalidLabel("row takes no modulus".into())),
            None if has_mod => return Err(Error::InvalidLabel("row needs a modulus".into())),
            _ => {}
        }
        Ok(())
    }

    /// Dimension of the reduced type `W/YW` of the core.
    pub fn reduced_dim(&self) -> usize {
        self.kind.chains()
    }

    pub fn core_dim(&self) -> usize {
        (self.h + 1) * self.kind.chains()
    }

    /// The term without the family prefix, e.g. `uD[eps=+1,h=2,mod=2](0)`.
    pub fn term(&self) -> String {
        let mut fields = Vec::new();
        if let Some(e) = self.eps {
            fields.push(format!("eps={}", fmt_eps(e)));
        }
        fields.push(format!("h={}", self.h));
        if let Some(m) = &self.modulus {
            fields.push(format!("mod={m}"));
        }
        let args = match self.kind {
            Kind::Single => "(0)",
            Kind::Double => "(0,0)",
        };
        format!("uD[{}]{args}", fields.join(","))
    }
}

impl fmt::Display for DistinguishedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.term())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    Singleton,
    /// The set of parameters is closed under rescaling the witness.
    RealScaleClass,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParameterSet {
    pub representative: C,
    pub closure: Closure,
    /// `w` with `Y^h w = v⁰`, reproducing the representative.
    pub witness: Vector,
}

/// Data of the part of `W` where `Y` is invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnclassifiedResidual {
    pub dim: usize,
    /// Eigenvalues and block sizes when the spectrum lies in `ℚ(i)`.
    pub jordan: Option<Vec<EigenBlock>>,
    /// Characteristic polynomial, lowest degree first.
    pub charpoly: Vec<C>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationResult {
    pub core: DistinguishedLabel,
    pub parameters: ParameterSet,
    /// Eigenvalue of the linear part of σ on `v⁰` (`±1` or `±i`).
    pub v0_eigenvalue: Option<C>,
    pub residual_types: Vec<TypeLabel>,
    pub unclassified_residual: Option<UnclassifiedResidual>,
    /// Columns: core chains, residual block chains, then the invertible part.
    pub witness: Matrix,
    pub core_tops: Vec<Vector>,
    pub residual_blocks: Vec<Block>,
    /// `dim ker(Y | core)`.
    pub core_kernel_dim: usize,
    pub core_gram_det_nonzero: bool,
}

impl ClassificationResult {
    /// The invariants compared by equivalence: core, residual types, and the
    /// σ-sign of `v⁰` for σ₊.
    pub fn invariants(&self) -> (DistinguishedLabel, Vec<TypeLabel>, Option<C>) {
        let sector = self.v0_eigenvalue.clone().filter(|e| e.is_real());
        (self.core.clone(), self.residual_types.clone(), sector)
    }

    /// `core=...; residual=...` in the label grammar.
    pub fn summary(&self) -> String {
        crate::labels::render_distinguished(&self.core, &self.residual_types)
    }
}

/// Largest `h` with `v⁰ ∈ Y^h W`.
pub fn distinguished_height(t: &Triple) -> Result<usize, Error> {
    let y = &t.pair.y;
    let w = &t.pair.carrier;
    let mut img = w.clone();
    let mut best = None;
    for h in 0..w.dim().max(1) {
        if !img.contains(&t.v0) {
            break;
        }
        best = Some(h);
        img = img.image(y);
    }
    best.ok_or_else(|| Error::NoDistinguishedHeight("v⁰ does not lie in W".into()))
}

fn sigma_sector(space: &StructuredSpace, v0: &[C]) -> Result<Option<C>, Error> {
    Ok(is_special_vector(space, v0)?.eigenvalue)
}

/// Project onto the σ-eigenspace of sign `s` (σ₊ only).
fn project_sector(space: &StructuredSpace, v: &[C], s: &C) -> Vector {
    let sv = space.sigma(v);
    vec_scale(&vec_add(v, &vec_scale(&sv, s)), &C::real(ratio(1, 2)))
}

fn lift_witness(t: &Triple, h: usize) -> Result<(Vector, Option<C>), Error> {
    let space = t.space();
    let w0 = generalized_zero_part(t);
    let mut w = lift(&t.pair.y, &w0, h, &t.v0)
        .ok_or_else(|| Error::NoDistinguishedHeight(format!("no w with Y^{h} w = v⁰")))?;
    let ev = sigma_sector(space, &t.v0)?;
    if let (Some(s), Some(1)) = (&ev, space.sigma.as_ref().map(|s| s.sign)) {
        w = project_sector(space, &w, s);
    }
    Ok((w, ev))
}

fn generalized_zero_part(t: &Triple) -> Subspace {
    let n = t.dim();
    t.pair.carrier.intersect(&kernel_basis(&t.pair.y.pow(n)))
}

/// `μ = τ(w, v⁰)` for a witness `w` of the distinguished height; without a
/// form the parameters form a scale class with representative 1.
pub fn parameter_set(t: &Triple, h: usize) -> Result<ParameterSet, Error> {
    let (w, _) = lift_witness(t, h)?;
    let space = t.space();
    Ok(match &space.form {
        Some(_) => ParameterSet { representative: space.tau(&w, &t.v0), closure: Closure::Singleton, witness: w },
        None => ParameterSet { representative: C::one(), closure: Closure::RealScaleClass, witness: w },
    })
}

fn bilinear_symmetry(space: &StructuredSpace, h: usize) -> i8 {
    match space.form_kind().map(|k| reduced_form_kind(k, h)) {
        Some(FormKind::Alternating) => -1,
        _ => 1,
    }
}

/// `(e, σe)` with `e = (w − iσw)/2`, so that `w = e + i σe`.
fn quaternionic_frame(space: &StructuredSpace, w: &[C]) -> [Vector; 2] {
    let sw = space.sigma(w);
    let e = vec_scale(&vec_sub(w, &sw.iter().map(|x| x.times_i()).collect::<Vec<_>>()), &C::real(ratio(1, 2)));
    let f = space.sigma(&e);
    [e, f]
}

fn blocks_from_chains(family: Family, chains: &[crate::linalg::Chain], y: &Matrix) -> Result<Vec<Block>, Error> {
    let step = if family == Family::GlMinus { 2 } else { 1 };
    let mut out = Vec::new();
    for group in chains.chunks(step) {
        let h = group[0].height();
        let tops: Vec<Vector> = group.iter().map(|c| c.top().clone()).collect();
        out.push(Block { label: TypeLabel::new(family, h, None)?, basis: chain_vectors(y, &tops, h), tops });
    }
    Ok(out)
}

fn gram(space: &StructuredSpace, basis: &[Vector]) -> Matrix {
    Matrix::from_rows(basis.iter().map(|u| basis.iter().map(|v| space.tau(u, v)).collect()).collect())
}

/// Decompose a triple into its distinguished core and ordinary types.
pub fn classify(t: &Triple) -> Result<ClassificationResult, Error> {
    let space = t.space();
    let y = &t.pair.y;
    let n = t.dim();
    let family = space.family;
    let w0 = generalized_zero_part(t);
    let w1 = t.pair.carrier.image(&y.pow(n));
    let h = distinguished_height(t)?;
    let (w, ev) = lift_witness(t, h)?;
    let sigma_sign = space.sigma.as_ref().map(|s| s.sign);
    let yh = y.pow(h);
    let b = |u: &[C], v: &[C]| reduced_value(space, &yh, u, v);
    let mu = space.form.as_ref().map(|_| space.tau(&w, &t.v0));
    let parameters = match &mu {
        Some(m) => ParameterSet { representative: m.clone(), closure: Closure::Singleton, witness: w.clone() },
        None => ParameterSet { representative: C::one(), closure: Closure::RealScaleClass, witness: w.clone() },
    };

    let no_row = |why: &str| Error::NoCoreRow(format!("{family} at h = {h}: {why}"));
    let (mut tops, kind, eps, modulus): (Vec<Vector>, Kind, Option<i8>, Option<Rational>) = match (family, &mu) {
        (Family::GlPlus, _) => (vec![w.clone()], Kind::Single, None, None),
        (Family::GlMinus, _) => (quaternionic_frame(space, &w).to_vec(), Kind::Double, None, None),
        (Family::OMinus | Family::SpMinus, Some(m)) => {
            if !m.is_zero() {
                return Err(no_row("τ(w, v⁰) ≠ 0 for σ₋"));
            }
            let sw = space.sigma(&w);
            let kappa = b(&sw, &w);
            let (e, r) = if bilinear_symmetry(space, h) < 0 {
                (sign(&kappa.re), kappa.re.abs())
            } else {
                (sign(&kappa.im), kappa.im.abs())
            };
            if r.is_zero() {
                return Err(no_row("the core Z(w) + Z(σw) is degenerate"));
            }
            (vec![w.clone(), sw], Kind::Double, Some(e), Some(r))
        }
        (_, Some(m)) if !m.is_zero() => {
            let val = if family == Family::GlStar && h % 2 == 1 { m.times_i() } else { m.clone() };
            (vec![w.clone()], Kind::Single, Some(sign(&val.re)), Some(val.re.abs()))
        }
        (_, Some(_)) => {
            // μ = 0: adjoin a chain whose top pairs with v⁰.
            let layer = w0.intersect(&kernel_basis(&y.pow(h + 1)));
            let mut cands: Vec<Vector> = Vec::new();
            for c in layer.basis() {
                match (&ev, sigma_sign) {
                    (Some(s), Some(1)) => {
                        cands.push(project_sector(space, c, s));
                        cands.push(project_sector(space, &c.iter().map(|x| x.times_i()).collect::<Vec<_>>(), s));
                    }
                    _ => cands.push(c.clone()),
                }
            }
            let z = cands
                .into_iter()
                .find(|z| !space.tau(z, &t.v0).is_zero())
                .ok_or_else(|| no_row("no vector pairs with v⁰ at the distinguished height"))?;
            let bzw = b(&z, &w);
            let scale = if space.form_kind() == Some(FormKind::Hermitian) { bzw.conj() } else { bzw };
            let z = vec_scale(&z, &scale.inv().unwrap());
            let c = -(&b(&z, &z) * &C::real(ratio(1, 2)));
            let z = vec_add(&z, &vec_scale(&w, &c));
            (vec![w.clone(), z], Kind::Double, None, None)
        }
        (_, None) => unreachable!("form-free families are handled above"),
    };
    let core = DistinguishedLabel::new(family, h, kind, eps, modulus).map_err(|e| no_row(&e.to_string()))?;

    let structure = match (sigma_sign, &ev) {
        (Some(1), Some(s)) => TopStructure::Real(vec![if s == &C::one() { 1 } else { -1 }; tops.len()]),
        (Some(_), _) => TopStructure::Paired,
        _ => TopStructure::Free,
    };
    normalize_tops(space, y, h, &mut tops, &structure)?;
    if matches!(family, Family::OMinus | Family::SpMinus) {
        tops = quaternionic_frame(space, &tops[0]).to_vec();
    }
    let core_basis = chain_vectors(y, &tops, h);
    let core_span = Subspace::span(n, &core_basis);
    if core_span.dim() != core_basis.len() {
        return Err(Error::Malformed("core chains are dependent".into()));
    }
    let core_gram_det_nonzero = space.form.is_none() || !gram(space, &core_basis).det().is_zero();
    if !core_gram_det_nonzero {
        return Err(no_row("core Gram matrix is singular"));
    }
    let core_kernel_dim = core_span.intersect(&kernel_basis(y)).dim();

    let residual_blocks = if space.form.is_some() {
        let rest = orthogonal_complement(space, &w0, &core_basis);
        decompose_in(space, y, &rest)?
    } else {
        let preset: Vec<(Vector, usize)> = tops.iter().map(|t| (t.clone(), h)).collect();
        let chains = sigma_chain_basis(y, &w0, space.sigma.as_ref(), &preset)?;
        blocks_from_chains(family, &chains[preset.len()..], y)?
    };

    let unclassified_residual = if w1.dim() > 0 {
        let yr = w1.restrict(y)?;
        Some(UnclassifiedResidual { dim: w1.dim(), jordan: jordan_data(&yr).ok(), charpoly: yr.charpoly() })
    } else {
        None
    };

    let mut cols = core_basis;
    for bl in &residual_blocks {
        cols.extend(bl.basis.iter().cloned());
    }
    cols.extend(w1.basis().iter().cloned());
    Ok(ClassificationResult {
        core,
        parameters,
        v0_eigenvalue: ev,
        residual_types: collect_labels(residual_blocks.iter().map(|b| b.label.clone())),
        unclassified_residual,
        witness: Matrix::from_columns(n, &cols),
        core_tops: tops,
        residual_blocks,
        core_kernel_dim,
        core_gram_det_nonzero,
    })
}

/// Canonical model of a core: the space, `Y`, and `w` with `v⁰ = Y^h w`.
fn core_model(label: &DistinguishedLabel) -> Result<(StructuredSpace, Matrix, Vector), Error> {
    label.validate()?;
    let h = label.h;
    let f = label.family;
    if label.kind == Kind::Single && f.form_kind().is_some() && h == 0 {
        return Err(Error::ConditionViolated(format!("{f} single-chain row at h = 0 makes v⁰ non-isotropic")));
    }
    let sym = match f.form_kind() {
        Some(FormKind::Hermitian) => if h % 2 == 0 { 1 } else { -1 },
        Some(k) => if reduced_form_kind(k, h) == FormKind::Symmetric { 1 } else { -1 },
        None => 1,
    };
    let signed_mod = || {
        let m = C::real(label.modulus.clone().unwrap());
        if label.eps == Some(-1) { -m } else { m }
    };
    let i = C::i();
    let (r, mt, gram, w): (usize, Option<Matrix>, Option<Matrix>, Vector) = match (f, label.kind) {
        (Family::GlPlus, _) => (1, Some(Matrix::identity(1)), None, vec![C::one()]),
        (Family::GlMinus, _) => (2, Some(sigma_minus_top()), None, vec![C::one(), i.clone()]),
        (Family::GlStar, Kind::Single) => {
            let v = signed_mod();
            let mu = if h % 2 == 1 { -v.times_i() } else { v };
            (1, None, Some(Matrix::scalar(1, &mu)), vec![C::one()])
        }
        (Family::OPlus | Family::SpPlus, Kind::Single) => {
            (1, Some(Matrix::identity(1)), Some(Matrix::scalar(1, &signed_mod())), vec![C::one()])
        }
        (Family::GlStar | Family::OPlus | Family::SpPlus, Kind::Double) => {
            // tops (w, z): B(z, w) = 1, B(w, z) = ±1, B(w, w) = B(z, z) = 0
            let g = Matrix::from_ints(&[&[0, sym as i64], &[1, 0]]);
            let mt = (f != Family::GlStar).then(|| Matrix::identity(2));
            (2, mt, Some(g), vec![C::one(), C::zero()])
        }
        (Family::OMinus | Family::SpMinus, _) => {
            let half = C::real(ratio(1, 2));
            let k = signed_mod();
            let g = if sym > 0 {
                // κ = i r: B(e,e) = B(f,f) = r/2
                Matrix::scalar(2, &(&k * &half))
            } else {
                let x = &k * &half;
                Matrix::from_rows(vec![vec![C::zero(), -x.clone()], vec![x, C::zero()]])
            };
            (2, Some(sigma_minus_top()), Some(g), vec![C::one(), i.clone()])
        }
    };
    let (space, y) = chain_model(f, h, r, mt.as_ref(), gram.as_ref())?;
    let len = h + 1;
    let mut wv = vec![C::zero(); r * len];
    for (a, c) in w.iter().enumerate() {
        wv[a * len] = c.clone();
    }
    Ok((space, y, wv))
}

/// Canonical triple with the given core followed by the residual types.
pub fn synthesize_distinguished(label: &DistinguishedLabel, residual: &[TypeLabel]) -> Result<Triple, Error> {
    let (core_space, core_y, w) = core_model(label)?;
    let mut parts: Vec<(StructuredSpace, Matrix)> = vec![(core_space, core_y)];
    for l in residual {
        if l.family != label.family {
            return Err(Error::InvalidLabel(format!("residual {l} is not in {}", label.family)));
        }
        let p = synthesize_type(l)?;
        parts.push((p.space, p.y));
    }
    let refs: Vec<(&StructuredSpace, &Matrix)> = parts.iter().map(|(s, y)| (s, y)).collect();
    let (space, y) = direct_sum_spaces(&refs)?;
    let n = space.dim();
    let mut wv = w;
    wv.resize(n, C::zero());
    let v0 = y.pow(label.h).apply(&wv);
    let pair = Pair::full(space, y)?;
    Triple::new(pair, v0).map_err(|e| Error::ConditionViolated(e.to_string()))
}

/// `(PYP⁻¹, W, v⁰; σ, τ)` for `P` in the isotropy group of `v⁰`.
pub fn conjugate_triple(t: &Triple, p: &Matrix) -> Result<Triple, Error> {
    let space = t.space();
    let report = group_membership(space, p);
    if !report.is_ok() {
        return Err(Error::NotInIsotropyGroup(report.failures.join("; ")));
    }
    if p.apply(&t.v0) != t.v0 {
        return Err(Error::NotInIsotropyGroup("P v⁰ ≠ v⁰".into()));
    }
    let carrier = t.pair.carrier.image(p);
    if carrier.dim() != t.pair.carrier.dim() || !t.pair.carrier.contains_subspace(&carrier) {
        return Err(Error::NotInIsotropyGroup("P moves the carrier".into()));
    }
    let y = &(p * &t.pair.y) * &p.inverse()?;
    Ok(Triple { pair: Pair { space: space.clone(), y, carrier: t.pair.carrier.clone() }, v0: t.v0.clone() })
}

/// Decision and, when the block data match exactly, a verified `P` with
/// `P Y_a P⁻¹ = Y_b` and `P v⁰_a = v⁰_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub witness: Option<Matrix>,
}

/// Structure of a block in its chain basis: `σ` on tops and `B` on tops.
fn block_data(space: &StructuredSpace, y: &Matrix, tops: &[Vector], h: usize) -> (Vec<Vector>, Vec<C>) {
    let yh = y.pow(h);
    let n = space.dim();
    let sig = match &space.sigma {
        Some(s) => {
            let m = Matrix::from_columns(n, tops);
            tops.iter().map(|t| m.solve(&s.apply(t)).unwrap_or_default()).collect()
        }
        None => Vec::new(),
    };
    let b = match &space.form {
        Some(_) => tops.iter().flat_map(|u| tops.iter().map(|v| reduced_value(space, &yh, u, v)).collect::<Vec<_>>()).collect(),
        None => Vec::new(),
    };
    (sig, b)
}

pub fn triples_equivalent(a: &Triple, b: &Triple) -> Result<Equivalence, Error> {
    if a.family() != b.family() {
        return Err(Error::FamilyMismatch(format!("{} vs {}", a.family(), b.family())));
    }
    let ca = classify(a)?;
    let cb = classify(b)?;
    if a.dim() != b.dim() || a.pair.carrier.dim() != b.pair.carrier.dim() || ca.invariants() != cb.invariants() {
        return Ok(Equivalence { equivalent: false, witness: None });
    }
    let witness = compose_witness(a, b, &ca, &cb);
    Ok(Equivalence { equivalent: true, witness })
}

fn compose_witness(a: &Triple, b: &Triple, ca: &ClassificationResult, cb: &ClassificationResult) -> Option<Matrix> {
    if ca.unclassified_residual.is_some() || cb.unclassified_residual.is_some() || a.pair.carrier.dim() != a.dim() {
        return None;
    }
    let h = ca.core.h;
    if block_data(a.space(), &a.pair.y, &ca.core_tops, h) != block_data(b.space(), &b.pair.y, &cb.core_tops, h) {
        return None;
    }
    let mut cols_a = chain_vectors(&a.pair.y, &ca.core_tops, h);
    let mut cols_b = chain_vectors(&b.pair.y, &cb.core_tops, h);
    let mut used = vec![false; cb.residual_blocks.len()];
    for ba in &ca.residual_blocks {
        let da = block_data(a.space(), &a.pair.y, &ba.tops, ba.label.h);
        let k = cb.residual_blocks.iter().enumerate().position(|(k, bb)| {
            !used[k] && bb.label == ba.label && block_data(b.space(), &b.pair.y, &bb.tops, bb.label.h) == da
        })?;
        used[k] = true;
        cols_a.extend(ba.basis.iter().cloned());
        cols_b.extend(cb.residual_blocks[k].basis.iter().cloned());
    }
    let n = a.dim();
    let ma = Matrix::from_columns(n, &cols_a);
    let mb = Matrix::from_columns(n, &cols_b);
    let p = &mb * &ma.inverse().ok()?;
    let ok = &(&p * &a.pair.y) == &(&b.pair.y * &p)
        && p.apply(&a.v0) == b.v0
        && equal_structure(a.space(), b.space(), &p);
    ok.then_some(p)
}

/// `PσP⁻¹ = σ'` and `τ'(Pu, Pv) = τ(u, v)`.
fn equal_structure(sa: &StructuredSpace, sb: &StructuredSpace, p: &Matrix) -> bool {
    let sigma_ok = match (&sa.sigma, &sb.sigma) {
        (Some(x), Some(y)) => p * &x.matrix == &y.matrix * &p.conj(),
        (None, None) => true,
        _ => false,
    };
    let form_ok = match (&sa.form, &sb.form) {
        (Some(x), Some(y)) => y.pullback(p).matrix == x.matrix,
        (None, None) => true,
        _ => false,
    };
    sigma_ok && form_ok
}

fn random_gaussian(rng: &mut ChaCha8Rng) -> C {
    C::ints(rng.gen_range(-2..=2), rng.gen_range(-1..=1))
}

/// `x ↦ τ(a,x) b − s τ(b,x) a`, or `x ↦ φ(x) b` without a form.
fn elementary_generator(space: &StructuredSpace, a: &[C], b: &[C]) -> Matrix {
    let n = space.dim();
    let s = match space.form_kind() {
        Some(FormKind::Alternating) => -1,
        _ => 1,
    };
    let cols: Vec<Vector> = (0..n)
        .map(|j| {
            let e = crate::linalg::unit_vector(n, j);
            match &space.form {
                Some(_) => {
                    let x = vec_scale(b, &space.tau(a, &e));
                    let y = vec_scale(a, &space.tau(b, &e).scale(&Rational::from_integer(s.into())));
                    vec_sub(&x, &y)
                }
                None => vec_scale(b, &a[j]),
            }
        })
        .collect();
    Matrix::from_columns(n, &cols)
}

/// Average `X` with `σXσ⁻¹`.
fn sigma_average(space: &StructuredSpace, x: &Matrix) -> Matrix {
    match &space.sigma {
        Some(s) => {
            let m = &s.matrix;
            let minv = m.conj().scale(&C::int(s.sign as i64));
            let other = &(m * &x.conj()) * &minv;
            (x + &other).scale(&C::real(ratio(1, 2)))
        }
        None => x.clone(),
    }
}

/// Seeded product of Cayley transforms of elementary isotropy generators.
/// Each factor is verified to lie in the group and to fix `v⁰`.
pub fn random_isotropy_element(space: &StructuredSpace, v0: &[C], seed: u64) -> Result<Matrix, Error> {
    let sp = is_special_vector(space, v0)?;
    if !sp.special {
        return Err(Error::NotSpecial("v⁰".into()));
    }
    let mut fixed = vec![v0.to_vec()];
    if let Some(s) = &space.sigma {
        fixed.push(s.apply(v0));
    }
    random_group_element(space, &fixed, seed)
}

/// Seeded element of the structure group fixing every vector in `fixed`.
pub fn random_group_element(space: &StructuredSpace, fixed: &[Vector], seed: u64) -> Result<Matrix, Error> {
    let n = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<Vector> = (0..n).map(|j| crate::linalg::unit_vector(n, j)).collect();
    // vectors orthogonal to the fixed ones, or functionals vanishing on them
    let perp = if fixed.is_empty() {
        all.clone()
    } else {
        let rows: Vec<Vec<C>> = match &space.form {
            Some(_) => fixed.iter().map(|f| all.iter().map(|e| space.tau(f, e)).collect()).collect(),
            None => fixed.to_vec(),
        };
        Matrix::from_rows(rows).kernel()
    };
    let mut p = Matrix::identity(n);
    if perp.is_empty() {
        return Ok(p);
    }
    let id = Matrix::identity(n);
    let partners: &[Vector] = if space.form.is_some() { &perp } else { &all };
    let trivial = perp.iter().all(|a| {
        partners.iter().all(|b| {
            let ib: Vector = b.iter().map(|x| x.times_i()).collect();
            sigma_average(space, &elementary_generator(space, a, b)).is_zero()
                && sigma_average(space, &elementary_generator(space, a, &ib)).is_zero()
        })
    });
    if trivial {
        return Ok(p);
    }
    let combo = |rng: &mut ChaCha8Rng, basis: &[Vector]| -> Vector {
        let mut v = vec![C::zero(); n];
        for bv in basis {
            if rng.gen_bool(0.6) {
                v = vec_add(&v, &vec_scale(bv, &random_gaussian(rng)));
            }
        }
        v
    };
    let factors = 2;
    let mut made = 0;
    let mut attempts = 0;
    while made < factors {
        attempts += 1;
        if attempts > 64 {
            return Err(Error::GenerationFailed(format!("no group element after {attempts} attempts")));
        }
        let a = combo(&mut rng, &perp);
        let b = combo(&mut rng, partners);
        let x = sigma_average(space, &elementary_generator(space, &a, &b));
        if x.is_zero() {
            continue;
        }
        let Ok(inv) = (&id - &x).inverse() else { continue };
        let c = &inv * &(&id + &x);
        if !group_membership(space, &c).is_ok() || fixed.iter().any(|f| &c.apply(f) != f) {
            continue;
        }
        p = &p * &c;
        made += 1;
    }
    Ok(p)
}

/// Every valid core of a family up to height `max_h`, with the given moduli.
pub fn all_core_labels(family: Family, max_h: usize, moduli: &[Rational]) -> Vec<DistinguishedLabel> {
    let mut out = Vec::new();
    for h in 0..=max_h {
        for kind in [Kind::Single, Kind::Double] {
            let Some((has_eps, has_mod)) = core_shape(family, h, kind) else { continue };
            if kind == Kind::Single && family.form_kind().is_some() && h == 0 {
                continue;
            }
            let signs: Vec<Option<i8>> = if has_eps { vec![Some(1), Some(-1)] } else { vec![None] };
            let mods: Vec<Option<Rational>> =
                if has_mod { moduli.iter().cloned().map(Some).collect() } else { vec![None] };
            for e in &signs {
                for m in &mods {
                    out.push(DistinguishedLabel { family, h, kind, eps: *e, modulus: m.clone() });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    fn label(f: Family, h: usize, kind: Kind, eps: Option<i8>, m: Option<i64>) -> DistinguishedLabel {
        DistinguishedLabel::new(f, h, kind, eps, m.map(rat)).unwrap()
    }

    #[test]
    fn zero_triple() {
        let l = label(Family::GlPlus, 0, Kind::Single, None, None);
        let t = synthesize_distinguished(&l, &[]).unwrap();
        assert_eq!(t.pair.y, Matrix::zeros(1, 1));
        assert_eq!(t.v0, vec![C::one()]);
        let r = classify(&t).unwrap();
        assert_eq!(r.core, l);
        assert_eq!(r.core.to_string(), "gl+:uD[h=0](0)");
        assert_eq!(r.parameters.closure, Closure::RealScaleClass);
        assert_eq!(distinguished_height(&t), Ok(0));
    }

    #[test]
    fn sp_plus_single() {
        let l = label(Family::SpPlus, 1, Kind::Single, Some(1), Some(1));
        let t = synthesize_distinguished(&l, &[]).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.v0, t.pair.y.apply(&[C::one(), C::zero()]));
        let r = classify(&t).unwrap();
        assert_eq!(r.core, l);
        assert_eq!(r.core.to_string(), "sp+:uD[eps=+1,h=1,mod=1](0)");
    }

    #[test]
    fn hermitian_parameter() {
        let l = label(Family::GlStar, 2, Kind::Single, Some(-1), Some(3));
        let t = synthesize_distinguished(&l, &[]).unwrap();
        let p = parameter_set(&t, 2).unwrap();
        assert_eq!(p.representative, C::int(-3));
        assert_eq!(p.closure, Closure::Singleton);
        assert_eq!(t.space().tau(&p.witness, &t.v0), p.representative);
    }

    #[test]
    fn core_plus_residual() {
        let l = label(Family::OPlus, 2, Kind::Single, Some(1), Some(2));
        let res = vec![TypeLabel::new(Family::OPlus, 2, Some(-1)).unwrap()];
        let t = synthesize_distinguished(&l, &res).unwrap();
        let r = classify(&t).unwrap();
        assert_eq!(r.core, l);
        assert_eq!(r.residual_types, res);
        assert_eq!(r.core_kernel_dim, 1);
    }

    #[test]
    fn conditions() {
        let bad = DistinguishedLabel::new(Family::OPlus, 1, Kind::Single, Some(1), Some(rat(1)));
        assert!(matches!(bad, Err(Error::InvalidLabel(_))));
        let l = label(Family::OPlus, 0, Kind::Single, Some(1), Some(1));
        assert!(matches!(synthesize_distinguished(&l, &[]), Err(Error::ConditionViolated(_))));
    }

    #[test]
    fn round_trip_small() {
        for f in Family::ALL {
            for l in all_core_labels(f, 3, &[ratio(1, 2), rat(3)]) {
                let t = synthesize_distinguished(&l, &[]).unwrap();
                let r = classify(&t).unwrap_or_else(|e| panic!("{l}: {e}"));
                assert_eq!(r.core, l);
                assert!(r.residual_types.is_empty());
                assert!(r.core_gram_det_nonzero);
                assert_eq!(r.core_kernel_dim, l.reduced_dim());
                assert_eq!(distinguished_height(&t), Ok(l.h));
            }
        }
    }

    #[test]
    fn isotropy_elements() {
        let (mut moved, mut witnessed, mut total) = (0, 0, 0);
        for f in Family::ALL {
            for l in all_core_labels(f, 2, &[rat(1)]) {
                let res: Vec<TypeLabel> = vec![TypeLabel::new(f, 1, crate::types::type_shape(f, 1).1.then_some(1)).unwrap()];
                let t = synthesize_distinguished(&l, &res).unwrap();
                let base = classify(&t).unwrap();
                for seed in 0..2 {
                    let p = random_isotropy_element(t.space(), &t.v0, seed).unwrap();
                    let t2 = conjugate_triple(&t, &p).unwrap();
                    if p != Matrix::identity(t.dim()) {
                        moved += 1;
                    }
                    let r = classify(&t2).unwrap();
                    assert_eq!(r.invariants(), base.invariants(), "{l} seed {seed}");
                    let eq = triples_equivalent(&t, &t2).unwrap();
                    assert!(eq.equivalent);
                    if eq.witness.is_some() {
                        witnessed += 1;
                    }
                    total += 1;
                }
            }
        }
        eprintln!("moved {moved} witnessed {witnessed} of {total}");
        assert!(moved * 2 > total);
    }

    #[test]
    fn separation() {
        let a = synthesize_distinguished(&label(Family::OPlus, 2, Kind::Single, Some(1), Some(1)), &[]).unwrap();
        let b = synthesize_distinguished(&label(Family::OPlus, 2, Kind::Single, Some(-1), Some(1)), &[]).unwrap();
        assert!(!triples_equivalent(&a, &b).unwrap().equivalent);
        let c = synthesize_distinguished(&label(Family::GlStar, 2, Kind::Single, Some(1), Some(1)), &[]).unwrap();
        let d = synthesize_distinguished(&label(Family::GlStar, 2, Kind::Single, Some(1), Some(2)), &[]).unwrap();
        assert!(!triples_equivalent(&c, &d).unwrap().equivalent);
        assert!(matches!(triples_equivalent(&a, &c), Err(Error::FamilyMismatch(_))));
        let e = triples_equivalent(&a, &a).unwrap();
        assert!(e.equivalent);
        assert_eq!(e.witness, Some(Matrix::identity(3)));
    }

    #[test]
    fn conjugation_errors() {
        let t = synthesize_distinguished(&label(Family::SpPlus, 1, Kind::Single, Some(1), Some(1)), &[]).unwrap();
        assert_eq!(conjugate_triple(&t, &Matrix::identity(2)).unwrap(), t);
        let swap = Matrix::from_ints(&[&[0, -1], &[1, 0]]);
        assert!(matches!(conjugate_triple(&t, &swap), Err(Error::NotInIsotropyGroup(_))));
    }
}
