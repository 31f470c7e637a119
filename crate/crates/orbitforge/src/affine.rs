//! Real affine classical groups as isotropy groups of a special vector in a
//! larger structured space, together with the quaternionic models of the
//! σ₋ cases.
//!
//! Block layout of the extended space: a head of size 0, 1 or 2, the original
//! space, and a tail of size 1 or 2 carrying the fixed vector.
//!
//! | family | case | head | tail | fixed vector |
//! |--------|------|------|------|--------------|
//! | gl+    | 1    | 0    | 1    | `e_{n+1}` |
//! | o+, sp+ | 2   | 1    | 1    | `e_{n+1}` |
//! | gl−    | 3    | 0    | 2    | `e_{m+1} + i f_{m+1}` |
//! | o−, sp− | 4   | 2    | 2    | `e_{m+1} + i f_{m+1}` |
//!
//! Cases 1 and 3 act on row vectors from the right (`x ↦ xA + d`), cases 2
//! and 4 on column vectors from the left (`x ↦ Ax + d`).

use num_traits::Zero;

use crate::distinguished::random_group_element;
use crate::error::Error;
use crate::linalg::{unit_vector, Matrix, Vector};
use crate::scalars::{ratio, C, Q};
use crate::structured::{
    group_membership, quaternionify, signature_matrix, standard_symplectic, AntiLinearMap, Family, Form, FormKind,
    QMatrix, QuaternionicSpace, StructuredSpace,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffineCase {
    /// `Aff Gl(ℝⁿ)`.
    Real,
    /// `Aff O(ℝⁿ, I_{n−p,p})` or `Aff Sp(ℝ²ᵐ)`.
    RealForm,
    /// `Aff Gl(ℍᵐ)`.
    Quaternionic,
    /// `Aff O*(2m)` or `Aff Sp(m−p, p)`.
    QuaternionicForm,
}

impl AffineCase {
    pub fn of(family: Family) -> Result<Self, Error> {
        Ok(match family {
            Family::GlPlus => AffineCase::Real,
            Family::OPlus | Family::SpPlus => AffineCase::RealForm,
            Family::GlMinus => AffineCase::Quaternionic,
            Family::OMinus | Family::SpMinus => AffineCase::QuaternionicForm,
            Family::GlStar => return Err(Error::WrongFamily("no affine correspondence for gl*".into())),
        })
    }

    pub fn number(self) -> u8 {
        match self {
            AffineCase::Real => 1,
            AffineCase::RealForm => 2,
            AffineCase::Quaternionic => 3,
            AffineCase::QuaternionicForm => 4,
        }
    }

    fn head(self) -> usize {
        match self {
            AffineCase::Real | AffineCase::Quaternionic => 0,
            AffineCase::RealForm => 1,
            AffineCase::QuaternionicForm => 2,
        }
    }

    fn tail(self) -> usize {
        match self {
            AffineCase::Real | AffineCase::RealForm => 1,
            _ => 2,
        }
    }

    fn row_action(self) -> bool {
        matches!(self, AffineCase::Real | AffineCase::Quaternionic)
    }
}

/// `x ↦ Ax + d` (or `x ↦ xA + dᵀ` in the row-action cases).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineElement {
    pub linear: Matrix,
    pub translation: Vector,
}

impl AffineElement {
    pub fn identity(n: usize) -> Self {
        AffineElement { linear: Matrix::identity(n), translation: vec![C::zero(); n] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingContext {
    pub family: Family,
    pub case: AffineCase,
    pub n: usize,
    pub p: usize,
    /// The original space in the coordinates used by the displayed block matrices.
    pub base: StructuredSpace,
    pub extended: StructuredSpace,
    pub fixed_vector: Vector,
    /// Corner block `K` of the extended form (`T = [[0,0,K],[0,T̃,0],[L,0,0]]`).
    corner: Option<Matrix>,
}

fn j2() -> Matrix {
    Matrix::from_ints(&[&[0, 1], &[-1, 0]])
}

/// `(ũ, w̃) ↦ (w̄, −ū)`.
fn quaternionic_sigma(m: usize) -> Matrix {
    let mut s = Matrix::zeros(2 * m, 2 * m);
    s.set_block(0, m, &Matrix::identity(m));
    s.set_block(m, 0, &-&Matrix::identity(m));
    s
}

fn anti_diagonal_extension(head: &Matrix, mid: &Matrix, k: &Matrix, l: &Matrix) -> Matrix {
    let h = head.rows();
    let n = mid.rows();
    let mut t = Matrix::zeros(2 * h + n, 2 * h + n);
    t.set_block(0, h + n, k);
    t.set_block(h, h, mid);
    t.set_block(h + n, 0, l);
    t
}

pub fn build_context(family: Family, n: usize, p: usize) -> Result<EmbeddingContext, Error> {
    let case = AffineCase::of(family)?;
    if (family.needs_even_dim() || family.sigma_sign() == Some(-1)) && n % 2 != 0 {
        return Err(Error::BadParity);
    }
    if n == 0 {
        return Err(Error::Malformed("the affine space needs positive dimension".into()));
    }
    let m = n / 2;
    let p_max = match family {
        Family::OPlus => n / 2,
        Family::SpMinus => m,
        _ => 0,
    };
    if p > p_max {
        return Err(Error::BadSignatureParam(format!("p = {p} exceeds {p_max} for {family}")));
    }
    let id1 = Matrix::identity(1);
    let (base, extended, corner) = match family {
        Family::GlPlus => {
            let base = StructuredSpace::new(family, None, Some(AntiLinearMap::new(Matrix::identity(n), 1)?))?;
            let ext = StructuredSpace::new(family, None, Some(AntiLinearMap::new(Matrix::identity(n + 1), 1)?))?;
            (base, ext, None)
        }
        Family::OPlus | Family::SpPlus => {
            let (kind, tt, l) = if family == Family::OPlus {
                (FormKind::Symmetric, signature_matrix(n, p), id1.clone())
            } else {
                (FormKind::Alternating, standard_symplectic(m), -&id1)
            };
            let sig = |d| AntiLinearMap::new(Matrix::identity(d), 1);
            let base = StructuredSpace::new(family, Some(Form::new(tt.clone(), kind)?), Some(sig(n)?))?;
            let t = anti_diagonal_extension(&id1, &tt, &id1, &l);
            let ext = StructuredSpace::new(family, Some(Form::new(t, kind)?), Some(sig(n + 2)?))?;
            (base, ext, Some(id1))
        }
        Family::GlMinus => {
            let ms = quaternionic_sigma(m);
            let base = StructuredSpace::new(family, None, Some(AntiLinearMap::new(ms.clone(), -1)?))?;
            let me = Matrix::block_diag(&[ms, j2()]);
            let ext = StructuredSpace::new(family, None, Some(AntiLinearMap::new(me, -1)?))?;
            (base, ext, None)
        }
        Family::OMinus | Family::SpMinus => {
            let ms = quaternionic_sigma(m);
            let (kind, tt, k) = if family == Family::OMinus {
                (FormKind::Symmetric, Matrix::identity(n), Matrix::identity(2))
            } else {
                // signature pair (m − p, p)
                let s = signature_matrix(m, p);
                let mut t = Matrix::zeros(n, n);
                t.set_block(0, m, &s);
                t.set_block(m, 0, &-&s);
                (FormKind::Alternating, t, -&j2())
            };
            let base = StructuredSpace::new(
                family,
                Some(Form::new(tt.clone(), kind)?),
                Some(AntiLinearMap::new(ms.clone(), -1)?),
            )?;
            let t = anti_diagonal_extension(&Matrix::identity(2), &tt, &k, &k);
            let me = Matrix::block_diag(&[j2(), ms, j2()]);
            let ext = StructuredSpace::new(family, Some(Form::new(t, kind)?), Some(AntiLinearMap::new(me, -1)?))?;
            (base, ext, Some(k))
        }
        Family::GlStar => unreachable!(),
    };
    let total = extended.dim();
    let fixed_vector = if case.tail() == 1 {
        unit_vector(total, total - 1)
    } else {
        let mut v = unit_vector(total, total - 2);
        v[total - 1] = C::i();
        v
    };
    Ok(EmbeddingContext { family, case, n, p, base, extended, fixed_vector, corner })
}

/// Translation block: a column `d` (case 2), `[u, −σ̄ū]` (case 4), or the
/// transposes in the row-action cases.
fn translation_block(ctx: &EmbeddingContext, u: &[C]) -> Matrix {
    let n = ctx.n;
    let col = Matrix::from_columns(n, &[u.to_vec()]);
    let block = if ctx.case.tail() == 2 {
        let ms = &ctx.base.sigma.as_ref().unwrap().matrix;
        let partner: Vector = ms.apply(&u.iter().map(|x| -x.conj()).collect::<Vec<_>>());
        Matrix::from_columns(n, &[u.to_vec(), partner])
    } else {
        col
    };
    if ctx.case.row_action() {
        block.transpose()
    } else {
        block
    }
}

impl EmbeddingContext {
    pub fn dim(&self) -> usize {
        self.extended.dim()
    }

    /// `a ∘ b` in the convention of the case, so that
    /// `embed(compose(a, b)) = embed(a)·embed(b)` when embed is a homomorphism.
    pub fn compose(&self, a: &AffineElement, b: &AffineElement) -> AffineElement {
        let linear = &a.linear * &b.linear;
        let translation = if self.case.row_action() {
            crate::linalg::vec_add(&b.linear.transpose().apply(&a.translation), &b.translation)
        } else {
            crate::linalg::vec_add(&a.linear.apply(&b.translation), &a.translation)
        };
        AffineElement { linear, translation }
    }

    pub fn validate(&self, a: &AffineElement) -> Result<(), Error> {
        if a.linear.rows() != self.n || a.linear.cols() != self.n || a.translation.len() != self.n {
            return Err(Error::DimensionMismatch(format!("affine element of size {}", self.n)));
        }
        group_membership(&self.base, &a.linear).into_result(Error::NotInGroup)?;
        if self.case.tail() == 1 && self.base.sigma(&a.translation) != a.translation {
            return Err(Error::NotInGroup("translation is not real".into()));
        }
        Ok(())
    }

    /// Seeded affine element with small integer entries.
    pub fn random_element(&self, seed: u64) -> Result<AffineElement, Error> {
        use rand::{Rng, SeedableRng};
        let linear = random_group_element(&self.base, &[], seed)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let real = self.case.tail() == 1;
        let translation = (0..self.n)
            .map(|_| C::ints(rng.gen_range(-3..=3), if real { 0 } else { rng.gen_range(-3..=3) }))
            .collect();
        Ok(AffineElement { linear, translation })
    }
}

/// The isotropy-group element representing `a`; verified before returning.
pub fn embed(ctx: &EmbeddingContext, a: &AffineElement) -> Result<Matrix, Error> {
    ctx.validate(a)?;
    let (h, n, t) = (ctx.case.head(), ctx.n, ctx.case.tail());
    let mut g = Matrix::identity(ctx.dim());
    g.set_block(h, h, &a.linear);
    let d = translation_block(ctx, &a.translation);
    if ctx.case.row_action() {
        g.set_block(n, 0, &d);
    } else {
        g.set_block(h, 0, &d);
        // r = −K⁻¹ dᵀ T̃ A,  c = −½ K⁻¹ dᵀ T̃ d
        let k_inv = ctx.corner.as_ref().unwrap().inverse()?;
        let tt = &ctx.base.form.as_ref().unwrap().matrix;
        let dt = &d.transpose() * tt;
        let r = -&(&k_inv * &(&dt * &a.linear));
        let c = (&k_inv * &(&dt * &d)).scale(&C::real(ratio(-1, 2)));
        g.set_block(h + n, h, &r);
        g.set_block(h + n, 0, &c);
    }
    debug_assert_eq!(g.rows(), h + n + t);
    verify_isotropy(ctx, &g).map_err(|e| Error::NotInGroup(format!("embedded element fails: {e}")))?;
    Ok(g)
}

fn verify_isotropy(ctx: &EmbeddingContext, g: &Matrix) -> Result<(), Error> {
    if g.rows() != ctx.dim() || g.cols() != ctx.dim() {
        return Err(Error::DimensionMismatch(format!("expected a {0}×{0} matrix", ctx.dim())));
    }
    group_membership(&ctx.extended, g).into_result(Error::NotInIsotropyGroup)?;
    if g.apply(&ctx.fixed_vector) != ctx.fixed_vector {
        return Err(Error::NotInIsotropyGroup("g does not fix v⁰".into()));
    }
    Ok(())
}

/// Inverse of [`embed`] on the isotropy group.
pub fn project(ctx: &EmbeddingContext, g: &Matrix) -> Result<AffineElement, Error> {
    verify_isotropy(ctx, g)?;
    let (h, n, t) = (ctx.case.head(), ctx.n, ctx.case.tail());
    let total = ctx.dim();
    let shape_fail = |what: &str| Err(Error::NotInIsotropyGroup(format!("block {what} has the wrong shape")));
    if g.submatrix(h, h + n, n, t) != Matrix::zeros(n, t) || g.submatrix(h + n, h + n, t, t) != Matrix::identity(t) {
        return shape_fail("column of v⁰");
    }
    if h > 0 && g.submatrix(0, 0, h, total) != Matrix::identity(total).submatrix(0, 0, h, total) {
        return shape_fail("head row");
    }
    let linear = g.submatrix(h, h, n, n);
    let translation = if ctx.case.row_action() { g.row(n)[..n].to_vec() } else { g.column(0)[h..h + n].to_vec() };
    let a = AffineElement { linear, translation };
    ctx.validate(&a).map_err(|e| Error::NotInIsotropyGroup(e.to_string()))?;
    Ok(a)
}

/// `ρ ∘ g ∘ ρ⁻¹` on quaternionic coordinates: rows act on the right, so the
/// model of `g·h` is `model(h)·model(g)`.
pub fn quaternionic_model(ctx: &EmbeddingContext, g: &Matrix) -> Result<QMatrix, Error> {
    let qs = quaternionic_structure(ctx)?;
    let m = &ctx.extended.sigma.as_ref().unwrap().matrix;
    if g.rows() != ctx.dim() || g.cols() != ctx.dim() {
        return Err(Error::DimensionMismatch(format!("expected a {0}×{0} matrix", ctx.dim())));
    }
    if g * m != m * &g.conj() {
        return Err(Error::NotInGroup("g does not commute with σ".into()));
    }
    let rows = qs.basis.iter().map(|b| qs.coordinates(&g.apply(b))).collect();
    Ok(QMatrix::from_rows(rows))
}

pub fn quaternionic_structure(ctx: &EmbeddingContext) -> Result<QuaternionicSpace, Error> {
    match ctx.case {
        AffineCase::Quaternionic | AffineCase::QuaternionicForm => quaternionify(&ctx.extended),
        _ => Err(Error::WrongFamily(format!("{} has no quaternionic model", ctx.family))),
    }
}

/// Quaternionic affine data `(L, t)` of an isotropy element: the model is
/// `[[L, t], [0, 1]]` in case 3 and carries `(L, t)` in its middle rows in case 4.
pub fn quaternionic_affine(ctx: &EmbeddingContext, g: &Matrix) -> Result<(QMatrix, Vec<Q>), Error> {
    verify_isotropy(ctx, g)?;
    let model = quaternionic_model(ctx, g)?;
    let rows = model.to_rows();
    let off = usize::from(ctx.case == AffineCase::QuaternionicForm);
    let m = ctx.n / 2;
    let last = off + m;
    let lin: Vec<Vec<Q>> = rows[off..off + m].iter().map(|r| r[off..off + m].to_vec()).collect();
    let t: Vec<Q> = rows[off..off + m].iter().map(|r| r[last].clone()).collect();
    Ok((QMatrix::from_rows(lin), t))
}

/// `embed(a)·embed(b) − embed(a ∘ b)`; zero exactly when embed is multiplicative on the pair.
pub fn homomorphism_defect(ctx: &EmbeddingContext, a: &AffineElement, b: &AffineElement) -> Result<Matrix, Error> {
    let lhs = &embed(ctx, a)? * &embed(ctx, b)?;
    Ok(&lhs - &embed(ctx, &ctx.compose(a, b))?)
}

pub fn is_identity_q(m: &QMatrix) -> bool {
    *m == QMatrix::identity(m.rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;
    use crate::structured::negative_index;
    use num_traits::One;

    fn all_contexts() -> Vec<EmbeddingContext> {
        let mut out = Vec::new();
        for f in Family::ALL {
            for n in [1, 2, 4] {
                for p in 0..=n {
                    if let Ok(c) = build_context(f, n, p) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn contexts() {
        let c = build_context(Family::GlPlus, 2, 0).unwrap();
        assert_eq!(c.dim(), 3);
        assert_eq!(c.fixed_vector, unit_vector(3, 2));
        let o = build_context(Family::OPlus, 2, 1).unwrap();
        assert_eq!(o.dim(), 4);
        assert_eq!(negative_index(&o.extended.form.as_ref().unwrap().matrix), 2);
        let sp = build_context(Family::SpPlus, 2, 0).unwrap();
        assert_eq!(sp.extended.form_kind(), Some(FormKind::Alternating));
        assert_eq!(build_context(Family::SpPlus, 3, 0), Err(Error::BadParity));
        assert!(matches!(build_context(Family::GlStar, 2, 0), Err(Error::WrongFamily(_))));
        assert!(matches!(build_context(Family::OPlus, 2, 2), Err(Error::BadSignatureParam(_))));
        for n in 1..=4 {
            for p in 0..=n / 2 {
                let c = build_context(Family::OPlus, n, p).unwrap();
                assert_eq!(negative_index(&c.extended.form.as_ref().unwrap().matrix), n - p + 1);
            }
        }
    }

    #[test]
    fn identity_and_corner() {
        for c in all_contexts() {
            let g = embed(&c, &AffineElement::identity(c.n)).unwrap();
            assert_eq!(g, Matrix::identity(c.dim()));
            assert_eq!(project(&c, &g).unwrap(), AffineElement::identity(c.n));
        }
        let c = build_context(Family::OPlus, 2, 1).unwrap();
        let a = AffineElement { linear: Matrix::identity(2), translation: vec![C::one(), C::zero()] };
        let g = embed(&c, &a).unwrap();
        assert_eq!(g[(3, 0)], C::real(ratio(1, 2)));
        let sp = build_context(Family::SpPlus, 2, 0).unwrap();
        let g = embed(&sp, &a).unwrap();
        assert_eq!(g[(3, 0)], C::zero());
        assert_eq!(g.row(3), vec![C::zero(), C::zero(), C::int(-1), C::one()]);
    }

    #[test]
    fn round_trips() {
        for c in all_contexts() {
            for seed in 0..4 {
                let a = c.random_element(seed).unwrap();
                let g = embed(&c, &a).unwrap();
                assert_eq!(g.apply(&c.fixed_vector), c.fixed_vector);
                assert_eq!(project(&c, &g).unwrap(), a, "{} n={}", c.family, c.n);
            }
        }
    }

    #[test]
    fn multiplicative_cases() {
        for c in all_contexts() {
            let mut defect = false;
            for seed in 0..6 {
                let a = c.random_element(seed).unwrap();
                let b = c.random_element(seed + 100).unwrap();
                defect |= !homomorphism_defect(&c, &a, &b).unwrap().is_zero();
            }
            let expected = matches!(c.family, Family::GlPlus | Family::OPlus | Family::GlMinus);
            assert_eq!(!defect, expected, "{} n={} p={}", c.family, c.n, c.p);
        }
    }

    #[test]
    fn rejections() {
        let sp = build_context(Family::SpPlus, 2, 0).unwrap();
        let bad = AffineElement { linear: Matrix::from_ints(&[&[2, 0], &[0, 1]]), translation: vec![C::zero(); 2] };
        assert!(matches!(embed(&sp, &bad), Err(Error::NotInGroup(_))));
        let o = build_context(Family::OPlus, 1, 0).unwrap();
        let mut g = Matrix::identity(3);
        g[(1, 0)] = C::one();
        assert!(matches!(project(&o, &g), Err(Error::NotInIsotropyGroup(_))));
        let _ = rat(0);
    }

    #[test]
    fn quaternionic_models() {
        for c in all_contexts().into_iter().filter(|c| c.case.tail() == 2) {
            let qs = quaternionic_structure(&c).unwrap();
            let id = quaternionic_model(&c, &Matrix::identity(c.dim())).unwrap();
            assert!(is_identity_q(&id));
            let a = c.random_element(1).unwrap();
            let b = c.random_element(2).unwrap();
            let (ga, gb) = (embed(&c, &a).unwrap(), embed(&c, &b).unwrap());
            let ma = quaternionic_model(&c, &ga).unwrap();
            let mb = quaternionic_model(&c, &gb).unwrap();
            assert_eq!(quaternionic_model(&c, &(&ga * &gb)).unwrap(), mb.mul(&ma));
            if let Some(gq) = &qs.qform {
                assert_eq!(&ma.mul(gq).mul(&ma.q_transpose()), gq, "{}", c.family);
            }
            let (l, t) = quaternionic_affine(&c, &ga).unwrap();
            assert_eq!(l.rows(), c.n / 2);
            assert_eq!(t.len(), c.n / 2);
        }
        let g = build_context(Family::GlMinus, 2, 0).unwrap();
        let (l, t) = quaternionic_affine(&g, &Matrix::identity(4)).unwrap();
        assert!(is_identity_q(&l));
        assert!(t.iter().all(|x| x.is_zero()));
    }
}
