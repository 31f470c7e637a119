//! Spaces carrying a bilinear or hermitian form and an anti-linear map, the
//! seven real classical families, their standard models, and the quaternionic
//! picture of spaces with `σ² = −id`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{dot, is_zero_vector, vec_conj, Matrix, Vector};
use crate::scalars::{C, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `Gl(n,ℝ)`
    GlPlus,
    /// `U*(n)`
    GlMinus,
    /// `U(n−p,p)`
    GlStar,
    /// `O(n−p,p)`
    OPlus,
    /// `O*(n)`
    OMinus,
    /// `Sp(n,ℝ)`
    SpPlus,
    /// `Sp(n−p,p)`
    SpMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormKind {
    Symmetric,
    Alternating,
    Hermitian,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::GlPlus,
        Family::GlMinus,
        Family::GlStar,
        Family::OPlus,
        Family::OMinus,
        Family::SpPlus,
        Family::SpMinus,
    ];

    /// `Some(+1)` for σ₊, `Some(−1)` for σ₋, `None` without an anti-linear map.
    pub fn sigma_sign(self) -> Option<i8> {
        match self {
            Family::GlPlus | Family::OPlus | Family::SpPlus => Some(1),
            Family::GlMinus | Family::OMinus | Family::SpMinus => Some(-1),
            Family::GlStar => None,
        }
    }

    pub fn form_kind(self) -> Option<FormKind> {
        match self {
            Family::GlPlus | Family::GlMinus => None,
            Family::GlStar => Some(FormKind::Hermitian),
            Family::OPlus | Family::OMinus => Some(FormKind::Symmetric),
            Family::SpPlus | Family::SpMinus => Some(FormKind::Alternating),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Family::GlPlus => "gl+",
            Family::GlMinus => "gl-",
            Family::GlStar => "gl*",
            Family::OPlus => "o+",
            Family::OMinus => "o-",
            Family::SpPlus => "sp+",
            Family::SpMinus => "sp-",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Family::GlPlus => "gl_sigma_plus",
            Family::GlMinus => "gl_sigma_minus",
            Family::GlStar => "gl_tau_star",
            Family::OPlus => "o_sigma_plus",
            Family::OMinus => "o_sigma_minus",
            Family::SpPlus => "sp_sigma_plus",
            Family::SpMinus => "sp_sigma_minus",
        }
    }

    pub fn group_name(self) -> &'static str {
        match self {
            Family::GlPlus => "Gl(n,R)",
            Family::GlMinus => "U*(n)",
            Family::GlStar => "U(n-p,p)",
            Family::OPlus => "O(n-p,p)",
            Family::OMinus => "O*(n)",
            Family::SpPlus => "Sp(n,R)",
            Family::SpMinus => "Sp(n-p,p)",
        }
    }

    /// Whether the standard model takes a signature parameter.
    pub fn has_signature(self) -> bool {
        matches!(self, Family::GlStar | Family::OPlus | Family::SpMinus)
    }

    pub fn needs_even_dim(self) -> bool {
        matches!(self, Family::GlMinus | Family::OMinus | Family::SpPlus | Family::SpMinus)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s || f.long_name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

/// `σ(v) = M·conj(v)` with `M·conj(M) = sign·I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntiLinearMap {
    pub matrix: Matrix,
    pub sign: i8,
}

impl AntiLinearMap {
    pub fn new(matrix: Matrix, sign: i8) -> Result<Self, Error> {
        let sq = &matrix * &matrix.conj();
        if sq != Matrix::scalar(matrix.rows(), &C::int(sign as i64)) {
            return Err(Error::Malformed(format!("anti-linear map does not square to {sign}·id")));
        }
        Ok(AntiLinearMap { matrix, sign })
    }

    pub fn apply(&self, v: &[C]) -> Vector {
        self.matrix.apply(&vec_conj(v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Matrix of `P σ P⁻¹`.
    pub fn conjugate_by(&self, p: &Matrix, p_inv: &Matrix) -> AntiLinearMap {
        AntiLinearMap { matrix: &(p * &self.matrix) * &p_inv.conj(), sign: self.sign }
    }
}

/// Gram matrix `T` with `τ(u,v) = vᵀTu` (bilinear) or `τ*(u,v) = ūᵀTv` (hermitian).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub matrix: Matrix,
    pub kind: FormKind,
}

impl Form {
    pub fn new(matrix: Matrix, kind: FormKind) -> Result<Self, Error> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("form matrix must be square".into()));
        }
        let ok = match kind {
            FormKind::Symmetric => matrix.transpose() == matrix,
            FormKind::Alternating => matrix.transpose() == -&matrix,
            FormKind::Hermitian => matrix.adjoint() == matrix,
        };
        if !ok {
            return Err(Error::Malformed(format!("form matrix is not {kind:?}")));
        }
        Ok(Form { matrix, kind })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eval(&self, u: &[C], v: &[C]) -> C {
        match self.kind {
            FormKind::Hermitian => dot(&vec_conj(u), &self.matrix.apply(v)),
            _ => dot(v, &self.matrix.apply(u)),
        }
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.matrix.det().is_zero()
    }

    /// Gram matrix of the pulled-back form `(u,v) ↦ τ(Pu, Pv)`.
    pub fn pullback(&self, p: &Matrix) -> Form {
        let m = match self.kind {
            FormKind::Hermitian => &(&p.adjoint() * &self.matrix) * p,
            _ => &(&p.transpose() * &self.matrix) * p,
        };
        Form { matrix: m, kind: self.kind }
    }

    /// Symmetry sign `s` with `τ(v,u) = s·τ(u,v)` (conjugated for hermitian).
    pub fn symmetry(&self) -> i8 {
        match self.kind {
            FormKind::Alternating => -1,
            _ => 1,
        }
    }
}

pub fn evaluate_form(f: &Form, u: &[C], v: &[C]) -> Result<C, Error> {
    if u.len() != f.dim() || v.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "form of dimension {} applied to vectors of length {} and {}",
            f.dim(),
            u.len(),
            v.len()
        )));
    }
    Ok(f.eval(u, v))
}

/// Outcome of a structural check; empty `failures` means success.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub failures: Vec<String>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    pub fn into_result(self, wrap: impl Fn(String) -> Error) -> Result<(), Error> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(wrap(self.failures.join("; ")))
        }
    }
}

fn first_difference(a: &Matrix, b: &Matrix) -> Option<(usize, usize)> {
    (0..a.rows())
        .flat_map(|i| (0..a.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| a[(i, j)] != b[(i, j)])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredSpace {
    pub family: Family,
    pub form: Option<Form>,
    pub sigma: Option<AntiLinearMap>,
    dim: usize,
}

impl StructuredSpace {
    /// Checks family consistency, nondegeneracy and `σ*τ = τ̄`.
    pub fn new(family: Family, form: Option<Form>, sigma: Option<AntiLinearMap>) -> Result<Self, Error> {
        let dim = match (&form, &sigma) {
            (Some(f), _) => f.dim(),
            (None, Some(s)) => s.dim(),
            (None, None) => {
                return Err(Error::Malformed(format!("{family} needs a form or an anti-linear map")))
            }
        };
        if form.as_ref().map(|f| f.kind) != family.form_kind() {
            return Err(Error::Malformed(format!("{family} needs form kind {:?}", family.form_kind())));
        }
        if sigma.as_ref().map(|s| s.sign) != family.sigma_sign() {
            return Err(Error::Malformed(format!("{family} needs anti-linear sign {:?}", family.sigma_sign())));
        }
        if let Some(s) = &sigma {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch("form and anti-linear map sizes differ".into()));
            }
        }
        if let Some(f) = &form {
            if !f.is_nondegenerate() {
                return Err(Error::Malformed("form is degenerate".into()));
            }
        }
        let space = StructuredSpace { family, form, sigma, dim };
        check_compatibility(&space).into_result(Error::Malformed)?;
        Ok(space)
    }

    pub fn standard(family: Family, n: usize, p: usize) -> Result<Self, Error> {
        standard_space(family, n, p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self, u: &[C], v: &[C]) -> C {
        self.form.as_ref().expect("space has a form").eval(u, v)
    }

    pub fn sigma(&self, v: &[C]) -> Vector {
        self.sigma.as_ref().expect("space has an anti-linear map").apply(v)
    }

    pub fn form_kind(&self) -> Option<FormKind> {
        self.form.as_ref().map(|f| f.kind)
    }

    /// The space transported by `P`: `σ' = PσP⁻¹`, `τ'(Pu,Pv) = τ(u,v)`.
    pub fn transport(&self, p: &Matrix) -> Result<StructuredSpace, Error> {
        let p_inv = p.inverse()?;
        Ok(StructuredSpace {
            family: self.family,
            form: self.form.as_ref().map(|f| f.pullback(&p_inv)),
            sigma: self.sigma.as_ref().map(|s| s.conjugate_by(p, &p_inv)),
            dim: self.dim,
        })
    }

    /// Restriction to the span of the given basis columns.
    pub fn restrict(&self, basis: &Matrix) -> Result<StructuredSpace, Error> {
        let d = basis.cols();
        let sigma = match &self.sigma {
            Some(s) => {
                let img = &s.matrix * &basis.conj();
                let m = basis.solve_matrix(&img).ok_or(Error::NotInvariant)?;
                Some(AntiLinearMap { matrix: m, sign: s.sign })
            }
            None => None,
        };
        let form = self.form.as_ref().map(|f| f.pullback(basis));
        if let Some(f) = &form {
            if !f.is_nondegenerate() {
                return Err(Error::Malformed("form is degenerate on the subspace".into()));
            }
        }
        Ok(StructuredSpace { family: self.family, form, sigma, dim: d })
    }

    /// Hermitian matrix `A` with `H(u,v) = ū^T A v`, where `H = τ*` or
    /// `H(u,v) = τ(σu, v)`. `None` when that form is not hermitian.
    pub fn hermitian_matrix(&self) -> Option<Matrix> {
        let f = self.form.as_ref()?;
        let a = match (&self.sigma, f.kind) {
            (None, FormKind::Hermitian) => f.matrix.clone(),
            (Some(s), _) => (&f.matrix * &s.matrix).transpose(),
            _ => return None,
        };
        (a.adjoint() == a).then_some(a)
    }
}

/// `I_{n−p,p} = diag(−I_{n−p}, I_p)`.
pub fn signature_matrix(n: usize, p: usize) -> Matrix {
    let d: Vec<C> = (0..n).map(|k| C::int(if k < n - p { -1 } else { 1 })).collect();
    Matrix::diag(&d)
}

/// `J = [[0, I_m], [−I_m, 0]]`.
pub fn standard_symplectic(m: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        j[(k, m + k)] = C::one();
        j[(m + k, k)] = -C::one();
    }
    j
}

/// Matrix of `(z,w) ↦ (−S w̄, S z̄)` for `S = I_{m−p,p}`.
fn quaternionic_block(m: usize, p: usize) -> Matrix {
    let s = signature_matrix(m, p);
    let mut a = Matrix::zeros(2 * m, 2 * m);
    a.set_block(0, m, &(-&s));
    a.set_block(m, 0, &s);
    a
}

fn check_signature(family: Family, n: usize, p: usize) -> Result<(), Error> {
    let max = match family {
        Family::GlStar | Family::OPlus | Family::SpMinus => n / 2,
        _ => 0,
    };
    if p > max {
        return Err(Error::BadSignatureParam(format!("{family} with n = {n} needs 0 ≤ p ≤ {max}, got {p}")));
    }
    Ok(())
}

/// The standard anti-linear map of a family.
pub fn standard_sigma(family: Family, n: usize, p: usize) -> Result<AntiLinearMap, Error> {
    if n == 0 {
        return Err(Error::DimensionMismatch("dimension must be positive".into()));
    }
    if family.needs_even_dim() && n % 2 == 1 {
        return Err(Error::BadParity);
    }
    check_signature(family, n, p)?;
    let (m, sign) = match family {
        Family::GlPlus | Family::SpPlus => (Matrix::identity(n), 1),
        Family::OPlus => (signature_matrix(n, p), 1),
        Family::GlMinus | Family::OMinus => (-&quaternionic_block(n / 2, 0), -1),
        Family::SpMinus => (quaternionic_block(n / 2, p), -1),
        Family::GlStar => {
            return Err(Error::WrongFamily("gl* carries a hermitian form instead of σ".into()))
        }
    };
    AntiLinearMap::new(m, sign)
}

/// Standard model: the form and anti-linear map of the family on `ℂⁿ`.
pub fn standard_space(family: Family, n: usize, p: usize) -> Result<StructuredSpace, Error> {
    if n == 0 {
        return Err(Error::DimensionMismatch("dimension must be positive".into()));
    }
    if family.needs_even_dim() && n % 2 == 1 {
        return Err(Error::BadParity);
    }
    check_signature(family, n, p)?;
    let sigma = match family {
        Family::GlStar => None,
        _ => Some(standard_sigma(family, n, p)?),
    };
    let form = match family {
        Family::GlPlus | Family::GlMinus => None,
        Family::GlStar => Some(Form { matrix: signature_matrix(n, p), kind: FormKind::Hermitian }),
        Family::OPlus | Family::OMinus => Some(Form { matrix: Matrix::identity(n), kind: FormKind::Symmetric }),
        Family::SpPlus | Family::SpMinus => {
            Some(Form { matrix: standard_symplectic(n / 2), kind: FormKind::Alternating })
        }
    };
    StructuredSpace::new(family, form, sigma)
}

/// `σ² = sign·id` and `τ(σu,σv) = conj τ(u,v)` on basis pairs.
pub fn check_compatibility(space: &StructuredSpace) -> Report {
    let mut r = Report::default();
    let Some(s) = &space.sigma else {
        return r;
    };
    let sq = &s.matrix * &s.matrix.conj();
    if let Some((i, j)) = first_difference(&sq, &Matrix::scalar(s.dim(), &C::int(s.sign as i64))) {
        r.fail(format!("σ² ≠ {}·id at entry ({i},{j})", s.sign));
    }
    if let Some(f) = &space.form {
        let lhs = match f.kind {
            FormKind::Hermitian => &(&s.matrix.adjoint() * &f.matrix) * &s.matrix,
            _ => &(&s.matrix.transpose() * &f.matrix) * &s.matrix,
        };
        if let Some((i, j)) = first_difference(&lhs, &f.matrix.conj()) {
            r.fail(format!("τ(σu,σv) ≠ conj τ(u,v) for basis pair (e{j}, e{i})"));
        }
    }
    r
}

/// `X` commutes with `σ` and `τ(Xu,v) + τ(u,Xv) = 0`.
pub fn algebra_membership(space: &StructuredSpace, x: &Matrix) -> Report {
    let mut r = Report::default();
    if x.rows() != space.dim() || x.cols() != space.dim() {
        r.fail("dimension mismatch".into());
        return r;
    }
    if let Some(s) = &space.sigma {
        if x * &s.matrix != &s.matrix * &x.conj() {
            r.fail("X does not commute with σ".into());
        }
    }
    if let Some(f) = &space.form {
        let xt = match f.kind {
            FormKind::Hermitian => x.adjoint(),
            _ => x.transpose(),
        };
        let m = &(&xt * &f.matrix) + &(&f.matrix * x);
        if let Some((i, j)) = first_difference(&m, &Matrix::zeros(space.dim(), space.dim())) {
            r.fail(format!("τ(Xu,v) + τ(u,Xv) ≠ 0 at basis pair ({i},{j})"));
        }
    }
    r
}

/// `P` is invertible, commutes with `σ` and preserves `τ`.
pub fn group_membership(space: &StructuredSpace, p: &Matrix) -> Report {
    let mut r = Report::default();
    if p.rows() != space.dim() || p.cols() != space.dim() {
        r.fail("dimension mismatch".into());
        return r;
    }
    if p.det().is_zero() {
        r.fail("P is singular".into());
    }
    if let Some(s) = &space.sigma {
        if p * &s.matrix != &s.matrix * &p.conj() {
            r.fail("P does not commute with σ".into());
        }
    }
    if let Some(f) = &space.form {
        if f.pullback(p).matrix != f.matrix {
            r.fail("P does not preserve τ".into());
        }
    }
    r
}

/// Outcome of the special-vector test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Specialness {
    pub special: bool,
    /// `λ` with `σ(v) = λv` (σ₊, λ = ±1) or `M v = λv` (σ₋, λ = ±i).
    pub eigenvalue: Option<C>,
    pub isotropic: bool,
}

/// A vector is special when the anti-linear map acts on it by a sign (σ₊),
/// or its linear part acts by `±i` (σ₋), and it is isotropic for the form.
pub fn is_special_vector(space: &StructuredSpace, v: &[C]) -> Result<Specialness, Error> {
    if v.len() != space.dim() {
        return Err(Error::DimensionMismatch("vector length".into()));
    }
    if is_zero_vector(v) {
        return Err(Error::ZeroVector);
    }
    let eigenvalue = match &space.sigma {
        None => None,
        Some(s) => {
            let (img, cands) = if s.sign > 0 {
                (s.apply(v), [C::one(), -C::one()])
            } else {
                (s.matrix.apply(v), [C::i(), -C::i()])
            };
            cands.into_iter().find(|l| img.iter().zip(v).all(|(a, b)| *a == l * b))
        }
    };
    let isotropic = space.form.as_ref().map_or(true, |f| f.eval(v, v).is_zero());
    let special = isotropic && (space.sigma.is_none() || eigenvalue.is_some());
    Ok(Specialness { special, eigenvalue, isotropic })
}

/// `X ∈ g` and `X v⁰ = 0`.
pub fn isotropy_membership(space: &StructuredSpace, x: &Matrix, v0: &[C]) -> Result<Report, Error> {
    let sp = is_special_vector(space, v0)?;
    if !sp.special {
        return Err(Error::NotSpecial("v⁰ fails the special-vector test".into()));
    }
    let mut r = algebra_membership(space, x);
    if r.is_ok() && !is_zero_vector(&x.apply(v0)) {
        r.fail("X v⁰ ≠ 0".into());
    }
    Ok(r)
}

/// Inertia `(positive, negative, zero)` of a hermitian matrix by exact
/// congruence diagonalization.
pub fn hermitian_inertia(a: &Matrix) -> (usize, usize, usize) {
    assert!(a.is_square() && a.adjoint() == *a, "matrix must be hermitian");
    let mut m = a.clone();
    let n = m.rows();
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        if m[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !m[(j, j)].is_zero()) {
                congruence_swap(&mut m, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !m[(k, j)].is_zero()) {
                // add (1 or i)·e_j to e_k so that the diagonal becomes nonzero
                let c = if m[(k, j)].re.is_zero() { C::i() } else { C::one() };
                congruence_add(&mut m, k, j, &c);
            } else {
                k += 1;
                continue;
            }
        }
        let d = m[(k, k)].re.clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for j in k + 1..n {
            if !m[(k, j)].is_zero() {
                // e_j ← e_j − (m_kj / m_kk) e_k
                let c = -(&m[(k, j)] / &m[(k, k)]);
                congruence_add(&mut m, j, k, &c);
            }
        }
        k += 1;
    }
    (pos, neg, n - pos - neg)
}

/// Basis change `e_a ← e_a + c·e_b` applied as `Pᴴ M P`.
fn congruence_add(m: &mut Matrix, a: usize, b: usize, c: &C) {
    let n = m.rows();
    for i in 0..n {
        let t = &m[(i, b)] * c;
        m[(i, a)] += &t;
    }
    let cc = c.conj();
    for j in 0..n {
        let t = &cc * &m[(b, j)];
        m[(a, j)] += &t;
    }
}

fn congruence_swap(m: &mut Matrix, a: usize, b: usize) {
    let n = m.rows();
    for i in 0..n {
        let t = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = t;
    }
    for j in 0..n {
        let t = m[(a, j)].clone();
        m[(a, j)] = m[(b, j)].clone();
        m[(b, j)] = t;
    }
}

/// Number of negative eigenvalues of a hermitian (or real symmetric) matrix.
pub fn negative_index(a: &Matrix) -> usize {
    hermitian_inertia(a).1
}

/// Quaternion-valued matrix; products follow quaternion multiplication.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.data[i * self.cols + j] = x;
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn mul(&self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, o.rows, "quaternion matrix shapes");
        let mut m = QMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut s = Q::zero();
                for k in 0..self.cols {
                    s = &s + &(self.get(i, k) * o.get(k, j));
                }
                m.set(i, j, s);
            }
        }
        m
    }

    /// Entrywise anti-involution followed by transposition.
    pub fn q_transpose(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).anti_involution());
            }
        }
        m
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for r in self.to_rows() {
            let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HamiltonianParity {
    Symmetric,
    Alternating,
}

/// `(V, σ₋)` viewed as a left `ℍ`-space through `(α + βj)·v = αv + βσ(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuaternionicSpace {
    pub qdim: usize,
    /// `τ₋(b_ℓ, b_k)` on the quaternionic basis, when a form is present.
    pub qform: Option<QMatrix>,
    pub parity: Option<HamiltonianParity>,
    /// Quaternionic basis `b_ℓ ∈ ℂⁿ`; `{b_ℓ, σ b_ℓ}` is a complex basis.
    pub basis: Vec<Vector>,
    sigma: AntiLinearMap,
    form: Option<Form>,
}

impl QuaternionicSpace {
    pub fn scalar_mul(&self, lambda: &Q, v: &[C]) -> Vector {
        let s = self.sigma.apply(v);
        v.iter().zip(&s).map(|(x, y)| &(&lambda.a * x) + &(&lambda.b * y)).collect()
    }

    /// Quaternionic coordinates `q_ℓ` with `v = Σ q_ℓ · b_ℓ`.
    pub fn coordinates(&self, v: &[C]) -> Vec<Q> {
        let n = v.len();
        let mut cols = self.basis.clone();
        cols.extend(self.basis.iter().map(|b| self.sigma.apply(b)));
        let x = Matrix::from_columns(n, &cols).solve(v).expect("quaternionic basis spans");
        (0..self.qdim).map(|l| Q::new(x[l].clone(), x[self.qdim + l].clone())).collect()
    }

    pub fn from_coordinates(&self, q: &[Q]) -> Vector {
        let n = self.sigma.dim();
        let mut v = vec![C::zero(); n];
        for (ql, b) in q.iter().zip(&self.basis) {
            let t = self.scalar_mul(ql, b);
            v = crate::linalg::vec_add(&v, &t);
        }
        v
    }

    /// `τ₋(u,v) = τ(u,v) + τ(u, σv)·j`.
    pub fn eval(&self, u: &[C], v: &[C]) -> Q {
        let f = self.form.as_ref().expect("quaternionic space has a form");
        Q::new(f.eval(u, v), f.eval(u, &self.sigma.apply(v)))
    }

    /// `Σ x_ℓ G_{ℓk} y_k^q` on quaternionic coordinates.
    pub fn eval_coordinates(&self, x: &[Q], y: &[Q]) -> Q {
        let g = self.qform.as_ref().expect("quaternionic space has a form");
        let mut s = Q::zero();
        for (l, xl) in x.iter().enumerate() {
            for (k, yk) in y.iter().enumerate() {
                s = &s + &(&(xl * g.get(l, k)) * &yk.anti_involution());
            }
        }
        s
    }
}

/// Quaternionic structure and hamiltonian form of a σ₋ space.
pub fn quaternionify(space: &StructuredSpace) -> Result<QuaternionicSpace, Error> {
    let s = match &space.sigma {
        Some(s) if s.sign < 0 => s.clone(),
        _ => return Err(Error::WrongFamily(format!("{} has no σ₋", space.family))),
    };
    let n = space.dim();
    // Greedy quaternionic basis from the standard basis.
    let mut basis: Vec<Vector> = Vec::new();
    let mut span: Vec<Vector> = Vec::new();
    for k in 0..n {
        let e = crate::linalg::unit_vector(n, k);
        let mut trial = span.clone();
        trial.push(e.clone());
        trial.push(s.apply(&e));
        if Matrix::from_columns(n, &trial).rank() == trial.len() {
            span = trial;
            basis.push(e);
        }
    }
    let qdim = basis.len();
    let mut q = QuaternionicSpace {
        qdim,
        qform: None,
        parity: None,
        basis,
        sigma: s,
        form: space.form.clone(),
    };
    if space.form.is_some() {
        let mut g = QMatrix::zeros(qdim, qdim);
        for l in 0..qdim {
            for k in 0..qdim {
                g.set(l, k, q.eval(&q.basis[l], &q.basis[k]));
            }
        }
        q.qform = Some(g);
        q.parity = Some(match space.form_kind() {
            Some(FormKind::Symmetric) => HamiltonianParity::Symmetric,
            _ => HamiltonianParity::Alternating,
        });
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_vector;
    use crate::scalars::strategies::{gaussian, quaternion};
    use proptest::prelude::*;

    fn v(xs: &[(i64, i64)]) -> Vector {
        xs.iter().map(|&(a, b)| C::ints(a, b)).collect()
    }

    fn all_standard(n: usize) -> Vec<StructuredSpace> {
        let mut out = Vec::new();
        for f in Family::ALL {
            for p in 0..=n {
                if let Ok(s) = standard_space(f, n, p) {
                    out.push(s);
                }
            }
        }
        out
    }

    #[test]
    fn form_evaluation() {
        let id = Form::new(Matrix::identity(2), FormKind::Symmetric).unwrap();
        let e1 = unit_vector(2, 0);
        let e2 = unit_vector(2, 1);
        assert_eq!(evaluate_form(&id, &e1, &e1).unwrap(), C::one());
        let j = Form::new(standard_symplectic(1), FormKind::Alternating).unwrap();
        assert_eq!(j.eval(&e1, &e2), -j.eval(&e2, &e1));
        assert!(!j.eval(&e1, &e2).is_zero());
        let h = Form::new(signature_matrix(2, 1), FormKind::Hermitian).unwrap();
        assert_eq!(h.eval(&v(&[(1, 0), (0, 1)]), &v(&[(1, 0), (0, 1)])), C::zero());
        assert!(evaluate_form(&h, &e1, &unit_vector(3, 0)).is_err());
    }

    #[test]
    fn standard_sigmas() {
        let s = standard_sigma(Family::GlPlus, 3, 0).unwrap();
        assert_eq!(s.matrix, Matrix::identity(3));
        assert_eq!(s.sign, 1);
        let s = standard_sigma(Family::GlMinus, 4, 0).unwrap();
        assert_eq!(s.sign, -1);
        // (z,w) ↦ (−w̄, z̄)
        let img = s.apply(&v(&[(1, 1), (0, 0), (2, 3), (0, 0)]));
        assert_eq!(img, v(&[(-2, 3), (0, 0), (1, -1), (0, 0)]));
        let s = standard_sigma(Family::OPlus, 2, 1).unwrap();
        let x = v(&[(1, 2), (3, 4)]);
        assert_eq!(s.apply(&s.apply(&x)), x);
        assert_eq!(standard_sigma(Family::GlMinus, 3, 0), Err(Error::BadParity));
        assert!(matches!(standard_sigma(Family::OPlus, 4, 3), Err(Error::BadSignatureParam(_))));
    }

    #[test]
    fn compatibility_reports() {
        for n in [2, 4] {
            for s in all_standard(n) {
                assert!(check_compatibility(&s).is_ok(), "{}", s.family);
            }
        }
        let bad = StructuredSpace {
            family: Family::OPlus,
            form: Some(Form { matrix: Matrix::from_rows(vec![vec![C::one(), C::i()], vec![C::i(), C::one()]]), kind: FormKind::Symmetric }),
            sigma: Some(standard_sigma(Family::GlPlus, 2, 0).unwrap()),
            dim: 2,
        };
        let r = check_compatibility(&bad);
        assert!(!r.is_ok());
        assert!(r.failures[0].contains("basis pair"));
        let plain = StructuredSpace { family: Family::GlPlus, form: None, sigma: None, dim: 2 };
        assert!(check_compatibility(&plain).is_ok());
    }

    #[test]
    fn algebra_examples() {
        for s in all_standard(4) {
            assert!(algebra_membership(&s, &Matrix::zeros(4, 4)).is_ok());
        }
        let sp = standard_space(Family::SpPlus, 2, 0).unwrap();
        let n = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        assert!(algebra_membership(&sp, &n).is_ok());
        let gl = standard_space(Family::GlPlus, 2, 0).unwrap();
        assert!(!algebra_membership(&gl, &Matrix::scalar(2, &C::i())).is_ok());
    }

    #[test]
    fn special_vectors() {
        let gl = standard_space(Family::GlPlus, 2, 0).unwrap();
        let sp = is_special_vector(&gl, &v(&[(1, 0), (2, 0)])).unwrap();
        assert!(sp.special);
        assert_eq!(sp.eigenvalue, Some(C::one()));
        assert!(!is_special_vector(&gl, &v(&[(1, 0), (0, 1)])).unwrap().special);
        assert_eq!(is_special_vector(&gl, &v(&[(0, 0), (0, 0)])), Err(Error::ZeroVector));
        let spp = standard_space(Family::SpPlus, 2, 0).unwrap();
        assert!(is_special_vector(&spp, &v(&[(3, 0), (-1, 0)])).unwrap().special);
        let glm = standard_space(Family::GlMinus, 2, 0).unwrap();
        let r = is_special_vector(&glm, &v(&[(1, 0), (0, 1)])).unwrap();
        assert!(r.special);
        assert_eq!(r.eigenvalue, Some(-C::i()));
    }

    #[test]
    fn isotropy_algebra() {
        let sp = standard_space(Family::SpPlus, 2, 0).unwrap();
        let n = Matrix::from_ints(&[&[0, 1], &[0, 0]]);
        let e1 = unit_vector(2, 0);
        assert!(isotropy_membership(&sp, &n, &e1).unwrap().is_ok());
        assert!(!isotropy_membership(&sp, &n, &unit_vector(2, 1)).unwrap().is_ok());
    }

    #[test]
    fn quaternionic_examples() {
        let o = standard_space(Family::OMinus, 2, 0).unwrap();
        let q = quaternionify(&o).unwrap();
        assert_eq!(q.qdim, 1);
        let g = q.qform.as_ref().unwrap().get(0, 0).clone();
        assert_eq!(g, Q::one());
        assert_eq!(g.anti_involution(), g);
        // Direct evaluation gives τ(e, σe) = +1 for p = 0, i.e. the entry is
        // j·(−I_{1,0}) rather than the j·I_{1,0} printed with the model.
        let s = standard_space(Family::SpMinus, 2, 0).unwrap();
        let q = quaternionify(&s).unwrap();
        assert_eq!(q.qform.as_ref().unwrap().get(0, 0), &Q::j());
        assert_eq!(q.parity, Some(HamiltonianParity::Alternating));
        assert!(quaternionify(&standard_space(Family::OPlus, 2, 0).unwrap()).is_err());
    }

    #[test]
    fn inertia() {
        let a = Matrix::from_ints(&[&[0, 0, 1], &[0, -1, 0], &[1, 0, 0]]);
        assert_eq!(hermitian_inertia(&a), (1, 2, 0));
        let h = Matrix::from_rows(vec![vec![C::zero(), C::i()], vec![-C::i(), C::zero()]]);
        assert_eq!(hermitian_inertia(&h), (1, 1, 0));
        assert_eq!(negative_index(&signature_matrix(5, 2)), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn quaternion_scalar_laws(n in prop_oneof![Just(2usize), Just(4)], p in 0usize..3,
                                  sym in any::<bool>(),
                                  u in proptest::collection::vec(gaussian(), 4),
                                  w in proptest::collection::vec(gaussian(), 4),
                                  l in quaternion(), m in quaternion()) {
            let fam = if sym { Family::OMinus } else { Family::SpMinus };
            let Ok(space) = standard_space(fam, n, if sym { 0 } else { p }) else { return Ok(()) };
            let q = quaternionify(&space).unwrap();
            let u = &u[..n];
            let w = &w[..n];
            let lhs = q.eval(&q.scalar_mul(&l, u), &q.scalar_mul(&m, w));
            let rhs = &(&l * &q.eval(u, w)) * &m.anti_involution();
            prop_assert_eq!(lhs, rhs);
            let swapped = q.eval(w, u).anti_involution();
            if sym {
                prop_assert_eq!(q.eval(u, w), swapped);
            } else {
                prop_assert_eq!(q.eval(u, w), -swapped);
            }
            // coordinates transport scalars and the form
            let cu = q.coordinates(u);
            let lu: Vec<Q> = cu.iter().map(|x| &l * x).collect();
            prop_assert_eq!(q.coordinates(&q.scalar_mul(&l, u)), lu);
            prop_assert_eq!(q.eval_coordinates(&cu, &q.coordinates(w)), q.eval(u, w));
            prop_assert_eq!(q.from_coordinates(&cu), u.to_vec());
        }

        #[test]
        fn members_form_a_subspace(a in proptest::collection::vec(-3i64..4, 3), c in -3i64..4) {
            // sp(2,ℝ) = sl(2,ℝ): trace zero real matrices
            let sp = standard_space(Family::SpPlus, 2, 0).unwrap();
            let x = Matrix::from_ints(&[&[a[0], a[1]], &[a[2], -a[0]]]);
            let y = Matrix::from_ints(&[&[1, 0], &[c, -1]]);
            prop_assert!(algebra_membership(&sp, &x).is_ok());
            prop_assert!(algebra_membership(&sp, &(&x + &y.scale(&C::int(c)))).is_ok());
        }
    }
}
