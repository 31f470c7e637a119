//! Dense exact linear algebra over ℚ(i).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Error;
use crate::scalars::{Rational, C};

pub type Vector = Vec<C>;

pub fn zero_vector(n: usize) -> Vector {
    vec![C::zero(); n]
}

pub fn unit_vector(n: usize, k: usize) -> Vector {
    let mut v = zero_vector(n);
    v[k] = C::one();
    v
}

pub fn is_zero_vector(v: &[C]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn vec_add(a: &[C], b: &[C]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[C], b: &[C]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[C], s: &C) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn vec_conj(a: &[C]) -> Vector {
    a.iter().map(|x| x.conj()).collect()
}

/// `Σ aᵢ bᵢ`, no conjugation.
pub fn dot(a: &[C], b: &[C]) -> C {
    let mut s = C::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += &(x * y);
        }
    }
    s
}

/// Row-major dense matrix. Zero rows or columns are allowed, which keeps
/// empty bases and empty blocks uniform.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = C::one();
        }
        m
    }

    pub fn scalar(n: usize, s: &C) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = s.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| C::int(x)).collect()).collect())
    }

    /// Matrix whose columns are the given vectors; `n` fixes the row count
    /// when the list is empty.
    pub fn from_columns(n: usize, cols: &[Vector]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n, "column length");
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn diag(entries: &[C]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (k, x) in entries.iter().enumerate() {
            m[(k, k)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: &C) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|x| x.is_real())
    }

    pub fn apply(&self, v: &[C]) -> Vector {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect()
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::identity(self.rows);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)].clone();
            }
        }
    }

    pub fn hstack(&self, o: &Matrix) -> Self {
        assert_eq!(self.rows, o.rows);
        let mut m = Self::zeros(self.rows, self.cols + o.cols);
        m.set_block(0, 0, self);
        m.set_block(0, self.cols, o);
        m
    }

    pub fn block_diag(blocks: &[Matrix]) -> Self {
        let r = blocks.iter().map(|b| b.rows).sum();
        let c = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(r, c);
        let (mut i, mut j) = (0, 0);
        for b in blocks {
            m.set_block(i, j, b);
            i += b.rows;
            j += b.cols;
        }
        m
    }

    /// Reduced row echelon form. Pivots are the first nonzero entry found
    /// scanning rows in order, so the result is deterministic.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].inv().unwrap();
            for j in c..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        if !m[(r, j)].is_zero() {
                            let t = &f * &m[(r, j)];
                            m[(i, j)] -= &t;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : Mv = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let mut out = Vec::new();
        for f in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = zero_vector(self.cols);
            v[f] = C::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(k, f)];
            }
            out.push(v);
        }
        out
    }

    /// A solution of `M x = b` with all free variables zero.
    pub fn solve(&self, b: &[C]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows);
        let aug = self.hstack(&Matrix::from_columns(self.rows, &[b.to_vec()]));
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = zero_vector(self.cols);
        for (k, &p) in pivots.iter().enumerate() {
            x[p] = r[(k, self.cols)].clone();
        }
        Some(x)
    }

    /// Solve `M X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Option<Matrix> {
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Matrix::zeros(self.cols, b.cols);
        for (k, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x[(p, j)] = r[(k, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Result<Matrix, Error> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let x = self.solve_matrix(&Matrix::identity(self.rows)).ok_or(Error::Singular)?;
        if self.rank() < self.rows {
            return Err(Error::Singular);
        }
        Ok(x)
    }

    /// Determinant by Bareiss' fraction-free elimination.
    pub fn det(&self) -> C {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return C::one();
        }
        let mut m = self.clone();
        let mut sign = C::one();
        let mut prev = C::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                    return C::zero();
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &(&m[(i, j)] * &m[(k, k)]) - &(&m[(i, k)] * &m[(k, j)]);
                    m[(i, j)] = &v / &prev;
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }

    pub fn trace(&self) -> C {
        let mut s = C::zero();
        for k in 0..self.rows.min(self.cols) {
            s += &self[(k, k)];
        }
        s
    }

    /// Coefficients `c₀..c_n` of `det(xI − M)`, lowest degree first
    /// (Faddeev–LeVerrier).
    pub fn charpoly(&self) -> Vec<C> {
        let n = self.rows;
        let mut coeffs = vec![C::zero(); n + 1];
        coeffs[n] = C::one();
        let mut mk = Matrix::zeros(n, n);
        for k in 1..=n {
            let mut next = self * &mk;
            for d in 0..n {
                next[(d, d)] += &coeffs[n - k + 1];
            }
            mk = next;
            let t = (self * &mk).trace();
            coeffs[n - k] = -t.scale(&Rational::new(BigInt::one(), BigInt::from(k)));
        }
        coeffs
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl<'a, 'b> Mul<&'b Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, o: &'b Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "matrix product shapes");
        let mut m = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        let t = a * b;
                        m[(i, j)] += &t;
                    }
                }
            }
        }
        m
    }
}

impl<'a, 'b> Add<&'b Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, o: &'b Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix { rows: self.rows, cols: self.cols, data: vec_add(&self.data, &o.data) }
    }
}

impl<'a, 'b> Sub<&'b Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, o: &'b Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix { rows: self.rows, cols: self.cols, data: vec_sub(&self.data, &o.data) }
    }
}

impl<'a> Neg for &'a Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }
}

impl Mul<Matrix> for Matrix {
    type Output = Matrix;
    fn mul(self, o: Matrix) -> Matrix {
        &self * &o
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            let r: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        write!(f, "]")
    }
}

/// A subspace of `C^ambient` given by linearly independent basis columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn new(ambient: usize, basis: Vec<Vector>) -> Result<Self, Error> {
        if basis.iter().any(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch("basis vector length".into()));
        }
        if Matrix::from_columns(ambient, &basis).rank() != basis.len() {
            return Err(Error::Malformed("subspace basis is linearly dependent".into()));
        }
        Ok(Subspace { ambient, basis })
    }

    /// Span of arbitrary vectors, keeping the first independent ones.
    pub fn span(ambient: usize, vectors: &[Vector]) -> Self {
        let mut basis: Vec<Vector> = Vec::new();
        for v in vectors {
            basis.push(v.clone());
            if Matrix::from_columns(ambient, &basis).rank() < basis.len() {
                basis.pop();
            }
        }
        Subspace { ambient, basis }
    }

    pub fn full(n: usize) -> Self {
        Subspace { ambient: n, basis: (0..n).map(|k| unit_vector(n, k)).collect() }
    }

    pub fn zero(n: usize) -> Self {
        Subspace { ambient: n, basis: Vec::new() }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_columns(self.ambient, &self.basis)
    }

    pub fn contains(&self, v: &[C]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Coordinates of `v` in this basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[C]) -> Option<Vector> {
        self.matrix().solve(v)
    }

    pub fn contains_subspace(&self, o: &Subspace) -> bool {
        o.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, o: &Subspace) -> Subspace {
        let mut all = self.basis.clone();
        all.extend(o.basis.iter().cloned());
        Subspace::span(self.ambient, &all)
    }

    pub fn image(&self, m: &Matrix) -> Subspace {
        let imgs: Vec<Vector> = self.basis.iter().map(|v| m.apply(v)).collect();
        Subspace::span(m.rows(), &imgs)
    }

    pub fn intersect(&self, o: &Subspace) -> Subspace {
        // x = A a = B b  ⇔  [A | −B] (a, b) = 0
        let a = self.matrix();
        let b = o.matrix();
        let stacked = a.hstack(&(-&b));
        let vs: Vec<Vector> = stacked
            .kernel()
            .iter()
            .map(|k| a.apply(&k[..self.dim()]))
            .collect();
        Subspace::span(self.ambient, &vs)
    }

    /// Vectors extending `self` to a basis of `outer`, chosen greedily from
    /// `outer`'s basis.
    pub fn complement_in(&self, outer: &Subspace) -> Vec<Vector> {
        let mut cur = self.basis.clone();
        let mut out = Vec::new();
        for v in &outer.basis {
            cur.push(v.clone());
            if Matrix::from_columns(self.ambient, &cur).rank() == cur.len() {
                out.push(v.clone());
            } else {
                cur.pop();
            }
        }
        out
    }

    pub fn is_invariant(&self, m: &Matrix) -> bool {
        self.basis.iter().all(|v| self.contains(&m.apply(v)))
    }

    /// Matrix of `m` restricted to this (invariant) subspace, in its basis.
    pub fn restrict(&self, m: &Matrix) -> Result<Matrix, Error> {
        let img = m * &self.matrix();
        self.matrix().solve_matrix(&img).ok_or(Error::NotInvariant)
    }
}

pub fn kernel_basis(m: &Matrix) -> Subspace {
    Subspace { ambient: m.cols(), basis: m.kernel() }
}

/// The `h` with `N^h ≠ 0 = N^{h+1}`.
pub fn nilpotency_height(n: &Matrix) -> Result<usize, Error> {
    let mut p = n.clone();
    if n.rows() == 0 {
        return Ok(0);
    }
    for h in 0..n.rows() {
        if p.is_zero() {
            return Ok(h);
        }
        p = &p * n;
    }
    Err(Error::NotNilpotent)
}

/// Height of `n` on an invariant subspace.
pub fn height_on(n: &Matrix, w: &Subspace) -> Result<usize, Error> {
    nilpotency_height(&w.restrict(n)?)
}

pub fn generalized_zero_eigenspace(y: &Matrix) -> Subspace {
    kernel_basis(&y.pow(y.rows()))
}

/// A Jordan chain: `vectors[k] = N^k · top`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub vectors: Vec<Vector>,
}

impl Chain {
    pub fn from_top(n: &Matrix, top: Vector, height: usize) -> Self {
        let mut vectors = vec![top];
        for _ in 0..height {
            let next = n.apply(vectors.last().unwrap());
            vectors.push(next);
        }
        Chain { vectors }
    }

    pub fn top(&self) -> &Vector {
        &self.vectors[0]
    }

    pub fn bottom(&self) -> &Vector {
        self.vectors.last().unwrap()
    }

    pub fn height(&self) -> usize {
        self.vectors.len() - 1
    }
}

/// `ker N ∩ N^k W`, the bottoms of chains of height at least `k`.
pub fn kernel_layer(n: &Matrix, w: &Subspace, k: usize) -> Subspace {
    let img = w.image(&n.pow(k));
    img.intersect(&kernel_basis(n))
}

/// Earliest solution `t ∈ W` of `N^k t = b`.
pub fn lift(n: &Matrix, w: &Subspace, k: usize, b: &[C]) -> Option<Vector> {
    let wm = w.matrix();
    let a = &n.pow(k) * &wm;
    a.solve(b).map(|x| wm.apply(&x))
}

/// Jordan chains whose union is a basis of `W`, longest first. Bottoms are
/// chosen layer by layer, deepest layer first; each top is the earliest lift.
pub fn uniform_chain_basis(n: &Matrix, w: &Subspace) -> Result<Vec<Chain>, Error> {
    if !w.is_invariant(n) {
        return Err(Error::NotInvariant);
    }
    let h = height_on(n, w)?;
    let mut chosen = Subspace::zero(n.rows());
    let mut chains = Vec::new();
    for k in (0..=h).rev() {
        let layer = kernel_layer(n, w, k);
        for b in chosen.complement_in(&layer) {
            let t = lift(n, w, k, &b).expect("layer vector has a lift");
            chosen = chosen.sum(&Subspace::span(n.rows(), &[b]));
            chains.push(Chain::from_top(n, t, k));
        }
    }
    Ok(chains)
}

/// Eigenvalue with its Jordan block sizes (largest first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenBlock {
    pub eigenvalue: C,
    pub block_sizes: Vec<usize>,
}

/// Largest norm accepted when enumerating Gaussian divisors of a constant term.
const DIVISOR_NORM_LIMIT: u64 = 1 << 44;

fn gaussian_integer_roots(poly: &[C]) -> Result<Vec<C>, Error> {
    // Roots of a monic polynomial with Gaussian integer coefficients are
    // Gaussian integers dividing the constant term.
    let mut p = poly.to_vec();
    let mut roots = Vec::new();
    while p.len() > 1 && p[0].is_zero() {
        roots.push(C::zero());
        p.remove(0);
    }
    if p.len() == 1 {
        return Ok(roots);
    }
    let n0 = p[0].norm().to_integer();
    let n0 = n0.to_u64().filter(|&x| x <= DIVISOR_NORM_LIMIT).ok_or(Error::SpectrumSearchLimit)?;
    let mut candidates = Vec::new();
    for d in 1..=n0.sqrt() {
        if n0 % d == 0 {
            candidates.push(d);
            if d * d != n0 {
                candidates.push(n0 / d);
            }
        }
    }
    candidates.sort();
    for d in candidates {
        for a in 0..=d.sqrt() {
            let rest = d - a * a;
            let b = rest.sqrt();
            if b * b != rest {
                continue;
            }
            let (a, b) = (a as i64, b as i64);
            let mut variants = vec![(a, b), (-a, b), (a, -b), (-a, -b)];
            variants.dedup();
            for (x, y) in variants {
                let z = C::ints(x, y);
                while p.len() > 1 && horner(&p, &z).is_zero() {
                    p = deflate(&p, &z);
                    roots.push(z.clone());
                }
            }
        }
        if p.len() == 1 {
            break;
        }
    }
    if p.len() > 1 {
        return Err(Error::IrrationalSpectrum);
    }
    Ok(roots)
}

fn horner(p: &[C], z: &C) -> C {
    let mut acc = C::zero();
    for c in p.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// Divide by `(x − z)`, coefficients lowest degree first.
fn deflate(p: &[C], z: &C) -> Vec<C> {
    let n = p.len() - 1;
    let mut q = vec![C::zero(); n];
    let mut carry = C::zero();
    for k in (0..n).rev() {
        carry = &p[k + 1] + &(&carry * z);
        q[k] = carry.clone();
    }
    q
}

/// Distinct eigenvalues in ℚ(i) with algebraic multiplicities.
pub fn eigenvalues(y: &Matrix) -> Result<Vec<(C, usize)>, Error> {
    let cp = y.charpoly();
    let n = cp.len() - 1;
    // x = t/D turns the monic polynomial into one over ℤ[i].
    let mut dl = BigInt::one();
    for c in &cp {
        dl = dl.lcm(c.re.denom()).lcm(c.im.denom());
    }
    let d = Rational::from_integer(dl);
    let mut scaled = Vec::with_capacity(n + 1);
    let mut pw = Rational::one();
    for k in (0..=n).rev() {
        scaled.push(cp[k].scale(&pw));
        pw = &pw * &d;
    }
    scaled.reverse();
    let roots = gaussian_integer_roots(&scaled)?;
    let mut out: Vec<(C, usize)> = Vec::new();
    for r in roots {
        let r = r.scale(&d.recip());
        match out.iter_mut().find(|(e, _)| *e == r) {
            Some((_, m)) => *m += 1,
            None => out.push((r, 1)),
        }
    }
    Ok(out)
}

/// `Y = S + N` with `S` diagonalizable, `N` nilpotent and `SN = NS`.
pub fn jordan_decomposition(y: &Matrix) -> Result<(Matrix, Matrix), Error> {
    let n = y.rows();
    let eig = eigenvalues(y)?;
    let mut cols = Vec::new();
    let mut diag = Vec::new();
    for (lam, m) in &eig {
        let shifted = y - &Matrix::scalar(n, lam);
        for v in shifted.pow(*m).kernel() {
            cols.push(v);
            diag.push(lam.clone());
        }
    }
    let b = Matrix::from_columns(n, &cols);
    let s = &(&b * &Matrix::diag(&diag)) * &b.inverse()?;
    let nil = y - &s;
    Ok((s, nil))
}

/// Eigenvalues of `Y` with their Jordan block sizes.
pub fn jordan_data(y: &Matrix) -> Result<Vec<EigenBlock>, Error> {
    let n = y.rows();
    let mut out = Vec::new();
    for (lam, m) in eigenvalues(y)? {
        let shifted = y - &Matrix::scalar(n, &lam);
        let ranks: Vec<usize> = (0..=m + 1).map(|k| shifted.pow(k).rank()).collect();
        let mut sizes = Vec::new();
        for k in (1..=m).rev() {
            // blocks of size exactly k
            let ge_k = ranks[k - 1] - ranks[k];
            let ge_k1 = ranks[k] - ranks[k + 1];
            sizes.extend(std::iter::repeat(k).take(ge_k - ge_k1));
        }
        out.push(EigenBlock { eigenvalue: lam, block_sizes: sizes });
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use crate::scalars::strategies::gaussian;
    use proptest::prelude::*;

    pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(
            prop_oneof![3 => Just(C::zero()), 2 => gaussian(), 1 => (-3i64..3).prop_map(C::int)],
            rows * cols,
        )
        .prop_map(move |d| Matrix { rows, cols, data: d })
    }
}

#[cfg(test)]
mod tests {
    use super::strategies::*;
    use super::*;
    use proptest::prelude::*;

    fn shift(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for k in 0..n.saturating_sub(1) {
            m[(k + 1, k)] = C::one();
        }
        m
    }

    #[test]
    fn kernels() {
        assert_eq!(kernel_basis(&Matrix::zeros(2, 2)).dim(), 2);
        assert_eq!(kernel_basis(&Matrix::identity(2)).dim(), 0);
        assert_eq!(kernel_basis(&shift(4)).dim(), 1);
    }

    #[test]
    fn heights() {
        assert_eq!(nilpotency_height(&Matrix::zeros(3, 3)).unwrap(), 0);
        assert_eq!(nilpotency_height(&shift(4)).unwrap(), 3);
        let m = Matrix::block_diag(&[shift(2), shift(3)]);
        assert_eq!(nilpotency_height(&m).unwrap(), 2);
        assert_eq!(nilpotency_height(&Matrix::identity(2)), Err(Error::NotNilpotent));
    }

    #[test]
    fn jordan_examples() {
        let y = Matrix::from_ints(&[&[1, 1], &[0, 1]]);
        let (s, n) = jordan_decomposition(&y).unwrap();
        assert_eq!(s, Matrix::identity(2));
        assert_eq!(n, Matrix::from_ints(&[&[0, 1], &[0, 0]]));
        let (s, n) = jordan_decomposition(&shift(3)).unwrap();
        assert!(s.is_zero());
        assert_eq!(n, shift(3));
        let d = Matrix::diag(&[C::int(2), C::ints(0, -1)]);
        assert_eq!(jordan_decomposition(&d).unwrap(), (d.clone(), Matrix::zeros(2, 2)));
    }

    #[test]
    fn rational_and_gaussian_spectra() {
        // x² + 1 splits over ℚ(i); x² − 2 does not.
        let rot = Matrix::from_ints(&[&[0, -1], &[1, 0]]);
        let ev = eigenvalues(&rot).unwrap();
        assert_eq!(ev.len(), 2);
        let (s, n) = jordan_decomposition(&rot).unwrap();
        assert_eq!(s, rot);
        assert!(n.is_zero());
        let irr = Matrix::from_ints(&[&[0, 2], &[1, 0]]);
        assert_eq!(eigenvalues(&irr), Err(Error::IrrationalSpectrum));
        let half = Matrix::diag(&[crate::scalars::ratio(1, 2).into(), C::int(-3)]);
        let mut ev: Vec<String> = eigenvalues(&half).unwrap().iter().map(|e| e.0.to_string()).collect();
        ev.sort();
        assert_eq!(ev, vec!["-3", "1/2"]);
    }

    #[test]
    fn jordan_block_sizes() {
        let y = Matrix::block_diag(&[
            &Matrix::identity(3) + &shift(3),
            Matrix::identity(1),
            shift(2),
        ]);
        let data = jordan_data(&y).unwrap();
        let one = data.iter().find(|b| b.eigenvalue == C::one()).unwrap();
        assert_eq!(one.block_sizes, vec![3, 1]);
        let zero = data.iter().find(|b| b.eigenvalue.is_zero()).unwrap();
        assert_eq!(zero.block_sizes, vec![2]);
    }

    #[test]
    fn generalized_kernel() {
        let y = Matrix::block_diag(&[shift(2), Matrix::identity(1)]);
        let w = generalized_zero_eigenspace(&y);
        assert_eq!(w.dim(), 2);
        assert!(w.contains(&unit_vector(3, 0)) && w.contains(&unit_vector(3, 1)));
        assert_eq!(generalized_zero_eigenspace(&Matrix::identity(3)).dim(), 0);
    }

    #[test]
    fn chains() {
        let w = Subspace::full(3);
        let c = uniform_chain_basis(&Matrix::zeros(3, 3), &w).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|c| c.height() == 0));
        let c = uniform_chain_basis(&shift(3), &w).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].vectors.len(), 3);
        let n = Matrix::block_diag(&[shift(2), shift(2)]);
        let c = uniform_chain_basis(&n, &Subspace::full(4)).unwrap();
        assert_eq!(c.iter().map(|c| c.vectors.len()).collect::<Vec<_>>(), vec![2, 2]);
        let bad = Subspace::span(3, &[unit_vector(3, 0)]);
        assert_eq!(uniform_chain_basis(&shift(3), &bad), Err(Error::NotInvariant));
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_ints(&[&[0, 0, 1], &[0, -1, 0], &[1, 0, 0]]);
        assert_eq!(m.det(), C::int(1));
        assert_eq!(&m * &m.inverse().unwrap(), Matrix::identity(3));
        assert_eq!(Matrix::from_ints(&[&[1, 2], &[2, 4]]).inverse(), Err(Error::Singular));
    }

    proptest! {
        #[test]
        fn rank_nullity(m in matrix(4, 5)) {
            prop_assert_eq!(m.rank() + kernel_basis(&m).dim(), 5);
            for v in m.kernel() {
                prop_assert!(is_zero_vector(&m.apply(&v)));
            }
        }

        #[test]
        fn jordan_identities(m in matrix(4, 4)) {
            if let Ok((s, n)) = jordan_decomposition(&m) {
                prop_assert_eq!(&s + &n, m.clone());
                prop_assert!((&(&s * &n) - &(&n * &s)).is_zero());
                prop_assert!(n.pow(4).is_zero());
            }
        }

        #[test]
        fn chain_basis_spans(a in matrix(2, 2), b in matrix(2, 2)) {
            // conjugate a nilpotent block sum by an invertible matrix
            let n = Matrix::block_diag(&[shift(3), shift(2), Matrix::zeros(1, 1)]);
            let mut p = Matrix::identity(6);
            p.set_block(0, 4, &a);
            p.set_block(4, 0, &b.submatrix(0, 0, 2, 2));
            if p.det().is_zero() {
                return Ok(());
            }
            let y = &(&p * &n) * &p.inverse().unwrap();
            let chains = uniform_chain_basis(&y, &Subspace::full(6)).unwrap();
            let lens: Vec<usize> = chains.iter().map(|c| c.vectors.len()).collect();
            prop_assert_eq!(lens, vec![3, 2, 1]);
            let all: Vec<Vector> = chains.iter().flat_map(|c| c.vectors.clone()).collect();
            prop_assert_eq!(Matrix::from_columns(6, &all).rank(), 6);
        }

        #[test]
        fn det_matches_invertibility(m in matrix(3, 3)) {
            prop_assert_eq!(m.det().is_zero(), m.rank() < 3);
            let cp = m.charpoly();
            // Cayley–Hamilton
            let mut acc = Matrix::zeros(3, 3);
            for (k, c) in cp.iter().enumerate() {
                acc = &acc + &m.pow(k).scale(c);
            }
            prop_assert!(acc.is_zero());
        }
    }
}
