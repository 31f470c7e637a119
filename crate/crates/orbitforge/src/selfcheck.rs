//! Seeded invariant suites shared by `orbitforge selfcheck` and the
//! acceptance harness. Each suite returns one [`CheckReport`]; cases inside a
//! suite run on worker threads and are reported in input order.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affine::{build_context, embed, project, quaternionic_model, quaternionic_structure, AffineCase};
use crate::distinguished::{
    all_core_labels, classify, conjugate_triple, random_isotropy_element, synthesize_distinguished,
    triples_equivalent, ClassificationResult, DistinguishedLabel, Triple,
};
use crate::document::{AffineDoc, Document, Payload, TripleDoc};
use crate::error::Error;
use crate::linalg::{unit_vector, Matrix, Vector};
use crate::scalars::{rat, ratio, C, Q};
use crate::structured::{check_compatibility, negative_index, quaternionify, standard_space, Family, FormKind, HamiltonianParity};
use crate::types::{
    all_type_labels, collect_labels, reduced_form_kind, reduced_pair, synthesize_type, type_index, type_shape, Pair,
    TypeLabel,
};

pub const DEFAULT_SEED: u64 = 1;

/// Criteria whose property does not hold for every case of the construction;
/// they are reported faithfully and listed here so callers can tell them apart.
pub const KNOWN_UNATTAINABLE: &[&str] = &["C8"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Scalars,
    Forms,
    Types,
    Distinguished,
    Affine,
    All,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "scalars" => Scope::Scalars,
            "forms" => Scope::Forms,
            "types" => Scope::Types,
            "distinguished" => Scope::Distinguished,
            "affine" => Scope::Affine,
            "all" => Scope::All,
            _ => return Err(Error::Parse(format!("unknown scope {s:?}"))),
        })
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scope::Scalars => "scalars",
            Scope::Forms => "forms",
            Scope::Types => "types",
            Scope::Distinguished => "distinguished",
            Scope::Affine => "affine",
            Scope::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
    pub elapsed: Duration,
    /// Wall-clock allowance; only the acceptance harness enforces it.
    pub budget: Option<Duration>,
    /// Smallest failing input, when the suite has one to offer.
    pub repro: Option<Document>,
}

impl CheckReport {
    pub fn within_budget(&self) -> bool {
        self.budget.map_or(true, |b| self.elapsed <= b)
    }
}

impl fmt::Display for CheckReport {
    /// Timing-free so that reports for a fixed seed compare equal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} {} ({} cases): {}", self.id, self.name, self.cases, self.detail)
    }
}

type Failure = (String, Option<Document>);

struct Tally {
    cases: usize,
    failures: Vec<Failure>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: Vec::new() }
    }

    fn record(&mut self, outcome: Result<(), Failure>) {
        self.cases += 1;
        if let Err(f) = outcome {
            self.failures.push(f);
        }
    }

    fn report(self, id: &'static str, name: &'static str, started: Instant, extra: String) -> CheckReport {
        let passed = self.failures.is_empty();
        let mut detail = if passed {
            "ok".to_string()
        } else {
            format!("{} failing, first: {}", self.failures.len(), self.failures[0].0)
        };
        if !extra.is_empty() {
            detail.push_str("; ");
            detail.push_str(&extra);
        }
        CheckReport {
            id,
            name,
            passed,
            cases: self.cases,
            detail,
            elapsed: started.elapsed(),
            budget: None,
            repro: self.failures.into_iter().find_map(|f| f.1),
        }
    }
}

/// Order-preserving parallel map over a shared work queue.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len()).max(1);
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<(usize, R)>> = Mutex::new(Vec::with_capacity(items.len()));
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                out.lock().expect("worker panicked").push((i, r));
            });
        }
    });
    let mut v = out.into_inner().expect("worker panicked");
    v.sort_by_key(|(i, _)| *i);
    v.into_iter().map(|(_, r)| r).collect()
}

fn triple_doc(t: &Triple) -> Option<Document> {
    Some(Document::new(Payload::Triple(TripleDoc::from_triple(t))))
}

/// Kernel dimension and Gram nondegeneracy of a classified core.
#[derive(Clone, Debug)]
pub struct Structural {
    label: String,
    kernel_dim: usize,
    reduced_dim: usize,
    gram_ok: bool,
}

impl Structural {
    fn of(r: &ClassificationResult) -> Self {
        Structural {
            label: r.core.to_string(),
            kernel_dim: r.core_kernel_dim,
            reduced_dim: r.core.reduced_dim(),
            gram_ok: r.core_gram_det_nonzero,
        }
    }

    fn check(&self) -> Result<(), String> {
        if !(1..=2).contains(&self.kernel_dim) || self.kernel_dim != self.reduced_dim {
            return Err(format!("{}: dim ker = {}, reduced dim {}", self.label, self.kernel_dim, self.reduced_dim));
        }
        if !self.gram_ok {
            return Err(format!("{}: singular chain-span Gram matrix", self.label));
        }
        Ok(())
    }
}

fn moduli() -> Vec<crate::scalars::Rational> {
    vec![ratio(1, 2), rat(1), rat(3)]
}

// ---------------------------------------------------------------- scalars

fn random_c(rng: &mut ChaCha8Rng) -> C {
    let d1 = rng.gen_range(1..=6);
    let d2 = rng.gen_range(1..=6);
    C::new(ratio(rng.gen_range(-9..=9), d1), ratio(rng.gen_range(-9..=9), d2))
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    Q::new(random_c(rng), random_c(rng))
}

pub fn scalar_laws(seed: u64) -> CheckReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    let i = C::i();
    t.record(if &i * &i == -C::one() { Ok(()) } else { Err(("i² ≠ −1".into(), None)) });
    let (qi, qj) = (Q::complex(C::i()), Q::j());
    t.record(if &qi * &qj == -(&qj * &qi) && &qj * &qj == -Q::one() {
        Ok(())
    } else {
        Err(("ij ≠ −ji or j² ≠ −1".into(), None))
    });
    for _ in 0..500 {
        let (a, b, c) = (random_c(&mut rng), random_c(&mut rng), random_c(&mut rng));
        let fail = |what: &str| Err((format!("{what} at a={a}, b={b}, c={c}"), None));
        t.record(if &(&a * &b) * &c != &a * &(&b * &c) {
            fail("complex associativity")
        } else if &a * &(&b + &c) != &(&a * &b) + &(&a * &c) {
            fail("complex distributivity")
        } else if (&a * &b).conj() != &a.conj() * &b.conj() || (&a * &b).norm() != a.norm() * b.norm() {
            fail("conjugation or norm")
        } else if !a.is_zero() && &a * &a.inv().unwrap() != C::one() {
            fail("complex inverse")
        } else if a.to_string().parse::<C>().as_ref() != Ok(&a) {
            fail("complex parse/render")
        } else {
            Ok(())
        });
        let (x, y, z) = (random_q(&mut rng), random_q(&mut rng), random_q(&mut rng));
        let fail = |what: &str| Err((format!("{what} at x={x}, y={y}, z={z}"), None));
        t.record(if &(&x * &y) * &z != &x * &(&y * &z) {
            fail("quaternion associativity")
        } else if &(&x + &y) * &z != &(&x * &z) + &(&y * &z) {
            fail("quaternion distributivity")
        } else if (&x * &y).anti_involution() != &y.anti_involution() * &x.anti_involution() {
            fail("anti-involution does not reverse products")
        } else if (&x * &y).norm() != x.norm() * y.norm() {
            fail("quaternion norm")
        } else if !x.is_zero() && &x * &x.inv().unwrap() != Q::one() {
            fail("quaternion inverse")
        } else if x.to_string().parse::<Q>().as_ref() != Ok(&x) {
            fail("quaternion parse/render")
        } else {
            Ok(())
        });
    }
    t.report("S", "scalar field and quaternion laws", started, String::new())
}

// ------------------------------------------------------------ criterion 1

fn round_trip_case(l: &DistinguishedLabel) -> (Result<(), Failure>, Option<Structural>) {
    let t = match synthesize_distinguished(l, &[]) {
        Ok(t) => t,
        Err(e) => return (Err((format!("{l}: synthesis failed: {e}"), None)), None),
    };
    match classify(&t) {
        Ok(r) if r.core == *l && r.residual_types.is_empty() => (Ok(()), Some(Structural::of(&r))),
        Ok(r) => (Err((format!("{l} classified as {}", r.summary()), triple_doc(&t))), Some(Structural::of(&r))),
        Err(e) => (Err((format!("{l}: {e}"), triple_doc(&t))), None),
    }
}

pub fn criterion1(structural: &mut Vec<Structural>) -> CheckReport {
    let started = Instant::now();
    let labels: Vec<DistinguishedLabel> = Family::ALL.iter().flat_map(|&f| all_core_labels(f, 5, &moduli())).collect();
    let mut t = Tally::new();
    for (outcome, s) in par_map(&labels, round_trip_case) {
        t.record(outcome);
        structural.extend(s);
    }
    let mut r = t.report("C1", "core table round trip", started, String::new());
    r.budget = Some(Duration::from_secs(10));
    r
}

// ------------------------------------------------------------ criterion 2

struct Composite {
    core: DistinguishedLabel,
    residual: Vec<TypeLabel>,
    seed: u64,
}

fn composites(seed: u64, count: usize) -> Vec<Composite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0_3905);
    let mut out = Vec::new();
    while out.len() < count {
        let f = Family::ALL[rng.gen_range(0..Family::ALL.len())];
        let cores = all_core_labels(f, 3, &moduli());
        let types = all_type_labels(f, 3);
        let core = cores[rng.gen_range(0..cores.len())].clone();
        let k = rng.gen_range(0..=3);
        let residual: Vec<TypeLabel> = (0..k).map(|_| types[rng.gen_range(0..types.len())].clone()).collect();
        let dim = core.core_dim() + residual.iter().map(|l| l.block_dim()).sum::<usize>();
        if dim <= 24 {
            out.push(Composite { core, residual, seed: rng.gen() });
        }
    }
    out
}

/// Permutation matrix moving whole blocks of the given sizes into a random order.
fn block_permutation(sizes: &[usize], rng: &mut ChaCha8Rng) -> Matrix {
    let mut starts = Vec::new();
    let mut at = 0;
    for &s in sizes {
        starts.push(at);
        at += s;
    }
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.shuffle(rng);
    let n = at;
    // old coordinate → new coordinate
    let mut target = vec![0; n];
    let mut pos = 0;
    for &b in &order {
        for k in 0..sizes[b] {
            target[starts[b] + k] = pos;
            pos += 1;
        }
    }
    let cols: Vec<Vector> = (0..n).map(|j| unit_vector(n, target[j])).collect();
    Matrix::from_columns(n, &cols)
}

fn permute_triple(t: &Triple, p: &Matrix) -> Result<Triple, Error> {
    let space = t.space().transport(p)?;
    let y = &(p * &t.pair.y) * &p.inverse()?;
    Triple::new(Pair::full(space, y)?, p.apply(&t.v0))
}

fn composite_case(c: &Composite) -> (Result<(), Failure>, Vec<Structural>) {
    let name = crate::labels::render_distinguished(&c.core, &c.residual);
    let t = match synthesize_distinguished(&c.core, &c.residual) {
        Ok(t) => t,
        Err(e) => return (Err((format!("{name}: synthesis failed: {e}"), None)), Vec::new()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut sizes = vec![c.core.core_dim()];
    sizes.extend(c.residual.iter().map(|l| l.block_dim()));
    let p = block_permutation(&sizes, &mut rng);
    let expected = collect_labels(c.residual.iter().cloned());
    let mut structural = Vec::new();
    for candidate in [Ok(t.clone()), permute_triple(&t, &p)] {
        let tt = match candidate {
            Ok(x) => x,
            Err(e) => return (Err((format!("{name}: permutation failed: {e}"), triple_doc(&t))), structural),
        };
        match classify(&tt) {
            Ok(r) => {
                structural.push(Structural::of(&r));
                if r.core != c.core || r.residual_types != expected || r.unclassified_residual.is_some() {
                    return (Err((format!("{name} classified as {}", r.summary()), triple_doc(&tt))), structural);
                }
            }
            Err(e) => return (Err((format!("{name}: {e}"), triple_doc(&tt))), structural),
        }
    }
    (Ok(()), structural)
}

pub fn criterion2(seed: u64, structural: &mut Vec<Structural>) -> CheckReport {
    let started = Instant::now();
    let cs = composites(seed, 200);
    let max_dim = cs.iter().map(|c| c.core.core_dim() + c.residual.iter().map(|l| l.block_dim()).sum::<usize>()).max();
    let mut t = Tally::new();
    for (outcome, s) in par_map(&cs, composite_case) {
        t.record(outcome);
        structural.extend(s);
    }
    let mut r = t.report(
        "C2",
        "decomposition of composites under block permutation",
        started,
        format!("max dim {}", max_dim.unwrap_or(0)),
    );
    r.budget = Some(Duration::from_secs(60));
    r
}

// ------------------------------------------------------------ criterion 3

pub const CONJUGATIONS_PER_CASE: u64 = 100;
/// Extra conjugations of each core with a height-one type appended, so that
/// the isotropy element mixes core and residual.
pub const MIXED_CONJUGATIONS_PER_CASE: u64 = 5;

struct Base {
    label: DistinguishedLabel,
    triple: Triple,
    result: ClassificationResult,
}

fn small_residual(f: Family) -> Vec<TypeLabel> {
    let eps = type_shape(f, 1).1.then_some(1);
    vec![TypeLabel::new(f, 1, eps).expect("height-one types exist in every family")]
}

fn conjugation_case(b: &Base, s: u64) -> (Result<(), Failure>, bool, Option<Structural>) {
    let p = match random_isotropy_element(b.triple.space(), &b.triple.v0, s) {
        Ok(p) => p,
        Err(e) => return (Err((format!("{} seed {s}: {e}", b.label), triple_doc(&b.triple))), false, None),
    };
    let moved = p != Matrix::identity(b.triple.dim());
    let c = match conjugate_triple(&b.triple, &p) {
        Ok(c) => c,
        Err(e) => return (Err((format!("{} seed {s}: {e}", b.label), triple_doc(&b.triple))), moved, None),
    };
    match classify(&c) {
        Ok(r) if r.invariants() == b.result.invariants() => (Ok(()), moved, Some(Structural::of(&r))),
        Ok(r) => (Err((format!("{} seed {s}: became {}", b.label, r.summary()), triple_doc(&c))), moved, None),
        Err(e) => (Err((format!("{} seed {s}: {e}", b.label), triple_doc(&c))), moved, None),
    }
}

pub fn criterion3(seed: u64, structural: &mut Vec<Structural>) -> CheckReport {
    let started = Instant::now();
    let mut t = Tally::new();
    let labels: Vec<DistinguishedLabel> = Family::ALL.iter().flat_map(|&f| all_core_labels(f, 2, &[rat(1)])).collect();
    let setups: Vec<(DistinguishedLabel, bool)> =
        labels.iter().flat_map(|l| [(l.clone(), false), (l.clone(), true)]).collect();
    let bases: Vec<Result<Base, Failure>> = par_map(&setups, |(l, mixed)| {
        let residual = if *mixed { small_residual(l.family) } else { Vec::new() };
        let triple = synthesize_distinguished(l, &residual).map_err(|e| (format!("{l}: {e}"), None))?;
        let result = classify(&triple).map_err(|e| (format!("{l}: {e}"), triple_doc(&triple)))?;
        Ok(Base { label: l.clone(), triple, result })
    });
    let mut jobs = Vec::new();
    for (b, (_, mixed)) in bases.iter().zip(&setups) {
        let count = if *mixed { MIXED_CONJUGATIONS_PER_CASE } else { CONJUGATIONS_PER_CASE };
        match b {
            Ok(b) => jobs.extend((0..count).map(|k| (b, seed.wrapping_mul(1_000_003).wrapping_add(k)))),
            Err(f) => t.record(Err(f.clone())),
        }
    }
    let mut moved = 0;
    for (o, m, s) in par_map(&jobs, |&(b, s)| conjugation_case(b, s)) {
        t.record(o);
        moved += usize::from(m);
        structural.extend(s);
    }
    for b in bases.into_iter().flatten() {
        structural.push(Structural::of(&b.result));
    }
    let extra = format!(
        "{} cores × ({CONJUGATIONS_PER_CASE} bare + {MIXED_CONJUGATIONS_PER_CASE} with residual), {moved} non-identity",
        labels.len()
    );
    t.report("C3", "labels invariant under isotropy conjugation", started, extra)
}

// ------------------------------------------------------------ criterion 4

pub fn criterion4() -> CheckReport {
    let started = Instant::now();
    let mut t = Tally::new();
    for f in Family::ALL {
        for l in all_type_labels(f, 6) {
            let Ok(expected) = type_index(&l) else { continue };
            let outcome = match synthesize_type(&l).map(|p| p.space.hermitian_matrix()) {
                Ok(Some(a)) => {
                    let got = negative_index(&a);
                    if got == expected {
                        Ok(())
                    } else {
                        Err((format!("{l}: index {got}, formula {expected}"), None))
                    }
                }
                Ok(None) => Err((format!("{l}: no hermitian form"), None)),
                Err(e) => Err((format!("{l}: {e}"), None)),
            };
            t.record(outcome);
        }
    }
    t.report("C4", "index formulas", started, String::new())
}

// ------------------------------------------------------------ criterion 5

pub fn criterion5(structural: &[Structural]) -> CheckReport {
    let started = Instant::now();
    let mut t = Tally::new();
    for s in structural {
        t.record(s.check().map_err(|m| (m, None)));
    }
    t.report("C5", "cores uniform with nonsingular chain Gram matrices", started, "over C1–C3".into())
}

// ------------------------------------------------------------ criterion 6

pub fn criterion6() -> CheckReport {
    let started = Instant::now();
    let mut t = Tally::new();
    for f in Family::ALL {
        let Some(kind) = f.form_kind() else { continue };
        for l in all_type_labels(f, 5) {
            let outcome = (|| -> Result<(), String> {
                let p = synthesize_type(&l).map_err(|e| e.to_string())?;
                let r = reduced_pair(&p).map_err(|e| e.to_string())?;
                let m = r.tau_bar.ok_or("no reduced form")?.matrix;
                let direct = if m.adjoint() == m && kind == FormKind::Hermitian {
                    FormKind::Hermitian
                } else if m.transpose() == m {
                    FormKind::Symmetric
                } else if m.transpose() == -&m {
                    FormKind::Alternating
                } else {
                    return Err("reduced form has no symmetry".into());
                };
                let predicted = reduced_form_kind(kind, l.h);
                if direct == predicted {
                    Ok(())
                } else {
                    Err(format!("{l}: computed {direct:?}, rule gives {predicted:?}"))
                }
            })();
            t.record(outcome.map_err(|m| (m, None)));
        }
    }
    t.report("C6", "reduced form parity rule", started, String::new())
}

// ------------------------------------------------------------ criterion 7

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    (0..n).map(|_| C::ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3))).collect()
}

pub const QUATERNIONIC_EVALUATIONS: usize = 500;

pub fn criterion7(seed: u64) -> CheckReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0a99);
    let mut t = Tally::new();
    let mut spaces = Vec::new();
    for f in Family::ALL {
        for n in [2, 4, 6] {
            for p in 0..=n {
                if let Ok(s) = standard_space(f, n, p) {
                    spaces.push((f, n, p, s));
                }
            }
        }
    }
    let mut q_evals = 0;
    let q_spaces = spaces.iter().filter(|s| s.3.sigma.as_ref().is_some_and(|x| x.sign < 0) && s.3.form.is_some()).count();
    let per_space = QUATERNIONIC_EVALUATIONS.div_ceil(q_spaces.max(1));
    for (f, n, p, s) in &spaces {
        let at = format!("{f} n={n} p={p}");
        if let Some(sig) = &s.sigma {
            let sq = &sig.matrix * &sig.matrix.conj();
            t.record(if sq == Matrix::scalar(*n, &C::int(sig.sign.into())) {
                Ok(())
            } else {
                Err((format!("{at}: σ² ≠ {}·id", sig.sign), None))
            });
        }
        t.record(check_compatibility(s).into_result(Error::Malformed).map_err(|e| (format!("{at}: {e}"), None)));
        if let (Some(_), Some(form)) = (&s.sigma, &s.form) {
            for _ in 0..8 {
                let (u, v) = (random_vector(&mut rng, *n), random_vector(&mut rng, *n));
                let ok = form.eval(&s.sigma(&u), &s.sigma(&v)) == form.eval(&u, &v).conj();
                t.record(if ok { Ok(()) } else { Err((format!("{at}: τ(σu,σv) ≠ conj τ(u,v)"), None)) });
            }
        }
        if matches!(f, Family::GlStar | Family::OPlus | Family::SpMinus) {
            t.record(match s.hermitian_matrix() {
                Some(a) => {
                    let (u, v) = (random_vector(&mut rng, *n), random_vector(&mut rng, *n));
                    let h = |x: &[C], y: &[C]| crate::linalg::dot(&crate::linalg::vec_conj(x), &a.apply(y));
                    if h(&u, &v) == h(&v, &u).conj() {
                        Ok(())
                    } else {
                        Err((format!("{at}: hermitian symmetry fails"), None))
                    }
                }
                None => Err((format!("{at}: no hermitian form"), None)),
            });
        }
        let quaternionic = s.sigma.as_ref().is_some_and(|x| x.sign < 0) && s.form.is_some();
        if !quaternionic {
            continue;
        }
        let qs = match quaternionify(s) {
            Ok(q) => q,
            Err(e) => {
                t.record(Err((format!("{at}: {e}"), None)));
                continue;
            }
        };
        let parity = if *f == Family::OMinus { HamiltonianParity::Symmetric } else { HamiltonianParity::Alternating };
        t.record(if qs.parity == Some(parity) { Ok(()) } else { Err((format!("{at}: parity {:?}", qs.parity), None)) });
        for _ in 0..per_space {
            let (u, v) = (random_vector(&mut rng, *n), random_vector(&mut rng, *n));
            let (l, m) = (random_q(&mut rng), random_q(&mut rng));
            let lhs = qs.eval(&qs.scalar_mul(&l, &u), &qs.scalar_mul(&m, &v));
            let rhs = &(&l * &qs.eval(&u, &v)) * &m.anti_involution();
            let swapped = qs.eval(&v, &u).anti_involution();
            let parity_ok = match parity {
                HamiltonianParity::Symmetric => qs.eval(&u, &v) == swapped,
                HamiltonianParity::Alternating => qs.eval(&u, &v) == -swapped,
            };
            q_evals += 1;
            t.record(if lhs != rhs {
                Err((format!("{at}: τ₋(λu, μv) ≠ λ τ₋(u,v) μ^q"), None))
            } else if !parity_ok {
                Err((format!("{at}: hamiltonian parity fails"), None))
            } else {
                Ok(())
            });
        }
    }
    let extra = format!("{} standard models, {q_evals} quaternionic evaluations", spaces.len());
    let mut r = t.report("C7", "standard model identities", started, extra);
    if q_evals < QUATERNIONIC_EVALUATIONS {
        r.passed = false;
        r.detail.push_str("; too few quaternionic evaluations");
    }
    r
}

// ------------------------------------------------------------ criterion 8

pub const AFFINE_PAIRS: u64 = 100;

pub fn criterion8(seed: u64) -> CheckReport {
    let started = Instant::now();
    let mut contexts = Vec::new();
    for f in [Family::GlPlus, Family::OPlus, Family::SpPlus, Family::GlMinus, Family::OMinus, Family::SpMinus] {
        let sizes: &[usize] = match f {
            Family::GlPlus | Family::OPlus => &[1, 2],
            _ => &[2, 4],
        };
        for &n in sizes {
            for p in 0..=n {
                if let Ok(c) = build_context(f, n, p) {
                    contexts.push(c);
                }
            }
        }
    }
    let jobs: Vec<(usize, u64)> = (0..contexts.len()).flat_map(|c| (0..AFFINE_PAIRS).map(move |k| (c, k))).collect();
    let outcomes = par_map(&jobs, |&(ci, k)| -> Result<(), (Failure, bool)> {
        let c = &contexts[ci];
        let at = format!("{} n={} p={} pair {k}", c.family, c.n, c.p);
        let s = seed.wrapping_mul(7919).wrapping_add(k);
        let fail = |m: String, doc: Option<Document>| Err(((format!("{at}: {m}"), doc), false));
        let a = c.random_element(s).map_err(|e| ((format!("{at}: {e}"), None), false))?;
        let b = c.random_element(s ^ 0xb).map_err(|e| ((format!("{at}: {e}"), None), false))?;
        let doc = |x| Some(Document::new(Payload::AffineElement(AffineDoc::from_element(c, x))));
        let ga = embed(c, &a).map_err(|e| ((format!("{at}: {e}"), doc(&a)), false))?;
        let gb = embed(c, &b).map_err(|e| ((format!("{at}: {e}"), doc(&b)), false))?;
        if ga.apply(&c.fixed_vector) != c.fixed_vector {
            return fail("embed(a) moves v⁰".into(), doc(&a));
        }
        let form = c.extended.form.as_ref();
        if form.is_some_and(|t| t.pullback(&ga).matrix != t.matrix) {
            return fail("form pullback differs".into(), doc(&a));
        }
        match project(c, &ga) {
            Ok(back) if back == a => {}
            Ok(_) => return fail("project∘embed ≠ id".into(), doc(&a)),
            Err(e) => return fail(format!("project failed: {e}"), doc(&a)),
        }
        if matches!(c.case, AffineCase::Quaternionic | AffineCase::QuaternionicForm) {
            let models = quaternionic_model(c, &ga)
                .and_then(|ma| Ok((ma, quaternionic_model(c, &gb)?, quaternionic_model(c, &(&ga * &gb))?)));
            let (ma, mb, mab) = match models {
                Ok(m) => m,
                Err(e) => return fail(format!("quaternionic model: {e}"), doc(&a)),
            };
            if mab != mb.mul(&ma) {
                return fail("quaternionic model not functorial".into(), doc(&a));
            }
            let qs = quaternionic_structure(c).map_err(|e| ((format!("{at}: {e}"), None), false))?;
            if let Some(g) = &qs.qform {
                if &ma.mul(g).mul(&ma.q_transpose()) != g {
                    return fail("quaternionic form not transported".into(), doc(&a));
                }
            }
        }
        match embed(c, &c.compose(&a, &b)).map(|gab| &(&ga * &gb) - &gab) {
            Ok(d) if d.is_zero() => Ok(()),
            Ok(_) => Err(((format!("{at}: embed(a)·embed(b) ≠ embed(a∘b)"), doc(&a)), true)),
            Err(e) => fail(format!("{e}"), doc(&a)),
        }
    });
    let mut t = Tally::new();
    let mut defective: Vec<String> = Vec::new();
    let mut other = 0;
    for ((ci, _), o) in jobs.iter().zip(outcomes) {
        match o {
            Ok(()) => t.record(Ok(())),
            Err((f, homomorphism)) => {
                other += usize::from(!homomorphism);
                if homomorphism {
                    let name = contexts[*ci].family.to_string();
                    if !defective.contains(&name) {
                        defective.push(name);
                    }
                }
                t.record(Err(f));
            }
        }
    }
    let mut extra = format!("{} contexts, {other} failures besides multiplicativity", contexts.len());
    if !defective.is_empty() {
        extra.push_str(&format!("; not multiplicative for {}", defective.join(", ")));
    }
    let mut r = t.report("C8", "affine isotropy correspondence", started, extra);
    r.budget = Some(Duration::from_secs(30));
    r
}

// ------------------------------------------------------------ criterion 9

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Height,
    Sign,
    ReducedDim,
    Modulus,
}

fn compatible<T: PartialEq>(x: &Option<T>, y: &Option<T>) -> bool {
    x.is_none() || y.is_none() || x == y
}

fn separation_axis(a: &DistinguishedLabel, b: &DistinguishedLabel) -> Option<Axis> {
    if a.family != b.family {
        return None;
    }
    if a.kind != b.kind {
        let same_rest = a.h == b.h && compatible(&a.eps, &b.eps) && compatible(&a.modulus, &b.modulus);
        return same_rest.then_some(Axis::ReducedDim);
    }
    let diffs = [(a.h != b.h, Axis::Height), (a.eps != b.eps, Axis::Sign), (a.modulus != b.modulus, Axis::Modulus)];
    let mut which = diffs.iter().filter(|d| d.0).map(|d| d.1);
    match (which.next(), which.next()) {
        (Some(x), None) => Some(x),
        _ => None,
    }
}

pub fn criterion9() -> CheckReport {
    let started = Instant::now();
    let mut pairs = Vec::new();
    for f in Family::ALL {
        let labels = all_core_labels(f, 3, &[rat(1), rat(2)]);
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                if let Some(axis) = separation_axis(a, b) {
                    pairs.push((a.clone(), b.clone(), axis));
                }
            }
        }
    }
    let outcomes = par_map(&pairs, |(a, b, axis)| -> Result<(), Failure> {
        let ta = synthesize_distinguished(a, &[]).map_err(|e| (format!("{a}: {e}"), None))?;
        let tb = synthesize_distinguished(b, &[]).map_err(|e| (format!("{b}: {e}"), None))?;
        match triples_equivalent(&ta, &tb) {
            Ok(e) if !e.equivalent => Ok(()),
            Ok(_) => Err((format!("{a} and {b} ({axis:?}) reported equivalent"), triple_doc(&ta))),
            Err(e) => Err((format!("{a} vs {b}: {e}"), triple_doc(&ta))),
        }
    });
    let mut t = Tally::new();
    for o in outcomes {
        t.record(o);
    }
    let count = |x: Axis| pairs.iter().filter(|p| p.2 == x).count();
    let extra = format!(
        "h {}, eps {}, reduced dim {}, modulus {}",
        count(Axis::Height),
        count(Axis::Sign),
        count(Axis::ReducedDim),
        count(Axis::Modulus)
    );
    let mut r = t.report("C9", "separation of differing cores", started, extra);
    if pairs.len() < 50 {
        r.passed = false;
    }
    r
}

// ----------------------------------------------------------------- fixtures

/// Every `*.json` document in `dir` must load and classify; a sibling
/// `<stem>.label` file pins the expected summary.
pub fn check_fixtures(dir: &Path) -> CheckReport {
    let started = Instant::now();
    let mut t = Tally::new();
    let mut files: Vec<_> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect(),
        Err(e) => {
            t.record(Err((format!("{}: {e}", dir.display()), None)));
            Vec::new()
        }
    };
    files.sort();
    for path in &files {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let outcome = (|| -> Result<(), Failure> {
            let text = std::fs::read_to_string(path).map_err(|e| (format!("{name}: {e}"), None))?;
            let doc = Document::parse(&text).map_err(|e| (format!("{name}: {e}"), None))?;
            let summary = match &doc.payload {
                Payload::Triple(td) => {
                    let tr = td.to_triple().map_err(|e| (format!("{name}: {e}"), Some(doc.clone())))?;
                    let r = classify(&tr).map_err(|e| (format!("{name}: {e}"), Some(doc.clone())))?;
                    Structural::of(&r).check().map_err(|m| (format!("{name}: {m}"), Some(doc.clone())))?;
                    r.summary()
                }
                Payload::Pair(pd) => {
                    let p = pd.to_pair().map_err(|e| (format!("{name}: {e}"), Some(doc.clone())))?;
                    let d = crate::types::decompose_nilpotent_pair(&p)
                        .map_err(|e| (format!("{name}: {e}"), Some(doc.clone())))?;
                    crate::labels::render_types(&d.labels)
                }
                _ => return Ok(()),
            };
            let label_path = path.with_extension("label");
            if let Ok(expected) = std::fs::read_to_string(&label_path) {
                if expected.trim() != summary {
                    return Err((format!("{name}: expected {}, got {summary}", expected.trim()), Some(doc)));
                }
            }
            Ok(())
        })();
        t.record(outcome);
    }
    t.report("F", "fixtures", started, format!("{}", dir.display()))
}

/// `ORBITFORGE_FIXTURES`, else `./fixtures` when it exists.
pub fn fixture_dir() -> Option<std::path::PathBuf> {
    match std::env::var_os("ORBITFORGE_FIXTURES") {
        Some(d) => Some(d.into()),
        None => {
            let d = std::path::PathBuf::from("fixtures");
            d.is_dir().then_some(d)
        }
    }
}

// ------------------------------------------------------------------ runner

/// Criteria 1–9 in order.
pub fn run_acceptance(seed: u64) -> Vec<CheckReport> {
    let mut structural = Vec::new();
    let c1 = criterion1(&mut structural);
    let c2 = criterion2(seed, &mut structural);
    let c3 = criterion3(seed, &mut structural);
    let c5 = criterion5(&structural);
    vec![c1, c2, c3, criterion4(), c5, criterion6(), criterion7(seed), criterion8(seed), criterion9()]
}

pub fn run_scope(scope: Scope, seed: u64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    if matches!(scope, Scope::Scalars | Scope::All) {
        out.push(scalar_laws(seed));
    }
    if scope == Scope::All {
        out.extend(run_acceptance(seed));
        return out;
    }
    match scope {
        Scope::Forms => out.push(criterion7(seed)),
        Scope::Types => out.extend([criterion4(), criterion6()]),
        Scope::Distinguished => {
            let mut structural = Vec::new();
            let c1 = criterion1(&mut structural);
            let c2 = criterion2(seed, &mut structural);
            let c3 = criterion3(seed, &mut structural);
            let c5 = criterion5(&structural);
            out.extend([c1, c2, c3, c5, criterion9()]);
        }
        Scope::Affine => out.push(criterion8(seed)),
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scopes_parse() {
        assert_eq!("types".parse::<Scope>(), Ok(Scope::Types));
        assert!("everything".parse::<Scope>().is_err());
    }

    #[test]
    fn scalar_suite_is_deterministic() {
        let a = scalar_laws(5);
        assert!(a.passed, "{a}");
        assert_eq!(a.to_string(), scalar_laws(5).to_string());
    }

    #[test]
    fn par_map_keeps_order() {
        let v: Vec<u64> = (0..100).collect();
        assert_eq!(par_map(&v, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn block_permutations_are_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = block_permutation(&[2, 1, 3], &mut rng);
        assert_eq!(&p * &p.transpose(), Matrix::identity(6));
    }

    #[test]
    fn separation_axes() {
        use crate::types::Kind;
        let l = |h, k, e, m: Option<i64>| DistinguishedLabel::new(Family::OPlus, h, k, e, m.map(rat)).unwrap();
        let a = l(2, Kind::Single, Some(1), Some(1));
        assert_eq!(separation_axis(&a, &l(2, Kind::Single, Some(-1), Some(1))), Some(Axis::Sign));
        assert_eq!(separation_axis(&a, &l(2, Kind::Single, Some(-1), Some(2))), None);
        assert_eq!(separation_axis(&a, &l(4, Kind::Single, Some(1), Some(1))), Some(Axis::Height));
    }

    #[test]
    fn structural_checks() {
        let s = Structural { label: "x".into(), kernel_dim: 3, reduced_dim: 3, gram_ok: true };
        assert!(s.check().is_err());
        let s = Structural { label: "x".into(), kernel_dim: 1, reduced_dim: 1, gram_ok: false };
        assert!(s.check().is_err());
    }
}
