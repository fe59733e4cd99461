//! The rational (n−1)-cocycle: the function f(σ)(P, x) given by a finite sum
//! over partitions of deg P, and ψ evaluated on n-tuples of invertible
//! matrices over F via the smallest-index column-selection rule.
//!
//! Column selection is discontinuous, so the zero tests ⟨x, A_{kj}⟩ = 0 are
//! performed exactly over F; only the final evaluation is inexact.

use crate::extension::FMat;

use crate::field::{FElem, QuadField};
use crate::num::{CMatrix, Complex};
use crate::poly::{expand_pr, HomogPoly};
use rug::{Assign, Float, Integer};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CocycleError {
    /// A pairing ⟨x, σ_j⟩ vanished where the formula divides by it.
    DivisionByZero(usize),
    /// No column of some A_k pairs nonzero with x. Impossible for invertible
    /// A_k and x ≠ 0; indicates corrupted input.
    NoNonvanishingColumn(usize),
}

impl fmt::Display for CocycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CocycleError::DivisionByZero(j) => write!(f, "pairing with column {j} vanishes"),
            CocycleError::NoNonvanishingColumn(k) => {
                write!(f, "all pairings with columns of matrix {k} vanish")
            }
        }
    }
}

impl std::error::Error for CocycleError {}

/// Invertible matrix over F with a cached complex image.
#[derive(Clone, Debug)]
pub struct FMatrix {
    pub exact: FMat,
    pub emb: CMatrix,
    /// lcm of entry denominators; 1/(den_x·den) is a lower bound on the
    /// modulus of any nonzero exact pairing with x of denominator den_x.
    pub max_den: Integer,
}

impl FMatrix {
    pub fn new(f: &QuadField, exact: FMat, prec: u32) -> Self {
        let n = exact.n;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let row = (0..n).map(|j| f.embed(exact.at(i, j), prec)).collect();
            rows.push(row);
        }
        let emb = CMatrix::from_rows(rows);
        let max_den = exact.max_denominator(f);
        FMatrix { exact, emb, max_den }
    }

    pub fn n(&self) -> usize {
        self.exact.n
    }

    pub fn identity(f: &QuadField, n: usize, prec: u32) -> Self {
        Self::new(f, FMat::identity(f, n), prec)
    }

    pub fn mul(&self, f: &QuadField, rhs: &Self, prec: u32) -> Self {
        Self::new(f, self.exact.mul(f, &rhs.exact), prec)
    }
}

/// Ordered n-tuple of matrices, the argument of ψ.
#[derive(Clone, Debug)]
pub struct Tuple {
    pub mats: Vec<FMatrix>,
}

impl Tuple {
    pub fn new(mats: Vec<FMatrix>) -> Self {
        let n = mats[0].n();
        assert!(mats.iter().all(|m| m.n() == n));
        Tuple { mats }
    }

    pub fn n(&self) -> usize {
        self.mats[0].n()
    }
}

/// Exact pairing ⟨x, col⟩ = Σ_i x_i·col_i over F.
pub fn exact_pairing(f: &QuadField, x: &[FElem], col: &[FElem]) -> FElem {
    let mut acc = FElem::zero();
    for (xi, ci) in x.iter().zip(col) {
        if xi.is_zero() || ci.is_zero() {
            continue;
        }
        acc = f.add(&acc, &f.mul(xi, ci));
    }
    acc
}

/// For each k, the smallest column index j_k (1-based in the written
/// formula; 0-based here) with ⟨x, A_{k j_k}⟩ ≠ 0, decided exactly.
/// Returns the selected columns as a complex matrix σ together with the
/// index vector d.
pub fn select_columns(
    f: &QuadField,
    tuple: &Tuple,
    x: &[FElem],
) -> Result<(CMatrix, Vec<usize>), CocycleError> {
    assert!(!x.iter().all(|c| c.is_zero()), "x must be nonzero");
    let n = tuple.n();
    let mut d = Vec::with_capacity(n);
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(n);
    for (k, mat) in tuple.mats.iter().enumerate() {
        let mut found = None;
        for j in 0..n {
            let col = mat.exact.col(j);
            if !exact_pairing(f, x, &col).is_zero() {
                found = Some(j);
                break;
            }
        }
        let j = found.ok_or(CocycleError::NoNonvanishingColumn(k))?;
        d.push(j);
        cols.push(mat.emb.col(j));
    }
    // assemble σ with the selected columns: σ_{ij} = cols[j][i]
    let prec = cols[0][0].prec();
    let mut sigma = CMatrix::zero(n, prec);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            *sigma.at_mut(i, j) = v.clone();
        }
    }
    Ok((sigma, d))
}

/// The classifier returning the unique d with x ∈ X(d): for each i, the
/// pairings with columns j < d_i vanish exactly and the one at d_i does not.
/// Indices are 0-based; this agrees with `select_columns` by construction.
pub fn decompose_x(f: &QuadField, tuple: &Tuple, x: &[FElem]) -> Result<Vec<usize>, CocycleError> {
    select_columns(f, tuple, x).map(|(_, d)| d)
}

/// f(σ)(P, x) = det(σ) Σ_r P_r(σ) Π_j r_j! / ⟨x, σ_j⟩^{1+r_j}.
///
/// Columns with vanishing pairings raise a division-by-zero signal unless
/// det(σ) is exactly zero, in which case the value is zero.
pub fn eval_f(sigma: &CMatrix, p: &HomogPoly, x: &[Complex]) -> Result<Complex, CocycleError> {
    let det = sigma.det();
    if det.is_zero() {
        return Ok(Complex::zero(det.prec()));
    }
    let expansion = expand_pr(p, sigma);
    let prec = det.prec();
    let n = sigma.n;
    let pairs: Vec<Complex> = (0..n)
        .map(|j| {
            let col = sigma.col(j);
            let mut acc = Complex::zero(prec);
            for (xi, ci) in x.iter().zip(&col) {
                acc.add_mul_assign(xi, ci);
            }
            acc
        })
        .collect();
    for (j, pr) in pairs.iter().enumerate() {
        if pr.is_zero() {
            return Err(CocycleError::DivisionByZero(j));
        }
    }
    let max_pow = 1 + p.degree as usize;
    // inverse-power tables per column
    let mut inv_pows: Vec<Vec<Complex>> = Vec::with_capacity(n);
    for pr in &pairs {
        let inv = pr.recip();
        let mut tab = Vec::with_capacity(max_pow + 1);
        tab.push(Complex::one(prec));
        for e in 1..=max_pow {
            let nx = tab[e - 1].mul(&inv);
            tab.push(nx);
        }
        inv_pows.push(tab);
    }
    let mut sum = Complex::zero(prec);
    for (r, coeff) in &expansion.terms {
        let mut term = coeff.clone();
        for (j, &rj) in r.iter().enumerate() {
            term = term.mul(&inv_pows[j][1 + rj as usize]);
            term = term.mul_float(&factorial(rj, prec));
        }
        sum.add_assign(&term);
    }
    Ok(det.mul(&sum))
}

/// The variant of Definition function-f that sets f to zero when some
/// pairing vanishes. Exposed for completeness; ψ never reaches this case
/// because column selection guarantees nonvanishing pairings.
pub fn eval_f_or_zero(sigma: &CMatrix, p: &HomogPoly, x: &[Complex]) -> Complex {
    match eval_f(sigma, p, x) {
        Ok(v) => v,
        Err(CocycleError::DivisionByZero(_)) => Complex::zero(sigma.a[0].prec()),
        Err(_) => Complex::zero(sigma.a[0].prec()),
    }
}

fn factorial(k: u32, prec: u32) -> Float {
    let mut f = Float::with_val(prec, 1);
    for v in 2..=k {
        f *= v;
    }
    f
}

/// ψ(A_1, …, A_n)(P, x): zero at x = 0, otherwise eval_f on the selected
/// columns with x embedded.
pub fn eval_psi(
    f: &QuadField,
    tuple: &Tuple,
    p: &HomogPoly,
    x: &[FElem],
    prec: u32,
) -> Result<Complex, CocycleError> {
    if x.iter().all(|c| c.is_zero()) {
        return Ok(Complex::zero(prec));
    }
    let (sigma, _) = select_columns(f, tuple, x)?;
    let xc: Vec<Complex> = x.iter().map(|c| f.embed(c, prec)).collect();
    eval_f(&sigma, p, &xc)
}

// ---------------------------------------------------------------------------
// Cached evaluation: the selected σ and its partition expansion depend on x
// only through the index vector d, so repeated evaluation over a lattice
// reuses one expansion per (tuple, d) class.
// ---------------------------------------------------------------------------

/// Precomputed data for one selection class d of one tuple.
#[derive(Clone, Debug)]
pub struct SelectionClass {
    pub d: Vec<usize>,
    /// det(σ)·P_r(σ)·Π_j r_j!, indexed by the partition r.
    pub terms: Vec<(Vec<u32>, Complex)>,
    /// max power 1 + r_j needed per column.
    pub max_pow: usize,
    /// exact selected columns (for pairing evaluation)
    pub cols_exact: Vec<Vec<FElem>>,
    pub cols_emb: Vec<Vec<Complex>>,
    /// σ is exactly singular: every value in this class is zero.
    pub singular: bool,
}

/// Per-tuple cache of selection classes keyed by d.
pub struct TupleEvaluator {
    pub field: QuadField,
    pub tuple: Tuple,
    pub poly: HomogPoly,
    pub prec: u32,
    classes: HashMap<Vec<usize>, SelectionClass>,
}

impl TupleEvaluator {
    pub fn new(field: QuadField, tuple: Tuple, poly: HomogPoly, prec: u32) -> Self {
        TupleEvaluator {
            field,
            tuple,
            poly,
            prec,
            classes: HashMap::new(),
        }
    }

    pub fn class_for(&mut self, d: &[usize]) -> &SelectionClass {
        if !self.classes.contains_key(d) {
            let n = self.tuple.n();
            let cols_exact: Vec<Vec<FElem>> = (0..n)
                .map(|k| self.tuple.mats[k].exact.col(d[k]))
                .collect();
            let cols_emb: Vec<Vec<Complex>> = (0..n)
                .map(|k| self.tuple.mats[k].emb.col(d[k]))
                .collect();
            // exact determinant test on selected columns
            let mut fm = FMat {
                n,
                a: vec![FElem::zero(); n * n],
            };
            for (j, col) in cols_exact.iter().enumerate() {
                for i in 0..n {
                    fm.a[i * n + j] = col[i].clone();
                }
            }
            let singular = fm.det(&self.field).is_zero();
            let mut sigma = CMatrix::zero(n, self.prec);
            for (j, col) in cols_emb.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    *sigma.at_mut(i, j) = v.clone();
                }
            }
            let mut terms = Vec::new();
            let mut max_pow = 1;
            if !singular {
                let det = sigma.det();
                let expansion = expand_pr(&self.poly, &sigma);
                for (r, coeff) in &expansion.terms {
                    let mut c = det.mul(coeff);
                    for &rj in r {
                        c = c.mul_float(&factorial(rj, self.prec));
                        max_pow = max_pow.max(1 + rj as usize);
                    }
                    terms.push((r.clone(), c));
                }
            }
            self.classes.insert(
                d.to_vec(),
                SelectionClass {
                    d: d.to_vec(),
                    terms,
                    max_pow,
                    cols_exact,
                    cols_emb,
                    singular,
                },
            );
        }
        &self.classes[d]
    }
}

/// Evaluate a selection class at complex pairings (one per column).
pub fn eval_class_at_pairings(class: &SelectionClass, pairs: &[Complex], prec: u32) -> Complex {
    let mut buf = ClassEvalBuffers::new(pairs.len(), 8, prec);
    let mut ws = crate::num::complex::Workspace::new(prec);
    let mut out = Complex::zero(prec);
    eval_class_into(class, pairs, &mut buf, &mut ws, &mut out);
    out
}

/// Reusable buffers for allocation-free class evaluation.
pub struct ClassEvalBuffers {
    /// inv_pows[j][e] = pairs[j]^(−e)
    inv_pows: Vec<Vec<Complex>>,
    ta: Complex,
    tb: Complex,
}

impl ClassEvalBuffers {
    pub fn new(n: usize, max_pow: usize, prec: u32) -> Self {
        ClassEvalBuffers {
            inv_pows: vec![vec![Complex::zero(prec); max_pow + 1]; n],
            ta: Complex::zero(prec),
            tb: Complex::zero(prec),
        }
    }

    fn ensure(&mut self, n: usize, max_pow: usize, prec: u32) {
        if self.inv_pows.len() < n || self.inv_pows[0].len() < max_pow + 1 {
            self.inv_pows = vec![vec![Complex::zero(prec); max_pow + 1]; n];
        }
    }
}

/// ψ-class value at the given pairings, written into `out`.
pub fn eval_class_into(
    class: &SelectionClass,
    pairs: &[Complex],
    buf: &mut ClassEvalBuffers,
    ws: &mut crate::num::complex::Workspace,
    out: &mut Complex,
) {
    out.assign_zero();
    if class.singular {
        return;
    }
    let n = pairs.len();
    let prec = pairs[0].prec();
    buf.ensure(n, class.max_pow, prec);
    for (j, pr) in pairs.iter().enumerate() {
        let tab = &mut buf.inv_pows[j];
        tab[0].re.assign(1);
        tab[0].im.assign(0);
        // tab[1] = 1/pr
        let (head, tail) = tab.split_at_mut(1);
        let _ = head;
        tail[0].assign_recip(pr, &mut ws.t1);
        for e in 2..=class.max_pow {
            let (lo, hi) = tab.split_at_mut(e);
            hi[0].assign_mul(&lo[e - 1], &lo[1], &mut ws.t1, &mut ws.t2);
        }
    }
    for (r, coeff) in &class.terms {
        buf.ta.assign(coeff);
        for (j, &rj) in r.iter().enumerate() {
            buf.tb
                .assign_mul(&buf.ta, &buf.inv_pows[j][1 + rj as usize], &mut ws.t1, &mut ws.t2);
            std::mem::swap(&mut buf.ta, &mut buf.tb);
        }
        out.re += &buf.ta.re;
        out.im += &buf.ta.im;
    }
}
