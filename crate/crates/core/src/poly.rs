//! Homogeneous polynomials with complex coefficients, the GL(n) action
//! P ↦ P(xA), partition expansions P(yσᵀ) = Σ_r P_r(σ)·y^r, and the norm
//! forms attached to a conjugate-column matrix M.
//!
//! Coefficients are complex at working precision: the P norm form is built
//! from M^{−T}, whose entries are algebraic irrationalities. Coefficient maps
//! iterate in lexicographic order of exponent vectors (graded-lex within a
//! fixed total degree), so every walk over a polynomial is deterministic.

use crate::num::{CMatrix, Complex};
use std::collections::BTreeMap;

/// Exponent multi-index (r_1, …, r_n) with Σ r_j equal to the degree.
pub type MultiIndex = Vec<u32>;

#[derive(Clone, Debug)]
pub struct HomogPoly {
    pub n_vars: usize,
    pub degree: u32,
    pub coeffs: BTreeMap<MultiIndex, Complex>,
}

impl HomogPoly {
    /// The constant polynomial c of degree 0.
    pub fn constant(n_vars: usize, c: Complex) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(vec![0u32; n_vars], c);
        }
        HomogPoly {
            n_vars,
            degree: 0,
            coeffs,
        }
    }

    pub fn one(n_vars: usize, prec: u32) -> Self {
        Self::constant(n_vars, Complex::one(prec))
    }

    /// The single monomial c·x^idx.
    pub fn monomial(n_vars: usize, idx: MultiIndex, c: Complex) -> Self {
        assert_eq!(idx.len(), n_vars);
        let degree = idx.iter().sum();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(idx, c);
        }
        HomogPoly {
            n_vars,
            degree,
            coeffs,
        }
    }

    /// The linear form Σ_i c_i x_i.
    pub fn linear_form(coeffs_vec: &[Complex]) -> Self {
        let n = coeffs_vec.len();
        let mut coeffs = BTreeMap::new();
        for (i, c) in coeffs_vec.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut idx = vec![0u32; n];
            idx[i] = 1;
            coeffs.insert(idx, c.clone());
        }
        HomogPoly {
            n_vars: n,
            degree: 1,
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn prec(&self) -> u32 {
        self.coeffs
            .values()
            .next()
            .map(|c| c.prec())
            .unwrap_or(crate::DEFAULT_PRECISION)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.n_vars, rhs.n_vars);
        assert!(self.is_zero() || rhs.is_zero() || self.degree == rhs.degree);
        let mut coeffs = self.coeffs.clone();
        for (idx, c) in &rhs.coeffs {
            let entry = coeffs.entry(idx.clone()).or_insert_with(|| Complex::zero(c.prec()));
            entry.add_assign(c);
        }
        coeffs.retain(|_, c| !c.is_zero());
        HomogPoly {
            n_vars: self.n_vars,
            degree: if self.is_zero() { rhs.degree } else { self.degree },
            coeffs,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n_vars, rhs.n_vars);
        let mut coeffs: BTreeMap<MultiIndex, Complex> = BTreeMap::new();
        for (ia, ca) in &self.coeffs {
            for (ib, cb) in &rhs.coeffs {
                let idx: MultiIndex = ia.iter().zip(ib).map(|(a, b)| a + b).collect();
                let prod = ca.mul(cb);
                match coeffs.get_mut(&idx) {
                    Some(e) => e.add_assign(&prod),
                    None => {
                        coeffs.insert(idx, prod);
                    }
                }
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        HomogPoly {
            n_vars: self.n_vars,
            degree: self.degree + rhs.degree,
            coeffs,
        }
    }

    pub fn scale(&self, c: &Complex) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = v.mul(c);
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let prec = self.prec();
        let mut acc = HomogPoly::one(self.n_vars, prec);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Evaluate at a complex point.
    pub fn eval(&self, x: &[Complex]) -> Complex {
        assert_eq!(x.len(), self.n_vars);
        let prec = self.prec().max(x.first().map(|c| c.prec()).unwrap_or(64));
        let mut acc = Complex::zero(prec);
        for (idx, c) in &self.coeffs {
            let mut term = c.clone();
            for (i, &e) in idx.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&x[i].powi(e as i64));
                }
            }
            acc.add_assign(&term);
        }
        acc
    }

    /// Structured record for debugging dumps: degree and the coefficient
    /// map in deterministic (lexicographic) order.
    pub fn record(&self) -> serde_json::Value {
        serde_json::json!({
            "record": "homog-poly",
            "n_vars": self.n_vars,
            "degree": self.degree,
            "coeffs": self
                .coeffs
                .iter()
                .map(|(idx, c)| {
                    serde_json::json!({
                        "index": idx,
                        "re": c.re.to_string(),
                        "im": c.im.to_string(),
                    })
                })
                .collect::<Vec<_>>(),
        })
    }

    /// Substitute x_i ↦ (linear form in y given by row i of `rows`),
    /// multiplying everything out.
    fn substitute_linear(&self, rows: &[Vec<Complex>]) -> Self {
        assert_eq!(rows.len(), self.n_vars);
        let prec = self.prec();
        let forms: Vec<HomogPoly> = rows.iter().map(|r| HomogPoly::linear_form(r)).collect();
        let mut out = HomogPoly {
            n_vars: self.n_vars,
            degree: self.degree,
            coeffs: BTreeMap::new(),
        };
        for (idx, c) in &self.coeffs {
            let mut term = HomogPoly::constant(self.n_vars, c.clone());
            for (i, &e) in idx.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&forms[i]);
                }
            }
            // degree bookkeeping: term now has degree = self.degree
            if out.is_zero() {
                out = term;
            } else {
                out = out.add(&term);
            }
        }
        let _ = prec;
        out.degree = self.degree;
        out.n_vars = self.n_vars;
        out
    }
}

/// The action AP(x) = P(xA): variable x_i becomes ⟨x, A column i⟩.
pub fn act(a: &CMatrix, p: &HomogPoly) -> HomogPoly {
    assert_eq!(a.n, p.n_vars);
    // x_i ↦ (xA)_i = Σ_j x_j A_{ji}: row i of the substitution is column i of A
    let rows: Vec<Vec<Complex>> = (0..a.n).map(|i| a.col(i)).collect();
    p.substitute_linear(&rows)
}

/// Coefficient map of P(yσᵀ) as a polynomial in y: the map r ↦ P_r(σ).
#[derive(Clone, Debug)]
pub struct PartitionExpansion {
    pub degree: u32,
    pub terms: BTreeMap<MultiIndex, Complex>,
}

impl PartitionExpansion {
    /// Reconstruct P(yσᵀ) at a point y (for the reconstruction property).
    pub fn eval(&self, y: &[Complex]) -> Complex {
        let prec = y.first().map(|c| c.prec()).unwrap_or(64);
        let mut acc = Complex::zero(prec);
        for (idx, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in idx.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&y[i].powi(e as i64));
                }
            }
            acc.add_assign(&term);
        }
        acc
    }
}

/// Expansion of P(yσᵀ): substitute x_i ↦ ⟨row i of σ, y⟩ and collect
/// coefficients of the monomials in y.
pub fn expand_pr(p: &HomogPoly, sigma: &CMatrix) -> PartitionExpansion {
    assert_eq!(sigma.n, p.n_vars);
    // (yσᵀ)_i = Σ_j y_j σ_{ij}: row i of the substitution is row i of σ
    let rows: Vec<Vec<Complex>> = (0..sigma.n)
        .map(|i| (0..sigma.n).map(|j| sigma.at(i, j).clone()).collect())
        .collect();
    let q = p.substitute_linear(&rows);
    PartitionExpansion {
        degree: p.degree,
        terms: q.coeffs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormFormVariant {
    /// Q(x) = Π_i ⟨x, M_i⟩, columns of M.
    Q,
    /// P(x) = Π_i ⟨x, M_i^{−T}⟩, columns of M^{−T}.
    P,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularMatrixError;

impl std::fmt::Display for SingularMatrixError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "matrix is singular")
    }
}

impl std::error::Error for SingularMatrixError {}

/// The degree n·e polynomial (Π_i ⟨x, column_i⟩)^e with columns taken from M
/// (variant Q) or M^{−T} (variant P).
pub fn norm_form_poly(
    m: &CMatrix,
    variant: NormFormVariant,
    power: u32,
) -> Result<HomogPoly, SingularMatrixError> {
    let base = match variant {
        NormFormVariant::Q => m.clone(),
        NormFormVariant::P => m.inverse().ok_or(SingularMatrixError)?.transpose(),
    };
    let n = m.n;
    let prec = m.a[0].prec();
    let mut prod = HomogPoly::one(n, prec);
    for i in 0..n {
        prod = prod.mul(&HomogPoly::linear_form(&base.col(i)));
    }
    Ok(prod.pow(power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::two_pow;
    use rug::Float;

    const P: u32 = 128;

    fn c(re: f64, im: f64) -> Complex {
        Complex::from_f64(P, re, im)
    }

    fn sample_matrix(n: usize, salt: u64) -> CMatrix {
        let mut m = CMatrix::zero(n, P);
        for i in 0..n {
            for j in 0..n {
                let v = (salt.wrapping_mul(6364136223846793005).wrapping_add((i * n + j) as u64))
                    % 13;
                *m.at_mut(i, j) = c(v as f64 - 6.0 + 0.5, ((v * 7) % 5) as f64 - 2.0);
            }
        }
        m
    }

    #[test]
    fn act_by_scaling_multiplies_by_power() {
        // A = 2I on degree-2 polynomial gives 4P
        let p = HomogPoly::monomial(2, vec![1, 1], c(1.0, 0.0));
        let mut a = CMatrix::identity(2, P);
        *a.at_mut(0, 0) = c(2.0, 0.0);
        *a.at_mut(1, 1) = c(2.0, 0.0);
        let q = act(&a, &p);
        let x = [c(0.3, 0.1), c(-0.7, 0.4)];
        let lhs = q.eval(&x);
        let rhs = p.eval(&x).mul(&c(4.0, 0.0));
        assert!(lhs.dist(&rhs) < two_pow(-100, P));
    }

    #[test]
    fn act_by_swap_permutes_variables() {
        let p = HomogPoly::monomial(2, vec![1, 0], c(1.0, 0.0)); // x_1
        let mut swap = CMatrix::zero(2, P);
        *swap.at_mut(0, 1) = Complex::one(P);
        *swap.at_mut(1, 0) = Complex::one(P);
        let q = act(&swap, &p);
        assert_eq!(q.coeffs.len(), 1);
        assert!(q.coeffs.contains_key(&vec![0u32, 1u32])); // x_2
    }

    #[test]
    fn act_is_monoid_action() {
        // act(AB, P) = act(A, act(B, P)) at random points
        let a = sample_matrix(2, 11);
        let b = sample_matrix(2, 23);
        let p = HomogPoly::monomial(2, vec![2, 0], c(1.0, -0.5))
            .add(&HomogPoly::monomial(2, vec![1, 1], c(0.0, 2.0)));
        let lhs = act(&a.mul(&b), &p);
        let rhs = act(&a, &act(&b, &p));
        let x = [c(0.37, -0.2), c(1.3, 0.77)];
        let scale = rhs.eval(&x).abs().max(&Float::with_val(P, 1));
        assert!(lhs.eval(&x).dist(&rhs.eval(&x)) < two_pow(8 - P as i64, P) * scale);
    }

    #[test]
    fn expand_pr_identity_and_linear() {
        // P = x_1², σ = I → {(2,0): 1}
        let p = HomogPoly::monomial(2, vec![2, 0], c(1.0, 0.0));
        let id = CMatrix::identity(2, P);
        let e = expand_pr(&p, &id);
        assert_eq!(e.terms.len(), 1);
        assert!(e.terms[&vec![2u32, 0u32]].dist(&Complex::one(P)) < two_pow(-110, P));

        // P = x_1, generic σ: coefficient of y_j is σ_{1j}
        let sigma = sample_matrix(2, 5);
        let p1 = HomogPoly::monomial(2, vec![1, 0], c(1.0, 0.0));
        let e1 = expand_pr(&p1, &sigma);
        for j in 0..2 {
            let mut idx = vec![0u32; 2];
            idx[j] = 1;
            assert!(e1.terms[&idx].dist(sigma.at(0, j)) < two_pow(-110, P));
        }
    }

    #[test]
    fn reconstruction_property() {
        // Σ_r P_r(σ) Π y_j^{r_j} = P(yσᵀ) at random test points
        let sigma = sample_matrix(3, 77);
        let p = HomogPoly::monomial(3, vec![2, 1, 0], c(1.5, 0.5))
            .add(&HomogPoly::monomial(3, vec![0, 1, 2], c(-1.0, 2.0)));
        let e = expand_pr(&p, &sigma);
        for salt in 0..5u64 {
            let y: Vec<Complex> = (0..3)
                .map(|i| {
                    c(
                        ((salt * 31 + i * 17) % 11) as f64 / 7.0 - 0.6,
                        ((salt * 13 + i * 5) % 9) as f64 / 5.0 - 0.8,
                    )
                })
                .collect();
            let lhs = e.eval(&y);
            let ys = sigma.transpose().row_vec_mul(&y);
            let rhs = p.eval(&ys);
            let scale = rhs.abs().max(&Float::with_val(P, 1));
            assert!(lhs.dist(&rhs) < two_pow(8 - P as i64, P) * scale);
        }
    }

    #[test]
    fn divided_power_expansion_matches_decomposition_sum() {
        // For P = x^(g) (divided powers, g = (g_1, g_2), total ≤ 3), the
        // coefficient P_r(σ) equals the sum over simultaneous decompositions
        // r_j = Σ_i r_ij with row sums g_i of Π σ_ij^{r_ij} / Π r_ij!.
        // Oracle: brute-force monomial expansion (the definition itself
        // computed a second way, by enumerating decompositions).
        let sigma = sample_matrix(2, 42);
        for (g1, g2) in [(1u32, 0u32), (1, 1), (2, 1), (3, 0), (2, 0)] {
            let fact = |k: u32| -> rug::Integer {
                let mut f = rug::Integer::from(1);
                for v in 2..=k {
                    f *= v;
                }
                f
            };
            let c_div = Complex::from_rationals(
                P,
                &rug::Rational::from((rug::Integer::from(1), fact(g1) * fact(g2))),
                &rug::Rational::new(),
            );
            let p = HomogPoly::monomial(2, vec![g1, g2], c_div);
            let e = expand_pr(&p, &sigma);
            // enumerate decompositions r_ij ≥ 0 with row sums g_i
            let mut expected: BTreeMap<MultiIndex, Complex> = BTreeMap::new();
            for r11 in 0..=g1 {
                let r12 = g1 - r11;
                for r21 in 0..=g2 {
                    let r22 = g2 - r21;
                    let col = vec![r11 + r21, r12 + r22];
                    let denom = fact(r11) * fact(r12) * fact(r21) * fact(r22);
                    let denom_c = Complex::from_rationals(
                        P,
                        &rug::Rational::from((rug::Integer::from(1), denom)),
                        &rug::Rational::new(),
                    );
                    let term = sigma
                        .at(0, 0)
                        .powi(r11 as i64)
                        .mul(&sigma.at(0, 1).powi(r12 as i64))
                        .mul(&sigma.at(1, 0).powi(r21 as i64))
                        .mul(&sigma.at(1, 1).powi(r22 as i64))
                        .mul(&denom_c);
                    match expected.get_mut(&col) {
                        Some(v) => v.add_assign(&term),
                        None => {
                            expected.insert(col, term);
                        }
                    }
                }
            }
            for (idx, want) in &expected {
                let got = e
                    .terms
                    .get(idx)
                    .cloned()
                    .unwrap_or_else(|| Complex::zero(P));
                let scale = want.abs().max(&Float::with_val(P, 1));
                assert!(
                    got.dist(want) < two_pow(8 - P as i64, P) * scale,
                    "divided power ({g1},{g2}) at {idx:?}"
                );
            }
        }
    }

    #[test]
    fn norm_form_identity_matrix() {
        let id = CMatrix::identity(3, P);
        let q = norm_form_poly(&id, NormFormVariant::Q, 1).unwrap();
        // x_1·x_2·x_3
        assert_eq!(q.coeffs.len(), 1);
        assert!(q.coeffs.contains_key(&vec![1u32, 1, 1]));
        let p = norm_form_poly(&id, NormFormVariant::P, 1).unwrap();
        let x = [c(0.5, 0.25), c(-1.0, 0.5), c(2.0, -0.125)];
        assert!(p.eval(&x).dist(&q.eval(&x)) < two_pow(-100, P));
    }

    #[test]
    fn degree_zero_power_is_constant_one() {
        let m = sample_matrix(2, 3);
        let p0 = norm_form_poly(&m, NormFormVariant::P, 0).unwrap();
        assert_eq!(p0.degree, 0);
        let x = [c(1.0, 2.0), c(-0.5, 0.1)];
        assert!(p0.eval(&x).dist(&Complex::one(P)) < two_pow(-110, P));
    }
}
