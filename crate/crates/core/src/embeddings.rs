//! Complex embeddings of K fixing F, and the matrix M of conjugate columns
//! M_{ji} = ρ_i(m_j).
//!
//! The n embeddings are determined by the complex roots of the minimal
//! polynomial of θ = e_1 over F. Roots are found by Durand–Kerner iteration
//! at a guarded precision, Newton-polished, then ordered lexicographically by
//! (real part, imaginary part) so the embedding order is identical across
//! runs.

use crate::extension::{KAlgebra, KElem};
use crate::num::{two_pow, CMatrix, Complex};
use rug::Float;
use std::fmt;

const GUARD_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedError {
    RootFinding(String),
    /// Two embedding images closer than the certified separation 2^(−p/2).
    Separation(String),
    /// A certified error bound could not be met at the working precision.
    PrecisionUnderflow(String),
    /// det(M) indistinguishable from zero at the working precision.
    SingularMatrix(String),
    ZeroBasisElement(usize),
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::RootFinding(m) => write!(f, "root finding failed: {m}"),
            EmbedError::Separation(m) => write!(f, "embeddings not separated: {m}"),
            EmbedError::PrecisionUnderflow(m) => write!(f, "precision underflow: {m}"),
            EmbedError::SingularMatrix(m) => write!(f, "singular matrix: {m}"),
            EmbedError::ZeroBasisElement(i) => write!(f, "pseudo-basis element m_{i} is zero"),
        }
    }
}

impl std::error::Error for EmbedError {}

/// The n embeddings ρ_1, …, ρ_n of K into C fixing F, at precision p.
#[derive(Clone, Debug)]
pub struct EmbeddingSet {
    pub prec: u32,
    pub n: usize,
    /// ρ_i(θ), sorted lexicographically by (re, im).
    pub theta: Vec<Complex>,
    /// basis_images[i][j] = ρ_i(e_j) = ρ_i(θ)^j.
    pub basis_images: Vec<Vec<Complex>>,
}

impl EmbeddingSet {
    pub fn compute(alg: &KAlgebra, prec: u32) -> Result<Self, EmbedError> {
        let n = alg.n;
        let q = prec + GUARD_BITS;
        let tail = alg.theta_minpoly_tail();
        // monic polynomial z^n − Σ c_j z^j, coefficients embedded at guard precision
        let mut coeffs: Vec<Complex> = tail
            .iter()
            .map(|c| alg.field.embed(c, q).neg())
            .collect();
        coeffs.push(Complex::one(q));
        let roots = durand_kerner(&coeffs, q)?;
        let mut theta: Vec<Complex> = roots;
        theta.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        // certified pairwise separation > 2^(−p/2)
        let sep_tol = two_pow(-(prec as i64) / 2, q);
        for i in 0..n {
            for j in 0..i {
                let d = theta[i].dist(&theta[j]);
                if d <= sep_tol {
                    return Err(EmbedError::Separation(format!(
                        "|rho_{}(theta) - rho_{}(theta)| = {:e}",
                        i + 1,
                        j + 1,
                        d.to_f64()
                    )));
                }
            }
        }
        let basis_images = theta
            .iter()
            .map(|t| {
                let mut row = Vec::with_capacity(n);
                let mut acc = Complex::one(q);
                for _ in 0..n {
                    row.push(acc.clone());
                    acc = acc.mul(t);
                }
                row
            })
            .collect();
        Ok(EmbeddingSet {
            prec,
            n,
            theta,
            basis_images,
        })
    }

    /// ρ_i(x) with a certified error check. Embeddings fix F: an element of F
    /// embeds to its literal complex value for every i.
    pub fn embed(&self, alg: &KAlgebra, x: &KElem, i: usize) -> Result<Complex, EmbedError> {
        let q = self.prec + GUARD_BITS;
        if x.is_zero() {
            return Ok(Complex::zero(self.prec));
        }
        let mut acc = Complex::zero(q);
        let mut mag = Float::with_val(q, 0);
        for (j, c) in x.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cv = alg.field.embed(c, q);
            let term = cv.mul(&self.basis_images[i][j]);
            mag += term.abs();
            acc.add_assign(&term);
        }
        // evaluation error is a small multiple of 2^(−q) times the magnitude sum
        let err = mag * two_pow(-(q as i64) + 4, q) * Float::with_val(q, 4 * self.n as u32);
        let val_abs = acc.abs();
        if !val_abs.is_zero() && err > val_abs.clone() * two_pow(1 - self.prec as i64, q) {
            return Err(EmbedError::PrecisionUnderflow(format!(
                "cancellation in rho_{}: |value| = {:e}, error bound = {:e}",
                i + 1,
                val_abs.to_f64(),
                err.to_f64()
            )));
        }
        Ok(Complex {
            re: Float::with_val(self.prec, &acc.re),
            im: Float::with_val(self.prec, &acc.im),
        })
    }

    pub fn embed_all(&self, alg: &KAlgebra, x: &KElem) -> Result<Vec<Complex>, EmbedError> {
        (0..self.n).map(|i| self.embed(alg, x, i)).collect()
    }

    /// The matrix with column i equal to (ρ_i(m_1), …, ρ_i(m_n))ᵀ,
    /// certified nonsingular.
    pub fn build_m(&self, alg: &KAlgebra, m: &[KElem]) -> Result<CMatrix, EmbedError> {
        let n = self.n;
        assert_eq!(m.len(), n);
        for (j, mj) in m.iter().enumerate() {
            if mj.is_zero() {
                return Err(EmbedError::ZeroBasisElement(j + 1));
            }
        }
        let mut rows = Vec::with_capacity(n);
        for mj in m {
            let row = self.embed_all(alg, mj)?;
            rows.push(row);
        }
        let mat = CMatrix::from_rows(rows);
        let det = mat.det();
        let scale = mat.max_abs().max(&Float::with_val(self.prec, 1));
        let mut bound = Float::with_val(self.prec, 1);
        for _ in 0..n {
            bound *= &scale;
        }
        if det.abs() <= bound * two_pow(-(self.prec as i64) / 2, self.prec) {
            return Err(EmbedError::SingularMatrix(format!(
                "|det M| = {:e}",
                det.abs().to_f64()
            )));
        }
        Ok(mat)
    }
}

/// Durand–Kerner iteration for a monic complex polynomial given by its
/// coefficient vector (constant term first, leading coefficient 1).
/// Deterministic: fixed initial configuration, fixed precision, fixed
/// iteration schedule.
fn durand_kerner(coeffs: &[Complex], prec: u32) -> Result<Vec<Complex>, EmbedError> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let mut radius = Float::with_val(prec, 1);
    for c in &coeffs[..n] {
        let a = c.abs();
        if a > radius {
            radius = a;
        }
    }
    radius += 1;
    // initial points: radius · (0.4 + 0.9i)^(k+1)
    let seed = Complex::from_f64(prec, 0.4, 0.9);
    let mut z: Vec<Complex> = Vec::with_capacity(n);
    let mut acc = Complex::one(prec);
    for _ in 0..n {
        acc = acc.mul(&seed);
        z.push(acc.mul_float(&radius));
    }
    let eval = |x: &Complex| -> Complex {
        let mut v = coeffs[n].clone();
        for c in coeffs[..n].iter().rev() {
            v = v.mul(x).add(c);
        }
        v
    };
    let tol = two_pow(-(prec as i64) + 24, prec);
    let mut converged = false;
    for _ in 0..500 {
        let mut max_step = Float::with_val(prec, 0);
        for i in 0..n {
            let mut denom = Complex::one(prec);
            for j in 0..n {
                if i != j {
                    denom = denom.mul(&z[i].sub(&z[j]));
                }
            }
            if denom.is_zero() {
                // nudge deterministically and continue
                z[i] = z[i].add(&Complex::from_f64(prec, 1e-3, 2e-3));
                max_step = Float::with_val(prec, 1);
                continue;
            }
            let step = eval(&z[i]).div(&denom);
            let sz = step.abs() / z[i].abs().max(&Float::with_val(prec, 1));
            if sz > max_step {
                max_step = sz;
            }
            z[i] = z[i].sub(&step);
        }
        if max_step < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(EmbedError::RootFinding(
            "Durand-Kerner did not converge".into(),
        ));
    }
    // Newton polish
    let dcoeffs: Vec<Complex> = (1..=n)
        .map(|j| {
            let mut c = coeffs[j].clone();
            c = c.mul_float(&Float::with_val(prec, j as u32));
            c
        })
        .collect();
    let deval = |x: &Complex| -> Complex {
        let mut v = dcoeffs[n - 1].clone();
        for c in dcoeffs[..n - 1].iter().rev() {
            v = v.mul(x).add(c);
        }
        v
    };
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = deval(zi);
            if d.is_zero() {
                break;
            }
            let step = eval(zi).div(&d);
            *zi = zi.sub(&step);
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::KAlgebra;
    use crate::field::{FElem, QuadField};
    use rug::Rational;

    fn qi_sqrt2() -> KAlgebra {
        let f = QuadField::new(1).unwrap();
        KAlgebra::power_basis(f, vec![FElem::from_i64(2), FElem::zero()]).unwrap()
    }

    #[test]
    fn sqrt2_embeddings_are_plus_minus() {
        let alg = qi_sqrt2();
        let emb = EmbeddingSet::compute(&alg, 128).unwrap();
        let sqrt2 = Float::with_val(192, 2).sqrt();
        // lex order puts −√2 first
        assert!((emb.theta[0].re.clone() + &sqrt2).abs() < two_pow(-120, 192));
        assert!((emb.theta[1].re.clone() - &sqrt2).abs() < two_pow(-120, 192));
        assert!(emb.theta[0].im.clone().abs() < two_pow(-120, 192));
    }

    #[test]
    fn embed_fixes_f_literally() {
        let alg = qi_sqrt2();
        let emb = EmbeddingSet::compute(&alg, 96).unwrap();
        let c = FElem::new(Rational::from((7, 3)), Rational::from((-2, 5)));
        let x = alg.from_f(&c);
        let lit = alg.field.embed(&c, 96);
        for i in 0..2 {
            let v = emb.embed(&alg, &x, i).unwrap();
            assert!(v.dist(&lit) < two_pow(-90, 96));
        }
        // embedding of 1 is 1 + 0i
        let one = emb.embed(&alg, &alg.one(), 0).unwrap();
        assert!(one.dist(&Complex::one(96)) < two_pow(-90, 96));
    }

    #[test]
    fn embed_is_ring_morphism() {
        let alg = qi_sqrt2();
        let emb = EmbeddingSet::compute(&alg, 128).unwrap();
        let x = KElem {
            coords: vec![
                FElem::parse("1/2", "1").unwrap(),
                FElem::parse("3", "-1/4").unwrap(),
            ],
        };
        let y = KElem {
            coords: vec![
                FElem::parse("-2", "1/3").unwrap(),
                FElem::parse("1", "1").unwrap(),
            ],
        };
        let xy = alg.mul(&x, &y);
        for i in 0..2 {
            let lhs = emb.embed(&alg, &xy, i).unwrap();
            let rhs = emb.embed(&alg, &x, i).unwrap().mul(&emb.embed(&alg, &y, i).unwrap());
            let scale = rhs.abs().max(&Float::with_val(128, 1));
            assert!(lhs.dist(&rhs) < two_pow(8 - 128, 128) * scale);
        }
    }

    #[test]
    fn product_of_embeddings_matches_relative_norm() {
        let alg = qi_sqrt2();
        let emb = EmbeddingSet::compute(&alg, 128).unwrap();
        let x = KElem {
            coords: vec![
                FElem::parse("2", "1/2").unwrap(),
                FElem::parse("-1/3", "1").unwrap(),
            ],
        };
        let mut prod = Complex::one(128);
        for i in 0..2 {
            prod = prod.mul(&emb.embed(&alg, &x, i).unwrap());
        }
        let norm = alg.field.embed(&alg.rel_norm(&x), 128);
        let scale = norm.abs().max(&Float::with_val(128, 1));
        assert!(prod.dist(&norm) < two_pow(8 - 128, 128) * scale);
    }

    #[test]
    fn build_m_matches_direct_substitution() {
        let alg = qi_sqrt2();
        let emb = EmbeddingSet::compute(&alg, 128).unwrap();
        let m = vec![alg.basis_elem(0), alg.basis_elem(1)];
        let mat = emb.build_m(&alg, &m).unwrap();
        // rows (1, 1) and (ρ_1(√2), ρ_2(√2)) = (−√2, √2) in lex embedding order;
        // det = 2√2
        let sqrt2 = Float::with_val(128, 2).sqrt();
        assert!(mat.at(0, 0).dist(&Complex::one(128)) < two_pow(-100, 128));
        assert!(mat.at(0, 1).dist(&Complex::one(128)) < two_pow(-100, 128));
        assert!((mat.at(1, 0).re.clone() + &sqrt2).abs() < two_pow(-100, 128));
        assert!((mat.at(1, 1).re.clone() - &sqrt2).abs() < two_pow(-100, 128));
        let det = mat.det();
        let want = Float::with_val(128, 8).sqrt();
        assert!((det.re.clone() - want).abs() < two_pow(-100, 128));
        // M·M^{-1} = I to 2^(8−p)
        let minv = mat.inverse().unwrap();
        let prod = mat.mul(&minv);
        let id = CMatrix::identity(2, 128);
        for i in 0..2 {
            for j in 0..2 {
                assert!(prod.at(i, j).dist(id.at(i, j)) < two_pow(8 - 128, 128));
            }
        }
        // all entries nonzero
        for e in &mat.a {
            assert!(!e.abs().is_zero());
        }
    }

    #[test]
    fn cubic_extension_roots() {
        // θ³ = 1 + i over Q(i): three distinct embeddings
        let f = QuadField::new(1).unwrap();
        let alg = KAlgebra::power_basis(
            f,
            vec![
                FElem::new(Rational::from(1), Rational::from(1)),
                FElem::zero(),
                FElem::zero(),
            ],
        )
        .unwrap();
        let emb = EmbeddingSet::compute(&alg, 128).unwrap();
        assert_eq!(emb.theta.len(), 3);
        for t in &emb.theta {
            let cube = t.powi(3);
            let want = Complex::from_f64(128, 1.0, 1.0);
            assert!(cube.dist(&want) < two_pow(-100, 128));
        }
    }
}
