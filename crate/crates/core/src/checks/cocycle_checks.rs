//! The cocycle relation over random tuples, and the evaluation formula
//! checked against a brute-force symbolic differentiation oracle.

use super::{random_gln, random_poly, random_x, rng_for, CheckSuite, RunConfig};
use crate::cocycle::{eval_f, eval_psi, Tuple};
use crate::field::QuadField;
use crate::num::{two_pow, CMatrix, Complex};
use crate::poly::HomogPoly;
use crate::report::CheckRecord;
use rand::Rng;
use rug::Float;

pub struct CocycleRelations;

impl CheckSuite for CocycleRelations {
    fn name(&self) -> &'static str {
        "cocycle-relations"
    }

    fn description(&self) -> &'static str {
        "alternating-sum cocycle relation over random GL_n(O_F) tuples, n = 2 and 3"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let f = QuadField::new(1).unwrap();
        let tol = two_pow(-96, prec);
        let mut out = Vec::new();
        for n in [2usize, 3] {
            let mut rng = rng_for(cfg, 0xc0c1 + n as u64);
            let mut worst = 0f64;
            let mut failures = 0usize;
            for _ in 0..cfg.trials {
                let mats: Vec<_> = (0..=n)
                    .map(|_| random_gln(&mut rng, &f, n, 3, prec))
                    .collect();
                let x = random_x(&mut rng, n, 5);
                let p = random_poly(&mut rng, n, 2, prec);
                let rel = alternating_residual(&f, &mats, &p, &x, prec);
                worst = worst.max(rel);
                if rel > tol.to_f64() {
                    failures += 1;
                }
            }
            out.push(CheckRecord::assert(
                format!("alternating-sum-n{n}"),
                failures == 0,
                format!("max rel residual {worst:e} over {} trials", cfg.trials),
                "Σ(−1)^i ψ(…Â_i…) = 0",
                "2^(-96)·max-term",
                format!("{failures} trials exceeded the bound"),
            ));

            // degenerate trial: a repeated matrix forces det σ = 0 terms
            let mut rng2 = rng_for(cfg, 0xdead + n as u64);
            let a = random_gln(&mut rng2, &f, n, 3, prec);
            let mut mats = vec![a.clone(), a];
            for _ in 2..=n {
                mats.push(random_gln(&mut rng2, &f, n, 3, prec));
            }
            let x = random_x(&mut rng2, n, 5);
            let p = random_poly(&mut rng2, n, 2, prec);
            let rel = alternating_residual(&f, &mats, &p, &x, prec);
            out.push(CheckRecord::assert(
                format!("degenerate-shared-columns-n{n}"),
                rel <= tol.to_f64(),
                format!("rel residual {rel:e}"),
                "relation holds with det σ = 0 terms",
                "2^(-96)·max-term",
                "degenerate tuple broke the relation",
            ));
        }
        out
    }
}

/// |Σ_i (−1)^i ψ(…Â_i…)(P, x)| relative to the largest term magnitude.
fn alternating_residual(
    f: &QuadField,
    mats: &[crate::cocycle::FMatrix],
    p: &HomogPoly,
    x: &[crate::field::FElem],
    prec: u32,
) -> f64 {
    let mut sum = Complex::zero(prec);
    let mut scale = Float::with_val(prec, 0);
    for i in 0..mats.len() {
        let sub: Vec<_> = mats
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, m)| m.clone())
            .collect();
        let tuple = Tuple::new(sub);
        let v = eval_psi(f, &tuple, p, x, prec).expect("selection cannot fail for GL_n");
        let a = v.abs();
        if a > scale {
            scale = a;
        }
        if i % 2 == 0 {
            sum.add_assign(&v);
        } else {
            sum.add_assign(&v.neg());
        }
    }
    if scale.is_zero() {
        return sum.abs().to_f64();
    }
    (sum.abs() / scale).to_f64()
}

pub struct DifferentiationOracle;

impl CheckSuite for DifferentiationOracle {
    fn name(&self) -> &'static str {
        "differentiation-oracle"
    }

    fn description(&self) -> &'static str {
        "partition-sum evaluation against brute-force symbolic differentiation"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let tol = two_pow(-100, prec);
        let mut rng = rng_for(cfg, 0xd1ff);
        let n = 2usize;
        let mut worst = 0f64;
        let mut failures = 0usize;
        let points = 100;
        for _ in 0..points {
            // invertible complex σ with small integer entries
            let sigma = loop {
                let mut s = CMatrix::zero(n, prec);
                for i in 0..n {
                    for j in 0..n {
                        *s.at_mut(i, j) = Complex::from_f64(
                            prec,
                            rng.gen_range(-3i64..=3) as f64,
                            rng.gen_range(-3i64..=3) as f64,
                        );
                    }
                }
                if s.det().abs().to_f64() > 0.5 {
                    break s;
                }
            };
            let p = random_poly(&mut rng, n, 3, prec);
            // a point comfortably away from the hyperplanes ⟨x, σ_j⟩ = 0
            let x = loop {
                let cand: Vec<Complex> = (0..n)
                    .map(|_| {
                        Complex::from_f64(
                            prec,
                            rng.gen_range(-12i64..=12) as f64 / 4.0 + 0.125,
                            rng.gen_range(-12i64..=12) as f64 / 4.0 + 0.0625,
                        )
                    })
                    .collect();
                let ok = (0..n).all(|j| {
                    let col = sigma.col(j);
                    let mut acc = Complex::zero(prec);
                    for (xi, ci) in cand.iter().zip(&col) {
                        acc.add_mul_assign(xi, ci);
                    }
                    acc.abs().to_f64() > 0.25
                });
                if ok {
                    break cand;
                }
            };
            let got = eval_f(&sigma, &p, &x).unwrap();
            let want = differentiate_oracle(&sigma, &p, &x, prec);
            let (ok, rel) = super::rel_close(&got, &want, &tol);
            worst = worst.max(rel);
            if !ok {
                failures += 1;
            }
        }
        vec![CheckRecord::assert(
            "pr-sum-vs-differentiation",
            failures == 0,
            format!("max rel residual {worst:e} over {points} points"),
            "eval_f = P(−∂)·det(σ)/Π⟨x,σ_j⟩",
            "2^(-100)",
            format!("{failures} points exceeded the bound"),
        )]
    }
}

/// Functions of the shape Σ c·Π_j ⟨x, σ_j⟩^(−e_j), closed under ∂/∂x_i.
#[derive(Clone)]
struct RatTerm {
    c: Complex,
    e: Vec<u32>,
}

fn d_dxi(terms: &[RatTerm], sigma: &CMatrix, i: usize) -> Vec<RatTerm> {
    let prec = sigma.a[0].prec();
    let mut out = Vec::new();
    for t in terms {
        for (j, &ej) in t.e.iter().enumerate() {
            if ej == 0 {
                continue;
            }
            // d/dx_i ⟨x,σ_j⟩^(−e) = −e·σ_{ij}·⟨x,σ_j⟩^(−e−1)
            let mut e = t.e.clone();
            e[j] += 1;
            let c = t
                .c
                .mul(sigma.at(i, j))
                .mul_float(&Float::with_val(prec, -(ej as i64)));
            out.push(RatTerm { c, e });
        }
    }
    out
}

/// P(−∂_{x_1}, −∂_{x_2})·det(σ)/(⟨x,σ_1⟩⟨x,σ_2⟩), evaluated at x.
fn differentiate_oracle(
    sigma: &CMatrix,
    p: &HomogPoly,
    x: &[Complex],
    prec: u32,
) -> Complex {
    let n = sigma.n;
    let base = vec![RatTerm {
        c: sigma.det(),
        e: vec![1; n],
    }];
    let mut acc = Complex::zero(prec);
    for (idx, coeff) in &p.coeffs {
        let mut terms = base.clone();
        let mut sign = 1i64;
        for (i, &a) in idx.iter().enumerate() {
            for _ in 0..a {
                terms = d_dxi(&terms, sigma, i);
                sign = -sign;
            }
        }
        // evaluate Σ c·Π ⟨x,σ_j⟩^(−e_j)
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
        let mut val = Complex::zero(prec);
        for t in &terms {
            let mut v = t.c.clone();
            for (j, &ej) in t.e.iter().enumerate() {
                v = v.mul(&pairs[j].powi(-(ej as i64)));
            }
            val.add_assign(&v);
        }
        let signed = if sign < 0 { val.neg() } else { val };
        acc.add_assign(&coeff.mul(&signed));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_reproduces_known_derivative() {
        // σ = I, P = x₁: −∂₁ (1/(x₁x₂)) = 1/(x₁²x₂)
        let prec = 128;
        let sigma = CMatrix::identity(2, prec);
        let p = HomogPoly::monomial(2, vec![1, 0], Complex::one(prec));
        let x = [
            Complex::from_f64(prec, 0.5, 0.25),
            Complex::from_f64(prec, -1.5, 1.0),
        ];
        let got = differentiate_oracle(&sigma, &p, &x, prec);
        let want = x[0].powi(2).mul(&x[1]).recip();
        assert!(got.dist(&want) < two_pow(-110, prec));
    }
}
