//! Homogeneity of ψ and the convergence-factor identity
//! Ω_s^k(xσ, M) = Ω_s^k(x, σM).

use super::{random_gln, random_poly, random_x, rel_close, rng_for, CheckSuite, RunConfig};
use crate::cocycle::{eval_psi, Tuple};
use crate::eisenstein::omega;
use crate::extension::KAlgebra;
use crate::field::{FElem, QuadField};
use crate::num::{two_pow, Complex};
use crate::poly::act;
use crate::report::CheckRecord;
use rand::Rng;
use rug::Rational;

pub struct HomogeneityFactor;

impl CheckSuite for HomogeneityFactor {
    fn name(&self) -> &'static str {
        "homogeneity-factor"
    }

    fn description(&self) -> &'static str {
        "ψ(A𝔄) = det(A)·ψ(𝔄)(AᵀP, xA) and Ω_s^k(xσ, M) = Ω_s^k(x, σM)"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let f = QuadField::new(1).unwrap();
        let tol = two_pow(-96, prec);
        let mut out = Vec::new();

        for n in [2usize, 3] {
            let mut rng = rng_for(cfg, 0xf0f0 + n as u64);
            let mut worst = 0f64;
            let mut failures = 0usize;
            for _ in 0..cfg.trials {
                let mats: Vec<_> = (0..n)
                    .map(|_| random_gln(&mut rng, &f, n, 3, prec))
                    .collect();
                let a = random_gln(&mut rng, &f, n, 3, prec);
                let x = random_x(&mut rng, n, 5);
                let p = random_poly(&mut rng, n, 2, prec);
                // lhs: ψ(A·A_1, …, A·A_n)(P, x)
                let acted: Vec<_> = mats.iter().map(|m| a.mul(&f, m, prec)).collect();
                let lhs = eval_psi(&f, &Tuple::new(acted), &p, &x, prec).unwrap();
                // rhs: det(A)·ψ(𝔄)(AᵀP, xA)
                let xa = a.exact.row_vec_mul(&f, &x);
                let atp = act(&a.emb.transpose(), &p);
                let v = eval_psi(&f, &Tuple::new(mats), &atp, &xa, prec).unwrap();
                let det = f.embed(&a.exact.det(&f), prec);
                let rhs = det.mul(&v);
                let (ok, rel) = rel_close(&lhs, &rhs, &tol);
                worst = worst.max(rel);
                if !ok {
                    failures += 1;
                }
            }
            out.push(CheckRecord::assert(
                format!("homogeneity-n{n}"),
                failures == 0,
                format!("max rel residual {worst:e} over {} trials", cfg.trials),
                "ψ(A𝔄)(P,x) = det(A)·ψ(𝔄)(AᵀP, xA)",
                "2^(-96)",
                format!("{failures} trials exceeded the bound"),
            ));
        }

        // factor identity on honest conjugate-column matrices: the worked
        // instances at n = 2 and a cubic extension built in place at n = 3
        let mut m_list: Vec<(String, QuadField, crate::num::CMatrix, usize)> = Vec::new();
        for inst in &cfg.instances {
            if let Ok(prep) = inst.prepare(prec) {
                m_list.push((
                    inst.name.clone(),
                    inst.alg.field.clone(),
                    prep.m_matrix.clone(),
                    inst.n(),
                ));
            }
        }
        if let Ok(alg3) = KAlgebra::power_basis(
            f.clone(),
            vec![
                FElem::new(Rational::from(1), Rational::from(1)),
                FElem::zero(),
                FElem::zero(),
            ],
        ) {
            if let Ok(emb) = crate::embeddings::EmbeddingSet::compute(&alg3, prec) {
                let m = vec![alg3.basis_elem(0), alg3.basis_elem(1), alg3.basis_elem(2)];
                if let Ok(mat) = emb.build_m(&alg3, &m) {
                    m_list.push(("cubic-theta3-eq-1+i".into(), f.clone(), mat, 3));
                }
            }
        }
        for (name, field, m, n) in &m_list {
            let mut rng = rng_for(cfg, 0xfac7 ^ *n as u64);
            let mut worst = 0f64;
            let mut failures = 0usize;
            for _ in 0..cfg.trials {
                let sigma = random_gln(&mut rng, field, *n, 3, prec);
                let x = random_x(&mut rng, *n, 5);
                let s = Complex::from_f64(
                    prec,
                    1.5 + rng.gen_range(0..=12) as f64 / 8.0,
                    rng.gen_range(-8i64..=8) as f64 / 8.0,
                );
                let k = rng.gen_range(-2i64..=2);
                let x_sigma = sigma.exact.row_vec_mul(field, &x);
                let lhs = omega(field, &x_sigma, m, &s, k, prec);
                let sigma_m = sigma.emb.mul(m);
                let rhs = omega(field, &x, &sigma_m, &s, k, prec);
                match (lhs, rhs) {
                    (Ok(l), Ok(r)) => {
                        let (ok, rel) = rel_close(&l, &r, &tol);
                        worst = worst.max(rel);
                        if !ok {
                            failures += 1;
                        }
                    }
                    // a vanishing pairing can only come from x = 0, which is
                    // excluded by construction
                    _ => failures += 1,
                }
            }
            out.push(CheckRecord::assert(
                format!("factor-identity-{name}"),
                failures == 0,
                format!("max rel residual {worst:e} over {} trials", cfg.trials),
                "Ω_s^k(xσ, M) = Ω_s^k(x, σM)",
                "2^(-96)",
                format!("{failures} trials exceeded the bound"),
            ));
        }
        out
    }
}
