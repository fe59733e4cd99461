//! Polynomial-layer properties: the partition-expansion reconstruction, the
//! GL(n) action axioms, and norm-form equivariance under relative-norm-one
//! units.

use super::{random_poly, rel_close, rng_for, CheckSuite, RunConfig};
use crate::homology::varrho;
use crate::num::{two_pow, CMatrix, Complex};
use crate::poly::{act, expand_pr, norm_form_poly, NormFormVariant};
use crate::report::CheckRecord;
use rand::Rng;

pub struct PolyProperties;

impl CheckSuite for PolyProperties {
    fn name(&self) -> &'static str {
        "poly-properties"
    }

    fn description(&self) -> &'static str {
        "partition-expansion reconstruction, action axioms, norm-form equivariance"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let tol = two_pow(8 - prec as i64, prec);
        let mut rng = rng_for(cfg, 0x9017);
        let mut out = Vec::new();
        let trials = cfg.trials.min(200).max(10);

        // reconstruction: Σ_r P_r(σ)·Π y^r = P(yσᵀ) at random points
        let mut worst = 0f64;
        for _ in 0..trials {
            let n = if rng.gen_bool(0.5) { 2 } else { 3 };
            let p = random_poly(&mut rng, n, 2, prec);
            let mut sigma = CMatrix::zero(n, prec);
            for i in 0..n {
                for j in 0..n {
                    *sigma.at_mut(i, j) = Complex::from_f64(
                        prec,
                        rng.gen_range(-3i64..=3) as f64,
                        rng.gen_range(-3i64..=3) as f64,
                    );
                }
            }
            let e = expand_pr(&p, &sigma);
            let y: Vec<Complex> = (0..n)
                .map(|_| {
                    Complex::from_f64(
                        prec,
                        rng.gen_range(-8i64..=8) as f64 / 4.0,
                        rng.gen_range(-8i64..=8) as f64 / 4.0,
                    )
                })
                .collect();
            let lhs = e.eval(&y);
            let ys = sigma.transpose().row_vec_mul(&y);
            let rhs = p.eval(&ys);
            let (_, rel) = rel_close(&lhs, &rhs, &tol);
            worst = worst.max(rel);
        }
        out.push(CheckRecord::assert(
            "reconstruction",
            worst <= tol.to_f64(),
            format!("max rel residual {worst:e} over {trials} trials"),
            "Σ_r P_r(σ)·y^r = P(yσᵀ)",
            "2^(8-p)",
            "partition expansion fails to reconstruct",
        ));

        // action axiom: act(AB, P) = act(A, act(B, P))
        let mut worst = 0f64;
        for _ in 0..trials.min(60) {
            let n = 2;
            let p = random_poly(&mut rng, n, 2, prec);
            let rnd_mat = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut m = CMatrix::zero(n, prec);
                for i in 0..n {
                    for j in 0..n {
                        *m.at_mut(i, j) = Complex::from_f64(
                            prec,
                            rng.gen_range(-3i64..=3) as f64,
                            rng.gen_range(-3i64..=3) as f64,
                        );
                    }
                }
                m
            };
            let a = rnd_mat(&mut rng);
            let b = rnd_mat(&mut rng);
            let x: Vec<Complex> = (0..n)
                .map(|_| {
                    Complex::from_f64(
                        prec,
                        rng.gen_range(-8i64..=8) as f64 / 4.0 + 0.125,
                        rng.gen_range(-8i64..=8) as f64 / 4.0,
                    )
                })
                .collect();
            let lhs = act(&a.mul(&b), &p).eval(&x);
            let rhs = act(&a, &act(&b, &p)).eval(&x);
            let (_, rel) = rel_close(&lhs, &rhs, &tol);
            worst = worst.max(rel);
        }
        out.push(CheckRecord::assert(
            "action-axiom",
            worst <= tol.to_f64(),
            format!("max rel residual {worst:e}"),
            "act(AB, P) = act(A, act(B, P))",
            "2^(8-p)",
            "the polynomial action is not associative",
        ));

        // norm-form equivariance at relative-norm-one units: AᵀP = P, AQ = Q
        for inst in &cfg.instances {
            let prep = match inst.prepare(prec) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let a = match varrho(inst, &inst.units[0], prec) {
                Ok(a) => a,
                Err(e) => {
                    out.push(CheckRecord::fail(
                        format!("{}/varrho", inst.name),
                        "error",
                        "unit representation",
                        "",
                        e.to_string(),
                    ));
                    continue;
                }
            };
            let p_form = norm_form_poly(&prep.m_matrix, NormFormVariant::P, 1).unwrap();
            let q_form = norm_form_poly(&prep.m_matrix, NormFormVariant::Q, 1).unwrap();
            let x: Vec<Complex> = (0..inst.n())
                .map(|i| Complex::from_f64(prec, 0.75 + i as f64, 0.5 - i as f64 / 2.0))
                .collect();
            let p_acted = act(&a.emb.transpose(), &p_form).eval(&x);
            let p_plain = p_form.eval(&x);
            let (ok_p, rel_p) = rel_close(&p_acted, &p_plain, &tol);
            out.push(CheckRecord::assert(
                format!("{}/p-form-invariant", inst.name),
                ok_p,
                format!("rel residual {rel_p:e}"),
                "act(ϱ(ε)ᵀ, P) = P for N_K/F(ε) = 1",
                "2^(8-p)",
                "P norm form is not unit-invariant",
            ));
            let q_acted = act(&a.emb, &q_form).eval(&x);
            let q_plain = q_form.eval(&x);
            let (ok_q, rel_q) = rel_close(&q_acted, &q_plain, &tol);
            out.push(CheckRecord::assert(
                format!("{}/q-form-invariant", inst.name),
                ok_q,
                format!("rel residual {rel_q:e}"),
                "act(ϱ(ε), Q) = Q for N_K/F(ε) = 1",
                "2^(8-p)",
                "Q norm form is not unit-invariant",
            ));
        }
        out
    }
}
