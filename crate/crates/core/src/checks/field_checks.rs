//! Instance validation plus embedding and norm cross-checks.

use super::{rng_for, CheckSuite, RunConfig};
use crate::num::{two_pow, CMatrix, Complex};
use crate::report::CheckRecord;
use rand::Rng;

pub struct FieldValidation;

impl CheckSuite for FieldValidation {
    fn name(&self) -> &'static str {
        "field-validation"
    }

    fn description(&self) -> &'static str {
        "instance invariants, embedding separation, exact/numeric norm agreement"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let mut out = Vec::new();
        let mut rng = rng_for(cfg, 0x11ed);
        for inst in &cfg.instances {
            let tag = inst.name.clone();
            for mut r in inst.validate() {
                r.name = format!("{tag}/{}", r.name);
                out.push(r);
            }
            let prep = match inst.prepare(cfg.precision) {
                Ok(p) => p,
                Err(e) => {
                    out.push(CheckRecord::fail(
                        format!("{tag}/prepare"),
                        "error",
                        "prepared instance",
                        "",
                        e.to_string(),
                    ));
                    continue;
                }
            };
            let prec = cfg.precision;
            let tol = two_pow(8 - prec as i64, prec);

            // M·M^{−1} = I to 2^(8−p)
            let prod = prep.m_matrix.mul(&prep.m_inv);
            let id = CMatrix::identity(inst.n(), prec);
            let mut worst = rug::Float::with_val(prec, 0);
            for i in 0..inst.n() {
                for j in 0..inst.n() {
                    let d = prod.at(i, j).dist(id.at(i, j));
                    if d > worst {
                        worst = d;
                    }
                }
            }
            out.push(CheckRecord::assert(
                format!("{tag}/m-inverse-identity"),
                worst <= tol.clone(),
                format!("max residual {:e}", worst.to_f64()),
                "M·M^{-1} = I",
                "2^(8-p)",
                "inverse residual too large",
            ));

            // all entries of M nonzero
            let nonzero = prep.m_matrix.a.iter().all(|e| !e.abs().is_zero());
            out.push(CheckRecord::assert(
                format!("{tag}/m-entries-nonzero"),
                nonzero,
                "entries of M",
                "all nonzero",
                "exact",
                "a pseudo-basis element embeds to zero",
            ));

            // product of embeddings equals the relative norm, random samples
            let alg = &inst.alg;
            let mut worst_rel = 0f64;
            for _ in 0..16 {
                let x = crate::extension::KElem {
                    coords: (0..inst.n())
                        .map(|_| super::random_of_elem(&mut rng, 4))
                        .collect(),
                };
                if x.is_zero() {
                    continue;
                }
                let mut prod = Complex::one(prec);
                for i in 0..inst.n() {
                    prod = prod.mul(&prep.emb.embed(alg, &x, i).unwrap());
                }
                let want = alg.field.embed(&alg.rel_norm(&x), prec);
                let (ok, rel) = super::rel_close(&prod, &want, &tol);
                worst_rel = worst_rel.max(rel);
                if !ok {
                    break;
                }
            }
            out.push(CheckRecord::assert(
                format!("{tag}/embedding-product-is-norm"),
                worst_rel <= tol.to_f64(),
                format!("max rel residual {worst_rel:e}"),
                "Π_i ρ_i(x) = N_K/F(x)",
                "2^(8-p)",
                "embedding product disagrees with exact norm",
            ));

            // embed respects the multiplication table
            let mut worst_mul = 0f64;
            for _ in 0..16 {
                let x = crate::extension::KElem {
                    coords: (0..inst.n())
                        .map(|_| super::random_of_elem(&mut rng, 3))
                        .collect(),
                };
                let y = crate::extension::KElem {
                    coords: (0..inst.n())
                        .map(|_| super::random_of_elem(&mut rng, 3))
                        .collect(),
                };
                let i = rng.gen_range(0..inst.n());
                let lhs = prep.emb.embed(alg, &alg.mul(&x, &y), i).unwrap();
                let rhs = prep
                    .emb
                    .embed(alg, &x, i)
                    .unwrap()
                    .mul(&prep.emb.embed(alg, &y, i).unwrap());
                let (_, rel) = super::rel_close(&lhs, &rhs, &tol);
                worst_mul = worst_mul.max(rel);
            }
            out.push(CheckRecord::assert(
                format!("{tag}/embedding-is-ring-morphism"),
                worst_mul <= tol.to_f64(),
                format!("max rel residual {worst_mul:e}"),
                "ρ_i(xy) = ρ_i(x)ρ_i(y)",
                "2^(8-p)",
                "embedding does not respect the multiplication table",
            ));
        }
        out
    }
}
