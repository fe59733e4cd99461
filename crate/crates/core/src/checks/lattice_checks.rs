//! Lattice-level checks: the norm-form link Q(x) = N_{K/F}(ξ) and
//! |Q(x)|² = N_{K/Q}((ξ)) on a truncated ball, the exact bijection between
//! coset points and coset elements, and the convergence-domain diagnostics.

use super::{rel_close, CheckSuite, RunConfig};
use crate::eisenstein::{eval_psi_sum, CosetGrid, TruncationParams};
use crate::hecke::coset_of_instance;
use crate::homology::build_cycle;
use crate::num::{two_pow, Complex};
use crate::poly::{norm_form_poly, HomogPoly, NormFormVariant};
use crate::report::CheckRecord;

pub struct NormFormLink;

impl CheckSuite for NormFormLink {
    fn name(&self) -> &'static str {
        "norm-form-link"
    }

    fn description(&self) -> &'static str {
        "Q(x) = N_K/F(ξ) and |Q(x)|² = N_K/Q((ξ)) on all coset points with sup-norm ≤ 20"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let tol = two_pow(-96, prec);
        let mut out = Vec::new();
        for inst in &cfg.instances {
            let prep = match inst.prepare(prec) {
                Ok(p) => p,
                Err(e) => {
                    out.push(CheckRecord::fail(
                        format!("{}/prepare", inst.name),
                        "error",
                        "",
                        "",
                        e.to_string(),
                    ));
                    continue;
                }
            };
            let coset = coset_of_instance(inst);
            let f = &inst.alg.field;
            let grid = match CosetGrid::equal_radius(f, &coset, &prep.m_matrix, 20.0, prec) {
                Ok(g) => g,
                Err(e) => {
                    out.push(CheckRecord::fail(
                        format!("{}/grid", inst.name),
                        "error",
                        "",
                        "",
                        e.to_string(),
                    ));
                    continue;
                }
            };
            let q_poly = norm_form_poly(&prep.m_matrix, NormFormVariant::Q, 1).unwrap();
            let mut count = 0u64;
            let mut worst_q = 0f64;
            let mut worst_n = 0f64;
            let mut worst_omega = 0f64;
            let s_probe = Complex::from_f64(prec, 1.75, 0.5);
            grid.visit(|v, w| {
                let x = grid.exact_x(f, &coset, v);
                if x.iter().all(|c| c.is_zero()) {
                    return;
                }
                count += 1;
                // ξ = Σ x_i m_i, exactly
                let mut xi = inst.alg.zero();
                for (c, mi) in x.iter().zip(&inst.m) {
                    if !c.is_zero() {
                        xi = inst.alg.add(&xi, &inst.alg.scale(c, mi));
                    }
                }
                // route 1: the norm-form polynomial at the embedded point
                let xc: Vec<Complex> = x.iter().map(|c| f.embed(c, prec)).collect();
                let q_val = q_poly.eval(&xc);
                // route 2: the exact relative norm, embedded
                let want = f.embed(&inst.alg.rel_norm(&xi), prec);
                let (_, rel) = rel_close(&q_val, &want, &tol);
                worst_q = worst_q.max(rel);
                // |Q(x)|² against the exact absolute norm
                let q_prod = {
                    let mut p = Complex::one(prec);
                    for wi in w {
                        p = p.mul(wi);
                    }
                    p
                };
                let n_exact = inst.alg.abs_norm(&xi);
                let lhs = q_prod.norm_sqr();
                let rhs = rug::Float::with_val(prec, &n_exact);
                let scale = rhs.clone().max(&rug::Float::with_val(prec, 1));
                let rel_n = ((lhs - &rhs).abs() / scale).to_f64();
                worst_n = worst_n.max(rel_n);
                // Ω_s^k(x, M) = conj(Q)^k/|Q|^{2s} per point
                let om = crate::eisenstein::omega_at_w(w, &s_probe, 2, prec).unwrap();
                let direct = crate::num::conj_pow_over_abs_pow(&q_prod, 2, &s_probe);
                let (_, rel_o) = rel_close(&om, &direct, &tol);
                worst_omega = worst_omega.max(rel_o);
            });
            out.push(CheckRecord::assert(
                format!("{}/q-equals-relative-norm", inst.name),
                worst_q <= tol.to_f64(),
                format!("max rel residual {worst_q:e} over {count} points"),
                "Q(x) = N_K/F(Σ x_i m_i)",
                "2^(-96)",
                "norm form disagrees with the exact relative norm",
            ));
            out.push(CheckRecord::assert(
                format!("{}/q-abs-square-is-ideal-norm", inst.name),
                worst_n <= tol.to_f64(),
                format!("max rel residual {worst_n:e} over {count} points"),
                "|Q(x)|² = N_K/Q((ξ))",
                "2^(-96)",
                "squared norm form disagrees with the exact ideal norm",
            ));
            out.push(CheckRecord::assert(
                format!("{}/omega-via-q", inst.name),
                worst_omega <= tol.to_f64(),
                format!("max rel residual {worst_omega:e} over {count} points"),
                "Ω_s^k(x,M) = conj(Q(x))^k/|Q(x)|^{2s}",
                "2^(-96)",
                "convergence factor disagrees with its norm-form expression",
            ));
        }
        out
    }
}

pub struct CosetBijection;

impl CheckSuite for CosetBijection {
    fn name(&self) -> &'static str {
        "coset-bijection"
    }

    fn description(&self) -> &'static str {
        "x ∈ Λ+u ↔ ξ = Σ x_i m_i ∈ f·b⁻¹+r is an exact bijection on truncated balls"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let mut out = Vec::new();
        for inst in &cfg.instances {
            let prep = match inst.prepare(prec) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let coset = coset_of_instance(inst);
            let f = &inst.alg.field;
            let grid =
                match CosetGrid::equal_radius(f, &coset, &prep.m_matrix, 12.0, prec) {
                    Ok(g) => g,
                    Err(_) => continue,
                };
            let mut count = 0u64;
            let mut member_failures = 0u64;
            let mut roundtrip_failures = 0u64;
            let mut keys = std::collections::HashSet::new();
            let mut dup = 0u64;
            grid.visit(|v, _w| {
                let x = grid.exact_x(f, &coset, v);
                count += 1;
                let mut xi = inst.alg.zero();
                for (c, mi) in x.iter().zip(&inst.m) {
                    if !c.is_zero() {
                        xi = inst.alg.add(&xi, &inst.alg.scale(c, mi));
                    }
                }
                if !inst.coset_contains(&xi) {
                    member_failures += 1;
                }
                // the m-coordinates of ξ − r must reproduce x − u exactly
                let diff = inst.alg.sub(&xi, &inst.r);
                match inst.coords_in_m_basis(&diff) {
                    Some(coords) => {
                        let ok = coords
                            .iter()
                            .zip(&x)
                            .zip(&inst.u)
                            .all(|((c, xi_c), ui)| *c == f.sub(xi_c, ui));
                        if !ok {
                            roundtrip_failures += 1;
                        }
                    }
                    None => roundtrip_failures += 1,
                }
                if !keys.insert(format!("{xi:?}")) {
                    dup += 1;
                }
            });
            out.push(CheckRecord::assert(
                format!("{}/membership", inst.name),
                member_failures == 0,
                format!("{member_failures} failures over {count} points"),
                "every enumerated ξ lies in f·b⁻¹ + r (exact)",
                "exact",
                "a coset point maps outside the coset",
            ));
            out.push(CheckRecord::assert(
                format!("{}/injective-roundtrip", inst.name),
                roundtrip_failures == 0 && dup == 0,
                format!("{roundtrip_failures} round-trip failures, {dup} duplicates"),
                "coordinates round-trip exactly and ξ values are distinct",
                "exact",
                "the coset correspondence is not a bijection",
            ));
        }
        out
    }
}

pub struct ConvergenceDomain;

impl CheckSuite for ConvergenceDomain {
    fn name(&self) -> &'static str {
        "convergence-domain"
    }

    fn description(&self) -> &'static str {
        "shell sums decay inside Re(s) > 1 + k/2 and the nonconvergence flag raises outside"
    }

    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord> {
        let prec = cfg.precision;
        let mut out = Vec::new();
        for inst in &cfg.instances {
            let prep = match inst.prepare(prec) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let coset = coset_of_instance(inst);
            let f = &inst.alg.field;
            let chain = match build_cycle(inst, &prep, &inst.units) {
                Ok(c) => c,
                Err(e) => {
                    out.push(CheckRecord::fail(
                        format!("{}/cycle", inst.name),
                        "error",
                        "",
                        "",
                        e.to_string(),
                    ));
                    continue;
                }
            };
            let tuple = &chain.terms[0].1;
            let poly = HomogPoly::one(inst.n(), prec);
            let t = TruncationParams::new(16.0, prec);
            // inside the half-plane: s = 1.6, k = 0
            let s_in = Complex::from_f64(prec, 1.6, 0.0);
            let v_in = eval_psi_sum(f, &coset, &prep.m_matrix, tuple, &poly, &s_in, 0, &t);
            match v_in {
                Ok(v) => {
                    out.push(CheckRecord::assert(
                        format!("{}/decay-inside", inst.name),
                        v.converged && !v.domain_warning,
                        format!(
                            "decay exponent {:.3}, tail {:e}",
                            v.decay_exponent, v.tail_estimate
                        ),
                        "shell sums decay at s = 1.6, k = 0",
                        "slope < -1.05",
                        "no decay inside the absolute-convergence half-plane",
                    ));
                }
                Err(e) => out.push(CheckRecord::fail(
                    format!("{}/decay-inside", inst.name),
                    "error",
                    "",
                    "",
                    e.to_string(),
                )),
            }
            // outside: s = 0.4 must raise the flag
            let s_out = Complex::from_f64(prec, 0.4, 0.0);
            let v_out = eval_psi_sum(f, &coset, &prep.m_matrix, tuple, &poly, &s_out, 0, &t);
            match v_out {
                Ok(v) => {
                    out.push(CheckRecord::assert(
                        format!("{}/flag-outside", inst.name),
                        !v.converged && v.domain_warning,
                        format!(
                            "decay exponent {:.3}, warning {}",
                            v.decay_exponent, v.domain_warning
                        ),
                        "nonconvergence flag at s = 0.4",
                        "slope >= -1.05",
                        "missing nonconvergence flag outside the half-plane",
                    ));
                }
                Err(e) => out.push(CheckRecord::fail(
                    format!("{}/flag-outside", inst.name),
                    "error",
                    "",
                    "",
                    e.to_string(),
                )),
            }
        }
        out
    }
}
