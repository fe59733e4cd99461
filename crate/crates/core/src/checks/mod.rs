//! Named verification suites behind a common registry.
//!
//! Each suite implements [`CheckSuite`] and is registered by name; the CLI
//! selects suites at runtime and `run-all` walks the whole registry. Suites
//! are deterministic given (config, seed, precision).

use crate::field::{FElem, QuadField};
use crate::instance::FieldInstance;
use crate::report::{CheckRecord, Report};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;

mod assembly;
mod cocycle_checks;
mod factor_checks;
mod field_checks;
mod lattice_checks;
mod parametrization;
mod poly_checks;

pub use parametrization::{parametrization_data, ParametrizationData};

/// Everything a suite needs to run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub instances: Vec<FieldInstance>,
    /// s values as (re, im) pairs.
    pub s_grid: Vec<(f64, f64)>,
    pub radius_grid: Vec<f64>,
    pub bound_grid: Vec<u64>,
    pub precision: u32,
    pub seed: u64,
    pub trials: usize,
    pub k: i64,
    pub l: u32,
}

impl RunConfig {
    /// The configuration exercised by the acceptance suite: the worked
    /// instance at 128 bits with the verified character (k, l) = (0, 4),
    /// s ∈ {2.5, 3, 3+2i}, R-grid {10, 20, 40} and matched B-grid
    /// {100, 1000, 10000}.
    pub fn acceptance(instances: Vec<FieldInstance>, seed: u64) -> Self {
        RunConfig {
            instances,
            s_grid: vec![(2.5, 0.0), (3.0, 0.0), (3.0, 2.0)],
            radius_grid: vec![10.0, 20.0, 40.0],
            bound_grid: vec![100, 1000, 10000],
            precision: 128,
            seed,
            trials: 1000,
            k: 0,
            l: 4,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.precision < 64 {
            return Err("precision must be at least 64 bits".into());
        }
        if self.s_grid.is_empty() || self.radius_grid.is_empty() || self.bound_grid.is_empty() {
            return Err("grids must be nonempty".into());
        }
        Ok(())
    }
}

pub trait CheckSuite {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &RunConfig) -> Vec<CheckRecord>;
}

/// The ordered registry of every suite.
pub fn registry() -> Vec<Box<dyn CheckSuite>> {
    vec![
        Box::new(field_checks::FieldValidation),
        Box::new(poly_checks::PolyProperties),
        Box::new(cocycle_checks::CocycleRelations),
        Box::new(cocycle_checks::DifferentiationOracle),
        Box::new(factor_checks::HomogeneityFactor),
        Box::new(lattice_checks::NormFormLink),
        Box::new(lattice_checks::CosetBijection),
        Box::new(lattice_checks::ConvergenceDomain),
        Box::new(parametrization::Parametrization),
        Box::new(parametrization::UnitSumPartial),
        Box::new(assembly::Assembly),
    ]
}

pub fn suite_by_name(name: &str) -> Option<Box<dyn CheckSuite>> {
    registry().into_iter().find(|s| s.name() == name)
}

/// Run the named suites (or all of them) and assemble a report.
/// An empty instance list yields a `nothing-run` report, matching the
/// harness contract.
pub fn run_suites(names: Option<&[String]>, cfg: &RunConfig) -> Report {
    if cfg.instances.is_empty() {
        return Report::new(cfg.precision, cfg.seed, Vec::new());
    }
    let suites = registry();
    let selected: Vec<&Box<dyn CheckSuite>> = match names {
        None => suites.iter().collect(),
        Some(ns) => suites
            .iter()
            .filter(|s| ns.iter().any(|n| n == s.name()))
            .collect(),
    };
    let mut checks = Vec::new();
    for s in selected {
        let mut recs = s.run(cfg);
        for r in &mut recs {
            r.name = format!("{}/{}", s.name(), r.name);
        }
        checks.extend(recs);
    }
    Report::new(cfg.precision, cfg.seed, checks)
}

// ---------------------------------------------------------------------------
// Seeded random generators shared by the randomized suites
// ---------------------------------------------------------------------------

pub(crate) fn rng_for(cfg: &RunConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt)
}

/// Random element of O_F with integer parts in [−h, h].
pub(crate) fn random_of_elem(rng: &mut ChaCha8Rng, h: i64) -> FElem {
    let a = rng.gen_range(-h..=h);
    let b = rng.gen_range(-h..=h);
    FElem::new(Rational::from(a), Rational::from(b))
}

/// Random element of GL_n(O_F) with entry height ≤ h and certified nonzero
/// exact determinant.
pub(crate) fn random_gln(
    rng: &mut ChaCha8Rng,
    f: &QuadField,
    n: usize,
    h: i64,
    prec: u32,
) -> crate::cocycle::FMatrix {
    use crate::extension::FMat;
    loop {
        let a: Vec<FElem> = (0..n * n).map(|_| random_of_elem(rng, h)).collect();
        let m = FMat { n, a };
        if !m.det(f).is_zero() {
            return crate::cocycle::FMatrix::new(f, m, prec);
        }
    }
}

/// Random nonzero exact row vector with rational coordinates of height ≤ h.
pub(crate) fn random_x(rng: &mut ChaCha8Rng, n: usize, h: i64) -> Vec<FElem> {
    loop {
        let x: Vec<FElem> = (0..n)
            .map(|_| {
                let num_a = rng.gen_range(-h..=h);
                let den_a = rng.gen_range(1..=h);
                let num_b = rng.gen_range(-h..=h);
                let den_b = rng.gen_range(1..=h);
                FElem::new(
                    Rational::from((num_a, den_a)),
                    Rational::from((num_b, den_b)),
                )
            })
            .collect();
        if !x.iter().all(|c| c.is_zero()) {
            return x;
        }
    }
}

/// Random homogeneous polynomial of degree ≤ max_deg with small Gaussian
/// integer coefficients; degree 0 (a constant) is allowed.
pub(crate) fn random_poly(
    rng: &mut ChaCha8Rng,
    n_vars: usize,
    max_deg: u32,
    prec: u32,
) -> crate::poly::HomogPoly {
    use crate::num::Complex;
    use crate::poly::HomogPoly;
    let deg = rng.gen_range(0..=max_deg);
    let mut p = HomogPoly {
        n_vars,
        degree: deg,
        coeffs: Default::default(),
    };
    for idx in multi_indices(n_vars, deg) {
        let re = rng.gen_range(-3i64..=3);
        let im = rng.gen_range(-3i64..=3);
        if re == 0 && im == 0 {
            continue;
        }
        p.coeffs
            .insert(idx, Complex::from_f64(prec, re as f64, im as f64));
    }
    if p.coeffs.is_empty() {
        let idx: Vec<u32> = std::iter::once(deg)
            .chain(std::iter::repeat(0).take(n_vars - 1))
            .collect();
        p.coeffs.insert(idx, Complex::one(prec));
    }
    p
}

/// All multi-indices of n nonnegative parts summing to deg, lexicographic.
pub(crate) fn multi_indices(n: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, deg: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            let mut v = cur.clone();
            v.push(deg);
            out.push(v);
            return;
        }
        for d in 0..=deg {
            cur.push(d);
            rec(n - 1, deg - d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, deg, &mut Vec::new(), &mut out);
    out
}

/// Scale-aware residual comparison: |lhs − rhs| ≤ tol·max(|lhs|, |rhs|, 1).
pub(crate) fn rel_close(
    lhs: &crate::num::Complex,
    rhs: &crate::num::Complex,
    tol: &rug::Float,
) -> (bool, f64) {
    let scale = lhs
        .abs()
        .max(&rhs.abs())
        .max(&rug::Float::with_val(lhs.prec(), 1));
    let d = lhs.dist(rhs);
    let rel = (d.clone() / &scale).to_f64();
    (d <= tol.clone() * scale, rel)
}
