//! Direct evaluation of the unit character λ, partial Hecke L-functions over
//! coset representatives modulo the unit group V, the assembled L(s, χ), and
//! the rank-2 elliptic sums E_k^l.
//!
//! partial_L enumerates exact elements ξ ∈ f·b⁻¹ + r with |N_{K/Q}(ξ)| ≤ B
//! inside a box whose per-embedding radii are derived from B and the unit
//! logs, so that every V-orbit has its fundamental-domain representative
//! inside the box. Orbits are deduplicated by an exact canonical
//! representative; λ is constant on orbits because λ(V) = 1 is validated.

use crate::eisenstein::{CosetGrid, EisError, LatticeCoset};
use crate::extension::KElem;
use crate::field::{FElem, QuadField};
use crate::instance::{FieldInstance, PreparedInstance};
use crate::num::{rational_pow_neg_s, BlockSum, Complex};
use rug::{Float, Rational};
use std::collections::HashSet;
use std::fmt;

#[derive(Debug)]
pub enum HeckeError {
    ZeroInput,
    /// (k, l, f) is inconsistent: λ is not trivial on a configured generator
    /// of U_f. Carries the witness.
    InvalidCharacter(String),
    /// The enumeration box provably misses candidates at the requested bound.
    BoxIncomplete(String),
    Embed(crate::embeddings::EmbedError),
    Eis(EisError),
    Instance(crate::instance::InstanceError),
    Validation(String),
}

impl fmt::Display for HeckeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeError::ZeroInput => write!(f, "zero input"),
            HeckeError::InvalidCharacter(w) => write!(f, "inconsistent character: {w}"),
            HeckeError::BoxIncomplete(w) => write!(f, "enumeration box incomplete: {w}"),
            HeckeError::Embed(e) => write!(f, "embedding: {e}"),
            HeckeError::Eis(e) => write!(f, "enumeration: {e}"),
            HeckeError::Instance(e) => write!(f, "instance: {e}"),
            HeckeError::Validation(w) => write!(f, "validation: {w}"),
        }
    }
}

impl std::error::Error for HeckeError {}

impl From<crate::embeddings::EmbedError> for HeckeError {
    fn from(e: crate::embeddings::EmbedError) -> Self {
        HeckeError::Embed(e)
    }
}

impl From<EisError> for HeckeError {
    fn from(e: EisError) -> Self {
        HeckeError::Eis(e)
    }
}

/// Exact power of an element of F.
fn f_pow(f: &QuadField, x: &FElem, e: u32) -> FElem {
    let mut acc = FElem::one();
    for _ in 0..e {
        acc = f.mul(&acc, x);
    }
    acc
}

/// Character parameters (k, l) with the residue character and conductor
/// coming from the instance. Construction validates λ(ε) = 1 exactly on
/// every configured generator of U_f: the V-generators, the torsion
/// generator, and the norm-(−1) fundamental unit when configured.
#[derive(Clone, Debug)]
pub struct HeckeCharData {
    pub k: i64,
    pub l: u32,
}

impl HeckeCharData {
    pub fn new(inst: &FieldInstance, k: i64, l: u32) -> Result<Self, HeckeError> {
        if k < 0 {
            return Err(HeckeError::Validation("k must be >= 0".into()));
        }
        if l == 0 {
            return Err(HeckeError::Validation("l must be > 0".into()));
        }
        let f = &inst.alg.field;
        let mut gens: Vec<(&'static str, KElem)> = Vec::new();
        for u in &inst.units {
            gens.push(("V-generator", u.clone()));
        }
        gens.push(("torsion generator", inst.torsion.generator.clone()));
        if let Some(fu) = &inst.fundamental_unit {
            gens.push(("fundamental unit", fu.element.clone()));
        }
        for (what, g) in gens {
            let nu = inst.alg.rel_norm(&g);
            // λ(g) = conj(ν)^k·ν^{−l} = 1 ⟺ conj(ν)^k = ν^l, exactly in F
            let lhs = f_pow(f, &f.conj(&nu), k as u32);
            let rhs = f_pow(f, &nu, l);
            if lhs != rhs {
                return Err(HeckeError::InvalidCharacter(format!(
                    "lambda({what}) != 1 for (k, l) = ({k}, {l}): N_K/F = {nu}, \
                     conj(N)^k = {lhs}, N^l = {rhs}"
                )));
            }
        }
        Ok(HeckeCharData { k, l })
    }
}

/// λ(a) = conj(N_{K/F}(a))^k · N_{K/F}(a)^{−l}, through the fixed embedding.
pub fn lambda_char(
    inst: &FieldInstance,
    a: &KElem,
    k: i64,
    l: u32,
    prec: u32,
) -> Result<Complex, HeckeError> {
    if a.is_zero() {
        return Err(HeckeError::ZeroInput);
    }
    let nu = inst.alg.rel_norm(a);
    let nu_c = inst.alg.field.embed(&nu, prec);
    Ok(nu_c.conj().powi(k).mul(&nu_c.powi(-(l as i64))))
}

/// Canonical V-orbit representatives via the log embedding.
pub struct UnitReducer {
    units: Vec<KElem>,
    /// ℓ_i(ε_j) = ln|ρ_i(ε_j)|², all n rows.
    unit_logs: Vec<Vec<Float>>,
    /// f64 inverse of the projected (n−1)×(n−1) log matrix.
    proj_inv: Vec<Vec<f64>>,
    n: usize,
}

impl UnitReducer {
    pub fn new(inst: &FieldInstance, prep: &PreparedInstance) -> Result<Self, HeckeError> {
        let n = inst.n();
        let units = inst.units.clone();
        let mut unit_logs = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(units.len());
            for eps in &units {
                let v = prep.emb.embed(&inst.alg, eps, i)?;
                row.push(v.norm_sqr().ln());
            }
            unit_logs.push(row);
        }
        // projected matrix: rows i < n−1 of ℓ (unit logs already sum to zero
        // over i because the units have norm one)
        let m: Vec<Vec<f64>> = (0..n - 1)
            .map(|i| unit_logs[i].iter().map(|v| v.to_f64()).collect())
            .collect();
        let proj_inv = crate::eisenstein::invert_f64_pub(&m).ok_or_else(|| {
            HeckeError::Validation("unit log matrix is singular: generators dependent".into())
        })?;
        Ok(UnitReducer {
            units,
            unit_logs,
            proj_inv,
            n,
        })
    }

    /// ℓ_i(ξ) = ln|ρ_i(ξ)|² for all i.
    pub fn log_vector(
        &self,
        inst: &FieldInstance,
        prep: &PreparedInstance,
        xi: &KElem,
    ) -> Result<Vec<Float>, HeckeError> {
        (0..self.n)
            .map(|i| {
                let v = prep.emb.embed(&inst.alg, xi, i)?;
                Ok(v.norm_sqr().ln())
            })
            .collect()
    }

    /// Regulator-lattice coordinates of ξ (the c_j in ℓ̃(ξ) = Σ c_j ℓ̃(ε_j)).
    pub fn coords(
        &self,
        inst: &FieldInstance,
        prep: &PreparedInstance,
        xi: &KElem,
    ) -> Result<Vec<f64>, HeckeError> {
        let lv = self.log_vector(inst, prep, xi)?;
        let total: f64 = lv.iter().map(|v| v.to_f64()).sum();
        let avg = total / self.n as f64;
        let proj: Vec<f64> = (0..self.n - 1).map(|i| lv[i].to_f64() - avg).collect();
        Ok((0..self.n - 1)
            .map(|j| {
                (0..self.n - 1)
                    .map(|i| self.proj_inv[j][i] * proj[i])
                    .sum::<f64>()
            })
            .collect())
    }

    /// The representative ξ·η, η ∈ V, whose log coordinates lie in [0, 1)^{n−1}.
    /// Idempotent and constant on orbits up to the floating floor at exact
    /// integer coordinates; orbit deduplication additionally checks unit
    /// neighbors so borderline floors cannot split an orbit.
    pub fn reduce(
        &self,
        inst: &FieldInstance,
        prep: &PreparedInstance,
        xi: &KElem,
    ) -> Result<KElem, HeckeError> {
        let c = self.coords(inst, prep, xi)?;
        let mut out = xi.clone();
        for (j, cj) in c.iter().enumerate() {
            let fl = cj.floor() as i64;
            if fl != 0 {
                let p = inst
                    .alg
                    .pow(&self.units[j], -fl)
                    .map_err(|e| HeckeError::Validation(format!("unit power: {e}")))?;
                out = inst.alg.mul(&out, &p);
            }
        }
        Ok(out)
    }

    /// Per-embedding balanced-box radii covering every orbit representative
    /// with |N_{K/Q}| ≤ bound.
    pub fn balanced_radii(&self, bound: u64) -> Vec<f64> {
        let ln_b = (bound as f64).ln();
        (0..self.n)
            .map(|i| {
                let spread: f64 = self
                    .unit_logs[i]
                    .iter()
                    .map(|l| l.to_f64().max(0.0))
                    .sum();
                ((ln_b / (2.0 * self.n as f64)) + spread / 2.0).exp() * (1.0 + 1e-9)
            })
            .collect()
    }
}

fn kelem_key(x: &KElem) -> String {
    let mut s = String::new();
    for c in &x.coords {
        s.push_str(&format!("{}/{};", c.a, c.b));
    }
    s
}

/// Result of a truncated L sum.
#[derive(Clone, Debug)]
pub struct LValue {
    pub value: Complex,
    /// Norm bound B actually used.
    pub bound: u64,
    /// Number of orbit representatives summed.
    pub terms: u64,
    pub tail_estimate: f64,
    /// Re(s) ≤ 1 + (k−l)/2: outside absolute convergence.
    pub domain_warning: bool,
}

/// The coset f·b⁻¹ + r as a lattice coset in F^n via the pseudo-basis.
pub fn coset_of_instance(inst: &FieldInstance) -> LatticeCoset {
    LatticeCoset {
        lattices: inst.lambda.clone(),
        offset: inst.u.clone(),
    }
}

/// Partial Hecke L-function: the V-orbit sum over exact coset elements ξ
/// with |N_{K/Q}(ξ)| ≤ B of λ(ξ)·N_{K/Q}((ξ))^{−s}, times [U_f:V]^{−1}.
pub fn partial_l(
    inst: &FieldInstance,
    prep: &PreparedInstance,
    chi: &HeckeCharData,
    s: &Complex,
    bound: u64,
) -> Result<LValue, HeckeError> {
    let alg = &inst.alg;
    let f = &alg.field;
    let prec = prep.prec;
    let reducer = UnitReducer::new(inst, prep)?;
    let radii = reducer.balanced_radii(bound);
    let coset = coset_of_instance(inst);
    let grid = CosetGrid::new(f, &coset, &prep.m_matrix, &radii, prec)?;

    // collect orbit representatives
    let mut seen: HashSet<String> = HashSet::new();
    let mut reps: Vec<(KElem, Rational)> = Vec::new();
    let mut defect: Option<HeckeError> = None;
    let b_rat = Rational::from(bound);
    grid.visit(|v, _w| {
        if defect.is_some() {
            return;
        }
        let x = grid.exact_x(f, &coset, v);
        // ξ = Σ x_i m_i
        let mut xi = alg.zero();
        for (c, mi) in x.iter().zip(&inst.m) {
            if !c.is_zero() {
                xi = alg.add(&xi, &alg.scale(c, mi));
            }
        }
        if xi.is_zero() {
            return;
        }
        let norm = alg.abs_norm(&xi);
        if norm > b_rat {
            return;
        }
        if !inst.conductor.is_prime_to_f(alg, &xi) {
            return;
        }
        match reducer.reduce(inst, prep, &xi) {
            Ok(red) => {
                let key = kelem_key(&red);
                if seen.contains(&key) {
                    return;
                }
                // borderline floors: check unit neighbors before inserting
                let mut dup = false;
                'nb: for delta in neighbor_offsets(inst.n() - 1) {
                    if delta.iter().all(|&d| d == 0) {
                        continue;
                    }
                    let mut v = red.clone();
                    for (j, dj) in delta.iter().enumerate() {
                        if *dj != 0 {
                            let p = alg.pow(&reducer.units[j], *dj).unwrap();
                            v = alg.mul(&v, &p);
                        }
                    }
                    if seen.contains(&kelem_key(&v)) {
                        dup = true;
                        break 'nb;
                    }
                }
                if dup {
                    return;
                }
                seen.insert(key);
                reps.push((red, norm));
            }
            Err(e) => defect = Some(e),
        }
    });
    if let Some(e) = defect {
        return Err(e);
    }

    // completeness: every representative must sit inside the balanced box
    for (rep, _) in &reps {
        for (i, r) in radii.iter().enumerate() {
            let v = prep.emb.embed(alg, rep, i)?;
            if v.abs().to_f64() > r * (1.0 + 1e-6) {
                return Err(HeckeError::BoxIncomplete(format!(
                    "representative {:?} exceeds radius {r} in embedding {}",
                    rep,
                    i + 1
                )));
            }
        }
    }

    // deterministic order: sort reps by (norm, coordinate key)
    reps.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| kelem_key(&a.0).cmp(&kelem_key(&b.0))));

    let mut sum = BlockSum::new(prec);
    let mut last_octave = 0.0f64;
    let half_b = Rational::from(bound) / Rational::from(2);
    for (rep, norm) in &reps {
        let lam = lambda_char(inst, rep, chi.k, chi.l, prec)?;
        let term = lam.mul(&rational_pow_neg_s(norm, s, prec));
        if *norm > half_b {
            last_octave += term.abs().to_f64();
        }
        sum.push(&term);
    }
    let total = sum.finish();
    let index_inv = Float::with_val(prec, inst.unit_index).recip();
    let value = total.mul_float(&index_inv);

    let sigma_eff = s.re.to_f64() + (chi.l as f64 - chi.k as f64) / 2.0 - 1.0;
    let domain_warning = sigma_eff <= 0.0;
    let tail_estimate = if sigma_eff > 0.0 {
        let q = 2f64.powf(-sigma_eff);
        last_octave / inst.unit_index as f64 * q / (1.0 - q)
    } else {
        f64::INFINITY
    };
    Ok(LValue {
        value,
        bound,
        terms: reps.len() as u64,
        tail_estimate,
        domain_warning,
    })
}

fn neighbor_offsets(rank: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        let mut next = Vec::new();
        for base in &out {
            for d in [-1i64, 0, 1] {
                let mut v = base.clone();
                v.push(d);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// One ideal class entry for the assembled L-function.
#[derive(Clone, Debug)]
pub struct AssemblyClass {
    pub instance: FieldInstance,
    /// χ(b) as an exact complex rational pair.
    pub chi_b: (Rational, Rational),
    /// N_{K/Q}(b).
    pub norm_b: u64,
    /// Residue representatives (r, φ(r) in turns).
    pub residues: Vec<(KElem, Rational)>,
}

/// L(s, χ) = Σ_b χ(b)·N(b)^{−s} Σ_r φ(r)·L(b, r, s).
pub fn full_l(
    classes: &[AssemblyClass],
    k: i64,
    l: u32,
    s: &Complex,
    bound: u64,
    prec: u32,
) -> Result<LValue, HeckeError> {
    let mut acc = Complex::zero(prec);
    let mut terms = 0u64;
    let mut tail = 0.0f64;
    let mut warn = false;
    for class in classes {
        let chi = HeckeCharData::new(&class.instance, k, l)?;
        let chi_b = Complex::from_rationals(prec, &class.chi_b.0, &class.chi_b.1);
        let nb = rational_pow_neg_s(&Rational::from(class.norm_b), s, prec);
        let outer = chi_b.mul(&nb);
        for (r, phi_turns) in &class.residues {
            let inst_r = class
                .instance
                .with_offset(r)
                .map_err(HeckeError::Instance)?;
            let prep = inst_r.prepare(prec).map_err(HeckeError::Instance)?;
            let lv = partial_l(&inst_r, &prep, &chi, s, bound)?;
            let phi = crate::instance::turns_to_complex(phi_turns, prec);
            acc.add_assign(&outer.mul(&phi).mul(&lv.value));
            terms += lv.terms;
            tail += lv.tail_estimate * outer.abs().to_f64();
            warn |= lv.domain_warning;
        }
    }
    Ok(LValue {
        value: acc,
        bound,
        terms,
        tail_estimate: tail,
        domain_warning: warn,
    })
}

/// E_k^l(u, Λ, s) = Σ'_{w ∈ Λ+u, 0 < |w| ≤ R} conj(w)^k / (w^l·|w|^{2s}).
pub fn eval_ekl(
    u: &Complex,
    lattice: &[Complex; 2],
    k: i64,
    l: i64,
    s: &Complex,
    radius: f64,
    prec: u32,
) -> Result<(Complex, u64, f64), HeckeError> {
    if l < 1 {
        return Err(HeckeError::Validation("l must be >= 1".into()));
    }
    // integer bounds from the inverse of the real 2×2 lattice matrix
    let t = vec![
        vec![lattice[0].re.to_f64(), lattice[1].re.to_f64()],
        vec![lattice[0].im.to_f64(), lattice[1].im.to_f64()],
    ];
    let tinv = crate::eisenstein::invert_f64_pub(&t)
        .ok_or_else(|| HeckeError::Validation("lattice basis degenerate".into()))?;
    let mut bounds = [0i64; 2];
    for j in 0..2 {
        let b: f64 = (0..2)
            .map(|row| tinv[j][row].abs() * (radius + if row == 0 { u.re.to_f64().abs() } else { u.im.to_f64().abs() }))
            .sum();
        bounds[j] = (b * (1.0 + 1e-9) + 1.0).ceil() as i64;
    }
    let r_sq = {
        let rf = Float::with_val(prec, radius);
        rf.square()
    };
    let mut sum = BlockSum::new(prec);
    let mut terms = 0u64;
    let mut last_shell = 0.0f64;
    let r_half_sq = radius * radius * 0.25;
    for a in -bounds[0]..=bounds[0] {
        let pa = u.add(&lattice[0].mul_float(&Float::with_val(prec, a)));
        for b in -bounds[1]..=bounds[1] {
            let w = pa.add(&lattice[1].mul_float(&Float::with_val(prec, b)));
            if w.is_zero() {
                continue;
            }
            let n2 = w.norm_sqr();
            if n2 > r_sq {
                continue;
            }
            let ln = Float::with_val(prec, n2.ln_ref());
            let e = Complex {
                re: -Float::with_val(prec, &s.re * &ln),
                im: -Float::with_val(prec, &s.im * &ln),
            };
            let term = w
                .conj()
                .powi(k)
                .mul(&w.powi(-l))
                .mul(&e.exp());
            if n2.to_f64() > r_half_sq {
                last_shell += term.abs().to_f64();
            }
            sum.push(&term);
            terms += 1;
        }
    }
    // crude geometric tail from the outer annulus
    let sigma = 2.0 * s.re.to_f64() + l as f64 - k as f64 - 2.0;
    let tail = if sigma > 0.0 {
        let q = 2f64.powf(-sigma / 2.0);
        last_shell * q / (1.0 - q)
    } else {
        f64::INFINITY
    };
    Ok((sum.finish(), terms, tail))
}

impl FieldInstance {
    /// Same instance with a different coset representative r (u recomputed).
    pub fn with_offset(&self, r: &KElem) -> Result<Self, crate::instance::InstanceError> {
        let coords = self.coords_in_m_basis(r).ok_or_else(|| {
            crate::instance::InstanceError::Field("pseudo-basis is singular".into())
        })?;
        let mut out = self.clone();
        out.r = r.clone();
        out.u = coords;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::two_pow;

    const P: u32 = 128;

    fn worked() -> (FieldInstance, PreparedInstance) {
        let inst =
            FieldInstance::from_toml_str(include_str!("../../../instances/qi-sqrt2.toml"))
                .unwrap();
        let prep = inst.prepare(P).unwrap();
        (inst, prep)
    }

    #[test]
    fn lambda_examples() {
        let (inst, _) = worked();
        let alg = &inst.alg;
        // a = 1 → 1
        let one = lambda_char(&inst, &alg.one(), 0, 2, P).unwrap();
        assert!(one.dist(&Complex::one(P)) < two_pow(-100, P));
        // a = ε (relative norm 1) → 1 for any (k, l)
        let eps = lambda_char(&inst, &inst.units[0], 3, 5, P).unwrap();
        assert!(eps.dist(&Complex::one(P)) < two_pow(-95, P));
        // a = √2 (ν = −2), k = 0, l = 2 → 1/4
        let sqrt2 = alg.basis_elem(1);
        let v = lambda_char(&inst, &sqrt2, 0, 2, P).unwrap();
        assert!(v.dist(&Complex::from_f64(P, 0.25, 0.0)) < two_pow(-100, P));
        assert!(matches!(
            lambda_char(&inst, &alg.zero(), 0, 2, P),
            Err(HeckeError::ZeroInput)
        ));
    }

    #[test]
    fn character_validation_accepts_and_rejects() {
        let (inst, _) = worked();
        // λ(ζ_8) = i^(k+l): needs 4 | k+l on this instance
        assert!(HeckeCharData::new(&inst, 0, 4).is_ok());
        assert!(HeckeCharData::new(&inst, 2, 2).is_ok());
        assert!(HeckeCharData::new(&inst, 1, 3).is_ok());
        let err = HeckeCharData::new(&inst, 0, 2).unwrap_err();
        match err {
            HeckeError::InvalidCharacter(w) => {
                assert!(w.contains("torsion"), "witness: {w}");
            }
            other => panic!("wrong error: {other:?}"),
        }
        assert!(HeckeCharData::new(&inst, 1, 1).is_err());
    }

    #[test]
    fn reduce_mod_units_examples() {
        let (inst, prep) = worked();
        let alg = &inst.alg;
        let reducer = UnitReducer::new(&inst, &prep).unwrap();
        // ξ = 2·ε³ reduces to 2 (the log coordinate of 2 is 0)
        let eps3 = alg.pow(&inst.units[0], 3).unwrap();
        let two = alg.from_f(&FElem::from_i64(2));
        let xi = alg.mul(&two, &eps3);
        let red = reducer.reduce(&inst, &prep, &xi).unwrap();
        assert_eq!(red, two);
        // idempotent
        let red2 = reducer.reduce(&inst, &prep, &red).unwrap();
        assert_eq!(red2, red);
        // orbit constancy
        let shifted = alg.mul(&xi, &inst.units[0]);
        let red3 = reducer.reduce(&inst, &prep, &shifted).unwrap();
        assert_eq!(red3, red);
    }

    #[test]
    fn lambda_is_invariant_on_unit_orbits() {
        let (inst, _) = worked();
        let alg = &inst.alg;
        let xi = alg.add(&alg.one(), &alg.basis_elem(1)); // 1 + √2-elem of K
        let orbit = alg.mul(&xi, &inst.units[0]);
        let a = lambda_char(&inst, &xi, 2, 6, P).unwrap();
        let b = lambda_char(&inst, &orbit, 2, 6, P).unwrap();
        assert!(a.dist(&b) < two_pow(-90, P));
    }

    #[test]
    fn partial_l_zero_below_minimal_norm() {
        let (inst, prep) = worked();
        let chi = HeckeCharData::new(&inst, 0, 4).unwrap();
        let s = Complex::from_f64(P, 3.0, 0.0);
        // the minimal norm in O_K \ {0} is 1; there is no bound below it
        // other than B = 0
        let lv = partial_l(&inst, &prep, &chi, &s, 0).unwrap();
        assert_eq!(lv.terms, 0);
        assert!(lv.value.is_zero());
    }

    #[test]
    fn partial_l_matches_brute_force_box_oracle() {
        // Independent enumeration over the integral basis
        // (1, i, ζ_8, iζ_8) of O_K with naive orbit deduplication.
        let (inst, prep) = worked();
        let alg = &inst.alg;
        let chi = HeckeCharData::new(&inst, 0, 4).unwrap();
        let s = Complex::from_f64(P, 3.0, 0.0);
        let bound = 60u64;
        let lv = partial_l(&inst, &prep, &chi, &s, bound).unwrap();

        // oracle: elements a + bi + (c + di)ζ_8, dedup by V-orbit scan
        let zeta = inst.torsion.generator.clone();
        let eps = inst.units[0].clone();
        let reducer = UnitReducer::new(&inst, &prep).unwrap();
        let mut seen: HashSet<String> = HashSet::new();
        let mut oracle = Complex::zero(P);
        let mut count = 0u64;
        let box_r = 5i64; // covers all balanced representatives of norm ≤ 60
        for a in -box_r..=box_r {
            for b in -box_r..=box_r {
                for c in -box_r..=box_r {
                    for d in -box_r..=box_r {
                        let ab = alg.from_f(&FElem::new(
                            Rational::from(a),
                            Rational::from(b),
                        ));
                        let cd = alg.from_f(&FElem::new(
                            Rational::from(c),
                            Rational::from(d),
                        ));
                        let xi = alg.add(&ab, &alg.mul(&cd, &zeta));
                        if xi.is_zero() {
                            continue;
                        }
                        let n = alg.abs_norm(&xi);
                        if n > bound {
                            continue;
                        }
                        // naive dedup: scan ε-powers for a previously seen
                        // orbit member
                        let mut dup = false;
                        for j in -6i64..=6 {
                            let t = alg.mul(&xi, &alg.pow(&eps, j).unwrap());
                            if seen.contains(&kelem_key(&t)) {
                                dup = true;
                                break;
                            }
                        }
                        if dup {
                            continue;
                        }
                        seen.insert(kelem_key(&xi));
                        count += 1;
                        let lam = lambda_char(&inst, &xi, 0, 4, P).unwrap();
                        oracle.add_assign(&lam.mul(&rational_pow_neg_s(&n, &s, P)));
                        let _ = &reducer;
                    }
                }
            }
        }
        let oracle = oracle.mul_float(&Float::with_val(P, 16u32).recip());
        assert_eq!(lv.terms, count, "orbit counts differ");
        let scale = oracle.abs().max(&Float::with_val(P, 1));
        assert!(
            lv.value.dist(&oracle) < two_pow(16 - P as i64, P) * scale,
            "partial_l = {:?}, oracle = {:?}",
            lv.value,
            oracle
        );
    }

    #[test]
    fn partial_l_invariant_under_fundamental_domain_change() {
        // replacing the V-generator by its inverse reverses the reduction
        // direction and shifts the fundamental domain; the orbit sum must
        // not move
        let (inst, prep) = worked();
        let chi = HeckeCharData::new(&inst, 0, 4).unwrap();
        let s = Complex::from_f64(P, 2.5, 0.0);
        let base = partial_l(&inst, &prep, &chi, &s, 40).unwrap();
        let inst_inv = inst.with_units(vec![inst.alg.inv(&inst.units[0]).unwrap()], 16);
        let prep_inv = inst_inv.prepare(P).unwrap();
        let flipped = partial_l(&inst_inv, &prep_inv, &chi, &s, 40).unwrap();
        assert_eq!(base.terms, flipped.terms);
        let scale = base.value.abs().max(&Float::with_val(P, 1));
        assert!(base.value.dist(&flipped.value) < two_pow(16 - P as i64, P) * scale);
    }

    #[test]
    fn partial_l_invariant_under_coset_translation() {
        let (inst, prep) = worked();
        let chi = HeckeCharData::new(&inst, 0, 4).unwrap();
        let s = Complex::from_f64(P, 2.5, 0.0);
        let base = partial_l(&inst, &prep, &chi, &s, 40).unwrap();
        // r → r + μ with μ = 1 ∈ f·b⁻¹: same coset
        let inst2 = inst.with_offset(&inst.alg.one()).unwrap();
        let prep2 = inst2.prepare(P).unwrap();
        let shifted = partial_l(&inst2, &prep2, &chi, &s, 40).unwrap();
        assert_eq!(base.terms, shifted.terms);
        let scale = base.value.abs().max(&Float::with_val(P, 1));
        assert!(base.value.dist(&shifted.value) < two_pow(16 - P as i64, P) * scale);
    }

    #[test]
    fn full_l_with_trivial_data_is_partial_l() {
        let (inst, prep) = worked();
        let chi = HeckeCharData::new(&inst, 0, 4).unwrap();
        let s = Complex::from_f64(P, 3.0, 0.0);
        let lv = partial_l(&inst, &prep, &chi, &s, 50).unwrap();
        let classes = vec![AssemblyClass {
            instance: inst.clone(),
            chi_b: (Rational::from(1), Rational::new()),
            norm_b: 1,
            residues: vec![(inst.alg.zero(), Rational::new())],
        }];
        let fv = full_l(&classes, 0, 4, &s, 50, P).unwrap();
        let scale = lv.value.abs().max(&Float::with_val(P, 1));
        assert!(fv.value.dist(&lv.value) < two_pow(8 - P as i64, P) * scale);
    }

    #[test]
    fn ekl_antisymmetry_and_brute_force() {
        // k + l odd, u = 0, s real → 0 by w ↦ −w antisymmetry
        let u = Complex::zero(P);
        let lat = [Complex::one(P), Complex::from_f64(P, 0.0, 1.0)];
        let s = Complex::from_f64(P, 1.0, 0.0);
        let (v, terms, _) = eval_ekl(&u, &lat, 0, 3, &s, 4.0, P).unwrap();
        assert!(terms > 0);
        assert!(v.abs() < two_pow(-90, P));

        // Λ = Z[i], u = 0, k = 0, l = 4, s = 0: truncated classical lattice
        // sum; brute-force double loop oracle
        let s0 = Complex::zero(P);
        let (g4, _, _) = eval_ekl(&u, &lat, 0, 4, &s0, 5.0, P).unwrap();
        let mut oracle = Complex::zero(P);
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                if (a, b) == (0, 0) {
                    continue;
                }
                let w = Complex::from_f64(P, a as f64, b as f64);
                if w.norm_sqr().to_f64() > 25.0 {
                    continue;
                }
                oracle.add_assign(&w.powi(-4));
            }
        }
        let scale = oracle.abs().max(&Float::with_val(P, 1));
        assert!(g4.dist(&oracle) < two_pow(16 - P as i64, P) * scale);

        // translation by a lattice vector leaves the coset sum unchanged
        let (t1, n1, _) = eval_ekl(&Complex::from_f64(P, 0.5, 0.25), &lat, 0, 4, &s, 4.0, P).unwrap();
        let shifted_u = Complex::from_f64(P, 1.5, 1.25); // u + 1 + i
        let (t2, n2, _) = eval_ekl(&shifted_u, &lat, 0, 4, &s, 4.0, P).unwrap();
        assert_eq!(n1, n2);
        let scale = t1.abs().max(&Float::with_val(P, 1));
        assert!(t1.dist(&t2) < two_pow(16 - P as i64, P) * scale);
    }
}
