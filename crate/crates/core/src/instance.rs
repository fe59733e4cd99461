//! Field instances: the validated bundle of arithmetic data for one
//! (F, K, f, b, r, units, character) configuration.
//!
//! All ideal-theoretic inputs (pseudo-basis of f·b⁻¹, unit generators, the
//! index [U_f:V_f], torsion, residue character) are user-supplied
//! configuration. They are validated here — never computed.
//!
//! Instance files are TOML. Exact rationals are "p/q" strings; elements of F
//! are ["a", "b"] pairs meaning a + b√−D; elements of K are vectors of n such
//! pairs (coordinates in the power basis).

use crate::embeddings::{EmbedError, EmbeddingSet};
use crate::extension::{ExtensionError, FMat, KAlgebra, KElem};
use crate::field::{FElem, QuadField};
use crate::num::{CMatrix, Complex};
use crate::report::CheckRecord;
use rug::{Integer, Rational};
use serde::Deserialize;
use std::fmt;
use std::path::Path;

/// A rank-2 Z-lattice inside F, given by an exact basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeF {
    pub basis: [FElem; 2],
}

impl LatticeF {
    /// Exact coordinates of x in this basis, if the basis is independent.
    pub fn coordinates(&self, x: &FElem) -> Option<(Rational, Rational)> {
        let (b1, b2) = (&self.basis[0], &self.basis[1]);
        let det = Rational::from(&b1.a * &b2.b) - Rational::from(&b2.a * &b1.b);
        if det.cmp0() == std::cmp::Ordering::Equal {
            return None;
        }
        let s = (Rational::from(&x.a * &b2.b) - Rational::from(&b2.a * &x.b)) / det.clone();
        let t = (Rational::from(&b1.a * &x.b) - Rational::from(&x.a * &b1.b)) / det;
        Some((s, t))
    }

    pub fn is_independent(&self) -> bool {
        let (b1, b2) = (&self.basis[0], &self.basis[1]);
        let det = Rational::from(&b1.a * &b2.b) - Rational::from(&b2.a * &b1.b);
        det.cmp0() != std::cmp::Ordering::Equal
    }

    /// Exact membership test.
    pub fn contains(&self, x: &FElem) -> bool {
        match self.coordinates(x) {
            Some((s, t)) => s.is_integer() && t.is_integer(),
            None => false,
        }
    }

    /// lcm of basis coordinate denominators (a gap bound for pairings).
    pub fn denominator(&self, f: &QuadField) -> Integer {
        f.denominator(&self.basis[0]).lcm(&f.denominator(&self.basis[1]))
    }
}

/// Membership data for "prime to f".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conductor {
    /// f = (1): everything nonzero is prime to f.
    All,
    /// f = (m)·O_K for a rational integer m > 1. Exact for integral elements:
    /// (ξ) is prime to (m) iff gcd(N_{K/Q}(ξ), m) = 1.
    Rational(u64),
}

impl Conductor {
    pub fn is_prime_to_f(&self, alg: &KAlgebra, x: &KElem) -> bool {
        if x.is_zero() {
            return false;
        }
        match self {
            Conductor::All => true,
            Conductor::Rational(m) => {
                let n = alg.abs_norm(x);
                if !n.is_integer() {
                    return false;
                }
                let g = n.numer().clone().gcd(&Integer::from(*m));
                g == 1
            }
        }
    }
}

/// Residue class character φ on (O_K/f)^×, tabulated on configured
/// representatives. Values are exact roots of unity stored as turns:
/// φ(rep) = e^(2πi·turns).
#[derive(Clone, Debug)]
pub enum ResidueChar {
    Trivial,
    Table(Vec<(KElem, Rational)>),
}

impl ResidueChar {
    pub fn eval(&self, rep_index: usize, prec: u32) -> Complex {
        match self {
            ResidueChar::Trivial => Complex::one(prec),
            ResidueChar::Table(t) => turns_to_complex(&t[rep_index].1, prec),
        }
    }
}

pub fn turns_to_complex(turns: &Rational, prec: u32) -> Complex {
    use rug::Float;
    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let angle = Float::with_val(prec, turns) * two_pi;
    let (s, c) = angle.sin_cos(Float::new(prec));
    Complex { re: c, im: s }
}

#[derive(Clone, Debug)]
pub struct TorsionData {
    pub generator: KElem,
    pub order: u32,
}

#[derive(Clone, Debug)]
pub struct FundamentalUnitData {
    pub element: KElem,
    /// The configured V-generator equals (torsion)·fundamental^power.
    pub power: u32,
}

/// Validated bundle of all arithmetic data for one configuration.
#[derive(Clone, Debug)]
pub struct FieldInstance {
    pub name: String,
    pub alg: KAlgebra,
    /// Pseudo-basis elements m_1, …, m_n with their coefficient lattices:
    /// f·b⁻¹ = Λ_1 m_1 + … + Λ_n m_n.
    pub m: Vec<KElem>,
    pub lambda: Vec<LatticeF>,
    /// Coset offset u ∈ F^n with r = Σ u_i m_i.
    pub u: Vec<FElem>,
    pub r: KElem,
    /// Generators of the free norm-one unit group V used for the cycle.
    pub units: Vec<KElem>,
    /// [U_f : V], supplied and validated against torsion data when possible.
    pub unit_index: u64,
    pub torsion: TorsionData,
    pub fundamental_unit: Option<FundamentalUnitData>,
    pub conductor: Conductor,
    pub residue_char: ResidueChar,
}

#[derive(Debug)]
pub enum InstanceError {
    Io(std::io::Error),
    Parse(String),
    Field(String),
    Extension(ExtensionError),
    Embed(EmbedError),
    Invalid(Vec<CheckRecord>),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::Io(e) => write!(f, "io: {e}"),
            InstanceError::Parse(m) => write!(f, "parse: {m}"),
            InstanceError::Field(m) => write!(f, "field: {m}"),
            InstanceError::Extension(e) => write!(f, "extension: {e}"),
            InstanceError::Embed(e) => write!(f, "embeddings: {e}"),
            InstanceError::Invalid(rs) => {
                let failed: Vec<&str> = rs
                    .iter()
                    .filter(|r| r.status == crate::report::Status::Fail)
                    .map(|r| r.name.as_str())
                    .collect();
                write!(f, "instance validation failed: {}", failed.join(", "))
            }
        }
    }
}

impl std::error::Error for InstanceError {}

impl From<ExtensionError> for InstanceError {
    fn from(e: ExtensionError) -> Self {
        InstanceError::Extension(e)
    }
}

impl From<EmbedError> for InstanceError {
    fn from(e: EmbedError) -> Self {
        InstanceError::Embed(e)
    }
}

// ---------------------------------------------------------------------------
// TOML schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RawInstance {
    name: String,
    d: u32,
    n: usize,
    /// mult_table[i][j] = coordinates of e_i·e_j; omitted for power bases
    /// given by `minpoly`.
    mult_table: Option<Vec<Vec<Vec<[String; 2]>>>>,
    /// tail of the monic minimal polynomial: θ^n = minpoly[0] + minpoly[1]θ + …
    minpoly: Option<Vec<[String; 2]>>,
    pseudo_basis: Vec<RawPseudoBasis>,
    u: Vec<[String; 2]>,
    r: Vec<[String; 2]>,
    units: Vec<Vec<[String; 2]>>,
    unit_index: u64,
    torsion: RawTorsion,
    fundamental_unit: Option<RawFundamentalUnit>,
    conductor: Option<RawConductor>,
    residue_char: Option<RawResidueChar>,
}

#[derive(Deserialize)]
struct RawPseudoBasis {
    m: Vec<[String; 2]>,
    lambda: [[String; 2]; 2],
}

#[derive(Deserialize)]
struct RawTorsion {
    generator: Vec<[String; 2]>,
    order: u32,
}

#[derive(Deserialize)]
struct RawFundamentalUnit {
    element: Vec<[String; 2]>,
    power: u32,
}

#[derive(Deserialize)]
struct RawConductor {
    kind: String,
    modulus: Option<u64>,
}

#[derive(Deserialize)]
struct RawResidueChar {
    kind: String,
    #[serde(default)]
    table: Vec<RawResidueEntry>,
}

#[derive(Deserialize)]
struct RawResidueEntry {
    rep: Vec<[String; 2]>,
    turns: String,
}

fn parse_felem(raw: &[String; 2]) -> Result<FElem, InstanceError> {
    FElem::parse(&raw[0], &raw[1]).map_err(InstanceError::Parse)
}

fn parse_kelem(raw: &[[String; 2]], n: usize) -> Result<KElem, InstanceError> {
    if raw.len() != n {
        return Err(InstanceError::Parse(format!(
            "element has {} coordinates, expected {n}",
            raw.len()
        )));
    }
    Ok(KElem {
        coords: raw
            .iter()
            .map(parse_felem)
            .collect::<Result<Vec<_>, _>>()?,
    })
}

impl FieldInstance {
    pub fn from_toml_str(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance =
            toml::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        let field = QuadField::new(raw.d).map_err(InstanceError::Field)?;
        let n = raw.n;
        let alg = if let Some(tbl) = &raw.mult_table {
            let mut table = Vec::with_capacity(n);
            for row in tbl {
                let mut out_row = Vec::with_capacity(n);
                for cell in row {
                    out_row.push(
                        cell.iter()
                            .map(parse_felem)
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                table.push(out_row);
            }
            KAlgebra::new(field, n, table)?
        } else if let Some(mp) = &raw.minpoly {
            let tail = mp
                .iter()
                .map(parse_felem)
                .collect::<Result<Vec<_>, _>>()?;
            if tail.len() != n {
                return Err(InstanceError::Parse(
                    "minpoly tail length must equal n".into(),
                ));
            }
            KAlgebra::power_basis(field, tail)?
        } else {
            return Err(InstanceError::Parse(
                "one of mult_table or minpoly is required".into(),
            ));
        };

        if raw.pseudo_basis.len() != n {
            return Err(InstanceError::Parse(format!(
                "{} pseudo-basis entries, expected {n}",
                raw.pseudo_basis.len()
            )));
        }
        let mut m = Vec::with_capacity(n);
        let mut lambda = Vec::with_capacity(n);
        for pb in &raw.pseudo_basis {
            m.push(parse_kelem(&pb.m, n)?);
            lambda.push(LatticeF {
                basis: [parse_felem(&pb.lambda[0])?, parse_felem(&pb.lambda[1])?],
            });
        }
        if raw.u.len() != n {
            return Err(InstanceError::Parse("u must have n entries".into()));
        }
        let u = raw
            .u
            .iter()
            .map(parse_felem)
            .collect::<Result<Vec<_>, _>>()?;
        let r = parse_kelem(&raw.r, n)?;
        let units = raw
            .units
            .iter()
            .map(|w| parse_kelem(w, n))
            .collect::<Result<Vec<_>, _>>()?;
        let torsion = TorsionData {
            generator: parse_kelem(&raw.torsion.generator, n)?,
            order: raw.torsion.order,
        };
        let fundamental_unit = match &raw.fundamental_unit {
            Some(fu) => Some(FundamentalUnitData {
                element: parse_kelem(&fu.element, n)?,
                power: fu.power,
            }),
            None => None,
        };
        let conductor = match &raw.conductor {
            None => Conductor::All,
            Some(c) => match c.kind.as_str() {
                "all" => Conductor::All,
                "rational" => Conductor::Rational(c.modulus.ok_or_else(|| {
                    InstanceError::Parse("rational conductor requires modulus".into())
                })?),
                other => {
                    return Err(InstanceError::Parse(format!(
                        "unknown conductor kind {other:?}"
                    )))
                }
            },
        };
        let residue_char = match &raw.residue_char {
            None => ResidueChar::Trivial,
            Some(rc) => match rc.kind.as_str() {
                "trivial" => ResidueChar::Trivial,
                "table" => {
                    let mut t = Vec::new();
                    for e in &rc.table {
                        let rep = parse_kelem(&e.rep, n)?;
                        let turns: Rational = e
                            .turns
                            .parse()
                            .map_err(|err| InstanceError::Parse(format!("bad turns: {err}")))?;
                        t.push((rep, turns));
                    }
                    ResidueChar::Table(t)
                }
                other => {
                    return Err(InstanceError::Parse(format!(
                        "unknown residue character kind {other:?}"
                    )))
                }
            },
        };
        Ok(FieldInstance {
            name: raw.name,
            alg,
            m,
            lambda,
            u,
            r,
            units,
            unit_index: raw.unit_index,
            torsion,
            fundamental_unit,
            conductor,
            residue_char,
        })
    }

    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path).map_err(InstanceError::Io)?;
        Self::from_toml_str(&text)
    }

    pub fn n(&self) -> usize {
        self.alg.n
    }

    pub fn field(&self) -> &QuadField {
        &self.alg.field
    }

    /// Replace the V-generators and index (used for subgroup and
    /// generator-independence runs). The caller is responsible for supplying
    /// a consistent index.
    pub fn with_units(&self, units: Vec<KElem>, unit_index: u64) -> Self {
        let mut out = self.clone();
        out.units = units;
        out.unit_index = unit_index;
        out
    }

    /// Base-change matrix B with column j the power-basis coordinates of m_j.
    pub fn m_basis_matrix(&self) -> FMat {
        let n = self.n();
        let mut a = vec![FElem::zero(); n * n];
        for (j, mj) in self.m.iter().enumerate() {
            for i in 0..n {
                a[i * n + j] = mj.coords[i].clone();
            }
        }
        FMat { n, a }
    }

    /// Exact coordinates of ξ over the pseudo-basis m, if m is a basis.
    pub fn coords_in_m_basis(&self, x: &KElem) -> Option<Vec<FElem>> {
        self.m_basis_matrix().solve(&self.alg.field, &x.coords)
    }

    /// Exact membership test: ξ ∈ f·b⁻¹ + r.
    pub fn coset_contains(&self, x: &KElem) -> bool {
        let diff = self.alg.sub(x, &self.r);
        match self.coords_in_m_basis(&diff) {
            Some(coords) => coords
                .iter()
                .zip(&self.lambda)
                .all(|(c, l)| l.contains(c)),
            None => false,
        }
    }

    /// Exact membership test for the homogeneous lattice f·b⁻¹ itself.
    pub fn module_contains(&self, x: &KElem) -> bool {
        match self.coords_in_m_basis(x) {
            Some(coords) => coords
                .iter()
                .zip(&self.lambda)
                .all(|(c, l)| l.contains(c)),
            None => false,
        }
    }

    /// Validation report: every instance invariant with pass/fail and a
    /// witness for failures. Returns records; never throws on check failure.
    pub fn validate(&self) -> Vec<CheckRecord> {
        let mut out = Vec::new();
        let alg = &self.alg;
        let f = &alg.field;
        let n = self.n();

        // pseudo-basis sanity
        for (i, l) in self.lambda.iter().enumerate() {
            out.push(CheckRecord::assert(
                format!("lattice-{}-independent", i + 1),
                l.is_independent(),
                "basis",
                "Q-linearly independent",
                "exact",
                format!("basis {:?}, {:?}", l.basis[0], l.basis[1]),
            ));
        }
        let basis_ok = self.m_basis_matrix().det(f);
        out.push(CheckRecord::assert(
            "pseudo-basis-is-K-basis",
            !basis_ok.is_zero(),
            format!("det = {basis_ok}"),
            "nonzero",
            "exact",
            "m_1..m_n are F-linearly dependent",
        ));

        // O_F-module stability of each lattice
        let omega = f.ring_generator();
        for (i, l) in self.lambda.iter().enumerate() {
            let stable = l.contains(&f.mul(&omega, &l.basis[0]))
                && l.contains(&f.mul(&omega, &l.basis[1]));
            out.push(CheckRecord::assert(
                format!("lattice-{}-O_F-stable", i + 1),
                stable,
                "omega*Lambda",
                "subset of Lambda",
                "exact",
                format!("omega = {omega}"),
            ));
        }

        // r = Σ u_i m_i exactly
        let mut acc = alg.zero();
        for (ui, mi) in self.u.iter().zip(&self.m) {
            acc = alg.add(&acc, &alg.mul(&alg.from_f(ui), mi));
        }
        let diff = alg.sub(&self.r, &acc);
        out.push(CheckRecord::assert(
            "r-equals-sum-u_i-m_i",
            diff.is_zero(),
            format!("r - Σu_i m_i = {diff:?}"),
            "0",
            "exact",
            format!("difference {diff:?}"),
        ));

        // units: exact relative norm one, congruent to 1 mod f, coset-stable
        for (j, eps) in self.units.iter().enumerate() {
            let nrm = alg.rel_norm(eps);
            out.push(CheckRecord::assert(
                format!("unit-{}-norm-one", j + 1),
                nrm.is_one(),
                format!("N_K/F = {nrm}"),
                "1",
                "exact",
                format!("rel_norm({:?}) = {nrm}", eps),
            ));
            let cong = match &self.conductor {
                Conductor::All => true,
                Conductor::Rational(_) => {
                    // spot check through the supplied module: exact when b = (1)
                    let em1 = alg.sub(eps, &alg.one());
                    self.module_contains(&em1)
                }
            };
            out.push(CheckRecord::assert(
                format!("unit-{}-congruent-1-mod-f", j + 1),
                cong,
                "epsilon - 1",
                "in f·b^-1 (membership spot check)",
                "exact",
                format!("unit {:?}", eps),
            ));
            // multiplication by ε maps the module into itself: test on the
            // Z-generators λ·m_j, λ running over each lattice basis
            let mut stable = true;
            'outer: for (mj, lj) in self.m.iter().zip(&self.lambda) {
                for coef in &lj.basis {
                    let gen = alg.scale(coef, mj);
                    if !self.module_contains(&alg.mul(eps, &gen)) {
                        stable = false;
                        break 'outer;
                    }
                }
            }
            // and it fixes the coset: r(ε − 1) must land in the module
            if stable && !self.r.is_zero() {
                let em1 = alg.sub(eps, &alg.one());
                stable = self.module_contains(&alg.mul(&self.r, &em1));
            }
            out.push(CheckRecord::assert(
                format!("unit-{}-module-stable", j + 1),
                stable,
                "epsilon·(Λ_i m_i) and r(epsilon-1)",
                "inside Σ Λ_i m_i",
                "exact",
                format!("unit {:?}", eps),
            ));
        }

        // torsion: generator has the stated order
        let tor = &self.torsion;
        let mut pow = alg.one();
        let mut order_ok = tor.order >= 1;
        for _ in 0..tor.order.saturating_sub(1) {
            pow = alg.mul(&pow, &tor.generator);
            if pow == alg.one() {
                order_ok = false;
                break;
            }
        }
        if order_ok && tor.order >= 1 {
            pow = alg.mul(&pow, &tor.generator);
            order_ok = pow == alg.one();
        }
        out.push(CheckRecord::assert(
            "torsion-order",
            order_ok,
            format!("generator^order, order = {}", tor.order),
            "1, and no smaller power is 1",
            "exact",
            format!("generator {:?}", tor.generator),
        ));

        // index consistency from torsion and the norm-(−1) unit, n = 2 only
        if let Some(fu) = &self.fundamental_unit {
            if n == 2 && self.units.len() == 1 {
                let mut matched = false;
                let mut t = alg.one();
                for _a in 0..tor.order {
                    if let Ok(fp) = alg.pow(&fu.element, fu.power as i64) {
                        if alg.mul(&t, &fp) == self.units[0] {
                            matched = true;
                            break;
                        }
                    }
                    t = alg.mul(&t, &tor.generator);
                }
                out.push(CheckRecord::assert(
                    "unit-decomposes-over-torsion-and-fundamental",
                    matched,
                    "epsilon = zeta^a · fund^power",
                    "some a in [0, order)",
                    "exact",
                    format!("power = {}", fu.power),
                ));
                let expect_index = tor.order as u64 * fu.power as u64;
                out.push(CheckRecord::assert(
                    "unit-index-consistent",
                    self.unit_index == expect_index,
                    format!("configured [U_f:V] = {}", self.unit_index),
                    format!("torsion order × power = {expect_index}"),
                    "exact",
                    "index does not match configured torsion and fundamental unit",
                ));
            }
        }
        out.push(CheckRecord::assert(
            "unit-index-positive",
            self.unit_index >= 1,
            format!("{}", self.unit_index),
            ">= 1",
            "exact",
            "index must be positive",
        ));
        out.push(CheckRecord::assert(
            "unit-count-matches-rank",
            self.units.len() == n - 1,
            format!("{} generators", self.units.len()),
            format!("n - 1 = {}", n - 1),
            "exact",
            "V must have rank n-1",
        ));

        // spot inversions: the m_i and units are invertible in K
        for (i, mi) in self.m.iter().enumerate() {
            out.push(CheckRecord::assert(
                format!("m-{}-invertible", i + 1),
                alg.inv(mi).is_ok(),
                "inverse exists",
                "K is a field on tested elements",
                "exact",
                format!("m_{} = {:?}", i + 1, mi),
            ));
        }
        out
    }

    /// Prepare numeric data at a working precision.
    pub fn prepare(&self, prec: u32) -> Result<PreparedInstance, InstanceError> {
        let emb = EmbeddingSet::compute(&self.alg, prec)?;
        let m_matrix = emb.build_m(&self.alg, &self.m)?;
        let det_m = m_matrix.det();
        let m_inv = m_matrix
            .inverse()
            .ok_or_else(|| EmbedError::SingularMatrix("M".into()))?;
        let m_inv_t = m_inv.transpose();
        Ok(PreparedInstance {
            prec,
            emb,
            m_matrix,
            det_m,
            m_inv,
            m_inv_t,
        })
    }
}

/// Immutable numeric companion of a validated instance at one precision.
#[derive(Clone, Debug)]
pub struct PreparedInstance {
    pub prec: u32,
    pub emb: EmbeddingSet,
    pub m_matrix: CMatrix,
    pub det_m: Complex,
    pub m_inv: CMatrix,
    pub m_inv_t: CMatrix,
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const QI_SQRT2_TOML: &str = include_str!("../../../instances/qi-sqrt2.toml");

    #[test]
    fn worked_instance_parses_and_validates() {
        let inst = FieldInstance::from_toml_str(QI_SQRT2_TOML).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.unit_index, 16);
        let records = inst.validate();
        for r in &records {
            assert_eq!(
                r.status,
                crate::report::Status::Pass,
                "failed: {} ({:?})",
                r.name,
                r.witness
            );
        }
    }

    #[test]
    fn validation_flags_bad_unit() {
        let inst = FieldInstance::from_toml_str(QI_SQRT2_TOML).unwrap();
        // 1 + √2 has relative norm −1
        let bad = KElem {
            coords: vec![FElem::from_i64(1), FElem::from_i64(1)],
        };
        let inst2 = inst.with_units(vec![bad], 8);
        let records = inst2.validate();
        let norm_check = records
            .iter()
            .find(|r| r.name == "unit-1-norm-one")
            .unwrap();
        assert_eq!(norm_check.status, crate::report::Status::Fail);
        assert!(norm_check.witness.as_ref().unwrap().contains("-1"));
    }

    #[test]
    fn validation_flags_broken_r() {
        let mut inst = FieldInstance::from_toml_str(QI_SQRT2_TOML).unwrap();
        inst.r = inst.alg.one();
        let records = inst.validate();
        let r_check = records
            .iter()
            .find(|r| r.name == "r-equals-sum-u_i-m_i")
            .unwrap();
        assert_eq!(r_check.status, crate::report::Status::Fail);
    }

    #[test]
    fn rational_conductor_membership() {
        let mut inst = FieldInstance::from_toml_str(QI_SQRT2_TOML).unwrap();
        inst.conductor = Conductor::Rational(3);
        let alg = inst.alg.clone();
        // N(1 + √2·0) = 1: prime to 3
        assert!(inst.conductor.is_prime_to_f(&alg, &alg.one()));
        // N(3) = 81: not prime to 3
        let three = alg.from_f(&FElem::from_i64(3));
        assert!(!inst.conductor.is_prime_to_f(&alg, &three));
        // N(√2) = 4: prime to 3
        assert!(inst.conductor.is_prime_to_f(&alg, &alg.basis_elem(1)));
        // zero is never prime to f
        assert!(!inst.conductor.is_prime_to_f(&alg, &alg.zero()));
        // non-integral elements are rejected by the integral-norm rule
        let half = alg.from_f(&FElem::parse("1/2", "0").unwrap());
        assert!(!inst.conductor.is_prime_to_f(&alg, &half));
    }

    #[test]
    fn chain_and_poly_records_serialize() {
        let inst = FieldInstance::from_toml_str(QI_SQRT2_TOML).unwrap();
        let prep = inst.prepare(128).unwrap();
        let chain = crate::homology::build_cycle(&inst, &prep, &inst.units).unwrap();
        let v = chain.records();
        assert_eq!(v.as_array().unwrap().len(), 1);
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.contains("\"coeff\":1"));
        let p = crate::poly::norm_form_poly(
            &prep.m_matrix,
            crate::poly::NormFormVariant::Q,
            1,
        )
        .unwrap();
        let rec = p.record();
        assert_eq!(rec["degree"], 2);
    }

    #[test]
    fn coset_membership_worked_instance() {
        let inst = FieldInstance::from_toml_str(QI_SQRT2_TOML).unwrap();
        let alg = &inst.alg;
        // ζ_8 = ((1+i)/2)·√2 is in O_K
        let zeta = inst.torsion.generator.clone();
        assert!(inst.coset_contains(&zeta));
        // (1+i)/2 itself is not in O_K
        let half = alg.from_f(&FElem::parse("1/2", "1/2").unwrap());
        assert!(!inst.coset_contains(&half));
        // the coset is stable under multiplication by the configured unit
        let eps = inst.units[0].clone();
        let x = alg.add(&zeta, &alg.one());
        assert!(inst.coset_contains(&alg.mul(&x, &eps)));
    }
}
