//! The degree-n extension K/F, represented by a power basis e_0 = 1,
//! e_1 = θ, …, e_{n−1} = θ^{n−1} with an exact F-multiplication table.
//!
//! All zero tests and ring operations here are exact. Inversion and relative
//! norms go through the multiplication-by-x matrix over F.

use crate::field::{FElem, QuadField};
use rug::Rational;
use std::fmt;

/// Element of K as exact coordinates over F in the fixed power basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KElem {
    pub coords: Vec<FElem>,
}

impl KElem {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

impl fmt::Debug for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Exact n×n matrix over F, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FMat {
    pub n: usize,
    pub a: Vec<FElem>,
}

impl FMat {
    pub fn identity(f: &QuadField, n: usize) -> Self {
        let _ = f;
        let mut a = vec![FElem::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = FElem::one();
        }
        FMat { n, a }
    }

    pub fn at(&self, i: usize, j: usize) -> &FElem {
        &self.a[i * self.n + j]
    }

    pub fn col(&self, j: usize) -> Vec<FElem> {
        (0..self.n).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut a = vec![FElem::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                a[j * n + i] = self.at(i, j).clone();
            }
        }
        FMat { n, a }
    }

    pub fn mul(&self, f: &QuadField, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut a = vec![FElem::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = FElem::zero();
                for k in 0..n {
                    acc = f.add(&acc, &f.mul(self.at(i, k), rhs.at(k, j)));
                }
                a[i * n + j] = acc;
            }
        }
        FMat { n, a }
    }

    /// Row vector times matrix, exact.
    pub fn row_vec_mul(&self, f: &QuadField, x: &[FElem]) -> Vec<FElem> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|j| {
                let mut acc = FElem::zero();
                for (i, xi) in x.iter().enumerate() {
                    acc = f.add(&acc, &f.mul(xi, self.at(i, j)));
                }
                acc
            })
            .collect()
    }

    /// Exact determinant by fraction-full Gaussian elimination.
    pub fn det(&self, f: &QuadField) -> FElem {
        let n = self.n;
        let mut m = self.a.clone();
        let mut det = FElem::one();
        for k in 0..n {
            let piv = (k..n).find(|&i| !m[i * n + k].is_zero());
            let piv = match piv {
                Some(p) => p,
                None => return FElem::zero(),
            };
            if piv != k {
                for j in 0..n {
                    m.swap(k * n + j, piv * n + j);
                }
                det = f.neg(&det);
            }
            det = f.mul(&det, &m[k * n + k]);
            let inv = f.inv(&m[k * n + k]).unwrap();
            for i in k + 1..n {
                if m[i * n + k].is_zero() {
                    continue;
                }
                let factor = f.mul(&m[i * n + k], &inv);
                for j in k..n {
                    let t = f.mul(&factor, &m[k * n + j]);
                    m[i * n + j] = f.sub(&m[i * n + j], &t);
                }
            }
        }
        det
    }

    /// Exact inverse; None if singular.
    pub fn inverse(&self, f: &QuadField) -> Option<Self> {
        let n = self.n;
        let mut m = self.a.clone();
        let mut inv = Self::identity(f, n).a;
        for k in 0..n {
            let piv = (k..n).find(|&i| !m[i * n + k].is_zero())?;
            if piv != k {
                for j in 0..n {
                    m.swap(k * n + j, piv * n + j);
                    inv.swap(k * n + j, piv * n + j);
                }
            }
            let d = f.inv(&m[k * n + k]).unwrap();
            for j in 0..n {
                m[k * n + j] = f.mul(&m[k * n + j], &d);
                inv[k * n + j] = f.mul(&inv[k * n + j], &d);
            }
            for i in 0..n {
                if i == k || m[i * n + k].is_zero() {
                    continue;
                }
                let factor = m[i * n + k].clone();
                for j in 0..n {
                    let t = f.mul(&factor, &m[k * n + j]);
                    m[i * n + j] = f.sub(&m[i * n + j], &t);
                    let t = f.mul(&factor, &inv[k * n + j]);
                    inv[i * n + j] = f.sub(&inv[i * n + j], &t);
                }
            }
        }
        Some(FMat { n, a: inv })
    }

    /// Solve M·y = rhs exactly; None if singular.
    pub fn solve(&self, f: &QuadField, rhs: &[FElem]) -> Option<Vec<FElem>> {
        let inv = self.inverse(f)?;
        Some(
            (0..self.n)
                .map(|i| {
                    let mut acc = FElem::zero();
                    for (j, r) in rhs.iter().enumerate() {
                        acc = f.add(&acc, &f.mul(inv.at(i, j), r));
                    }
                    acc
                })
                .collect(),
        )
    }

    /// Largest coordinate denominator over all entries.
    pub fn max_denominator(&self, f: &QuadField) -> rug::Integer {
        let mut d = rug::Integer::from(1);
        for e in &self.a {
            d = d.lcm(&f.denominator(e));
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    NotInvertible,
    BadTable(String),
}

impl fmt::Display for ExtensionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionError::NotInvertible => write!(f, "element is not invertible"),
            ExtensionError::BadTable(msg) => write!(f, "bad multiplication table: {msg}"),
        }
    }
}

impl std::error::Error for ExtensionError {}

/// K as an n-dimensional F-algebra with an explicit multiplication table.
/// `table[i][j]` holds the coordinates of e_i·e_j.
#[derive(Clone, Debug)]
pub struct KAlgebra {
    pub field: QuadField,
    pub n: usize,
    pub table: Vec<Vec<Vec<FElem>>>,
}

impl KAlgebra {
    pub fn new(field: QuadField, n: usize, table: Vec<Vec<Vec<FElem>>>) -> Result<Self, ExtensionError> {
        let alg = KAlgebra { field, n, table };
        alg.validate_table()?;
        Ok(alg)
    }

    /// Build the table for a power basis from a monic minimal polynomial
    /// θ^n = c_0 + c_1 θ + … + c_{n−1} θ^{n−1}.
    pub fn power_basis(field: QuadField, minpoly_tail: Vec<FElem>) -> Result<Self, ExtensionError> {
        let n = minpoly_tail.len();
        if n == 0 {
            return Err(ExtensionError::BadTable("empty minimal polynomial".into()));
        }
        // rows of powers θ^0 .. θ^{2n-2}
        let f = field.clone();
        let mut powers: Vec<Vec<FElem>> = Vec::with_capacity(2 * n - 1);
        for j in 0..n {
            let mut v = vec![FElem::zero(); n];
            v[j] = FElem::one();
            powers.push(v);
        }
        for _ in n..2 * n - 1 {
            let last = powers.last().unwrap().clone();
            // multiply by θ: shift up, reduce the overflow by the minimal polynomial
            let mut v = vec![FElem::zero(); n];
            for (i, c) in last.iter().enumerate().take(n - 1) {
                v[i + 1] = c.clone();
            }
            let top = last[n - 1].clone();
            for i in 0..n {
                v[i] = f.add(&v[i], &f.mul(&top, &minpoly_tail[i]));
            }
            powers.push(v);
        }
        let table: Vec<Vec<Vec<FElem>>> = (0..n)
            .map(|i| (0..n).map(|j| powers[i + j].clone()).collect())
            .collect();
        Self::new(field, n, table)
    }

    fn validate_table(&self) -> Result<(), ExtensionError> {
        let n = self.n;
        if self.table.len() != n
            || self.table.iter().any(|row| row.len() != n)
            || self
                .table
                .iter()
                .any(|row| row.iter().any(|c| c.len() != n))
        {
            return Err(ExtensionError::BadTable("wrong dimensions".into()));
        }
        // e_0 is the identity
        for j in 0..n {
            let mut want = vec![FElem::zero(); n];
            want[j] = FElem::one();
            if self.table[0][j] != want {
                return Err(ExtensionError::BadTable(format!(
                    "e_0 * e_{j} is not e_{j}"
                )));
            }
        }
        // commutativity
        for i in 0..n {
            for j in 0..i {
                if self.table[i][j] != self.table[j][i] {
                    return Err(ExtensionError::BadTable(format!(
                        "e_{i}*e_{j} != e_{j}*e_{i}"
                    )));
                }
            }
        }
        // power-basis chain: e_1 * e_j = e_{j+1} for j < n−1
        for j in 1..n.saturating_sub(1) {
            let mut want = vec![FElem::zero(); n];
            want[j + 1] = FElem::one();
            if self.table[1][j] != want {
                return Err(ExtensionError::BadTable(format!(
                    "basis is not a power basis at e_1*e_{j}"
                )));
            }
        }
        // associativity on all basis triples
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs = self.mul(&self.basis_elem(i), &self.mul(&self.basis_elem(j), &self.basis_elem(k)));
                    let rhs = self.mul(&self.mul(&self.basis_elem(i), &self.basis_elem(j)), &self.basis_elem(k));
                    if lhs != rhs {
                        return Err(ExtensionError::BadTable(format!(
                            "associativity fails at (e_{i}, e_{j}, e_{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn basis_elem(&self, j: usize) -> KElem {
        let mut v = vec![FElem::zero(); self.n];
        v[j] = FElem::one();
        KElem { coords: v }
    }

    pub fn zero(&self) -> KElem {
        KElem {
            coords: vec![FElem::zero(); self.n],
        }
    }

    pub fn one(&self) -> KElem {
        self.basis_elem(0)
    }

    pub fn from_f(&self, c: &FElem) -> KElem {
        let mut v = vec![FElem::zero(); self.n];
        v[0] = c.clone();
        KElem { coords: v }
    }

    pub fn add(&self, x: &KElem, y: &KElem) -> KElem {
        KElem {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| self.field.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, x: &KElem, y: &KElem) -> KElem {
        KElem {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| self.field.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &FElem, x: &KElem) -> KElem {
        KElem {
            coords: x.coords.iter().map(|a| self.field.mul(c, a)).collect(),
        }
    }

    pub fn mul(&self, x: &KElem, y: &KElem) -> KElem {
        let f = &self.field;
        let mut out = vec![FElem::zero(); self.n];
        for (i, xi) in x.coords.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.coords.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = f.mul(xi, yj);
                for (k, t) in self.table[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] = f.add(&out[k], &f.mul(&c, t));
                    }
                }
            }
        }
        KElem { coords: out }
    }

    /// Matrix of multiplication by x over F: column j = coordinates of x·e_j.
    pub fn mul_matrix(&self, x: &KElem) -> FMat {
        let n = self.n;
        let mut a = vec![FElem::zero(); n * n];
        for j in 0..n {
            let col = self.mul(x, &self.basis_elem(j));
            for i in 0..n {
                a[i * n + j] = col.coords[i].clone();
            }
        }
        FMat { n, a }
    }

    /// N_{K/F}(x), exact, as the determinant of the multiplication-by-x matrix.
    pub fn rel_norm(&self, x: &KElem) -> FElem {
        self.mul_matrix(x).det(&self.field)
    }

    /// N_{K/Q}(x) = N_{F/Q}(N_{K/F}(x)), exact and nonnegative up to sign:
    /// returns the rational norm (may be negative only through N_{F/Q}, which
    /// is nonnegative here, so this is |N| whenever F is imaginary quadratic).
    pub fn abs_norm(&self, x: &KElem) -> Rational {
        self.field.norm(&self.rel_norm(x))
    }

    pub fn inv(&self, x: &KElem) -> Result<KElem, ExtensionError> {
        if x.is_zero() {
            return Err(ExtensionError::NotInvertible);
        }
        let m = self.mul_matrix(x);
        let rhs = self.one();
        let y = m
            .solve(&self.field, &rhs.coords)
            .ok_or(ExtensionError::NotInvertible)?;
        Ok(KElem { coords: y })
    }

    pub fn pow(&self, x: &KElem, e: i64) -> Result<KElem, ExtensionError> {
        let mut base = if e < 0 { self.inv(x)? } else { x.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        Ok(acc)
    }

    /// Tail coefficients of the minimal polynomial of θ = e_1:
    /// θ^n = c_0 + c_1θ + … + c_{n−1}θ^{n−1}, read off the table.
    pub fn theta_minpoly_tail(&self) -> Vec<FElem> {
        if self.n == 1 {
            // θ = e_0 = 1, θ^1 = 1
            return vec![FElem::one()];
        }
        self.table[1][self.n - 1].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// K = Q(i)(√2) over F = Q(i), power basis (1, √2).
    pub fn qi_sqrt2() -> KAlgebra {
        let f = QuadField::new(1).unwrap();
        KAlgebra::power_basis(f, vec![FElem::from_i64(2), FElem::zero()]).unwrap()
    }

    fn k(alg: &KAlgebra, a: i64, b: i64) -> KElem {
        KElem {
            coords: vec![FElem::from_i64(a), FElem::from_i64(b)],
        }
    }

    #[test]
    fn rel_norm_examples() {
        let alg = qi_sqrt2();
        // (3+2√2)(3−2√2) = 1
        assert_eq!(alg.rel_norm(&k(&alg, 3, 2)), FElem::one());
        // N(√2) = −2
        assert_eq!(alg.rel_norm(&k(&alg, 0, 1)), FElem::from_i64(-2));
        // N(i) = i·i = −1 since both conjugates over F fix i
        let i_elem = KElem {
            coords: vec![
                FElem::new(Rational::new(), Rational::from(1)),
                FElem::zero(),
            ],
        };
        assert_eq!(alg.rel_norm(&i_elem), FElem::from_i64(-1));
        assert!(alg.rel_norm(&alg.one()).is_one());
    }

    #[test]
    fn rel_norm_is_multiplicative() {
        let alg = qi_sqrt2();
        let samples = [
            k(&alg, 3, 2),
            k(&alg, 1, 1),
            k(&alg, -2, 5),
            KElem {
                coords: vec![
                    FElem::parse("1/2", "1/2").unwrap(),
                    FElem::parse("0", "-3").unwrap(),
                ],
            },
        ];
        for x in &samples {
            for y in &samples {
                let lhs = alg.rel_norm(&alg.mul(x, y));
                let rhs = alg.field.mul(&alg.rel_norm(x), &alg.rel_norm(y));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn inversion_closes_the_field() {
        let alg = qi_sqrt2();
        let x = KElem {
            coords: vec![
                FElem::parse("2/3", "1").unwrap(),
                FElem::parse("-1", "1/5").unwrap(),
            ],
        };
        let xi = alg.inv(&x).unwrap();
        assert_eq!(alg.mul(&x, &xi), alg.one());
        assert!(alg.inv(&alg.zero()).is_err());
    }

    #[test]
    fn table_validation_rejects_broken_identity() {
        let f = QuadField::new(1).unwrap();
        let mut table = qi_sqrt2().table;
        table[0][1] = vec![FElem::one(), FElem::zero()];
        assert!(KAlgebra::new(f, 2, table).is_err());
    }

    #[test]
    fn minpoly_tail_reads_back() {
        let alg = qi_sqrt2();
        assert_eq!(
            alg.theta_minpoly_tail(),
            vec![FElem::from_i64(2), FElem::zero()]
        );
    }

    #[test]
    fn fmat_det_and_inverse_exact() {
        let f = QuadField::new(1).unwrap();
        let i = FElem::new(Rational::new(), Rational::from(1));
        let m = FMat {
            n: 2,
            a: vec![FElem::from_i64(2), i.clone(), FElem::one(), FElem::from_i64(3)],
        };
        // det = 6 − i
        let det = m.det(&f);
        assert_eq!(det, f.sub(&FElem::from_i64(6), &i));
        let inv = m.inverse(&f).unwrap();
        let prod = m.mul(&f, &inv);
        assert_eq!(prod, FMat::identity(&f, 2));
    }
}
