//! Small dense complex matrices (n ≤ 4 in practice): determinants, inverses,
//! row-vector action. Gaussian elimination with partial pivoting; pivot
//! choice is deterministic (largest |entry|², lowest row index on ties).

use super::complex::Complex;
use rug::Float;

#[derive(Clone, Debug)]
pub struct CMatrix {
    pub n: usize,
    // row-major: entry (i, j) at i*n + j
    pub a: Vec<Complex>,
}

impl CMatrix {
    pub fn zero(n: usize, prec: u32) -> Self {
        CMatrix {
            n,
            a: vec![Complex::zero(prec); n * n],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zero(n, prec);
        for i in 0..n {
            *m.at_mut(i, i) = Complex::one(prec);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        CMatrix {
            n,
            a: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Complex {
        &self.a[i * self.n + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex {
        &mut self.a[i * self.n + j]
    }

    pub fn col(&self, j: usize) -> Vec<Complex> {
        (0..self.n).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                t.a[j * self.n + i] = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let prec = self.a[0].prec().max(rhs.a[0].prec());
        let mut out = Self::zero(n, prec);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::zero(prec);
                for k in 0..n {
                    acc.add_mul_assign(self.at(i, k), rhs.at(k, j));
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    /// Row vector times matrix: returns x·M.
    pub fn row_vec_mul(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.n);
        let prec = self.a[0].prec().max(x[0].prec());
        (0..self.n)
            .map(|j| {
                let mut acc = Complex::zero(prec);
                for (i, xi) in x.iter().enumerate() {
                    acc.add_mul_assign(xi, self.at(i, j));
                }
                acc
            })
            .collect()
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> Complex {
        let n = self.n;
        let prec = self.a[0].prec();
        let mut m = self.a.clone();
        let mut det = Complex::one(prec);
        for k in 0..n {
            // pivot: largest |entry|^2 in column k at or below row k
            let mut piv = k;
            let mut best = m[k * n + k].norm_sqr();
            for i in k + 1..n {
                let v = m[i * n + k].norm_sqr();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best.is_zero() {
                return Complex::zero(prec);
            }
            if piv != k {
                for j in 0..n {
                    m.swap(k * n + j, piv * n + j);
                }
                det = det.neg();
            }
            det = det.mul(&m[k * n + k]);
            let inv = m[k * n + k].recip();
            for i in k + 1..n {
                let factor = m[i * n + k].mul(&inv);
                for j in k..n {
                    let t = factor.mul(&m[k * n + j]);
                    m[i * n + j] = m[i * n + j].sub(&t);
                }
            }
        }
        det
    }

    /// Inverse via Gauss-Jordan; returns None if a pivot vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let prec = self.a[0].prec();
        let mut m = self.a.clone();
        let mut inv = Self::identity(n, prec).a;
        for k in 0..n {
            let mut piv = k;
            let mut best = m[k * n + k].norm_sqr();
            for i in k + 1..n {
                let v = m[i * n + k].norm_sqr();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best.is_zero() {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    m.swap(k * n + j, piv * n + j);
                    inv.swap(k * n + j, piv * n + j);
                }
            }
            let d = m[k * n + k].recip();
            for j in 0..n {
                m[k * n + j] = m[k * n + j].mul(&d);
                inv[k * n + j] = inv[k * n + j].mul(&d);
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let factor = m[i * n + k].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = factor.mul(&m[k * n + j]);
                    m[i * n + j] = m[i * n + j].sub(&t);
                    let t = factor.mul(&inv[k * n + j]);
                    inv[i * n + j] = inv[i * n + j].sub(&t);
                }
            }
        }
        Some(CMatrix { n, a: inv })
    }

    /// Max |entry|.
    pub fn max_abs(&self) -> Float {
        let prec = self.a[0].prec();
        let mut best = Float::with_val(prec, 0);
        for e in &self.a {
            let v = e.abs();
            if v > best {
                best = v;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::complex::two_pow;

    fn sample(n: usize) -> CMatrix {
        let mut m = CMatrix::zero(n, 128);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = Complex::from_f64(
                    128,
                    ((i * 3 + j * 7) % 5) as f64 + 0.5,
                    ((i + 2 * j) % 3) as f64 - 1.0,
                );
            }
        }
        m
    }

    #[test]
    fn inverse_times_self_is_identity() {
        for n in 2..=4 {
            let m = sample(n);
            let inv = m.inverse().expect("nonsingular");
            let prod = m.mul(&inv);
            let id = CMatrix::identity(n, 128);
            for i in 0..n {
                for j in 0..n {
                    assert!(prod.at(i, j).dist(id.at(i, j)) < two_pow(-100, 128));
                }
            }
        }
    }

    #[test]
    fn det_of_product_multiplies() {
        let a = sample(3);
        let mut b = sample(3);
        *b.at_mut(0, 0) = Complex::from_f64(128, 2.0, 1.0);
        let lhs = a.mul(&b).det();
        let rhs = a.det().mul(&b.det());
        let scale = rhs.abs().max(&rug::Float::with_val(128, 1));
        assert!(lhs.dist(&rhs) < two_pow(-90, 128) * scale);
    }
}
