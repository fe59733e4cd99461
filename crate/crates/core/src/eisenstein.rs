//! The truncated Eisenstein cocycle: enumeration of lattice-coset points
//! x ∈ Λ + u inside sup-norm balls of w = xM, the convergence factor
//! Ω_s^k(x, M) = Π_i conj(xM_i)^k / |xM_i|^{2s}, and the summed pairing
//! Ψ_s(𝔄)(P, u, M) = Σ_x ψ(𝔄)(P, x)·Ω_s^k(x, M).
//!
//! Truncation is by the sup norm max_i |(xM)_i| (complex modulus per
//! coordinate). Summation order is deterministic: points are visited in
//! lexicographic order of their integer coordinates and accumulated per
//! shell with fixed-size blocks, then shells are combined in order, so the
//! result is independent of any parallel schedule that merges whole blocks
//! in index order.
//!
//! Column selection inside ψ needs exact zero tests. In the hot loop the
//! numeric pairing is certified against a lattice gap: pairings lie in a
//! fixed fractional-ideal lattice of F, so any nonzero pairing has modulus
//! at least 1/(den_x·den_cols). Only pairings below that bound fall back to
//! exact arithmetic.

use crate::cocycle::{exact_pairing, Tuple, TupleEvaluator};
use crate::field::{FElem, QuadField};
use crate::instance::LatticeF;
use crate::num::{BlockSum, CMatrix, Complex};
use crate::poly::HomogPoly;
use rug::{Assign, Float, Integer};
use std::fmt;

#[derive(Clone, Debug)]
pub struct LatticeCoset {
    pub lattices: Vec<LatticeF>,
    pub offset: Vec<FElem>,
}

impl LatticeCoset {
    /// lcm of all coordinate denominators appearing in lattice bases and the
    /// offset: every enumerated x has coordinates in (1/den)·Z[√−D]-span.
    pub fn denominator(&self, f: &QuadField) -> Integer {
        let mut d = Integer::from(1);
        for l in &self.lattices {
            d = d.lcm(&l.denominator(f));
        }
        for u in &self.offset {
            d = d.lcm(&f.denominator(u));
        }
        d
    }
}

#[derive(Clone, Debug)]
pub struct TruncationParams {
    pub radius: f64,
    pub shell_width: f64,
    pub prec: u32,
}

impl TruncationParams {
    pub fn new(radius: f64, prec: u32) -> Self {
        TruncationParams {
            radius,
            shell_width: (radius / 16.0).max(1.0),
            prec,
        }
    }
}

/// Result of a truncated Eisenstein sum.
#[derive(Clone, Debug)]
pub struct PsiValue {
    pub value: Complex,
    pub terms_summed: u64,
    /// Geometric-extrapolation estimate from the outermost shells; infinite
    /// when shell sums fail to decay.
    pub tail_estimate: f64,
    /// Σ|term| per shell (diagnostics).
    pub shell_abs: Vec<f64>,
    /// Largest single |term| per shell (diagnostics; sparse unit-direction
    /// clusters show up here rather than in the bulk decay).
    pub shell_max: Vec<f64>,
    /// Outer radius of each shell.
    pub shell_radius: Vec<f64>,
    /// Empirical decay exponent of shell sums against radius.
    pub decay_exponent: f64,
    /// Shell sums decay fast enough for absolute convergence.
    pub converged: bool,
    /// Re(s) ≤ 1 + k/2: outside the proven absolute-convergence half-plane.
    pub domain_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EisError {
    /// Some xM_i = 0 for a nonzero coset point (invalid instance data).
    VanishingPairing(usize),
    Dimension(String),
}

impl fmt::Display for EisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EisError::VanishingPairing(i) => write!(f, "xM_{i} vanishes at a nonzero x"),
            EisError::Dimension(m) => write!(f, "dimension mismatch: {m}"),
        }
    }
}

impl std::error::Error for EisError {}

/// Ω_s^k(x, M) for an exact x: Π_i conj(xM_i)^k · exp(−s·ln|xM_i|²).
pub fn omega(
    f: &QuadField,
    x: &[FElem],
    m: &CMatrix,
    s: &Complex,
    k: i64,
    prec: u32,
) -> Result<Complex, EisError> {
    let xc: Vec<Complex> = x.iter().map(|c| f.embed(c, prec)).collect();
    let w = m.row_vec_mul(&xc);
    omega_at_w(&w, s, k, prec)
}

/// Ω from precomputed w = xM.
pub fn omega_at_w(w: &[Complex], s: &Complex, k: i64, prec: u32) -> Result<Complex, EisError> {
    let mut log_sum = Float::with_val(prec, 0);
    let mut conj_prod = Complex::one(prec);
    for (i, wi) in w.iter().enumerate() {
        if wi.is_zero() {
            return Err(EisError::VanishingPairing(i));
        }
        log_sum += wi.norm_sqr().ln();
        if k != 0 {
            conj_prod = conj_prod.mul(&wi.conj().powi(k));
        }
    }
    let exponent = Complex {
        re: -Float::with_val(prec, &s.re * &log_sum),
        im: -Float::with_val(prec, &s.im * &log_sum),
    };
    Ok(conj_prod.mul(&exponent.exp()))
}

// ---------------------------------------------------------------------------
// Coset enumeration
// ---------------------------------------------------------------------------

/// Enumerator for coset points with per-embedding radii |(xM)_i| ≤ R_i.
pub struct CosetGrid {
    pub n: usize,
    pub dim: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    prec: u32,
    /// contribution of integer coordinate t to w (length n each)
    cvec: Vec<Vec<Complex>>,
    wbase: Vec<Complex>,
    radii_sq: Vec<Float>,
    radii: Vec<f64>,
    /// conservative per-level remaining reach in each w coordinate (f64)
    rem: Vec<Vec<f64>>,
}

impl CosetGrid {
    pub fn new(
        f: &QuadField,
        coset: &LatticeCoset,
        m: &CMatrix,
        radii: &[f64],
        prec: u32,
    ) -> Result<Self, EisError> {
        let n = coset.lattices.len();
        if m.n != n || coset.offset.len() != n || radii.len() != n {
            return Err(EisError::Dimension(format!(
                "n = {n}, matrix {}x{}, radii {}",
                m.n,
                m.n,
                radii.len()
            )));
        }
        let dim = 2 * n;
        // w_j = Σ_i x_i M_{ij}; coordinate (2i, 2i+1) scales basis α_i, β_i
        let mut cvec: Vec<Vec<Complex>> = Vec::with_capacity(dim);
        for (i, lat) in coset.lattices.iter().enumerate() {
            for b in &lat.basis {
                let be = f.embed(b, prec);
                let contrib: Vec<Complex> = (0..n).map(|j| be.mul(m.at(i, j))).collect();
                cvec.push(contrib);
            }
        }
        let offset_c: Vec<Complex> = coset.offset.iter().map(|u| f.embed(u, prec)).collect();
        let wbase = m.row_vec_mul(&offset_c);

        // integer bounds from the f64 inverse of the real 2n×2n coordinate map
        let mut t = vec![vec![0f64; dim]; dim];
        for (kcol, contrib) in cvec.iter().enumerate() {
            for j in 0..n {
                t[2 * j][kcol] = contrib[j].re.to_f64();
                t[2 * j + 1][kcol] = contrib[j].im.to_f64();
            }
        }
        let tinv = invert_f64(&t).ok_or_else(|| {
            EisError::Dimension("lattice embedding matrix is numerically singular".into())
        })?;
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for tirow in tinv.iter().take(dim) {
            let mut bound = 0f64;
            for (row, ti) in tirow.iter().enumerate() {
                let j = row / 2;
                let comp = if row % 2 == 0 {
                    wbase[j].re.to_f64()
                } else {
                    wbase[j].im.to_f64()
                };
                bound += ti.abs() * (radii[j] + comp.abs());
            }
            let b = bound * (1.0 + 1e-9) + 0.5;
            lo.push((-b).floor() as i64);
            hi.push(b.ceil() as i64);
        }

        let cvec_f64: Vec<Vec<(f64, f64)>> = cvec
            .iter()
            .map(|c| c.iter().map(|z| (z.re.to_f64(), z.im.to_f64())).collect())
            .collect();
        // rem[level][j]: max reach of coordinates > level in w_j
        let mut rem = vec![vec![0f64; n]; dim + 1];
        for level in (0..dim).rev() {
            for j in 0..n {
                let amp = lo[level].abs().max(hi[level].abs()) as f64;
                let (re, im) = cvec_f64[level][j];
                rem[level][j] = rem[level + 1][j] + amp * (re * re + im * im).sqrt() * 1.0000001;
            }
        }

        let radii_sq = radii
            .iter()
            .map(|r| {
                let rf = Float::with_val(prec, *r);
                rf.square()
            })
            .collect();
        Ok(CosetGrid {
            n,
            dim,
            lo,
            hi,
            prec,
            cvec,
            wbase,
            radii_sq,
            radii: radii.to_vec(),
            rem,
        })
    }

    pub fn equal_radius(
        f: &QuadField,
        coset: &LatticeCoset,
        m: &CMatrix,
        r: f64,
        prec: u32,
    ) -> Result<Self, EisError> {
        let radii = vec![r; coset.lattices.len()];
        Self::new(f, coset, m, &radii, prec)
    }

    /// Visit every coset point inside the ball exactly once, in lexicographic
    /// order of the integer coordinate vector. The closure receives the
    /// integer coordinates and w = xM. The inner loop reuses fixed buffers;
    /// w is a deterministic function of the integer coordinates alone.
    pub fn visit<F: FnMut(&[i64], &[Complex])>(&self, mut visit: F) {
        let mut v = vec![0i64; self.dim];
        // flat buffer: partials[level·n + j]
        let mut partials = vec![Complex::zero(self.prec); self.dim * self.n];
        let mut ws = crate::num::complex::Workspace::new(self.prec);
        self.rec_visit(0, &mut v, &mut partials, &mut ws, &mut visit);
    }

    fn rec_visit<F: FnMut(&[i64], &[Complex])>(
        &self,
        level: usize,
        v: &mut Vec<i64>,
        partials: &mut Vec<Complex>,
        ws: &mut crate::num::complex::Workspace,
        visit: &mut F,
    ) {
        let n = self.n;
        let last = level + 1 == self.dim;
        for t in self.lo[level]..=self.hi[level] {
            v[level] = t;
            {
                let (prev_all, cur_all) = partials.split_at_mut(level * n);
                let prev: &[Complex] = if level == 0 {
                    &self.wbase
                } else {
                    &prev_all[(level - 1) * n..]
                };
                let cur = &mut cur_all[..n];
                for j in 0..n {
                    cur[j].assign_add_scaled_i64(&prev[j], &self.cvec[level][j], t, &mut ws.t1);
                }
                if last {
                    let mut inside = true;
                    for (j, c) in cur.iter().enumerate() {
                        c.norm_sqr_into(&mut ws.t2, &mut ws.t1);
                        if ws.t2 > self.radii_sq[j] {
                            inside = false;
                            break;
                        }
                    }
                    if !inside {
                        continue;
                    }
                } else {
                    // prune subtrees that provably stay outside the ball
                    let mut reachable = true;
                    for (j, c) in cur.iter().enumerate() {
                        let pj =
                            (c.re.to_f64().powi(2) + c.im.to_f64().powi(2)).sqrt();
                        if pj - self.rem[level + 1][j] > self.radii[j] * (1.0 + 1e-9) + 1e-9 {
                            reachable = false;
                            break;
                        }
                    }
                    if !reachable {
                        continue;
                    }
                }
            }
            if last {
                let cur = &partials[level * n..level * n + n];
                visit(v, cur);
            } else {
                self.rec_visit(level + 1, v, partials, ws, visit);
            }
        }
    }

    /// Exact coordinates of the coset point for integer coordinates v.
    pub fn exact_x(&self, f: &QuadField, coset: &LatticeCoset, v: &[i64]) -> Vec<FElem> {
        (0..self.n)
            .map(|i| {
                let lat = &coset.lattices[i];
                let s = Rationali64(v[2 * i]);
                let t = Rationali64(v[2 * i + 1]);
                let mut acc = coset.offset[i].clone();
                acc = f.add(&acc, &scale_f(f, &lat.basis[0], &s));
                acc = f.add(&acc, &scale_f(f, &lat.basis[1], &t));
                acc
            })
            .collect()
    }
}

fn scale_f(f: &QuadField, x: &FElem, c: &rug::Rational) -> FElem {
    f.mul(x, &FElem::new(c.clone(), rug::Rational::new()))
}

#[allow(non_snake_case)]
fn Rationali64(v: i64) -> rug::Rational {
    rug::Rational::from(v)
}

/// f64 Gauss-Jordan inverse, shared with the Hecke enumeration bounds.
pub(crate) fn invert_f64_pub(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    invert_f64(a)
}

fn invert_f64(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k][k].abs();
        for i in k + 1..n {
            if m[i][k].abs() > best {
                best = m[i][k].abs();
                piv = i;
            }
        }
        if best < 1e-300 {
            return None;
        }
        m.swap(k, piv);
        inv.swap(k, piv);
        let d = m[k][k];
        for j in 0..n {
            m[k][j] /= d;
            inv[k][j] /= d;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = m[i][k];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                m[i][j] -= factor * m[k][j];
                inv[i][j] -= factor * inv[k][j];
            }
        }
    }
    Some(inv)
}

/// Enumerate coset points with sup-norm ≤ R as exact vectors in
/// deterministic order: graded by shell, then lexicographic in the integer
/// coordinates. Includes x = 0 when the offset lies in the lattice.
pub fn enumerate_coset(
    f: &QuadField,
    coset: &LatticeCoset,
    m: &CMatrix,
    radius: f64,
    shell_width: f64,
    prec: u32,
) -> Result<Vec<Vec<FElem>>, EisError> {
    let grid = CosetGrid::equal_radius(f, coset, m, radius, prec)?;
    let mut buckets: Vec<(usize, Vec<i64>)> = Vec::new();
    grid.visit(|v, w| {
        let sup = sup_norm(w);
        let shell = (sup.to_f64() / shell_width).floor() as usize;
        buckets.push((shell, v.to_vec()));
    });
    buckets.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(buckets
        .into_iter()
        .map(|(_, v)| grid.exact_x(f, coset, &v))
        .collect())
}

fn sup_norm(w: &[Complex]) -> Float {
    let mut best = w[0].norm_sqr();
    for wi in &w[1..] {
        let v = wi.norm_sqr();
        if v > best {
            best = v;
        }
    }
    best.sqrt()
}

// ---------------------------------------------------------------------------
// The summed cocycle
// ---------------------------------------------------------------------------

/// Shell-aware accumulator for one (tuple, s) pair.
struct ShellAccum {
    sums: Vec<BlockSum>,
    abs: Vec<f64>,
    max_term: Vec<f64>,
    terms: u64,
}

impl ShellAccum {
    fn new(shells: usize, prec: u32) -> Self {
        ShellAccum {
            sums: (0..shells).map(|_| BlockSum::new(prec)).collect(),
            abs: vec![0.0; shells],
            max_term: vec![0.0; shells],
            terms: 0,
        }
    }

    fn push(&mut self, shell: usize, term: &Complex, ws: &mut crate::num::complex::Workspace) {
        self.sums[shell].push(term);
        term.norm_sqr_into(&mut ws.t1, &mut ws.t2);
        let a = ws.t1.to_f64().sqrt();
        self.abs[shell] += a;
        if a > self.max_term[shell] {
            self.max_term[shell] = a;
        }
        self.terms += 1;
    }
}

/// Evaluate Ψ_s for several tuples and several s values in one pass over the
/// lattice ball. Returns values indexed by [tuple][s].
///
/// Re(s) ≤ 1 + k/2 sets the domain warning on the results; the truncated sum
/// is still computed.
pub fn eval_psi_sum_multi(
    f: &QuadField,
    coset: &LatticeCoset,
    m: &CMatrix,
    tuples: &[Tuple],
    poly: &HomogPoly,
    s_list: &[Complex],
    k: i64,
    t: &TruncationParams,
) -> Result<Vec<Vec<PsiValue>>, EisError> {
    let prec = t.prec;
    let grid = CosetGrid::equal_radius(f, coset, m, t.radius, prec)?;
    let shells = ((t.radius / t.shell_width).ceil() as usize + 1).max(1);

    let mut evaluators: Vec<TupleEvaluator> = tuples
        .iter()
        .map(|tp| TupleEvaluator::new(f.clone(), tp.clone(), poly.clone(), prec))
        .collect();

    // pairing linear forms per tuple, per matrix, per column:
    // pair = pbase + Σ_coord v·pcoef[coord]
    let den_coset = coset.denominator(f);
    let tuple_pairs: Vec<TuplePairingForms> = tuples
        .iter()
        .map(|tp| TuplePairingForms::new(f, coset, tp, prec, &den_coset))
        .collect();

    let mut accums: Vec<Vec<ShellAccum>> = (0..tuples.len())
        .map(|_| (0..s_list.len()).map(|_| ShellAccum::new(shells, prec)).collect())
        .collect();

    // reusable buffers for the inner loop
    let n = coset.lattices.len();
    let mut ws = crate::num::complex::Workspace::new(prec);
    let mut nrm = Float::new(prec);
    let mut log_sum = Float::new(prec);
    let mut exponent = Complex::zero(prec);
    let mut omegas = vec![Complex::zero(prec); s_list.len()];
    let mut d: Vec<usize> = Vec::with_capacity(n);
    let mut pairs = vec![Complex::zero(prec); n];
    let mut scratch = Complex::zero(prec);
    let mut psi = Complex::zero(prec);
    let mut term = Complex::zero(prec);
    let max_pow = 1 + poly.degree as usize;
    let mut class_buf = crate::cocycle::ClassEvalBuffers::new(n, max_pow, prec);
    let origin_in_coset = coset.offset.iter().all(|u| u.is_zero());

    let mut defect: Option<EisError> = None;
    grid.visit(|v, w| {
        if defect.is_some() {
            return;
        }
        if origin_in_coset && v.iter().all(|&c| c == 0) {
            // ψ(..)(P, 0) = 0: skip the origin
            return;
        }
        // Ω data shared across tuples: Σ ln|w_j|² and conj(Q)^k
        log_sum.assign(0);
        for (j, wj) in w.iter().enumerate() {
            wj.norm_sqr_into(&mut nrm, &mut ws.t1);
            if nrm.is_zero() {
                defect = Some(EisError::VanishingPairing(j));
                return;
            }
            nrm.ln_mut();
            log_sum += &nrm;
        }
        let mut sup_sq = 0f64;
        for wj in w.iter() {
            wj.norm_sqr_into(&mut nrm, &mut ws.t1);
            sup_sq = sup_sq.max(nrm.to_f64());
        }
        for (si, s) in s_list.iter().enumerate() {
            ws.t1.assign(&s.re * &log_sum);
            exponent.re.assign(-&ws.t1);
            ws.t1.assign(&s.im * &log_sum);
            exponent.im.assign(-&ws.t1);
            // omegas[si] = exp(exponent); k twists are applied below
            let om = &mut omegas[si];
            om.assign_exp(&exponent, &mut ws);
        }
        if k != 0 {
            // conj(Q)^k = Π_j conj(w_j)^k; rare path, allocations accepted
            let mut conj_prod = Complex::one(prec);
            for wj in w.iter() {
                conj_prod = conj_prod.mul(&wj.conj().powi(k));
            }
            for om in omegas.iter_mut() {
                let twisted = om.mul(&conj_prod);
                om.assign(&twisted);
            }
        }
        let shell = ((sup_sq.sqrt() / t.shell_width).floor() as usize).min(shells - 1);

        for (ti, pf) in tuple_pairs.iter().enumerate() {
            pf.select_into(f, &grid, coset, v, &mut ws, &mut scratch, &mut d, &mut pairs);
            let class = evaluators[ti].class_for(&d);
            if class.singular {
                continue;
            }
            crate::cocycle::eval_class_into(class, &pairs, &mut class_buf, &mut ws, &mut psi);
            for (si, om) in omegas.iter().enumerate() {
                term.assign_mul(&psi, om, &mut ws.t1, &mut ws.t2);
                accums[ti][si].push(shell, &term, &mut ws);
            }
        }
    });
    if let Some(e) = defect {
        return Err(e);
    }

    let shell_radius: Vec<f64> = (0..shells)
        .map(|i| ((i + 1) as f64) * t.shell_width)
        .collect();
    let half = 1.0 + k as f64 / 2.0;
    let mut out = Vec::with_capacity(tuples.len());
    for per_tuple in accums {
        let mut row = Vec::with_capacity(s_list.len());
        for (si, acc) in per_tuple.into_iter().enumerate() {
            let abs = acc.abs.clone();
            let terms = acc.terms;
            let mut total = BlockSum::new(prec);
            for bs in acc.sums {
                let v = bs.finish();
                total.push(&v);
            }
            let value = total.finish();
            let (tail, exponent, converged) =
                tail_diagnostics(&abs, &acc.max_term, &shell_radius, t.radius);
            row.push(PsiValue {
                value,
                terms_summed: terms,
                tail_estimate: tail,
                shell_abs: abs,
                shell_max: acc.max_term.clone(),
                shell_radius: shell_radius.clone(),
                decay_exponent: exponent,
                converged,
                domain_warning: s_list[si].re.to_f64() <= half,
            });
        }
        out.push(row);
    }
    Ok(out)
}

/// Single-tuple, single-s version.
pub fn eval_psi_sum(
    f: &QuadField,
    coset: &LatticeCoset,
    m: &CMatrix,
    tuple: &Tuple,
    poly: &HomogPoly,
    s: &Complex,
    k: i64,
    t: &TruncationParams,
) -> Result<PsiValue, EisError> {
    let r = eval_psi_sum_multi(
        f,
        coset,
        m,
        std::slice::from_ref(tuple),
        poly,
        std::slice::from_ref(s),
        k,
        t,
    )?;
    Ok(r.into_iter().next().unwrap().into_iter().next().unwrap())
}

/// Tail estimate, empirical decay exponent, and the convergence flag from
/// per-shell magnitude sums.
///
/// Shell sums carry sparse spikes: clusters along the unit directions enter
/// at geometrically spaced radii, so a pointwise least-squares fit is
/// fragile. The decay exponent is instead estimated from medians of the two
/// outer quarters of the complete shells (the final sliver beyond the ball
/// radius is excluded): shell sums integrate to a convergent series only if
/// the slope is below −1.
///
/// The tail combines a geometric extension of that decay with a spike
/// allowance, the largest single term in the outer part of the ball scaled
/// for the torsion multiplicity of a cluster. The estimate stays empirical
/// and is reported, never used to claim rigor.
fn tail_diagnostics(
    abs: &[f64],
    max_term: &[f64],
    radius: &[f64],
    ball_radius: f64,
) -> (f64, f64, bool) {
    // complete shells only
    let full: Vec<(f64, f64)> = abs
        .iter()
        .zip(radius)
        .filter(|(_, r)| **r <= ball_radius * (1.0 + 1e-9))
        .map(|(a, r)| (*a, *r))
        .collect();
    let populated = full.iter().filter(|(a, _)| *a > 0.0).count();
    if populated < 4 {
        // nothing to extrapolate: call it converged with zero tail
        return (0.0, f64::NEG_INFINITY, true);
    }
    let median = |mut v: Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let len = full.len();
    let q = (len / 4).max(2);
    let q3: Vec<f64> = full[len.saturating_sub(2 * q)..len - q]
        .iter()
        .map(|(a, _)| *a)
        .collect();
    let q4: Vec<f64> = full[len - q..].iter().map(|(a, _)| *a).collect();
    let r3 = full[len.saturating_sub(2 * q) + q3.len() / 2].1;
    let r4 = full[len - q + q4.len() / 2].1;
    let m3 = median(q3).max(f64::MIN_POSITIVE);
    let m4 = median(q4);
    let slope = if m4 <= 0.0 {
        f64::NEG_INFINITY
    } else {
        (m4 / m3).ln() / (r4 / r3).ln()
    };
    let converged = slope < -1.05;
    let tail = if converged {
        // geometric extension of the bulk decay from the outer-quarter level
        let r_last = full[len - 1].1;
        let width = if radius.len() >= 2 {
            radius[1] - radius[0]
        } else {
            1.0
        };
        let qr = ((r_last + width) / r_last).powf(slope + 1.0).min(0.95);
        let bulk = m4.max(0.0) * qr / (1.0 - qr);
        // spike allowance over the outer 40% of the complete shells
        let spike_start = (len as f64 * 0.6) as usize;
        let spike = max_term[spike_start.min(len - 1)..len]
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            * 8.0;
        bulk.max(spike)
    } else {
        f64::INFINITY
    };
    (tail, slope, converged)
}

/// Precomputed exact and numeric pairing forms for one tuple over one coset.
struct TuplePairingForms {
    /// [matrix][column]: (numeric base, numeric coefficient per integer
    /// coordinate)
    numeric: Vec<Vec<(Complex, Vec<Complex>)>>,
    /// [matrix][column]: exact column entries, for the below-gap fallback
    exact_cols: Vec<Vec<Vec<FElem>>>,
    /// squared certified gap per matrix: any nonzero exact pairing with a
    /// column of this matrix has |pairing|² above this
    gap_sq: Vec<f64>,
}

impl TuplePairingForms {
    fn new(
        f: &QuadField,
        coset: &LatticeCoset,
        tuple: &Tuple,
        prec: u32,
        den_coset: &Integer,
    ) -> Self {
        let n = tuple.n();
        let mut numeric = Vec::with_capacity(n);
        let mut exact_cols = Vec::with_capacity(n);
        let mut gap_sq = Vec::with_capacity(n);
        for mat in &tuple.mats {
            let den_total = Integer::from(den_coset * &mat.max_den);
            let g = 1.0 / den_total.to_f64();
            // quarter of the squared gap leaves headroom for rounding
            gap_sq.push(g * g * 0.25);
            let mut cols = Vec::with_capacity(n);
            let mut ecols = Vec::with_capacity(n);
            for j in 0..n {
                let col_exact = mat.exact.col(j);
                let col_emb: Vec<Complex> =
                    col_exact.iter().map(|c| f.embed(c, prec)).collect();
                // pair(x) = Σ_i x_i col_i with x_i = u_i + s_i α_i + t_i β_i
                let mut base = Complex::zero(prec);
                for (ui, ci) in coset.offset.iter().zip(&col_emb) {
                    base.add_mul_assign(&f.embed(ui, prec), ci);
                }
                let mut coefs = Vec::with_capacity(2 * n);
                for (i, lat) in coset.lattices.iter().enumerate() {
                    for b in &lat.basis {
                        coefs.push(f.embed(b, prec).mul(&col_emb[i]));
                    }
                }
                cols.push((base, coefs));
                ecols.push(col_exact);
            }
            numeric.push(cols);
            exact_cols.push(ecols);
        }
        TuplePairingForms {
            numeric,
            exact_cols,
            gap_sq,
        }
    }

    /// Smallest-index selection at integer coordinates v: numeric pairings
    /// certified against the lattice gap, exact fallback below the gap.
    /// Writes the selected pairing values into `pairs` and the index vector
    /// into `d`, allocation-free on the certified path.
    fn select_into(
        &self,
        f: &QuadField,
        grid: &CosetGrid,
        coset: &LatticeCoset,
        v: &[i64],
        ws: &mut crate::num::complex::Workspace,
        scratch: &mut Complex,
        d: &mut Vec<usize>,
        pairs: &mut [Complex],
    ) {
        d.clear();
        let mut exact_x: Option<Vec<FElem>> = None;
        for (mi, cols) in self.numeric.iter().enumerate() {
            let mut chosen = None;
            for (j, (base, coefs)) in cols.iter().enumerate() {
                scratch.assign(base);
                for (t, c) in v.iter().zip(coefs) {
                    if *t != 0 {
                        scratch.add_assign_scaled_i64(c, *t, &mut ws.t1);
                    }
                }
                scratch.norm_sqr_into(&mut ws.t2, &mut ws.t1);
                if ws.t2.to_f64() > self.gap_sq[mi] {
                    chosen = Some(j);
                    break;
                }
                // below the certified gap: decide exactly
                let xe = exact_x.get_or_insert_with(|| grid.exact_x(f, coset, v));
                let exact = exact_pairing(f, xe, &self.exact_cols[mi][j]);
                if !exact.is_zero() {
                    chosen = Some(j);
                    break;
                }
            }
            // invertible matrices guarantee a nonvanishing column
            let j = chosen.expect("no nonvanishing column for invertible matrix");
            d.push(j);
            pairs[mi].assign(scratch);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FMatrix;
    use crate::num::two_pow;
    use rug::Rational;

    const P: u32 = 128;

    fn gauss() -> QuadField {
        QuadField::new(1).unwrap()
    }

    fn zi_lattice() -> LatticeF {
        LatticeF {
            basis: [
                FElem::new(Rational::from(1), Rational::new()),
                FElem::new(Rational::new(), Rational::from(1)),
            ],
        }
    }

    fn zi_coset_2d(u: (&str, &str), v: (&str, &str)) -> LatticeCoset {
        LatticeCoset {
            lattices: vec![zi_lattice(), zi_lattice()],
            offset: vec![
                FElem::parse(u.0, u.1).unwrap(),
                FElem::parse(v.0, v.1).unwrap(),
            ],
        }
    }

    #[test]
    fn unit_ball_of_gaussian_integer_pairs() {
        // Λ = (Z[i])², u = 0, M = I, R = 1: coordinates of modulus ≤ 1 are
        // {0, ±1, ±i}: 25 points, including x = 0.
        // Oracle: brute-force integer box count.
        let f = gauss();
        let coset = zi_coset_2d(("0", "0"), ("0", "0"));
        let m = CMatrix::identity(2, P);
        let pts = enumerate_coset(&f, &coset, &m, 1.0, 0.5, P).unwrap();
        let mut oracle = 0u32;
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                for c in -2i64..=2 {
                    for d in -2i64..=2 {
                        if a * a + b * b <= 1 && c * c + d * d <= 1 {
                            oracle += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(oracle, 25);
        assert_eq!(pts.len(), 25);
        assert!(pts.iter().any(|x| x.iter().all(|c| c.is_zero())));
    }

    #[test]
    fn offset_coset_excludes_origin() {
        let f = gauss();
        let coset = zi_coset_2d(("1/2", "0"), ("0", "0"));
        let m = CMatrix::identity(2, P);
        let pts = enumerate_coset(&f, &coset, &m, 1.0, 0.5, P).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|x| !x.iter().all(|c| c.is_zero())));
    }

    #[test]
    fn stream_is_monotone_in_radius() {
        let f = gauss();
        let coset = zi_coset_2d(("0", "0"), ("1/2", "1/2"));
        let m = CMatrix::identity(2, P);
        let small = enumerate_coset(&f, &coset, &m, 1.5, 0.5, P).unwrap();
        let large = enumerate_coset(&f, &coset, &m, 2.5, 0.5, P).unwrap();
        use std::collections::HashSet;
        let key = |x: &Vec<FElem>| format!("{x:?}");
        let ls: HashSet<String> = large.iter().map(key).collect();
        for x in &small {
            assert!(ls.contains(&key(x)));
        }
        assert!(large.len() > small.len());
    }

    #[test]
    fn empty_ball_gives_zero_terms() {
        let f = gauss();
        let coset = zi_coset_2d(("1/2", "0"), ("0", "0"));
        let m = CMatrix::identity(2, P);
        // minimum sup-norm in this coset is 1/2
        let pts = enumerate_coset(&f, &coset, &m, 0.25, 0.25, P).unwrap();
        assert!(pts.is_empty());
        let id = FMatrix::identity(&f, 2, P);
        let tuple = Tuple::new(vec![id.clone(), id]);
        let poly = HomogPoly::one(2, P);
        let s = Complex::from_f64(P, 2.0, 0.0);
        let v = eval_psi_sum(
            &f,
            &coset,
            &m,
            &tuple,
            &poly,
            &s,
            0,
            &TruncationParams::new(0.25, P),
        )
        .unwrap();
        assert_eq!(v.terms_summed, 0);
        assert!(v.value.is_zero());
    }

    #[test]
    fn omega_examples() {
        let f = gauss();
        let m = CMatrix::identity(2, P);
        let s = Complex::from_f64(P, 1.25, 0.0);
        // x with xM = (1, 1) → 1
        let x = vec![FElem::from_i64(1), FElem::from_i64(1)];
        let v = omega(&f, &x, &m, &s, 3, P).unwrap();
        assert!(v.dist(&Complex::one(P)) < two_pow(-100, P));
        // k = 0, M = I → Π |x_i|^(−2s)
        let x2 = vec![FElem::from_i64(2), FElem::from_i64(3)];
        let v2 = omega(&f, &x2, &m, &s, 0, P).unwrap();
        let want = Float::with_val(P, 6).pow_neg_2s(&s);
        assert!(v2.dist(&want) < two_pow(-90, P));
        // vanishing pairing signal
        let x3 = vec![FElem::zero(), FElem::from_i64(1)];
        assert!(matches!(
            omega(&f, &x3, &m, &s, 0, P),
            Err(EisError::VanishingPairing(0))
        ));
    }

    trait PowNeg2s {
        fn pow_neg_2s(&self, s: &Complex) -> Complex;
    }

    impl PowNeg2s for Float {
        fn pow_neg_2s(&self, s: &Complex) -> Complex {
            // |prod|^(−2s) for positive real prod
            let ln = self.clone().square().ln();
            let e = Complex {
                re: -Float::with_val(P, &s.re * &ln),
                im: -Float::with_val(P, &s.im * &ln),
            };
            e.exp()
        }
    }

    #[test]
    fn omega_is_invariant_under_norm_one_units() {
        // Ω_s^k(xA, M) = Ω_s^k(x, M) for A = ϱ(ε), N_K/F(ε) = 1, and the
        // coset is stable under x ↦ xA
        let inst = crate::instance::FieldInstance::from_toml_str(include_str!(
            "../../../instances/qi-sqrt2.toml"
        ))
        .unwrap();
        let prep = inst.prepare(P).unwrap();
        let f = &inst.alg.field;
        let a = crate::homology::varrho(&inst, &inst.units[0], P).unwrap();
        let coset = crate::hecke::coset_of_instance(&inst);
        let grid = CosetGrid::equal_radius(f, &coset, &prep.m_matrix, 4.0, P).unwrap();
        let s = Complex::from_f64(P, 2.25, 0.75);
        let mut checked = 0;
        let mut pts: Vec<Vec<FElem>> = Vec::new();
        grid.visit(|v, _| pts.push(grid.exact_x(f, &coset, v)));
        for x in pts.iter().take(60) {
            if x.iter().all(|c| c.is_zero()) {
                continue;
            }
            let xa = a.exact.row_vec_mul(f, x);
            // coset stability, exactly
            let mut xi = inst.alg.zero();
            for (c, mi) in xa.iter().zip(&inst.m) {
                xi = inst.alg.add(&xi, &inst.alg.scale(c, mi));
            }
            assert!(inst.coset_contains(&xi));
            let lhs = omega(f, &xa, &prep.m_matrix, &s, 2, P).unwrap();
            let rhs = omega(f, x, &prep.m_matrix, &s, 2, P).unwrap();
            let scale = rhs.abs().max(&Float::with_val(P, 1));
            assert!(lhs.dist(&rhs) < two_pow(8 - P as i64, P) * scale);
            checked += 1;
        }
        assert!(checked > 10);
    }

    #[test]
    fn repeated_matrix_tuple_vanishes() {
        // For 𝔄 = (I, I) the smallest-index rule selects the same column of
        // both copies, so det σ = 0 and ψ vanishes identically.
        let f = gauss();
        let id = FMatrix::identity(&f, 2, P);
        let tuple = Tuple::new(vec![id.clone(), id]);
        let poly = HomogPoly::one(2, P);
        for coords in [[1i64, 2], [0, 3], [5, 0]] {
            let x: Vec<FElem> = coords.iter().map(|&c| FElem::from_i64(c)).collect();
            let v = crate::cocycle::eval_psi(&f, &tuple, &poly, &x, P).unwrap();
            assert!(v.is_zero());
        }
    }

    #[test]
    fn real_s_gives_real_value_with_oracle() {
        // k = 0, s real, P = 1, tuple (I, J) with J the antidiagonal:
        // generic selection yields σ = I and ψ = 1/(x₁x₂); the offset
        // (1+i)/2 keeps both coordinates away from zero, and conjugation
        // maps the coset to itself, pairing terms into conjugates, so the
        // sum is real. Oracle at small R: brute-force double loop.
        let f = gauss();
        let coset = zi_coset_2d(("1/2", "1/2"), ("1/2", "1/2"));
        let m = CMatrix::identity(2, P);
        let id = FMatrix::identity(&f, 2, P);
        let anti = {
            use crate::extension::FMat;
            let a = vec![
                FElem::zero(),
                FElem::from_i64(1),
                FElem::from_i64(1),
                FElem::zero(),
            ];
            FMatrix::new(&f, FMat { n: 2, a }, P)
        };
        let tuple = Tuple::new(vec![id, anti]);
        let poly = HomogPoly::one(2, P);
        let s = Complex::from_f64(P, 2.5, 0.0);
        let v = eval_psi_sum(
            &f,
            &coset,
            &m,
            &tuple,
            &poly,
            &s,
            0,
            &TruncationParams::new(3.0, P),
        )
        .unwrap();
        assert!(v.terms_summed > 0);
        assert!(v.value.im.clone().abs() < two_pow(-90, P));

        // brute-force oracle over shifted Gaussian integers
        let mut oracle = Complex::zero(P);
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                for c in -4i64..=4 {
                    for d in -4i64..=4 {
                        let x1 = Complex::from_f64(P, a as f64 + 0.5, b as f64 + 0.5);
                        let x2 = Complex::from_f64(P, c as f64 + 0.5, d as f64 + 0.5);
                        if x1.norm_sqr().to_f64() > 9.0 || x2.norm_sqr().to_f64() > 9.0 {
                            continue;
                        }
                        let term = x1.mul(&x2).recip();
                        let ln = (x1.norm_sqr() * x2.norm_sqr()).ln();
                        let om = Complex {
                            re: -Float::with_val(P, &s.re * &ln),
                            im: Float::with_val(P, 0),
                        }
                        .exp();
                        oracle.add_assign(&term.mul(&om));
                    }
                }
            }
        }
        let scale = oracle.abs().max(&Float::with_val(P, 1));
        assert!(v.value.dist(&oracle) < two_pow(16 - P as i64, P) * scale);
    }
}
