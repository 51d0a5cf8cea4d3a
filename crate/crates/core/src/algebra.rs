//! Dirac/Clifford matrix sets in one and three spatial dimensions.
//!
//! Entries of the built-in representations lie in `{0, +-1, +-i}`, so every
//! matrix is kept twice: as an exact Gaussian-integer matrix used for the
//! algebraic identity checks, and as a floating point [`SpinMatrix`] used by
//! the operators.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest spinor size handled (Dirac spinors in 3D).
pub const MAX_SPINOR: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Minkowski metric `diag(1, -1, -1, -1)`.
pub fn metric(mu: usize, nu: usize) -> i64 {
    match (mu, nu) {
        (0, 0) => 1,
        (a, b) if a == b => -1,
        _ => 0,
    }
}

// ---------------------------------------------------------------------------
// Exact arithmetic
// ---------------------------------------------------------------------------

/// Complex number with integer parts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: Self = Self { re: 0, im: 0 };
    pub const ONE: Self = Self { re: 1, im: 0 };
    pub const I: Self = Self { re: 0, im: 1 };

    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// Max-norm, the entrywise deviation measure used in reports.
    pub fn max_abs(self) -> i64 {
        self.re.abs().max(self.im.abs())
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re as f64, self.im as f64)
    }
}

impl Add for GaussInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for GaussInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Mul for GaussInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Square matrix over Gaussian integers, at most 4x4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactMatrix {
    s: usize,
    m: [GaussInt; MAX_SPINOR * MAX_SPINOR],
}

impl ExactMatrix {
    pub fn zeros(s: usize) -> Self {
        assert!(s <= MAX_SPINOR);
        Self {
            s,
            m: [GaussInt::ZERO; MAX_SPINOR * MAX_SPINOR],
        }
    }

    pub fn identity(s: usize) -> Self {
        let mut out = Self::zeros(s);
        for i in 0..s {
            out.set(i, i, GaussInt::ONE);
        }
        out
    }

    pub fn from_rows(rows: &[&[GaussInt]]) -> Self {
        let mut out = Self::zeros(rows.len());
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rows.len());
            for (c, &v) in row.iter().enumerate() {
                out.set(r, c, v);
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.s
    }

    pub fn get(&self, r: usize, c: usize) -> GaussInt {
        self.m[r * MAX_SPINOR + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: GaussInt) {
        self.m[r * MAX_SPINOR + c] = v;
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = *self;
        for v in out.m.iter_mut() {
            *v = *v * GaussInt::new(k, 0);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.s);
        for r in 0..self.s {
            for c in 0..self.s {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// Block matrix `[[a, b], [c, d]]` from four equally sized blocks.
    pub fn blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let h = a.s;
        let mut out = Self::zeros(2 * h);
        for r in 0..h {
            for col in 0..h {
                out.set(r, col, a.get(r, col));
                out.set(r, col + h, b.get(r, col));
                out.set(r + h, col, c.get(r, col));
                out.set(r + h, col + h, d.get(r, col));
            }
        }
        out
    }

    pub fn max_abs(&self) -> i64 {
        self.m.iter().map(|v| v.max_abs()).max().unwrap_or(0)
    }

    pub fn to_spin(&self) -> SpinMatrix {
        let mut out = SpinMatrix::zeros(self.s);
        for r in 0..self.s {
            for c in 0..self.s {
                out.set(r, c, self.get(r, c).to_c64());
            }
        }
        out
    }
}

impl Add for ExactMatrix {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let mut out = self;
        for (a, b) in out.m.iter_mut().zip(o.m.iter()) {
            *a = *a + *b;
        }
        out
    }
}

impl Sub for ExactMatrix {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let mut out = self;
        for (a, b) in out.m.iter_mut().zip(o.m.iter()) {
            *a = *a - *b;
        }
        out
    }
}

impl Mul for ExactMatrix {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let s = self.s;
        let mut out = Self::zeros(s);
        for r in 0..s {
            for c in 0..s {
                let mut acc = GaussInt::ZERO;
                for k in 0..s {
                    acc = acc + self.get(r, k) * o.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Floating point spinor matrices
// ---------------------------------------------------------------------------

/// Dense complex matrix acting on spinor indices (size 2 or 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMatrix {
    s: usize,
    m: [C64; MAX_SPINOR * MAX_SPINOR],
}

impl SpinMatrix {
    pub fn zeros(s: usize) -> Self {
        assert!(s <= MAX_SPINOR);
        Self {
            s,
            m: [ZERO; MAX_SPINOR * MAX_SPINOR],
        }
    }

    pub fn identity(s: usize) -> Self {
        let mut out = Self::zeros(s);
        for i in 0..s {
            out.set(i, i, ONE);
        }
        out
    }

    pub fn size(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.m[r * MAX_SPINOR + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.m[r * MAX_SPINOR + c] = v;
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = *self;
        out.m.iter_mut().for_each(|v| *v *= k);
        out
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.s);
        for r in 0..self.s {
            for c in 0..self.s {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.s).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for r in 0..self.s {
            for c in 0..self.s {
                best = best.max(self.get(r, c).norm());
            }
        }
        best
    }

    /// `self * v` for a spinor stored in the first `s` entries of `v`.
    #[inline]
    pub fn apply(&self, v: &[C64]) -> [C64; MAX_SPINOR] {
        let mut out = [ZERO; MAX_SPINOR];
        for (r, o) in out.iter_mut().enumerate().take(self.s) {
            let mut acc = ZERO;
            for (c, &x) in v.iter().enumerate().take(self.s) {
                acc += self.m[r * MAX_SPINOR + c] * x;
            }
            *o = acc;
        }
        out
    }

    /// Applies in place to a contiguous spinor slice of length `s`.
    #[inline]
    pub fn apply_in_place(&self, v: &mut [C64]) {
        let out = self.apply(v);
        v[..self.s].copy_from_slice(&out[..self.s]);
    }

    pub fn is_hermitian_exact(&self) -> bool {
        *self == self.adjoint()
    }
}

impl Add for SpinMatrix {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let mut out = self;
        for (a, b) in out.m.iter_mut().zip(o.m.iter()) {
            *a += *b;
        }
        out
    }
}

impl Sub for SpinMatrix {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let mut out = self;
        for (a, b) in out.m.iter_mut().zip(o.m.iter()) {
            *a -= *b;
        }
        out
    }
}

impl Mul for SpinMatrix {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        assert_eq!(self.s, o.s);
        let s = self.s;
        let mut out = Self::zeros(s);
        for r in 0..s {
            for c in 0..s {
                let mut acc = ZERO;
                for k in 0..s {
                    acc += self.get(r, k) * o.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Dirac matrices
// ---------------------------------------------------------------------------

fn pauli(i: usize) -> ExactMatrix {
    let z = GaussInt::ZERO;
    let one = GaussInt::ONE;
    let i_ = GaussInt::I;
    match i {
        0 => ExactMatrix::from_rows(&[&[z, one], &[one, z]]),
        1 => ExactMatrix::from_rows(&[&[z, -i_], &[i_, z]]),
        2 => ExactMatrix::from_rows(&[&[one, z], &[z, -one]]),
        _ => unreachable!("pauli index"),
    }
}

/// Exact generators of a representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSet {
    pub alpha: Vec<ExactMatrix>,
    pub beta: ExactMatrix,
    pub sigma: Vec<ExactMatrix>,
}

impl ExactSet {
    /// `rho^0 = beta`, `rho^i = beta alpha^i`.
    pub fn rho(&self, mu: usize) -> ExactMatrix {
        if mu == 0 {
            self.beta
        } else {
            self.beta * self.alpha[mu - 1]
        }
    }
}

/// Dirac matrices in the Dirac-Pauli representation (3D) or the
/// `{sigma_1, sigma_3}` representation (1D).
#[derive(Debug, Clone, PartialEq)]
pub struct DiracMatrices {
    pub dim: usize,
    pub s: usize,
    pub alpha: Vec<SpinMatrix>,
    pub beta: SpinMatrix,
    pub rho0: SpinMatrix,
    pub rho: Vec<SpinMatrix>,
    /// Spin matrices `Sigma_i` (empty for `dim == 1`); spin is `(hbar/2) Sigma`.
    pub sigma: Vec<SpinMatrix>,
    exact: ExactSet,
}

impl DiracMatrices {
    pub fn build(dim: usize) -> Result<Self> {
        let exact = match dim {
            1 => ExactSet {
                alpha: vec![pauli(0)],
                beta: pauli(2),
                sigma: Vec::new(),
            },
            3 => {
                let z = ExactMatrix::zeros(2);
                let id = ExactMatrix::identity(2);
                let alpha = (0..3)
                    .map(|i| ExactMatrix::blocks(&z, &pauli(i), &pauli(i), &z))
                    .collect();
                let sigma = (0..3)
                    .map(|i| ExactMatrix::blocks(&pauli(i), &z, &z, &pauli(i)))
                    .collect();
                ExactSet {
                    alpha,
                    beta: ExactMatrix::blocks(&id, &z, &z, &id.scale(-1)),
                    sigma,
                }
            }
            other => return Err(Error::InvalidDimension(other)),
        };
        Ok(Self::from_exact(dim, exact))
    }

    fn from_exact(dim: usize, exact: ExactSet) -> Self {
        let s = exact.beta.size();
        let alpha: Vec<SpinMatrix> = exact.alpha.iter().map(ExactMatrix::to_spin).collect();
        let beta = exact.beta.to_spin();
        let rho = (1..=dim).map(|mu| exact.rho(mu).to_spin()).collect();
        let sigma = exact.sigma.iter().map(ExactMatrix::to_spin).collect();
        Self {
            dim,
            s,
            alpha,
            beta,
            rho0: beta,
            rho,
            sigma,
            exact,
        }
    }

    /// Copy with one diagonal sign of `beta` flipped. Negative control for the
    /// identity checks.
    pub fn with_corrupted_beta(&self) -> Self {
        let mut exact = self.exact.clone();
        let last = exact.beta.size() - 1;
        let v = exact.beta.get(last, last);
        exact.beta.set(last, last, -v);
        Self::from_exact(self.dim, exact)
    }

    pub fn exact(&self) -> &ExactSet {
        &self.exact
    }

    /// `rho^mu` for `mu` in `0..=dim`.
    pub fn rho_mu(&self, mu: usize) -> SpinMatrix {
        if mu == 0 {
            self.rho0
        } else {
            self.rho[mu - 1]
        }
    }

    /// Shared kernel of the Dirac Hamiltonian and the time operator:
    /// `sum_i alpha^i v_i + beta * diag`.
    pub fn dirac_form(&self, v: &[f64], diag: f64) -> SpinMatrix {
        let mut out = self.beta.scale_re(diag);
        for (a, &vi) in self.alpha.iter().zip(v) {
            out = out + a.scale_re(vi);
        }
        out
    }

    /// Exact check of `alpha^i alpha^j + alpha^j alpha^i = 2 delta_ij`,
    /// `alpha^i beta + beta alpha^i = 0`, `beta^2 = 1` and hermiticity.
    /// Returns the largest integer deviation.
    pub fn alpha_beta_deviation(&self) -> i64 {
        let e = &self.exact;
        let id = ExactMatrix::identity(self.s);
        let mut worst = (e.beta * e.beta - id).max_abs();
        worst = worst.max((e.beta - e.beta.adjoint()).max_abs());
        for (i, ai) in e.alpha.iter().enumerate() {
            worst = worst.max((*ai - ai.adjoint()).max_abs());
            worst = worst.max((*ai * e.beta + e.beta * *ai).max_abs());
            for (j, aj) in e.alpha.iter().enumerate() {
                let target = if i == j { id.scale(2) } else { ExactMatrix::zeros(self.s) };
                worst = worst.max((*ai * *aj + *aj * *ai - target).max_abs());
            }
        }
        for sg in &e.sigma {
            worst = worst.max((*sg - sg.adjoint()).max_abs());
            worst = worst.max((*sg * *sg - id).max_abs());
        }
        worst
    }
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AnticommutatorEntry {
    pub mu: usize,
    pub nu: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnticommutatorReport {
    pub entries: Vec<AnticommutatorEntry>,
}

impl AnticommutatorReport {
    pub fn max_deviation(&self) -> f64 {
        self.entries.iter().map(|e| e.deviation).fold(0.0, f64::max)
    }
}

/// Deviation of `{rho^mu, rho^nu}` from `2 eta^{mu nu} I` for every index
/// pair, evaluated in exact arithmetic.
pub fn anticommutator_table(mats: &DiracMatrices) -> AnticommutatorReport {
    let e = mats.exact();
    let id = ExactMatrix::identity(mats.s);
    let mut entries = Vec::with_capacity((mats.dim + 1).pow(2));
    for mu in 0..=mats.dim {
        for nu in 0..=mats.dim {
            let (a, b) = (e.rho(mu), e.rho(nu));
            let dev = (a * b + b * a - id.scale(2 * metric(mu, nu))).max_abs();
            entries.push(AnticommutatorEntry {
                mu,
                nu,
                deviation: dev as f64,
            });
        }
    }
    AnticommutatorReport { entries }
}

/// Max-entry magnitude of
/// `[rho^mu v_mu + k][rho^nu v_nu - k] - (v_mu v^mu - k^2) I`.
///
/// `v` holds contravariant components `(v0, v1, ..)`. With `(p0, p)` and
/// `k = m0 c` this checks the momentum-shell factorization; with `(x0, x)` and
/// `k = s0` the interval factorization.
pub fn factorization_residual(mats: &DiracMatrices, k: f64, v: &[f64]) -> Result<f64> {
    if v.len() != mats.dim + 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} components, got {}",
            mats.dim + 1,
            v.len()
        )));
    }
    if !k.is_finite() || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("factorization input"));
    }
    let id = SpinMatrix::identity(mats.s);
    let mut slash = mats.rho0.scale_re(v[0]);
    for i in 1..=mats.dim {
        slash = slash - mats.rho_mu(i).scale_re(v[i]);
    }
    let invariant = v[0] * v[0] - v[1..].iter().map(|x| x * x).sum::<f64>();
    let lhs = (slash + id.scale_re(k)) * (slash - id.scale_re(k));
    Ok((lhs - id.scale_re(invariant - k * k)).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsupported_dimension() {
        for d in [0, 2, 4] {
            assert!(matches!(DiracMatrices::build(d), Err(Error::InvalidDimension(_))));
        }
    }

    #[test]
    fn one_dimensional_pauli_pair() {
        let m = DiracMatrices::build(1).unwrap();
        assert_eq!(m.s, 2);
        let id = SpinMatrix::identity(2);
        assert_eq!(m.beta * m.beta, id);
        assert_eq!((m.alpha[0] * m.beta + m.beta * m.alpha[0]).max_abs(), 0.0);
        let t = anticommutator_table(&m);
        assert_eq!(t.entries.len(), 4);
        assert_eq!(t.max_deviation(), 0.0);
    }

    #[test]
    fn three_dimensional_clifford_table() {
        let m = DiracMatrices::build(3).unwrap();
        let t = anticommutator_table(&m);
        assert_eq!(t.entries.len(), 16);
        assert!(t.entries.iter().all(|e| e.deviation == 0.0));
        assert_eq!(m.alpha_beta_deviation(), 0);
    }

    #[test]
    fn beta_spectrum_is_diagonal_signs() {
        let m = DiracMatrices::build(3).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m.beta.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(m.beta.get(r, c), ZERO);
                }
            }
        }
    }

    #[test]
    fn generators_are_hermitian() {
        for d in [1, 3] {
            let m = DiracMatrices::build(d).unwrap();
            assert!(m.beta.is_hermitian_exact());
            assert!(m.alpha.iter().all(SpinMatrix::is_hermitian_exact));
            assert!(m.sigma.iter().all(SpinMatrix::is_hermitian_exact));
        }
    }

    #[test]
    fn alpha_products_generate_spin() {
        // alpha_i alpha_j = delta_ij + i eps_ijk Sigma_k
        let m = DiracMatrices::build(3).unwrap();
        let i = C64::new(0.0, 1.0);
        let d = m.alpha[0] * m.alpha[1] - m.sigma[2].scale(i);
        assert_eq!(d.max_abs(), 0.0);
        let d = m.alpha[1] * m.alpha[2] - m.sigma[0].scale(i);
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn corrupted_beta_is_detected() {
        for d in [1, 3] {
            let m = DiracMatrices::build(d).unwrap().with_corrupted_beta();
            assert!(anticommutator_table(&m).max_deviation() > 0.0);
            assert!(m.alpha_beta_deviation() > 0);
        }
    }

    #[test]
    fn rest_frame_factorization_vanishes() {
        let m = DiracMatrices::build(3).unwrap();
        for m0 in [0.1, 1.0, 3.7] {
            let r = factorization_residual(&m, m0, &[m0, 0.0, 0.0, 0.0]).unwrap();
            assert!(r < 1e-13);
        }
        let tau0 = 2.0 * std::f64::consts::PI;
        let r = factorization_residual(&m, tau0, &[tau0, 0.0, 0.0, 0.0]).unwrap();
        assert!(r < 1e-13);
    }

    #[test]
    fn factorization_rejects_bad_input() {
        let m = DiracMatrices::build(1).unwrap();
        assert!(factorization_residual(&m, 1.0, &[1.0]).is_err());
        assert!(factorization_residual(&m, 1.0, &[f64::NAN, 0.0]).is_err());
    }
}
