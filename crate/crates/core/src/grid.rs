//! Position/momentum lattices, spinor fields, and the canonical operators.
//!
//! Positions are `x_j = -L/2 + j dx` for `j in 0..n` on every axis, so the
//! origin is always a lattice point. Momenta are `p_k = 2 pi k / L` with the
//! signed mode index `k in [-n/2, n/2)`; the unpaired Nyquist mode carries
//! `k = -n/2`. Momentum amplitudes are stored in FFT order.
//!
//! The transforms are continuum-normalized:
//!
//! ```text
//! Phi(p_k) = (dx / sqrt(2 pi))^dim  sum_j exp(-i p_k . x_j) Psi(x_j)
//! Psi(x_j) = (dp / sqrt(2 pi))^dim  sum_k exp(+i p_k . x_j) Phi(p_k)
//! ```
//!
//! and norms carry the cell volume (`dx^dim` or `dp^dim`), which makes them
//! identical in both representations.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{C64, MAX_SPINOR};
use crate::error::{Error, Result};
use crate::fft::{self, Direction};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Tail-mass tolerance for the boundary-safety precondition.
pub const BOUNDARY_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

/// Lattice geometry shared by both representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, extent: f64) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(Error::InvalidDimension(dim));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "extent must be positive and finite, got {extent}"
            )));
        }
        Ok(Self { dim, n, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / self.extent
    }

    /// Total number of lattice points, `n^dim`.
    pub fn points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Cell volume used by the inner product in the given representation.
    pub fn cell(&self, rep: Representation) -> f64 {
        match rep {
            Representation::Position => self.dx(),
            Representation::Momentum => self.dp(),
        }
        .powi(self.dim as i32)
    }

    /// Coordinate of lattice index `j` along an axis.
    #[inline]
    pub fn position(&self, j: usize) -> f64 {
        -0.5 * self.extent + j as f64 * self.dx()
    }

    /// Signed mode number of FFT-order index `k`.
    #[inline]
    pub fn mode_number(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Momentum of FFT-order index `k` along an axis.
    #[inline]
    pub fn momentum(&self, k: usize) -> f64 {
        self.mode_number(k) as f64 * self.dp()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.position(j)).collect()
    }

    /// Momentum lattice in ascending order, `-n/2 .. n/2 - 1` times `dp`.
    pub fn momenta_sorted(&self) -> Vec<f64> {
        let h = self.n as i64 / 2;
        (-h..h).map(|k| k as f64 * self.dp()).collect()
    }

    /// FFT-order index of the `i`-th entry of [`Self::momenta_sorted`].
    pub fn sorted_to_fft(&self, i: usize) -> usize {
        (i + self.n / 2) % self.n
    }

    /// Per-axis indices of a flat point index (axis 0 slowest).
    #[inline]
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.dim).rev() {
            out[a] = flat % self.n;
            flat /= self.n;
        }
        out
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Position vector of a flat point index (unused axes are zero).
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = self.position(idx[a]);
        }
        out
    }

    /// Momentum vector of a flat FFT-order mode index.
    #[inline]
    pub fn mode(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = self.momentum(idx[a]);
        }
        out
    }

    /// Coordinate of a flat index along one axis in a representation.
    #[inline]
    pub fn coordinate(&self, rep: Representation, flat: usize, axis: usize) -> f64 {
        let j = self.unflatten(flat)[axis];
        match rep {
            Representation::Position => self.position(j),
            Representation::Momentum => self.momentum(j),
        }
    }

    /// Lattice cells counted as the boundary band: `10` cells, but never
    /// more than a tenth of the box.
    pub fn boundary_band(&self) -> usize {
        10.min(self.n / 10).max(1)
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        Ok(())
    }
}

/// Complex spinor amplitudes on a lattice, tagged by representation.
///
/// Layout is point-major: `data[point * s + component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    rep: Representation,
    grid: GridSpec,
    s: usize,
    data: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: GridSpec, s: usize, rep: Representation) -> Self {
        assert!(s == 1 || s == 2 || s == MAX_SPINOR, "spinor size {s}");
        Self {
            rep,
            grid,
            s,
            data: vec![ZERO; grid.points() * s],
        }
    }

    pub fn from_data(grid: GridSpec, s: usize, rep: Representation, data: Vec<C64>) -> Result<Self> {
        if !(s == 1 || s == 2 || s == MAX_SPINOR) {
            return Err(Error::InvalidParameter(format!("spinor size {s}")));
        }
        if data.len() != grid.points() * s {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                grid.points() * s,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("field data"));
        }
        Ok(Self { rep, grid, s, data })
    }

    /// Samples `f(r)` at every position lattice point.
    pub fn from_fn(grid: GridSpec, s: usize, f: impl Fn(&[f64; 3]) -> [C64; MAX_SPINOR]) -> Self {
        let mut out = Self::zeros(grid, s, Representation::Position);
        for (pt, chunk) in out.data.chunks_mut(s).enumerate() {
            let v = f(&grid.point(pt));
            chunk.copy_from_slice(&v[..s]);
        }
        out
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spinor_size(&self) -> usize {
        self.s
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Spinor at a flat lattice index.
    pub fn spinor(&self, flat: usize) -> &[C64] {
        &self.data[flat * self.s..(flat + 1) * self.s]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.cell(self.rep) * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.data.iter_mut().for_each(|z| *z /= n);
        }
        self
    }

    /// `<self, other>` with the lattice weight; `other` is converted to this
    /// field's representation if needed.
    pub fn inner(&self, other: &SpinorField) -> C64 {
        assert_eq!(self.s, other.s);
        let other = other.to_rep(self.rep);
        let acc: C64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        acc * self.grid.cell(self.rep)
    }

    /// `||self - other||` in this field's representation.
    pub fn distance(&self, other: &SpinorField) -> f64 {
        let other = other.to_rep(self.rep);
        let acc: f64 = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (acc * self.grid.cell(self.rep)).sqrt()
    }

    pub fn scaled(&self, k: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= k);
        out
    }

    /// `self + k * other`, in this field's representation.
    pub fn add_scaled(&self, k: C64, other: &SpinorField) -> Self {
        let other = other.to_rep(self.rep);
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(other.data.iter())
            .for_each(|(a, b)| *a += k * b);
        out
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    pub fn to_rep(&self, rep: Representation) -> SpinorField {
        match (self.rep, rep) {
            (a, b) if a == b => self.clone(),
            (Representation::Position, Representation::Momentum) => self.transformed(Direction::Forward),
            _ => self.transformed(Direction::Inverse),
        }
    }

    pub fn to_momentum(&self) -> Result<SpinorField> {
        if self.rep != Representation::Position {
            return Err(Error::RepresentationMismatch {
                expected: Representation::Position,
                found: self.rep,
            });
        }
        Ok(self.transformed(Direction::Forward))
    }

    pub fn to_position(&self) -> Result<SpinorField> {
        if self.rep != Representation::Momentum {
            return Err(Error::RepresentationMismatch {
                expected: Representation::Momentum,
                found: self.rep,
            });
        }
        Ok(self.transformed(Direction::Inverse))
    }

    fn transformed(&self, dir: Direction) -> SpinorField {
        let g = self.grid;
        let (n, dim, s) = (g.n, g.dim, self.s);
        let npts = g.points();
        let plan = fft::plan(n, dir);
        let (cell, target) = match dir {
            Direction::Forward => (g.dx(), Representation::Momentum),
            Direction::Inverse => (g.dp(), Representation::Position),
        };
        let norm = (cell / (2.0 * PI).sqrt()).powi(dim as i32);

        // The origin offset x_0 = -L/2 contributes exp(+-i p_k x_0) = (-1)^k.
        let sign = |flat: usize| -> f64 {
            let parity: usize = g.unflatten(flat)[..dim].iter().sum();
            if parity % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        };

        let mut comps: Vec<Vec<C64>> = (0..s)
            .map(|c| (0..npts).map(|pt| self.data[pt * s + c]).collect())
            .collect();
        comps.par_iter_mut().for_each(|buf| {
            if dir == Direction::Inverse {
                for (pt, z) in buf.iter_mut().enumerate() {
                    *z *= sign(pt);
                }
            }
            fft::transform(buf, n, dim, &plan);
            for (pt, z) in buf.iter_mut().enumerate() {
                let k = if dir == Direction::Forward { norm * sign(pt) } else { norm };
                *z *= k;
            }
        });

        let mut data = vec![ZERO; npts * s];
        for (c, buf) in comps.iter().enumerate() {
            for (pt, z) in buf.iter().enumerate() {
                data[pt * s + c] = *z;
            }
        }
        SpinorField {
            rep: target,
            grid: g,
            s,
            data,
        }
    }

    /// Momentum amplitudes re-indexed so every axis runs in ascending `p`.
    pub fn momentum_data_sorted(&self) -> Vec<C64> {
        let f = self.to_rep(Representation::Momentum);
        let g = self.grid;
        let mut out = vec![ZERO; f.data.len()];
        for sorted in 0..g.points() {
            let idx = g.unflatten(sorted);
            let mut fidx = [0usize; 3];
            for a in 0..g.dim {
                fidx[a] = g.sorted_to_fft(idx[a]);
            }
            let src = g.flatten(&fidx);
            out[sorted * self.s..(sorted + 1) * self.s].copy_from_slice(f.spinor(src));
        }
        out
    }

    /// Multiplies every spinor by a scalar depending on its lattice index,
    /// in representation `rep`, and returns in the caller's representation.
    pub fn map_diagonal(&self, rep: Representation, k: impl Fn(usize) -> C64 + Sync) -> SpinorField {
        let mut f = self.to_rep(rep);
        let s = self.s;
        f.data.par_chunks_mut(s).enumerate().for_each(|(i, chunk)| {
            let v = k(i);
            chunk.iter_mut().for_each(|z| *z *= v);
        });
        f.to_rep(self.rep)
    }

    /// Fraction of the norm lying within the boundary band of any axis.
    pub fn boundary_tail(&self) -> f64 {
        let f = self.to_rep(Representation::Position);
        let g = self.grid;
        let band = g.boundary_band();
        let mut tail = 0.0;
        let mut total = 0.0;
        for (pt, chunk) in f.data.chunks(self.s).enumerate() {
            let w: f64 = chunk.iter().map(|z| z.norm_sqr()).sum();
            total += w;
            let idx = g.unflatten(pt);
            if idx[..g.dim].iter().any(|&j| j < band || j >= g.n - band) {
                tail += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Fails with a diagnostic unless the field is boundary-safe.
    pub fn check_boundary(&self) -> Result<()> {
        let tail = self.boundary_tail();
        if tail < BOUNDARY_TOLERANCE {
            Ok(())
        } else {
            Err(Error::BoundaryUnsafe {
                tail_mass: tail,
                band_cells: self.grid.boundary_band(),
                tolerance: BOUNDARY_TOLERANCE,
            })
        }
    }
}

/// Normalized Gaussian packet with a constant spinor:
/// `prod_a exp(-(x_a - c_a)^2 / (2 w^2)) exp(i pbar . x) * spinor`.
///
/// `width` is the standard deviation of the amplitude envelope, so
/// `Delta x = width / sqrt(2)` and `Delta p = 1 / (sqrt(2) width)` per axis.
pub fn gaussian_packet(grid: GridSpec, center: &[f64], width: f64, pbar: &[f64], spinor: &[C64]) -> SpinorField {
    let dim = grid.dim();
    let s = spinor.len();
    let mut sp = [ZERO; MAX_SPINOR];
    sp[..s].copy_from_slice(spinor);
    SpinorField::from_fn(grid, s, |r| {
        let mut arg = 0.0;
        let mut phase = 0.0;
        for a in 0..dim {
            let d = r[a] - center.get(a).copied().unwrap_or(0.0);
            arg += d * d / (2.0 * width * width);
            phase += pbar.get(a).copied().unwrap_or(0.0) * r[a];
        }
        let amp = C64::from_polar((-arg).exp(), phase);
        let mut out = [ZERO; MAX_SPINOR];
        for c in 0..s {
            out[c] = amp * sp[c];
        }
        out
    })
    .normalized()
}

/// Position operator along `axis`: exact multiplication in position space.
pub fn apply_x(f: &SpinorField, axis: usize) -> Result<SpinorField> {
    let g = *f.grid();
    g.check_axis(axis)?;
    Ok(f.map_diagonal(Representation::Position, |pt| {
        C64::new(g.coordinate(Representation::Position, pt, axis), 0.0)
    }))
}

/// Momentum operator along `axis`: exact multiplication in momentum space.
pub fn apply_p(f: &SpinorField, axis: usize) -> Result<SpinorField> {
    let g = *f.grid();
    g.check_axis(axis)?;
    Ok(f.map_diagonal(Representation::Momentum, |k| {
        C64::new(g.coordinate(Representation::Momentum, k, axis), 0.0)
    }))
}

/// Translation `exp(-i alpha . p / hbar) f`, applied as a momentum-space phase.
pub fn shift(f: &SpinorField, alpha: &[f64]) -> SpinorField {
    let g = *f.grid();
    f.map_diagonal(Representation::Momentum, |k| {
        let p = g.mode(k);
        let ph: f64 = (0..g.dim()).map(|a| p[a] * alpha.get(a).copied().unwrap_or(0.0)).sum();
        C64::from_polar(1.0, -ph)
    })
}

/// Residuals of the canonical commutators on a test state, each relative to
/// `||f||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorResiduals {
    /// `||[x_i, p_j] f - i hbar delta_ij f||`
    pub xp: f64,
    /// `||[x_i, x_j] f||`
    pub xx: f64,
    /// `||[p_i, p_j] f||`
    pub pp: f64,
}

pub fn commutator_xp_residual(f: &SpinorField, i: usize, j: usize) -> Result<CommutatorResiduals> {
    let g = f.grid();
    g.check_axis(i)?;
    g.check_axis(j)?;
    f.check_boundary()?;
    let norm = f.norm();
    let xp = apply_x(&apply_p(f, j)?, i)?;
    let px = apply_p(&apply_x(f, i)?, j)?;
    let delta = if i == j { 1.0 } else { 0.0 };
    let xp_res = xp.sub(&px).add_scaled(C64::new(0.0, -delta), f).norm() / norm;

    let xx = apply_x(&apply_x(f, j)?, i)?.sub(&apply_x(&apply_x(f, i)?, j)?);
    let pp = apply_p(&apply_p(f, j)?, i)?.sub(&apply_p(&apply_p(f, i)?, j)?);
    Ok(CommutatorResiduals {
        xp: xp_res,
        xx: xx.norm() / norm,
        pp: pp.norm() / norm,
    })
}

/// Applies the scalar `r.p - p.r = sum_i [x_i, p_i]`, which equals
/// `i hbar * dim` on boundary-safe states.
pub fn apply_rp_minus_pr(f: &SpinorField) -> Result<SpinorField> {
    let g = f.grid();
    let mut acc = SpinorField::zeros(*g, f.spinor_size(), f.rep());
    for a in 0..g.dim() {
        let xp = apply_x(&apply_p(f, a)?, a)?;
        let px = apply_p(&apply_x(f, a)?, a)?;
        acc = acc.add_scaled(C64::new(1.0, 0.0), &xp.sub(&px));
    }
    Ok(acc)
}
