//! The Dirac Hamiltonian `H_D = c alpha.p + beta m0 c^2`, the time operator
//! `T = alpha.r / c + beta tau0`, and the spin-orbit constant of motion `K`.
//!
//! Both `H_D(p)` and `T(r)` are instances of one kernel, `alpha.v + beta d`,
//! whose eigenvalues are `+-sqrt(v^2 + d^2)` with multiplicity `s/2` and
//! whose eigenvectors are known in closed form. `H_D` is applied mode by mode
//! in momentum space, `T` point by point in position space.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{DiracMatrices, SpinMatrix, C64, MAX_SPINOR};
use crate::error::{Error, Result};
use crate::grid::{self, GridSpec, Representation, SpinorField};
use crate::params::PhysParams;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// `c alpha.p + beta m0 c^2` at one momentum.
pub fn hd_mode_matrix(mats: &DiracMatrices, params: &PhysParams, p: &[f64]) -> SpinMatrix {
    let cp: Vec<f64> = p.iter().map(|x| params.c * x).collect();
    mats.dirac_form(&cp, params.rest_energy())
}

/// `alpha.r / c + beta tau0` at one position.
pub fn t_point_matrix(mats: &DiracMatrices, params: &PhysParams, r: &[f64]) -> SpinMatrix {
    let rc: Vec<f64> = r.iter().map(|x| x / params.c).collect();
    mats.dirac_form(&rc, params.tau0)
}

/// Closed-form eigen decomposition of `alpha.v + beta d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    /// `sqrt(v^2 + d^2)`
    pub level: f64,
    /// Eigenvalue/eigenvector pairs: the `s/2` positive-branch vectors first
    /// (spin up, then spin down along axis 3), then the negative branch.
    pub pairs: Vec<(f64, [C64; MAX_SPINOR])>,
}

/// `sigma.v` as a 2x2 block (or the scalar `v` when `dim == 1`).
fn sigma_dot(dim: usize, v: &[f64]) -> [[C64; 2]; 2] {
    if dim == 1 {
        return [[C64::new(v[0], 0.0), ZERO], [ZERO, ZERO]];
    }
    [
        [C64::new(v[2], 0.0), C64::new(v[0], -v[1])],
        [C64::new(v[0], v[1]), C64::new(-v[2], 0.0)],
    ]
}

/// Analytic eigenvectors of the shared kernel. `d` must be non-negative.
pub fn dirac_eigensystem(mats: &DiracMatrices, v: &[f64], d: f64) -> Eigensystem {
    let dim = mats.dim;
    let s = mats.s;
    let h = s / 2;
    let v2: f64 = v[..dim].iter().map(|x| x * x).sum();
    let level = (v2 + d * d).sqrt();
    let mut pairs = Vec::with_capacity(s);

    if level + d == 0.0 {
        // Massless zero mode: the kernel vanishes, pick the standard basis.
        for b in 0..s {
            let mut e = [ZERO; MAX_SPINOR];
            e[b] = ONE;
            pairs.push((0.0, e));
        }
        return Eigensystem { level, pairs };
    }

    let sd = sigma_dot(dim, v);
    let norm = ((level + d) / (2.0 * level)).sqrt();
    let k = 1.0 / (level + d);
    for sign in [1.0, -1.0] {
        for spin in 0..h {
            let mut chi = [ZERO; 2];
            chi[spin] = ONE;
            let mut lower = [ZERO; 2];
            for (r, l) in lower.iter_mut().enumerate().take(h) {
                for (c, ch) in chi.iter().enumerate().take(h) {
                    *l += sd[r][c] * ch * k;
                }
            }
            let mut e = [ZERO; MAX_SPINOR];
            for i in 0..h {
                if sign > 0.0 {
                    e[i] = chi[i] * norm;
                    e[i + h] = lower[i] * norm;
                } else {
                    e[i] = -lower[i] * norm;
                    e[i + h] = chi[i] * norm;
                }
            }
            pairs.push((sign * level, e));
        }
    }
    Eigensystem { level, pairs }
}

/// `(E I + H) / 2E` for the kernel `alpha.v + beta d` (branch `+1`) or
/// `(E I - H) / 2E` (branch `-1`).
fn branch_projector(mats: &DiracMatrices, v: &[f64], d: f64, branch: f64) -> SpinMatrix {
    let hm = mats.dirac_form(v, d);
    let e = hm_level(mats.dim, v, d);
    let id = SpinMatrix::identity(mats.s);
    if e == 0.0 {
        return id.scale_re(0.5);
    }
    (id.scale_re(e) + hm.scale_re(branch)).scale_re(0.5 / e)
}

fn hm_level(dim: usize, v: &[f64], d: f64) -> f64 {
    (v[..dim].iter().map(|x| x * x).sum::<f64>() + d * d).sqrt()
}

/// Positive-energy projector `Lambda_+(p) = (E(p) I + H_D(p)) / (2 E(p))`.
pub fn positive_energy_projector(mats: &DiracMatrices, params: &PhysParams, p: &[f64]) -> SpinMatrix {
    let cp: Vec<f64> = p.iter().map(|x| params.c * x).collect();
    branch_projector(mats, &cp, params.rest_energy(), 1.0)
}

/// Negative-energy projector `Lambda_-(p) = I - Lambda_+(p)`.
pub fn negative_energy_projector(mats: &DiracMatrices, params: &PhysParams, p: &[f64]) -> SpinMatrix {
    let cp: Vec<f64> = p.iter().map(|x| params.c * x).collect();
    branch_projector(mats, &cp, params.rest_energy(), -1.0)
}

/// `exp(-i theta K)` for `K = alpha.v + beta d`, i.e.
/// `exp(-i theta E) Lambda_+ + exp(+i theta E) Lambda_-`.
pub fn kernel_exponential(mats: &DiracMatrices, v: &[f64], d: f64, theta: f64) -> SpinMatrix {
    let hm = mats.dirac_form(v, d);
    let e = hm_level(mats.dim, v, d);
    let (sin, cos) = (e * theta).sin_cos();
    let sinc = if e == 0.0 { theta } else { sin / e };
    SpinMatrix::identity(mats.s).scale_re(cos) - hm.scale(C64::new(0.0, sinc))
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorTag {
    #[serde(rename = "H_D")]
    Hamiltonian,
    #[serde(rename = "T")]
    Time,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumLevel {
    /// Momentum (for `H_D`) or position (for `T`) of the lattice site.
    pub coordinate: [f64; 3],
    /// Positive branch value; the negative branch is its mirror.
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub operator: OperatorTag,
    pub levels: Vec<SpectrumLevel>,
    /// Each level is degenerate `s/2` times per branch.
    pub multiplicity: usize,
    pub min_positive: f64,
    pub max_negative: f64,
    pub gap: f64,
}

impl SpectrumReport {
    fn from_levels(operator: OperatorTag, levels: Vec<SpectrumLevel>, s: usize) -> Self {
        let min_positive = levels.iter().map(|l| l.value).fold(f64::INFINITY, f64::min);
        Self {
            operator,
            levels,
            multiplicity: s / 2,
            min_positive,
            max_negative: -min_positive,
            gap: 2.0 * min_positive,
        }
    }

    /// All branch values `+-level`, each listed once.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().flat_map(|l| [l.value, -l.value])
    }
}

/// `+-E(p)` over the momentum lattice with `E(p) = sqrt((c p)^2 + (m0 c^2)^2)`.
/// Accepts `m0 == 0` as the massless limit.
pub fn dirac_spectrum(grid: &GridSpec, m0: f64, c: f64) -> SpectrumReport {
    let rest = m0 * c * c;
    let levels = (0..grid.points())
        .map(|k| {
            let p = grid.mode(k);
            let p2: f64 = p.iter().map(|x| x * x).sum();
            SpectrumLevel {
                coordinate: p,
                value: (c * c * p2 + rest * rest).sqrt(),
            }
        })
        .collect();
    SpectrumReport::from_levels(OperatorTag::Hamiltonian, levels, spinor_size(grid.dim()))
}

/// `+-tau(r)` over the position lattice with `tau(r) = sqrt((r/c)^2 + tau0^2)`.
pub fn time_spectrum(grid: &GridSpec, tau0: f64, c: f64) -> SpectrumReport {
    let levels = (0..grid.points())
        .map(|j| {
            let r = grid.point(j);
            let r2: f64 = r.iter().map(|x| x * x).sum();
            SpectrumLevel {
                coordinate: r,
                value: (r2 / (c * c) + tau0 * tau0).sqrt(),
            }
        })
        .collect();
    SpectrumReport::from_levels(OperatorTag::Time, levels, spinor_size(grid.dim()))
}

pub fn spectrum(tag: OperatorTag, grid: &GridSpec, params: &PhysParams) -> SpectrumReport {
    match tag {
        OperatorTag::Hamiltonian => dirac_spectrum(grid, params.m0, params.c),
        OperatorTag::Time => time_spectrum(grid, params.tau0, params.c),
    }
}

pub fn spinor_size(dim: usize) -> usize {
    if dim == 1 {
        2
    } else {
        4
    }
}

// ---------------------------------------------------------------------------
// Operators on fields
// ---------------------------------------------------------------------------

/// Matrices and parameters of one free Dirac particle.
#[derive(Debug, Clone)]
pub struct DiracSystem {
    pub mats: DiracMatrices,
    pub params: PhysParams,
}

impl DiracSystem {
    pub fn new(dim: usize, m0: f64) -> Result<Self> {
        Ok(Self {
            mats: DiracMatrices::build(dim)?,
            params: PhysParams::new(m0)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.mats.dim
    }

    pub fn check_field(&self, f: &SpinorField) -> Result<()> {
        if f.grid().dim() != self.mats.dim {
            return Err(Error::InvalidParameter(format!(
                "field dimension {} does not match operator dimension {}",
                f.grid().dim(),
                self.mats.dim
            )));
        }
        if f.spinor_size() != self.mats.s {
            return Err(Error::InvalidParameter(format!(
                "spinor size {} does not match {}",
                f.spinor_size(),
                self.mats.s
            )));
        }
        Ok(())
    }

    fn require_3d(&self) -> Result<()> {
        if self.dim() != 3 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        Ok(())
    }

    pub fn hd_matrix(&self, p: &[f64]) -> SpinMatrix {
        hd_mode_matrix(&self.mats, &self.params, p)
    }

    pub fn t_matrix(&self, r: &[f64]) -> SpinMatrix {
        t_point_matrix(&self.mats, &self.params, r)
    }

    /// Applies a lattice-site dependent spinor matrix in `rep`, returning in
    /// the caller's representation.
    pub fn map_local(
        &self,
        f: &SpinorField,
        rep: Representation,
        m: impl Fn(usize) -> SpinMatrix + Sync,
    ) -> SpinorField {
        let mut g = f.to_rep(rep);
        let s = f.spinor_size();
        g.data_mut()
            .par_chunks_mut(s)
            .enumerate()
            .for_each(|(i, chunk)| m(i).apply_in_place(chunk));
        g.to_rep(f.rep())
    }

    /// Applies a constant spinor matrix; commutes with the transforms, so it
    /// is applied in the field's own representation.
    pub fn apply_constant(&self, f: &SpinorField, m: &SpinMatrix) -> SpinorField {
        self.map_local(f, f.rep(), |_| *m)
    }

    pub fn apply_h(&self, f: &SpinorField) -> SpinorField {
        let g = *f.grid();
        self.map_local(f, Representation::Momentum, |k| self.hd_matrix(&g.mode(k)[..g.dim()]))
    }

    pub fn apply_t(&self, f: &SpinorField) -> SpinorField {
        let g = *f.grid();
        self.map_local(f, Representation::Position, |j| self.t_matrix(&g.point(j)[..g.dim()]))
    }

    pub fn apply_beta(&self, f: &SpinorField) -> SpinorField {
        self.apply_constant(f, &self.mats.beta)
    }

    pub fn apply_alpha(&self, f: &SpinorField, axis: usize) -> Result<SpinorField> {
        let a = self.mats.alpha.get(axis).ok_or(Error::AxisOutOfRange {
            axis,
            dim: self.dim(),
        })?;
        Ok(self.apply_constant(f, a))
    }

    /// `c^2 p^2 + (m0 c^2)^2`, the quadratic shell operator.
    pub fn apply_shell(&self, f: &SpinorField) -> SpinorField {
        let g = *f.grid();
        let (c, rest) = (self.params.c, self.params.rest_energy());
        f.map_diagonal(Representation::Momentum, |k| {
            let p2: f64 = g.mode(k).iter().map(|x| x * x).sum();
            C64::new(c * c * p2 + rest * rest, 0.0)
        })
    }

    /// `r^2 / c^2 + tau0^2`, the quadratic interval operator.
    pub fn apply_interval(&self, f: &SpinorField) -> SpinorField {
        let g = *f.grid();
        let (c, tau0) = (self.params.c, self.params.tau0);
        f.map_diagonal(Representation::Position, |j| {
            let r2: f64 = g.point(j).iter().map(|x| x * x).sum();
            C64::new(r2 / (c * c) + tau0 * tau0, 0.0)
        })
    }

    /// Orbital angular momentum `l_i = eps_ijk x_j p_k`.
    pub fn apply_orbital_l(&self, f: &SpinorField, axis: usize) -> Result<SpinorField> {
        self.require_3d()?;
        self.check_field(f)?;
        if axis >= 3 {
            return Err(Error::AxisOutOfRange { axis, dim: 3 });
        }
        let (j, k) = ((axis + 1) % 3, (axis + 2) % 3);
        let a = grid::apply_x(&grid::apply_p(f, k)?, j)?;
        let b = grid::apply_x(&grid::apply_p(f, j)?, k)?;
        Ok(a.sub(&b))
    }

    /// `Sigma.l`, i.e. `2 s.l / hbar` with `s = (hbar/2) Sigma`.
    pub fn apply_sigma_l(&self, f: &SpinorField) -> Result<SpinorField> {
        self.require_3d()?;
        let mut acc = SpinorField::zeros(*f.grid(), f.spinor_size(), f.rep());
        for i in 0..3 {
            let l = self.apply_orbital_l(f, i)?;
            acc = acc.add_scaled(ONE, &self.apply_constant(&l, &self.mats.sigma[i]));
        }
        Ok(acc)
    }

    /// `s.l` in units of `hbar^2`.
    pub fn apply_spin_orbit(&self, f: &SpinorField) -> Result<SpinorField> {
        Ok(self.apply_sigma_l(f)?.scaled(C64::new(0.5 * self.params.hbar, 0.0)))
    }

    /// `K = beta (2 s.l / hbar^2 + 1)`.
    pub fn apply_k(&self, f: &SpinorField) -> Result<SpinorField> {
        let inner = self.apply_sigma_l(f)?.add_scaled(ONE, f);
        Ok(self.apply_beta(&inner))
    }

    /// `||[K, H_D] f|| / ||f||`.
    pub fn commutator_k_h_residual(&self, f: &SpinorField) -> Result<f64> {
        self.require_3d()?;
        f.check_boundary()?;
        let kh = self.apply_k(&self.apply_h(f))?;
        let hk = self.apply_h(&self.apply_k(f)?);
        Ok(kh.sub(&hk).norm() / f.norm())
    }

    /// `[T, H_D] f = T H_D f - H_D T f`.
    pub fn apply_commutator_th(&self, f: &SpinorField) -> SpinorField {
        self.apply_t(&self.apply_h(f)).sub(&self.apply_h(&self.apply_t(f)))
    }

    /// Closed form of the commutator,
    /// `i hbar (I + 2 beta K) + 2 beta (tau0 H_D - m0 c^2 T)`, applied to `f`.
    /// `include_mixing = false` drops the second group (negative control).
    pub fn apply_th_closed_form(&self, f: &SpinorField, include_mixing: bool) -> Result<SpinorField> {
        self.require_3d()?;
        let hbar = self.params.hbar;
        let two_beta_k = self.apply_beta(&self.apply_k(f)?).scaled(C64::new(2.0, 0.0));
        let mut out = f.add_scaled(ONE, &two_beta_k).scaled(I * hbar);
        if include_mixing {
            let mix = self
                .apply_h(f)
                .scaled(C64::new(self.params.tau0, 0.0))
                .add_scaled(C64::new(-self.params.rest_energy(), 0.0), &self.apply_t(f));
            out = out.add_scaled(C64::new(2.0, 0.0), &self.apply_beta(&mix));
        }
        Ok(out)
    }

    /// `||[T, H_D] f - closed_form f|| / ||f||`.
    pub fn commutator_th_residual(&self, f: &SpinorField) -> Result<f64> {
        self.commutator_th_residual_with(f, true)
    }

    pub fn commutator_th_residual_with(&self, f: &SpinorField, include_mixing: bool) -> Result<f64> {
        self.require_3d()?;
        self.check_field(f)?;
        f.check_boundary()?;
        let lhs = self.apply_commutator_th(f);
        let rhs = self.apply_th_closed_form(f, include_mixing)?;
        Ok(lhs.sub(&rhs).norm() / f.norm())
    }

    /// Per-mode analytic eigensystem of `H_D(p)`.
    pub fn hd_eigensystem(&self, p: &[f64]) -> Eigensystem {
        let cp: Vec<f64> = p.iter().map(|x| self.params.c * x).collect();
        dirac_eigensystem(&self.mats, &cp, self.params.rest_energy())
    }

    /// Per-point analytic eigensystem of `T(r)`.
    pub fn t_eigensystem(&self, r: &[f64]) -> Eigensystem {
        let rc: Vec<f64> = r.iter().map(|x| x / self.params.c).collect();
        dirac_eigensystem(&self.mats, &rc, self.params.tau0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(dim: usize) -> DiracSystem {
        DiracSystem::new(dim, 1.0).unwrap()
    }

    fn residual_of_pairs(m: &SpinMatrix, es: &Eigensystem) -> f64 {
        let mut worst = 0.0f64;
        for (lam, v) in &es.pairs {
            let hv = m.apply(v);
            for i in 0..m.size() {
                worst = worst.max((hv[i] - v[i] * lam).norm());
            }
        }
        worst
    }

    #[test]
    fn rest_mode_is_beta() {
        for d in [1, 3] {
            let s = sys(d);
            let p = vec![0.0; d];
            let h = s.hd_matrix(&p);
            assert_eq!(h, s.mats.beta);
            let es = s.hd_eigensystem(&p);
            let vals: Vec<f64> = es.pairs.iter().map(|x| x.0).collect();
            let h2 = s.mats.s / 2;
            assert_eq!(vals.iter().filter(|&&v| v == 1.0).count(), h2);
            assert_eq!(vals.iter().filter(|&&v| v == -1.0).count(), h2);
        }
    }

    #[test]
    fn analytic_eigenvectors_are_orthonormal_eigenpairs() {
        let s = sys(3);
        for p in [[0.3, -1.2, 0.7], [0.0, 0.0, 2.0], [5.0, 0.1, -0.2]] {
            let h = s.hd_matrix(&p);
            let es = s.hd_eigensystem(&p);
            assert!(residual_of_pairs(&h, &es) < 1e-14);
            for (a, (_, va)) in es.pairs.iter().enumerate() {
                for (b, (_, vb)) in es.pairs.iter().enumerate() {
                    let ip: C64 = (0..4).map(|i| va[i].conj() * vb[i]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn traceless_and_hermitian() {
        let s = sys(3);
        let h = s.hd_matrix(&[0.4, -0.1, 2.2]);
        assert!(h.trace().norm() < 1e-15);
        let t = s.t_matrix(&[1.0, 2.0, -3.0]);
        assert!(t.is_hermitian_exact());
        assert!(h.is_hermitian_exact());
    }

    #[test]
    fn t_at_origin_has_levels_tau0() {
        let s = sys(3);
        let es = s.t_eigensystem(&[0.0; 3]);
        assert_eq!(es.level, s.params.tau0);
        let t = s.t_matrix(&[0.0; 3]);
        assert!(residual_of_pairs(&t, &es) < 1e-13);
    }

    #[test]
    fn massless_zero_mode() {
        let m = DiracMatrices::build(3).unwrap();
        let es = dirac_eigensystem(&m, &[0.0; 3], 0.0);
        assert_eq!(es.level, 0.0);
        assert!(es.pairs.iter().all(|p| p.0 == 0.0));
        let u = kernel_exponential(&m, &[0.0; 3], 0.0, 3.0);
        assert_eq!(u, SpinMatrix::identity(4));
    }

    #[test]
    fn projector_at_rest() {
        let s = sys(3);
        let l = positive_energy_projector(&s.mats, &s.params, &[0.0; 3]);
        let want = (SpinMatrix::identity(4) + s.mats.beta).scale_re(0.5);
        assert!((l - want).max_abs() < 1e-15);
    }

    #[test]
    fn kernel_exponential_matches_eigen_phases() {
        let s = sys(1);
        let p = [0.8];
        let theta = 1.37;
        let u = kernel_exponential(&s.mats, &p, 1.0, theta);
        let es = s.hd_eigensystem(&p);
        for (lam, v) in &es.pairs {
            let uv = u.apply(v);
            let ph = C64::from_polar(1.0, -lam * theta);
            for i in 0..2 {
                assert!((uv[i] - v[i] * ph).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn massless_spectrum_has_no_gap() {
        let g = GridSpec::new(1, 16, 10.0).unwrap();
        let r = dirac_spectrum(&g, 0.0, 1.0);
        assert_eq!(r.gap, 0.0);
        for l in &r.levels {
            assert!((l.value - l.coordinate[0].abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn k_requires_three_dimensions() {
        let s = sys(1);
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let f = grid::gaussian_packet(g, &[0.0], 1.5, &[0.0], &[ONE, ZERO]);
        assert!(matches!(s.apply_k(&f), Err(Error::InvalidDimension(1))));
        assert!(s.apply_orbital_l(&f, 0).is_err());
        assert!(s.commutator_th_residual(&f).is_err());
    }

    #[test]
    fn field_shape_is_checked() {
        let s = sys(3);
        let g = GridSpec::new(1, 32, 20.0).unwrap();
        let f = SpinorField::zeros(g, 2, Representation::Position);
        assert!(s.check_field(&f).is_err());
    }
}
