//! Exact unitary evolution generated by `H_D` (in time) and by `T` (in
//! energy), packet preparation, and observable traces.
//!
//! Both propagators are diagonal in a known representation, so every state is
//! evolved in one step: `exp(-i H_D t / hbar)` mode by mode in momentum space
//! and `exp(-i T eps / hbar)` point by point in position space. The sign
//! follows the equation of motion `i hbar d/dt psi = H_D psi`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{C64, MAX_SPINOR};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Representation, SpinorField};
use crate::operators::{kernel_exponential, DiracSystem};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Energy-branch composition of a prepared packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpinorMix {
    Positive,
    Negative,
    Mixed { w_plus: f64, w_minus: f64 },
}

impl SpinorMix {
    pub fn equal_mix() -> Self {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        SpinorMix::Mixed { w_plus: w, w_minus: w }
    }

    fn weights(&self) -> (f64, f64) {
        match *self {
            SpinorMix::Positive => (1.0, 0.0),
            SpinorMix::Negative => (0.0, 1.0),
            SpinorMix::Mixed { w_plus, w_minus } => (w_plus, w_minus),
        }
    }
}

/// Gaussian packet description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketSpec {
    pub center: Vec<f64>,
    /// Position standard deviation of `|psi|^2` on each axis.
    pub width: f64,
    pub mean_momentum: Vec<f64>,
    pub mix: SpinorMix,
}

impl PacketSpec {
    pub fn new(center: Vec<f64>, width: f64, mean_momentum: Vec<f64>, mix: SpinorMix) -> Self {
        Self {
            center,
            width,
            mean_momentum,
            mix,
        }
    }

    /// Every violated constraint, in order.
    pub fn violations(&self, grid: &GridSpec) -> Vec<String> {
        let mut out = Vec::new();
        let dim = grid.dim();
        if self.center.len() != dim {
            out.push(format!("center has {} components, expected {dim}", self.center.len()));
        }
        if self.mean_momentum.len() != dim {
            out.push(format!(
                "mean momentum has {} components, expected {dim}",
                self.mean_momentum.len()
            ));
        }
        if self.center.iter().chain(&self.mean_momentum).any(|x| !x.is_finite()) || !self.width.is_finite() {
            out.push("non-finite packet parameter".into());
        }
        if self.width <= 2.0 * grid.dx() {
            out.push(format!(
                "width {} is not resolved (must exceed 2 dx = {})",
                self.width,
                2.0 * grid.dx()
            ));
        }
        if self.width >= grid.extent() / 10.0 {
            out.push(format!(
                "width {} is too wide for the box (must be below L/10 = {})",
                self.width,
                grid.extent() / 10.0
            ));
        }
        let (wp, wm) = self.mix.weights();
        if ((wp * wp + wm * wm) - 1.0).abs() > 1e-12 {
            out.push(format!("branch weights must satisfy w+^2 + w-^2 = 1, got {}", wp * wp + wm * wm));
        }
        out
    }
}

/// Gaussian envelope times plane-wave carrier, split per momentum mode onto
/// the requested energy branches (spin up along axis 3), normalized.
pub fn prepare_packet(sys: &DiracSystem, grid: &GridSpec, spec: &PacketSpec) -> Result<SpinorField> {
    if grid.dim() != sys.dim() {
        return Err(Error::InvalidParameter(format!(
            "grid dimension {} does not match operator dimension {}",
            grid.dim(),
            sys.dim()
        )));
    }
    let v = spec.violations(grid);
    if !v.is_empty() {
        return Err(Error::InvalidPacket(v));
    }
    let scalar = crate::grid::gaussian_packet(
        *grid,
        &spec.center,
        spec.width,
        &spec.mean_momentum,
        &[C64::new(1.0, 0.0)],
    );
    let amp = scalar.to_rep(Representation::Momentum);
    let (wp, wm) = spec.mix.weights();
    let s = sys.mats.s;
    let h = s / 2;
    let mut out = SpinorField::zeros(*grid, s, Representation::Momentum);
    out.data_mut().par_chunks_mut(s).enumerate().for_each(|(k, chunk)| {
        let es = sys.hd_eigensystem(&grid.mode(k)[..grid.dim()]);
        let u = es.pairs[0].1;
        let w = es.pairs[h].1;
        let a = amp.data()[k];
        for c in 0..s {
            chunk[c] = a * (u[c] * wp + w[c] * wm);
        }
    });
    let f = out.to_rep(Representation::Position).normalized();
    f.check_boundary()?;
    Ok(f)
}

/// `exp(-i H_D t / hbar) f`.
pub fn evolve_time(sys: &DiracSystem, f: &SpinorField, t: f64) -> SpinorField {
    let g = *f.grid();
    let (c, rest, hbar) = (sys.params.c, sys.params.rest_energy(), sys.params.hbar);
    sys.map_local(f, Representation::Momentum, |k| {
        let p = g.mode(k);
        let cp = [c * p[0], c * p[1], c * p[2]];
        kernel_exponential(&sys.mats, &cp[..g.dim()], rest, t / hbar)
    })
}

/// `exp(-i T eps / hbar) f`. The state must be boundary-safe.
pub fn evolve_energy(sys: &DiracSystem, f: &SpinorField, eps: f64) -> Result<SpinorField> {
    f.check_boundary()?;
    Ok(evolve_energy_unchecked(sys, f, eps))
}

fn evolve_energy_unchecked(sys: &DiracSystem, f: &SpinorField, eps: f64) -> SpinorField {
    let g = *f.grid();
    let (c, tau0, hbar) = (sys.params.c, sys.params.tau0, sys.params.hbar);
    sys.map_local(f, Representation::Position, |j| {
        let r = g.point(j);
        let rc = [r[0] / c, r[1] / c, r[2] / c];
        kernel_exponential(&sys.mats, &rc[..g.dim()], tau0, eps / hbar)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    #[serde(rename = "H_D")]
    Hamiltonian,
    #[serde(rename = "T")]
    Time,
}

impl FromStr for Generator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "H_D" | "h" | "hd" => Ok(Generator::Hamiltonian),
            "T" | "t" => Ok(Generator::Time),
            other => Err(Error::InvalidParameter(format!("unknown generator `{other}`"))),
        }
    }
}

/// Evolution parameter of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Time,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    X(usize),
    P(usize),
    Alpha(usize),
    Beta,
    H,
    T,
    Norm,
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let axis = |rest: &str| -> Result<usize> {
            match rest {
                "" => Ok(0),
                r => r
                    .strip_prefix('_')
                    .and_then(|d| d.parse().ok())
                    .filter(|&a: &usize| a < 3)
                    .ok_or_else(|| Error::UnknownObservable(s.to_string())),
            }
        };
        if let Some(rest) = s.strip_prefix("alpha") {
            return Ok(Observable::Alpha(axis(rest)?));
        }
        match s {
            "beta" => return Ok(Observable::Beta),
            "H" => return Ok(Observable::H),
            "T" => return Ok(Observable::T),
            "norm" => return Ok(Observable::Norm),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix('x') {
            return Ok(Observable::X(axis(rest)?));
        }
        if let Some(rest) = s.strip_prefix('p') {
            return Ok(Observable::P(axis(rest)?));
        }
        Err(Error::UnknownObservable(s.to_string()))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::X(a) => write!(f, "x_{a}"),
            Observable::P(a) => write!(f, "p_{a}"),
            Observable::Alpha(a) => write!(f, "alpha_{a}"),
            Observable::Beta => f.write_str("beta"),
            Observable::H => f.write_str("H"),
            Observable::T => f.write_str("T"),
            Observable::Norm => f.write_str("norm"),
        }
    }
}

fn quadratic_form(f: &SpinorField, rep: Representation, w: impl Fn(usize, &[C64]) -> f64) -> f64 {
    let f = f.to_rep(rep);
    let s = f.spinor_size();
    let mut acc = 0.0;
    for (i, chunk) in f.data().chunks(s).enumerate() {
        acc += w(i, chunk);
    }
    acc * f.grid().cell(rep)
}

fn spinor_form(m: &crate::algebra::SpinMatrix, v: &[C64]) -> f64 {
    let mv = m.apply(v);
    v.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// `<f|A|f> / <f|f>`, or `||f||` for [`Observable::Norm`].
pub fn expectation(sys: &DiracSystem, f: &SpinorField, obs: Observable) -> Result<f64> {
    let g = *f.grid();
    let dim = g.dim();
    let axis_ok = |a: usize| {
        if a < dim {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange { axis: a, dim })
        }
    };
    let weight = |_: usize, v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let n2 = f.norm_sqr();
    let raw = match obs {
        Observable::Norm => return Ok(n2.sqrt()),
        Observable::X(a) => {
            axis_ok(a)?;
            quadratic_form(f, Representation::Position, |i, v| {
                g.coordinate(Representation::Position, i, a) * weight(i, v)
            })
        }
        Observable::P(a) => {
            axis_ok(a)?;
            quadratic_form(f, Representation::Momentum, |i, v| {
                g.coordinate(Representation::Momentum, i, a) * weight(i, v)
            })
        }
        Observable::Alpha(a) => {
            axis_ok(a)?;
            let m = sys.mats.alpha[a];
            quadratic_form(f, f.rep(), |_, v| spinor_form(&m, v))
        }
        Observable::Beta => {
            let m = sys.mats.beta;
            quadratic_form(f, f.rep(), |_, v| spinor_form(&m, v))
        }
        Observable::H => quadratic_form(f, Representation::Momentum, |k, v| {
            spinor_form(&sys.hd_matrix(&g.mode(k)[..dim]), v)
        }),
        Observable::T => quadratic_form(f, Representation::Position, |j, v| {
            spinor_form(&sys.t_matrix(&g.point(j)[..dim]), v)
        }),
    };
    Ok(raw / n2)
}

/// Ordered `(parameter, value)` samples of one expectation value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableTrace {
    pub name: String,
    pub parameter: Parameter,
    pub samples: Vec<(f64, f64)>,
}

impl ObservableTrace {
    pub fn parameters(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

/// Evolves `f0` over `[0, span]` at `n_samples` equally spaced parameter
/// values. Every sample is computed from `f0` directly.
pub fn run_trace(
    sys: &DiracSystem,
    f0: &SpinorField,
    generator: Generator,
    span: f64,
    n_samples: usize,
    observables: &[&str],
) -> Result<Vec<ObservableTrace>> {
    let obs: Vec<Observable> = observables.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n_samples}")));
    }
    if !span.is_finite() || span <= 0.0 {
        return Err(Error::InvalidParameter(format!("span must be positive, got {span}")));
    }
    sys.check_field(f0)?;
    if generator == Generator::Time {
        f0.check_boundary()?;
    }
    let params: Vec<f64> = (0..n_samples)
        .map(|k| span * k as f64 / (n_samples - 1) as f64)
        .collect();
    let rows: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&v| {
            let f = match generator {
                Generator::Hamiltonian => evolve_time(sys, f0, v),
                Generator::Time => evolve_energy_unchecked(sys, f0, v),
            };
            obs.iter().map(|&o| expectation(sys, &f, o)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let parameter = match generator {
        Generator::Hamiltonian => Parameter::Time,
        Generator::Time => Parameter::Energy,
    };
    Ok(obs
        .iter()
        .enumerate()
        .map(|(i, o)| ObservableTrace {
            name: o.to_string(),
            parameter,
            samples: params.iter().zip(&rows).map(|(&p, r)| (p, r[i])).collect(),
        })
        .collect())
}

/// Per-mode weights `|phi(p)|^2 dp^dim` of a field (summing spinor
/// components), in FFT order.
pub fn mode_weights(f: &SpinorField) -> Vec<f64> {
    let m = f.to_rep(Representation::Momentum);
    let s = m.spinor_size();
    let cell = m.grid().cell(Representation::Momentum);
    m.data()
        .chunks(s)
        .map(|c| cell * c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect()
}

/// Fraction of the norm carried by each energy branch: `(<Lambda_+>, <Lambda_->)`.
pub fn branch_weights(sys: &DiracSystem, f: &SpinorField) -> (f64, f64) {
    let m = f.to_rep(Representation::Momentum);
    let g = *m.grid();
    let s = m.spinor_size();
    let (mut pos, mut neg) = (0.0, 0.0);
    for (k, chunk) in m.data().chunks(s).enumerate() {
        let p = g.mode(k);
        let lp = crate::operators::positive_energy_projector(&sys.mats, &sys.params, &p[..g.dim()]);
        let w = spinor_form(&lp, chunk);
        let total: f64 = chunk.iter().map(|z| z.norm_sqr()).sum();
        pos += w;
        neg += total - w;
    }
    let n = pos + neg;
    (pos / n, neg / n)
}

/// Unit spinor `(1, 0, ..)`, the rest-frame positive-energy spin-up state.
pub fn upper_spinor(s: usize) -> Vec<C64> {
    let mut v = vec![ZERO; s.min(MAX_SPINOR)];
    v[0] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys1() -> DiracSystem {
        DiracSystem::new(1, 1.0).unwrap()
    }

    #[test]
    fn observable_names() {
        assert_eq!("x_0".parse::<Observable>().unwrap(), Observable::X(0));
        assert_eq!("x".parse::<Observable>().unwrap(), Observable::X(0));
        assert_eq!("p_2".parse::<Observable>().unwrap(), Observable::P(2));
        assert_eq!("alpha_1".parse::<Observable>().unwrap(), Observable::Alpha(1));
        assert_eq!("beta".parse::<Observable>().unwrap(), Observable::Beta);
        assert_eq!("norm".parse::<Observable>().unwrap(), Observable::Norm);
        for bad in ["x_7", "q", "alpha_", "betaa", "x0"] {
            assert!(matches!(bad.parse::<Observable>(), Err(Error::UnknownObservable(_))), "{bad}");
        }
        for o in ["x_1", "p_0", "alpha_2", "beta", "H", "T", "norm"] {
            assert_eq!(o.parse::<Observable>().unwrap().to_string(), o);
        }
    }

    #[test]
    fn packet_violations_are_listed() {
        let g = GridSpec::new(1, 64, 20.0).unwrap();
        let spec = PacketSpec::new(vec![0.0, 1.0], 0.1, vec![], SpinorMix::Mixed { w_plus: 1.0, w_minus: 1.0 });
        let v = spec.violations(&g);
        assert_eq!(v.len(), 4, "{v:?}");
        let err = prepare_packet(&sys1(), &g, &spec).unwrap_err();
        assert!(matches!(err, Error::InvalidPacket(_)));
    }

    #[test]
    fn boundary_unsafe_packet_rejected() {
        let g = GridSpec::new(1, 256, 40.0).unwrap();
        let spec = PacketSpec::new(vec![15.0], 1.0, vec![0.0], SpinorMix::Positive);
        assert!(matches!(prepare_packet(&sys1(), &g, &spec), Err(Error::BoundaryUnsafe { .. })));
    }

    #[test]
    fn zero_energy_step_is_identity() {
        let g = GridSpec::new(1, 256, 60.0).unwrap();
        let s = sys1();
        let f = prepare_packet(&s, &g, &PacketSpec::new(vec![0.0], 2.0, vec![0.3], SpinorMix::Positive)).unwrap();
        let e = evolve_energy(&s, &f, 0.0).unwrap();
        assert!(e.distance(&f) < 1e-15);
        let t = evolve_time(&s, &f, 0.0);
        assert!(t.distance(&f) < 1e-15);
    }

    #[test]
    fn trace_rejects_bad_arguments() {
        let g = GridSpec::new(1, 128, 60.0).unwrap();
        let s = sys1();
        let f = prepare_packet(&s, &g, &PacketSpec::new(vec![0.0], 2.0, vec![0.0], SpinorMix::Positive)).unwrap();
        assert!(run_trace(&s, &f, Generator::Hamiltonian, 1.0, 1, &["x_0"]).is_err());
        assert!(run_trace(&s, &f, Generator::Hamiltonian, 0.0, 4, &["x_0"]).is_err());
        assert!(matches!(
            run_trace(&s, &f, Generator::Hamiltonian, 1.0, 4, &["spin"]),
            Err(Error::UnknownObservable(_))
        ));
        assert!(matches!(
            run_trace(&s, &f, Generator::Hamiltonian, 1.0, 4, &["x_2"]),
            Err(Error::AxisOutOfRange { .. })
        ));
    }

    #[test]
    fn trace_parameters_increase_and_norm_is_constant() {
        let g = GridSpec::new(1, 256, 80.0).unwrap();
        let s = sys1();
        let f = prepare_packet(&s, &g, &PacketSpec::new(vec![0.0], 3.0, vec![0.2], SpinorMix::equal_mix())).unwrap();
        for gen in [Generator::Hamiltonian, Generator::Time] {
            let tr = run_trace(&s, &f, gen, 2.0, 9, &["norm", "x_0"]).unwrap();
            let ps = tr[0].parameters();
            assert!(ps.windows(2).all(|w| w[1] > w[0]));
            for v in tr[0].values() {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn branch_weights_of_prepared_packets() {
        let g = GridSpec::new(1, 256, 80.0).unwrap();
        let s = sys1();
        let pos = prepare_packet(&s, &g, &PacketSpec::new(vec![0.0], 3.0, vec![0.4], SpinorMix::Positive)).unwrap();
        let (wp, wm) = branch_weights(&s, &pos);
        assert!((wp - 1.0).abs() < 1e-12 && wm.abs() < 1e-12);
        let neg = prepare_packet(&s, &g, &PacketSpec::new(vec![0.0], 3.0, vec![0.4], SpinorMix::Negative)).unwrap();
        let (wp, _) = branch_weights(&s, &neg);
        assert!(wp.abs() < 1e-12);
    }
}
