//! Uncertainty relations and signal extraction from traces.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::algebra::C64;
use crate::dynamics::ObservableTrace;
use crate::error::{Error, Result};
use crate::grid::{Representation, SpinorField};
use crate::operators::DiracSystem;

/// Relative slack allowed when asserting an inequality.
pub const XP_SLACK: f64 = 1e-10;
pub const TH_SLACK: f64 = 1e-8;
/// Round-off allowance for the quantified width comparisons, relative to the
/// larger side.
pub const MARGIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxisUncertainty {
    pub axis: usize,
    pub delta_x: f64,
    pub delta_p: f64,
    pub product: f64,
    /// `hbar / 2`
    pub bound: f64,
    /// `|<[x, p]>| / 2` on the lattice.
    pub robertson_bound: f64,
    pub pass: bool,
}

/// `(<q>, <q^2>)` of the lattice coordinate along `axis` in `rep`.
fn moments(f: &SpinorField, rep: Representation, axis: usize) -> (f64, f64) {
    let f = f.to_rep(rep);
    let g = *f.grid();
    let s = f.spinor_size();
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, chunk) in f.data().chunks(s).enumerate() {
        let w: f64 = chunk.iter().map(|z| z.norm_sqr()).sum();
        let q = g.coordinate(rep, i, axis);
        m0 += w;
        m1 += w * q;
        m2 += w * q * q;
    }
    (m1 / m0, m2 / m0)
}

fn spread(mean: f64, second: f64) -> f64 {
    (second - mean * mean).max(0.0).sqrt()
}

/// Position and momentum spreads per axis, checked against `hbar / 2`.
pub fn uncertainty_xp(f: &SpinorField) -> Result<Vec<AxisUncertainty>> {
    f.check_boundary()?;
    let hbar = crate::params::HBAR;
    let n2 = f.norm_sqr();
    (0..f.grid().dim())
        .map(|a| {
            let (mx, mx2) = moments(f, Representation::Position, a);
            let (mp, mp2) = moments(f, Representation::Momentum, a);
            let (dx, dp) = (spread(mx, mx2), spread(mp, mp2));
            let xf = crate::grid::apply_x(f, a)?;
            let pf = crate::grid::apply_p(f, a)?;
            let robertson = xf.inner(&pf).im.abs() / n2;
            let product = dx * dp;
            Ok(AxisUncertainty {
                axis: a,
                delta_x: dx,
                delta_p: dp,
                product,
                bound: hbar / 2.0,
                robertson_bound: robertson,
                pass: product >= 0.5 * hbar * (1.0 - XP_SLACK),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeEnergyUncertainty {
    pub delta_t: f64,
    pub delta_h: f64,
    pub product: f64,
    /// `|<[T, H_D]>| / 2` from the operators applied directly.
    pub commutator_bound: f64,
    /// Same quantity from the closed-form commutator.
    pub closed_form_bound: f64,
    /// `(hbar / 2) |3 + 4 <s.l> / hbar^2|`
    pub simplified_bound: f64,
    pub expect_beta: f64,
    pub expect_k: f64,
    pub expect_spin_orbit: f64,
    pub pass: bool,
    pub pass_simplified: bool,
}

/// Spread of a Hermitian operator: `||(A - <A>) f|| / ||f||`, with `<A>`.
fn operator_spread(f: &SpinorField, af: &SpinorField) -> (f64, f64) {
    let n2 = f.norm_sqr();
    let mean = f.inner(af).re / n2;
    let centered = af.add_scaled(C64::new(-mean, 0.0), f);
    (mean, (centered.norm_sqr() / n2).sqrt())
}

/// `Delta T Delta H_D` against the exact Robertson bound and the simplified
/// spin-orbit bound. Three dimensions only.
pub fn uncertainty_th(sys: &DiracSystem, f: &SpinorField) -> Result<TimeEnergyUncertainty> {
    if sys.dim() != 3 {
        return Err(Error::InvalidDimension(sys.dim()));
    }
    sys.check_field(f)?;
    f.check_boundary()?;
    let hbar = sys.params.hbar;
    let n2 = f.norm_sqr();
    let tf = sys.apply_t(f);
    let hf = sys.apply_h(f);
    let (_, delta_t) = operator_spread(f, &tf);
    let (_, delta_h) = operator_spread(f, &hf);
    let commutator_bound = tf.inner(&hf).im.abs() / n2;
    let closed = sys.apply_th_closed_form(f, true)?;
    let closed_form_bound = f.inner(&closed).norm() / n2 / 2.0;

    let expect_beta = f.inner(&sys.apply_beta(f)).re / n2;
    let expect_k = f.inner(&sys.apply_k(f)?).re / n2;
    let expect_spin_orbit = f.inner(&sys.apply_spin_orbit(f)?).re / n2 / (hbar * hbar);
    let simplified_bound = 0.5 * hbar * (3.0 + 4.0 * expect_spin_orbit).abs();
    let product = delta_t * delta_h;
    Ok(TimeEnergyUncertainty {
        delta_t,
        delta_h,
        product,
        commutator_bound,
        closed_form_bound,
        simplified_bound,
        expect_beta,
        expect_k,
        expect_spin_orbit,
        pass: product >= commutator_bound * (1.0 - TH_SLACK),
        pass_simplified: product >= simplified_bound * (1.0 - TH_SLACK),
    })
}

/// Quantified comparison of the time and energy spreads with the packet
/// widths. Each `*_dropped` field is the bracket that turns the approximate
/// relation into an identity, e.g. `(Delta T)^2 = (Delta r)^2 / c^2 + time_dropped`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BohrComparison {
    pub delta_t2: f64,
    pub delta_r2_over_c2: f64,
    pub time_dropped: f64,
    pub time_margin: f64,
    pub delta_h2_over_c2: f64,
    pub delta_p2: f64,
    pub energy_dropped: f64,
    pub energy_margin: f64,
    pub product_lhs: f64,
    pub product_rhs: f64,
    pub product_margin: f64,
    pub pass_time: bool,
    pub pass_energy: bool,
    pub pass_product: bool,
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs - rhs >= -MARGIN_SLACK * lhs.abs().max(rhs.abs())
}

pub fn bohr_check(sys: &DiracSystem, f: &SpinorField) -> Result<BohrComparison> {
    sys.check_field(f)?;
    f.check_boundary()?;
    let c = sys.params.c;
    let dim = sys.dim();
    let (mut dr2, mut r_mean2, mut dp2, mut p_mean2) = (0.0, 0.0, 0.0, 0.0);
    for a in 0..dim {
        let (mx, mx2) = moments(f, Representation::Position, a);
        let (mp, mp2) = moments(f, Representation::Momentum, a);
        dr2 += (mx2 - mx * mx).max(0.0);
        r_mean2 += mx * mx;
        dp2 += (mp2 - mp * mp).max(0.0);
        p_mean2 += mp * mp;
    }
    let (t_mean, delta_t) = operator_spread(f, &sys.apply_t(f));
    let (h_mean, delta_h) = operator_spread(f, &sys.apply_h(f));
    let delta_t2 = delta_t * delta_t;
    let delta_h2_over_c2 = delta_h * delta_h / (c * c);
    let delta_r2_over_c2 = dr2 / (c * c);
    let tau0 = sys.params.tau0;
    let rest = sys.params.rest_energy();
    let time_dropped = r_mean2 / (c * c) + tau0 * tau0 - t_mean * t_mean;
    let energy_dropped = (c * c * p_mean2 + rest * rest - h_mean * h_mean) / (c * c);
    let product_lhs = delta_t2 * delta_h2_over_c2;
    let product_rhs = delta_r2_over_c2 * dp2;
    Ok(BohrComparison {
        delta_t2,
        delta_r2_over_c2,
        time_dropped,
        time_margin: delta_t2 - delta_r2_over_c2,
        delta_h2_over_c2,
        delta_p2: dp2,
        energy_dropped,
        energy_margin: delta_h2_over_c2 - dp2,
        product_lhs,
        product_rhs,
        product_margin: product_lhs - product_rhs,
        pass_time: holds(delta_t2, delta_r2_over_c2),
        pass_energy: holds(delta_h2_over_c2, dp2),
        pass_product: holds(product_lhs, product_rhs),
    })
}

/// Spreads and bounds for one state.
#[derive(Debug, Clone, Serialize)]
pub struct UncertaintyReport {
    pub label: String,
    pub position_momentum: Vec<AxisUncertainty>,
    pub time_energy: Option<TimeEnergyUncertainty>,
    pub bohr: BohrComparison,
}

impl UncertaintyReport {
    pub fn build(label: impl Into<String>, sys: &DiracSystem, f: &SpinorField) -> Result<Self> {
        let time_energy = if sys.dim() == 3 {
            Some(uncertainty_th(sys, f)?)
        } else {
            None
        };
        Ok(Self {
            label: label.into(),
            position_momentum: uncertainty_xp(f)?,
            time_energy,
            bohr: bohr_check(sys, f)?,
        })
    }
}

// ---------------------------------------------------------------------------
// Frequency extraction
// ---------------------------------------------------------------------------

pub const MIN_TRACE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrequencyEstimate {
    /// Cycles per unit parameter.
    pub frequency: f64,
    pub angular_frequency: f64,
    /// Peak amplitude of the detrended oscillation.
    pub amplitude: f64,
    /// Bin spacing `1 / span` of the unpadded spectrum.
    pub resolution: f64,
    pub periods_spanned: f64,
    /// Median windowed spectral amplitude, excluding the peak region.
    pub noise_floor: f64,
}

/// Least-squares line through `(t, y)`, returned as `(intercept, slope)`.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sxy += (a - tm) * (b - ym);
        sxx += (a - tm) * (a - tm);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ym - slope * tm, slope)
}

fn windowed_dtft(t: &[f64], y: &[f64], w: &[f64], nu: f64) -> C64 {
    t.iter()
        .zip(y)
        .zip(w)
        .map(|((&tk, &yk), &wk)| C64::from_polar(wk * yk, -2.0 * PI * nu * (tk - t[0])))
        .sum()
}

/// Dominant frequency of a uniformly sampled trace: linear detrend, Hann
/// window, zero-padded FFT, then a parabolic fit to the log-magnitude peak.
pub fn extract_frequency(trace: &ObservableTrace) -> Result<FrequencyEstimate> {
    let n = trace.samples.len();
    if n < MIN_TRACE_SAMPLES {
        return Err(Error::TraceTooShort {
            found: n,
            required: MIN_TRACE_SAMPLES,
        });
    }
    let t = trace.parameters();
    let y = trace.values();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs()) {
        return Err(Error::InvalidParameter("trace must be uniformly sampled".into()));
    }
    let (a, b) = linear_fit(&t, &y);
    let y: Vec<f64> = t.iter().zip(&y).map(|(tk, yk)| yk - (a + b * tk)).collect();
    let w: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    let wsum: f64 = w.iter().sum();

    let pad = 8 * n.next_power_of_two();
    let mut buf: Vec<C64> = (0..pad)
        .map(|k| if k < n { C64::new(w[k] * y[k], 0.0) } else { C64::new(0.0, 0.0) })
        .collect();
    FftPlanner::new().plan_fft_forward(pad).process(&mut buf);
    let mags: Vec<f64> = buf[..pad / 2].iter().map(|z| z.norm()).collect();
    // Skip the bins dominated by the detrended mean.
    let lo = (2 * pad / n).max(1);
    let peak = (lo..pad / 2 - 1)
        .max_by(|&i, &j| mags[i].total_cmp(&mags[j]))
        .unwrap_or(lo);

    let mut offset = 0.0;
    let (l, c, r) = (mags[peak - 1], mags[peak], mags[peak + 1]);
    if l > 0.0 && c > 0.0 && r > 0.0 {
        let (l, c, r) = (l.ln(), c.ln(), r.ln());
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
        }
    }
    let frequency = (peak as f64 + offset) / (pad as f64 * dt);
    let amplitude = 2.0 * windowed_dtft(&t, &y, &w, frequency).norm() / wsum;

    let mut rest: Vec<f64> = mags
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as isize - peak as isize).unsigned_abs() > 4 * pad / n)
        .map(|(_, m)| 2.0 * m / wsum)
        .collect();
    rest.sort_by(f64::total_cmp);
    let noise_floor = rest.get(rest.len() / 2).copied().unwrap_or(0.0);

    let span = t[n - 1] - t[0];
    Ok(FrequencyEstimate {
        frequency,
        angular_frequency: 2.0 * PI * frequency,
        amplitude,
        resolution: 1.0 / span,
        periods_spanned: frequency * span,
        noise_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Parameter;

    fn synthetic(nu: f64, periods: f64, n: usize, amp: f64, drift: f64) -> ObservableTrace {
        let span = periods / nu;
        ObservableTrace {
            name: "x_0".into(),
            parameter: Parameter::Time,
            samples: (0..n)
                .map(|k| {
                    let t = span * k as f64 / (n - 1) as f64;
                    (t, amp * (2.0 * PI * nu * t).sin() + drift * t + 0.3)
                })
                .collect(),
        }
    }

    #[test]
    fn recovers_tone_with_drift() {
        for nu in [0.37, 1.0, 2.9] {
            let est = extract_frequency(&synthetic(nu, 8.0, 512, 1.0, 0.8)).unwrap();
            assert!((est.frequency / nu - 1.0).abs() < 5e-3, "{nu} -> {}", est.frequency);
        }
    }

    #[test]
    fn non_integer_period_count() {
        let est = extract_frequency(&synthetic(1.0, 6.3, 256, 0.2, -0.1)).unwrap();
        assert!((est.frequency - 1.0).abs() < 5e-3);
        assert!((est.amplitude / 0.2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_short_trace() {
        let tr = synthetic(1.0, 8.0, 32, 1.0, 0.0);
        assert!(matches!(extract_frequency(&tr), Err(Error::TraceTooShort { .. })));
    }

    #[test]
    fn linear_fit_is_exact_on_lines() {
        let t: Vec<f64> = (0..10).map(|k| k as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.0 - 3.0 * x).collect();
        let (a, b) = linear_fit(&t, &y);
        assert!((a - 2.0).abs() < 1e-13 && (b + 3.0).abs() < 1e-13);
    }
}
