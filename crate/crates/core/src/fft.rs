//! Multi-axis FFT over row-major `n^dim` buffers.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::algebra::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

/// Unnormalized transform of `buf` (length `n^dim`) along every axis.
pub(crate) fn transform(buf: &mut [C64], n: usize, dim: usize, fft: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(buf.len(), n.pow(dim as u32));
    let mut lines = Vec::new();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process(buf);
            continue;
        }
        lines.resize(buf.len(), C64::new(0.0, 0.0));
        let block = stride * n;
        let blocks = buf.len() / block;
        for b in 0..blocks {
            for o in 0..stride {
                let line = (b * stride + o) * n;
                for j in 0..n {
                    lines[line + j] = buf[b * block + j * stride + o];
                }
            }
        }
        fft.process(&mut lines);
        for b in 0..blocks {
            for o in 0..stride {
                let line = (b * stride + o) * n;
                for j in 0..n {
                    buf[b * block + j * stride + o] = lines[line + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2axis(data: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for k0 in 0..n {
            for k1 in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j0 in 0..n {
                    for j1 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * j0 + k1 * j1) as f64) / n as f64;
                        acc += data[j0 * n + j1] * C64::from_polar(1.0, ph);
                    }
                }
                out[k0 * n + k1] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_two_axis_dft() {
        let n = 8;
        let data: Vec<C64> = (0..n * n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = data.clone();
        transform(&mut buf, n, 2, &plan(n, Direction::Forward));
        let want = naive_dft_2axis(&data, n);
        for (a, b) in buf.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
