//! Spectral operations on uniformly sampled periodic data.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transforms of one fixed length, sampling `[0, period)`.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

impl PeriodicGrid {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            period,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn node(&self, j: usize) -> f64 {
        self.period * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// Signed mode index of FFT bin `j`.
    fn mode(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    fn angular(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.period
    }

    fn nyquist(&self, j: usize) -> bool {
        self.n % 2 == 0 && j == self.n / 2
    }

    /// Periodic trapezoid rule, i.e. the plain sample mean.
    pub fn mean(values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }

    pub fn coefficients(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn synthesize(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.iter().map(|c| c.re * scale).collect()
    }

    /// Zero-mean antiderivative. The Nyquist mode is dropped.
    pub fn antiderivative(&self, values: &[f64]) -> Vec<f64> {
        let mut c = self.coefficients(values);
        for (j, cj) in c.iter_mut().enumerate() {
            if j == 0 || self.nyquist(j) {
                *cj = Complex64::new(0.0, 0.0);
            } else {
                *cj /= Complex64::new(0.0, self.angular(j));
            }
        }
        self.synthesize(c)
    }

    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let mut c = self.coefficients(values);
        for (j, cj) in c.iter_mut().enumerate() {
            if self.nyquist(j) {
                *cj = Complex64::new(0.0, 0.0);
            } else {
                *cj *= Complex64::new(0.0, self.angular(j));
            }
        }
        self.synthesize(c)
    }

    /// Trigonometric interpolant of the samples evaluated at `s`.
    pub fn interpolate(&self, coeffs: &[Complex64], s: f64) -> f64 {
        let scale = 1.0 / self.n as f64;
        let mut acc = coeffs[0].re;
        for j in 1..=(self.n - 1) / 2 {
            let w = self.angular(j) * s;
            // Conjugate-symmetric pair j, n - j.
            acc += 2.0 * (coeffs[j] * Complex64::new(w.cos(), w.sin())).re;
        }
        if self.n % 2 == 0 {
            let j = self.n / 2;
            acc += (coeffs[j] * Complex64::new(0.0, self.angular(j) * s).exp()).re;
        }
        acc * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.nodes().map(f).collect()
    }

    #[test]
    fn antiderivative_of_cosine() {
        let g = PeriodicGrid::new(64, 2.0 * PI);
        let u = g.antiderivative(&sample(&g, |s| -s.cos()));
        for (s, v) in g.nodes().zip(&u) {
            assert!((v + s.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn longer_period_modes() {
        let g = PeriodicGrid::new(64, 4.0 * PI);
        let f = sample(&g, |s| (s / 2.0).cos() + 0.3 * (1.5 * s).sin() + 2.0);
        assert!((PeriodicGrid::mean(&f) - 2.0).abs() < 1e-14);
        let u = g.antiderivative(&f);
        let du = g.derivative(&u);
        for ((s, a), b) in g.nodes().zip(&du).zip(&f) {
            assert!((a - (b - 2.0)).abs() < 1e-12, "{s}");
        }
        let expected = sample(&g, |s| 2.0 * (s / 2.0).sin() - 0.2 * (1.5 * s).cos());
        for (a, b) in u.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolation_is_exact_for_band_limited() {
        let g = PeriodicGrid::new(32, 2.0 * PI);
        let f = |s: f64| 1.0 + s.sin() - 0.5 * (3.0 * s).cos();
        let c = g.coefficients(&sample(&g, f));
        for s in [0.1, 1.7, 4.4, -2.0, 9.0] {
            assert!((g.interpolate(&c, s) - f(s)).abs() < 1e-13);
        }
    }
}
