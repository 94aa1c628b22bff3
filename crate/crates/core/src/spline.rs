//! Cubic spline with a clamped first derivative at the left end and a
//! not-a-knot condition at the right end.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivative at each knot.
    m: Vec<f64>,
}

impl CubicSpline {
    /// `slope0` is imposed as the first derivative at `x[0]`.
    pub(crate) fn clamped_start(x: Vec<f64>, y: Vec<f64>, slope0: f64) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::InvalidWaveform(format!(
                "spline needs at least 4 matching knots, got {} x and {} y",
                n,
                y.len()
            )));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        if h.iter().any(|&d| d.is_nan() || d <= 0.0) {
            return Err(Error::InvalidWaveform(
                "knot times must be strictly increasing".into(),
            ));
        }

        // Tridiagonal system for M_0..M_{n-2}; M_{n-1} is eliminated with the
        // not-a-knot relation at x_{n-2}.
        let last = n - 1;
        let size = n - 1;
        let mut sub = vec![0.0; size];
        let mut diag = vec![0.0; size];
        let mut sup = vec![0.0; size];
        let mut rhs = vec![0.0; size];

        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - slope0);

        for i in 1..last {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        // M_{n-1} = (1 + r) M_{n-2} - r M_{n-3}, r = h_{n-2}/h_{n-3}
        let r = h[last - 1] / h[last - 2];
        let i = last - 1;
        let c = sup[i];
        sub[i] -= c * r;
        diag[i] += c * (1.0 + r);
        sup[i] = 0.0;

        let mut m = thomas(&sub, &diag, &sup, &rhs);
        let m_last = (1.0 + r) * m[last - 1] - r * m[last - 2];
        m.push(m_last);
        Ok(Self { x, y, m })
    }

    pub(crate) fn knots(&self) -> &[f64] {
        &self.x
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&xi| xi <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    /// Value, first and second derivative at `t`.
    pub(crate) fn eval(&self, t: f64) -> [f64; 3] {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 =
            (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2 = a * m0 + b * m1;
        [v, d1, d2]
    }
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_matching_slope() {
        // f(x) = x^3 - 2x^2 + 0.5x, f'(0) = 0.5
        let f = |x: f64| x * x * x - 2.0 * x * x + 0.5 * x;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.37).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::clamped_start(xs, ys, 0.5).unwrap();
        for t in [0.0, 0.1, 0.9, 1.7, 2.96] {
            let [v, d1, d2] = s.eval(t);
            assert!((v - f(t)).abs() < 1e-12, "value at {t}");
            assert!((d1 - (3.0 * t * t - 4.0 * t + 0.5)).abs() < 1e-11);
            assert!((d2 - (6.0 * t - 4.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_repeated_knots() {
        let xs = vec![0.0, 1.0, 1.0, 2.0, 3.0];
        assert!(CubicSpline::clamped_start(xs, vec![0.0; 5], 0.0).is_err());
    }
}
