//! Small numeric helpers shared by the statistics modules.

use faer::prelude::SolveLstsq;
use faer::Mat;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ordinary least-squares line `y = intercept + slope x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Least-squares polynomial in the Legendre basis over the data's x-range.
#[derive(Debug, Clone)]
pub struct LegendreFit {
    center: f64,
    half_width: f64,
    coeffs: Vec<f64>,
}

fn legendre_row(t: f64, degree: usize, out: &mut [f64]) {
    out[0] = 1.0;
    if degree >= 1 {
        out[1] = t;
    }
    for k in 1..degree {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * t * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

impl LegendreFit {
    pub fn fit(x: &[f64], y: &[f64], degree: usize) -> Result<Self> {
        if x.len() != y.len() || x.len() <= degree {
            return Err(Error::Statistics(format!(
                "polynomial fit of degree {degree} needs more than {degree} points, got {}",
                x.len()
            )));
        }
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::Statistics(
                "polynomial fit over a zero-width range".into(),
            ));
        }
        let center = 0.5 * (hi + lo);
        let half_width = 0.5 * (hi - lo);
        let mut row = vec![0.0; degree + 1];
        let mut a = Mat::<f64>::zeros(x.len(), degree + 1);
        for (i, xi) in x.iter().enumerate() {
            legendre_row((xi - center) / half_width, degree, &mut row);
            for (j, r) in row.iter().enumerate() {
                a[(i, j)] = *r;
            }
        }
        let b = Mat::<f64>::from_fn(y.len(), 1, |i, _| y[i]);
        let sol = a.qr().solve_lstsq(&b);
        let coeffs: Vec<f64> = (0..=degree).map(|j| sol[(j, 0)]).collect();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric(
                "polynomial fit produced non-finite coefficients".into(),
            ));
        }
        Ok(Self {
            center,
            half_width,
            coeffs,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let degree = self.coeffs.len() - 1;
        let mut row = vec![0.0; degree + 1];
        legendre_row((x - self.center) / self.half_width, degree, &mut row);
        row.iter().zip(&self.coeffs).map(|(r, c)| r * c).sum()
    }
}
