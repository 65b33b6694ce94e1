use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Savitzky–Golay filter: fit a polynomial of `order` over a sliding window of
/// `window` points and evaluate its `deriv`-th derivative at the centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SavGolSpec {
    pub window: usize,
    pub order: usize,
    pub deriv: usize,
}

impl SavGolSpec {
    pub fn new(window: usize, order: usize) -> Self {
        Self {
            window,
            order,
            deriv: 0,
        }
    }

    pub fn derivative(mut self, deriv: usize) -> Self {
        self.deriv = deriv;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.window.is_multiple_of(2) || self.window < 3 {
            return Err(Error::param(format!(
                "window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.order >= self.window {
            return Err(Error::param(format!(
                "order {} must be below the window length {}",
                self.order, self.window
            )));
        }
        if self.deriv > self.order {
            return Err(Error::param(format!(
                "derivative {} exceeds polynomial order {}",
                self.deriv, self.order
            )));
        }
        Ok(())
    }
}

/// Convolution weights for unit sample spacing, ordered oldest to newest.
pub fn savgol_coefficients(spec: &SavGolSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let m = (spec.window / 2) as f64;
    let p = spec.order + 1;
    // Abscissae scaled to [−1, 1] keep the normal equations well conditioned.
    let a = DMatrix::from_fn(spec.window, p, |i, j| ((i as f64 - m) / m).powi(j as i32));
    let ata = a.transpose() * &a;
    let chol = ata
        .cholesky()
        .ok_or_else(|| Error::Numeric("singular Savitzky-Golay normal matrix".into()))?;
    let mut e = DMatrix::zeros(p, 1);
    e[(spec.deriv, 0)] = 1.0;
    let row = chol.solve(&e);
    let coeffs = &a * row;
    let fact: f64 = (1..=spec.deriv).map(|k| k as f64).product();
    let scale = fact / m.powi(spec.deriv as i32);
    Ok(coeffs.iter().map(|c| c * scale).collect())
}

/// Apply the filter to every full window; the output has
/// `len − window + 1` points, point `i` centred on input `i + window / 2`.
/// Derivatives are scaled by the sample spacing `dt`.
pub fn savgol(values: &[f64], spec: &SavGolSpec, dt: f64) -> Result<Vec<f64>> {
    let c = savgol_coefficients(spec)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param(format!("sample spacing must be positive, got {dt}")));
    }
    if values.len() < spec.window {
        return Err(Error::TooShort {
            needed: spec.window,
            got: values.len(),
        });
    }
    let scale = dt.powi(spec.deriv as i32);
    Ok(values
        .windows(spec.window)
        .map(|w| w.iter().zip(&c).map(|(x, c)| x * c).sum::<f64>() / scale)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smoothing weights built from polynomials orthogonal on the integer grid
    /// (Gram–Schmidt), an independent route to the least-squares projection.
    fn gram_weights(window: usize, order: usize) -> Vec<f64> {
        let m = (window / 2) as i64;
        let xs: Vec<f64> = (-m..=m).map(|x| x as f64).collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for k in 0..=order {
            let mut v: Vec<f64> = xs.iter().map(|x| x.powi(k as i32)).collect();
            for b in &basis {
                let proj = v.iter().zip(b).map(|(a, b)| a * b).sum::<f64>() / b.iter().map(|b| b * b).sum::<f64>();
                v.iter_mut().zip(b).for_each(|(a, b)| *a -= proj * b);
            }
            basis.push(v);
        }
        let c = m as usize;
        (0..window)
            .map(|i| {
                basis
                    .iter()
                    .map(|b| b[i] * b[c] / b.iter().map(|v| v * v).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn five_point_quadratic_kernel() {
        let c = savgol_coefficients(&SavGolSpec::new(5, 2)).unwrap();
        let want = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|v| v / 35.0);
        for ((a, b), g) in c.iter().zip(want).zip(gram_weights(5, 2)) {
            assert!((a - b).abs() < 1e-12);
            assert!((g - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_orthogonal_polynomial_route() {
        for (w, p) in [(7, 2), (11, 3), (21, 4), (101, 2)] {
            let c = savgol_coefficients(&SavGolSpec::new(w, p)).unwrap();
            for (a, b) in c.iter().zip(gram_weights(w, p)) {
                assert!((a - b).abs() < 1e-12, "w={w} p={p}");
            }
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let x: Vec<f64> = (0..50)
            .map(|i| 0.3 * (i as f64).powi(2) - 2.0 * i as f64 + 7.0)
            .collect();
        let y = savgol(&x, &SavGolSpec::new(9, 2), 1.0).unwrap();
        assert_eq!(y.len(), 42);
        for (i, v) in y.iter().enumerate() {
            assert!((v - x[i + 4]).abs() < 1e-9 * x[i + 4].abs().max(1.0));
        }
    }

    #[test]
    fn derivative_of_line() {
        let dt = 0.5;
        let x: Vec<f64> = (0..30).map(|i| 3.0 * i as f64 * dt - 1.0).collect();
        let y = savgol(&x, &SavGolSpec::new(7, 2).derivative(1), dt).unwrap();
        for v in y {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(savgol_coefficients(&SavGolSpec::new(4, 2)).is_err());
        assert!(savgol_coefficients(&SavGolSpec::new(5, 5)).is_err());
        assert!(savgol_coefficients(&SavGolSpec::new(5, 2).derivative(3)).is_err());
        assert!(matches!(
            savgol(&[1.0; 3], &SavGolSpec::new(5, 2), 1.0),
            Err(Error::TooShort { .. })
        ));
    }
}
