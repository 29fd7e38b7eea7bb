//! Monotone cubic (PCHIP) interpolation with Fritsch-Carlson slope limiting.
//! The interpolant of monotone data is monotone, which is what profile
//! evaluation requires.

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Build from strictly increasing abscissae. Panics on fewer than 2 points
    /// or non-increasing x.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len());
        assert!(x.windows(2).all(|w| w[0] < w[1]), "pchip needs strictly increasing x");
        let n = x.len();
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut d = vec![0.0; n];
        d[0] = edge_slope(x[1] - x[0], x[2.min(n - 1)] - x[1.min(n - 1)], delta[0], delta[1.min(n - 2)]);
        d[n - 1] = edge_slope(
            x[n - 1] - x[n - 2],
            x[n - 2] - x[n - 2 - usize::from(n > 2)],
            delta[n - 2],
            delta[n - 2 - usize::from(n > 2)],
        );
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                // Weighted harmonic mean (Fritsch-Carlson).
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Self { x, y, d }
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    /// Evaluate; clamps to end values outside the data range.
    pub fn eval(&self, xq: f64) -> f64 {
        if xq <= self.x[0] {
            return self.y[0];
        }
        let n = self.x.len();
        if xq >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.y[i]
            + (t3 - 2.0 * t2 + t) * h * self.d[i]
            + (-2.0 * t3 + 3.0 * t2) * self.y[i + 1]
            + (t3 - t2) * h * self.d[i + 1]
    }
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // Shape-preserving three-point estimate at the boundary.
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
