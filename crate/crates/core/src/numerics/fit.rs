//! Linear least squares and scalar minimization.

/// Slope, intercept and r² of the least-squares line through (x, y).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert!(x.len() == y.len() && x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|&x| 2.5 * x - 1.0).collect();
        let (s, i, r2) = linear_fit(&x, &y);
        assert!((s - 2.5).abs() < 1e-14);
        assert!((i + 1.0).abs() < 1e-13);
        assert!((r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, _) = golden_section(|x| (x - 0.3) * (x - 0.3), -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
