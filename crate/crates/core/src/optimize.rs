//! One-dimensional minimisation.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if b - a <= tol {
        let x = 0.5 * (a + b);
        return Minimum { x, value: f(x), iterations: 0 };
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < 500 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
    Minimum { x, value, iterations }
}

/// Whether the samples `values` (on an increasing grid) fall then rise, with
/// no interior local maximum beyond `slack` relative.
pub fn is_unimodal(values: &[f64], slack: f64) -> bool {
    let Some(k) = values.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).map(|(k, _)| k) else {
        return true;
    };
    let ok = |hi: f64, lo: f64| hi >= lo - slack * lo.abs();
    values[..=k].windows(2).all(|w| ok(w[0], w[1])) && values[k..].windows(2).all(|w| ok(w[1], w[0]))
}
