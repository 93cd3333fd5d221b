//! Golden-section search for a unimodal function on a bracket.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

/// Shrinks `[lo, hi]` until its width is at most `rel_tol * |x| + abs_tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_iter: usize,
) -> GoldenResult {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while iterations < max_iter {
        let centre = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * centre.abs() + abs_tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    GoldenResult {
        x,
        value,
        lo,
        hi,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let r = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 0.0, 1e-10, 500);
        assert!((r.x - 1.3).abs() < 1e-7);
        assert!((r.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_minimum() {
        let r = golden_section(|x| x, 0.5, 3.0, 0.0, 1e-12, 500);
        assert!((r.x - 0.5).abs() < 1e-11);
    }
}
