//! One-dimensional maximization: a uniform grid to locate the global bracket,
//! then golden-section refinement inside it.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Grid size used by the exponent evaluators.
pub const GRID_POINTS: usize = 513;
/// Width at which golden-section refinement stops.
pub const REFINEMENT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Maximum {
    pub value: f64,
    pub argmax: f64,
    pub curve: Vec<(f64, f64)>,
}

fn finite_or_neg_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Evaluates `f` on `points` uniformly spaced nodes of `[lo, hi]`. Nodes are
/// evaluated independently (in parallel when enabled) and returned in order.
pub fn sample<F>(f: &F, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = points.max(2);
    let node = |i: usize| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    #[cfg(feature = "parallel")]
    let out = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = node(i);
            (x, finite_or_neg_inf(f(x)))
        })
        .collect();
    #[cfg(not(feature = "parallel"))]
    let out = (0..n)
        .map(|i| {
            let x = node(i);
            (x, finite_or_neg_inf(f(x)))
        })
        .collect();
    out
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = finite_or_neg_inf(f(c));
    let mut fd = finite_or_neg_inf(f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = finite_or_neg_inf(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = finite_or_neg_inf(f(d));
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid search followed by golden-section refinement on the bracket around
/// the best node. The first best node wins ties, so the result is independent
/// of evaluation order.
pub fn grid_golden_max<F>(f: &F, lo: f64, hi: f64, points: usize, tol: f64) -> Maximum
where
    F: Fn(f64) -> f64 + Sync,
{
    let curve = sample(f, lo, hi, points);
    let (best, &(x_best, v_best)) = curve
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, f64))>, |acc, (i, p)| match acc {
            Some((_, q)) if q.1 >= p.1 => acc,
            _ => Some((i, p)),
        })
        .expect("grid is nonempty");
    if v_best == f64::INFINITY || v_best == f64::NEG_INFINITY {
        return Maximum {
            value: v_best,
            argmax: x_best,
            curve,
        };
    }
    let left = curve[best.saturating_sub(1)].0;
    let right = curve[(best + 1).min(curve.len() - 1)].0;
    let (x_ref, v_ref) = golden_max(f, left, right, tol);
    let (argmax, value) = if v_ref > v_best {
        (x_ref, v_ref)
    } else {
        (x_best, v_best)
    };
    Maximum {
        value,
        argmax,
        curve,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let f = |x: f64| -(x - 0.3137).powi(2) + 2.0;
        let m = grid_golden_max(&f, 0.0, 1.0, GRID_POINTS, 1e-10);
        assert!((m.argmax - 0.3137).abs() < 1e-6);
        assert!((m.value - 2.0).abs() < 1e-12);
        assert_eq!(m.curve.len(), GRID_POINTS);
    }

    #[test]
    fn endpoint_maximum() {
        let f = |x: f64| x;
        let m = grid_golden_max(&f, 0.5, 1.0, 33, 1e-9);
        assert_eq!(m.argmax, 1.0);
        assert_eq!(m.value, 1.0);
    }

    #[test]
    fn multimodal_picks_global_bracket() {
        let f = |x: f64| (20.0 * x).sin() + 0.5 * x;
        let m = grid_golden_max(&f, 0.0, 1.0, GRID_POINTS, 1e-10);
        let dense = (0..=100_000)
            .map(|i| f(i as f64 / 100_000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(m.value >= dense - 1e-9);
    }

    #[test]
    fn nan_treated_as_minus_infinity() {
        let f = |x: f64| if x < 0.5 { f64::NAN } else { 1.0 - x };
        let m = grid_golden_max(&f, 0.0, 1.0, 11, 1e-9);
        assert_eq!(m.argmax, 0.5);
    }

    #[test]
    fn infinite_value_short_circuits() {
        let f = |x: f64| if x > 0.9 { f64::INFINITY } else { 0.0 };
        let m = grid_golden_max(&f, 0.0, 1.0, 11, 1e-9);
        assert_eq!(m.value, f64::INFINITY);
    }
}
