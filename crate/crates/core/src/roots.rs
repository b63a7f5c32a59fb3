//! Small polynomial and scalar root finders.

use num_complex::Complex64;

/// Real roots of `a x² + b x + c`, ascending. Falls back to the linear
/// equation when `a == 0`; returns nothing for the identically-zero case.
///
/// Uses the cancellation-free form `q = -(b + sign(b)√disc)/2`.
pub fn quadratic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        // b == 0 and c == 0
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    let mut roots = vec![r1, r2];
    roots.sort_by(f64::total_cmp);
    roots
}

/// Both (possibly complex) roots of `x² + b x + c`.
pub fn monic_quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let real = quadratic_real_roots(1.0, b, c);
        match real.as_slice() {
            [r] => [Complex64::new(*r, 0.0), Complex64::new(*r, 0.0)],
            [r1, r2] => [Complex64::new(*r1, 0.0), Complex64::new(*r2, 0.0)],
            _ => unreachable!("nonnegative discriminant yields real roots"),
        }
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Eigenvalues of a real 2×2 matrix from its characteristic quadratic.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    monic_quadratic_roots(-trace, det)
}

/// Roots of `λ³ + a1 λ² + a2 λ + a3`.
///
/// One real root comes from the trigonometric / Cardano closed form of the
/// depressed cubic (or the double-root formula when the discriminant is
/// within `1e-12·scale³` of zero). It is Newton-polished on the original
/// cubic and deflated; the remaining pair solves the quotient quadratic.
pub fn cubic_roots(a1: f64, a2: f64, a3: f64) -> [Complex64; 3] {
    let p = a2 - a1 * a1 / 3.0;
    let q = 2.0 * a1 * a1 * a1 / 27.0 - a1 * a2 / 3.0 + a3;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let scale = (p / 3.0).abs().max((q / 2.0).abs().powf(2.0 / 3.0));

    let t = if disc.abs() <= 1e-12 * scale.powi(3) {
        if p == 0.0 {
            0.0
        } else {
            // Double root -3q/(2p), simple root 3q/p.
            3.0 * q / p
        }
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 - q.signum() * sq).cbrt();
        if u == 0.0 {
            0.0
        } else {
            u - p / (3.0 * u)
        }
    } else {
        // Three real roots; take the largest.
        let r = (-p / 3.0).sqrt();
        let cos_arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        2.0 * r * (cos_arg.acos() / 3.0).cos()
    };

    let real = newton_polish(a1, a2, a3, t - a1 / 3.0);
    let b = a1 + real;
    let c = a2 + real * b;
    let [z1, z2] = monic_quadratic_roots(b, c);
    [Complex64::new(real, 0.0), z1, z2]
}

fn newton_polish(a1: f64, a2: f64, a3: f64, mut x: f64) -> f64 {
    for _ in 0..8 {
        let f = ((x + a1) * x + a2) * x + a3;
        let df = (3.0 * x + 2.0 * a1) * x + a2;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = x - f / df;
        let f_next = ((next + a1) * next + a2) * next + a3;
        if !(f_next.abs() < f.abs()) {
            break;
        }
        x = next;
    }
    x
}

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs.
///
/// Stops once the bracket is narrower than `rel_tol·max(|lo|, |hi|)` (or
/// after 200 halvings). Returns `None` when the endpoints do not bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) || mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
