//! Float helpers backed by `libm` so results are identical with and without `std`.

pub(crate) use core::f64::consts::{PI, SQRT_2};

pub(crate) const E_INV: f64 = 1.0 / core::f64::consts::E;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Trapezoidal integral of `y` sampled at increasing `t`.
pub(crate) fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(t.len(), y.len());
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (yw[0] + yw[1]) * (tw[1] - tw[0]))
        .sum()
}

/// Running trapezoidal integral, starting at zero.
pub(crate) fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec::Vec::with_capacity(t.len());
    let mut acc = 0.0;
    if !t.is_empty() {
        out.push(0.0);
    }
    for (tw, yw) in t.windows(2).zip(y.windows(2)) {
        acc += 0.5 * (yw[0] + yw[1]) * (tw[1] - tw[0]);
        out.push(acc);
    }
    out
}

/// Linear interpolation on increasing `xs`, clamped to the end values.
pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (y0, y1) = (ys[k - 1], ys[k]);
    if x1 == x0 {
        y1
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Bisection for a sign change of `f` on `[lo, hi]`; `None` without a bracket.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < 1e-14 * (1.0 + mid.abs()) {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Nelder-Mead simplex minimisation. Returns the best point, its value and
/// whether the simplex shrank below `xtol` in every coordinate (or its values
/// became indistinguishable) within `max_iter` iterations.
pub(crate) fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    xtol: f64,
    max_iter: usize,
) -> (alloc::vec::Vec<f64>, f64, bool) {
    use alloc::vec::Vec;
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let blend = |a: &[f64], b: &[f64], w: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect() };
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&k| pts[k].clone()).collect();
        vals = order.iter().map(|&k| vals[k]).collect();
        let spread = (vals[n] - vals[0]).abs();
        let size = (1..=n)
            .map(|k| pts[k].iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size <= xtol || spread <= 1e-15 * vals[0].abs() {
            return (pts[0].clone(), vals[0], true);
        }
        let mut centroid = alloc::vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let reflected = blend(&centroid, &pts[n], -1.0);
        let fr = f(&reflected);
        if fr < vals[0] {
            let expanded = blend(&centroid, &pts[n], -2.0);
            let fe = f(&expanded);
            if fe < fr {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = reflected;
            vals[n] = fr;
        } else {
            let (towards, fref) = if fr < vals[n] { (reflected.clone(), fr) } else { (pts[n].clone(), vals[n]) };
            let contracted = blend(&centroid, &towards, 0.5);
            let fc = f(&contracted);
            if fc < fref {
                pts[n] = contracted;
                vals[n] = fc;
            } else {
                for k in 1..=n {
                    pts[k] = blend(&pts[0], &pts[k], 0.5);
                    vals[k] = f(&pts[k]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (pts[best].clone(), vals[best], false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_of_line_is_exact() {
        let t = [0.0, 1.0, 3.0];
        let y = [0.0, 1.0, 3.0];
        assert!((trapezoid(&t, &y) - 4.5).abs() < 1e-15);
        assert_eq!(cumulative_trapezoid(&t, &y), alloc::vec![0.0, 0.5, 4.5]);
    }

    #[test]
    fn interp_clamps() {
        let xs = [0.0, 1.0];
        let ys = [2.0, 4.0];
        assert_eq!(interp(&xs, &ys, -1.0), 2.0);
        assert_eq!(interp(&xs, &ys, 0.5), 3.0);
        assert_eq!(interp(&xs, &ys, 9.0), 4.0);
    }

    #[test]
    fn golden_and_bisect() {
        let (x, _) = golden_min(-3.0, 5.0, 1e-10, |x| (x - 1.25) * (x - 1.25));
        assert!((x - 1.25).abs() < 1e-8);
        let r = bisect(0.0, 2.0, |x| x * x - 2.0).unwrap();
        assert!((r - SQRT_2).abs() < 1e-12);
        assert!(bisect(0.0, 1.0, |x| x + 1.0).is_none());
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, fx, ok) = nelder_mead(
            |p| (p[0] - 1.5) * (p[0] - 1.5) + 3.0 * (p[1] + 0.5) * (p[1] + 0.5),
            &[0.0, 0.0],
            &[0.5, 0.5],
            1e-9,
            5000,
        );
        assert!(ok);
        assert!((x[0] - 1.5).abs() < 1e-6 && (x[1] + 0.5).abs() < 1e-6, "{x:?} {fx}");
    }
}
