//! Small derivative-free maximizers used by the feedback and Fisher searches.

use crate::scalar::Real;

/// Maximizes `f` on `[lo, hi]` by golden-section search until the bracket is below `tol`.
///
/// Returns the best point seen (endpoints included) and its value.
pub fn golden_section_max<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut best = (a, f(a));
    let fb = f(b);
    if fb > best.1 {
        best = (b, fb);
    }
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Zero of a decreasing `slope` on `[lo, hi]` by the Illinois variant of
/// regula falsi. Returns `None` unless `slope(lo) > 0 > slope(hi)`.
pub fn find_slope_zero<T: Real>(mut slope: impl FnMut(T) -> T, lo: T, hi: T, max_iter: usize) -> Option<T> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (slope(a), slope(b));
    if !(fa > T::zero() && fb < T::zero()) {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let x = (a * fb - b * fa) / (fb - fa);
        if !(x > a && x < b) || (b - a) <= T::epsilon() * T::lit(4.0) * b.abs().max(T::one()) {
            break;
        }
        let fx = slope(x);
        if fx == T::zero() {
            return Some(x);
        }
        if fx > T::zero() {
            a = x;
            fa = fx;
            if side == 1 {
                fb /= T::lit(2.0);
            }
            side = 1;
        } else {
            b = x;
            fb = fx;
            if side == -1 {
                fa /= T::lit(2.0);
            }
            side = -1;
        }
    }
    Some((a * fb - b * fa) / (fb - fa))
}

/// Nelder–Mead maximization in two dimensions.
pub fn nelder_mead_max2<T: Real>(
    mut f: impl FnMut([T; 2]) -> T,
    start: [T; 2],
    step: T,
    tol: T,
    max_iter: usize,
) -> ([T; 2], T) {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut simplex: Vec<([T; 2], T)> = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ]
    .into_iter()
    .map(|p| (p, f(p)))
    .collect();

    for _ in 0..max_iter {
        // descending by value
        simplex.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = (simplex[0].1 - simplex[2].1).abs();
        let size = (0..2)
            .map(|i| (simplex[0].0[i] - simplex[2].0[i]).abs().max((simplex[0].0[i] - simplex[1].0[i]).abs()))
            .fold(T::zero(), T::max);
        if spread <= tol && size <= tol.sqrt() {
            break;
        }
        let centroid = [
            (simplex[0].0[0] + simplex[1].0[0]) * half,
            (simplex[0].0[1] + simplex[1].0[1]) * half,
        ];
        let worst = simplex[2];
        let along = |t: T| {
            [
                centroid[0] + t * (worst.0[0] - centroid[0]),
                centroid[1] + t * (worst.0[1] - centroid[1]),
            ]
        };
        let reflected = along(-T::one());
        let fr = f(reflected);
        if fr > simplex[0].1 {
            let expanded = along(-two);
            let fe = f(expanded);
            simplex[2] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[1].1 {
            simplex[2] = (reflected, fr);
        } else {
            let contracted = if fr > worst.1 { along(-half) } else { along(half) };
            let fc = f(contracted);
            if fc > worst.1.max(fr) {
                simplex[2] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let p = [
                        best[0] + half * (v.0[0] - best[0]),
                        best[1] + half * (v.0[1] - best[1]),
                    ];
                    *v = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex[0]
}
