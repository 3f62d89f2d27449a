//! Scan-and-bisect root location for functions sampled on a uniform grid.

/// A sign change of `f`, where the "high" side is `f >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// `true` when `f` goes from negative to non-negative.
    pub rising: bool,
}

/// An interior extremum of `f` that approaches zero without a detected sign change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Touch {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ScanResult {
    pub crossings: Vec<Crossing>,
    pub touches: Vec<Touch>,
}

/// Bisects `f` on `[lo, hi]`, assuming `f(lo) >= 0` and `f(hi) >= 0` differ.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let lo_high = f(lo) >= 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) >= 0.0) == lo_high {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of `sign * f` on `[lo, hi]`.
fn golden_extremum(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, sign: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = sign * f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = sign * f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Finds all sign changes of `f` on `[0, horizon]`.
///
/// `f` is sampled with spacing at most `step`; sign changes between samples
/// are bisected to `tol`. Interior local extrema of the samples that stay on
/// one side are refined by golden-section search, so pairs of crossings
/// closer together than `step` are still found. Refined extrema within
/// `touch_tol` of zero that do not cross are reported as touches.
pub fn scan(
    f: impl Fn(f64) -> f64,
    horizon: f64,
    step: f64,
    tol: f64,
    touch_tol: f64,
) -> ScanResult {
    let n = ((horizon / step).ceil() as usize).max(1);
    let ts: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let high = |v: f64| v >= 0.0;

    let mut out = ScanResult::default();
    for i in 0..n {
        if high(vals[i]) != high(vals[i + 1]) {
            out.crossings.push(Crossing {
                t: bisect(&f, ts[i], ts[i + 1], tol),
                rising: !high(vals[i]),
            });
        }
        // Extremum candidate at interior sample i+1 with neighbours on the same side.
        if i + 2 <= n {
            let (a, b, c) = (vals[i], vals[i + 1], vals[i + 2]);
            let same_side = high(a) == high(b) && high(b) == high(c);
            if !same_side {
                continue;
            }
            // sign = +1 looks for a hidden maximum above zero, -1 for a hidden minimum below.
            let sign = if high(b) { -1.0 } else { 1.0 };
            let is_peak = sign * b > sign * a && sign * b >= sign * c;
            if !is_peak {
                continue;
            }
            let t_ext = golden_extremum(&f, ts[i], ts[i + 2], sign, tol);
            let v_ext = f(t_ext);
            if high(v_ext) != high(b) {
                out.crossings.push(Crossing {
                    t: bisect(&f, ts[i], t_ext, tol),
                    rising: !high(b),
                });
                out.crossings.push(Crossing {
                    t: bisect(&f, t_ext, ts[i + 2], tol),
                    rising: high(b),
                });
            } else if v_ext.abs() <= touch_tol {
                out.touches.push(Touch { t: t_ext, value: v_ext });
            }
        }
    }
    out.crossings.sort_by(|x, y| x.t.total_cmp(&y.t));
    out
}
