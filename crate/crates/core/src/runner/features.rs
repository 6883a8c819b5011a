//! Sudden-death and revival detection on sampled curves.
//!
//! A death is a dip below the threshold that the curve later recovers from.
//! Dips are found two ways:
//!
//! * runs of grid points below the threshold, with crossings located by
//!   linear interpolation;
//! * local minima whose samples all stay above the threshold but which hide
//!   a zero between grid points: either the curve is `|f|^p` of a signed `f`
//!   changing sign (negating the roots past the minimum makes them smoother),
//!   or its two arms, extended linearly, meet at or below the threshold.
//!
//! A final run that never recovers is asymptotic decay, not a death.

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveFeatures {
    /// Downward threshold crossing of each death.
    pub death_times: Vec<f64>,
    /// `(down, up)` crossing pairs, one per death.
    pub death_intervals: Vec<(f64, f64)>,
    /// Largest interior local maximum between a death and the next one.
    pub revival_peaks: Vec<(f64, f64)>,
    /// Downward crossing after which the curve stays below the threshold.
    pub decayed_at: Option<f64>,
}

impl CurveFeatures {
    pub fn is_empty(&self) -> bool {
        self.death_times.is_empty() && self.revival_peaks.is_empty()
    }
}

fn crossing(t0: f64, v0: f64, t1: f64, v1: f64, level: f64) -> f64 {
    if v1 == v0 {
        return t0;
    }
    t0 + (level - v0) * (t1 - t0) / (v1 - v0)
}

/// Arms through `(l0, l1)` and `(r0, r1)`; returns the threshold crossings of
/// both arms when they meet inside `[t[l1], t[r0]]` at or below `thr`.
fn arms(t: &[f64], v: &[f64], [l0, l1, r0, r1]: [usize; 4], thr: f64) -> Option<(f64, f64)> {
    let sl = (v[l1] - v[l0]) / (t[l1] - t[l0]);
    let sr = (v[r1] - v[r0]) / (t[r1] - t[r0]);
    if !(sl < 0.0 && sr > 0.0) {
        return None;
    }
    let tx = (v[r0] - v[l1] + sl * t[l1] - sr * t[r0]) / (sl - sr);
    if tx < t[l1] || tx > t[r0] {
        return None;
    }
    let vx = v[l1] + sl * (tx - t[l1]);
    if vx > thr {
        return None;
    }
    let down = t[l1] + (thr - v[l1]) / sl;
    let up = t[r0] + (thr - v[r0]) / sr;
    Some((down.min(tx), up.max(tx)))
}

/// Exponents tried when unfolding `v = |f|^p` around a hidden zero.
const UNFOLD_POWERS: [i32; 3] = [1, 2, 4];

/// Sign change of the underlying signed curve between `i` and `i + 1`: for
/// some `p`, the `p`-th roots past the gap, negated, continue the curve more
/// smoothly than the folded roots do. The zero is placed by linear
/// interpolation of the roots, so `|f|` and `f^2` agree on where it is.
fn sign_change(t: &[f64], v: &[f64], i: usize, thr: f64) -> Option<(f64, f64)> {
    let n = v.len();
    let curvature = |g: &dyn Fn(usize) -> f64| {
        let mut c = 0.0;
        if i >= 1 {
            c += (g(i - 1) - 2.0 * g(i) + g(i + 1)).abs();
        }
        if i + 2 < n {
            c += (g(i) - 2.0 * g(i + 1) + g(i + 2)).abs();
        }
        c
    };
    let best = UNFOLD_POWERS
        .iter()
        .filter_map(|&p| {
            let root = |j: usize| v[j].max(0.0).powf(1.0 / p as f64);
            let folded = curvature(&root);
            let unfolded = curvature(&|j| if j > i { -root(j) } else { root(j) });
            (unfolded < folded).then_some((unfolded / folded, p))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))?;
    let p = best.1 as f64;
    let (a, b) = (v[i].powf(1.0 / p), v[i + 1].powf(1.0 / p));
    let slope = (a + b) / (t[i + 1] - t[i]);
    if !(slope > 0.0 && slope.is_finite()) {
        return None;
    }
    let zero = t[i] + a / slope;
    let half = thr.powf(1.0 / p) / slope;
    Some((zero - half, zero + half))
}

/// Hidden zero next to the local minimum `m`; the vertex sits on the side of
/// the lower neighbour.
fn zero_near(t: &[f64], v: &[f64], m: usize, thr: f64) -> Option<(f64, f64)> {
    let gap = if v[m + 1] < v[m - 1] { m } else { m - 1 };
    sign_change(t, v, gap, thr)
}

fn v_dip(t: &[f64], v: &[f64], m: usize, thr: f64) -> Option<(f64, f64)> {
    let n = v.len();
    let gap = if v[m + 1] < v[m - 1] { m } else { m - 1 };
    if let Some(d) = zero_near(t, v, m, thr) {
        return Some(d);
    }
    let right = (m + 2 < n).then_some([m - 1, m, m + 1, m + 2]);
    let left = (m >= 2).then_some([m - 2, m - 1, m, m + 1]);
    let order = if gap == m { [right, left] } else { [left, right] };
    order.into_iter().flatten().find_map(|idx| arms(t, v, idx, thr))
}

/// Deaths and revivals of `values` sampled at ascending `times`.
///
/// A non-positive threshold or fewer than three samples yields empty features.
pub fn extract_features(times: &[f64], values: &[f64], threshold: f64) -> CurveFeatures {
    let n = times.len().min(values.len());
    let (t, v) = (&times[..n], &values[..n]);
    if n < 3 || !(threshold > 0.0) {
        return CurveFeatures::default();
    }

    let mut dips: Vec<(f64, f64)> = Vec::new();
    let mut decayed_at = None;
    let mut k = 0;
    while k < n {
        if v[k] >= threshold {
            if k >= 1 && k + 1 < n && v[k - 1] > v[k] && v[k] <= v[k + 1] && v[k + 1] >= threshold {
                if let Some(d) = v_dip(t, v, k, threshold) {
                    dips.push(d);
                }
            }
            k += 1;
            continue;
        }
        let mut j = k;
        while j < n && v[j] < threshold {
            j += 1;
        }
        // Runs that start the curve or reach its end are not deaths.
        if k > 0 {
            let down = crossing(t[k - 1], v[k - 1], t[k], v[k], threshold);
            if j < n {
                let up = crossing(t[j - 1], v[j - 1], t[j], v[j], threshold);
                // Linear crossings understate how long a curve that vanishes
                // like f^2 stays low; widen to the hidden zero's band.
                let m = (k..j).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(k);
                let (down, up) = match zero_near(t, v, m, threshold) {
                    Some((lo, hi)) => (down.min(lo), up.max(hi)),
                    None => (down, up),
                };
                dips.push((down, up));
            } else {
                decayed_at = Some(down);
            }
        }
        k = j;
    }

    let mut features = CurveFeatures {
        decayed_at,
        ..CurveFeatures::default()
    };
    for (i, &(down, up)) in dips.iter().enumerate() {
        features.death_times.push(down);
        features.death_intervals.push((down, up));
        let until = dips.get(i + 1).map_or(f64::INFINITY, |d| d.0);
        let peak = (1..n - 1)
            .filter(|&j| t[j] > up && t[j] < until)
            .filter(|&j| v[j] >= v[j - 1] && v[j] >= v[j + 1] && v[j] > threshold)
            .max_by(|&a, &b| v[a].total_cmp(&v[b]));
        if let Some(j) = peak {
            features.revival_peaks.push((t[j], v[j]));
        }
    }
    features
}

/// Death intervals that end before `limit` (e.g. another curve's `decayed_at`).
pub fn intervals_before(intervals: &[(f64, f64)], limit: Option<f64>) -> Vec<(f64, f64)> {
    let limit = limit.unwrap_or(f64::INFINITY);
    intervals.iter().copied().filter(|d| d.1 < limit).collect()
}

/// True when every interval of `a` overlaps some interval of `b` and vice versa.
pub fn intervals_overlap_pairwise(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    let hits = |x: &(f64, f64), ys: &[(f64, f64)]| ys.iter().any(|y| x.0 <= y.1 && y.0 <= x.1);
    a.len() == b.len() && a.iter().all(|x| hits(x, b)) && b.iter().all(|y| hits(y, a))
}
