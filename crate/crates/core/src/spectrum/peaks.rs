//! Local-maximum detection with a prominence threshold and parabolic
//! refinement.

use crate::scalar::Real;

/// Interior local maxima of `y(x)` whose prominence, normalized by the range
/// of `y`, exceeds `prominence`. Positions are refined by a parabola through
/// the peak sample and its two neighbours.
///
/// The prominence of a peak is its height above the higher of the two minima
/// found by walking outwards until a strictly higher sample (or the edge of
/// the series) is met. `prominence` is expected in `(0, 1)`; a flat series has
/// no peaks. A plateau reports its left-most sample.
pub fn find_peaks<T: Real>(x: &[T], y: &[T], prominence: T) -> Vec<T> {
    assert_eq!(x.len(), y.len(), "abscissa and ordinate lengths differ");
    let n = y.len();
    if n < 3 {
        return Vec::new();
    }
    let (lo, hi) = y.iter().fold((y[0], y[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > T::zero()) {
        return Vec::new();
    }

    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let left_base = base(y, i, (0..i).rev());
        let right_base = base(y, i, i + 1..n);
        let height = y[i] - left_base.max(right_base);
        if height / range > prominence {
            peaks.push(refine(x, y, i));
        }
    }
    peaks
}

fn base<T: Real>(y: &[T], peak: usize, walk: impl Iterator<Item = usize>) -> T {
    let mut lowest = y[peak];
    for k in walk {
        if y[k] > y[peak] {
            break;
        }
        lowest = lowest.min(y[k]);
    }
    lowest
}

/// Vertex of the parabola through samples `i - 1`, `i`, `i + 1`, clamped to
/// that interval.
fn refine<T: Real>(x: &[T], y: &[T], i: usize) -> T {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curvature = (d1 - d0) / (x2 - x0);
    if !(curvature < T::zero()) {
        return x1;
    }
    let half = T::of(0.5);
    let vertex = half * (x0 + x1) - d0 / (T::of(2.0) * curvature);
    vertex.max(x0).min(x2)
}
