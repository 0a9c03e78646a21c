//! Upper concave hull of a point set sorted by abscissa (monotone chain).

use crate::scalar::Scalar;

/// Indices of the upper hull vertices of `pts`, which must be sorted by
/// strictly increasing abscissa. Collinear middle points are dropped, so of a
/// run of collinear points only the earliest and the latest survive.
pub fn upper_hull<T: Scalar>(pts: &[(T, T)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for (idx, p) in pts.iter().enumerate() {
        while hull.len() >= 2 {
            let o = pts[hull[hull.len() - 2]];
            let a = pts[hull[hull.len() - 1]];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(idx);
    }
    hull
}

/// Piecewise-linear evaluation through the given vertices; linear
/// extrapolation with the end slopes outside their range.
pub fn eval_polyline<T: Scalar>(xs: &[T], ys: &[T], x: T) -> T {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    if x == xs[0] {
        return ys[0];
    }
    if x == xs[n - 1] {
        return ys[n - 1];
    }
    let seg = if x <= xs[0] {
        0
    } else if x >= xs[n - 1] {
        n - 2
    } else {
        // Largest i with xs[i] <= x.
        match xs.binary_search_by(|v| v.partial_cmp(&x).expect("finite abscissae")) {
            Ok(i) => return ys[i],
            Err(i) => i - 1,
        }
    };
    let (x0, x1, y0, y1) = (xs[seg], xs[seg + 1], ys[seg], ys[seg + 1]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_interior_dip_and_collinear_points() {
        let pts = [(0.0, 0.0), (1.0, 0.2), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0), (5.0, 4.0)];
        let h = upper_hull(&pts);
        assert_eq!(h, vec![0, 4, 5]);
    }

    #[test]
    fn polyline_extrapolates_with_end_slope() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 1.0, 1.5];
        assert_eq!(eval_polyline(&xs, &ys, 4.0), 2.5);
        assert_eq!(eval_polyline(&xs, &ys, 1.0), 1.0);
        assert_eq!(eval_polyline(&xs, &ys, 0.5), 0.5);
    }
}
