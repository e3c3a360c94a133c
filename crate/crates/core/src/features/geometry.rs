//! Planar geometry for clock drawings: clock-convention angles, direct
//! least-squares ellipse fitting and angular gap analysis.

use nalgebra::linalg::{Schur, SVD};
use nalgebra::{Matrix3, Vector3};

/// Iteration cap for the eigen and singular value solvers. nalgebra's
/// defaults loop until convergence, which some degenerate inputs never reach.
const MAX_SOLVER_ITERS: usize = 500;

/// Angle of `p` about `center` in degrees, clockwise from 12 o'clock (+y),
/// in `[0, 360)`.
pub fn clock_angle(center: (f64, f64), p: (f64, f64)) -> f64 {
    let a = (p.0 - center.0).atan2(p.1 - center.1).to_degrees();
    normalize_deg(a)
}

pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles, in `[0, 180]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("ellipse fit needs at least 6 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate point set (collinear or coincident)")]
    Degenerate,
    #[error("no ellipse solution for this point set")]
    NotAnEllipse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseFit {
    pub center: (f64, f64),
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Major-axis direction, degrees counterclockwise from +x, in `(-90, 90]`.
    pub orientation: f64,
    pub eccentricity: f64,
    /// Root mean square of the first-order (Sampson) geometric residuals, cm.
    pub residual_rms: f64,
}

/// Direct least-squares ellipse fit in the numerically stable
/// Halir-Flusser formulation. Points are centered and scaled before the
/// fit; the result is mapped back to page coordinates.
pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<EllipseFit, FitError> {
    let n = points.len();
    if n < 6 {
        return Err(FitError::TooFewPoints(n));
    }
    let (mx, my) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.0, sy + p.1));
    let (mx, my) = (mx / n as f64, my / n as f64);
    let spread =
        (points.iter().map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2)).sum::<f64>() / n as f64).sqrt();
    if !(spread > 1e-12) || !spread.is_finite() {
        return Err(FitError::Degenerate);
    }
    // Five distinct points are the minimum that determine a conic.
    let mut distinct: Vec<(u64, u64)> = points.iter().map(|p| (p.0.to_bits(), p.1.to_bits())).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(FitError::Degenerate);
    }
    let norm: Vec<(f64, f64)> = points.iter().map(|p| ((p.0 - mx) / spread, (p.1 - my) / spread)).collect();

    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for &(u, v) in &norm {
        let quad = Vector3::new(u * u, u * v, v * v);
        let lin = Vector3::new(u, v, 1.0);
        s1 += quad * quad.transpose();
        s2 += quad * lin.transpose();
        s3 += lin * lin.transpose();
    }
    // Collinear points make the linear scatter matrix singular.
    let lin_scale = s3.abs().max();
    if s3.determinant().abs() < 1e-12 * lin_scale.powi(3) {
        return Err(FitError::Degenerate);
    }
    let s3_inv = s3.try_inverse().ok_or(FitError::Degenerate)?;
    let t = -(s3_inv * s2.transpose());
    let m = s1 + s2 * t;
    // Premultiply by the inverse of the ellipse constraint matrix.
    let reduced = Matrix3::from_rows(&[
        m.row(2) * 0.5,
        -m.row(1),
        m.row(0) * 0.5,
    ]);

    let eigenvalues = Schur::try_new(reduced, f64::EPSILON, MAX_SOLVER_ITERS)
        .ok_or(FitError::Degenerate)?
        .complex_eigenvalues();
    let mut best: Option<(Vector3<f64>, f64)> = None;
    for ev in eigenvalues.iter() {
        if ev.im.abs() > 1e-9 * (1.0 + ev.re.abs()) {
            continue;
        }
        let shifted = reduced - Matrix3::identity() * ev.re;
        let Some(svd) = SVD::try_new(shifted, false, true, f64::EPSILON, MAX_SOLVER_ITERS) else {
            continue;
        };
        let v_t = match svd.v_t {
            Some(v) => v,
            None => continue,
        };
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let a1: Vector3<f64> = v_t.row(idx).transpose();
        let cond = 4.0 * a1[0] * a1[2] - a1[1] * a1[1];
        if cond > 0.0 && best.map_or(true, |(_, c)| cond > c) {
            best = Some((a1, cond));
        }
    }
    let (quad, _) = best.ok_or(FitError::NotAnEllipse)?;
    let lin = t * quad;
    let conic = [quad[0], quad[1], quad[2], lin[0], lin[1], lin[2]];

    let geom = conic_to_ellipse(&conic).ok_or(FitError::NotAnEllipse)?;
    let residual_rms = (norm.iter().map(|&(u, v)| sampson_sq(&conic, u, v)).sum::<f64>() / n as f64)
        .sqrt()
        * spread;
    Ok(EllipseFit {
        center: (mx + spread * geom.center.0, my + spread * geom.center.1),
        semi_major: geom.semi_major * spread,
        semi_minor: geom.semi_minor * spread,
        orientation: geom.orientation,
        eccentricity: geom.eccentricity,
        residual_rms,
    })
}

fn sampson_sq(c: &[f64; 6], u: f64, v: f64) -> f64 {
    let [a, b, cc, d, e, f] = *c;
    let val = a * u * u + b * u * v + cc * v * v + d * u + e * v + f;
    let gx = 2.0 * a * u + b * v + d;
    let gy = b * u + 2.0 * cc * v + e;
    let g2 = gx * gx + gy * gy;
    if g2 > 0.0 {
        val * val / g2
    } else {
        0.0
    }
}

/// Geometric parameters of `A x² + B xy + C y² + D x + E y + F = 0`.
fn conic_to_ellipse(c: &[f64; 6]) -> Option<EllipseFit> {
    // Normalize the sign so the quadratic part has positive trace.
    let sign = if c[0] + c[2] < 0.0 { -1.0 } else { 1.0 };
    let [a, b, cc, d, e, f] = c.map(|v| v * sign);
    let det = 4.0 * a * cc - b * b;
    if !(det > 0.0) {
        return None;
    }
    let cx = (b * e - 2.0 * cc * d) / det;
    let cy = (b * d - 2.0 * a * e) / det;
    let f_center = f + 0.5 * (d * cx + e * cy);

    let mean = 0.5 * (a + cc);
    let half_diff = (0.5 * (a - cc)).hypot(0.5 * b);
    let (lo, hi) = (mean - half_diff, mean + half_diff);
    if !(lo > 0.0) || !(f_center < 0.0) {
        return None;
    }
    let semi_major = (-f_center / lo).sqrt();
    let semi_minor = (-f_center / hi).sqrt();
    let eccentricity = (2.0 * half_diff / hi).sqrt().min(1.0 - f64::EPSILON);
    // The larger eigenvalue's eigenvector lies along the minor axis.
    let minor_dir = 0.5 * b.atan2(a - cc);
    let mut orientation = (minor_dir + std::f64::consts::FRAC_PI_2).to_degrees();
    while orientation <= -90.0 {
        orientation += 180.0;
    }
    while orientation > 90.0 {
        orientation -= 180.0;
    }
    Some(EllipseFit {
        center: (cx, cy),
        semi_major,
        semi_minor,
        orientation,
        eccentricity,
        residual_rms: 0.0,
    })
}

/// Gaps between angularly consecutive directions, wrapping around.
/// The gaps of a nonempty set always sum to 360.
pub fn angular_gaps(angles: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = angles.iter().map(|&a| normalize_deg(a)).collect();
    sorted.sort_by(f64::total_cmp);
    match sorted.len() {
        0 => Vec::new(),
        1 => vec![360.0],
        n => {
            let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.push(360.0 - sorted[n - 1] + sorted[0]);
            gaps
        }
    }
}

/// Largest empty arc, in degrees, among the given directions. `None` for
/// an empty set.
pub fn largest_angular_gap(angles: &[f64]) -> Option<f64> {
    angular_gaps(angles).into_iter().reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse_points(a: f64, b: f64, rot_deg: f64, center: (f64, f64), n: usize) -> Vec<(f64, f64)> {
        let (s, c) = rot_deg.to_radians().sin_cos();
        (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (x, y) = (a * t.cos(), b * t.sin());
                (center.0 + c * x - s * y, center.1 + s * x + c * y)
            })
            .collect()
    }

    #[test]
    fn exact_circle() {
        let fit = fit_ellipse(&ellipse_points(4.0, 4.0, 0.0, (0.0, 0.0), 360)).unwrap();
        assert!((fit.semi_major - 4.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.semi_minor - 4.0).abs() < 1e-6, "{fit:?}");
        assert!(fit.eccentricity < 1e-6, "{fit:?}");
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn exact_ellipse_eccentricity() {
        let fit = fit_ellipse(&ellipse_points(2.0, 1.0, 0.0, (3.0, -1.0), 200)).unwrap();
        assert!((fit.eccentricity - 0.8660).abs() < 1e-4);
        assert!((fit.center.0 - 3.0).abs() < 1e-9 && (fit.center.1 + 1.0).abs() < 1e-9);
        assert!(fit.orientation.abs() < 1e-6);
    }

    #[test]
    fn rotated_ellipse_orientation() {
        for rot in [-60.0, -10.0, 30.0, 75.0, 90.0] {
            let fit = fit_ellipse(&ellipse_points(3.0, 1.5, rot, (1.0, 2.0), 100)).unwrap();
            let d = angle_diff(2.0 * fit.orientation, 2.0 * rot) / 2.0;
            assert!(d < 1e-6, "rot {rot}: {fit:?}");
            assert!((fit.semi_major - 3.0).abs() < 1e-9);
            assert!((fit.semi_minor - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_arc_still_fits() {
        let pts: Vec<_> = ellipse_points(4.0, 3.0, 20.0, (0.0, 0.0), 360).into_iter().take(200).collect();
        let fit = fit_ellipse(&pts).unwrap();
        assert!((fit.semi_major - 4.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(fit_ellipse(&[(0.0, 0.0); 5]), Err(FitError::TooFewPoints(5)));
        let line: Vec<_> = (0..10).map(|k| (k as f64, 2.0 * k as f64 + 1.0)).collect();
        assert_eq!(fit_ellipse(&line), Err(FitError::Degenerate));
        assert_eq!(fit_ellipse(&[(1.0, 1.0); 8]), Err(FitError::Degenerate));
        // Repeated corners of a tiny square once sent the eigensolver into
        // an endless loop.
        let h = 1.0 / 64.0;
        let square: Vec<_> = [(0.0, 0.0), (0.0, -h), (-h, -h), (-h, 0.0)].iter().cycle().take(36).copied().collect();
        assert_eq!(fit_ellipse(&square), Err(FitError::Degenerate));
    }

    #[test]
    fn near_degenerate_inputs_terminate() {
        let h = 1.0 / 64.0;
        let mut pts = vec![(0.0, 0.0), (0.0, -h), (-h, -h), (-h, 0.0), (-h / 2.0, -h / 2.0)];
        pts.extend(std::iter::repeat_n((0.0, 0.0), 30));
        let _ = fit_ellipse(&pts);
    }

    #[test]
    fn gaps_of_full_and_partial_circles() {
        let full: Vec<f64> = (0..360).map(|k| k as f64).collect();
        assert!(largest_angular_gap(&full).unwrap() <= 1.0 + 1e-9);
        let arc: Vec<f64> = (0..=270).map(|k| k as f64).collect();
        assert!((largest_angular_gap(&arc).unwrap() - 90.0).abs() < 1.0 + 1e-9);
        assert_eq!(largest_angular_gap(&[42.0]), Some(360.0));
        assert_eq!(largest_angular_gap(&[]), None);
    }

    #[test]
    fn clock_angles() {
        let c = (0.0, 0.0);
        assert_eq!(clock_angle(c, (0.0, 1.0)), 0.0);
        assert!((clock_angle(c, (1.0, 0.0)) - 90.0).abs() < 1e-12);
        assert!((clock_angle(c, (0.0, -1.0)) - 180.0).abs() < 1e-12);
        assert!((clock_angle(c, (-1.0, 0.0)) - 270.0).abs() < 1e-12);
        assert_eq!(angle_diff(350.0, 10.0), 20.0);
        assert_eq!(angle_diff(60.0, 300.0), 120.0);
    }
}
