//! The 3x3 least-squares system for the plane-motion parameters (A, B, C)
//! and its solution.

use crate::error::{Error, Result};
use crate::tensor::Image;

use super::{TtcConfig, TtcEstimate};

/// Normal equations of `min sum (A ex + B ey + C g + et)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalSystem {
    /// Gram matrix of `[ex, ey, g]`.
    pub m: [[f64; 3]; 3],
    /// `-(sum ex et, sum ey et, sum g et)`.
    pub rhs: [f64; 3],
    /// `sum et^2`, the objective at `(0, 0, 0)`.
    pub et_sq: f64,
    /// Number of summed pixels.
    pub count: usize,
}

impl NormalSystem {
    /// Sum of squared constraint residuals at `p = (A, B, C)`.
    pub fn objective(&self, p: [f64; 3]) -> f64 {
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += p[i] * self.m[i][j] * p[j];
            }
        }
        let lin: f64 = (0..3).map(|i| p[i] * self.rhs[i]).sum();
        quad - 2.0 * lin + self.et_sq
    }
}

/// Sums over the region that excludes `border` pixels on every side.
pub fn build_normal_system(ex: &Image, ey: &Image, g: &Image, et: &Image, border: usize) -> Result<NormalSystem> {
    let dims = ex.dims();
    if [ey, g, et].iter().any(|t| t.dims() != dims) || ex.ndim() != 2 {
        return Err(Error::Shape("ex, ey, g and et must share 2-D extents".into()));
    }
    let (h, w) = (ex.height(), ex.width());
    if h <= 2 * border || w <= 2 * border {
        return Err(Error::Shape(format!("{w}x{h} field has no interior with a {border}-pixel border")));
    }
    let mut s = [0.0f64; 10];
    for y in border..h - border {
        let row = y * w;
        let cols = row + border..row + w - border;
        let (ex, ey, g, et) =
            (&ex.data()[cols.clone()], &ey.data()[cols.clone()], &g.data()[cols.clone()], &et.data()[cols]);
        for (((&x, &yy), &gg), &t) in ex.iter().zip(ey).zip(g).zip(et) {
            s[0] += x * x;
            s[1] += x * yy;
            s[2] += gg * x;
            s[3] += yy * yy;
            s[4] += gg * yy;
            s[5] += gg * gg;
            s[6] += x * t;
            s[7] += yy * t;
            s[8] += gg * t;
            s[9] += t * t;
        }
    }
    Ok(NormalSystem {
        m: [[s[0], s[1], s[2]], [s[1], s[3], s[4]], [s[2], s[4], s[5]]],
        rhs: [-s[6], -s[7], -s[8]],
        et_sq: s[9],
        count: (h - 2 * border) * (w - 2 * border),
    })
}

/// LDL^T factorisation of a symmetric 3x3 matrix. Returns the unit lower
/// factor and the pivots.
fn ldlt(m: &[[f64; 3]; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
    let mut l = [[0.0; 3]; 3];
    let mut d = [0.0; 3];
    for j in 0..3 {
        l[j][j] = 1.0;
        d[j] = m[j][j] - (0..j).map(|k| l[j][k] * l[j][k] * d[k]).sum::<f64>();
        for i in j + 1..3 {
            let v = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k] * d[k]).sum::<f64>();
            l[i][j] = if d[j] != 0.0 { v / d[j] } else { 0.0 };
        }
    }
    (l, d)
}

fn ldlt_solve(l: &[[f64; 3]; 3], d: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    let mut z = [0.0; 3];
    for i in 0..3 {
        z[i] = b[i] - (0..i).map(|k| l[i][k] * z[k]).sum::<f64>();
    }
    for i in 0..3 {
        z[i] /= d[i];
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        x[i] = z[i] - (i + 1..3).map(|k| l[k][i] * x[k]).sum::<f64>();
    }
    x
}

/// Solves for (A, B, C) and derives FOE and TTC.
///
/// A system whose smallest pivot falls below `pivot_tol` times its largest
/// diagonal entry is reported degenerate with `A = B = C = 0`. `|C| < c_min`
/// reports `ttc = +inf` and a NaN FOE.
pub fn solve_ttc(sys: &NormalSystem, cfg: &TtcConfig) -> TtcEstimate {
    let (l, d) = ldlt(&sys.m);
    let max_diag = (0..3).map(|i| sys.m[i][i]).fold(0.0f64, f64::max);
    let min_pivot = d.iter().copied().fold(f64::INFINITY, f64::min);
    let degenerate = !(max_diag > 0.0) || !(min_pivot >= cfg.pivot_tol * max_diag) || min_pivot <= 0.0;
    let p = if degenerate { [0.0; 3] } else { ldlt_solve(&l, &d, &sys.rhs) };
    let [a, b, c] = p;
    let (x0, y0, ttc) = if degenerate || c.abs() < cfg.c_min || !c.is_finite() {
        (f64::NAN, f64::NAN, f64::INFINITY)
    } else {
        (-a / c, -b / c, 1.0 / c)
    };
    let objective = sys.objective(p).max(0.0);
    let residual = if sys.count == 0 { 0.0 } else { objective / sys.count as f64 };
    let relative_residual = if sys.et_sq > 0.0 { (objective / sys.et_sq).min(1.0) } else { 0.0 };
    let c_rel_stderr = if ttc.is_finite() && sys.count > 3 {
        // (M^-1)_22 is the last entry of M^-1 e_2
        let m_inv_cc = ldlt_solve(&l, &d, &[0.0, 0.0, 1.0])[2];
        (objective / (sys.count - 3) as f64 * m_inv_cc).max(0.0).sqrt() / c.abs()
    } else {
        f64::INFINITY
    };
    TtcEstimate { a, b, c, x0, y0, ttc, residual, relative_residual, c_rel_stderr, level: 0, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;
    use crate::ttc::radial_gradient;

    fn field(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> Image {
        Tensor::from_fn(&[h, w], |i| f(i[0], i[1])).unwrap()
    }

    #[test]
    fn zero_system_is_degenerate() {
        let z = field(6, 6, |_, _| 0.0);
        let sys = build_normal_system(&z, &z, &z, &z, 1).unwrap();
        assert_eq!(sys.m, [[0.0; 3]; 3]);
        assert_eq!(sys.rhs, [0.0; 3]);
        let est = solve_ttc(&sys, &TtcConfig::default());
        assert!(est.degenerate);
        assert!(est.ttc.is_infinite() && est.x0.is_nan());
    }

    #[test]
    fn hand_summed_interior() {
        // 7x7 field, 1-pixel border => 5x5 = 25 summed pixels
        let ex = field(7, 7, |_, _| 1.0);
        let ey = field(7, 7, |_, _| 0.0);
        let g = radial_gradient(&ex, &ey).unwrap();
        let et = field(7, 7, |_, _| -1.0);
        let sys = build_normal_system(&ex, &ey, &g, &et, 1).unwrap();
        assert_eq!(sys.count, 25);
        assert_eq!(sys.m[0][0], 25.0);
        assert_eq!(sys.rhs[0], 25.0);
        // x_c over the interior is -2..=2 on 5 rows: sum 0, sum of squares 50
        assert_eq!(sys.m[0][2], 0.0);
        assert_eq!(sys.m[2][2], 50.0);
    }

    #[test]
    fn empty_interior() {
        let z = field(2, 5, |_, _| 0.0);
        assert!(matches!(build_normal_system(&z, &z, &z, &z, 1), Err(Error::Shape(_))));
    }

    #[test]
    fn recovers_exact_parameters() {
        // Fields generated from a known (A, B, C) with et chosen so the
        // constraint holds exactly.
        let (a, b, c) = (0.3, -0.2, 0.05);
        let ex = field(9, 11, |y, x| ((x * 7 + y * 3) as f64).sin());
        let ey = field(9, 11, |y, x| ((x * 2 + y * 5) as f64).cos());
        let g = radial_gradient(&ex, &ey).unwrap();
        let et = Tensor::new(
            vec![9, 11],
            (0..99).map(|i| -(a * ex.data()[i] + b * ey.data()[i] + c * g.data()[i])).collect(),
        )
        .unwrap();
        let sys = build_normal_system(&ex, &ey, &g, &et, 1).unwrap();
        let est = solve_ttc(&sys, &TtcConfig::default());
        assert!(!est.degenerate);
        assert!((est.a - a).abs() < 1e-12 && (est.b - b).abs() < 1e-12 && (est.c - c).abs() < 1e-12);
        assert!((est.ttc - 20.0).abs() < 1e-9);
        assert!((est.x0 + 6.0).abs() < 1e-9 && (est.y0 - 4.0).abs() < 1e-9);
        assert!(est.residual < 1e-12);
        assert!(est.c_rel_stderr < 1e-6);
    }

    #[test]
    fn small_c_is_infinite_ttc() {
        let ex = field(9, 9, |y, x| ((x * 7 + y * 3) as f64).sin());
        let ey = field(9, 9, |y, x| ((x * 2 + y * 5) as f64).cos());
        let g = radial_gradient(&ex, &ey).unwrap();
        let et = ex.map(|v| -0.5 * v);
        let sys = build_normal_system(&ex, &ey, &g, &et, 1).unwrap();
        let est = solve_ttc(&sys, &TtcConfig::default());
        assert!(!est.degenerate);
        assert!(est.c.abs() < 1e-9);
        assert_eq!(est.ttc, f64::INFINITY);
        assert!(est.x0.is_nan() && est.y0.is_nan());
        assert_eq!(est.c_rel_stderr, f64::INFINITY);
    }

    #[test]
    fn stderr_matches_inverse_matrix() {
        let ex = field(9, 11, |y, x| ((x * 7 + y * 3) as f64).sin());
        let ey = field(9, 11, |y, x| ((x * 2 + y * 5) as f64).cos());
        let g = radial_gradient(&ex, &ey).unwrap();
        let et = field(9, 11, |y, x| -0.05 * g.at(y, x) + 0.01 * ((x * 5 + y * 11) as f64).sin());
        let sys = build_normal_system(&ex, &ey, &g, &et, 1).unwrap();
        let est = solve_ttc(&sys, &TtcConfig::default());
        let m = sys.m;
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let inv_cc = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
        let sigma2 = est.residual * sys.count as f64 / (sys.count - 3) as f64;
        let expected = (sigma2 * inv_cc).sqrt() / est.c.abs();
        assert!((est.c_rel_stderr - expected).abs() < 1e-9 * expected);
    }
}
