use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Objective, PLConstants, Saddle, SaddleProblem};
use crate::error::{Error, Result};

/// Floor substituted for `L12 = L21` when the cross Hessian vanishes.
/// The solvers divide and multiply by `L12`; a truly decoupled problem is
/// better solved as two independent PL problems.
pub const DEFAULT_CROSS_FLOOR: f64 = 1e-8;

/// Relative eigenvalue cutoff: anything at or below `EIG_CUTOFF * largest`
/// is treated as zero.
const EIG_CUTOFF: f64 = 1e-9;

/// Relative cutoff on the singular values of the stationarity system.
const SINGULAR_CUTOFF: f64 = 1e-12;

/// `f(x, y) = 1/2 x'Px + x'Qy - 1/2 y'Ry + b_x'x + b_y'y + c`
/// with `P`, `R` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadraticSaddle {
    p: DMatrix<f64>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    lin_x: DVector<f64>,
    lin_y: DVector<f64>,
    offset: f64,
    p_pinv: DMatrix<f64>,
    r_pinv: DMatrix<f64>,
}

impl QuadraticSaddle {
    pub fn new(
        p: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        lin_x: DVector<f64>,
        lin_y: DVector<f64>,
        offset: f64,
    ) -> Result<Self> {
        let n = p.nrows();
        let m = r.nrows();
        if !p.is_square() || !r.is_square() {
            return Err(Error::Shape("P and R must be square".into()));
        }
        if q.shape() != (n, m) || lin_x.len() != n || lin_y.len() != m {
            return Err(Error::Shape(format!(
                "inconsistent quadratic blocks: P {n}x{n}, Q {:?}, R {m}x{m}, b_x {}, b_y {}",
                q.shape(),
                lin_x.len(),
                lin_y.len()
            )));
        }
        let p = symmetric_part(&p);
        let r = symmetric_part(&r);
        let p_pinv = psd_pinv(&p);
        let r_pinv = psd_pinv(&r);
        Ok(QuadraticSaddle {
            p,
            q,
            r,
            lin_x,
            lin_y,
            offset,
            p_pinv,
            r_pinv,
        })
    }

    pub fn hessian_xx(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn hessian_xy(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `-R`, the (negative semidefinite) Hessian in `y`.
    pub fn hessian_yy(&self) -> DMatrix<f64> {
        -&self.r
    }

    /// Solves the joint stationarity system. `None` if it is singular.
    pub fn stationary_point(&self) -> Option<Saddle> {
        let n = self.p.nrows();
        let m = self.r.nrows();
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.p);
        k.view_mut((0, n), (n, m)).copy_from(&self.q);
        k.view_mut((n, 0), (m, n)).copy_from(&self.q.transpose());
        k.view_mut((n, n), (m, m)).copy_from(&(-&self.r));
        let sv = k.singular_values();
        let smax = sv.max();
        if smax == 0.0 || sv.min() <= SINGULAR_CUTOFF * smax {
            return None;
        }
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-&self.lin_x));
        rhs.rows_mut(n, m).copy_from(&(-&self.lin_y));
        let z = k.lu().solve(&rhs)?;
        let x = z.rows(0, n).into_owned();
        let y = z.rows(n, m).into_owned();
        let value = self.value(&x, &y);
        Some(Saddle { x, y, value })
    }
}

impl Objective for QuadraticSaddle {
    fn dim_x(&self) -> usize {
        self.p.nrows()
    }

    fn dim_y(&self) -> usize {
        self.r.nrows()
    }

    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + x.dot(&(&self.q * y)) - 0.5 * y.dot(&(&self.r * y))
            + self.lin_x.dot(x)
            + self.lin_y.dot(y)
            + self.offset
    }

    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.p * x + &self.q * y + &self.lin_x
    }

    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.q.tr_mul(x) - &self.r * y + &self.lin_y
    }

    // Exact whenever the linear term lies in range(R), which holds for the
    // built-in constructions.
    fn argmax_y(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(&self.r_pinv * (self.q.tr_mul(x) + &self.lin_y))
    }

    fn argmin_x(&self, y: &DVector<f64>) -> Option<DVector<f64>> {
        Some(-(&self.p_pinv * (&self.q * y + &self.lin_x)))
    }
}

fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn psd_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let inv = eig.eigenvalues.map(|l| {
        if top > 0.0 && l > EIG_CUTOFF * top {
            1.0 / l
        } else {
            0.0
        }
    });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// `(largest eigenvalue, least eigenvalue above the relative cutoff)` of a
/// symmetric PSD matrix.
fn psd_extremes(m: &DMatrix<f64>, block: &'static str) -> Result<(f64, f64)> {
    let sym = symmetric_part(m);
    let eigs = SymmetricEigen::new(sym).eigenvalues;
    let top = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bottom = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if top.is_nan() || top <= 0.0 {
        return Err(Error::DegenerateBlock { block });
    }
    if bottom < -EIG_CUTOFF * top {
        return Err(Error::NotPsd {
            min_eigenvalue: bottom,
        });
    }
    let modulus = eigs
        .iter()
        .cloned()
        .filter(|&l| l > EIG_CUTOFF * top)
        .fold(f64::INFINITY, f64::min);
    Ok((top, modulus))
}

/// Constants of a quadratic saddle from its Hessian blocks, with the
/// default cross-constant floor.
pub fn quadratic_constants(
    hessian_xx: &DMatrix<f64>,
    hessian_xy: &DMatrix<f64>,
    hessian_yy: &DMatrix<f64>,
) -> Result<PLConstants> {
    quadratic_constants_with_floor(hessian_xx, hessian_xy, hessian_yy, DEFAULT_CROSS_FLOOR)
}

/// `L11`, `L22` are the top eigenvalues of `H_xx` and `-H_yy`; `mu1`, `mu2`
/// their least eigenvalues above `1e-9` times the top one (the PL modulus of
/// a possibly singular quadratic); `L12 = L21` is the spectral norm of
/// `H_xy`, replaced by `cross_floor` when that is zero.
pub fn quadratic_constants_with_floor(
    hessian_xx: &DMatrix<f64>,
    hessian_xy: &DMatrix<f64>,
    hessian_yy: &DMatrix<f64>,
    cross_floor: f64,
) -> Result<PLConstants> {
    let n = hessian_xx.nrows();
    let m = hessian_yy.nrows();
    if !hessian_xx.is_square() || !hessian_yy.is_square() || hessian_xy.shape() != (n, m) {
        return Err(Error::Shape(format!(
            "Hessian blocks {:?}, {:?}, {:?} are inconsistent",
            hessian_xx.shape(),
            hessian_xy.shape(),
            hessian_yy.shape()
        )));
    }
    let (l11, mu1) = psd_extremes(hessian_xx, "x")?;
    let (l22, mu2) = psd_extremes(&(-hessian_yy), "y")?;
    let cross = if hessian_xy.is_empty() {
        0.0
    } else {
        hessian_xy.singular_values().max()
    };
    let l12 = if cross > 0.0 { cross } else { cross_floor };
    PLConstants::new(l11, l12, l12, l22, mu1, mu2)
}

/// Robust least squares `|Ax - y|_M^2 - lambda |y - y0|_M^2` with
/// `|v|_M^2 = v'Mv`, `M` positive semidefinite and `lambda > 1`.
pub fn make_rls(
    a: &DMatrix<f64>,
    m: &DMatrix<f64>,
    y0: &DVector<f64>,
    lambda: f64,
) -> Result<SaddleProblem> {
    let rows = a.nrows();
    if m.shape() != (rows, rows) || y0.len() != rows {
        return Err(Error::Shape(format!(
            "A is {:?}, M is {:?}, y0 has {} entries",
            a.shape(),
            m.shape(),
            y0.len()
        )));
    }
    if lambda <= 1.0 || !lambda.is_finite() {
        return Err(Error::LambdaTooSmall(lambda));
    }
    let ms = symmetric_part(m);
    let norm = if m.is_empty() {
        0.0
    } else {
        m.singular_values().max()
    };
    let min_eig = SymmetricEigen::new(ms.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -EIG_CUTOFF * norm {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
        });
    }

    let atm = a.tr_mul(&ms);
    let p = &atm * a * 2.0;
    let q = &atm * -2.0;
    let r = &ms * (2.0 * (lambda - 1.0));
    let lin_x = DVector::zeros(a.ncols());
    let lin_y = &ms * y0 * (2.0 * lambda);
    let offset = -lambda * y0.dot(&(&ms * y0));
    let quad = QuadraticSaddle::new(p, q, r, lin_x, lin_y, offset)?;
    let constants = quadratic_constants(quad.hessian_xx(), quad.hessian_xy(), &quad.hessian_yy())?;
    let saddle = quad.stationary_point();
    SaddleProblem::new("rls", Arc::new(quad), constants, saddle)
}

/// `F(Ax, By)` with `F(u, v) = a/2 |u|^2 + <u, v> - b/2 |v|^2`.
/// The origin is always a saddle point.
pub fn make_composed_quadratic(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    strong_convexity: f64,
    strong_concavity: f64,
) -> Result<SaddleProblem> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "A maps into R^{} but B maps into R^{}",
            a.nrows(),
            b.nrows()
        )));
    }
    if strong_convexity.is_nan()
        || strong_concavity.is_nan()
        || strong_convexity <= 0.0
        || strong_concavity <= 0.0
    {
        return Err(Error::InvalidArgument(format!(
            "strong convexity/concavity must be positive, got {strong_convexity}, {strong_concavity}"
        )));
    }
    let p = a.tr_mul(a) * strong_convexity;
    let q = a.tr_mul(b);
    let r = b.tr_mul(b) * strong_concavity;
    let (n, m) = (a.ncols(), b.ncols());
    let quad = QuadraticSaddle::new(p, q, r, DVector::zeros(n), DVector::zeros(m), 0.0)?;
    let constants = quadratic_constants(quad.hessian_xx(), quad.hessian_xy(), &quad.hessian_yy())?;
    let saddle = Saddle {
        x: DVector::zeros(n),
        y: DVector::zeros(m),
        value: 0.0,
    };
    SaddleProblem::new(
        "composed_quadratic",
        Arc::new(quad),
        constants,
        Some(saddle),
    )
}
