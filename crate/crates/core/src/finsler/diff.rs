//! Fourth-order central finite-difference stencils.
//!
//! Functions are vector-valued (`DVector<f64>`); scalar functions return a
//! length-1 vector. All stencils perturb along an arbitrary direction so they
//! can be nested freely.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

pub type Vec64 = DVector<f64>;

/// `d/ds f(x + s dir)` at `s = 0`, stencil `(-2, -1, 1, 2)`.
pub fn first<F>(f: &F, x: &Vec64, dir: &Vec64, h: f64) -> Result<Vec64>
where
    F: Fn(&Vec64) -> Result<Vec64>,
{
    let m2 = f(&(x - (2.0 * h) * dir))?;
    let m1 = f(&(x - h * dir))?;
    let p1 = f(&(x + h * dir))?;
    let p2 = f(&(x + (2.0 * h) * dir))?;
    Ok(((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * h))
}

/// `d²/ds² f(x + s dir)` at `s = 0`, given the centre value `f0`.
pub fn second<F>(f: &F, x: &Vec64, f0: &Vec64, dir: &Vec64, h: f64) -> Result<Vec64>
where
    F: Fn(&Vec64) -> Result<Vec64>,
{
    let m2 = f(&(x - (2.0 * h) * dir))?;
    let m1 = f(&(x - h * dir))?;
    let p1 = f(&(x + h * dir))?;
    let p2 = f(&(x + (2.0 * h) * dir))?;
    Ok(((p1 + m1) * 16.0 - (p2 + m2) - f0 * 30.0) / (12.0 * h * h))
}

pub fn unit(dim: usize, i: usize) -> Vec64 {
    DVector::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 })
}

/// Jacobian columns `∂f/∂x^j` for each coordinate `j`.
pub fn gradient<F>(f: &F, x: &Vec64, h: f64) -> Result<Vec<Vec64>>
where
    F: Fn(&Vec64) -> Result<Vec64>,
{
    (0..x.len()).map(|j| first(f, x, &unit(x.len(), j), h)).collect()
}

/// Hessian of a vector-valued function: entry `[j][k]` is `∂²f/∂x^j∂x^k`.
pub fn hessian<F>(f: &F, x: &Vec64, h: f64) -> Result<Vec<Vec<Vec64>>>
where
    F: Fn(&Vec64) -> Result<Vec64>,
{
    let n = x.len();
    let f0 = f(x)?;
    let mut out = vec![vec![DVector::zeros(f0.len()); n]; n];
    for j in 0..n {
        let ej = unit(n, j);
        out[j][j] = second(f, x, &f0, &ej, h)?;
        for k in (j + 1)..n {
            let ek = unit(n, k);
            let inner = |p: &Vec64| first(f, p, &ek, h);
            let v = first(&inner, x, &ej, h)?;
            out[k][j] = v.clone();
            out[j][k] = v;
        }
    }
    Ok(out)
}

/// Symmetrized Hessian of a scalar function.
pub fn scalar_hessian<F>(f: &F, x: &Vec64, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&Vec64) -> Result<Vec64>,
{
    let h3 = hessian(f, x, h)?;
    let n = x.len();
    Ok(DMatrix::from_fn(n, n, |j, k| h3[j][k][0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn cubic(p: &Vec64) -> Result<Vec64> {
        Ok(dvector![p[0].powi(3) * p[1] + (p[0] * p[1]).sin(), p[1].exp()])
    }

    #[test]
    fn stencils_match_analytic_derivatives() {
        let x = dvector![0.3, -0.7];
        let g = gradient(&cubic, &x, 1e-3).unwrap();
        let (a, b) = (x[0], x[1]);
        assert_relative_eq!(g[0][0], 3.0 * a * a * b + b * (a * b).cos(), epsilon = 1e-10);
        assert_relative_eq!(g[1][0], a.powi(3) + a * (a * b).cos(), epsilon = 1e-10);
        assert_relative_eq!(g[1][1], b.exp(), epsilon = 1e-10);

        let h = hessian(&cubic, &x, 1e-3).unwrap();
        assert_relative_eq!(h[0][0][0], 6.0 * a * b - b * b * (a * b).sin(), epsilon = 1e-8);
        let mixed = 3.0 * a * a + (a * b).cos() - a * b * (a * b).sin();
        assert_relative_eq!(h[0][1][0], mixed, epsilon = 1e-8);
        assert_relative_eq!(h[1][0][0], mixed, epsilon = 1e-8);
        assert_relative_eq!(h[1][1][1], b.exp(), epsilon = 1e-8);
    }

    #[test]
    fn quadratics_are_exact() {
        let q = |p: &Vec64| Ok(dvector![2.0 * p[0] * p[0] - 3.0 * p[0] * p[1] + p[1] * p[1]]);
        let m = scalar_hessian(&q, &dvector![0.1, 0.2], 0.1).unwrap();
        assert_relative_eq!(m, DMatrix::from_row_slice(2, 2, &[4.0, -3.0, -3.0, 2.0]), epsilon = 1e-12);
    }
}
