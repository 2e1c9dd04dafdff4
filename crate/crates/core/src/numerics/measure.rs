use super::{symmetric_eigenvalues, Matrix};
use crate::error::{DscError, Result};

/// Largest tolerated `‖Θ‖∞ ‖Θ⁻¹‖∞` for a metric transform.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Matrix measure induced by the ∞-norm: `maxᵢ (Aᵢᵢ + Σ_{j≠i} |Aᵢⱼ|)`.
pub fn matrix_measure_inf(a: &Matrix) -> Result<f64> {
    a.require_square()?;
    Ok((0..a.rows())
        .map(|i| {
            a[(i, i)]
                + (0..a.cols())
                    .filter(|&j| j != i)
                    .map(|j| a[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Matrix measure induced by the 2-norm: largest eigenvalue of `(A + Aᵀ)/2`.
pub fn matrix_measure_2(a: &Matrix) -> Result<f64> {
    let eig = symmetric_eigenvalues(a)?;
    Ok(eig.last().copied().unwrap_or(f64::NEG_INFINITY))
}

/// `‖A‖∞ ‖A⁻¹‖∞`, infinite when `A` is numerically singular.
pub fn condition_estimate(a: &Matrix) -> Result<f64> {
    a.require_square()?;
    match a.inverse() {
        Ok(inv) => Ok(a.norm_inf() * inv.norm_inf()),
        Err(DscError::Conditioning { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Generalized Jacobian `F = (Θ̇ + Θ J) Θ⁻¹`.
pub fn generalized_jacobian(theta: &Matrix, theta_dot: &Matrix, jac: &Matrix) -> Result<Matrix> {
    generalized_jacobian_with_cap(theta, theta_dot, jac, DEFAULT_CONDITION_CAP)
}

pub fn generalized_jacobian_with_cap(
    theta: &Matrix,
    theta_dot: &Matrix,
    jac: &Matrix,
    cap: f64,
) -> Result<Matrix> {
    theta.require_square()?;
    jac.require_square()?;
    if theta.rows() != jac.rows() || theta_dot.rows() != jac.rows() || !theta_dot.is_square() {
        return Err(DscError::Shape(format!(
            "metric {}x{}, metric rate {}x{}, Jacobian {}x{}",
            theta.rows(),
            theta.cols(),
            theta_dot.rows(),
            theta_dot.cols(),
            jac.rows(),
            jac.cols()
        )));
    }
    let estimate = condition_estimate(theta)?;
    if !(estimate <= cap) {
        return Err(DscError::Conditioning { estimate, cap });
    }
    let inv = theta.inverse()?;
    theta_dot.add(&theta.matmul(jac)?)?.matmul(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_measure_of_fast_subsystem() {
        let kappa = 2.0;
        let a = Matrix::diag(&[-1.0, -1.0 / kappa]);
        assert_eq!(matrix_measure_inf(&a).unwrap(), -0.5);
        assert_eq!(matrix_measure_inf(&Matrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn two_measure_basics() {
        assert!((matrix_measure_2(&Matrix::diag(&[-5.0; 3])).unwrap() + 5.0).abs() < 1e-12);
        let skew = Matrix::from_rows(&[
            vec![0.0, 2.0, -1.0],
            vec![-2.0, 0.0, 3.0],
            vec![1.0, -3.0, 0.0],
        ])
        .unwrap();
        assert!(matrix_measure_2(&skew).unwrap().abs() < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(matrix_measure_inf(&a), Err(DscError::Shape(_))));
        assert!(matches!(matrix_measure_2(&a), Err(DscError::Shape(_))));
    }

    #[test]
    fn identity_metric_is_identity_map() {
        let j = Matrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 4.0]]).unwrap();
        let f = generalized_jacobian(&Matrix::identity(2), &Matrix::zeros(2, 2), &j).unwrap();
        assert_eq!(f, j);
        let f2 = generalized_jacobian(&Matrix::identity(2).scale(2.0), &Matrix::zeros(2, 2), &j)
            .unwrap();
        assert!(f2.sub(&j).unwrap().norm_inf() < 1e-14);
    }

    #[test]
    fn singular_metric_rejected() {
        let theta = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let err = generalized_jacobian(&theta, &Matrix::zeros(2, 2), &Matrix::identity(2));
        assert!(matches!(err, Err(DscError::Conditioning { .. })));
        let near = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-14]]).unwrap();
        let err = generalized_jacobian(&near, &Matrix::zeros(2, 2), &Matrix::identity(2));
        assert!(matches!(err, Err(DscError::Conditioning { .. })));
    }
}
