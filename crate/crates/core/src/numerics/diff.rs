use super::{all_finite, Matrix, Vector};
use crate::error::{DscError, Result};

/// Per-axis central-difference steps `1e-6 · max(1, |xᵢ|)`.
pub fn default_steps(x: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| 1e-6 * xi.abs().max(1.0)).collect()
}

/// Central-difference Jacobian with a uniform step `h`.
pub fn jacobian_numeric<F>(field: F, x: &[f64], h: f64) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Vector,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(DscError::config(format!(
            "difference step must be positive, got {h}"
        )));
    }
    jacobian_with_steps(|p| Ok(field(p)), x, &vec![h; x.len()])
}

/// Central-difference Jacobian with [`default_steps`].
pub fn jacobian_numeric_default<F>(field: F, x: &[f64]) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Vector,
{
    jacobian_with_steps(|p| Ok(field(p)), x, &default_steps(x))
}

/// Central-difference Jacobian of a fallible field, one step per axis.
pub fn jacobian_with_steps<F>(field: F, x: &[f64], steps: &[f64]) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Result<Vector>,
{
    if steps.len() != x.len() {
        return Err(DscError::Shape(format!(
            "{} steps for a {}-dimensional point",
            steps.len(),
            x.len()
        )));
    }
    let mut probe = x.to_vec();
    let mut columns: Vec<Vector> = Vec::with_capacity(x.len());
    let mut rows = None;
    for (j, &h) in steps.iter().enumerate() {
        probe[j] = x[j] + h;
        let plus = field(&probe)?;
        probe[j] = x[j] - h;
        let minus = field(&probe)?;
        probe[j] = x[j];
        if !all_finite(&plus) || !all_finite(&minus) {
            return Err(DscError::NonFinite(format!(
                "field evaluation perturbing coordinate {j} at {x:?}"
            )));
        }
        let m = *rows.get_or_insert(plus.len());
        if plus.len() != m || minus.len() != m {
            return Err(DscError::Shape("field output length changed".into()));
        }
        columns.push(
            plus.iter()
                .zip(&minus)
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect(),
        );
    }
    let m = rows.unwrap_or(0);
    Ok(Matrix::from_fn(m, x.len(), |i, j| columns[j][i]))
}
