use rayon::prelude::*;

use crate::error::{DscError, Result};

/// Default safety factor applied to sampled suprema.
pub const DEFAULT_MARGIN: f64 = 1.1;

/// Axis-aligned box sampled on a uniform grid.
///
/// An axis with `lower == upper` collapses to a single grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
}

impl GridBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(DscError::Shape(format!(
                "box bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if resolution < 2 {
            return Err(DscError::config(format!(
                "box resolution must be at least 2, got {resolution}"
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(DscError::config(format!(
                    "box axis {i}: lower {lo} must not exceed upper {hi}"
                )));
            }
        }
        let counts = lower
            .iter()
            .zip(&upper)
            .map(|(lo, hi)| if lo == hi { 1 } else { resolution })
            .collect();
        Ok(Self {
            lower,
            upper,
            counts,
        })
    }

    /// Same extent `[lo, hi]` on every one of `dim` axes.
    pub fn uniform(dim: usize, lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], resolution)
    }

    /// Cartesian product; the grid of each factor is kept.
    pub fn product(&self, other: &GridBox) -> GridBox {
        GridBox {
            lower: [self.lower.as_slice(), other.lower.as_slice()].concat(),
            upper: [self.upper.as_slice(), other.upper.as_slice()].concat(),
            counts: [self.counts.as_slice(), other.counts.as_slice()].concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate of grid index `k` on `axis`.
    pub fn coordinate(&self, axis: usize, k: usize) -> f64 {
        let n = self.counts[axis];
        if n == 1 {
            return self.lower[axis];
        }
        let (lo, hi) = (self.lower[axis], self.upper[axis]);
        if k + 1 == n {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Multi-index of the `idx`-th point; the first axis varies slowest.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = idx % self.counts[axis];
            idx /= self.counts[axis];
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.point_at(&self.multi_index(idx))
    }

    pub fn point_at(&self, multi: &[usize]) -> Vec<f64> {
        multi
            .iter()
            .enumerate()
            .map(|(axis, &k)| self.coordinate(axis, k))
            .collect()
    }
}

/// Maximum of a fallible function over the grid.
///
/// Evaluation is parallel; the reduction is a plain max, so the result does
/// not depend on scheduling. On failure the error from the lowest grid index
/// is returned.
pub fn max_over_grid<F>(grid: &GridBox, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let folded = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx);
            match f(&p) {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err((
                    idx,
                    DscError::NonFinite(format!("sample {v} at grid point {p:?}")),
                )),
                Err(e) => Err((idx, e)),
            }
        })
        .reduce(
            || Ok(f64::NEG_INFINITY),
            |a, b| match (a, b) {
                (Ok(x), Ok(y)) => Ok(x.max(y)),
                (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
                (Err(e1), Err(e2)) => Err(if e1.0 <= e2.0 { e1 } else { e2 }),
            },
        );
    folded.map_err(|(_, e)| e)
}

/// `margin · max |g|` over the grid.
pub fn sup_over_box<F>(g: F, grid: &GridBox, margin: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(DscError::config(format!(
            "margin must be positive, got {margin}"
        )));
    }
    Ok(margin * max_over_grid(grid, |p| Ok(g(p).abs()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_on_symmetric_interval() {
        let b = GridBox::new(vec![-1.0], vec![1.0], 11).unwrap();
        assert_eq!(sup_over_box(|x| x[0], &b, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn sine_peak_found_on_dense_grid() {
        let b = GridBox::new(vec![0.0], vec![std::f64::consts::PI], 101).unwrap();
        assert!(sup_over_box(|x| x[0].sin(), &b, 1.0).unwrap() >= 0.9995);
    }

    #[test]
    fn margin_scales_result() {
        let b = GridBox::uniform(2, -2.0, 2.0, 5).unwrap();
        let a = sup_over_box(|x| x[0] * x[1], &b, 1.0).unwrap();
        let c = sup_over_box(|x| x[0] * x[1], &b, DEFAULT_MARGIN).unwrap();
        assert!((c - 1.1 * a).abs() < 1e-12);
    }

    #[test]
    fn degenerate_axis_is_a_point() {
        let b = GridBox::new(vec![0.5, -1.0], vec![0.5, 1.0], 3).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.point(2), vec![0.5, 1.0]);
    }

    #[test]
    fn invalid_boxes() {
        assert!(GridBox::new(vec![1.0], vec![0.0], 3).is_err());
        assert!(GridBox::new(vec![0.0], vec![1.0], 1).is_err());
        assert!(GridBox::new(vec![0.0], vec![1.0, 2.0], 3).is_err());
    }

    #[test]
    fn non_finite_sample_reports_coordinates() {
        let b = GridBox::new(vec![-1.0], vec![1.0], 3).unwrap();
        let err = sup_over_box(|x| 1.0 / x[0], &b, 1.0).unwrap_err();
        assert!(err.to_string().contains("[0.0]"), "{err}");
    }

    #[test]
    fn product_enumerates_all_pairs() {
        let a = GridBox::uniform(1, 0.0, 1.0, 2).unwrap();
        let b = GridBox::uniform(1, 0.0, 2.0, 3).unwrap();
        let p = a.product(&b);
        assert_eq!(p.len(), 6);
        assert_eq!(p.point(5), vec![1.0, 2.0]);
    }
}
