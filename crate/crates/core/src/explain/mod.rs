//! Tree models, random forests and exact TreeSHAP attributions.

mod cart;
mod forest;
mod shap;
mod surrogate;

pub use cart::{fit_tree, Node, Task, TreeModel, TreeParams};
pub use forest::{default_max_features, fit_forest, ForestModel, ForestParams};
pub use shap::{expected_value, tree_shap, tree_shap_single, ShapAttribution};
pub use surrogate::{aggregate_shap, surrogate_features, ShapRow, ShapTable, SurrogateParams, SURROGATE_FEATURES};

use crate::{stats, Error, Result};

/// Coefficient of determination `1 - SS_res / SS_tot`, zero when `y` is constant.
pub fn r_squared(pred: &[f64], y: &[f64]) -> Result<f64> {
    if pred.len() != y.len() || y.len() < 2 {
        return Err(Error::arg("r_squared needs two equal-length vectors of length >= 2"));
    }
    let m = stats::mean(y);
    let ss_tot = stats::sum(y.iter().map(|v| (v - m) * (v - m)));
    if ss_tot == 0.0 {
        return Ok(0.0);
    }
    let ss_res = stats::sum(pred.iter().zip(y).map(|(p, v)| (v - p) * (v - p)));
    Ok(1.0 - ss_res / ss_tot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_squared_examples() {
        let y = [1.0, 2.0, 3.0, 6.0];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(r_squared(&[3.0; 4], &y).unwrap(), 0.0);
        // SS_tot = 4 + 1 + 0 + 9 = 14, SS_res = 0 + 1 + 1 + 4 = 6.
        let r2 = r_squared(&[1.0, 3.0, 2.0, 4.0], &y).unwrap();
        assert!((r2 - (1.0 - 6.0 / 14.0)).abs() < 1e-15);
        assert_eq!(r_squared(&[1.0, 1.0], &[2.0, 2.0]).unwrap(), 0.0);
        assert!(r_squared(&[1.0], &[1.0]).is_err());
    }
}
