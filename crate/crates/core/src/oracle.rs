//! Central finite differences, used as an independent check on jets.

use crate::error::Result;
use crate::field::JetField;
use crate::jet::{MultiIndex, Point};

/// `∂^m f(p)` for `|m| ≤ 2` by central differences with step `h`.
pub fn finite_diff_oracle(f: &dyn JetField, p: Point, m: MultiIndex, h: f64) -> Result<f64> {
    let at = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut q = p;
        for &(axis, s) in shift {
            q[axis] += s;
        }
        Ok(f.value_at(q)?)
    };
    let axes: Vec<usize> = (0..3)
        .flat_map(|a| std::iter::repeat_n(a, m[a] as usize))
        .collect();
    match axes.as_slice() {
        [] => at(&[]),
        [a] => Ok((at(&[(*a, h)])? - at(&[(*a, -h)])?) / (2.0 * h)),
        [a, b] if a == b => Ok((at(&[(*a, h)])? - 2.0 * at(&[])? + at(&[(*a, -h)])?) / (h * h)),
        [a, b] => Ok((at(&[(*a, h), (*b, h)])?
            - at(&[(*a, h), (*b, -h)])?
            - at(&[(*a, -h), (*b, h)])?
            + at(&[(*a, -h), (*b, -h)])?)
            / (4.0 * h * h)),
        _ => Err(crate::error::Error::InvalidParameter(format!(
            "finite differences only up to order 2, got {m:?}"
        ))),
    }
}
