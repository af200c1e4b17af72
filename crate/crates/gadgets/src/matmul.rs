//! Matrix product over wire bundles: entry (i, j) is one iterated addition
//! over the row-times-column products, so the whole product costs one
//! multiply stage plus one iterated-add stage of depth regardless of the
//! shared dimension.

use crate::builder::GadgetBuilder;
use crate::fpops::g_mul;
use crate::iter::g_iter_add;
use crate::{FpWires, GadgetError, GadgetResult};

/// a is n1 x d (row major), bm is d x n2. Returns n1 x n2.
pub fn g_matmul(
    b: &mut GadgetBuilder,
    a: &[Vec<FpWires>],
    bm: &[Vec<FpWires>],
) -> GadgetResult<Vec<Vec<FpWires>>> {
    let n1 = a.len();
    let d = bm.len();
    if a.iter().any(|r| r.len() != d) {
        return Err(GadgetError::ShapeMismatch(format!(
            "left rows must have {d} entries"
        )));
    }
    let n2 = bm.first().map_or(0, |r| r.len());
    if bm.iter().any(|r| r.len() != n2) || d == 0 || n2 == 0 || n1 == 0 {
        return Err(GadgetError::ShapeMismatch(
            "empty or ragged operands".into(),
        ));
    }
    let mut out = Vec::with_capacity(n1);
    for row in a {
        let mut orow = Vec::with_capacity(n2);
        for j in 0..n2 {
            let mut terms = Vec::with_capacity(d);
            for (k, lhs) in row.iter().enumerate() {
                terms.push(g_mul(b, lhs, &bm[k][j])?);
            }
            orow.push(g_iter_add(b, &terms)?);
        }
        out.push(orow);
    }
    Ok(out)
}
