//! Applying an `m × m` matrix along every axis of an order-`t` tensor, i.e.
//! multiplying by `M^{⊗t}` without forming the `m^t × m^t` Kronecker product.

/// Returns `M^{⊗t} v` where `v` has `m^t` entries (first axis most
/// significant) and `matrix` is row-major `m × m`.
///
/// Costs `t · m^{t+1}` multiplies.
pub fn apply_along_axes(m: usize, order: usize, matrix: &[f64], v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(matrix.len(), m * m);
    debug_assert_eq!(v.len(), m.pow(order as u32));
    let mut cur = v.to_vec();
    let mut next = vec![0.0; cur.len()];
    let total = cur.len();
    // stride of the axis being contracted
    let mut stride = 1;
    for _ in 0..order {
        let block = stride * m;
        for base in (0..total).step_by(block) {
            for inner in 0..stride {
                for i in 0..m {
                    let row = &matrix[i * m..(i + 1) * m];
                    let mut acc = 0.0;
                    for (j, r) in row.iter().enumerate() {
                        acc += r * cur[base + j * stride + inner];
                    }
                    next[base + i * stride + inner] = acc;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        stride = block;
    }
    cur
}
