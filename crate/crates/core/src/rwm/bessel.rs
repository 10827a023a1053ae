//! Bessel functions of the first kind for whole runs of integer orders.

/// `J_0(x), …, J_{max_order}(x)` for `x ≥ 0`.
///
/// Upward recurrence is stable for orders below `x`; above it the values are
/// taken from Miller's downward recurrence, normalized with
/// `J_0 + 2 Σ J_{2k} = 1`. Relative accuracy is near machine precision
/// wherever `|J_n|` is not itself below ~1e-300.
pub fn bessel_j_orders(x: f64, max_order: usize, out: &mut Vec<f64>) {
    debug_assert!(x >= 0.0);
    out.clear();
    out.resize(max_order + 1, 0.0);
    if x == 0.0 {
        out[0] = 1.0;
        return;
    }
    let n_top = max_order.max(x as usize) + 1;
    // Start well above both the requested order and x.
    let start = n_top + 16 + (40.0 * n_top as f64).sqrt() as usize;
    let start = start + (start & 1);
    let inv_x = 1.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 * inv_x * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order <= max_order {
            out[order] = cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * cur;
        }
        // Rescale to stay inside the floating-point range.
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    norm += cur;
    let scale = 1.0 / norm;
    out.iter_mut().for_each(|v| *v *= scale);

    // Miller values lose accuracy below x; recompute those by the upward
    // recurrence from the accurate J_0 and J_1.
    let up_to = (x.floor() as usize).min(max_order);
    if up_to >= 2 {
        let (mut a, mut b) = (out[0], out[1]);
        for k in 1..up_to {
            let c = 2.0 * k as f64 * inv_x * b - a;
            a = b;
            b = c;
            out[k + 1] = c;
        }
    }
}

/// `J_n(x)` for any integer order and real argument, from a precomputed run
/// of non-negative orders at `|x|`.
#[inline]
pub fn signed_order(run: &[f64], order: i64, negative_x: bool) -> f64 {
    let k = order.unsigned_abs() as usize;
    let v = run.get(k).copied().unwrap_or(0.0);
    // J_{-k}(x) = (-1)^k J_k(x) and J_k(-x) = (-1)^k J_k(x)
    let flips = (order < 0) as u32 + negative_x as u32;
    if k % 2 == 1 && flips == 1 {
        -v
    } else {
        v
    }
}
