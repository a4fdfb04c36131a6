//! Explicit tail bounds for the deviation between the windowed loss
//! estimator and the realized (or conditionally expected) loss.
//!
//! All three are evaluated in the log domain and capped at 1 only on return;
//! the nested evaluations use the uncapped values.

use crate::model::LossMatrix;

/// `ln` of `2(2k+1) m^{2k+1} exp(-2δ²(n-2k) / ((2k+1) m^{4k+4} (Λ_max ‖Π^{-1}‖)²))`.
pub fn lemma1_log_bound(
    n: u64,
    k: usize,
    m: usize,
    delta: f64,
    max_loss: f64,
    inv_norm: f64,
) -> f64 {
    if n <= 2 * k as u64 || !(delta > 0.0) {
        return 0.0;
    }
    let w = (2 * k + 1) as f64;
    let ln_m = (m as f64).ln();
    let scale = max_loss * inv_norm;
    let exponent = 2.0 * delta * delta * (n - 2 * k as u64) as f64
        / (w * (m as f64).powi(4 * k as i32 + 4) * scale * scale);
    (2.0 * w).ln() + w * ln_m - exponent
}

/// `ln` of `(m^{2k+2} ‖Π^{-1}‖ Λ_max / (δ/2)) · lemma1(δ/2)`.
pub fn lemma2_log_bound(
    n: u64,
    k: usize,
    m: usize,
    delta: f64,
    max_loss: f64,
    inv_norm: f64,
) -> f64 {
    if n <= 2 * k as u64 || !(delta > 0.0) {
        return 0.0;
    }
    let half = delta / 2.0;
    (2 * k + 2) as f64 * (m as f64).ln() + inv_norm.ln() + max_loss.ln() - half.ln()
        + lemma1_log_bound(n, k, m, half, max_loss, inv_norm)
}

/// `ln` of `|Δ| [2Λ_max(1 + m^{2k+2}‖Π^{-1}‖)/δ]^{m^{2k+2}} · lemma2(δ/2)`.
pub fn lemma4_log_bound(
    n: u64,
    k: usize,
    m: usize,
    delta: f64,
    max_loss: f64,
    inv_norm: f64,
    set_size: usize,
) -> f64 {
    if n <= 2 * k as u64 || !(delta > 0.0) || set_size == 0 {
        return 0.0;
    }
    let cells = (m as f64).powi(2 * k as i32 + 2);
    (set_size as f64).ln()
        + cells * (2.0 * max_loss * (1.0 + cells * inv_norm) / delta).ln()
        + lemma2_log_bound(n, k, m, delta / 2.0, max_loss, inv_norm)
}

fn capped(log_value: f64) -> f64 {
    log_value.min(0.0).exp()
}

/// Bound on `P(|G_k(Q̂, Π, f) - L_f| > δ)`.
pub fn lemma1_bound(n: u64, k: usize, delta: f64, loss: &LossMatrix, inv_norm: f64) -> f64 {
    capped(lemma1_log_bound(
        n,
        k,
        loss.size(),
        delta,
        loss.max_loss(),
        inv_norm,
    ))
}

/// Bound on `P(|G_k(Q̂, Π, f) - E[L_f | Z]| > δ)`.
pub fn lemma2_bound(n: u64, k: usize, delta: f64, loss: &LossMatrix, inv_norm: f64) -> f64 {
    capped(lemma2_log_bound(
        n,
        k,
        loss.size(),
        delta,
        loss.max_loss(),
        inv_norm,
    ))
}

/// Uniform version of [`lemma2_bound`] over a set of `set_size` channels and
/// all order-`k` denoisers.
pub fn lemma4_bound(
    n: u64,
    k: usize,
    delta: f64,
    loss: &LossMatrix,
    inv_norm: f64,
    set_size: usize,
) -> f64 {
    capped(lemma4_log_bound(
        n,
        k,
        loss.size(),
        delta,
        loss.max_loss(),
        inv_norm,
        set_size,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::hamming_loss;
    use approx::assert_relative_eq;

    fn h() -> LossMatrix {
        hamming_loss(2).unwrap()
    }

    #[test]
    fn lemma1_reference_value() {
        let b = lemma1_bound(10_000, 0, 0.05, &h(), 1.25);
        assert_relative_eq!(b, 4.0 * (-2.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn monotone_in_n_and_k() {
        let mut prev = 1.0;
        for n in [2_000u64, 20_000, 200_000, 2_000_000] {
            let b = lemma1_bound(n, 0, 0.05, &h(), 1.25);
            assert!(b <= prev);
            prev = b;
        }
        assert!(
            lemma1_log_bound(100_000, 1, 2, 0.05, 1.0, 1.25)
                > lemma1_log_bound(100_000, 0, 2, 0.05, 1.0, 1.25)
        );
        assert_eq!(lemma1_bound(100_000, 0, 1e6, &h(), 1.25), 0.0);
    }

    #[test]
    fn looser_bounds_dominate() {
        for n in [1_000u64, 100_000, 10_000_000] {
            let l1 = lemma1_bound(n, 0, 0.1, &h(), 1.25);
            assert!(lemma2_bound(n, 0, 0.1, &h(), 1.25) >= l1);
            assert!(lemma4_bound(n, 0, 0.1, &h(), 1.25, 2) >= l1);
        }
        assert!(lemma2_bound(1u64 << 40, 0, 0.1, &h(), 1.25) < 1e-100);
        assert!(lemma4_bound(1u64 << 40, 0, 0.1, &h(), 1.25, 2) < 1e-100);
    }

    #[test]
    fn degenerate_arguments_are_vacuous() {
        assert_eq!(lemma1_bound(2, 1, 0.1, &h(), 1.0), 1.0);
        assert_eq!(lemma2_bound(100, 0, 0.0, &h(), 1.0), 1.0);
    }
}
