//! Closed-form quantities of the accessibility problem.
//!
//! Everything here is a pure function of its arguments. Transcendental
//! quantities are evaluated in double precision; path counts are exact
//! integers (`u128`, or [`BigUint`] in the big-count mode).

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Bracket used by [`solve_x0`]; `f` is strictly increasing from `f(0+) = 0`
/// and `f(3) > 10` for every `beta` in `(0, 1]`.
pub const X0_BRACKET: (f64, f64) = (1e-6, 3.0);
pub const X0_TOLERANCE: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 200;

/// Default absolute constant in the spacing-moment bound.
pub const DEFAULT_SPACING_CONSTANT: f64 = 3.0;

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta <= 0.0 || beta > 1.0 {
        return Err(Error::domain(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 || !v.is_finite() {
        return Err(Error::domain(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// `f(x) = (sinh x)^beta (cosh x)^(1 - beta)`.
pub fn eval_f(x: f64, beta: f64) -> Result<f64> {
    check_positive("x", x)?;
    check_beta(beta)?;
    Ok(f_unchecked(x, beta))
}

#[inline]
fn f_unchecked(x: f64, beta: f64) -> f64 {
    (beta * x.sinh().ln() + (1.0 - beta) * x.cosh().ln()).exp()
}

/// `f'(x) / f(x) = beta coth x + (1 - beta) tanh x`.
#[inline]
fn log_derivative(x: f64, beta: f64) -> f64 {
    beta / x.tanh() + (1.0 - beta) * x.tanh()
}

/// Root of `f(x) = 1`: bisection down to a narrow bracket, then a
/// bracket-safeguarded Newton polish.
pub fn solve_x0(beta: f64, tol: f64) -> Result<f64> {
    check_beta(beta)?;
    check_positive("tol", tol)?;
    let (mut lo, mut hi) = X0_BRACKET;
    let g = |x: f64| f_unchecked(x, beta) - 1.0;
    if g(lo) >= 0.0 || g(hi) <= 0.0 {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: g(lo).abs().min(g(hi).abs()),
        });
    }

    let mut iterations = 0;
    while hi - lo > 1e-3 && iterations < ROOT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut x = 0.5 * (lo + hi);
    while iterations < ROOT_MAX_ITER {
        let fx = f_unchecked(x, beta);
        let r = fx - 1.0;
        if r.abs() <= tol {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = r / (fx * log_derivative(x, beta));
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
        iterations += 1;
    }
    let residual = (f_unchecked(x, beta) - 1.0).abs();
    if residual <= tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations,
            residual,
        })
    }
}

/// `x_c(N) = x0 - ln(N) / (N f'(x0))`.
pub fn critical_x(n_dim: usize, beta: f64) -> Result<f64> {
    PhaseConstants::new(beta, 0.0)?.critical_x(n_dim)
}

/// The analytic constants of the phase transition for one `beta`, plus the
/// tolerance ladder derived from a base `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConstants {
    pub beta: f64,
    pub x0: f64,
    /// `f'(x0)`, equal to `beta coth x0 + (1 - beta) tanh x0` since `f(x0) = 1`.
    pub f_prime_x0: f64,
    /// Expected update count per coordinate in the antipodal case, `x0 coth x0`.
    pub alpha: f64,
    /// Expected update count per coordinate in general, `x0 f'(x0)`.
    pub gamma: f64,
    pub epsilon: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub epsilon3: f64,
    pub epsilon4: f64,
    /// Bound on the fraction of first-block updates near either end.
    pub delta: f64,
}

impl PhaseConstants {
    pub fn new(beta: f64, epsilon: f64) -> Result<Self> {
        check_beta(beta)?;
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::domain(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        let x0 = solve_x0(beta, X0_TOLERANCE)?;
        let coth = 1.0 / x0.tanh();
        let tanh = x0.tanh();
        let f_prime_x0 = beta * coth + (1.0 - beta) * tanh;
        let epsilon4 = epsilon.powf(0.125);
        Ok(Self {
            beta,
            x0,
            f_prime_x0,
            alpha: x0 * coth,
            gamma: x0 * f_prime_x0,
            epsilon,
            epsilon1: epsilon.sqrt(),
            epsilon2: epsilon.powf(0.25),
            epsilon3: epsilon.powf(0.125),
            epsilon4,
            delta: beta * coth / f_prime_x0 + epsilon4,
        })
    }

    /// Constants for Hamming distance `n` in dimension `n_dim`, with
    /// `beta = n / n_dim`.
    pub fn for_distance(n: usize, n_dim: usize, epsilon: f64) -> Result<Self> {
        if n == 0 || n > n_dim {
            return Err(Error::domain(format!(
                "need 1 <= n <= N, got n={n}, N={n_dim}"
            )));
        }
        Self::new(n as f64 / n_dim as f64, epsilon)
    }

    pub fn critical_x(&self, n_dim: usize) -> Result<f64> {
        if n_dim < 2 {
            return Err(Error::domain(format!("N must be >= 2, got {n_dim}")));
        }
        let n = n_dim as f64;
        Ok(self.x0 - n.ln() / (n * self.f_prime_x0))
    }

    /// Expected fraction of coordinates at odd parity after time fraction `t`.
    pub fn g(&self, t: f64) -> Result<f64> {
        g_profile(t, self)
    }
}

/// `sum_l M(n, l) x^l / l! = (sinh x)^n (cosh x)^(N - n)`.
pub fn m_series_sum(n: usize, n_dim: usize, x: f64) -> Result<f64> {
    check_counts(n, n_dim)?;
    check_positive("x", x)?;
    Ok(x.sinh().powi(n as i32) * x.cosh().powi((n_dim - n) as i32))
}

fn check_counts(n: usize, n_dim: usize) -> Result<()> {
    if n > n_dim {
        return Err(Error::domain(format!("need n <= N, got n={n}, N={n_dim}")));
    }
    if n_dim > i32::MAX as usize {
        return Err(Error::domain("N too large"));
    }
    Ok(())
}

/// Exact number of sequences in `{1..N}^ell` in which each of the first `n`
/// coordinates occurs an odd number of times and every other coordinate an
/// even number of times; equivalently the number of length-`ell` walks from
/// `0^N` to `1^n 0^(N-n)`.
///
/// Computed by integer dynamic programming over (coordinate, used length):
/// adding a coordinate that occurs `j` times to a sequence of length `m - j`
/// can be done in `C(m, j)` ways.
pub fn m_coefficient(n: usize, n_dim: usize, ell: usize) -> Result<u128> {
    check_counts(n, n_dim)?;
    let binom = binomial_rows_u128(ell)?;
    let mut ways = vec![0u128; ell + 1];
    ways[0] = 1;
    let mut next = vec![0u128; ell + 1];
    for coord in 0..n_dim {
        let parity = usize::from(coord < n);
        next.iter_mut().for_each(|w| *w = 0);
        for (m, slot) in next.iter_mut().enumerate() {
            let mut acc: u128 = 0;
            for j in (parity..=m).step_by(2) {
                let prev = ways[m - j];
                if prev == 0 {
                    continue;
                }
                let term = prev
                    .checked_mul(binom[m][j])
                    .ok_or_else(|| overflow(n, n_dim, ell))?;
                acc = acc
                    .checked_add(term)
                    .ok_or_else(|| overflow(n, n_dim, ell))?;
            }
            *slot = acc;
        }
        std::mem::swap(&mut ways, &mut next);
    }
    Ok(ways[ell])
}

fn overflow(n: usize, n_dim: usize, ell: usize) -> Error {
    Error::Overflow(format!(
        "M(n={n}, ell={ell}) with N={n_dim} exceeds 128 bits"
    ))
}

fn binomial_rows_u128(max: usize) -> Result<Vec<Vec<u128>>> {
    let mut rows: Vec<Vec<u128>> = Vec::with_capacity(max + 1);
    for m in 0..=max {
        let mut row = vec![1u128; m + 1];
        for j in 1..m {
            row[j] = rows[m - 1][j - 1]
                .checked_add(rows[m - 1][j])
                .ok_or_else(|| Error::Overflow(format!("binomial row {m} exceeds 128 bits")))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Big-count variant of [`m_coefficient`]; never overflows.
pub fn m_coefficient_big(n: usize, n_dim: usize, ell: usize) -> Result<BigUint> {
    check_counts(n, n_dim)?;
    let mut binom: Vec<Vec<BigUint>> = Vec::with_capacity(ell + 1);
    for m in 0..=ell {
        let mut row = vec![BigUint::from(1u8); m + 1];
        for j in 1..m {
            row[j] = &binom[m - 1][j - 1] + &binom[m - 1][j];
        }
        binom.push(row);
    }
    let zero = BigUint::from(0u8);
    let mut ways = vec![zero.clone(); ell + 1];
    ways[0] = BigUint::from(1u8);
    for coord in 0..n_dim {
        let parity = usize::from(coord < n);
        let mut next = vec![zero.clone(); ell + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            for j in (parity..=m).step_by(2) {
                if ways[m - j] != zero {
                    *slot += &ways[m - j] * &binom[m][j];
                }
            }
        }
        ways = next;
    }
    Ok(ways.swap_remove(ell))
}

/// Upper bound on the expected number of accessible paths at Hamming
/// distance `n`: `((sinh x)^n (cosh x)^(N-n))'`.
pub fn first_moment_upper(n: usize, n_dim: usize, x: f64) -> Result<f64> {
    check_counts(n, n_dim)?;
    if n == 0 {
        return Err(Error::domain("first moment bound needs n >= 1"));
    }
    check_positive("x", x)?;
    let (s, c) = (x.sinh(), x.cosh());
    let nf = n as f64;
    let rest = (n_dim - n) as f64;
    Ok(s.powi(n as i32 - 1) * c.powi((n_dim - n) as i32 - 1) * (nf * c * c + rest * s * s))
}

/// Probability that a fixed path of length `ell` is accessible given
/// endpoint values `0` and `x`: `x^(ell-1) / (ell-1)!`.
pub fn path_open_probability(ell: usize, x: f64) -> Result<f64> {
    if ell == 0 {
        return Err(Error::domain("path length must be >= 1"));
    }
    if x.is_nan() || x <= 0.0 || x > 1.0 {
        return Err(Error::domain(format!("x must lie in (0, 1], got {x}")));
    }
    let k = (ell - 1) as f64;
    if ell == 1 {
        return Ok(1.0);
    }
    Ok((k * x.ln() - ln_gamma(k + 1.0)).exp())
}

/// Parity class of a coordinate's total update count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Probability that a coordinate sits at odd parity after time fraction `t`
/// in the continuous model, given the parity of its total count.
pub fn p_odd(t: f64, x: f64, parity: Parity) -> Result<f64> {
    if t.is_nan() || !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t must lie in [0, 1], got {t}")));
    }
    check_positive("x", x)?;
    let a = (x * t).sinh();
    Ok(match parity {
        Parity::Odd => a * (x * (1.0 - t)).cosh() / x.sinh(),
        Parity::Even => a * (x * (1.0 - t)).sinh() / x.cosh(),
    })
}

/// Expected Hamming distance travelled by time `t`, per coordinate.
pub fn g_profile(t: f64, c: &PhaseConstants) -> Result<f64> {
    Ok(c.beta * p_odd(t, c.x0, Parity::Odd)? + (1.0 - c.beta) * p_odd(t, c.x0, Parity::Even)?)
}

/// Inputs of the spacing-moment formulas: the `beta1`-th moment of the
/// `i1`-th order statistic of `L - 1` uniforms on `[0, x]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingQuery {
    pub length: usize,
    pub index: usize,
    pub order: u32,
    pub x: f64,
    /// Ratio bound `t` with `order <= t (index - 1)`; only the bound uses it.
    pub t: f64,
}

impl SpacingQuery {
    pub fn new(length: usize, index: usize, order: u32, x: f64) -> Self {
        Self {
            length,
            index,
            order,
            x,
            t: 1.0,
        }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.length < 2 || self.index == 0 || self.index >= self.length {
            return Err(Error::domain(format!(
                "need 1 <= i1 < L with L >= 2, got i1={}, L={}",
                self.index, self.length
            )));
        }
        check_positive("x", self.x)
    }
}

/// `x^b Gamma(L) / Gamma(L + b) * Gamma(i1 + b) / Gamma(i1)`.
pub fn spacing_moment_exact(q: &SpacingQuery) -> Result<f64> {
    q.validate()?;
    Ok(segment_moment(q.length, q.index, q.order, q.x))
}

/// Moment of a segment spanning `len` of the `L` spacings: the segment has a
/// `Beta(len, L - len)` law scaled by `x`.
fn segment_moment(total: usize, len: usize, order: u32, x: f64) -> f64 {
    if order == 0 {
        return 1.0;
    }
    let b = order as f64;
    let l = total as f64;
    let i = len as f64;
    (b * x.ln() + ln_gamma(l) - ln_gamma(l + b) + ln_gamma(i + b) - ln_gamma(i)).exp()
}

/// The Stirling-type upper bound
/// `C sqrt(1+t) (x (i1-1)/(L-1) (1+t)^(1+1/t) / e)^beta1`.
pub fn spacing_moment_bound(q: &SpacingQuery, constant: f64) -> Result<f64> {
    q.validate()?;
    if q.index < 2 {
        return Err(Error::precondition("spacing bound needs i1 >= 2"));
    }
    check_positive("t", q.t)?;
    if q.order as f64 > q.t * (q.index - 1) as f64 {
        return Err(Error::precondition(format!(
            "need beta1 <= t (i1 - 1), got beta1={}, t={}, i1={}",
            q.order, q.t, q.index
        )));
    }
    Ok(constant * spacing_bound_shape(q))
}

/// The bound without its leading constant, in log space.
fn spacing_bound_shape(q: &SpacingQuery) -> f64 {
    let t = q.t;
    let base = q.x.ln() + ((q.index - 1) as f64).ln() - ((q.length - 1) as f64).ln()
        + (1.0 + 1.0 / t) * (1.0 + t).ln()
        - 1.0;
    (0.5 * (1.0 + t).ln() + q.order as f64 * base).exp()
}

/// Largest `exact / (bound / C)` over a grid of admissible queries; the
/// default constant must dominate this.
pub fn calibrate_spacing_constant(queries: &[SpacingQuery]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for q in queries {
        let exact = spacing_moment_exact(q)?;
        spacing_moment_bound(q, 1.0)?;
        worst = worst.max(exact / spacing_bound_shape(q));
    }
    Ok(worst)
}

/// Joint moment `E prod_j S_j^{b_j}` of the consecutive segments cut at
/// `cuts` (strictly increasing, inside `(0, L)`) of the `L` spacings of
/// `L - 1` uniforms on `[0, x]`. `orders` has one entry per segment.
pub fn segment_product_moment(total: usize, cuts: &[usize], orders: &[u32], x: f64) -> Result<f64> {
    let lens = segment_lengths(total, cuts)?;
    if orders.len() != lens.len() {
        return Err(Error::domain(format!(
            "need {} orders for {} cuts, got {}",
            lens.len(),
            cuts.len(),
            orders.len()
        )));
    }
    check_positive("x", x)?;
    let b_sum: f64 = orders.iter().map(|&b| b as f64).sum();
    let l = total as f64;
    let mut log = b_sum * x.ln() + ln_gamma(l) - ln_gamma(l + b_sum);
    for (&len, &b) in lens.iter().zip(orders) {
        let a = len as f64;
        log += ln_gamma(a + b as f64) - ln_gamma(a);
    }
    Ok(log.exp())
}

/// Product of the marginal segment moments for the same cuts and orders.
pub fn segment_marginal_product(
    total: usize,
    cuts: &[usize],
    orders: &[u32],
    x: f64,
) -> Result<f64> {
    let lens = segment_lengths(total, cuts)?;
    if orders.len() != lens.len() {
        return Err(Error::domain("orders/segments length mismatch"));
    }
    check_positive("x", x)?;
    Ok(lens
        .iter()
        .zip(orders)
        .map(|(&len, &b)| segment_moment(total, len, b, x))
        .product())
}

fn segment_lengths(total: usize, cuts: &[usize]) -> Result<Vec<usize>> {
    let mut prev = 0;
    let mut lens = Vec::with_capacity(cuts.len() + 1);
    for &c in cuts {
        if c <= prev || c >= total {
            return Err(Error::domain(format!(
                "cuts must increase strictly inside (0, {total})"
            )));
        }
        lens.push(c - prev);
        prev = c;
    }
    lens.push(total - prev);
    Ok(lens)
}

/// `d/dy [(sinh y)^s (cosh y)^(N-s)]`.
pub fn walk_count_derivative(n_dim: usize, y: f64, s: f64) -> f64 {
    let (sh, ch) = (y.sinh(), y.cosh());
    let nf = n_dim as f64;
    sh.powf(s - 1.0) * ch.powf(nf - s - 1.0) * (s * ch * ch + (nf - s) * sh * sh)
}

/// True iff the derivative above is nonincreasing along the (ascending)
/// grid of `s` values.
pub fn monotone_derivative_check(n_dim: usize, y: f64, s_grid: &[f64]) -> Result<bool> {
    if n_dim < 7 {
        return Err(Error::domain(format!("N must be >= 7, got {n_dim}")));
    }
    check_positive("y", y)?;
    if s_grid.iter().any(|&s| s.is_nan() || s < 1.0) {
        return Err(Error::domain("every s must be >= 1"));
    }
    if s_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("s grid must be ascending"));
    }
    let values: Vec<f64> = s_grid
        .iter()
        .map(|&s| walk_count_derivative(n_dim, y, s))
        .collect();
    Ok(values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bisect_oracle(beta: f64) -> f64 {
        let (mut lo, mut hi): (f64, f64) = (1e-9, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = mid.sinh().powf(beta) * mid.cosh().powf(1.0 - beta);
            if v < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn f_at_known_roots() {
        assert_abs_diff_eq!(eval_f(0.881373587, 1.0).unwrap(), 1.0, epsilon = 1e-9);
        let half = 2f64.asinh() / 2.0;
        assert_abs_diff_eq!(half, bisect_oracle(0.5), epsilon = 1e-12);
        assert_abs_diff_eq!(eval_f(0.721817, 0.5).unwrap(), 1.0, epsilon = 1e-6);
        assert!(eval_f(1e-12, 1.0).unwrap() < 1e-11);
    }

    #[test]
    fn f_domain_errors() {
        assert!(eval_f(0.0, 1.0).is_err());
        assert!(eval_f(-1.0, 0.5).is_err());
        assert!(eval_f(1.0, 0.0).is_err());
        assert!(eval_f(1.0, 1.5).is_err());
        assert!(solve_x0(0.0, 1e-9).is_err());
        assert!(solve_x0(0.5, 0.0).is_err());
    }

    #[test]
    fn x0_values() {
        let x = solve_x0(1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, (1.0 + 2f64.sqrt()).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(x, 0.8813735870, epsilon = 1e-9);
        assert_abs_diff_eq!(solve_x0(0.5, 1e-12).unwrap(), 0.7218176, epsilon = 1e-6);
        for k in 1..=10 {
            let beta = k as f64 / 10.0;
            let tol = 1e-12;
            let x = solve_x0(beta, tol).unwrap();
            assert!((eval_f(x, beta).unwrap() - 1.0).abs() <= tol);
            assert_abs_diff_eq!(x, bisect_oracle(beta), epsilon = 1e-9);
        }
    }

    #[test]
    fn phase_constants_invariants() {
        for &beta in &[0.1, 0.3, 0.5, 0.75, 1.0] {
            let c = PhaseConstants::new(beta, 0.01).unwrap();
            assert_abs_diff_eq!(eval_f(c.x0, beta).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.gamma, c.x0 * c.f_prime_x0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.epsilon1, 0.1, epsilon = 1e-15);
            assert_abs_diff_eq!(c.epsilon2, 0.01f64.powf(0.25), epsilon = 1e-15);
            assert_eq!(c.epsilon3, c.epsilon4);
            let coth = 1.0 / c.x0.tanh();
            let expected_delta =
                beta * coth / (beta * coth + (1.0 - beta) * c.x0.tanh()) + c.epsilon4;
            assert_abs_diff_eq!(c.delta, expected_delta, epsilon = 1e-12);
        }
        let c = PhaseConstants::new(1.0, 0.05).unwrap();
        assert_abs_diff_eq!(c.alpha, c.x0 / c.x0.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.alpha, 1.246450, epsilon = 1e-5);
        assert_abs_diff_eq!(c.gamma, c.alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(c.f_prime_x0, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn critical_x_values() {
        assert_abs_diff_eq!(critical_x(100, 1.0).unwrap(), 0.848811, epsilon = 1e-5);
        // x0 - (sqrt2/2) ln2/2
        let expected = (1.0 + 2f64.sqrt()).ln() - 0.5f64.sqrt() * 2f64.ln() / 2.0;
        assert_abs_diff_eq!(critical_x(2, 1.0).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(critical_x(2, 1.0).unwrap(), 0.636303, epsilon = 1e-5);
        let far = critical_x(100_000_000, 1.0).unwrap();
        assert!((far - solve_x0(1.0, 1e-12).unwrap()).abs() < 1e-6);
        assert!(critical_x(1, 1.0).is_err());
    }

    #[test]
    fn m_series_examples() {
        let x = 0.7;
        assert_abs_diff_eq!(
            m_series_sum(0, 3, x).unwrap(),
            x.cosh().powi(3),
            epsilon = 1e-15
        );
        // odd Taylor terms of sinh
        let mut s = 0.0;
        let mut term = 0.5;
        for k in 0..30 {
            s += term;
            let a = (2 * k + 2) as f64;
            term *= 0.25 / (a * (a + 1.0));
        }
        assert_abs_diff_eq!(m_series_sum(1, 1, 0.5).unwrap(), s, epsilon = 1e-14);
        assert_abs_diff_eq!(m_series_sum(1, 1, 0.5).unwrap(), 0.521095, epsilon = 1e-6);
        assert_abs_diff_eq!(
            m_series_sum(2, 2, 0.3).unwrap(),
            0.3f64.sinh().powi(2),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(m_series_sum(2, 2, 0.3).unwrap(), 0.0927326, epsilon = 1e-7);
    }

    #[test]
    fn m_coefficient_examples() {
        assert_eq!(m_coefficient(2, 2, 2).unwrap(), 2);
        assert_eq!(m_coefficient(2, 2, 4).unwrap(), 8);
        for k in 0..6 {
            assert_eq!(m_coefficient(0, k, 0).unwrap(), 1);
        }
        assert_eq!(m_coefficient(1, 1, 2).unwrap(), 0);
        assert_eq!(m_coefficient(3, 5, 4).unwrap(), 0);
        assert!(m_coefficient(3, 2, 4).is_err());
    }

    /// `M(n, l) = 2^-N sum_{a,b} (-1)^a C(n,a) C(N-n,b) (N - 2a - 2b)^l`,
    /// from expanding sinh and cosh into exponentials.
    fn exponential_expansion(n: usize, n_dim: usize, ell: u32) -> i128 {
        fn binom(n: usize, k: usize) -> i128 {
            (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i as i128 + 1))
        }
        let mut total: i128 = 0;
        for a in 0..=n {
            for b in 0..=(n_dim - n) {
                let sign = if a % 2 == 0 { 1 } else { -1 };
                let base = n_dim as i128 - 2 * (a + b) as i128;
                total += sign * binom(n, a) * binom(n_dim - n, b) * base.pow(ell);
            }
        }
        total >> n_dim
    }

    #[test]
    fn m_coefficient_matches_exponential_expansion() {
        for n_dim in 0..=7 {
            for n in 0..=n_dim {
                for ell in 0..=18u32 {
                    assert_eq!(
                        m_coefficient(n, n_dim, ell as usize).unwrap() as i128,
                        exponential_expansion(n, n_dim, ell),
                        "n={n} N={n_dim} ell={ell}"
                    );
                }
            }
        }
    }

    #[test]
    fn big_mode_agrees_and_survives_overflow() {
        for (n, n_dim, ell) in [(2, 4, 10), (3, 3, 9), (0, 5, 12)] {
            assert_eq!(
                m_coefficient_big(n, n_dim, ell).unwrap(),
                BigUint::from(m_coefficient(n, n_dim, ell).unwrap())
            );
        }
        let err = m_coefficient(30, 30, 60).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
        let big = m_coefficient_big(30, 30, 60).unwrap();
        assert!(big.bits() > 128);
    }

    #[test]
    fn first_moment_examples() {
        let c = PhaseConstants::new(1.0, 0.0).unwrap();
        for n_dim in [1usize, 5, 20] {
            assert_abs_diff_eq!(
                first_moment_upper(n_dim, n_dim, c.x0).unwrap(),
                n_dim as f64 * 2f64.sqrt(),
                epsilon = 1e-9 * n_dim as f64
            );
        }
        for &x in &[0.1, 0.5, 0.9] {
            assert_abs_diff_eq!(
                first_moment_upper(1, 1, x).unwrap(),
                x.cosh(),
                epsilon = 1e-15
            );
        }
        let v = first_moment_upper(8, 8, 0.9).unwrap();
        assert_abs_diff_eq!(
            v,
            8.0 * 0.9f64.sinh().powi(7) * 0.9f64.cosh(),
            epsilon = 1e-12
        );
        // 8 sinh(0.9)^7 cosh(0.9) = 13.7697...
        assert_abs_diff_eq!(v, 13.7697, epsilon = 1e-3);
        assert!(first_moment_upper(0, 3, 0.5).is_err());
    }

    #[test]
    fn first_moment_is_series_derivative() {
        // central finite difference of the generating function
        for (n, n_dim) in [(1, 3), (4, 4), (2, 7)] {
            for &x in &[0.3, 0.6, 0.9] {
                let h = 1e-5;
                let fd = (m_series_sum(n, n_dim, x + h).unwrap()
                    - m_series_sum(n, n_dim, x - h).unwrap())
                    / (2.0 * h);
                let exact = first_moment_upper(n, n_dim, x).unwrap();
                assert_abs_diff_eq!(exact, fd, epsilon = 1e-8 * exact);
            }
        }
    }

    #[test]
    fn path_open_probability_examples() {
        assert_eq!(path_open_probability(1, 0.3).unwrap(), 1.0);
        assert_abs_diff_eq!(
            path_open_probability(3, 0.5).unwrap(),
            0.125,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            path_open_probability(4, 0.8).unwrap(),
            0.512 / 6.0,
            epsilon = 1e-15
        );
        assert!(path_open_probability(0, 0.5).is_err());
        assert!(path_open_probability(3, 1.5).is_err());
    }

    #[test]
    fn p_odd_examples() {
        let x0 = solve_x0(1.0, 1e-12).unwrap();
        for &x in &[0.2, x0, 1.0] {
            assert_abs_diff_eq!(p_odd(1.0, x, Parity::Odd).unwrap(), 1.0, epsilon = 1e-15);
            assert_eq!(p_odd(0.0, x, Parity::Odd).unwrap(), 0.0);
            assert_eq!(p_odd(0.0, x, Parity::Even).unwrap(), 0.0);
            assert_eq!(p_odd(1.0, x, Parity::Even).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(p_odd(0.5, x0, Parity::Odd).unwrap(), 0.5, epsilon = 1e-12);
        assert!(p_odd(1.2, 0.5, Parity::Odd).is_err());
    }

    #[test]
    fn p_odd_complement_sums_to_one() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            for &x in &[0.1, 0.88, 1.0, 2.0] {
                let odd = p_odd(t, x, Parity::Odd).unwrap();
                let complement = (x * t).cosh() * (x * (1.0 - t)).sinh() / x.sinh();
                assert_abs_diff_eq!(odd + complement, 1.0, epsilon = 1e-12);
                let even = p_odd(t, x, Parity::Even).unwrap();
                assert!((0.0..=1.0).contains(&odd) && (0.0..=1.0).contains(&even));
            }
        }
    }

    #[test]
    fn g_profile_endpoints() {
        for &beta in &[0.2, 0.6, 1.0] {
            let c = PhaseConstants::new(beta, 0.0).unwrap();
            assert_eq!(g_profile(0.0, &c).unwrap(), 0.0);
            assert_abs_diff_eq!(g_profile(1.0, &c).unwrap(), beta, epsilon = 1e-12);
        }
        let c = PhaseConstants::new(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(c.g(0.5).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn spacing_moment_examples() {
        for l in [2usize, 5, 100] {
            let q = SpacingQuery::new(l, 1, 1, 0.7);
            assert_abs_diff_eq!(
                spacing_moment_exact(&q).unwrap(),
                0.7 / l as f64,
                epsilon = 1e-14
            );
        }
        // E max(U1,U2)^2 = int_0^1 2y * y^2 dy = 1/2
        let q = SpacingQuery::new(3, 2, 2, 1.0);
        assert_abs_diff_eq!(spacing_moment_exact(&q).unwrap(), 0.5, epsilon = 1e-14);
        let q = SpacingQuery::new(40, 17, 0, 0.3);
        assert_eq!(spacing_moment_exact(&q).unwrap(), 1.0);
        // no overflow at L ~ 10^3
        let q = SpacingQuery::new(2000, 1000, 50, 1.0);
        let v = spacing_moment_exact(&q).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(spacing_moment_exact(&SpacingQuery::new(5, 5, 1, 1.0)).is_err());
    }

    #[test]
    fn spacing_bound_examples() {
        let q = SpacingQuery::new(30, 10, 0, 0.8).with_t(2.0);
        let b = spacing_moment_bound(&q, 3.0).unwrap();
        assert_abs_diff_eq!(b, 3.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert!(b >= spacing_moment_exact(&q).unwrap());

        let q = SpacingQuery::new(100, 50, 10, 0.9).with_t(1.0);
        assert!(spacing_moment_bound(&q, 3.0).unwrap() >= spacing_moment_exact(&q).unwrap());

        let mut prev = 0.0;
        for i in 1..=10 {
            let q = SpacingQuery::new(100, 50, 10, i as f64 / 10.0).with_t(1.0);
            let b = spacing_moment_bound(&q, 3.0).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        assert!(
            spacing_moment_bound(&SpacingQuery::new(100, 5, 10, 1.0).with_t(1.0), 3.0).is_err()
        );
        assert!(spacing_moment_bound(&SpacingQuery::new(100, 1, 0, 1.0), 3.0).is_err());
    }

    #[test]
    fn default_spacing_constant_dominates_grid() {
        let mut grid = Vec::new();
        for &l in &[10usize, 50, 100, 500] {
            for i1 in (2..l).step_by((l / 8).max(1)) {
                for &t in &[0.25, 0.5, 1.0, 2.0, 4.0] {
                    let max_b = (t * (i1 - 1) as f64).floor() as u32;
                    for b in [0, 1, max_b / 2, max_b].into_iter().filter(|&b| b <= max_b) {
                        grid.push(SpacingQuery::new(l, i1, b, 1.0).with_t(t));
                    }
                }
            }
        }
        let worst = calibrate_spacing_constant(&grid).unwrap();
        assert!(worst <= DEFAULT_SPACING_CONSTANT, "worst ratio {worst}");
    }

    #[test]
    fn segment_moments_telescope() {
        // first moments of consecutive segments add up to x
        let cuts = [3usize, 10, 11, 40];
        let x = 0.85;
        let mut prev = 0;
        let mut total = 0.0;
        for &c in cuts.iter().chain(std::iter::once(&50)) {
            total += segment_moment(50, c - prev, 1, x);
            prev = c;
        }
        assert_abs_diff_eq!(total, x, epsilon = 1e-12);
        let joint = segment_product_moment(50, &cuts, &[2, 1, 3, 0, 1], x).unwrap();
        let marginal = segment_marginal_product(50, &cuts, &[2, 1, 3, 0, 1], x).unwrap();
        assert!(joint <= marginal);
        assert!(segment_product_moment(50, &[3, 3], &[1, 1, 1], x).is_err());
    }

    #[test]
    fn monotone_derivative_examples() {
        let grid: Vec<f64> = (1..=7).map(f64::from).collect();
        assert!(monotone_derivative_check(7, 0.5, &grid).unwrap());
        assert!(monotone_derivative_check(64, 0.88, &[1.0, 8.0, 16.0, 32.0, 64.0]).unwrap());
        assert!(monotone_derivative_check(7, 1.3, &[3.0]).unwrap());
        assert!(monotone_derivative_check(6, 0.5, &grid).is_err());
        assert!(monotone_derivative_check(7, 0.5, &[0.5]).is_err());
    }
}
