//! n-firm markets with linear demand `P = A - B Q` and identical costs,
//! either linear `c t` or quadratic `c t^2`.
//!
//! Every family is written in terms of a residual `1 - Q / limit`, and price
//! and gaps are derived from that residual rather than by subtracting nearly
//! equal numbers. This keeps the large-n gaps accurate and makes the n = 1
//! Cournot and Stackelberg rows bit-identical.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FamilyParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.c.is_finite()) {
            return Err(Error::InvalidParams("A, B and c must be finite".into()));
        }
        if !(self.b > 0.0) {
            return Err(Error::InvalidParams(format!("B must be > 0, got {}", self.b)));
        }
        if !(self.a > 0.0) {
            return Err(Error::InvalidParams(format!("A must be > 0, got {}", self.a)));
        }
        if self.c < 0.0 {
            return Err(Error::InvalidParams(format!("c must be >= 0, got {}", self.c)));
        }
        Ok(())
    }

    /// Output at which price reaches zero.
    pub fn m(&self) -> f64 {
        self.a / self.b
    }

    /// Output at which price reaches the marginal cost `c` (linear costs).
    pub fn m_tilde(&self) -> f64 {
        (self.a - self.c) / self.b
    }

    pub fn delta(&self) -> f64 {
        self.c / self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structure {
    Cournot,
    Stackelberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostKind {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelFamily {
    pub structure: Structure,
    pub cost: CostKind,
}

impl ModelFamily {
    pub const CL: Self = Self::new(Structure::Cournot, CostKind::Linear);
    pub const CQ: Self = Self::new(Structure::Cournot, CostKind::Quadratic);
    pub const SL: Self = Self::new(Structure::Stackelberg, CostKind::Linear);
    pub const SQ: Self = Self::new(Structure::Stackelberg, CostKind::Quadratic);
    pub const ALL: [Self; 4] = [Self::CL, Self::CQ, Self::SL, Self::SQ];

    pub const fn new(structure: Structure, cost: CostKind) -> Self {
        Self { structure, cost }
    }

    pub fn code(&self) -> &'static str {
        match (self.structure, self.cost) {
            (Structure::Cournot, CostKind::Linear) => "CL",
            (Structure::Cournot, CostKind::Quadratic) => "CQ",
            (Structure::Stackelberg, CostKind::Linear) => "SL",
            (Structure::Stackelberg, CostKind::Quadratic) => "SQ",
        }
    }

    pub fn limit_q(&self, params: &FamilyParams) -> f64 {
        match self.cost {
            CostKind::Linear => params.m_tilde(),
            CostKind::Quadratic => params.m(),
        }
    }

    pub fn limit_p(&self, params: &FamilyParams) -> f64 {
        match self.cost {
            CostKind::Linear => params.c,
            CostKind::Quadratic => 0.0,
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let code = s.trim().to_ascii_uppercase().replace([',', '-', '_'], "");
        Self::ALL
            .into_iter()
            .find(|f| f.code() == code)
            .ok_or_else(|| Error::Argument(format!("unknown model family '{s}' (CL, CQ, SL, SQ)")))
    }
}

/// Equilibrium of one family at one market size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeMarketRow {
    pub n: usize,
    pub family: ModelFamily,
    pub q_total: f64,
    pub price: f64,
    /// Leader first for Stackelberg; all equal for Cournot.
    pub outputs: Vec<f64>,
    pub profits: Vec<f64>,
    pub profit_total: f64,
    /// `1 - Q / limit`.
    pub residual: f64,
    /// `limit_Q - Q`.
    pub gap_q: f64,
    /// `P - limit_P`.
    pub gap_p: f64,
    pub cs: f64,
    pub ts: f64,
}

impl LargeMarketRow {
    pub fn x_first(&self) -> f64 {
        self.outputs[0]
    }

    pub fn x_last(&self) -> f64 {
        self.outputs[self.outputs.len() - 1]
    }
}

/// Sequences behind the quadratic-cost Stackelberg equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionState {
    /// `lambda_0 ..= lambda_n`: aggregate share of a block of m followers.
    pub lambda: Vec<f64>,
    /// `mu_1 ..= mu_n`: share taken by the first mover of an m-firm block.
    pub mu: Vec<f64>,
    /// `q_0 ..= q_n` from the aggregate share recursion.
    pub q: Vec<f64>,
    /// `rho_0 ..= rho_n`, tracked directly so that small residuals keep
    /// their relative precision.
    pub rho: Vec<f64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("market size n must be >= 1".into()));
    }
    Ok(())
}

fn finish(
    n: usize,
    family: ModelFamily,
    params: &FamilyParams,
    q_total: f64,
    residual: f64,
    outputs: Vec<f64>,
    profit_total: Option<f64>,
) -> LargeMarketRow {
    let limit_q = family.limit_q(params);
    let limit_p = family.limit_p(params);
    // P - limit_P = (A - limit_P) * residual for both cost kinds
    let gap_p = (params.a - limit_p) * residual;
    let price = limit_p + gap_p;
    let profits: Vec<f64> = outputs
        .iter()
        .map(|&x| match family.cost {
            CostKind::Linear => (price - params.c) * x,
            CostKind::Quadratic => price * x - params.c * x * x,
        })
        .collect();
    let profit_total = profit_total.unwrap_or_else(|| profits.iter().sum());
    let cs = 0.5 * params.b * q_total * q_total;
    LargeMarketRow {
        n,
        family,
        q_total,
        price,
        outputs,
        profits,
        profit_total,
        residual,
        gap_q: limit_q * residual,
        gap_p,
        cs,
        ts: cs + profit_total,
    }
}

pub fn cournot_linear(n: usize, params: &FamilyParams) -> Result<LargeMarketRow> {
    check_n(n)?;
    params.validate()?;
    let nf = n as f64;
    let mt = params.m_tilde();
    let x = mt / (nf + 1.0);
    let q = mt * (nf / (nf + 1.0));
    let per_firm = (params.a - params.c).powi(2) / (params.b * (nf + 1.0).powi(2));
    Ok(finish(
        n,
        ModelFamily::CL,
        params,
        q,
        1.0 / (nf + 1.0),
        vec![x; n],
        Some(nf * per_firm),
    ))
}

pub fn cournot_quadratic(n: usize, params: &FamilyParams) -> Result<LargeMarketRow> {
    check_n(n)?;
    params.validate()?;
    let nf = n as f64;
    let m = params.m();
    let two_delta = 2.0 * params.delta();
    let denom = nf + 1.0 + two_delta;
    let x = m / denom;
    let q = m * (nf / denom);
    let residual = (1.0 + two_delta) / denom;
    Ok(finish(n, ModelFamily::CQ, params, q, residual, vec![x; n], None))
}

pub fn stackelberg_linear(n: usize, params: &FamilyParams) -> Result<LargeMarketRow> {
    check_n(n)?;
    params.validate()?;
    let mt = params.m_tilde();
    let outputs: Vec<f64> = (1..=n).map(|k| mt * 0.5f64.powi(k as i32)).collect();
    let tail = 0.5f64.powi(n as i32);
    let q = mt * (1.0 - tail);
    let total = (params.a - params.c).powi(2) / params.b * ((1.0 - tail) * tail);
    Ok(finish(n, ModelFamily::SL, params, q, tail, outputs, Some(total)))
}

/// Quadratic-cost Stackelberg equilibrium for general `delta = c / B > 0`.
pub fn stackelberg_quadratic(
    n: usize,
    params: &FamilyParams,
) -> Result<(LargeMarketRow, RecursionState)> {
    check_n(n)?;
    params.validate()?;
    let state = recursion_state(n, params.delta())?;
    let m = params.m();
    let mut outputs = Vec::with_capacity(n);
    let mut placed = 0.0;
    for k in 1..=n {
        let x = state.mu[n - k] * (m - placed);
        placed += x;
        outputs.push(x);
    }
    let row = finish(n, ModelFamily::SQ, params, m * state.q[n], state.rho[n], outputs, None);
    Ok((row, state))
}

pub fn family_row(family: ModelFamily, n: usize, params: &FamilyParams) -> Result<LargeMarketRow> {
    match (family.structure, family.cost) {
        (Structure::Cournot, CostKind::Linear) => cournot_linear(n, params),
        (Structure::Cournot, CostKind::Quadratic) => cournot_quadratic(n, params),
        (Structure::Stackelberg, CostKind::Linear) => stackelberg_linear(n, params),
        (Structure::Stackelberg, CostKind::Quadratic) => Ok(stackelberg_quadratic(n, params)?.0),
    }
}

/// `lambda`, `mu`, `q` and `rho` up to `n` for a given `delta > 0`.
///
/// A block of m firms facing residual demand `M - S` supplies
/// `lambda_m (M - S)`; its first mover takes
/// `mu_m = (1 - lambda_{m-1}) / (2 (1 - lambda_{m-1}) + 2 delta)`.
pub fn recursion_state(n: usize, delta: f64) -> Result<RecursionState> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "Stackelberg recursion needs delta = c/B > 0, got {delta}"
        )));
    }
    let mut lambda = Vec::with_capacity(n + 1);
    let mut mu = Vec::with_capacity(n);
    lambda.push(0.0);
    for m in 1..=n {
        let prev = lambda[m - 1];
        let free = 1.0 - prev;
        let share = free / (2.0 * free + 2.0 * delta);
        mu.push(share);
        lambda.push(share + prev * (1.0 - share));
    }
    Ok(RecursionState {
        lambda,
        mu,
        q: q_recursion(n, delta),
        rho: rho_recursion(n, delta),
    })
}

/// `q_0 = 0`, `q_n = q_{n-1} + (1 - q_{n-1})^2 / (2 (1 - q_{n-1} + delta))`.
pub fn q_recursion(n: usize, delta: f64) -> Vec<f64> {
    let mut q = Vec::with_capacity(n + 1);
    q.push(0.0);
    for i in 1..=n {
        let prev = q[i - 1];
        let free = 1.0 - prev;
        q.push(prev + free * free / (2.0 * (free + delta)));
    }
    q
}

/// `rho_0 = 1`, `rho_n = rho (rho + 2 delta) / (2 (rho + delta))`, the
/// complement `1 - q_n` of [`q_recursion`].
pub fn rho_recursion(n: usize, delta: f64) -> Vec<f64> {
    let mut rho = Vec::with_capacity(n + 1);
    rho.push(1.0);
    for i in 1..=n {
        let r = rho[i - 1];
        rho.push(r * (r + 2.0 * delta) / (2.0 * (r + delta)));
    }
    rho
}

/// The `2c = B` share recursion `lambda_m = (1 + lambda - lambda^2) / (3 - 2 lambda)`.
pub fn lambda_recursion(n: usize) -> Vec<f64> {
    let mut lambda = Vec::with_capacity(n + 1);
    lambda.push(0.0);
    for i in 1..=n {
        let l = lambda[i - 1];
        lambda.push((1.0 + l - l * l) / (3.0 - 2.0 * l));
    }
    lambda
}

/// Aggregate outputs `Q_0 = 0`, `Q_n = (M^2 + M Q - Q^2) / (3M - 2Q)` for
/// the `2c = B` market.
pub fn aggregate_recursion(n: usize, m: f64) -> Vec<f64> {
    let mut q = Vec::with_capacity(n + 1);
    q.push(0.0);
    for i in 1..=n {
        let p = q[i - 1];
        q.push((m * m + m * p - p * p) / (3.0 * m - 2.0 * p));
    }
    q
}

/// Stackelberg and Cournot residuals for `n = 1 ..= n_max`.
///
/// For `2c = B` the Stackelberg side uses `rho_n = rho (1 + rho) / (1 + 2 rho)`;
/// otherwise it is `1 - q_n` from the general recursion. The Cournot side is
/// `(1 + 2 delta) / (n + 1 + 2 delta)`, i.e. `2 / (n + 2)` when `2c = B`.
pub fn residual_sequences(n_max: usize, params: &FamilyParams) -> Result<(Vec<f64>, Vec<f64>)> {
    check_n(n_max)?;
    params.validate()?;
    let delta = params.delta();
    let rho = if delta == 0.5 {
        let mut r = vec![1.0];
        for i in 1..=n_max {
            let p = r[i - 1];
            r.push(p * (1.0 + p) / (1.0 + 2.0 * p));
        }
        r[1..].to_vec()
    } else {
        let q = q_recursion(n_max, recursion_delta(delta)?);
        q[1..].iter().map(|q| 1.0 - q).collect()
    };
    let r = (1..=n_max)
        .map(|n| (1.0 + 2.0 * delta) / (n as f64 + 1.0 + 2.0 * delta))
        .collect();
    Ok((rho, r))
}

fn recursion_delta(delta: f64) -> Result<f64> {
    if delta > 0.0 {
        Ok(delta)
    } else {
        Err(Error::InvalidParams(format!(
            "Stackelberg recursion needs delta = c/B > 0, got {delta}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitGap {
    pub limit_q: f64,
    pub limit_p: f64,
    pub gap_q: f64,
    pub gap_p: f64,
}

pub fn limits_and_gaps(family: ModelFamily, params: &FamilyParams, n: usize) -> Result<LimitGap> {
    let row = family_row(family, n, params)?;
    Ok(LimitGap {
        limit_q: family.limit_q(params),
        limit_p: family.limit_p(params),
        gap_q: row.gap_q,
        gap_p: row.gap_p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surplus {
    /// `B Q^2 / 2`, the area under demand above the price.
    pub cs: f64,
    /// Consumer surplus plus total profit.
    pub ts: f64,
}

pub fn surplus_row(family: ModelFamily, params: &FamilyParams, n: usize) -> Result<Surplus> {
    let row = family_row(family, n, params)?;
    Ok(Surplus {
        cs: row.cs,
        ts: row.ts,
    })
}

/// Stackelberg-versus-Cournot comparison at one market size and cost kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingRow {
    pub n: usize,
    pub cost: CostKind,
    /// Stackelberg total output strictly above Cournot.
    pub quantity_above: bool,
    /// Stackelberg price strictly below Cournot.
    pub price_below: bool,
    /// Totals and prices coincide exactly.
    pub equal: bool,
    /// Last Stackelberg mover below the Cournot firm, leader above it.
    pub first_last: bool,
}

impl OrderingRow {
    /// Strict ordering for n >= 2, exact equality at n = 1.
    pub fn holds(&self) -> bool {
        if self.n == 1 {
            self.equal
        } else {
            self.quantity_above && self.price_below && self.first_last
        }
    }
}

pub fn ordering_checks(
    params: &FamilyParams,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<OrderingRow>> {
    let mut out = Vec::new();
    for n in n_range {
        for cost in [CostKind::Linear, CostKind::Quadratic] {
            let c = family_row(ModelFamily::new(Structure::Cournot, cost), n, params)?;
            let s = family_row(ModelFamily::new(Structure::Stackelberg, cost), n, params)?;
            let xc = c.outputs[0];
            out.push(OrderingRow {
                n,
                cost,
                quantity_above: s.q_total > c.q_total,
                price_below: s.price < c.price,
                equal: s.q_total == c.q_total && s.price == c.price,
                first_last: s.x_last() < xc && xc < s.x_first(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> FamilyParams {
        FamilyParams::new(30996.0, 1.0 / 20.0, 1.0 / 40.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn params_validation_and_derived() {
        let p = example();
        assert_eq!(p.m(), 619920.0);
        assert_eq!(p.delta(), 0.5);
        assert!((p.m_tilde() - 619919.5).abs() < 1e-9);
        assert!(FamilyParams::new(1.0, 0.0, 0.0).is_err());
        assert!(FamilyParams::new(1.0, 1.0, -1.0).is_err());
        assert!(FamilyParams::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn family_codes_round_trip() {
        for f in ModelFamily::ALL {
            assert_eq!(f.code().parse::<ModelFamily>().unwrap(), f);
        }
        assert_eq!("s,q".parse::<ModelFamily>().unwrap(), ModelFamily::SQ);
        assert!("XQ".parse::<ModelFamily>().is_err());
    }

    #[test]
    fn cournot_linear_formulas() {
        let p = example();
        let r = cournot_linear(1, &p).unwrap();
        assert!(rel(r.q_total, p.m_tilde() / 2.0) < 1e-15);
        let r = cournot_linear(7, &p).unwrap();
        assert!(rel(r.price, (p.a + 7.0 * p.c) / 8.0) < 1e-12);
        assert!(rel(r.price, p.a - p.b * r.q_total) < 1e-12);
        let per = (p.a - p.c).powi(2) / (p.b * 64.0);
        for pi in &r.profits {
            assert!(rel(*pi, per) < 1e-12);
        }
        assert!(rel(r.profit_total, 7.0 * per) < 1e-12);
        let big = cournot_linear(1_000_000, &p).unwrap();
        assert!((big.q_total - 619919.5).abs() < 1.0);
        assert!((big.price - 0.025).abs() < 0.04);
    }

    #[test]
    fn cournot_quadratic_examples() {
        let p = example();
        let r = cournot_quadratic(3, &p).unwrap();
        assert!(rel(r.outputs[0], 123984.0) < 1e-12);
        assert!(rel(r.q_total, 371952.0) < 1e-12);
        assert!(rel(r.price, 12398.4) < 1e-12);
        assert!(rel(r.profits[0], 1152902419.2) < 1e-12);
        assert!(rel(cournot_quadratic(10, &p).unwrap().q_total, 516600.0) < 1e-12);
        assert!(rel(cournot_quadratic(1, &p).unwrap().q_total, 206640.0) < 1e-12);
        // 2c = B: price 2A/(n+2), residual 2/(n+2)
        let r = cournot_quadratic(6, &p).unwrap();
        assert!(rel(r.price, 2.0 * p.a / 8.0) < 1e-12);
        assert!(rel(r.residual, 0.25) < 1e-15);
    }

    #[test]
    fn stackelberg_linear_examples() {
        let p = example();
        let r = stackelberg_linear(3, &p).unwrap();
        // (A - c) / B is not exactly representable, hence relative checks
        for (x, want) in r.outputs.iter().zip([309959.75, 154979.875, 77489.9375]) {
            assert!(rel(*x, want) < 1e-14, "{x}");
        }
        assert_eq!(r.q_total, p.m_tilde() * (7.0 / 8.0));
        let r1 = stackelberg_linear(1, &p).unwrap();
        assert_eq!(r1.outputs[0], p.m_tilde() / 2.0);
        let r = stackelberg_linear(12, &p).unwrap();
        for w in r.outputs.windows(2) {
            assert_eq!(w[1] / w[0], 0.5);
        }
        let want = (p.a - p.c).powi(2) / p.b * (4095.0 / 16_777_216.0);
        assert!(rel(r.profit_total, want) < 1e-12);
        assert!(rel(r.profits.iter().sum::<f64>(), want) < 1e-12);
        assert!(rel(r.price, p.c + (p.a - p.c) / 4096.0) < 1e-12);
    }

    #[test]
    fn stackelberg_quadratic_examples() {
        let p = example();
        let (r, s) = stackelberg_quadratic(3, &p).unwrap();
        for (x, want) in r.outputs.iter().zip([151200.0, 133920.0, 111600.0]) {
            assert!(rel(*x, want) < 1e-12, "{x}");
        }
        assert!(rel(r.q_total, 396720.0) < 1e-12);
        assert!(rel(r.price, 11160.0) < 1e-12);
        assert!((r.ts - 7030800000.0).abs() < 1e-2);
        assert!((s.lambda[1] - 1.0 / 3.0).abs() < 1e-16);
        let (r4, _) = stackelberg_quadratic(4, &p).unwrap();
        assert!((r4.q_total - 443439.784).abs() < 5e-4);
        let bad = FamilyParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(stackelberg_quadratic(2, &bad), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn general_delta_shares_match_aggregate_recursion() {
        for delta in [0.05, 0.5, 1.0, 3.7] {
            let p = FamilyParams::new(100.0, 2.0, 2.0 * delta).unwrap();
            for n in [1, 2, 5, 40] {
                let (r, s) = stackelberg_quadratic(n, &p).unwrap();
                let sum: f64 = r.outputs.iter().sum();
                assert!(rel(sum, r.q_total) < 1e-10, "delta {delta} n {n}");
                assert!(rel(s.lambda[n], s.q[n]) < 1e-12);
                assert!((s.rho[n] - (1.0 - s.q[n])).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn closed_recursions_agree_at_half_delta() {
        let lambda = lambda_recursion(1000);
        let q = q_recursion(1000, 0.5);
        let agg = aggregate_recursion(1000, 619920.0);
        for n in 1..=1000 {
            assert!(rel(lambda[n], q[n]) < 1e-12);
            assert!(rel(agg[n], 619920.0 * lambda[n]) < 1e-12);
        }
        let st = recursion_state(50, 0.5).unwrap();
        for w in st.lambda.windows(2) {
            assert!(w[1] > w[0] && w[1] < 1.0);
        }
    }

    #[test]
    fn residual_examples() {
        let p = example();
        let (rho, r) = residual_sequences(10_000, &p).unwrap();
        assert_eq!(rho[0], 2.0 / 3.0);
        assert_eq!(r[0], 2.0 / 3.0);
        for n in 2..=10_000 {
            assert!(rho[n - 1] < r[n - 1]);
            assert!((r[n - 1] - 2.0 / (n as f64 + 2.0)).abs() < 1e-15);
        }
        let other = FamilyParams::new(10.0, 1.0, 0.3).unwrap();
        let (rho, _) = residual_sequences(5, &other).unwrap();
        let q = q_recursion(5, 0.3);
        assert!((rho[4] - (1.0 - q[5])).abs() < 1e-15);
    }

    #[test]
    fn gaps_and_limits() {
        let p = example();
        let g = limits_and_gaps(ModelFamily::SL, &p, 10).unwrap();
        assert_eq!(g.gap_q, p.m_tilde() / 1024.0);
        assert_eq!(g.limit_p, p.c);
        let g = limits_and_gaps(ModelFamily::SQ, &p, 10).unwrap();
        assert!((g.gap_q - 72501.975).abs() < 5e-3);
        assert_eq!(g.limit_q, p.m());
        for f in ModelFamily::ALL {
            let mut prev = f64::INFINITY;
            for n in 1..60 {
                let g = limits_and_gaps(f, &p, n).unwrap();
                assert!(g.gap_q < prev && g.gap_q > 0.0, "{f} n={n}");
                prev = g.gap_q;
            }
        }
    }

    #[test]
    fn surplus_examples() {
        let p = example();
        let s = surplus_row(ModelFamily::SQ, &p, 3).unwrap();
        assert!((s.ts - 7030800000.0).abs() < 1e-2);
        assert!((s.cs - 3934668960.0).abs() < 1e-2);
        let big = surplus_row(ModelFamily::CQ, &p, 10_000_000).unwrap();
        assert!(rel(big.cs, 9607520160.0) < 1e-6);
    }

    #[test]
    fn ordering_examples() {
        let p = example();
        let rows = ordering_checks(&p, 1..=10).unwrap();
        assert!(rows.iter().all(OrderingRow::holds));
        assert!(rows.iter().filter(|r| r.n == 1).all(|r| r.equal));
        assert!(rows.iter().filter(|r| r.n == 5).all(|r| r.first_last));
    }

    #[test]
    fn zero_n_is_rejected() {
        let p = example();
        for f in ModelFamily::ALL {
            assert!(family_row(f, 0, &p).is_err());
        }
    }
}
