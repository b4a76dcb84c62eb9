//! Economic primitives: inverse demand, cost functions, payoffs, surplus and
//! the finite-difference helpers used wherever an analytic derivative is not
//! available.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};

/// Finite-difference step configuration.
///
/// `h_rel` is the relative step used for first derivatives. Higher orders
/// rescale it so that an order-`k` stencil uses `h_rel^(3 / (k + 2))`, which
/// gives the usual `eps^(1/4)` step for second derivatives when `h_rel` is the
/// default `eps^(1/3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub h_rel: f64,
    pub h_abs: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            h_rel: f64::EPSILON.cbrt(),
            h_abs: 1e-6,
        }
    }
}

impl DiffConfig {
    pub fn new(h_rel: f64, h_abs: f64) -> Result<Self> {
        if !(h_rel > 0.0 && h_abs > 0.0 && h_rel.is_finite() && h_abs.is_finite()) {
            return Err(Error::Argument(format!(
                "finite-difference steps must be positive (h_rel = {h_rel}, h_abs = {h_abs})"
            )));
        }
        Ok(Self { h_rel, h_abs })
    }

    /// Step for an order-`order` central stencil around `x`. The absolute
    /// floor is widened to `h_abs^(2 / (order + 1))` for higher orders, where
    /// roundoff grows like `eps / h^order`.
    pub fn step(&self, order: u32, x: f64) -> f64 {
        let k = order.max(1) as f64;
        let rel = self.h_rel.powf(3.0 / (k + 2.0));
        let floor = self.h_abs.powf(2.0 / (k + 1.0));
        (rel * x.abs()).max(floor)
    }
}

/// Central first difference `(f(x+h) - f(x-h)) / 2h`.
pub fn diff1<F>(f: F, x: f64, cfg: &DiffConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_diff1(|t| Ok(f(t)), x, cfg)
}

/// Three-point second difference `(f(x+h) - 2f(x) + f(x-h)) / h^2`.
pub fn diff2<F>(f: F, x: f64, cfg: &DiffConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_diff2(|t| Ok(f(t)), x, cfg)
}

pub(crate) fn try_diff1<F>(f: F, x: f64, cfg: &DiffConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = cfg.step(1, x);
    let hi = check_finite("function", x + h, f(x + h)?)?;
    let lo = check_finite("function", x - h, f(x - h)?)?;
    check_finite("first difference", x, (hi - lo) / (2.0 * h))
}

pub(crate) fn try_diff2<F>(f: F, x: f64, cfg: &DiffConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = cfg.step(2, x);
    let hi = check_finite("function", x + h, f(x + h)?)?;
    let mid = check_finite("function", x, f(x)?)?;
    let lo = check_finite("function", x - h, f(x - h)?)?;
    check_finite("second difference", x, (hi - 2.0 * mid + lo) / (h * h))
}

fn try_diff3<F>(f: F, x: f64, cfg: &DiffConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = cfg.step(3, x);
    let p2 = f(x + 2.0 * h)?;
    let p1 = f(x + h)?;
    let m1 = f(x - h)?;
    let m2 = f(x - 2.0 * h)?;
    check_finite(
        "third difference",
        x,
        (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
    )
}

pub type ScalarFnRef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied scalar function together with whichever analytic
/// derivatives are known. Missing orders are filled in by finite differences
/// of the highest known one.
#[derive(Clone)]
pub struct SmoothFn {
    label: String,
    chain: Vec<ScalarFnRef>,
}

impl SmoothFn {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            chain: vec![Arc::new(f)],
        }
    }

    /// Appends the next analytic derivative (first call supplies `f'`, the
    /// second `f''`, and so on).
    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.chain.push(Arc::new(df));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn known_orders(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_finite(&self.label, t, (self.chain[0])(t))
    }

    pub fn derivative(&self, order: usize, t: f64, cfg: &DiffConfig) -> Result<f64> {
        if order < self.chain.len() {
            return check_finite(&self.label, t, (self.chain[order])(t));
        }
        let base = self.chain.len() - 1;
        let g = |s: f64| Ok((self.chain[base])(s));
        match order - base {
            1 => try_diff1(g, t, cfg),
            2 => try_diff2(g, t, cfg),
            3 => try_diff3(g, t, cfg),
            _ => Err(Error::Argument(format!(
                "derivative of order {order} of `{}` is not available",
                self.label
            ))),
        }
    }
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn")
            .field("label", &self.label)
            .field("analytic_orders", &self.known_orders())
            .finish()
    }
}

/// Inverse demand `P(Q)`.
#[derive(Debug, Clone)]
pub enum DemandSpec {
    /// `P(Q) = intercept - slope * Q`.
    Linear { intercept: f64, slope: f64 },
    Custom(SmoothFn),
}

impl DemandSpec {
    pub fn linear(intercept: f64, slope: f64) -> Result<Self> {
        let d = DemandSpec::Linear { intercept, slope };
        d.validate()?;
        Ok(d)
    }

    /// `P(Q) = level - arctan(Q)` with analytic derivatives.
    pub fn arctan(level: f64) -> Self {
        let f = SmoothFn::new(format!("{level} - arctan(Q)"), move |q: f64| level - q.atan())
            .with_derivative(|q| -1.0 / (1.0 + q * q))
            .with_derivative(|q| 2.0 * q / (1.0 + q * q).powi(2))
            .with_derivative(|q| (2.0 - 6.0 * q * q) / (1.0 + q * q).powi(3));
        DemandSpec::Custom(f)
    }

    pub fn validate(&self) -> Result<()> {
        if let DemandSpec::Linear { intercept, slope } = *self {
            if !(intercept > 0.0 && intercept.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "linear demand intercept must be positive and finite, got {intercept}"
                )));
            }
            if !(slope > 0.0 && slope.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "linear demand slope must be positive and finite, got {slope}"
                )));
            }
        }
        Ok(())
    }

    pub fn price(&self, q: f64) -> Result<f64> {
        match self {
            DemandSpec::Linear { intercept, slope } => Ok(intercept - slope * q),
            DemandSpec::Custom(f) => f.eval(q),
        }
    }

    /// `d^order P / dQ^order` at `q`.
    pub fn derivative(&self, order: usize, q: f64, cfg: &DiffConfig) -> Result<f64> {
        match self {
            DemandSpec::Linear { intercept, slope } => Ok(match order {
                0 => intercept - slope * q,
                1 => -slope,
                _ => 0.0,
            }),
            DemandSpec::Custom(f) => f.derivative(order, q, cfg),
        }
    }

    /// Output at which a linear demand price reaches zero (`A / B`).
    pub fn saturation(&self) -> Option<f64> {
        match self {
            DemandSpec::Linear { intercept, slope } => Some(intercept / slope),
            DemandSpec::Custom(_) => None,
        }
    }
}

/// Production cost `c_i(t)`.
#[derive(Debug, Clone)]
pub enum CostSpec {
    /// `c * t`.
    Linear(f64),
    /// `c * t^2`.
    Quadratic(f64),
    Custom(SmoothFn),
}

impl CostSpec {
    /// `t * e^t` with analytic derivatives.
    pub fn t_exp_t() -> Self {
        CostSpec::Custom(
            SmoothFn::new("t*exp(t)", |t: f64| t * t.exp())
                .with_derivative(|t| (1.0 + t) * t.exp())
                .with_derivative(|t| (2.0 + t) * t.exp())
                .with_derivative(|t| (3.0 + t) * t.exp()),
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CostSpec::Linear(c) | CostSpec::Quadratic(c) if !(c >= 0.0 && c.is_finite()) => {
                Err(Error::InvalidParams(format!(
                    "cost coefficient must be finite and >= 0, got {c}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn cost(&self, t: f64) -> Result<f64> {
        match self {
            CostSpec::Linear(c) => Ok(c * t),
            CostSpec::Quadratic(c) => Ok(c * t * t),
            CostSpec::Custom(f) => f.eval(t),
        }
    }

    pub fn derivative(&self, order: usize, t: f64, cfg: &DiffConfig) -> Result<f64> {
        match self {
            CostSpec::Linear(c) => Ok(match order {
                0 => c * t,
                1 => *c,
                _ => 0.0,
            }),
            CostSpec::Quadratic(c) => Ok(match order {
                0 => c * t * t,
                1 => 2.0 * c * t,
                2 => 2.0 * c,
                _ => 0.0,
            }),
            CostSpec::Custom(f) => f.derivative(order, t, cfg),
        }
    }
}

/// Ordered production levels of a triopoly: leader, middle firm, follower.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputTriple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl OutputTriple {
    pub const ZERO: OutputTriple = OutputTriple {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Self { x: v, y: v, z: v }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn total(self) -> f64 {
        self.x + self.y + self.z
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `(y, z, x)`.
    pub fn rotated(self) -> Self {
        Self::new(self.y, self.z, self.x)
    }

    pub fn with(self, axis: usize, value: f64) -> Self {
        let mut a = self.to_array();
        a[axis] = value;
        Self::from_array(a)
    }
}

impl fmt::Display for OutputTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// The economic environment: one inverse demand and one cost per firm.
#[derive(Debug, Clone)]
pub struct MarketSpec {
    pub demand: DemandSpec,
    pub costs: Vec<CostSpec>,
}

impl MarketSpec {
    pub fn new(demand: DemandSpec, costs: Vec<CostSpec>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidParams(
                "a market needs at least one firm".into(),
            ));
        }
        demand.validate()?;
        for c in &costs {
            c.validate()?;
        }
        Ok(Self { demand, costs })
    }

    pub fn symmetric(n: usize, demand: DemandSpec, cost: CostSpec) -> Result<Self> {
        Self::new(demand, vec![cost; n])
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    fn check_outputs(&self, i: usize, outputs: &[f64]) -> Result<()> {
        if i >= self.n() {
            return Err(Error::Argument(format!(
                "firm index {i} out of range for a {}-firm market",
                self.n()
            )));
        }
        if outputs.len() != self.n() {
            return Err(Error::Argument(format!(
                "expected {} outputs, got {}",
                self.n(),
                outputs.len()
            )));
        }
        Ok(())
    }

    /// `outputs[i] * P(sum) - c_i(outputs[i])`.
    pub fn profit(&self, i: usize, outputs: &[f64]) -> Result<f64> {
        self.check_outputs(i, outputs)?;
        let q: f64 = outputs.iter().sum();
        let p = self.demand.price(q)?;
        Ok(outputs[i] * p - self.costs[i].cost(outputs[i])?)
    }

    /// Own-output partial derivative of firm `i`'s profit, holding rivals fixed.
    pub fn marginal_profit(&self, i: usize, outputs: &[f64], cfg: &DiffConfig) -> Result<f64> {
        self.check_outputs(i, outputs)?;
        let q: f64 = outputs.iter().sum();
        let xi = outputs[i];
        Ok(self.demand.price(q)? + xi * self.demand.derivative(1, q, cfg)?
            - self.costs[i].derivative(1, xi, cfg)?)
    }

    /// Own-output second partial derivative of firm `i`'s profit.
    pub fn profit_curvature(&self, i: usize, outputs: &[f64], cfg: &DiffConfig) -> Result<f64> {
        self.check_outputs(i, outputs)?;
        let q: f64 = outputs.iter().sum();
        let xi = outputs[i];
        Ok(2.0 * self.demand.derivative(1, q, cfg)?
            + xi * self.demand.derivative(2, q, cfg)?
            - self.costs[i].derivative(2, xi, cfg)?)
    }
}

pub fn price(demand: &DemandSpec, q: f64) -> Result<f64> {
    demand.price(q)
}

pub fn profit(market: &MarketSpec, i: usize, outputs: &[f64]) -> Result<f64> {
    market.profit(i, outputs)
}

const QUAD_REL_TOL: f64 = 1e-9;
const QUAD_ABS_FLOOR: f64 = 1e-6;
const QUAD_MAX_DEPTH: u32 = 50;

/// `\int_0^Q P - Q P(Q)`. Linear demand uses the closed form `B Q^2 / 2`.
pub fn consumer_surplus(demand: &DemandSpec, q: f64) -> Result<f64> {
    match demand {
        DemandSpec::Linear { slope, .. } => {
            if q < 0.0 {
                return Err(Error::Argument(format!("total output must be >= 0, got {q}")));
            }
            Ok(0.5 * slope * q * q)
        }
        DemandSpec::Custom(_) => consumer_surplus_quadrature(demand, q),
    }
}

/// Consumer surplus by adaptive Simpson quadrature regardless of demand kind.
pub fn consumer_surplus_quadrature(demand: &DemandSpec, q: f64) -> Result<f64> {
    if q < 0.0 {
        return Err(Error::Argument(format!("total output must be >= 0, got {q}")));
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    let area = integrate(|t| demand.price(t), 0.0, q)?;
    Ok(area - q * demand.price(q)?)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = (QUAD_REL_TOL * whole.abs()).max(QUAD_ABS_FLOOR);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Numerics(format!(
            "non-finite quadrature estimate on [{a}, {b}]"
        )));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerics(format!(
            "adaptive quadrature did not converge on [{a}, {b}]"
        )));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Consumer surplus at the aggregate output plus every firm's profit.
pub fn total_surplus(market: &MarketSpec, outputs: &[f64]) -> Result<f64> {
    if outputs.len() != market.n() {
        return Err(Error::Argument(format!(
            "expected {} outputs, got {}",
            market.n(),
            outputs.len()
        )));
    }
    let q: f64 = outputs.iter().sum();
    let mut ts = consumer_surplus(&market.demand, q)?;
    for i in 0..market.n() {
        ts += market.profit(i, outputs)?;
    }
    Ok(ts)
}
