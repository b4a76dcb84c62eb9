//! Response maps `F1`, `F2`, `F3` of the three-stage market and the composed
//! hierarchical map `S` whose fixed points are the first-order solutions.
//!
//! Each response map is "own first-order condition plus own coordinate", so
//! a coordinate is fixed exactly when that firm's FOC vanishes. An optional
//! positive gain scales the FOC term; it changes the dynamics of Picard
//! iteration but never the fixed points.
//!
//! In reduced mode the middle and leader maps are built from the implicit
//! best responses `b3(x, y)` and `b2(x)`. Slopes of those implicit functions
//! come from the implicit function theorem applied to the analytic FOCs, so
//! the maps are as accurate as the inner root finds.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::market::{try_diff1, DiffConfig, MarketSpec, OutputTriple};
use crate::roots::{brent, InnerSolveConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapMode {
    /// Literal composition `S(p) = (F1(x, S2, S3), F2(x, y, S3), F3(p))` with
    /// every map defined as a total derivative plus identity.
    DerivativePlusIdentity,
    /// Backward-induction maps `(F1(x), F2(x, y), F3(x, y, z))`.
    ReducedHierarchical,
    /// Caller-supplied affine maps evaluated simultaneously.
    ExplicitLinear,
    /// Simultaneous-move maps `F_i = x_i + dPi_i/dx_i`.
    Cournot,
}

/// `F(p) = matrix * p + constant`, one row per response map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: [[f64; 3]; 3],
    pub constant: [f64; 3],
}

impl AffineMap {
    pub fn new(matrix: [[f64; 3]; 3], constant: [f64; 3]) -> Result<Self> {
        if matrix.iter().flatten().chain(constant.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "affine response coefficients must be finite".into(),
            ));
        }
        Ok(Self { matrix, constant })
    }

    pub fn row(&self, i: usize, p: OutputTriple) -> f64 {
        let r = &self.matrix[i];
        r[0] * p.x + r[1] * p.y + r[2] * p.z + self.constant[i]
    }
}

/// The follower's best response at a given `(x, y)` and the derivative data
/// the upstream stages need.
#[derive(Debug, Clone, Copy)]
struct Follower {
    p: f64,
    p1: f64,
    p2: f64,
    /// `db3/dx = db3/dy`.
    beta: f64,
    /// `d beta / d(x + y)`.
    dbeta: f64,
}

#[derive(Debug, Clone)]
pub struct ResponseSystem {
    mode: MapMode,
    market: Option<MarketSpec>,
    affine: Option<AffineMap>,
    diff: DiffConfig,
    inner: InnerSolveConfig,
    gain: f64,
}

impl ResponseSystem {
    /// Response system over a three-firm market.
    pub fn new(mode: MapMode, market: MarketSpec) -> Result<Self> {
        if mode == MapMode::ExplicitLinear {
            return Err(Error::Argument(
                "explicit linear systems are built from an AffineMap".into(),
            ));
        }
        if market.n() != 3 {
            return Err(Error::InvalidParams(format!(
                "response maps need exactly 3 firms, market has {}",
                market.n()
            )));
        }
        Ok(Self {
            mode,
            market: Some(market),
            affine: None,
            diff: DiffConfig::default(),
            inner: InnerSolveConfig::default(),
            gain: 1.0,
        })
    }

    pub fn reduced(market: MarketSpec) -> Result<Self> {
        Self::new(MapMode::ReducedHierarchical, market)
    }

    pub fn general(market: MarketSpec) -> Result<Self> {
        Self::new(MapMode::DerivativePlusIdentity, market)
    }

    pub fn cournot(market: MarketSpec) -> Result<Self> {
        Self::new(MapMode::Cournot, market)
    }

    pub fn explicit_linear(map: AffineMap) -> Self {
        Self {
            mode: MapMode::ExplicitLinear,
            market: None,
            affine: Some(map),
            diff: DiffConfig::default(),
            inner: InnerSolveConfig::default(),
            gain: 1.0,
        }
    }

    pub fn with_diff(mut self, diff: DiffConfig) -> Self {
        self.diff = diff;
        self
    }

    pub fn with_inner(mut self, inner: InnerSolveConfig) -> Result<Self> {
        inner.validate()?;
        self.inner = inner;
        Ok(self)
    }

    /// Scales the FOC term of every market-built response map. Ignored by
    /// explicit linear systems.
    pub fn with_gain(mut self, gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::Argument(format!("response gain must be > 0, got {gain}")));
        }
        self.gain = gain;
        Ok(self)
    }

    pub fn mode(&self) -> MapMode {
        self.mode
    }

    pub fn market(&self) -> Option<&MarketSpec> {
        self.market.as_ref()
    }

    pub fn affine(&self) -> Option<&AffineMap> {
        self.affine.as_ref()
    }

    pub fn diff(&self) -> &DiffConfig {
        &self.diff
    }

    pub fn inner(&self) -> &InnerSolveConfig {
        &self.inner
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    fn mkt(&self) -> Result<&MarketSpec> {
        self.market.as_ref().ok_or_else(|| {
            Error::Argument("operation needs a market-built response system".into())
        })
    }

    fn bracket(&self) -> Result<(f64, f64)> {
        if let Some(b) = self.inner.bracket {
            return Ok(b);
        }
        match self.mkt()?.demand.saturation() {
            Some(m) => Ok((0.0, 10.0 * m)),
            None => Err(Error::Argument(
                "custom demand needs an explicit inner-solve bracket".into(),
            )),
        }
    }

    /// Root of `f` on the configured bracket. If `f` cannot be evaluated at
    /// the upper end (a nested solve has no root there), the upper end is
    /// pulled towards the lower one until it can.
    fn solve_inner<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let (lo, mut hi) = self.bracket()?;
        let mut tries = 0;
        loop {
            match f(hi) {
                Ok(_) => break,
                Err(Error::NoBracket { .. }) if tries < 60 => {
                    hi = lo + 0.5 * (hi - lo);
                    tries += 1;
                }
                Err(e) => return Err(e),
            }
        }
        brent(f, lo, hi, self.inner.tol, self.inner.max_iter)
    }

    fn demand_d(&self, order: usize, q: f64) -> Result<f64> {
        self.mkt()?.demand.derivative(order, q, &self.diff)
    }

    fn cost_d(&self, firm: usize, order: usize, t: f64) -> Result<f64> {
        self.mkt()?.costs[firm].derivative(order, t, &self.diff)
    }

    // ---- follower -------------------------------------------------------

    /// `dPi3/dz` at `(x, y, z)`.
    pub fn foc3(&self, p: OutputTriple) -> Result<f64> {
        self.mkt()?.marginal_profit(2, &p.to_array(), &self.diff)
    }

    /// `d^2 Pi3 / dz^2` at `(x, y, z)`.
    pub fn foc3_dz(&self, p: OutputTriple) -> Result<f64> {
        self.mkt()?.profit_curvature(2, &p.to_array(), &self.diff)
    }

    /// Follower best response `z = b3(x, y)`, the root of `dPi3/dz`.
    pub fn solve_b3(&self, x: f64, y: f64) -> Result<f64> {
        self.solve_inner(|z| self.foc3(OutputTriple::new(x, y, z)))
    }

    fn follower(&self, x: f64, y: f64) -> Result<Follower> {
        let z = self.solve_b3(x, y)?;
        let q = x + y + z;
        let p = self.mkt()?.demand.price(q)?;
        let p1 = self.demand_d(1, q)?;
        let p2 = self.demand_d(2, q)?;
        let p3 = self.demand_d(3, q)?;
        let c2 = self.cost_d(2, 2, z)?;
        let c3 = self.cost_d(2, 3, z)?;

        let num = p1 + z * p2;
        let den = 2.0 * p1 + z * p2 - c2;
        if den == 0.0 {
            return Err(Error::Numerics(format!(
                "follower FOC is flat in z at ({x}, {y}, {z})"
            )));
        }
        let beta = -num / den;
        let dnum = p2 * (1.0 + beta) + beta * p2 + z * p3 * (1.0 + beta);
        let dden = 2.0 * p2 * (1.0 + beta) + beta * p2 + z * p3 * (1.0 + beta) - c3 * beta;
        let dbeta = -(dnum * den - num * dden) / (den * den);
        Ok(Follower {
            p,
            p1,
            p2,
            beta: check_finite("db3/dy", y, beta)?,
            dbeta: check_finite("d2b3/dy2", y, dbeta)?,
        })
    }

    /// `db3/dy` at `(x, y)` by the implicit function theorem.
    pub fn b3_slope(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.follower(x, y)?.beta)
    }

    /// `db3/dy` by central differences of the solved best response; an
    /// independent cross-check of [`ResponseSystem::b3_slope`].
    pub fn b3_slope_fd(&self, x: f64, y: f64) -> Result<f64> {
        try_diff1(|t| self.solve_b3(x, t), y, &self.diff)
    }

    // ---- middle firm ----------------------------------------------------

    /// `Phi2(x, y) = Pi2(x, y, b3(x, y))`.
    pub fn phi2(&self, x: f64, y: f64) -> Result<f64> {
        let z = self.solve_b3(x, y)?;
        self.mkt()?.profit(1, &[x, y, z])
    }

    /// `dPhi2/dy`, the middle firm's first-order condition.
    pub fn foc2(&self, x: f64, y: f64) -> Result<f64> {
        let f = self.follower(x, y)?;
        Ok(f.p + y * f.p1 * (1.0 + f.beta) - self.cost_d(1, 1, y)?)
    }

    /// `(d/dx, d/dy)` of `dPhi2/dy`; the second entry is the middle firm's
    /// second-order term `d^2 Phi2 / dy^2`.
    pub fn foc2_partials(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let f = self.follower(x, y)?;
        let shift = 1.0 + f.beta;
        let dx = f.p1 * shift + y * f.p2 * shift * shift + y * f.p1 * f.dbeta;
        let dy = dx + f.p1 * shift - self.cost_d(1, 2, y)?;
        Ok((dx, dy))
    }

    /// Middle firm best response `y = b2(x)`, the root of `dPhi2/dy`.
    pub fn solve_b2(&self, x: f64) -> Result<f64> {
        self.solve_inner(|y| self.foc2(x, y))
    }

    // ---- leader ---------------------------------------------------------

    /// `Phi1(x) = Pi1(x, b2(x), b3(x, b2(x)))`.
    pub fn phi1(&self, x: f64) -> Result<f64> {
        let y = self.solve_b2(x)?;
        let z = self.solve_b3(x, y)?;
        self.mkt()?.profit(0, &[x, y, z])
    }

    /// `dPhi1/dx`, the leader's first-order condition.
    pub fn foc1(&self, x: f64) -> Result<f64> {
        let y = self.solve_b2(x)?;
        let f = self.follower(x, y)?;
        let (gx, gy) = self.foc2_partials(x, y)?;
        if gy == 0.0 {
            return Err(Error::Numerics(format!(
                "middle FOC is flat in y at ({x}, {y})"
            )));
        }
        let db2 = -gx / gy;
        let dq = (1.0 + db2) * (1.0 + f.beta);
        Ok(f.p + x * f.p1 * dq - self.cost_d(0, 1, x)?)
    }

    // ---- response maps --------------------------------------------------

    pub fn f3(&self, p: OutputTriple) -> Result<f64> {
        match self.mode {
            MapMode::ExplicitLinear => Ok(self.affine_row(2, p)),
            _ => Ok(p.z + self.gain * self.foc3(p)?),
        }
    }

    pub fn f2(&self, p: OutputTriple) -> Result<f64> {
        match self.mode {
            MapMode::ExplicitLinear => Ok(self.affine_row(1, p)),
            MapMode::ReducedHierarchical => Ok(p.y + self.gain * self.foc2(p.x, p.y)?),
            MapMode::Cournot => {
                Ok(p.y + self.gain * self.mkt()?.marginal_profit(1, &p.to_array(), &self.diff)?)
            }
            MapMode::DerivativePlusIdentity => {
                let w = self.f3(p)?;
                let mkt = self.mkt()?;
                let at = [p.x, p.y, w];
                let own = mkt.marginal_profit(1, &at, &self.diff)?;
                let cross = p.y * mkt.demand.derivative(1, p.x + p.y + w, &self.diff)?;
                let dw_dy = try_diff1(|t| self.f3(OutputTriple::new(p.x, t, p.z)), p.y, &self.diff)?;
                Ok(p.y + self.gain * (own + cross * dw_dy))
            }
        }
    }

    pub fn f1(&self, p: OutputTriple) -> Result<f64> {
        match self.mode {
            MapMode::ExplicitLinear => Ok(self.affine_row(0, p)),
            MapMode::ReducedHierarchical => Ok(p.x + self.gain * self.foc1(p.x)?),
            MapMode::Cournot => {
                Ok(p.x + self.gain * self.mkt()?.marginal_profit(0, &p.to_array(), &self.diff)?)
            }
            MapMode::DerivativePlusIdentity => {
                let mkt = self.mkt()?;
                let total = try_diff1(
                    |t| {
                        let q = OutputTriple::new(t, p.y, p.z);
                        mkt.profit(0, &[t, self.f2(q)?, self.f3(q)?])
                    },
                    p.x,
                    &self.diff,
                )?;
                Ok(p.x + self.gain * total)
            }
        }
    }

    fn affine_row(&self, i: usize, p: OutputTriple) -> f64 {
        self.affine.as_ref().map_or(f64::NAN, |a| a.row(i, p))
    }

    /// The hierarchical map `S`.
    pub fn hierarchical_map(&self, p: OutputTriple) -> Result<OutputTriple> {
        let out = match self.mode {
            MapMode::DerivativePlusIdentity => {
                let s3 = self.f3(p)?;
                let s2 = self.f2(OutputTriple::new(p.x, p.y, s3))?;
                let s1 = self.f1(OutputTriple::new(p.x, s2, s3))?;
                OutputTriple::new(s1, s2, s3)
            }
            _ => OutputTriple::new(self.f1(p)?, self.f2(p)?, self.f3(p)?),
        };
        if !out.is_finite() {
            return Err(Error::Evaluation {
                what: "hierarchical map".into(),
                at: p.total(),
            });
        }
        Ok(out)
    }

    /// First-order residuals `[leader, middle, follower]` at `p`.
    pub fn foc_residuals(&self, p: OutputTriple) -> Result<[f64; 3]> {
        match self.mode {
            MapMode::ReducedHierarchical => {
                Ok([self.foc1(p.x)?, self.foc2(p.x, p.y)?, self.foc3(p)?])
            }
            MapMode::Cournot => {
                let m = self.mkt()?;
                let a = p.to_array();
                Ok([
                    m.marginal_profit(0, &a, &self.diff)?,
                    m.marginal_profit(1, &a, &self.diff)?,
                    m.marginal_profit(2, &a, &self.diff)?,
                ])
            }
            MapMode::DerivativePlusIdentity => Ok([
                (self.f1(p)? - p.x) / self.gain,
                (self.f2(p)? - p.y) / self.gain,
                self.foc3(p)?,
            ]),
            MapMode::ExplicitLinear => {
                let s = self.hierarchical_map(p)?;
                Ok([s.x - p.x, s.y - p.y, s.z - p.z])
            }
        }
    }

    /// Local triple cross symmetry of `S` at `p`, within `tol` in the summed
    /// absolute mismatch.
    pub fn cross_symmetry_holds(&self, p: OutputTriple, tol: f64) -> Result<bool> {
        let at_p = self.hierarchical_map(p)?;
        let at_rot = self.hierarchical_map(p.rotated())?;
        let mismatch =
            (at_rot.x - at_p.y).abs() + (at_rot.y - at_p.z).abs() + (at_rot.z - at_p.x).abs();
        Ok(mismatch <= tol)
    }
}

/// Summing metric on triples.
pub fn m1(a: OutputTriple, b: OutputTriple) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs() + (a.z - b.z).abs()
}

/// `m1(a, S(a)) + m1(b, S(b))`.
pub fn m2s(sys: &ResponseSystem, a: OutputTriple, b: OutputTriple) -> Result<f64> {
    Ok(m1(a, sys.hierarchical_map(a)?) + m1(b, sys.hierarchical_map(b)?))
}

/// `m1(a, S(b)) + m1(b, S(a))`.
pub fn m3s(sys: &ResponseSystem, a: OutputTriple, b: OutputTriple) -> Result<f64> {
    Ok(m1(a, sys.hierarchical_map(b)?) + m1(b, sys.hierarchical_map(a)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub m1: f64,
    pub m2s: f64,
    pub m3s: f64,
}

pub fn metrics(sys: &ResponseSystem, a: OutputTriple, b: OutputTriple) -> Result<MetricValue> {
    let sa = sys.hierarchical_map(a)?;
    let sb = sys.hierarchical_map(b)?;
    Ok(MetricValue {
        m1: m1(a, b),
        m2s: m1(a, sa) + m1(b, sb),
        m3s: m1(a, sb) + m1(b, sa),
    })
}
