//! Named markets and response systems used throughout the examples, the
//! CLI registry and the test suites.

use crate::error::Result;
use crate::market::{CostSpec, DemandSpec, MarketSpec, OutputTriple};
use crate::response::{AffineMap, ResponseSystem};
use crate::roots::InnerSolveConfig;

/// Demand intercept of the running linear-quadratic example.
pub const EXAMPLE_A: f64 = 30996.0;
/// Demand slope of the running example.
pub const EXAMPLE_B: f64 = 1.0 / 20.0;
/// Cost coefficient of the running example.
pub const EXAMPLE_C: f64 = 1.0 / 40.0;

pub const EXAMPLE_STACKELBERG: OutputTriple = OutputTriple::new(151200.0, 133920.0, 111600.0);
pub const EXAMPLE_COURNOT: OutputTriple = OutputTriple::splat(123984.0);

/// Price level of the nonlinear demand `P(Q) = 10 - arctan(Q)`.
pub const NONLINEAR_LEVEL: f64 = 10.0;
/// Search interval for best responses in the nonlinear market.
pub const NONLINEAR_BRACKET: (f64, f64) = (0.0, 10.0);

pub fn example_demand() -> DemandSpec {
    DemandSpec::Linear {
        intercept: EXAMPLE_A,
        slope: EXAMPLE_B,
    }
}

/// Linear demand `30996 - Q/20`, quadratic costs `t^2/40`, three firms.
pub fn example_market() -> MarketSpec {
    example_market_n(3)
}

pub fn example_market_n(n: usize) -> MarketSpec {
    MarketSpec::symmetric(n, example_demand(), CostSpec::Quadratic(EXAMPLE_C))
        .expect("example market is valid")
}

/// The running example with linear costs `t/40`.
pub fn example_linear_cost_market() -> MarketSpec {
    MarketSpec::symmetric(3, example_demand(), CostSpec::Linear(EXAMPLE_C))
        .expect("example market is valid")
}

pub fn example_reduced() -> ResponseSystem {
    ResponseSystem::reduced(example_market()).expect("three firms")
}

pub fn example_general() -> ResponseSystem {
    ResponseSystem::general(example_market()).expect("three firms")
}

pub fn example_cournot() -> ResponseSystem {
    ResponseSystem::cournot(example_market()).expect("three firms")
}

/// The affine form of the running example's reduced response maps.
pub fn example_affine_map() -> AffineMap {
    AffineMap {
        matrix: [
            [379.0 / 420.0, 0.0, 0.0],
            [-1.0 / 30.0, 53.0 / 60.0, 0.0],
            [-1.0 / 20.0, -1.0 / 20.0, 17.0 / 20.0],
        ],
        constant: [14760.0, 20664.0, 30996.0],
    }
}

pub fn example_affine() -> ResponseSystem {
    ResponseSystem::explicit_linear(example_affine_map())
}

/// Affine response maps whose Picard iteration diverges although the
/// first-order solution is a genuine equilibrium.
pub fn divergent_map() -> AffineMap {
    AffineMap {
        matrix: [
            [-2990591.0 / 722420.0, 0.0, 0.0],
            [-21.0 / 41.0, -61.0 / 820.0, 0.0],
            [-1.0, -1.0, -21.0 / 20.0],
        ],
        constant: [7318836.0 / 881.0, 15876.0, 30996.0],
    }
}

pub fn divergent_system() -> ResponseSystem {
    ResponseSystem::explicit_linear(divergent_map())
}

/// `P(Q) = 10 - arctan(Q)` with costs `t e^t` for every firm.
pub fn nonlinear_market() -> MarketSpec {
    MarketSpec::symmetric(3, DemandSpec::arctan(NONLINEAR_LEVEL), CostSpec::t_exp_t())
        .expect("nonlinear market is valid")
}

/// Reduced response system over [`nonlinear_market`]. The steep exponential
/// costs make the unit-gain maps expansive, so callers usually pass a gain
/// well below one.
pub fn nonlinear_reduced(gain: f64) -> Result<ResponseSystem> {
    ResponseSystem::reduced(nonlinear_market())?
        .with_inner(InnerSolveConfig {
            bracket: Some(NONLINEAR_BRACKET),
            ..InnerSolveConfig::default()
        })?
        .with_gain(gain)
}
