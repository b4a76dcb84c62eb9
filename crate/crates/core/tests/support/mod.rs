//! Independent numeric oracles. Nothing here calls into the library's
//! solvers: every equilibrium is found by direct maximization of profits.
#![allow(dead_code)]

/// Maximizer of a concave `f` on `[lo, hi]` by bisection on its central
/// difference derivative.
pub fn argmax_by_derivative(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let h = 1e-6 * (hi - lo).abs().max(1.0);
    let d = |x: f64| f(x + h) - f(x - h);
    let (mut a, mut b) = (lo, hi);
    if d(a) <= 0.0 {
        return a;
    }
    if d(b) >= 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if d(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `alpha + beta * S`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    alpha: f64,
    beta: f64,
}

impl Affine {
    fn at(&self, s: f64) -> f64 {
        self.alpha + self.beta * s
    }
}

/// Result of the sequential-move oracle.
#[derive(Debug, Clone)]
pub struct ChainSolution {
    /// Outputs, leader first.
    pub outputs: Vec<f64>,
    /// Largest deviation of a fitted stage response from a fresh
    /// maximization at a third placed-output level.
    pub affinity_defect: f64,
}

/// Sequential (leader first) n-firm equilibrium under `P = a - b Q` and
/// identical costs `c t` or `c t^2`, by backward induction.
///
/// Each stage's response to the output `S` already placed is obtained by
/// maximizing the stage firm's profit numerically at two levels of `S`,
/// anticipating the later block's fitted response. With linear demand the
/// responses are affine in `S`; the defect at a third level measures that.
pub fn stackelberg_chain(n: usize, a: f64, b: f64, c: f64, quadratic: bool) -> ChainSolution {
    let cost = |t: f64| if quadratic { c * t * t } else { c * t };
    let m = a / b;
    let levels = [0.0, 0.25 * m];
    let probe = 0.125 * m;
    // responses of firms k..n (in order) to the output placed before k
    let mut block: Vec<Affine> = Vec::new();
    let mut defect: f64 = 0.0;
    for _stage in (1..=n).rev() {
        let later = block.clone();
        let best = |s: f64| {
            let profit = |x: f64| {
                let later_sum: f64 = later.iter().map(|r| r.at(s + x)).sum();
                x * (a - b * (s + x + later_sum)) - cost(x)
            };
            argmax_by_derivative(profit, 0.0, m)
        };
        let x0 = best(levels[0]);
        let x1 = best(levels[1]);
        let own = Affine {
            alpha: x0,
            beta: (x1 - x0) / (levels[1] - levels[0]),
        };
        defect = defect.max((best(probe) - own.at(probe)).abs() / own.at(probe).abs().max(1.0));
        // later firms see S + x_k(S)
        let mut next = vec![own];
        for r in &later {
            next.push(Affine {
                alpha: r.alpha + r.beta * own.alpha,
                beta: r.beta * (1.0 + own.beta),
            });
        }
        block = next;
    }
    ChainSolution {
        outputs: block.iter().map(|r| r.at(0.0)).collect(),
        affinity_defect: defect,
    }
}

/// Grid maximizer on `[lo, hi]`: a 0.1 grid, three zooms down to a 1e-4 grid
/// around the incumbent, then the vertex of the parabola through the best
/// 1e-4 grid point and its neighbours.
pub fn argmax_grid(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mut step = 0.1;
    let mut a = lo;
    let mut b = hi;
    let mut best = lo;
    loop {
        let count = ((b - a) / step).round() as i64;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..=count {
            let x = (a + i as f64 * step).min(hi);
            let v = f(x);
            if v > best_val {
                best_val = v;
                best = x;
            }
        }
        if step <= 1.0001e-4 {
            break;
        }
        a = (best - step).max(lo);
        b = (best + step).min(hi);
        step /= 10.0;
    }
    if best - step < lo || best + step > hi {
        return best;
    }
    let (fm, f0, fp) = (f(best - step), f(best), f(best + step));
    let denom = fm - 2.0 * f0 + fp;
    if denom >= 0.0 {
        return best;
    }
    best + 0.5 * step * (fm - fp) / denom
}

/// `P = 10 - arctan(Q)`, costs `t e^t`.
pub fn nonlinear_profit(own: f64, total: f64) -> f64 {
    own * (10.0 - total.atan()) - own * own.exp()
}

/// Three-stage backward induction in the nonlinear market by nested grid
/// searches on `[0, 5]`.
pub fn nonlinear_grid_equilibrium() -> [f64; 3] {
    let follower = |x: f64, y: f64| argmax_grid(|z| nonlinear_profit(z, x + y + z), 0.0, 5.0);
    let middle = |x: f64| {
        argmax_grid(
            |y| {
                let z = follower(x, y);
                nonlinear_profit(y, x + y + z)
            },
            0.0,
            5.0,
        )
    };
    let x = argmax_grid(
        |x| {
            let y = middle(x);
            let z = follower(x, y);
            nonlinear_profit(x, x + y + z)
        },
        0.0,
        5.0,
    );
    let y = middle(x);
    [x, y, follower(x, y)]
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
