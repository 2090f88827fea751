//! Single-stage bonus allocation via the Lagrangian dual.
//!
//! The stage problem — maximize the summed acceptance probability subject
//! to an expected-spend budget and per-order bonus caps — becomes convex
//! after the change of variables from bonus to probability, and Slater's
//! condition makes the duality gap zero. The dual is one-dimensional in
//! the multiplier, so the solver is a bisection on lambda with, inside it,
//! one independent convex minimization per order:
//!
//! ```text
//! p* = argmin over [p(0), p(cap)] of  -p + lambda * p * c(p)
//! ```
//!
//! Expected spend at the inner optimum is non-increasing in lambda, which
//! is what the bisection relies on.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::curve::{AcceptanceCurve, CurveError, ProbBounds};

/// Upper end of the multiplier search interval ("a big number"). At this
/// price any positive bonus strictly worsens the inner objective for
/// every curve with |alpha| up to ~1e4, so the bisection never needs more.
pub const LAMBDA_UPPER: f64 = 1e4;

/// Bisection stops when the bracket is narrower than this.
pub const LAMBDA_TOL: f64 = 1e-6;

/// Absolute tolerance (in probability) of the inner golden-section search.
const INNER_TOL: f64 = 1e-7;

const GOLDEN_RATIO_COMPLEMENT: f64 = 2.0 - 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error("stage problem needs at least one order")]
    NoOrders,
    #[error("budget must be finite and >= 0, got {0}")]
    InvalidBudget(f64),
    #[error("multiplier must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// One order as seen by a stage: its curve at that stage, the bonus cap,
/// and the induced probability box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOrder {
    curve: AcceptanceCurve,
    cap: f64,
    bounds: ProbBounds,
}

impl StageOrder {
    pub fn new(curve: AcceptanceCurve, cap: f64) -> Result<Self, StageError> {
        let bounds = ProbBounds::for_cap(&curve, cap)?;
        Ok(Self { curve, cap, bounds })
    }

    pub fn curve(&self) -> &AcceptanceCurve {
        &self.curve
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn bounds(&self) -> ProbBounds {
        self.bounds
    }

    /// Bonus that realizes probability `p`, clamped to the bonus box.
    #[inline]
    fn bonus_for(&self, p: f64) -> f64 {
        self.curve.bonus_unchecked(p).clamp(0.0, self.cap)
    }

    /// Inner dual objective `-p + lambda * p * c(p)`.
    #[inline]
    fn dual_objective(&self, p: f64, lambda: f64) -> f64 {
        -p + lambda * p * self.bonus_for(p)
    }
}

/// A single-stage instance: the surviving order set and the stage budget.
#[derive(Debug, Clone, PartialEq)]
pub struct StageProblem {
    orders: Vec<StageOrder>,
    budget: f64,
}

impl StageProblem {
    pub fn new(orders: Vec<StageOrder>, budget: f64) -> Result<Self, StageError> {
        if orders.is_empty() {
            return Err(StageError::NoOrders);
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(StageError::InvalidBudget(budget));
        }
        Ok(Self { orders, budget })
    }

    pub fn orders(&self) -> &[StageOrder] {
        &self.orders
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

/// Output of the bisection: the converged multiplier, the dual objective
/// `sum p*`, the expected spend `sum p* c*`, and the per-order optima.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    pub lambda: f64,
    pub objective: f64,
    pub spend: f64,
    pub per_order: Vec<(f64, f64)>,
    /// Set when even the top of the multiplier range cannot push spend
    /// under the budget; unreachable for curves with bounded slope.
    pub degenerate: bool,
}

/// Minimize a convex function on `[a, b]` by golden-section to absolute
/// tolerance `tol` in the argument.
fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = lo + GOLDEN_RATIO_COMPLEMENT * (hi - lo);
    let mut x2 = hi - GOLDEN_RATIO_COMPLEMENT * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + GOLDEN_RATIO_COMPLEMENT * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - GOLDEN_RATIO_COMPLEMENT * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Per-order inner minimization of the Lagrangian at a fixed multiplier.
///
/// Returns `(p*, c*)` with `p*` in the order's probability box and
/// `c* = clamp(c(p*), 0, cap)`. The search result is compared against
/// both box endpoints so that the corner solutions (`lambda = 0` gives
/// the cap, large `lambda` gives zero bonus) come out exact; near-ties
/// resolve toward the smaller bonus.
pub fn inner_min(order: &StageOrder, lambda: f64) -> Result<(f64, f64), StageError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(StageError::InvalidLambda(lambda));
    }
    Ok(inner_min_unchecked(order, lambda))
}

fn inner_min_unchecked(order: &StageOrder, lambda: f64) -> (f64, f64) {
    let lo = order.bounds.p_low();
    let hi = order.bounds.p_high();
    let f = |p: f64| order.dual_objective(p, lambda);
    let mut best_p = if hi - lo > INNER_TOL {
        golden_section_min(f, lo, hi, INNER_TOL)
    } else {
        lo
    };
    let mut best_val = f(best_p);
    // endpoint sweep, low end last so ties prefer the smaller bonus
    for candidate in [hi, lo] {
        let val = f(candidate);
        if val < best_val - 1e-12 || (val < best_val + 1e-12 && candidate < best_p) {
            best_p = candidate;
            best_val = val;
        }
    }
    (best_p, order.bonus_for(best_p))
}

/// Expected spend across the stage at multiplier `lambda`.
pub fn spend_at(problem: &StageProblem, lambda: f64) -> Result<f64, StageError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(StageError::InvalidLambda(lambda));
    }
    Ok(problem
        .orders
        .iter()
        .map(|o| {
            let (p, c) = inner_min_unchecked(o, lambda);
            p * c
        })
        .sum())
}

/// Dual evaluation at one multiplier: total spend and total probability.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DualPoint {
    spend: f64,
    objective: f64,
}

fn evaluate_dual(orders: &[StageOrder], lambda: f64) -> DualPoint {
    let mut spend = 0.0;
    let mut objective = 0.0;
    for order in orders {
        let (p, c) = inner_min_unchecked(order, lambda);
        spend += p * c;
        objective += p;
    }
    DualPoint { spend, objective }
}

/// Bisection on the multiplier for a fixed order set, memoizing dual
/// evaluations.
///
/// Every bisection starts from the same bracket `[0, LAMBDA_UPPER]`, so
/// the midpoints visited across different budgets all lie on one dyadic
/// grid; the dynamic program solves the same stage at every money level
/// and reuses most evaluations. Results are bit-identical to running the
/// bisection standalone.
pub struct StageDual<'a> {
    orders: &'a [StageOrder],
    cache: BTreeMap<u64, DualPoint>,
}

impl<'a> StageDual<'a> {
    pub fn new(orders: &'a [StageOrder]) -> Self {
        Self {
            orders,
            cache: BTreeMap::new(),
        }
    }

    fn eval(&mut self, lambda: f64) -> DualPoint {
        *self
            .cache
            .entry(lambda.to_bits())
            .or_insert_with(|| evaluate_dual(self.orders, lambda))
    }

    /// Algorithm: bisect `lambda` on `[0, LAMBDA_UPPER]`; spend is
    /// non-increasing in `lambda`, move `low` up while spend >= budget,
    /// `high` down otherwise; return the `high` (feasible) endpoint.
    pub fn solve(&mut self, budget: f64) -> Result<StageSolution, StageError> {
        if !budget.is_finite() || budget < 0.0 {
            return Err(StageError::InvalidBudget(budget));
        }
        if self.orders.is_empty() {
            return Err(StageError::NoOrders);
        }
        let mut low = 0.0_f64;
        let mut high = LAMBDA_UPPER;
        while high - low > LAMBDA_TOL {
            let mid = 0.5 * (low + high);
            let point = self.eval(mid);
            if point.spend - budget >= 0.0 {
                low = mid;
            } else {
                high = mid;
            }
        }
        let lambda = high;
        let per_order: Vec<(f64, f64)> = self
            .orders
            .iter()
            .map(|o| inner_min_unchecked(o, lambda))
            .collect();
        let spend: f64 = per_order.iter().map(|(p, c)| p * c).sum();
        let objective: f64 = per_order.iter().map(|(p, _)| p).sum();
        let tolerance = 1e-9 * (1.0 + budget);
        Ok(StageSolution {
            lambda,
            objective,
            spend,
            per_order,
            degenerate: spend > budget + tolerance && lambda >= LAMBDA_UPPER - LAMBDA_TOL,
        })
    }
}

/// Solve one stage problem from scratch.
pub fn solve(problem: &StageProblem) -> Result<StageSolution, StageError> {
    StageDual::new(&problem.orders).solve(problem.budget)
}
