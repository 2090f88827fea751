//! Multi-stage bonus allocation.
//!
//! A meal-delivery platform displays a bonus on unaccepted orders to
//! keep them from being canceled; the bonus may change at each stage of
//! an order's lifecycle and total expected spend must fit a budget. This
//! crate implements the full allocation stack:
//!
//! - [`curve`] / [`order`]: the logistic demand model and exact
//!   expected-value composition over an order's lifecycle.
//! - [`single_stage`]: the zero-duality-gap Lagrangian dual solver for
//!   one stage's allocation (bisection on the multiplier).
//! - [`lddp`]: the offline dynamic program over (stage, money level)
//!   producing the per-stage empirical multiplier schedule.
//! - [`online`]: the constant-time per-order decision rule consuming
//!   that schedule.
//! - [`sim`]: exact and Monte Carlo policy evaluation, baseline
//!   policies, and the synthetic comparison harness.
//! - [`controller`]: daily budget retargeting and realtime expenditure
//!   pacing.
//! - [`fitting`]: logistic curve fitting and histogram calibration of
//!   cancellation scores.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI
//! live in the companion `msba-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod controller;
pub mod curve;
pub mod fitting;
pub mod lddp;
pub mod online;
pub mod order;
pub mod sim;
pub mod single_stage;

pub use curve::{AcceptanceCurve, CurveError, ProbBounds, ALPHA_EPSILON};
pub use lddp::{
    backtrack, build_stage_tables, recurse, train, BacktrackMode, DpTables, LddpConfig,
    LddpError, MultiplierSchedule, StageData, StageDataset, TableBuilder,
};
pub use online::{decide, decide_batch, scan_grid, BonusGrid, Decision, GridScan, OnlineError};
pub use order::{LifecycleBreakdown, OrderError, OrderId, OrderProfile, StagePlan};
pub use single_stage::{
    inner_min, solve, spend_at, StageDual, StageError, StageOrder, StageProblem, StageSolution,
    LAMBDA_TOL, LAMBDA_UPPER,
};
