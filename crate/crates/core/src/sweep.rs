//! Grid sweeps producing the data behind the `δ*` and `G` figures.

use crate::error::Result;
use crate::model::{self, MarketParams, MarketShape, Regime};
use crate::quadrature::IntegrationConfig;
use crate::table::{Cell, CurveTable};

pub const DELTA_COLUMNS: [&str; 6] = ["lambda", "g", "p_star", "delta_star", "gamma", "regime"];

pub fn regime_label(regime: Regime) -> &'static str {
    match regime {
        Regime::ReservationPrice => "reservation_price",
        Regime::NoReservationPrice => "no_reservation_price",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub shopper_share: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub table: CurveTable,
    /// Rows whose evaluation failed; they stay in the table as `n/a`.
    pub failures: Vec<RowFailure>,
}

/// `λ, G, p*, δ*, Γ, regime` over `lambdas`. `δ*` and `Γ` are `n/a`
/// outside the reservation-price regime.
pub fn delta_sweep(
    n_firms: u32,
    search_cost: f64,
    valuation: f64,
    lambdas: &[f64],
    cfg: &IntegrationConfig,
) -> Result<Sweep> {
    MarketParams::new(n_firms, 0.5, search_cost, valuation)?;
    let mut table = CurveTable::new(DELTA_COLUMNS);
    let mut failures = Vec::new();
    for &lambda in lambdas {
        let row = MarketParams::new(n_firms, lambda, search_cost, valuation)
            .and_then(|p| model::equilibrium_point(&p, cfg));
        let cells = match row {
            Ok(eq) => vec![
                Cell::Value(lambda),
                Cell::Value(eq.g_family.g),
                Cell::Value(eq.p_star),
                eq.delta_star.into(),
                eq.gamma.into(),
                Cell::Label(regime_label(eq.regime).into()),
            ],
            Err(e) => {
                failures.push(RowFailure {
                    shopper_share: lambda,
                    message: e.to_string(),
                });
                let mut cells = vec![Cell::Value(lambda)];
                cells.extend(std::iter::repeat_n(Cell::NotApplicable, 4));
                cells.push(Cell::Label("failed".into()));
                cells
            }
        };
        table.push_row(cells)?;
    }
    Ok(Sweep { table, failures })
}

/// `λ, 1−λ, G(λ;N₁), G(λ;N₂), …` over `lambdas`.
pub fn g_sweep(n_list: &[u32], lambdas: &[f64], cfg: &IntegrationConfig) -> Result<Sweep> {
    for &n in n_list {
        MarketShape::new(n, 0.5)?;
    }
    let mut columns = vec!["lambda".to_string(), "one_minus_lambda".to_string()];
    columns.extend(n_list.iter().map(|n| format!("g{n}")));
    let mut table = CurveTable::new(columns);
    let mut failures = Vec::new();
    for &lambda in lambdas {
        let mut cells = vec![Cell::Value(lambda), Cell::Value(1.0 - lambda)];
        for &n in n_list {
            match MarketShape::new(n, lambda).and_then(|s| model::g_value(&s, cfg)) {
                Ok(g) => cells.push(Cell::Value(g)),
                Err(e) => {
                    failures.push(RowFailure {
                        shopper_share: lambda,
                        message: format!("N={n}: {e}"),
                    });
                    cells.push(Cell::NotApplicable);
                }
            }
        }
        table.push_row(cells)?;
    }
    Ok(Sweep { table, failures })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingReport {
    /// Smallest gap between neighbouring columns over all rows.
    pub worst_margin: f64,
    pub worst_lambda: f64,
    pub rows: usize,
}

impl OrderingReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.worst_margin >= -tolerance
    }
}

/// Checks that every row of `table` is non-decreasing from the second
/// column on; `n/a` cells are skipped.
pub fn column_ordering(table: &CurveTable) -> OrderingReport {
    let mut report = OrderingReport {
        worst_margin: f64::INFINITY,
        worst_lambda: f64::NAN,
        rows: table.rows.len(),
    };
    for row in &table.rows {
        let values: Vec<f64> = row[1..].iter().filter_map(Cell::value).collect();
        for w in values.windows(2) {
            let gap = w[1] - w[0];
            if gap < report.worst_margin {
                report.worst_margin = gap;
                report.worst_lambda = row[0].value().unwrap_or(f64::NAN);
            }
        }
    }
    report
}
