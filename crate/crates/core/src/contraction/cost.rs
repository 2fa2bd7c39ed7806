//! Closed-form space and time costs of the contraction strategies, the
//! memory budget guard, and strategy selection.
//!
//! All counts are exact integers. With `c = ceil(d / 8)` every formula is
//! written in terms of the bond dimension `chi = 2^c`, so the same code
//! also prices networks whose actual bond extents are known.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

pub const BYTES_PER_ELEMENT: u32 = 16;

/// 8 GiB.
pub const DEFAULT_BUDGET_BYTES: u64 = 8 << 30;

/// Legs of the largest tensor in the Bristlecone-72 partition.
const BRISTLECONE_MAX_RANK: u32 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    GenericRows,
    SquareEven,
    SquareOdd,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::GenericRows => "generic-rows",
            Strategy::SquareEven => "square-even",
            Strategy::SquareOdd => "square-odd",
        }
    }

    pub fn is_applicable(self, rows: usize, cols: usize) -> bool {
        match self {
            Strategy::GenericRows => rows >= 1 && cols >= 1,
            Strategy::SquareEven => rows == cols && rows >= 2 && rows.is_multiple_of(2),
            Strategy::SquareOdd => rows == cols && rows >= 3 && rows % 2 == 1,
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic-rows" | "generic" => Ok(Strategy::GenericRows),
            "square-even" => Ok(Strategy::SquareEven),
            "square-odd" => Ok(Strategy::SquareOdd),
            other => Err(Error::invalid(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Direction of the generic sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Absorb one row at a time, top to bottom (used when rows >= cols).
    Rows,
    /// Absorb one column at a time, left to right (used when cols > rows).
    Columns,
}

impl Orientation {
    pub fn for_shape(rows: usize, cols: usize) -> Self {
        if rows >= cols {
            Orientation::Rows
        } else {
            Orientation::Columns
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    /// Which closed form produced the numbers.
    pub formula: &'static str,
    pub space_elements: BigUint,
    pub space_bytes: BigUint,
    /// Multiply-add count; the Bristlecone estimate has none.
    pub time_ops: Option<BigUint>,
}

impl CostReport {
    fn new(formula: &'static str, space_elements: BigUint, time_ops: Option<BigUint>) -> Self {
        let space_bytes = &space_elements * BYTES_PER_ELEMENT;
        CostReport {
            formula,
            space_elements,
            space_bytes,
            time_ops,
        }
    }

    pub fn human_space(&self) -> String {
        human_bytes(&self.space_bytes)
    }

    /// `space_bytes` in units of `unit` bytes.
    pub fn space_in(&self, unit: u64) -> f64 {
        big_to_f64(&self.space_bytes) / unit as f64
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: space {} elements = {} bytes ({})",
            self.formula,
            self.space_elements,
            self.space_bytes,
            self.human_space()
        )?;
        match &self.time_ops {
            Some(t) => write!(f, ", time {t} ops"),
            None => write!(f, ", time n/a"),
        }
    }
}

pub const KIB: u64 = 1 << 10;
pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;
pub const TIB: u64 = 1 << 40;
pub const PIB: u64 = 1 << 50;

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Binary-prefixed rendering, e.g. `32 TiB`.
pub fn human_bytes(bytes: &BigUint) -> String {
    let v = big_to_f64(bytes);
    let units = [
        ("EiB", PIB as f64 * 1024.0),
        ("PiB", PIB as f64),
        ("TiB", TIB as f64),
        ("GiB", GIB as f64),
        ("MiB", MIB as f64),
        ("KiB", KIB as f64),
    ];
    for (name, scale) in units {
        if v >= scale {
            return format!("{} {name}", trim_float(v / scale));
        }
    }
    format!("{v} B")
}

fn trim_float(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Parses `1073741824`, `8GiB`, `8G`, `1.5TiB`, `512MB` (decimal suffixes
/// without `i` are read as binary, matching common memory-size usage).
pub fn parse_byte_size(s: &str) -> Result<u64> {
    let s = s.trim();
    let split = s
        .find(|ch: char| !(ch.is_ascii_digit() || ch == '.'))
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| Error::invalid(format!("bad byte size {s:?}")))?;
    let scale = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => KIB,
        "m" | "mb" | "mib" => MIB,
        "g" | "gb" | "gib" => GIB,
        "t" | "tb" | "tib" => TIB,
        "p" | "pb" | "pib" => PIB,
        other => return Err(Error::invalid(format!("unknown size unit {other:?}"))),
    };
    let bytes = value * scale as f64;
    if !(bytes.is_finite() && bytes >= 1.0 && bytes <= u64::MAX as f64) {
        return Err(Error::invalid(format!("byte size {s:?} out of range")));
    }
    Ok(bytes as u64)
}

/// `ceil(d / 8)`, the bond-dimension exponent after depth `d`.
pub fn chi_exponent(depth: usize) -> u32 {
    depth.div_ceil(8) as u32
}

fn pow(chi: &BigUint, e: u64) -> BigUint {
    num_traits::pow(chi.clone(), e as usize)
}

/// Cost of `strategy` on an `rows x cols` lattice whose bonds are at most
/// `chi`.
pub fn estimate_cost_for_chi(
    rows: usize,
    cols: usize,
    chi: &BigUint,
    strategy: Strategy,
) -> Result<CostReport> {
    if !strategy.is_applicable(rows, cols) {
        return Err(Error::invalid(format!(
            "strategy {} does not apply to a {rows}x{cols} lattice",
            strategy.name()
        )));
    }
    let report = match strategy {
        Strategy::GenericRows => {
            let l = rows.min(cols) as u64;
            let space = pow(chi, l + 1);
            // (L_h - 2)(L_v - 2) interior absorptions; none on lattices
            // thinner than three sites.
            let steps =
                BigUint::from(rows.saturating_sub(2)) * BigUint::from(cols.saturating_sub(2));
            let time = steps * pow(chi, l + 3);
            CostReport::new(strategy.name(), space, Some(time))
        }
        Strategy::SquareEven => {
            let side = rows as u64;
            let space = pow(chi, side) * 2u32;
            let time = pow(chi, 3 * side / 2) * 2u32;
            CostReport::new(strategy.name(), space, Some(time))
        }
        Strategy::SquareOdd => {
            let side = rows as u64;
            let space = pow(chi, side + 1) + pow(chi, side);
            let time = (chi + 1u32) * pow(chi, (3 * side - 1) / 2);
            CostReport::new(strategy.name(), space, Some(time))
        }
    };
    Ok(report)
}

/// Cost of `strategy` for a random circuit of depth `d`, where the bond
/// dimension is `2^ceil(d/8)`.
pub fn estimate_cost(
    rows: usize,
    cols: usize,
    depth: usize,
    strategy: Strategy,
) -> Result<CostReport> {
    let chi = BigUint::from(1u32) << chi_exponent(depth);
    estimate_cost_for_chi(rows, cols, &chi, strategy)
}

/// Space estimate for the 72-qubit Bristlecone layout: two tensors of at
/// most eleven legs, `2^(ceil(d/8) * 11 + 1)` elements.
pub fn estimate_bristlecone(depth: usize) -> CostReport {
    let exp = chi_exponent(depth) * BRISTLECONE_MAX_RANK + 1;
    CostReport::new("bristlecone", BigUint::from(1u32) << exp, None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPlan {
    pub strategy: Strategy,
    /// Sweep direction; only meaningful for the generic strategy.
    pub orientation: Orientation,
    pub cost: CostReport,
}

impl ContractionPlan {
    pub fn predicted_space(&self) -> &BigUint {
        &self.cost.space_elements
    }

    pub fn predicted_time(&self) -> Option<&BigUint> {
        self.cost.time_ops.as_ref()
    }
}

pub fn applicable_strategies(rows: usize, cols: usize) -> Vec<Strategy> {
    [
        Strategy::SquareEven,
        Strategy::SquareOdd,
        Strategy::GenericRows,
    ]
    .into_iter()
    .filter(|s| s.is_applicable(rows, cols))
    .collect()
}

/// Plans a contraction for bond dimension `chi`: the applicable strategy
/// with the smallest time among those fitting `budget_bytes`, square
/// strategies winning ties. When none fits, the error carries the report
/// with the smallest space requirement.
pub fn plan_for_chi(
    rows: usize,
    cols: usize,
    chi: &BigUint,
    budget_bytes: u64,
) -> Result<ContractionPlan> {
    if budget_bytes == 0 {
        return Err(Error::invalid("memory budget must be positive"));
    }
    let mut best: Option<ContractionPlan> = None;
    let mut smallest: Option<CostReport> = None;
    // square strategies come first, so a strict comparison keeps them on ties
    for strategy in applicable_strategies(rows, cols) {
        let cost = estimate_cost_for_chi(rows, cols, chi, strategy)?;
        if smallest
            .as_ref()
            .is_none_or(|s| cost.space_elements < s.space_elements)
        {
            smallest = Some(cost.clone());
        }
        if cost.space_bytes > BigUint::from(budget_bytes) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => cost.time_ops < b.cost.time_ops,
        };
        if better {
            best = Some(ContractionPlan {
                strategy,
                orientation: Orientation::for_shape(rows, cols),
                cost,
            });
        }
    }
    best.ok_or_else(|| Error::BudgetExceeded {
        report: Box::new(smallest.expect("generic strategy always applies")),
        budget_bytes,
    })
}

pub fn plan_contraction(
    rows: usize,
    cols: usize,
    depth: usize,
    budget_bytes: u64,
) -> Result<ContractionPlan> {
    let chi = BigUint::from(1u32) << chi_exponent(depth);
    plan_for_chi(rows, cols, &chi, budget_bytes)
}

/// Shared memory accounting with atomic reserve/release.
#[derive(Debug)]
pub struct MemoryBudget {
    limit: u64,
    reserved: AtomicU64,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget::new(DEFAULT_BUDGET_BYTES)
    }
}

impl MemoryBudget {
    pub fn new(limit_bytes: u64) -> Self {
        MemoryBudget {
            limit: limit_bytes,
            reserved: AtomicU64::new(0),
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn reserved(&self) -> u64 {
        self.reserved.load(Ordering::Acquire)
    }

    /// Reserves `report.space_bytes` or refuses with the report attached.
    pub fn reserve(&self, report: &CostReport) -> Result<Reservation<'_>> {
        let refuse = || Error::BudgetExceeded {
            report: Box::new(report.clone()),
            budget_bytes: self.limit,
        };
        let bytes = report.space_bytes.to_u64().ok_or_else(refuse)?;
        let mut current = self.reserved.load(Ordering::Acquire);
        loop {
            let next = current
                .checked_add(bytes)
                .filter(|&n| n <= self.limit)
                .ok_or_else(refuse)?;
            match self.reserved.compare_exchange_weak(
                current,
                next,
                Ordering::AcqRel,
                Ordering::Acquire,
            ) {
                Ok(_) => {
                    return Ok(Reservation {
                        budget: self,
                        bytes,
                    })
                }
                Err(seen) => current = seen,
            }
        }
    }
}

/// Released on drop.
#[derive(Debug)]
pub struct Reservation<'a> {
    budget: &'a MemoryBudget,
    bytes: u64,
}

impl Drop for Reservation<'_> {
    fn drop(&mut self) {
        self.budget.reserved.fetch_sub(self.bytes, Ordering::AcqRel);
    }
}

impl Reservation<'_> {
    pub fn bytes(&self) -> u64 {
        self.bytes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn pow2(e: u32) -> BigUint {
        BigUint::from(1u32) << e
    }

    #[test]
    fn quoted_memory_figures() {
        let r = estimate_cost(8, 8, 40, Strategy::SquareEven).unwrap();
        assert_eq!(r.space_elements, pow2(41));
        assert_eq!(r.space_bytes, pow2(45));
        assert_eq!(r.human_space(), "32 TiB");

        let r = estimate_cost(9, 9, 40, Strategy::SquareOdd).unwrap();
        assert_eq!(r.space_elements, pow2(50) + pow2(45));

        let r = estimate_cost(12, 12, 32, Strategy::SquareEven).unwrap();
        assert_eq!(r.space_elements, pow2(49));
        assert_eq!(r.human_space(), "8 PiB");

        let r = estimate_cost(8, 9, 40, Strategy::GenericRows).unwrap();
        assert_eq!(r.space_elements, pow2(45));
        assert_eq!(r.human_space(), "512 TiB");

        let r = estimate_bristlecone(32);
        assert_eq!(r.space_elements, pow2(45));
        assert!(r.time_ops.is_none());
    }

    #[test]
    fn time_formulas() {
        // (L_h - 2)(L_v - 2) 2^(c (L + 3)) with c = 1, L = 4
        let r = estimate_cost(4, 5, 8, Strategy::GenericRows).unwrap();
        assert_eq!(r.time_ops.unwrap(), BigUint::from(6u32) * pow2(7));
        let r = estimate_cost(4, 4, 8, Strategy::SquareEven).unwrap();
        assert_eq!(r.time_ops.unwrap(), pow2(7));
        assert_eq!(r.space_elements, pow2(5));
        let r = estimate_cost(5, 5, 8, Strategy::SquareOdd).unwrap();
        assert_eq!(r.time_ops.unwrap(), BigUint::from(3u32) * pow2(7));
        assert_eq!(r.space_elements, pow2(6) + pow2(5));
        let r = estimate_cost(2, 7, 8, Strategy::GenericRows).unwrap();
        assert!(r.time_ops.as_ref().unwrap().is_zero());
    }

    #[test]
    fn inapplicable_strategies() {
        assert!(estimate_cost(4, 5, 8, Strategy::SquareEven).is_err());
        assert!(estimate_cost(5, 5, 8, Strategy::SquareEven).is_err());
        assert!(estimate_cost(4, 4, 8, Strategy::SquareOdd).is_err());
        assert!(estimate_cost(1, 1, 8, Strategy::SquareOdd).is_err());
    }

    #[test]
    fn planning() {
        let p = plan_contraction(4, 7, 8, u64::MAX).unwrap();
        assert_eq!(p.strategy, Strategy::GenericRows);
        assert_eq!(p.orientation, Orientation::Columns);
        assert_eq!(p.cost.space_elements, pow2(5));

        let p = plan_contraction(5, 5, 8, u64::MAX).unwrap();
        assert_eq!(p.strategy, Strategy::SquareOdd);

        match plan_contraction(8, 8, 40, GIB) {
            Err(Error::BudgetExceeded { report, .. }) => {
                assert_eq!(report.space_elements, pow2(41));
                assert_eq!(report.human_space(), "32 TiB");
            }
            other => panic!("expected refusal, got {other:?}"),
        }

        // At c = 5 the (2^c + 1) prefactor makes the odd partition slower
        // than the sweep; with room for either, the sweep is chosen.
        let p = plan_contraction(7, 7, 40, 32 * TIB).unwrap();
        assert_eq!(p.strategy, Strategy::GenericRows);
        assert!(plan_contraction(7, 7, 40, TIB).is_err());
        assert!(plan_contraction(7, 7, 40, 0).is_err());
    }

    #[test]
    fn even_square_beats_sweep_at_unit_bond() {
        let one = BigUint::from(1u32);
        // generic: 2 * 2 * 1 ops, square-even: 2 * 1
        let p = plan_for_chi(4, 4, &one, u64::MAX).unwrap();
        assert_eq!(p.strategy, Strategy::SquareEven);
    }

    #[test]
    fn budget_reservations() {
        let b = MemoryBudget::new(100 * 16);
        let r50 = CostReport::new("t", BigUint::from(50u32), None);
        let first = b.reserve(&r50).unwrap();
        let second = b.reserve(&r50).unwrap();
        assert_eq!(b.reserved(), 1600);
        assert!(matches!(b.reserve(&r50), Err(Error::BudgetExceeded { .. })));
        drop(first);
        drop(second);
        assert_eq!(b.reserved(), 0);
    }

    #[test]
    fn byte_sizes() {
        assert_eq!(parse_byte_size("8GiB").unwrap(), 8 * GIB);
        assert_eq!(parse_byte_size("8G").unwrap(), 8 * GIB);
        assert_eq!(parse_byte_size("1.5 TiB").unwrap(), 3 * TIB / 2);
        assert_eq!(parse_byte_size("4096").unwrap(), 4096);
        assert!(parse_byte_size("lots").is_err());
        assert!(parse_byte_size("0").is_err());
    }
}
