//! Penalty-strength thresholds.
//!
//! Each threshold is a max/min reduction over the enumerated landscape:
//!
//! * `gamma_star`: above it the cheapest valid solution is the global
//!   minimum of `f`.
//! * `gamma_prime` (one-hot): above it no invalid solution is a strict local
//!   minimum. For domain-wall only a partial value exists, since registers
//!   of class C or D cannot shed a wall by a single flip.
//! * `gamma_double_prime`: below it no valid solution is a strict local
//!   minimum (one-hot), or the domain-wall analogue restricted to valid
//!   solutions without a cheaper valid neighbour.
//! * `gamma_triple_prime` (one-hot): above it every valid solution is a
//!   strict local minimum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::encode::{encode, EncodingKind, QuboPair};
use crate::error::{Error, Result};
use crate::landscape::{Landscape, DEFAULT_CAP};
use crate::model::DqmInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct Witnessed {
    pub value: f64,
    pub witness: u64,
}

fn require_kind(land: &Landscape<'_>, kind: EncodingKind) -> Result<()> {
    match land.qubo().kind() {
        Some(k) if k == kind => Ok(()),
        Some(k) => Err(Error::Unsupported(format!("expected a {kind} QUBO, got {k}"))),
        None => Err(Error::Unsupported(format!("expected a {kind} QUBO, got a bare QUBO"))),
    }
}

/// Lowest valid cost and the first solution attaining it.
pub fn min_valid_cost(land: &Landscape<'_>) -> Result<Witnessed> {
    let mut best: Option<Witnessed> = None;
    for idx in land.valid_indices() {
        let c = land.cost(idx);
        if best.as_ref().is_none_or(|b| c < b.value) {
            best = Some(Witnessed { value: c, witness: idx });
        }
    }
    best.ok_or_else(|| Error::Degenerate("no valid solutions".into()))
}

/// `max over invalid x' of (c(x*) - c(x')) / p(x')`.
pub fn gamma_star(land: &Landscape<'_>) -> Result<Witnessed> {
    let c_star = min_valid_cost(land)?.value;
    let mut best: Option<Witnessed> = None;
    for idx in land.invalid_indices() {
        let ratio = (c_star - land.cost(idx)) / land.penalty(idx);
        if best.as_ref().is_none_or(|b| ratio > b.value) {
            best = Some(Witnessed {
                value: ratio,
                witness: idx,
            });
        }
    }
    best.ok_or_else(|| Error::Degenerate("no invalid solutions".into()))
}

/// One-hot escape threshold: the largest, over invalid solutions, of the
/// smallest gamma at which some penalty-lowering flip lowers `f`.
pub fn gamma_prime_oh(land: &Landscape<'_>) -> Result<Witnessed> {
    require_kind(land, EncodingKind::OneHot)?;
    let mut best: Option<Witnessed> = None;
    for a in land.invalid_indices() {
        let (c_a, p_a) = (land.cost(a), land.penalty(a));
        let inner = land
            .neighbours(a)
            .filter(|&b| p_a - land.penalty(b) > 0.0)
            .map(|b| (land.cost(b) - c_a) / (p_a - land.penalty(b)))
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
        let Some(inner) = inner else {
            return Err(Error::Degenerate(format!(
                "invalid solution {} has no penalty-lowering flip",
                BitString::from_index(a, land.n())
            )));
        };
        if best.as_ref().is_none_or(|b| inner > b.value) {
            best = Some(Witnessed { value: inner, witness: a });
        }
    }
    best.ok_or_else(|| Error::Degenerate("no invalid solutions".into()))
}

fn valid_escape_gaps<'a>(land: &'a Landscape<'a>) -> impl Iterator<Item = (u64, f64)> + 'a {
    land.valid_indices().map(move |a| {
        let c_a = land.cost(a);
        let gap = land
            .neighbours(a)
            .map(|b| c_a - land.cost(b))
            .fold(f64::NEG_INFINITY, f64::max);
        (a, gap)
    })
}

/// `min over valid x_a of max over neighbours x_b of (c(x_a) - c(x_b))`.
pub fn gamma_double_prime_oh(land: &Landscape<'_>) -> Result<Witnessed> {
    require_kind(land, EncodingKind::OneHot)?;
    let mut best: Option<Witnessed> = None;
    for (a, gap) in valid_escape_gaps(land) {
        if best.as_ref().is_none_or(|b| gap < b.value) {
            best = Some(Witnessed { value: gap, witness: a });
        }
    }
    best.ok_or_else(|| Error::Degenerate("no valid solutions".into()))
}

/// `max over valid x_a of max over neighbours x_b of (c(x_a) - c(x_b))`.
pub fn gamma_triple_prime_oh(land: &Landscape<'_>) -> Result<Witnessed> {
    require_kind(land, EncodingKind::OneHot)?;
    let mut best: Option<Witnessed> = None;
    for (a, gap) in valid_escape_gaps(land) {
        if best.as_ref().is_none_or(|b| gap > b.value) {
            best = Some(Witnessed { value: gap, witness: a });
        }
    }
    best.ok_or_else(|| Error::Degenerate("no valid solutions".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainWallPrime {
    /// `None` when no invalid solution can shed a wall by a single flip.
    pub value: Option<Witnessed>,
    pub unremovable_exists: bool,
    /// First invalid solution with no wall-removing flip.
    pub unremovable_witness: Option<u64>,
}

/// Escape threshold over invalid solutions that can lose a wall by a single
/// flip. A wall-removing flip (`dp = -1`) lowers `f` once
/// `gamma > c(x_b) - c(x_a)`.
pub fn gamma_prime_dw_partial(land: &Landscape<'_>) -> Result<DomainWallPrime> {
    require_kind(land, EncodingKind::DomainWall)?;
    let mut best: Option<Witnessed> = None;
    let mut unremovable_witness = None;
    for a in land.invalid_indices() {
        let (c_a, p_a) = (land.cost(a), land.penalty(a));
        let inner = land
            .neighbours(a)
            .filter(|&b| land.penalty(b) - p_a == -1.0)
            .map(|b| land.cost(b) - c_a)
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
        match inner {
            Some(inner) => {
                if best.as_ref().is_none_or(|b| inner > b.value) {
                    best = Some(Witnessed { value: inner, witness: a });
                }
            }
            None => {
                unremovable_witness.get_or_insert(a);
            }
        }
    }
    Ok(DomainWallPrime {
        value: best,
        unremovable_exists: unremovable_witness.is_some(),
        unremovable_witness,
    })
}

/// Domain-wall `gamma_double_prime`: minimum, over valid solutions with no
/// strictly cheaper valid neighbour, of the largest cost gap to an invalid
/// neighbour. Equal-cost valid neighbours keep a solution in the set.
pub fn gamma_double_prime_dw(land: &Landscape<'_>) -> Result<Witnessed> {
    require_kind(land, EncodingKind::DomainWall)?;
    let mut valid_costs = land.valid_indices().map(|i| land.cost(i));
    let Some(first) = valid_costs.next() else {
        return Err(Error::Degenerate("no valid solutions".into()));
    };
    if valid_costs.all(|c| c == first) {
        return Err(Error::Degenerate(
            "every valid solution has the same cost (trivial model)".into(),
        ));
    }
    let mut best: Option<Witnessed> = None;
    for a in land.valid_indices() {
        let c_a = land.cost(a);
        let has_cheaper_valid = land
            .neighbours(a)
            .any(|b| land.is_valid(b) && land.cost(b) < c_a);
        if has_cheaper_valid {
            continue;
        }
        let gap = land
            .neighbours(a)
            .filter(|&b| !land.is_valid(b))
            .map(|b| c_a - land.cost(b))
            .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))));
        if let Some(gap) = gap {
            if best.as_ref().is_none_or(|b| gap < b.value) {
                best = Some(Witnessed { value: gap, witness: a });
            }
        }
    }
    best.ok_or_else(|| {
        Error::Degenerate("no valid solution without a cheaper valid neighbour has an invalid neighbour".into())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub encoding: EncodingKind,
    pub gamma_star: f64,
    pub gamma_prime: Option<f64>,
    pub gamma_double_prime: f64,
    pub gamma_triple_prime: Option<f64>,
    pub dw_unremovable_flag: bool,
    pub witnesses: BTreeMap<String, BitString>,
}

impl ThresholdReport {
    pub fn compute(land: &Landscape<'_>) -> Result<Self> {
        let kind = land
            .qubo()
            .kind()
            .ok_or_else(|| Error::Unsupported("thresholds need an encoding descriptor".into()))?;
        let n = land.n();
        let bits = |idx: u64| BitString::from_index(idx, n);
        let mut witnesses = BTreeMap::new();

        let x_star = min_valid_cost(land)?;
        let star = gamma_star(land)?;
        witnesses.insert("x_star".to_string(), bits(x_star.witness));
        witnesses.insert("gamma_star".to_string(), bits(star.witness));

        let report = match kind {
            EncodingKind::OneHot => {
                let prime = gamma_prime_oh(land)?;
                let dprime = gamma_double_prime_oh(land)?;
                let tprime = gamma_triple_prime_oh(land)?;
                witnesses.insert("gamma_prime".to_string(), bits(prime.witness));
                witnesses.insert("gamma_double_prime".to_string(), bits(dprime.witness));
                witnesses.insert("gamma_triple_prime".to_string(), bits(tprime.witness));
                ThresholdReport {
                    encoding: kind,
                    gamma_star: star.value,
                    gamma_prime: Some(prime.value),
                    gamma_double_prime: dprime.value,
                    gamma_triple_prime: Some(tprime.value),
                    dw_unremovable_flag: false,
                    witnesses,
                }
            }
            EncodingKind::DomainWall => {
                let prime = gamma_prime_dw_partial(land)?;
                let dprime = gamma_double_prime_dw(land)?;
                if let Some(p) = &prime.value {
                    witnesses.insert("gamma_prime".to_string(), bits(p.witness));
                }
                if let Some(u) = prime.unremovable_witness {
                    witnesses.insert("unremovable".to_string(), bits(u));
                }
                witnesses.insert("gamma_double_prime".to_string(), bits(dprime.witness));
                ThresholdReport {
                    encoding: kind,
                    gamma_star: star.value,
                    gamma_prime: prime.value.map(|p| p.value),
                    gamma_double_prime: dprime.value,
                    gamma_triple_prime: None,
                    dw_unremovable_flag: prime.unremovable_exists,
                    witnesses,
                }
            }
            EncodingKind::KHot => {
                return Err(Error::Unsupported("thresholds are defined for one-hot and domain-wall".into()))
            }
        };
        Ok(report)
    }

    pub fn from_qubo(q: &QuboPair, cap: usize) -> Result<Self> {
        Self::compute(&Landscape::new(q, cap)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredicateReport {
    pub gamma: f64,
    pub x_star_is_global_min: bool,
    pub no_invalid_local_min: bool,
    pub all_valid_local_min: bool,
    pub no_valid_local_min: bool,
    pub valid_local_min_count: u64,
    pub invalid_local_min_count: u64,
    pub valid_count: u64,
    pub invalid_count: u64,
}

/// Checks every threshold-related statement at one gamma by enumeration,
/// using strict local minima.
pub fn verify_predicates(land: &Landscape<'_>, gamma: f64) -> PredicateReport {
    let mut valid_count = 0;
    let mut invalid_count = 0;
    let mut valid_local_min_count = 0;
    let mut invalid_local_min_count = 0;
    let mut min_valid = f64::INFINITY;
    let mut min_invalid = f64::INFINITY;
    for idx in land.indices() {
        let f = land.f(idx, gamma);
        let local = land.is_local_min(idx, gamma);
        if land.is_valid(idx) {
            valid_count += 1;
            valid_local_min_count += local as u64;
            min_valid = min_valid.min(f);
        } else {
            invalid_count += 1;
            invalid_local_min_count += local as u64;
            min_invalid = min_invalid.min(f);
        }
    }
    PredicateReport {
        gamma,
        x_star_is_global_min: valid_count > 0 && min_valid < min_invalid,
        no_invalid_local_min: invalid_local_min_count == 0,
        all_valid_local_min: valid_local_min_count == valid_count,
        no_valid_local_min: valid_local_min_count == 0,
        valid_local_min_count,
        invalid_local_min_count,
        valid_count,
        invalid_count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchPredicate {
    GammaPrimeGtStar,
    GammaDoublePrimeLtStar,
}

impl SearchPredicate {
    pub fn holds(self, report: &ThresholdReport) -> bool {
        match self {
            SearchPredicate::GammaPrimeGtStar => report.gamma_prime.is_some_and(|p| p > report.gamma_star),
            SearchPredicate::GammaDoublePrimeLtStar => report.gamma_double_prime < report.gamma_star,
        }
    }
}

impl FromStr for SearchPredicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma_prime_gt_star" => Ok(SearchPredicate::GammaPrimeGtStar),
            "gamma_double_prime_lt_star" => Ok(SearchPredicate::GammaDoublePrimeLtStar),
            other => Err(Error::UnknownPredicate(other.to_string())),
        }
    }
}

impl fmt::Display for SearchPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchPredicate::GammaPrimeGtStar => "gamma_prime_gt_star",
            SearchPredicate::GammaDoublePrimeLtStar => "gamma_double_prime_lt_star",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchHit {
    pub dqm: DqmInstance,
    pub report: ThresholdReport,
    /// 1-based index of the successful draw.
    pub draws: u64,
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub kind: EncodingKind,
    pub k: usize,
    pub l: usize,
    pub coeff_lo: i64,
    pub coeff_hi: i64,
    pub predicate: SearchPredicate,
    pub seed: u64,
    pub budget: u64,
}

/// Draws random integer instances until one separates the thresholds as
/// the predicate asks. Instances whose report is degenerate are skipped.
pub fn search_counterexample(params: &SearchParams) -> Result<Option<SearchHit>> {
    if params.budget == 0 {
        return Err(Error::Dimensions("search budget must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for draw in 1..=params.budget {
        let dqm = DqmInstance::random_with(params.k, params.l, params.coeff_lo, params.coeff_hi, &mut rng)?;
        let q = encode(&dqm, params.kind, None)?;
        let report = match ThresholdReport::from_qubo(&q, DEFAULT_CAP) {
            Ok(r) => r,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        if params.predicate.holds(&report) {
            return Ok(Some(SearchHit {
                dqm,
                report,
                draws: draw,
            }));
        }
    }
    Ok(None)
}
