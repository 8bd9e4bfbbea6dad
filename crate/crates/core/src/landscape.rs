//! Exhaustive characterization of a QUBO's solution space.
//!
//! Every solution's cost and penalty are computed once; the energy of a
//! solution is then the line `c(x) + gamma * p(x)`, and Hamming-1 local
//! minimality at any `gamma` reduces to comparisons between lines.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::bits::BitString;
use crate::encode::{wall_count, EncodingDescriptor, EncodingKind, QuboPair};
use crate::error::{Error, Result};

/// Largest variable count enumerated without an explicit override.
pub const DEFAULT_CAP: usize = 24;

/// Open interval of penalty strengths. Bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaInterval {
    #[serde(serialize_with = "finite_or_null")]
    pub lower: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub upper: f64,
    pub empty: bool,
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

impl GammaInterval {
    pub const EMPTY: GammaInterval = GammaInterval {
        lower: f64::INFINITY,
        upper: f64::NEG_INFINITY,
        empty: true,
    };

    pub fn open(lower: f64, upper: f64) -> Self {
        if lower < upper {
            GammaInterval {
                lower,
                upper,
                empty: false,
            }
        } else {
            Self::EMPTY
        }
    }

    pub fn contains(&self, gamma: f64) -> bool {
        !self.empty && self.lower < gamma && gamma < self.upper
    }

    /// Intersects the constraints `(c_b - c_a) + gamma (p_b - p_a) > 0` over
    /// all neighbours `(c_b, p_b)` of `(c_a, p_a)`.
    pub fn from_neighbours(c_a: f64, p_a: f64, neighbours: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for (c_b, p_b) in neighbours {
            let dp = p_b - p_a;
            if dp > 0.0 {
                lower = lower.max((c_a - c_b) / dp);
            } else if dp < 0.0 {
                upper = upper.min((c_a - c_b) / dp);
            } else if c_b <= c_a {
                return Self::EMPTY;
            }
        }
        Self::open(lower, upper)
    }
}

impl fmt::Display for GammaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            f.write_str("()")
        } else {
            write!(f, "({}, {})", self.lower, self.upper)
        }
    }
}

/// Domain-wall register taxonomy by the set of achievable `-dp` values
/// under single flips inside the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegisterClass {
    Valid,
    /// {-1, 0, +1}
    A,
    /// {0, +1}
    B,
    /// {-1, 0}
    C,
    /// {0}
    D,
    /// {+1}
    E,
}

impl RegisterClass {
    /// Whether some flip inside the register removes a wall.
    pub fn can_lose_wall(self) -> bool {
        matches!(self, RegisterClass::A | RegisterClass::B | RegisterClass::E)
    }
}

/// `-dp` of every single flip inside a domain-wall register.
pub fn register_flip_gains(reg: &[bool]) -> BTreeSet<i64> {
    let before = wall_count(reg) as i64;
    let mut scratch = reg.to_vec();
    (0..reg.len())
        .map(|t| {
            scratch[t] = !scratch[t];
            let after = wall_count(&scratch) as i64;
            scratch[t] = !scratch[t];
            before - after
        })
        .collect()
}

pub fn classify_register(reg: &[bool], kind: EncodingKind) -> Result<RegisterClass> {
    if kind != EncodingKind::DomainWall {
        return Err(Error::Unsupported(format!("register classes are defined for domain-wall, not {kind}")));
    }
    if wall_count(reg) == 1 {
        return Ok(RegisterClass::Valid);
    }
    let gains: Vec<i64> = register_flip_gains(reg).into_iter().collect();
    Ok(match gains.as_slice() {
        [-1, 0, 1] => RegisterClass::A,
        [0, 1] => RegisterClass::B,
        [-1, 0] => RegisterClass::C,
        [0] => RegisterClass::D,
        [1] => RegisterClass::E,
        // An invalid register with no flip of gain 0 alternates 1010..10,
        // where every flip removes a wall, so no other set arises.
        other => unreachable!("register {reg:?} has impossible gain set {other:?}"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub bits: BitString,
    pub valid: bool,
    pub cost: f64,
    pub penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub register_classes: Option<Vec<RegisterClass>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_neighbor_count: Option<usize>,
    pub local_min_interval: GammaInterval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_min_at_gamma: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LandscapeStats {
    pub n: usize,
    pub valid_count: u64,
    pub invalid_count: u64,
    pub max_penalty: u64,
    pub nonzero_interaction_count: usize,
}

/// Counts implied by the encoding alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosedFormCounts {
    pub n: usize,
    pub valid_count: u64,
    pub invalid_count: u64,
    pub max_penalty: u64,
    pub max_interactions: usize,
}

pub fn closed_form_counts(d: &EncodingDescriptor) -> ClosedFormCounts {
    let (k, l) = (d.k as u64, d.l as u64);
    let valid_count = match d.kind {
        EncodingKind::KHot => binomial(l, d.khot_count.unwrap_or(1) as u64),
        _ => l.pow(k as u32),
    };
    let max_penalty = match d.kind {
        EncodingKind::OneHot => k * (l - 1) * (l - 1),
        EncodingKind::DomainWall => k * ((l - 1) / 2),
        EncodingKind::KHot => {
            let t = d.khot_count.unwrap_or(1) as u64;
            (t * t).max((l - t) * (l - t))
        }
    };
    ClosedFormCounts {
        n: d.n,
        valid_count,
        invalid_count: (1u64 << d.n) - valid_count,
        max_penalty,
        max_interactions: d.n * d.n.saturating_sub(1) / 2,
    }
}

fn binomial(n: u64, r: u64) -> u64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLine {
    pub bits: BitString,
    pub intercept: f64,
    pub slope: f64,
    pub valid: bool,
}

/// Cost, penalty, and validity of every bitstring of a QUBO.
pub struct Landscape<'q> {
    q: &'q QuboPair,
    cost: Vec<f64>,
    penalty: Vec<f64>,
    valid: Vec<bool>,
}

impl<'q> Landscape<'q> {
    pub fn new(q: &'q QuboPair, cap: usize) -> Result<Self> {
        let n = q.n();
        if n > cap || n >= 64 {
            return Err(Error::CapExceeded { n, cap });
        }
        let states: Vec<(f64, f64, bool)> = (0..1u64 << n)
            .into_par_iter()
            .map(|idx| {
                let c = q.cost().evaluate_index(idx);
                let p = q.penalty().evaluate_index(idx);
                let valid = match q.descriptor() {
                    Some(d) => index_is_valid(d, idx),
                    None => p == 0.0,
                };
                (c, p, valid)
            })
            .collect();
        let mut cost = Vec::with_capacity(states.len());
        let mut penalty = Vec::with_capacity(states.len());
        let mut valid = Vec::with_capacity(states.len());
        for (c, p, v) in states {
            cost.push(c);
            penalty.push(p);
            valid.push(v);
        }
        Ok(Landscape {
            q,
            cost,
            penalty,
            valid,
        })
    }

    pub fn qubo(&self) -> &QuboPair {
        self.q
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    pub fn cost(&self, idx: u64) -> f64 {
        self.cost[idx as usize]
    }

    pub fn penalty(&self, idx: u64) -> f64 {
        self.penalty[idx as usize]
    }

    pub fn is_valid(&self, idx: u64) -> bool {
        self.valid[idx as usize]
    }

    pub fn f(&self, idx: u64, gamma: f64) -> f64 {
        self.cost(idx) + gamma * self.penalty(idx)
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        0..self.len() as u64
    }

    pub fn valid_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.indices().filter(|&i| self.is_valid(i))
    }

    pub fn invalid_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.indices().filter(|&i| !self.is_valid(i))
    }

    pub fn neighbours(&self, idx: u64) -> impl Iterator<Item = u64> {
        (0..self.n()).map(move |u| idx ^ (1 << u))
    }

    pub fn is_local_min(&self, idx: u64, gamma: f64) -> bool {
        let f = self.f(idx, gamma);
        self.neighbours(idx).all(|b| self.f(b, gamma) > f)
    }

    pub fn local_min_interval(&self, idx: u64) -> GammaInterval {
        GammaInterval::from_neighbours(
            self.cost(idx),
            self.penalty(idx),
            self.neighbours(idx).map(|b| (self.cost(b), self.penalty(b))),
        )
    }

    pub fn valid_neighbor_count(&self, idx: u64) -> usize {
        self.neighbours(idx).filter(|&b| self.is_valid(b)).count()
    }

    pub fn register_classes(&self, idx: u64) -> Option<Vec<RegisterClass>> {
        let d = self.q.descriptor()?;
        if d.kind != EncodingKind::DomainWall {
            return None;
        }
        let bits = BitString::from_index(idx, self.n());
        let len = d.register_len();
        Some(
            (0..d.k)
                .map(|i| classify_register(&bits[i * len..(i + 1) * len], d.kind).expect("domain-wall"))
                .collect(),
        )
    }

    pub fn record(&self, idx: u64, gamma: Option<f64>) -> SolutionRecord {
        let valid = self.is_valid(idx);
        let dw = self.q.kind() == Some(EncodingKind::DomainWall);
        SolutionRecord {
            bits: BitString::from_index(idx, self.n()),
            valid,
            cost: self.cost(idx),
            penalty: self.penalty(idx),
            register_classes: self.register_classes(idx),
            valid_neighbor_count: (dw && valid).then(|| self.valid_neighbor_count(idx)),
            local_min_interval: self.local_min_interval(idx),
            local_min_at_gamma: gamma.map(|g| self.is_local_min(idx, g)),
        }
    }

    pub fn records(&self, gamma: Option<f64>) -> Vec<SolutionRecord> {
        (0..self.len() as u64)
            .into_par_iter()
            .map(|idx| self.record(idx, gamma))
            .collect()
    }

    pub fn stats(&self) -> LandscapeStats {
        let valid_count = self.valid.iter().filter(|&&v| v).count() as u64;
        let max_penalty = self.penalty.iter().fold(0.0f64, |m, &p| m.max(p));
        LandscapeStats {
            n: self.n(),
            valid_count,
            invalid_count: self.len() as u64 - valid_count,
            max_penalty: max_penalty as u64,
            nonzero_interaction_count: self.q.interaction_count(),
        }
    }

    pub fn energy_lines(&self) -> Vec<EnergyLine> {
        self.indices()
            .map(|idx| EnergyLine {
                bits: BitString::from_index(idx, self.n()),
                intercept: self.cost(idx),
                slope: self.penalty(idx),
                valid: self.is_valid(idx),
            })
            .collect()
    }
}

/// Validity of the bitstring with variable `u` at bit `u` of `idx`.
fn index_is_valid(d: &EncodingDescriptor, idx: u64) -> bool {
    let len = d.register_len();
    let mask = (1u64 << len) - 1;
    (0..d.k).all(|i| {
        let reg = (idx >> d.register_offset(i)) & mask;
        match d.kind {
            EncodingKind::OneHot => reg.count_ones() == 1,
            EncodingKind::KHot => Some(reg.count_ones() as usize) == d.khot_count,
            EncodingKind::DomainWall => {
                // bordered [1, reg.., 0]: bit 0 is the leading 1
                let ext = 1 | (reg << 1);
                let walls = ext & !(ext >> 1) & ((1u64 << (len + 1)) - 1);
                walls.count_ones() == 1
            }
        }
    })
}

pub fn enumerate(q: &QuboPair, cap: usize) -> Result<Vec<SolutionRecord>> {
    Ok(Landscape::new(q, cap)?.records(None))
}

fn check_len(q: &QuboPair, bits: &[bool]) -> Result<()> {
    if bits.len() != q.n() {
        return Err(Error::LengthMismatch {
            expected: q.n(),
            actual: bits.len(),
        });
    }
    Ok(())
}

/// `(c, p)` of every Hamming-1 neighbour, by direct evaluation.
fn neighbour_energies(q: &QuboPair, bits: &[bool]) -> Vec<(f64, f64)> {
    let mut scratch = bits.to_vec();
    (0..bits.len())
        .map(|u| {
            scratch[u] = !scratch[u];
            let e = (q.cost().evaluate(&scratch), q.penalty().evaluate(&scratch));
            scratch[u] = !scratch[u];
            e
        })
        .collect()
}

pub fn is_local_min(q: &QuboPair, bits: &[bool], gamma: f64) -> Result<bool> {
    let f = q.evaluate(bits, gamma)?;
    Ok(neighbour_energies(q, bits)
        .into_iter()
        .all(|(c, p)| c + gamma * p > f))
}

pub fn local_min_interval(q: &QuboPair, bits: &[bool]) -> Result<GammaInterval> {
    let c = q.cost_of(bits)?;
    let p = q.penalty_of(bits)?;
    Ok(GammaInterval::from_neighbours(c, p, neighbour_energies(q, bits)))
}

/// `p(flip_u(x)) - p(x)`.
pub fn penalty_delta(q: &QuboPair, bits: &[bool], flip_index: usize) -> Result<f64> {
    check_len(q, bits)?;
    if flip_index >= q.n() {
        return Err(Error::IndexOutOfRange {
            index: flip_index,
            len: q.n(),
        });
    }
    let mut flipped = bits.to_vec();
    flipped[flip_index] = !flipped[flip_index];
    Ok(q.penalty().evaluate(&flipped) - q.penalty().evaluate(bits))
}

/// Number of valid Hamming-1 neighbours of a valid solution.
pub fn valid_neighbor_count(q: &QuboPair, bits: &[bool]) -> Result<usize> {
    check_len(q, bits)?;
    if q.descriptor().is_none() {
        return Err(Error::Unsupported("QUBO has no encoding descriptor".into()));
    }
    if !q.is_valid(bits) {
        return Err(Error::InvalidSolution(BitString::from(bits.to_vec()).to_string()));
    }
    let mut scratch = bits.to_vec();
    Ok((0..bits.len())
        .filter(|&u| {
            scratch[u] = !scratch[u];
            let v = q.is_valid(&scratch);
            scratch[u] = !scratch[u];
            v
        })
        .count())
}

pub fn landscape_stats(q: &QuboPair, cap: usize) -> Result<LandscapeStats> {
    Ok(Landscape::new(q, cap)?.stats())
}

pub fn energy_lines(q: &QuboPair, cap: usize) -> Result<Vec<EnergyLine>> {
    Ok(Landscape::new(q, cap)?.energy_lines())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{encode_domain_wall, encode_one_hot, QuadraticForm};
    use crate::model::{DqmInstance, TermKey};

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn corollary1() -> QuboPair {
        let d = EncodingDescriptor::new(EncodingKind::OneHot, 2, 2, None).unwrap();
        let m = vec![
            vec![3., 0., 2., 4.],
            vec![0., 3., 1., 2.],
            vec![0., 0., 4., 0.],
            vec![0., 0., 0., 7.],
        ];
        QuboPair::from_cost_matrix(d, &m, 0.0).unwrap()
    }

    #[test]
    fn enumeration_sizes() {
        let oh = encode_one_hot(&DqmInstance::new(2, 2).unwrap(), None).unwrap();
        let recs = enumerate(&oh, DEFAULT_CAP).unwrap();
        assert_eq!(recs.len(), 16);
        assert_eq!(recs.iter().filter(|r| r.valid).count(), 4);
        assert_eq!(recs[1].bits.to_string(), "1000");

        let dw = encode_domain_wall(&DqmInstance::new(2, 3).unwrap(), None).unwrap();
        let recs = enumerate(&dw, DEFAULT_CAP).unwrap();
        assert_eq!(recs.len(), 16);
        assert_eq!(recs.iter().filter(|r| r.valid).count(), 9);
        assert!(recs.iter().all(|r| r.register_classes.as_ref().unwrap().len() == 2));

        let mut c = QuadraticForm::new();
        c.add(0, 0, -1.0);
        let single = QuboPair::from_parts(1, c, QuadraticForm::new(), None).unwrap();
        assert_eq!(enumerate(&single, DEFAULT_CAP).unwrap().len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let q = encode_one_hot(&DqmInstance::new(5, 5).unwrap(), None).unwrap();
        match enumerate(&q, DEFAULT_CAP) {
            Err(Error::CapExceeded { n: 25, cap: 24 }) => {}
            other => panic!("expected cap error, got {:?}", other.map(|r| r.len())),
        }
    }

    #[test]
    fn local_minimum_checks_on_published_instance() {
        let q = corollary1();
        assert!(is_local_min(&q, &bits("1000"), 5.5).unwrap());
        assert!(!is_local_min(&q, &bits("1000"), 7.0).unwrap());
        assert!(is_local_min(&q, &bits("101"), 1.0).is_err());

        let iv = local_min_interval(&q, &bits("1000")).unwrap();
        assert_eq!((iv.lower, iv.upper, iv.empty), (3.0, 6.0, false));

        let iv = local_min_interval(&q, &bits("0110")).unwrap();
        assert!(iv.lower.is_finite() && iv.upper == f64::INFINITY);
    }

    #[test]
    fn single_variable_local_minimum() {
        let mut c = QuadraticForm::new();
        c.add(0, 0, -1.0);
        let q = QuboPair::from_parts(1, c, QuadraticForm::new(), None).unwrap();
        assert!(is_local_min(&q, &bits("1"), 3.0).unwrap());
        assert!(!is_local_min(&q, &bits("0"), 3.0).unwrap());
    }

    #[test]
    fn equal_cost_valid_neighbour_gives_empty_interval() {
        // single domain-wall register whose values 0 and 1 cost the same
        let mut dqm = DqmInstance::new(1, 3).unwrap();
        dqm.set(TermKey::new(0, 0, 2, 2), 5.0).unwrap();
        let q = encode_domain_wall(&dqm, None).unwrap();
        assert!(local_min_interval(&q, &bits("00")).unwrap().empty);
        assert!(!is_local_min(&q, &bits("00"), 1.0).unwrap());
    }

    #[test]
    fn penalty_deltas() {
        let oh = encode_one_hot(&DqmInstance::new(2, 2).unwrap(), None).unwrap();
        // register 1 empty: N = 0, flip 0 -> 1
        assert_eq!(penalty_delta(&oh, &bits("1000"), 2).unwrap(), -1.0);
        // register 1 holds one bit: N = 1, flip 1 -> 0
        assert_eq!(penalty_delta(&oh, &bits("1010"), 2).unwrap(), 1.0);
        assert!(penalty_delta(&oh, &bits("1010"), 4).is_err());

        let dw = encode_domain_wall(&DqmInstance::new(1, 8).unwrap(), None).unwrap();
        let reg = bits("1010001");
        let deltas: BTreeSet<i64> = (0..7)
            .map(|u| penalty_delta(&dw, &reg, u).unwrap() as i64)
            .collect();
        assert_eq!(deltas.into_iter().collect::<Vec<_>>(), vec![-1, 0, 1]);
    }

    #[test]
    fn register_classes_of_listed_examples() {
        let dw = EncodingKind::DomainWall;
        assert_eq!(classify_register(&bits("1010001"), dw).unwrap(), RegisterClass::A);
        assert_eq!(classify_register(&bits("10110"), dw).unwrap(), RegisterClass::B);
        assert_eq!(classify_register(&bits("00110"), dw).unwrap(), RegisterClass::D);
        assert_eq!(classify_register(&bits("0011"), dw).unwrap(), RegisterClass::D);
        assert_eq!(classify_register(&bits("01"), dw).unwrap(), RegisterClass::E);
        assert_eq!(classify_register(&bits("1100"), dw).unwrap(), RegisterClass::Valid);
        assert!(classify_register(&bits("01"), EncodingKind::OneHot).is_err());
    }

    #[test]
    fn class_c_exists() {
        // a middle 1 between 0s at the end plus an isolated 0 between 1s
        let found = (0u64..1 << 8).any(|idx| {
            let b = BitString::from_index(idx, 8);
            classify_register(&b, EncodingKind::DomainWall).unwrap() == RegisterClass::C
        });
        assert!(found);
    }

    #[test]
    fn stats_match_published_counts() {
        let oh = encode_one_hot(&DqmInstance::new(2, 3).unwrap(), None).unwrap();
        assert_eq!(landscape_stats(&oh, DEFAULT_CAP).unwrap().max_penalty, 8);
        let dw = encode_domain_wall(&DqmInstance::new(2, 3).unwrap(), None).unwrap();
        assert_eq!(landscape_stats(&dw, DEFAULT_CAP).unwrap().max_penalty, 2);
        let dw = encode_domain_wall(&DqmInstance::new(3, 2).unwrap(), None).unwrap();
        let s = landscape_stats(&dw, DEFAULT_CAP).unwrap();
        assert_eq!((s.valid_count, s.invalid_count), (8, 0));
    }

    #[test]
    fn energy_lines_of_published_instance() {
        let lines = energy_lines(&corollary1(), DEFAULT_CAP).unwrap();
        assert_eq!((lines[0].slope, lines[0].intercept), (2.0, 0.0));
        assert!(lines.iter().filter(|l| l.valid).all(|l| l.slope == 0.0));
    }

    #[test]
    fn valid_neighbours() {
        let dw = encode_domain_wall(&DqmInstance::new(1, 3).unwrap(), None).unwrap();
        assert_eq!(valid_neighbor_count(&dw, &bits("00")).unwrap(), 1);
        assert_eq!(valid_neighbor_count(&dw, &bits("10")).unwrap(), 2);
        assert!(matches!(
            valid_neighbor_count(&dw, &bits("01")),
            Err(Error::InvalidSolution(_))
        ));
        let oh = corollary1();
        assert_eq!(valid_neighbor_count(&oh, &bits("0110")).unwrap(), 0);
    }

    #[test]
    fn index_validity_matches_descriptor() {
        for (kind, k, l) in [
            (EncodingKind::OneHot, 2, 3),
            (EncodingKind::DomainWall, 2, 4),
            (EncodingKind::DomainWall, 3, 3),
        ] {
            let d = EncodingDescriptor::new(kind, k, l, None).unwrap();
            for idx in 0..1u64 << d.n {
                assert_eq!(index_is_valid(&d, idx), d.is_valid(&BitString::from_index(idx, d.n)));
            }
        }
    }

    #[test]
    fn interval_display() {
        assert_eq!(GammaInterval::open(3.0, 6.0).to_string(), "(3, 6)");
        assert_eq!(GammaInterval::open(6.0, 3.0).to_string(), "()");
    }
}
