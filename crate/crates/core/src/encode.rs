//! QUBO encodings of discrete quadratic models.
//!
//! An encoded model is kept as two quadratic forms, cost and penalty, so
//! that `f(x) = c(x) + gamma * p(x)` can be evaluated for any penalty
//! strength without re-encoding.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::model::{DiscreteAssignment, DqmInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingKind {
    OneHot,
    DomainWall,
    KHot,
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingKind::OneHot => "one-hot",
            EncodingKind::DomainWall => "domain-wall",
            EncodingKind::KHot => "k-hot",
        })
    }
}

impl std::str::FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-hot" => Ok(EncodingKind::OneHot),
            "domain-wall" => Ok(EncodingKind::DomainWall),
            "k-hot" => Ok(EncodingKind::KHot),
            other => Err(Error::Unsupported(other.to_string())),
        }
    }
}

/// Layout of the binary variables produced by an encoding.
///
/// Register `i` occupies the contiguous block starting at `i * register_len()`.
/// `perms[i][alpha]` is the slot (one-hot) or wall position (domain-wall)
/// that denotes value `alpha` of register `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingDescriptor {
    pub kind: EncodingKind,
    pub k: usize,
    pub l: usize,
    pub perms: Vec<Vec<usize>>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub khot_count: Option<usize>,
}

impl EncodingDescriptor {
    pub fn new(kind: EncodingKind, k: usize, l: usize, perms: Option<Vec<Vec<usize>>>) -> Result<Self> {
        if kind == EncodingKind::KHot {
            return Err(Error::Unsupported(
                "k-hot descriptors are built with EncodingDescriptor::k_hot".into(),
            ));
        }
        if k == 0 || l < 2 {
            return Err(Error::Dimensions(format!("need k >= 1 and l >= 2, got k={k}, l={l}")));
        }
        let perms = perms.unwrap_or_else(|| vec![(0..l).collect(); k]);
        check_perms(&perms, k, l)?;
        let n = match kind {
            EncodingKind::OneHot => k * l,
            _ => k * (l - 1),
        };
        Ok(EncodingDescriptor {
            kind,
            k,
            l,
            perms,
            n,
            khot_count: None,
        })
    }

    /// A single register of `l` variables with exactly `count` ones valid.
    pub fn k_hot(l: usize, count: usize) -> Result<Self> {
        if count == 0 || count > l {
            return Err(Error::Dimensions(format!(
                "k-hot count must lie in [1, {l}], got {count}"
            )));
        }
        Ok(EncodingDescriptor {
            kind: EncodingKind::KHot,
            k: 1,
            l,
            perms: vec![(0..l).collect()],
            n: l,
            khot_count: Some(count),
        })
    }

    pub fn register_len(&self) -> usize {
        match self.kind {
            EncodingKind::DomainWall => self.l - 1,
            _ => self.l,
        }
    }

    pub fn register_offset(&self, i: usize) -> usize {
        i * self.register_len()
    }

    /// Register that owns global variable `u`.
    pub fn register_of(&self, u: usize) -> usize {
        u / self.register_len()
    }

    /// Bitstring representing a valid assignment.
    pub fn encode_assignment(&self, a: &DiscreteAssignment) -> Result<BitString> {
        if self.kind == EncodingKind::KHot {
            return Err(Error::Unsupported("k-hot registers do not encode assignments".into()));
        }
        a.check(self.k, self.l)?;
        let mut bits = BitString::zeros(self.n);
        for (i, &value) in a.values.iter().enumerate() {
            let pos = self.perms[i][value];
            let base = self.register_offset(i);
            match self.kind {
                EncodingKind::OneHot => bits.set(base + pos, true),
                // wall between slots pos-1 and pos: ones before, zeros after
                _ => (0..pos).for_each(|t| bits.set(base + t, true)),
            }
        }
        Ok(bits)
    }

    /// Decodes a bitstring, reporting every register that breaks its
    /// encoding's validity rule.
    pub fn decode(&self, bits: &[bool]) -> Result<DecodeResult> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: bits.len(),
            });
        }
        let len = self.register_len();
        let mut values = Vec::with_capacity(self.k);
        let mut violations = Vec::new();
        for i in 0..self.k {
            let reg = &bits[i * len..(i + 1) * len];
            match self.kind {
                EncodingKind::OneHot => {
                    let ones = reg.iter().filter(|&&b| b).count();
                    if ones == 1 {
                        let slot = reg.iter().position(|&b| b).unwrap();
                        values.push(inverse(&self.perms[i], slot));
                    } else {
                        violations.push(RegisterViolation {
                            register: i,
                            count: ones,
                            description: format!("{ones} bits set, expected exactly 1"),
                        });
                    }
                }
                EncodingKind::DomainWall => {
                    let walls = wall_count(reg);
                    if walls == 1 {
                        let pos = reg.iter().take_while(|&&b| b).count();
                        values.push(inverse(&self.perms[i], pos));
                    } else {
                        violations.push(RegisterViolation {
                            register: i,
                            count: walls,
                            description: format!("{walls} domain walls, expected exactly 1"),
                        });
                    }
                }
                EncodingKind::KHot => {
                    let want = self.khot_count.unwrap_or(1);
                    let ones = reg.iter().filter(|&&b| b).count();
                    if ones == want {
                        values.extend(reg.iter().enumerate().filter(|(_, &b)| b).map(|(t, _)| t));
                    } else {
                        violations.push(RegisterViolation {
                            register: i,
                            count: ones,
                            description: format!("{ones} bits set, expected exactly {want}"),
                        });
                    }
                }
            }
        }
        Ok(if violations.is_empty() {
            DecodeResult::Valid(DiscreteAssignment::new(values))
        } else {
            DecodeResult::Invalid(violations)
        })
    }

    /// Validity check without building diagnostics.
    pub fn is_valid(&self, bits: &[bool]) -> bool {
        let len = self.register_len();
        (0..self.k).all(|i| {
            let reg = &bits[i * len..(i + 1) * len];
            match self.kind {
                EncodingKind::OneHot => reg.iter().filter(|&&b| b).count() == 1,
                EncodingKind::DomainWall => wall_count(reg) == 1,
                EncodingKind::KHot => {
                    Some(reg.iter().filter(|&&b| b).count()) == self.khot_count
                }
            }
        })
    }
}

fn check_perms(perms: &[Vec<usize>], k: usize, l: usize) -> Result<()> {
    if perms.len() != k {
        return Err(Error::Permutation {
            register: perms.len().min(k),
            reason: format!("expected {k} permutations, got {}", perms.len()),
        });
    }
    for (register, perm) in perms.iter().enumerate() {
        if perm.len() != l {
            return Err(Error::Permutation {
                register,
                reason: format!("expected length {l}, got {}", perm.len()),
            });
        }
        let mut seen = vec![false; l];
        for &p in perm {
            if p >= l || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Permutation {
                    register,
                    reason: format!("{perm:?} is not a bijection on 0..{l}"),
                });
            }
        }
    }
    Ok(())
}

fn inverse(perm: &[usize], pos: usize) -> usize {
    perm.iter().position(|&p| p == pos).expect("perm is a bijection")
}

/// Number of (1, 0) adjacencies in the bordered sequence `[1, reg.., 0]`.
pub fn wall_count(reg: &[bool]) -> usize {
    let mut prev = true;
    let mut walls = 0;
    for &b in reg.iter().chain(std::iter::once(&false)) {
        if prev && !b {
            walls += 1;
        }
        prev = b;
    }
    walls
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterViolation {
    pub register: usize,
    /// Ones count (one-hot, k-hot) or wall count (domain-wall).
    pub count: usize,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeResult {
    Valid(DiscreteAssignment),
    Invalid(Vec<RegisterViolation>),
}

impl DecodeResult {
    pub fn is_valid(&self) -> bool {
        matches!(self, DecodeResult::Valid(_))
    }
}

/// Upper-triangular quadratic form `sum_{u <= v} w_uv x_u x_v + offset`.
/// Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadraticForm {
    terms: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuadraticForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.terms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    /// Accumulates `w * x_u * x_v`, folding into upper-triangular order.
    pub fn add(&mut self, u: usize, v: usize, w: f64) {
        let key = if u <= v { (u, v) } else { (v, u) };
        *self.terms.entry(key).or_insert(0.0) += w;
    }

    pub fn add_offset(&mut self, w: f64) {
        self.offset += w;
    }

    /// Inserts a canonical entry; returns false if it was already present.
    pub(crate) fn insert_new(&mut self, u: usize, v: usize, w: f64) -> bool {
        debug_assert!(u <= v);
        if self.terms.contains_key(&(u, v)) {
            return false;
        }
        self.terms.insert((u, v), w);
        true
    }

    pub(crate) fn set_offset(&mut self, w: f64) {
        self.offset = w;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, w| *w != 0.0);
    }

    pub fn evaluate(&self, bits: &[bool]) -> f64 {
        self.evaluate_with(|u| bits[u])
    }

    /// Evaluation with variable `u` read from bit `u` of `index`.
    pub fn evaluate_index(&self, index: u64) -> f64 {
        self.evaluate_with(|u| (index >> u) & 1 == 1)
    }

    // Both evaluation paths share this loop so they agree bit-for-bit.
    fn evaluate_with(&self, bit: impl Fn(usize) -> bool) -> f64 {
        let mut acc = 0.0;
        for (&(u, v), &w) in &self.terms {
            if bit(u) && bit(v) {
                acc += w;
            }
        }
        acc + self.offset
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, w| m.max(w.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboPair {
    n: usize,
    cost: QuadraticForm,
    penalty: QuadraticForm,
    descriptor: Option<EncodingDescriptor>,
}

impl QuboPair {
    /// Assembles a pair from parts. Zero entries are dropped and every
    /// index must be below `n`.
    pub fn from_parts(
        n: usize,
        mut cost: QuadraticForm,
        mut penalty: QuadraticForm,
        descriptor: Option<EncodingDescriptor>,
    ) -> Result<Self> {
        if let Some(d) = &descriptor {
            if d.n != n {
                return Err(Error::LengthMismatch {
                    expected: d.n,
                    actual: n,
                });
            }
        }
        for form in [&cost, &penalty] {
            if let Some(&(_, v)) = form.terms.keys().find(|&&(_, v)| v >= n) {
                return Err(Error::IndexOutOfRange { index: v, len: n });
            }
        }
        cost.prune();
        penalty.prune();
        Ok(QuboPair {
            n,
            cost,
            penalty,
            descriptor,
        })
    }

    /// A pair whose cost is the upper triangle of `matrix` (lower-triangle
    /// entries are folded in) plus `offset`, and whose penalty is the
    /// standard penalty for `descriptor`.
    pub fn from_cost_matrix(descriptor: EncodingDescriptor, matrix: &[Vec<f64>], offset: f64) -> Result<Self> {
        let n = descriptor.n;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Dimensions(format!("cost matrix must be {n}x{n}")));
        }
        let mut cost = QuadraticForm::new();
        for (u, row) in matrix.iter().enumerate() {
            for (v, &w) in row.iter().enumerate() {
                cost.add(u, v, w);
            }
        }
        cost.add_offset(offset);
        let penalty = penalty_form(&descriptor);
        QuboPair::from_parts(n, cost, penalty, Some(descriptor))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost(&self) -> &QuadraticForm {
        &self.cost
    }

    pub fn penalty(&self) -> &QuadraticForm {
        &self.penalty
    }

    pub fn descriptor(&self) -> Option<&EncodingDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn kind(&self) -> Option<EncodingKind> {
        self.descriptor.as_ref().map(|d| d.kind)
    }

    fn check_len(&self, bits: &[bool]) -> Result<()> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: bits.len(),
            });
        }
        Ok(())
    }

    pub fn cost_of(&self, bits: &[bool]) -> Result<f64> {
        self.check_len(bits)?;
        Ok(self.cost.evaluate(bits))
    }

    pub fn penalty_of(&self, bits: &[bool]) -> Result<f64> {
        self.check_len(bits)?;
        Ok(self.penalty.evaluate(bits))
    }

    /// `c(x) + gamma * p(x)`.
    pub fn evaluate(&self, bits: &[bool], gamma: f64) -> Result<f64> {
        Ok(self.cost_of(bits)? + gamma * self.penalty_of(bits)?)
    }

    /// Valid per the descriptor's register rule; without a descriptor, a
    /// zero-penalty bitstring counts as valid.
    pub fn is_valid(&self, bits: &[bool]) -> bool {
        match &self.descriptor {
            Some(d) => d.is_valid(bits),
            None => self.penalty.evaluate(bits) == 0.0,
        }
    }

    pub fn decode(&self, bits: &[bool]) -> Result<DecodeResult> {
        match &self.descriptor {
            Some(d) => d.decode(bits),
            None => Err(Error::Unsupported("QUBO has no encoding descriptor".into())),
        }
    }

    /// Off-diagonal slots that are nonzero in cost or penalty.
    pub fn interaction_count(&self) -> usize {
        let mut slots: Vec<_> = self
            .cost
            .terms
            .keys()
            .chain(self.penalty.terms.keys())
            .filter(|(u, v)| u != v)
            .collect();
        slots.sort();
        slots.dedup();
        slots.len()
    }
}

/// Penalty form determined by the descriptor alone.
pub fn penalty_form(d: &EncodingDescriptor) -> QuadraticForm {
    let mut p = QuadraticForm::new();
    let len = d.register_len();
    match d.kind {
        EncodingKind::OneHot | EncodingKind::KHot => {
            // (sum b - t)^2 = sum b (1 - 2t) + 2 sum_{pairs} b b + t^2, using b^2 = b
            let target = d.khot_count.unwrap_or(1) as f64;
            for i in 0..d.k {
                let base = d.register_offset(i);
                for a in 0..len {
                    p.add(base + a, base + a, 1.0 - 2.0 * target);
                    for b in a + 1..len {
                        p.add(base + a, base + b, 2.0);
                    }
                }
                p.add_offset(target * target);
            }
        }
        EncodingKind::DomainWall => {
            // sum_a (b_a - b_a b_{a-1}); the a = 0 term cancels against b_{-1} = 1
            for i in 0..d.k {
                let base = d.register_offset(i);
                for a in 1..len {
                    p.add(base + a, base + a, 1.0);
                    p.add(base + a - 1, base + a, -1.0);
                }
            }
        }
    }
    p.prune();
    p
}

pub fn encode_one_hot(dqm: &DqmInstance, perms: Option<Vec<Vec<usize>>>) -> Result<QuboPair> {
    let d = EncodingDescriptor::new(EncodingKind::OneHot, dqm.k(), dqm.l(), perms)?;
    let l = d.l;
    let mut cost = QuadraticForm::new();
    for (key, &c) in dqm.terms() {
        let u = key.i * l + d.perms[key.i][key.alpha];
        let v = key.j * l + d.perms[key.j][key.beta];
        cost.add(u, v, c);
    }
    let penalty = penalty_form(&d);
    QuboPair::from_parts(d.n, cost, penalty, Some(d))
}

/// `x_{i,alpha}` under domain-wall substitution: `b_{w-1} - b_w` where `w` is
/// the wall position of value alpha, with `b_{-1} = 1` and `b_{l-1} = 0`.
/// `None` stands for the constant 1.
fn wall_indicator(d: &EncodingDescriptor, i: usize, alpha: usize) -> Vec<(Option<usize>, f64)> {
    let len = d.register_len();
    let base = d.register_offset(i);
    let w = d.perms[i][alpha];
    let mut expr = Vec::with_capacity(2);
    expr.push((if w == 0 { None } else { Some(base + w - 1) }, 1.0));
    if w < len {
        expr.push((Some(base + w), -1.0));
    }
    expr
}

fn add_product(form: &mut QuadraticForm, c: f64, lhs: &[(Option<usize>, f64)], rhs: &[(Option<usize>, f64)]) {
    for &(a, ca) in lhs {
        for &(b, cb) in rhs {
            let w = c * ca * cb;
            match (a, b) {
                (None, None) => form.add_offset(w),
                (Some(u), None) | (None, Some(u)) => form.add(u, u, w),
                (Some(u), Some(v)) => form.add(u, v, w),
            }
        }
    }
}

pub fn encode_domain_wall(dqm: &DqmInstance, perms: Option<Vec<Vec<usize>>>) -> Result<QuboPair> {
    let d = EncodingDescriptor::new(EncodingKind::DomainWall, dqm.k(), dqm.l(), perms)?;
    let mut cost = QuadraticForm::new();
    for (key, &c) in dqm.terms() {
        let lhs = wall_indicator(&d, key.i, key.alpha);
        if key.i == key.j && key.alpha == key.beta {
            // linear term: a single indicator, not its square
            add_product(&mut cost, c, &lhs, &[(None, 1.0)]);
        } else {
            let rhs = wall_indicator(&d, key.j, key.beta);
            add_product(&mut cost, c, &lhs, &rhs);
        }
    }
    let penalty = penalty_form(&d);
    QuboPair::from_parts(d.n, cost, penalty, Some(d))
}

/// Encodes with the given scheme; k-hot is rejected since it has no cost mapping.
pub fn encode(dqm: &DqmInstance, kind: EncodingKind, perms: Option<Vec<Vec<usize>>>) -> Result<QuboPair> {
    match kind {
        EncodingKind::OneHot => encode_one_hot(dqm, perms),
        EncodingKind::DomainWall => encode_domain_wall(dqm, perms),
        EncodingKind::KHot => Err(Error::Unsupported(
            "k-hot registers carry a penalty only; use build_k_hot_penalty".into(),
        )),
    }
}

/// Penalty `(sum_a b_a - count)^2` over a single register of `l` variables,
/// with an empty cost form.
pub fn build_k_hot_penalty(l: usize, count: usize) -> Result<QuboPair> {
    let d = EncodingDescriptor::k_hot(l, count)?;
    let penalty = penalty_form(&d);
    QuboPair::from_parts(d.n, QuadraticForm::new(), penalty, Some(d))
}
