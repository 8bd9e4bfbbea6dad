//! Discrete quadratic models.
//!
//! A model has `k` registers (discrete variables) each taking one of `l`
//! values. Coefficients are keyed by `(i, j, alpha, beta)` with `i >= j`,
//! and for within-register keys (`i == j`) additionally `alpha >= beta`.
//! The diagonal key `(i, i, alpha, alpha)` is the linear term of value
//! `alpha` of register `i`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermKey {
    pub i: usize,
    pub j: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl TermKey {
    pub const fn new(i: usize, j: usize, alpha: usize, beta: usize) -> Self {
        TermKey { i, j, alpha, beta }
    }

    fn check(&self, k: usize, l: usize) -> Result<()> {
        let TermKey { i, j, alpha, beta } = *self;
        if i >= k || alpha >= l || beta >= l {
            return Err(Error::Dimensions(format!(
                "term ({i}, {j}, {alpha}, {beta}) out of range for k={k}, l={l}"
            )));
        }
        if j > i {
            return Err(Error::NonCanonical {
                i,
                j,
                alpha,
                beta,
                reason: "register indices must satisfy i >= j",
            });
        }
        if i == j && alpha < beta {
            return Err(Error::NonCanonical {
                i,
                j,
                alpha,
                beta,
                reason: "within-register terms must satisfy alpha >= beta",
            });
        }
        Ok(())
    }
}

/// One value index per register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteAssignment {
    pub values: Vec<usize>,
}

impl DiscreteAssignment {
    pub fn new(values: Vec<usize>) -> Self {
        DiscreteAssignment { values }
    }

    pub fn check(&self, k: usize, l: usize) -> Result<()> {
        if self.values.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: self.values.len(),
            });
        }
        if let Some(&v) = self.values.iter().find(|&&v| v >= l) {
            return Err(Error::Dimensions(format!("value {v} out of range for l={l}")));
        }
        Ok(())
    }

    /// All `l^k` assignments in lexicographic order (register 0 most significant).
    pub fn all(k: usize, l: usize) -> impl Iterator<Item = DiscreteAssignment> {
        let total = (l as u64).pow(k as u32);
        (0..total).map(move |mut code| {
            let mut values = vec![0; k];
            for slot in values.iter_mut().rev() {
                *slot = (code % l as u64) as usize;
                code /= l as u64;
            }
            DiscreteAssignment { values }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqmInstance {
    k: usize,
    l: usize,
    terms: BTreeMap<TermKey, f64>,
}

impl DqmInstance {
    /// An instance with no terms.
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Dimensions("k must be positive".into()));
        }
        if l < 2 {
            return Err(Error::Dimensions(format!("l must be at least 2, got {l}")));
        }
        Ok(DqmInstance {
            k,
            l,
            terms: BTreeMap::new(),
        })
    }

    /// Builds an instance from a list of terms, rejecting duplicates.
    pub fn from_terms<I>(k: usize, l: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TermKey, f64)>,
    {
        let mut dqm = DqmInstance::new(k, l)?;
        for (key, value) in terms {
            if dqm.terms.contains_key(&key) {
                return Err(Error::DuplicateTerm {
                    i: key.i,
                    j: key.j,
                    alpha: key.alpha,
                    beta: key.beta,
                });
            }
            dqm.set(key, value)?;
        }
        Ok(dqm)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn terms(&self) -> &BTreeMap<TermKey, f64> {
        &self.terms
    }

    pub fn get(&self, key: &TermKey) -> f64 {
        self.terms.get(key).copied().unwrap_or(0.0)
    }

    /// Sets (replaces) a coefficient.
    pub fn set(&mut self, key: TermKey, value: f64) -> Result<()> {
        key.check(self.k, self.l)?;
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        self.terms.insert(key, value);
        Ok(())
    }

    /// Every canonical key for `(k, l)` in sorted order.
    pub fn canonical_keys(k: usize, l: usize) -> Vec<TermKey> {
        let mut keys = Vec::new();
        for i in 0..k {
            for j in 0..=i {
                for alpha in 0..l {
                    for beta in 0..l {
                        if i == j && alpha < beta {
                            continue;
                        }
                        keys.push(TermKey::new(i, j, alpha, beta));
                    }
                }
            }
        }
        keys
    }

    pub fn evaluate(&self, a: &DiscreteAssignment) -> Result<f64> {
        a.check(self.k, self.l)?;
        Ok(self
            .terms
            .iter()
            .filter(|(key, _)| a.values[key.i] == key.alpha && a.values[key.j] == key.beta)
            .map(|(_, &c)| c)
            .sum())
    }

    /// Sum of two instances of equal shape.
    pub fn add(&self, other: &DqmInstance) -> Result<DqmInstance> {
        if (self.k, self.l) != (other.k, other.l) {
            return Err(Error::Dimensions("instances differ in shape".into()));
        }
        let mut out = self.clone();
        for (key, &value) in &other.terms {
            *out.terms.entry(*key).or_insert(0.0) += value;
        }
        Ok(out)
    }

    /// Fills every canonical slot with an integer drawn uniformly from
    /// `[coeff_lo, coeff_hi]`.
    pub fn random(k: usize, l: usize, coeff_lo: i64, coeff_hi: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(k, l, coeff_lo, coeff_hi, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(
        k: usize,
        l: usize,
        coeff_lo: i64,
        coeff_hi: i64,
        rng: &mut R,
    ) -> Result<Self> {
        if coeff_lo > coeff_hi {
            return Err(Error::Dimensions(format!(
                "empty coefficient range [{coeff_lo}, {coeff_hi}]"
            )));
        }
        let mut dqm = DqmInstance::new(k, l)?;
        for key in Self::canonical_keys(k, l) {
            let c = rng.gen_range(coeff_lo..=coeff_hi);
            dqm.terms.insert(key, c as f64);
        }
        Ok(dqm)
    }

    /// Like [`DqmInstance::random`] but with continuous uniform coefficients
    /// in `[lo, hi)`, so cost ties occur with probability zero.
    pub fn random_uniform(k: usize, l: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Dimensions(format!("bad coefficient range [{lo}, {hi})")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dqm = DqmInstance::new(k, l)?;
        for key in Self::canonical_keys(k, l) {
            dqm.terms.insert(key, rng.gen_range(lo..hi));
        }
        Ok(dqm)
    }

    pub fn to_json(&self) -> String {
        let mut out = format!("{{\n  \"k\": {},\n  \"l\": {},\n  \"terms\": [", self.k, self.l);
        for (n, (key, &value)) in self.terms.iter().enumerate() {
            let record = TermRecord {
                i: key.i,
                j: key.j,
                alpha: key.alpha,
                beta: key.beta,
                value,
            };
            out.push_str(if n == 0 { "\n    " } else { ",\n    " });
            out.push_str(&serde_json::to_string(&record).expect("term record serializes"));
        }
        if !self.terms.is_empty() {
            out.push_str("\n  ");
        }
        out.push_str("]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DqmFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut dqm = DqmInstance::new(file.k, file.l).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        for (n, t) in file.terms.iter().enumerate() {
            let key = TermKey::new(t.i, t.j, t.alpha, t.beta);
            let err = if dqm.terms.contains_key(&key) {
                Some(
                    Error::DuplicateTerm {
                        i: t.i,
                        j: t.j,
                        alpha: t.alpha,
                        beta: t.beta,
                    }
                    .to_string(),
                )
            } else {
                dqm.set(key, t.value).err().map(|e| e.to_string())
            };
            if let Some(message) = err {
                return Err(Error::Parse {
                    line: term_line(text, n),
                    message,
                });
            }
        }
        Ok(dqm)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    i: usize,
    j: usize,
    alpha: usize,
    beta: usize,
    value: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DqmFile {
    k: usize,
    l: usize,
    terms: Vec<TermRecord>,
}

/// Line (1-based) of the opening brace of the `index`-th object inside the
/// `"terms"` array. Term objects are flat, so braces inside the array map
/// one-to-one onto terms.
fn term_line(text: &str, index: usize) -> usize {
    let Some(start) = text.find("\"terms\"") else {
        return 1;
    };
    let mut line = 1 + text[..start].matches('\n').count();
    let mut seen = 0;
    let mut in_string = false;
    let mut escaped = false;
    for c in text[start + 7..].chars() {
        match c {
            '\n' => line += 1,
            _ if in_string => {
                if escaped {
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == '"' {
                    in_string = false;
                }
            }
            '"' => in_string = true,
            '{' => {
                if seen == index {
                    return line;
                }
                seen += 1;
            }
            _ => {}
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corollary1_dqm() -> DqmInstance {
        DqmInstance::from_terms(
            2,
            2,
            [
                (TermKey::new(0, 0, 0, 0), 3.0),
                (TermKey::new(0, 0, 1, 1), 3.0),
                (TermKey::new(1, 1, 0, 0), 4.0),
                (TermKey::new(1, 1, 1, 1), 7.0),
                (TermKey::new(1, 0, 0, 0), 2.0),
                (TermKey::new(1, 0, 1, 0), 4.0),
                (TermKey::new(1, 0, 0, 1), 1.0),
                (TermKey::new(1, 0, 1, 1), 2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_model_evaluates_to_zero() {
        let dqm = DqmInstance::new(3, 4).unwrap();
        for a in DiscreteAssignment::all(3, 4) {
            assert_eq!(dqm.evaluate(&a).unwrap(), 0.0);
        }
    }

    #[test]
    fn hand_evaluated_assignments() {
        let dqm = corollary1_dqm();
        // linear 3 + 4 and cross C(1,0,0,0) = 2
        assert_eq!(dqm.evaluate(&DiscreteAssignment::new(vec![0, 0])).unwrap(), 9.0);
        // linear 3 + 4 and cross C(1,0,0,1) = 1
        assert_eq!(dqm.evaluate(&DiscreteAssignment::new(vec![1, 0])).unwrap(), 8.0);
    }

    #[test]
    fn off_diagonal_within_register_terms_never_contribute() {
        let mut dqm = DqmInstance::new(1, 3).unwrap();
        dqm.set(TermKey::new(0, 0, 2, 1), 100.0).unwrap();
        for a in DiscreteAssignment::all(1, 3) {
            assert_eq!(dqm.evaluate(&a).unwrap(), 0.0);
        }
    }

    #[test]
    fn assignment_dimension_mismatch() {
        let dqm = corollary1_dqm();
        assert!(matches!(
            dqm.evaluate(&DiscreteAssignment::new(vec![0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(dqm.evaluate(&DiscreteAssignment::new(vec![0, 2])).is_err());
    }

    #[test]
    fn rejects_bad_keys_and_values() {
        let mut dqm = DqmInstance::new(2, 3).unwrap();
        assert!(matches!(
            dqm.set(TermKey::new(0, 1, 0, 0), 1.0),
            Err(Error::NonCanonical { .. })
        ));
        assert!(matches!(
            dqm.set(TermKey::new(1, 1, 0, 2), 1.0),
            Err(Error::NonCanonical { .. })
        ));
        assert!(dqm.set(TermKey::new(2, 0, 0, 0), 1.0).is_err());
        assert!(matches!(
            dqm.set(TermKey::new(1, 0, 0, 0), f64::NAN),
            Err(Error::NonFinite(_))
        ));
        assert!(DqmInstance::new(0, 2).is_err());
        assert!(DqmInstance::new(2, 1).is_err());
    }

    #[test]
    fn random_is_dense_in_range_and_deterministic() {
        let a = DqmInstance::random(2, 2, 1, 10, 7).unwrap();
        assert_eq!(a.terms().len(), DqmInstance::canonical_keys(2, 2).len());
        assert!(a.terms().values().all(|&c| (1.0..=10.0).contains(&c)));
        assert_eq!(a, DqmInstance::random(2, 2, 1, 10, 7).unwrap());

        let b = DqmInstance::random(2, 3, -9, 9, 11).unwrap();
        assert!(b.terms().values().all(|&c| (-9.0..=9.0).contains(&c) && c.fract() == 0.0));
        assert!(DqmInstance::random(2, 2, 5, 4, 0).is_err());
    }

    #[test]
    fn canonical_key_count() {
        // k*l(l+1)/2 within-register plus k(k-1)/2 * l^2 cross slots
        assert_eq!(DqmInstance::canonical_keys(2, 2).len(), 2 * 3 + 4);
        assert_eq!(DqmInstance::canonical_keys(3, 4).len(), 3 * 10 + 3 * 16);
    }

    #[test]
    fn json_round_trip_is_sorted() {
        let dqm = corollary1_dqm();
        let text = dqm.to_json();
        assert_eq!(DqmInstance::from_json(&text).unwrap(), dqm);
        let first = text.find("\"i\":1,\"j\":0,\"alpha\":0,\"beta\":0").unwrap();
        let second = text.find("\"i\":1,\"j\":0,\"alpha\":0,\"beta\":1").unwrap();
        assert!(first < second);
    }

    #[test]
    fn json_round_trip_keeps_full_precision() {
        let mut dqm = DqmInstance::new(1, 2).unwrap();
        dqm.set(TermKey::new(0, 0, 1, 0), 0.1 + 0.2).unwrap();
        dqm.set(TermKey::new(0, 0, 0, 0), -1.0e-300).unwrap();
        let back = DqmInstance::from_json(&dqm.to_json()).unwrap();
        for (key, value) in dqm.terms() {
            assert_eq!(back.get(key).to_bits(), value.to_bits());
        }
    }

    #[test]
    fn json_errors_carry_line_numbers() {
        let dup = "{\n\"k\": 2,\n\"l\": 2,\n\"terms\": [\n{\"i\":0,\"j\":0,\"alpha\":0,\"beta\":0,\"value\":1},\n{\"i\":0,\"j\":0,\"alpha\":0,\"beta\":0,\"value\":2}\n]\n}";
        match DqmInstance::from_json(dup) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("duplicate"));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }

        let swapped = "{\"k\": 2, \"l\": 2, \"terms\": [\n{\"i\":0,\"j\":1,\"alpha\":0,\"beta\":0,\"value\":1}]}";
        match DqmInstance::from_json(swapped) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("not canonical"));
            }
            other => panic!("expected canonical-form error, got {other:?}"),
        }

        let range = "{\"k\": 2, \"l\": 2, \"terms\": [{\"i\":5,\"j\":0,\"alpha\":0,\"beta\":0,\"value\":1}]}";
        assert!(matches!(DqmInstance::from_json(range), Err(Error::Parse { line: 1, .. })));

        let malformed = "{\"k\": 2,\n \"l\": }";
        assert!(matches!(DqmInstance::from_json(malformed), Err(Error::Parse { line: 2, .. })));
    }
}
