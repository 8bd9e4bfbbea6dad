//! Reference instances and an independent route from a domain-wall cost
//! matrix back to a discrete model.
#![allow(dead_code)]

use dqm_landscape::{DqmInstance, EncodingDescriptor, EncodingKind, QuboPair, TermKey};

pub fn bits(s: &str) -> dqm_landscape::BitString {
    s.parse().unwrap()
}

pub fn idx(s: &str) -> u64 {
    bits(s).to_index()
}

/// One-hot k = l = 2 instance with an invalid local minimum between the
/// global-minimum and escape thresholds (cost matrix rows 3 0 2 4 / 0 3 1 2 /
/// 0 0 4 0 / 0 0 0 7).
pub fn invalid_minimum_dqm() -> DqmInstance {
    two_by_two([3.0, 3.0, 4.0, 7.0], [2.0, 4.0, 1.0, 2.0])
}

/// One-hot k = l = 2 instance with a non-optimal valid local minimum below
/// the global-minimum threshold (rows 7 0 5 4 / 0 7 5 9 / 0 0 2 0 / 0 0 0 6).
pub fn valid_minimum_dqm() -> DqmInstance {
    two_by_two([7.0, 7.0, 2.0, 6.0], [5.0, 4.0, 5.0, 9.0])
}

/// `linear` = C(0,0,0,0), C(0,0,1,1), C(1,1,0,0), C(1,1,1,1);
/// `cross` = C(1,0,0,0), C(1,0,1,0), C(1,0,0,1), C(1,0,1,1).
fn two_by_two(linear: [f64; 4], cross: [f64; 4]) -> DqmInstance {
    DqmInstance::from_terms(
        2,
        2,
        [
            (TermKey::new(0, 0, 0, 0), linear[0]),
            (TermKey::new(0, 0, 1, 1), linear[1]),
            (TermKey::new(1, 1, 0, 0), linear[2]),
            (TermKey::new(1, 1, 1, 1), linear[3]),
            (TermKey::new(1, 0, 0, 0), cross[0]),
            (TermKey::new(1, 0, 1, 0), cross[1]),
            (TermKey::new(1, 0, 0, 1), cross[2]),
            (TermKey::new(1, 0, 1, 1), cross[3]),
        ],
    )
    .unwrap()
}

pub const INVALID_MINIMUM_MATRIX: [[f64; 4]; 4] =
    [[3., 0., 2., 4.], [0., 3., 1., 2.], [0., 0., 4., 0.], [0., 0., 0., 7.]];

pub const VALID_MINIMUM_MATRIX: [[f64; 4]; 4] =
    [[7., 0., 5., 4.], [0., 7., 5., 9.], [0., 0., 2., 0.], [0., 0., 0., 6.]];

/// Domain-wall k = 2, l = 3 cost matrix; the instance carries a further
/// scalar offset of -5.
pub const DOMAIN_WALL_MATRIX: [[f64; 4]; 4] =
    [[4., -2., 3., 1.], [0., 1., 2., -2.], [0., 0., -1., 4.], [0., 0., 0., -4.]];
pub const DOMAIN_WALL_OFFSET: f64 = -5.0;

pub fn matrix_rows<const N: usize>(m: &[[f64; N]; N]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// The domain-wall instance as a QUBO built straight from its matrix.
pub fn domain_wall_qubo(offset: f64) -> QuboPair {
    let d = EncodingDescriptor::new(EncodingKind::DomainWall, 2, 3, None).unwrap();
    QuboPair::from_cost_matrix(d, &matrix_rows(&DOMAIN_WALL_MATRIX), offset).unwrap()
}

/// Inverts the domain-wall substitution symbolically (identity orderings).
///
/// With wall indicators `x_a = b_{a-1} - b_a` the bits satisfy
/// `b_t = sum_{a > t} x_a` and `1 = sum_a x_a`; for `t < s` in one register
/// `b_t b_s = sum_{t < a <= s, c > s} x_c x_a + sum_{c > s} x_c`, which only
/// uses distinct-value products. Each monomial of the upper-triangular
/// `matrix` (variables laid out register by register) maps to model terms.
pub fn invert_domain_wall(k: usize, l: usize, matrix: &[Vec<f64>], offset: f64) -> DqmInstance {
    let len = l - 1;
    let mut dqm = DqmInstance::new(k, l).unwrap();
    let mut add = |key: TermKey, w: f64| {
        let cur = dqm.get(&key);
        dqm.set(key, cur + w).unwrap();
    };
    for a in 0..l {
        add(TermKey::new(0, 0, a, a), offset);
    }
    for u in 0..k * len {
        for v in u..k * len {
            let w = matrix[u][v];
            if w == 0.0 {
                continue;
            }
            let (i, t) = (u / len, u % len);
            let (j, s) = (v / len, v % len);
            if u == v {
                for a in t + 1..l {
                    add(TermKey::new(i, i, a, a), w);
                }
            } else if i == j {
                for c in s + 1..l {
                    for a in t + 1..=s {
                        add(TermKey::new(i, i, c, a), w);
                    }
                    add(TermKey::new(i, i, c, c), w);
                }
            } else {
                // j > i
                for b in s + 1..l {
                    for a in t + 1..l {
                        add(TermKey::new(j, i, b, a), w);
                    }
                }
            }
        }
    }
    dqm
}

/// Brute-force cost of every bitstring from a dense upper-triangular matrix.
pub fn matrix_energy(matrix: &[Vec<f64>], offset: f64, bits: &[bool]) -> f64 {
    let mut e = offset;
    for u in 0..bits.len() {
        for v in u..bits.len() {
            if bits[u] && bits[v] {
                e += matrix[u][v];
            }
        }
    }
    e
}
