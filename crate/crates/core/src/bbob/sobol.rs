//! Unscrambled Sobol points from the Joe-Kuo direction numbers
//! (`new-joe-kuo-6.21201`, first 21 dimensions), with an optional random
//! digital shift per coordinate.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;

pub const SOBOL_MAX_DIM: usize = 21;

const BITS: usize = 32;

/// `(s, a, m_1..m_s)` for dimensions 2..=21; dimension 1 is van der Corput.
const JOE_KUO: [(usize, u32, &[u32]); SOBOL_MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - i);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim - 1];
    for i in 0..s {
        v[i] = m[i] << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// First `n` Sobol points in `[0, 1)^dim` (Gray-code order, starting at the
/// origin), XOR-shifted by `shifts` when given.
///
/// Panics if `dim > SOBOL_MAX_DIM` or `n > 2^32`.
pub fn sobol_points(n: usize, dim: usize, shifts: Option<&[u32]>) -> Matrix {
    assert!(dim <= SOBOL_MAX_DIM, "Sobol table covers {SOBOL_MAX_DIM} dimensions");
    let dirs: Vec<[u32; BITS]> = (0..dim).map(directions).collect();
    let mut state: Vec<u32> = match shifts {
        Some(s) => s[..dim].to_vec(),
        None => vec![0; dim],
    };
    let mut out = Matrix::zeros(n, dim);
    let scale = 1.0 / (1u64 << BITS) as f64;
    for i in 0..n {
        for (j, s) in state.iter().enumerate() {
            out[(i, j)] = f64::from(*s) * scale;
        }
        // Gray code: flip the direction number at the lowest zero bit of i.
        let c = (!(i as u64)).trailing_zeros() as usize;
        if c < BITS {
            for (s, d) in state.iter_mut().zip(&dirs) {
                *s ^= d[c];
            }
        }
    }
    out
}
