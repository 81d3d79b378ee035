use crate::error::{Error, Result};

pub const SOBOL_MAX_DIM: usize = 10;
const BITS: u32 = 32;

/// (s, a, m_1..m_s) for dimensions 2..=10 of the Joe–Kuo table.
const DIRECTIONS: [(u32, u32, &[u32]); SOBOL_MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

fn direction_numbers(dim: usize) -> [u32; BITS as usize] {
    let mut v = [0u32; BITS as usize];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k as u32);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[dim - 1];
    let s = s as usize;
    for k in 0..s.min(BITS as usize) {
        v[k] = m[k] << (BITS - 1 - k as u32);
    }
    for k in s..BITS as usize {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Points 1..=n of the unscrambled Sobol sequence (the origin is skipped),
/// generated in Gray-code order.
pub fn sobol_points(d: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if d == 0 || d > SOBOL_MAX_DIM {
        return Err(Error::DimensionUnsupported(d, SOBOL_MAX_DIM));
    }
    if n as u64 >= 1u64 << 31 {
        return Err(Error::InvalidInput(format!("at most 2^31 − 1 Sobol points, asked for {n}")));
    }
    let v: Vec<[u32; BITS as usize]> = (0..d).map(direction_numbers).collect();
    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut x = vec![0u32; d];
    let mut out = Vec::with_capacity(n);
    for i in 0..n as u32 {
        let c = (!i).trailing_zeros() as usize;
        for (xj, vj) in x.iter_mut().zip(&v) {
            *xj ^= vj[c];
        }
        out.push(x.iter().map(|&xj| xj as f64 * scale).collect());
    }
    Ok(out)
}
