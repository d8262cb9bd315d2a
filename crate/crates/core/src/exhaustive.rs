//! Exact minimization by enumeration, for known-optimum annotation of small
//! instances.

use crate::error::{Error, Result};
use crate::instance::{sign_energy, Convention, QuboInstance, SignVector};

pub const MAX_EXHAUSTIVE_N: usize = 30;

/// Global minimum of a `PlusMinusOne` instance over all `2^n` sign vectors.
///
/// Walks a Gray code with `x_0 = +1` fixed (the objective is invariant under
/// global negation), updating the value in `O(n)` per step through the local
/// field `Q x`. The returned value is re-evaluated from scratch.
pub fn brute_force_minimum(inst: &QuboInstance) -> Result<(SignVector, f64)> {
    inst.require(Convention::PlusMinusOne)?;
    let n = inst.n();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search limited to n <= {MAX_EXHAUSTIVE_N}, got {n}"
        )));
    }
    let q = inst.q();
    let mut x = vec![1i8; n];
    let mut field: Vec<f64> = (0..n).map(|i| q.row(i).sum()).collect();
    let mut value = inst.total_sum();
    let mut best = (x.clone(), value);
    let free = n - 1;
    for step in 1u64..(1u64 << free) {
        // flip the variable given by the lowest set bit, shifted past x_0
        let i = step.trailing_zeros() as usize + 1;
        let xi = f64::from(x[i]);
        value += -4.0 * xi * field[i] + 4.0 * q[[i, i]];
        for (j, f) in field.iter_mut().enumerate() {
            *f -= 2.0 * xi * q[[j, i]];
        }
        x[i] = -x[i];
        if value < best.1 {
            best = (x.clone(), value);
        }
    }
    let exact = sign_energy(q, &best.0);
    Ok((SignVector::new(best.0)?, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::gen_random_gaussian;

    #[test]
    fn matches_naive_enumeration() {
        for seed in 0..5 {
            let inst = gen_random_gaussian(9, seed).unwrap();
            let (x, v) = brute_force_minimum(&inst).unwrap();
            let mut naive = f64::INFINITY;
            for mask in 0u32..(1 << 9) {
                let y: Vec<f64> = (0..9)
                    .map(|b| if mask >> b & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                naive = naive.min(inst.objective(&y).unwrap());
            }
            assert!((v - naive).abs() < 1e-9);
            assert_eq!(inst.evaluate(&x).unwrap(), v);
        }
    }

    #[test]
    fn single_variable() {
        let inst = QuboInstance::plus_minus_one(ndarray::array![[2.0]]).unwrap();
        assert_eq!(brute_force_minimum(&inst).unwrap().1, 2.0);
    }
}
