use super::random_signs;
use crate::error::{Error, Result};
use crate::instance::{sign_energy, sign_field, Convention, QuboInstance, SignVector};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TabuParams {
    /// Iterations a flipped variable stays tabu.
    pub tenure: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl TabuParams {
    /// Tenure `n / 4` clamped to `[1, 20]`.
    pub fn for_instance(inst: &QuboInstance, iterations: usize, seed: u64) -> Self {
        TabuParams {
            tenure: (inst.n() / 4).clamp(1, 20),
            iterations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenure == 0 {
            return Err(Error::InvalidArgument(
                "tabu tenure must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabuMove {
    pub iteration: usize,
    pub variable: usize,
    pub delta: f64,
    /// The variable was tabu and the move beat the best value seen.
    pub aspirated: bool,
    /// Every move was tabu and none aspirated; the best tabu move was taken.
    pub fallback: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TabuTrace {
    /// Random starting point.
    pub start: Vec<i8>,
    pub moves: Vec<TabuMove>,
    /// Best value seen after each move, preceded by the start value.
    pub best_values: Vec<f64>,
}

/// Single-flip tabu search with aspiration.
///
/// Ties between equally good moves go to the lowest index, so the seed only
/// affects the random starting point.
pub fn tabu_search(inst: &QuboInstance, p: &TabuParams) -> Result<(SignVector, f64, TabuTrace)> {
    inst.require(Convention::PlusMinusOne)?;
    p.validate()?;
    let q = inst.q();
    let n = inst.n();
    let mut rng = rng::from_seed(p.seed);
    let mut x = random_signs(n, &mut rng);
    let mut field = sign_field(q, &x);
    let mut energy = sign_energy(q, &x);
    let mut best_x = x.clone();
    let mut best = energy;
    // variable i is tabu while iteration <= tabu_until[i]
    let mut tabu_until: Vec<Option<usize>> = vec![None; n];
    let mut trace = TabuTrace {
        start: x.clone(),
        moves: Vec::with_capacity(p.iterations),
        best_values: vec![best],
    };

    for it in 0..p.iterations {
        let mut allowed: Option<(usize, f64, bool)> = None;
        let mut any_tabu: Option<(usize, f64)> = None;
        for i in 0..n {
            let delta = -4.0 * f64::from(x[i]) * field[i] + 4.0 * q[[i, i]];
            let is_tabu = tabu_until[i].is_some_and(|u| it <= u);
            if is_tabu && any_tabu.is_none_or(|(_, d)| delta < d) {
                any_tabu = Some((i, delta));
            }
            let aspirates = is_tabu && energy + delta < best;
            if (!is_tabu || aspirates) && allowed.is_none_or(|(_, d, _)| delta < d) {
                allowed = Some((i, delta, aspirates));
            }
        }
        let (i, delta, aspirated, fallback) = match (allowed, any_tabu) {
            (Some((i, d, a)), _) => (i, d, a, false),
            (None, Some((i, d))) => (i, d, false, true),
            (None, None) => unreachable!("n >= 1"),
        };
        let xi = f64::from(x[i]);
        x[i] = -x[i];
        for (h, qj) in field.iter_mut().zip(q.row(i)) {
            *h -= 2.0 * xi * qj;
        }
        energy += delta;
        tabu_until[i] = Some(it + p.tenure);
        if energy < best {
            best = energy;
            best_x.copy_from_slice(&x);
        }
        trace.moves.push(TabuMove {
            iteration: it,
            variable: i,
            delta,
            aspirated,
            fallback,
        });
        trace.best_values.push(best);
    }
    let best_x = SignVector::new(best_x)?;
    let value = inst.evaluate(&best_x)?;
    Ok((best_x, value, trace))
}
