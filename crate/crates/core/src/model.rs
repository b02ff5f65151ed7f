//! The three capabilities every part of the occlusion machinery is generic over:
//! an unnormalised target density, a sampleable variational approximation to it,
//! and a Markov kernel that leaves the target invariant.

use rand::Rng;

/// Shape of a state space, for diagnostics and configuration checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// Real vectors of the given dimension.
    Continuous(usize),
    /// `{-1, +1}^n`.
    Spins(usize),
    /// `{0, .., m - 1}`.
    Finite(usize),
}

/// An unnormalised target measure `P̃`.
///
/// Implementations must be cheap to share between the chain worker and the
/// rejection workers, so the trait requires `Sync`.
pub trait TargetModel: Sync {
    type State: Clone + Send + Sync;

    /// `log P̃(x)` up to an additive constant.
    fn log_density(&self, state: &Self::State) -> f64;

    fn state_space(&self) -> StateSpace;
}

/// A distribution `Q` that can be sampled exactly and whose unnormalised
/// log-density is available.
pub trait VariationalModel: Sync {
    type State;

    /// `log Q̃(x)` up to an additive constant.
    fn log_density(&self, state: &Self::State) -> f64;

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;
}

/// One transition of a `P`-invariant Markov chain, applied in place.
pub trait MarkovKernel<S> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut S, rng: &mut R);
}

impl<T: TargetModel + ?Sized> TargetModel for &T {
    type State = T::State;

    fn log_density(&self, state: &Self::State) -> f64 {
        (**self).log_density(state)
    }

    fn state_space(&self) -> StateSpace {
        (**self).state_space()
    }
}

impl<Q: VariationalModel + ?Sized> VariationalModel for &Q {
    type State = Q::State;

    fn log_density(&self, state: &Self::State) -> f64 {
        (**self).log_density(state)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State {
        (**self).sample(rng)
    }
}

impl<S, K: MarkovKernel<S> + ?Sized> MarkovKernel<S> for &mut K {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut S, rng: &mut R) {
        (**self).step(state, rng)
    }
}
