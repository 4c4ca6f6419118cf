use super::VectorField;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Snapshots `u^k` at increasing times; possibly thinned by a stride.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    tau: T,
    steps: Vec<usize>,
    times: Vec<T>,
    snapshots: Vec<VectorField<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(tau: T, initial: VectorField<T>) -> Result<Self> {
        if !(tau > T::zero()) {
            return Err(Error::Invalid(format!("time step must be positive, got {tau}")));
        }
        Ok(Self { tau, steps: vec![0], times: vec![T::zero()], snapshots: vec![initial] })
    }

    /// Every snapshot at `t_k = k τ`.
    pub fn uniform(tau: T, snapshots: Vec<VectorField<T>>) -> Result<Self> {
        let mut it = snapshots.into_iter();
        let first = it.next().ok_or_else(|| Error::Empty("trajectory without snapshots".into()))?;
        let mut traj = Self::new(tau, first)?;
        for (k, u) in it.enumerate() {
            traj.push(k + 1, u)?;
        }
        Ok(traj)
    }

    pub fn push(&mut self, step: usize, u: VectorField<T>) -> Result<()> {
        if !u.same_shape(&self.snapshots[0]) {
            return Err(Error::Shape("snapshot shape differs from the initial data".into()));
        }
        if step <= *self.steps.last().expect("non-empty") {
            return Err(Error::Invalid(format!("step indices must increase, got {step}")));
        }
        self.times.push(T::of_usize(step) * self.tau);
        self.steps.push(step);
        self.snapshots.push(u);
        Ok(())
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn snapshots(&self) -> &[VectorField<T>] {
        &self.snapshots
    }

    pub fn initial(&self) -> &VectorField<T> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &VectorField<T> {
        self.snapshots.last().expect("non-empty")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("non-empty")
    }
}
