//! The symmetric generating set `Σ_{p+1}` of the free rotation group.

use crate::error::Result;
use crate::quaternion::{adjoint_rotation, enumerate_representatives, LipschitzQuaternion};
use crate::rotation::ExactRotation;
use crate::words::WordGroup;

/// `p + 1` rotations over the denominator `p`, closed under inversion.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub p: u64,
    pub rank: usize,
    pub rotations: Vec<ExactRotation>,
    pub inverse_of: Vec<usize>,
    pub source_quaternions: Vec<LipschitzQuaternion>,
}

/// Builds `Σ_{p+1}` from the sorted norm-`p` representatives. Index `i` is
/// paired with the index of the conjugate quaternion, whose rotation is the
/// transpose.
pub fn build_generator_set(p: u64) -> Result<GeneratorSet> {
    let quats = enumerate_representatives(p)?;
    let rotations = quats
        .iter()
        .map(adjoint_rotation)
        .collect::<Result<Vec<_>>>()?;
    let inverse_of = quats
        .iter()
        .map(|q| {
            let t = q.conjugate();
            quats.binary_search(&t).expect("representatives are closed under conjugation")
        })
        .collect();
    Ok(GeneratorSet {
        p,
        rank: quats.len() / 2,
        rotations,
        inverse_of,
        source_quaternions: quats,
    })
}

impl GeneratorSet {
    /// `q = 2r − 1 = p` for the LPS sets.
    pub fn q(&self) -> u64 {
        (self.rotations.len() - 1) as u64
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Every structural invariant, checked exactly.
    pub fn check_invariants(&self) -> bool {
        let n = self.rotations.len();
        n as u64 == self.p + 1
            && self.rank * 2 == n
            && (0..n).all(|i| {
                let j = self.inverse_of[i];
                j != i
                    && self.inverse_of[j] == i
                    && self.rotations[j].multiply(&self.rotations[i]).is_identity()
                    && self.source_quaternions[j] == self.source_quaternions[i].conjugate()
                    && self.rotations[i].den_exp() == 1
                    && self.rotations[i].is_scaled_orthogonal()
            })
    }
}

impl WordGroup for GeneratorSet {
    type Element = ExactRotation;

    fn num_generators(&self) -> usize {
        self.rotations.len()
    }

    fn inverse_letter(&self, letter: usize) -> usize {
        self.inverse_of[letter]
    }

    fn identity(&self) -> ExactRotation {
        ExactRotation::identity()
    }

    fn generator(&self, letter: usize) -> &ExactRotation {
        &self.rotations[letter]
    }

    fn compose(&self, a: &ExactRotation, b: &ExactRotation) -> ExactRotation {
        a.multiply(b)
    }
}
