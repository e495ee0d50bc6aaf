// Copyright contributors to the weakrot project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Closed-form branch statistics of homogeneous weak transversal rotations.
//!
//! Applying `e^{iθ P_m}` to each of `M` partition terms and measuring the
//! syndrome yields, for decoded correction weight `χ`, the logical rotation
//! `e^{i θ̄_χ P̄}` with
//!
//! ```text
//! p_χ = C(M,χ) (cos^{2(M-χ)}θ sin^{2χ}θ + cos^{2χ}θ sin^{2(M-χ)}θ)
//! θ̄_χ = arctan((-1)^{(M-1)/2-χ} tan^{M-2χ}θ)
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::punctured::for_each_combination;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleBranch {
    pub chi: usize,
    pub probability: f64,
    pub logical_angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEnsemble {
    pub m: usize,
    pub theta: f64,
    pub branches: Vec<AngleBranch>,
}

impl RotationEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    pub fn branch(&self, chi: usize) -> &AngleBranch {
        &self.branches[chi]
    }

    /// CSV with a schema comment line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# schema: weakrot-ensemble v1\nchi,probability,logical_angle\n");
        for b in &self.branches {
            let _ = writeln!(s, "{},{:e},{:e}", b.chi, b.probability, b.logical_angle);
        }
        s
    }
}

/// Maps an angle into `(-π/2, π/2]` (rotations `e^{iθP}` are π-periodic up to sign).
pub fn canonical_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}

/// Maps an angle into `(-π/4, π/4]`, i.e. modulo the Pauli rotation `e^{iπ/2 P}`.
pub fn canonical_angle_mod_pauli(a: f64) -> f64 {
    let mut r = a.rem_euclid(FRAC_PI_2);
    if r > FRAC_PI_4 {
        r -= FRAC_PI_2;
    }
    r
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

fn check_odd(m: usize) -> Result<()> {
    if m == 0 || m % 2 == 0 {
        return Err(Error::Domain(format!("term count must be odd and positive, got {m}")));
    }
    Ok(())
}

fn sign_factor(m: usize, chi: usize) -> f64 {
    if ((m - 1) / 2 + chi) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `θ̄_χ`, evaluated from sine and cosine powers so that `θ = ±π/2` is finite.
pub fn logical_angle(m: usize, chi: usize, theta: f64) -> f64 {
    let e = (m - 2 * chi) as i32;
    let (s, c) = theta.sin_cos();
    let y = sign_factor(m, chi) * s.powi(e);
    let x = c.powi(e);
    canonical_angle(y.atan2(x))
}

/// `p_χ` for a single `χ`.
pub fn branch_probability(m: usize, chi: usize, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let a = (m - chi) as i32;
    let b = chi as i32;
    binomial(m, chi) * (c2.powi(a) * s2.powi(b) + c2.powi(b) * s2.powi(a))
}

/// Branches `χ = 0..=(M-1)/2` for `M` terms rotated by the same `θ`.
pub fn branch_ensemble(m: usize, theta: f64) -> Result<RotationEnsemble> {
    check_odd(m)?;
    if !theta.is_finite() {
        return Err(Error::Domain("angle must be finite".into()));
    }
    let branches = (0..=(m - 1) / 2)
        .map(|chi| AngleBranch {
            chi,
            probability: branch_probability(m, chi, theta),
            logical_angle: logical_angle(m, chi, theta),
        })
        .collect();
    Ok(RotationEnsemble { m, theta, branches })
}

/// Rotation about a weight-`d_z` logical Z: sums the per-syndrome probabilities
/// of every minimum-weight error pattern, grouped by weight.
pub fn z_branches(dz: usize, theta: f64) -> Result<RotationEnsemble> {
    check_odd(dz)?;
    if dz > 40 {
        return Err(Error::Unsupported(format!("d_z = {dz} too large for pattern grouping")));
    }
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let mut branches = Vec::new();
    for chi in 0..=(dz - 1) / 2 {
        let per_syndrome =
            c2.powi((dz - chi) as i32) * s2.powi(chi as i32) + c2.powi(chi as i32) * s2.powi((dz - chi) as i32);
        let mut count = 0u64;
        if dz <= 24 {
            for_each_combination(dz, chi, |_| {
                count += 1;
                true
            });
        } else {
            count = binomial(dz, chi) as u64;
        }
        branches.push(AngleBranch {
            chi,
            probability: count as f64 * per_syndrome,
            logical_angle: logical_angle(dz, chi, theta),
        });
    }
    Ok(RotationEnsemble { m: dz, theta, branches })
}

/// Rotation about a logical Y built from weight-`d_x` X̄ and weight-`d_z` Z̄
/// sharing one qubit: an ensemble of effective length `d_x + d_z - 1`.
pub fn y_branches(dx: usize, dz: usize, theta: f64) -> Result<RotationEnsemble> {
    check_odd(dx)?;
    check_odd(dz)?;
    branch_ensemble(dx + dz - 1, theta)
}

/// Physical angle whose `χ` branch realizes `beta`:
/// `tan θ = ((-1)^{(M-1)/2-χ} tan β)^{1/(M-2χ)}` with the real odd root.
pub fn physical_angle_for_branch(m: usize, chi: usize, beta: f64) -> Result<f64> {
    check_odd(m)?;
    if chi > (m - 1) / 2 {
        return Err(Error::Domain(format!("chi {chi} out of range for M = {m}")));
    }
    if beta.abs() > FRAC_PI_2 + 1e-15 {
        return Err(Error::Domain(format!("|beta| must be at most pi/2, got {beta}")));
    }
    let e = (m - 2 * chi) as f64;
    let (sb, cb) = beta.sin_cos();
    // tan θ = t^{1/e} with t = sign · sb / cb; keep it as a ratio near the pole
    let y = sign_factor(m, chi) * sb;
    let root = |v: f64| v.signum() * v.abs().powf(1.0 / e);
    Ok(root(y).atan2(root(cb)))
}

/// `θ` such that `θ̄_0(θ) = beta`.
pub fn physical_angle_for_target(m: usize, beta: f64) -> Result<f64> {
    physical_angle_for_branch(m, 0, beta)
}

/// Probabilities of realizing `e^{+iπ/4 Z̄}` and `e^{-iπ/4 Z̄}` with `θ = π/4`.
pub fn s_gate_probability(m: usize) -> Result<(f64, f64)> {
    let ens = branch_ensemble(m, FRAC_PI_4)?;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for b in &ens.branches {
        if b.logical_angle > 0.0 {
            plus += b.probability;
        } else {
            minus += b.probability;
        }
    }
    Ok((plus, minus))
}

/// Physical-angle distributions for [`sample_logical_angles`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputDistribution {
    Uniform { low: f64, high: f64 },
    /// Equal mixture of normals centred on `±π/4`.
    Binormal { sigma: f64 },
    Point { theta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub low: f64,
    pub high: f64,
    pub counts: Vec<u64>,
    pub samples: u64,
}

impl Histogram {
    pub fn bin_centre(&self, i: usize) -> f64 {
        let w = (self.high - self.low) / self.counts.len() as f64;
        self.low + (i as f64 + 0.5) * w
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("# schema: weakrot-histogram v1\nbin_centre,count,density\n");
        let w = (self.high - self.low) / self.counts.len() as f64;
        for (i, &c) in self.counts.iter().enumerate() {
            let dens = c as f64 / (self.samples as f64 * w);
            let _ = writeln!(s, "{:e},{},{:e}", self.bin_centre(i), c, dens);
        }
        s
    }
}

/// Samples `θ`, then `χ ~ p_χ(θ)`, and histograms `θ̄_χ` over `(-π/2, π/2]`.
pub fn sample_logical_angles(
    m: usize,
    dist: InputDistribution,
    n_samples: u64,
    bins: usize,
    seed: u64,
) -> Result<Histogram> {
    check_odd(m)?;
    if bins == 0 {
        return Err(Error::Domain("bins must be positive".into()));
    }
    let normal = match dist {
        InputDistribution::Uniform { low, high } if !(low < high) || !low.is_finite() || !high.is_finite() => {
            return Err(Error::Domain(format!("invalid uniform range [{low}, {high})")));
        }
        InputDistribution::Binormal { sigma } if !(sigma > 0.0) || !sigma.is_finite() => {
            return Err(Error::Domain(format!("invalid sigma {sigma}")));
        }
        InputDistribution::Binormal { sigma } => Some(Normal::new(0.0, sigma).expect("checked sigma")),
        InputDistribution::Point { theta } if !theta.is_finite() => {
            return Err(Error::Domain("point mass must be finite".into()));
        }
        _ => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; bins];
    let (low, high) = (-FRAC_PI_2, FRAC_PI_2);
    let width = (high - low) / bins as f64;
    for _ in 0..n_samples {
        let theta = match dist {
            InputDistribution::Uniform { low, high } => rng.gen_range(low..high),
            InputDistribution::Binormal { .. } => {
                let centre = if rng.gen_bool(0.5) { FRAC_PI_4 } else { -FRAC_PI_4 };
                centre + normal.as_ref().expect("binormal").sample(&mut rng)
            }
            InputDistribution::Point { theta } => theta,
        };
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chi = (m - 1) / 2;
        for c in 0..=(m - 1) / 2 {
            acc += branch_probability(m, c, theta);
            if u < acc {
                chi = c;
                break;
            }
        }
        let a = logical_angle(m, chi, theta);
        let idx = (((a - low) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    Ok(Histogram {
        low,
        high,
        counts,
        samples: n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m3_at_pi_over_4() {
        let e = branch_ensemble(3, FRAC_PI_4).unwrap();
        assert!((e.branches[0].probability - 0.25).abs() < 1e-15);
        assert!((e.branches[0].logical_angle + FRAC_PI_4).abs() < 1e-15);
        assert!((e.branches[1].probability - 0.75).abs() < 1e-15);
        assert!((e.branches[1].logical_angle - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn m1_is_identity() {
        let e = branch_ensemble(1, 0.37).unwrap();
        assert_eq!(e.branches.len(), 1);
        assert_eq!(e.branches[0].probability, 1.0);
        assert!((e.branches[0].logical_angle - 0.37).abs() < 1e-15);
        assert!(branch_ensemble(4, 0.1).is_err());
    }

    #[test]
    fn pole_is_finite() {
        let e = branch_ensemble(5, FRAC_PI_2).unwrap();
        assert!((e.total_probability() - 1.0).abs() < 1e-12);
        for b in &e.branches {
            assert!((b.logical_angle.abs() - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn s_gate_pairs() {
        assert_eq!(s_gate_probability(1).unwrap(), (1.0, 0.0));
        let (p, q) = s_gate_probability(3).unwrap();
        assert!((p - 0.75).abs() < 1e-15 && (q - 0.25).abs() < 1e-15);
        let (p, q) = s_gate_probability(5).unwrap();
        assert!((p + q - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inversion_examples() {
        assert!((physical_angle_for_target(1, 0.2).unwrap() - 0.2).abs() < 1e-15);
        assert!((physical_angle_for_target(3, -FRAC_PI_4).unwrap() - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn point_mass_histogram() {
        let h = sample_logical_angles(5, InputDistribution::Point { theta: 0.0 }, 100, 10, 1).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 100);
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);
    }
}
