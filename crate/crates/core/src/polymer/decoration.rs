//! Decoration functions Φ(𝒞;γ).
//!
//! Every decoration here depends on γ only through `𝒞 ∩ Δ⁺_γ` and
//! `𝒞 ∩ Δ⁻_γ`, is translation covariant, vanishes on clusters that miss Δ_γ,
//! and is only evaluated on clusters with `d(𝒞) ≤ d_max`.

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::sos::cluster::fixed_polyominoes;
use crate::sos::{d_value, Cluster, FuCache};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

type PatternKey = (Vec<Site>, Vec<Site>);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum DecorationKind {
    Zero,
    /// Pseudo-random values of size at most `amplitude·e^{−χβ(d+1)}`,
    /// a deterministic function of the translation class of (𝒞, 𝒞∩Δ⁺, 𝒞∩Δ⁻).
    Synthetic { amplitude: f64, seed: u64 },
    /// `value` on single-plaquette clusters meeting Δ_γ, zero otherwise.
    SingleSite { value: f64 },
    /// The SOS open-contour decoration
    /// `−f₀(𝒞) + f_{Δ⁺}(𝒞)·1{𝒞∩Δ⁻=∅} + f_{Δ⁻}(𝒞)·1{𝒞∩Δ⁺=∅}`,
    /// with `f_U` tabulated for every shape in range.
    Sos {
        #[serde(skip)]
        table: HashMap<PatternKey, f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decoration {
    pub kind: DecorationKind,
    pub beta: f64,
    pub chi: f64,
    pub d_max: u32,
    /// Normalised cluster shapes with `d ≤ d_max`, and their `d`.
    #[serde(skip)]
    shapes: Vec<(Cluster, u32)>,
}

/// Shapes (fixed polyominoes) with `d(𝒞) ≤ d_max`.
pub fn shapes_up_to(d_max: u32) -> Vec<(Cluster, u32)> {
    // An n-cell polyomino has at least 2⌈2√n⌉ boundary bonds.
    let mut n_max = 0usize;
    while 2 * (2.0 * ((n_max + 1) as f64).sqrt()).ceil() as u32 <= d_max {
        n_max += 1;
    }
    fixed_polyominoes(n_max)
        .into_iter()
        .map(|c| {
            let d = d_value(&c);
            (c.normalized().0, d)
        })
        .filter(|(_, d)| *d <= d_max)
        .collect()
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Decoration {
    fn with_kind(kind: DecorationKind, beta: f64, chi: f64, d_max: u32) -> Result<Self> {
        if !(beta > 0.0) || !(chi > 0.0) {
            return Err(Error::Config(format!("beta and chi must be positive (beta={beta}, chi={chi})")));
        }
        Ok(Decoration {
            kind,
            beta,
            chi,
            d_max,
            shapes: shapes_up_to(d_max),
        })
    }

    pub fn zero(beta: f64) -> Self {
        Decoration::with_kind(DecorationKind::Zero, beta, 1.0, 10).expect("valid zero decoration")
    }

    pub fn synthetic(beta: f64, chi: f64, d_max: u32, amplitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::Config("synthetic amplitude must lie in [0,1]".into()));
        }
        Decoration::with_kind(DecorationKind::Synthetic { amplitude, seed }, beta, chi, d_max)
    }

    pub fn single_site(beta: f64, chi: f64, value: f64) -> Result<Self> {
        let d = Decoration::with_kind(DecorationKind::SingleSite { value }, beta, chi, 4)?;
        if value.abs() > d.decay_bound(4) {
            return Err(Error::Config(format!(
                "single-site value {value} violates the decay bound {}",
                d.decay_bound(4)
            )));
        }
        Ok(d)
    }

    /// The SOS decoration at inverse temperature `beta`; `chi` must be small
    /// enough for the decay bound to hold on every tabulated shape.
    pub fn sos(beta: f64, chi: f64, d_max: u32, hmax: Option<i64>) -> Result<Self> {
        let mut d = Decoration::with_kind(DecorationKind::Sos { table: HashMap::new() }, beta, chi, d_max)?;
        let mut cache = FuCache::new(beta, hmax);
        let mut table = HashMap::new();
        for (shape, _) in &d.shapes {
            let n = shape.len();
            for mask in 0u32..(1 << n) {
                let u: Vec<Site> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| shape.sites()[i]).collect();
                let v = cache.fu(shape, &u)?;
                table.insert((shape.sites().to_vec(), u), v);
            }
        }
        d.kind = DecorationKind::Sos { table };
        let worst = d.max_decay_ratio();
        if worst > 1.0 {
            return Err(Error::Config(format!(
                "SOS decoration at beta={beta} exceeds e^(-chi*beta*(d+1)) by factor {worst:.3}; lower chi"
            )));
        }
        Ok(d)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, DecorationKind::Zero)
    }

    pub fn shapes(&self) -> &[(Cluster, u32)] {
        &self.shapes
    }

    pub fn decay_bound(&self, d: u32) -> f64 {
        (-self.chi * self.beta * (d as f64 + 1.0)).exp()
    }

    fn f_u(table: &HashMap<PatternKey, f64>, c: &Cluster, shift: Site, u: &[Site]) -> f64 {
        let mut key_u: Vec<Site> = u.iter().map(|&s| s + shift).collect();
        key_u.sort();
        let key = (c.sites().iter().map(|&s| s + shift).collect::<Vec<_>>(), key_u);
        *table.get(&key).expect("tabulated cluster pattern")
    }

    /// Φ(𝒞;γ) given `plus = 𝒞∩Δ⁺_γ`, `minus = 𝒞∩Δ⁻_γ` (any order).
    pub fn value(&self, c: &Cluster, d: u32, plus: &[Site], minus: &[Site]) -> f64 {
        if plus.is_empty() && minus.is_empty() {
            return 0.0;
        }
        match &self.kind {
            DecorationKind::Zero => 0.0,
            DecorationKind::SingleSite { value } => {
                if c.len() == 1 {
                    *value
                } else {
                    0.0
                }
            }
            DecorationKind::Synthetic { amplitude, seed } => {
                let (_, shift) = c.normalized();
                let mut h = mix(*seed);
                for s in c.sites() {
                    h = mix(h ^ ((s.x + shift.x) as u64) ^ (((s.y + shift.y) as u64) << 20));
                }
                let mut tag = |set: &[Site], salt: u64| {
                    let mut v: Vec<Site> = set.iter().map(|&s| s + shift).collect();
                    v.sort();
                    for s in v {
                        h = mix(h ^ salt ^ (s.x as u64) ^ ((s.y as u64) << 24));
                    }
                };
                tag(plus, 0x51);
                tag(minus, 0xa3);
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                amplitude * (2.0 * u - 1.0) * self.decay_bound(d)
            }
            DecorationKind::Sos { table } => {
                let (_, shift) = c.normalized();
                let mut v = -Self::f_u(table, c, shift, &[]);
                if minus.is_empty() {
                    v += Self::f_u(table, c, shift, plus);
                }
                if plus.is_empty() {
                    v += Self::f_u(table, c, shift, minus);
                }
                v
            }
        }
    }

    /// sup over shapes and Δ patterns of |Φ| / e^{−χβ(d+1)}.
    pub fn max_decay_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (shape, d) in &self.shapes {
            let n = shape.len();
            // Every assignment of each cell to Δ⁺, Δ⁻ or neither.
            for code in 1..3usize.pow(n as u32) {
                let (mut plus, mut minus) = (Vec::new(), Vec::new());
                let mut k = code;
                for i in 0..n {
                    match k % 3 {
                        1 => plus.push(shape.sites()[i]),
                        2 => minus.push(shape.sites()[i]),
                        _ => {}
                    }
                    k /= 3;
                }
                let v = self.value(shape, *d, &plus, &minus).abs() / self.decay_bound(*d);
                worst = worst.max(v);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Translate;

    #[test]
    fn shape_catalogue() {
        let s = shapes_up_to(10);
        // 1 monomino, 2 dominoes, 6 trominoes (all d ≤ 10); no tetromino.
        assert_eq!(s.len(), 9);
        assert!(s.iter().all(|(c, d)| c.len() <= 3 && *d <= 10));
        let tetro: Vec<u32> = shapes_up_to(11).into_iter().filter(|(c, _)| c.len() == 4).map(|(_, d)| d).collect();
        assert!(!tetro.is_empty() && tetro.iter().all(|&d| d == 11));
    }

    #[test]
    fn synthetic_is_translation_covariant_and_bounded() {
        let dec = Decoration::synthetic(1.0, 1.0, 10, 0.9, 7).unwrap();
        let c = Cluster::new(vec![Site::new(0, 0), Site::new(1, 0)]);
        let v = Site::new(5, -3);
        let a = dec.value(&c, 7, &[Site::new(0, 0)], &[]);
        let b = dec.value(&c.translate(v), 7, &[Site::new(5, -3)], &[]);
        assert_eq!(a, b);
        assert!(a.abs() <= 0.9 * dec.decay_bound(7));
        assert_eq!(dec.value(&c, 7, &[], &[]), 0.0);
        assert!(dec.max_decay_ratio() <= 0.9);
    }

    #[test]
    fn sos_single_site_values() {
        let beta: f64 = 2.0;
        let dec = Decoration::sos(beta, 0.6, 10, None).unwrap();
        let r = (-4.0 * beta).exp();
        let f0 = ((1.0 + r) / (1.0 - r)).ln();
        let f1 = (1.0 / (1.0 - r)).ln();
        let c = Cluster::new(vec![Site::new(0, 0)]);
        // Plaquette above γ only: −f₀ + f_{{v}}.
        let v = dec.value(&c, 4, &[Site::new(0, 0)], &[]);
        assert!((v - (f1 - f0)).abs() < 1e-15);
        // Clusters spanning both sides keep only −f₀.
        let c2 = Cluster::new(vec![Site::new(0, 0), Site::new(0, -1)]);
        let both = dec.value(&c2, 7, &[Site::new(0, 0)], &[Site::new(0, -1)]);
        let f0_dom = crate::sos::cluster_weight_fu(&c2, &[], beta, None).unwrap().value;
        assert!((both + f0_dom).abs() < 1e-15);
    }

    #[test]
    fn sos_rejects_large_chi() {
        assert!(Decoration::sos(2.0, 1.0, 10, None).is_err());
    }
}
