//! Multi-interval screens, Cantor prefractals, the incident plane wave, and
//! the physical-optics (geometrical optics) term.
//!
//! Screens are stored as 1D intervals on the line `x2 = 0`; 2D points appear
//! only in field evaluation, since all boundary-integral work is
//! one-dimensional. All types are immutable after construction and safe to
//! share across threads.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

/// Gap below which two adjacent intervals are rejected as (near-)touching
/// rather than silently merged; merging would change the segment count and
/// the mesh structure.
pub const GAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("screen needs at least one interval")]
    Empty,
    #[error("interval {index} is degenerate or reversed: ({lo}, {hi})")]
    BadInterval { index: usize, lo: f64, hi: f64 },
    #[error("intervals {0} and {1} overlap, touch, or are out of order")]
    Overlap(usize, usize),
    #[error("first endpoint must be 0, got {0}")]
    NonzeroOrigin(f64),
    #[error("direction vector ({0}, {1}) is not unit length")]
    NotUnit(f64, f64),
    #[error("wavenumber must be positive, got {0}")]
    BadWavenumber(f64),
    #[error("downward or grazing incidence required (d2 <= 0), got d2 = {0}")]
    UpwardIncidence(f64),
    #[error("screen text is malformed at line {0}")]
    ParseError(usize),
}

/// A sound-soft screen: `N_Gamma` sorted, pairwise disjoint open intervals
/// `(s_1, s_2), ..., (s_{2N-1}, s_{2N})` with `s_1 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Screen {
    endpoints: Vec<(f64, f64)>,
}

impl Screen {
    /// Validates and builds a screen from sorted disjoint intervals starting
    /// at 0.
    pub fn new(endpoints: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if endpoints.is_empty() {
            return Err(GeometryError::Empty);
        }
        if endpoints[0].0 != 0.0 {
            return Err(GeometryError::NonzeroOrigin(endpoints[0].0));
        }
        for (i, &(lo, hi)) in endpoints.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || hi - lo <= GAP_TOLERANCE {
                return Err(GeometryError::BadInterval { index: i, lo, hi });
            }
            if i > 0 && lo - endpoints[i - 1].1 <= GAP_TOLERANCE {
                return Err(GeometryError::Overlap(i - 1, i));
            }
        }
        Ok(Screen { endpoints })
    }

    /// Rescales so that the last endpoint (the diameter) is exactly 1.
    pub fn normalized(&self) -> Screen {
        let diam = self.diameter();
        Screen {
            endpoints: self
                .endpoints
                .iter()
                .map(|&(lo, hi)| (lo / diam, hi / diam))
                .collect(),
        }
    }

    /// The intervals `(s_{2j-1}, s_{2j})`.
    pub fn endpoints(&self) -> &[(f64, f64)] {
        &self.endpoints
    }

    /// Number of segments `N_Gamma`.
    pub fn segment_count(&self) -> usize {
        self.endpoints.len()
    }

    /// `diam Gamma = s_{2 N_Gamma}`.
    pub fn diameter(&self) -> f64 {
        self.endpoints.last().unwrap().1
    }

    /// Total length `sum_j L_j`.
    pub fn total_length(&self) -> f64 {
        self.endpoints.iter().map(|&(lo, hi)| hi - lo).sum()
    }

    /// Whether `s` lies inside one of the open intervals.
    pub fn contains(&self, s: f64) -> bool {
        self.endpoints.iter().any(|&(lo, hi)| lo < s && s < hi)
    }

    /// Plain-text serialization: one `s_lo s_hi` pair per line, 17
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(lo, hi) in &self.endpoints {
            writeln!(out, "{lo:.16e} {hi:.16e}").unwrap();
        }
        out
    }

    /// Parses the [`Screen::to_text`] format (validating as in
    /// [`Screen::new`]).
    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let mut endpoints = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let lo = it.next().and_then(|t| t.parse::<f64>().ok());
            let hi = it.next().and_then(|t| t.parse::<f64>().ok());
            match (lo, hi, it.next()) {
                (Some(lo), Some(hi), None) => endpoints.push((lo, hi)),
                _ => return Err(GeometryError::ParseError(i + 1)),
            }
        }
        Screen::new(endpoints)
    }
}

/// The level-`j` prefractal of the middle-third Cantor set: `2^j` segments of
/// length `3^(-j)`, obtained by removing the closed middle third of every
/// segment of the previous level. Level 0 is the unit interval.
pub fn cantor_prefractal(level: u32) -> Screen {
    let mut endpoints = vec![(0.0f64, 1.0f64)];
    for _ in 0..level {
        endpoints = endpoints
            .iter()
            .flat_map(|&(lo, hi)| {
                let third = (hi - lo) / 3.0;
                [(lo, lo + third), (lo + 2.0 * third, hi)]
            })
            .collect();
    }
    Screen { endpoints }
}

/// Incident plane wave `u^i(x) = exp(i k x . d)` with unit direction
/// `d = (d1, d2)`, `d2 <= 0` (downward or grazing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub k: f64,
    pub d: (f64, f64),
}

impl IncidentWave {
    pub fn new(k: f64, d: (f64, f64)) -> Result<Self, GeometryError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(GeometryError::BadWavenumber(k));
        }
        if (d.0 * d.0 + d.1 * d.1 - 1.0).abs() > 1e-14 {
            return Err(GeometryError::NotUnit(d.0, d.1));
        }
        if d.1 > 0.0 {
            return Err(GeometryError::UpwardIncidence(d.1));
        }
        Ok(IncidentWave { k, d })
    }

    /// `u^i(x) = exp(i k x . d)`; unimodular for every real point.
    pub fn eval_incident(&self, x: [f64; 2]) -> Complex64 {
        Complex64::from_polar(1.0, self.k * (x[0] * self.d.0 + x[1] * self.d.1))
    }

    /// Physical-optics term `Psi(s) = -2 i k |d2| exp(i k d1 s)` on the
    /// screen line; identically zero at grazing incidence (`d2 = 0`).
    pub fn eval_psi(&self, s: f64) -> Complex64 {
        -2.0 * Complex64::i()
            * self.k
            * self.d.1.abs()
            * Complex64::from_polar(1.0, self.k * self.d.0 * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_screen_validates() {
        let s = Screen::new(vec![(0.0, 1.0)]).unwrap();
        assert_eq!(s.segment_count(), 1);
        assert_eq!(s.diameter(), 1.0);

        let s = Screen::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]).unwrap();
        assert_eq!(s.segment_count(), 2);
        assert_eq!(s.diameter(), 1.0);

        assert!(Screen::new(vec![(0.0, 0.5), (0.4, 1.0)]).is_err());
        assert!(Screen::new(vec![]).is_err());
        assert!(Screen::new(vec![(0.1, 1.0)]).is_err());
        // Touching within the gap tolerance is rejected, not merged.
        assert!(Screen::new(vec![(0.0, 0.5), (0.5 + 1e-13, 1.0)]).is_err());
    }

    #[test]
    fn text_roundtrip_is_identity() {
        let s = cantor_prefractal(3);
        let back = Screen::from_text(&s.to_text()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn cantor_prefractal_structure() {
        assert_eq!(cantor_prefractal(0).endpoints(), &[(0.0, 1.0)]);
        assert_eq!(
            cantor_prefractal(1).endpoints(),
            &[(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)]
        );
        let c2 = cantor_prefractal(2);
        let exact = [
            (0.0, 1.0 / 9.0),
            (2.0 / 9.0, 1.0 / 3.0),
            (2.0 / 3.0, 7.0 / 9.0),
            (8.0 / 9.0, 1.0),
        ];
        for (got, want) in c2.endpoints().iter().zip(exact.iter()) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
        }

        for j in 0..=8u32 {
            let c = cantor_prefractal(j);
            assert_eq!(c.segment_count(), 1 << j);
            let len = 3.0f64.powi(-(j as i32));
            for &(lo, hi) in c.endpoints() {
                assert!((hi - lo - len).abs() < 1e-15);
            }
            let total = (2.0f64 / 3.0).powi(j as i32);
            assert!((c.total_length() - total).abs() < 1e-13);
        }
    }

    #[test]
    fn cantor_nesting() {
        for j in 0..8u32 {
            let coarse = cantor_prefractal(j);
            let fine = cantor_prefractal(j + 1);
            for &(lo, hi) in fine.endpoints() {
                assert!(
                    coarse
                        .endpoints()
                        .iter()
                        .any(|&(a, b)| a <= lo + 1e-15 && hi <= b + 1e-15),
                    "level {} segment ({lo},{hi}) not nested",
                    j + 1
                );
            }
        }
    }

    #[test]
    fn incident_wave_values() {
        let w = IncidentWave::new(std::f64::consts::PI, (0.0, -1.0)).unwrap();
        assert_eq!(w.eval_incident([0.0, 0.0]), Complex64::new(1.0, 0.0));
        // k = pi, d = (0,-1), x = (0,1): exp(-i pi) = -1.
        let v = w.eval_incident([0.0, 1.0]);
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);

        // Unimodularity at scattered points.
        let w = IncidentWave::new(7.5, (0.6, -0.8)).unwrap();
        for i in 0..100 {
            let x = [(i as f64) * 0.37 - 18.0, (i as f64) * 0.11 - 5.0];
            assert!((w.eval_incident(x).norm() - 1.0).abs() < 1e-14);
        }

        assert!(IncidentWave::new(1.0, (0.0, 1.0)).is_err());
        assert!(IncidentWave::new(-1.0, (0.0, -1.0)).is_err());
        assert!(IncidentWave::new(1.0, (0.5, -0.5)).is_err());
    }

    #[test]
    fn psi_values() {
        // Grazing: Psi identically zero.
        let g = IncidentWave::new(64.0, (1.0, 0.0)).unwrap();
        for i in 0..10 {
            assert_eq!(g.eval_psi(i as f64 * 0.1).norm(), 0.0);
        }
        // d = (0,-1), k = 1, s = 0: -2i.
        let w = IncidentWave::new(1.0, (0.0, -1.0)).unwrap();
        assert!((w.eval_psi(0.0) - Complex64::new(0.0, -2.0)).norm() < 1e-15);
        // |Psi| = 2 k |d2| everywhere.
        let w = IncidentWave::new(3.0, (0.6, -0.8)).unwrap();
        for i in 0..20 {
            let s = i as f64 * 0.05;
            assert!((w.eval_psi(s).norm() - 2.0 * 3.0 * 0.8).abs() < 1e-13);
        }
    }
}
