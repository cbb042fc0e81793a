//! Peak statistics of `|ψ|`: local maxima, significant amplitude, rogue
//! classification, comparison against the scaled second-order rational
//! soliton, and amplitude histograms.
//!
//! Neighbourhoods are periodic, matching the grid, so every detector here is
//! covariant under cyclic shifts of the field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{RationalOrder2, Solution, WaveField};

/// Peak modulus of the unscaled second-order rational soliton.
pub const RATIONAL_ORDER2_PEAK: f64 = 5.0;

pub const DEFAULT_THRESHOLD_FACTOR: f64 = 2.0;
/// Upper end of the conventional rogue band `[2, 2.2]`.
pub const UPPER_THRESHOLD_FACTOR: f64 = 2.2;
pub const THRESHOLD_RANGE: (f64, f64) = (1.5, 3.0);

/// Comparison window for a peak of amplitude `5b`: `1.5 / b`.
pub fn default_window_halfwidth(b_factor: f64) -> f64 {
    1.5 / b_factor
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakRecord {
    pub position_x: f64,
    pub amplitude: f64,
    pub snapshot_time: f64,
    pub index: usize,
}

/// Indices of strict local maxima of `a`, with periodic neighbours.
fn local_maxima(a: &[f64]) -> Vec<usize> {
    let n = a.len();
    if n < 3 {
        return Vec::new();
    }
    (0..n)
        .filter(|&j| {
            let left = a[(j + n - 1) % n];
            let right = a[(j + 1) % n];
            a[j] > left && a[j] > right
        })
        .collect()
}

fn periodic_index_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// Strict local maxima of `|ψ|` above the mean modulus, thinned greedily so
/// that retained peaks are at least `min_separation` apart, sorted by
/// descending amplitude.
pub fn find_peaks(field: &WaveField, min_separation: f64) -> Result<Vec<PeakRecord>> {
    let grid = field.grid();
    let dx = grid.dx();
    if !(min_separation >= dx * (1.0 - 1e-9)) {
        return Err(Error::Parameter(format!(
            "min_separation must be at least dx = {dx}, got {min_separation}"
        )));
    }
    let a = field.modulus();
    let n = a.len();
    let mean = a.iter().sum::<f64>() / n as f64;
    let mut candidates: Vec<usize> = local_maxima(&a)
        .into_iter()
        .filter(|&j| a[j] > mean)
        .collect();
    candidates.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j)));

    let mut kept: Vec<usize> = Vec::new();
    for j in candidates {
        let clear = kept
            .iter()
            .all(|&k| periodic_index_distance(j, k, n) as f64 * dx >= min_separation);
        if clear {
            kept.push(j);
        }
    }
    Ok(kept
        .into_iter()
        .map(|j| PeakRecord {
            position_x: grid.x()[j],
            amplitude: a[j],
            snapshot_time: field.time(),
            index: j,
        })
        .collect())
}

/// Mean of the highest third (`ceil(n/3)`) of the local-maximum amplitudes.
/// Fields with fewer than three maxima fall back to `√2 · rms(|ψ|)`.
pub fn significant_amplitude(field: &WaveField) -> Result<f64> {
    let a = field.modulus();
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("field is identically zero".into()));
    }
    let mut maxima: Vec<f64> = local_maxima(&a).into_iter().map(|j| a[j]).collect();
    if maxima.len() >= 3 {
        maxima.sort_by(|x, y| y.total_cmp(x));
        let top = maxima.len().div_ceil(3);
        Ok(maxima[..top].iter().sum::<f64>() / top as f64)
    } else {
        let ms = a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64;
        Ok((2.0 * ms).sqrt())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RogueReport {
    pub significant_amplitude: f64,
    pub threshold_factor: f64,
    pub peaks: Vec<PeakRecord>,
    pub rogue_peaks: Vec<PeakRecord>,
    pub match_scores: Vec<(PeakRecord, ProfileMatch)>,
}

impl RogueReport {
    pub fn threshold(&self) -> f64 {
        self.threshold_factor * self.significant_amplitude
    }

    pub fn is_rogue(&self, peak: &PeakRecord) -> bool {
        peak.amplitude >= self.threshold()
    }

    /// Match every rogue peak against the scaled second-order soliton.
    /// Peaks whose window would leave the grid are skipped.
    pub fn score_rogues(&mut self, field: &WaveField, window_halfwidth: Option<f64>) -> Result<()> {
        self.match_scores.clear();
        for peak in &self.rogue_peaks {
            let hw = window_halfwidth
                .unwrap_or_else(|| default_window_halfwidth(peak.amplitude / RATIONAL_ORDER2_PEAK));
            match match_rational_profile(field, peak, hw) {
                Ok(m) => self.match_scores.push((*peak, m)),
                Err(Error::Dimension(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

/// Find peaks and flag those at least `threshold_factor` times the
/// significant amplitude.
pub fn classify_rogues(
    field: &WaveField,
    threshold_factor: f64,
    min_separation: f64,
) -> Result<RogueReport> {
    let (lo, hi) = THRESHOLD_RANGE;
    if !(lo..=hi).contains(&threshold_factor) {
        return Err(Error::Parameter(format!(
            "threshold factor must lie in [{lo}, {hi}], got {threshold_factor}"
        )));
    }
    let peaks = find_peaks(field, min_separation)?;
    if peaks.is_empty() {
        return Err(Error::Degenerate("no peaks".into()));
    }
    let significant = significant_amplitude(field)?;
    let rogue_peaks = peaks
        .iter()
        .filter(|p| p.amplitude >= threshold_factor * significant)
        .copied()
        .collect();
    Ok(RogueReport {
        significant_amplitude: significant,
        threshold_factor,
        peaks,
        rogue_peaks,
        match_scores: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileMatch {
    /// `peak amplitude / 5`.
    pub b_factor: f64,
    /// `‖|ψ_num| − |ψ_ref|‖₂ / ‖|ψ_ref|‖₂` over the window.
    pub window_error: f64,
    pub window_halfwidth: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
    #[serde(skip)]
    pub numerical: Vec<f64>,
    #[serde(skip)]
    pub reference: Vec<f64>,
}

/// Compare `|ψ|` around `peak` with `|B ψ̃₂(B(x − x_peak), 0)|`,
/// `B = amplitude / 5`, on `|x − x_peak| ≤ window_halfwidth`.
pub fn match_rational_profile(
    field: &WaveField,
    peak: &PeakRecord,
    window_halfwidth: f64,
) -> Result<ProfileMatch> {
    if !(window_halfwidth > 0.0) || !window_halfwidth.is_finite() {
        return Err(Error::Parameter(format!(
            "window halfwidth must be positive, got {window_halfwidth}"
        )));
    }
    let grid = field.grid();
    if peak.index >= grid.n_points() {
        return Err(Error::Dimension(format!(
            "peak index {} outside grid",
            peak.index
        )));
    }
    let x_peak = grid.x()[peak.index];
    let last_x = grid.x()[grid.n_points() - 1];
    if x_peak - window_halfwidth < grid.x_min() || x_peak + window_halfwidth > last_x {
        return Err(Error::Dimension(format!(
            "comparison window [{}, {}] leaves the grid [{}, {}]",
            x_peak - window_halfwidth,
            x_peak + window_halfwidth,
            grid.x_min(),
            last_x
        )));
    }
    let b = peak.amplitude / RATIONAL_ORDER2_PEAK;
    if !(b > 0.0) {
        return Err(Error::Degenerate("peak amplitude is zero".into()));
    }

    let dx = grid.dx();
    let reach = (window_halfwidth / dx + 1e-9).floor() as usize;
    let lo = peak.index - reach;
    let hi = peak.index + reach;
    let values = field.values();

    let mut x = Vec::with_capacity(hi - lo + 1);
    let mut numerical = Vec::with_capacity(hi - lo + 1);
    let mut reference = Vec::with_capacity(hi - lo + 1);
    let (mut diff_sq, mut ref_sq) = (0.0, 0.0);
    for (j, v) in values.iter().enumerate().take(hi + 1).skip(lo) {
        let offset = (j as f64 - peak.index as f64) * dx;
        let num = v.norm();
        let r = b * RationalOrder2.eval(b * offset, 0.0).norm();
        diff_sq += (num - r) * (num - r);
        ref_sq += r * r;
        x.push(grid.x()[j]);
        numerical.push(num);
        reference.push(r);
    }
    Ok(ProfileMatch {
        b_factor: b,
        window_error: (diff_sq / ref_sq).sqrt(),
        window_halfwidth,
        x,
        numerical,
        reference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `n_bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn with_range(n_bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::Parameter("histogram needs at least one bin".into()));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!(
                "invalid histogram range [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / n_bins as f64;
        let edges = (0..=n_bins).map(|i| lo + i as f64 * width).collect();
        Ok(Histogram {
            edges,
            counts: vec![0; n_bins],
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Add a sample; values outside the range go to the edge bins.
    pub fn add(&mut self, value: f64) {
        let lo = self.edges[0];
        let hi = self.edges[self.n_bins()];
        let pos = (value - lo) / (hi - lo) * self.n_bins() as f64;
        let bin = if pos.is_nan() || pos < 0.0 {
            0
        } else {
            (pos as usize).min(self.n_bins() - 1)
        };
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Counts normalized to a probability density.
    pub fn density(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| {
                if total > 0.0 {
                    c as f64 / (total * (w[1] - w[0]))
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::Dimension("histogram bin edges differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

/// Histogram of `|ψ|` pooled over the snapshots with `time ≥ burn_in`.
/// `range` defaults to `[0, max |ψ|]`.
pub fn amplitude_histogram(
    snapshots: &[WaveField],
    n_bins: usize,
    range: Option<(f64, f64)>,
    burn_in: f64,
) -> Result<Histogram> {
    let used: Vec<&WaveField> = snapshots.iter().filter(|s| s.time() >= burn_in).collect();
    if used.is_empty() {
        return Err(Error::Parameter("no snapshots after burn-in".into()));
    }
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let max = used.iter().map(|s| s.max_modulus()).fold(0.0, f64::max);
            (0.0, if max > 0.0 { max } else { 1.0 })
        }
    };
    let mut hist = Histogram::with_range(n_bins, lo, hi)?;
    for snap in used {
        for v in snap.values() {
            hist.add(v.norm());
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{peregrine, rational_order2, scale_solution, Solution};
    use crate::grid::Grid;
    use crate::C64;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::default_domain())
    }

    fn real_field(g: &Arc<Grid>, f: impl Fn(f64) -> f64) -> WaveField {
        WaveField::from_fn(g.clone(), 0.0, |x| C64::new(f(x), 0.0)).unwrap()
    }

    #[test]
    fn constant_field_has_no_peaks() {
        let g = grid();
        let f = real_field(&g, |_| 1.0);
        assert!(find_peaks(&f, 1.0).unwrap().is_empty());
        assert!(matches!(
            classify_rogues(&f, 2.0, 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn peregrine_top_peak() {
        let g = grid();
        let peaks = find_peaks(&peregrine(&g, 0.0).unwrap(), 0.5).unwrap();
        assert_eq!(peaks[0].position_x, 0.0);
        assert!((peaks[0].amplitude - 3.0).abs() < 1e-6);
    }

    #[test]
    fn two_gaussians() {
        let g = grid();
        let f = real_field(&g, |x| {
            2.0 * (-(x + 5.0).powi(2)).exp() + (-(x - 5.0).powi(2)).exp()
        });
        let peaks = find_peaks(&f, 1.0).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].amplitude - 2.0).abs() < 1e-3);
        assert!((peaks[1].amplitude - 1.0).abs() < 1e-3);
        assert!((peaks[0].position_x + 5.0).abs() < g.dx());
    }

    #[test]
    fn thinning_keeps_higher() {
        let g = grid();
        let f = real_field(&g, |x| {
            2.0 * (-(x * 4.0).powi(2)).exp() + 1.5 * (-((x - 1.0) * 4.0).powi(2)).exp()
        });
        assert_eq!(find_peaks(&f, 0.5).unwrap().len(), 2);
        let thinned = find_peaks(&f, 2.0).unwrap();
        assert_eq!(thinned.len(), 1);
        assert!(thinned[0].position_x.abs() < 0.1);
    }

    #[test]
    fn min_separation_below_dx() {
        let g = grid();
        assert!(matches!(
            find_peaks(&real_field(&g, |x| x.sin()), g.dx() / 2.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn significant_amplitude_cases() {
        let g = Arc::new(Grid::new(16, 0.0, 16.0).unwrap());
        let ones = real_field(&g, |x| if (x as usize) % 4 == 1 { 1.0 } else { 0.5 });
        assert_eq!(significant_amplitude(&ones).unwrap(), 1.0);

        let three = real_field(&g, |x| match x as usize {
            2 => 3.0,
            7 => 2.0,
            12 => 1.0,
            _ => 0.1,
        });
        assert_eq!(significant_amplitude(&three).unwrap(), 3.0);

        let zero = WaveField::zeros(g, 0.0);
        assert!(matches!(
            significant_amplitude(&zero),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn peregrine_on_rippled_background_is_rogue() {
        let g = grid();
        let f = WaveField::from_fn(g.clone(), 0.0, |x| {
            crate::field::Peregrine.eval(x, 0.0) * (1.0 + 0.05 * (2.0 * x).cos())
        })
        .unwrap();
        let report = classify_rogues(&f, 2.0, 1.0).unwrap();
        assert!(report.significant_amplitude < 1.5);
        assert_eq!(report.rogue_peaks.len(), 1);
        assert_eq!(report.rogue_peaks[0].position_x, 0.0);
    }

    #[test]
    fn threshold_guard() {
        let g = grid();
        let f = peregrine(&g, 0.0).unwrap();
        assert!(matches!(
            classify_rogues(&f, 5.0, 1.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            classify_rogues(&f, 1.0, 1.0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn self_match_order2() {
        let g = grid();
        let f = rational_order2(&g, 0.0).unwrap();
        let peak = find_peaks(&f, 1.0).unwrap()[0];
        let m = match_rational_profile(&f, &peak, 1.5).unwrap();
        assert!((m.b_factor - 1.0).abs() < 1e-12);
        assert!(m.window_error < 1e-10);
    }

    #[test]
    fn self_match_scaled() {
        let g = grid();
        let f = scale_solution(crate::field::RationalOrder2, 0.76)
            .unwrap()
            .sample(&g, 0.0)
            .unwrap();
        let peak = find_peaks(&f, 1.0).unwrap()[0];
        let m = match_rational_profile(&f, &peak, default_window_halfwidth(0.76)).unwrap();
        assert!((m.b_factor - 0.76).abs() < 1e-6);
        assert!(m.window_error < 1e-10);
    }

    #[test]
    fn window_out_of_bounds() {
        let g = grid();
        let f = rational_order2(&g, 0.0).unwrap();
        let peak = PeakRecord {
            position_x: g.x()[3],
            amplitude: 5.0,
            snapshot_time: 0.0,
            index: 3,
        };
        assert!(matches!(
            match_rational_profile(&f, &peak, 1.5),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn histogram_cases() {
        let g = Arc::new(Grid::new(64, 0.0, 1.0).unwrap());
        let unit = real_field(&g, |_| 1.0);
        let h = amplitude_histogram(std::slice::from_ref(&unit), 2, Some((0.0, 2.0)), 0.0).unwrap();
        assert_eq!(h.counts, vec![0, 64]);

        let mut snaps = Vec::new();
        for i in 0..5 {
            let mut s = real_field(&g, |x| (x * 7.0 + i as f64).sin().abs());
            s.set_time(i as f64);
            snaps.push(s);
        }
        let h = amplitude_histogram(&snaps, 10, None, 2.0).unwrap();
        assert_eq!(h.total(), 64 * 3);
        assert!(amplitude_histogram(&snaps, 10, None, 10.0).is_err());
        assert!(amplitude_histogram(&[], 10, None, 0.0).is_err());
    }

    fn random_field(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..5.0, n)
    }

    proptest! {
        #[test]
        fn peaks_translation_covariant(a in random_field(256), shift in 0usize..256) {
            let g = Arc::new(Grid::new(256, -10.0, 20.0).unwrap());
            let f = WaveField::new(g.clone(), a.iter().map(|&v| C64::new(v, 0.0)).collect(), 0.0).unwrap();
            let shifted: Vec<C64> = (0..256).map(|j| C64::new(a[(j + 256 - shift) % 256], 0.0)).collect();
            let fs = WaveField::new(g.clone(), shifted, 0.0).unwrap();
            let p = find_peaks(&f, 0.3).unwrap();
            let ps = find_peaks(&fs, 0.3).unwrap();
            prop_assert_eq!(p.len(), ps.len());
            for (u, v) in p.iter().zip(&ps) {
                prop_assert_eq!((u.index + shift) % 256, v.index);
                prop_assert_eq!(u.amplitude, v.amplitude);
            }
        }

        #[test]
        fn rogue_classification_scale_equivariant(a in random_field(128), c in 0.1f64..10.0) {
            let g = Arc::new(Grid::new(128, 0.0, 12.8).unwrap());
            let f = WaveField::new(g.clone(), a.iter().map(|&v| C64::new(v, 0.0)).collect(), 0.0).unwrap();
            let fc = WaveField::new(g.clone(), a.iter().map(|&v| C64::new(c * v, 0.0)).collect(), 0.0).unwrap();
            let (r, rc) = match (classify_rogues(&f, 2.0, 0.2), classify_rogues(&fc, 2.0, 0.2)) {
                (Ok(r), Ok(rc)) => (r, rc),
                _ => return Ok(()),
            };
            prop_assert!((rc.significant_amplitude - c * r.significant_amplitude).abs()
                <= 1e-12 * rc.significant_amplitude);
            let flags: Vec<usize> = r.rogue_peaks.iter().map(|p| p.index).collect();
            let flags_c: Vec<usize> = rc.rogue_peaks.iter().map(|p| p.index).collect();
            // Exact ties with the threshold are the only allowed difference.
            if flags != flags_c {
                for p in &r.peaks {
                    let ratio = p.amplitude / (2.0 * r.significant_amplitude);
                    prop_assert!(flags.contains(&p.index) == flags_c.contains(&p.index) || (ratio - 1.0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn histogram_conserves_samples(a in prop::collection::vec(0.0f64..3.0, 64), bins in 1usize..40) {
            let g = Arc::new(Grid::new(64, 0.0, 1.0).unwrap());
            let f = WaveField::new(g, a.iter().map(|&v| C64::new(v, 0.0)).collect(), 0.0).unwrap();
            let h = amplitude_histogram(&[f.clone(), f], bins, None, 0.0).unwrap();
            prop_assert_eq!(h.total(), 128);
        }
    }
}
