//! Banded correlation `out_i = Σ_p band_p · input_{i+p}`, summed directly for
//! narrow bands and through zero-padded FFTs for wide ones.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Bands up to this width are always summed directly.
const DIRECT_MAX_BAND: usize = 64;

struct Spectrum {
    size: usize,
    kernel: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Correlates inputs against a fixed band of weights.
pub struct BandCorrelator {
    band: Vec<f64>,
    spectra: Mutex<HashMap<usize, Arc<Spectrum>>>,
}

impl std::fmt::Debug for BandCorrelator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BandCorrelator")
            .field("width", &self.band.len())
            .finish()
    }
}

impl Clone for BandCorrelator {
    fn clone(&self) -> Self {
        Self::new(self.band.clone())
    }
}

impl BandCorrelator {
    pub fn new(band: Vec<f64>) -> Self {
        assert!(!band.is_empty(), "empty correlation band");
        Self {
            band,
            spectra: Mutex::new(HashMap::new()),
        }
    }

    pub fn band(&self) -> &[f64] {
        &self.band
    }

    /// Output has `input.len() − band.len() + 1` entries.
    pub fn correlate(&self, input: &[f64]) -> Vec<f64> {
        let width = self.band.len();
        assert!(input.len() >= width, "input shorter than the band");
        let out_len = input.len() - width + 1;
        let size = input.len().next_power_of_two();
        let fft_cost = 4.0 * size as f64 * (size as f64).log2();
        if width <= DIRECT_MAX_BAND || ((out_len * width) as f64) < fft_cost {
            correlate_direct(&self.band, input)
        } else {
            self.correlate_fft(input, size)
        }
    }

    fn spectrum(&self, size: usize) -> Arc<Spectrum> {
        let mut cache = self.spectra.lock().expect("spectrum cache poisoned");
        cache
            .entry(size)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(size);
                let inverse = planner.plan_fft_inverse(size);
                let last = self.band.len() - 1;
                let mut kernel = vec![Complex::new(0.0, 0.0); size];
                for (i, slot) in kernel.iter_mut().take(self.band.len()).enumerate() {
                    *slot = Complex::new(self.band[last - i], 0.0);
                }
                forward.process(&mut kernel);
                Arc::new(Spectrum {
                    size,
                    kernel,
                    forward,
                    inverse,
                })
            })
            .clone()
    }

    pub fn correlate_fft(&self, input: &[f64], size: usize) -> Vec<f64> {
        let spec = self.spectrum(size);
        let last = self.band.len() - 1;
        let out_len = input.len() - last;
        let mut buf = vec![Complex::new(0.0, 0.0); spec.size];
        for (b, &x) in buf.iter_mut().zip(input) {
            b.re = x;
        }
        spec.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&spec.kernel) {
            *b *= *k;
        }
        spec.inverse.process(&mut buf);
        let scale = 1.0 / spec.size as f64;
        buf[last..last + out_len].iter().map(|c| c.re * scale).collect()
    }
}

/// Reference implementation of the banded correlation.
pub fn correlate_direct(band: &[f64], input: &[f64]) -> Vec<f64> {
    let width = band.len();
    (0..=input.len() - width)
        .map(|i| band.iter().zip(&input[i..i + width]).map(|(w, x)| w * x).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_small_case() {
        let out = correlate_direct(&[0.25, 0.5, 0.25], &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(out, vec![2.0, 3.0, 4.0]);
    }

    proptest! {
        #[test]
        fn fft_matches_direct(
            band in prop::collection::vec(0.0f64..1.0, 65..300),
            extra in 1usize..400,
            seed in 0u64..1000,
        ) {
            let n = band.len() + extra;
            let input: Vec<f64> = (0..n)
                .map(|i| (i as f64 * 0.37 + seed as f64).sin() + 1.5)
                .collect();
            let c = BandCorrelator::new(band.clone());
            let fast = c.correlate_fft(&input, n.next_power_of_two());
            let slow = correlate_direct(&band, &input);
            prop_assert_eq!(fast.len(), slow.len());
            let scale: f64 = band.iter().sum::<f64>() * 2.5;
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }
}
