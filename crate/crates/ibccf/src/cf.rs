//! Closed-form training and detection for the 2D center filter and the 1D
//! boundary filters.
//!
//! Training solves ridge regression over all circular shifts of the sample in
//! the frequency domain. The stored coefficient array is the conjugated
//! template spectrum, so detection is a plain elementwise product with the
//! patch spectrum: that makes the response the circular correlation with the
//! spatial template, the peak of the response sits at the label peak on the
//! training sample, and a circular shift of the input moves the peak by
//! exactly that shift.
//!
//! Numerator and denominator of the training quotient are cached separately
//! so models can be updated by linear interpolation of the caches.

use crate::error::{IbccfError, Result};
use crate::features::FeatureMap;
use crate::fft;
use crate::geometry::{Label1D, Label2D, Side};
use ndarray::{Array1, Array2, Array3, Axis};
use num_complex::Complex64;

/// 2D filter over multi-channel features, frequency domain.
#[derive(Debug, Clone)]
pub struct CenterFilter {
    /// Per-channel coefficients `(channels, rows, cols)`.
    pub coeffs: Array3<Complex64>,
    pub numerator: Array3<Complex64>,
    /// Shared across channels; real part is at least `lambda` everywhere.
    pub denominator: Array2<Complex64>,
    pub lambda: f64,
}

/// 1D filter bank for one boundary. The rows of the 2D boundary region (and
/// every feature channel of each row) are separate 1D channels sharing one
/// denominator.
#[derive(Debug, Clone)]
pub struct BoundaryFilter {
    pub side: Side,
    /// Flattened `(feature_channels * rows_per_channel, len)`; row `c * rows_per_channel + r`
    /// holds feature channel `c`, spatial row `r`.
    pub coeffs: Array2<Complex64>,
    pub numerator: Array2<Complex64>,
    pub denominator: Array1<Complex64>,
    pub lambda: f64,
    pub feature_channels: usize,
    pub rows_per_channel: usize,
}

/// Detection output of the 2D filter. `displacement` is the peak offset from
/// the label peak, circularly unwrapped into `(-dims/2, dims/2]`.
#[derive(Debug, Clone)]
pub struct Response2 {
    pub values: Array2<f64>,
    pub peak: (usize, usize),
    pub peak_value: f64,
    pub displacement: (i64, i64),
}

/// Detection output of a 1D filter bank.
#[derive(Debug, Clone)]
pub struct Response1 {
    pub values: Array1<f64>,
    pub peak: usize,
    pub peak_value: f64,
    pub displacement: i64,
}

pub(crate) fn wrap_displacement(delta: i64, n: usize) -> i64 {
    let n = n as i64;
    let mut d = delta % n;
    if d < 0 {
        d += n;
    }
    if d > n / 2 {
        d - n
    } else {
        d
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(IbccfError::InvalidParameter {
            name: "lambda",
            why: format!("must be finite and non-negative, got {lambda}"),
        });
    }
    Ok(())
}

pub fn train_center_filter(x: &FeatureMap, y: &Label2D, lambda: f64) -> Result<CenterFilter> {
    check_lambda(lambda)?;
    x.validate()?;
    let (ch, rows, cols) = x.data.dim();
    if y.values.dim() != (rows, cols) {
        return Err(IbccfError::ShapeMismatch(format!(
            "features {rows}x{cols} vs label {:?}",
            y.values.dim()
        )));
    }
    let xf = fft::fft2_stack(&x.data);
    let yf = fft::fft2(&y.values);
    let mut denominator = Array2::from_elem((rows, cols), Complex64::new(lambda, 0.0));
    for c in 0..ch {
        for r in 0..rows {
            for k in 0..cols {
                denominator[(r, k)] += Complex64::new(xf[(c, r, k)].norm_sqr(), 0.0);
            }
        }
    }
    let mut numerator = Array3::from_elem((ch, rows, cols), Complex64::ZERO);
    let mut coeffs = numerator.clone();
    for c in 0..ch {
        for r in 0..rows {
            for k in 0..cols {
                let num = xf[(c, r, k)].conj() * yf[(r, k)];
                numerator[(c, r, k)] = num;
                coeffs[(c, r, k)] = num / denominator[(r, k)];
            }
        }
    }
    Ok(CenterFilter { coeffs, numerator, denominator, lambda })
}

/// Rebuilds a filter around an externally computed spatial solution, keeping
/// the cache convention intact: the numerator is chosen so the cached
/// quotient reproduces the given filter against the standard denominator.
pub fn center_filter_from_spatial(
    w: &Array3<f64>,
    denominator: &Array2<Complex64>,
    lambda: f64,
) -> CenterFilter {
    let coeffs = fft::fft2_stack(w);
    let (ch, rows, cols) = coeffs.dim();
    let mut numerator = Array3::from_elem((ch, rows, cols), Complex64::ZERO);
    for c in 0..ch {
        for r in 0..rows {
            for k in 0..cols {
                numerator[(c, r, k)] = coeffs[(c, r, k)] * denominator[(r, k)];
            }
        }
    }
    CenterFilter { coeffs, numerator, denominator: denominator.clone(), lambda }
}

impl CenterFilter {
    pub fn channels(&self) -> usize {
        self.coeffs.dim().0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.coeffs.dim().1, self.coeffs.dim().2)
    }

    /// Spatial-domain filter taps, one plane per channel.
    pub fn spatial(&self) -> Array3<f64> {
        let (ch, rows, cols) = self.coeffs.dim();
        let mut out = Array3::zeros((ch, rows, cols));
        for c in 0..ch {
            let plane = fft::ifft2(&self.coeffs.index_axis(Axis(0), c).to_owned());
            out.index_axis_mut(Axis(0), c).assign(&fft::real2(&plane));
        }
        out
    }

    /// Interpolates the numerator and denominator caches toward `fresh` with
    /// rate `eta` and recomputes the coefficients as their quotient.
    pub fn update(&mut self, fresh: &CenterFilter, eta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(IbccfError::InvalidParameter {
                name: "eta",
                why: format!("must lie in [0, 1], got {eta}"),
            });
        }
        if self.coeffs.dim() != fresh.coeffs.dim() {
            return Err(IbccfError::ShapeMismatch(format!(
                "filter {:?} vs fresh {:?}",
                self.coeffs.dim(),
                fresh.coeffs.dim()
            )));
        }
        let keep = 1.0 - eta;
        ndarray::Zip::from(&mut self.numerator)
            .and(&fresh.numerator)
            .for_each(|a, &b| *a = *a * keep + b * eta);
        ndarray::Zip::from(&mut self.denominator)
            .and(&fresh.denominator)
            .for_each(|a, &b| *a = *a * keep + b * eta);
        let (ch, rows, cols) = self.coeffs.dim();
        for c in 0..ch {
            for r in 0..rows {
                for k in 0..cols {
                    self.coeffs[(c, r, k)] = self.numerator[(c, r, k)] / self.denominator[(r, k)];
                }
            }
        }
        Ok(())
    }
}

pub fn detect_center(filter: &CenterFilter, z: &FeatureMap) -> Result<Response2> {
    z.validate()?;
    let (ch, rows, cols) = filter.coeffs.dim();
    if z.data.dim() != (ch, rows, cols) {
        return Err(IbccfError::ShapeMismatch(format!(
            "filter {:?} vs features {:?}",
            filter.coeffs.dim(),
            z.data.dim()
        )));
    }
    let zf = fft::fft2_stack(&z.data);
    let mut rf = Array2::from_elem((rows, cols), Complex64::ZERO);
    for c in 0..ch {
        let wgt = z.weights[c];
        for r in 0..rows {
            for k in 0..cols {
                rf[(r, k)] += filter.coeffs[(c, r, k)] * zf[(c, r, k)] * wgt;
            }
        }
    }
    let values = fft::real2(&fft::ifft2(&rf));
    if values.iter().any(|v| !v.is_finite()) {
        return Err(IbccfError::NumericalFailure {
            iteration: 0,
            what: "non-finite detection response".into(),
        });
    }
    let mut peak = (0usize, 0usize);
    let mut peak_value = f64::NEG_INFINITY;
    for ((r, c), &v) in values.indexed_iter() {
        if v > peak_value {
            peak_value = v;
            peak = (r, c);
        }
    }
    let label_peak = (rows / 2, cols / 2);
    let displacement = (
        wrap_displacement(peak.0 as i64 - label_peak.0 as i64, rows),
        wrap_displacement(peak.1 as i64 - label_peak.1 as i64, cols),
    );
    Ok(Response2 { values, peak, peak_value, displacement })
}

/// Flattens `(channels, rows, cols)` boundary features into the
/// `(channels * rows, cols)` bank layout used by `BoundaryFilter`.
pub(crate) fn flatten_boundary(x: &FeatureMap) -> Array2<f64> {
    let (ch, rows, cols) = x.data.dim();
    let mut out = Array2::zeros((ch * rows, cols));
    for c in 0..ch {
        for r in 0..rows {
            for k in 0..cols {
                out[(c * rows + r, k)] = x.data[(c, r, k)];
            }
        }
    }
    out
}

pub fn train_boundary_filter(
    x: &FeatureMap,
    y: &Label1D,
    lambda: f64,
    side: Side,
) -> Result<BoundaryFilter> {
    check_lambda(lambda)?;
    x.validate()?;
    let (ch, rows, cols) = x.data.dim();
    if y.values.len() != cols {
        return Err(IbccfError::ShapeMismatch(format!(
            "boundary features length {cols} vs label length {}",
            y.values.len()
        )));
    }
    let flat = flatten_boundary(x);
    let xf = fft::fft_rows(&flat);
    let yf = fft::fft1(&y.values);
    let mut denominator = Array1::from_elem(cols, Complex64::new(lambda, 0.0));
    for row in xf.rows() {
        for (k, v) in row.iter().enumerate() {
            denominator[k] += Complex64::new(v.norm_sqr(), 0.0);
        }
    }
    let bank = ch * rows;
    let mut numerator = Array2::from_elem((bank, cols), Complex64::ZERO);
    let mut coeffs = numerator.clone();
    for j in 0..bank {
        for k in 0..cols {
            let num = xf[(j, k)].conj() * yf[k];
            numerator[(j, k)] = num;
            coeffs[(j, k)] = num / denominator[k];
        }
    }
    Ok(BoundaryFilter {
        side,
        coeffs,
        numerator,
        denominator,
        lambda,
        feature_channels: ch,
        rows_per_channel: rows,
    })
}

/// Counterpart of [`center_filter_from_spatial`] for a boundary bank.
pub fn boundary_filter_from_spatial(
    w: &Array2<f64>,
    denominator: &Array1<Complex64>,
    lambda: f64,
    side: Side,
    feature_channels: usize,
    rows_per_channel: usize,
) -> BoundaryFilter {
    let coeffs = fft::fft_rows(w);
    let (bank, cols) = coeffs.dim();
    let mut numerator = Array2::from_elem((bank, cols), Complex64::ZERO);
    for j in 0..bank {
        for k in 0..cols {
            numerator[(j, k)] = coeffs[(j, k)] * denominator[k];
        }
    }
    BoundaryFilter {
        side,
        coeffs,
        numerator,
        denominator: denominator.clone(),
        lambda,
        feature_channels,
        rows_per_channel,
    }
}

impl BoundaryFilter {
    pub fn len(&self) -> usize {
        self.coeffs.dim().1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bank_size(&self) -> usize {
        self.coeffs.dim().0
    }

    pub fn spatial(&self) -> Array2<f64> {
        let inv = fft::ifft_rows(&self.coeffs);
        inv.mapv(|v| v.re)
    }

    pub fn update(&mut self, fresh: &BoundaryFilter, eta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(IbccfError::InvalidParameter {
                name: "eta",
                why: format!("must lie in [0, 1], got {eta}"),
            });
        }
        if self.coeffs.dim() != fresh.coeffs.dim() {
            return Err(IbccfError::ShapeMismatch(format!(
                "filter {:?} vs fresh {:?}",
                self.coeffs.dim(),
                fresh.coeffs.dim()
            )));
        }
        let keep = 1.0 - eta;
        ndarray::Zip::from(&mut self.numerator)
            .and(&fresh.numerator)
            .for_each(|a, &b| *a = *a * keep + b * eta);
        ndarray::Zip::from(&mut self.denominator)
            .and(&fresh.denominator)
            .for_each(|a, &b| *a = *a * keep + b * eta);
        let (bank, cols) = self.coeffs.dim();
        for j in 0..bank {
            for k in 0..cols {
                self.coeffs[(j, k)] = self.numerator[(j, k)] / self.denominator[k];
            }
        }
        Ok(())
    }
}

pub fn detect_boundary(filter: &BoundaryFilter, z: &FeatureMap) -> Result<Response1> {
    z.validate()?;
    let (ch, rows, cols) = z.data.dim();
    if ch != filter.feature_channels
        || rows != filter.rows_per_channel
        || cols != filter.len()
    {
        return Err(IbccfError::ShapeMismatch(format!(
            "boundary filter ({}, {}, {}) vs features ({ch}, {rows}, {cols})",
            filter.feature_channels,
            filter.rows_per_channel,
            filter.len()
        )));
    }
    let flat = flatten_boundary(z);
    let zf = fft::fft_rows(&flat);
    let mut rf = Array1::from_elem(cols, Complex64::ZERO);
    for c in 0..ch {
        let wgt = z.weights[c];
        for r in 0..rows {
            let j = c * rows + r;
            for k in 0..cols {
                rf[k] += filter.coeffs[(j, k)] * zf[(j, k)] * wgt;
            }
        }
    }
    let inv = fft::ifft1(&rf);
    let values = Array1::from_shape_fn(cols, |k| inv[k].re);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(IbccfError::NumericalFailure {
            iteration: 0,
            what: "non-finite detection response".into(),
        });
    }
    let mut peak = 0usize;
    let mut peak_value = f64::NEG_INFINITY;
    for (k, &v) in values.iter().enumerate() {
        if v > peak_value {
            peak_value = v;
            peak = k;
        }
    }
    let displacement = wrap_displacement(peak as i64 - (cols / 2) as i64, cols);
    Ok(Response1 { values, peak, peak_value, displacement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{gaussian_label_1d, gaussian_label_2d};
    use crate::oracle;
    use approx::assert_abs_diff_eq;
    use ndarray::Array3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(seed: u64, ch: usize, rows: usize, cols: usize) -> FeatureMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = Array3::from_shape_fn((ch, rows, cols), |_| rng.gen_range(-1.0..1.0));
        FeatureMap::new(data, 1)
    }

    #[test]
    fn impulse_input_reproduces_label_exactly() {
        let mut data = Array3::zeros((1, 8, 8));
        data[(0, 0, 0)] = 1.0;
        let x = FeatureMap::new(data, 1);
        let y = gaussian_label_2d(8, 8, 1.5).unwrap();
        let f = train_center_filter(&x, &y, 0.0).unwrap();
        let w = f.spatial();
        for r in 0..8 {
            for c in 0..8 {
                assert_abs_diff_eq!(w[(0, r, c)], y.values[(r, c)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn center_training_matches_dense_circulant_solve() {
        for (seed, ch, rows, cols) in [(1u64, 1, 8, 8), (2, 2, 6, 6), (3, 3, 5, 7)] {
            let x = random_features(seed, ch, rows, cols);
            let y = gaussian_label_2d(rows, cols, 1.0).unwrap();
            let f = train_center_filter(&x, &y, 1e-2).unwrap();
            let dense = oracle::dense_center_train(&x.data, &y.values, 1e-2);
            let fast = f.spatial();
            let max_diff = fast
                .iter()
                .zip(dense.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(max_diff <= 1e-8, "seed {seed}: max diff {max_diff:.3e}");
        }
    }

    #[test]
    fn boundary_training_matches_dense_circulant_solve() {
        let x = random_features(11, 2, 3, 16);
        let y = gaussian_label_1d(16, 1.0).unwrap();
        let f = train_boundary_filter(&x, &y, 1e-3, Side::Left).unwrap();
        let dense = oracle::dense_boundary_train(&flatten_boundary(&x), &y.values, 1e-3);
        let fast = f.spatial();
        let max_diff = fast
            .iter()
            .zip(dense.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(max_diff <= 1e-8, "max diff {max_diff:.3e}");
    }

    #[test]
    fn denominator_keeps_lambda_floor() {
        let x = random_features(5, 2, 8, 8);
        let f = train_center_filter(&x, &gaussian_label_2d(8, 8, 1.0).unwrap(), 1e-4).unwrap();
        for v in f.denominator.iter() {
            assert!(v.re >= 1e-4 - 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spatial_filter_is_real() {
        let x = random_features(6, 2, 8, 8);
        let f = train_center_filter(&x, &gaussian_label_2d(8, 8, 1.0).unwrap(), 1e-4).unwrap();
        for c in 0..2 {
            let plane = crate::fft::ifft2(&f.coeffs.index_axis(Axis(0), c).to_owned());
            assert!(crate::fft::max_imag2(&plane) <= 1e-10);
        }
    }

    #[test]
    fn detection_on_training_sample_peaks_at_label_peak() {
        let x = random_features(7, 2, 12, 10);
        let y = gaussian_label_2d(12, 10, 1.2).unwrap();
        let f = train_center_filter(&x, &y, 1e-4).unwrap();
        let resp = detect_center(&f, &x).unwrap();
        assert_eq!(resp.peak, y.peak);
        assert_eq!(resp.displacement, (0, 0));
    }

    #[test]
    fn circular_shift_moves_peak_by_the_shift() {
        let x = random_features(8, 1, 12, 12);
        let y = gaussian_label_2d(12, 12, 1.2).unwrap();
        let f = train_center_filter(&x, &y, 1e-4).unwrap();
        let (dr, dc) = (3usize, 5usize);
        let shifted = Array3::from_shape_fn((1, 12, 12), |(ch, r, c)| {
            x.data[(ch, (r + 12 - dr) % 12, (c + 12 - dc) % 12)]
        });
        let resp = detect_center(&f, &FeatureMap::new(shifted, 1)).unwrap();
        assert_eq!(resp.displacement, (3, 5));
    }

    #[test]
    fn boundary_shift_moves_peak_by_the_shift() {
        let x = random_features(9, 1, 4, 20);
        let y = gaussian_label_1d(20, 1.0).unwrap();
        let f = train_boundary_filter(&x, &y, 1e-4, Side::Right).unwrap();
        let d = 4usize;
        let shifted = Array3::from_shape_fn((1, 4, 20), |(ch, r, c)| {
            x.data[(ch, r, (c + 20 - d) % 20)]
        });
        let resp = detect_boundary(&f, &FeatureMap::new(shifted, 1)).unwrap();
        assert_eq!(resp.displacement, d as i64);
    }

    #[test]
    fn zero_features_give_flat_response() {
        let x = random_features(10, 1, 8, 8);
        let y = gaussian_label_2d(8, 8, 1.0).unwrap();
        let f = train_center_filter(&x, &y, 1e-4).unwrap();
        let zero = FeatureMap::new(Array3::zeros((1, 8, 8)), 1);
        let resp = detect_center(&f, &zero).unwrap();
        for v in resp.values.iter() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn identical_channels_get_identical_coefficients() {
        let one = random_features(12, 1, 3, 10);
        let mut data = Array3::zeros((2, 3, 10));
        for r in 0..3 {
            for c in 0..10 {
                data[(0, r, c)] = one.data[(0, r, c)];
                data[(1, r, c)] = one.data[(0, r, c)];
            }
        }
        let x = FeatureMap::new(data, 1);
        let y = gaussian_label_1d(10, 0.8).unwrap();
        let f = train_boundary_filter(&x, &y, 1e-3, Side::Top).unwrap();
        for r in 0..3 {
            for k in 0..10 {
                let a = f.coeffs[(r, k)];
                let b = f.coeffs[(3 + r, k)];
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
                assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn channel_weight_zero_silences_a_channel() {
        let x = random_features(13, 2, 8, 8);
        let y = gaussian_label_2d(8, 8, 1.0).unwrap();
        let f = train_center_filter(&x, &y, 1e-4).unwrap();
        let mut z = x.clone();
        z.weights = vec![1.0, 0.0];
        let partial = detect_center(&f, &z).unwrap();
        // oracle: accumulate channel 0 only
        let mut only0 = x.clone();
        for r in 0..8 {
            for c in 0..8 {
                only0.data[(1, r, c)] = 0.0;
            }
        }
        let expect = detect_center(&f, &only0).unwrap();
        for (a, b) in partial.values.iter().zip(expect.values.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn update_interpolates_caches() {
        let a = random_features(14, 1, 6, 6);
        let b = random_features(15, 1, 6, 6);
        let y = gaussian_label_2d(6, 6, 1.0).unwrap();
        let f0 = train_center_filter(&a, &y, 1e-3).unwrap();
        let f1 = train_center_filter(&b, &y, 1e-3).unwrap();

        let mut frozen = f0.clone();
        frozen.update(&f1, 0.0).unwrap();
        for (x, y) in frozen.numerator.iter().zip(f0.numerator.iter()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-15);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-15);
        }

        let mut replaced = f0.clone();
        replaced.update(&f1, 1.0).unwrap();
        for (x, y) in replaced.numerator.iter().zip(f1.numerator.iter()) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-15);
        }

        let mut half = f0.clone();
        half.update(&f1, 0.5).unwrap();
        for ((x, a), b) in half.denominator.iter().zip(f0.denominator.iter()).zip(f1.denominator.iter()) {
            assert_abs_diff_eq!(x.re, 0.5 * (a.re + b.re), epsilon = 1e-12);
        }
        // coefficients are the cache quotient
        for c in 0..1 {
            for r in 0..6 {
                for k in 0..6 {
                    let expect = half.numerator[(c, r, k)] / half.denominator[(r, k)];
                    assert_abs_diff_eq!(half.coeffs[(c, r, k)].re, expect.re, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn update_rejects_bad_eta_and_shapes() {
        let a = random_features(16, 1, 6, 6);
        let y = gaussian_label_2d(6, 6, 1.0).unwrap();
        let mut f = train_center_filter(&a, &y, 1e-3).unwrap();
        let fresh = f.clone();
        assert!(f.update(&fresh, -0.1).is_err());
        assert!(f.update(&fresh, 1.5).is_err());
        let other = train_center_filter(
            &random_features(17, 1, 8, 8),
            &gaussian_label_2d(8, 8, 1.0).unwrap(),
            1e-3,
        )
        .unwrap();
        assert!(f.update(&other, 0.5).is_err());
    }

    #[test]
    fn wrap_displacement_range() {
        assert_eq!(wrap_displacement(0, 8), 0);
        assert_eq!(wrap_displacement(4, 8), 4);
        assert_eq!(wrap_displacement(5, 8), -3);
        assert_eq!(wrap_displacement(-5, 8), 3);
        assert_eq!(wrap_displacement(7, 7), 0);
        assert_eq!(wrap_displacement(4, 7), -3);
        assert_eq!(wrap_displacement(3, 7), 3);
    }

    #[test]
    fn from_spatial_round_trips_the_filter() {
        let x = random_features(18, 2, 8, 8);
        let y = gaussian_label_2d(8, 8, 1.0).unwrap();
        let f = train_center_filter(&x, &y, 1e-3).unwrap();
        let rebuilt = center_filter_from_spatial(&f.spatial(), &f.denominator, f.lambda);
        for (a, b) in rebuilt.coeffs.iter().zip(f.coeffs.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-10);
        }
    }
}
