//! Hyperboloid picture of the metric flow and divergence classification.
//!
//! Writing `G = [[z - x, y], [y, z + x]]`, `det G = 1` becomes
//! `z^2 - x^2 - y^2 = 1`. For the Swanson model the flow keeps
//! `z / (omega0 + delta x)` constant, so orbits are plane sections of the
//! hyperboloid: ellipses when the plane slope `|s| < 1`, unbounded otherwise.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::Metric;
use crate::error::{Error, Result};
use crate::gaussian::{complex_symplectic_flow, metric_from_b, ComplexSymplectic, UncertaintyB};
use crate::metriplectic::BLOWUP_THRESHOLD;
use crate::quadratic_model::{swanson_hamiltonian, SwansonParams};

/// Default half-width of the boundary band in the classifier's comparison variable.
pub const DEFAULT_BAND: f64 = 0.02;

/// Samples per period used by [`BlowupDetector::one_period`].
pub const DETECTOR_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl HyperboloidPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// `z^2 - x^2 - y^2 - 1`.
    pub fn constraint_defect(&self) -> f64 {
        self.z * self.z - self.x * self.x - self.y * self.y - 1.0
    }

    pub fn metric(&self) -> Metric {
        Metric::from_entries(self.z - self.x, self.y, self.z + self.x)
    }

    /// Metric eigenvalues `z +- sqrt(z^2 - 1)`, larger first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let r = (self.z * self.z - 1.0).max(0.0).sqrt();
        let plus = self.z + r;
        (plus, 1.0 / plus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLabel {
    Bounded,
    Divergent,
    Boundary,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Bounded => "bounded",
            RegionLabel::Divergent => "divergent",
            RegionLabel::Boundary => "boundary",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn xyz_from_metric(g: &Metric) -> HyperboloidPoint {
    HyperboloidPoint {
        x: 0.5 * (g.g_qq - g.g_pp),
        y: g.g_pq,
        z: 0.5 * (g.g_pp + g.g_qq),
    }
}

pub fn xyz_rhs(params: &SwansonParams, pt: &HyperboloidPoint) -> Vector3<f64> {
    let (w0, d) = (params.omega0(), params.delta());
    Vector3::new(
        2.0 * pt.y * (w0 + d * pt.x),
        -2.0 * w0 * pt.x + 2.0 * d * (1.0 + pt.y * pt.y),
        2.0 * d * pt.y * pt.z,
    )
}

/// Slope `s = delta z0 / (omega0 + delta x0)` of the invariant plane through `pt0`.
pub fn plane_slope(params: &SwansonParams, pt0: &HyperboloidPoint) -> Result<f64> {
    let den = params.omega0() + params.delta() * pt0.x;
    let scale = params.omega0().max((params.delta() * pt0.x).abs());
    if den.abs() <= 1e-12 * scale {
        return Err(Error::DegeneratePlane { denominator: den });
    }
    Ok(params.delta() * pt0.z / den)
}

/// `z - z0 (omega0 + delta x) / (omega0 + delta x0)`; zero along the flow.
pub fn plane_defect(params: &SwansonParams, pt0: &HyperboloidPoint, pt: &HyperboloidPoint) -> f64 {
    let (w0, d) = (params.omega0(), params.delta());
    pt.z - pt0.z * (w0 + d * pt.x) / (w0 + d * pt0.x)
}

fn label(margin: f64, band: f64) -> RegionLabel {
    // margin > 0 means bounded
    if margin > band {
        RegionLabel::Bounded
    } else if margin < -band {
        RegionLabel::Divergent
    } else {
        RegionLabel::Boundary
    }
}

fn check_band(band: f64) -> Result<()> {
    if band > 0.0 && band.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "band must be positive, got {band}"
        )))
    }
}

/// Classifies by the plane slope. `|s| = 1` is always [`RegionLabel::Boundary`].
pub fn classify_metric(params: &SwansonParams, g0: &Metric, band: f64) -> Result<RegionLabel> {
    check_band(band)?;
    let s = plane_slope(params, &xyz_from_metric(g0))?;
    Ok(label(1.0 - s.abs(), band))
}

/// Classifies an initial uncertainty parameter.
///
/// For `delta > 0` the comparison variable is `Im B0` against `delta / omega0`;
/// for `delta < 0` it is the distance of `B0` from `-i omega0 / (2 delta)`
/// against the radius `omega0 / (2 |delta|)`.
pub fn classify_b(params: &SwansonParams, b0: &UncertaintyB, band: f64) -> Result<RegionLabel> {
    check_band(band)?;
    if !b0.is_normalizable() {
        return Err(Error::NonNormalizable { im_b: b0.0.im });
    }
    let (w0, d) = (params.omega0(), params.delta());
    let margin = if d > 0.0 {
        b0.0.im - d / w0
    } else if d < 0.0 {
        let centre = num_complex::Complex64::new(0.0, -w0 / (2.0 * d));
        w0 / (2.0 * d.abs()) - (b0.0 - centre).norm()
    } else {
        f64::INFINITY
    };
    Ok(label(margin, band))
}

/// Row-major labels over a rectangle of the B plane; rows run over `Im B`
/// from `im_range.0` to `im_range.1`, columns over `Re B`. Both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub params: SwansonParams,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    pub labels: Vec<RegionLabel>,
}

impl RegionGrid {
    pub fn point(&self, row: usize, col: usize) -> UncertaintyB {
        grid_point(self.re_range, self.im_range, self.resolution, row, col)
    }

    pub fn label(&self, row: usize, col: usize) -> RegionLabel {
        self.labels[row * self.resolution + col]
    }
}

fn grid_point(
    re: (f64, f64),
    im: (f64, f64),
    resolution: usize,
    row: usize,
    col: usize,
) -> UncertaintyB {
    let n = (resolution - 1) as f64;
    UncertaintyB::new(
        re.0 + (re.1 - re.0) * col as f64 / n,
        im.0 + (im.1 - im.0) * row as f64 / n,
    )
}

fn check_grid(re: (f64, f64), im: (f64, f64), resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let finite = [re.0, re.1, im.0, im.1].iter().all(|v| v.is_finite());
    if !finite || im.0 <= 0.0 || im.1 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "grid must lie in the upper half-plane, got re {re:?}, im {im:?}"
        )));
    }
    Ok(())
}

/// [`classify_b`] on a grid with [`DEFAULT_BAND`].
pub fn region_grid(
    params: &SwansonParams,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: usize,
) -> Result<RegionGrid> {
    region_grid_with_band(params, re_range, im_range, resolution, DEFAULT_BAND)
}

pub fn region_grid_with_band(
    params: &SwansonParams,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: usize,
    band: f64,
) -> Result<RegionGrid> {
    check_grid(re_range, im_range, resolution)?;
    check_band(band)?;
    let labels = fill_rows(resolution, |row, col| {
        classify_b(
            params,
            &grid_point(re_range, im_range, resolution, row, col),
            band,
        )
        .expect("grid points are normalizable")
    });
    Ok(RegionGrid {
        params: *params,
        re_range,
        im_range,
        resolution,
        labels,
    })
}

fn fill_rows<F>(resolution: usize, f: F) -> Vec<RegionLabel>
where
    F: Fn(usize, usize) -> RegionLabel + Sync,
{
    let rows: Vec<Vec<RegionLabel>> = (0..resolution)
        .into_par_iter()
        .map(|row| (0..resolution).map(|col| f(row, col)).collect())
        .collect();
    rows.concat()
}

/// Dynamical blow-up test for Swanson wave packets.
///
/// Holds `S(t_k)` on a uniform grid; a packet is flagged when its Mobius
/// image leaves the upper half-plane, hits a chart pole, or its metric
/// exceeds [`BLOWUP_THRESHOLD`] at any sample.
#[derive(Debug, Clone)]
pub struct BlowupDetector {
    times: Vec<f64>,
    flows: Vec<ComplexSymplectic>,
}

impl BlowupDetector {
    pub fn new(params: &SwansonParams, t_end: f64, samples: usize) -> Self {
        let model = swanson_hamiltonian(params);
        let samples = samples.max(1);
        let (times, flows) = (1..=samples)
            .map(|k| {
                let t = t_end * k as f64 / samples as f64;
                (t, complex_symplectic_flow(&model, t))
            })
            .unzip();
        Self { times, flows }
    }

    /// One period at [`DETECTOR_SAMPLES`] samples.
    pub fn one_period(params: &SwansonParams) -> Self {
        Self::new(params, params.period(), DETECTOR_SAMPLES)
    }

    /// Time of the first flagged sample, if any.
    pub fn first_blowup(&self, b0: &UncertaintyB) -> Option<f64> {
        self.flows.iter().zip(&self.times).find_map(|(s, &t)| {
            let blown = match s.mobius(b0) {
                Err(_) => true,
                Ok(b) => match metric_from_b(&b) {
                    Err(_) => true,
                    Ok(g) => !(g.trace() <= BLOWUP_THRESHOLD),
                },
            };
            blown.then_some(t)
        })
    }

    pub fn label(&self, b0: &UncertaintyB) -> RegionLabel {
        if self.first_blowup(b0).is_some() {
            RegionLabel::Divergent
        } else {
            RegionLabel::Bounded
        }
    }
}

/// Grid of dynamical labels (never `boundary`) matching [`region_grid`]'s layout.
pub fn dynamic_grid(
    params: &SwansonParams,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: usize,
    detector: &BlowupDetector,
) -> Result<RegionGrid> {
    check_grid(re_range, im_range, resolution)?;
    let labels = fill_rows(resolution, |row, col| {
        detector.label(&grid_point(re_range, im_range, resolution, row, col))
    });
    Ok(RegionGrid {
        params: *params,
        re_range,
        im_range,
        resolution,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{metric_closed, metric_eigen};

    fn params(w0: f64, d: f64) -> SwansonParams {
        SwansonParams::new(w0, d).unwrap()
    }

    #[test]
    fn xyz_examples() {
        assert_eq!(
            xyz_from_metric(&Metric::IDENTITY),
            HyperboloidPoint::new(0.0, 0.0, 1.0)
        );
        let pt = xyz_from_metric(&Metric::from_entries(1.0 / 3.0, 0.0, 3.0));
        assert!((pt.x - 4.0 / 3.0).abs() < 1e-15 && (pt.z - 5.0 / 3.0).abs() < 1e-15);
        assert!(pt.constraint_defect().abs() < 1e-14);
        let pt = xyz_from_metric(&metric_from_b(&UncertaintyB::new(0.0, 0.4)).unwrap());
        assert!((pt.z - 1.45).abs() < 1e-14 && (pt.x + 1.05).abs() < 1e-14);
        assert!(
            pt.metric()
                .max_abs_diff(&metric_from_b(&UncertaintyB::new(0.0, 0.4)).unwrap())
                < 1e-14
        );
    }

    #[test]
    fn rhs_examples() {
        let origin = HyperboloidPoint::new(0.0, 0.0, 1.0);
        assert_eq!(xyz_rhs(&params(1.0, 0.0), &origin), Vector3::zeros());
        assert_eq!(
            xyz_rhs(&params(1.0, 0.5), &origin),
            Vector3::new(0.0, 1.0, 0.0)
        );
    }

    #[test]
    fn rhs_matches_finite_difference_of_closed_form() {
        let p = params(1.0, 0.5);
        let g0 = Metric::squeezed(1.7).unwrap();
        let h = 1e-5;
        for &t in &[0.0, 0.8, 2.1] {
            let at = |s: f64| xyz_from_metric(&metric_closed(&p, &g0, s).unwrap()).vector();
            let fd = (at(t + h) - at(t - h)) / (2.0 * h);
            let pt = xyz_from_metric(&metric_closed(&p, &g0, t).unwrap());
            assert!((fd - xyz_rhs(&p, &pt)).norm() < 1e-8);
        }
    }

    #[test]
    fn rhs_is_tangent_to_hyperboloid() {
        let p = params(1.3, -0.7);
        for &(x, y) in &[(0.3, -0.2), (2.0, 1.0), (-1.5, 0.4)] {
            let z = (1.0f64 + x * x + y * y).sqrt();
            let pt = HyperboloidPoint::new(x, y, z);
            let v = xyz_rhs(&p, &pt);
            let tangency = -x * v[0] - y * v[1] + z * v[2];
            assert!(tangency.abs() < 1e-12, "{tangency}");
        }
    }

    #[test]
    fn slope_examples() {
        let origin = HyperboloidPoint::new(0.0, 0.0, 1.0);
        assert_eq!(plane_slope(&params(1.0, 0.0), &origin).unwrap(), 0.0);
        assert_eq!(plane_slope(&params(1.0, 0.5), &origin).unwrap(), 0.5);
        assert_eq!(plane_slope(&params(1.0, 1.0), &origin).unwrap(), 1.0);
        let bad = HyperboloidPoint::new(-2.0, 0.0, 5f64.sqrt());
        assert!(matches!(
            plane_slope(&params(1.0, 0.5), &bad),
            Err(Error::DegeneratePlane { .. })
        ));
    }

    #[test]
    fn classify_metric_examples() {
        let g = Metric::IDENTITY;
        assert_eq!(
            classify_metric(&params(1.0, 0.0), &g, DEFAULT_BAND).unwrap(),
            RegionLabel::Bounded
        );
        assert_eq!(
            classify_metric(&params(1.0, 0.5), &g, DEFAULT_BAND).unwrap(),
            RegionLabel::Bounded
        );
        assert_eq!(
            classify_metric(&params(1.0, 1.2), &g, DEFAULT_BAND).unwrap(),
            RegionLabel::Divergent
        );
        assert_eq!(
            classify_metric(&params(1.0, 1.0), &g, 1e-12).unwrap(),
            RegionLabel::Boundary
        );
        assert!(classify_metric(&params(1.0, 1.0), &g, 0.0).is_err());
    }

    #[test]
    fn classify_b_examples() {
        let c = |p, re, im| classify_b(&p, &UncertaintyB::new(re, im), DEFAULT_BAND).unwrap();
        assert_eq!(c(params(1.0, 0.5), 0.0, 0.4), RegionLabel::Divergent);
        assert_eq!(c(params(1.0, 0.5), 3.0, 0.6), RegionLabel::Bounded);
        assert_eq!(c(params(1.0, 0.5), 0.0, 0.51), RegionLabel::Boundary);
        assert_eq!(c(params(1.0, -0.5), 0.0, 1.0), RegionLabel::Bounded);
        assert_eq!(c(params(1.0, -0.5), 1.5, 1.0), RegionLabel::Divergent);
        assert_eq!(c(params(1.0, 0.0), -7.0, 0.01), RegionLabel::Bounded);
        assert!(classify_b(
            &params(1.0, 0.5),
            &UncertaintyB::new(0.0, -1.0),
            DEFAULT_BAND
        )
        .is_err());
    }

    #[test]
    fn slope_and_b_criteria_agree_off_band() {
        for &d in &[0.5, -0.5, 1.0, -1.0, 0.2] {
            let p = params(1.0, d);
            for i in 0..30 {
                for j in 1..30 {
                    let b = UncertaintyB::new(-2.0 + 4.0 * i as f64 / 29.0, 2.0 * j as f64 / 29.0);
                    let by_b = classify_b(&p, &b, DEFAULT_BAND).unwrap();
                    let g = metric_from_b(&b).unwrap();
                    let Ok(by_s) = classify_metric(&p, &g, DEFAULT_BAND) else {
                        continue;
                    };
                    if by_b != RegionLabel::Boundary && by_s != RegionLabel::Boundary {
                        assert_eq!(by_b, by_s, "delta = {d}, B = {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn eigenvalues_match_metric_eigen() {
        let g = Metric::normalized(&nalgebra::Matrix2::new(2.0, 0.7, 0.7, 1.1)).unwrap();
        let (plus, minus) = xyz_from_metric(&g).eigenvalues();
        let e = metric_eigen(&g);
        assert!((plus - e.g_plus).abs() < 1e-10 && (minus - e.g_minus).abs() < 1e-10);
    }

    #[test]
    fn grid_layout_and_hermitian_limit() {
        let grid = region_grid(&params(1.0, 0.0), (-2.0, 2.0), (0.1, 2.0), 5).unwrap();
        assert_eq!(grid.labels.len(), 25);
        assert!(grid.labels.iter().all(|&l| l == RegionLabel::Bounded));
        assert_eq!(grid.point(0, 0), UncertaintyB::new(-2.0, 0.1));
        assert_eq!(grid.point(4, 4), UncertaintyB::new(2.0, 2.0));
        assert!(region_grid(&params(1.0, 0.0), (-2.0, 2.0), (0.0, 2.0), 5).is_err());
        assert!(region_grid(&params(1.0, 0.0), (-2.0, 2.0), (0.1, 2.0), 1).is_err());
    }

    #[test]
    fn positive_delta_boundary_is_horizontal() {
        let grid = region_grid(&params(1.0, 0.5), (-2.0, 2.0), (0.05, 2.0), 40).unwrap();
        for row in 0..40 {
            let first = grid.label(row, 0);
            assert!((0..40).all(|col| grid.label(row, col) == first));
            let im = grid.point(row, 0).0.im;
            if im < 0.48 {
                assert_eq!(first, RegionLabel::Divergent);
            } else if im > 0.52 {
                assert_eq!(first, RegionLabel::Bounded);
            }
        }
    }

    #[test]
    fn negative_delta_bounded_region_is_a_disk() {
        let p = params(1.0, -1.0);
        let grid = region_grid(&p, (-1.0, 1.0), (0.02, 1.2), 31).unwrap();
        for row in 0..31 {
            for col in 0..31 {
                let b = grid.point(row, col).0;
                let r = (b - num_complex::Complex64::new(0.0, 0.5)).norm();
                match grid.label(row, col) {
                    RegionLabel::Bounded => assert!(r < 0.5),
                    RegionLabel::Divergent => assert!(r > 0.5),
                    RegionLabel::Boundary => {}
                }
            }
        }
    }

    #[test]
    fn detector_examples() {
        let p = params(1.0, 0.5);
        let det = BlowupDetector::one_period(&p);
        assert_eq!(
            det.label(&UncertaintyB::new(0.0, 0.4)),
            RegionLabel::Divergent
        );
        assert_eq!(
            det.label(&UncertaintyB::new(0.0, 0.6)),
            RegionLabel::Bounded
        );
        let p = params(1.0, -0.5);
        let det = BlowupDetector::one_period(&p);
        assert_eq!(
            det.label(&UncertaintyB::new(0.0, 1.0)),
            RegionLabel::Bounded
        );
        assert_eq!(
            det.label(&UncertaintyB::new(1.5, 1.0)),
            RegionLabel::Divergent
        );
    }
}
