//! Python bindings: poses, the accumulation window, the streaming pipeline,
//! image segmentation, PCD I/O and the synthetic evaluator.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use serde::Serialize;

use objprop::evaluator::{self, SyntheticScene};
use objprop::pipeline::{build_images, segment, StageTimings};
use objprop::scan_io::{self, PcdEncoding, ProposalRecord};
use objprop::segmenter::depth_angle as core_depth_angle;
use objprop::{LidarScan, Point, StageFlags};

type PyPoint = (f32, f32, f32, f32);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable value to plain Python objects via JSON.
fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn points_in(points: Vec<PyPoint>) -> Vec<Point> {
    points.into_iter().map(|(x, y, z, i)| Point::new(x, y, z, i)).collect()
}

fn points_out(points: &[Point]) -> Vec<PyPoint> {
    points.iter().map(|p| (p.x, p.y, p.z, p.intensity)).collect()
}

fn config_from(text: Option<&str>) -> PyResult<objprop::PipelineConfig> {
    match text {
        Some(t) => objprop::PipelineConfig::from_str(t).map_err(value_err),
        None => Ok(objprop::PipelineConfig::default()),
    }
}

fn scene_from(scene: &str) -> PyResult<SyntheticScene> {
    if let Some(s) = evaluator::preset(scene) {
        return Ok(s);
    }
    if scene.trim_start().starts_with('{') {
        return SyntheticScene::from_json(scene).map_err(value_err);
    }
    Err(PyKeyError::new_err(format!(
        "unknown scene preset '{scene}' (known: {})",
        evaluator::PRESETS.join(", ")
    )))
}

/// Timestamped sensor pose in the world frame.
#[pyclass(name = "Pose", module = "objprop", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPose(objprop::Pose);

#[pymethods]
impl PyPose {
    /// `rpy` is roll, pitch, yaw in radians.
    #[new]
    #[pyo3(signature = (timestamp, xyz, rpy = (0.0, 0.0, 0.0)))]
    fn new(timestamp: f64, xyz: [f64; 3], rpy: (f64, f64, f64)) -> Self {
        Self(objprop::Pose::from_xyz_rpy(timestamp, xyz, rpy.0, rpy.1, rpy.2))
    }

    /// From a unit quaternion `(qx, qy, qz, qw)`; non-unit input is rejected.
    #[staticmethod]
    fn from_quaternion(timestamp: f64, xyz: [f64; 3], qxyzw: [f64; 4]) -> PyResult<Self> {
        objprop::Pose::from_raw(timestamp, xyz, qxyzw)
            .map(Self)
            .ok_or_else(|| PyValueError::new_err("degenerate quaternion"))
    }

    #[getter]
    fn timestamp(&self) -> f64 {
        self.0.timestamp
    }

    #[getter]
    fn translation(&self) -> [f64; 3] {
        self.0.translation.into()
    }

    #[getter]
    fn quaternion_xyzw(&self) -> [f64; 4] {
        self.0.quaternion_xyzw()
    }

    fn to_world(&self, p: [f64; 3]) -> [f64; 3] {
        self.0.to_world(&p.into()).into()
    }

    fn to_sensor(&self, p: [f64; 3]) -> [f64; 3] {
        self.0.to_sensor(&p.into()).into()
    }

    fn __repr__(&self) -> String {
        let t = self.0.translation;
        format!("Pose(t={}, xyz=({}, {}, {}))", self.0.timestamp, t.x, t.y, t.z)
    }
}

/// Sliding window of motion-gated scans.
#[pyclass(name = "Accumulator", module = "objprop")]
struct PyAccumulator(objprop::Accumulator);

#[pymethods]
impl PyAccumulator {
    /// `config` uses the dotted-key file format; only `accumulator.*` keys matter.
    #[new]
    #[pyo3(signature = (config = None))]
    fn new(config: Option<&str>) -> PyResult<Self> {
        Ok(Self(objprop::Accumulator::new(config_from(config)?.accumulator)))
    }

    /// Offers a scan of `(x, y, z, intensity)` sensor-frame points; returns
    /// whether it was admitted.
    fn offer_scan(&mut self, points: Vec<PyPoint>, pose: &PyPose) -> PyResult<bool> {
        let scan = LidarScan::new(points_in(points), pose.0.timestamp, pose.0);
        self.0.offer_scan(scan).map_err(value_err)
    }

    /// The window merged into the newest scan's frame: `(points, pose)`.
    fn query_accumulated(&self) -> PyResult<(Vec<PyPoint>, PyPose)> {
        let c = self.0.query_accumulated().map_err(value_err)?;
        Ok((points_out(&c.points), PyPose(c.reference_pose)))
    }

    fn clear(&mut self) {
        self.0.clear();
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Streaming pipeline that queries at the configured rate in data time.
#[pyclass(name = "Pipeline", module = "objprop")]
struct PyPipeline(objprop::Pipeline);

#[pymethods]
impl PyPipeline {
    #[new]
    #[pyo3(signature = (config = None))]
    fn new(config: Option<&str>) -> PyResult<Self> {
        Ok(Self(objprop::Pipeline::new(config_from(config)?)))
    }

    /// Offers a scan. Returns the list of new proposals (as dicts) when a
    /// query ran at this timestamp, otherwise `None`.
    fn offer_scan<'py>(
        &mut self,
        py: Python<'py>,
        points: Vec<PyPoint>,
        pose: &PyPose,
    ) -> PyResult<Option<Bound<'py, PyAny>>> {
        let scan = LidarScan::new(points_in(points), pose.0.timestamp, pose.0);
        let out = self.0.offer_scan(scan).map_err(value_err)?;
        out.query
            .map(|q| {
                let recs: Vec<ProposalRecord> = q.proposals.iter().map(ProposalRecord::from).collect();
                to_py(py, &recs)
            })
            .transpose()
    }

    #[getter]
    fn queries_run(&self) -> u64 {
        self.0.queries_run()
    }

    fn config(&self) -> String {
        self.0.config().to_dotted()
    }
}

/// Angle at the farther of two returns `alpha` radians apart.
#[pyfunction]
fn depth_angle(a: f64, b: f64, alpha: f64) -> f64 {
    core_depth_angle(a, b, alpha)
}

/// Projects a sensor-frame cloud and segments it. Returns a dict with the
/// image size, the label image (row-major; 0 invalid, 1 background, >= 2
/// cluster), the ground mask and the filtered clusters.
#[pyfunction]
#[pyo3(signature = (points, config = None, ablation = None))]
fn segment_points<'py>(
    py: Python<'py>,
    points: Vec<PyPoint>,
    config: Option<&str>,
    ablation: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config_from(config)?;
    let flags = match ablation {
        Some(a) => StageFlags::for_arm(a).ok_or_else(|| PyKeyError::new_err(format!("unknown ablation arm '{a}'")))?,
        None => cfg.stages,
    };
    let mut timings = StageTimings::default();
    let images = build_images(&points_in(points), &cfg.projector, &mut timings);
    let seg = segment(&images, &cfg, flags, &mut timings);
    let clusters: Vec<serde_json::Value> = seg
        .clusters
        .iter()
        .map(|c| {
            serde_json::json!({
                "label": c.label,
                "pixels": c.pixel_count,
                "points": c.point_count,
                "centroid": <[f64; 3]>::from(c.centroid),
                "volume_m3": c.volume,
                "mean_intensity": c.mean_intensity,
                "normal_stddev": c.normal_stddev,
                "range_m": c.range,
            })
        })
        .collect();
    let g = seg.labels.geometry;
    to_py(
        py,
        &serde_json::json!({
            "rows": g.rows,
            "cols": g.cols,
            "labels": seg.labels.labels,
            "ground": seg.ground,
            "ground_removed": seg.ground_removed,
            "raw_cluster_count": seg.raw_cluster_count,
            "clusters": clusters,
        }),
    )
}

/// Parses ASCII or binary PCD bytes into a dict with `points` and counters.
#[pyfunction]
fn parse_pcd<'py>(py: Python<'py>, data: &[u8]) -> PyResult<Bound<'py, PyAny>> {
    let c = scan_io::parse_pcd(data).map_err(value_err)?;
    to_py(
        py,
        &serde_json::json!({
            "points": points_out(&c.points),
            "declared": c.declared,
            "nan_dropped": c.nan_dropped,
            "intensity_clamped": c.intensity_clamped,
            "binary": c.encoding == PcdEncoding::Binary,
        }),
    )
}

#[pyfunction]
#[pyo3(signature = (points, binary = true))]
fn write_pcd<'py>(py: Python<'py>, points: Vec<PyPoint>, binary: bool) -> Bound<'py, PyBytes> {
    let enc = if binary { PcdEncoding::Binary } else { PcdEncoding::Ascii };
    PyBytes::new(py, &scan_io::write_pcd(&points_in(points), enc))
}

/// Names of the built-in synthetic scenes.
#[pyfunction]
fn presets() -> Vec<&'static str> {
    evaluator::PRESETS.to_vec()
}

/// Scene JSON for a preset name (or validates and echoes scene JSON).
#[pyfunction]
fn scene_json(scene: &str) -> PyResult<String> {
    Ok(scene_from(scene)?.to_json())
}

/// Renders a scene, runs the pipeline over it and returns the proposals.
#[pyfunction]
#[pyo3(signature = (scene, seed = 0, config = None))]
fn simulate<'py>(py: Python<'py>, scene: &str, seed: u64, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let scene = scene_from(scene)?;
    let run = evaluator::simulate(&scene, &config_from(config)?, seed).map_err(value_err)?;
    let recs: Vec<ProposalRecord> = run.proposals.iter().map(ProposalRecord::from).collect();
    to_py(py, &recs)
}

/// Scores proposal dicts (as returned by `simulate`) against a scene.
#[pyfunction]
#[pyo3(signature = (scene, proposals, seed = None))]
fn evaluate<'py>(
    py: Python<'py>,
    scene: &str,
    proposals: &Bound<'py, PyAny>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let scene = scene_from(scene)?;
    let text: String = py.import("json")?.call_method1("dumps", (proposals,))?.extract()?;
    let recs: Vec<ProposalRecord> = serde_json::from_str(&text).map_err(value_err)?;
    to_py(py, &evaluator::evaluate(&recs, &scene, seed))
}

/// Mean false positives per arm over `seeds`, each replay capped at
/// `horizon` queries.
#[pyfunction]
#[pyo3(signature = (scene, arms, seeds = vec![0], horizon = 100, config = None))]
fn ablation<'py>(
    py: Python<'py>,
    scene: &str,
    arms: Vec<String>,
    seeds: Vec<u64>,
    horizon: usize,
    config: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let scene = scene_from(scene)?;
    let arms = evaluator::arms_from_names(&arms).map_err(PyKeyError::new_err)?;
    let reports = evaluator::run_ablation(&scene, &config_from(config)?, &arms, &seeds, horizon).map_err(value_err)?;
    to_py(py, &reports)
}

#[pymodule]
#[pyo3(name = "objprop")]
fn objprop_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPose>()?;
    m.add_class::<PyAccumulator>()?;
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(depth_angle, m)?)?;
    m.add_function(wrap_pyfunction!(segment_points, m)?)?;
    m.add_function(wrap_pyfunction!(parse_pcd, m)?)?;
    m.add_function(wrap_pyfunction!(write_pcd, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(scene_json, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(ablation, m)?)?;
    Ok(())
}
