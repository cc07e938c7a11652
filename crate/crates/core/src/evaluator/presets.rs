//! Built-in reference scenes.

use super::scene::{
    BeamModel, IntensityProfile, LinearTraverse, SceneObject, Shape, SyntheticScene, TrajectorySpec, Tunnel,
};

pub const PRESETS: [&str; 5] = ["cave", "urban", "clutter", "planar", "golden"];

pub fn preset(name: &str) -> Option<SyntheticScene> {
    Some(match name {
        "cave" => cave(),
        "urban" => urban(),
        "clutter" => clutter(),
        "planar" => planar(),
        "golden" => golden(),
        _ => return None,
    })
}

fn homogeneous(mean: f64, std: f64) -> IntensityProfile {
    IntensityProfile::Homogeneous { mean, std }
}

fn object(name: &str, shape: Shape, xy: [f64; 2], yaw_deg: f64, intensity: f64, is_artifact: bool) -> SceneObject {
    SceneObject {
        name: name.to_string(),
        shape,
        position_m: [xy[0], xy[1], 0.0],
        yaw_deg,
        intensity: homogeneous(intensity, 6.0),
        is_artifact,
    }
}

fn tunnel(length_m: f64, roughness: f64, wall: IntensityProfile) -> Tunnel {
    Tunnel {
        radius_m: 3.0,
        length_m,
        axis_z_m: 1.0,
        floor_z_m: 0.0,
        wall_roughness_m: roughness,
        wall_intensity: wall,
        floor_intensity: homogeneous(12.0, 3.0),
    }
}

fn walk(x0: f64, x1: f64, scans: usize, rate_hz: f64) -> TrajectorySpec {
    TrajectorySpec::Linear(LinearTraverse {
        start_m: [x0, 0.0, 0.6],
        end_m: [x1, 0.0, 0.6],
        scans,
        scan_rate_hz: rate_hz,
        start_time_s: 0.0,
        pitch_amplitude_deg: 4.0,
        roll_amplitude_deg: 2.0,
        sway_period_s: 1.3,
    })
}

/// Three artifacts and five clutter objects along a tunnel whose walls
/// return a consistent low intensity.
fn cave_objects() -> Vec<SceneObject> {
    vec![
        object("backpack", Shape::Box { size_m: [0.35, 0.5, 0.6] }, [13.0, 1.3], 35.0, 150.0, true),
        object("survivor", Shape::Mannequin { height_m: 1.7, radius_m: 0.2 }, [21.0, -1.4], 0.0, 110.0, true),
        object("extinguisher", Shape::Cylinder { radius_m: 0.12, height_m: 0.55 }, [25.5, 1.1], 0.0, 190.0, true),
        object("crate", Shape::Box { size_m: [1.0, 0.8, 0.9] }, [8.0, -1.5], 10.0, 70.0, false),
        object("barrel", Shape::Cylinder { radius_m: 0.3, height_m: 0.9 }, [16.5, -1.5], 0.0, 90.0, false),
        object("toolbox", Shape::Box { size_m: [0.6, 0.3, 0.3] }, [18.5, 1.4], -20.0, 80.0, false),
        object("cone", Shape::Cylinder { radius_m: 0.15, height_m: 0.7 }, [23.0, -1.2], 0.0, 130.0, false),
        object("bucket", Shape::Cylinder { radius_m: 0.2, height_m: 0.4 }, [4.0, 1.4], 0.0, 75.0, false),
    ]
}

/// Homogeneous 15±3 walls, 200 scans at 10 Hz.
pub fn cave() -> SyntheticScene {
    SyntheticScene {
        name: "cave".into(),
        tunnel: tunnel(45.0, 0.05, homogeneous(15.0, 3.0)),
        objects: cave_objects(),
        protrusions: Vec::new(),
        beam: BeamModel::default(),
        trajectory: walk(1.0, 26.0, 200, 10.0),
    }
}

/// Same layout as [`cave`], with walls painted in patches of differing
/// reflectivity.
pub fn urban() -> SyntheticScene {
    SyntheticScene {
        name: "urban".into(),
        tunnel: tunnel(
            45.0,
            0.02,
            IntensityProfile::Mixture {
                levels: vec![20.0, 45.0, 90.0, 140.0],
                patch_m: 1.0,
                std: 4.0,
            },
        ),
        ..cave()
    }
}

/// Noisy, low-intensity rock walls with protrusions; one artifact and two
/// clutter objects. 255 scans at 5 Hz give 100 queries at 2 Hz.
pub fn clutter() -> SyntheticScene {
    let mut protrusions = Vec::new();
    for k in 0..14 {
        let x = 3.0 + 2.7 * k as f64;
        let side = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (shape, y) = if k % 3 == 0 {
            (Shape::Cylinder { radius_m: 0.35, height_m: 0.5 + 0.1 * (k % 4) as f64 }, 2.45)
        } else {
            (Shape::Box { size_m: [0.6, 0.5, 0.45 + 0.05 * (k % 5) as f64] }, 2.3)
        };
        protrusions.push(SceneObject {
            name: format!("rock{k}"),
            shape,
            position_m: [x, side * y, 0.0],
            yaw_deg: 17.0 * k as f64,
            intensity: homogeneous(20.0, 6.0),
            is_artifact: false,
        });
    }
    SyntheticScene {
        name: "clutter".into(),
        tunnel: Tunnel {
            floor_intensity: homogeneous(16.0, 6.0),
            ..tunnel(50.0, 0.12, homogeneous(18.0, 6.0))
        },
        objects: vec![
            object("backpack", Shape::Box { size_m: [0.35, 0.5, 0.6] }, [20.0, 1.2], 30.0, 150.0, true),
            object("crate", Shape::Box { size_m: [0.9, 0.7, 0.8] }, [12.0, -1.0], 10.0, 70.0, false),
            object("barrel", Shape::Cylinder { radius_m: 0.3, height_m: 0.9 }, [30.0, -0.9], 0.0, 90.0, false),
        ],
        protrusions,
        beam: BeamModel {
            range_noise_m: 0.02,
            intensity_noise: 3.0,
            ..BeamModel::default()
        },
        trajectory: walk(1.0, 41.8, 255, 5.0),
    }
}

/// Noise-free scene with a flat panel and curved or faceted objects.
pub fn planar() -> SyntheticScene {
    let flat = |v: f64| IntensityProfile::constant(v);
    SyntheticScene {
        name: "planar".into(),
        tunnel: Tunnel {
            wall_intensity: flat(15.0),
            floor_intensity: flat(12.0),
            ..tunnel(30.0, 0.0, flat(15.0))
        },
        objects: vec![
            SceneObject {
                intensity: flat(120.0),
                ..object("panel", Shape::Box { size_m: [0.05, 1.0, 0.7] }, [9.0, 0.0], 0.0, 120.0, false)
            },
            SceneObject {
                intensity: flat(120.0),
                ..object("barrel", Shape::Cylinder { radius_m: 0.3, height_m: 0.8 }, [8.0, -1.6], 0.0, 120.0, false)
            },
            SceneObject {
                intensity: flat(120.0),
                ..object("backpack", Shape::Box { size_m: [0.4, 0.5, 0.6] }, [8.0, 1.6], 45.0, 120.0, true)
            },
        ],
        protrusions: Vec::new(),
        beam: BeamModel {
            range_noise_m: 0.0,
            intensity_noise: 0.0,
            ..BeamModel::default()
        },
        trajectory: TrajectorySpec::Linear(LinearTraverse {
            start_m: [2.0, 0.0, 0.6],
            end_m: [4.0, 0.0, 0.6],
            scans: 20,
            scan_rate_hz: 10.0,
            start_time_s: 0.0,
            pitch_amplitude_deg: 4.0,
            roll_amplitude_deg: 0.0,
            sway_period_s: 1.3,
        }),
    }
}

/// The first 50 scans of [`cave`]: the determinism dataset.
pub fn golden() -> SyntheticScene {
    let mut s = cave();
    s.name = "golden".into();
    if let TrajectorySpec::Linear(l) = &mut s.trajectory {
        l.end_m[0] = l.start_m[0] + (l.end_m[0] - l.start_m[0]) * 49.0 / 199.0;
        l.scans = 50;
    }
    s
}
