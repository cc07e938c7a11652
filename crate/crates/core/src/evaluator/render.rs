//! Ray-cast LiDAR simulator over a [`SyntheticScene`].

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scene::{hash3, IntensityProfile, Primitive, SyntheticScene};
use crate::geometry::{Point, Pose, Vec3};
use crate::scan_io::LidarScan;

/// What a return hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HitKind {
    Wall,
    Floor,
    /// Index into `scene.objects`.
    Object(u32),
    /// Index into `scene.protrusions`.
    Protrusion(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub range: f64,
    pub kind: HitKind,
    pub point: Vec3,
}

const EPS: f64 = 1e-9;
const RELIEF_CELL_M: f64 = 0.4;

/// Scene prepared for repeated ray casts.
#[derive(Debug, Clone)]
pub struct Renderer<'a> {
    scene: &'a SyntheticScene,
    targets: Vec<Target>,
}

/// Primitive plus a bounding sphere for cheap rejection.
#[derive(Debug, Clone, Copy)]
struct Target {
    prim: Primitive,
    kind: HitKind,
    center: Vec3,
    radius2: f64,
}

impl Target {
    fn new(prim: Primitive, kind: HitKind) -> Self {
        let b = prim.aabb();
        let h = b.extents() / 2.0;
        Self {
            prim,
            kind,
            center: b.center(),
            radius2: h.norm_squared(),
        }
    }

    fn may_hit(&self, o: &Vec3, d: &Vec3) -> bool {
        let v = self.center - o;
        let along = v.dot(d);
        if along < 0.0 && v.norm_squared() > self.radius2 {
            return false;
        }
        v.norm_squared() - along * along <= self.radius2
    }
}

impl<'a> Renderer<'a> {
    pub fn new(scene: &'a SyntheticScene) -> Self {
        let mut targets = Vec::new();
        for (i, o) in scene.objects.iter().enumerate() {
            targets.extend(o.primitives().into_iter().map(|p| Target::new(p, HitKind::Object(i as u32))));
        }
        for (i, o) in scene.protrusions.iter().enumerate() {
            targets.extend(o.primitives().into_iter().map(|p| Target::new(p, HitKind::Protrusion(i as u32))));
        }
        Self { scene, targets }
    }

    pub fn scene(&self) -> &SyntheticScene {
        self.scene
    }

    /// Nearest surface along the unit direction `dir` from `origin`, or
    /// `None` if the ray escapes.
    pub fn cast(&self, origin: &Vec3, dir: &Vec3) -> Option<Hit> {
        let mut best: Option<(f64, HitKind)> = None;
        let mut consider = |t: Option<f64>, kind: HitKind| {
            if let Some(t) = t {
                if best.is_none_or(|(b, _)| t < b) {
                    best = Some((t, kind));
                }
            }
        };
        consider(self.wall(origin, dir), HitKind::Wall);
        consider(self.floor(origin, dir), HitKind::Floor);
        for t in &self.targets {
            if t.may_hit(origin, dir) {
                consider(intersect(&t.prim, origin, dir), t.kind);
            }
        }
        best.map(|(range, kind)| Hit {
            range,
            kind,
            point: origin + dir * range,
        })
    }

    fn in_span(&self, x: f64) -> bool {
        (0.0..=self.scene.tunnel.length_m).contains(&x)
    }

    fn wall(&self, o: &Vec3, d: &Vec3) -> Option<f64> {
        let tun = &self.scene.tunnel;
        let nominal = cylinder_exit(o, d, tun.axis_z_m, tun.radius_m)?;
        let t = if tun.wall_roughness_m > 0.0 {
            let p = o + d * nominal;
            let h = tun.wall_roughness_m * self.relief(&p);
            cylinder_exit(o, d, tun.axis_z_m, tun.radius_m - h)?
        } else {
            nominal
        };
        let p = o + d * t;
        (self.in_span(p.x) && p.z >= tun.floor_z_m).then_some(t)
    }

    /// Smooth value noise in [-1, 1] over (x, arc length) on the wall.
    fn relief(&self, p: &Vec3) -> f64 {
        let tun = &self.scene.tunnel;
        let arc = (p.z - tun.axis_z_m).atan2(p.y) * tun.radius_m;
        let u = p.x / RELIEF_CELL_M;
        let v = arc / RELIEF_CELL_M;
        let (iu, iv) = (u.floor(), v.floor());
        let (fu, fv) = (smoothstep(u - iu), smoothstep(v - iv));
        let corner = |du: i64, dv: i64| {
            let h = hash3([iu as i64 + du, iv as i64 + dv, 7]);
            (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let a = corner(0, 0) * (1.0 - fu) + corner(1, 0) * fu;
        let b = corner(0, 1) * (1.0 - fu) + corner(1, 1) * fu;
        a * (1.0 - fv) + b * fv
    }

    fn floor(&self, o: &Vec3, d: &Vec3) -> Option<f64> {
        let tun = &self.scene.tunnel;
        if d.z >= -EPS {
            return None;
        }
        let t = (tun.floor_z_m - o.z) / d.z;
        if t <= EPS {
            return None;
        }
        let p = o + d * t;
        let r2 = p.y * p.y + (p.z - tun.axis_z_m).powi(2);
        (self.in_span(p.x) && r2 <= tun.radius_m * tun.radius_m).then_some(t)
    }

    fn profile(&self, kind: HitKind) -> &IntensityProfile {
        let s = self.scene;
        match kind {
            HitKind::Wall => &s.tunnel.wall_intensity,
            HitKind::Floor => &s.tunnel.floor_intensity,
            HitKind::Object(i) => &s.objects[i as usize].intensity,
            HitKind::Protrusion(i) => &s.protrusions[i as usize].intensity,
        }
    }

    /// One sweep from `pose`, with the hit kind of every returned point.
    pub fn render_labeled(&self, pose: &Pose, seed: u64) -> (LidarScan, Vec<HitKind>) {
        let beam = &self.scene.beam;
        let mut rng = ChaCha8Rng::seed_from_u64(scan_seed(seed, pose.timestamp));
        let range_noise = Normal::new(0.0, beam.range_noise_m).expect("finite sigma");
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let elevations: Vec<(f64, f64)> = beam
            .elevations_deg()
            .iter()
            .map(|e| e.to_radians().sin_cos())
            .collect();
        let origin = pose.translation;
        let n_az = beam.azimuth_count();
        let mut points = Vec::with_capacity(n_az * elevations.len());
        let mut kinds = Vec::with_capacity(points.capacity());
        for a in 0..n_az {
            let (sa, ca) = (a as f64 * beam.azimuth_step_deg).to_radians().sin_cos();
            for &(se, ce) in &elevations {
                let local = Vec3::new(ce * ca, ce * sa, se);
                let dir = pose.rotation * local;
                let Some(hit) = self.cast(&origin, &dir) else {
                    continue;
                };
                let range = hit.range + range_noise.sample(&mut rng);
                let profile = self.profile(hit.kind);
                let sigma_i = profile.std().hypot(beam.intensity_noise);
                let intensity = (profile.base(&hit.point) + sigma_i * unit.sample(&mut rng)).clamp(0.0, 255.0);
                if !(beam.min_range_m..=beam.max_range_m).contains(&range) {
                    continue;
                }
                points.push(Point::from_position(&(local * range), intensity as f32));
                kinds.push(hit.kind);
            }
        }
        (LidarScan::new(points, pose.timestamp, *pose), kinds)
    }
}

fn smoothstep(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

fn scan_seed(seed: u64, timestamp: f64) -> u64 {
    hash3([seed as i64, timestamp.to_bits() as i64, 0x5eed])
}

/// Far intersection of a ray starting inside the infinite cylinder
/// `y² + (z − zc)² = r²`.
fn cylinder_exit(o: &Vec3, d: &Vec3, zc: f64, r: f64) -> Option<f64> {
    let oz = o.z - zc;
    let a = d.y * d.y + d.z * d.z;
    if a < EPS {
        return None;
    }
    let b = o.y * d.y + oz * d.z;
    let c = o.y * o.y + oz * oz - r * r;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (-b + disc.sqrt()) / a;
    (t > EPS).then_some(t)
}

/// Entry distance of a ray into a primitive seen from outside.
pub fn intersect(prim: &Primitive, o: &Vec3, d: &Vec3) -> Option<f64> {
    match *prim {
        Primitive::Box { center, half, yaw } => {
            let (sn, cs) = yaw.sin_cos();
            let rot = |v: Vec3| Vec3::new(cs * v.x + sn * v.y, -sn * v.x + cs * v.y, v.z);
            let lo = rot(o - center);
            let ld = rot(*d);
            let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
            for k in 0..3 {
                if ld[k].abs() < EPS {
                    if lo[k].abs() > half[k] {
                        return None;
                    }
                    continue;
                }
                let a = (-half[k] - lo[k]) / ld[k];
                let b = (half[k] - lo[k]) / ld[k];
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
            (t0 <= t1 && t0 > EPS).then_some(t0)
        }
        Primitive::Cylinder { base, radius, height } => {
            let mut best = f64::INFINITY;
            let rel = o - base;
            let oxy = Vector2::new(rel.x, rel.y);
            let dxy = Vector2::new(d.x, d.y);
            let a = dxy.norm_squared();
            if a > EPS {
                let b = oxy.dot(&dxy);
                let c = oxy.norm_squared() - radius * radius;
                let disc = b * b - a * c;
                if disc >= 0.0 {
                    let t = (-b - disc.sqrt()) / a;
                    let z = rel.z + t * d.z;
                    if t > EPS && (0.0..=height).contains(&z) {
                        best = t;
                    }
                }
            }
            if d.z.abs() > EPS {
                for cap in [0.0, height] {
                    let t = (cap - rel.z) / d.z;
                    if t > EPS && t < best {
                        let p = oxy + dxy * t;
                        if p.norm_squared() <= radius * radius {
                            best = t;
                        }
                    }
                }
            }
            best.is_finite().then_some(best)
        }
    }
}

pub fn render_scan(scene: &SyntheticScene, pose: &Pose, seed: u64) -> LidarScan {
    Renderer::new(scene).render_labeled(pose, seed).0
}

pub fn render_scan_labeled(scene: &SyntheticScene, pose: &Pose, seed: u64) -> (LidarScan, Vec<HitKind>) {
    Renderer::new(scene).render_labeled(pose, seed)
}
