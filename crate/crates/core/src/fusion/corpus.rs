use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::geom::Point2;

use super::{BBoxVectorSet, ClusterFix, ClusterId, ClusterTrack, Frame, FusionError, TrackLabel, TrackSample};

/// Synthetic stand-in for a labelled drive: a vehicle parked at the origin,
/// pedestrians walking through the sensor disc, static clutter, and camera
/// detections with misses, false alarms, bearing noise and a constant
/// calibration bias.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub duration_s: f64,
    pub frame_hz: f64,
    /// Number of pedestrian tracks.
    pub pedestrians: usize,
    /// Number of clutter tracks.
    pub clutter: usize,
    pub sensor_range: f64,
    /// Pedestrians never pass closer than this, m.
    pub min_range: f64,
    /// Fraction of pedestrians walking side by side with a companion.
    pub group_fraction: f64,
    /// Lateral spacing inside a group, m.
    pub group_spacing: f64,
    pub walk_speed_mean: f64,
    pub walk_speed_std: f64,
    pub pedestrian_width: f64,
    /// Clutter widths are uniform on this range, m.
    pub clutter_width: (f64, f64),
    /// Clutter lifetimes are uniform on this range, s.
    pub clutter_life_s: (f64, f64),
    /// Probability that a visible pedestrian goes undetected in a frame.
    pub miss_rate: f64,
    /// Per-frame probability that a clutter object is detected.
    pub clutter_detect_prob: f64,
    /// Detections with no object behind them, per minute.
    pub false_detections_per_min: f64,
    pub bearing_noise_deg: f64,
    /// Bearing noise of detections not caused by a pedestrian.
    pub false_bearing_noise_deg: f64,
    pub edge_noise_deg: f64,
    /// Constant extrinsic calibration error added to every detection.
    pub calibration_bias_deg: f64,
    pub cameras: u32,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            duration_s: 22.0 * 60.0,
            frame_hz: 5.0,
            pedestrians: 237,
            clutter: 300,
            sensor_range: 20.0,
            min_range: 3.0,
            group_fraction: 0.4,
            group_spacing: 0.7,
            walk_speed_mean: 1.4,
            walk_speed_std: 0.2,
            pedestrian_width: 0.5,
            clutter_width: (0.1, 1.0),
            clutter_life_s: (10.0, 60.0),
            miss_rate: 0.2,
            clutter_detect_prob: 0.2,
            false_detections_per_min: 2.0,
            bearing_noise_deg: 0.5,
            false_bearing_noise_deg: 5.0,
            edge_noise_deg: 0.2,
            calibration_bias_deg: 2.0,
            cameras: 3,
        }
    }
}

impl CorpusConfig {
    /// Perfect detector, no clutter, no false alarms.
    pub fn noiseless() -> Self {
        Self {
            clutter: 0,
            miss_rate: 0.0,
            clutter_detect_prob: 0.0,
            false_detections_per_min: 0.0,
            bearing_noise_deg: 0.0,
            false_bearing_noise_deg: 0.0,
            edge_noise_deg: 0.0,
            calibration_bias_deg: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        let bad = |m: &str| Err(FusionError::InvalidConfig(m.to_string()));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(FusionError::ZeroDuration(self.duration_s));
        }
        if !(self.frame_hz > 0.0) {
            return bad("frame_hz must be positive");
        }
        if !(self.sensor_range > self.min_range && self.min_range >= 0.0) {
            return bad("need sensor_range > min_range >= 0");
        }
        for (name, p) in [
            ("group_fraction", self.group_fraction),
            ("miss_rate", self.miss_rate),
            ("clutter_detect_prob", self.clutter_detect_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        for (name, v) in [
            ("group_spacing", self.group_spacing),
            ("walk_speed_std", self.walk_speed_std),
            ("pedestrian_width", self.pedestrian_width),
            ("false_detections_per_min", self.false_detections_per_min),
            ("bearing_noise_deg", self.bearing_noise_deg),
            ("false_bearing_noise_deg", self.false_bearing_noise_deg),
            ("edge_noise_deg", self.edge_noise_deg),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be non-negative"));
            }
        }
        if !(self.walk_speed_mean > 0.0) {
            return bad("walk_speed_mean must be positive");
        }
        if !(self.clutter_width.0 > 0.0 && self.clutter_width.0 <= self.clutter_width.1) {
            return bad("clutter_width must be a positive range");
        }
        if !(self.clutter_life_s.0 > 0.0 && self.clutter_life_s.0 <= self.clutter_life_s.1) {
            return bad("clutter_life_s must be a positive range");
        }
        if self.cameras == 0 {
            return bad("need at least one camera");
        }
        Ok(())
    }
}

/// Frames plus ground truth. Frames are in time order and never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionCorpus {
    pub duration_s: f64,
    pub frames: Vec<Frame>,
    pub labels: BTreeMap<ClusterId, TrackLabel>,
}

impl DetectionCorpus {
    pub fn duration_min(&self) -> f64 {
        self.duration_s / 60.0
    }

    pub fn count(&self, label: TrackLabel) -> usize {
        self.labels.values().filter(|&&l| l == label).count()
    }

    /// Per-cluster trajectories.
    pub fn tracks(&self) -> Vec<ClusterTrack> {
        let mut out: BTreeMap<ClusterId, ClusterTrack> = self
            .labels
            .iter()
            .map(|(&id, &truth)| {
                (
                    id,
                    ClusterTrack {
                        id,
                        samples: Vec::new(),
                        truth,
                    },
                )
            })
            .collect();
        for f in &self.frames {
            for c in &f.clusters {
                if let Some(t) = out.get_mut(&c.id) {
                    t.samples.push(TrackSample {
                        time: f.time,
                        position: c.position,
                    });
                }
            }
        }
        out.into_values().collect()
    }

    /// Kind-tagged rows without a header:
    /// `duration,s`, `pose,time,x,y`, `cluster,time,id,x,y,truth` and
    /// `bbox,time,camera,left_rad,mid_rad,right_rad`. `truth` is 1 for a
    /// pedestrian. A pose row applies from its time on.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FusionError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["duration", &self.duration_s.to_string()])?;
        let mut pose: Option<Point2> = None;
        for f in &self.frames {
            let t = f.time.to_string();
            if pose != Some(f.observer) {
                w.write_record(["pose", &t, &f.observer.x.to_string(), &f.observer.y.to_string()])?;
                pose = Some(f.observer);
            }
            for c in &f.clusters {
                let truth = match self.labels.get(&c.id) {
                    Some(TrackLabel::Pedestrian) => "1",
                    _ => "0",
                };
                w.write_record([
                    "cluster",
                    &t,
                    &c.id.to_string(),
                    &c.position.x.to_string(),
                    &c.position.y.to_string(),
                    truth,
                ])?;
            }
            for d in &f.detections {
                w.write_record([
                    "bbox",
                    &t,
                    &d.camera.to_string(),
                    &d.left.to_string(),
                    &d.middle.to_string(),
                    &d.right.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, FusionError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut duration = None;
        let mut observer = Point2::default();
        let mut frames: Vec<Frame> = Vec::new();
        let mut labels = BTreeMap::new();
        for row in r.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |message: String| FusionError::Malformed { line, message };
            let arity = |n: usize| {
                if row.len() == n {
                    Ok(())
                } else {
                    Err(bad(format!("expected {n} fields, found {}", row.len())))
                }
            };
            let float = |i: usize| -> Result<f64, FusionError> {
                let f = row.get(i).unwrap_or_default();
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("field {}: not a finite number: {f:?}", i + 1)))
            };
            let int = |i: usize| -> Result<u32, FusionError> {
                let f = row.get(i).unwrap_or_default();
                f.parse::<u32>()
                    .map_err(|_| bad(format!("field {}: not an integer: {f:?}", i + 1)))
            };
            let kind = row.get(0).unwrap_or_default();
            if kind == "duration" {
                arity(2)?;
                duration = Some(float(1)?);
                continue;
            }
            if !matches!(kind, "pose" | "cluster" | "bbox") {
                return Err(bad(format!("unknown record kind {kind:?}")));
            }
            let time = float(1)?;
            if let Some(last) = frames.last() {
                if time < last.time {
                    return Err(bad(format!("time {time} goes backwards")));
                }
            }
            if kind == "pose" {
                arity(4)?;
                observer = Point2::new(float(2)?, float(3)?);
                if let Some(f) = frames.last_mut().filter(|f| f.time == time) {
                    f.observer = observer;
                }
                continue;
            }
            if frames.last().is_none_or(|f| f.time != time) {
                frames.push(Frame {
                    time,
                    observer,
                    ..Frame::default()
                });
            }
            let frame = frames.last_mut().unwrap();
            if kind == "cluster" {
                arity(6)?;
                let id = int(2)?;
                let label = match row.get(5).unwrap_or_default() {
                    "1" => TrackLabel::Pedestrian,
                    "0" => TrackLabel::Clutter,
                    other => return Err(bad(format!("truth must be 0 or 1, got {other:?}"))),
                };
                if labels.insert(id, label).is_some_and(|l| l != label) {
                    return Err(bad(format!("cluster {id} changes its truth label")));
                }
                if frame.clusters.iter().any(|c| c.id == id) {
                    return Err(bad(format!("cluster {id} appears twice at time {time}")));
                }
                frame.clusters.push(ClusterFix {
                    id,
                    position: Point2::new(float(3)?, float(4)?),
                });
            } else {
                arity(6)?;
                let (left, middle, right) = (float(3)?, float(4)?, float(5)?);
                if !(left <= middle && middle <= right) {
                    return Err(bad("bbox vectors must satisfy left <= mid <= right".to_string()));
                }
                frame.detections.push(BBoxVectorSet {
                    time,
                    camera: int(2)?,
                    left,
                    middle,
                    right,
                });
            }
        }
        let duration_s = duration.ok_or(FusionError::ZeroDuration(0.0))?;
        if !(duration_s > 0.0) {
            return Err(FusionError::ZeroDuration(duration_s));
        }
        Ok(Self {
            duration_s,
            frames,
            labels,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FusionError> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FusionError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

struct Object {
    label: TrackLabel,
    width: f64,
    samples: Vec<(usize, Point2)>,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Entry point on the sensor circle and a velocity whose line passes no
/// closer than `min_range` to the origin.
fn walker_path<R: Rng + ?Sized>(cfg: &CorpusConfig, rng: &mut R) -> (Point2, Point2, f64) {
    let r = cfg.sensor_range;
    loop {
        let entry = Point2::default().add_scaled(Point2::unit_from_angle(rng.random_range(-PI..PI)), r);
        let aim = Point2::new(rng.random_range(-r..r), rng.random_range(-r..r));
        let dir = aim - entry;
        let len = dir.norm();
        if len < 1e-6 {
            continue;
        }
        let u = Point2::new(dir.x / len, dir.y / len);
        let closest = entry.cross(u).abs();
        let along = -entry.dot(u);
        if along <= 0.0 || closest < cfg.min_range || closest >= r {
            continue;
        }
        let chord = 2.0 * along;
        let speed = loop {
            let s = Normal::new(cfg.walk_speed_mean, cfg.walk_speed_std).unwrap().sample(rng);
            if s >= 0.3 {
                break s;
            }
        };
        return (entry, Point2::new(u.x * speed, u.y * speed), chord / speed);
    }
}

fn bbox<R: Rng + ?Sized>(
    cfg: &CorpusConfig,
    rng: &mut R,
    time: f64,
    bearing: f64,
    range: f64,
    width: f64,
    noise_deg: f64,
) -> BBoxVectorSet {
    let bias = cfg.calibration_bias_deg.to_radians();
    let noise = |rng: &mut R, std_deg: f64| {
        if std_deg > 0.0 {
            Normal::new(0.0, std_deg.to_radians()).unwrap().sample(rng)
        } else {
            0.0
        }
    };
    let raw = bearing + bias + noise(rng, noise_deg);
    let middle = raw.sin().atan2(raw.cos());
    let half = (0.5 * width / range.max(1e-3)).atan();
    let left = middle - (half + noise(rng, cfg.edge_noise_deg)).max(0.0);
    let right = middle + (half + noise(rng, cfg.edge_noise_deg)).max(0.0);
    let sector = TAU / cfg.cameras as f64;
    let camera = (((middle + PI) / sector).floor() as u32).min(cfg.cameras - 1);
    BBoxVectorSet {
        time,
        camera,
        left,
        middle,
        right,
    }
}

/// Builds a labelled corpus. Cluster ids are shuffled so they carry no
/// information about the label.
pub fn generate_detection_corpus<R: Rng + ?Sized>(
    cfg: &CorpusConfig,
    rng: &mut R,
) -> Result<DetectionCorpus, FusionError> {
    cfg.validate()?;
    let n_frames = (cfg.duration_s * cfg.frame_hz).floor() as usize;
    let frame_time = |k: usize| k as f64 / cfg.frame_hz;
    let mut objects: Vec<Object> = Vec::new();

    let mut peds = 0;
    while peds < cfg.pedestrians {
        let (entry, vel, life) = walker_path(cfg, rng);
        let start = uniform(rng, (0.0, (cfg.duration_s - life).max(0.0)));
        let grouped = peds + 1 < cfg.pedestrians && rng.random_bool(cfg.group_fraction);
        let first = (start * cfg.frame_hz).ceil() as usize;
        let last = (((start + life) * cfg.frame_hz).floor() as usize).min(n_frames.saturating_sub(1));
        let path: Vec<(usize, Point2)> = (first..=last)
            .map(|k| (k, entry.add_scaled(vel, frame_time(k) - start)))
            .filter(|(_, p)| p.norm() <= cfg.sensor_range)
            .collect();
        if path.len() < 2 {
            continue;
        }
        let speed = vel.norm();
        let side = Point2::new(-vel.y / speed, vel.x / speed);
        objects.push(Object {
            label: TrackLabel::Pedestrian,
            width: cfg.pedestrian_width,
            samples: path.clone(),
        });
        peds += 1;
        if grouped {
            objects.push(Object {
                label: TrackLabel::Pedestrian,
                width: cfg.pedestrian_width,
                samples: path.iter().map(|&(k, p)| (k, p.add_scaled(side, cfg.group_spacing))).collect(),
            });
            peds += 1;
        }
    }

    for _ in 0..cfg.clutter {
        let r = uniform(rng, (cfg.min_range, cfg.sensor_range));
        let pos = Point2::default().add_scaled(Point2::unit_from_angle(rng.random_range(-PI..PI)), r);
        let life = uniform(rng, cfg.clutter_life_s).min(cfg.duration_s);
        let start = uniform(rng, (0.0, cfg.duration_s - life));
        let width = uniform(rng, cfg.clutter_width);
        let first = (start * cfg.frame_hz).ceil() as usize;
        let last = (((start + life) * cfg.frame_hz).floor() as usize).min(n_frames.saturating_sub(1));
        objects.push(Object {
            label: TrackLabel::Clutter,
            width,
            samples: (first..=last).map(|k| (k, pos)).collect(),
        });
    }

    let mut ids: Vec<ClusterId> = (0..objects.len() as ClusterId).collect();
    ids.shuffle(rng);

    let mut frames: Vec<Frame> = (0..n_frames)
        .map(|k| Frame {
            time: frame_time(k),
            ..Frame::default()
        })
        .collect();
    let mut labels = BTreeMap::new();
    for (obj, &id) in objects.iter().zip(&ids) {
        labels.insert(id, obj.label);
        for &(k, p) in &obj.samples {
            frames[k].clusters.push(ClusterFix { id, position: p });
        }
    }

    let widths: BTreeMap<ClusterId, (TrackLabel, f64)> =
        objects.iter().zip(&ids).map(|(o, &id)| (id, (o.label, o.width))).collect();
    let false_per_frame = cfg.false_detections_per_min / 60.0 / cfg.frame_hz;
    let false_count = Poisson::new(false_per_frame).ok();
    for f in &mut frames {
        f.clusters.sort_by_key(|c| c.id);
        for c in &f.clusters {
            let (label, width) = widths[&c.id];
            let p = match label {
                TrackLabel::Pedestrian => 1.0 - cfg.miss_rate,
                TrackLabel::Clutter => cfg.clutter_detect_prob,
            };
            if p > 0.0 && rng.random_bool(p) {
                let bearing = f.observer.bearing_to(c.position);
                let range = f.observer.distance(c.position);
                let noise = match label {
                    TrackLabel::Pedestrian => cfg.bearing_noise_deg,
                    TrackLabel::Clutter => cfg.false_bearing_noise_deg,
                };
                f.detections.push(bbox(cfg, rng, f.time, bearing, range, width, noise));
                f.sources.push(Some(c.id));
            }
        }
        if let Some(dist) = &false_count {
            let n = dist.sample(rng) as usize;
            for _ in 0..n {
                let bearing = rng.random_range(-PI..PI);
                let range = uniform(rng, (cfg.min_range, cfg.sensor_range));
                f.detections.push(bbox(cfg, rng, f.time, bearing, range, cfg.pedestrian_width, 0.0));
                f.sources.push(None);
            }
        }
    }
    frames.retain(|f| !f.clusters.is_empty() || !f.detections.is_empty());
    Ok(DetectionCorpus {
        duration_s: cfg.duration_s,
        frames,
        labels,
    })
}
