use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use eventack_core::solver::BearingSample;
use serde::{Deserialize, Serialize};

use super::PipelineError;

/// How the camera axes relate to the vehicle frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mount {
    /// Camera frame is the vehicle frame (x right, y forward).
    #[default]
    VehicleNative,
    /// Standard optical frame looking forward (x right, y down, z forward).
    /// Optical x coincides with vehicle x, so bearings carry over unchanged.
    OpticalZForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub focal: f64,
    /// Principal point abscissa, px.
    pub cx: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub mount: Mount,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.focal > 0.0) {
            return Err(PipelineError::Intrinsics(format!(
                "focal must be positive, got {}",
                self.focal
            )));
        }
        if !(self.cx >= 0.0 && self.cx <= f64::from(self.width)) {
            return Err(PipelineError::Intrinsics(format!(
                "cx {} outside the image width {}",
                self.cx, self.width
            )));
        }
        if self.height == 0 {
            return Err(PipelineError::Intrinsics("height must be positive".into()));
        }
        Ok(())
    }

    pub fn bearing(&self, u: f64) -> f64 {
        (u - self.cx) / self.focal
    }

    pub fn pixel(&self, x: f64) -> f64 {
        x * self.focal + self.cx
    }
}

pub fn read_intrinsics(path: &Path) -> Result<CameraIntrinsics, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::io(path.display().to_string(), e))?;
    let cam: CameraIntrinsics = toml::from_str(&text)
        .map_err(|e| PipelineError::Intrinsics(format!("{}: {e}", path.display())))?;
    cam.validate()?;
    Ok(cam)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub u: f64,
    pub v: f64,
    pub t: f64,
    /// -1 or +1. Carried through but never used by the estimator.
    pub polarity: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrack {
    pub track_id: u64,
    /// Strictly increasing in `t`.
    pub events: Vec<Event>,
}

impl EventTrack {
    pub fn duration(&self) -> f64 {
        match (self.events.first(), self.events.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn t_first(&self) -> f64 {
        self.events.first().map_or(f64::NAN, |e| e.t)
    }

    pub fn t_last(&self) -> f64 {
        self.events.last().map_or(f64::NAN, |e| e.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackValidity {
    pub min_duration: f64,
    pub max_duration: f64,
    pub min_events: usize,
}

impl Default for TrackValidity {
    fn default() -> Self {
        Self {
            min_duration: 0.15,
            max_duration: 0.25,
            min_events: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum DropReason {
    TooShort { duration: f64 },
    TooLong { duration: f64 },
    TooFewEvents { events: usize },
    DuplicateTimestamp { t: f64 },
    OutsideImage { u: f64, v: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DroppedTrack {
    pub track_id: u64,
    #[serde(flatten)]
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackReport {
    pub tracks: Vec<EventTrack>,
    pub dropped: Vec<DroppedTrack>,
}

impl TrackReport {
    pub fn input_tracks(&self) -> usize {
        self.tracks.len() + self.dropped.len()
    }
}

#[derive(Debug, Deserialize)]
struct TrackRow {
    track_id: u64,
    t: f64,
    u: f64,
    v: f64,
    polarity: i8,
}

pub fn parse_tracks(
    path: &Path,
    intrinsics: &CameraIntrinsics,
    validity: &TrackValidity,
) -> Result<TrackReport, PipelineError> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| PipelineError::io(&name, e))?;
    parse_tracks_from(file, &name, intrinsics, validity)
}

/// Reads `track_id,t,u,v,polarity` rows, groups them by track and applies
/// the validity rules. Tracks come back sorted by id.
pub fn parse_tracks_from(
    reader: impl Read,
    name: &str,
    intrinsics: &CameraIntrinsics,
    validity: &TrackValidity,
) -> Result<TrackReport, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut grouped: BTreeMap<u64, Vec<Event>> = BTreeMap::new();
    for row in rdr.deserialize::<TrackRow>() {
        let row = row.map_err(|e| PipelineError::from_csv(name, e))?;
        if row.polarity != 1 && row.polarity != -1 {
            return Err(PipelineError::Parse {
                path: name.to_string(),
                line: rdr.position().line(),
                column: 5,
                message: format!("polarity must be -1 or +1, got {}", row.polarity),
            });
        }
        if !row.t.is_finite() || !row.u.is_finite() || !row.v.is_finite() {
            return Err(PipelineError::Parse {
                path: name.to_string(),
                line: rdr.position().line(),
                column: 0,
                message: "non-finite value".into(),
            });
        }
        grouped.entry(row.track_id).or_default().push(Event {
            u: row.u,
            v: row.v,
            t: row.t,
            polarity: row.polarity,
        });
    }
    if grouped.is_empty() {
        return Err(PipelineError::EmptyInput(name.to_string()));
    }

    let (w, h) = (f64::from(intrinsics.width), f64::from(intrinsics.height));
    let mut report = TrackReport {
        tracks: Vec::new(),
        dropped: Vec::new(),
    };
    for (track_id, mut events) in grouped {
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
        let track = EventTrack { track_id, events };
        let reason = if let Some(e) = track
            .events
            .iter()
            .find(|e| !(e.u >= 0.0 && e.u < w && e.v >= 0.0 && e.v < h))
        {
            Some(DropReason::OutsideImage { u: e.u, v: e.v })
        } else if let Some(p) = track.events.windows(2).find(|p| p[1].t <= p[0].t) {
            Some(DropReason::DuplicateTimestamp { t: p[0].t })
        } else if track.events.len() < validity.min_events {
            Some(DropReason::TooFewEvents {
                events: track.events.len(),
            })
        } else if track.duration() < validity.min_duration {
            Some(DropReason::TooShort {
                duration: track.duration(),
            })
        } else if track.duration() > validity.max_duration {
            Some(DropReason::TooLong {
                duration: track.duration(),
            })
        } else {
            None
        };
        match reason {
            Some(reason) => report.dropped.push(DroppedTrack { track_id, reason }),
            None => report.tracks.push(track),
        }
    }
    Ok(report)
}

/// Bearings of a track with times relative to `t0`. The row coordinate is
/// dropped.
pub fn normalize(track: &EventTrack, intrinsics: &CameraIntrinsics, t0: f64) -> Vec<BearingSample> {
    // Both mounts share the horizontal axis; see `Mount`.
    track
        .events
        .iter()
        .map(|e| BearingSample::new(intrinsics.bearing(e.u), e.t - t0))
        .collect()
}
