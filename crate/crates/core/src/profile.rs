//! Load profiles: CSV persistence, smoothing and synthetic generation.

use std::path::Path;

use chrono::{Duration, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEMO_SPEC_JSON: &str = include_str!("../data/demo_profile_spec.json");
const MINUTES_PER_DAY: f64 = 1440.0;
const TIMESTAMP_FORMATS: [&str; 3] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"];

/// Uniformly sampled refrigeration load, in kW per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub step_minutes: f64,
    pub loads: Vec<f64>,
    /// Timestamp of stage 0, when the source carried timestamps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<NaiveDateTime>,
}

impl LoadProfile {
    pub fn new(step_minutes: f64, loads: Vec<f64>) -> Result<Self> {
        if !(step_minutes > 0.0 && step_minutes.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "step must be positive, got {step_minutes} min"
            )));
        }
        if loads.is_empty() {
            return Err(Error::InvalidProfile("profile has no samples".into()));
        }
        if let Some((k, q)) = loads
            .iter()
            .enumerate()
            .find(|(_, q)| !(q.is_finite() && **q >= 0.0))
        {
            return Err(Error::InvalidProfile(format!("stage {k} has load {q} kW")));
        }
        Ok(LoadProfile {
            step_minutes,
            loads,
            start: None,
        })
    }

    pub fn with_start(mut self, start: NaiveDateTime) -> Self {
        self.start = Some(start);
        self
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.loads.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.loads.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.loads.iter().copied().fold(0.0, f64::max)
    }

    pub fn stages_per_day(&self) -> f64 {
        MINUTES_PER_DAY / self.step_minutes
    }
}

/// Reads a `stage_or_timestamp,load_kw` file. Stage-indexed files are
/// taken to be sampled every minute; see [`load_csv_with_step`].
pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadProfile> {
    load_csv_with_step(path, 1.0)
}

/// Like [`load_csv`], with the step used for stage-indexed files.
/// Timestamped files always infer their own step.
pub fn load_csv_with_step(path: impl AsRef<Path>, stage_step_minutes: f64) -> Result<LoadProfile> {
    let file = std::fs::File::open(path)?;
    read_csv(file, stage_step_minutes)
}

pub fn read_csv<R: std::io::Read>(reader: R, stage_step_minutes: f64) -> Result<LoadProfile> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut keys: Vec<String> = Vec::new();
    let mut loads = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // Row numbers count the header as row 1.
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Parse {
                row,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let load: f64 = record[1].parse().map_err(|_| Error::Parse {
            row,
            message: format!("load `{}` is not a number", &record[1]),
        })?;
        if !load.is_finite() || load < 0.0 {
            return Err(Error::Parse {
                row,
                message: format!("load {load} kW is negative or not finite"),
            });
        }
        keys.push(record[0].to_string());
        loads.push(load);
    }
    if loads.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "file has no data rows".into(),
        });
    }

    if keys[0].parse::<i64>().is_ok() {
        let first: i64 = keys[0].parse().unwrap();
        for (i, key) in keys.iter().enumerate() {
            let stage: i64 = key.parse().map_err(|_| Error::Parse {
                row: i + 2,
                message: format!("`{key}` is not a stage index"),
            })?;
            if stage != first + i as i64 {
                return Err(Error::Parse {
                    row: i + 2,
                    message: format!("expected stage {}, found {stage}", first + i as i64),
                });
            }
        }
        return LoadProfile::new(stage_step_minutes, loads);
    }

    let stamps = keys
        .iter()
        .enumerate()
        .map(|(i, key)| {
            parse_timestamp(key).ok_or_else(|| Error::Parse {
                row: i + 2,
                message: format!("`{key}` is neither a stage index nor a timestamp"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let step = if stamps.len() > 1 {
        stamps[1] - stamps[0]
    } else {
        Duration::seconds((stage_step_minutes * 60.0).round() as i64)
    };
    if step <= Duration::zero() {
        return Err(Error::Parse {
            row: 3,
            message: "timestamps must increase".into(),
        });
    }
    for (i, w) in stamps.windows(2).enumerate() {
        if w[1] - w[0] != step {
            return Err(Error::Parse {
                row: i + 3,
                message: format!(
                    "step of {} s differs from the first step of {} s",
                    (w[1] - w[0]).num_seconds(),
                    step.num_seconds()
                ),
            });
        }
    }
    Ok(LoadProfile::new(step.num_seconds() as f64 / 60.0, loads)?.with_start(stamps[0]))
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

pub fn save_csv(profile: &LoadProfile, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(profile, file)
}

pub fn write_csv<W: std::io::Write>(profile: &LoadProfile, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["stage_or_timestamp", "load_kw"])?;
    let step = Duration::seconds((profile.step_minutes * 60.0).round() as i64);
    for (k, q) in profile.loads.iter().enumerate() {
        let key = match profile.start {
            Some(t0) => (t0 + step * k as i32)
                .format(TIMESTAMP_FORMATS[0])
                .to_string(),
            None => k.to_string(),
        };
        w.write_record([key, q.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Centered moving average over `window_minutes`, averaging only the
/// samples that exist near the ends.
pub fn moving_average(profile: &LoadProfile, window_minutes: f64) -> Result<LoadProfile> {
    if !(window_minutes >= profile.step_minutes - 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "window {window_minutes} min is shorter than the {} min step",
            profile.step_minutes
        )));
    }
    let w = ((window_minutes / profile.step_minutes) + 1e-9)
        .floor()
        .max(1.0) as usize;
    let (left, right) = ((w - 1) / 2, w / 2);
    let n = profile.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for q in &profile.loads {
        prefix.push(prefix.last().unwrap() + q);
    }
    let loads = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(left);
            let hi = (k + right).min(n - 1);
            let count = (hi - lo + 1) as f64;
            if profile.loads[lo..=hi]
                .iter()
                .all(|&q| q == profile.loads[k])
            {
                profile.loads[k]
            } else {
                ((prefix[hi + 1] - prefix[lo]) / count).max(0.0)
            }
        })
        .collect();
    Ok(LoadProfile {
        step_minutes: profile.step_minutes,
        loads,
        start: profile.start,
    })
}

/// Parameters of a synthetic weekly-cyclic load. Day 0 is a Monday;
/// days 5 and 6 of every week are the weekend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub horizon_days: u32,
    pub step_minutes: f64,
    pub weekday_peak_kw: f64,
    pub weekday_base_kw: f64,
    pub weekend_plateau_kw: f64,
    pub work_start_hour: f64,
    pub work_end_hour: f64,
    pub noise_std_kw: f64,
    pub seed: u64,
}

impl ProfileSpec {
    /// The bundled illustrative spec, a two-week cycle around 2.8 MW.
    pub fn demo() -> Self {
        Self::from_json(DEMO_SPEC_JSON).expect("bundled spec is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProfileSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.horizon_days == 0 {
            return bad("horizon must be at least one day".into());
        }
        let per_day = MINUTES_PER_DAY / self.step_minutes;
        if !(self.step_minutes > 0.0) || (per_day - per_day.round()).abs() > 1e-9 {
            return bad(format!(
                "step {} min does not divide a day",
                self.step_minutes
            ));
        }
        if !(self.weekday_base_kw >= 0.0
            && self.weekday_peak_kw >= self.weekday_base_kw
            && self.weekend_plateau_kw >= 0.0)
        {
            return bad("need weekday peak >= weekday base >= 0 and weekend plateau >= 0".into());
        }
        let hour_ok = |h: f64| (0.0..24.0).contains(&h);
        if !(hour_ok(self.work_start_hour)
            && hour_ok(self.work_end_hour)
            && self.work_start_hour < self.work_end_hour)
        {
            return bad(format!(
                "working hours {}..{} must satisfy 0 <= start < end < 24",
                self.work_start_hour, self.work_end_hour
            ));
        }
        if !(self.noise_std_kw >= 0.0 && self.noise_std_kw.is_finite()) {
            return bad(format!("noise std {} must be >= 0", self.noise_std_kw));
        }
        Ok(())
    }

    pub fn samples_per_day(&self) -> usize {
        (MINUTES_PER_DAY / self.step_minutes).round() as usize
    }

    /// Noise-free load at sample `k`.
    pub fn nominal(&self, k: usize) -> f64 {
        let minute = k as f64 * self.step_minutes;
        let day = (minute / MINUTES_PER_DAY).floor() as u64;
        let hour = (minute - day as f64 * MINUTES_PER_DAY) / 60.0;
        if day % 7 >= 5 {
            self.weekend_plateau_kw
        } else if hour >= self.work_start_hour && hour < self.work_end_hour {
            self.weekday_peak_kw
        } else {
            self.weekday_base_kw
        }
    }
}

pub fn synth(spec: &ProfileSpec) -> Result<LoadProfile> {
    spec.validate()?;
    let n = spec.horizon_days as usize * spec.samples_per_day();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise =
        Normal::new(0.0, spec.noise_std_kw).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let loads = (0..n)
        .map(|k| {
            let q = spec.nominal(k);
            if spec.noise_std_kw > 0.0 {
                (q + noise.sample(&mut rng)).max(0.0)
            } else {
                q
            }
        })
        .collect();
    LoadProfile::new(spec.step_minutes, loads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(noise: f64) -> ProfileSpec {
        ProfileSpec {
            horizon_days: 7,
            step_minutes: 10.0,
            weekday_peak_kw: 4000.0,
            weekday_base_kw: 2000.0,
            weekend_plateau_kw: 1500.0,
            work_start_hour: 6.0,
            work_end_hour: 18.0,
            noise_std_kw: noise,
            seed: 7,
        }
    }

    #[test]
    fn reads_stage_indexed_rows() {
        let p = read_csv(
            "stage_or_timestamp,load_kw\n0,100\n1,200\n2,150\n".as_bytes(),
            1.0,
        )
        .unwrap();
        assert_eq!(p.loads, [100.0, 200.0, 150.0]);
        assert_eq!(p.step_minutes, 1.0);
        assert_eq!(p.start, None);
    }

    #[test]
    fn reports_bad_rows() {
        let e = read_csv("stage_or_timestamp,load_kw\n0,100\n1,-5\n".as_bytes(), 1.0).unwrap_err();
        assert!(matches!(e, Error::Parse { row: 3, .. }), "{e}");
        let e = read_csv("stage_or_timestamp,load_kw\n0,100\n2,5\n".as_bytes(), 1.0).unwrap_err();
        assert!(matches!(e, Error::Parse { row: 3, .. }), "{e}");
        let e = read_csv("stage_or_timestamp,load_kw\n".as_bytes(), 1.0).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        let e = read_csv("stage_or_timestamp,load_kw\n0,abc\n".as_bytes(), 1.0).unwrap_err();
        assert!(matches!(e, Error::Parse { row: 2, .. }));
    }

    #[test]
    fn timestamps_set_the_step() {
        let text = "stage_or_timestamp,load_kw\n\
                    2024-03-04T00:00:00,1\n2024-03-04T00:05:00,2\n2024-03-04T00:10:00,3\n";
        let p = read_csv(text.as_bytes(), 1.0).unwrap();
        assert_eq!(p.step_minutes, 5.0);
        let mut out = Vec::new();
        write_csv(&p, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);

        let ragged = "stage_or_timestamp,load_kw\n\
                      2024-03-04 00:00,1\n2024-03-04 00:05,2\n2024-03-04 00:11,3\n";
        assert!(matches!(
            read_csv(ragged.as_bytes(), 1.0),
            Err(Error::Parse { row: 4, .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = synth(&spec(300.0)).unwrap();
        let mut out = Vec::new();
        write_csv(&p, &mut out).unwrap();
        let back = read_csv(out.as_slice(), p.step_minutes).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn moving_average_examples() {
        let p = LoadProfile::new(1.0, vec![0.0, 0.0, 9.0, 0.0, 0.0]).unwrap();
        let m = moving_average(&p, 3.0).unwrap();
        assert_eq!(m.loads, [0.0, 3.0, 3.0, 3.0, 0.0]);
        let c = LoadProfile::new(1.0, vec![7.5; 50]).unwrap();
        assert_eq!(moving_average(&c, 20.0).unwrap(), c);
        assert!(moving_average(&c, 0.5).is_err());
    }

    #[test]
    fn synth_levels_without_noise() {
        let s = spec(0.0);
        let p = synth(&s).unwrap();
        assert_eq!(p.len(), 7 * 144);
        // Monday 10:00 and Sunday 10:00.
        assert_eq!(p.loads[60], 4000.0);
        assert_eq!(p.loads[6 * 144 + 60], 1500.0);
        assert_eq!(p.loads[0], 2000.0);
    }

    #[test]
    fn synth_is_deterministic() {
        assert_eq!(synth(&spec(200.0)).unwrap(), synth(&spec(200.0)).unwrap());
        let mut other = spec(200.0);
        other.seed = 8;
        assert_ne!(synth(&spec(200.0)).unwrap(), synth(&other).unwrap());
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(0.0);
        s.step_minutes = 7.0;
        assert!(s.validate().is_err());
        let mut s = spec(0.0);
        s.weekday_base_kw = 5000.0;
        assert!(s.validate().is_err());
        let mut s = spec(0.0);
        s.work_end_hour = 3.0;
        assert!(s.validate().is_err());
        ProfileSpec::demo().validate().unwrap();
    }
}
