//! Arm-speed state machine driven by per-frame detection similarity.
//!
//! Below `slow_band_low` the arms run normally, inside the closed band up to
//! `stop_threshold` they slow down, and above it they stop. Speed follows
//! `base_speed * (1 - similarity)` outside the stop band. A run of
//! `alarm_consecutive` frames above the stop threshold raises one alarm,
//! which stays latched until a frame at or below the threshold arrives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MOTORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub slow_band_low: f64,
    pub stop_threshold: f64,
    pub alarm_consecutive: u32,
    /// Metres per second.
    pub base_speed: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { slow_band_low: 0.7, stop_threshold: 0.9, alarm_consecutive: 5, base_speed: 0.56 }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::Config { key: key.into(), reason: reason.into() });
        if !(0.0..=1.0).contains(&self.slow_band_low) || !(0.0..=1.0).contains(&self.stop_threshold) {
            return bad("slow_band_low", "band limits must lie in [0, 1]");
        }
        if self.slow_band_low > self.stop_threshold {
            return bad("slow_band_low", "must not exceed stop_threshold");
        }
        if self.alarm_consecutive == 0 {
            return bad("alarm_consecutive", "must be at least 1");
        }
        if !(self.base_speed.is_finite() && self.base_speed >= 0.0) {
            return bad("base_speed", "must be a non-negative number");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Normal,
    Slow,
    Stopped,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Normal => "normal",
            Self::Slow => "slow",
            Self::Stopped => "stopped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub mode: Mode,
    pub consecutive_high: u32,
    /// Two vertical-slide motors, then two horizontal-arm motors.
    pub motor_speeds: [f64; MOTORS],
    pub alarm_latched: bool,
    /// Frames seen so far; the next frame is `frames_seen + 1`.
    pub frames_seen: u64,
    pub config: ControllerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlEvent {
    SpeedChange { frame: u64, speeds: [f64; MOTORS] },
    Alarm { frame: u64 },
}

impl ControllerState {
    pub fn new(config: ControllerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self::fresh(config))
    }

    fn fresh(config: ControllerConfig) -> Self {
        Self {
            mode: Mode::Normal,
            consecutive_high: 0,
            motor_speeds: [config.base_speed; MOTORS],
            alarm_latched: false,
            frames_seen: 0,
            config,
        }
    }

    /// Back to full speed with the counter cleared and the alarm unlatched.
    pub fn reset(&self) -> Self {
        Self::fresh(self.config)
    }

    /// Speed all motors take for `similarity` (0 in the stop band).
    pub fn speed_for(&self, similarity: f64) -> f64 {
        if similarity > self.config.stop_threshold {
            0.0
        } else {
            self.config.base_speed * (1.0 - similarity)
        }
    }

    pub fn step(&self, similarity: f64) -> Result<(Self, Vec<ControlEvent>)> {
        if !(0.0..=1.0).contains(&similarity) {
            return Err(Error::SimilarityOutOfRange(similarity));
        }
        let cfg = self.config;
        let frame = self.frames_seen + 1;
        let mut next = Self { frames_seen: frame, ..self.clone() };
        let mut events = Vec::new();

        next.mode = if similarity > cfg.stop_threshold {
            Mode::Stopped
        } else if similarity >= cfg.slow_band_low {
            Mode::Slow
        } else {
            Mode::Normal
        };
        next.motor_speeds = [self.speed_for(similarity); MOTORS];

        if next.mode == Mode::Stopped {
            next.consecutive_high = self.consecutive_high.saturating_add(1);
            if next.consecutive_high >= cfg.alarm_consecutive && !self.alarm_latched {
                next.alarm_latched = true;
                events.push(ControlEvent::Alarm { frame });
            }
        } else {
            next.consecutive_high = 0;
            next.alarm_latched = false;
        }

        if next.motor_speeds.iter().zip(&self.motor_speeds).any(|(a, b)| (a - b).abs() > 1e-9) {
            events.insert(0, ControlEvent::SpeedChange { frame, speeds: next.motor_speeds });
        }
        Ok((next, events))
    }
}

/// One transcript row per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRow {
    pub frame: u64,
    pub similarity: f64,
    pub mode: Mode,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
    pub alarm: bool,
}

/// Runs a whole similarity stream from a fresh state.
pub fn simulate(config: ControllerConfig, stream: &[f64]) -> Result<Vec<TranscriptRow>> {
    let mut state = ControllerState::new(config)?;
    let mut rows = Vec::with_capacity(stream.len());
    for &s in stream {
        let (next, events) = state.step(s)?;
        let [v1, v2, v3, v4] = next.motor_speeds;
        rows.push(TranscriptRow {
            frame: next.frames_seen,
            similarity: s,
            mode: next.mode,
            v1,
            v2,
            v3,
            v4,
            alarm: events.iter().any(|e| matches!(e, ControlEvent::Alarm { .. })),
        });
        state = next;
    }
    Ok(rows)
}
