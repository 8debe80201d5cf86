use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub hands: u64,
    pub smoothed_ev: f64,
}

/// Smoothed per-hand return against cumulative simulated hands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCurve {
    /// Trailing window length in hands.
    pub window: u64,
    /// Emission interval in hands.
    pub every: u64,
    pub points: Vec<CurvePoint>,
}

impl TrainCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("hands,smoothed_ev\n");
        for p in &self.points {
            s.push_str(&format!("{},{:.6}\n", p.hands, p.smoothed_ev));
        }
        s
    }
}

/// Trailing-window mean of returns, emitted every `every` hands.
#[derive(Debug, Clone)]
pub struct CurveRecorder {
    ring: Vec<f64>,
    pos: usize,
    filled: usize,
    sum: f64,
    count: u64,
    every: u64,
    points: Vec<CurvePoint>,
}

impl CurveRecorder {
    pub fn new(window: u64, every: u64) -> CurveRecorder {
        assert!(window > 0 && every > 0, "curve window and interval must be positive");
        CurveRecorder {
            ring: vec![0.0; window as usize],
            pos: 0,
            filled: 0,
            sum: 0.0,
            count: 0,
            every,
            points: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, ret: f64) {
        if self.filled == self.ring.len() {
            self.sum -= self.ring[self.pos];
        } else {
            self.filled += 1;
        }
        self.ring[self.pos] = ret;
        self.sum += ret;
        self.pos = (self.pos + 1) % self.ring.len();
        self.count += 1;
        if self.count % self.every == 0 {
            self.points.push(CurvePoint { hands: self.count, smoothed_ev: self.sum / self.filled as f64 });
        }
    }

    pub fn hands(&self) -> u64 {
        self.count
    }

    pub fn finish(self) -> TrainCurve {
        TrainCurve { window: self.ring.len() as u64, every: self.every, points: self.points }
    }
}
