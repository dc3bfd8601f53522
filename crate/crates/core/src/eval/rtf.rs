use std::time::Duration;

pub const DEFAULT_FRAME_SHIFT: Duration = Duration::from_millis(10);

/// Wall-clock time over audio duration, with audio length `frames × frame_shift`.
pub fn rtf_measure(elapsed: Duration, num_frames: usize, frame_shift: Duration) -> f64 {
    let audio = frame_shift.as_secs_f64() * num_frames as f64;
    if audio <= 0.0 {
        return 0.0;
    }
    elapsed.as_secs_f64() / audio
}

/// Sums decode time and audio time over many runs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RtfAggregate {
    pub elapsed: Duration,
    pub frames: usize,
}

impl RtfAggregate {
    pub fn add(&mut self, elapsed: Duration, frames: usize) {
        self.elapsed += elapsed;
        self.frames += frames;
    }

    pub fn rtf(&self, frame_shift: Duration) -> f64 {
        rtf_measure(self.elapsed, self.frames, frame_shift)
    }
}
