use serde::{Deserialize, Serialize};

/// Joint state of the two-level systems on `A` and `B`, in the order used
/// for Fock-space enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpinPattern {
    DownDown,
    DownUp,
    UpDown,
    UpUp,
}

impl SpinPattern {
    pub const ALL: [SpinPattern; 4] = [
        SpinPattern::DownDown,
        SpinPattern::DownUp,
        SpinPattern::UpDown,
        SpinPattern::UpUp,
    ];

    pub fn new(a_up: bool, b_up: bool) -> Self {
        match (a_up, b_up) {
            (false, false) => SpinPattern::DownDown,
            (false, true) => SpinPattern::DownUp,
            (true, false) => SpinPattern::UpDown,
            (true, true) => SpinPattern::UpUp,
        }
    }

    pub fn a_up(self) -> bool {
        matches!(self, SpinPattern::UpDown | SpinPattern::UpUp)
    }

    pub fn b_up(self) -> bool {
        matches!(self, SpinPattern::DownUp | SpinPattern::UpUp)
    }

    /// Position in [`SpinPattern::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Flip the spin on site `A` (`site == 0`) or `B` (`site == 1`).
    pub fn flip(self, site: usize) -> Self {
        match site {
            0 => SpinPattern::new(!self.a_up(), self.b_up()),
            1 => SpinPattern::new(self.a_up(), !self.b_up()),
            _ => panic!("spin site must be 0 (A) or 1 (B), got {site}"),
        }
    }

    /// `σ_z^A + σ_z^B`.
    pub fn total_sz(self) -> i32 {
        let s = |up: bool| if up { 1 } else { -1 };
        s(self.a_up()) + s(self.b_up())
    }

    /// Eigenvalue of `½Ω_A σ_z^A + ½Ω_B σ_z^B`.
    pub fn energy(self, omega_a: f64, omega_b: f64) -> f64 {
        let s = |up: bool| if up { 0.5 } else { -0.5 };
        s(self.a_up()) * omega_a + s(self.b_up()) * omega_b
    }
}
