use serde::{Deserialize, Serialize};

use crate::protocol::ProtocolControls;

/// Transformation parameters of the comoving and coexpanding frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Frame {
    pub rho: f64,
    pub rho_dot: f64,
    pub rho_ddot: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
    pub alpha_ddot: f64,
}

/// A time-dependent Hamiltonian `p^2/2m - F x + m omega^2 x^2 / 2 +
/// rho^-2 U((x - alpha) / rho)` together with the frame it is simulated in.
pub trait Drive {
    fn duration(&self) -> f64;
    fn mass(&self) -> f64;
    /// Constant of the Ermakov equation (zero for arbitrary traps).
    fn omega0(&self) -> f64;
    fn frame(&self, t: f64) -> Frame;
    fn omega_sq(&self, t: f64) -> f64;
    fn force(&self, t: f64) -> f64;
    /// Trap center when the drive is a displaced harmonic trap.
    fn trap_center(&self, _t: f64) -> Option<f64> {
        None
    }
    /// Largest `sqrt(|omega^2|)` over the protocol.
    fn max_abs_omega(&self) -> f64;
}

/// Coefficients of the Hamiltonian seen in the moving frame:
/// `p^2 / (2 m rho^2) + quad y^2 + lin y + U(y) / rho^2 + global`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTerms {
    pub inv_rho_sq: f64,
    pub quad: f64,
    pub lin: f64,
    pub global: f64,
}

impl FrameTerms {
    /// The quadratic and linear coefficients are the Ermakov and Newton
    /// residuals of the applied controls; both vanish for an exact protocol
    /// except for the `omega0^2 / rho^2` confinement.
    pub fn at<D: Drive + ?Sized>(drive: &D, t: f64) -> Self {
        let f = drive.frame(t);
        let m = drive.mass();
        let w2 = drive.omega_sq(t);
        let force = drive.force(t);
        let (r, rd, rdd) = (f.rho, f.rho_dot, f.rho_ddot);
        let (a, ad, add) = (f.alpha, f.alpha_dot, f.alpha_ddot);
        let quad = 0.5 * m * r * (rdd + w2 * r);
        let lin = m * r * (add + w2 * a - force / m);
        let global = 0.5 * m * w2 * a * a - 0.5 * m * a * a * rdd / r
            + 0.5 * m * a * a * rd * rd / (r * r)
            + m * a * add
            - m * a * ad * rd / r
            + 0.5 * m * ad * ad
            - force * a;
        Self {
            inv_rho_sq: 1.0 / (r * r),
            quad,
            lin,
            global,
        }
    }
}

impl Drive for ProtocolControls {
    fn duration(&self) -> f64 {
        self.t_f
    }

    fn mass(&self) -> f64 {
        self.trap.mass
    }

    fn omega0(&self) -> f64 {
        self.trap.omega0
    }

    fn frame(&self, t: f64) -> Frame {
        let [rho, rho_dot, rho_ddot, _] = self.rho.derivatives(t);
        let [alpha, alpha_dot, alpha_ddot, _] = self.alpha.derivatives(t);
        Frame {
            rho,
            rho_dot,
            rho_ddot,
            alpha,
            alpha_dot,
            alpha_ddot,
        }
    }

    fn omega_sq(&self, t: f64) -> f64 {
        self.omega_sq_sampled(t)
    }

    fn force(&self, t: f64) -> f64 {
        self.force_sampled(t)
    }

    fn trap_center(&self, t: f64) -> Option<f64> {
        self.x0.as_ref()?;
        let w2 = self.omega_sq_sampled(t);
        Some(self.force_sampled(t) / (self.trap.mass * w2))
    }

    fn max_abs_omega(&self) -> f64 {
        self.omega_sq
            .iter()
            .fold(0.0_f64, |m, w2| m.max(w2.abs().sqrt()))
    }
}

/// Trap switched off at `t = 0` and replaced by a uniform force: free flight
/// with constant acceleration `force / mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformForce {
    pub mass: f64,
    /// Frequency of the trap the initial state was prepared in.
    pub omega0: f64,
    pub force: f64,
    pub duration: f64,
}

impl Drive for UniformForce {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn omega0(&self) -> f64 {
        self.omega0
    }

    fn frame(&self, t: f64) -> Frame {
        let acc = self.force / self.mass;
        Frame {
            rho: 1.0,
            alpha: 0.5 * acc * t * t,
            alpha_dot: acc * t,
            alpha_ddot: acc,
            ..Frame::default()
        }
    }

    fn omega_sq(&self, _t: f64) -> f64 {
        0.0
    }

    fn force(&self, _t: f64) -> f64 {
        self.force
    }

    fn max_abs_omega(&self) -> f64 {
        0.0
    }
}
