//! Explicit Runge-Kutta steppers on flat complex vectors.

use super::system::OdeSystem;
use crate::{Error, Result, C64};

pub(crate) struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Rk4 { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    pub fn step(&mut self, sys: &mut dyn OdeSystem, t: f64, h: f64, piece: usize, x: &mut [C64]) {
        let half = 0.5 * h;
        sys.rhs(t, piece, x, &mut self.k1);
        axpy(&mut self.tmp, x, half, &self.k1);
        sys.rhs(t + half, piece, &self.tmp, &mut self.k2);
        axpy(&mut self.tmp, x, half, &self.k2);
        sys.rhs(t + half, piece, &self.tmp, &mut self.k3);
        axpy(&mut self.tmp, x, h, &self.k3);
        sys.rhs(t + h, piece, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..x.len() {
            x[i] += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }
}

#[inline]
fn axpy(out: &mut [C64], x: &[C64], a: f64, k: &[C64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub(crate) struct DormandPrince {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    next: Vec<C64>,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub largest_step: f64,
}

impl DormandPrince {
    pub fn new(n: usize, rtol: f64, atol: f64, max_step: f64) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        DormandPrince {
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            next: z,
            rtol,
            atol,
            max_step,
            accepted: 0,
            rejected: 0,
            largest_step: 0.0,
        }
    }

    /// Integrates from `t0` to `t1` with error control; `h` is the initial
    /// step guess and the last accepted step size is returned.
    pub fn integrate(
        &mut self,
        sys: &mut dyn OdeSystem,
        t0: f64,
        t1: f64,
        piece: usize,
        x: &mut [C64],
        mut h: f64,
    ) -> Result<f64> {
        let mut t = t0;
        let min_step = 1e-14 * (t1 - t0).abs().max(t1.abs());
        h = h.min(self.max_step).min(t1 - t0);
        while t < t1 {
            let last = t + h >= t1;
            let step = if last { t1 - t } else { h };
            for s in 0..7 {
                for i in 0..x.len() {
                    let mut acc = x[i];
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        acc += step * a * self.k[j][i];
                    }
                    self.tmp[i] = acc;
                }
                let (tmp, k) = (&self.tmp, &mut self.k[s]);
                sys.rhs(t + C[s] * step, piece, tmp, k);
            }
            let mut err = 0.0f64;
            for i in 0..x.len() {
                let mut hi = x[i];
                let mut lo = x[i];
                for s in 0..7 {
                    hi += step * B5[s] * self.k[s][i];
                    lo += step * B4[s] * self.k[s][i];
                }
                self.next[i] = hi;
                let scale = self.atol + self.rtol * x[i].norm().max(hi.norm());
                err = err.max((hi - lo).norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integration { time: t, reason: "non-finite state".into() });
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                x.copy_from_slice(&self.next);
                self.accepted += 1;
                self.largest_step = self.largest_step.max(step);
            } else {
                self.rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (step * factor).min(self.max_step);
            if h < min_step {
                return Err(Error::Integration { time: t, reason: format!("step size underflow ({h:.3e} s)") });
            }
        }
        Ok(h)
    }
}
