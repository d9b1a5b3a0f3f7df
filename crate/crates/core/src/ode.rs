//! Classical fixed-step fourth-order Runge–Kutta.

use crate::scalar::Scalar;

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Rk4Workspace<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    stage: Vec<T>,
}

impl<T: Scalar> Rk4Workspace<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![T::zero(); dim];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), stage: z }
    }
}

/// Advances `y` in place from `t` to `t + dt`. `rate(t, y, out)` writes `dy/dt` into `out`.
pub fn rk4_step<T, E, F>(t: T, dt: T, y: &mut [T], ws: &mut Rk4Workspace<T>, mut rate: F) -> Result<(), E>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), E>,
{
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    rate(t, y, &mut ws.k1)?;
    for ((s, &yi), &k) in ws.stage.iter_mut().zip(y.iter()).zip(&ws.k1) {
        *s = yi + half * dt * k;
    }
    rate(t + half * dt, &ws.stage, &mut ws.k2)?;
    for ((s, &yi), &k) in ws.stage.iter_mut().zip(y.iter()).zip(&ws.k2) {
        *s = yi + half * dt * k;
    }
    rate(t + half * dt, &ws.stage, &mut ws.k3)?;
    for ((s, &yi), &k) in ws.stage.iter_mut().zip(y.iter()).zip(&ws.k3) {
        *s = yi + dt * k;
    }
    rate(t + dt, &ws.stage, &mut ws.k4)?;
    for (i, yi) in y.iter_mut().enumerate() {
        *yi += dt * sixth * (ws.k1[i] + two * ws.k2[i] + two * ws.k3[i] + ws.k4[i]);
    }
    Ok(())
}
