/// Bias-corrected Adam moments for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> AdamState {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}

/// One Adam descent step: `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
/// Callers maximizing an objective pass the negated gradient.
pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState, lr: f64, beta1: f64, beta2: f64, eps: f64) {
    assert_eq!(params.len(), grad.len(), "parameter and gradient shapes differ");
    assert_eq!(params.len(), state.m.len(), "parameter and moment shapes differ");
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut state.m).zip(&mut state.v) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![1.0, -2.0, 0.5];
        let mut s = AdamState::new(3);
        for _ in 0..10 {
            adam_step(&mut p, &[0.0; 3], &mut s, 3e-3, 0.9, 0.999, 1e-8);
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_closed_form() {
        let (lr, b1, b2, eps) = (3e-3, 0.9, 0.999, 1e-8);
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[1.0], &mut s, lr, b1, b2, eps);
        let m_hat = (1.0 - b1) * 1.0 / (1.0 - b1);
        let v_hat = (1.0 - b2) * 1.0 / (1.0 - b2);
        let expected = -lr * m_hat / (f64::sqrt(v_hat) + eps);
        assert_eq!(p[0], expected);
        assert!((p[0] + 3e-3).abs() < 1e-10);
    }

    #[test]
    fn constant_gradient_steps_approach_lr() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        let mut last = 0.0;
        for _ in 0..5000 {
            let before = p[0];
            adam_step(&mut p, &[0.37], &mut s, 1e-3, 0.9, 0.999, 1e-8);
            last = before - p[0];
        }
        assert!((last - 1e-3).abs() < 1e-6, "{last}");
    }
}
