//! Extrapolation of Galerkin energies along uniform refinement.

/// Result of fitting `E_k = E_inf - C N_k^{-beta}` to the last three levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub energy: f64,
    /// Fitted rate, `None` for a converged (constant) or unreliable tail.
    pub beta: Option<f64>,
    /// `false` when the tail is not monotone and contracting; `energy` is then the last value.
    pub reliable: bool,
}

/// `(N_1^{-b} - N_2^{-b}) / (N_2^{-b} - N_3^{-b})`, increasing in `b`.
fn ratio(n: [f64; 3], b: f64) -> f64 {
    let p = n.map(|x| (-b * x.ln()).exp());
    (p[0] - p[1]) / (p[1] - p[2])
}

/// Three-level extrapolation of `(N_k, E_k)`, ordered by increasing `N_k`.
pub fn extrapolate_energy(history: &[(usize, f64)]) -> Option<Extrapolation> {
    if history.len() < 3 {
        return None;
    }
    let tail = &history[history.len() - 3..];
    let n = [0, 1, 2].map(|k| tail[k].0 as f64);
    let e = [0, 1, 2].map(|k| tail[k].1);
    let fallback = Extrapolation { energy: e[2], beta: None, reliable: false };
    let (d1, d2) = (e[1] - e[0], e[2] - e[1]);
    if d1 == 0.0 && d2 == 0.0 {
        return Some(Extrapolation { energy: e[2], beta: None, reliable: true });
    }
    if !(n[0] < n[1] && n[1] < n[2]) || d1 * d2 <= 0.0 || d2.abs() >= d1.abs() {
        return Some(fallback);
    }
    let rho = d1 / d2;
    let (mut lo, mut hi) = (1e-8, 50.0);
    if !(ratio(n, lo) < rho && ratio(n, hi) > rho) {
        return Some(fallback);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(n, mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let p = n.map(|x| (-beta * x.ln()).exp());
    let c = d2 / (p[1] - p[2]);
    Some(Extrapolation { energy: e[2] + c * p[2], beta: Some(beta), reliable: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_reproduces_itself() {
        let h: Vec<(usize, f64)> = (1..6).map(|k| (4usize.pow(k), 1.0 - (4f64.powi(k as i32)).powf(-0.5))).collect();
        let x = extrapolate_energy(&h).unwrap();
        assert!((x.energy - 1.0).abs() < 1e-10);
        assert!((x.beta.unwrap() - 0.5).abs() < 1e-8);
        assert!(x.reliable);
    }

    #[test]
    fn uneven_levels() {
        let ns = [9usize, 49, 225];
        let h: Vec<(usize, f64)> = ns.iter().map(|&n| (n, 2.0 - 3.0 * (n as f64).powf(-0.7))).collect();
        let x = extrapolate_energy(&h).unwrap();
        assert!((x.energy - 2.0).abs() < 1e-10);
        assert!((x.beta.unwrap() - 0.7).abs() < 1e-8);
    }

    #[test]
    fn constant_history() {
        let x = extrapolate_energy(&[(4, 0.3), (16, 0.3), (64, 0.3)]).unwrap();
        assert_eq!(x.energy, 0.3);
        assert!(x.reliable);
    }

    #[test]
    fn non_monotone_tail_is_flagged() {
        let x = extrapolate_energy(&[(4, 0.3), (16, 0.5), (64, 0.4)]).unwrap();
        assert!(!x.reliable);
        assert_eq!(x.energy, 0.4);
        assert!(extrapolate_energy(&[(4, 0.3), (16, 0.5)]).is_none());
    }
}
