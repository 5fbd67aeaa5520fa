use serde::{Deserialize, Serialize};

/// Backtracking constants for the Armijo rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    pub c1: f64,
    pub shrink: f64,
    pub alpha_init: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            shrink: 0.5,
            alpha_init: 1.0,
        }
    }
}

/// Backtracking Armijo search on a merit function `phi(α)`.
///
/// Starting from `alpha_init`, multiplies by `shrink` until
/// `phi(α) ≤ phi0 + c1·α·slope0`. `phi` returning `None` or a non-finite
/// value rejects that `α`. Gives up with `accepted = false` as soon as `α`
/// drops below `min_alpha`, returning that `α`.
pub fn line_search<F>(
    mut phi: F,
    phi0: f64,
    slope0: f64,
    params: &LineSearchParams,
    min_alpha: f64,
) -> (f64, bool)
where
    F: FnMut(f64) -> Option<f64>,
{
    let mut alpha = params.alpha_init;
    loop {
        if alpha < min_alpha {
            return (alpha, false);
        }
        if let Some(value) = phi(alpha) {
            if value.is_finite() && value <= phi0 + params.c1 * alpha * slope0 {
                return (alpha, true);
            }
        }
        alpha *= params.shrink;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN_ALPHA: f64 = 1e-3;

    #[test]
    fn exact_model_accepts_unit_step() {
        let p = LineSearchParams::default();
        let (a, ok) = line_search(|a| Some(0.5 * (1.0 - a) * (1.0 - a)), 0.5, -1.0, &p, MIN_ALPHA);
        assert!(ok);
        assert_eq!(a, 1.0);
    }

    #[test]
    fn ascent_is_never_accepted() {
        let p = LineSearchParams::default();
        let (a, ok) = line_search(|a| Some(0.5 + a), 0.5, -1.0, &p, MIN_ALPHA);
        assert!(!ok);
        assert!(a < MIN_ALPHA);
    }

    #[test]
    fn stops_on_first_armijo_rung() {
        let p = LineSearchParams::default();
        let fixtures: [(fn(f64) -> f64, f64); 2] = [
            (|a| (1.0 - a).powi(2) + 50.0 * a * a, -2.0),
            (|a| (1.0 - a).powi(2) + 50.0 * a.powi(4), -2.0),
        ];
        for (phi, slope0) in fixtures {
            let phi0 = phi(0.0);
            let armijo = |a: f64| phi(a) <= phi0 + p.c1 * a * slope0;
            let (a, ok) = line_search(|a| Some(phi(a)), phi0, slope0, &p, MIN_ALPHA);
            assert!(ok);
            assert!(armijo(a));
            assert!(!armijo(a / p.shrink));
            // explicit ladder: every larger rung fails
            let mut rung = 1.0;
            while rung > a {
                assert!(!armijo(rung));
                rung *= p.shrink;
            }
        }
    }

    #[test]
    fn non_finite_values_keep_backtracking() {
        let p = LineSearchParams::default();
        let (a, ok) = line_search(
            |a| if a > 0.3 { Some(f64::NAN) } else if a > 0.2 { None } else { Some(0.0) },
            1.0,
            -1.0,
            &p,
            MIN_ALPHA,
        );
        assert!(ok);
        assert_eq!(a, 0.125);
    }
}
