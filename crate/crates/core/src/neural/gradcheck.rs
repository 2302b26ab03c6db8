//! Central finite-difference checks against the tape's analytic gradients.
//!
//! Only forward evaluations are used to build the numeric estimate, so the
//! check is independent of every backward rule it validates. Run it on a
//! 64-bit parameter set.

use super::{Graph, NeuralError, ParamSet, Var};

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// Largest per-parameter relative error, `‖a − n‖ / max(‖a‖, ‖n‖, NORM_FLOOR)`.
    pub worst_relative_error: f64,
    pub worst_param: String,
    pub coordinates_checked: usize,
}

/// Floor for the denominator of the relative error. Central differences at
/// step 1e-3 carry rounding noise of roughly `1e-16 · |loss| / 1e-3`, so
/// gradients with a smaller norm than this cannot be resolved.
pub const NORM_FLOOR: f64 = 1e-7;

/// Compares analytic and central-difference gradients for every unfrozen
/// parameter. `max_coords` limits how many coordinates per parameter are
/// perturbed (evenly strided); `None` checks all of them.
pub fn check_gradients<F>(
    params: &ParamSet<f64>,
    step: f64,
    max_coords: Option<usize>,
    loss_fn: F,
) -> Result<GradCheckReport, NeuralError>
where
    F: Fn(&mut Graph<'_, f64>) -> Result<Var, NeuralError>,
{
    let analytic = {
        let mut g = Graph::new(params);
        let loss = loss_fn(&mut g)?;
        g.backward(loss)?
    };

    let eval = |ps: &ParamSet<f64>| -> Result<f64, NeuralError> {
        let mut g = Graph::new(ps);
        let loss = loss_fn(&mut g)?;
        Ok(g.scalar(loss))
    };

    let mut shadow = params.clone();
    let mut report = GradCheckReport {
        worst_relative_error: 0.0,
        worst_param: String::new(),
        coordinates_checked: 0,
    };

    for (id, p) in params.iter() {
        if p.frozen {
            continue;
        }
        let n = p.value.len();
        let stride = match max_coords {
            Some(k) if k > 0 && n > k => n.div_ceil(k),
            _ => 1,
        };
        let zeros = vec![0.0; n];
        let a_full = analytic.get(id).unwrap_or(zeros.as_slice());
        let (mut diff2, mut a2, mut n2) = (0.0, 0.0, 0.0);
        for k in (0..n).step_by(stride) {
            let orig = shadow.value(id).data()[k];
            shadow.value_mut(id).data_mut()[k] = orig + step;
            let plus = eval(&shadow)?;
            shadow.value_mut(id).data_mut()[k] = orig - step;
            let minus = eval(&shadow)?;
            shadow.value_mut(id).data_mut()[k] = orig;
            let numeric = (plus - minus) / (2.0 * step);
            let a = a_full[k];
            diff2 += (a - numeric) * (a - numeric);
            a2 += a * a;
            n2 += numeric * numeric;
            report.coordinates_checked += 1;
        }
        let rel = diff2.sqrt() / a2.sqrt().max(n2.sqrt()).max(NORM_FLOOR);
        if rel > report.worst_relative_error || report.worst_param.is_empty() {
            report.worst_relative_error = rel;
            report.worst_param = p.name.clone();
        }
    }
    Ok(report)
}
