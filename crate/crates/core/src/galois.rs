//! The antitone Galois connection `α(t) = t:w`, `β(s) = s÷w` for a fixed
//! reference form `w`, and its closure operator `β∘α = D_w`.
//!
//! The opposite order on the domain is never materialized: every inequality is
//! written out with its direction in the ordinary Loewner order.

use crate::error::{Error, Result};
use crate::forms::{form_parallel_sum, form_short, Form};
use crate::parallel::parallel_diff_bounded;
use crate::psd::{self, check_dims};
use crate::tol::Tolerances;

#[derive(Debug, Clone)]
pub struct PolarityPair {
    reference: Form,
    tol: Tolerances,
}

impl PolarityPair {
    pub fn new(reference: Form, tol: Tolerances) -> Self {
        PolarityPair { reference, tol }
    }

    pub fn reference(&self) -> &Form {
        &self.reference
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// `α(t) = t:w`.
    pub fn alpha(&self, t: &Form) -> Result<Form> {
        form_parallel_sum(t, &self.reference, &self.tol)
    }

    /// `β(s) = s÷w`; [`Error::NotInImage`] when `s` is not of the form `t:w`.
    pub fn beta(&self, s: &Form) -> Result<Form> {
        self.beta_bounded(s).map(|(f, _)| f)
    }

    /// `β(s)` with the forward error bound of the parallel difference.
    pub fn beta_bounded(&self, s: &Form) -> Result<(Form, f64)> {
        match parallel_diff_bounded(s.gram(), self.reference.gram(), &self.tol) {
            Ok(d) => Ok((Form::new(d.value), d.error_bound)),
            Err(Error::NotSolvable(why)) => Err(Error::NotInImage(why)),
            Err(e) => Err(e),
        }
    }

    /// `(β∘α)(t) = D_w t`, cross-checked against `β(α(t))`. The round trip
    /// loses accuracy when `w` is badly conditioned, so the check allows its
    /// error bound on top of `tol_conv`.
    pub fn closure(&self, t: &Form) -> Result<Form> {
        let direct = form_short(&self.reference, t, &self.tol)?;
        let (round, bound) = self.beta_bounded(&self.alpha(t)?)?;
        let gap = direct.distance(&round);
        let tolerance = self.tol.tol_conv * (1.0 + t.gram().norm()) + bound;
        if gap > tolerance {
            return Err(Error::CrossCheckFailure { what: "D_w t vs β(α(t))".into(), gap, tolerance });
        }
        Ok(direct)
    }

    /// `(v ≤ α(u), β(v) ≤ u)`.
    pub fn adjunction_sides(&self, u: &Form, v: &Form) -> Result<(bool, bool)> {
        check_dims(u.gram(), v.gram())?;
        let left = v.leq(&self.alpha(u)?, &self.tol)?;
        let right = self.beta(v)?.leq(u, &self.tol)?;
        Ok((left, right))
    }

    /// Whether `v ≤ α(u) ⟺ β(v) ≤ u` holds for this pair.
    pub fn check_adjunction(&self, u: &Form, v: &Form) -> Result<bool> {
        let (left, right) = self.adjunction_sides(u, v)?;
        Ok(left == right)
    }

    /// `t = (β∘α)(t)`, confirmed by `ran t ⊆ ran w`.
    pub fn is_closed_element(&self, t: &Form) -> Result<bool> {
        let gap = self.closure(t)?.distance(t);
        let tolerance = self.tol.tol_conv * (1.0 + t.gram().norm());
        let by_closure = gap <= tolerance;
        let by_range = psd::range_included(t.gram(), self.reference.gram(), &self.tol)?;
        if by_closure != by_range {
            return Err(Error::CrossCheckFailure {
                what: format!("closed element: closure test {by_closure}, range test {by_range}"),
                gap,
                tolerance,
            });
        }
        Ok(by_closure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psd::PsdMatrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn dform(v: &[f64]) -> Form {
        Form::new(PsdMatrix::diag(v, &tol()).unwrap())
    }

    fn general() -> Form {
        Form::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]], &tol()).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let w = general();
        let pair = PolarityPair::new(w.clone(), tol());
        assert!(pair.alpha(&Form::zero(2)).unwrap().gram().norm() < 1e-15);
        assert!(pair.alpha(&w).unwrap().distance(&w.scale(0.5, &tol())) < 1e-13);
        let pair = PolarityPair::new(dform(&[1.0, 0.0]), tol());
        let a = pair.alpha(&dform(&[2.0, 3.0])).unwrap();
        assert!(a.distance(&dform(&[2.0 / 3.0, 0.0])) < 1e-14);
    }

    #[test]
    fn beta_examples() {
        let w = general();
        let pair = PolarityPair::new(w.clone(), tol());
        assert!(pair.beta(&w.scale(0.5, &tol())).unwrap().distance(&w) < 1e-12);
        assert!(pair.beta(&Form::zero(2)).unwrap().gram().norm() < 1e-15);
        let pair = PolarityPair::new(dform(&[1.0, 0.0]), tol());
        let b = pair.beta(&pair.alpha(&dform(&[2.0, 3.0])).unwrap()).unwrap();
        assert!(b.distance(&dform(&[2.0, 0.0])) < 1e-12);
        assert!(matches!(pair.beta(&dform(&[1.0, 0.0])), Err(Error::NotInImage(_))));
    }

    #[test]
    fn closure_examples() {
        let pair = PolarityPair::new(dform(&[1.0, 0.0]), tol());
        let t = dform(&[3.0, 0.0]);
        assert!(pair.closure(&t).unwrap().distance(&t) < 1e-10);
        assert!(pair.closure(&dform(&[2.0, 3.0])).unwrap().distance(&dform(&[2.0, 0.0])) < 1e-10);
        assert!(pair.closure(&Form::zero(2)).unwrap().gram().norm() < 1e-15);
    }

    #[test]
    fn adjunction_examples() {
        let t = tol();
        let pair = PolarityPair::new(general(), t);
        let u = Form::from_real_rows(&[&[1.0, -1.0], &[-1.0, 4.0]], &t).unwrap();
        let v = pair.alpha(&u).unwrap();
        assert_eq!(pair.adjunction_sides(&u, &v).unwrap(), (true, true));
        let v = pair.alpha(&dform(&[0.5, 0.25])).unwrap();
        let u = pair.beta(&v).unwrap();
        assert_eq!(pair.adjunction_sides(&u, &v).unwrap(), (true, true));

        let pair = PolarityPair::new(dform(&[1.0, 0.0]), t);
        let v = pair.alpha(&dform(&[3.0, 0.0])).unwrap();
        assert!(v.distance(&dform(&[0.75, 0.0])) < 1e-14);
        assert_eq!(pair.adjunction_sides(&dform(&[0.0, 5.0]), &v).unwrap(), (false, false));
        assert!(pair.check_adjunction(&dform(&[0.0, 5.0]), &v).unwrap());
    }

    #[test]
    fn closed_element_examples() {
        let pair = PolarityPair::new(dform(&[1.0, 1.0, 0.0]), tol());
        assert!(pair.is_closed_element(&dform(&[3.0, 0.5, 0.0])).unwrap());
        let pair = PolarityPair::new(general(), tol());
        assert!(pair.is_closed_element(&general()).unwrap());
        let pair = PolarityPair::new(dform(&[1.0, 0.0]), tol());
        assert!(!pair.is_closed_element(&dform(&[0.0, 1.0])).unwrap());
    }
}
