use hill_core::collision::{
    classify_branch, classify_for_coupling, BranchCriterion, RegularizabilityReport,
};
use hill_core::Rational;

use crate::error::CliError;

/// Without `coupling`, the two-term criterion is used unless `single_term`.
pub fn cmd_classify(
    nu: Rational,
    alpha: Rational,
    single_term: bool,
    coupling: Option<f64>,
) -> Result<RegularizabilityReport, CliError> {
    let report = match (single_term, coupling) {
        (true, _) => classify_branch(nu, alpha, BranchCriterion::SingleTerm)?,
        (false, Some(c)) => classify_for_coupling(nu, alpha, c)?,
        (false, None) => classify_branch(nu, alpha, BranchCriterion::TwoTerm)?,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hill_core::collision::Extension;
    use hill_core::rational::{int, rational};

    #[test]
    fn oblate_hill_problem() {
        let r = cmd_classify(int(1), int(3), false, None).unwrap();
        assert!(r.branch && !r.block);
        assert_eq!(r.extension, Extension::Reflection);
        assert_eq!((r.gamma_p, r.gamma_q), (2, 5));
        assert_eq!((r.second_ratio_p, r.second_ratio_q), (Some(1), Some(5)));
    }

    #[test]
    fn single_term_cases() {
        let r = cmd_classify(int(1), int(1), true, None).unwrap();
        assert!(r.branch && r.block);
        assert_eq!(r.extension, Extension::Reflection);
        let r = cmd_classify(int(1), rational(4, 3), true, None).unwrap();
        assert_eq!(r.extension, Extension::Transmission);
    }

    #[test]
    fn prolate_coupling_falls_back_to_the_newtonian_term() {
        let r = cmd_classify(int(1), int(3), false, Some(-1.0)).unwrap();
        assert_eq!(r.criterion, BranchCriterion::SingleTerm);
        assert!(r.block);
    }

    #[test]
    fn nonpositive_exponents_are_domain_errors() {
        let e = cmd_classify(int(0), int(3), false, None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
