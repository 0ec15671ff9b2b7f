//! Cross-checks analytic verdicts against probe evidence.

use serde::Serialize;

use super::probe::{ProbeReport, VerdictHint};
use crate::classify::{CookieOutcome, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AgreementStatus {
    Pass,
    Fail,
    Neutral,
}

/// What the analytic side concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ClassifierOutcome {
    Series(Outcome),
    Cookie(CookieOutcome),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub status: AgreementStatus,
    pub classifier: Option<ClassifierOutcome>,
    pub probe: VerdictHint,
    pub drift_sign: Option<i8>,
    pub detail: String,
}

/// `{PositiveRecurrent, Recurrent} ↔ RecurrentLike`, `Transient ↔
/// TransientLike`; cookie transience must also match the drift sign.
pub fn agreement(classifier: Option<ClassifierOutcome>, probe: &ProbeReport) -> Agreement {
    use AgreementStatus::*;
    let hint = probe.verdict_hint;
    let (status, detail) = match (classifier, hint) {
        (None, _) => (Neutral, "no classifier verdict".to_string()),
        (Some(_), VerdictHint::Ambiguous) => (Neutral, "probe ambiguous".to_string()),
        (Some(ClassifierOutcome::Series(o)), h) => match (o, h) {
            (Outcome::Inconclusive, _) => (Neutral, "classifier inconclusive".to_string()),
            (o, VerdictHint::RecurrentLike) if o.is_recurrent() => (Pass, format!("{o:?} and recurrent-like probe")),
            (Outcome::Transient, VerdictHint::TransientLike) => (Pass, "Transient and transient-like probe".to_string()),
            (o, h) => (Fail, format!("classifier says {o:?} but probe is {h:?}")),
        },
        (Some(ClassifierOutcome::Cookie(o)), h) => {
            let sign = probe.drift_sign.unwrap_or(0);
            match (o, h) {
                (CookieOutcome::Inconclusive, _) => (Neutral, "classifier inconclusive".to_string()),
                (CookieOutcome::Recurrent, VerdictHint::RecurrentLike) => {
                    (Pass, "Recurrent and recurrent-like probe".to_string())
                }
                (CookieOutcome::TransientLeft, VerdictHint::TransientLike) if sign < 0 => {
                    (Pass, "TransientLeft and leftward escape".to_string())
                }
                (CookieOutcome::TransientRight, VerdictHint::TransientLike) if sign > 0 => {
                    (Pass, "TransientRight and rightward escape".to_string())
                }
                (o, h) => (Fail, format!("classifier says {o:?} but probe is {h:?} with drift sign {sign}")),
            }
        }
    };
    Agreement {
        status,
        classifier,
        probe: hint,
        drift_sign: probe.drift_sign,
        detail,
    }
}
