use std::fmt;

/// A theorem hypothesis that the supplied inputs do not satisfy.
///
/// `name` is a short stable identifier of the violated condition (for example
/// `"alpha^2 < beta < 1"`) and is always part of the rendered message.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisError {
    pub name: &'static str,
    pub detail: String,
}

impl HypothesisError {
    pub fn new(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for HypothesisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hypothesis `{}` violated: {}", self.name, self.detail)
    }
}

impl std::error::Error for HypothesisError {}
