use std::fmt;

/// A problem with how the tool was invoked: bad flags, unknown names,
/// malformed plans. Maps to exit status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 2 for usage and configuration errors, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<llmoea::Error>() {
            return match e {
                llmoea::Error::Config(_)
                | llmoea::Error::NotFound { .. }
                | llmoea::Error::InvalidArgument(_) => 2,
                _ => 1,
            };
        }
    }
    1
}
