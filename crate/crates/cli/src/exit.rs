use std::fmt;

use profile_gan::Error;

pub const SUCCESS: u8 = 0;
pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const DIVERGED: u8 = 3;
pub const PARTIAL: u8 = 4;

/// Bad flags, flag combinations or config contents.
#[derive(Debug)]
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

/// Some generation targets failed; the others were written.
#[derive(Debug)]
pub struct PartialFailure {
    pub failed: usize,
    pub total: usize,
}

impl fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {} targets failed", self.failed, self.total)
    }
}

impl std::error::Error for PartialFailure {}

/// Exit code for an error returned by a command.
pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return USAGE;
        }
        if cause.is::<PartialFailure>() {
            return PARTIAL;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Diverged { .. } => DIVERGED,
                Error::InvalidArgument(_) => USAGE,
                _ => DATA,
            };
        }
    }
    DATA
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(code_for(&usage("x")), USAGE);
        let diverged = Error::Diverged {
            epoch: 1,
            batch: 2,
            loss_name: "generator",
            value: f64::NAN,
        };
        assert_eq!(
            code_for(&anyhow::Error::new(diverged).context("training")),
            DIVERGED
        );
        assert_eq!(code_for(&Error::Data("bad".into()).into()), DATA);
        assert_eq!(
            code_for(
                &PartialFailure {
                    failed: 1,
                    total: 2
                }
                .into()
            ),
            PARTIAL
        );
        assert_eq!(code_for(&anyhow::anyhow!("io")), DATA);
    }
}
