//! Black-box decryption through an external command.
//!
//! For every query the ciphertext is written as a binary PGM to a fresh
//! temporary directory, `{input}` and `{output}` in the command template are
//! replaced by the two (single-quoted) file paths, and the result is run with
//! `sh -c`. The command must exit 0 and leave the plaintext PGM at `{output}`.

use std::path::Path;
use std::process::Command;

use icbsif_core::codebook::{DecryptionOracle, OracleError};
use icbsif_core::pgm::{load_pgm, save_pgm};
use icbsif_core::Image;

#[derive(Debug, Clone)]
pub struct CommandOracle {
    template: String,
}

impl CommandOracle {
    pub fn new(template: impl Into<String>) -> Result<Self, String> {
        let template = template.into();
        for placeholder in ["{input}", "{output}"] {
            if !template.contains(placeholder) {
                return Err(format!(
                    "--oracle-cmd must contain the {placeholder} placeholder"
                ));
            }
        }
        Ok(Self { template })
    }

    fn command_line(&self, input: &Path, output: &Path) -> String {
        self.template
            .replace("{input}", &shell_quote(input))
            .replace("{output}", &shell_quote(output))
    }
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

impl DecryptionOracle for CommandOracle {
    fn decrypt(&self, cipher: &Image) -> Result<Image, OracleError> {
        let fail = |what: &str, e: &dyn std::fmt::Display| OracleError(format!("{what}: {e}"));
        let dir = tempfile::tempdir().map_err(|e| fail("temporary directory", &e))?;
        let input = dir.path().join("cipher.pgm");
        let output = dir.path().join("plain.pgm");
        save_pgm(&input, cipher).map_err(|e| fail("writing query", &e))?;
        let line = self.command_line(&input, &output);
        let out = Command::new("sh")
            .arg("-c")
            .arg(&line)
            .output()
            .map_err(|e| fail("spawning sh", &e))?;
        if !out.status.success() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            return Err(OracleError(format!(
                "`{line}` exited with {}: {}",
                out.status,
                stderr.trim()
            )));
        }
        load_pgm(&output).map_err(|e| fail("reading oracle answer", &e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_needs_both_placeholders() {
        assert!(CommandOracle::new("cat {input}").is_err());
        assert!(CommandOracle::new("cp {input} {output}").is_ok());
    }

    #[test]
    fn paths_are_quoted() {
        let o = CommandOracle::new("cp {input} {output}").unwrap();
        let line = o.command_line(Path::new("/tmp/a b/c.pgm"), Path::new("/tmp/it's.pgm"));
        assert_eq!(line, r"cp '/tmp/a b/c.pgm' '/tmp/it'\''s.pgm'");
    }

    #[test]
    fn identity_command_round_trips() {
        let o = CommandOracle::new("cp {input} {output}").unwrap();
        let img = Image::from_fn(6, 6, |x, y| (x * 6 + y) as u8);
        assert_eq!(o.decrypt(&img).unwrap(), img);
    }

    #[test]
    fn failing_command_is_an_oracle_error() {
        let o = CommandOracle::new("false {input} {output}").unwrap();
        assert!(o.decrypt(&Image::zeros(5, 5)).is_err());
    }
}
