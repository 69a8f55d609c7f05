//! Prompt templates, compiled into the binary.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

macro_rules! templates {
    ($($variant:ident => $stem:literal),* $(,)?) => {
        /// Every prompt the library can issue.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum PromptKind { $($variant),* }

        impl PromptKind {
            pub const ALL: &'static [PromptKind] = &[$(PromptKind::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(PromptKind::$variant => $stem),* }
            }

            pub fn system(self) -> &'static str {
                match self {
                    $(PromptKind::$variant => include_str!(concat!("../prompts/", $stem, "_system.txt"))),*
                }
            }

            pub fn user_template(self) -> &'static str {
                match self {
                    $(PromptKind::$variant => include_str!(concat!("../prompts/", $stem, "_user.txt"))),*
                }
            }
        }
    };
}

templates! {
    Selection => "selection",
    Disambiguation => "disambiguation",
    Decomposition => "decomposition",
    Entailment => "entailment",
    ElementExtraction => "element_extraction",
    ElementCoverage => "element_coverage",
    CMax => "cmax",
    InvalidSentence => "invalid_sentence",
    InvalidClaim => "invalid_claim",
    QueryIterative => "query_iterative",
    QuerySingle => "query_single",
    Verification => "verification",
}

impl PromptKind {
    /// Identifies the prompt a request was built from by its system text.
    pub fn from_system(system: &str) -> Option<PromptKind> {
        PromptKind::ALL.iter().copied().find(|k| k.system() == system)
    }

    /// Fills the user template. Only `{name}` tokens whose name appears in
    /// `vars` are substituted, in a single pass, so substituted values are
    /// never re-scanned.
    pub fn render_user(self, vars: &[(&str, &str)]) -> Result<String> {
        let template = self.user_template();
        let mut out = String::with_capacity(template.len() + vars.iter().map(|(_, v)| v.len()).sum::<usize>());
        let mut used = vec![false; vars.len()];
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let hit = after.find('}').and_then(|close| {
                let name = &after[..close];
                vars.iter().position(|(k, _)| *k == name).map(|i| (i, close))
            });
            match hit {
                Some((i, close)) => {
                    out.push_str(vars[i].1);
                    used[i] = true;
                    rest = &after[close + 1..];
                }
                None => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::Config(format!(
                "template {} has no placeholder {{{}}}",
                self.name(),
                vars[i].0
            )));
        }
        Ok(out)
    }

    /// Hex sha256 over the system and user template texts.
    pub fn digest(self) -> String {
        let mut h = Sha256::new();
        h.update(self.system().as_bytes());
        h.update([0u8]);
        h.update(self.user_template().as_bytes());
        hex::encode(h.finalize())
    }
}

/// Template digests keyed by prompt name, in a stable order.
pub fn template_digests() -> Vec<(&'static str, String)> {
    PromptKind::ALL.iter().map(|k| (k.name(), k.digest())).collect()
}

/// Formats claims or elements as the numbered brace block the coverage prompt uses.
pub fn numbered_block(items: &[String]) -> String {
    let mut out = String::from("{\n");
    for (i, item) in items.iter().enumerate() {
        out.push_str(&format!("{}: {},\n", i + 1, serde_json::Value::String(item.clone())));
    }
    out.push('}');
    out
}

/// Formats claims as the quoted list the c_max prompt uses.
pub fn quoted_list(items: &[String]) -> String {
    serde_json::to_string(items).unwrap_or_else(|_| "[]".into()).replace("\",\"", "\", \"")
}
