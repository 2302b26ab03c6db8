use std::fmt;
use std::str::FromStr;

use super::ModelError;
use crate::corpus::{MAX_SENTENCE_LEN, DEFAULT_WINDOW};

/// Longest response accepted by the teacher-forced objectives.
pub const MAX_RESPONSE_LEN: usize = MAX_SENTENCE_LEN;
pub const DEFAULT_DA_WEIGHT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Hierarchical encoder-decoder without attention.
    HedPlain,
    /// Sentence decoder attends to the sentence-encoder states.
    HedAttn,
    /// Adds a content-word decoder; the sentence decoder attends to its states.
    HedCd,
    /// Adds a content-word decoder and a bidirectional content encoder whose
    /// states the sentence decoder attends to.
    HedCed,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::HedPlain,
        Architecture::HedAttn,
        Architecture::HedCd,
        Architecture::HedCed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::HedPlain => "hed-plain",
            Architecture::HedAttn => "hed-attn",
            Architecture::HedCd => "hed-cd",
            Architecture::HedCed => "hed-ced",
        }
    }

    pub fn has_content(self) -> bool {
        matches!(self, Architecture::HedCd | Architecture::HedCed)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', '+'], "-");
        match norm.as_str() {
            "hed-plain" | "hed-no-attn" | "hed" => Ok(Architecture::HedPlain),
            "hed-attn" => Ok(Architecture::HedAttn),
            "hed-cd" => Ok(Architecture::HedCd),
            "hed-ced" => Ok(Architecture::HedCed),
            _ => Err(ModelError::InvalidConfig(format!(
                "unknown architecture `{s}` (expected hed-plain, hed-attn, hed-cd or hed-ced)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub vocab_size: usize,
    pub emb_size: usize,
    /// Per direction.
    pub enc_hidden: usize,
    pub dec_hidden: usize,
    /// Inner width of the additive attention scorers.
    pub attn_size: usize,
    pub layers: usize,
    pub window: usize,
    pub da_head: bool,
    pub da_weight: f64,
}

impl ModelConfig {
    pub fn new(architecture: Architecture, vocab_size: usize) -> Self {
        Self {
            architecture,
            vocab_size,
            emb_size: 200,
            enc_hidden: 300,
            dec_hidden: 200,
            attn_size: 200,
            layers: 1,
            window: DEFAULT_WINDOW,
            da_head: false,
            da_weight: DEFAULT_DA_WEIGHT,
        }
    }

    /// Sets encoder, decoder and attention widths at once.
    pub fn with_sizes(mut self, emb: usize, enc: usize, dec: usize) -> Self {
        self.emb_size = emb;
        self.enc_hidden = enc;
        self.dec_hidden = dec;
        self.attn_size = dec;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let sizes = [
            ("vocab_size", self.vocab_size),
            ("emb_size", self.emb_size),
            ("enc_hidden", self.enc_hidden),
            ("dec_hidden", self.dec_hidden),
            ("attn_size", self.attn_size),
            ("window", self.window),
        ];
        if let Some((name, _)) = sizes.iter().find(|(_, v)| *v == 0) {
            return Err(ModelError::InvalidConfig(format!("{name} must be positive")));
        }
        if self.vocab_size < crate::corpus::SPECIALS.len() {
            return Err(ModelError::InvalidConfig("vocabulary lacks the special tokens".into()));
        }
        if self.layers != 1 {
            return Err(ModelError::InvalidConfig(format!(
                "only single-layer recurrent networks are supported, got {}",
                self.layers
            )));
        }
        if !self.da_weight.is_finite() || self.da_weight < 0.0 {
            return Err(ModelError::InvalidConfig("da_weight must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// `key = value` lines, parsed back by [`ModelConfig::parse_manifest`].
    pub fn to_manifest(&self) -> String {
        format!(
            "architecture = {}\nvocab_size = {}\nemb_size = {}\nenc_hidden = {}\ndec_hidden = {}\n\
             attn_size = {}\nlayers = {}\nwindow = {}\nda_head = {}\nda_weight = {}\n",
            self.architecture,
            self.vocab_size,
            self.emb_size,
            self.enc_hidden,
            self.dec_hidden,
            self.attn_size,
            self.layers,
            self.window,
            self.da_head,
            self.da_weight
        )
    }

    pub fn parse_manifest(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ModelError> {
        let get = |k: &str| lookup(k).ok_or_else(|| ModelError::InvalidConfig(format!("manifest lacks `{k}`")));
        fn num<V: FromStr>(k: &str, v: String) -> Result<V, ModelError> {
            v.parse()
                .map_err(|_| ModelError::InvalidConfig(format!("bad value `{v}` for `{k}`")))
        }
        let cfg = Self {
            architecture: get("architecture")?.parse()?,
            vocab_size: num("vocab_size", get("vocab_size")?)?,
            emb_size: num("emb_size", get("emb_size")?)?,
            enc_hidden: num("enc_hidden", get("enc_hidden")?)?,
            dec_hidden: num("dec_hidden", get("dec_hidden")?)?,
            attn_size: num("attn_size", get("attn_size")?)?,
            layers: num("layers", get("layers")?)?,
            window: num("window", get("window")?)?,
            da_head: num("da_head", get("da_head")?)?,
            da_weight: num("da_weight", get("da_weight")?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn defaults() {
        let c = ModelConfig::new(Architecture::HedCed, 10_004);
        assert_eq!((c.emb_size, c.enc_hidden, c.dec_hidden, c.layers, c.window), (200, 300, 200, 1, 5));
        c.validate().unwrap();
    }

    #[test]
    fn architecture_names_round_trip() {
        for a in Architecture::ALL {
            assert_eq!(a.name().parse::<Architecture>().unwrap(), a);
        }
        assert_eq!("HED+cED".parse::<Architecture>().unwrap(), Architecture::HedCed);
        assert!("seq2seq".parse::<Architecture>().is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let mut c = ModelConfig::new(Architecture::HedCd, 50).with_sizes(16, 8, 6);
        c.da_head = true;
        let kv: HashMap<String, String> = c
            .to_manifest()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let back = ModelConfig::parse_manifest(|k| kv.get(k).cloned()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ModelConfig::new(Architecture::HedPlain, 50);
        c.layers = 2;
        assert!(c.validate().is_err());
        let c = ModelConfig::new(Architecture::HedPlain, 50).with_sizes(0, 4, 4);
        assert!(c.validate().is_err());
    }
}
