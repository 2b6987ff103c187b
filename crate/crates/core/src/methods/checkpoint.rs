//! Checkpoint files: `#` comment lines followed by a JSON document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::TrainedModel;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "dirconf-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TrainedModel,
}

pub fn checkpoint_to_string(model: &TrainedModel, comments: &[String]) -> Result<String> {
    let envelope = Envelope {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        model: model.clone(),
    };
    let body =
        serde_json::to_string_pretty(&envelope).map_err(|e| Error::numeric(e.to_string()))?;
    let mut out: String = comments.iter().map(|c| format!("# {c}\n")).collect();
    out.push_str(&body);
    out.push('\n');
    Ok(out)
}

pub fn checkpoint_from_str(text: &str, source: &str) -> Result<TrainedModel> {
    let skipped = text.lines().take_while(|l| l.starts_with('#')).count();
    let body: String = text.lines().skip(skipped).collect::<Vec<_>>().join("\n");
    let envelope: Envelope = serde_json::from_str(&body)
        .map_err(|e| Error::parse(source, skipped + e.line(), e.to_string()))?;
    if envelope.format != CHECKPOINT_FORMAT || envelope.version != CHECKPOINT_VERSION {
        return Err(Error::parse(
            source,
            skipped + 1,
            format!(
                "unsupported checkpoint {} v{}",
                envelope.format, envelope.version
            ),
        ));
    }
    Ok(envelope.model)
}

pub fn save_checkpoint(model: &TrainedModel, path: &Path, comments: &[String]) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(model, comments)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_str(&text, &path.display().to_string())
}
