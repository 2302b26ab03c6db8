use super::{ContextWindow, Dialog};

pub const DEFAULT_WINDOW: usize = 5;

/// One window per response position `i ≥ 1`; the context is the up to
/// `window` sentences directly before it.
pub fn to_context_windows(d: &Dialog, window: usize) -> Vec<ContextWindow> {
    let window = window.max(1);
    let sentences = d.sentences();
    (1..sentences.len())
        .map(|i| ContextWindow {
            context: sentences[i.saturating_sub(window)..i].to_vec(),
            response: sentences[i].clone(),
            response_act: d.acts().map(|a| a[i]),
        })
        .collect()
}
