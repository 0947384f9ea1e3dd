//! Template files and simulated dataset trees.

mod dataset;
mod template;

pub use dataset::{
    load_dataset, session_stem, simulate_dataset, write_manifest, write_session, write_text,
    Dataset, DatasetManifest, LoadedSession, LoadedSubject, SessionEntry, SubjectEntry,
    MANIFEST_FILE, MANIFEST_FORMAT,
};
pub use template::{load_template, save_template, TemplateFile, TEMPLATE_HEADER};
