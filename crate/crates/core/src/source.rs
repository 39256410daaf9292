//! Loading corpora from disk.
//!
//! * a directory: every `*.txt` file is one document, id = file stem, in name order;
//! * an `.xml` file: statute XML, see [`crate::xml`];
//! * any other file: plain text, documents separated by blank lines, ids `doc1`, `doc2`, ...

use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::xml::{ingest_xml_law, IngestConfig};

pub fn load_corpus(path: &Path, ingest: &IngestConfig) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        for f in files {
            let id = f
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            match corpus.ingest_plaintext(&std::fs::read_to_string(&f)?, &id) {
                Ok(_) | Err(Error::EmptyDocument) => {}
                Err(e) => return Err(e),
            }
        }
    } else if path
        .extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("xml"))
    {
        ingest_xml_law(&mut corpus, &std::fs::read_to_string(path)?, ingest)?;
    } else {
        add_paragraphs(&mut corpus, &std::fs::read_to_string(path)?)?;
    }
    Ok(corpus)
}

/// Adds each blank-line separated paragraph of `text` as a document.
pub fn add_paragraphs(corpus: &mut Corpus, text: &str) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    let mut n = 0;
    for para in text.split("\n\n").map(str::trim).filter(|p| !p.is_empty()) {
        n += 1;
        let id = format!("doc{n}");
        match corpus.ingest_plaintext(para, &id) {
            Ok(_) => ids.push(id),
            Err(Error::EmptyDocument) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(ids)
}
