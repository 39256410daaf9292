//! Corpus representation: vocabulary, sentences (SCD windows), documents.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ids::{WindowId, WordId};

/// Append-only list of distinct words; a word's position is its matrix column.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        let mut vocab = Vocabulary::default();
        for w in words {
            vocab.intern(&w);
        }
        vocab
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.words
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> Option<&str> {
        self.words.get(id.index()).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Returns the id of `word`, appending it if unseen.
    pub fn intern(&mut self, word: &str) -> WordId {
        if let Some(id) = self.index.get(word) {
            return *id;
        }
        let id = WordId(self.words.len() as u32);
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Sentence {
    pub window_id: WindowId,
    pub doc_id: String,
    /// 1-based index within the document.
    pub position: usize,
    pub tokens: Vec<WordId>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-joined token strings.
    pub fn text(&self, vocab: &Vocabulary) -> String {
        self.tokens
            .iter()
            .filter_map(|t| vocab.word(*t))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

/// Splits text into sentences at `.`, `!` or `?` followed by whitespace or
/// the end of input. Runs of terminators stay with their sentence.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if matches!(d, '.' | '!' | '?') {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let at_boundary = chars.peek().is_none_or(|(_, d)| d.is_whitespace());
            if at_boundary {
                out.push(&text[start..end]);
                start = end;
            }
        }
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out.into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Lowercases, strips every non-alphanumeric character and splits on whitespace.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|raw| {
            raw.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Location {
    doc: usize,
    sentence: usize,
}

/// A set of documents over one vocabulary.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "CorpusRepr", into = "CorpusRepr")]
pub struct Corpus {
    vocabulary: Vocabulary,
    documents: Vec<Document>,
    next_window_id: u64,
    locations: HashMap<WindowId, Location>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CorpusRepr {
    vocabulary: Vocabulary,
    next_window_id: u64,
    documents: Vec<Document>,
}

impl From<CorpusRepr> for Corpus {
    fn from(r: CorpusRepr) -> Self {
        let mut corpus = Corpus {
            vocabulary: r.vocabulary,
            documents: r.documents,
            next_window_id: r.next_window_id,
            locations: HashMap::new(),
        };
        corpus.reindex();
        corpus
    }
}

impl From<Corpus> for CorpusRepr {
    fn from(c: Corpus) -> Self {
        CorpusRepr {
            vocabulary: c.vocabulary,
            next_window_id: c.next_window_id,
            documents: c.documents,
        }
    }
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.vocabulary == other.vocabulary
            && self.documents == other.documents
            && self.next_window_id == other.next_window_id
    }
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn sentence_count(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// All sentences in document order.
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> + '_ {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn window_ids(&self) -> Vec<WindowId> {
        self.sentences().map(|s| s.window_id).collect()
    }

    pub fn sentence(&self, id: WindowId) -> Option<&Sentence> {
        let loc = self.locations.get(&id)?;
        Some(&self.documents[loc.doc].sentences[loc.sentence])
    }

    pub fn contains(&self, id: WindowId) -> bool {
        self.locations.contains_key(&id)
    }

    /// Index of the document holding `id` in [`Corpus::documents`].
    pub fn document_index_of(&self, id: WindowId) -> Option<usize> {
        self.locations.get(&id).map(|l| l.doc)
    }

    /// Tokenizes `text` into a new document appended to the corpus.
    ///
    /// Nothing is modified when the text yields no tokens.
    pub fn ingest_plaintext(&mut self, text: &str, doc_id: &str) -> Result<&Document> {
        if text.trim().is_empty() {
            return Err(Error::EmptyDocument);
        }
        if self.document(doc_id).is_some() {
            return Err(Error::DuplicateDocument(doc_id.to_owned()));
        }
        let token_lists: Vec<Vec<String>> = split_sentences(text)
            .into_iter()
            .map(tokenize)
            .filter(|t| !t.is_empty())
            .collect();
        if token_lists.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let doc_index = self.documents.len();
        let mut sentences = Vec::with_capacity(token_lists.len());
        for (i, tokens) in token_lists.into_iter().enumerate() {
            let window_id = WindowId(self.next_window_id);
            self.next_window_id += 1;
            let tokens = tokens.iter().map(|t| self.vocabulary.intern(t)).collect();
            self.locations.insert(
                window_id,
                Location {
                    doc: doc_index,
                    sentence: i,
                },
            );
            sentences.push(Sentence {
                window_id,
                doc_id: doc_id.to_owned(),
                position: i + 1,
                tokens,
            });
        }
        self.documents.push(Document {
            id: doc_id.to_owned(),
            sentences,
        });
        Ok(&self.documents[doc_index])
    }

    /// Deletes a sentence. Later sentences of its document are renumbered and
    /// a document left without sentences is dropped. Window ids are never
    /// reused and the vocabulary is left untouched.
    pub fn remove_sentence(&mut self, id: WindowId) -> Result<Sentence> {
        let loc = *self.locations.get(&id).ok_or(Error::UnknownSentence(id))?;
        let removed = self.documents[loc.doc].sentences.remove(loc.sentence);
        for (i, s) in self.documents[loc.doc].sentences.iter_mut().enumerate() {
            s.position = i + 1;
        }
        if self.documents[loc.doc].sentences.is_empty() {
            self.documents.remove(loc.doc);
        }
        self.reindex();
        Ok(removed)
    }

    /// Tokens of `text` that are already in the vocabulary; unknown words are dropped.
    pub fn known_tokens(&self, text: &str) -> Vec<WordId> {
        split_sentences(text)
            .into_iter()
            .flat_map(tokenize)
            .filter_map(|t| self.vocabulary.id(&t))
            .collect()
    }

    /// SHA-256 over the canonical serialization of vocabulary and documents.
    pub fn digest(&self) -> String {
        let repr = serde_json::to_vec(&(&self.vocabulary, &self.documents, self.next_window_id))
            .expect("corpus serialization is infallible");
        hex::encode(Sha256::digest(repr))
    }

    fn reindex(&mut self) {
        self.locations.clear();
        for (d, doc) in self.documents.iter().enumerate() {
            for (s, sentence) in doc.sentences.iter().enumerate() {
                self.locations.insert(
                    sentence.window_id,
                    Location {
                        doc: d,
                        sentence: s,
                    },
                );
            }
        }
    }
}
