use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use super::normalize::normalize;
use super::{ClassifyError, FormGender, Language, MorphPattern, PatternKind};

fn nfc(s: &str) -> String {
    s.trim().nfc().collect()
}

fn key(s: &str) -> String {
    nfc(s).to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub lemma: String,
    pub language: Language,
    /// Single target-language token; diacritics are significant.
    pub form: String,
    pub gender: FormGender,
}

impl LexiconEntry {
    pub fn new(lemma: &str, language: Language, form: &str, gender: FormGender) -> Self {
        LexiconEntry {
            lemma: lemma.to_string(),
            language,
            form: form.to_string(),
            gender,
        }
    }

    pub fn rule(&self) -> String {
        format!("lexicon:{}/{}", self.form, self.gender.code())
    }
}

/// Immutable per-language lookup from lemma and surface form to entries.
#[derive(Debug, Clone)]
pub struct Lexicon {
    language: Language,
    entries: Vec<LexiconEntry>,
    by_lemma: HashMap<String, Vec<usize>>,
    by_lemma_form: HashMap<(String, String), usize>,
    by_form: HashMap<String, Vec<usize>>,
}

/// Builds a lexicon from rows. Identical rows collapse; a lemma/form pair
/// declared with two genders is a conflict.
pub fn load_lexicon(
    language: Language,
    rows: impl IntoIterator<Item = LexiconEntry>,
) -> Result<Lexicon, ClassifyError> {
    let mut lex = Lexicon {
        language,
        entries: Vec::new(),
        by_lemma: HashMap::new(),
        by_lemma_form: HashMap::new(),
        by_form: HashMap::new(),
    };
    // (lemma, form) -> every (row, gender) seen, for conflict reporting
    let mut seen: HashMap<(String, String), Vec<(usize, FormGender)>> = HashMap::new();
    let mut order: Vec<(String, String)> = Vec::new();

    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        let invalid = |reason: String| ClassifyError::InvalidEntry { row: row_no, reason };
        if row.language != language {
            return Err(invalid(format!("{} row in {} lexicon", row.language, language)));
        }
        let lemma = nfc(&row.lemma);
        let form = nfc(&row.form);
        if lemma.is_empty() || form.is_empty() {
            return Err(invalid("empty lemma or form".into()));
        }
        if form.contains(char::is_whitespace) {
            return Err(invalid(format!(
                "form {form:?} is not a single token; register it as an alternative phrase"
            )));
        }
        if row.gender == FormGender::NeuterCase && !language.has_neuter() {
            return Err(invalid(format!(
                "{language} has no neuter case ({lemma:?} -> {form:?})"
            )));
        }
        let k = (lemma.to_lowercase(), form.to_lowercase());
        let rows = seen.entry(k.clone()).or_default();
        if rows.is_empty() {
            order.push(k.clone());
        }
        if rows.iter().any(|&(_, g)| g == row.gender) {
            rows.push((row_no, row.gender));
            continue;
        }
        rows.push((row_no, row.gender));
        if rows.len() == 1 {
            let idx = lex.entries.len();
            lex.entries.push(LexiconEntry {
                lemma,
                language,
                form,
                gender: row.gender,
            });
            lex.by_lemma.entry(k.0.clone()).or_default().push(idx);
            lex.by_form.entry(k.1.clone()).or_default().push(idx);
            lex.by_lemma_form.insert(k, idx);
        }
    }

    for k in &order {
        let rows = &seen[k];
        if rows.iter().any(|&(_, g)| g != rows[0].1) {
            let entry = &lex.entries[lex.by_lemma_form[k]];
            return Err(ClassifyError::LexiconConflict {
                lemma: entry.lemma.clone(),
                form: entry.form.clone(),
                rows: rows.clone(),
            });
        }
    }
    Ok(lex)
}

impl Lexicon {
    /// Reads `lemma,form,gender` CSV with gender in {m, f, neu, common}.
    pub fn from_csv<R: Read>(language: Language, reader: R, path: &str) -> Result<Self, ClassifyError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        check_header(&mut rdr, path, &["lemma", "form", "gender"])?;
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(path, &e))?;
            let line = line_of(&record);
            let gender = FormGender::parse(&record[2]).ok_or_else(|| ClassifyError::Parse {
                path: path.to_string(),
                line,
                message: format!("gender {:?} not one of m, f, neu, common", &record[2]),
            })?;
            rows.push(LexiconEntry::new(&record[0], language, &record[1], gender));
            lines.push(line);
        }
        // Report file lines rather than row ordinals.
        load_lexicon(language, rows).map_err(|e| match e {
            ClassifyError::InvalidEntry { row, reason } => ClassifyError::Parse {
                path: path.to_string(),
                line: lines[row - 1],
                message: reason,
            },
            ClassifyError::LexiconConflict { lemma, form, rows } => ClassifyError::LexiconConflict {
                lemma,
                form,
                rows: rows.into_iter().map(|(r, g)| (lines[r - 1], g)).collect(),
            },
            other => other,
        })
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lemma_count(&self) -> usize {
        self.by_lemma.len()
    }

    /// Entries of a lemma in load order. Case-insensitive.
    pub fn forms_of<'a>(&'a self, lemma: &str) -> impl Iterator<Item = &'a LexiconEntry> + 'a {
        self.by_lemma
            .get(&key(lemma))
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }

    /// The entry for `form` under `lemma`, compared case-insensitively.
    pub fn lookup(&self, lemma: &str, form: &str) -> Option<&LexiconEntry> {
        self.by_lemma_form
            .get(&(key(lemma), key(form)))
            .map(|&i| &self.entries[i])
    }

    /// Every entry with this surface form, across lemmas.
    pub fn entries_with_form<'a>(&'a self, form: &str) -> impl Iterator<Item = &'a LexiconEntry> + 'a {
        self.by_form
            .get(&key(form))
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltPhraseEntry {
    pub lemma: String,
    pub language: Language,
    pub phrase: String,
}

/// Alternative-part-of-speech phrases, pre-tokenized for contiguous
/// whole-token matching.
#[derive(Debug, Clone, Default)]
pub struct AltPhrases {
    entries: Vec<(AltPhraseEntry, Vec<String>)>,
    by_lemma: HashMap<String, Vec<usize>>,
}

impl AltPhrases {
    pub fn new(language: Language, rows: impl IntoIterator<Item = AltPhraseEntry>) -> Result<Self, ClassifyError> {
        let mut out = AltPhrases::default();
        for (i, row) in rows.into_iter().enumerate() {
            let invalid = |reason: String| ClassifyError::InvalidEntry { row: i + 1, reason };
            if row.language != language {
                return Err(invalid(format!("{} phrase in {} table", row.language, language)));
            }
            let tokens: Vec<String> = normalize(&row.phrase).iter().map(|t| t.to_lowercase()).collect();
            if tokens.is_empty() || row.lemma.trim().is_empty() {
                return Err(invalid(format!("empty phrase or lemma: {:?}", row.phrase)));
            }
            let lemma_key = key(&row.lemma);
            if out.for_lemma(&lemma_key).any(|(_, t)| t == tokens.as_slice()) {
                continue;
            }
            out.by_lemma.entry(lemma_key).or_default().push(out.entries.len());
            out.entries.push((row, tokens));
        }
        Ok(out)
    }

    pub fn from_csv<R: Read>(language: Language, reader: R, path: &str) -> Result<Self, ClassifyError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        check_header(&mut rdr, path, &["lemma", "phrase"])?;
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(path, &e))?;
            lines.push(line_of(&record));
            rows.push(AltPhraseEntry {
                lemma: nfc(&record[0]),
                language,
                phrase: nfc(&record[1]),
            });
        }
        AltPhrases::new(language, rows).map_err(|e| match e {
            ClassifyError::InvalidEntry { row, reason } => ClassifyError::Parse {
                path: path.to_string(),
                line: lines[row - 1],
                message: reason,
            },
            other => other,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Phrases of a lemma in registration order, with lowercase tokens.
    pub fn for_lemma<'a>(&'a self, lemma: &str) -> impl Iterator<Item = (&'a AltPhraseEntry, &'a [String])> + 'a {
        self.by_lemma
            .get(&key(lemma))
            .into_iter()
            .flatten()
            .map(|&i| (&self.entries[i].0, self.entries[i].1.as_slice()))
    }
}

/// Everything the classifier needs for one language.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: Lexicon,
    pub patterns: Vec<MorphPattern>,
    pub alt_phrases: AltPhrases,
}

impl Resources {
    pub fn language(&self) -> Language {
        self.lexicon.language()
    }

    /// Loads `<dir>/<lang>/lexicon.csv` and, when present,
    /// `alt_phrases.csv` and `patterns.csv` from the same directory.
    pub fn load_dir(dir: &Path, language: Language) -> Result<Self, ClassifyError> {
        if !dir.is_dir() {
            return Err(ClassifyError::Io {
                path: dir.display().to_string(),
                message: "lexicon directory not found".into(),
            });
        }
        let lang_dir = dir.join(language.code());
        let lex_path = lang_dir.join("lexicon.csv");
        let lexicon = Lexicon::from_csv(language, open(&lex_path)?, &lex_path.display().to_string())?;

        let alt_path = lang_dir.join("alt_phrases.csv");
        let alt_phrases = if alt_path.exists() {
            AltPhrases::from_csv(language, open(&alt_path)?, &alt_path.display().to_string())?
        } else {
            AltPhrases::default()
        };

        let pat_path = lang_dir.join("patterns.csv");
        let patterns = if pat_path.exists() {
            patterns_from_csv(language, open(&pat_path)?, &pat_path.display().to_string())?
        } else {
            Vec::new()
        };
        Ok(Resources {
            lexicon,
            patterns,
            alt_phrases,
        })
    }
}

/// Reads `kind,template` rows, kind in {slash, paren, at}.
pub fn patterns_from_csv<R: Read>(
    language: Language,
    reader: R,
    path: &str,
) -> Result<Vec<MorphPattern>, ClassifyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(&mut rdr, path, &["kind", "template"])?;
    let mut out: Vec<MorphPattern> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = line_of(&record);
        let parse_err = |message: String| ClassifyError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let kind = PatternKind::parse(&record[0])
            .ok_or_else(|| parse_err(format!("pattern kind {:?} not one of slash, paren, at", &record[0])))?;
        let pattern = MorphPattern::new(language, kind, &record[1]).map_err(|e| parse_err(e.to_string()))?;
        if !out.contains(&pattern) {
            out.push(pattern);
        }
    }
    Ok(out)
}

fn open(path: &Path) -> Result<File, ClassifyError> {
    File::open(path).map_err(|e| ClassifyError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(path: &str, e: &csv::Error) -> ClassifyError {
    ClassifyError::Parse {
        path: path.to_string(),
        line: e.position().map_or(0, |p| p.line() as usize),
        message: e.to_string(),
    }
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, path: &str, want: &[&str]) -> Result<(), ClassifyError> {
    let headers = rdr.headers().map_err(|e| csv_error(path, &e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != want {
        return Err(ClassifyError::Parse {
            path: path.to_string(),
            line: 1,
            message: format!("header {got:?}, expected {want:?}"),
        });
    }
    Ok(())
}
