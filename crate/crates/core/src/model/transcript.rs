use std::cell::RefCell;

use nalgebra::DVector;

use crate::error::{check_dim, Result};
use crate::model::oracle::{FirstOrderAnswer, FirstOrderOracle, OracleAnswer, SeparationOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Separation,
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Separation(OracleAnswer),
    FirstOrder(FirstOrderAnswer),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub point: DVector<f64>,
    pub answer: Answer,
}

impl TranscriptEntry {
    pub fn separation(point: DVector<f64>, answer: OracleAnswer) -> Self {
        TranscriptEntry {
            point,
            answer: Answer::Separation(answer),
        }
    }

    pub fn first_order(point: DVector<f64>, answer: FirstOrderAnswer) -> Self {
        TranscriptEntry {
            point,
            answer: Answer::FirstOrder(answer),
        }
    }

    pub fn kind(&self) -> QueryKind {
        match self.answer {
            Answer::Separation(_) => QueryKind::Separation,
            Answer::FirstOrder(_) => QueryKind::FirstOrder,
        }
    }
}

/// Ordered query/answer pairs of one interaction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn push(&mut self, entry: TranscriptEntry) -> Result<()> {
        if let Some(first) = self.entries.first() {
            check_dim(first.point.len(), entry.point.len())?;
        }
        let dim = entry.point.len();
        match &entry.answer {
            Answer::Separation(OracleAnswer::Separator(h)) => h.check_dim(dim)?,
            Answer::FirstOrder(a) => check_dim(dim, a.subgradient.len())?,
            Answer::Separation(OracleAnswer::Inside) => {}
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn appended(mut self, entry: TranscriptEntry) -> Result<Self> {
        self.push(entry)?;
        Ok(self)
    }

    /// The first `k` entries.
    pub fn truncate(&self, k: usize) -> Transcript {
        Transcript {
            entries: self.entries[..k.min(self.entries.len())].to_vec(),
        }
    }

    /// Whether re-asking every query reproduces the recorded answers.
    /// Entries of a kind whose oracle is not supplied are skipped.
    pub fn replays(
        &self,
        sep: Option<&dyn SeparationOracle>,
        fo: Option<&dyn FirstOrderOracle>,
    ) -> Result<bool> {
        for e in &self.entries {
            match (&e.answer, sep, fo) {
                (Answer::Separation(a), Some(s), _) => {
                    if &s.separate(&e.point)? != a {
                        return Ok(false);
                    }
                }
                (Answer::FirstOrder(a), _, Some(f)) => {
                    if &f.first_order(&e.point)? != a {
                        return Ok(false);
                    }
                }
                _ => {}
            }
        }
        Ok(true)
    }
}

/// Oracle wrapper appending every query and answer to a transcript.
pub struct Recorder<'a> {
    sep: &'a dyn SeparationOracle,
    fo: Option<&'a dyn FirstOrderOracle>,
    transcript: RefCell<Transcript>,
}

impl<'a> Recorder<'a> {
    pub fn new(sep: &'a dyn SeparationOracle, fo: Option<&'a dyn FirstOrderOracle>) -> Self {
        Recorder {
            sep,
            fo,
            transcript: RefCell::new(Transcript::new()),
        }
    }

    pub fn transcript(&self) -> Transcript {
        self.transcript.borrow().clone()
    }
}

impl SeparationOracle for Recorder<'_> {
    fn dim(&self) -> usize {
        self.sep.dim()
    }

    fn separate(&self, z: &DVector<f64>) -> Result<OracleAnswer> {
        let a = self.sep.separate(z)?;
        self.transcript
            .borrow_mut()
            .push(TranscriptEntry::separation(z.clone(), a.clone()))?;
        Ok(a)
    }
}

impl FirstOrderOracle for Recorder<'_> {
    fn dim(&self) -> usize {
        self.sep.dim()
    }

    fn first_order(&self, z: &DVector<f64>) -> Result<FirstOrderAnswer> {
        let f = self.fo.ok_or_else(|| {
            crate::error::Error::InvalidInput("recorder has no first-order oracle".into())
        })?;
        let a = f.first_order(z)?;
        self.transcript
            .borrow_mut()
            .push(TranscriptEntry::first_order(z.clone(), a.clone()))?;
        Ok(a)
    }
}
