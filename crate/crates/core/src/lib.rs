//! Base noun phrase chunking with classifier combination.
//!
//! - [`corpus`]: column-format corpora and train/tune splitting.
//! - [`chunk`]: phrase sets, IOB1/IOB2/IOE1/IOE2 tags, open/close brackets.
//! - [`learners`]: five trainable chunk classifiers and the cascade.
//! - [`combination`]: majority over representations, voting, stacking, best-n selection.
//! - [`evaluation`]: precision, recall, F-score and bracket accuracies.

pub mod chunk;
pub mod combination;
pub mod corpus;
pub mod evaluation;
pub mod learners;

pub use chunk::{BracketStream, Chunking, PhraseSet, Representation, Side, Span, Tag, TagScheme, TagSequence};
pub use corpus::{Corpus, Sentence, SplitMode, SplitSpec, Token};
pub use evaluation::EvalReport;
