//! Core of `evtforge`: the Event-B institution over bounded finite domains.
//!
//! The crate is `no_std` (it only needs `alloc`) and is organised in layers:
//!
//! * [`fopeq`]: first-order logic with equality, finite algebras, morphisms and pushouts.
//! * [`evt`]: the Event-B institution proper (signatures with events and variables,
//!   before/after sentences, `⟨A, L, R⟩` models, reducts, pushouts, amalgamation and the
//!   embedding of first-order logic).
//! * [`syntax`]: the shared lexer and predicate/expression grammar.
//! * [`eventb`]: Event-B machines and contexts, their text syntax and signature extraction.
//! * [`translate`]: the translation of Event-B into structured specifications.
//! * [`spec`]: structured specifications, their model-class semantics and the sugared notation.
//! * [`refine`]: refinement as model-class inclusion.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod eventb;
pub mod evt;
pub mod fopeq;
pub mod laws;
pub mod refine;
pub mod spec;
pub mod syntax;
pub mod translate;


pub use evt::{EvtModel, EvtMorphism, EvtSentence, EvtSignature, Status, INIT};
pub use fopeq::{Algebra, Bounds, Formula, FopeqMorphism, FopeqSignature, Sort, Term, Value};
