//! Executable machinery for three-term progressions in finite abelian groups.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure algorithms:
//!
//! * [`group`], [`set`], [`func`]: groups as products of cyclic factors,
//!   subsets as bitmaps, and real functions with an exact rational path for
//!   anything derived from indicator functions.
//! * [`fourier`]: characters, the averaged Fourier transform, and the spectral
//!   positivity facts behind unbalancing.
//! * [`bohr`]: Bohr sets, dilates, exact regularity certification, joins,
//!   frequency dilation and progression extraction.
//! * [`km`]: the individual density-increment steps, each returning a
//!   certificate that can be replayed from raw inputs.
//! * [`pipelines`]: progression-free constructions and the end-to-end drivers.
//!
//! IO, file formats and the command line live in the companion `km` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bohr;
pub mod constants;
mod error;
mod fft;
pub mod fourier;
pub mod func;
pub mod group;
pub mod km;
pub mod num;
pub mod pipelines;
pub mod rng;
pub mod set;

pub use bohr::{ApRun, BohrSet, Regularity};
pub use constants::Constants;
pub use error::{KmError, Result};
pub use fourier::{Complex, FuncC};
pub use func::{FuncR, ProbMeasure};
pub use group::{Element, Group};
pub use set::GSet;
