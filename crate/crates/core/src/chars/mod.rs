//! Exact character values and characters of the finite abelian quotients.

mod abelian;
mod characters;
mod cyclotomic;

pub use abelian::{abelian_structure, AbelianStructure};
pub use characters::{char_level, is_generic, CharacterSpec, DiagCharacter, TorsionGroup};
pub use cyclotomic::{totient, Cyclotomic};
