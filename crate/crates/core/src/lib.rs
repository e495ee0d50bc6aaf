// Copyright contributors to the weakrot project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Weak transversal Pauli rotations on stabilizer codes.
//!
//! The crate covers GF(2) and Pauli algebra ([`gf2`], [`pauli`]), code
//! construction and logical operators ([`codes`], [`punctured`]), partition
//! synthesis ([`partition`]), closed-form branch statistics ([`angles`]),
//! dense and Pauli-expansion certification ([`oracle`]), the
//! repeat-until-success simulator ([`rus`]) and architecture cost estimates
//! ([`estimate`]).

pub mod angles;
pub mod codes;
pub mod error;
pub mod estimate;
pub mod gf2;
pub mod oracle;
pub mod partition;
pub mod pauli;
pub mod punctured;
pub mod rus;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec, RrefResult};
pub use pauli::PauliOp;
