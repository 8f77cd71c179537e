//! Exact and numeric machinery for classifying AF algebras at finite depth.
//!
//! The exact layer works over arbitrary-precision integers: simplicial groups
//! and positive maps ([`ordgrp`]), finite-dimensional algebras ([`findim`]),
//! dimension-group towers ([`dimgroup`]), Elliott zigzags ([`elliott`]) and
//! Bratteli diagrams ([`bratteli`]). The [`perturb`] module holds the exact
//! perturbation moduli together with a double-precision matrix layer.

pub mod bratteli;
pub mod cli;
pub mod dimgroup;
pub mod elliott;
pub mod findim;
pub mod io;
pub mod ordgrp;
pub mod perturb;
