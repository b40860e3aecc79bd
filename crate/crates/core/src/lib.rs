//! Finite-dimensional, approximately equivariant unital completely positive
//! approximations of translation actions on compact groups, and of isometric
//! actions pulled back through orbit maps.
//!
//! The crate is `no_std` (it needs `alloc`). Everything is pure computation on
//! immutable values: group models with Haar quadrature ([`group`]),
//! band-limited functions ([`band`]), approximate-identity kernels
//! ([`kernel`]), sampling on a finite grid ([`discretize`]), the averaged inner
//! product and polar step ([`unitarize`]), the assembled u.c.p. map with its
//! measured defects ([`ucp`]), and orbit-map reductions for isometric actions
//! ([`action`]). File formats and the command line live in the `qdcert` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod action;
pub mod band;
pub mod discretize;
mod error;
pub mod group;
pub mod kernel;
pub mod linalg;
mod rng;
pub mod tol;
pub mod ucp;
pub mod unitarize;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use action::{
    certify_action, orbit_closure, permutation_group, pullback, select_dense_orbits, ActionCertificate,
    ActionConfig, ActionSummary, BlockSummary, IsometricAction, OrbitClosureModel, OrbitCover, OrbitMap, Point, RotationAngle,
    SpaceFunction,
};
pub use band::{Band, BandFunction};
pub use discretize::{
    build_grid, evaluation_map, grid_inner, induced_representation, isometry_distortion,
    EvaluationMap, GridProfile, InducedRep, SampleGrid,
};
pub use group::{haar_quadrature, CompactGroupModel, FiniteGroup, GroupAxiom, GroupElement, QuadratureScheme};
pub use kernel::{build_bump, build_kernel, fejer_kernel, kernel_defect, Bump, Kernel, KernelBuildTrace, KernelOrigin};
pub use ucp::{certify, certify_detailed, CertifyConfig, KernelChoice, KernelSummary, PipelineOptions, Provenance, UcpCertificate, UcpMap};
pub use unitarize::{averaged_gram, basis_change, polar_unitary, unitarized_representation, GramData, Polar, Strategy, UnitarizationData};
