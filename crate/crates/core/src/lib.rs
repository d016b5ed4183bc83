//! Institutional research productivity with byline-position credit.
//!
//! The numeric core is generic over its scalar: credit weights over any
//! [`scalar::Field`] (floats or exact rationals), indicators, aggregation
//! and comparisons over any [`scalar::Real`]. The aliases below fix the
//! common choices.

pub mod aggregate;
pub mod cli;
pub mod compare;
pub mod config;
pub mod corpus;
pub mod credit;
pub mod ids;
pub mod indicators;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod synth;

use num_rational::Rational64;

pub type WeightVector64 = credit::WeightVector<f64>;
pub type WeightVector32 = credit::WeightVector<f32>;
pub type ExactWeightVector = credit::WeightVector<Rational64>;
pub type CreditScheme64 = credit::CreditScheme<f64>;
pub type ExactCreditScheme = credit::CreditScheme<Rational64>;

pub type IndicatorTable64 = indicators::IndicatorTable<f64>;
pub type IndicatorTable32 = indicators::IndicatorTable<f32>;
pub type IndicatorConfig64 = indicators::IndicatorConfig<f64>;
pub type CitationBaseline64 = indicators::CitationBaseline<f64>;

pub type NationalAverages64 = aggregate::NationalAverages<f64>;
pub type UdaTable64 = aggregate::UdaTable<f64>;

pub type Ranking64 = compare::Ranking<f64>;
pub type Analysis64 = pipeline::Analysis<f64>;
pub type Analysis32 = pipeline::Analysis<f32>;
