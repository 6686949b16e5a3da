//! Campaign analytics over tweet streams.
//!
//! The pipeline mirrors how a campaign is usually dissected: ingest tweets
//! ([`ingest`]), cluster hashtags into topics and keep the central ones
//! ([`topic`]), profile each user's topical focus ([`interest`]), rank users
//! by sustained retweet influence ([`influence`]) and finally look for the
//! footprints of retweet bots around influential accounts ([`botsig`]).
//! [`synth`] generates campaigns with planted ground truth and [`report`]
//! drives the whole thing from a [`report::RunConfig`], writing CSV and SVG.

pub mod ingest;
pub mod topic;
pub mod interest;
pub mod influence;
pub mod botsig;
pub mod synth;
pub mod report;
