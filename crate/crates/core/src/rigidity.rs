//! Flat-metric second-variation analysis (in progress).
