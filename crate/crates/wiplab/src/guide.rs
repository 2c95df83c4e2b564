//! Guide stub
