//! Dynamic conflict-free colorings of geometric objects.
//!
//! * [`anchored`]: rectangles anchored at the origin.
//! * [`square`]: unit squares.
//! * [`rect`]: rectangles of bounded size and rectangles over an integer
//!   universe.
//! * [`unimax`] and [`framework`]: points colored with respect to intervals
//!   or rectangles, made dynamic from static unimax colorers.
//! * [`oracle`]: brute-force checks used by tests and the harness.

pub mod anchored;
pub mod augtree;
pub mod error;
pub mod framework;
pub mod geom;
pub mod oracle;
pub mod rect;
pub mod square;
pub mod unimax;

pub use error::{Error, Result};
pub use geom::{
    AxisRect, ColorCodec, GlobalColor, Interval, KeyOrder, ObjectId, Pt, RecolorDiff, Recoloring, UnitSquare,
};
