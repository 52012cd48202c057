//! Boundary layers, representative plates and surface wrinkling.

pub mod profile;
pub mod represent;
pub mod wrinkle;

pub use profile::{
    boundary_layer_thickness, layer_profile, skin_core_decompose, BoundaryLayer, LayerProfile, SkinCoreDecomposition,
    SlabStats,
};
pub use represent::{
    build_representative, classify_informative, compare_representative, compare_sss, expected_pattern, Alignment,
    Representative, Similarity, SimilarityReport, Verdict, ZoneComparison,
};
pub use wrinkle::{surface_wrinkle, Surface, WrinkleReport};

/// Default threshold for both the periodicity deviation and informativeness.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub(crate) fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let m = na.max(nb);
    if m == 0.0 {
        0.0
    } else {
        d / m
    }
}
