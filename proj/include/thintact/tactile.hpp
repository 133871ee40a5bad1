#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "thintact/mat.hpp"

namespace thintact {

/// Contact-detection threshold on reconstructed indentation depth.
inline constexpr double kContactThresholdMm = 0.1;

/// Indentation depth field, in millimetres, sampled on a regular pixel grid.
struct DepthMap {
    Mat grid;                     // N x M, entries >= 0
    double pixel_pitch_mm = 0.05;

    void validate() const;
};

struct Light {
    double azimuth_deg = 0.0;    // direction in the image plane, 0 = +x (columns)
    double elevation_deg = 45.0;  // above the surface plane
    std::array<double, 3> color{1.0, 0.0, 0.0};  // RGB intensity
};

struct LightingConfig {
    double sigma_px = 1.5;        // Gaussian smoothing of the depth before shading
    double ambient = 0.15;
    double diffuse = 0.85;
    double specular = 0.0;        // Phong specular weight, off by default
    double shininess = 16.0;
    std::vector<Light> lights = {{90.0, 45.0, {1.0, 0.0, 0.0}},
                                 {210.0, 45.0, {0.0, 1.0, 0.0}},
                                 {330.0, 45.0, {0.0, 0.0, 1.0}}};

    void validate() const;
};

/// Gaussian-smooths the depth, derives surface normals from its gradients and
/// renders the surface with three colored directional lights (ambient + diffuse,
/// optional specular). Deterministic for a fixed config.
ImageRGB simulate_tactile_image(const DepthMap& depth, const LightingConfig& lighting = {});

/// Separable Gaussian blur with replicated borders; kernel radius ceil(3 sigma).
Mat gaussian_blur(const Mat& m, double sigma_px);

/// Forward-difference surface gradients (last row/column zero), matching the
/// divergence convention of integrate_depth so the round trip is exact.
std::pair<Mat, Mat> surface_gradients(const Mat& z);

/// Color -> surface-gradient table over quantized (R, G, B) cells.
struct GradientLUT {
    int bins = 0;  // per channel; table holds bins^3 cells
    std::vector<double> gx, gy;
    std::vector<std::uint8_t> filled;  // 1 = filled from data (before infill)
    std::array<double, 3> background_color{0.0, 0.0, 0.0};
    double coverage = 0.0;  // filled fraction of the observed color bounding box
    bool low_coverage = false;

    bool calibrated() const { return bins > 0; }
    int cell_index(double r, double g, double b) const;
    std::pair<double, double> lookup(double r, double g, double b) const;
};

struct LutCalibConfig {
    int bins = 32;
    double coverage_warn_threshold = 0.5;
};

/// Pairs each pixel's analytic sphere-indentation gradient with its rendered
/// color. Cells average their samples; empty cells are filled from the nearest
/// filled cell in color space. Centers of the spheres are at the image center.
GradientLUT calibrate_lut(const std::vector<ImageRGB>& sphere_images, double sphere_radius_mm,
                          const std::vector<double>& press_depths_mm, double pixel_pitch_mm,
                          const LutCalibConfig& cfg = {});

/// Analytic indentation depth and gradients of a sphere of radius `radius_mm`
/// pressed `press_mm` into the surface, centered on the grid.
DepthMap sphere_depth(int rows, int cols, double pixel_pitch_mm, double radius_mm,
                      double press_mm);
std::pair<Mat, Mat> sphere_gradients(int rows, int cols, double pixel_pitch_mm, double radius_mm,
                                     double press_mm);

/// Solves the Poisson equation div(g) = laplacian(z) with a DCT spectral solver
/// (Neumann boundary); the boundary median of the result is pinned to zero.
DepthMap integrate_depth(const Mat& gx, const Mat& gy, double pixel_pitch_mm = 1.0);

/// Background-compensated per-pixel LUT lookup followed by depth integration.
DepthMap depth_from_image(const ImageRGB& img, const GradientLUT& lut,
                          const ImageRGB& ref_background, double pixel_pitch_mm);

struct Marker {
    int id = 0;
    double u = 0.0, v = 0.0;    // column, row (pixels)
    double du = 0.0, dv = 0.0;  // accumulated displacement vs the reference frame
    bool lost = false;
};

struct MarkerField {
    std::vector<Marker> markers;

    void validate(int rows, int cols) const;
};

struct TrackerConfig {
    double threshold = 0.5;       // binarization level
    bool dark_markers = true;     // markers darker than the threshold
    double marker_pitch_px = 30.0;  // max match distance is half of this
    int min_area_px = 3;
};

/// Threshold + connected components + intensity-weighted centroids.
std::vector<std::pair<double, double>> detect_markers(const Mat& frame,
                                                      const TrackerConfig& cfg = {});

/// Sequential single-owner tracker: the first frame defines the reference
/// marker set; later frames are matched by nearest neighbor and displacements
/// accumulate per-frame matched motion.
class MarkerTracker {
public:
    explicit MarkerTracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

    const MarkerField& update(const Mat& frame);
    const MarkerField& field() const { return field_; }
    bool has_reference() const { return has_reference_; }

private:
    TrackerConfig cfg_;
    MarkerField field_;
    bool has_reference_ = false;
    int next_id_ = 0;
};

/// LTM1 plus 16-bit PGM export; PGM values scale [0, depth_scale_mm] to [0, 65535].
void save_depth_map(const DepthMap& d, const std::string& ltm_path, const std::string& pgm_path,
                    double depth_scale_mm = 0.0);

/// CSV with header id,u,v,du,dv,lost.
void write_marker_csv(const MarkerField& f, const std::string& path);

}  // namespace thintact
