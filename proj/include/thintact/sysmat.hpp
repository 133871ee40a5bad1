#pragma once

#include <cstdint>
#include <filesystem>

#include "thintact/mask.hpp"
#include "thintact/mat.hpp"

namespace thintact {

/// Physical arrangement of the lensless imaging system.
struct Geometry {
    double delta_sensor_um = 10.0;  // measurement pixel pitch
    double delta_scene_um = 31.5;   // scene pixel pitch
    double delta_mask_um = 20.0;    // mask feature size
    double z_mm = 4.8;              // scene-to-mask distance
    double d_mm = 1.0;              // mask-to-CMOS distance
    int meas_rows = 1024;           // R
    int meas_cols = 1280;           // S
    int scene_rows = 400;           // N
    int scene_cols = 512;           // M

    void validate() const;
};

/// Y = Po X Qo^T + Pc X Qc^T.
struct SystemMatrices {
    Mat po;  // R x N
    Mat qo;  // S x M
    Mat pc;  // R x N
    Mat qc;  // S x M
};

struct StripeParams {
    double k_c = 0;        // slope of the striped band's center line
    double k_stripe = 0;   // slope of the stripes themselves
    int d_stripe = 1;      // band width in rows
    double l_mask_mm = 0;  // effective mask length along the center line
};

struct SysmatConfig {
    int d_stripe_override = 0;             // 0 -> geometric default
    double sigmoid_transition_frac = 0.1;  // 10-90% envelope rise as a fraction of d_stripe
};

StripeParams stripe_params(const Geometry& g, int mask_len = 0, const SysmatConfig& cfg = {});

/// Builds (Po, Qo, Pc, Qc) directly from the mask vector: the +-1 profile is
/// resampled along the stripe geometry with linear interpolation, scaled by 1/2,
/// and faded by a sigmoid band envelope of width d_stripe. Po/Qo use a constant
/// 1/2 profile under the same envelope.
SystemMatrices generate_system_matrices(const MaskVector& phi, const Geometry& g,
                                        const SysmatConfig& cfg = {});

/// Po X Qo^T + Pc X Qc^T + N(0, noise_sigma^2) i.i.d.; coding_only drops the open term.
Mat forward(const SystemMatrices& sm, const Mat& x, double noise_sigma = 0.0,
            std::uint64_t seed = 0, bool coding_only = false);

/// Four LTM1 files (po/qo/pc/qc.ltm) plus geometry.json in `dir`.
void save_system_matrices(const std::filesystem::path& dir, const SystemMatrices& sm,
                          const Geometry& g, const StripeParams& sp);
SystemMatrices load_system_matrices(const std::filesystem::path& dir, Geometry* g_out = nullptr);

}  // namespace thintact
