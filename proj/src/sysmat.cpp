#include "thintact/sysmat.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "thintact/io.hpp"
#include "thintact/kernels.hpp"
#include "thintact/rng.hpp"

namespace thintact {

void Geometry::validate() const {
    if (delta_sensor_um <= 0 || delta_scene_um <= 0 || delta_mask_um <= 0 || z_mm <= 0 || d_mm <= 0)
        throw InvalidInput("Geometry: all lengths must be > 0");
    if (meas_rows < 8 || meas_cols < 8 || scene_rows < 8 || scene_cols < 8)
        throw InvalidInput("Geometry: all dimensions must be >= 8");
}

StripeParams stripe_params(const Geometry& g, int mask_len, const SysmatConfig& cfg) {
    g.validate();
    StripeParams sp;
    sp.k_c = g.delta_scene_um / g.delta_sensor_um;
    sp.k_stripe = -(g.d_mm * g.delta_scene_um) / (g.z_mm * g.delta_sensor_um);
    sp.l_mask_mm = g.meas_rows * g.delta_sensor_um * 1e-3;
    if (cfg.d_stripe_override > 0) {
        sp.d_stripe = cfg.d_stripe_override;
    } else if (mask_len > 0) {
        // Geometric PSF footprint: mask extent projected through the pinhole model.
        double rows = mask_len * g.delta_mask_um * g.d_mm / (g.z_mm + g.d_mm) / g.delta_sensor_um;
        sp.d_stripe = std::max(1, static_cast<int>(std::ceil(rows)));
    } else {
        sp.d_stripe = 1;
    }
    return sp;
}

namespace {

double band_envelope(double t, double half_width, double steepness) {
    // Reaches 0.1 at |t| = half_width, so the 10%-amplitude support width is d_stripe.
    static const double ln9 = std::log(9.0);
    double a = (half_width - std::fabs(t)) / steepness - ln9;
    return 1.0 / (1.0 + std::exp(-a));
}

// One side of the separable pair: `rows` measurement rows by `cols` scene columns.
// With constant_profile, the +-1 mask profile is replaced by 1 (the open term).
Mat build_side(const MaskVector& phi, const Geometry& g, const StripeParams& sp,
               const SysmatConfig& cfg, int rows, int cols, bool constant_profile) {
    const int k = phi.length();
    const double z = g.z_mm * 1e3, d = g.d_mm * 1e3;  // um
    const double half_width = sp.d_stripe / 2.0;
    // 10-90% sigmoid rise spans sigmoid_transition_frac * d_stripe.
    const double steepness =
        std::max(0.05, cfg.sigmoid_transition_frac * sp.d_stripe / (2.0 * std::log(9.0)));
    const double mask_half_extent = (k - 1) / 2.0 * g.delta_mask_um;
    const double row_center = (rows - 1) / 2.0;
    const double col_center = (cols - 1) / 2.0;
    // Full band support including the sigmoid tails.
    const double support = half_width + 10.0 * steepness;

    // The band must sample inside the mask's physical extent. xi is monotone in r
    // for fixed n, so checking the in-bounds band edges covers the whole band.
    if (!constant_profile) {
        double max_xi = 0.0;
        for (int n = 0; n < cols; ++n) {
            double u = (n - col_center) * g.delta_scene_um;
            double rc = row_center + sp.k_c * (n - col_center);
            int r_lo = std::max(0, static_cast<int>(std::floor(rc - support)));
            int r_hi = std::min(rows - 1, static_cast<int>(std::ceil(rc + support)));
            if (r_lo > r_hi) continue;
            for (int r : {r_lo, r_hi}) {
                double x = (r - row_center) * g.delta_sensor_um;
                double xi = (x * z + u * d) / (z + d);
                max_xi = std::max(max_xi, std::fabs(xi));
            }
        }
        if (max_xi > mask_half_extent)
            throw GeometryError(
                "generate_system_matrices: stripe band samples the mask outside its physical "
                "extent (|xi| = " +
                std::to_string(max_xi * 1e-3) + " mm > " + std::to_string(mask_half_extent * 1e-3) +
                " mm); increase K or delta_mask");
    }

    Mat out(rows, cols, 0.0);
    #pragma omp parallel for schedule(static)
    for (int n = 0; n < cols; ++n) {
        double u = (n - col_center) * g.delta_scene_um;
        double rc = row_center + sp.k_c * (n - col_center);
        int r_lo = std::max(0, static_cast<int>(std::floor(rc - support)));
        int r_hi = std::min(rows - 1, static_cast<int>(std::ceil(rc + support)));
        for (int r = r_lo; r <= r_hi; ++r) {
            double w = band_envelope(r - rc, half_width, steepness);
            if (w < 1e-12) continue;
            double profile = 1.0;
            if (!constant_profile) {
                double x = (r - row_center) * g.delta_sensor_um;
                double xi = (x * z + u * d) / (z + d);
                double pos = xi / g.delta_mask_um + (k - 1) / 2.0;
                int i0 = static_cast<int>(std::floor(pos));
                double frac = pos - i0;
                double v0 = (i0 >= 0 && i0 < k) ? phi.entries[i0] : 0.0;
                double v1 = (i0 + 1 >= 0 && i0 + 1 < k) ? phi.entries[i0 + 1] : 0.0;
                profile = (1.0 - frac) * v0 + frac * v1;
            }
            out(r, n) = 0.5 * profile * w;
        }
    }
    return out;
}

}  // namespace

SystemMatrices generate_system_matrices(const MaskVector& phi, const Geometry& g,
                                        const SysmatConfig& cfg) {
    phi.validate();
    g.validate();
    StripeParams sp = stripe_params(g, phi.length(), cfg);
    SystemMatrices sm;
    sm.po = build_side(phi, g, sp, cfg, g.meas_rows, g.scene_rows, true);
    sm.pc = build_side(phi, g, sp, cfg, g.meas_rows, g.scene_rows, false);
    sm.qo = build_side(phi, g, sp, cfg, g.meas_cols, g.scene_cols, true);
    sm.qc = build_side(phi, g, sp, cfg, g.meas_cols, g.scene_cols, false);
    return sm;
}

Mat forward(const SystemMatrices& sm, const Mat& x, double noise_sigma, std::uint64_t seed,
            bool coding_only) {
    if (noise_sigma < 0) throw InvalidInput("forward: noise_sigma must be >= 0");
    if (x.rows() != sm.pc.cols() || x.cols() != sm.qc.cols())
        throw InvalidInput("forward: scene is " + std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()) + ", expected " + std::to_string(sm.pc.cols()) +
                           "x" + std::to_string(sm.qc.cols()));
    Mat y = matmul(matmul(sm.pc, x), transpose(sm.qc));
    if (!coding_only) y += matmul(matmul(sm.po, x), transpose(sm.qo));
    if (noise_sigma > 0) {
        auto rng = rng_stream(seed, "sysmat.forward");
        std::normal_distribution<double> gauss(0.0, noise_sigma);
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] += gauss(rng);
    }
    return y;
}

void save_system_matrices(const std::filesystem::path& dir, const SystemMatrices& sm,
                          const Geometry& g, const StripeParams& sp) {
    std::filesystem::create_directories(dir);
    save_mat(dir / "po.ltm", sm.po);
    save_mat(dir / "qo.ltm", sm.qo);
    save_mat(dir / "pc.ltm", sm.pc);
    save_mat(dir / "qc.ltm", sm.qc);
    nlohmann::json j;
    j["geometry"] = {{"delta_sensor_um", g.delta_sensor_um}, {"delta_scene_um", g.delta_scene_um},
                     {"delta_mask_um", g.delta_mask_um},     {"z_mm", g.z_mm},
                     {"d_mm", g.d_mm},                       {"meas_rows", g.meas_rows},
                     {"meas_cols", g.meas_cols},             {"scene_rows", g.scene_rows},
                     {"scene_cols", g.scene_cols}};
    j["stripe"] = {{"k_c", sp.k_c},
                   {"k_stripe", sp.k_stripe},
                   {"d_stripe", sp.d_stripe},
                   {"l_mask_mm", sp.l_mask_mm}};
    std::ofstream os(dir / "geometry.json");
    os << j.dump(2) << "\n";
}

SystemMatrices load_system_matrices(const std::filesystem::path& dir, Geometry* g_out) {
    SystemMatrices sm;
    sm.po = load_mat(dir / "po.ltm");
    sm.qo = load_mat(dir / "qo.ltm");
    sm.pc = load_mat(dir / "pc.ltm");
    sm.qc = load_mat(dir / "qc.ltm");
    if (g_out) {
        std::ifstream is(dir / "geometry.json");
        if (!is) throw FormatError((dir / "geometry.json").string() + ": cannot open");
        nlohmann::json j = nlohmann::json::parse(is);
        const auto& jg = j.at("geometry");
        g_out->delta_sensor_um = jg.at("delta_sensor_um");
        g_out->delta_scene_um = jg.at("delta_scene_um");
        g_out->delta_mask_um = jg.at("delta_mask_um");
        g_out->z_mm = jg.at("z_mm");
        g_out->d_mm = jg.at("d_mm");
        g_out->meas_rows = jg.at("meas_rows");
        g_out->meas_cols = jg.at("meas_cols");
        g_out->scene_rows = jg.at("scene_rows");
        g_out->scene_cols = jg.at("scene_cols");
    }
    return sm;
}

}  // namespace thintact
