#include "thintact/tactile.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>

#include "thintact/dct.hpp"
#include "thintact/io.hpp"

namespace thintact {

void DepthMap::validate() const {
    if (grid.empty()) throw InvalidInput("DepthMap: empty grid");
    if (pixel_pitch_mm <= 0) throw InvalidInput("DepthMap: pixel_pitch_mm must be > 0");
    if (!grid.all_finite()) throw InvalidInput("DepthMap: non-finite entries");
    for (int i = 0; i < grid.rows(); ++i)
        for (int j = 0; j < grid.cols(); ++j)
            if (grid(i, j) < 0.0) throw InvalidInput("DepthMap: negative indentation depth");
}

void LightingConfig::validate() const {
    if (sigma_px < 0) throw InvalidInput("LightingConfig: sigma_px must be >= 0");
    if (ambient < 0 || diffuse < 0 || specular < 0)
        throw InvalidInput("LightingConfig: shading weights must be >= 0");
    if (lights.empty()) throw InvalidInput("LightingConfig: need at least one light");
    for (const auto& l : lights)
        if (l.elevation_deg <= 0 || l.elevation_deg > 90)
            throw InvalidInput("LightingConfig: light elevation must be in (0, 90] degrees");
}

Mat gaussian_blur(const Mat& m, double sigma_px) {
    if (sigma_px <= 0) return m;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        kernel[t + radius] = std::exp(-0.5 * t * t / (sigma_px * sigma_px));
        sum += kernel[t + radius];
    }
    for (double& k : kernel) k /= sum;

    const int rows = m.rows(), cols = m.cols();
    Mat tmp(rows, cols), out(rows, cols);
    #pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[t + radius] * m(i, std::clamp(j + t, 0, cols - 1));
            tmp(i, j) = acc;
        }
    #pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[t + radius] * tmp(std::clamp(i + t, 0, rows - 1), j);
            out(i, j) = acc;
        }
    return out;
}

ImageRGB simulate_tactile_image(const DepthMap& depth, const LightingConfig& lighting) {
    depth.validate();
    lighting.validate();
    const int rows = depth.grid.rows(), cols = depth.grid.cols();
    const double pitch = depth.pixel_pitch_mm;
    Mat h = gaussian_blur(depth.grid, lighting.sigma_px);

    struct Dir {
        double x, y, z;
        std::array<double, 3> color;
    };
    std::vector<Dir> dirs;
    constexpr double deg = std::numbers::pi / 180.0;
    for (const auto& l : lighting.lights) {
        double ce = std::cos(l.elevation_deg * deg), se = std::sin(l.elevation_deg * deg);
        dirs.push_back({ce * std::cos(l.azimuth_deg * deg), ce * std::sin(l.azimuth_deg * deg), se,
                        l.color});
    }

    ImageRGB img{Mat(rows, cols), Mat(rows, cols), Mat(rows, cols)};
    #pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            // x along columns, y along rows; central differences in mm.
            double hx = (h(i, std::min(j + 1, cols - 1)) - h(i, std::max(j - 1, 0))) /
                        ((std::min(j + 1, cols - 1) - std::max(j - 1, 0)) * pitch);
            double hy = (h(std::min(i + 1, rows - 1), j) - h(std::max(i - 1, 0), j)) /
                        ((std::min(i + 1, rows - 1) - std::max(i - 1, 0)) * pitch);
            double inv = 1.0 / std::sqrt(hx * hx + hy * hy + 1.0);
            double nx = -hx * inv, ny = -hy * inv, nz = inv;
            double c[3] = {0.0, 0.0, 0.0};
            for (const auto& d : dirs) {
                double lambert = std::max(0.0, nx * d.x + ny * d.y + nz * d.z);
                double shade = lighting.ambient + lighting.diffuse * lambert;
                if (lighting.specular > 0.0) {
                    // Blinn half-vector with the viewer at +z.
                    double hxv = d.x, hyv = d.y, hzv = d.z + 1.0;
                    double hn = std::sqrt(hxv * hxv + hyv * hyv + hzv * hzv);
                    double spec = std::max(0.0, (nx * hxv + ny * hyv + nz * hzv) / hn);
                    shade += lighting.specular * std::pow(spec, lighting.shininess);
                }
                for (int ch = 0; ch < 3; ++ch) c[ch] += shade * d.color[ch];
            }
            for (int ch = 0; ch < 3; ++ch) img.plane(ch)(i, j) = std::clamp(c[ch], 0.0, 1.0);
        }
    return img;
}

std::pair<Mat, Mat> surface_gradients(const Mat& z) {
    const int rows = z.rows(), cols = z.cols();
    Mat gx(rows, cols, 0.0), gy(rows, cols, 0.0);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j + 1 < cols; ++j) gx(i, j) = z(i, j + 1) - z(i, j);
    for (int i = 0; i + 1 < rows; ++i)
        for (int j = 0; j < cols; ++j) gy(i, j) = z(i + 1, j) - z(i, j);
    return {std::move(gx), std::move(gy)};
}

int GradientLUT::cell_index(double r, double g, double b) const {
    auto q = [&](double v) {
        int c = static_cast<int>(std::clamp(v, 0.0, 1.0) * bins);
        return std::min(c, bins - 1);
    };
    return (q(r) * bins + q(g)) * bins + q(b);
}

std::pair<double, double> GradientLUT::lookup(double r, double g, double b) const {
    if (!calibrated()) throw InvalidInput("GradientLUT: lookup on an uncalibrated table");
    int idx = cell_index(r, g, b);
    return {gx[idx], gy[idx]};
}

DepthMap sphere_depth(int rows, int cols, double pixel_pitch_mm, double radius_mm,
                      double press_mm) {
    if (press_mm < 0 || press_mm > radius_mm)
        throw InvalidInput("sphere_depth: press depth must be in [0, radius]");
    DepthMap d{Mat(rows, cols, 0.0), pixel_pitch_mm};
    const double cx = (cols - 1) / 2.0, cy = (rows - 1) / 2.0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double x = (j - cx) * pixel_pitch_mm, y = (i - cy) * pixel_pitch_mm;
            double rho2 = x * x + y * y;
            double val = press_mm - radius_mm + std::sqrt(std::max(0.0, radius_mm * radius_mm - rho2));
            d.grid(i, j) = std::max(0.0, val);
        }
    return d;
}

std::pair<Mat, Mat> sphere_gradients(int rows, int cols, double pixel_pitch_mm, double radius_mm,
                                     double press_mm) {
    std::pair<Mat, Mat> g{Mat(rows, cols, 0.0), Mat(rows, cols, 0.0)};
    const double cx = (cols - 1) / 2.0, cy = (rows - 1) / 2.0;
    const double contact2 = 2.0 * radius_mm * press_mm - press_mm * press_mm;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double x = (j - cx) * pixel_pitch_mm, y = (i - cy) * pixel_pitch_mm;
            double rho2 = x * x + y * y;
            if (rho2 < contact2) {
                double s = std::sqrt(radius_mm * radius_mm - rho2);
                g.first(i, j) = -x / s;
                g.second(i, j) = -y / s;
            }
        }
    return g;
}

GradientLUT calibrate_lut(const std::vector<ImageRGB>& sphere_images, double sphere_radius_mm,
                          const std::vector<double>& press_depths_mm, double pixel_pitch_mm,
                          const LutCalibConfig& cfg) {
    if (sphere_images.size() != press_depths_mm.size())
        throw InvalidInput("calibrate_lut: one press depth per image required");
    if (sphere_images.empty()) throw InvalidInput("calibrate_lut: empty calibration set");
    if (cfg.bins < 2) throw InvalidInput("calibrate_lut: bins must be >= 2");
    if (pixel_pitch_mm <= 0) throw InvalidInput("calibrate_lut: pixel_pitch_mm must be > 0");

    GradientLUT lut;
    lut.bins = cfg.bins;
    const std::size_t cells = static_cast<std::size_t>(cfg.bins) * cfg.bins * cfg.bins;
    lut.gx.assign(cells, 0.0);
    lut.gy.assign(cells, 0.0);
    lut.filled.assign(cells, 0);
    std::vector<double> count(cells, 0.0);

    int lo[3] = {cfg.bins, cfg.bins, cfg.bins}, hi[3] = {-1, -1, -1};
    double bg_sum[3] = {0, 0, 0};
    double bg_count = 0;

    for (std::size_t im = 0; im < sphere_images.size(); ++im) {
        const ImageRGB& img = sphere_images[im];
        img.validate();
        auto [gx, gy] = sphere_gradients(img.height(), img.width(), pixel_pitch_mm,
                                         sphere_radius_mm, press_depths_mm[im]);
        for (int i = 0; i < img.height(); ++i)
            for (int j = 0; j < img.width(); ++j) {
                double r = img.r(i, j), g = img.g(i, j), b = img.b(i, j);
                int idx = lut.cell_index(r, g, b);
                lut.gx[idx] += gx(i, j);
                lut.gy[idx] += gy(i, j);
                count[idx] += 1.0;
                int bin[3];
                bin[0] = idx / (cfg.bins * cfg.bins);
                bin[1] = (idx / cfg.bins) % cfg.bins;
                bin[2] = idx % cfg.bins;
                for (int c = 0; c < 3; ++c) {
                    lo[c] = std::min(lo[c], bin[c]);
                    hi[c] = std::max(hi[c], bin[c]);
                }
                if (gx(i, j) == 0.0 && gy(i, j) == 0.0) {
                    bg_sum[0] += r;
                    bg_sum[1] += g;
                    bg_sum[2] += b;
                    bg_count += 1.0;
                }
            }
    }
    std::size_t filled_count = 0;
    for (std::size_t c = 0; c < cells; ++c)
        if (count[c] > 0) {
            lut.gx[c] /= count[c];
            lut.gy[c] /= count[c];
            lut.filled[c] = 1;
            ++filled_count;
        }
    if (bg_count > 0)
        for (int c = 0; c < 3; ++c) lut.background_color[c] = bg_sum[c] / bg_count;

    std::size_t box =
        static_cast<std::size_t>(hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1);
    lut.coverage = static_cast<double>(filled_count) / static_cast<double>(box);
    lut.low_coverage = lut.coverage < cfg.coverage_warn_threshold;

    // Nearest-neighbor infill: multi-source BFS over the 6-connected bin grid.
    std::deque<int> queue;
    for (std::size_t c = 0; c < cells; ++c)
        if (lut.filled[c]) queue.push_back(static_cast<int>(c));
    std::vector<std::uint8_t> visited(lut.filled.begin(), lut.filled.end());
    const int b = cfg.bins;
    while (!queue.empty()) {
        int idx = queue.front();
        queue.pop_front();
        int br = idx / (b * b), bgn = (idx / b) % b, bb = idx % b;
        const int nb[6][3] = {{br - 1, bgn, bb}, {br + 1, bgn, bb}, {br, bgn - 1, bb},
                              {br, bgn + 1, bb}, {br, bgn, bb - 1}, {br, bgn, bb + 1}};
        for (const auto& n : nb) {
            if (n[0] < 0 || n[0] >= b || n[1] < 0 || n[1] >= b || n[2] < 0 || n[2] >= b) continue;
            int nidx = (n[0] * b + n[1]) * b + n[2];
            if (visited[nidx]) continue;
            visited[nidx] = 1;
            lut.gx[nidx] = lut.gx[idx];
            lut.gy[nidx] = lut.gy[idx];
            queue.push_back(nidx);
        }
    }
    return lut;
}

DepthMap integrate_depth(const Mat& gx, const Mat& gy, double pixel_pitch_mm) {
    require_same_shape(gx, gy, "integrate_depth");
    if (pixel_pitch_mm <= 0) throw InvalidInput("integrate_depth: pixel_pitch_mm must be > 0");
    const int rows = gx.rows(), cols = gx.cols();

    // Divergence of the per-pixel gradient (backward differences), the adjoint
    // of the forward differences in surface_gradients. Gradients are slopes in
    // mm/mm; multiplying by the pitch converts to per-pixel steps.
    Mat f(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double dx = gx(i, j) - (j > 0 ? gx(i, j - 1) : 0.0);
            double dy = gy(i, j) - (i > 0 ? gy(i - 1, j) : 0.0);
            f(i, j) = (dx + dy) * pixel_pitch_mm;
        }

    // The 5-point Neumann Laplacian is diagonal in the orthonormal DCT-II basis.
    Mat fh = dct2(f);
    for (int u = 0; u < rows; ++u)
        for (int v = 0; v < cols; ++v) {
            double lam = 2.0 * std::cos(std::numbers::pi * u / rows) +
                         2.0 * std::cos(std::numbers::pi * v / cols) - 4.0;
            fh(u, v) = (u == 0 && v == 0) ? 0.0 : fh(u, v) / lam;
        }
    DepthMap d{idct2(fh), pixel_pitch_mm};

    std::vector<double> boundary;
    for (int j = 0; j < cols; ++j) {
        boundary.push_back(d.grid(0, j));
        boundary.push_back(d.grid(rows - 1, j));
    }
    for (int i = 1; i + 1 < rows; ++i) {
        boundary.push_back(d.grid(i, 0));
        boundary.push_back(d.grid(i, cols - 1));
    }
    std::nth_element(boundary.begin(), boundary.begin() + boundary.size() / 2, boundary.end());
    double median = boundary[boundary.size() / 2];
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) d.grid(i, j) -= median;
    return d;
}

DepthMap depth_from_image(const ImageRGB& img, const GradientLUT& lut,
                          const ImageRGB& ref_background, double pixel_pitch_mm) {
    if (!lut.calibrated()) throw InvalidInput("depth_from_image: uncalibrated LUT");
    img.validate();
    ref_background.validate();
    require_same_shape(img.r, ref_background.r, "depth_from_image");
    const int rows = img.height(), cols = img.width();
    Mat gx(rows, cols), gy(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double c[3];
            for (int ch = 0; ch < 3; ++ch)
                c[ch] = std::clamp(lut.background_color[ch] + img.plane(ch)(i, j) -
                                       ref_background.plane(ch)(i, j),
                                   0.0, 1.0);
            auto [x, y] = lut.lookup(c[0], c[1], c[2]);
            gx(i, j) = x;
            gy(i, j) = y;
        }
    DepthMap d = integrate_depth(gx, gy, pixel_pitch_mm);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) d.grid(i, j) = std::max(0.0, d.grid(i, j));
    return d;
}

void MarkerField::validate(int rows, int cols) const {
    for (const auto& m : markers)
        if (m.u < 0 || m.u > cols - 1 || m.v < 0 || m.v > rows - 1)
            throw InvalidInput("MarkerField: marker position out of image bounds");
}

std::vector<std::pair<double, double>> detect_markers(const Mat& frame,
                                                      const TrackerConfig& cfg) {
    const int rows = frame.rows(), cols = frame.cols();
    auto is_marker = [&](int i, int j) {
        return cfg.dark_markers ? frame(i, j) < cfg.threshold : frame(i, j) > cfg.threshold;
    };
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(rows) * cols, 0);
    std::vector<std::pair<double, double>> out;
    std::vector<int> stack;
    for (int si = 0; si < rows; ++si)
        for (int sj = 0; sj < cols; ++sj) {
            if (seen[static_cast<std::size_t>(si) * cols + sj] || !is_marker(si, sj)) continue;
            stack.assign(1, si * cols + sj);
            seen[static_cast<std::size_t>(si) * cols + sj] = 1;
            double wsum = 0.0, usum = 0.0, vsum = 0.0;
            int area = 0;
            while (!stack.empty()) {
                int p = stack.back();
                stack.pop_back();
                int i = p / cols, j = p % cols;
                double w = cfg.dark_markers ? (cfg.threshold - frame(i, j))
                                            : (frame(i, j) - cfg.threshold);
                w = std::max(w, 1e-12);
                wsum += w;
                usum += w * j;
                vsum += w * i;
                ++area;
                const int ni[4] = {i - 1, i + 1, i, i};
                const int nj[4] = {j, j, j - 1, j + 1};
                for (int t = 0; t < 4; ++t) {
                    if (ni[t] < 0 || ni[t] >= rows || nj[t] < 0 || nj[t] >= cols) continue;
                    std::size_t q = static_cast<std::size_t>(ni[t]) * cols + nj[t];
                    if (seen[q] || !is_marker(ni[t], nj[t])) continue;
                    seen[q] = 1;
                    stack.push_back(ni[t] * cols + nj[t]);
                }
            }
            if (area >= cfg.min_area_px) out.emplace_back(usum / wsum, vsum / wsum);
        }
    return out;
}

const MarkerField& MarkerTracker::update(const Mat& frame) {
    auto detections = detect_markers(frame, cfg_);
    if (!has_reference_) {
        field_.markers.clear();
        for (const auto& [u, v] : detections)
            field_.markers.push_back({next_id_++, u, v, 0.0, 0.0, false});
        has_reference_ = true;
        return field_;
    }

    const double max_dist = 0.5 * cfg_.marker_pitch_px;
    struct Pair {
        double dist;
        int marker, det;
    };
    std::vector<Pair> pairs;
    for (std::size_t m = 0; m < field_.markers.size(); ++m) {
        if (field_.markers[m].lost) continue;
        for (std::size_t d = 0; d < detections.size(); ++d) {
            double du = detections[d].first - field_.markers[m].u;
            double dv = detections[d].second - field_.markers[m].v;
            double dist = std::hypot(du, dv);
            if (dist <= max_dist) pairs.push_back({dist, static_cast<int>(m), static_cast<int>(d)});
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
    std::vector<std::uint8_t> marker_used(field_.markers.size(), 0), det_used(detections.size(), 0);
    for (const Pair& p : pairs) {
        if (marker_used[p.marker] || det_used[p.det]) continue;
        marker_used[p.marker] = det_used[p.det] = 1;
        Marker& m = field_.markers[p.marker];
        m.du += detections[p.det].first - m.u;
        m.dv += detections[p.det].second - m.v;
        m.u = detections[p.det].first;
        m.v = detections[p.det].second;
    }
    for (std::size_t m = 0; m < field_.markers.size(); ++m)
        if (!marker_used[m]) field_.markers[m].lost = true;
    return field_;
}

void save_depth_map(const DepthMap& d, const std::string& ltm_path, const std::string& pgm_path,
                    double depth_scale_mm) {
    d.validate();
    save_mat(ltm_path, d.grid);
    double scale = depth_scale_mm > 0 ? depth_scale_mm : std::max(d.grid.max_abs(), 1e-12);
    save_pgm(pgm_path, d.grid * (1.0 / scale));
}

void write_marker_csv(const MarkerField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("write_marker_csv: cannot open " + path);
    out << "id,u,v,du,dv,lost\n";
    for (const auto& m : f.markers)
        out << m.id << ',' << m.u << ',' << m.v << ',' << m.du << ',' << m.dv << ','
            << (m.lost ? 1 : 0) << '\n';
    if (!out.good()) throw InvalidInput("write_marker_csv: write failed for " + path);
}

}  // namespace thintact
