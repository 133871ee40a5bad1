// thintact: command-line pipeline for the separable-mask lensless tactile sensor.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thintact/calib.hpp"
#include "thintact/filter.hpp"
#include "thintact/io.hpp"
#include "thintact/mask.hpp"
#include "thintact/maskopt.hpp"
#include "thintact/metrics.hpp"
#include "thintact/recon.hpp"
#include "thintact/rng.hpp"
#include "thintact/sysmat.hpp"
#include "thintact/tactile.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thintact;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

Mat load_vector_file(const fs::path& path) {
    Mat m = load_mat(path);
    if (m.rows() != 1) throw InvalidInput("expected a 1-row vector in " + path.string());
    return m;
}

MaskVector load_mask_vector(const fs::path& path) {
    Mat m = load_vector_file(path);
    MaskVector phi;
    phi.entries.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        phi.entries.push_back(m.data()[i] >= 0 ? 1 : -1);
    phi.validate();
    return phi;
}

void save_mask_vector(const fs::path& path, const MaskVector& phi) {
    Mat m(1, phi.length());
    for (int i = 0; i < phi.length(); ++i) m(0, i) = phi.entries[i];
    save_mat(path, m);
}

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw FormatError("missing file: " + p.string());
}

struct Manifest {
    json outputs = json::array();
    double t_start = now_ms();

    void add(const fs::path& p) { outputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}}); }
    void write(const fs::path& path, const std::string& command, std::uint64_t seed,
               const json& flags) {
        json doc{{"command", command},
                 {"seed", seed},
                 {"flags", flags},
                 {"outputs", outputs},
                 {"wall_time_ms", now_ms() - t_start}};
        std::ofstream out(path);
        out << doc.dump(2) << '\n';
        if (!out.good()) throw FormatError("cannot write manifest " + path.string());
    }
};

void add_geometry_flags(CLI::App* app, Geometry& g) {
    app->add_option("--delta-sensor", g.delta_sensor_um, "sensor pixel pitch [um]");
    app->add_option("--delta-scene", g.delta_scene_um, "scene pixel pitch [um]");
    app->add_option("--delta-mask", g.delta_mask_um, "mask feature size [um]");
    app->add_option("--z", g.z_mm, "scene-to-mask distance [mm]");
    app->add_option("--d", g.d_mm, "mask-to-sensor distance [mm]");
    app->add_option("--meas-rows", g.meas_rows, "measurement rows R");
    app->add_option("--meas-cols", g.meas_cols, "measurement cols S");
    app->add_option("--scene-rows", g.scene_rows, "scene rows N");
    app->add_option("--scene-cols", g.scene_cols, "scene cols M");
}

Geometry geometry_from_json(const json& j, Geometry g) {
    if (j.contains("delta_sensor_um")) g.delta_sensor_um = j["delta_sensor_um"];
    if (j.contains("delta_scene_um")) g.delta_scene_um = j["delta_scene_um"];
    if (j.contains("delta_mask_um")) g.delta_mask_um = j["delta_mask_um"];
    if (j.contains("z_mm")) g.z_mm = j["z_mm"];
    if (j.contains("d_mm")) g.d_mm = j["d_mm"];
    if (j.contains("meas_rows")) g.meas_rows = j["meas_rows"];
    if (j.contains("meas_cols")) g.meas_cols = j["meas_cols"];
    if (j.contains("scene_rows")) g.scene_rows = j["scene_rows"];
    if (j.contains("scene_cols")) g.scene_cols = j["scene_cols"];
    return g;
}

// Pre-pass: --config <file> provides defaults; explicit flags still override
// because CLI11 parses them after these defaults are installed.
json load_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") {
            fs::path p = argv[i + 1];
            require_file(p);
            std::ifstream in(p);
            json j = json::parse(in, nullptr, true, true);
            return j;
        }
    return json::object();
}

Mat load_gray(const fs::path& p) {
    if (p.extension() == ".pgm") return load_pgm(p);
    return load_mat(p);
}

int run(int argc, char** argv) {
    CLI::App app{"Separable-mask lensless tactile sensing pipeline"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its values")
        ->expected(1);

    json cfg_json = load_config(argc, argv);
    Geometry geo_default = geometry_from_json(cfg_json.value("geometry", json::object()), Geometry{});
    std::uint64_t seed = cfg_json.value("seed", 0ull);
    app.add_option("--seed", seed, "master RNG seed; all streams derive from it");

    // --- mask-gen ---------------------------------------------------------
    auto* mg = app.add_subcommand("mask-gen", "generate a mask vector");
    mg->require_subcommand(1);
    std::string mg_out, mg_pgm;
    int mls_order = 8, mls_repeats = 1, rnd_k = 770;
    auto* mg_mls = mg->add_subcommand("mls", "maximum-length sequence");
    mg_mls->add_option("--order", mls_order, "LFSR order (2-16)");
    mg_mls->add_option("--repeats", mls_repeats, "tile the sequence this many times");
    auto* mg_rnd = mg->add_subcommand("random", "uniform +-1 vector");
    mg_rnd->add_option("--k", rnd_k, "vector length");
    for (auto* s : {mg_mls, mg_rnd}) {
        s->add_option("-o,--output", mg_out, "output LTM1 path")->required();
        s->add_option("--pgm", mg_pgm, "also write the assembled KxK mask as PGM");
    }

    // --- simulate ---------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "forward-render scenes to measurements");
    std::string sim_mask, sim_outdir, sim_sysmat_out;
    std::vector<std::string> sim_scenes;
    double sim_noise = 0.0;
    bool sim_coding_only = false;
    Geometry sim_geo = geo_default;
    sim->add_option("--mask", sim_mask, "mask vector LTM1")->required();
    sim->add_option("--scene", sim_scenes, "scene files (LTM1 or PGM)")->required();
    sim->add_option("--outdir", sim_outdir, "output directory")->required();
    sim->add_option("--noise-sigma", sim_noise, "i.i.d. Gaussian noise level");
    sim->add_flag("--coding-only", sim_coding_only, "emit the coding component Yc only");
    sim->add_option("--save-sysmat", sim_sysmat_out, "also persist the system matrices here");
    add_geometry_flags(sim, sim_geo);

    // --- calibrate --------------------------------------------------------
    auto* cal = app.add_subcommand("calibrate", "recover system matrices from slit scans");
    std::string cal_mask, cal_outdir;
    std::vector<std::string> cal_h_files, cal_v_files;
    double cal_noise = 0.0;
    int cal_max_iters = 50;
    double cal_tol = 1e-4;
    bool cal_synthetic = false;
    Geometry cal_geo = geo_default;
    cal->add_flag("--synthetic", cal_synthetic, "synthesize the slit set from --mask");
    cal->add_option("--mask", cal_mask, "mask vector LTM1 (synthetic mode)");
    cal->add_option("--h-files", cal_h_files, "horizontal slit measurements, in scan order");
    cal->add_option("--v-files", cal_v_files, "vertical slit measurements, in scan order");
    cal->add_option("--outdir", cal_outdir, "output directory")->required();
    cal->add_option("--noise-sigma", cal_noise, "noise for synthetic slit rendering");
    cal->add_option("--max-iters", cal_max_iters, "refinement iteration cap");
    cal->add_option("--tol", cal_tol, "relative-change convergence tolerance");
    add_geometry_flags(cal, cal_geo);

    // --- reconstruct ------------------------------------------------------
    auto* rec = app.add_subcommand("reconstruct", "invert measurements to scenes");
    std::string rec_sysmat, rec_filter, rec_outdir, rec_method = "closed", rec_indir;
    std::vector<std::string> rec_inputs;
    double rec_tau = 0.0;
    int rec_iters = 800;
    rec->add_option("--sysmat", rec_sysmat, "system-matrix directory")->required();
    rec->add_option("--filter", rec_filter, "joint-filter parameter directory (optional)");
    rec->add_option("--method", rec_method, "closed | nesterov")
        ->check(CLI::IsMember({"closed", "nesterov"}));
    rec->add_option("--input", rec_inputs, "measurement files (LTM1, PGM, or PPM)");
    rec->add_option("--indir", rec_indir, "stream mode: process every file in this directory");
    rec->add_option("--outdir", rec_outdir, "output directory")->required();
    rec->add_option("--tau", rec_tau, "Tikhonov weight (0 -> default rule)");
    rec->add_option("--iterations", rec_iters, "Nesterov iteration count");

    // --- optimize-mask ----------------------------------------------------
    auto* opt = app.add_subcommand("optimize-mask", "GA search over mask vectors");
    std::string opt_outdir;
    GaConfig ga;
    if (cfg_json.contains("ga")) {
        const json& gj = cfg_json["ga"];
        ga.population = gj.value("population", ga.population);
        ga.generations = gj.value("generations", ga.generations);
        ga.crossover_prob = gj.value("crossover_prob", ga.crossover_prob);
        ga.mutation_prob = gj.value("mutation_prob", ga.mutation_prob);
        ga.mutation_loci = gj.value("mutation_loci", ga.mutation_loci);
        ga.elitism = gj.value("elitism", ga.elitism);
    }
    int opt_k = 770;
    double opt_noise = 0.005, opt_tau = 0.0;
    Geometry opt_geo = geo_default;
    opt->add_option("--k", opt_k, "gene length");
    opt->add_option("--pop", ga.population, "population size");
    opt->add_option("--gens", ga.generations, "generation count");
    opt->add_option("--crossover", ga.crossover_prob, "crossover probability");
    opt->add_option("--mutation", ga.mutation_prob, "mutation probability");
    opt->add_option("--loci", ga.mutation_loci, "loci inverted per mutation");
    opt->add_option("--elitism", ga.elitism, "elite individuals kept per generation");
    opt->add_option("--noise-sigma", opt_noise, "fitness simulation noise");
    opt->add_option("--tau", opt_tau, "fitness reconstruction tau (0 -> default rule)");
    opt->add_option("--outdir", opt_outdir, "output directory")->required();
    add_geometry_flags(opt, opt_geo);

    // --- bench ------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "closed-form vs Nesterov timing report");
    std::string bench_out;
    int bench_frames = 5, bench_nesterov_frames = -1, bench_iters = 800;
    Geometry bench_geo = geo_default;
    bench->add_option("--frames", bench_frames, "frames averaged for the closed-form side");
    bench->add_option("--nesterov-frames", bench_nesterov_frames,
                      "frames for the Nesterov side (default: same as --frames)");
    bench->add_option("--iterations", bench_iters, "Nesterov iteration count");
    bench->add_option("-o,--output", bench_out, "write the JSON report here too");
    add_geometry_flags(bench, bench_geo);

    // --- tactile ----------------------------------------------------------
    auto* tac = app.add_subcommand("tactile", "tactile simulation and interpretation");
    tac->require_subcommand(1);
    double t_radius = 4.0, t_press = 0.5, t_pitch = 0.05, t_sigma = 1.5;
    int t_rows = 128, t_cols = 128, t_bins = 32;
    std::string t_out, t_outdir, t_input, t_ref, t_lut;
    std::vector<double> t_depths;
    std::vector<std::string> t_frames;

    auto* tsim = tac->add_subcommand("sim", "render an ideal tactile image of a pressed sphere");
    tsim->add_option("--radius", t_radius, "sphere radius [mm]");
    tsim->add_option("--press", t_press, "press depth [mm]");
    tsim->add_option("--rows", t_rows, "image rows");
    tsim->add_option("--cols", t_cols, "image cols");
    tsim->add_option("--pitch", t_pitch, "pixel pitch [mm]");
    tsim->add_option("--sigma", t_sigma, "Gaussian smoothing sigma [px]");
    tsim->add_option("-o,--output", t_out, "output PPM")->required();

    auto* tcal = tac->add_subcommand("calibrate", "build the color->gradient LUT from spheres");
    tcal->add_option("--radius", t_radius, "calibration sphere radius [mm]");
    tcal->add_option("--depths", t_depths, "press depths [mm], one rendered image each")
        ->required();
    tcal->add_option("--rows", t_rows, "image rows");
    tcal->add_option("--cols", t_cols, "image cols");
    tcal->add_option("--pitch", t_pitch, "pixel pitch [mm]");
    tcal->add_option("--sigma", t_sigma, "Gaussian smoothing sigma [px]");
    tcal->add_option("--bins", t_bins, "LUT bins per channel");
    tcal->add_option("--outdir", t_outdir, "LUT output directory")->required();

    auto* tdep = tac->add_subcommand("depth", "depth map from a tactile image via the LUT");
    tdep->add_option("--input", t_input, "tactile image PPM")->required();
    tdep->add_option("--ref", t_ref, "reference background PPM")->required();
    tdep->add_option("--lut", t_lut, "LUT directory from `tactile calibrate`")->required();
    tdep->add_option("--pitch", t_pitch, "pixel pitch [mm]");
    tdep->add_option("--outdir", t_outdir, "output directory")->required();

    auto* tmark = tac->add_subcommand("markers", "track marker displacements over frames");
    double t_thresh = 0.5, t_mpitch = 30.0;
    tmark->add_option("--frames", t_frames, "grayscale frames in order (PGM or LTM1)")
        ->required();
    tmark->add_option("--threshold", t_thresh, "binarization threshold");
    tmark->add_option("--pitch-px", t_mpitch, "marker pitch [px]");
    tmark->add_option("-o,--output", t_out, "marker CSV output")->required();

    // Let options given after a subcommand (e.g. a trailing --seed) reach the
    // parent parser.
    auto enable_fallthrough = [](CLI::App* a, auto&& self) -> void {
        a->fallthrough();
        for (CLI::App* s : a->get_subcommands({})) self(s, self);
    };
    for (CLI::App* s : app.get_subcommands({})) enable_fallthrough(s, enable_fallthrough);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    json flags = json::array();
    for (int i = 1; i < argc; ++i) flags.push_back(argv[i]);

    if (mg->parsed()) {
        MaskVector phi = mg_mls->parsed() ? mls_vector(mls_order, mls_repeats)
                                          : random_vector(rnd_k, seed);
        Manifest man;
        save_mask_vector(mg_out, phi);
        man.add(mg_out);
        if (!mg_pgm.empty()) {
            save_pgm(mg_pgm, assemble_mask(phi).grid);
            man.add(mg_pgm);
        }
        man.write(fs::path(mg_out).replace_extension(".manifest.json"), "mask-gen", seed, flags);
        std::cout << "wrote " << mg_out << " (k=" << phi.length() << ")\n";
        return 0;
    }

    if (sim->parsed()) {
        require_file(sim_mask);
        for (const auto& s : sim_scenes) require_file(s);
        fs::create_directories(sim_outdir);
        MaskVector phi = load_mask_vector(sim_mask);
        SystemMatrices sm = generate_system_matrices(phi, sim_geo);
        if (!sim_sysmat_out.empty())
            save_system_matrices(sim_sysmat_out, sm, sim_geo, stripe_params(sim_geo, phi.length()));
        Manifest man;
        for (const auto& s : sim_scenes) {
            Mat x = load_gray(s);
            std::uint64_t frame_seed = splitmix64(seed ^ fnv1a64(s.c_str()));
            Mat y = forward(sm, x, sim_noise, frame_seed, sim_coding_only);
            fs::path out = fs::path(sim_outdir) / ("meas_" + fs::path(s).stem().string() + ".ltm");
            save_mat(out, y);
            man.add(out);
        }
        if (!sim_sysmat_out.empty())
            for (const char* f : {"po.ltm", "qo.ltm", "pc.ltm", "qc.ltm"})
                man.add(fs::path(sim_sysmat_out) / f);
        man.write(fs::path(sim_outdir) / "manifest.json", "simulate", seed, flags);
        std::cout << "simulated " << sim_scenes.size() << " scene(s) into " << sim_outdir << "\n";
        return 0;
    }

    if (cal->parsed()) {
        fs::create_directories(cal_outdir);
        CalibSet cs;
        if (cal_synthetic) {
            if (cal_mask.empty()) throw InvalidInput("calibrate --synthetic requires --mask");
            require_file(cal_mask);
            SystemMatrices truth = generate_system_matrices(load_mask_vector(cal_mask), cal_geo);
            cs = synthesize_calib_set(truth, cal_noise, seed);
        } else {
            if (cal_h_files.empty() || cal_v_files.empty())
                throw InvalidInput("calibrate needs --synthetic or both --h-files and --v-files");
            for (const auto& f : cal_h_files) {
                require_file(f);
                cs.horizontal.push_back(load_gray(f));
            }
            for (const auto& f : cal_v_files) {
                require_file(f);
                cs.vertical.push_back(load_gray(f));
            }
        }
        CalibResult res = calibrate(cs, {cal_max_iters, cal_tol});
        Geometry out_geo = cal_geo;
        out_geo.meas_rows = res.sm.po.rows();
        out_geo.meas_cols = res.sm.qo.rows();
        out_geo.scene_rows = res.sm.po.cols();
        out_geo.scene_cols = res.sm.qo.cols();
        save_system_matrices(cal_outdir, res.sm, out_geo, {});
        Manifest man;
        for (const char* f : {"po.ltm", "qo.ltm", "pc.ltm", "qc.ltm"})
            man.add(fs::path(cal_outdir) / f);
        json report{{"converged", res.converged},
                    {"iterations", res.iterations},
                    {"last_change", res.last_change}};
        std::ofstream(fs::path(cal_outdir) / "report.json") << report.dump(2) << '\n';
        man.write(fs::path(cal_outdir) / "manifest.json", "calibrate", seed, flags);
        std::cout << "converged: " << (res.converged ? "true" : "false")
                  << " iterations: " << res.iterations << "\n";
        return 0;
    }

    if (rec->parsed()) {
        require_file(rec_sysmat);
        fs::create_directories(rec_outdir);
        Geometry g;
        SystemMatrices sm = load_system_matrices(rec_sysmat, &g);
        JointFilterParams fp;
        bool have_filter = !rec_filter.empty();
        if (have_filter) fp = load_filter_params(rec_filter);
        double tau = rec_tau > 0 ? rec_tau : default_tau(sm.pc, sm.qc);
        ReconOperator op = build_recon_operator(sm.pc, sm.qc, tau);

        std::vector<std::string> inputs = rec_inputs;
        if (!rec_indir.empty()) {
            std::vector<std::string> listed;
            for (const auto& e : fs::directory_iterator(rec_indir))
                if (e.is_regular_file()) listed.push_back(e.path().string());
            std::sort(listed.begin(), listed.end());
            inputs.insert(inputs.end(), listed.begin(), listed.end());
        }
        if (inputs.empty()) throw InvalidInput("reconstruct: no inputs (--input or --indir)");

        Manifest man;
        std::vector<double> latencies;
        for (const auto& in : inputs) {
            require_file(in);
            fs::path p(in);
            if (p.extension() == ".ppm") {
                ImageRGB y = load_ppm(p);
                double t0 = now_ms();
                ImageRGB x;
                for (int c = 0; c < 3; ++c) {
                    Mat yc = have_filter ? y.plane(c) - apply_joint_filter(fp, y.plane(c))
                                         : y.plane(c);
                    x.plane(c) = rec_method == "closed"
                                     ? solve_closed_form(op, yc)
                                     : solve_nesterov(sm, yc, {rec_iters, 0.0, tau});
                }
                latencies.push_back(now_ms() - t0);
                for (int c = 0; c < 3; ++c)
                    for (std::size_t i = 0; i < x.plane(c).size(); ++i)
                        x.plane(c).data()[i] = std::clamp(x.plane(c).data()[i], 0.0, 1.0);
                fs::path out = fs::path(rec_outdir) / ("recon_" + p.stem().string() + ".ppm");
                save_ppm(out, x);
                man.add(out);
            } else {
                Mat y = load_gray(p);
                double t0 = now_ms();
                Mat yc = have_filter ? y - apply_joint_filter(fp, y) : y;
                Mat x = rec_method == "closed" ? solve_closed_form(op, yc)
                                               : solve_nesterov(sm, yc, {rec_iters, 0.0, tau});
                latencies.push_back(now_ms() - t0);
                fs::path out = fs::path(rec_outdir) / ("recon_" + p.stem().string() + ".ltm");
                save_mat(out, x);
                man.add(out);
            }
        }
        double mean_ms = 0.0;
        for (double t : latencies) mean_ms += t;
        mean_ms /= latencies.size();
        man.write(fs::path(rec_outdir) / "manifest.json", "reconstruct", seed, flags);
        std::cout << "frames: " << latencies.size() << " method: " << rec_method
                  << " mean_ms: " << mean_ms << "\n";
        return 0;
    }

    if (opt->parsed()) {
        fs::create_directories(opt_outdir);
        ga.seed = seed;
        FitnessSpec spec = FitnessSpec::with_white(opt_geo.scene_rows, opt_geo.scene_cols);
        // Structured companion scenes for the SSIM/PSNR terms.
        Mat grad_scene(opt_geo.scene_rows, opt_geo.scene_cols);
        Mat checker(opt_geo.scene_rows, opt_geo.scene_cols);
        int block = std::max(1, opt_geo.scene_rows / 8);
        for (int i = 0; i < opt_geo.scene_rows; ++i)
            for (int j = 0; j < opt_geo.scene_cols; ++j) {
                grad_scene(i, j) = static_cast<double>(j) / std::max(1, opt_geo.scene_cols - 1);
                checker(i, j) = ((i / block + j / block) % 2) ? 1.0 : 0.0;
            }
        spec.scenes.push_back({"gradient", std::move(grad_scene), false});
        spec.scenes.push_back({"checker", std::move(checker), false});
        spec.noise_sigma = opt_noise;
        spec.tau = opt_tau;
        spec.noise_seed = seed;

        GaResult res = evolve(opt_k, ga, spec, opt_geo);
        Manifest man;
        fs::path best_path = fs::path(opt_outdir) / "best.ltm";
        save_mask_vector(best_path, res.best);
        man.add(best_path);
        fs::path pgm_path = fs::path(opt_outdir) / "best_mask.pgm";
        save_pgm(pgm_path, assemble_mask(res.best).grid);
        man.add(pgm_path);
        fs::path hist_path = fs::path(opt_outdir) / "history.csv";
        {
            std::ofstream hist(hist_path);
            hist << "generation,best,mean\n";
            for (const auto& h : res.history)
                hist << h.generation << ',' << h.best << ',' << h.mean << '\n';
        }
        man.add(hist_path);
        man.write(fs::path(opt_outdir) / "manifest.json", "optimize-mask", seed, flags);
        std::cout << "best fitness: " << res.best_fitness << " after " << ga.generations
                  << " generations\n";
        return 0;
    }

    if (bench->parsed()) {
        if (bench_frames < 1) throw InvalidInput("bench: --frames must be >= 1");
        int nes_frames = bench_nesterov_frames > 0 ? bench_nesterov_frames : bench_frames;
        MaskVector phi = mls_vector(10, 1);
        SystemMatrices sm = generate_system_matrices(phi, bench_geo);
        double tau = default_tau(sm.pc, sm.qc);

        auto rng = rng_stream(seed, "bench.scene");
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        Mat x(bench_geo.scene_rows, bench_geo.scene_cols);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = uni(rng);
        Mat y = forward(sm, x);
        JointFilterParams fp = init_filter_params(bench_geo.meas_rows, bench_geo.meas_cols);

        ReconOperator op = build_recon_operator(sm.pc, sm.qc, tau);
        auto percentile95 = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            return v[static_cast<std::size_t>(std::ceil(0.95 * v.size())) - 1];
        };

        std::vector<double> closed_times;
        reconstruct_frame(op, fp, y);  // warm-up: plans + packing buffers
        for (int f = 0; f < bench_frames; ++f) {
            double t0 = now_ms();
            for (int c = 0; c < 3; ++c) reconstruct_frame(op, fp, y);
            closed_times.push_back(now_ms() - t0);
        }
        std::vector<double> nesterov_times;
        NesterovConfig nc{bench_iters, 0.0, tau};
        for (int f = 0; f < nes_frames; ++f) {
            double t0 = now_ms();
            for (int c = 0; c < 3; ++c) solve_nesterov(sm, y, nc);
            nesterov_times.push_back(now_ms() - t0);
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (double t : v) s += t;
            return s / v.size();
        };
        double closed_mean = mean(closed_times), nesterov_mean = mean(nesterov_times);
        json report{{"frames", bench_frames},
                    {"nesterov_frames", nes_frames},
                    {"closed", {{"method", "closed"}, {"mean_ms", closed_mean},
                                {"p95_ms", percentile95(closed_times)}}},
                    {"nesterov", {{"method", "nesterov"}, {"iterations", bench_iters},
                                  {"mean_ms", nesterov_mean},
                                  {"p95_ms", percentile95(nesterov_times)}}},
                    {"ratio", nesterov_mean / closed_mean}};
        std::cout << report.dump(2) << '\n';
        if (!bench_out.empty()) std::ofstream(bench_out) << report.dump(2) << '\n';
        return 0;
    }

    if (tac->parsed()) {
        LightingConfig lighting;
        lighting.sigma_px = t_sigma;
        if (tsim->parsed()) {
            DepthMap d = sphere_depth(t_rows, t_cols, t_pitch, t_radius, t_press);
            save_ppm(t_out, simulate_tactile_image(d, lighting));
            std::cout << "wrote " << t_out << "\n";
            return 0;
        }
        if (tcal->parsed()) {
            fs::create_directories(t_outdir);
            std::vector<ImageRGB> images;
            for (double press : t_depths)
                images.push_back(simulate_tactile_image(
                    sphere_depth(t_rows, t_cols, t_pitch, t_radius, press), lighting));
            GradientLUT lut = calibrate_lut(images, t_radius, t_depths, t_pitch, {t_bins, 0.5});
            Mat gx(1, static_cast<int>(lut.gx.size())), gy(1, static_cast<int>(lut.gy.size()));
            std::copy(lut.gx.begin(), lut.gx.end(), gx.data());
            std::copy(lut.gy.begin(), lut.gy.end(), gy.data());
            save_mat(fs::path(t_outdir) / "lut_gx.ltm", gx);
            save_mat(fs::path(t_outdir) / "lut_gy.ltm", gy);
            json meta{{"bins", lut.bins},
                      {"background_color", lut.background_color},
                      {"coverage", lut.coverage},
                      {"low_coverage", lut.low_coverage}};
            std::ofstream(fs::path(t_outdir) / "lut.json") << meta.dump(2) << '\n';
            if (lut.low_coverage)
                std::cout << "warning: low LUT coverage (" << lut.coverage << ")\n";
            std::cout << "LUT written to " << t_outdir << " coverage: " << lut.coverage << "\n";
            return 0;
        }
        if (tdep->parsed()) {
            require_file(t_input);
            require_file(t_ref);
            require_file(fs::path(t_lut) / "lut.json");
            fs::create_directories(t_outdir);
            GradientLUT lut;
            {
                std::ifstream in(fs::path(t_lut) / "lut.json");
                json meta = json::parse(in);
                lut.bins = meta["bins"];
                lut.background_color = meta["background_color"];
                lut.coverage = meta.value("coverage", 1.0);
                Mat gx = load_vector_file(fs::path(t_lut) / "lut_gx.ltm");
                Mat gy = load_vector_file(fs::path(t_lut) / "lut_gy.ltm");
                lut.gx.assign(gx.data(), gx.data() + gx.size());
                lut.gy.assign(gy.data(), gy.data() + gy.size());
                lut.filled.assign(lut.gx.size(), 1);
            }
            DepthMap d = depth_from_image(load_ppm(t_input), lut, load_ppm(t_ref), t_pitch);
            save_depth_map(d, (fs::path(t_outdir) / "depth.ltm").string(),
                           (fs::path(t_outdir) / "depth.pgm").string());
            double peak = d.grid.max_abs();
            std::cout << "peak depth [mm]: " << peak
                      << " contact: " << (peak > kContactThresholdMm ? "yes" : "no") << "\n";
            return 0;
        }
        if (tmark->parsed()) {
            TrackerConfig tc;
            tc.threshold = t_thresh;
            tc.marker_pitch_px = t_mpitch;
            MarkerTracker tracker(tc);
            for (const auto& f : t_frames) {
                require_file(f);
                tracker.update(load_gray(f));
            }
            write_marker_csv(tracker.field(), t_out);
            std::cout << "tracked " << tracker.field().markers.size() << " markers over "
                      << t_frames.size() << " frames -> " << t_out << "\n";
            return 0;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
