// Command-line harness: batch experiments, cluster analysis and the covering
// engine.
//
// Exit codes: 0 success, 2 validation or usage error, 3 non-convergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "csing/covering.hpp"
#include "csing/experiment.hpp"
#include "csing/io.hpp"
#include "csing/stratify.hpp"

namespace {

using csing::io::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        csing::io::write_text_file(out_path, j.dump(2) + "\n");
    }
}

int cmd_optimize(const std::string& path, const std::string& out_dir) {
    auto exp = csing::parse_experiment(csing::io::read_json_file(path));
    auto rows = csing::run_experiment(exp, out_dir);
    std::cout << csing::summary_header();
    bool failed = false, unconverged = false;
    for (const auto& r : rows) {
        std::cout << csing::summary_row(r);
        failed = failed || !r.ok;
        unconverged = unconverged || (r.ok && !r.converged);
    }
    for (const auto& r : rows)
        if (!r.ok) std::cerr << "seed " << r.seed << ": " << r.error_kind << ": " << r.error_message << "\n";
    if (failed) return kExitValidation;
    return unconverged ? kExitNotConverged : kExitOk;
}

csing::ClassifyOptions classify_options(double lambda, double delta, double R, double radius) {
    csing::ClassifyOptions o;
    o.scale_ratio = lambda;
    o.drop_threshold = delta;
    o.base_radius = R;
    o.analysis_radius = radius;
    return o;
}

int cmd_analyze(const std::string& path, const csing::ClassifyOptions& opt, std::size_t regular, const std::string& out) {
    auto cluster = csing::io::read_cluster(path);
    auto graph = csing::extract_graph(cluster);
    auto report = csing::classify(cluster, graph, opt);
    json j = csing::io::to_json(report);
    j["perimeter"] = csing::perimeter(cluster);
    j["areas"] = csing::chamber_areas(cluster);
    const double radius = opt.analysis_radius > 0.0 ? opt.analysis_radius : csing::detail::auto_analysis_radius(cluster, graph);
    json samples = json::array();
    for (auto x : csing::regular_sample_points(cluster, regular)) {
        auto sp = csing::analyze_point(cluster, x, 2, radius, report.base_radius, opt);
        samples.push_back(csing::io::to_json(sp));
    }
    j["regular_samples"] = std::move(samples);
    emit(j, out);
    return kExitOk;
}

int cmd_classify(const std::string& path, const csing::ClassifyOptions& opt, const std::string& out) {
    auto cluster = csing::io::read_cluster(path);
    auto graph = csing::extract_graph(cluster);
    auto report = csing::classify(cluster, graph, opt);
    json points = json::array();
    for (const auto& p : report.points)
        points.push_back({{"x", p.location.x}, {"y", p.location.y}, {"density", p.density}, {"kind", csing::to_string(p.kind)}});
    json edges = json::array();
    for (const auto& e : graph.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"chambers", {e.chambers.first, e.chambers.second}}});
    emit({{"vertices", graph.vertices.size()},
          {"edges", std::move(edges)},
          {"loops", graph.loops.size()},
          {"points", std::move(points)},
          {"count", report.count},
          {"certificate_bound", csing::io::to_json(report.certificate_bound)},
          {"canonical_class", report.canonical_class}},
         out);
    return kExitOk;
}

int cmd_verify(const std::string& path, double lambda, int budget) {
    std::ifstream in(path);
    if (!in) throw csing::ParameterError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto set = csing::io::parse_points_csv(buf.str());
    emit(csing::io::to_json(csing::covering::verify_covering_lemma(set, lambda, budget)), "");
    return kExitOk;
}

int cmd_sharpness(int n, const std::string& out) {
    namespace cv = csing::covering;
    auto set = cv::sharpness_points(n);
    auto check = cv::check_sharpness(set, n);
    auto verdict = cv::verify_covering_lemma(set, 0.25, n);
    if (!out.empty()) {
        std::string csv = "x,numerator,exponent\n";
        for (std::size_t i = 0; i < set.size(); ++i)
            csv += csing::io::number(set.to_double(i)) + "," + set.numerators[i].str() + "," + std::to_string(set.exponent) + "\n";
        csing::io::write_text_file(out, csv);
    }
    json j = csing::io::to_json(verdict);
    j["points"] = check.points;
    j["distinct"] = check.distinct;
    j["distances_ok"] = check.distances_ok;
    j["pairs_checked"] = check.pairs_checked;
    j["scale_ratio"] = 0.25;
    j["budget"] = n;
    emit(j, "");
    return check.distinct && check.distances_ok && verdict.kind == cv::VerdictKind::WithinBudget ? kExitOk : 1;
}

int cmd_vitali(std::size_t dim, double mu, std::size_t samples, std::uint64_t seed, const std::string& out) {
    namespace cv = csing::covering;
    auto cover = cv::vitali_cover(dim, mu);
    auto check = cv::check_vitali_cover(cover, samples, seed);
    if (!out.empty()) csing::io::write_text_file(out, csing::io::points_csv(dim, cover.centers));
    emit({{"dimension", dim},
          {"mu", mu},
          {"centers", cover.size()},
          {"count_bound", cv::vitali_count_bound(dim, mu)},
          {"count_ok", check.count_ok},
          {"disjoint", check.disjoint},
          {"centers_inside", check.centers_inside},
          {"samples", check.samples},
          {"uncovered", check.uncovered}},
         "");
    return check.count_ok && check.disjoint && check.centers_inside && check.uncovered == 0 ? kExitOk : 1;
}

/// Random point set in B_{1/2}: uniform, or a multi-scale cluster tree
/// whose points spread over many annuli.
csing::covering::PointSet random_set(std::mt19937_64& rng, std::size_t dim, std::size_t size) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> coords;
    const bool multiscale = rng() % 2 == 0;
    const double shrink = multiscale ? 0.05 + 0.2 * std::uniform_real_distribution<double>(0, 1)(rng) : 1.0;
    for (std::size_t i = 0; i < size; ++i) {
        std::vector<double> p(dim, 0.0);
        double scale = 0.25;
        int levels = multiscale ? 6 : 1;
        for (int l = 0; l < levels; ++l) {
            for (auto& c : p) c += scale * u(rng) / std::sqrt(static_cast<double>(dim));
            scale *= shrink;
        }
        coords.insert(coords.end(), p.begin(), p.end());
    }
    return csing::covering::PointSet(dim, std::move(coords));
}

int cmd_selftest(std::uint64_t seed) {
    namespace cv = csing::covering;
    bool all = true;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        all = all && ok;
    };

    std::mt19937_64 rng(seed);
    std::size_t sets = 0, violations = 0, witnesses = 0;
    for (std::size_t dim = 1; dim <= 3; ++dim)
        for (double lambda : {1.0 / 6.0, 1.0 / 8.0})
            for (int k = 0; k < 170; ++k) {
                auto set = random_set(rng, dim, 1 + rng() % 200);
                std::size_t max_occ = 0;
                for (std::size_t i = 0; i < set.size(); ++i)
                    max_occ = std::max(max_occ, cv::occupied_annuli(set, i, lambda).occupied.size());
                for (int budget : {static_cast<int>(max_occ), static_cast<int>(max_occ) - 1}) {
                    if (budget < 0) continue;
                    auto v = cv::verify_covering_lemma(set, lambda, budget);
                    if (v.kind == cv::VerdictKind::WithinBudget && !v.bound_holds) ++violations;
                    if (v.kind == cv::VerdictKind::Witness) ++witnesses;
                }
                ++sets;
            }
    report("covering soundness", violations == 0,
           std::to_string(sets) + " sets, " + std::to_string(violations) + " violations, " + std::to_string(witnesses) + " witnesses");

    bool sharp = true;
    for (int n = 1; n <= 12; ++n) {
        auto set = cv::sharpness_points(n);
        auto c = cv::check_sharpness(set, n);
        sharp = sharp && c.points == (std::size_t{1} << n) && c.distinct && c.distances_ok && c.max_occupancy <= static_cast<std::size_t>(n);
    }
    report("sharpness", sharp, "N = 1..12 at scale ratio 1/4");

    bool vit = true;
    for (std::size_t dim = 1; dim <= 3; ++dim)
        for (double mu : {0.5, 0.2, 0.1}) {
            auto cover = cv::vitali_cover(dim, mu);
            auto c = cv::check_vitali_cover(cover, 20000, seed + dim);
            vit = vit && c.count_ok && c.disjoint && c.centers_inside && c.uncovered == 0;
        }
    report("vitali", vit, "n <= 3, mu in {1/2, 1/5, 1/10}");

    std::vector<double> line;
    for (int i = 0; i < 400; ++i) line.push_back(-0.5 + i / 400.0);
    auto replay = cv::replay_covering_proof(cv::PointSet(1, line), 1.0 / 6.0, 1);
    bool replay_ok = replay.witness_occupancy > 1;
    for (const auto& s : replay.steps) replay_ok = replay_ok && s.diameter_annulus_occupied;
    report("proof replay", replay_ok, "witness occupies " + std::to_string(replay.witness_occupancy) + " annuli at budget 1");
    return all ? kExitOk : 1;
}

int cmd_constants() {
    using csing::ConeType;
    std::printf("half_space %.10f\n", csing::reference_density(ConeType::HalfSpace));
    std::printf("y_2d %.10f\n", csing::reference_density(ConeType::Y2D));
    std::printf("y_cone_3d %.10f\n", csing::reference_density(ConeType::YCone3D));
    std::printf("t_cone_3d %.10f\n", csing::reference_density(ConeType::TCone3D));
    std::printf("t_cone_3d_integrated %.10f\n", csing::tcone_density_numeric());
    std::printf("t_cone_3d_quoted_formula %.10f\n", csing::quoted_tcone_density());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular points of planar bubble clusters: optimization, analysis and covering bounds"};
    app.require_subcommand(1);

    std::string exp_path, out_dir = "out";
    auto* optimize = app.add_subcommand("optimize", "Run an experiment file: optimize, analyze and certify every seed");
    optimize->add_option("experiment", exp_path, "Experiment JSON file")->required();
    optimize->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();

    std::string cluster_path, out_file;
    double lambda = 0.125, delta = 1e-3, base_R = 0.0, radius = 0.0;
    std::size_t regular = 4;
    auto add_analysis_flags = [&](CLI::App* sub) {
        sub->add_option("cluster", cluster_path, "Cluster JSON file")->required();
        sub->add_option("--lambda", lambda, "Scale ratio for budgets, in (0, 1/8]")->capture_default_str();
        sub->add_option("--delta", delta, "Drop threshold")->capture_default_str();
        sub->add_option("--R", base_R, "Certificate radius (0 = enclose the cluster)")->capture_default_str();
        sub->add_option("--radius", radius, "Largest density-profile radius (0 = automatic)")->capture_default_str();
        sub->add_option("-o,--out", out_file, "Write JSON here instead of stdout");
    };
    auto* analyze = app.add_subcommand("analyze", "Densities, budgets and certificate for a cluster");
    add_analysis_flags(analyze);
    analyze->add_option("--regular-samples", regular, "Regular boundary points to probe")->capture_default_str();
    auto* classify = app.add_subcommand("classify", "Boundary graph, triple-junction count and canonical class");
    add_analysis_flags(classify);

    auto* covering = app.add_subcommand("covering", "Covering-lemma engine");
    covering->require_subcommand(1);
    std::string points_path;
    double cov_lambda = 0.125;
    int budget = 1;
    auto* verify = covering->add_subcommand("verify", "Decide the covering lemma on a point set");
    verify->add_option("points", points_path, "CSV file, one point per row")->required();
    verify->add_option("--lambda", cov_lambda, "Scale ratio in (0, 1/4]")->required();
    verify->add_option("--budget", budget, "Annulus budget N")->required();

    int sharp_n = 3;
    std::string sharp_out;
    auto* sharpness = covering->add_subcommand("sharpness", "Build and verify the dyadic sharpness set");
    sharpness->add_option("--n", sharp_n, "Budget N in [1, 20]")->required();
    sharpness->add_option("-o,--out", sharp_out, "Write the points as CSV");

    std::size_t dim = 2, samples = 1000000;
    double mu = 0.2;
    std::uint64_t seed = 1;
    std::string vitali_out;
    auto* vitali = covering->add_subcommand("vitali", "Build and check a Vitali cover of the unit ball");
    vitali->add_option("--dim", dim, "Dimension")->required();
    vitali->add_option("--mu", mu, "Cover radius in (0, 1]")->required();
    vitali->add_option("--samples", samples, "Sample points for the covering check")->capture_default_str();
    vitali->add_option("--seed", seed, "Sampling seed")->capture_default_str();
    vitali->add_option("-o,--out", vitali_out, "Write the centers as CSV");

    std::uint64_t selftest_seed = 20240607;
    auto* selftest = covering->add_subcommand("selftest", "Run the covering property suite");
    selftest->add_option("--seed", selftest_seed, "Seed for the randomized sets")->capture_default_str();

    app.add_subcommand("constants", "Print the reference cone densities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*optimize) return cmd_optimize(exp_path, out_dir);
        if (*analyze) return cmd_analyze(cluster_path, classify_options(lambda, delta, base_R, radius), regular, out_file);
        if (*classify) return cmd_classify(cluster_path, classify_options(lambda, delta, base_R, radius), out_file);
        if (*verify) return cmd_verify(points_path, cov_lambda, budget);
        if (*sharpness) return cmd_sharpness(sharp_n, sharp_out);
        if (*vitali) return cmd_vitali(dim, mu, samples, seed, vitali_out);
        if (*selftest) return cmd_selftest(selftest_seed);
        return cmd_constants();
    } catch (const csing::Error& e) {
        std::cout << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cout << json{{"error", "io"}, {"message", e.what()}}.dump() << "\n";
        return kExitValidation;
    }
}
