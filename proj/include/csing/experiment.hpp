#pragma once

// Batch experiments: optimize -> analyze -> certify for a list of seeds,
// writing per-seed artifacts and a summary table.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "csing/io.hpp"
#include "csing/optimizer.hpp"
#include "csing/shapes.hpp"
#include "csing/stratify.hpp"

namespace csing {

struct AnalysisConfig {
    double lambda = 0.125;
    double delta = 1e-3;
    /// 0 = smallest ball around the cluster centre containing the boundary.
    double R = 0.0;
    int radii_per_decade = 20;
};

struct Experiment {
    std::string name;
    /// Fixed targets; empty when volumes are sampled per seed.
    std::vector<double> volumes;
    /// Per-seed uniform sampling of `chambers` targets from [low, high].
    std::optional<std::pair<double, double>> volume_range;
    std::size_t chambers = 0;
    double resolution = 0.05;
    OptimizerConfig optimizer;
    AnalysisConfig analysis;
    /// Standard deviation of the vertex noise applied before a second solve; 0 disables it.
    double perturbation = 0.0;
    /// Almost-minimality metadata stored on the result; nullopt lambda means
    /// the curvature bound read off the multipliers.
    std::optional<double> cluster_lambda;
    double cluster_r0 = std::numeric_limits<double>::infinity();
    std::vector<std::uint64_t> seeds;
};

namespace detail {

template <class T>
T get_or(const io::json& j, const char* key, T fallback) {
    return j.contains(key) && !j[key].is_null() ? j[key].get<T>() : fallback;
}

} // namespace detail

inline Experiment parse_experiment(const io::json& j) {
    Experiment e;
    try {
        e.name = j.at("name").get<std::string>();
        if (e.name.empty() || e.name.find('/') != std::string::npos) throw ParameterError("experiment name must be a plain non-empty string");
        if (j.contains("volumes")) e.volumes = j["volumes"].get<std::vector<double>>();
        if (j.contains("volume_range")) {
            auto r = j["volume_range"].get<std::vector<double>>();
            if (r.size() != 2 || !(r[0] > 0.0) || !(r[1] >= r[0])) throw ParameterError("volume_range must be [low, high] with 0 < low <= high");
            e.volume_range = std::make_pair(r[0], r[1]);
            e.chambers = j.at("chambers").get<std::size_t>();
        }
        if (e.volumes.empty() == !e.volume_range) throw ParameterError("give exactly one of volumes or volume_range");
        if (e.volume_range && e.chambers == 0) throw ParameterError("chambers must be positive");
        e.resolution = detail::get_or(j, "resolution", e.resolution);
        if (!(e.resolution > 0.0)) throw ParameterError("resolution must be positive");
        e.perturbation = detail::get_or(j, "perturbation", e.perturbation);
        if (!(e.perturbation >= 0.0)) throw ParameterError("perturbation must be non-negative");

        auto& o = e.optimizer;
        if (j.contains("volume_box")) {
            auto box = j["volume_box"].get<std::vector<double>>();
            if (box.size() != 2 || !(box[0] > 0.0) || !(box[1] >= box[0])) throw ParameterError("volume_box must be [m0, M0] with 0 < m0 <= M0");
            o.volume_min = box[0];
            o.volume_max = box[1];
        }
        if (j.contains("optimizer")) {
            const auto& oj = j["optimizer"];
            o.step_size = detail::get_or(oj, "step_size", o.step_size);
            o.penalty_weight = detail::get_or(oj, "penalty_weight", o.penalty_weight);
            o.max_iterations = detail::get_or(oj, "max_iterations", o.max_iterations);
            o.gradient_tolerance = detail::get_or(oj, "gradient_tolerance", o.gradient_tolerance);
            o.volume_tolerance = detail::get_or(oj, "volume_tolerance", o.volume_tolerance);
            o.junction_projection = detail::get_or(oj, "junction_projection", o.junction_projection);
        }
        if (j.contains("analysis")) {
            const auto& aj = j["analysis"];
            auto& a = e.analysis;
            a.lambda = detail::get_or(aj, "lambda", a.lambda);
            a.delta = detail::get_or(aj, "delta", a.delta);
            a.R = detail::get_or(aj, "R", a.R);
            a.radii_per_decade = detail::get_or(aj, "radii_per_decade", a.radii_per_decade);
        }
        if (!(e.analysis.lambda > 0.0 && e.analysis.lambda <= 0.125)) throw ParameterError("analysis.lambda must lie in (0, 1/8]");
        if (!(e.analysis.delta > 0.0)) throw ParameterError("analysis.delta must be positive");
        if (!(e.analysis.R >= 0.0)) throw ParameterError("analysis.R must be non-negative");
        if (e.analysis.radii_per_decade < 3) throw ParameterError("analysis.radii_per_decade must be at least 3");
        if (j.contains("metadata")) {
            const auto& mj = j["metadata"];
            if (mj.contains("lambda") && !mj["lambda"].is_null()) e.cluster_lambda = mj["lambda"].get<double>();
            e.cluster_r0 = detail::get_or(mj, "r0", e.cluster_r0);
        }
        e.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (e.seeds.empty()) throw ParameterError("experiment needs at least one seed");
    } catch (const io::json::exception& ex) {
        throw ParameterError(std::string("malformed experiment: ") + ex.what());
    }
    for (double v : e.volumes)
        if (v < e.optimizer.volume_min || v > e.optimizer.volume_max) throw ParameterError("volume outside volume_box");
    if (e.volume_range && (e.volume_range->first < e.optimizer.volume_min || e.volume_range->second > e.optimizer.volume_max))
        throw ParameterError("volume_range outside volume_box");
    return e;
}

/// Targets for one seed: the fixed volumes, or a deterministic sample.
inline std::vector<double> volumes_for_seed(const Experiment& e, std::uint64_t seed) {
    if (!e.volume_range) return e.volumes;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(e.volume_range->first, e.volume_range->second);
    std::vector<double> v(e.chambers);
    for (auto& x : v) x = u(rng);
    return v;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    bool converged = false;
    int count = 0;
    std::string certificate_bound;
    std::string canonical_class;
    double perimeter = 0.0;
    std::string error_kind;
    std::string error_message;
};

struct SeedArtifacts {
    OptimizerResult result;
    SingularityReport report;
    std::vector<MonotonicityProfile> profiles;
};

/// Optimize and analyze one seed, without touching the filesystem.
inline SeedArtifacts run_seed(const Experiment& e, std::uint64_t seed) {
    auto volumes = volumes_for_seed(e, seed);
    OptimizerConfig cfg = e.optimizer;
    cfg.target_volumes = volumes;
    auto result = minimize(shapes::initial_guess(volumes, e.resolution), cfg);
    if (e.perturbation > 0.0 && result.converged) result = perturb_and_resolve(result, e.perturbation, seed);
    double lambda = e.cluster_lambda ? *e.cluster_lambda : curvature_bound(result);
    result.cluster = Cluster(result.cluster.chambers(), result.cluster.interfaces(), lambda, e.cluster_r0);

    ClassifyOptions opt;
    opt.scale_ratio = e.analysis.lambda;
    opt.drop_threshold = e.analysis.delta;
    opt.base_radius = e.analysis.R;
    opt.radii_per_decade = e.analysis.radii_per_decade;
    auto graph = extract_graph(result.cluster);
    auto report = classify(result.cluster, graph, opt);

    SeedArtifacts out{std::move(result), std::move(report), {}};
    const double top = out.report.base_radius;
    std::vector<Vec2> bases;
    for (const auto& p : out.report.points) bases.push_back(p.location);
    for (auto x : regular_sample_points(out.result.cluster, 4)) bases.push_back(x);
    auto radii = log_radii(top * 1e-3, std::min(top, out.result.cluster.r0()), e.analysis.radii_per_decade);
    for (auto x : bases) out.profiles.push_back(profile(out.result.cluster, x, radii));
    return out;
}

inline std::string summary_header() { return "seed,converged,count,certificate_bound,canonical_class,perimeter\n"; }

inline std::string summary_row(const SeedOutcome& s) {
    if (!s.ok) return std::to_string(s.seed) + ",error,,,," + s.error_kind + "\n";
    return std::to_string(s.seed) + "," + (s.converged ? "true" : "false") + "," + std::to_string(s.count) + "," +
           s.certificate_bound + "," + s.canonical_class + "," + io::number(s.perimeter) + "\n";
}

/// Worker count: CLUSTER_SING_THREADS if set to a positive integer, else the hardware concurrency.
inline std::size_t worker_count(std::size_t jobs) {
    std::size_t n = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CLUSTER_SING_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) n = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs every seed on a worker pool and writes
/// <out>/<name>/<seed>/{cluster.json, convergence.csv, profiles/, report.json}
/// (error.json on failure) plus <out>/<name>/summary.csv. Rows are in seed order.
inline std::vector<SeedOutcome> run_experiment(const Experiment& e, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    const fs::path root = out_dir / e.name;
    fs::create_directories(root);
    std::vector<SeedOutcome> outcomes(e.seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < e.seeds.size(); k = next++) {
            const auto seed = e.seeds[k];
            SeedOutcome& s = outcomes[k];
            s.seed = seed;
            const fs::path dir = root / std::to_string(seed);
            try {
                fs::create_directories(dir / "profiles");
                auto art = run_seed(e, seed);
                io::write_text_file((dir / "cluster.json").string(), io::to_json(art.result.cluster).dump() + "\n");
                io::write_text_file((dir / "convergence.csv").string(), io::convergence_csv(art.result.log));
                for (std::size_t p = 0; p < art.profiles.size(); ++p) {
                    std::string stem = p < art.report.points.size() ? "vertex_" + std::to_string(p)
                                                                    : "regular_" + std::to_string(p - art.report.points.size());
                    io::write_text_file((dir / "profiles" / (stem + ".csv")).string(), io::profile_csv(art.profiles[p]));
                }
                auto rep = io::to_json(art.report);
                rep["converged"] = art.result.converged;
                rep["iterations"] = art.result.iterations;
                rep["perimeter"] = art.result.final_perimeter;
                rep["volume_errors"] = art.result.volume_errors;
                rep["cluster_lambda"] = art.result.cluster.lambda();
                io::write_text_file((dir / "report.json").string(), rep.dump(1) + "\n");
                s.ok = true;
                s.converged = art.result.converged;
                s.count = art.report.count;
                s.certificate_bound = art.report.certificate_bound.to_string();
                s.canonical_class = art.report.canonical_class;
                s.perimeter = art.result.final_perimeter;
            } catch (const Error& err) {
                s.error_kind = err.kind();
                s.error_message = err.what();
            } catch (const std::exception& err) {
                s.error_kind = "io";
                s.error_message = err.what();
            }
            if (!s.ok) {
                try {
                    fs::create_directories(dir);
                    io::json ej = {{"error", s.error_kind}, {"message", s.error_message}, {"seed", seed}};
                    io::write_text_file((dir / "error.json").string(), ej.dump(1) + "\n");
                } catch (const std::exception&) {
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = worker_count(e.seeds.size());
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::string summary = summary_header();
    for (const auto& s : outcomes) summary += summary_row(s);
    io::write_text_file((root / "summary.csv").string(), summary);
    return outcomes;
}

} // namespace csing
