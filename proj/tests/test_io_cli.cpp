#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csing/experiment.hpp"
#include "csing/io.hpp"
#include "csing/shapes.hpp"
#include "support.hpp"

using namespace csing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("csing_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& out) {
    std::string cmd = std::string(CSING_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string data(const std::string& name) { return std::string(CSING_DATA_DIR) + "/" + name; }

io::json small_experiment() {
    return io::json::parse(R"({
        "name": "small", "volumes": [1.0, 1.5], "volume_box": [0.5, 5.0], "resolution": 0.1,
        "seeds": [3, 1]
    })");
}

} // namespace

TEST(Json, ClusterRoundTripIsExact) {
    const auto& c = testsupport::double_bubble().cluster;
    auto back = io::cluster_from_json(io::json::parse(io::to_json(c).dump()));
    ASSERT_EQ(back.interfaces().size(), c.interfaces().size());
    for (std::size_t i = 0; i < c.interfaces().size(); ++i) {
        EXPECT_EQ(back.interfaces()[i].chain.vertices, c.interfaces()[i].chain.vertices);
        EXPECT_EQ(back.interfaces()[i].left, c.interfaces()[i].left);
        EXPECT_EQ(back.interfaces()[i].right, c.interfaces()[i].right);
    }
    EXPECT_EQ(perimeter(back), perimeter(c));
}

TEST(Json, InfiniteR0IsNull) {
    auto j = io::to_json(shapes::polygon_disk({0, 0}, 1.0, 16));
    EXPECT_TRUE(j["metadata"]["r0"].is_null());
    auto back = io::cluster_from_json(j);
    EXPECT_TRUE(std::isinf(back.r0()));
    auto limited = Cluster(back.chambers(), back.interfaces(), 0.5, 3.0);
    auto again = io::cluster_from_json(io::to_json(limited));
    EXPECT_EQ(again.lambda(), 0.5);
    EXPECT_EQ(again.r0(), 3.0);
}

TEST(Json, MalformedClusterIsStructuralError) {
    EXPECT_THROW(io::cluster_from_json(io::json::parse(R"({"chambers": []})")), StructuralError);
    EXPECT_THROW(io::cluster_from_json(io::json::parse(R"({"chambers": [{"label": 1}], "interfaces": [{"vertices": [[0,0]]}]})")),
                 StructuralError);
    EXPECT_THROW(io::read_json_file("/nonexistent/file.json"), Error);
}

TEST(Csv, PointsParseWithHeaderAndRejectGarbage) {
    auto s = io::parse_points_csv("x,y\n0.1,0.2\n-0.1,0.0\n");
    EXPECT_EQ(s.dimension(), 2u);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_THROW(io::parse_points_csv("0.1,0.2\n0.3\n"), Error);
    EXPECT_THROW(io::parse_points_csv("0.1,abc\n"), Error);
}

TEST(Experiment, ParsesDataFiles) {
    auto e = parse_experiment(io::read_json_file(data("double_bubble.json")));
    EXPECT_EQ(e.name, "double_bubble");
    EXPECT_EQ(e.volumes.size(), 2u);
    EXPECT_FALSE(e.cluster_lambda.has_value());
    EXPECT_TRUE(std::isinf(e.cluster_r0));
    auto s = parse_experiment(io::read_json_file(data("sampled_pairs.json")));
    EXPECT_EQ(s.seeds.size(), 20u);
    auto v = volumes_for_seed(s, 7);
    EXPECT_EQ(v, volumes_for_seed(s, 7));
    for (double x : v) {
        EXPECT_GE(x, 1.0);
        EXPECT_LE(x, 2.0);
    }
}

TEST(Experiment, RejectsInvalidFiles) {
    auto j = small_experiment();
    j["volumes"] = {1.0, 50.0};
    EXPECT_THROW(parse_experiment(j), ParameterError);
    j = small_experiment();
    j["analysis"] = {{"lambda", 0.2}};
    EXPECT_THROW(parse_experiment(j), ParameterError);
    j = small_experiment();
    j.erase("seeds");
    EXPECT_THROW(parse_experiment(j), ParameterError);
    j = small_experiment();
    j["volume_range"] = {1.0, 2.0};
    j["chambers"] = 2;
    EXPECT_THROW(parse_experiment(j), ParameterError);
}

TEST(Experiment, OutputLayoutAndDeterministicSummary) {
    auto e = parse_experiment(small_experiment());
    auto d1 = scratch_dir("layout1"), d2 = scratch_dir("layout2");
    auto rows = run_experiment(e, d1);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].seed, 3u);
    for (auto seed : {"1", "3"}) {
        auto dir = d1 / "small" / seed;
        EXPECT_TRUE(fs::exists(dir / "cluster.json"));
        EXPECT_TRUE(fs::exists(dir / "convergence.csv"));
        EXPECT_TRUE(fs::exists(dir / "report.json"));
        EXPECT_TRUE(fs::exists(dir / "profiles" / "vertex_0.csv"));
        EXPECT_TRUE(fs::exists(dir / "profiles" / "regular_0.csv"));
        auto rep = io::json::parse(slurp(dir / "report.json"));
        EXPECT_EQ(rep["count"], 2);
        // The saved cluster reloads and classifies the same way.
        auto c = io::read_cluster((dir / "cluster.json").string());
        EXPECT_EQ(canonical_class(extract_graph(c)), rep["canonical_class"].get<std::string>());
    }
    auto summary = slurp(d1 / "small" / "summary.csv");
    EXPECT_EQ(summary.rfind(summary_header(), 0), 0u);
    setenv("CLUSTER_SING_THREADS", "2", 1);
    run_experiment(e, d2);
    unsetenv("CLUSTER_SING_THREADS");
    EXPECT_EQ(slurp(d2 / "small" / "summary.csv"), summary);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Experiment, FailedSeedWritesErrorJson) {
    auto j = small_experiment();
    j["perturbation"] = 5.0;
    j["seeds"] = {1};
    auto d = scratch_dir("fail");
    auto rows = run_experiment(parse_experiment(j), d);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_FALSE(rows[0].ok);
    auto err = io::json::parse(slurp(d / "small" / "1" / "error.json"));
    EXPECT_TRUE(err.contains("error"));
    fs::remove_all(d);
}

TEST(WorkerCount, HonorsEnvironment) {
    setenv("CLUSTER_SING_THREADS", "3", 1);
    EXPECT_EQ(worker_count(10), 3u);
    EXPECT_EQ(worker_count(2), 2u);
    setenv("CLUSTER_SING_THREADS", "junk", 1);
    EXPECT_GE(worker_count(10), 1u);
    unsetenv("CLUSTER_SING_THREADS");
}

TEST(Cli, ClassifyTripleJunctionFixture) {
    auto d = scratch_dir("cli_classify");
    ASSERT_EQ(run_cli("classify " + data("triple_junction.json"), d / "out.json"), 0);
    auto j = io::json::parse(slurp(d / "out.json"));
    EXPECT_EQ(j["vertices"], 4);
    for (const auto& p : j["points"]) EXPECT_NEAR(p["density"].get<double>(), 1.5, 1e-9);
    fs::remove_all(d);
}

TEST(Cli, AnalyzeWritesFile) {
    auto d = scratch_dir("cli_analyze");
    auto out = d / "report.json";
    ASSERT_EQ(run_cli("analyze " + data("triple_junction.json") + " -o " + out.string(), d / "log.txt"), 0);
    auto j = io::json::parse(slurp(out));
    EXPECT_EQ(j["count"], 4);
    fs::remove_all(d);
}

TEST(Cli, CoveringCommands) {
    auto d = scratch_dir("cli_cov");
    ASSERT_EQ(run_cli("covering verify " + data("points_2d.csv") + " --lambda 0.125 --budget 2", d / "v.json"), 0);
    auto v = io::json::parse(slurp(d / "v.json"));
    EXPECT_TRUE(v["bound_holds"].get<bool>());
    ASSERT_EQ(run_cli("covering sharpness --n 4 -o " + (d / "s.csv").string(), d / "s.json"), 0);
    auto csv = slurp(d / "s.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
    EXPECT_EQ(io::json::parse(slurp(d / "s.json"))["verdict"], "within_budget");
    ASSERT_EQ(run_cli("covering vitali --dim 2 --mu 0.5 --samples 2000", d / "vit.json"), 0);
    EXPECT_TRUE(io::json::parse(slurp(d / "vit.json"))["count_ok"].get<bool>());
    fs::remove_all(d);
}

TEST(Cli, ExitCodes) {
    auto d = scratch_dir("cli_exit");
    EXPECT_EQ(run_cli("covering verify " + data("points_2d.csv") + " --lambda 0.3 --budget 2", d / "a.txt"), 2);
    EXPECT_EQ(io::json::parse(slurp(d / "a.txt"))["error"], "parameter");
    EXPECT_EQ(run_cli("classify /nonexistent.json", d / "b.txt"), 2);
    EXPECT_EQ(run_cli("no-such-command", d / "c.txt"), 2);
    EXPECT_EQ(run_cli("constants", d / "d.txt"), 0);

    auto exp = small_experiment();
    exp["optimizer"] = {{"max_iterations", 3}};
    exp["seeds"] = {1};
    io::write_text_file((d / "exp.json").string(), exp.dump());
    EXPECT_EQ(run_cli("optimize " + (d / "exp.json").string() + " -o " + (d / "out").string(), d / "e.txt"), 3);
    EXPECT_TRUE(fs::exists(d / "out" / "small" / "summary.csv"));
    fs::remove_all(d);
}
