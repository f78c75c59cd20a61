#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "nanobot/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace nanobot;

namespace {

struct Result {
    int code = 0;
    std::string out;
};

// Runs the real binary; stderr goes to a file next to the captured stdout.
Result sim(const std::string& args, const fs::path& work) {
    const auto out = work / "stdout.txt";
    const auto err = work / "stderr.txt";
    const std::string cmd = std::string(NANOBOT_SIM_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out) + read_file(err);
    return r;
}

std::string small_config(const fs::path& dir) {
    const auto path = dir / "config.json";
    write_file(path, R"({"episodes": 15, "max_steps": 300, "seed": 3})");
    return path.string();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
    return files;
}

}  // namespace

TEST(Cli, TrainTwiceIsByteIdentical) {
    const auto work = support::scratch_dir("cli_train");
    const auto cfg = small_config(work);
    ASSERT_EQ(sim("train --quiet --config " + cfg + " --out-dir " + (work / "a").string(), work).code, 0);
    ASSERT_EQ(sim("train --quiet --config " + cfg + " --out-dir " + (work / "b").string(), work).code, 0);
    const auto a = snapshot(work / "a");
    EXPECT_EQ(a, snapshot(work / "b"));
    for (const char* f : {"config.json", "report.json", "qtable.csv", "trace.csv"}) EXPECT_TRUE(a.contains(f)) << f;
}

TEST(Cli, TrainPrintsJsonSummary) {
    const auto work = support::scratch_dir("cli_summary");
    const auto r = sim("train --quiet --seed 9 --config " + small_config(work) + " --out-dir " + (work / "o").string(),
                       work);
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(read_file(work / "stdout.txt"));
    EXPECT_EQ(j["command"], "train");
    EXPECT_EQ(j["runs"][0]["seed"], 9);
    EXPECT_EQ(load_config(work / "o" / "config.json").seed, 9u);
}

TEST(Cli, Replicates) {
    const auto work = support::scratch_dir("cli_rep");
    ASSERT_EQ(sim("train --quiet --replicates 3 --config " + small_config(work) + " --out-dir " +
                      (work / "r").string(),
                  work)
                  .code,
              0);
    for (int s : {3, 4, 5}) EXPECT_TRUE(fs::exists(work / "r" / ("seed_" + std::to_string(s)) / "qtable.csv"));
}

TEST(Cli, RunWithTrainedTable) {
    const auto work = support::scratch_dir("cli_run");
    const auto cfg = small_config(work);
    ASSERT_EQ(sim("train --quiet --config " + cfg + " --out-dir " + (work / "t").string(), work).code, 0);
    const auto r = sim("run --quiet --config " + cfg + " --qtable " + (work / "t" / "qtable.csv").string() +
                           " --out-dir " + (work / "e").string(),
                       work);
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(read_file(work / "e" / "metrics.json"));
    EXPECT_TRUE(j.contains("termination"));
    EXPECT_EQ(j["wall_clock_seconds"], 0.0);
    EXPECT_FALSE(read_trace(work / "e" / "trace.csv").empty());
}

TEST(Cli, HeatmapPeaksAtCell) {
    const auto work = support::scratch_dir("cli_heat");
    const auto r = sim("heatmap --config " + small_config(work) + " --plane XY --out " + (work / "h.csv").string(),
                       work);
    ASSERT_EQ(r.code, 0) << r.out;
    const auto summary = nlohmann::json::parse(read_file(work / "stdout.txt"));
    const auto cell = summary["cells"][0];
    const double z = cell[2].get<double>();
    ASSERT_EQ(sim("heatmap --config " + small_config(work) + " --plane XY --slice " + std::to_string(z) + " --out " +
                      (work / "h.csv").string(),
                  work)
                  .code,
              0);
    const auto g = read_heatmap(work / "h.csv");
    const auto idx = static_cast<int>(std::ranges::max_element(g.values) - g.values.begin());
    EXPECT_EQ(idx / g.resolution, static_cast<int>(cell[0].get<double>()));
    EXPECT_EQ(idx % g.resolution, static_cast<int>(cell[1].get<double>()));
}

TEST(Cli, MissingConfigExitsOneAndNamesPath) {
    const auto work = support::scratch_dir("cli_missing");
    const auto r = sim("train --config /no/such/config.json --out-dir " + (work / "o").string(), work);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("/no/such/config.json"), std::string::npos);
}

TEST(Cli, InvalidConfigExitsOne) {
    const auto work = support::scratch_dir("cli_invalid");
    write_file(work / "bad.json", R"({"gamma": 1.5})");
    const auto r = sim("train --config " + (work / "bad.json").string() + " --out-dir " + (work / "o").string(), work);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("gamma"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
    const auto work = support::scratch_dir("cli_usage");
    EXPECT_EQ(sim("", work).code, 1);
    EXPECT_EQ(sim("fly --config x.json", work).code, 1);
    EXPECT_EQ(sim("heatmap --config " + small_config(work) + " --plane QQ --out " + (work / "h.csv").string(), work)
                  .code,
              1);
}

TEST(Cli, UnwritableOutputExitsTwo) {
    const auto work = support::scratch_dir("cli_io");
    write_file(work / "blocker", "not a directory");
    const auto r = sim("train --quiet --config " + small_config(work) + " --out-dir " + (work / "blocker" / "x").string(),
                       work);
    EXPECT_EQ(r.code, 2);
}
