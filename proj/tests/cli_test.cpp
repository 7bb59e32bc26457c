// Copyright 2026 The evcs-forensics Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "evcsf/json_io.hpp"

namespace {

namespace fs = std::filesystem;
const std::string kCli = EVCSF_CLI_PATH;
const std::string kScenarioDir = EVCSF_SCENARIO_DIR;

struct Run {
    int status{-1};
    std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
    Run r;
    const std::string cmd = "'" + kCli + "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (auto n = fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("evcsf-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run("").status, 1);
    EXPECT_EQ(run("frobnicate").status, 1);
    EXPECT_EQ(run("analyze --model x.json").status, 1);  // --input missing
    EXPECT_EQ(run("report --analysis a.json --format pdf").status, 1);
    EXPECT_EQ(run("--help").status, 0);
}

TEST_F(CliTest, InvalidModelExitsTwoWithResidual) {
    write("bad.json", R"({"k": 2, "priors": [0.45, 0.25, 0.15, 0.05],
        "likelihood": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]})");
    const auto r = run("validate-model --model '" + path("bad.json") + "'");
    EXPECT_EQ(r.status, 2) << r.output;
    EXPECT_NE(r.output.find("prior"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("0.1"), std::string::npos) << r.output;

    const auto fixed = run("validate-model --renormalize --model '" + path("bad.json") + "'");
    EXPECT_EQ(fixed.status, 0) << fixed.output;
    EXPECT_EQ(run("validate-model --model '" + kScenarioDir + "/scenario1.model.json'").status, 0);
}

TEST_F(CliTest, EmptyInputDirectoryIsADataError) {
    fs::create_directories(dir_ / "empty");
    const auto r = run("analyze --input '" + path("empty") + "' --model '" + kScenarioDir +
                       "/scenario1.model.json' --out '" + path("a.json") + "'");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.output.find("no records ingested"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "a.json"));
}

TEST_F(CliTest, MissingFileAndSameInOutAreRejected) {
    EXPECT_EQ(run("analyze --input /nonexistent/x.log --model '" + kScenarioDir + "/scenario1.model.json' --out '" +
                  path("a.json") + "'")
                  .status,
              2);
    write("x.log", "BMS|05-16-22|EST|02:20:40:47|operator-note||||n\n");
    EXPECT_EQ(run("analyze --input '" + path("x.log") + "' --model '" + kScenarioDir + "/scenario1.model.json' --out '" +
                  path("x.log") + "'")
                  .status,
              1);
}

TEST_F(CliTest, EndToEndScenarioOne) {
    const auto model = kScenarioDir + "/scenario1.model.json";
    ASSERT_EQ(run("generate --scenario scenario1 --out '" + dir_.string() + "'").status, 0);
    ASSERT_TRUE(fs::exists(dir_ / "scenario1.log"));
    ASSERT_TRUE(fs::exists(dir_ / "scenario1.manifest.json"));
    auto a = run("analyze --input '" + path("scenario1.log") + "' --model '" + model + "' --out '" +
                 path("analysis.json") + "'");
    ASSERT_EQ(a.status, 0) << a.output;
    auto rep = run("report --analysis '" + path("analysis.json") + "' --attribution '" + kScenarioDir +
                   "/scenario1.attribution.json' --format json --out '" + path("report.json") + "'");
    ASSERT_EQ(rep.status, 0) << rep.output;
    const auto report = evcsf::read_json_file(path("report.json"));
    EXPECT_EQ(report.at("schema_version"), 1);
    EXPECT_EQ(report.at("incident").at("is_incident"), true);

    auto ev = run("evaluate --manifest '" + path("scenario1.manifest.json") + "' --analysis '" +
                  path("analysis.json") + "' --out '" + path("eval.json") + "'");
    ASSERT_EQ(ev.status, 0) << ev.output;
    const auto eval = evcsf::read_json_file(path("eval.json"));
    EXPECT_EQ(eval.at("true_positives"), 2);
    EXPECT_EQ(eval.at("false_positives"), 0);
    EXPECT_EQ(eval.at("false_negatives"), 0);

    // a final report without attributions is a data error; a draft is fine
    write("partial.json", R"({"attacker": "hacker"})");
    EXPECT_EQ(run("report --analysis '" + path("analysis.json") + "' --attribution '" + path("partial.json") + "'")
                  .status,
              2);
    const auto draft =
        run("report --draft --analysis '" + path("analysis.json") + "' --attribution '" + path("partial.json") + "'");
    EXPECT_EQ(draft.status, 0) << draft.output;
    EXPECT_NE(draft.output.find("undetermined"), std::string::npos);
}

}  // namespace
