// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

// End-to-end checks of the command line tool, including exit codes:
// 0 success, 1 validation error, 2 transport error.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/toy_corpus.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(UPROBE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    CliResult result;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliEnv {
public:
    CliEnv() {
        dir_ = fs::temp_directory_path() / ("uprobe_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
        const auto corpus = uprobe::testsupport::make_leakage_corpus(6, 6, 5, 15);
        write("retain.txt", uprobe::testsupport::joined_lines(corpus.retain));
        write("forget.txt", uprobe::testsupport::joined_lines(corpus.forget));
        write("forget.jsonl", uprobe::testsupport::forget_jsonl(corpus));
        const CliResult pair = run_cli("toy-pair --retain " + path("retain.txt").string() +
                                       " --forget " + path("forget.txt").string() + " --out " +
                                       (dir_ / "models").string());
        if (pair.exit_code != 0) throw std::runtime_error("toy-pair failed during setup");
    }
    ~CliEnv() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    fs::path path(const std::string& name) const { return dir_ / name; }
    std::string pre_uri() const { return "toy:" + (dir_ / "models" / "pre_model.json").string(); }
    std::string post_uri() const { return "toy:" + (dir_ / "models" / "post_model.json").string(); }
    std::string common() const {
        return "--dataset " + path("forget.jsonl").string() + " --pre " + pre_uri() + " --post " +
               post_uri();
    }

private:
    void write(const std::string& name, const std::string& contents) {
        std::ofstream out(path(name), std::ios::binary);
        out << contents;
    }
    fs::path dir_;
};

CliEnv& env() {
    static CliEnv e;
    return e;
}

TEST(Cli, ExtractWritesJsonReport) {
    const auto out = env().path("extract.json");
    const CliResult r = run_cli("extract " + env().common() + " --w 2.0 --gamma 1e-5 --out " +
                                out.string());
    ASSERT_EQ(r.exit_code, 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(j.at("summary").size(), 3u);
    EXPECT_EQ(j.at("schema_version").get<int>(), 1);
}

TEST(Cli, ExtractToStdoutByDefault) {
    const CliResult r = run_cli("extract " + env().common() + " --format csv");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.output.rfind("method,w,gamma,mean_rouge_l_recall,a_esr_0.9,a_esr_1.0,records,skipped\n", 0),
              0u);
}

TEST(Cli, RepeatableTauChangesCsvColumns) {
    const CliResult r = run_cli("extract " + env().common() + " --format csv --tau 0.5 --tau 1.0");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("a_esr_0.5"), std::string::npos);
}

TEST(Cli, SweepIsByteIdenticalAcrossWorkerCounts) {
    const auto out1 = env().path("sweep_w1.json");
    const auto out4 = env().path("sweep_w4.json");
    const std::string grid = " --w 1.5 --w 2.0 --gamma 1e-5 ";
    ASSERT_EQ(run_cli("sweep " + env().common() + grid + "--workers 1 --out " + out1.string())
                  .exit_code,
              0);
    ASSERT_EQ(run_cli("sweep " + env().common() + grid + "--workers 4 --out " + out4.string())
                  .exit_code,
              0);
    EXPECT_EQ(slurp(out1), slurp(out4));

    const auto csv1 = env().path("sweep_w1.csv");
    const auto csv4 = env().path("sweep_w4.csv");
    ASSERT_EQ(run_cli("sweep " + env().common() + grid + "--format csv --workers 1 --out " +
                      csv1.string())
                  .exit_code,
              0);
    ASSERT_EQ(run_cli("sweep " + env().common() + grid + "--format csv --workers 4 --out " +
                      csv4.string())
                  .exit_code,
              0);
    EXPECT_EQ(slurp(csv1), slurp(csv4));
}

TEST(Cli, BaselineRunsWithoutPost) {
    const CliResult r = run_cli("baseline --dataset " + env().path("forget.jsonl").string() +
                                " --pre " + env().pre_uri() + " --format csv");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("pre_only"), std::string::npos);
    EXPECT_EQ(r.output.find("guided"), std::string::npos);
}

TEST(Cli, ToyTrainProducesLoadableModel) {
    const auto model = env().path("single.json");
    const CliResult r = run_cli("toy-train --corpus " + env().path("retain.txt").string() +
                                " --order 2 --k 0.5 --out " + model.string());
    ASSERT_EQ(r.exit_code, 0);
    const CliResult b = run_cli("baseline --dataset " + env().path("forget.jsonl").string() +
                                " --pre toy:" + model.string());
    EXPECT_EQ(b.exit_code, 0);
}

TEST(Cli, ValidationErrorsExitOne) {
    EXPECT_EQ(run_cli("extract " + env().common() + " --w 0.5").exit_code, 1);
    EXPECT_EQ(run_cli("extract " + env().common() + " --gamma 0").exit_code, 1);
    EXPECT_EQ(run_cli("extract --dataset /nonexistent.jsonl --pre " + env().pre_uri() +
                      " --post " + env().post_uri())
                  .exit_code,
              1);
    // missing required flags is a usage error
    EXPECT_EQ(run_cli("extract --pre " + env().pre_uri()).exit_code, 1);
}

TEST(Cli, TransportErrorsExitTwo) {
    EXPECT_EQ(run_cli("extract --dataset " + env().path("forget.jsonl").string() +
                      " --pre http://127.0.0.1:1 --post " + env().post_uri())
                  .exit_code,
              2);
}

TEST(Cli, HelpExitsZero) {
    EXPECT_EQ(run_cli("--help").exit_code, 0);
    EXPECT_EQ(run_cli("extract --help").exit_code, 0);
}

}  // namespace
