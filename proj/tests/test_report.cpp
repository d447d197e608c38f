// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "uprobe/report.hpp"

using namespace uprobe;
using namespace uprobe::harness;

namespace {

ExtractionResult result_of(const std::string& id, Method m, double recall) {
    ExtractionResult r;
    r.record_id = id;
    r.method = m;
    r.generated_text = "text for " + id;
    r.rouge_l_recall = recall;
    return r;
}

ReportSummary sample_summary() {
    std::vector<ExtractionResult> results{
        result_of("r1", Method::post_only, 0.0), result_of("r2", Method::post_only, 0.2),
        result_of("r1", Method::pre_only, 0.5),  result_of("r2", Method::pre_only, 1.0),
        result_of("r1", Method::guided, 1.0),    result_of("r2", Method::guided, 0.95),
    };
    const std::vector<double> taus{0.9, 1.0};
    ReportSummary s = metrics::summarize(results, taus);
    s.dataset_path = "corpus.jsonl";
    s.pre_uri = "toy:pre.json";
    s.post_uri = "toy:post.json";
    s.vocab_hash = "0123456789abcdef";
    s.normalized = true;
    s.w_values = {2.0};
    s.gamma_values = {1e-5};
    for (MethodCell& c : s.cells) {
        if (c.method == Method::guided) {
            c.w = 2.0;
            c.gamma = 1e-5;
            c.best = true;
        }
    }
    for (ResultRow& r : s.results) {
        if (r.result.method == Method::guided) {
            r.w = 2.0;
            r.gamma = 1e-5;
        }
    }
    return s;
}

TEST(Summarize, SinglePerfectResult) {
    const std::vector<ExtractionResult> results{result_of("r1", Method::guided, 1.0)};
    const std::vector<double> taus{0.9, 1.0};
    const ReportSummary s = metrics::summarize(results, taus);
    ASSERT_EQ(s.cells.size(), 1u);
    EXPECT_DOUBLE_EQ(s.cells[0].mean_rouge_l_recall, 1.0);
    EXPECT_DOUBLE_EQ(s.cells[0].a_esr[0].second, 1.0);
    EXPECT_DOUBLE_EQ(s.cells[0].a_esr[1].second, 1.0);
}

TEST(Summarize, TwoMethodsShareRecordCounts) {
    const ReportSummary s = sample_summary();
    ASSERT_EQ(s.cells.size(), 3u);
    EXPECT_EQ(s.cells[0].method, Method::post_only);
    EXPECT_EQ(s.cells[1].method, Method::pre_only);
    EXPECT_EQ(s.cells[2].method, Method::guided);
    for (const MethodCell& c : s.cells) EXPECT_EQ(c.record_count, 2u);
    EXPECT_EQ(s.record_count, 2u);
}

TEST(Summarize, MeanIsPlainArithmetic) {
    const std::vector<ExtractionResult> results{result_of("r1", Method::guided, 0.2),
                                                result_of("r2", Method::guided, 0.4)};
    const std::vector<double> taus{1.0};
    const ReportSummary s = metrics::summarize(results, taus);
    EXPECT_DOUBLE_EQ(s.cells[0].mean_rouge_l_recall, 0.3);
}

TEST(Summarize, EmptyResultsRejected) {
    const std::vector<ExtractionResult> empty;
    const std::vector<double> taus{1.0};
    EXPECT_THROW(metrics::summarize(empty, taus), Error);
}

TEST(Report, JsonRoundTripPreservesEverything) {
    const ReportSummary s = sample_summary();
    const nlohmann::ordered_json j = report_to_json(s);
    const ReportSummary parsed = report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_TRUE(equivalent(s, parsed));
}

TEST(Report, CsvHeaderIsPinned) {
    const ReportSummary s = sample_summary();
    const std::string csv = report_to_csv(s);
    const std::string header = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(header, "method,w,gamma,mean_rouge_l_recall,a_esr_0.9,a_esr_1.0,records,skipped");
}

TEST(Report, CsvRowsFollowMethodThenGridOrder) {
    const std::string csv = report_to_csv(sample_summary());
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < csv.size()) {
        const std::size_t end = csv.find('\n', start);
        lines.push_back(csv.substr(start, end - start));
        start = end + 1;
    }
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[1].rfind("post_only,,,", 0), 0u);
    EXPECT_EQ(lines[2].rfind("pre_only,,,", 0), 0u);
    EXPECT_EQ(lines[3].rfind("guided,2.0,1e-05,", 0), 0u);
}

TEST(Report, RenderingIsByteStable) {
    const ReportSummary a = sample_summary();
    const ReportSummary b = sample_summary();
    EXPECT_EQ(render_report(a, ReportFormat::json), render_report(b, ReportFormat::json));
    EXPECT_EQ(render_report(a, ReportFormat::csv), render_report(b, ReportFormat::csv));
}

TEST(Report, WallTimeNeverSerializes) {
    ReportSummary a = sample_summary();
    ReportSummary b = sample_summary();
    a.wall_time_seconds = 1.0;
    b.wall_time_seconds = 99.0;
    EXPECT_EQ(render_report(a, ReportFormat::json), render_report(b, ReportFormat::json));
    EXPECT_EQ(report_to_json(a).dump().find("wall_time"), std::string::npos);
}

TEST(Report, EmitWritesFiles) {
    const ReportSummary s = sample_summary();
    const auto dir = std::filesystem::temp_directory_path();
    const auto json_path = dir / "uprobe_report_test.json";
    const auto csv_path = dir / "uprobe_report_test.csv";
    emit_report(s, ReportFormat::json, json_path);
    emit_report(s, ReportFormat::csv, csv_path);

    std::ifstream in(json_path);
    nlohmann::json j = nlohmann::json::parse(in);
    EXPECT_TRUE(equivalent(report_from_json(j), s));

    std::ifstream csv_in(csv_path);
    std::string first_line;
    std::getline(csv_in, first_line);
    EXPECT_EQ(first_line.rfind("method,", 0), 0u);

    std::filesystem::remove(json_path);
    std::filesystem::remove(csv_path);
}

TEST(Report, FormatNamesParse) {
    EXPECT_EQ(report_format_from_name("json"), ReportFormat::json);
    EXPECT_EQ(report_format_from_name("csv"), ReportFormat::csv);
    EXPECT_THROW(report_format_from_name("xml"), Error);
}

}  // namespace
