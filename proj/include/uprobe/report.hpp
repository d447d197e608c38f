#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file report.hpp
 * @brief Aggregate extraction metrics and byte-stable report emission.
 *
 * A report holds one row per method (and per sweep cell for the guided
 * method): mean recall, the success rate at each threshold, and the
 * per-record result dump the aggregates were computed from. Serialization is
 * deterministic so identical runs produce byte-identical files; wall time is
 * logged but never written into a report file.
 */

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "uprobe/errors.hpp"
#include "uprobe/metrics.hpp"
#include "uprobe/types.hpp"

namespace uprobe::harness {

/// One method x hyperparameter cell. Baselines carry no w/gamma.
struct MethodCell {
    Method method = Method::guided;
    std::optional<double> w;
    std::optional<double> gamma;
    double mean_rouge_l_recall = 0.0;
    std::vector<std::pair<double, double>> a_esr;  // (tau, value), in tau_list order
    std::size_t record_count = 0;
    bool best = false;  // best guided cell by mean recall

    bool operator==(const MethodCell&) const = default;
};

/// One decoded record inside the result dump.
struct ResultRow {
    std::optional<double> w;
    std::optional<double> gamma;
    ExtractionResult result;

    bool operator==(const ResultRow&) const = default;
};

struct ReportSummary {
    std::vector<MethodCell> cells;
    std::vector<ResultRow> results;
    std::size_t record_count = 0;   // records that materialized and were scored
    std::size_t skipped_count = 0;  // records dropped during materialization
    std::string dataset_path;
    std::string pre_uri;
    std::string post_uri;
    std::string vocab_hash;  // 16 lowercase hex chars; empty when unknown
    bool normalized = true;
    std::vector<double> w_values;
    std::vector<double> gamma_values;
    std::vector<double> tau_list;
    std::optional<int> max_new_tokens;  // global cap; per-record target length when absent
    double wall_time_seconds = 0.0;     // informational only, never serialized
};

/// Equality over everything that lands in a report file.
inline bool equivalent(const ReportSummary& a, const ReportSummary& b) {
    return a.cells == b.cells && a.results == b.results && a.record_count == b.record_count &&
           a.skipped_count == b.skipped_count && a.dataset_path == b.dataset_path &&
           a.pre_uri == b.pre_uri && a.post_uri == b.post_uri && a.vocab_hash == b.vocab_hash &&
           a.normalized == b.normalized && a.w_values == b.w_values &&
           a.gamma_values == b.gamma_values && a.tau_list == b.tau_list &&
           a.max_new_tokens == b.max_new_tokens;
}

enum class ReportFormat { json, csv };

inline ReportFormat report_format_from_name(std::string_view name) {
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    raise(errc::out_of_range, "format must be json or csv, got '" + std::string(name) + "'");
}

namespace detail {

/// Shortest round-trip decimal rendering (what the JSON serializer emits),
/// reused for CSV so both formats print numbers identically.
inline std::string number_str(double v) { return nlohmann::json(v).dump(); }

inline int method_order(Method m) {
    switch (m) {
        case Method::post_only: return 0;
        case Method::pre_only: return 1;
        case Method::guided: return 2;
    }
    return 2;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

}  // namespace uprobe::harness

namespace uprobe::metrics {

/// Aggregates raw results into per-method cells: mean recall plus the
/// success rate at every threshold in tau_list. Guided cells get their
/// w/gamma attached by the caller, which knows the grid.
inline harness::ReportSummary summarize(std::span<const ExtractionResult> results,
                                        std::span<const double> tau_list) {
    if (results.empty()) raise(errc::empty_scores, "no results to summarize");

    harness::ReportSummary summary;
    summary.tau_list.assign(tau_list.begin(), tau_list.end());

    std::map<int, ScoreSet> by_method;
    std::set<std::string> record_ids;
    for (const ExtractionResult& r : results) {
        ScoreSet& set = by_method[harness::detail::method_order(r.method)];
        set.method = r.method;
        set.per_record[r.record_id] = r.rouge_l_recall;
        record_ids.insert(r.record_id);
        summary.results.push_back({std::nullopt, std::nullopt, r});
    }
    summary.record_count = record_ids.size();

    for (const auto& [_, set] : by_method) {
        harness::MethodCell cell;
        cell.method = set.method;
        cell.record_count = set.per_record.size();
        double sum = 0.0;
        for (const auto& [__, r] : set.per_record) sum += r;
        cell.mean_rouge_l_recall = sum / static_cast<double>(set.per_record.size());
        for (double tau : tau_list) cell.a_esr.emplace_back(tau, a_esr(set, tau));
        summary.cells.push_back(std::move(cell));
    }
    return summary;
}

}  // namespace uprobe::metrics

namespace uprobe::harness {

inline nlohmann::ordered_json report_to_json(const ReportSummary& s) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["dataset"] = {{"path", s.dataset_path},
                    {"records", s.record_count},
                    {"skipped", s.skipped_count}};
    j["providers"] = {{"pre", s.pre_uri},
                      {"post", s.post_uri},
                      {"vocab_hash", s.vocab_hash},
                      {"normalized", s.normalized}};
    nlohmann::ordered_json cfg;
    cfg["w_values"] = s.w_values;
    cfg["gamma_values"] = s.gamma_values;
    cfg["tau_list"] = s.tau_list;
    if (s.max_new_tokens) cfg["max_new_tokens"] = *s.max_new_tokens;
    else cfg["max_new_tokens"] = nullptr;
    j["config"] = std::move(cfg);

    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const MethodCell& c : s.cells) {
        nlohmann::ordered_json row;
        row["method"] = method_name(c.method);
        row["w"] = c.w ? nlohmann::ordered_json(*c.w) : nlohmann::ordered_json(nullptr);
        row["gamma"] = c.gamma ? nlohmann::ordered_json(*c.gamma) : nlohmann::ordered_json(nullptr);
        row["mean_rouge_l_recall"] = c.mean_rouge_l_recall;
        nlohmann::ordered_json esr;
        for (const auto& [tau, value] : c.a_esr) esr[detail::number_str(tau)] = value;
        row["a_esr"] = std::move(esr);
        row["records"] = c.record_count;
        row["best"] = c.best;
        cells.push_back(std::move(row));
    }
    j["summary"] = std::move(cells);

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ResultRow& r : s.results) {
        nlohmann::ordered_json row;
        row["record_id"] = r.result.record_id;
        row["method"] = method_name(r.result.method);
        row["w"] = r.w ? nlohmann::ordered_json(*r.w) : nlohmann::ordered_json(nullptr);
        row["gamma"] = r.gamma ? nlohmann::ordered_json(*r.gamma) : nlohmann::ordered_json(nullptr);
        row["rouge_l_recall"] = r.result.rouge_l_recall;
        row["generated_text"] = r.result.generated_text;
        rows.push_back(std::move(row));
    }
    j["results"] = std::move(rows);
    return j;
}

inline ReportSummary report_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("summary"))
        raise(errc::parse_error, "report document has no summary");

    ReportSummary s;
    const auto& ds = j.at("dataset");
    s.dataset_path = ds.at("path").get<std::string>();
    s.record_count = ds.at("records").get<std::size_t>();
    s.skipped_count = ds.at("skipped").get<std::size_t>();
    const auto& pv = j.at("providers");
    s.pre_uri = pv.at("pre").get<std::string>();
    s.post_uri = pv.at("post").get<std::string>();
    s.vocab_hash = pv.at("vocab_hash").get<std::string>();
    s.normalized = pv.at("normalized").get<bool>();
    const auto& cfg = j.at("config");
    s.w_values = cfg.at("w_values").get<std::vector<double>>();
    s.gamma_values = cfg.at("gamma_values").get<std::vector<double>>();
    s.tau_list = cfg.at("tau_list").get<std::vector<double>>();
    if (!cfg.at("max_new_tokens").is_null()) s.max_new_tokens = cfg.at("max_new_tokens").get<int>();

    for (const auto& row : j.at("summary")) {
        MethodCell c;
        c.method = method_from_name(row.at("method").get<std::string>());
        if (!row.at("w").is_null()) c.w = row.at("w").get<double>();
        if (!row.at("gamma").is_null()) c.gamma = row.at("gamma").get<double>();
        c.mean_rouge_l_recall = row.at("mean_rouge_l_recall").get<double>();
        for (double tau : s.tau_list) {
            const std::string key = detail::number_str(tau);
            c.a_esr.emplace_back(tau, row.at("a_esr").at(key).get<double>());
        }
        c.record_count = row.at("records").get<std::size_t>();
        c.best = row.at("best").get<bool>();
        s.cells.push_back(std::move(c));
    }
    for (const auto& row : j.at("results")) {
        ResultRow r;
        r.result.record_id = row.at("record_id").get<std::string>();
        r.result.method = method_from_name(row.at("method").get<std::string>());
        if (!row.at("w").is_null()) r.w = row.at("w").get<double>();
        if (!row.at("gamma").is_null()) r.gamma = row.at("gamma").get<double>();
        r.result.rouge_l_recall = row.at("rouge_l_recall").get<double>();
        r.result.generated_text = row.at("generated_text").get<std::string>();
        s.results.push_back(std::move(r));
    }
    return s;
}

/// CSV layout: one row per method x cell. Column order is pinned; with the
/// default thresholds the header reads
///   method,w,gamma,mean_rouge_l_recall,a_esr_0.9,a_esr_1.0,records,skipped
inline std::string report_to_csv(const ReportSummary& s) {
    std::string out = "method,w,gamma,mean_rouge_l_recall";
    for (double tau : s.tau_list) out += ",a_esr_" + detail::number_str(tau);
    out += ",records,skipped\n";

    for (const MethodCell& c : s.cells) {
        out += method_name(c.method);
        out += ',';
        if (c.w) out += detail::number_str(*c.w);
        out += ',';
        if (c.gamma) out += detail::number_str(*c.gamma);
        out += ',';
        out += detail::number_str(c.mean_rouge_l_recall);
        for (const auto& [_, value] : c.a_esr) out += ',' + detail::number_str(value);
        out += ',' + std::to_string(c.record_count);
        out += ',' + std::to_string(s.skipped_count);
        out += '\n';
    }
    return out;
}

inline std::string render_report(const ReportSummary& s, ReportFormat format) {
    if (format == ReportFormat::csv) return report_to_csv(s);
    return report_to_json(s).dump(2) + "\n";
}

/// Writes the report; output is byte-stable for identical summaries.
inline void emit_report(const ReportSummary& s, ReportFormat format,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(errc::io_error, "cannot open report file for writing: " + path.string());
    out << render_report(s, format);
    if (!out) raise(errc::io_error, "write failed: " + path.string());
}

}  // namespace uprobe::harness
