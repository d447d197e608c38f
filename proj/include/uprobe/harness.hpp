#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

/**
 * @file harness.hpp
 * @brief Run orchestration: extraction runs, hyperparameter sweeps, the toy
 *        unlearning pair builder, and provider URI resolution.
 *
 * Provider URIs: `toy:<path>` loads an n-gram model file in process,
 * `http(s)://host:port` speaks the wire protocol. Records are decoded by a
 * bounded worker pool, then collected in record-id order before aggregation,
 * so reports are byte-identical regardless of worker count.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "uprobe/dataset.hpp"
#include "uprobe/errors.hpp"
#include "uprobe/guidance.hpp"
#include "uprobe/log.hpp"
#include "uprobe/metrics.hpp"
#include "uprobe/ngram.hpp"
#include "uprobe/provider.hpp"
#include "uprobe/report.hpp"
#include "uprobe/types.hpp"
#include "uprobe/wire.hpp"

namespace uprobe::harness {

/// Hyperparameter grid for a sweep. Baselines are computed once per run, not
/// per cell.
struct SweepGrid {
    std::vector<double> w_values;
    std::vector<double> gamma_values;
};

inline void validate_grid(const SweepGrid& grid) {
    if (grid.w_values.empty() || grid.gamma_values.empty())
        raise(errc::out_of_range, "sweep grid must have at least one w and one gamma");
    for (double w : grid.w_values) {
        GuidanceConfig probe;
        probe.w = w;
        validate_config(probe);
    }
    for (double gamma : grid.gamma_values) {
        GuidanceConfig probe;
        probe.gamma = gamma;
        validate_config(probe);
    }
}

struct RunOptions {
    GuidanceConfig config;              // w/gamma for single runs; tau_list for reports
    std::optional<int> max_new_tokens;  // global cap; per-record target length when absent
    int workers = 1;
    std::size_t cache_capacity = 0;  // wrap providers in an LRU cache when > 0
    bool run_guided = true;
    bool run_post_baseline = true;
};

inline provider::ProviderPtr open_provider(const std::string& uri) {
    if (uri.rfind("toy:", 0) == 0) {
        return std::make_shared<provider::ToyProvider>(
            provider::NGramModel::load_file(uri.substr(4)));
    }
    if (uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0)
        return wire::http_connect(uri);
    raise(errc::out_of_range,
          "unknown provider uri scheme in '" + uri + "' (expected toy: or http(s)://)");
}

namespace detail {

/// Runs fn(0..n-1) on up to `workers` threads. Work is claimed through an
/// atomic counter; the first exception wins and is rethrown after join.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t nworkers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
    if (nworkers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (std::size_t t = 0; t < nworkers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_error, "cannot open corpus file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    return lines;
}

inline MethodCell make_cell(Method method, std::optional<double> w, std::optional<double> gamma,
                            const metrics::ScoreSet& scores, std::span<const double> tau_list) {
    MethodCell cell;
    cell.method = method;
    cell.w = w;
    cell.gamma = gamma;
    cell.record_count = scores.per_record.size();
    double sum = 0.0;
    for (const auto& [_, r] : scores.per_record) sum += r;
    cell.mean_rouge_l_recall = sum / static_cast<double>(scores.per_record.size());
    for (double tau : tau_list) cell.a_esr.emplace_back(tau, metrics::a_esr(scores, tau));
    return cell;
}

}  // namespace detail

/// Core engine shared by extract/sweep/baseline: decodes every record under
/// every requested method, scores against the reference continuation, and
/// aggregates. `post` may be null when only the pre-model baseline runs.
inline ReportSummary run_grid(const std::string& dataset_path, provider::ProviderPtr pre,
                              provider::ProviderPtr post, const SweepGrid& grid,
                              const RunOptions& opts, const std::string& pre_uri = "",
                              const std::string& post_uri = "") {
    const auto t0 = std::chrono::steady_clock::now();
    if (!pre) raise(errc::out_of_range, "pre provider is required");
    validate_config(opts.config);
    if (opts.max_new_tokens && *opts.max_new_tokens < 1)
        raise(errc::out_of_range, "max_new_tokens cap must be positive");

    const bool want_guided = opts.run_guided;
    const bool want_post = opts.run_post_baseline && post != nullptr;
    if (want_guided) {
        if (!post) raise(errc::out_of_range, "guided extraction needs a post provider");
        validate_grid(grid);
        provider::require_pair_compatible(*pre, *post);
    }

    if (opts.cache_capacity > 0) {
        pre = provider::cached(pre, opts.cache_capacity);
        if (post) post = provider::cached(post, opts.cache_capacity);
    }

    // Materialize, skipping records that cannot be tokenized or scored.
    std::vector<ExtractionRecord> records;
    std::size_t skipped = 0;
    for (const dataset::RawRecord& raw : dataset::load_jsonl(dataset_path)) {
        try {
            ExtractionRecord rec = dataset::materialize(raw, *pre);
            if (metrics::normalize_words(rec.target_text).empty())
                raise(errc::empty_reference,
                      "record '" + raw.id + "': target has no scoreable words");
            records.push_back(std::move(rec));
        } catch (const Error& e) {
            ++skipped;
            log::warn(std::string("skipping record: ") + e.what());
        }
    }
    std::sort(records.begin(), records.end(),
              [](const ExtractionRecord& a, const ExtractionRecord& b) { return a.id < b.id; });

    struct RecordOutput {
        ExtractionResult pre_only;
        ExtractionResult post_only;
        std::vector<ExtractionResult> guided;  // grid order: w outer, gamma inner
    };
    std::vector<RecordOutput> outputs(records.size());

    detail::parallel_for(records.size(), opts.workers, [&](std::size_t i) {
        const ExtractionRecord& rec = records[i];
        GuidanceConfig cfg = opts.config;
        cfg.max_new_tokens =
            opts.max_new_tokens ? *opts.max_new_tokens : static_cast<int>(rec.target_ids.size());

        auto finish = [&](Method method, std::vector<TokenId> ids) {
            ExtractionResult r;
            r.record_id = rec.id;
            r.method = method;
            r.generated_text = pre->detokenize(ids);
            r.generated_ids = std::move(ids);
            r.rouge_l_recall = metrics::rouge_l_recall(rec.target_text, r.generated_text);
            return r;
        };

        RecordOutput& out = outputs[i];
        out.pre_only = finish(Method::pre_only, guidance::baseline_decode(*pre, rec.prefix_ids, cfg));
        if (want_post)
            out.post_only =
                finish(Method::post_only, guidance::baseline_decode(*post, rec.prefix_ids, cfg));
        if (want_guided) {
            for (double w : grid.w_values) {
                for (double gamma : grid.gamma_values) {
                    cfg.w = w;
                    cfg.gamma = gamma;
                    out.guided.push_back(
                        finish(Method::guided, guidance::decode(*pre, *post, rec.prefix_ids, cfg)));
                }
            }
        }
    });

    // Aggregate in deterministic order: post_only, pre_only, then guided
    // cells in grid order, each over records sorted by id.
    ReportSummary summary;
    summary.dataset_path = dataset_path;
    summary.pre_uri = pre_uri;
    summary.post_uri = post_uri;
    summary.vocab_hash = pre->vocab_hash_hex();
    summary.normalized = pre->normalized() && (!post || post->normalized());
    summary.record_count = records.size();
    summary.skipped_count = skipped;
    summary.tau_list = opts.config.tau_list;
    summary.max_new_tokens = opts.max_new_tokens;
    if (want_guided) {
        summary.w_values = grid.w_values;
        summary.gamma_values = grid.gamma_values;
    }
    if (records.empty()) raise(errc::empty_scores, "no records could be materialized from " + dataset_path);

    auto collect = [&](Method method, std::optional<double> w, std::optional<double> gamma,
                       const std::function<const ExtractionResult&(const RecordOutput&)>& pick) {
        metrics::ScoreSet scores;
        scores.method = method;
        for (const RecordOutput& out : outputs) {
            const ExtractionResult& r = pick(out);
            scores.per_record[r.record_id] = r.rouge_l_recall;
            summary.results.push_back({w, gamma, r});
        }
        summary.cells.push_back(detail::make_cell(method, w, gamma, scores, summary.tau_list));
    };

    if (want_post)
        collect(Method::post_only, std::nullopt, std::nullopt,
                [](const RecordOutput& o) -> const ExtractionResult& { return o.post_only; });
    collect(Method::pre_only, std::nullopt, std::nullopt,
            [](const RecordOutput& o) -> const ExtractionResult& { return o.pre_only; });
    if (want_guided) {
        std::size_t cell_index = 0;
        std::size_t best_cell = 0;
        double best_mean = kNegInf;
        for (std::size_t wi = 0; wi < grid.w_values.size(); ++wi) {
            for (std::size_t gi = 0; gi < grid.gamma_values.size(); ++gi, ++cell_index) {
                collect(Method::guided, grid.w_values[wi], grid.gamma_values[gi],
                        [cell_index](const RecordOutput& o) -> const ExtractionResult& {
                            return o.guided[cell_index];
                        });
                const MethodCell& cell = summary.cells.back();
                if (cell.mean_rouge_l_recall > best_mean) {
                    best_mean = cell.mean_rouge_l_recall;
                    best_cell = summary.cells.size() - 1;
                }
            }
        }
        summary.cells[best_cell].best = true;
    }

    summary.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

/// Single extraction run: guided at the configured (w, gamma) plus both
/// baselines.
inline ReportSummary run_extract(const std::string& dataset_path, const std::string& pre_uri,
                                 const std::string& post_uri, const RunOptions& opts) {
    SweepGrid grid{{opts.config.w}, {opts.config.gamma}};
    return run_grid(dataset_path, open_provider(pre_uri), open_provider(post_uri), grid, opts,
                    pre_uri, post_uri);
}

/// Sweep over a (w, gamma) grid; baselines are computed once and the best
/// guided cell by mean recall is marked in the report.
inline ReportSummary run_sweep(const std::string& dataset_path, const std::string& pre_uri,
                               const std::string& post_uri, const SweepGrid& grid,
                               const RunOptions& opts) {
    validate_grid(grid);
    return run_grid(dataset_path, open_provider(pre_uri), open_provider(post_uri), grid, opts,
                    pre_uri, post_uri);
}

/// Baselines only. `post_uri` may be empty to audit a single model.
inline ReportSummary run_baseline(const std::string& dataset_path, const std::string& pre_uri,
                                  const std::string& post_uri, const RunOptions& opts) {
    RunOptions local = opts;
    local.run_guided = false;
    provider::ProviderPtr post;
    if (!post_uri.empty()) {
        post = open_provider(post_uri);
    } else {
        local.run_post_baseline = false;
    }
    return run_grid(dataset_path, open_provider(pre_uri), post, SweepGrid{}, local, pre_uri,
                    post_uri);
}

/// Builds the exact-unlearning toy pair: the pre model trains on
/// retain+forget, the post model on retain only, both over the union
/// vocabulary so their vocab hashes match and forget-only words keep
/// smoothed-only mass in the post model. Returns (pre_path, post_path).
inline std::pair<std::filesystem::path, std::filesystem::path> build_toy_pair(
    const std::filesystem::path& retain_path, const std::filesystem::path& forget_path, int order,
    double k, const std::filesystem::path& out_dir) {
    const std::vector<std::string> retain = detail::read_lines(retain_path);
    const std::vector<std::string> forget = detail::read_lines(forget_path);
    if (retain.empty()) raise(errc::empty_corpus, "retain corpus has no lines: " + retain_path.string());
    if (forget.empty()) raise(errc::empty_corpus, "forget corpus has no lines: " + forget_path.string());

    std::vector<std::string> both = retain;
    both.insert(both.end(), forget.begin(), forget.end());
    const std::vector<std::string> vocab = provider::NGramModel::build_vocab(both);

    const provider::NGramModel pre = provider::NGramModel::train(both, order, k, vocab);
    const provider::NGramModel post = provider::NGramModel::train(retain, order, k, vocab);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::filesystem::path pre_path = out_dir / "pre_model.json";
    const std::filesystem::path post_path = out_dir / "post_model.json";
    pre.save_file(pre_path);
    post.save_file(post_path);
    return {pre_path, post_path};
}

}  // namespace uprobe::harness
