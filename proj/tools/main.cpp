// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The unlearn-probe Authors

// unlearn-probe: audits how much of a forgetting set can be reconstructed
// from the logits of a pre/post unlearning model pair.
//
// Exit codes: 0 success, 1 validation error, 2 transport error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "uprobe/uprobe.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

struct CommonArgs {
    std::string dataset;
    std::string pre_uri;
    std::string post_uri;
    std::vector<double> tau_list = {0.9, 1.0};
    int max_new_tokens = 0;  // 0 means per-record target length
    std::string out;
    std::string format = "json";
    int workers = 1;
    std::size_t cache_size = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_post) {
    cmd->add_option("--dataset", args.dataset, "JSONL corpus of extraction records")->required();
    cmd->add_option("--pre", args.pre_uri, "pre-unlearning provider uri (toy:<path> or http://host:port)")
        ->required();
    auto* post = cmd->add_option("--post", args.post_uri, "post-unlearning provider uri");
    if (need_post) post->required();
    cmd->add_option("--tau", args.tau_list, "success threshold, repeatable (default 0.9 1.0)");
    cmd->add_option("--max-new-tokens", args.max_new_tokens,
                    "global generation cap (default: each record's target length)");
    cmd->add_option("--out", args.out, "report file (default: stdout)");
    cmd->add_option("--format", args.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--workers", args.workers, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cache-size", args.cache_size,
                    "LRU logprob cache capacity per provider (default off)");
}

uprobe::harness::RunOptions to_options(const CommonArgs& args) {
    uprobe::harness::RunOptions opts;
    opts.config.tau_list = args.tau_list;
    if (args.max_new_tokens > 0) opts.max_new_tokens = args.max_new_tokens;
    else if (args.max_new_tokens < 0)
        uprobe::raise(uprobe::errc::out_of_range, "max_new_tokens must be positive");
    opts.workers = args.workers;
    opts.cache_capacity = args.cache_size;
    return opts;
}

void emit(const uprobe::harness::ReportSummary& summary, const CommonArgs& args) {
    const auto format = uprobe::harness::report_format_from_name(args.format);
    uprobe::log::info("run finished in " + std::to_string(summary.wall_time_seconds) + "s");
    if (args.out.empty()) {
        std::cout << uprobe::harness::render_report(summary, format);
    } else {
        uprobe::harness::emit_report(summary, format, args.out);
        uprobe::log::info("wrote report to " + args.out);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"extraction audit for exact unlearning via guided decoding"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "guided extraction plus both baselines");
    CommonArgs extract_args;
    double extract_w = 2.0, extract_gamma = 1e-5;
    add_common(extract, extract_args, /*need_post=*/true);
    extract->add_option("--w", extract_w, "guidance scale (default 2.0)");
    extract->add_option("--gamma", extract_gamma, "candidate filter strictness (default 1e-5)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "grid sweep over w and gamma");
    CommonArgs sweep_args;
    std::vector<double> sweep_w = {1.5, 2.0, 2.5};
    std::vector<double> sweep_gamma = {1e-5};
    add_common(sweep, sweep_args, /*need_post=*/true);
    sweep->add_option("--w", sweep_w, "guidance scale values (default 1.5 2.0 2.5)");
    sweep->add_option("--gamma", sweep_gamma, "filter strictness values (default 1e-5)");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "greedy decoding baselines only");
    CommonArgs baseline_args;
    add_common(baseline, baseline_args, /*need_post=*/false);

    // toy-train
    auto* toy_train = app.add_subcommand("toy-train", "train a toy n-gram model on a text corpus");
    std::string tt_corpus, tt_out;
    int tt_order = uprobe::provider::kDefaultOrder;
    double tt_k = uprobe::provider::kDefaultK;
    toy_train->add_option("--corpus", tt_corpus, "text corpus, one sentence per line")->required();
    toy_train->add_option("--order", tt_order, "n-gram order (default 3)");
    toy_train->add_option("--k", tt_k, "add-k smoothing constant (default 0.1)");
    toy_train->add_option("--out", tt_out, "output model file")->required();

    // toy-pair
    auto* toy_pair =
        app.add_subcommand("toy-pair", "build a pre/post unlearning pair of toy models");
    std::string tp_retain, tp_forget, tp_out;
    int tp_order = uprobe::provider::kDefaultOrder;
    double tp_k = uprobe::provider::kDefaultK;
    toy_pair->add_option("--retain", tp_retain, "retain corpus (kept through unlearning)")->required();
    toy_pair->add_option("--forget", tp_forget, "forget corpus (removed by unlearning)")->required();
    toy_pair->add_option("--order", tp_order, "n-gram order (default 3)");
    toy_pair->add_option("--k", tp_k, "add-k smoothing constant (default 0.1)");
    toy_pair->add_option("--out", tp_out, "output directory")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "expose a provider over the wire protocol");
    std::string sv_provider, sv_host = "127.0.0.1";
    int sv_port = 8080;
    serve->add_option("--provider", sv_provider, "provider uri to serve")->required();
    serve->add_option("--host", sv_host, "bind address (default 127.0.0.1)");
    serve->add_option("--port", sv_port, "port, 0 picks a free one (default 8080)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 1;
    }

    if (extract->parsed()) {
        auto opts = to_options(extract_args);
        opts.config.w = extract_w;
        opts.config.gamma = extract_gamma;
        emit(uprobe::harness::run_extract(extract_args.dataset, extract_args.pre_uri,
                                          extract_args.post_uri, opts),
             extract_args);
    } else if (sweep->parsed()) {
        auto opts = to_options(sweep_args);
        uprobe::harness::SweepGrid grid{sweep_w, sweep_gamma};
        emit(uprobe::harness::run_sweep(sweep_args.dataset, sweep_args.pre_uri,
                                        sweep_args.post_uri, grid, opts),
             sweep_args);
    } else if (baseline->parsed()) {
        emit(uprobe::harness::run_baseline(baseline_args.dataset, baseline_args.pre_uri,
                                           baseline_args.post_uri, to_options(baseline_args)),
             baseline_args);
    } else if (toy_train->parsed()) {
        const auto lines = uprobe::harness::detail::read_lines(tt_corpus);
        const auto model = uprobe::provider::NGramModel::train(lines, tt_order, tt_k);
        model.save_file(tt_out);
        std::cout << tt_out << "\n";
    } else if (toy_pair->parsed()) {
        const auto [pre_path, post_path] =
            uprobe::harness::build_toy_pair(tp_retain, tp_forget, tp_order, tp_k, tp_out);
        std::cout << pre_path.string() << "\n" << post_path.string() << "\n";
    } else if (serve->parsed()) {
        auto provider = uprobe::harness::open_provider(sv_provider);
        uprobe::wire::ProviderServer server(provider, sv_host, sv_port);
        std::cout << server.origin() << std::endl;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const uprobe::Error& e) {
        uprobe::log::error(e.what());
        return uprobe::is_transport_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        uprobe::log::error(e.what());
        return 1;
    }
}
