#include "wcl/commands.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wcl/config.hpp"
#include "wcl/dataset_io.hpp"
#include "wcl/errors.hpp"
#include "wcl/harness.hpp"
#include "wcl/model.hpp"

namespace wcl {

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::stringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name.empty()) continue;
        out.push_back(method_from_string(name));
    }
    return out;
}

}  // namespace

int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto cfg = load_config(opts.config);
        const std::uint64_t seed = opts.seed.value_or(cfg.seed);
        Rng rng(seed);
        Dataset data{build_stream(cfg.k_pairs, cfg.episodes, rng), cfg.system};
        attach_wmmse_labels(data.stream, data.system);
        save_dataset(data, opts.out);

        std::size_t n_train = 0, n_test = 0;
        for (const auto& s : cfg.episodes) {
            n_train += s.n_train;
            n_test += s.n_test;
        }
        out << "wrote " << opts.out.string() << ": " << cfg.episodes.size() << " episodes, "
            << data.stream.batch_count() << " batches, " << n_train << " train and " << n_test
            << " test samples (K = " << cfg.k_pairs << ")\n";
        return kExitOk;
    });
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto cfg = load_config(opts.config);
        const std::uint64_t seed = opts.seed.value_or(cfg.seed);
        const auto data = load_dataset(opts.dataset);
        if (data.stream.k_pairs() != cfg.k_pairs)
            throw ConfigError("dataset has K = " + std::to_string(data.stream.k_pairs()) + " but the config says " +
                              std::to_string(cfg.k_pairs));

        std::vector<StrategyConfig> selected;
        if (opts.methods.empty()) {
            selected = cfg.methods;
        } else {
            for (auto m : parse_methods(opts.methods)) {
                auto it = std::find_if(cfg.methods.begin(), cfg.methods.end(),
                                       [&](const StrategyConfig& s) { return s.method == m; });
                if (it != cfg.methods.end()) {
                    selected.push_back(*it);
                } else {
                    auto sc = cfg.methods.empty() ? StrategyConfig{} : cfg.methods.front();
                    sc.method = m;
                    selected.push_back(sc);
                }
            }
        }
        if (selected.empty()) throw ConfigError("no methods selected");
        for (auto& s : selected) s.loss.system = data.system;

        const auto dir = opts.out_dir.value_or(cfg.output_dir);
        std::filesystem::create_directories(dir);

        Rng init_rng(seed);
        const auto init = init_params(cfg.layer_sizes(), data.system.p_max, init_rng);

        std::mutex log_mutex;
        std::vector<std::string> failures(selected.size());
        auto run_one = [&](std::size_t i) {
            const auto& sc = selected[i];
            const std::string name = to_string(sc.method);
            try {
                // Rows are flushed as they arrive so an aborted run leaves partial metrics.
                std::ofstream csv(dir / ("metrics_" + name + ".csv"), std::ios::binary);
                if (!csv) throw IoError("cannot write metrics for " + name);
                write_metrics_header(csv, data.stream.test_sets().size());
                auto res = run_continual(data.stream, sc, init, derive_seed(seed, sc.method), [&](const MetricsRow& row) {
                    write_metrics_row(csv, row);
                    csv.flush();
                });
                csv.close();
                save_checkpoint(res.params, dir / ("model_" + name + ".json"));
                {
                    std::ofstream mem(dir / ("memory_" + name + ".jsonl"), std::ios::binary);
                    write_samples(res.memory, mem);
                }
                std::lock_guard lock(log_mutex);
                const auto& last = res.rows.back();
                out << name << ": " << res.rows.size() << " rounds, final avg_rate " << last.avg_rate
                    << ", avg_ratio " << last.avg_ratio() << '\n';
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        };

        if (opts.parallel) {
            std::vector<std::thread> threads;
            for (std::size_t i = 0; i < selected.size(); ++i) threads.emplace_back(run_one, i);
            for (auto& t : threads) t.join();
        } else {
            for (std::size_t i = 0; i < selected.size(); ++i) run_one(i);
        }

        int status = kExitOk;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            if (failures[i].empty()) continue;
            err << "error: method " << to_string(selected[i].method) << " failed: " << failures[i] << '\n';
            status = kExitRuntime;
        }
        return status;
    });
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto data = load_dataset(opts.dataset);
        const std::size_t k = data.stream.k_pairs();

        Policy policy;
        if (opts.policy == "network") {
            if (!opts.checkpoint) throw ConfigError("--checkpoint is required for --policy network");
            auto params = load_checkpoint(*opts.checkpoint);
            if (params.input_size() != k * k || params.output_size() != k)
                throw ShapeError("checkpoint expects K = " + std::to_string(params.output_size()) +
                                 " but the dataset has K = " + std::to_string(k));
            policy = network_policy(std::move(params));
        } else if (opts.policy == "wmmse") {
            policy = wmmse_policy(data.system);
        } else if (opts.policy == "max") {
            policy = constant_policy(data.system.p_max);
        } else if (opts.policy == "zero") {
            policy = constant_policy(0.0);
        } else {
            throw ConfigError("unknown policy '" + opts.policy + "' (valid: network, wmmse, max, zero)");
        }

        const auto& tests = data.stream.test_sets();
        const auto ev = evaluate(policy, tests, data.system);
        out << "episode,rate,ratio\n";
        for (std::size_t e = 0; e < tests.size(); ++e)
            out << e << ',' << ev.per_episode_rate[e] << ',' << ev.per_episode_ratio[e] << '\n';

        const auto bins = ratio_histogram(policy, tests, data.system, opts.bin_width);
        std::ofstream csv(opts.histogram_out, std::ios::binary);
        if (!csv) throw IoError("cannot write histogram " + opts.histogram_out.string());
        write_histogram_csv(csv, bins);
        return kExitOk;
    });
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Continual learning for wireless power control"};
    app.require_subcommand(1);

    GenOptions gen;
    std::uint64_t gen_seed = 0;
    auto* gen_cmd = app.add_subcommand("gen", "Generate and label a streaming channel dataset");
    gen_cmd->add_option("--config,--spec", gen.config, "Experiment config (JSON)")->required();
    auto* gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "Override the config seed");
    gen_cmd->add_option("--out", gen.out, "Dataset output path")->required();

    RunOptions run;
    std::uint64_t run_seed = 0;
    std::string run_out;
    auto* run_cmd = app.add_subcommand("run", "Run continual-learning methods over a dataset");
    run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--dataset", run.dataset, "Dataset produced by gen")->required();
    auto* run_out_opt = run_cmd->add_option("--out", run_out, "Output directory (default: config output_dir)");
    run_cmd->add_option("--methods", run.methods, "Comma-separated subset of methods");
    auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Override the config seed");
    run_cmd->add_flag("--parallel", run.parallel, "Run methods concurrently");

    EvalOptions ev;
    std::string checkpoint;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's test sets");
    auto* ck_opt = eval_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint (JSON)");
    eval_cmd->add_option("--dataset", ev.dataset, "Dataset produced by gen")->required();
    eval_cmd->add_option("--policy", ev.policy, "network, wmmse, max or zero")->default_val("network");
    eval_cmd->add_option("--out", ev.histogram_out, "Histogram CSV path")->default_val("histogram.csv");
    eval_cmd->add_option("--bin-width", ev.bin_width, "Histogram bin width")->default_val(0.1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    if (gen_cmd->parsed()) {
        if (*gen_seed_opt) gen.seed = gen_seed;
        return cmd_gen(gen, out, err);
    }
    if (run_cmd->parsed()) {
        if (*run_seed_opt) run.seed = run_seed;
        if (*run_out_opt) run.out_dir = run_out;
        return cmd_run(run, out, err);
    }
    if (*ck_opt) ev.checkpoint = checkpoint;
    return cmd_eval(ev, out, err);
}

}  // namespace wcl
