#include "wcl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wcl/errors.hpp"

namespace wcl {

using nlohmann::json;

std::vector<std::size_t> ExperimentConfig::layer_sizes() const {
    std::vector<std::size_t> sizes{k_pairs * k_pairs};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(k_pairs);
    return sizes;
}

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ConfigError("unknown config field '" + (where.empty() ? "" : where + ".") + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        dst = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + (where.empty() ? "" : where + ".") + key + "' has the wrong type");
    }
}

std::size_t scaled(double full, double scale) {
    return static_cast<std::size_t>(std::llround(full / scale));
}

ScscConfig parse_scsc(const json& j, ScscConfig c, std::int64_t& iters) {
    check_keys(j, "training.scsc", {"alpha", "beta", "schedule", "l0", "y_floor", "minibatch_xi", "minibatch_phi", "iters"});
    read(j, "alpha", c.alpha, "training.scsc");
    read(j, "beta", c.beta, "training.scsc");
    std::string schedule = c.schedule == StepSchedule::InverseSqrt ? "inverse_sqrt" : "constant";
    read(j, "schedule", schedule, "training.scsc");
    if (schedule == "constant") c.schedule = StepSchedule::Constant;
    else if (schedule == "inverse_sqrt") c.schedule = StepSchedule::InverseSqrt;
    else throw ConfigError("training.scsc.schedule must be 'constant' or 'inverse_sqrt'");
    read(j, "l0", c.l0, "training.scsc");
    read(j, "y_floor", c.y_floor, "training.scsc");
    read(j, "minibatch_xi", c.minibatch_xi, "training.scsc");
    read(j, "minibatch_phi", c.minibatch_phi, "training.scsc");
    read(j, "iters", iters, "training.scsc");
    if (!(c.alpha > 0.0)) throw ConfigError("training.scsc.alpha must be positive");
    if (!(c.beta > 0.0 && c.beta <= 1.0)) throw ConfigError("training.scsc.beta must be in (0, 1]");
    if (c.minibatch_xi == 0 || c.minibatch_phi == 0) throw ConfigError("training.scsc minibatch sizes must be positive");
    return c;
}

InnerConfig parse_inner(const json& j) {
    InnerConfig in;
    check_keys(j, "training", {"epochs", "minibatch", "sgd_alpha", "scsc", "gda"});
    read(j, "epochs", in.epochs, "training");
    read(j, "minibatch", in.minibatch, "training");
    read(j, "sgd_alpha", in.sgd_alpha, "training");
    in.scsc.minibatch_xi = in.scsc.minibatch_phi = in.minibatch;
    if (j.contains("scsc")) in.scsc = parse_scsc(j["scsc"], in.scsc, in.scsc_iters);
    if (j.contains("gda")) {
        const auto& g = j["gda"];
        check_keys(g, "training.gda", {"alpha_theta", "alpha_lambda", "iters"});
        read(g, "alpha_theta", in.gda_alpha_theta, "training.gda");
        read(g, "alpha_lambda", in.gda_alpha_lambda, "training.gda");
        read(g, "iters", in.gda_iters, "training.gda");
    }
    if (in.epochs < 0) throw ConfigError("training.epochs must be nonnegative");
    if (in.minibatch == 0) throw ConfigError("training.minibatch must be positive");
    if (!(in.sgd_alpha > 0.0)) throw ConfigError("training.sgd_alpha must be positive");
    if (!(in.gda_alpha_lambda > in.gda_alpha_theta))
        throw ConfigError("training.gda.alpha_lambda must exceed training.gda.alpha_theta");
    return in;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "", {"seed", "scale", "k_pairs", "p_max", "noise", "episodes", "model", "loss", "memory_capacity",
                       "training", "methods", "record_wall_time", "output_dir"});

    ExperimentConfig cfg;
    if (!j.contains("seed")) throw ConfigError("config field 'seed' is required");
    read(j, "seed", cfg.seed, "");
    read(j, "scale", cfg.scale, "");
    if (!(cfg.scale > 0.0)) throw ConfigError("config field 'scale' must be positive");
    read(j, "k_pairs", cfg.k_pairs, "");
    if (cfg.k_pairs == 0) throw ConfigError("config field 'k_pairs' must be positive");
    read(j, "p_max", cfg.system.p_max, "");
    read(j, "noise", cfg.system.noise, "");
    if (!(cfg.system.p_max > 0.0)) throw ConfigError("config field 'p_max' must be positive");
    if (!(cfg.system.noise > 0.0)) throw ConfigError("config field 'noise' must be positive");
    std::string out_dir = cfg.output_dir.string();
    read(j, "output_dir", out_dir, "");
    cfg.output_dir = out_dir;

    if (j.contains("episodes")) {
        if (!j["episodes"].is_array()) throw ConfigError("config field 'episodes' must be a list");
        std::size_t i = 0;
        for (const auto& e : j["episodes"]) {
            const std::string where = "episodes[" + std::to_string(i++) + "]";
            check_keys(e, where, {"distribution", "area_side_m", "n_train", "n_test", "n_batches"});
            EpisodeSpec s;
            std::string dist = "rayleigh";
            read(e, "distribution", dist, where);
            s.distribution = distribution_from_string(dist);
            read(e, "area_side_m", s.area_side_m, where);
            read(e, "n_train", s.n_train, where);
            read(e, "n_test", s.n_test, where);
            read(e, "n_batches", s.n_batches, where);
            if (s.n_batches == 0) throw ConfigError(where + ".n_batches must be positive");
            if (s.n_train == 0 || s.n_train % s.n_batches != 0)
                throw ConfigError(where + ".n_train (" + std::to_string(s.n_train) +
                                  ") must be a positive multiple of n_batches (" + std::to_string(s.n_batches) + ")");
            if (s.n_test == 0) throw ConfigError(where + ".n_test must be positive");
            if (s.distribution == Distribution::Geometry && !(s.area_side_m > 0.0))
                throw ConfigError(where + ".area_side_m must be positive for geometry");
            cfg.episodes.push_back(s);
        }
        if (cfg.episodes.empty()) throw ConfigError("config field 'episodes' is empty");
    } else {
        const std::size_t n_train = scaled(20000, cfg.scale);
        const std::size_t n_test = scaled(1000, cfg.scale);
        if (n_train == 0 || n_test == 0 || n_train % 4 != 0)
            throw ConfigError("config field 'scale' yields an unusable default episode size");
        cfg.episodes = {{Distribution::Rayleigh, 0.0, n_train, n_test, 4},
                        {Distribution::Rician, 0.0, n_train, n_test, 4},
                        {Distribution::Geometry, 10.0, n_train, n_test, 4},
                        {Distribution::Geometry, 50.0, n_train, n_test, 4}};
    }

    if (j.contains("model")) {
        check_keys(j["model"], "model", {"hidden"});
        read(j["model"], "hidden", cfg.hidden, "model");
        for (auto h : cfg.hidden)
            if (h == 0) throw ConfigError("model.hidden sizes must be positive");
    }

    LossSpec loss;
    loss.system = cfg.system;
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        check_keys(l, "loss", {"upper", "lower", "alpha_mode"});
        std::string s;
        if (l.contains("upper")) { read(l, "upper", s, "loss"); loss.upper = upper_loss_from_string(s); }
        if (l.contains("lower")) { read(l, "lower", s, "loss"); loss.lower = lower_loss_from_string(s); }
        if (l.contains("alpha_mode")) { read(l, "alpha_mode", s, "loss"); loss.alpha_mode = alpha_mode_from_string(s); }
    }

    std::size_t memory = scaled(2000, cfg.scale);
    read(j, "memory_capacity", memory, "");
    bool wall = true;
    read(j, "record_wall_time", wall, "");
    const InnerConfig inner = j.contains("training") ? parse_inner(j["training"]) : InnerConfig{};

    auto base = [&](Method m) {
        StrategyConfig sc;
        sc.method = m;
        sc.memory_capacity = memory;
        sc.inner = inner;
        sc.loss = loss;
        sc.record_wall_time = wall;
        return sc;
    };
    if (j.contains("methods")) {
        if (!j["methods"].is_array()) throw ConfigError("config field 'methods' must be a list");
        std::size_t i = 0;
        for (const auto& m : j["methods"]) {
            const std::string where = "methods[" + std::to_string(i++) + "]";
            if (m.is_string()) {
                cfg.methods.push_back(base(method_from_string(m.get<std::string>())));
            } else {
                check_keys(m, where, {"method", "memory_capacity"});
                std::string name;
                read(m, "method", name, where);
                auto sc = base(method_from_string(name));
                read(m, "memory_capacity", sc.memory_capacity, where);
                cfg.methods.push_back(sc);
            }
        }
    } else {
        for (auto m : kAllMethods) cfg.methods.push_back(base(m));
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t derive_seed(std::uint64_t seed, Method method) {
    // splitmix64 finaliser over (seed, method index)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(method) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace wcl
