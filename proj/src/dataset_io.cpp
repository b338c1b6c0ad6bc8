#include "wcl/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "wcl/errors.hpp"

namespace wcl {

using nlohmann::json;

void attach_wmmse_labels(EpisodeStream& stream, const SystemParams& sys, int max_iters, double tol) {
    stream.for_each_sample([&](ChannelSample& s) {
        auto sol = wmmse(make_problem(s, sys), max_iters, tol);
        s.p_label = std::move(sol.p);
        s.rbar = sol.rate;
    });
}

namespace {

json spec_to_json(const EpisodeSpec& s) {
    json j;
    j["distribution"] = to_string(s.distribution);
    if (s.distribution == Distribution::Geometry) j["area_side_m"] = s.area_side_m;
    j["n_train"] = s.n_train;
    j["n_test"] = s.n_test;
    j["n_batches"] = s.n_batches;
    return j;
}

json sample_to_json(const ChannelSample& s, const char* split) {
    json j;
    j["k"] = s.k_pairs;
    j["episode"] = s.episode_id;
    if (split) j["split"] = split;
    j["h_re"] = s.h_re;
    j["h_im"] = s.h_im;
    if (!s.p_label.empty()) j["p_label"] = s.p_label;
    if (s.rbar) j["rbar"] = *s.rbar;
    return j;
}

template <typename T>
T field(const json& j, const char* name, std::size_t line) {
    auto it = j.find(name);
    if (it == j.end()) throw FormatError(line, name, "missing field");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw FormatError(line, name, std::string("wrong type: ") + e.what());
    }
}

json parse_line(const std::string& text, std::size_t line) {
    try {
        auto j = json::parse(text);
        if (!j.is_object()) throw FormatError(line, "", "record is not a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw FormatError(line, "", std::string("malformed record: ") + e.what());
    }
}

ChannelSample sample_from_json(const json& j, std::size_t line, std::size_t k, int episode, const char* split) {
    ChannelSample s;
    s.k_pairs = field<std::size_t>(j, "k", line);
    if (s.k_pairs != k)
        throw SchemaError(line, "k", "record has K = " + std::to_string(s.k_pairs) + " but the header says " +
                                         std::to_string(k));
    s.episode_id = field<int>(j, "episode", line);
    if (s.episode_id != episode)
        throw SchemaError(line, "episode", "expected episode " + std::to_string(episode));
    if (field<std::string>(j, "split", line) != split)
        throw SchemaError(line, "split", std::string("expected a ") + split + " record");
    s.h_re = field<std::vector<double>>(j, "h_re", line);
    if (s.h_re.size() != k * k) throw SchemaError(line, "h_re", "expected K*K entries");
    s.h_im = field<std::vector<double>>(j, "h_im", line);
    if (s.h_im.size() != k * k) throw SchemaError(line, "h_im", "expected K*K entries");
    if (j.contains("p_label")) {
        s.p_label = field<std::vector<double>>(j, "p_label", line);
        if (s.p_label.size() != k) throw SchemaError(line, "p_label", "expected K entries");
    }
    if (j.contains("rbar")) s.rbar = field<double>(j, "rbar", line);
    return s;
}

}  // namespace

void write_dataset(const Dataset& data, std::ostream& out) {
    const auto& st = data.stream;
    json header;
    header["version"] = kDatasetVersion;
    header["k"] = st.k_pairs();
    header["p_max"] = data.system.p_max;
    header["noise"] = data.system.noise;
    header["specs"] = json::array();
    for (const auto& s : st.specs()) header["specs"].push_back(spec_to_json(s));
    out << header.dump() << '\n';

    std::size_t t = 0;
    for (std::size_t e = 0; e < st.specs().size(); ++e) {
        for (std::size_t b = 0; b < st.specs()[e].n_batches; ++b, ++t)
            for (const auto& s : st.batch(t)) out << sample_to_json(s, "train").dump() << '\n';
        for (const auto& s : st.test_sets()[e]) out << sample_to_json(s, "test").dump() << '\n';
    }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset " + path.string());
    write_dataset(data, out);
    if (!out) throw IoError("failed writing dataset " + path.string());
}

Dataset read_dataset(std::istream& in) {
    std::string text;
    std::size_t line = 0;
    auto next = [&](const char* expecting) -> json {
        if (!std::getline(in, text))
            throw FormatError(line + 1, "", std::string("unexpected end of file, expected ") + expecting);
        ++line;
        return parse_line(text, line);
    };

    const json header = next("the header");
    const int version = field<int>(header, "version", line);
    if (version != kDatasetVersion) throw SchemaError(line, "version", "unsupported version " + std::to_string(version));
    const auto k = field<std::size_t>(header, "k", line);
    if (k == 0) throw SchemaError(line, "k", "K must be positive");
    SystemParams sys;
    sys.p_max = field<double>(header, "p_max", line);
    sys.noise = field<double>(header, "noise", line);

    std::vector<EpisodeSpec> specs;
    for (const auto& js : field<json>(header, "specs", line)) {
        EpisodeSpec s;
        s.distribution = distribution_from_string(field<std::string>(js, "distribution", line));
        if (s.distribution == Distribution::Geometry) s.area_side_m = field<double>(js, "area_side_m", line);
        s.n_train = field<std::size_t>(js, "n_train", line);
        s.n_test = field<std::size_t>(js, "n_test", line);
        s.n_batches = field<std::size_t>(js, "n_batches", line);
        if (s.n_batches == 0 || s.n_train % s.n_batches != 0)
            throw SchemaError(line, "specs", "n_train must be a positive multiple of n_batches");
        specs.push_back(s);
    }
    if (specs.empty()) throw SchemaError(line, "specs", "no episodes");

    std::vector<std::vector<ChannelSample>> batches;
    std::vector<int> batch_episodes;
    std::vector<std::vector<ChannelSample>> test_sets;
    for (std::size_t e = 0; e < specs.size(); ++e) {
        const auto& s = specs[e];
        const std::size_t per = s.n_train / s.n_batches;
        const int ep = static_cast<int>(e);
        for (std::size_t b = 0; b < s.n_batches; ++b) {
            std::vector<ChannelSample> batch;
            batch.reserve(per);
            for (std::size_t i = 0; i < per; ++i) {
                const auto j = next("a train record");
                batch.push_back(sample_from_json(j, line, k, ep, "train"));
            }
            batches.push_back(std::move(batch));
            batch_episodes.push_back(ep);
        }
        std::vector<ChannelSample> test;
        test.reserve(s.n_test);
        for (std::size_t i = 0; i < s.n_test; ++i) {
            const auto j = next("a test record");
            test.push_back(sample_from_json(j, line, k, ep, "test"));
        }
        test_sets.push_back(std::move(test));
    }
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty()) throw SchemaError(line, "", "more records than the header declares");
    }
    return Dataset{EpisodeStream(k, std::move(specs), std::move(batches), std::move(batch_episodes),
                                 std::move(test_sets)),
                   sys};
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset " + path.string());
    return read_dataset(in);
}

void write_samples(std::span<const ChannelSample> samples, std::ostream& out) {
    for (const auto& s : samples) out << sample_to_json(s, nullptr).dump() << '\n';
}

}  // namespace wcl
