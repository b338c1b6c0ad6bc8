#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracle.hpp"
#include "wcl/dataset_io.hpp"
#include "wcl/errors.hpp"

using namespace wcl;

namespace {

Dataset small_dataset() {
    Rng rng(11);
    auto st = build_stream(2, {{Distribution::Rayleigh, 0.0, 1, 1, 1}}, rng);
    attach_wmmse_labels(st, {});
    return Dataset{std::move(st), {}};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("dataset round trip is exact") {
    const auto data = small_dataset();
    const auto dir = testing::temp_dir("dataset_io");
    save_dataset(data, dir / "d.jsonl");
    const auto back = load_dataset(dir / "d.jsonl");
    CHECK(back == data);

    std::ostringstream a, b;
    write_dataset(data, a);
    write_dataset(back, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("labels are consistent with the sum-rate") {
    const auto data = small_dataset();
    const auto& s = data.stream.batch(0)[0];
    REQUIRE(s.labelled());
    CHECK(std::abs(sum_rate(make_problem(s, data.system), s.p_label) - *s.rbar) <= 1e-9);
    for (double p : s.p_label) {
        CHECK(p >= 0.0);
        CHECK(p <= data.system.p_max);
    }
}

TEST_CASE("unlabelled samples round trip") {
    Rng rng(3);
    Dataset data{build_stream(3, {{Distribution::Geometry, 10.0, 4, 2, 2}}, rng), {}};
    std::stringstream ss;
    write_dataset(data, ss);
    CHECK(read_dataset(ss) == data);
}

TEST_CASE("malformed files") {
    const auto data = small_dataset();
    std::ostringstream os;
    write_dataset(data, os);
    const auto lines = lines_of(os.str());
    REQUIRE(lines.size() == 3);

    SUBCASE("truncated record names its line") {
        std::istringstream in(lines[0] + "\n" + lines[1] + "\n" + lines[2].substr(0, lines[2].size() / 2) + "\n");
        try {
            read_dataset(in);
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("missing records") {
        std::istringstream in(lines[0] + "\n" + lines[1] + "\n");
        try {
            read_dataset(in);
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("K mismatch between header and record") {
        std::string bad = lines[1];
        bad.replace(bad.find("\"k\":2"), 5, "\"k\":3");
        std::istringstream in(lines[0] + "\n" + bad + "\n" + lines[2] + "\n");
        try {
            read_dataset(in);
            FAIL("expected a schema error");
        } catch (const SchemaError& e) {
            CHECK(e.line() == 2);
            CHECK(e.field() == "k");
        }
    }
    SUBCASE("missing field") {
        std::string bad = lines[2];
        bad.replace(bad.find("\"h_im\""), 6, "\"h_xx\"");
        std::istringstream in(lines[0] + "\n" + lines[1] + "\n" + bad + "\n");
        try {
            read_dataset(in);
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 3);
            CHECK(e.field() == "h_im");
        }
    }
    SUBCASE("unreadable path") {
        CHECK_THROWS_AS(load_dataset("/nonexistent/dir/file.jsonl"), IoError);
    }
}
