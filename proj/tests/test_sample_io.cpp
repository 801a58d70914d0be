#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "uldmc/errors.hpp"
#include "uldmc/sample_io.hpp"

using namespace uldmc;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("uldmc_io_" + name)).string();
}

SampleSet random_set(Eigen::Index d, Eigen::Index count, std::uint64_t seed) {
    Rng rng(seed);
    SampleSet s;
    s.dim = d;
    s.states.resize(count, 2 * d);
    fill_standard_normal(s.states, rng);
    s.states(0, 0) = 1e-300;
    for (Eigen::Index i = 0; i < count; ++i) s.steps.push_back(std::uint64_t(3 * i + 7));
    return s;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("CSV round trip is exact") {
    const auto path = temp_path("a.csv");
    const auto s = random_set(3, 50, 1);
    write_samples(path, s, SampleFormat::Csv);
    const auto back = read_samples(path);
    CHECK(back.dim == 3);
    CHECK(back.steps == s.steps);
    CHECK(back.states == s.states);
    CHECK(slurp(path).rfind("step,x0,x1,x2,v0,v1,v2\n", 0) == 0);
    std::remove(path.c_str());
}

TEST_CASE("binary round trip and layout") {
    const auto path = temp_path("a.bin");
    const auto s = random_set(2, 10, 2);
    write_samples(path, s, SampleFormat::Binary);
    const auto bytes = slurp(path);
    CHECK(bytes.size() == 16 + 10 * 5 * 8);
    CHECK(bytes.substr(0, 4) == "ULDS");
    std::uint32_t header[3];
    std::memcpy(header, bytes.data() + 4, sizeof header);
    CHECK(header[0] == kSampleFormatVersion);
    CHECK(header[1] == 2);
    CHECK(header[2] == 10);
    double first[5];
    std::memcpy(first, bytes.data() + 16, sizeof first);
    CHECK(first[0] == 7.0);
    CHECK(first[1] == s.states(0, 0));
    CHECK(first[4] == s.states(0, 3));

    const auto back = read_samples(path);
    CHECK(back.states == s.states);
    CHECK(back.steps == s.steps);
    CHECK(back.positions() == s.states.leftCols(2));
    std::remove(path.c_str());
}

TEST_CASE("malformed sample files") {
    const auto path = temp_path("bad.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out.write("ULDS", 4);
        const std::uint32_t h[3] = {1, 2, 10};
        out.write(reinterpret_cast<const char*>(h), sizeof h);
    }
    CHECK_THROWS_AS(read_samples(path), Error);
    {
        std::ofstream out(path);
        out << "step,x0,v0\n1,2\n";
    }
    CHECK_THROWS_AS(read_samples(path), Error);
    std::remove(path.c_str());
    CHECK_THROWS_WITH_AS(read_samples(path), doctest::Contains("IoError"), Error);
    CHECK_THROWS_WITH_AS(write_samples("/nonexistent-dir/x.csv", random_set(1, 2, 3), SampleFormat::Csv),
                         doctest::Contains("IoError"), Error);
}
