#include "uldmc/sample_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "uldmc/errors.hpp"

namespace uldmc {

namespace {

static_assert(std::endian::native == std::endian::little, "binary sample format assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'U', 'L', 'D', 'S'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SampleSet read_binary(std::istream& in, const std::string& path) {
    in.seekg(4);
    const auto version = get_u32(in);
    const auto d = get_u32(in);
    const auto count = get_u32(in);
    if (!in) fail(Errc::IoError, path + ": truncated header");
    if (version != kSampleFormatVersion) fail(Errc::IoError, path + ": unsupported version " + std::to_string(version));
    SampleSet s;
    s.dim = d;
    s.states.resize(count, 2 * Eigen::Index(d));
    s.steps.resize(count);
    std::vector<double> rec(1 + 2 * std::size_t(d));
    for (std::uint32_t r = 0; r < count; ++r) {
        in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size() * sizeof(double)));
        if (!in) fail(Errc::IoError, path + ": truncated record " + std::to_string(r));
        s.steps[r] = static_cast<std::uint64_t>(rec[0]);
        for (std::size_t j = 0; j < 2 * std::size_t(d); ++j) s.states(r, Eigen::Index(j)) = rec[1 + j];
    }
    return s;
}

SampleSet read_csv(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) fail(Errc::IoError, path + ": empty file");
    const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',')) + 1;
    if (line.rfind("step", 0) != 0 || columns < 3 || (columns - 1) % 2 != 0) {
        fail(Errc::IoError, path + ": unrecognized sample header");
    }
    SampleSet s;
    s.dim = (columns - 1) / 2;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail(Errc::IoError, path + ":" + std::to_string(lineno) + ": bad number");
            }
        }
        if (static_cast<Eigen::Index>(row.size()) != columns) {
            fail(Errc::IoError, path + ":" + std::to_string(lineno) + ": wrong column count");
        }
        rows.push_back(std::move(row));
    }
    s.states.resize(static_cast<Eigen::Index>(rows.size()), 2 * s.dim);
    s.steps.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        s.steps[r] = static_cast<std::uint64_t>(rows[r][0]);
        for (Eigen::Index j = 0; j < 2 * s.dim; ++j) s.states(Eigen::Index(r), j) = rows[r][std::size_t(j) + 1];
    }
    return s;
}

} // namespace

void write_samples(const std::string& path, const SampleSet& samples, SampleFormat format) {
    if (samples.states.cols() != 2 * samples.dim || samples.steps.size() != std::size_t(samples.count())) {
        fail(Errc::InvalidInput, "write_samples: inconsistent sample set");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot open '" + path + "' for writing");
    const auto d = samples.dim;
    if (format == SampleFormat::Binary) {
        out.write(kMagic.data(), 4);
        put_u32(out, kSampleFormatVersion);
        put_u32(out, static_cast<std::uint32_t>(d));
        put_u32(out, static_cast<std::uint32_t>(samples.count()));
        for (Eigen::Index r = 0; r < samples.count(); ++r) {
            const double step = static_cast<double>(samples.steps[std::size_t(r)]);
            out.write(reinterpret_cast<const char*>(&step), sizeof step);
            for (Eigen::Index j = 0; j < 2 * d; ++j) {
                const double v = samples.states(r, j);
                out.write(reinterpret_cast<const char*>(&v), sizeof v);
            }
        }
    } else {
        out << "step";
        for (Eigen::Index j = 0; j < d; ++j) out << ",x" << j;
        for (Eigen::Index j = 0; j < d; ++j) out << ",v" << j;
        out << '\n';
        for (Eigen::Index r = 0; r < samples.count(); ++r) {
            out << samples.steps[std::size_t(r)];
            for (Eigen::Index j = 0; j < 2 * d; ++j) out << ',' << format_double(samples.states(r, j));
            out << '\n';
        }
    }
    if (!out) fail(Errc::IoError, "write to '" + path + "' failed");
}

SampleSet read_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open '" + path + "'");
    std::array<char, 4> head{};
    in.read(head.data(), 4);
    if (in.gcount() == 4 && head == kMagic) return read_binary(in, path);
    in.clear();
    in.seekg(0);
    return read_csv(in, path);
}

} // namespace uldmc
