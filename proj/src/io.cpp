#include "twistlab/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace twistlab::io {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) f << ',';
            f << csv_field(row[i]);
        }
        f << "\r\n";
    };
    if (!header.empty()) emit(header);
    for (const auto& row : rows) emit(row);
}

void write_configuration_csv(const std::string& path, const variational::Configuration& config) {
    const int n = config.points.empty() ? 0 : static_cast<int>(config.points[0].size());
    std::vector<std::string> header{"index"};
    for (int d = 0; d < n; ++d) header.push_back("q" + std::to_string(d));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < config.points.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (int d = 0; d < n; ++d) row.push_back(format_double(config.points[i][d]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_orbit_csv(const std::string& path, const variational::OrbitSegment& orbit) {
    const int n = orbit.points.empty() ? 0 : orbit.points[0].dim();
    std::vector<std::string> header{"index"};
    for (int d = 0; d < n; ++d) header.push_back("q" + std::to_string(d));
    for (int d = 0; d < n; ++d) header.push_back("p" + std::to_string(d));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < orbit.points.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (int d = 0; d < n; ++d) row.push_back(format_double(orbit.points[i].q[d]));
        for (int d = 0; d < n; ++d) row.push_back(format_double(orbit.points[i].p[d]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_grid_csv(const std::string& path, const weakkam::SubactionGrid& grid) {
    std::vector<std::string> header;
    for (int d = 0; d < grid.n; ++d) header.push_back("x" + std::to_string(d));
    header.push_back("value");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Vec x = grid.node(i);
        std::vector<std::string> row;
        for (int d = 0; d < grid.n; ++d) row.push_back(format_double(x[d]));
        row.push_back(format_double(grid.values[i]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_grid_binary(const std::string& path, const weakkam::SubactionGrid& grid) {
    static_assert(std::endian::native == std::endian::little, "binary grid format is little-endian");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::uint32_t header[3] = {static_cast<std::uint32_t>(grid.n),
                               static_cast<std::uint32_t>(grid.resolution),
                               grid.kind == weakkam::Kind::Backward ? 0u : 1u};
    f.write(reinterpret_cast<const char*>(header), sizeof(header));
    f.write(reinterpret_cast<const char*>(grid.values.data()),
            static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
}

weakkam::SubactionGrid read_grid_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::uint32_t header[3];
    f.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!f) throw std::runtime_error("truncated grid file " + path);
    auto grid = weakkam::SubactionGrid::zeros(static_cast<int>(header[0]), static_cast<int>(header[1]),
                                              header[2] == 0 ? weakkam::Kind::Backward
                                                             : weakkam::Kind::Forward);
    f.read(reinterpret_cast<char*>(grid.values.data()),
           static_cast<std::streamsize>(grid.values.size() * sizeof(double)));
    if (!f) throw std::runtime_error("truncated grid file " + path);
    return grid;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace twistlab::io
