#pragma once

#include <string>
#include <vector>

#include "twistlab/types.hpp"
#include "twistlab/variational.hpp"
#include "twistlab/weak_kam.hpp"

namespace twistlab::io {

/// 17 significant digits, '.' decimal separator.
std::string format_double(double v);

/// RFC 4180: CRLF rows, fields quoted only when needed.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_configuration_csv(const std::string& path, const variational::Configuration& config);
void write_orbit_csv(const std::string& path, const variational::OrbitSegment& orbit);

void write_grid_csv(const std::string& path, const weakkam::SubactionGrid& grid);

/// Header: uint32 n, N_g, kind; then row-major little-endian doubles.
void write_grid_binary(const std::string& path, const weakkam::SubactionGrid& grid);
weakkam::SubactionGrid read_grid_binary(const std::string& path);

/// FNV-1a over the raw bytes; stable across runs and platforms.
std::uint64_t fnv1a(const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace twistlab::io
