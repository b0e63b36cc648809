/// @file rsff_io.hpp
/// @brief Binary RSFF field files.
///
/// Layout: magic "RSFF", then little-endian u32 version = 1, u32 d,
/// u32 ncomp, u32 dims[d], f64 length[d], f64 time, followed by
/// ncomp * prod(dims) f64 values, component-major then row-major.
#pragma once

#include <filesystem>
#include <iosfwd>

#include "rsflow/field.hpp"

namespace rsflow {

struct FieldFile {
    VectorField field;
    double time = 0.0;
};

void write_rsff(std::ostream& out, const VectorField& field, double time);
void write_rsff(const std::filesystem::path& path, const VectorField& field, double time);

/// Throws ContractError on a malformed or truncated file.
FieldFile read_rsff(std::istream& in);
FieldFile read_rsff(const std::filesystem::path& path);

}  // namespace rsflow
