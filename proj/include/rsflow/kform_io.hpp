/// @file kform_io.hpp
/// @brief KForm files: RSFF data with one component per tuple plus a JSON sidecar.
///
/// The sidecar (<path>.json) records dim, degree and the 1-based tuples in
/// lexicographic order; component i of the RSFF file is tuple i.
#pragma once

#include <filesystem>

#include "rsflow/kform.hpp"

namespace rsflow {

struct KFormFile {
    KForm form;
    Grid grid;
    double time = 0.0;
};

std::filesystem::path kform_sidecar_path(const std::filesystem::path& rsff_path);

void write_kform(const std::filesystem::path& rsff_path, const KForm& form, const Grid& grid, double time);

/// Throws ContractError when the sidecar and data disagree.
KFormFile read_kform(const std::filesystem::path& rsff_path);

}  // namespace rsflow
