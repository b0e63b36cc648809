#include "rsflow/kform_io.hpp"

#include <fstream>
#include "json.hpp"

#include "rsflow/rsff_io.hpp"

namespace rsflow {

std::filesystem::path kform_sidecar_path(const std::filesystem::path& rsff_path) {
    auto p = rsff_path;
    p += ".json";
    return p;
}

void write_kform(const std::filesystem::path& rsff_path, const KForm& form, const Grid& grid, double time) {
    if (form.dim() != grid.dim()) throw ContractError("write_kform: dimension mismatch");
    std::vector<ScalarField> comps;
    nlohmann::json tuples = nlohmann::json::array();
    for (const auto& [I, c] : form.terms()) {
        require_same_grid(c.grid(), grid, "write_kform");
        comps.push_back(c);
        nlohmann::json t = nlohmann::json::array();
        for (int a : I.axes()) t.push_back(a + 1);
        tuples.push_back(std::move(t));
    }
    write_rsff(rsff_path, VectorField(grid, std::move(comps)), time);
    nlohmann::json side = {{"dim", form.dim()}, {"degree", form.degree()}, {"tuples", tuples}};
    std::ofstream out(kform_sidecar_path(rsff_path));
    if (!out) throw std::runtime_error("write_kform: cannot write sidecar");
    out << side.dump(2) << '\n';
}

KFormFile read_kform(const std::filesystem::path& rsff_path) {
    std::ifstream in(kform_sidecar_path(rsff_path));
    if (!in) throw ContractError("read_kform: missing sidecar for " + rsff_path.string());
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("read_kform: bad sidecar: ") + e.what());
    }
    FieldFile data = read_rsff(rsff_path);
    const int dim = side.at("dim").get<int>();
    const int degree = side.at("degree").get<int>();
    const auto& tuples = side.at("tuples");
    if (dim != data.field.grid().dim()) throw ContractError("read_kform: sidecar dimension disagrees with data");
    if (tuples.size() != static_cast<std::size_t>(data.field.ncomp()))
        throw ContractError("read_kform: tuple count disagrees with component count");
    KFormFile result{KForm(dim, degree), data.field.grid(), data.time};
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        std::vector<int> axes;
        for (const auto& a : tuples[i]) axes.push_back(a.get<int>() - 1);
        result.form.set(IndexTuple(std::move(axes)), data.field[static_cast<int>(i)]);
    }
    return result;
}

}  // namespace rsflow
