// Writes the sample meshes under data/ in the toolkit's text format.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "symot/shapes.hpp"

namespace {

using namespace symot;

DensityMesh make(const std::string& shape, int res) {
    if (shape == "square") return make_unit_square_mesh(res);
    if (shape == "disk") return make_disk_mesh({0.5, 0.5}, 0.3, res);
    if (shape == "disks2h") {
        const double r = 0.3 / std::numbers::sqrt2;
        return make_disks_mesh({{{0.25, 0.5}, r}, {{0.75, 0.5}, r}}, res);
    }
    if (shape == "disks2v") {
        const double r = 0.3 / std::numbers::sqrt2;
        return make_disks_mesh({{{0.5, 0.25}, r}, {{0.5, 0.75}, r}}, res);
    }
    if (shape == "disks3") {
        const double r = 0.3 / std::sqrt(3.0);
        return make_disks_mesh({{{0.25, 0.3}, r}, {{0.75, 0.3}, r}, {{0.5, 0.75}, r}}, res);
    }
    if (shape == "star6") return make_star_mesh({0.5, 0.5}, 0.45, 0.2, 6, res);
    if (shape == "gauss-square") {
        return make_unit_square_mesh(res, gaussian_mixture({{0.3, 0.3}, {0.7, 0.7}}, 0.12));
    }
    throw Error("unknown shape '" + shape + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate sample density meshes"};
    std::string shape;
    std::string out_path;
    int res = 12;
    app.add_option("shape", shape,
                   "square | disk | disks2h | disks2v | disks3 | star6 | gauss-square")
        ->required();
    app.add_option("output", out_path, "output .mesh path")->required();
    app.add_option("--res", res, "resolution (grid cells / rings / layers)");
    CLI11_PARSE(app, argc, argv);

    try {
        const symot::DensityMesh mesh = make(shape, res);
        std::ofstream out(out_path);
        if (!out) throw symot::Error("cannot open " + out_path);
        out << symot::mesh_to_text(mesh);
        std::cout << out_path << ": " << mesh.vertices.size() << " vertices, "
                  << mesh.triangles.size() << " triangles, mass " << mesh.total_mass() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
