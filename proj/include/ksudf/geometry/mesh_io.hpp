#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "ksudf/geometry/mesh.hpp"

namespace ksudf {

enum class MeshFormat { Auto, Obj, Ply };

struct MeshLoadResult {
    TriangleMesh mesh;
    std::size_t dropped_triangles = 0;
};

/// Reads an ASCII OBJ or an ASCII / binary PLY file. Polygons are fan
/// triangulated. Throws FormatError on malformed input and
/// InvalidInputError when the file holds no usable triangle.
MeshLoadResult load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);

MeshLoadResult parse_obj(const std::string& text);
MeshLoadResult parse_ply(const std::string& bytes);

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path);
void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace ksudf
